// View state and actions for the explorer, independent of the DOM so the
// behaviour is testable against a mocked service.

import type {
    ApiClient,
    BudgetView,
    RejectedBody,
    SchemaInfo,
    SubmitOutcome,
    TreeNode,
    WorkloadPayload,
} from "./api.js";

export type Interval = [number, number];

export interface Draft {
    attr: string;
    intervals: Interval[];
    alphaFraction: number; // alpha = alphaFraction * |D|
    beta: number;
}

export interface HistoryEntry {
    attr: string;
    intervals: Interval[];
    responses: number[];
    epsilon: number;
    mechanism: string;
    freeRows: number;
    paidRows: number;
    alpha: number;
    beta: number;
}

export const ALPHA_FRACTION_MIN = 0.01;
export const ALPHA_FRACTION_MAX = 0.16;

export class ExplorerStore {
    schema: SchemaInfo | null = null;
    budget: BudgetView | null = null;
    trees = new Map<string, TreeNode[]>();
    history: HistoryEntry[] = [];
    draft: Draft = { attr: "", intervals: [], alphaFraction: 0.06, beta: 0.05 };
    rejection: RejectedBody | null = null;
    error: string | null = null;
    pending = false;

    constructor(private api: ApiClient) {}

    async init(): Promise<void> {
        this.schema = await this.api.schema();
        this.budget = await this.api.budget();
        const first = this.schema.attributes[0];
        this.draft.attr = first.name;
        this.draft.intervals = [[0, first.size]];
        await this.loadTree(first.name);
    }

    async loadTree(attr: string): Promise<TreeNode[]> {
        if (!this.trees.has(attr)) {
            const body = await this.api.tree(attr);
            this.trees.set(attr, body.nodes);
        }
        return this.trees.get(attr)!;
    }

    async selectAttribute(attr: string): Promise<void> {
        const info = this.schema?.attributes.find((a) => a.name === attr);
        if (!info) {
            throw new Error(`unknown attribute ${attr}`);
        }
        this.draft.attr = attr;
        this.draft.intervals = [[0, info.size]];
        await this.loadTree(attr);
    }

    get alpha(): number {
        return this.schema ? this.draft.alphaFraction * this.schema.row_count : 0;
    }

    validateDraft(): string | null {
        if (!this.draft.intervals.length) {
            return "add at least one range";
        }
        const size = this.schema?.attributes.find((a) => a.name === this.draft.attr)?.size ?? 0;
        for (const [lo, hi] of this.draft.intervals) {
            if (!(Number.isInteger(lo) && Number.isInteger(hi) && 0 <= lo && lo < hi && hi <= size)) {
                return `invalid range [${lo}, ${hi})`;
            }
        }
        if (!(this.alpha > 0)) {
            return "alpha must be positive";
        }
        if (!(this.draft.beta > 0 && this.draft.beta < 1)) {
            return "beta must lie in (0, 1)";
        }
        return null;
    }

    payload(): WorkloadPayload {
        return {
            queries: this.draft.intervals.map(([lo, hi]) => ({ [this.draft.attr]: [lo, hi] as [number, number] })),
            accuracy: { kind: "worst_error", alpha: this.alpha, beta: this.draft.beta },
        };
    }

    // Submit the draft; on success append to history and refresh the budget
    // meter, on rejection show the banner and leave history alone.
    async submit(): Promise<SubmitOutcome> {
        const problem = this.validateDraft();
        if (problem) {
            const outcome: SubmitOutcome = { kind: "error", message: problem };
            this.error = problem;
            return outcome;
        }
        this.pending = true;
        this.rejection = null;
        this.error = null;
        try {
            const outcome = await this.api.submitWorkload(this.payload());
            if (outcome.kind === "answered") {
                this.history.push({
                    attr: this.draft.attr,
                    intervals: this.draft.intervals.map(([lo, hi]) => [lo, hi] as Interval),
                    responses: outcome.body.responses,
                    epsilon: outcome.body.epsilon,
                    mechanism: outcome.body.mechanism,
                    freeRows: outcome.body.free_rows,
                    paidRows: outcome.body.paid_rows,
                    alpha: this.alpha,
                    beta: this.draft.beta,
                });
            } else if (outcome.kind === "rejected") {
                this.rejection = outcome.body;
            } else {
                this.error = outcome.message;
            }
            // The meter always mirrors the service's ledger, not client math.
            this.budget = await this.api.budget();
            return outcome;
        } finally {
            this.pending = false;
        }
    }

    // Children ranges of the tree node matching one answered query; null for
    // leaves (the control is disabled) or unknown ranges.
    drillTargets(entryIndex: number, queryIndex: number): Interval[] | null {
        const entry = this.history[entryIndex];
        if (!entry) {
            return null;
        }
        const nodes = this.trees.get(entry.attr);
        if (!nodes) {
            return null;
        }
        const wanted = entry.intervals[queryIndex];
        const node = nodes.find((n) => {
            const r = n.range[entry.attr];
            return r && r[0] === wanted[0] && r[1] === wanted[1];
        });
        if (!node || node.children.length === 0) {
            return null;
        }
        const byId = new Map(nodes.map((n) => [n.id, n]));
        return node.children.map((id) => {
            const child = byId.get(id)!;
            return [child.range[entry.attr][0], child.range[entry.attr][1]] as Interval;
        });
    }

    // Prefill the draft with the children of an answered query's node.
    drillDown(entryIndex: number, queryIndex: number): boolean {
        const targets = this.drillTargets(entryIndex, queryIndex);
        if (!targets) {
            return false;
        }
        this.draft.attr = this.history[entryIndex].attr;
        this.draft.intervals = targets;
        return true;
    }

    badge(entry: HistoryEntry): string {
        return entry.epsilon === 0 ? "free (cache)" : entry.mechanism;
    }
}
