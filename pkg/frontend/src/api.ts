// Typed client for the engine's JSON API. The UI renders only what these
// endpoints return; it never computes or stores counts of its own.

export interface AttributeInfo {
    name: string;
    kind: string;
    size: number;
    lo: number;
}

export interface SchemaInfo {
    attributes: AttributeInfo[];
    row_count: number;
    k_arity: number;
}

export interface TreeNode {
    id: number;
    range: Record<string, [number, number]>;
    parent: number | null;
    children: number[];
}

export interface HistoryRecord {
    id: number;
    mechanism: string;
    epsilon: number;
    accepted: boolean;
}

export interface BudgetView {
    total: number;
    consumed: number;
    remaining: number;
    history: HistoryRecord[];
}

export interface AnsweredBody {
    responses: number[];
    epsilon: number;
    mechanism: string;
    free_rows: number;
    paid_rows: number;
    timestamp: number;
}

export interface RejectedBody {
    required_epsilon: number;
    remaining_budget: number;
}

export type SubmitOutcome =
    | { kind: "answered"; body: AnsweredBody }
    | { kind: "rejected"; body: RejectedBody }
    | { kind: "error"; message: string };

export interface WorkloadPayload {
    queries: Record<string, [number, number]>[];
    accuracy: { kind: "worst_error"; alpha: number; beta: number };
}

export interface ApiClient {
    schema(): Promise<SchemaInfo>;
    tree(attrs: string): Promise<{ attrs: string[]; nodes: TreeNode[] }>;
    budget(): Promise<BudgetView>;
    submitWorkload(payload: WorkloadPayload): Promise<SubmitOutcome>;
}

export class HttpApiClient implements ApiClient {
    constructor(private baseUrl: string) {}

    private async getJson<T>(path: string): Promise<T> {
        const resp = await fetch(`${this.baseUrl}${path}`);
        if (!resp.ok) {
            throw new Error(`GET ${path} failed: ${resp.status}`);
        }
        return (await resp.json()) as T;
    }

    schema(): Promise<SchemaInfo> {
        return this.getJson("/schema");
    }

    tree(attrs: string): Promise<{ attrs: string[]; nodes: TreeNode[] }> {
        return this.getJson(`/tree?attrs=${encodeURIComponent(attrs)}`);
    }

    budget(): Promise<BudgetView> {
        return this.getJson("/budget");
    }

    async submitWorkload(payload: WorkloadPayload): Promise<SubmitOutcome> {
        const resp = await fetch(`${this.baseUrl}/workload`, {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify(payload),
        });
        if (resp.status === 200) {
            return { kind: "answered", body: (await resp.json()) as AnsweredBody };
        }
        if (resp.status === 409) {
            return { kind: "rejected", body: (await resp.json()) as RejectedBody };
        }
        const detail = await resp.text();
        return { kind: "error", message: `HTTP ${resp.status}: ${detail}` };
    }
}
