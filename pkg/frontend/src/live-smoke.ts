// End-to-end smoke against a running engine: exercises the same store the
// browser uses and checks the acceptance behaviours over real HTTP.
// Usage: node dist/live-smoke.js [base-url]

import { HttpApiClient } from "./api.js";
import { ExplorerStore } from "./store.js";

const base = process.argv[2] ?? "http://127.0.0.1:8123";

function check(cond: boolean, what: string): void {
    if (!cond) {
        throw new Error(`smoke failed: ${what}`);
    }
    console.log(`ok: ${what}`);
}

async function main(): Promise<void> {
    const store = new ExplorerStore(new HttpApiClient(base));
    await store.init();
    check(store.schema !== null && store.budget !== null, "schema and budget load");
    const attr = store.draft.attr;
    const k = store.schema!.k_arity;

    const before = store.budget!.consumed;
    const outcome = await store.submit();
    check(outcome.kind === "answered", "full-domain workload answered");
    check(store.history.length === 1, "history grew by one");
    const epsilon = store.history[0].epsilon;
    check(
        Math.abs(store.budget!.consumed - (before + epsilon)) < 1e-9,
        `meter moved by the reported epsilon (${epsilon.toFixed(4)})`,
    );

    check(store.drillDown(0, 0), "drill-down on the root is enabled");
    check(store.draft.intervals.length === k, `drill-down prefills ${k} children ranges`);
    const tree = store.trees.get(attr)!;
    const root = tree.find((n) => n.parent === null)!;
    const expected = root.children.map((id) => tree.find((n) => n.id === id)!.range[attr]);
    check(
        JSON.stringify(store.draft.intervals) === JSON.stringify(expected),
        "prefilled ranges equal the root's children",
    );

    const second = await store.submit();
    check(second.kind === "answered", "children workload answered");

    // repeat the children workload: the structured cache answers it for free
    const third = await store.submit();
    check(third.kind === "answered" && third.body.epsilon === 0, "identical repeat is free");
    console.log("live smoke passed");
}

main().catch((err) => {
    console.error(String(err));
    process.exit(1);
});
