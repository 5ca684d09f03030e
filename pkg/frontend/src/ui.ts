// DOM rendering for the explorer. Everything shown comes from the store,
// which mirrors the service's responses.

import type { ExplorerStore, HistoryEntry } from "./store.js";

export function render(store: ExplorerStore, root: HTMLElement, onAction: () => void): void {
    root.innerHTML = "";
    root.appendChild(budgetMeter(store));
    root.appendChild(draftForm(store, onAction));
    if (store.rejection) {
        const banner = el("div", "banner rejected");
        banner.textContent =
            `Rejected: requires ε ${store.rejection.required_epsilon.toFixed(4)}, ` +
            `remaining ${store.rejection.remaining_budget.toFixed(4)}`;
        root.appendChild(banner);
    }
    if (store.error) {
        const banner = el("div", "banner error");
        banner.textContent = store.error;
        root.appendChild(banner);
    }
    root.appendChild(historyList(store, onAction));
}

function budgetMeter(store: ExplorerStore): HTMLElement {
    const wrap = el("section", "budget");
    const b = store.budget;
    const title = el("h2");
    title.textContent = "Privacy budget";
    wrap.appendChild(title);
    if (!b) {
        return wrap;
    }
    const bar = el("div", "meter");
    const fill = el("div", "meter-fill");
    const frac = b.total > 0 ? Math.min(1, b.consumed / b.total) : 0;
    fill.style.width = `${(frac * 100).toFixed(2)}%`;
    bar.appendChild(fill);
    const label = el("div", "meter-label");
    label.textContent =
        `consumed ${b.consumed.toFixed(4)} of ${b.total.toFixed(4)} ` +
        `(remaining ${b.remaining.toFixed(4)})`;
    wrap.appendChild(bar);
    wrap.appendChild(label);
    return wrap;
}

function draftForm(store: ExplorerStore, onAction: () => void): HTMLElement {
    const wrap = el("section", "draft");
    const title = el("h2");
    title.textContent = "Workload draft";
    wrap.appendChild(title);

    const attrSel = document.createElement("select");
    for (const attr of store.schema?.attributes ?? []) {
        const opt = document.createElement("option");
        opt.value = attr.name;
        opt.textContent = `${attr.name} [0, ${attr.size})`;
        opt.selected = attr.name === store.draft.attr;
        attrSel.appendChild(opt);
    }
    attrSel.onchange = () => {
        void store.selectAttribute(attrSel.value).then(onAction);
    };
    wrap.appendChild(labelled("attribute", attrSel));

    store.draft.intervals.forEach((iv, i) => {
        const row = el("div", "interval-row");
        const lo = numberInput(iv[0], (v) => { store.draft.intervals[i][0] = v; });
        const hi = numberInput(iv[1], (v) => { store.draft.intervals[i][1] = v; });
        const del = button("×", () => {
            store.draft.intervals.splice(i, 1);
            onAction();
        });
        row.append(`range ${i}: [`, lo, ", ", hi, ") ", del);
        wrap.appendChild(row);
    });
    wrap.appendChild(button("add range", () => {
        const size = store.schema?.attributes.find((a) => a.name === store.draft.attr)?.size ?? 1;
        store.draft.intervals.push([0, size]);
        onAction();
    }));

    const alpha = document.createElement("input");
    alpha.type = "range";
    alpha.min = "0.01";
    alpha.max = "0.16";
    alpha.step = "0.01";
    alpha.value = String(store.draft.alphaFraction);
    alpha.oninput = () => {
        store.draft.alphaFraction = Number(alpha.value);
        onAction();
    };
    wrap.appendChild(labelled(
        `alpha = ${store.draft.alphaFraction.toFixed(2)} × |D| = ${store.alpha.toFixed(1)}`, alpha));

    const beta = numberInput(store.draft.beta, (v) => { store.draft.beta = v; }, "0.01");
    wrap.appendChild(labelled("beta", beta));

    const submit = button(store.pending ? "submitting…" : "submit workload", () => {
        void store.submit().then(onAction);
        onAction();
    });
    submit.disabled = store.pending;
    submit.className = "submit";
    wrap.appendChild(submit);
    return wrap;
}

function historyList(store: ExplorerStore, onAction: () => void): HTMLElement {
    const wrap = el("section", "history");
    const title = el("h2");
    title.textContent = `History (${store.history.length})`;
    wrap.appendChild(title);
    store.history.forEach((entry, idx) => {
        wrap.appendChild(historyCard(store, entry, idx, onAction));
    });
    return wrap;
}

function historyCard(
    store: ExplorerStore, entry: HistoryEntry, idx: number, onAction: () => void,
): HTMLElement {
    const card = el("article", "card");
    const head = el("div", "card-head");
    const badge = el("span", entry.epsilon === 0 ? "badge free" : "badge paid");
    badge.textContent = store.badge(entry);
    head.append(
        `#${idx} ${entry.attr} ε=${entry.epsilon.toFixed(4)} `,
        badge,
        ` free ${entry.freeRows} / paid ${entry.paidRows}`,
    );
    card.appendChild(head);

    const maxAbs = Math.max(1, ...entry.responses.map((v) => Math.abs(v)));
    const table = el("table", "responses");
    entry.intervals.forEach((iv, q) => {
        const tr = document.createElement("tr");
        const name = document.createElement("td");
        name.textContent = `[${iv[0]}, ${iv[1]})`;
        const value = document.createElement("td");
        value.textContent = entry.responses[q].toFixed(2);
        const barCell = document.createElement("td");
        barCell.className = "bar-cell";
        const bar = el("div", "bar");
        bar.style.width = `${(Math.abs(entry.responses[q]) / maxAbs * 100).toFixed(1)}%`;
        barCell.appendChild(bar);
        const drill = button("drill down", () => {
            if (store.drillDown(idx, q)) {
                onAction();
            }
        });
        drill.disabled = store.drillTargets(idx, q) === null;
        const actions = document.createElement("td");
        actions.appendChild(drill);
        tr.append(name, value, barCell, actions);
        table.appendChild(tr);
    });
    card.appendChild(table);
    return card;
}

function el(tag: string, className?: string): HTMLElement {
    const node = document.createElement(tag);
    if (className) {
        node.className = className;
    }
    return node;
}

function labelled(text: string, control: HTMLElement): HTMLElement {
    const row = el("label", "field");
    row.append(`${text}: `, control);
    return row;
}

function numberInput(value: number, set: (v: number) => void, step = "1"): HTMLInputElement {
    const input = document.createElement("input");
    input.type = "number";
    input.step = step;
    input.value = String(value);
    input.onchange = () => set(Number(input.value));
    return input;
}

function button(text: string, onClick: () => void): HTMLButtonElement {
    const b = document.createElement("button");
    b.textContent = text;
    b.onclick = onClick;
    return b;
}
