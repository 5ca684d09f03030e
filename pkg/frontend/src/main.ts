import { HttpApiClient } from "./api.js";
import { ExplorerStore } from "./store.js";
import { render } from "./ui.js";

const params = new URLSearchParams(window.location.search);
const base = params.get("api") ?? "http://127.0.0.1:8080";

const store = new ExplorerStore(new HttpApiClient(base));
const root = document.getElementById("app")!;

function redraw(): void {
    render(store, root, redraw);
}

store
    .init()
    .then(redraw)
    .catch((err) => {
        root.textContent = `failed to reach the engine at ${base}: ${err}`;
    });
