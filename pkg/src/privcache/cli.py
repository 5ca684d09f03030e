"""Command-line surface: interactive REPL, batch runner, and HTTP server.

The REPL mirrors the HTTP API one to one (query, budget, tree, stats,
reset); batch mode replays a workload-log file and emits a charge CSV.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import shlex
import sys

from .engine import Engine, EngineConfig, Rejected, WorkloadRequest
from .schema import SchemaError


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="privcache")
    parser.add_argument("--config", required=True, help="engine config JSON")
    parser.add_argument("--serve", metavar="ADDR:PORT", help="run the HTTP service")
    parser.add_argument("--batch", metavar="FILE", help="workload-log JSON to replay")
    parser.add_argument("--out", metavar="FILE", help="CSV output for batch mode")
    parser.add_argument("--state", metavar="FILE",
                        help="persist cache and ledger here across sessions")
    args = parser.parse_args(argv)

    engine = Engine.from_config(EngineConfig.from_json(args.config))
    if args.state and os.path.exists(args.state):
        engine.load_state(args.state)

    try:
        if args.serve:
            from .service import create_app
            import uvicorn

            host, _, port = args.serve.rpartition(":")
            uvicorn.run(create_app(engine), host=host or "127.0.0.1", port=int(port))
            return 0
        if args.batch:
            return run_batch(engine, args.batch, args.out or "-")
        return repl(engine)
    finally:
        if args.state:
            engine.save_state(args.state)


def run_batch(engine: Engine, batch_path: str, out_path: str) -> int:
    """Replay a JSON list of workload requests; emit per-workload charges."""
    with open(batch_path, "r", encoding="utf-8") as fh:
        docs = json.load(fh)
    rows = []
    cumulative = 0.0
    for i, doc in enumerate(docs):
        result = engine.process(WorkloadRequest.from_json(doc))
        if isinstance(result, Rejected):
            rows.append((i, "rejected", "", f"{cumulative:.6f}"))
        else:
            cumulative += result.epsilon
            rows.append((i, result.mechanism, f"{result.epsilon:.6f}", f"{cumulative:.6f}"))
    out = sys.stdout if out_path == "-" else open(out_path, "w", newline="", encoding="utf-8")
    try:
        writer = csv.writer(out)
        writer.writerow(["index", "mechanism", "epsilon", "cumulative_epsilon"])
        writer.writerows(rows)
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


REPL_HELP = """commands:
  query <workload.json>   answer a workload request file
  query {inline json}     answer an inline workload request
  budget                  show the ledger
  tree <attr[,attr]>      show strategy tree nodes
  stats <attr[,attr]>     show cache statistics
  reset [seed] [budget]   fresh ledger and caches
  quit
"""


def repl(engine: Engine) -> int:
    print("privcache repl; 'help' lists commands")
    while True:
        try:
            line = input("> ").strip()
        except EOFError:
            return 0
        if not line:
            continue
        cmd, _, rest = line.partition(" ")
        try:
            if cmd == "quit":
                return 0
            elif cmd == "help":
                print(REPL_HELP, end="")
            elif cmd == "query":
                rest = rest.strip()
                if rest.startswith("{"):
                    doc = json.loads(rest)
                else:
                    with open(rest, "r", encoding="utf-8") as fh:
                        doc = json.load(fh)
                result = engine.process(WorkloadRequest.from_json(doc))
                if isinstance(result, Rejected):
                    print(json.dumps({
                        "rejected": True,
                        "required_epsilon": result.required_epsilon,
                        "remaining_budget": result.remaining_budget,
                    }))
                else:
                    print(json.dumps({
                        "responses": [float(v) for v in result.responses],
                        "epsilon": result.epsilon,
                        "mechanism": result.mechanism,
                        "free_rows": result.free_rows,
                        "paid_rows": result.paid_rows,
                    }))
            elif cmd == "budget":
                print(json.dumps(engine.budget_view()))
            elif cmd == "tree":
                print(json.dumps(engine.tree_export(rest.split(","))))
            elif cmd == "stats":
                print(json.dumps(engine.cache_stats(rest.split(","))))
            elif cmd == "reset":
                parts = shlex.split(rest)
                seed = int(parts[0]) if parts else None
                budget = float(parts[1]) if len(parts) > 1 else None
                engine.reset(seed=seed, total_budget=budget)
                print("ok")
            else:
                print(f"unknown command {cmd!r}; 'help' lists commands")
        except (SchemaError, OSError, json.JSONDecodeError, ValueError) as exc:
            print(f"error: {exc}")


if __name__ == "__main__":
    raise SystemExit(main())
