"""Command-line client for the physbench service.

Subcommands assemble a request from local files and flags, send it to the
service (in-process by default, or a remote instance via --server), and
write the returned report and CSV tables. All computation happens behind
the HTTP surface; this module only does I/O and exit-code mapping:

    0  success, all pass rules hold
    1  run completed but a pass rule failed, or per-video failures with --strict
    2  invalid configuration
    3  missing input file
"""

from __future__ import annotations

import argparse
import asyncio
import json
import os
import sys
from pathlib import Path

import httpx

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_MISSING = 3

_STATUS_EXIT = {400: EXIT_CONFIG, 404: EXIT_MISSING, 422: EXIT_FAILED}


class ServiceClient:
    """POST/GET against a remote server or the in-process app."""

    def __init__(self, server: str | None = None):
        self.server = server

    def request(self, method: str, path: str, payload: dict | None = None) -> tuple[int, dict]:
        if self.server:
            with httpx.Client(base_url=self.server, timeout=600.0) as client:
                resp = client.request(method, path, json=payload)
                return resp.status_code, resp.json()
        from .service import app

        async def go():
            transport = httpx.ASGITransport(app=app)
            async with httpx.AsyncClient(
                transport=transport, base_url="http://physbench.local", timeout=600.0
            ) as client:
                resp = await client.request(method, path, json=payload)
                return resp.status_code, resp.json()

        return asyncio.run(go())

    def post(self, path: str, payload: dict) -> tuple[int, dict]:
        return self.request("POST", path, payload)


def _load_json(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        print(f"error: input not found: {p}", file=sys.stderr)
        raise SystemExit(EXIT_MISSING)
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as e:
        print(f"error: invalid JSON in {p}: {e}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _apply_overrides(doc: dict, args) -> dict:
    doc = dict(doc)
    if getattr(args, "seed", None) is not None:
        doc["seed"] = args.seed
    elif "seed" not in doc and os.environ.get("PHYSBENCH_SEED"):
        doc["seed"] = int(os.environ["PHYSBENCH_SEED"])
    if getattr(args, "strict", False):
        doc["strict"] = True
    if getattr(args, "jobs", None) is not None:
        doc["jobs"] = args.jobs
    return doc


def _error_exit(status: int, body: dict) -> int:
    print(f"error: {body.get('error', status)}: {body.get('message', '')}", file=sys.stderr)
    return _STATUS_EXIT.get(status, EXIT_FAILED)


def _write_outputs(out_dir: str | None, body: dict) -> None:
    if out_dir is None:
        return
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(
        json.dumps(body["report"], sort_keys=True, indent=1) + "\n"
    )
    for name, csv_text in body.get("tables", {}).items():
        (out / f"{name}.csv").write_text(csv_text)


def _print_summary(body: dict) -> None:
    report = body["report"]
    for row in report["rows"]:
        if "material" in row:
            rng = ""
            if row["gt_low"] is not None:
                rng = f"  gt [{row['gt_low']}, {row['gt_high']}] in_range={row['in_range']}"
            print(
                f"{row['material']:<16} n={row['n']:<3} "
                f"mean={row['mean']:.6g} std={row['std']:.3g} {row['unit']}{rng}"
            )
        elif "scenario" in row:
            miou = "n/a" if row["mean_miou"] is None else f"{row['mean_miou']:.4f}"
            rmse = "n/a" if row["mean_bg_rmse"] is None else f"{row['mean_bg_rmse']:.4f}"
            print(f"{row['scenario']:<24} miou={miou} bg_rmse={rmse} n={row['n_videos']}")
        elif "path" in row:
            print(f"wrote {row['path']}")
    for f in report["failures"]:
        print(f"failure: {f['source']}: {f['error']}: {f['message']}", file=sys.stderr)


def _run_mode(args, mode: str) -> int:
    client = ServiceClient(args.server)
    if args.config:
        doc = _load_json(args.config)
        base_dir = str(Path(args.config).resolve().parent)
    elif mode == "validate":
        from .pipeline import default_validate_config

        doc = default_validate_config()
        base_dir = str(Path.cwd())
    else:
        print("error: --config is required", file=sys.stderr)
        return EXIT_CONFIG
    doc["mode"] = mode
    doc = _apply_overrides(doc, args)
    payload = {"config": doc, "base_dir": base_dir, "out_dir": args.out}
    status, body = client.post("/run", payload)
    if status != 200:
        return _error_exit(status, body)
    _write_outputs(args.out, body)
    _print_summary(body)
    report = body["report"]
    strict = doc.get("strict", False)
    if not body["all_rules_pass"]:
        print("pass rules: FAILED", file=sys.stderr)
        return EXIT_FAILED
    if strict and body["n_failures"] > 0:
        return EXIT_FAILED
    for rule in report["pass_rules"]:
        label = "pass" if rule["passed"] else "FAIL"
        print(f"rule {rule['rule']} [{rule['row']}]: {label}")
    return EXIT_OK


def _cmd_calibrate(args) -> int:
    client = ServiceClient(args.server)
    views = []
    board_doc = None
    for path in args.corners:
        doc = _load_json(path)
        views.append({"image_id": doc["image_id"], "points": doc["points"]})
        board_doc = doc["board"]
    payload = {"views": views, "board": board_doc}
    status, body = client.post("/calibrate", payload)
    if status != 200:
        return _error_exit(status, body)
    print(
        f"fx={body['intrinsics']['fx']:.4f} fy={body['intrinsics']['fy']:.4f} "
        f"cx={body['intrinsics']['cx']:.4f} cy={body['intrinsics']['cy']:.4f} "
        f"mean_reproj={body['mean_reproj_px']:.6g}px"
    )
    if args.out:
        Path(args.out).write_text(json.dumps(body["intrinsics"], sort_keys=True) + "\n")
    return EXIT_OK


def _cmd_pose(args) -> int:
    client = ServiceClient(args.server)
    corners_doc = _load_json(args.corners)
    intr_doc = _load_json(args.intrinsics)
    payload = {
        "corners": {"image_id": corners_doc["image_id"], "points": corners_doc["points"]},
        "board": corners_doc["board"],
        "intrinsics": intr_doc,
    }
    status, body = client.post("/pose", payload)
    if status != 200:
        return _error_exit(status, body)
    print(f"reproj_rms={body['reproj_rms_px']:.6g}px translation={body['extrinsics']['translation']}")
    if args.out:
        Path(args.out).write_text(json.dumps(body["extrinsics"], sort_keys=True) + "\n")
    return EXIT_OK


def _cmd_report(args) -> int:
    client = ServiceClient(args.server)
    report_doc = _load_json(args.report)
    payload = {"report": report_doc, "style": args.style, "scenario": args.scenario}
    status, body = client.post("/tables", payload)
    if status != 200:
        return _error_exit(status, body)
    if args.out:
        Path(args.out).write_text(body["csv"])
    else:
        sys.stdout.write(body["csv"])
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("physbench.service:app", host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="physbench")
    parser.add_argument("--server", default=None, help="remote service URL (default: in-process)")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run_mode(name, needs_config=True):
        p = sub.add_parser(name)
        p.add_argument("--config", required=False, default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--jobs", type=int, default=None)
        p.add_argument("--strict", action="store_true")
        p.set_defaults(func=lambda a, m=name: _run_mode(a, m))
        return p

    add_run_mode("simulate")
    add_run_mode("estimate")
    add_run_mode("metrics")
    add_run_mode("validate")

    p = sub.add_parser("calibrate")
    p.add_argument("--corners", nargs="+", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("pose")
    p.add_argument("--corners", required=True)
    p.add_argument("--intrinsics", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_pose)

    p = sub.add_parser("report")
    p.add_argument("--report", required=True)
    p.add_argument("--style", required=True, choices=["param_table", "miou_table", "over_time"])
    p.add_argument("--scenario", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("serve")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8800)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_OK


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
