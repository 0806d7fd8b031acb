"""Command line front end.

Each subcommand builds the same request model the HTTP service accepts and
runs it in-process, or posts it to a running service with ``--server``.
Exit status: 0 decided, 2 undecided, 1 bad input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from pydantic import ValidationError

from . import __version__
from .api import INPUT_ERRORS, dispatch

EXIT_OK, EXIT_INPUT, EXIT_UNKNOWN = 0, 1, 2


class InputProblem(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


# -- argument plumbing -------------------------------------------------------


def _load_json(path: str):
    text = sys.stdin.read() if path == "-" else Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputProblem(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def _iem(args) -> dict:
    if args.iem_file:
        data = _load_json(args.iem_file)
        return data.get("iem", data)
    if not args.lengths or not args.perm:
        raise InputProblem("give --lengths and --perm, or --iem-file")
    return {"lengths": args.lengths, "permutation": args.perm, "normalize": args.normalize}


def _polygon(args) -> dict:
    out = {"angles": args.angles}
    if args.vertices:
        out["vertices"] = [v.split(",") for v in args.vertices]
    return out


def _point(text: str) -> dict:
    base, _, height = text.partition(",")
    return {"base": base, "height": height or "0"}


def _payload(args) -> tuple[str, dict]:
    cmd = args.command
    if cmd == "iem":
        body = {"iem": _iem(args)}
        if args.action == "check":
            body["budget"] = args.budget
        elif args.action == "orbit":
            body.update(x=args.x, steps=args.steps)
        else:
            body.update(x=args.x, y=args.y, delta=args.delta, horizon=args.horizon)
        return f"iem/{args.action}", body
    if cmd == "suspend":
        return "suspend", {"iem": _iem(args), "budget": args.budget}
    if cmd == "surface":
        return "surface/admit", {"h": args.h, "b": args.b, "c": args.c}
    if cmd == "surgery":
        ops = _load_json(args.script)
        if isinstance(ops, dict):
            ops = ops.get("ops", [])
        return "surgery/exec", {"ops": ops, "budget": args.budget}
    if cmd == "billiard":
        body = {"polygon": _polygon(args)}
        if args.action in ("trace", "verdict"):
            if not args.direction:
                raise InputProblem("--direction is required")
            body.update(direction=args.direction, budget=args.budget)
        if args.action == "trace":
            if not args.start:
                raise InputProblem("--start is required")
            body["start"] = args.start
        return f"billiard/{args.action}", body
    if cmd == "flow":
        body = {"iem": _iem(args), "delta": args.delta, "eps": args.eps,
                "horizon": args.horizon, "pairs": args.pairs, "seed": args.seed,
                "spread": args.spread}
        if args.x:
            body["x"] = _point(args.x)
        if args.y:
            body["y"] = _point(args.y)
        return "flow/pairtest", body
    raise InputProblem(f"unknown command {cmd}")


def _post(server: str, route: str, payload: dict) -> dict:
    import httpx

    r = httpx.post(f"{server.rstrip('/')}/{route}", json=payload, timeout=600)
    if r.status_code == 422:
        raise InputProblem(json.dumps(r.json().get("detail"), sort_keys=True))
    r.raise_for_status()
    return r.json()


# -- rendering ---------------------------------------------------------------


def _svg(route: str, payload: dict) -> str:
    from .api import BilliardTrace, BilliardUnfold, SuspendRequest
    from .billiard import DirectionalFlow, trace
    from .exactnum import parse_scalar
    from .render import billiard_svg, suspension_svg
    from .suspension import suspend

    if route == "suspend":
        return suspension_svg(suspend(SuspendRequest.model_validate(payload).iem.build()))
    if route == "billiard/unfold":
        return billiard_svg(BilliardUnfold.model_validate(payload).polygon.build())
    if route == "billiard/trace":
        req = BilliardTrace.model_validate(payload)
        p = req.polygon.build()
        flow = DirectionalFlow(p, tuple(parse_scalar(str(c)) for c in req.direction))
        tr = trace(flow, tuple(parse_scalar(str(c)) for c in req.start), budget=req.budget)
        return billiard_svg(p, tr)
    raise InputProblem(f"no SVG view for {route}")


def _csv(result: dict) -> str:
    rows = result.get("rows")
    if rows is None:
        rows = [result]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y", "separated", "n", "sup", "iem_separated", "iem_n", "dphi"])
    for r in rows:
        p = r["pair"]
        w.writerow([r["x"]["base"], r["y"]["base"], p["separated"], p["n"], p["sup"],
                    r["iem_separated"], r["iem_n"], r["dphi"]])
    return buf.getvalue()


# -- parser ------------------------------------------------------------------


def _iem_flags(p):
    p.add_argument("--lengths", nargs="+", metavar="X", help='exact scalars, e.g. "1/3"')
    p.add_argument("--perm", nargs="+", type=int, metavar="K")
    p.add_argument("--normalize", action="store_true", help="rescale lengths to total 1")
    p.add_argument("--iem-file", metavar="PATH", help="JSON with lengths and permutation")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="expflow", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("--server", metavar="URL", help="post requests to a running service")
    ap.add_argument("--format", choices=("json", "svg", "csv"), default="json")
    ap.add_argument("-o", "--output", metavar="PATH", help="write here instead of stdout")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    iem = sub.add_parser("iem", help="interval exchanges")
    iem.add_argument("action", choices=("check", "orbit", "separate"))
    _iem_flags(iem)
    iem.add_argument("--budget", type=int, default=10_000)
    iem.add_argument("--x")
    iem.add_argument("--y")
    iem.add_argument("--steps", type=int, default=20)
    iem.add_argument("--delta")
    iem.add_argument("--horizon", type=int, default=10_000)

    sp = sub.add_parser("suspend", help="suspension surface and flow verdict")
    _iem_flags(sp)
    sp.add_argument("--budget", type=int, default=2000)

    sf = sub.add_parser("surface", help="surface questions")
    sf.add_argument("action", choices=("admit",))
    sf.add_argument("--h", type=int, required=True)
    sf.add_argument("--b", type=int, default=0)
    sf.add_argument("--c", type=int, default=0)

    sg = sub.add_parser("surgery", help="run a surgery script")
    sg.add_argument("action", choices=("exec",))
    sg.add_argument("script", help="JSON list of operations, or - for stdin")
    sg.add_argument("--budget", type=int, default=2000)

    bi = sub.add_parser("billiard", help="rational polygonal billiards")
    bi.add_argument("action", choices=("unfold", "trace", "verdict"))
    bi.add_argument("--angles", nargs="+", required=True, help="fractions of pi")
    bi.add_argument("--vertices", nargs="+", metavar="X,Y")
    bi.add_argument("--direction", nargs=2, metavar=("VX", "VY"))
    bi.add_argument("--start", nargs=2, metavar=("X", "Y"))
    bi.add_argument("--budget", type=int, default=2000)

    fl = sub.add_parser("flow", help="suspension flow metric tests")
    fl.add_argument("action", choices=("pairtest",))
    _iem_flags(fl)
    fl.add_argument("--x", metavar="BASE[,HEIGHT]")
    fl.add_argument("--y", metavar="BASE[,HEIGHT]")
    fl.add_argument("--delta", required=True)
    fl.add_argument("--eps", default="1/20")
    fl.add_argument("--horizon", type=int, default=10_000)
    fl.add_argument("--pairs", type=int, default=0)
    fl.add_argument("--spread", default="1/1000")
    fl.add_argument("--seed", type=int, default=0)

    sv = sub.add_parser("serve", help="run the HTTP service")
    sv.add_argument("--host", default="127.0.0.1")
    sv.add_argument("--port", type=int, default=8000)
    return ap


def _status(result: dict) -> int:
    return EXIT_OK if result.get("decided", True) else EXIT_UNKNOWN


def run(argv: list[str] | None = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    if args.command == "serve":
        import uvicorn
        uvicorn.run("expflow.service:app", host=args.host, port=args.port)
        return EXIT_OK
    try:
        route, payload = _payload(args)
        if args.format == "svg":
            if args.server:
                raise InputProblem("SVG output is rendered locally; drop --server")
            text, code = _svg(route, payload), EXIT_OK
        else:
            result = _post(args.server, route, payload) if args.server else \
                dispatch(route, payload)
            code = _status(result)
            text = _csv(result) if args.format == "csv" else \
                json.dumps(result, sort_keys=True, indent=2) + "\n"
    except (InputProblem, ValidationError, OSError, *INPUT_ERRORS) as exc:
        msg = exc.errors() if isinstance(exc, ValidationError) else str(exc)
        if isinstance(msg, list):
            msg = "; ".join(f"{'.'.join(map(str, e['loc']))}: {e['msg']}" for e in msg)
        print(f"expflow: error: {msg}", file=sys.stderr)
        return EXIT_INPUT
    if args.output:
        Path(args.output).write_text(text)
    else:
        stdout.write(text)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
