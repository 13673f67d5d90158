"""``prk`` command line: check, reduce, generate, rank, tgain, decompose, export-svg.

Exit codes: 0 success or rigid, 1 flexible or not reducible, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .core import GraphError, TorusModel, from_document, t_gain_procedure, to_document
from .henneberg import NotReducible, decide, generate, reduce
from .linear import generic_rank
from .sparsity import BoundExceeded, tree_map_decompose
from .svg import parse_window, placement_from_document, render

OK, NO, BAD = 0, 1, 2


class InputError(Exception):
    pass


@dataclass
class CliReport:
    exit_code: int
    data: dict = field(default_factory=dict)
    text: str = ""

    def emit(self, as_json: bool, stream=None):
        stream = stream or sys.stdout
        if as_json:
            stream.write(json.dumps(self.data) + "\n")
        elif self.text:
            stream.write(self.text.rstrip("\n") + "\n")


def _load(path: str):
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON: {exc}") from None
    try:
        return doc, from_document(doc)
    except (GraphError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from None


def _graph(args):
    doc, g = _load(args.path)
    if getattr(args, "model", None):
        model = TorusModel.parse(args.model)
        if model is not g.model:
            print(f"warning: model {g.model.value} from the document overridden by {model.value}",
                  file=sys.stderr)
            if model.gain_arity != g.arity:
                raise InputError(f"model {model.value} needs {model.gain_arity}-component gains")
            g = g.with_model(model)
    return doc, g


def _fmt_set(s):
    return "{" + ", ".join(map(str, sorted(s))) + "}"


# ---------------------------------------------------------------------------
# commands

def check_one(path: str, args) -> CliReport:
    args = argparse.Namespace(**{**vars(args), "path": path})
    _, g = _graph(args)
    verdict = decide(g)
    data = {"file": path, "model": g.model.value, **verdict.to_json()}
    lines = [f"{'rigid' if verdict.rigid else 'flexible'}: {verdict.reason}"]
    if verdict.witness is not None:
        lines.append(f"witness: {_fmt_set(verdict.witness)}")
    gv = verdict.gain_verdict
    if gv is not None and not gv and gv.generators:
        lines.append("cycle gains: " + ", ".join(str(list(m)) for m in gv.generators))
    if args.oracle:
        r = generic_rank(g, trials=args.trials, seed=args.seed)
        want = g.model.rank_threshold(g.n)
        oracle = r == want and g.n_edges == want
        data["oracle"] = {"rank": r, "threshold": want, "rigid": oracle, "agrees": oracle == verdict.rigid}
        lines.append(f"oracle: rank {r} of {want}, {'agrees' if oracle == verdict.rigid else 'DISAGREES'}")
    return CliReport(OK if verdict.rigid else NO, data, "\n".join(lines))


def cmd_check(args) -> CliReport:
    if args.batch:
        files = sorted(Path(args.batch).glob("*.json"))
        if not files:
            raise InputError(f"no .json files in {args.batch}")

        def run(p):
            try:
                return check_one(str(p), args)
            except (InputError, BoundExceeded, ValueError) as exc:
                return CliReport(BAD, {"file": str(p), "error": str(exc)}, f"error: {exc}")

        with ThreadPoolExecutor() as pool:
            reports = list(pool.map(run, files))
        code = max(r.exit_code for r in reports)
        text = "\n".join(f"{r.data['file']}: {r.text.splitlines()[0]}" for r in reports)
        return CliReport(code, {"results": [r.data for r in reports]}, text)
    if not args.path:
        raise InputError("check needs a file or --batch DIR")
    return check_one(args.path, args)


def cmd_reduce(args) -> CliReport:
    _, g = _graph(args)
    try:
        cert = reduce(g)
    except NotReducible as exc:
        data = {"reducible": False, "reason": str(exc)}
        text = f"not reducible: {exc}"
        if exc.witness is not None:
            data["witness"] = sorted(exc.witness)
            text += f"\nwitness: {_fmt_set(exc.witness)}"
        return CliReport(NO, data, text)
    doc = cert.to_json()
    lines = [f"base loop gain {list(cert.base_gain)}"]
    lines += [f"{i}: {m.kind} anchors {m.anchors} gains {[list(x) for x in m.gains]}"
              for i, m in enumerate(cert.moves)]
    return CliReport(OK, doc, "\n".join(lines))


def cmd_generate(args) -> CliReport:
    if args.n < 1:
        raise InputError("-n must be at least 1")
    g, cert = generate(args.n, args.seed, args.model or TorusModel.X_VARIABLE)
    doc = to_document(g)
    if args.certificate:
        doc = {"graph": doc, "certificate": cert.to_json()}
    text = json.dumps(doc)
    if args.out:
        Path(args.out).write_text(text + "\n")
        return CliReport(OK, doc, f"wrote {args.out}")
    return CliReport(OK, doc, text)


def cmd_rank(args) -> CliReport:
    _, g = _graph(args)
    r = generic_rank(g, trials=args.trials, seed=args.seed)
    want = g.model.rank_threshold(g.n)
    data = {"rank": r, "threshold": want, "edges": g.n_edges, "rigid": r == want}
    return CliReport(OK, data, str(r))


def cmd_tgain(args) -> CliReport:
    _, g = _graph(args)
    tree = None
    if args.tree:
        try:
            tree = [int(x) for x in args.tree.split(",")]
        except ValueError:
            raise InputError("--tree takes comma-separated edge ids") from None
    try:
        table = t_gain_procedure(g, tree=tree, root=args.root)
    except (GraphError, ValueError) as exc:
        raise InputError(str(exc)) from None
    data = {
        "tree": list(table.tree_edges),
        "roots": list(table.roots),
        "potentials": [list(p) for p in table.potentials],
        "t_gains": [list(m) for m in table.t_gains],
    }
    lines = [f"tree edges: {list(table.tree_edges)}   roots: {list(table.roots)}"]
    lines += [f"v{v}: {list(p)}" for v, p in enumerate(table.potentials)]
    lines += [f"e{k} {e.tail}->{e.head}: {list(e.gain)} -> {list(m)}"
              for k, (e, m) in enumerate(zip(g.edges, table.t_gains))]
    return CliReport(OK, data, "\n".join(lines))


def cmd_decompose(args) -> CliReport:
    _, g = _graph(args)
    try:
        dec = tree_map_decompose(g)
    except ValueError as exc:
        return CliReport(NO, {"error": str(exc)}, f"no decomposition: {exc}")
    data = {"tree": sorted(dec.tree_edges), "map": sorted(dec.map_edges)}
    return CliReport(OK, data, f"tree: {data['tree']}\nmap: {data['map']}")


def cmd_export_svg(args) -> CliReport:
    doc, g = _graph(args)
    try:
        w, h = parse_window(args.window)
        placement = placement_from_document(doc, g, args.seed)
        svg = render(g, placement, w, h)
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(str(exc)) from None
    if args.out:
        Path(args.out).write_text(svg)
        return CliReport(OK, {"out": args.out}, f"wrote {args.out}")
    return CliReport(OK, {"svg": svg}, svg)


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="prk", description="Rigidity of periodic orbit frameworks on tori.")
    sub = ap.add_subparsers(dest="command", required=True)
    models = [m.value for m in TorusModel]

    def common(p, path=True, oracle=False):
        if path:
            p.add_argument("path", nargs="?" if oracle else None, help="orbit-graph JSON file, or - for stdin")
        p.add_argument("--model", choices=models, help="override the document's model")
        p.add_argument("--json", action="store_true", help="machine-readable output")
        return p

    p = common(sub.add_parser("check", help="decide generic minimal rigidity"), oracle=True)
    p.add_argument("--oracle", action="store_true", help="also compare with the rank oracle")
    p.add_argument("--batch", metavar="DIR", help="check every .json file in DIR")
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_check)

    p = common(sub.add_parser("reduce", help="print a construction certificate"))
    p.set_defaults(func=cmd_reduce)

    p = common(sub.add_parser("generate", help="random minimally rigid gain graph"), path=False)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--certificate", action="store_true", help="include the construction certificate")
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)

    p = common(sub.add_parser("rank", help="generic rank of the rigidity matrix"))
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_rank)

    p = common(sub.add_parser("tgain", help="potentials and T-gains for a spanning tree"))
    p.add_argument("--tree", help="comma-separated tree edge ids (default: BFS tree)")
    p.add_argument("--root", type=int)
    p.set_defaults(func=cmd_tgain)

    p = common(sub.add_parser("decompose", help="spanning tree + connected map-graph"))
    p.set_defaults(func=cmd_decompose)

    p = common(sub.add_parser("export-svg", help="draw the derived framework over a window"))
    p.add_argument("--window", default="3x3", help="WxH block of lattice cells")
    p.add_argument("--out")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_export_svg)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return BAD if exc.code else OK
    try:
        report = args.func(args)
    except (InputError, BoundExceeded) as exc:
        if getattr(args, "json", False):
            print(json.dumps({"error": str(exc)}))
        print(f"error: {exc}", file=sys.stderr)
        return BAD
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return BAD
    report.emit(args.json)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
