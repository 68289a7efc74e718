"""Command-line front end: ``gch {betti,ramos,asym,certify,torsion,matrix}``.

Exit status is 0 on success (including inconclusive or negative findings),
2 on bad input and 3 when a cell exceeds the basis-size cap.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .asymptotics import HypothesisError, torsion_growth_scan, verify_growth
from .classes import RELATIONS, ClassError, a_w_family, is_rigid, top_row_image, verify_relation
from .complex import FULL, REDUCED, ChainError, differential_matrix, matrix_to_triplets, stabilization_matrix
from .graph import GraphError, load_graph, ramos_number
from .homology import DEFAULT_CAP, ResourceLimitError, betti_table, default_workers
from .linalg import LinalgError, parse_field

EXIT_OK, EXIT_INPUT, EXIT_RESOURCE = 0, 2, 3

# hard defaults, applied after the config file; flags override both
DEFAULTS = {
    "field": "q",
    "imax": 1,
    "kmax": 4,
    "variant": "reduced",
    "format": None,
    "cap": DEFAULT_CAP,
    "workers": None,
    "degree": None,
    "relation": "Q",
    "params": None,
    "rigidity": None,
    "weight": None,
    "map": "differential",
    "edge": None,
}


class InputError(ValueError):
    pass


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--graph", help="graph file (line format or JSON)")
    p.add_argument("--field", help="q, z or fp:P")
    p.add_argument("--variant", choices=["full", "reduced"])
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=["csv", "json", "text"])
    p.add_argument("--cap", type=int, help="largest basis size attempted")
    p.add_argument("--workers", type=int, help="worker processes (default: $GCH_WORKERS or CPU count)")
    p.add_argument("--config", help="JSON file of option defaults")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gch", description="Homology of configuration spaces of graphs.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("betti", help="table of Betti numbers (torsion too over z)")
    _common(p)
    p.add_argument("--imax", type=int)
    p.add_argument("--kmax", type=int)

    p = sub.add_parser("ramos", help="Ramos number and its maximizers")
    _common(p)
    p.add_argument("-i", "--degree", type=int)

    p = sub.add_parser("asym", help="check the predicted growth of one Betti row")
    _common(p)
    p.add_argument("-i", "--degree", type=int)
    p.add_argument("--kmax", type=int)

    p = sub.add_parser("certify", help="certify a relation, or rigidity of a torus family")
    _common(p)
    p.add_argument("--relation", choices=list(RELATIONS))
    p.add_argument("--params", help="JSON object of relation parameters")
    p.add_argument("--rigidity", help="comma-separated vertex set W; reports on its A_W family")

    p = sub.add_parser("torsion", help="integral homology and p-torsion exponents of one row")
    _common(p)
    p.add_argument("-i", "--degree", type=int)
    p.add_argument("--kmax", type=int)

    p = sub.add_parser("matrix", help="export a differential or stabilization matrix")
    _common(p)
    p.add_argument("-i", "--degree", type=int)
    p.add_argument("-k", "--weight", type=int)
    p.add_argument("--map", choices=["differential", "stabilization"])
    p.add_argument("--edge", help="edge for the stabilization map")
    return ap


def _resolve(args: argparse.Namespace) -> dict:
    opts = dict(DEFAULTS)
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise InputError("config must be a JSON object")
        unknown = set(cfg) - set(DEFAULTS) - {"graph", "out", "imax", "kmax"}
        if unknown:
            raise InputError(f"unknown config keys: {', '.join(sorted(unknown))}")
        opts.update(cfg)
    for k, v in vars(args).items():
        if v is not None and k != "config":
            opts[k] = v
    if not opts.get("graph"):
        raise InputError("--graph is required")
    if opts["workers"] is None:
        opts["workers"] = default_workers()
    # -1 is allowed for the rectangle bounds and gives an empty table
    for k in ("imax", "kmax", "cap", "workers", "degree", "weight"):
        low = -1 if k in ("imax", "kmax") else 0
        if opts.get(k) is not None and (not isinstance(opts[k], int) or opts[k] < low):
            raise InputError(f"--{k} must be an integer >= {low}")
    return opts


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _variant(name: str):
    return FULL if name == "full" else REDUCED


def _cmd_betti(o, g):
    field = parse_field(o["field"])
    t = betti_table(g, field, o["imax"], o["kmax"], _variant(o["variant"]), o["workers"], o["cap"])
    return t.to_json() if o["format"] == "json" else t.to_csv()


def _cmd_ramos(o, g):
    i = o["degree"] if o["degree"] is not None else o["imax"]
    r = ramos_number(g, i)
    maxi = [sorted(W, key=lambda v: g.vertex_index[v]) for W in r.maximizers]
    if o["format"] == "text":
        return f"Delta^{i} = {r.delta}\n" + "".join("{" + ",".join(W) + "}\n" for W in maxi)
    return json.dumps({"graph": g.digest, "i": i, "delta": r.delta, "maximizers": maxi},
                      indent=2, sort_keys=True) + "\n"


def _cmd_asym(o, g):
    i = o["degree"] if o["degree"] is not None else 1
    rep = verify_growth(g, parse_field(o["field"]), i, o["kmax"], _variant(o["variant"]),
                        o["workers"], o["cap"])
    if o["format"] == "text":
        return rep.summary()
    if o["format"] == "csv":
        return rep.differences_csv()
    return rep.to_json()


def _cmd_certify(o, g):
    field = parse_field(o["field"])
    if not field.is_field:
        raise InputError("certification needs a field")
    if o["rigidity"]:
        W = [w.strip() for w in o["rigidity"].split(",") if w.strip()]
        fam = a_w_family(g, W)
        rows = []
        for m in fam.members:
            rows.append({
                "stars": [{"vertex": s.vertex, "halves": list(s.halves)} for s in m.stars],
                "rigid": is_rigid(g, m),
                "top_row_nonzero": bool(top_row_image(g, m, field)),
            })
        return json.dumps({"graph": g.digest, "W": list(fam.W), "family_size": len(fam),
                           "members": rows}, indent=2, sort_keys=True) + "\n"
    params = o["params"]
    if isinstance(params, str):
        try:
            params = json.loads(params)
        except json.JSONDecodeError as exc:
            raise InputError(f"--params is not JSON: {exc}") from exc
    rep = verify_relation(g, o["relation"], params, _variant(o["variant"]), field)
    return rep.to_json() + "\n"


def _cmd_torsion(o, g):
    i = o["degree"] if o["degree"] is not None else 1
    scan = torsion_growth_scan(g, i, o["kmax"], _variant(o["variant"]), o["cap"])
    if o["format"] == "json":
        return scan.to_json()
    lines = ["graph,i,k,free_rank,p,exponent"]
    for k in sorted(scan.exponents):
        row = scan.exponents[k]
        if not row:
            lines.append(f"{scan.graph},{i},{k},{scan.free_ranks[k]},,")
        for p in sorted(row):
            lines.append(f"{scan.graph},{i},{k},{scan.free_ranks[k]},{p},{row[p]}")
    return "\n".join(lines) + "\n"


def _cmd_matrix(o, g):
    if o["degree"] is None or o["weight"] is None:
        raise InputError("matrix needs --degree and --weight")
    field = parse_field(o["field"])
    var = _variant(o["variant"])
    i, k = o["degree"], o["weight"]
    if o["map"] == "stabilization":
        if not o["edge"]:
            raise InputError("stabilization needs --edge")
        m = stabilization_matrix(g, var, o["edge"], i, k, field)
    else:
        m = differential_matrix(g, var, i, k, field)
    return matrix_to_triplets(m, g, var, i, k, o["map"])


COMMANDS = {
    "betti": _cmd_betti,
    "ramos": _cmd_ramos,
    "asym": _cmd_asym,
    "certify": _cmd_certify,
    "torsion": _cmd_torsion,
    "matrix": _cmd_matrix,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        o = _resolve(args)
        g = load_graph(o["graph"])
        text = COMMANDS[args.command](o, g)
        _emit(text, o.get("out"))
    except ResourceLimitError as exc:
        print(f"gch: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (InputError, GraphError, HypothesisError, ClassError, ChainError, LinalgError,
            OSError, ValueError) as exc:
        print(f"gch: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
