"""Command-line front end: reproducible JSON pipelines over the library.

Subcommands
-----------
  pinor            build a pinor module, emit dims/chirality/volume report
  cohomology       Spencer cohomology dims (raw Z/B and normalised routes)
  subalgebra-check closure verification for a graded subalgebra file
  deform           integrate <job.json> / verify <deformation.json>
  reconstruct      basepoint realizability report for a deformation file
  examples         write the shipped example inputs

Exit codes: 0 success, 1 verification failure or obstruction, 2 malformed
input.  Reports are deterministic apart from the timing block; thread
count for the numeric kernels follows SPENCERDEF_THREADS.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time

from . import SCHEMA_VERSION, __version__
from . import deform as df
from . import flatmodel as fm
from . import homogmodel as hm
from . import serialize as ser
from . import spencer as sp
from .clifford import Signature, build_pinor, spin_action


class ParseError(Exception):
    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        super().__init__(message)
        self.line = line
        self.col = col


def _parse_signature(text: str) -> tuple[int, int]:
    try:
        p, q = (int(x) for x in text.split(","))
    except ValueError:
        raise ParseError(f"bad signature {text!r}; expected P,Q")
    return p, q


def _load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ParseError(f"no such file: {path}")
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON in {path}: {exc.msg}",
                         line=exc.lineno, col=exc.colno)


def _report(command: str, payload: dict, checks: dict, t0: float) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "command": command,
        "version": __version__,
        "conventions": {
            "eta": "diag(+1 x p, -1 x q), plus directions first",
            "clifford_relation": "v.v = clifford_sign * eta(v,v)",
            "lorentzian_default_sign": -1,
            "spin_action": "rho(A) = clifford_sign/2 * omega_A (Clifford)",
        },
        "payload": payload,
        "checks": checks,
        "timings": {"wall_seconds": round(time.time() - t0, 3)},
    }


def _emit(report: dict, out: str | None) -> None:
    text = json.dumps(report, indent=1, sort_keys=True)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _sign_from_flag(convention: str | None, p: int, q: int) -> int:
    if convention == "plus":
        return 1
    if convention == "minus":
        return -1
    return -1 if (p == 1 and q >= 1) else 1


def cmd_pinor(args) -> int:
    t0 = time.time()
    p, q = _parse_signature(args.signature)
    sign = _sign_from_flag(args.convention, p, q)
    sig = Signature(p, q, sign)
    pinor = build_pinor(sig, extend=args.extend)
    pinor.check_relations()
    checksums = [hashlib.blake2b(g.tobytes(), digest_size=8).hexdigest()
                 for g in pinor.gammas]
    payload = {
        "signature": ser.signature_to_json(sig),
        "dim_s": pinor.dim_s,
        "n_copies": pinor.n_copies,
        "volume_sign": pinor.volume_sign,
        "chirality": None if pinor.chirality is None else {
            "half_dim": pinor.dim_s // 2},
        "gamma_checksums": checksums,
    }
    _emit(_report("pinor", payload, {"clifford_relations": True}, t0), args.out)
    return 0


def cmd_cohomology(args) -> int:
    t0 = time.time()
    p, q = _parse_signature(args.signature)
    sign = _sign_from_flag(args.convention, p, q)
    parity = "symmetric" if args.parity == "sym" else "skew"
    model = fm.standard_model(p, q, parity=parity, clifford_sign=sign,
                              extend=args.extend)
    host = sp.host_for(model)
    payload: dict = {"signature": ser.signature_to_json(model.signature),
                     "parity": parity, "dims": list(model.dims)}
    checks: dict = {}
    if args.degree is not None:
        d, pp = args.degree, args.p
        res = sp.cohomology(host, d, pp, exact=args.exact)
        payload["cohomology"] = res.as_dict()
        if pp >= 1:
            dlow = sp.assemble_differential(host, d, pp - 1)
            dcur = sp.assemble_differential(host, d, pp)
            checks["d_o_d_zero"] = sp.compose_is_zero(dlow, dcur)
    else:
        res = sp.cohomology(host, 2, 2, exact=args.exact)
        payload["cohomology_22"] = res.as_dict()
        norm_dim = sp.normalized_cocycle_dim(model)
        payload["normalized_cocycle_dim"] = norm_dim
        checks["routes_agree"] = bool(res.dim_h == norm_dim)
        if args.emit in ("basis", "full"):
            basis = sp.normalized_cocycle_basis(model)
            checks["basis_verified"] = all(c.verify() for c in basis)
            payload["normalized_basis"] = [ser.cocycle_to_json(c) for c in basis]
    report = _report("cohomology", payload, checks, t0)
    _emit(report, args.out)
    return 0 if all(v for v in checks.values()) or not checks else 1


def cmd_subalgebra_check(args) -> int:
    t0 = time.time()
    obj = _load_json(args.input)
    model = ser.model_from_header(obj)
    try:
        sub = ser.subalgebra_from_json(model, obj["subalgebra"])
    except df.NotClosed as exc:
        _emit(_report("subalgebra-check",
                      {"closed": False, "rule": exc.rule, "witness": list(exc.witness)},
                      {"closed": False}, t0), args.out)
        return 1
    payload = {"closed": True, "dims": list(sub.dims),
               "highly_supersymmetric": 2 * sub.s_basis.dim > model.kappa.dim_s,
               "homogeneity": df.homogeneity_check(sub)}
    _emit(_report("subalgebra-check", payload, {"closed": True}, t0), args.out)
    return 0


def cmd_deform_integrate(args) -> int:
    t0 = time.time()
    obj = _load_json(args.input)
    model = ser.model_from_header(obj)
    sub = ser.subalgebra_from_json(model, obj["subalgebra"])
    coc = ser.cocycle_from_json(model, obj["cocycle"])
    if not coc.verify():
        _emit(_report("deform-integrate", {"error": "cocycle conditions fail"},
                      {"cocycle_verified": False}, t0), args.out)
        return 1
    section = None
    if "section" in obj:
        pairs = df._pair_list(sub.s_basis.dim, model.kappa.parity)
        section = df.Section(sub=sub, pairs=pairs,
                             columns=ser.vectors_from_json(obj["section"]["columns"]))
    adm = df.admissibility_check(sub, coc, section=section)
    if isinstance(adm, df.Obstruction):
        _emit(_report("deform-integrate",
                      {"obstruction": {"kind": adm.kind, "witness": list(adm.witness)}},
                      {"admissible": False}, t0), args.out)
        return 1
    out = df.integrate(adm)
    if isinstance(out, df.Obstruction):
        _emit(_report("deform-integrate",
                      {"obstruction": {"kind": out.kind, "witness": list(out.witness)}},
                      {"admissible": True, "integrable": False}, t0), args.out)
        return 1
    invar = df.deformation_invariance_checks(out)
    payload = ser.deformation_to_json(out)
    payload["invariance_checks"] = invar
    _emit(_report("deform-integrate", payload,
                  {"admissible": True, "integrable": True,
                   "jacobi": True, "invariance": invar["passed"]}, t0), args.out)
    return 0 if invar["passed"] else 1


def cmd_deform_verify(args) -> int:
    t0 = time.time()
    obj = _load_json(args.input)
    payload = obj.get("payload", obj)
    try:
        defm = ser.deformation_from_json(payload)
    except ValueError as exc:
        _emit(_report("deform-verify", {"error": str(exc)}, {"verified": False}, t0),
              args.out)
        return 1
    invar = df.deformation_invariance_checks(defm)
    comps = df.extract_components(defm)
    full = df.check_full_cocycle(comps)
    theta = df.check_theta_system(comps)
    checks = {"verified": True, "invariance": invar["passed"],
              "linear_system": full["passed"], "theta_system": theta["passed"]}
    _emit(_report("deform-verify",
                  {"dims": list(defm.algebra.dims), "invariance": invar,
                   "linear_system": full, "theta_system": theta},
                  checks, t0), args.out)
    return 0 if all(checks.values()) else 1


def cmd_reconstruct(args) -> int:
    t0 = time.time()
    obj = _load_json(args.input)
    payload = obj.get("payload", obj)
    defm = ser.deformation_from_json(payload)
    pair = hm.metric_lie_pair(defm)
    nomizu = hm.nomizu_levi_civita(pair)
    rep = hm.reconstruction_report(defm)
    n = pair.dim_v
    ltensor = [[[ser.qstr(nomizu.columns[x][i][j]) for j in range(n)]
                for i in range(n)] for x in range(pair.dim)]
    F = hm.wang_curvature(nomizu)
    nonzero_f = sum(1 for M in F.values() if any(any(r) for r in M))
    payload_out = {
        "nomizu_L": ltensor,
        "curvature_summary": {"pairs": len(F), "nonzero": nonzero_f},
        "verdicts": rep,
    }
    _emit(_report("reconstruct", payload_out, {"passed": rep["passed"]}, t0), args.out)
    return 0 if rep["passed"] else 1


def cmd_examples(args) -> int:
    from .examples import write_examples
    paths = write_examples(args.outdir)
    print(json.dumps({"written": paths}, indent=1))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spencerdef",
                                 description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    p1 = sub.add_parser("pinor", help="build a pinor module and report")
    p1.add_argument("--signature", required=True, help="P,Q")
    p1.add_argument("--convention", choices=["plus", "minus"], default=None)
    p1.add_argument("--extend", type=int, default=1)
    p1.add_argument("--out")
    p1.set_defaults(func=cmd_pinor)

    p2 = sub.add_parser("cohomology", help="Spencer cohomology dims")
    p2.add_argument("--signature", required=True, help="P,Q")
    p2.add_argument("--extend", type=int, default=1)
    p2.add_argument("--parity", choices=["sym", "skew"], default="sym")
    p2.add_argument("--convention", choices=["plus", "minus"], default=None)
    p2.add_argument("--degree", type=int, default=None)
    p2.add_argument("--p", type=int, default=2)
    p2.add_argument("--exact", action="store_true")
    p2.add_argument("--emit", choices=["dims", "basis", "full"], default="dims")
    p2.add_argument("--out")
    p2.set_defaults(func=cmd_cohomology)

    p3 = sub.add_parser("subalgebra-check", help="verify closure of a graded subalgebra")
    p3.add_argument("input")
    p3.add_argument("--out")
    p3.set_defaults(func=cmd_subalgebra_check)

    p4 = sub.add_parser("deform", help="integrate/verify filtered deformations")
    sub4 = p4.add_subparsers(dest="subcommand", required=True)
    p4a = sub4.add_parser("integrate")
    p4a.add_argument("input")
    p4a.add_argument("--out")
    p4a.set_defaults(func=cmd_deform_integrate)
    p4b = sub4.add_parser("verify")
    p4b.add_argument("input")
    p4b.add_argument("--out")
    p4b.set_defaults(func=cmd_deform_verify)

    p5 = sub.add_parser("reconstruct", help="basepoint realizability report")
    p5.add_argument("input")
    p5.add_argument("--out")
    p5.set_defaults(func=cmd_reconstruct)

    p6 = sub.add_parser("examples", help="write shipped example inputs")
    p6.add_argument("--outdir", default="examples_inputs")
    p6.set_defaults(func=cmd_examples)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        loc = f" (line {exc.line}, col {exc.col})" if exc.line else ""
        print(json.dumps({"error": str(exc) + loc}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
