"""JSON persistence for every pipeline object.

One schema version; rationals travel as "p/q" strings; tensors are sparse
([indices..., value] entries under a shape header).  Round-tripping any
serialized object yields an entrywise-equal object, which the test suite
asserts.
"""

from __future__ import annotations

import json
from typing import Any

from gmpy2 import mpq

from . import SCHEMA_VERSION
from .clifford import Signature, build_pinor, spin_action
from .deform import (AdmissibleData, CocycleOnSub, FilteredDeformation,
                     GradedSubalgebra, Section, build_graded_subalgebra)
from .exactla import QMatrix, RationalTensor, Subspace, parse_q, qstr
from .flatmodel import (FlatModel, SquaringMap, SuperAlgebraTensor,
                        build_flat_model, build_squaring_map, standard_model)
from .spencer import CoordBasis, NormalizedCocycle

import numpy as np


def tensor_to_json(t: RationalTensor) -> dict:
    entries = [[*idx, qstr(v)] for idx, v in sorted(t.entries.items())]
    return {"shape": list(t.shape), "entries": entries}


def tensor_from_json(obj: dict) -> RationalTensor:
    t = RationalTensor(obj["shape"])
    for entry in obj["entries"]:
        *idx, val = entry
        t[tuple(idx)] = parse_q(val)
    return t


def matrix_to_json(m: QMatrix) -> dict:
    return {"shape": [m.nrows, m.ncols],
            "entries": [[i, j, qstr(v)] for i, j, v in m.iter_entries()]}


def matrix_from_json(obj: dict) -> QMatrix:
    nrows, ncols = obj["shape"]
    return QMatrix.from_entries(nrows, ncols,
                                [(i, j, parse_q(v)) for i, j, v in obj["entries"]])


def subspace_to_json(s: Subspace) -> dict:
    rows = [[[j, qstr(v)] for j, v in sorted(row.items())] for row in s.basis]
    return {"ambient_dim": s.ambient_dim, "pivots": list(s.pivots), "basis": rows}


def subspace_from_json(obj: dict) -> Subspace:
    basis = [{j: parse_q(v) for j, v in row} for row in obj["basis"]]
    return Subspace(obj["ambient_dim"], basis, list(obj["pivots"]))


def vectors_to_json(vectors) -> list:
    return [[qstr(x) for x in v] for v in vectors]


def vectors_from_json(obj) -> list:
    return [[parse_q(x) for x in v] for v in obj]


def signature_to_json(sig: Signature) -> dict:
    return {"p": sig.p, "q": sig.q, "clifford_sign": sig.clifford_sign}


def signature_from_json(obj: dict) -> Signature:
    return Signature(obj["p"], obj["q"], obj.get("clifford_sign", 1))


def bracket_table_to_json(alg: SuperAlgebraTensor) -> dict:
    table = []
    for (x, y), vec in sorted(alg.table.items()):
        if x > y:
            continue
        table.append([x, y, [[z, qstr(v)] for z, v in sorted(vec.items())]])
    return {"dims": list(alg.dims), "parity": alg.parity, "table": table}


def bracket_table_from_json(obj: dict) -> SuperAlgebraTensor:
    alg = SuperAlgebraTensor(tuple(obj["dims"]), obj["parity"])
    for x, y, vec in obj["table"]:
        alg.set_bracket(x, y, {z: parse_q(v) for z, v in vec})
    return alg


def kappa_to_json(kappa: SquaringMap) -> dict:
    t = RationalTensor((kappa.dim_s, kappa.dim_s, len(kappa.kmats)))
    for i, K in enumerate(kappa.kmats):
        nzr, nzc = np.nonzero(K)
        for a, b in zip(nzr, nzc):
            t[int(a), int(b), i] = int(K[a, b])
    return {"parity": kappa.parity, "provenance": kappa.provenance,
            "tensor": tensor_to_json(t)}


def flat_model_to_json(model: FlatModel, extend: int = 1) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "kind": "flat_model",
        "signature": signature_to_json(model.signature),
        "parity": model.parity,
        "extend": extend,
        "dims": list(model.dims),
        "kappa": kappa_to_json(model.kappa),
        "brackets": bracket_table_to_json(model.algebra),
        "degenerate_kappa": model.degenerate_kappa,
    }


def cocycle_to_json(coc: NormalizedCocycle) -> dict:
    return {"beta": tensor_to_json(coc.beta), "gamma": tensor_to_json(coc.gamma)}


def cocycle_from_json(model: FlatModel, obj: dict) -> NormalizedCocycle:
    return NormalizedCocycle(model=model,
                             beta=tensor_from_json(obj["beta"]),
                             gamma=tensor_from_json(obj["gamma"]))


def subalgebra_to_json(sub: GradedSubalgebra) -> dict:
    return {"v_basis": vectors_to_json(sub.v_basis.vectors),
            "s_basis": vectors_to_json(sub.s_basis.vectors),
            "h_basis": vectors_to_json(sub.h_basis.vectors)}


def subalgebra_from_json(model: FlatModel, obj: dict) -> GradedSubalgebra:
    return build_graded_subalgebra(model,
                                   vectors_from_json(obj["v_basis"]),
                                   vectors_from_json(obj["s_basis"]),
                                   vectors_from_json(obj["h_basis"]))


def section_to_json(sec: Section) -> dict:
    return {"columns": vectors_to_json(sec.columns)}


def deformation_to_json(defm: FilteredDeformation) -> dict:
    model = defm.sub.model
    return {
        "schema": SCHEMA_VERSION,
        "kind": "filtered_deformation",
        "signature": signature_to_json(model.signature),
        "parity": model.kappa.parity,
        "extend": model.pinor.n_copies,
        "subalgebra": subalgebra_to_json(defm.sub),
        "cocycle": cocycle_to_json(defm.adm.cocycle),
        "lambda": vectors_to_json(defm.adm.lam),
        "section": section_to_json(defm.adm.section),
        "theta": tensor_to_json(defm.theta),
        "brackets": bracket_table_to_json(defm.algebra),
        "report": defm.report,
    }


def model_from_header(obj: dict) -> FlatModel:
    """Rebuild the flat model referenced by a job/deformation header."""
    sig = signature_from_json(obj["signature"])
    parity = obj.get("parity", "symmetric")
    extend = obj.get("extend", 1)
    return standard_model(sig.p, sig.q, parity=parity,
                          clifford_sign=sig.clifford_sign, extend=extend)


def deformation_from_json(obj: dict) -> FilteredDeformation:
    """Rebuild and re-verify a deformation from its JSON form.

    The admissibility and integration pipeline is re-run from the stored
    subalgebra/cocycle/section, then the stored bracket table is compared
    against the recomputed one.
    """
    from . import deform as df
    model = model_from_header(obj)
    sub = subalgebra_from_json(model, obj["subalgebra"])
    coc = cocycle_from_json(model, obj["cocycle"])
    pairs = df._pair_list(sub.s_basis.dim, model.kappa.parity)
    sec = Section(sub=sub, pairs=pairs,
                  columns=vectors_from_json(obj["section"]["columns"]))
    adm = df.admissibility_check(sub, coc, section=sec)
    if isinstance(adm, df.Obstruction):
        raise ValueError(f"stored deformation fails admissibility: {adm}")
    out = df.integrate(adm)
    if isinstance(out, df.Obstruction):
        raise ValueError(f"stored deformation fails integration: {out}")
    stored = bracket_table_from_json(obj["brackets"])
    if stored.table != out.algebra.table:
        raise ValueError("stored bracket table disagrees with recomputation")
    return out


def dump(obj: Any, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load(path: str) -> Any:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
