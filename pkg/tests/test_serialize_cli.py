"""JSON round-trips and the command-line pipeline."""

import json
import os
import subprocess
import sys

import pytest
from gmpy2 import mpq

from spencerdef import deform as df
from spencerdef import examples as ex
from spencerdef import serialize as ser
from spencerdef import spencer as sp
from spencerdef.exactla import QMatrix, RationalTensor, Subspace
from conftest import cached_model


def test_tensor_roundtrip():
    t = RationalTensor((2, 3, 4))
    t[0, 1, 2] = mpq(-7, 3)
    t[1, 2, 3] = mpq(5)
    t2 = ser.tensor_from_json(ser.tensor_to_json(t))
    assert t == t2


def test_subspace_roundtrip():
    s = Subspace.from_vectors(4, [[1, 2, 0, 1], [0, 0, 1, mpq(1, 2)]])
    s2 = ser.subspace_from_json(ser.subspace_to_json(s))
    assert s == s2


def test_bracket_table_roundtrip(model_1_3):
    alg = model_1_3.algebra
    alg2 = ser.bracket_table_from_json(ser.bracket_table_to_json(alg))
    assert alg.table == alg2.table and alg.dims == alg2.dims


def test_flat_model_json(model_1_3):
    doc = ser.flat_model_to_json(model_1_3)
    text1 = json.dumps(doc, sort_keys=True)
    text2 = json.dumps(ser.flat_model_to_json(model_1_3), sort_keys=True)
    assert text1 == text2  # deterministic payloads


def test_deformation_roundtrip(model_1_3):
    sub = df.maximal_subalgebra(model_1_3)
    basis = sp.normalized_cocycle_basis(model_1_3)
    inv = sp.invariant_cocycles(model_1_3, sub.h_basis.vectors, basis)
    coc = sp.combine_cocycles(basis, inv.basis_vectors()[0])
    out = df.integrate(df.admissibility_check(sub, coc))
    doc = ser.deformation_to_json(out)
    redone = ser.deformation_from_json(doc)
    assert redone.algebra.table == out.algebra.table
    assert redone.theta == out.theta


def _run(args, **kw):
    return subprocess.run([sys.executable, "-m", "spencerdef.cli", *args],
                          capture_output=True, text=True, **kw)


def test_cli_pinor():
    r = _run(["pinor", "--signature", "1,10"])
    assert r.returncode == 0
    rep = json.loads(r.stdout)
    assert rep["payload"]["dim_s"] == 32
    assert rep["payload"]["volume_sign"] == 1
    assert len(rep["payload"]["gamma_checksums"]) == 11


def test_cli_pinor_convention_flag():
    r = _run(["pinor", "--signature", "0,7", "--convention", "plus"])
    rep = json.loads(r.stdout)
    assert rep["payload"]["dim_s"] == 8


def test_cli_cohomology_small():
    r = _run(["cohomology", "--signature", "1,2", "--exact"])
    assert r.returncode == 0
    rep = json.loads(r.stdout)
    assert rep["payload"]["cohomology_22"]["dim_H"] == 1
    assert rep["payload"]["normalized_cocycle_dim"] == 1
    assert rep["checks"]["routes_agree"]


def test_cli_cohomology_degree_mode():
    r = _run(["cohomology", "--signature", "1,2", "--degree", "4", "--p", "2", "--exact"])
    rep = json.loads(r.stdout)
    assert rep["payload"]["cohomology"]["dim_H"] == 0
    assert rep["checks"]["d_o_d_zero"]


def test_cli_deform_pipeline(tmp_path):
    job = ex.ads4_job()
    path = tmp_path / "job.json"
    ser.dump(job, str(path))
    out = tmp_path / "defm.json"
    r = _run(["deform", "integrate", str(path), "--out", str(out)])
    assert r.returncode == 0
    r2 = _run(["deform", "verify", str(out)])
    assert r2.returncode == 0
    r3 = _run(["reconstruct", str(out)])
    assert r3.returncode == 0
    rep3 = json.loads(r3.stdout)
    assert rep3["checks"]["passed"]


def test_cli_subalgebra_check(tmp_path, model_1_3):
    sub = df.maximal_subalgebra(model_1_3)
    doc = {"schema": 1, "kind": "subalgebra",
           "signature": ser.signature_to_json(model_1_3.signature),
           "parity": "symmetric", "extend": 1,
           "subalgebra": ser.subalgebra_to_json(sub)}
    path = tmp_path / "sub.json"
    ser.dump(doc, str(path))
    r = _run(["subalgebra-check", str(path)])
    assert r.returncode == 0
    rep = json.loads(r.stdout)
    assert rep["payload"]["closed"] and rep["payload"]["homogeneity"]


def test_cli_malformed_input_exit_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    r = _run(["deform", "integrate", str(bad)])
    assert r.returncode == 2
    err = json.loads(r.stderr)
    assert "line" in err["error"]


def test_cli_payload_determinism(tmp_path):
    out1 = _run(["pinor", "--signature", "1,3"]).stdout
    out2 = _run(["pinor", "--signature", "1,3"]).stdout
    d1, d2 = json.loads(out1), json.loads(out2)
    d1.pop("timings")
    d2.pop("timings")
    assert d1 == d2


def test_examples_writer(tmp_path):
    paths = ex.write_examples(str(tmp_path), include_eleven_d=False)
    assert len(paths) == 2
    for p in paths:
        doc = json.loads(open(p).read())
        assert doc["kind"] == "deform_job" and doc["schema"] == 1
