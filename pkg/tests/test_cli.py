import csv
import json

import pytest

from jacobi_resonance.artifacts import SCHEMA_VERSION
from jacobi_resonance.cli import main

BG2 = {"a0": [0.5, 2.0], "b0": [0.0, 0.0]}
PERT1 = {"u": [0.0, 1.0], "v": [1.0, 0.0]}


def _write(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


def _run(tmp_path, command, doc, *extra, out="out"):
    cfg = _write(tmp_path / f"{command}.json", doc) if isinstance(doc, dict) else doc
    code = main([command, "--config", cfg, "--out", str(tmp_path / out), *extra])
    return code, tmp_path / out


def _load(path):
    doc = json.loads(path.read_text())
    assert doc["schema_version"] == SCHEMA_VERSION
    return doc


def test_bands(tmp_path):
    code, out = _run(tmp_path, "bands", {"background": BG2}, "--plot")
    assert code == 0
    doc = _load(out / "bands.json")
    assert len(doc["intervals"]) == 2
    assert (out / "bands.csv").exists() and (out / "bands.svg").exists()


def test_states(tmp_path):
    code, out = _run(tmp_path, "states", {"background": BG2, "perturbation": PERT1}, "--plot")
    assert code == 0
    doc = _load(out / "states.json")
    assert doc["nu"] == 2 and len(doc["catalog"]["states"]) == 5
    assert _load(out / "reconstruction_input.json")["kind"] == "reconstruction_input"
    assert (out / "states.svg").exists()


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_scatter_grid(tmp_path, fmt):
    code, out = _run(tmp_path, "scatter", {"background": BG2, "perturbation": PERT1}, "--grid", "50",
                     "--format", fmt)
    assert code == 0
    doc = _load(out / "scattering.json")
    assert doc["unitarity_max_deviation"] < 1e-10
    if fmt == "csv":
        with open(out / "scattering.csv") as fh:
            rows = list(csv.reader(fh))
        assert len(rows) == 51 and rows[0][0] == "z_re"
    else:
        assert len(_load(out / "scattering_grid.json")["rows"]) == 50


def test_scatter_invert_chain(tmp_path):
    code, out = _run(tmp_path, "scatter", {"background": BG2, "perturbation": PERT1})
    assert code == 0
    code, out2 = _run(tmp_path, "invert", str(out / "scattering.json"), out="inv")
    assert code == 0
    assert _load(out2 / "glm_report.json")["max_error"] < 1e-6


def test_states_reconstruct_chain(tmp_path):
    code, out = _run(tmp_path, "states", {"background": BG2, "perturbation": PERT1})
    code, out2 = _run(tmp_path, "reconstruct", str(out / "reconstruction_input.json"), out="rec")
    assert code == 0
    rec = _load(out2 / "glm_report.json")["recovered"]
    assert max(abs(a - b) for a, b in zip(rec["u"] + rec["v"], PERT1["u"] + PERT1["v"])) < 1e-6


def test_roundtrip_deterministic(tmp_path):
    doc = {"background": BG2, "draws": 3}
    code, out = _run(tmp_path, "roundtrip", doc, "--seed", "7", out="a")
    assert code == 0
    code, out2 = _run(tmp_path, "roundtrip", doc, "--seed", "7", out="b")
    assert (out / "roundtrip.json").read_bytes() == (out2 / "roundtrip.json").read_bytes()
    assert (out / "roundtrip.csv").read_bytes() == (out2 / "roundtrip.csv").read_bytes()
    suite = _load(out / "roundtrip.json")["suite"]
    assert suite["failures"] == 0 and suite["max_error_right"] < 1e-6


def test_lossless_numbers(tmp_path):
    code, out = _run(tmp_path, "scatter", {"background": BG2, "perturbation": PERT1}, "--grid", "16")
    text = (out / "scattering.csv").read_text().splitlines()[1]
    for field in text.split(","):
        assert format(float(field), ".17g") == field


def test_schema_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["bands", "--config", str(bad), "--out", str(tmp_path)]) == 2
    assert _run(tmp_path, "bands", {"background": {"a0": [0.5, 2.0]}})[0] == 2
    assert _run(tmp_path, "states", {"background": BG2})[0] == 2
    assert _run(tmp_path, "bands", {"background": BG2}, "--format", "xml")[0] == 2
    assert _run(tmp_path, "bands", {"background": BG2}, "--tol", "-1")[0] == 2
    assert main(["nope", "--config", "x"]) == 2


def test_missing_c3(tmp_path):
    code, out = _run(tmp_path, "states", {"background": BG2, "perturbation": PERT1})
    doc = json.loads((out / "reconstruction_input.json").read_text())
    del doc["c3"]
    assert _run(tmp_path, "reconstruct", {**doc}, out="r")[0] == 2


def test_precondition_errors(tmp_path):
    assert _run(tmp_path, "bands", {"background": {"a0": [1.0, 2.0], "b0": [0.0, 0.0]}})[0] == 3
    zero_v0 = {"u": [0.0, 1.0], "v": [0.0, 0.0]}
    assert _run(tmp_path, "scatter", {"background": BG2, "perturbation": zero_v0})[0] == 3


def test_nonsimple_states_rejected(tmp_path):
    code, out = _run(tmp_path, "states", {"background": BG2, "perturbation": PERT1})
    doc = json.loads((out / "reconstruction_input.json").read_text())
    doc["states"][1] = dict(doc["states"][0])
    assert _run(tmp_path, "reconstruct", doc, out="r")[0] == 3


def test_corrupted_norming_rejected(tmp_path):
    code, out = _run(tmp_path, "scatter", {"background": BG2, "perturbation": PERT1})
    doc = json.loads((out / "scattering.json").read_text())
    key = "gamma_plus" if "gamma_plus" in doc else "gamma"
    doc[key][0] = -doc[key][0]
    assert _run(tmp_path, "invert", doc, out="i")[0] == 3
