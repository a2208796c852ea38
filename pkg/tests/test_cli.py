import csv
import io
import json
import math
from pathlib import Path

import numpy as np
import pytest
from conftest import SEED, random_hmm

from hqmm.cli import commands
from hqmm.config import settings
from hqmm.main import main
from hqmm.services import numkernel
from hqmm.services.block_maps import EffectSequence
from hqmm.services.classical_lift import EquivalenceReport, classical_forward
from hqmm.services.model_io import serialize_effects, serialize_hmm
from hqmm.services.quantum_core import Effect
from hqmm.services.qubit_model import CLAIM_REGISTRY, separation_effects
from hqmm.utils.logger import set_level

GOLDEN = Path(__file__).parent / "golden"


def golden_header(name: str) -> str:
    return (GOLDEN / name).read_text().splitlines()[0]


def read_rows(text: str) -> list[dict[str, str]]:
    return list(csv.DictReader(io.StringIO(text)))


def write(tmp_path: Path, name: str, text: str) -> str:
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def run_cli(capsys, *argv: str) -> tuple[int, str, str]:
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def diagonal_effects(rng: np.random.Generator, n: int, m: int, length: int):
    weights = [(rng.random(n), rng.random(m)) for _ in range(length)]
    pairs = ((Effect(np.diag(a) + 0j), Effect(np.diag(b) + 0j)) for a, b in weights)
    effects = EffectSequence(tuple(pairs))
    return weights, effects


def test_emit_then_validate(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "emit-qubit", "--theta", "1.0", "--steps", "2")
    assert code == 0
    assert json.loads(out)["architecture"] == "conventional"
    model = write(tmp_path, "model.json", out)
    effects = write(tmp_path, "effects.json", serialize_effects(separation_effects(2)))
    code, out, _ = run_cli(capsys, "validate", model, "--effects", effects)
    assert code == 0
    assert out.startswith("model ok: N=2 M=2 steps=2 architecture=conventional")
    assert "effects ok: 2 pairs" in out


def test_compare_quarter_turn(tmp_path, capsys):
    _, out, _ = run_cli(capsys, "emit-qubit", "--theta", repr(math.pi / 2))
    model = write(tmp_path, "model.json", out)
    effects = write(tmp_path, "effects.json", serialize_effects(separation_effects(1)))
    code, out, _ = run_cli(capsys, "compare", model, effects)
    assert code == 0
    assert out.splitlines()[0] == golden_header("compare.csv")
    (row,) = read_rows(out)
    assert float(row["conv_prob"]) == pytest.approx(0.5, abs=1e-12)
    assert float(row["caus_prob"]) == pytest.approx(1.0, abs=1e-12)
    assert float(row["prob_diff"]) == pytest.approx(0.5, abs=1e-12)


def test_compare_ignores_document_architecture(tmp_path, capsys):
    _, out, _ = run_cli(capsys, "emit-qubit", "--theta", "0.8", "--architecture", "causal")
    model = write(tmp_path, "model.json", out)
    effects = write(tmp_path, "effects.json", serialize_effects(separation_effects(1)))
    _, out, _ = run_cli(capsys, "compare", model, effects)
    (row,) = read_rows(out)
    assert float(row["conv_prob"]) == pytest.approx(math.cos(0.4) ** 2, abs=1e-12)


def test_sweep_theta(capsys):
    argv = ["sweep-theta", "--min", "0", "--max", repr(math.pi), "--steps", "3"]
    code, out, _ = run_cli(capsys, *argv)
    assert code == 0
    assert out.splitlines()[0] == golden_header("sweep_theta.csv")
    rows = read_rows(out)
    assert [float(r["theta"]) for r in rows] == [0.0, math.pi / 2, math.pi]
    middle = rows[1]
    assert float(middle["conv_prob"]) == pytest.approx(0.5, abs=1e-12)
    assert float(middle["caus_prob"]) == pytest.approx(1.0, abs=1e-12)
    assert float(middle["choi_trace_norm"]) == pytest.approx(math.sqrt(3), abs=1e-10)
    assert float(middle["psucc_upper"]) == pytest.approx(0.5 + math.sqrt(3) / 4, abs=1e-10)
    assert float(middle["entropy_paper_formula"]) == pytest.approx(math.log(2), abs=1e-12)
    assert float(middle["entropy_psiF_computed"]) == pytest.approx(0.0, abs=1e-12)
    first = rows[0]
    assert float(first["conv_prob"]) == pytest.approx(1.0, abs=1e-12)
    assert float(first["choi_trace_norm"]) == pytest.approx(0.0, abs=1e-12)


def test_sweep_theta_default_grid_in_bits(capsys):
    code, out, _ = run_cli(capsys, "--log-base", "bit", "sweep-theta")
    assert code == 0
    rows = read_rows(out)
    assert len(rows) == 33
    thetas = [float(r["theta"]) for r in rows]
    assert thetas == sorted(thetas)
    assert max(float(r["entropy_paper_formula"]) for r in rows) <= 1.0 + 1e-12


def test_sweep_theta_rejects_bad_grid(capsys):
    code, _, err = run_cli(capsys, "sweep-theta", "--min", "2", "--max", "1")
    assert code == 2
    assert "min < max" in err


def test_verify_paper_default(capsys):
    code, out, _ = run_cli(capsys, "verify-paper")
    assert code == 0
    assert out.splitlines()[0] == golden_header("verify_paper.csv")
    rows = read_rows(out)
    assert len(rows) == 2 * len(CLAIM_REGISTRY)
    assert {r["convention"] for r in rows} == {"first", "second"}
    status = {(r["claim_id"], r["convention"]): r["status"] for r in rows}
    assert status["cylinder_separation", "first"] == "match"
    assert status["cylinder_separation", "second"] == "mismatch"
    assert status["choi_entanglement_entropy", "first"] == "mismatch"
    assert all(float(r["theta"]) == pytest.approx(math.pi / 2) for r in rows)


def test_verify_paper_grid(capsys):
    code, out, _ = run_cli(capsys, "verify-paper", "--grid")
    assert code == 0
    assert len(read_rows(out)) == 33 * 2 * len(CLAIM_REGISTRY)


def test_verify_paper_theta_and_grid_are_exclusive(capsys):
    with pytest.raises(SystemExit) as info:
        main(["verify-paper", "--theta", "1", "--grid"])
    assert info.value.code == 2


def test_lift_compare_pipelines(tmp_path, capsys):
    rng = np.random.default_rng(SEED)
    for trial in range(20):
        n, m = (int(x) for x in rng.integers(1, 4, size=2))
        steps = int(rng.integers(1, 4))
        hmm = random_hmm(rng, n, m, steps)
        hmm_path = write(tmp_path, f"hmm{trial}.json", serialize_hmm(hmm))
        code, out, _ = run_cli(capsys, "lift", hmm_path)
        assert code == 0
        model = write(tmp_path, f"model{trial}.json", out)
        weights, effects = diagonal_effects(rng, n, m, steps)
        effects_path = write(tmp_path, f"effects{trial}.json", serialize_effects(effects))
        code, out, _ = run_cli(capsys, "compare", model, effects_path)
        assert code == 0
        (row,) = read_rows(out)
        assert float(row["prob_diff"]) <= 1e-10
        assert float(row["conv_prob"]) == pytest.approx(classical_forward(hmm, weights), abs=1e-10)


def test_lift_repeats_single_step(tmp_path, capsys, example_hmm):
    path = write(tmp_path, "hmm.json", serialize_hmm(example_hmm))
    argv = ["--seed", "5", "lift", path, "--steps", "3", "--architecture", "causal"]
    code, out, _ = run_cli(capsys, *argv)
    assert code == 0
    doc = json.loads(out)
    assert len(doc["steps"]) == 3
    assert doc["architecture"] == "causal"


def test_lift_step_errors(tmp_path, capsys, rng):
    two_step = write(tmp_path, "hmm.json", serialize_hmm(random_hmm(rng, 2, 2, 2)))
    code, _, err = run_cli(capsys, "lift", two_step, "--steps", "3")
    assert code == 2
    assert "time-inhomogeneous" in err
    code, _, _ = run_cli(capsys, "lift", two_step, "--steps", "0")
    assert code == 2


def test_invalid_hmm_exit_code(tmp_path, capsys):
    bad = write(
        tmp_path,
        "hmm.json",
        json.dumps({"pi": [1.0], "transitions": [[[1.0]]], "emissions": [[[0.5, 0.6]]]}),
    )
    code, _, err = run_cli(capsys, "lift", bad)
    assert code == 2
    assert "emission 0 row 0 sums to 1.1" in err


def test_missing_file_exit_code(tmp_path, capsys):
    code, _, err = run_cli(capsys, "validate", str(tmp_path / "absent.json"))
    assert code == 2
    assert "error: cannot read" in err


def test_non_unital_model_exit_code(tmp_path, capsys):
    _, out, _ = run_cli(capsys, "emit-qubit", "--theta", "1.0")
    doc = json.loads(out)
    doc["steps"][0]["emission_kraus"][0][0][0] = [0.5, 0.0]
    path = write(tmp_path, "model.json", json.dumps(doc))
    code, _, err = run_cli(capsys, "validate", path)
    assert code == 2
    assert "step 0 emission map not unital" in err


def test_effects_longer_than_model(tmp_path, capsys):
    _, out, _ = run_cli(capsys, "emit-qubit", "--theta", "1.0")
    model = write(tmp_path, "model.json", out)
    effects = write(tmp_path, "effects.json", serialize_effects(separation_effects(2)))
    code, _, err = run_cli(capsys, "compare", model, effects)
    assert code == 2
    assert "exceed the model horizon" in err


def test_failed_self_check_is_numeric_failure(tmp_path, capsys, monkeypatch, example_hmm):
    def failing(hmm, n, trials=None, tol=None, seed=None, step=None):
        return EquivalenceReport(1.0, 1.0, 1, 0, 1e-10)

    monkeypatch.setattr(commands, "check_equivalence", failing)
    path = write(tmp_path, "hmm.json", serialize_hmm(example_hmm))
    code, out, err = run_cli(capsys, "lift", path)
    assert code == 3
    assert out == ""
    assert "numeric failure" in err


def test_eigensolver_non_convergence_exit_code(capsys, monkeypatch):
    monkeypatch.setattr(numkernel.settings, "jacobi_max_sweeps", 0)
    code, _, err = run_cli(capsys, "verify-paper", "--theta", "1.0")
    assert code == 3
    assert "did not converge" in err


def test_eigensolver_failure_while_parsing_exit_code(tmp_path, capsys, monkeypatch):
    _, out, _ = run_cli(capsys, "emit-qubit", "--theta", "1.0")
    doc = json.loads(out)
    doc["initial_state"] = [[[0.5, 0], [0.5, 0]], [[0.5, 0], [0.5, 0]]]
    path = write(tmp_path, "model.json", json.dumps(doc))
    monkeypatch.setattr(numkernel.settings, "jacobi_max_sweeps", 0)
    code, _, err = run_cli(capsys, "validate", path)
    assert code == 3
    assert "did not converge" in err


def test_argument_errors():
    with pytest.raises(SystemExit) as info:
        main(["--tol", "-1", "verify-paper"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["emit-qubit", "--theta", "nan"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 2
    for seed in ("-1", str(2**64)):
        with pytest.raises(SystemExit) as info:
            main(["--seed", seed, "verify-paper"])
        assert info.value.code == 2


def test_log_level_override(tmp_path, capsys, caplog):
    _, out, _ = run_cli(capsys, "emit-qubit", "--theta", "1.0")
    model = write(tmp_path, "model.json", out)
    try:
        code, out, _ = run_cli(capsys, "--log-level", "debug", "validate", model)
    finally:
        set_level(settings.log_level)
    assert code == 0
    assert out.startswith("model ok")
    assert any(
        r.levelname == "DEBUG" and r.getMessage().startswith("Parsed model: N=2, M=2, 1 steps")
        for r in caplog.records
    )
