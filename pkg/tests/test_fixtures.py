"""Tests for fixture loading, repairs and error mapping."""

import json

import numpy as np
import pytest

from app.exceptions import FixtureIOError, FixtureParseError, NotHermitianError, NotPositiveError
from app.utils.fixtures import (
    fixture_path,
    load_element,
    load_fixture,
    load_local_unitary,
    load_parameters,
    load_povm,
    repair_hermitian,
)


def write_element(path, rows, outcome="0"):
    path.write_text(json.dumps({
        "id": path.stem,
        "kind": "povm_element",
        "outcome": outcome,
        "matrix": {"dim": len(rows), "rows": rows},
    }))
    return path


def test_fixture_path_resolution(tmp_path):
    assert fixture_path("sydney_pi00", tmp_path) == tmp_path / "sydney_pi00.json"
    assert fixture_path("some/dir/file.json") == fixture_path("some/dir/file.json", tmp_path)


def test_shipped_fixtures_load(sydney_pi00, rigetti_pi00, yorktown_pi000):
    assert sydney_pi00.trace == pytest.approx(0.9452, abs=1e-10)
    assert rigetti_pi00.reported_trace == 0.8742
    assert yorktown_pi000.n_qubits == 3


def test_ideal_povm_fixture_is_complete():
    povm = load_povm("ideal_povm2")
    np.testing.assert_allclose(sum(povm.matrices()), np.eye(4))


def test_sydney_unitary_is_product_of_two_factors(sydney_v):
    assert sydney_v.n_qubits == 2
    np.testing.assert_allclose(sydney_v.matrix.conj().T @ sydney_v.matrix, np.eye(4), atol=1e-12)


def test_unitarizing_logs_a_warning(caplog):
    with caplog.at_level("WARNING", logger="app.utils.fixtures"):
        load_local_unitary("rigetti_v")
    assert "Unitarized factor" in caplog.text


def test_exact_unitary_loads_without_warning(tmp_path, caplog):
    s = 2 ** -0.5
    (tmp_path / "exact_v.json").write_text(json.dumps({
        "id": "exact_v",
        "kind": "local_unitary",
        "factors": [
            {"dim": 2, "rows": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]},
            {"dim": 2, "rows": [[[s, 0.0], [s, 0.0]], [[s, 0.0], [-s, 0.0]]]},
        ],
    }))
    with caplog.at_level("WARNING", logger="app.utils.fixtures"):
        V = load_local_unitary("exact_v", tmp_path)
    assert "Unitarized factor" not in caplog.text
    np.testing.assert_allclose(V.matrix.conj().T @ V.matrix, np.eye(4), atol=1e-12)


def test_parameters(sydney_params):
    assert sydney_params["epsilon"] == 0.0740
    assert sydney_params["eta"] == 0.2711
    assert load_parameters("yorktown_parameters")["trace_pi"] == 1.32


def test_missing_fixture(tmp_path):
    with pytest.raises(FixtureIOError) as exc:
        load_element("nope", tmp_path)
    assert exc.value.exit_code == 2


def test_malformed_json(tmp_path):
    (tmp_path / "broken.json").write_text("{not json")
    with pytest.raises(FixtureParseError) as exc:
        load_element(str(tmp_path / "broken.json"))
    assert exc.value.exit_code == 3


def test_schema_mismatch(tmp_path):
    (tmp_path / "odd.json").write_text(json.dumps({"id": "odd", "kind": "povm_element", "outcome": "0",
                                                   "matrix": {"dim": 3, "rows": []}}))
    with pytest.raises(FixtureParseError):
        load_fixture(str(tmp_path / "odd.json"))


def test_wrong_kind(tmp_path):
    with pytest.raises(FixtureParseError):
        load_element("sydney_parameters")


def test_small_asymmetry_is_repaired(tmp_path, caplog):
    path = write_element(tmp_path / "skew.json", [[[0.9, 0.0], [0.01, 0.0]], [[0.0100000001, 0.0], [0.1, 0.0]]])
    with caplog.at_level("WARNING"):
        element = load_element(str(path))
    np.testing.assert_allclose(element.matrix, element.matrix.conj().T)
    assert "Symmetrized" in caplog.text


def test_large_asymmetry_is_rejected(tmp_path):
    path = write_element(tmp_path / "skew.json", [[[0.9, 0.0], [0.1, 0.0]], [[0.0, 0.0], [0.1, 0.0]]])
    with pytest.raises(NotHermitianError) as exc:
        load_element(str(path))
    assert exc.value.exit_code == 5


def test_repair_clips_tiny_negative_eigenvalue():
    M = np.diag([1.0, -5e-4])
    repaired = repair_hermitian(M, "tiny")
    assert np.linalg.eigvalsh(repaired)[0] >= -1e-12


def test_repair_rejects_negative_eigenvalue():
    with pytest.raises(NotPositiveError):
        repair_hermitian(np.diag([1.0, -0.1]), "negative")
