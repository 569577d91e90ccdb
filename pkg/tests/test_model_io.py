import json

import numpy as np
import pytest

from src.errors import InputError, NotAlmostSymmetricError
from src.generators import almost_symmetric, example1
from src.hpds import simulate
from src.model_io import (
    build_report,
    document_to_model,
    model_to_document,
    read_model,
    read_trajectory_csv,
    write_model,
    write_trajectory_csv,
)
from src.reduction import reduce


def test_model_roundtrip_is_bit_exact(tmp_path):
    model = almost_symmetric(3, 4, seed=4, m=2, l=1)
    path = tmp_path / "model.json"
    write_model(str(path), model)
    loaded = read_model(str(path)).model
    np.testing.assert_array_equal(loaded.A, model.A)
    np.testing.assert_array_equal(loaded.B, model.B)
    np.testing.assert_array_equal(loaded.C, model.C)
    assert loaded.metadata == model.metadata


def test_document_layout():
    doc = model_to_document(almost_symmetric(2, 3, seed=1, m=1))
    assert doc["schema_version"] == 1
    assert (doc["order"], doc["dim"]) == (3, 2)
    assert doc["dynamic_tensor"]["layout"] == "first-index-fastest"
    assert len(doc["dynamic_tensor"]["data"]) == 8
    assert doc["input_matrix"]["rows"] == 2 and doc["input_matrix"]["cols"] == 1
    assert "output_matrix" not in doc


def test_reduced_model_keeps_projection(tmp_path):
    reduced, report = reduce(example1())
    path = tmp_path / "reduced.json"
    write_model(str(path), reduced.model, projection=reduced.V, reduction={"r": report.r})
    f = read_model(str(path))
    np.testing.assert_array_equal(f.projection, reduced.V)
    assert f.reduction == {"r": 3}


def test_writing_same_model_twice_gives_identical_bytes(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    write_model(str(a), almost_symmetric(3, 4, seed=7))
    write_model(str(b), almost_symmetric(3, 4, seed=7))
    assert a.read_bytes() == b.read_bytes()


def test_rejects_malformed_documents():
    doc = model_to_document(almost_symmetric(2, 3, seed=1, m=1))
    with pytest.raises(InputError):
        document_to_model(dict(doc, schema_version=2))
    bad = json.loads(json.dumps(doc))
    bad["dynamic_tensor"]["data"] = bad["dynamic_tensor"]["data"][:-1]
    with pytest.raises(InputError):
        document_to_model(bad)
    bad = json.loads(json.dumps(doc))
    bad["dynamic_tensor"]["layout"] = "row-major"
    with pytest.raises(InputError):
        document_to_model(bad)
    bad = json.loads(json.dumps(doc))
    bad["dim"] = 3
    with pytest.raises(InputError):
        document_to_model(bad)

    for path, value in [
        (("dynamic_tensor", "dims"), 4),
        (("dynamic_tensor", "data"), ["abc"] * 8),
        (("dynamic_tensor", "data"), None),
        (("input_matrix", "data_row_major"), 5),
        (("input_matrix", "data_row_major"), ["x", "y"]),
        (("input_matrix", "rows"), "two"),
        (("metadata",), [1, 2]),
        (("reduction",), "r=1"),
    ]:
        bad = json.loads(json.dumps(doc))
        target = bad
        for key in path[:-1]:
            target = target[key]
        target[path[-1]] = value
        with pytest.raises(InputError):
            document_to_model(bad)


def test_rejects_bad_projection():
    model = almost_symmetric(2, 3, seed=1)
    doc = model_to_document(model, projection=np.eye(3)[:, :2])
    document_to_model(doc)
    wrong_cols = model_to_document(model, projection=np.eye(3)[:, :1])
    with pytest.raises(InputError):
        document_to_model(wrong_cols)
    non_finite = json.loads(json.dumps(doc))
    non_finite["projection"]["data_row_major"][0] = None
    with pytest.raises(InputError):
        document_to_model(non_finite)


def test_rejects_non_almost_symmetric_tensor():
    doc = model_to_document(almost_symmetric(2, 3, seed=1))
    doc["dynamic_tensor"]["data"][1] += 1.0
    with pytest.raises(NotAlmostSymmetricError):
        document_to_model(doc)


def test_read_model_reports_missing_and_invalid_files(tmp_path):
    with pytest.raises(InputError):
        read_model(str(tmp_path / "missing.json"))
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(InputError):
        read_model(str(broken))


def test_trajectory_csv(tmp_path):
    model = almost_symmetric(2, 3, seed=3, l=1)
    traj = simulate(model, [0.1, -0.2], t_span=(0.0, 0.01), dt=0.005)
    path = tmp_path / "traj.csv"
    write_trajectory_csv(str(path), traj)
    header, times, values = read_trajectory_csv(str(path))
    assert header == ["t", "x_1", "x_2", "y_1"]
    np.testing.assert_array_equal(times, traj.times)
    np.testing.assert_array_equal(values[:, :2], traj.states)
    np.testing.assert_array_equal(values[:, 2:], traj.outputs)


def test_report_is_json_safe():
    report = build_report("simulate", {"dt": 0.1}, {"x": np.array([1.0, np.inf]), "n": np.int64(3)}, 0.5)
    text = json.dumps(report, allow_nan=False)
    assert json.loads(text)["result"] == {"x": [1.0, None], "n": 3}
    assert report["tool_version"] == "1.0.0"
