import json

import numpy as np
import pytest

from branevortex.grids import TorusGrid
from branevortex.io import read_field, write_field, write_history_csv
from branevortex.newton import IterationHistory


def test_field_round_trip(tmp_path, rng):
    grid = TorusGrid(2.0, 3.0, 16, 24)
    values = rng.standard_normal((16, 24))
    path = write_field(tmp_path, "exp_u", 2, values, grid)
    loaded, meta = read_field(path)
    assert np.array_equal(loaded, values)
    assert meta == {"nx": 16, "ny": 24, "Lx": 2.0, "Ly": 3.0,
                    "name": "exp_u", "component": 2}


def test_sidecar_schema(tmp_path, rng):
    grid = TorusGrid(2.0, 2.0, 16, 16)
    write_field(tmp_path, "w", 1, rng.standard_normal((16, 16)), grid)
    sidecar = json.loads((tmp_path / "w_1.f64.json").read_text())
    assert sorted(sidecar) == ["Lx", "Ly", "component", "name", "nx", "ny"]


def test_dump_is_little_endian_row_major(tmp_path):
    grid = TorusGrid(1.0, 1.0, 16, 16)
    values = np.arange(256, dtype=float).reshape(16, 16)
    path = write_field(tmp_path, "f", 1, values, grid)
    raw = np.frombuffer(path.read_bytes(), dtype="<f8")
    assert raw[17] == values[1, 1]


def test_write_rejects_wrong_shape(tmp_path):
    grid = TorusGrid(1.0, 1.0, 16, 16)
    with pytest.raises(ValueError):
        write_field(tmp_path, "f", 1, np.zeros((8, 8)), grid)


def test_deterministic_bytes(tmp_path, rng):
    grid = TorusGrid(2.0, 2.0, 16, 16)
    values = rng.standard_normal((16, 16))
    p1 = write_field(tmp_path / "a", "f", 1, values, grid)
    p2 = write_field(tmp_path / "b", "f", 1, values, grid)
    assert p1.read_bytes() == p2.read_bytes()
    assert (tmp_path / "a/f_1.f64.json").read_text() \
        == (tmp_path / "b/f_1.f64.json").read_text()


def test_history_csv(tmp_path):
    hist = IterationHistory(energy=[3.0, 1.0], grad_norm=[1e-2, 1e-9],
                            step=[1.0, 0.0])
    path = write_history_csv(tmp_path / "history.csv", hist)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "iter,energy,grad_norm,step"
    assert lines[1].startswith("0,3.0,")
    assert len(lines) == 3
