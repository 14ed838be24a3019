import json
import logging
import math

import numpy as np
import pytest

from conftest import PINNED_FILE, Pinned
from python_hardyverify import check_numpy_compatibility
from python_hardyverify.errors import ValidationError
from python_hardyverify.logging_config import get_logger, setup_logging
from python_hardyverify.mesh.radial import check_mesh, get_allowed_kinds, graded_mesh
from python_hardyverify.utils.files import check_output, format_cell, to_csv, to_json, write_output
from python_hardyverify.utils.lists import grid_product


class TestGridProduct:
    def test_last_key_fastest(self):
        grid = grid_product({"lambda": [0.0, 0.5], "seed": [1, 2, 3]})
        assert len(grid) == 6
        assert grid[0] == (("lambda", 0.0), ("seed", 1))
        assert grid[1] == (("lambda", 0.0), ("seed", 2))
        assert grid[-1] == (("lambda", 0.5), ("seed", 3))

    def test_empty(self):
        assert grid_product({}) == []
        assert grid_product({"lambda": [0.0], "seed": []}) == []


class TestFiles:
    def test_format_cell(self):
        assert format_cell(None) == ""
        assert format_cell(True) == "true"
        assert format_cell(0.1) == "0.10000000000000001"
        assert format_cell([1, 2]) == "1 2"
        assert format_cell("pass") == "pass"

    def test_csv(self):
        assert to_csv(["a", "b"], [[1, 0.5], [2, None]]) == "a,b\n1,0.5\n2,\n"

    def test_json_is_stable(self):
        assert to_json({"b": 1, "a": [1.5]}) == to_json({"b": 1, "a": [1.5]})
        assert to_json({"b": 1}).endswith("}\n")

    def test_write_output(self, tmp_path, capsys):
        write_output("x\n")
        assert capsys.readouterr().out == "x\n"
        path = tmp_path / "out.csv"
        write_output("a\n", str(path))
        assert path.read_text() == "a\n"
        with pytest.raises(FileExistsError):
            write_output("b\n", str(path))
        assert path.read_text() == "a\n"

    def test_check_output(self, tmp_path):
        check_output(None)
        check_output(str(tmp_path / "new.json"))
        (tmp_path / "old.json").write_text("{}")
        with pytest.raises(FileExistsError):
            check_output(str(tmp_path / "old.json"))


class TestRadialMesh:
    def test_geometric(self):
        nodes = graded_mesh(1e-3, 1e3, 6)
        assert nodes.size == 7
        assert (nodes[0], nodes[-1]) == (1e-3, 1e3)
        np.testing.assert_allclose(nodes[1:] / nodes[:-1], 10.0, rtol=1e-12)

    def test_uniform(self):
        np.testing.assert_allclose(graded_mesh(0.0, 1.0, 4, "uniform"), [0.0, 0.25, 0.5, 0.75, 1.0])
        assert get_allowed_kinds() == ["geometric", "uniform"]

    @pytest.mark.parametrize(
        "args, field",
        [
            ((0.0, 1.0, 4, "chebyshev"), "mesh"),
            ((0.0, 1.0, 1, "uniform"), "nodes"),
            ((1.0, 1.0, 4, "uniform"), "rmin"),
            ((0.0, 1.0, 4, "geometric"), "rmin"),
        ],
    )
    def test_rejects(self, args, field):
        with pytest.raises(ValidationError) as e:
            graded_mesh(*args)
        assert e.value.field == field

    def test_check_mesh(self):
        with pytest.raises(ValidationError) as e:
            check_mesh([0.0, 2.0, 1.0])
        assert e.value.field == "mesh"


class TestLogging:
    @pytest.fixture(autouse=True)
    def restore(self):
        errors, call = np.geterr(), np.geterrcall()
        root = logging.getLogger("python_hardyverify")
        handlers, level = list(root.handlers), root.level
        yield
        np.seterr(**errors)
        np.seterrcall(call)
        root.handlers[:] = handlers
        root.setLevel(level)

    def test_get_logger(self):
        assert get_logger("python_hardyverify.sharpness").name == "python_hardyverify.sharpness"
        assert get_logger("tests").name == "python_hardyverify.tests"

    def test_levels(self):
        assert setup_logging().level == logging.WARNING
        assert setup_logging(verbose=True).level == logging.INFO
        assert setup_logging(verbose=True, debug=True).level == logging.DEBUG

    def test_log_file_gets_debug(self, tmp_path):
        path = tmp_path / "run.log"
        setup_logging(log_file=str(path))
        get_logger("tests").debug("assembling level 0")
        for handler in logging.getLogger("python_hardyverify").handlers:
            handler.flush()
        assert "assembling level 0" in path.read_text()

    def test_floating_point_events_are_logged(self, caplog):
        setup_logging(debug=True)
        with caplog.at_level(logging.DEBUG, logger="python_hardyverify.floating_point"):
            np.exp(np.array([1000.0]))
        assert "overflow" in caplog.text


class TestNumpyCompatibility:
    def test_current_numpy_is_accepted(self):
        check_numpy_compatibility()

    @pytest.mark.parametrize("old", ["1.23.5", "1.9.0", "1.24.0rc1"])
    def test_old_numpy_is_rejected(self, old, monkeypatch):
        monkeypatch.setattr(np, "__version__", old)
        with pytest.raises(RuntimeError) as e:
            check_numpy_compatibility()
        assert old in str(e.value)


class TestPinned:
    def test_committed_values(self):
        values = json.loads(PINNED_FILE.read_text())
        assert values and all(math.isfinite(v) for v in values.values())

    def test_missing_key_fails(self, tmp_path):
        store = Pinned(tmp_path / "pinned.json")
        with pytest.raises(pytest.fail.Exception):
            store.check("new", 1.0)

    def test_update_records(self, tmp_path):
        path = tmp_path / "pinned.json"
        store = Pinned(path, update=True)
        store.check("new", 1.0)
        store.save()
        Pinned(path).check("new", 1.0 + 1e-12)
        with pytest.raises(AssertionError):
            Pinned(path).check("new", 1.1)
