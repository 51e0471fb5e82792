"""
Unit tests for json_io module.
"""

import json
import math
import os
import tempfile

import numpy as np
import pytest

from covers import ColoredCover, Cover, brick_cover_Z
from json_io import (
    InputFormatError,
    cover_from_dict,
    cover_to_dict,
    decode_number,
    decode_point,
    dumps_report,
    extract_param,
    format_number,
    function_from_dict,
    function_to_dict,
    load_cover,
    load_function,
    load_space,
    point_key,
    read_json,
    space_from_dict,
    space_to_dict,
)
from metric_core import DisconnectedGraphError, PointFunction, SimplexPoint, interval_space


def _write(directory: str, name: str, data) -> str:
    path = os.path.join(directory, name)
    with open(path, "w") as f:
        json.dump(data, f)
    return path


class TestExtractParam:
    """Test cases for dot-path parameter lookup."""

    def test_nested_path(self):
        """Nested keys are reached with dots."""
        data = {"search": {"budget": 50, "seed": 3}}
        assert extract_param(data, "search.budget") == 50
        assert extract_param(json.dumps(data), "search.seed") == 3

    def test_empty_path_returns_everything(self):
        """An empty path returns the whole document."""
        assert extract_param({"a": 1}, "") == {"a": 1}

    def test_missing_key(self):
        """Missing keys raise unless a default is given."""
        with pytest.raises(InputFormatError, match="missing key 'epsilon'"):
            extract_param({}, "epsilon")
        assert extract_param({}, "epsilon", 1.0) == 1.0
        assert extract_param({"a": 1}, "a.b", None) is None

    def test_non_dict_value(self):
        """Descending into a scalar is an error."""
        with pytest.raises(InputFormatError, match="non-dict value"):
            extract_param({"a": 1}, "a.b")

    def test_invalid_json_string(self):
        """Unparseable JSON text is reported."""
        with pytest.raises(InputFormatError, match="Failed to parse JSON string"):
            extract_param("{not json", "a")


class TestPoints:
    """Test cases for point ids."""

    def test_decode_point(self):
        """Lists become tuples, integral floats become integers."""
        assert decode_point([1, 2]) == (1, 2)
        assert decode_point(3.0) == 3
        assert decode_point("a") == "a"
        with pytest.raises(InputFormatError):
            decode_point(1.5)
        with pytest.raises(InputFormatError):
            decode_point(True)

    def test_point_key(self):
        """Tuples are keyed by their compact JSON text."""
        assert point_key((1, 2)) == "[1,2]"
        assert point_key(7) == "7"


class TestSpaces:
    """Test cases for the space format."""

    def test_matrix(self):
        """Matrix spaces with ids and a basepoint."""
        space = space_from_dict(
            {"points": ["a", "b"], "metric": {"matrix": [[0, 3], [3, 0]]}, "basepoint": "a"}
        )
        assert space.dist("a", "b") == 3.0
        assert space.basepoint == "a"

    def test_graph_points_from_edges(self):
        """Without a point list the vertices come from the edges."""
        space = space_from_dict({"metric": {"graph": {"edges": [[0, 1, 1], [1, 2, 2]]}}})
        assert space.points == (0, 1, 2)
        assert space.dist(0, 2) == 3.0

    def test_disconnected_graph(self):
        """Graph errors pass through."""
        with pytest.raises(DisconnectedGraphError):
            space_from_dict(
                {"points": [0, 1, 2], "metric": {"graph": {"edges": [[0, 1, 1]]}}}
            )

    def test_interval_and_grid(self):
        """Integer windows and grids are generated, not listed."""
        line = space_from_dict({"metric": {"interval": [0, 9]}, "basepoint": 0})
        assert len(line) == 10
        assert line.basepoint == 0
        grid = space_from_dict({"metric": {"grid": {"x": [0, 2], "norm": "l1"}}})
        assert grid.dist((0, 0), (2, 2)) == 4.0

    def test_coordinates(self):
        """Coordinate spaces take a norm."""
        space = space_from_dict(
            {"metric": {"coordinates": [[0, 0], [3, 4]], "norm": "euclidean"}}
        )
        assert space.dist(0, 1) == pytest.approx(5.0)

    def test_unknown_metric(self):
        """Unknown metric kinds and missing metrics are format errors."""
        with pytest.raises(InputFormatError, match="Unknown metric kind"):
            space_from_dict({"metric": {"hyperbolic": 1}})
        with pytest.raises(InputFormatError, match="needs a 'metric'"):
            space_from_dict({"points": [0]})

    def test_to_dict(self):
        """Coordinate spaces keep their coordinates; tuple ids become lists."""
        data = space_to_dict(space_from_dict({"metric": {"grid": {"x": [0, 1]}}}))
        assert data["points"][0] == [0, 0]
        assert data["metric"]["norm"] == "sup"
        assert len(data["metric"]["coordinates"]) == 4

    def test_read_json_errors(self):
        """Bad files raise InputFormatError."""
        with tempfile.TemporaryDirectory() as temp_dir:
            path = os.path.join(temp_dir, "bad.json")
            with open(path, "w") as f:
                f.write("{oops")
            with pytest.raises(InputFormatError, match="invalid JSON"):
                read_json(path)
            with pytest.raises(InputFormatError, match="Cannot read"):
                read_json(os.path.join(temp_dir, "missing.json"))


class TestCovers:
    """Test cases for the cover format."""

    def test_relative_space_reference(self):
        """A cover can name its space file relative to itself."""
        with tempfile.TemporaryDirectory() as temp_dir:
            _write(temp_dir, "space.json", {"metric": {"interval": [0, 9]}})
            path = _write(
                temp_dir,
                "cover.json",
                {"space": "space.json", "members": [list(range(7)), list(range(4, 10))]},
            )
            cover = load_cover(path)
        assert isinstance(cover, Cover)
        assert cover.members[1] == frozenset(range(4, 10))

    def test_inline_space_and_families(self):
        """Families and r make a colored cover."""
        data = {
            "space": {"metric": {"interval": [0, 3]}},
            "members": [[0, 1], [3], [2]],
            "families": [[0, 1], [2]],
            "r": 1,
        }
        cover = cover_from_dict(data)
        assert isinstance(cover, ColoredCover)
        assert cover.r == 1.0
        assert cover.families[0] == (frozenset({0, 1}), frozenset({3}))

    def test_missing_space(self):
        """A cover without any space is refused."""
        with pytest.raises(InputFormatError, match="No space given"):
            cover_from_dict({"members": [[0]]})

    def test_bad_family_index(self):
        """Families must refer to existing members."""
        data = {"space": {"metric": {"interval": [0, 1]}}, "members": [[0, 1]], "families": [[3]]}
        with pytest.raises(InputFormatError, match="missing member"):
            cover_from_dict(data)

    def test_colored_cover_to_dict(self):
        """Brick covers serialize members, families, r and optionally the space."""
        data = cover_to_dict(brick_cover_Z((0, 100), 10), include_space=True)
        assert data["r"] == 10.0
        assert len(data["families"]) == 2
        assert data["space"]["metric"]["coordinates"][0] == [0.0]
        rebuilt = cover_from_dict(data)
        assert rebuilt.flattened.members == brick_cover_Z((0, 100), 10).flattened.members


class TestFunctions:
    """Test cases for the function format."""

    def test_partial_function(self):
        """Values on part of the space give a function on that subspace."""
        space = interval_space(0, 9)
        f = function_from_dict({"values": {"0": 0.0, "9": 1.0}}, space)
        assert f.space.points == (0, 9)
        assert f.scalar(9) == 1.0

    def test_simplex_values_with_tuple_ids(self):
        """Tuple point ids are keyed by their JSON text."""
        with tempfile.TemporaryDirectory() as temp_dir:
            _write(temp_dir, "grid.json", {"metric": {"grid": {"x": [0, 1]}}})
            path = _write(
                temp_dir,
                "f.json",
                {
                    "space": "grid.json",
                    "values": {"[0,0]": [1, 0], "[1,1]": [0.5, 0.5]},
                    "simplex": True,
                },
            )
            f = load_function(path)
        assert f.simplex_valued
        assert f.simplex_point((1, 1)) == SimplexPoint((0.5, 0.5))

    def test_unknown_point(self):
        """Values for points outside the space are refused."""
        with pytest.raises(InputFormatError, match="unknown point"):
            function_from_dict({"values": {"42": 1.0}}, interval_space(0, 9))

    def test_no_values(self):
        """An empty value table is refused."""
        with pytest.raises(InputFormatError, match="no values"):
            function_from_dict({"values": {}}, interval_space(0, 9))

    def test_to_dict(self):
        """Scalar values are written as numbers, vectors as lists."""
        space = interval_space(0, 1)
        assert function_to_dict(PointFunction.from_callable(space, float)) == {
            "values": {"0": 0.0, "1": 1.0},
            "simplex": False,
        }
        vector = PointFunction.from_callable(space, lambda x: (x, 1 - x))
        assert function_to_dict(vector)["values"]["1"] == [1.0, 0.0]


class TestReports:
    """Test cases for report serialization."""

    def test_numbers(self):
        """Integral values print as integers, infinity as "inf"."""
        assert format_number(2.0) == 2
        assert format_number(1 / 3) == pytest.approx(0.333333333333)
        assert format_number(math.inf) == "inf"
        assert decode_number("inf") == math.inf
        assert decode_number("2.5") == 2.5
        with pytest.raises(InputFormatError):
            decode_number("lots")
        with pytest.raises(ValueError, match="NaN"):
            format_number(float("nan"))

    def test_dumps_report(self):
        """Reports are sorted, indented JSON with numpy values converted."""
        text = dumps_report(
            {"value": np.float64(2.0), "witness": (1, 2), "flag": np.bool_(True), "leb": math.inf}
        )
        assert json.loads(text) == {"flag": True, "leb": "inf", "value": 2, "witness": [1, 2]}
        assert text.index('"flag"') < text.index('"witness"')

    def test_point_keys_in_reports(self):
        """Dicts keyed by point ids use point keys."""
        assert json.loads(dumps_report({(0, 1): 1.5})) == {"[0,1]": 1.5}

    def test_load_space(self):
        """Space files load directly."""
        with tempfile.TemporaryDirectory() as temp_dir:
            path = _write(temp_dir, "space.json", {"metric": {"interval": [0, 4]}})
            assert len(load_space(path)) == 5


if __name__ == "__main__":
    pytest.main([__file__])
