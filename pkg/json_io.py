"""
JSON file formats for spaces, covers, functions and reports.

Point ids are integers, strings or lists (read back as tuples). Where a
point id has to be an object key, integers and strings use str(id) and
tuples use the JSON text of their list. Reports print real numbers with
config.SIGNIFICANT_DIGITS significant digits and infinity as
config.INFINITY_TOKEN.
"""

import json
import math
import os
from typing import Any, Dict, Hashable, Optional, Union

import numpy as np

import config
from covers import ColoredCover, Cover
from metric_core import (
    FiniteMetricSpace,
    PointFunction,
    from_coordinates,
    from_distance_matrix,
    from_graph,
    grid_space,
    interval_space,
)


class InputFormatError(ValueError):
    """Raised when an input file does not follow the expected JSON format."""

    pass


_MISSING = object()


def read_json(path: str) -> Any:
    try:
        with open(path, "r") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise InputFormatError(f"{path}: invalid JSON: {e}")
    except OSError as e:
        raise InputFormatError(f"Cannot read {path}: {e}")


def extract_param(data: Union[str, dict], path: str, default: Any = _MISSING) -> Any:
    """
    Extract a value from JSON data using dot notation.

    Args:
        data: JSON data as string or dictionary
        path: Dot-separated path (e.g., "search.budget"); empty returns everything
        default: Returned when the path is missing; without it a missing path raises

    Raises:
        InputFormatError: If parsing fails or the path doesn't exist

    Examples:
        >>> extract_param('{"search": {"budget": 50}}', "search.budget")
        50
        >>> extract_param({}, "epsilon", 1.0)
        1.0
    """
    if isinstance(data, str):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as e:
            raise InputFormatError(f"Failed to parse JSON string: {e}")
    if not path:
        return data

    current = data
    for part in path.split("."):
        if not isinstance(current, dict):
            if default is not _MISSING:
                return default
            raise InputFormatError(
                f"Cannot access key '{part}' on non-dict value: {type(current)}"
            )
        if part not in current:
            if default is not _MISSING:
                return default
            raise InputFormatError(f"Parameter path '{path}' not found: missing key '{part}'")
        current = current[part]
    return current


# -- points -------------------------------------------------------------------


def decode_point(value: Any) -> Hashable:
    if isinstance(value, list):
        return tuple(decode_point(v) for v in value)
    if isinstance(value, (int, str)) and not isinstance(value, bool):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    raise InputFormatError(f"Unsupported point id: {value!r}")


def encode_point(point: Hashable) -> Any:
    if isinstance(point, tuple):
        return [encode_point(p) for p in point]
    if isinstance(point, (np.integer,)):
        return int(point)
    return point


def point_key(point: Hashable) -> str:
    """Object key of a point id."""
    if isinstance(point, tuple):
        return json.dumps(encode_point(point), separators=(",", ":"))
    return str(point)


def _key_lookup(space: FiniteMetricSpace) -> Dict[str, Hashable]:
    return {point_key(p): p for p in space.points}


# -- spaces -------------------------------------------------------------------


def space_from_dict(data: dict) -> FiniteMetricSpace:
    """
    Build a space from {"points": [...], "metric": {...}, "basepoint": id}.

    The metric is one of {"matrix": [[...]]}, {"graph": {"edges": [[u, v, w]]}},
    {"coordinates": [[...]], "norm": ...}, {"interval": [lo, hi]} or
    {"grid": {"x": [lo, hi], "y": [lo, hi], "norm": ...}}.
    """
    if not isinstance(data, dict) or "metric" not in data:
        raise InputFormatError("Space JSON needs a 'metric' object")
    metric = data["metric"]
    points = data.get("points")
    points = [decode_point(p) for p in points] if points is not None else None
    basepoint = decode_point(data["basepoint"]) if data.get("basepoint") is not None else None

    if "matrix" in metric:
        return from_distance_matrix(
            np.array(metric["matrix"], dtype=float), points=points, basepoint=basepoint
        )
    if "graph" in metric:
        edges = [
            (decode_point(u), decode_point(v), float(w)) for u, v, w in metric["graph"]["edges"]
        ]
        if points is None:
            points = list(dict.fromkeys(p for u, v, _ in edges for p in (u, v)))
        return from_graph(points, edges, basepoint=basepoint)
    if "coordinates" in metric:
        return from_coordinates(
            np.array(metric["coordinates"], dtype=float),
            points=points,
            norm=metric.get("norm", "sup"),
            basepoint=basepoint,
        )
    if "interval" in metric:
        lo, hi = metric["interval"]
        return interval_space(int(lo), int(hi), basepoint=basepoint)
    if "grid" in metric:
        grid = metric["grid"]
        return grid_space(
            tuple(grid["x"]),
            tuple(grid["y"]) if "y" in grid else None,
            norm=grid.get("norm", "sup"),
            basepoint=basepoint,
        )
    raise InputFormatError(f"Unknown metric kind: {sorted(metric)}")


def space_to_dict(space: FiniteMetricSpace) -> dict:
    out: Dict[str, Any] = {"points": [encode_point(p) for p in space.points]}
    if space.matrix is not None:
        out["metric"] = {"matrix": space.matrix.tolist()}
    else:
        out["metric"] = {"coordinates": space.coordinates.tolist(), "norm": space.norm}
    if space.basepoint is not None:
        out["basepoint"] = encode_point(space.basepoint)
    return out


def _resolve_space(
    data: dict, space: Optional[FiniteMetricSpace], base_dir: str
) -> FiniteMetricSpace:
    if space is not None:
        return space
    ref = data.get("space")
    if ref is None:
        raise InputFormatError("No space given: pass --space or embed 'space'")
    if isinstance(ref, str):
        return space_from_dict(read_json(os.path.join(base_dir, ref)))
    return space_from_dict(ref)


def load_space(path: str) -> FiniteMetricSpace:
    return space_from_dict(read_json(path))


# -- covers -------------------------------------------------------------------


def cover_from_dict(
    data: dict, space: Optional[FiniteMetricSpace] = None, base_dir: str = "."
) -> Union[Cover, ColoredCover]:
    """Read {"members": [[ids]], "families": [[member indices]]?, "r": number?}."""
    if not isinstance(data, dict) or "members" not in data:
        raise InputFormatError("Cover JSON needs a 'members' list")
    space = _resolve_space(data, space, base_dir)
    members = [[decode_point(p) for p in member] for member in data["members"]]
    if "families" not in data:
        return Cover(space, members)
    families = []
    for family in data["families"]:
        try:
            families.append(tuple(members[int(i)] for i in family))
        except IndexError:
            raise InputFormatError(f"Family {family} refers to a missing member")
    r = data.get("r", 0.0)
    return ColoredCover(space, tuple(families), decode_number(r))


def cover_to_dict(cover: Union[Cover, ColoredCover], include_space: bool = False) -> dict:
    flat = cover.flattened if isinstance(cover, ColoredCover) else cover
    space = flat.space
    out: Dict[str, Any] = {
        "members": [
            [encode_point(space.points[i]) for i in flat.member_indices(k)]
            for k in range(len(flat))
        ]
    }
    if isinstance(cover, ColoredCover):
        out["families"] = cover.family_indices()
        out["r"] = cover.r
    if include_space:
        out["space"] = space_to_dict(space)
    return out


def load_cover(
    path: str, space: Optional[FiniteMetricSpace] = None
) -> Union[Cover, ColoredCover]:
    return cover_from_dict(read_json(path), space, os.path.dirname(path) or ".")


# -- functions ----------------------------------------------------------------


def function_from_dict(
    data: dict, space: Optional[FiniteMetricSpace] = None, base_dir: str = "."
) -> PointFunction:
    """
    Read {"values": {point key: number | [coords]}, "simplex": bool?}.

    Values on a subset of the space give a function on that subspace.
    """
    if not isinstance(data, dict) or not isinstance(data.get("values"), dict):
        raise InputFormatError("Function JSON needs a 'values' object")
    space = _resolve_space(data, space, base_dir)
    lookup = _key_lookup(space)
    mapping = {}
    for key, value in data["values"].items():
        if key not in lookup:
            raise InputFormatError(f"Function value for unknown point {key!r}")
        mapping[lookup[key]] = value
    if not mapping:
        raise InputFormatError("Function JSON has no values")
    domain = space if len(mapping) == len(space) else space.subspace(mapping)
    return PointFunction.from_mapping(domain, mapping, bool(data.get("simplex", False)))


def function_to_dict(f: PointFunction) -> dict:
    values = {}
    for point, row in zip(f.space.points, f.values):
        if f.width == 1 and not f.simplex_valued:
            values[point_key(point)] = float(row[0])
        else:
            values[point_key(point)] = [float(v) for v in row]
    return {"values": values, "simplex": f.simplex_valued}


def load_function(path: str, space: Optional[FiniteMetricSpace] = None) -> PointFunction:
    return function_from_dict(read_json(path), space, os.path.dirname(path) or ".")


# -- reports ------------------------------------------------------------------


def decode_number(value: Any) -> float:
    if value == config.INFINITY_TOKEN:
        return math.inf
    try:
        return float(value)
    except (TypeError, ValueError):
        raise InputFormatError(f"Expected a number, got {value!r}")


def format_number(value: float) -> Union[int, float, str]:
    """
    Round to config.SIGNIFICANT_DIGITS significant digits.

    Examples:
        >>> format_number(2.0)
        2
        >>> format_number(float("inf"))
        'inf'
    """
    value = float(value)
    if math.isinf(value):
        return config.INFINITY_TOKEN if value > 0 else "-" + config.INFINITY_TOKEN
    if math.isnan(value):
        raise ValueError("Cannot serialize NaN")
    rounded = float(f"{value:.{config.SIGNIFICANT_DIGITS}g}")
    if rounded.is_integer() and abs(rounded) < 1e15:
        return int(rounded)
    return rounded


def to_jsonable(obj: Any) -> Any:
    """Convert report values (numpy scalars, tuples, sets, covers...) to JSON types."""
    if isinstance(obj, Cover) or isinstance(obj, ColoredCover):
        return cover_to_dict(obj)
    if isinstance(obj, PointFunction):
        return to_jsonable(function_to_dict(obj))
    if isinstance(obj, FiniteMetricSpace):
        return to_jsonable(space_to_dict(obj))
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return format_number(obj)
    if isinstance(obj, dict):
        return {k if isinstance(k, str) else point_key(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (set, frozenset)):
        return [to_jsonable(v) for v in sorted(obj, key=point_key)]
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [to_jsonable(v) for v in obj]
    return obj


def dumps_report(report: Any) -> str:
    return json.dumps(to_jsonable(report), indent=2, sort_keys=True)
