"""File formats and deterministic serialization.

Reruns with identical inputs must produce byte-identical outputs, so nothing
here depends on time, locale, environment, or dict iteration quirks:

* floats are always rendered with %.17g (round-trip exact for doubles);
* JSON is emitted by a small recursive writer so the float format is pinned
  (the stdlib encoder would use repr) - keys keep insertion order;
* point-cloud CSV has one `re,im` line per point and the single token `inf`
  for the point at infinity;
* writes go to a temp file in the target directory and are renamed into
  place, so readers never see partial files;
* run manifests hash the bytes of every produced file and carry no
  timestamps.

Complex numbers appear in JSON as two-element arrays [re, im].
"""

from __future__ import annotations

import hashlib
import os
import tempfile
from typing import Any

import numpy as np

from .algebra import INF, Mobius, Polynomial, RationalMap, is_inf
from .dynamics import IntervalCriterionReport, KoenigsChart
from .expsum import ExpSum, ZeroReport
from .growth import GrowthProfile
from .sphere import Circline, FitReport, PointCloud

__all__ = [
    "format_float",
    "json_dumps",
    "atomic_write_text",
    "atomic_write_bytes",
    "sha256_file",
    "complex_pair",
    "write_point_cloud_csv",
    "read_point_cloud_csv",
    "rational_map_to_dict",
    "rational_map_from_dict",
    "expsum_to_dict",
    "expsum_from_dict",
    "koenigs_chart_to_dict",
    "koenigs_chart_from_dict",
    "fit_report_to_dict",
    "zero_report_to_dict",
    "growth_profile_to_dict",
    "interval_report_to_dict",
    "write_pgm",
    "run_manifest",
]

SCHEMA = "v1"


def format_float(x: float) -> str:
    """%.17g, with inf/nan spelled as bare tokens."""
    x = float(x)
    if np.isnan(x):
        return "nan"
    if np.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.17g" % x


def _emit(obj: Any, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, str):
        escaped = (
            obj.replace("\\", "\\\\")
            .replace('"', '\\"')
            .replace("\n", "\\n")
            .replace("\t", "\\t")
            .replace("\r", "\\r")
        )
        out.append(f'"{escaped}"')
    elif isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        x = float(obj)
        if np.isnan(x):
            out.append("null")
        elif np.isinf(x):
            # 1e999 overflows back to inf on parse and keeps the JSON loadable
            out.append("1e999" if x > 0 else "-1e999")
        else:
            out.append(format_float(x))
    elif isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(", ")
            _emit(str(k), out)
            out.append(": ")
            _emit(v, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(", ")
            _emit(v, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def json_dumps(obj: Any) -> str:
    out: list[str] = []
    _emit(obj, out)
    return "".join(out)


def atomic_write_text(path: str, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def atomic_write_bytes(path: str, data: bytes) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def sha256_file(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def complex_pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


# --- point clouds -----------------------------------------------------------


def write_point_cloud_csv(path: str, cloud: PointCloud) -> None:
    """One `re,im` line per point; the point at infinity is the token `inf`."""
    lines = []
    for z in cloud.points:
        if is_inf(z):
            lines.append("inf")
        else:
            lines.append(f"{format_float(z.real)},{format_float(z.imag)}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_point_cloud_csv(path: str) -> PointCloud:
    points: list[complex] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line == "inf":
                points.append(INF)
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected `re,im` or `inf`")
            try:
                points.append(complex(float(parts[0]), float(parts[1])))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: bad number: {exc}") from exc
    if not points:
        raise ValueError(f"{path}: no points")
    return PointCloud(points)


# --- structured objects -----------------------------------------------------


def _poly_to_list(p: Polynomial) -> list[list[float]]:
    return [complex_pair(complex(c)) for c in p.coeffs]


def _poly_from_list(items) -> Polynomial:
    return Polynomial([complex(re, im) for re, im in items])


def rational_map_to_dict(f: RationalMap) -> dict:
    """Ascending [re, im] coefficient pairs for numerator and denominator."""
    return {"schema": SCHEMA, "num": _poly_to_list(f.num), "den": _poly_to_list(f.den)}


def rational_map_from_dict(d: dict) -> RationalMap:
    return RationalMap(_poly_from_list(d["num"]), _poly_from_list(d["den"]))


def expsum_to_dict(g: ExpSum) -> dict:
    return {
        "schema": SCHEMA,
        "terms": [
            {"coeff": complex_pair(c), "freq": float(f)} for c, f in g.terms
        ],
    }


def expsum_from_dict(d: dict) -> ExpSum:
    return ExpSum(
        [(complex(t["coeff"][0], t["coeff"][1]), float(t["freq"])) for t in d["terms"]]
    )


def koenigs_chart_to_dict(chart: KoenigsChart) -> dict:
    return {
        "schema": SCHEMA,
        "map": {
            "num": _poly_to_list(chart.map.num),
            "den": _poly_to_list(chart.map.den),
        },
        "p": complex_pair(chart.p),
        "multiplier": complex_pair(chart.multiplier),
        "validity_radius": float(chart.validity_radius),
        "max_depth": int(chart.max_depth),
    }


def koenigs_chart_from_dict(d: dict) -> KoenigsChart:
    return KoenigsChart(
        map=RationalMap(_poly_from_list(d["map"]["num"]), _poly_from_list(d["map"]["den"])),
        p=complex(d["p"][0], d["p"][1]),
        multiplier=complex(d["multiplier"][0], d["multiplier"][1]),
        validity_radius=float(d["validity_radius"]),
        max_depth=int(d["max_depth"]),
    )


def fit_report_to_dict(rep: FitReport) -> dict:
    return {
        "schema": SCHEMA,
        "circline": {
            "normal": [float(v) for v in rep.circline.normal],
            "offset": float(rep.circline.offset),
        },
        "rms_residual": float(rep.rms_residual),
        "max_residual": float(rep.max_residual),
        "eigengap": float(rep.eigengap),
        "offset_out_of_range": bool(rep.offset_out_of_range),
        "ill_conditioned": bool(rep.ill_conditioned),
    }


def zero_report_to_dict(rep: ZeroReport) -> dict:
    return {
        "schema": SCHEMA,
        "rectangle": [float(v) for v in rep.rectangle],
        "count": int(rep.count),
        "zeros": [complex_pair(z) for z in rep.zeros],
        "max_abs_im_of_real_candidates": (
            None
            if rep.max_abs_im_of_real_candidates is None
            else float(rep.max_abs_im_of_real_candidates)
        ),
        "max_residual": float(rep.max_residual),
    }


def growth_profile_to_dict(prof: GrowthProfile) -> dict:
    return {
        "schema": SCHEMA,
        "radii": [float(r) for r in prof.radii],
        "T_values": [float(t) for t in prof.T_values],
        "order_estimate": float(prof.order_estimate),
        "order_ci": [float(prof.order_ci[0]), float(prof.order_ci[1])],
        "order_defined": bool(prof.order_defined),
    }


def interval_report_to_dict(rep: IntervalCriterionReport) -> dict:
    return {
        "schema": SCHEMA,
        "a": float(rep.a),
        "b": float(rep.b),
        "is_real_map": bool(rep.is_real_map),
        "endpoints_invariant": bool(rep.endpoints_invariant),
        "critical_points_inside": bool(rep.critical_points_inside),
        "critical_values_outside": bool(rep.critical_values_outside),
        "verdict": bool(rep.verdict),
    }


def mobius_to_dict(m: Mobius) -> dict:
    return {
        "a": complex_pair(complex(m.a)),
        "b": complex_pair(complex(m.b)),
        "c": complex_pair(complex(m.c)),
        "d": complex_pair(complex(m.d)),
    }


def write_pgm(path: str, image: np.ndarray) -> None:
    """Binary 8-bit PGM (P5); image rows are written top to bottom."""
    if image.ndim != 2 or image.dtype != np.uint8:
        raise ValueError("image must be a 2-D uint8 array")
    h, w = image.shape
    header = f"P5\n{w} {h}\n255\n".encode("ascii")
    atomic_write_bytes(path, header + image.tobytes())


def run_manifest(
    command: str, parameters: dict, seed: int | None, outputs: list[str],
    tool_version: str,
) -> dict:
    """Manifest describing one CLI run; hashes pin the produced bytes."""
    return {
        "schema": SCHEMA,
        "command": command,
        "parameters": parameters,
        "seed": seed,
        "tool_version": tool_version,
        "outputs": [
            {"path": os.path.basename(p), "sha256": sha256_file(p)} for p in outputs
        ],
    }
