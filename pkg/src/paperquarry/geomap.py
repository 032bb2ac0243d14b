"""Geo-referencing of map figures from labeled margin ticks.

The frame of a map figure carries coordinate labels just outside its
border.  Those labels, paired with their pixel positions, give one linear
calibration per axis (degrees = a * pixel + b, least squares).  A
calibrated map turns any pixel inside the frame into a longitude and
latitude pair.
"""

from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass, field

from .config import PipelineConfig
from .errors import (
    DegenerateTicks,
    InsufficientTicks,
    PixelOutsideRegion,
    UnparsableLabel,
)
from .model import PageContent, Region

__all__ = [
    "AXES", "AxisTick", "MapCalibration", "GeoPoint",
    "parse_coordinate_label", "detect_ticks", "calibrate", "calibrate_map",
    "locate_point", "export_points_csv",
]

AXES = ("longitude", "latitude")

_COORD_RE = re.compile(
    r"""^\s*
    (?P<sign>[+-])?\s*
    (?P<hemi1>[NSEW])?\s*
    (?P<deg>\d+(?:\.\d+)?)\s*
    [°º]?\s*
    (?:(?P<minutes>\d+(?:\.\d+)?)\s*[′'’]\s*)?
    (?:(?P<seconds>\d+(?:\.\d+)?)\s*[″"]\s*)?
    (?P<hemi2>[NSEW])?\s*$""",
    re.VERBOSE | re.IGNORECASE,
)


def parse_coordinate_label(text: str) -> tuple[str, float]:
    """Parses a tick label like ``42°30′N`` into ("latitude", 42.5).

    The hemisphere letter is required; it decides the axis (N/S latitude,
    E/W longitude) and contributes the sign (S and W negative).  An
    optional leading sign multiplies in on top.  Raises UnparsableLabel
    for anything else, including out-of-range values.
    """
    m = _COORD_RE.match(text or "")
    if not m:
        raise UnparsableLabel(f"not a coordinate label: {text!r}")
    hemis = [h for h in (m.group("hemi1"), m.group("hemi2")) if h]
    if len(hemis) != 1:
        raise UnparsableLabel(f"need exactly one hemisphere letter: {text!r}")
    hemi = hemis[0].upper()
    deg = float(m.group("deg"))
    minutes = float(m.group("minutes") or 0.0)
    seconds = float(m.group("seconds") or 0.0)
    if minutes >= 60.0 or seconds >= 60.0:
        raise UnparsableLabel(f"minutes/seconds out of range: {text!r}")
    value = deg + minutes / 60.0 + seconds / 3600.0
    axis = "latitude" if hemi in ("N", "S") else "longitude"
    limit = 90.0 if axis == "latitude" else 180.0
    if value > limit:
        raise UnparsableLabel(f"{value} exceeds {limit} degrees: {text!r}")
    if hemi in ("S", "W"):
        value = -value
    if m.group("sign") == "-":
        value = -value
    return axis, value


@dataclass(frozen=True)
class AxisTick:
    axis: str           # longitude | latitude
    pixel: float        # x for a longitude tick, y for a latitude tick
    degrees: float      # signed decimal degrees
    label_text: str = ""

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}, got {self.axis!r}")

    def to_json(self) -> dict:
        return {"axis": self.axis, "pixel": self.pixel,
                "degrees": self.degrees, "label_text": self.label_text}

    @classmethod
    def from_json(cls, data: dict) -> "AxisTick":
        return cls(str(data["axis"]), float(data["pixel"]),
                   float(data["degrees"]), str(data.get("label_text", "")))


def detect_ticks(page: PageContent, region: Region,
                 cfg: PipelineConfig | None = None) -> list[AxisTick]:
    """Finds labeled ticks in the margin bands hugging the region border.

    Each band is margin_band_frac of the perpendicular region extent,
    sitting just outside an edge.  A text box whose center lies in a band
    and whose text parses as a coordinate of the matching axis becomes a
    tick at the box center.  Longitude ticks come first, each axis sorted
    by pixel.
    """
    cfg = cfg or PipelineConfig()
    x0, y0, x1, y1 = region.bbox
    band_y = (y1 - y0) * cfg.margin_band_frac
    band_x = (x1 - x0) * cfg.margin_band_frac
    lon_ticks, lat_ticks = [], []
    for box in page.text_boxes:
        cx, cy = box.center
        in_x_band = (x0 <= cx <= x1
                     and (y0 - band_y <= cy <= y0 or y1 <= cy <= y1 + band_y))
        in_y_band = (y0 <= cy <= y1
                     and (x0 - band_x <= cx <= x0 or x1 <= cx <= x1 + band_x))
        if not in_x_band and not in_y_band:
            continue
        try:
            axis, degrees = parse_coordinate_label(box.text)
        except UnparsableLabel:
            continue
        if in_x_band and axis == "longitude":
            lon_ticks.append(AxisTick(axis, cx, degrees, box.text))
        elif in_y_band and axis == "latitude":
            lat_ticks.append(AxisTick(axis, cy, degrees, box.text))
    lon_ticks.sort(key=lambda t: t.pixel)
    lat_ticks.sort(key=lambda t: t.pixel)
    return lon_ticks + lat_ticks


def _fit_axis(axis: str, ticks: list[AxisTick]) -> tuple[tuple[float, float], float]:
    """Least-squares (slope, intercept) and rms residual for one axis."""
    if len(ticks) < 2:
        raise InsufficientTicks(
            f"{axis} axis needs at least 2 ticks, got {len(ticks)}")
    n = len(ticks)
    mean_p = sum(t.pixel for t in ticks) / n
    mean_v = sum(t.degrees for t in ticks) / n
    sxx = sum((t.pixel - mean_p) ** 2 for t in ticks)
    if sxx == 0.0:
        raise DegenerateTicks(f"{axis} ticks share one pixel position")
    sxy = sum((t.pixel - mean_p) * (t.degrees - mean_v) for t in ticks)
    slope = sxy / sxx
    if slope == 0.0:
        raise DegenerateTicks(f"{axis} ticks carry a constant coordinate")
    intercept = mean_v - slope * mean_p
    rms = math.sqrt(sum((slope * t.pixel + intercept - t.degrees) ** 2
                        for t in ticks) / n)
    return (slope, intercept), rms


@dataclass(frozen=True)
class MapCalibration:
    region: Region
    lon_map: tuple[float, float]      # degrees = a * pixel_x + b
    lat_map: tuple[float, float]      # degrees = c * pixel_y + d
    ticks: tuple[AxisTick, ...]
    rms_residual_deg: dict = field(default_factory=dict)   # axis -> rms

    def lon_at(self, px: float) -> float:
        a, b = self.lon_map
        return a * px + b

    def lat_at(self, py: float) -> float:
        c, d = self.lat_map
        return c * py + d

    def to_json(self) -> dict:
        return {
            "region": self.region.to_json(),
            "lon_map": list(self.lon_map),
            "lat_map": list(self.lat_map),
            "ticks": [t.to_json() for t in self.ticks],
            "rms_residual_deg": dict(self.rms_residual_deg),
        }

    @classmethod
    def from_json(cls, data: dict) -> "MapCalibration":
        return cls(
            region=Region.from_json(data["region"]),
            lon_map=tuple(float(v) for v in data["lon_map"]),
            lat_map=tuple(float(v) for v in data["lat_map"]),
            ticks=tuple(AxisTick.from_json(t) for t in data.get("ticks", [])),
            rms_residual_deg={k: float(v)
                              for k, v in data.get("rms_residual_deg", {}).items()},
        )


def calibrate(region: Region, ticks: list[AxisTick]) -> MapCalibration:
    """Fits both axis maps from a mixed tick list.

    Raises InsufficientTicks when either axis has fewer than two ticks
    and DegenerateTicks when an axis cannot determine a nonzero slope.
    """
    lon_ticks = [t for t in ticks if t.axis == "longitude"]
    lat_ticks = [t for t in ticks if t.axis == "latitude"]
    lon_map, lon_rms = _fit_axis("longitude", lon_ticks)
    lat_map, lat_rms = _fit_axis("latitude", lat_ticks)
    return MapCalibration(
        region=region,
        lon_map=lon_map,
        lat_map=lat_map,
        ticks=tuple(ticks),
        rms_residual_deg={"longitude": lon_rms, "latitude": lat_rms},
    )


def calibrate_map(page: PageContent, region: Region,
                  cfg: PipelineConfig | None = None) -> MapCalibration:
    """Detects ticks around the region and calibrates both axes."""
    return calibrate(region, detect_ticks(page, region, cfg))


@dataclass(frozen=True)
class GeoPoint:
    pixel: tuple[float, float]
    longitude: float
    latitude: float
    doc_id: str = ""
    table_row_hint: int | None = None
    created_by: str = ""
    created_at: str = ""
    out_of_range: bool = False

    def to_json(self) -> dict:
        return {
            "pixel": list(self.pixel),
            "longitude": self.longitude, "latitude": self.latitude,
            "doc_id": self.doc_id, "table_row_hint": self.table_row_hint,
            "created_by": self.created_by, "created_at": self.created_at,
            "out_of_range": self.out_of_range,
        }

    @classmethod
    def from_json(cls, data: dict) -> "GeoPoint":
        hint = data.get("table_row_hint")
        return cls(
            pixel=tuple(float(v) for v in data["pixel"]),
            longitude=float(data["longitude"]), latitude=float(data["latitude"]),
            doc_id=str(data.get("doc_id", "")),
            table_row_hint=int(hint) if hint is not None else None,
            created_by=str(data.get("created_by", "")),
            created_at=str(data.get("created_at", "")),
            out_of_range=bool(data.get("out_of_range", False)),
        )


def locate_point(calib: MapCalibration, pixel: tuple[float, float],
                 doc_id: str = "", table_row_hint: int | None = None,
                 created_by: str = "", created_at: str = "") -> GeoPoint:
    """Geographic coordinates of a pixel inside the calibrated region.

    Values beyond the valid degree ranges are clamped and flagged
    out_of_range.  Raises PixelOutsideRegion for pixels outside the
    frame.
    """
    px, py = pixel
    x0, y0, x1, y1 = calib.region.bbox
    if not (x0 <= px <= x1 and y0 <= py <= y1):
        raise PixelOutsideRegion(f"({px}, {py}) outside {calib.region.bbox}")
    lon = calib.lon_at(px)
    lat = calib.lat_at(py)
    out_of_range = False
    if lon < -180.0 or lon > 180.0:
        lon = max(-180.0, min(180.0, lon))
        out_of_range = True
    if lat < -90.0 or lat > 90.0:
        lat = max(-90.0, min(90.0, lat))
        out_of_range = True
    return GeoPoint((px, py), lon, lat, doc_id, table_row_hint,
                    created_by, created_at, out_of_range)


def export_points_csv(points: list[GeoPoint]) -> str:
    """Picked points as CSV with CRLF line endings."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(["longitude", "latitude", "pixel_x", "pixel_y",
                     "created_by", "created_at"])
    for p in points:
        writer.writerow([_fmt(p.longitude), _fmt(p.latitude),
                         _fmt(p.pixel[0]), _fmt(p.pixel[1]),
                         p.created_by, p.created_at])
    return buf.getvalue()


def _fmt(v: float) -> str:
    s = f"{v:.6f}".rstrip("0").rstrip(".")
    return s if s not in ("", "-") else "0"
