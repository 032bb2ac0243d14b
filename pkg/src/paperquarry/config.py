"""Runtime configuration: pipeline thresholds and service settings.

All geometric thresholds used by the rule-based extraction baselines live
here so they are adjustable without touching algorithm code.  Units are
PDF points unless a name says otherwise.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields

from .errors import BadConfig


@dataclass
class PipelineConfig:
    # pdf text-box grouping
    ruling_axis_tol_pt: float = 0.5      # max off-axis deviation for a ruling stroke
    box_baseline_tol_pt: float = 1.0     # glyph runs within this baseline delta share a line
    box_merge_gap_em: float = 0.75       # runs closer than this (in font-size units) merge into one box
    # table structure recognition
    ruling_merge_pt: float = 1.5         # rulings within this distance collapse to one boundary
    row_gap_factor: float = 1.5          # new row when baseline gap > factor * median line height
    col_gap_factor: float = 1.0          # column valley when gap > factor * median char width
    detect_cluster_pad_pt: float = 3.0   # segment proximity when clustering rulings into tables
    detect_min_extent_pt: float = 8.0    # discard detected regions smaller than this per side
    # map georeferencing
    margin_band_frac: float = 0.08       # tick search band, fraction of region extent


@dataclass
class ServiceConfig:
    listen: str = "127.0.0.1:8420"
    data_dir: str = "./data"
    lock_lease_secs: float = 300.0
    session_ttl_secs: float = 86400.0
    scrypt_cost: int = 2 ** 12           # scrypt N; low default keeps tests quick, raise in production
    recent_list_len: int = 20
    meta_adapters: list[str] = field(default_factory=lambda: ["first_page", "docinfo"])
    table_detectors: list[str] = field(default_factory=lambda: ["rulings"])
    ocr_adapters: list[str] = field(default_factory=lambda: ["embedded"])
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)

    def validate(self) -> None:
        pl = self.pipeline
        for f in fields(pl):
            if getattr(pl, f.name) <= 0:
                raise BadConfig(f"pipeline threshold {f.name} must be positive")
        if self.lock_lease_secs <= 0 or self.session_ttl_secs <= 0:
            raise BadConfig("lease and session ttl must be positive")

    def require_data_dir(self) -> str:
        path = self.data_dir
        if not os.path.isdir(path):
            raise BadConfig(f"data directory does not exist: {path}")
        if not os.access(path, os.W_OK):
            raise BadConfig(f"data directory not writable: {path}")
        return path


_LIST_KEYS = {"meta_adapters", "table_detectors", "ocr_adapters"}


def load_config(path: str | None = None, **overrides) -> ServiceConfig:
    """Build a ServiceConfig from an optional ``key = value`` file plus overrides.

    File format: one ``key = value`` per line, ``#`` comments, blank lines
    ignored.  Pipeline thresholds use their field names directly.  List
    values are comma-separated.
    """
    cfg = ServiceConfig()
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                lines = fh.readlines()
        except OSError as exc:
            raise BadConfig(f"cannot read config file: {exc}")
        for lineno, line in enumerate(lines, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise BadConfig(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            _apply(cfg, key.strip(), value.strip(), f"{path}:{lineno}")
    for key, value in overrides.items():
        if value is not None:
            _apply(cfg, key, value, "override")
    cfg.validate()
    return cfg


def _apply(cfg: ServiceConfig, key: str, value, where: str) -> None:
    pipeline_names = {f.name for f in fields(PipelineConfig)}
    service_names = {f.name for f in fields(ServiceConfig)}
    try:
        if key in pipeline_names:
            setattr(cfg.pipeline, key, float(value))
        elif key in _LIST_KEYS:
            items = value if isinstance(value, list) else [v.strip() for v in str(value).split(",") if v.strip()]
            setattr(cfg, key, items)
        elif key in service_names:
            current = getattr(cfg, key)
            if isinstance(current, float):
                setattr(cfg, key, float(value))
            elif isinstance(current, int):
                setattr(cfg, key, int(value))
            else:
                setattr(cfg, key, str(value))
        else:
            raise BadConfig(f"{where}: unknown config key {key!r}")
    except (TypeError, ValueError):
        raise BadConfig(f"{where}: bad value for {key!r}: {value!r}")
