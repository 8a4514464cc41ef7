"""YAML configuration of the whole toolkit.

Keys carry their SI unit as a suffix.  Unknown sections or keys are errors, and
every value is re-validated by constructing the module-level types.

Example::

    bar_array:
      youngs_modulus_Pa: 1.3e+11
      gap_m: inf
    statics:
      com_lever_m: [0.02, 0.15]
    output_dir: out
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .biomech import HeadStatics
from .emg import PipelineConfig, SegmentationConfig
from .errors import ConfigurationError, NeckbraceError
from .mechanism import BarArraySpec

BAR_KEYS = {
    "bar_diameter_m": "bar_diameter",
    "free_length_m": "free_length",
    "youngs_modulus_Pa": "youngs_modulus",
    "bar_count": "bar_count",
    "coupled_count": "coupled_count",
    "triad_separation_m": "triad_separation",
    "gap_m": "gap",
}
STATICS_KEYS = {"head_weight_N": "head_weight", "com_lever_m": "com_lever", "base_lever_m": "base_lever"}
PIPELINE_KEYS = {
    "emg_rate_Hz", "kin_rate_Hz", "filter_order", "band_low_Hz", "band_high_Hz", "window_s",
    "hold_tolerance_deg", "min_hold_s", "neutral_band_deg", "settle_speed_deg_s", "smoothing_s",
    "max_unmatched_fraction",
}
BENCH_KEYS = {"load_height_m"}
SECTIONS = {"bar_array", "statics", "pipeline", "bench", "output_dir"}


@dataclass
class ToolkitConfig:
    bar_array: BarArraySpec = field(default_factory=BarArraySpec)
    statics: HeadStatics = field(default_factory=lambda: HeadStatics(0.0))
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    segmentation: SegmentationConfig = field(default_factory=SegmentationConfig)
    emg_rate: float = 2000.0
    kin_rate: float = 100.0
    load_height: float = 0.12
    output_dir: Path = Path("out")


def _number(section, key, value, integer=False):
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("inf", "+inf", "infinity", ".inf"):
            return math.inf
        try:
            value = float(text)
        except ValueError:
            raise ConfigurationError(f"{section}.{key}: {value!r} is not a number") from None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"{section}.{key}: expected a number, got {value!r}")
    if integer:
        if float(value) != int(value):
            raise ConfigurationError(f"{section}.{key}: expected an integer")
        return int(value)
    return float(value)


def _section(raw, name, allowed):
    body = raw.get(name) or {}
    if not isinstance(body, dict):
        raise ConfigurationError(f"section {name!r} must be a mapping")
    unknown = set(body) - set(allowed)
    if unknown:
        raise ConfigurationError(f"unknown keys in {name!r}: {sorted(unknown)}")
    return body


def from_mapping(raw):
    """Build a validated :class:`ToolkitConfig` from a parsed mapping."""
    raw = raw or {}
    if not isinstance(raw, dict):
        raise ConfigurationError("configuration root must be a mapping")
    unknown = set(raw) - SECTIONS
    if unknown:
        raise ConfigurationError(f"unknown configuration sections: {sorted(unknown)}")

    bar = _section(raw, "bar_array", BAR_KEYS)
    statics = _section(raw, "statics", STATICS_KEYS)
    pipe = _section(raw, "pipeline", PIPELINE_KEYS)
    bench = _section(raw, "bench", BENCH_KEYS)

    try:
        spec = BarArraySpec(**{
            BAR_KEYS[k]: _number("bar_array", k, v, integer=k.endswith("count")) for k, v in bar.items()
        })
        kwargs = {}
        for k, v in statics.items():
            if k == "head_weight_N":
                kwargs["head_weight"] = _number("statics", k, v)
            else:
                if not isinstance(v, (list, tuple)) or len(v) != 2:
                    raise ConfigurationError(f"statics.{k}: expected a two-element list")
                kwargs[STATICS_KEYS[k]] = tuple(_number("statics", k, x) for x in v)
        head = HeadStatics(0.0, **kwargs)

        p = {k: _number("pipeline", k, v, integer=(k == "filter_order")) for k, v in pipe.items()}
        defaults = PipelineConfig()
        pipeline = PipelineConfig(
            band=(p.get("band_low_Hz", defaults.band[0]), p.get("band_high_Hz", defaults.band[1])),
            filter_order=p.get("filter_order", defaults.filter_order),
            window=p.get("window_s", defaults.window),
        )
        if not 0 < pipeline.band[0] < pipeline.band[1]:
            raise ConfigurationError("pipeline band edges must satisfy 0 < low < high")
        if pipeline.filter_order < 1 or pipeline.window <= 0:
            raise ConfigurationError("filter_order and window_s must be positive")
        sd = SegmentationConfig()
        segmentation = SegmentationConfig(
            hold_tolerance=p.get("hold_tolerance_deg", sd.hold_tolerance),
            min_hold=p.get("min_hold_s", sd.min_hold),
            neutral_band=p.get("neutral_band_deg", sd.neutral_band),
            settle_speed=p.get("settle_speed_deg_s", sd.settle_speed),
            smoothing=p.get("smoothing_s", sd.smoothing),
            max_unmatched_fraction=p.get("max_unmatched_fraction", sd.max_unmatched_fraction),
        )
        emg_rate = p.get("emg_rate_Hz", 2000.0)
        kin_rate = p.get("kin_rate_Hz", 100.0)
        if emg_rate <= 2 * pipeline.band[1]:
            raise ConfigurationError("emg_rate_Hz must exceed twice the upper band edge")
        if kin_rate <= 0:
            raise ConfigurationError("kin_rate_Hz must be positive")
        load_height = _number("bench", "load_height_m", bench.get("load_height_m", 0.12))
        if load_height <= 0:
            raise ConfigurationError("bench.load_height_m must be positive")
    except ConfigurationError:
        raise
    except NeckbraceError as exc:
        raise ConfigurationError(str(exc)) from exc

    output_dir = raw.get("output_dir", "out")
    if not isinstance(output_dir, str):
        raise ConfigurationError("output_dir must be a string")
    return ToolkitConfig(spec, head, pipeline, segmentation, emg_rate, kin_rate, load_height, Path(output_dir))


def load_config(path=None):
    """Read a YAML configuration file; ``None`` gives the defaults."""
    if path is None:
        return ToolkitConfig()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"{path}: invalid YAML ({exc})") from exc
    return from_mapping(raw)
