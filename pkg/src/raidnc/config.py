"""Flat ``key = value`` configuration files.

Keys are the field names of :class:`EpisodeConfig` and :class:`ChannelParams`
plus ``erasure_kind`` and ``eps0``. Values may carry the unit they are
written with in a parameter table (``-42.60 dBm/Hz``, ``0 dB``, ``10 MHz``,
``500 meters``); the unit must agree with the key.

    # Table-style channel
    tx_power_dbm_per_hz = -42.60 dBm/Hz
    bandwidth_hz = 10 MHz
    cell_diameter_m = 500 meters
    scheduler = ra_idnc
"""

from __future__ import annotations

import configparser
import dataclasses
from pathlib import Path

from raidnc.channel import ChannelParams, ErasureModel
from raidnc.sim import EpisodeConfig


class ConfigError(ValueError):
    pass


_SCALE = {
    "hz": 1.0,
    "khz": 1e3,
    "mhz": 1e6,
    "ghz": 1e9,
    "m": 1.0,
    "meter": 1.0,
    "meters": 1.0,
    "km": 1e3,
    "bit": 1.0,
    "bits": 1.0,
    "kbit": 1e3,
    "mbit": 1e6,
    "db": 1.0,
    "dbm/hz": 1.0,
}

# which units each kind of field accepts
_UNITS_BY_SUFFIX = {
    "_dbm_per_hz": {"dbm/hz"},
    "_db": {"db"},
    "_hz": {"hz", "khz", "mhz", "ghz"},
    "_m": {"m", "meter", "meters", "km"},
    "_bits": {"bit", "bits", "kbit", "mbit"},
}

_CHANNEL_FIELDS = {f.name: f for f in dataclasses.fields(ChannelParams)}
_EPISODE_FIELDS = {f.name: f for f in dataclasses.fields(EpisodeConfig) if f.name not in ("channel", "erasure")}
_ERASURE_KEYS = {"erasure_kind": "kind", "eps0": "eps0"}


def _number(key: str, raw: str) -> float:
    parts = raw.split()
    if not parts or len(parts) > 2:
        raise ConfigError(f"{key}: cannot read {raw!r} as a number")
    try:
        value = float(parts[0])
    except ValueError:
        raise ConfigError(f"{key}: cannot read {raw!r} as a number") from None
    if len(parts) == 1:
        return value
    unit = parts[1].lower()
    allowed = next((u for suffix, u in _UNITS_BY_SUFFIX.items() if key.endswith(suffix)), set())
    if unit not in allowed:
        raise ConfigError(f"{key}: unit {parts[1]!r} not accepted here")
    return value * _SCALE[unit]


def _convert(key: str, raw: str, kind):
    if kind in (int, "int", "int | None"):
        v = _number(key, raw)
        if v != int(v):
            raise ConfigError(f"{key}: expected an integer, got {raw!r}")
        return int(v)
    if kind in (float, "float"):
        return _number(key, raw)
    return raw.strip()


def parse_config(text: str, base: EpisodeConfig | None = None) -> EpisodeConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string("[raidnc]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    base = base or EpisodeConfig()
    episode, channel, erasure = {}, {}, {}
    for key, raw in parser["raidnc"].items():
        if key in _CHANNEL_FIELDS:
            channel[key] = _convert(key, raw, _CHANNEL_FIELDS[key].type)
        elif key in _EPISODE_FIELDS:
            episode[key] = _convert(key, raw, _EPISODE_FIELDS[key].type)
        elif key in _ERASURE_KEYS:
            erasure[_ERASURE_KEYS[key]] = _number(key, raw) if key == "eps0" else raw.strip()
        else:
            raise ConfigError(f"unknown config key {key!r}")
    try:
        return dataclasses.replace(
            base,
            channel=dataclasses.replace(base.channel, **channel),
            erasure=dataclasses.replace(base.erasure, **erasure),
            **episode,
        )
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from None


def load_config(path, base: EpisodeConfig | None = None) -> EpisodeConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, base)
