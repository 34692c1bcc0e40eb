"""Config-file parsing and unit conversion.

Files are INI-style sections of key = value pairs; every key carries its
unit in the name and dB/dBm quantities are converted to linear exactly
once, here. Anything not set falls back to the documented defaults, so a
run is fully described by (file, overrides, seed).
"""

from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import replace

from .geometry import Room
from .linkbudget import LinkBudgetParams
from .simulation import ConfigError, SimConfig

TOOL_VERSION = "0.1.0"

DEFAULTS = {
    "radio": {
        "f_c_ghz": 570.0,
        "bandwidth_ghz": 10.0,
        "p_o_dbm": 0.0,
        "beamwidth_deg": 10.0,
        "nf_db_hz": -193.85,
        "humidity_pct": 60.0,
        "temperature_c": 25.0,
        "tau_override_per_m": None,
    },
    "room": {
        "room_l_m": 10.0,
        "room_w_m": 10.0,
        "room_h_m": 3.0,
    },
    "placement": {
        "placement_type": "B",
        "n_aps": 4,
        "t_align_ms": 5.0,
    },
    "users": {
        "n_users": 30,
        "velocity_mps_mean": 1.0,
        "velocity_mps_span": 0.5,
        "user_height_m": 1.5,
        "user_width_m": 0.2,
        "body_height_m": 1.8,
        "rate_min_gbps": 1.0,
        "rate_max_gbps": 10.0,
    },
    "simulation": {
        "duration_s": 60.0,
        "dt_ms": 10.0,
        "seed": 1,
        "blockage": "off",
        "h_override_m": None,
        "share_mode": "equal_share",
        "pause_s": 0.0,
    },
}

_KEY_SECTION = {
    key: section for section, keys in DEFAULTS.items() for key in keys
}


def dbm_to_watts(p_dbm: float) -> float:
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def _parse_value(key: str, raw: str):
    if key == "placement_type":
        return raw.strip().upper()
    if key == "share_mode":
        return raw.strip()
    if key == "blockage":
        token = raw.strip().lower()
        if token not in ("on", "off", "true", "false", "1", "0"):
            raise ConfigError(f"blockage: expected on|off, got {raw!r}")
        return "on" if token in ("on", "true", "1") else "off"
    if key in ("n_aps", "n_users", "seed"):
        try:
            return int(raw)
        except ValueError as exc:
            raise ConfigError(f"{key}: expected an integer, got {raw!r}") from exc
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from exc


def load_settings(path=None, overrides: dict | None = None) -> dict:
    """Flat key -> value mapping with defaults, file, then overrides."""
    settings = {k: v for sec in DEFAULTS.values() for k, v in sec.items()}
    if path is not None:
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"config: cannot read {path}: {exc}") from exc
        except configparser.Error as exc:
            raise ConfigError(f"config: parse error in {path}: {exc}") from exc
        for section in parser.sections():
            for key, raw in parser.items(section):
                if key not in _KEY_SECTION:
                    raise ConfigError(f"{key}: unknown configuration key")
                settings[key] = _parse_value(key, raw)
    for key, value in (overrides or {}).items():
        if key not in _KEY_SECTION:
            raise ConfigError(f"{key}: unknown configuration key")
        settings[key] = _parse_value(key, value) if isinstance(value, str) else value
    return settings


def build_sim_config(settings: dict) -> SimConfig:
    try:
        return _build_sim_config(settings)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _build_sim_config(settings: dict) -> SimConfig:
    room = Room(settings["room_l_m"], settings["room_w_m"], settings["room_h_m"])
    n_aps = 1 if settings["placement_type"] == "A" else settings["n_aps"]
    p_o_w = dbm_to_watts(settings["p_o_dbm"])
    link = LinkBudgetParams(
        f_c_hz=settings["f_c_ghz"] * 1e9,
        bandwidth_hz=settings["bandwidth_ghz"] * 1e9,
        p_t_w=p_o_w / n_aps,
        tx_beamwidth_deg=settings["beamwidth_deg"],
        rx_beamwidth_deg=settings["beamwidth_deg"],
        noise_psd_w_hz=db_to_linear(settings["nf_db_hz"]),
        humidity=settings["humidity_pct"] / 100.0,
        temperature_c=settings["temperature_c"],
        tau_override=settings["tau_override_per_m"],
    )
    cfg = SimConfig(
        room=room,
        placement_type=settings["placement_type"],
        n_aps=n_aps,
        p_o_w=p_o_w,
        link=link,
        n_users=settings["n_users"],
        seed=settings["seed"],
        v_mean_mps=settings["velocity_mps_mean"],
        v_span_mps=settings["velocity_mps_span"],
        user_height_m=settings["user_height_m"],
        user_width_m=settings["user_width_m"],
        body_height_m=settings["body_height_m"],
        rate_min_bps=settings["rate_min_gbps"] * 1e9,
        rate_max_bps=settings["rate_max_gbps"] * 1e9,
        duration_s=settings["duration_s"],
        dt_s=settings["dt_ms"] / 1e3,
        blockage_enabled=settings["blockage"] == "on",
        t_align_s=settings["t_align_ms"] / 1e3,
        h_override_m=settings["h_override_m"],
        share_mode=settings["share_mode"],
        pause_s=settings["pause_s"],
    )
    cfg.validate()
    return cfg


def load_config(path=None, overrides: dict | None = None) -> tuple[SimConfig, dict]:
    """Parse, validate, and return (config, resolved settings dict)."""
    settings = load_settings(path, overrides)
    cfg = build_sim_config(settings)
    return cfg, settings


def settings_hash(settings: dict) -> str:
    canonical = json.dumps(settings, sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()


def run_manifest(settings: dict) -> dict:
    """Everything needed to reproduce a run byte-for-byte."""
    return {
        "tool_version": TOOL_VERSION,
        "config_hash": settings_hash(settings),
        "seed": settings["seed"],
        "resolved_config": dict(sorted(settings.items())),
    }


def example_config_text() -> str:
    lines = []
    for section, keys in DEFAULTS.items():
        lines.append(f"[{section}]")
        for key, value in keys.items():
            if value is None:
                lines.append(f"# {key} =")
            else:
                lines.append(f"{key} = {value}")
        lines.append("")
    return "\n".join(lines)
