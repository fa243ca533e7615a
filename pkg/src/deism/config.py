"""Simulation configuration: strict JSON parsing, presets, fingerprinting.

Parsing is total: any byte stream either yields a valid configuration or a
ConfigError naming the offending key path. Unknown keys are rejected at every
level. Named presets fill the room block and the two poses with the reference
scenarios used by the comparison studies.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .baselines import FsrrConfig, METHOD_TAGS
from .directivity import (
    Directivity,
    Medium,
    monopole_coefficients,
    point_receiver_coefficients,
    synthetic_directivity,
)
from .errors import ConfigError, FormatError
from .parallel import DEFAULT_CHUNK_SIZE
from .room import RoomSpec, TransducerPose

ARTIFACT_VERSION = "0.1.0"

_PRESET_ROOM = {
    "dimensions_m": [4.0, 3.0, 2.5],
    "impedance": 18.0,
    "medium": {"speed_of_sound_mps": 343.0, "density_kgpm3": 1.2},
}

# positions and facings of the five reference scenarios; yaw measured from +x
_PRESETS = {
    "paper-config-1": {
        "source": {"position_m": [1.1, 1.1, 1.3], "yaw_rad": 0.0},
        "receiver": {"position_m": [2.9, 1.9, 1.3], "yaw_rad": math.pi},
    },
    "paper-config-2": {
        "source": {"position_m": [1.1, 1.1, 1.3], "yaw_rad": 0.0},
        "receiver": {"position_m": [1.9, 1.6, 1.4], "yaw_rad": math.pi},
    },
    "paper-config-3": {
        "source": {"position_m": [1.1, 1.1, 1.3], "yaw_rad": 0.0},
        "receiver": {"position_m": [1.075, 1.1, 1.387], "yaw_rad": 0.0},
    },
    "paper-config-4": {
        "source": {"position_m": [0.4, 1.1, 1.3], "yaw_rad": 0.0},
        "receiver": {"position_m": [2.1, 1.6, 1.3], "yaw_rad": math.pi},
    },
    "paper-config-5": {
        "source": {"position_m": [0.4, 1.1, 1.3], "yaw_rad": 0.0},
        "receiver": {"position_m": [2.5, 2.6, 1.3], "yaw_rad": -math.pi / 2},
    },
}

DEFAULT_REFLECTION_ORDER = 25
DEFAULT_FREQUENCIES = {"start_hz": 20.0, "stop_hz": 1000.0, "step_hz": 2.0}


def _expect_dict(obj, path, allowed):
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: expected an object")
    unknown = set(obj) - set(allowed)
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    return obj


def _get_number(obj, key, path, default=None, minimum=None, strict_min=False):
    if key not in obj:
        if default is None:
            raise ConfigError(f"{path}.{key}: required")
        return float(default)
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{path}.{key}: expected a number")
    val = float(val)
    if minimum is not None:
        if strict_min and val <= minimum:
            raise ConfigError(f"{path}.{key}: must be > {minimum}")
        if not strict_min and val < minimum:
            raise ConfigError(f"{path}.{key}: must be >= {minimum}")
    return val


def _get_int(obj, key, path, default=None, minimum=None):
    if key not in obj:
        if default is None:
            raise ConfigError(f"{path}.{key}: required")
        return int(default)
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, int):
        raise ConfigError(f"{path}.{key}: expected an integer")
    if minimum is not None and val < minimum:
        raise ConfigError(f"{path}.{key}: must be >= {minimum}")
    return val


def _get_vec3(obj, key, path):
    val = obj.get(key)
    if (
        not isinstance(val, list)
        or len(val) != 3
        or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in val)
    ):
        raise ConfigError(f"{path}.{key}: expected a list of three numbers")
    return [float(x) for x in val]


@dataclass(frozen=True)
class DirectivitySelector:
    """How to obtain one coefficient set: analytic, from file, or synthetic."""

    mode: str  # monopole | file | synthetic | point
    file: str | None = None
    max_order: int = 0
    r0: float = 0.0
    seed: int = 0
    offset_m: float = 0.0
    theta_rad: float = 0.0
    phi_rad: float = 0.0

    def to_dict(self):
        if self.mode == "monopole":
            return "monopole"
        if self.mode == "file":
            return {"file": self.file}
        if self.mode == "synthetic":
            return {"synthetic": {"max_order": self.max_order, "r0_m": self.r0,
                                  "seed": self.seed}}
        return {"point": {"offset_m": self.offset_m, "theta_rad": self.theta_rad,
                          "phi_rad": self.phi_rad}}


def _parse_selector(obj, path, role):
    if obj == "monopole":
        return DirectivitySelector(mode="monopole")
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ConfigError(
            f"{path}: expected 'monopole' or an object with exactly one of "
            f"'file', 'synthetic', 'point'"
        )
    key = next(iter(obj))
    if key == "file":
        if not isinstance(obj["file"], str):
            raise ConfigError(f"{path}.file: expected a path string")
        return DirectivitySelector(mode="file", file=obj["file"])
    if key == "synthetic":
        sub = _expect_dict(obj["synthetic"], f"{path}.synthetic",
                           {"max_order", "r0_m", "seed"})
        return DirectivitySelector(
            mode="synthetic",
            max_order=_get_int(sub, "max_order", f"{path}.synthetic", minimum=0),
            r0=_get_number(sub, "r0_m", f"{path}.synthetic", minimum=0.0, strict_min=True),
            seed=_get_int(sub, "seed", f"{path}.synthetic", default=0),
        )
    if key == "point":
        if role != "receiver":
            raise ConfigError(f"{path}: 'point' applies to the receiver only")
        sub = _expect_dict(obj["point"], f"{path}.point",
                           {"offset_m", "theta_rad", "phi_rad"})
        return DirectivitySelector(
            mode="point",
            offset_m=_get_number(sub, "offset_m", f"{path}.point", minimum=0.0),
            theta_rad=_get_number(sub, "theta_rad", f"{path}.point", default=math.pi / 2),
            phi_rad=_get_number(sub, "phi_rad", f"{path}.point", default=0.0),
        )
    raise ConfigError(f"{path}: unknown directivity selector {key!r}")


@dataclass(frozen=True)
class SimulationConfig:
    """Validated simulation request, ready to materialize into engine calls."""

    room: RoomSpec
    src_pose: TransducerPose
    rcv_pose: TransducerPose
    source_directivity: DirectivitySelector
    receiver_directivity: DirectivitySelector
    methods: tuple[str, ...]
    reflection_order: int
    frequencies: np.ndarray
    rng_seed: int
    direct_path_override: str | None = None
    adaptive_truncation: bool = False
    fsrr: FsrrConfig = field(default_factory=FsrrConfig)
    chunk_size: int = DEFAULT_CHUNK_SIZE

    def to_canonical_dict(self) -> dict:
        return {
            "room": {
                "dimensions_m": list(self.room.dimensions),
                "impedance": self.room.zeta,
                "medium": {
                    "speed_of_sound_mps": self.room.medium.speed_of_sound,
                    "density_kgpm3": self.room.medium.density,
                },
            },
            "poses": {
                "source": {"position_m": list(self.src_pose.position),
                           "yaw_rad": self.src_pose.yaw},
                "receiver": {"position_m": list(self.rcv_pose.position),
                             "yaw_rad": self.rcv_pose.yaw},
            },
            "source_directivity": self.source_directivity.to_dict(),
            "receiver_directivity": self.receiver_directivity.to_dict(),
            "methods": list(self.methods),
            "reflection_order": self.reflection_order,
            "frequencies_hz": [float(f) for f in self.frequencies],
            "rng_seed": self.rng_seed,
            "direct_path_override": self.direct_path_override,
            "adaptive_truncation": self.adaptive_truncation,
            "fsrr": {
                "measurement_radius_m": self.fsrr.measurement_radius,
                "sign_mode": self.fsrr.sign_mode,
            },
            "chunk_size": self.chunk_size,
        }

    def fingerprint(self) -> str:
        doc = {"artifact_version": ARTIFACT_VERSION, "config": self.to_canonical_dict()}
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()


_TOP_KEYS = {
    "room", "poses", "source_directivity", "receiver_directivity", "methods",
    "reflection_order", "frequencies_hz", "rng_seed", "direct_path_override",
    "adaptive_truncation", "fsrr", "chunk_size",
}


def _parse_frequencies(obj, path) -> np.ndarray:
    if obj is None:
        obj = dict(DEFAULT_FREQUENCIES)
    if isinstance(obj, list):
        if not obj or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in obj):
            raise ConfigError(f"{path}: expected a non-empty list of numbers")
        freqs = np.asarray([float(x) for x in obj])
    else:
        sub = _expect_dict(obj, path, {"start_hz", "stop_hz", "step_hz"})
        start = _get_number(sub, "start_hz", path, minimum=0.0, strict_min=True)
        stop = _get_number(sub, "stop_hz", path, minimum=start)
        step = _get_number(sub, "step_hz", path, minimum=0.0, strict_min=True)
        n = int(math.floor((stop - start) / step + 0.5)) + 1
        freqs = start + step * np.arange(n)
        freqs = freqs[freqs <= stop + 1e-9]
    if np.any(freqs <= 0) or np.any(np.diff(freqs) <= 0):
        raise ConfigError(f"{path}: frequencies must be positive and strictly increasing")
    return freqs


def parse_config_dict(doc) -> SimulationConfig:
    _expect_dict(doc, "config", _TOP_KEYS)

    poses_obj = doc.get("poses")
    if poses_obj is None:
        raise ConfigError("config.poses: required")
    preset_room = None
    if isinstance(poses_obj, dict) and "preset" in poses_obj:
        _expect_dict(poses_obj, "config.poses", {"preset"})
        name = poses_obj["preset"]
        if name not in _PRESETS:
            raise ConfigError(
                f"config.poses.preset: unknown preset {name!r}; "
                f"choose from {sorted(_PRESETS)}"
            )
        poses_obj = _PRESETS[name]
        preset_room = _PRESET_ROOM

    room_obj = doc.get("room", preset_room)
    if room_obj is None:
        raise ConfigError("config.room: required unless a pose preset is used")
    room_obj = _expect_dict(room_obj, "config.room", {"dimensions_m", "impedance", "medium"})
    dims = _get_vec3(room_obj, "dimensions_m", "config.room")
    if any(x <= 0 for x in dims):
        raise ConfigError("config.room.dimensions_m: all entries must be positive")
    zeta = _get_number(room_obj, "impedance", "config.room", minimum=0.0, strict_min=True)
    medium_obj = _expect_dict(room_obj.get("medium", {}), "config.room.medium",
                              {"speed_of_sound_mps", "density_kgpm3"})
    medium = Medium(
        speed_of_sound=_get_number(medium_obj, "speed_of_sound_mps", "config.room.medium",
                                   default=343.0, minimum=0.0, strict_min=True),
        density=_get_number(medium_obj, "density_kgpm3", "config.room.medium",
                            default=1.2, minimum=0.0, strict_min=True),
    )
    room = RoomSpec(dimensions=tuple(dims), zeta=zeta, medium=medium)

    poses_obj = _expect_dict(poses_obj, "config.poses", {"source", "receiver"})
    poses = {}
    for role in ("source", "receiver"):
        sub = poses_obj.get(role)
        if sub is None:
            raise ConfigError(f"config.poses.{role}: required")
        sub = _expect_dict(sub, f"config.poses.{role}", {"position_m", "yaw_rad"})
        pose = TransducerPose(
            position=tuple(_get_vec3(sub, "position_m", f"config.poses.{role}")),
            yaw=_get_number(sub, "yaw_rad", f"config.poses.{role}", default=0.0),
        )
        try:
            pose.validate_inside(room)
        except ValueError as exc:
            raise ConfigError(f"config.poses.{role}: {exc}") from exc
        poses[role] = pose

    methods_obj = doc.get("methods", ["DEISM"])
    if not isinstance(methods_obj, list) or not methods_obj:
        raise ConfigError("config.methods: expected a non-empty list")
    methods = []
    for m in methods_obj:
        if m not in METHOD_TAGS:
            raise ConfigError(f"config.methods: unknown method {m!r}; "
                              f"choose from {list(METHOD_TAGS)}")
        if m not in methods:
            methods.append(m)

    src_sel = _parse_selector(doc.get("source_directivity", "monopole"),
                              "config.source_directivity", "source")
    rcv_sel = _parse_selector(doc.get("receiver_directivity", "monopole"),
                              "config.receiver_directivity", "receiver")
    if "GISM" in methods and rcv_sel.mode not in ("point", "monopole"):
        raise ConfigError(
            "config.methods: GISM needs a 'point' (or 'monopole') receiver selector "
            "to define the observation offset"
        )

    override = doc.get("direct_path_override")
    if override is not None and not isinstance(override, str):
        raise ConfigError("config.direct_path_override: expected a path string or null")

    adaptive = doc.get("adaptive_truncation", False)
    if not isinstance(adaptive, bool):
        raise ConfigError("config.adaptive_truncation: expected a boolean")

    fsrr_obj = _expect_dict(doc.get("fsrr", {}), "config.fsrr",
                            {"measurement_radius_m", "sign_mode"})
    sign_mode = fsrr_obj.get("sign_mode", "set")
    if sign_mode not in ("set", "interval", "all_plus"):
        raise ConfigError("config.fsrr.sign_mode: must be 'set', 'interval', or 'all_plus'")
    rng_seed = _get_int(doc, "rng_seed", "config", default=0)
    fsrr = FsrrConfig(
        rng_seed=rng_seed,
        measurement_radius=_get_number(fsrr_obj, "measurement_radius_m", "config.fsrr",
                                       default=1.0, minimum=0.0, strict_min=True),
        sign_mode=sign_mode,
    )

    return SimulationConfig(
        room=room,
        src_pose=poses["source"],
        rcv_pose=poses["receiver"],
        source_directivity=src_sel,
        receiver_directivity=rcv_sel,
        methods=tuple(methods),
        reflection_order=_get_int(doc, "reflection_order", "config",
                                  default=DEFAULT_REFLECTION_ORDER, minimum=0),
        frequencies=_parse_frequencies(doc.get("frequencies_hz"), "config.frequencies_hz"),
        rng_seed=rng_seed,
        direct_path_override=override,
        adaptive_truncation=adaptive,
        fsrr=fsrr,
        chunk_size=_get_int(doc, "chunk_size", "config", default=DEFAULT_CHUNK_SIZE,
                            minimum=1),
    )


def parse_config_bytes(data: bytes) -> SimulationConfig:
    """Total parser: any byte stream gives a config or a located ConfigError."""
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ConfigError(f"config is not valid UTF-8: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return parse_config_dict(doc)


def load_config(path) -> SimulationConfig:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_bytes(data)


def materialize_directivity(
    sel: DirectivitySelector, frequencies: np.ndarray, medium: Medium, role: str,
    base_dir: Path | None = None,
) -> Directivity:
    """Build the coefficient set a selector describes, on the request grid."""
    if sel.mode == "monopole":
        return monopole_coefficients(frequencies, medium, kind=role)
    if sel.mode == "synthetic":
        return synthetic_directivity(sel.max_order, frequencies, medium, sel.r0,
                                     kind=role, seed=sel.seed)
    if sel.mode == "point":
        return point_receiver_coefficients(frequencies, medium, sel.offset_m,
                                           sel.theta_rad, sel.phi_rad)
    from .formats import read_directivity

    path = Path(sel.file)
    if base_dir is not None and not path.is_absolute():
        path = base_dir / path
    try:
        d = read_directivity(path)
    except FormatError:
        raise
    if d.kind != role:
        raise ConfigError(f"directivity file {path} has kind {d.kind!r}, expected {role!r}")
    if not np.array_equal(d.frequencies, frequencies):
        raise ConfigError(
            f"directivity file {path} grid does not match the request grid; "
            "no interpolation is performed"
        )
    return d
