"""Default rig configuration and JSON (de)serialization.

The shipped defaults describe the bench setup: four solenoids around a petri
dish, a 19 mm nitinol-tube needle with a 12.7 mm sliding NdFeB piston, and
the two tissue samples used in the experiments.  `data/default.json` holds
the calibrated numbers; `build_default()` falls back to the same values when
the file is absent.
"""

from __future__ import annotations

import importlib.resources
import json
import math
from dataclasses import dataclass

from .design import NeedleDesign
from .dynamics import ActuationSchedule, DynamicsParams
from .magnetics import Coil, CoilArray, MagnetBody
from .tissue import TissueModel

# Calibrated on the bench model: chosen so the maximum aligned pull at the
# dish center is 18 mN with the stock amplifier limits (see calibrate()).
DEFAULT_CORE_GAIN = 1.6078519849109592


@dataclass(frozen=True)
class RigConfig:
    array: CoilArray
    design: NeedleDesign
    params: DynamicsParams
    schedule: ActuationSchedule
    tissues: dict[str, TissueModel]
    far_end: tuple[float, float]   # probe pose for the edge-of-dish tests


def build_coil_array(core_gain: float = DEFAULT_CORE_GAIN,
                     max_current: float = 2.0,
                     workspace_radius: float = 0.0425) -> CoilArray:
    """Four identical coils on the +-x/+-y axes, aimed at the dish center."""
    mean_radius = 0.04575
    length = 0.060
    gap = 0.002
    dist = workspace_radius + gap + length / 2.0
    coils = []
    for ax, ay in ((1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)):
        coils.append(Coil(
            position=(dist * ax, dist * ay),
            axis=(-ax, -ay),          # moment toward the center for i > 0
            turns=648, mean_radius=mean_radius, length=length,
            core_gain=core_gain, max_current=max_current))
    return CoilArray(coils=tuple(coils), workspace_radius=workspace_radius)


def build_needle_design() -> NeedleDesign:
    magnet = MagnetBody(radius=0.795e-3, length=12.7e-3,
                        magnetization=1.05e6, density=7500.0)
    return NeedleDesign(tube_length=19.05e-3, tube_mass=0.35e-3,
                        tip_length=3.0e-3, plate_allowance=1.0e-3,
                        magnet=magnet)


def build_tissues() -> dict[str, TissueModel]:
    return {
        "agar_gauze": TissueModel(name="agar_gauze", strength_mean=0.248,
                                  strength_std=0.098, thickness=3.0e-3,
                                  resistance_per_depth=1.0),
        "bacon": TissueModel(name="bacon", strength_mean=0.4562,
                             strength_std=0.1147, thickness=20.0e-3,
                             resistance_per_depth=1.5),
    }


def build_default(overrides: dict | None = None) -> RigConfig:
    cfg = _default_dict()
    if overrides:
        cfg = _merge(cfg, overrides)
    return from_dict(cfg)


# ---------------------------------------------------------------------------
# dict round-trip


def to_dict(cfg: RigConfig) -> dict:
    return {
        "array": {
            "workspace_radius": cfg.array.workspace_radius,
            "coils": [
                {"position": list(c.position), "axis": list(c.axis),
                 "turns": c.turns, "mean_radius": c.mean_radius,
                 "length": c.length, "core_gain": c.core_gain,
                 "max_current": c.max_current}
                for c in cfg.array.coils
            ],
        },
        "design": {
            "tube_length": cfg.design.tube_length,
            "tube_mass": cfg.design.tube_mass,
            "tip_length": cfg.design.tip_length,
            "plate_allowance": cfg.design.plate_allowance,
            "magnet": {
                "radius": cfg.design.magnet.radius,
                "length": cfg.design.magnet.length,
                "magnetization": cfg.design.magnet.magnetization,
                "density": cfg.design.magnet.density,
            },
        },
        "params": {k: getattr(cfg.params, k) for k in (
            "dt", "dt_impact", "mu_load", "piston_viscous", "v_eps",
            "needle_drag", "needle_rot_drag", "b_nom", "field_refresh",
            "impact_substeps")},
        "schedule": {k: getattr(cfg.schedule, k) for k in (
            "duty", "period", "k_forward", "k_backward")},
        "tissues": {name: {
            "strength_mean": t.strength_mean, "strength_std": t.strength_std,
            "thickness": t.thickness,
            "resistance_per_depth": t.resistance_per_depth}
            for name, t in cfg.tissues.items()},
        "far_end": list(cfg.far_end),
    }


def from_dict(d: dict) -> RigConfig:
    coils = tuple(Coil(position=tuple(c["position"]), axis=tuple(c["axis"]),
                       turns=c["turns"], mean_radius=c["mean_radius"],
                       length=c["length"], core_gain=c["core_gain"],
                       max_current=c["max_current"])
                  for c in d["array"]["coils"])
    array = CoilArray(coils=coils,
                      workspace_radius=d["array"]["workspace_radius"])
    m = d["design"]["magnet"]
    design = NeedleDesign(
        tube_length=d["design"]["tube_length"],
        tube_mass=d["design"]["tube_mass"],
        tip_length=d["design"]["tip_length"],
        plate_allowance=d["design"]["plate_allowance"],
        magnet=MagnetBody(radius=m["radius"], length=m["length"],
                          magnetization=m["magnetization"],
                          density=m["density"]))
    params = DynamicsParams(**d["params"])
    schedule = ActuationSchedule(**d["schedule"])
    tissues = {name: TissueModel(name=name, **t)
               for name, t in d["tissues"].items()}
    return RigConfig(array=array, design=design, params=params,
                     schedule=schedule, tissues=tissues,
                     far_end=tuple(d["far_end"]))


def _default_dict() -> dict:
    try:
        text = (importlib.resources.files("impactneedle") / "data" /
                "default.json").read_text()
        return json.loads(text)
    except (FileNotFoundError, ModuleNotFoundError):
        cfg = RigConfig(array=build_coil_array(), design=build_needle_design(),
                        params=DynamicsParams(), schedule=ActuationSchedule(
                            duty=0.5, period=0.15),
                        tissues=build_tissues(), far_end=(-0.0405, 0.0))
        return to_dict(cfg)


def _merge(base: dict, extra: dict) -> dict:
    out = dict(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def load_config(path=None, overrides: dict | None = None) -> RigConfig:
    """Load a rig config from a JSON file, or the shipped default."""
    if path is None:
        return build_default(overrides)
    with open(path) as f:
        d = json.load(f)
    d = _merge(_default_dict(), d)
    if overrides:
        d = _merge(d, overrides)
    return from_dict(d)


def save_config(cfg: RigConfig, path) -> None:
    with open(path, "w") as f:
        json.dump(to_dict(cfg), f, indent=2)
        f.write("\n")
