"""The nine canonical two-sibling models.

Figure ids follow the 3x3 layout: fig1a-fig1c leave the gain score unbiased
for the spillover effect, fig2a-fig2c shift it by the cross-exposure effect
on the other sibling's outcome, fig3a-fig3c break the cancellation entirely.

Every preset shares the base edges
    U -> T1 (chi), U -> T2 (gamma), U -> Y1 (psi), U -> Y2 (psi),
    T1 -> Y1 (delta), T2 -> Y2 (delta), T1 -> Y2 (theta)
plus the figure-specific extras listed in EXTRA_SLOTS, and the derived gain
score D = Y2 - Y1.
"""
from __future__ import annotations

from typing import Mapping

from .errors import DataError, UsageError
from .graph import PathModel, build_model, load_model_json

PRESETS = (
    "fig1a", "fig1b", "fig1c",
    "fig2a", "fig2b", "fig2c",
    "fig3a", "fig3b", "fig3c",
)
PRESET_INDEX = {mid: i for i, mid in enumerate(PRESETS)}

BASE_PARAMS = {"theta": 0.5, "delta": 1.0, "psi": 1.0, "chi": 2.0, "gamma": 3.0}

#: Figure-specific nonzero coefficient slots and their shared default value.
EXTRA_SLOTS = {
    "fig1a": (),
    "fig1b": ("tau",),
    "fig1c": ("phi",),
    "fig2a": ("kappa",),
    "fig2b": ("kappa", "tau"),
    "fig2c": ("kappa", "phi"),
    "fig3a": ("omega",),
    "fig3b": ("eta",),
    "fig3c": ("lambda",),
}
EXTRA_DEFAULT = 0.3

#: Directed edges each named coefficient drives (psi and delta each drive two).
PARAM_EDGES = {
    "chi": (("U", "T1"),),
    "gamma": (("U", "T2"),),
    "psi": (("U", "Y1"), ("U", "Y2")),
    "delta": (("T1", "Y1"), ("T2", "Y2")),
    "theta": (("T1", "Y2"),),
    "kappa": (("T2", "Y1"),),
    "tau": (("T2", "T1"),),
    "phi": (("T1", "T2"),),
    "omega": (("Y1", "T2"),),
    "eta": (("Y1", "Y2"),),
    "lambda": (("Y2", "Y1"),),
}

_PARAM_ORDER = ("chi", "gamma", "psi", "delta", "theta", "kappa", "tau", "phi", "omega", "eta", "lambda")

STRUCTURAL_NAMES = ("U", "T1", "T2", "Y1", "Y2")


def preset_parameters(model_id: str, overrides: Mapping[str, float] | None = None) -> dict[str, float]:
    """Full coefficient dictionary for a preset, extras defaulting to 0.3."""
    if model_id not in PRESETS:
        raise UsageError(f"unknown preset {model_id!r}; choose from {', '.join(PRESETS)}")
    params = dict(BASE_PARAMS)
    for slot in EXTRA_SLOTS[model_id]:
        params[slot] = EXTRA_DEFAULT
    if overrides:
        for key, value in overrides.items():
            if key not in params:
                raise DataError(f"coefficient {key!r} is not a slot of preset {model_id!r}")
            params[key] = float(value)
    return params


def preset_model(
    model_id: str,
    overrides: Mapping[str, float] | None = None,
    noise_variances: Mapping[str, float] | None = None,
) -> PathModel:
    """Build one of the nine canonical models, optionally re-parameterized."""
    params = preset_parameters(model_id, overrides)
    noises = {name: 1.0 for name in STRUCTURAL_NAMES}
    if noise_variances:
        for name, value in noise_variances.items():
            if name not in noises:
                raise DataError(f"unknown noise variance target {name!r}")
            noises[name] = float(value)

    kinds = {"U": "exogenous-latent", "T1": "exposure", "T2": "exposure",
             "Y1": "outcome", "Y2": "outcome"}
    spec = {
        "variables": [
            {"name": name, "kind": kinds[name], "noise_variance": noises[name]}
            for name in STRUCTURAL_NAMES
        ] + [{"name": "D", "kind": "derived", "noise_variance": 0.0}],
        "edges": [
            {"from": src, "to": dst, "coefficient": params[p], "label": p}
            for p in _PARAM_ORDER
            if p in params
            for src, dst in PARAM_EDGES[p]
        ],
        "derived": {"D": {"Y2": 1.0, "Y1": -1.0}},
    }
    return build_model(spec)


def resolve_model(name_or_path: str) -> PathModel:
    """Accept a preset id or a path to a model-spec JSON file."""
    if name_or_path in PRESETS:
        return preset_model(name_or_path)
    if name_or_path.endswith(".json"):
        return load_model_json(name_or_path)
    raise UsageError(
        f"unknown model {name_or_path!r}: expected one of {', '.join(PRESETS)} or a .json spec"
    )
