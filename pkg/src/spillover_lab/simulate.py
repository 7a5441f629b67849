"""Monte Carlo engine for the two-sibling family.

The data-generating process follows the canonical structural equations

    T1* = tau*T2 + chi*U            T2* = phi*T1 + omega*Y1 + gamma*U
    Y1  = delta*T1 + kappa*T2 + lambda*Y2 + psi*U + noise1
    Y2  = delta*T2 + theta*T1 + eta*Y1 + psi*U + noise2

with U and the outcome noises standard normal.  In binary-threshold mode the
exposures are indicators T1 = 1{T1* > 0.5}, T2 = 1{T2* > 0.2} with no noise
of their own; in linear-gaussian mode they stay continuous and each picks up
a unit-variance disturbance.  Evaluation order is a topological sort of the
nonzero dependencies with lexicographic tie-breaking.

Randomness comes from counter-based Philox streams keyed by
(master_seed, replicate_index, variable_tag), so replicate results never
depend on execution order or thread count.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import ConfigError, RankDeficiencyError, SimultaneityError
from .graph import PathModel
from .presets import PRESETS, STRUCTURAL_NAMES, preset_parameters
from .regression import PairDataset, spillover_estimate

THRESHOLD_T1 = 0.5
THRESHOLD_T2 = 0.2

BINARY_MODE = "binary-threshold"
LINEAR_MODE = "linear-gaussian"
EXPOSURE_MODES = (BINARY_MODE, LINEAR_MODE)

THREADS_ENV = "SPILLOVER_LAB_THREADS"

# Variable tags keying the per-replicate noise streams.
_TAG_U = 0
_TAG_NOISE_Y1 = 1
_TAG_NOISE_Y2 = 2
_TAG_NOISE_T1 = 3
_TAG_NOISE_T2 = 4

_COEFFICIENTS = ("theta", "delta", "psi", "chi", "gamma",
                 "kappa", "tau", "phi", "omega", "eta", "lambda_")

#: Reciprocal slots; a valid family uses at most one of each pair.
_RECIPROCAL = (("tau", "phi"), ("eta", "lambda_"), ("kappa", "omega"))


@dataclass(frozen=True)
class SimulationConfig:
    """Coefficients and run shape for one Monte Carlo study."""

    theta: float = 0.5
    delta: float = 1.0
    psi: float = 1.0
    chi: float = 2.0
    gamma: float = 3.0
    kappa: float = 0.0
    tau: float = 0.0
    phi: float = 0.0
    omega: float = 0.0
    eta: float = 0.0
    lambda_: float = 0.0
    n_obs: int = 5000
    n_reps: int = 1000
    master_seed: int = 20107
    exposure_mode: str = BINARY_MODE
    model_id: str = "custom"

    def __post_init__(self):
        for name in _COEFFICIENTS:
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise ConfigError(f"coefficient {name} must be finite")
            object.__setattr__(self, name, value)
        for a, b in _RECIPROCAL:
            if getattr(self, a) != 0.0 and getattr(self, b) != 0.0:
                raise SimultaneityError(
                    f"{a} and {b} cannot both be nonzero in one family"
                )
        for name in ("n_obs", "n_reps"):
            value = int(getattr(self, name))
            if value < 1:
                raise ConfigError(f"{name} must be at least 1")
            object.__setattr__(self, name, value)
        seed = int(self.master_seed)
        if not 0 <= seed < 2**64:
            raise ConfigError("master_seed must fit in an unsigned 64-bit integer")
        object.__setattr__(self, "master_seed", seed)
        if self.exposure_mode not in EXPOSURE_MODES:
            raise ConfigError(
                f"exposure_mode must be one of {EXPOSURE_MODES}, got {self.exposure_mode!r}"
            )

    def coefficients(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in _COEFFICIENTS}


def preset_config(
    model_id: str,
    n_obs: int = 5000,
    n_reps: int = 1000,
    master_seed: int = 20107,
    exposure_mode: str = BINARY_MODE,
    overrides: Mapping[str, float] | None = None,
) -> SimulationConfig:
    """Simulation configuration for one of the nine canonical models."""
    params = preset_parameters(model_id, overrides)
    kwargs = {("lambda_" if key == "lambda" else key): value for key, value in params.items()}
    return SimulationConfig(
        n_obs=n_obs, n_reps=n_reps, master_seed=master_seed,
        exposure_mode=exposure_mode, model_id=model_id, **kwargs,
    )


def config_from_model(
    model: PathModel,
    n_obs: int = 5000,
    n_reps: int = 1000,
    master_seed: int = 20107,
    exposure_mode: str = BINARY_MODE,
) -> SimulationConfig:
    """Map a canonical-shaped PathModel onto a SimulationConfig.

    The model must use the variable names U, T1, T2, Y1, Y2, carry unit
    noise variances, and only edges from the two-sibling family; the two
    psi edges and the two delta edges must agree.
    """
    from .presets import PARAM_EDGES

    names = set(model.names()) - model.derived_names()
    if names != set(STRUCTURAL_NAMES):
        raise ConfigError(
            f"simulation needs exactly the variables {STRUCTURAL_NAMES}, got {sorted(names)}"
        )
    for name in STRUCTURAL_NAMES:
        if model.variable(name).noise_variance != 1.0:
            raise ConfigError("simulation configs assume unit noise variances")
    for dname, weights in model.derived.items():
        if dict(weights) != {"Y2": 1.0, "Y1": -1.0}:
            raise ConfigError(f"derived {dname!r} must be the gain score Y2 - Y1")

    slot_by_pair = {}
    for slot, pairs in PARAM_EDGES.items():
        for pair in pairs:
            slot_by_pair[pair] = slot
    values: dict[str, dict[tuple, float]] = {}
    for e in model.edges:
        slot = slot_by_pair.get((e.source, e.target))
        if slot is None:
            raise ConfigError(f"edge {e.source} -> {e.target} has no role in the two-sibling family")
        values.setdefault(slot, {})[(e.source, e.target)] = e.coefficient

    kwargs = {}
    for slot, pairs in PARAM_EDGES.items():
        got = values.get(slot, {})
        per_edge = [got.get(pair, 0.0) for pair in pairs]
        if len(set(per_edge)) > 1:
            raise ConfigError(f"the {slot} edges must share one coefficient, got {per_edge}")
        kwargs["lambda_" if slot == "lambda" else slot] = per_edge[0]
    return SimulationConfig(
        n_obs=n_obs, n_reps=n_reps, master_seed=master_seed,
        exposure_mode=exposure_mode, model_id="custom", **kwargs,
    )


def _stream(master_seed: int, replicate_index: int, tag: int) -> np.random.Generator:
    seq = np.random.SeedSequence([master_seed, replicate_index, tag])
    return np.random.Generator(np.random.Philox(seq))


def _generation_order(config: SimulationConfig) -> list[str]:
    """Topological order of T1, T2, Y1, Y2 under the nonzero dependencies."""
    deps = {
        "T1": {"T2": config.tau},
        "T2": {"T1": config.phi, "Y1": config.omega},
        "Y1": {"T1": config.delta, "T2": config.kappa, "Y2": config.lambda_},
        "Y2": {"T2": config.delta, "T1": config.theta, "Y1": config.eta},
    }
    parents = {node: {p for p, c in ps.items() if c != 0.0} for node, ps in deps.items()}
    order = []
    ready = sorted(node for node, ps in parents.items() if not ps)
    remaining = {node: set(ps) for node, ps in parents.items() if ps}
    while ready:
        node = ready.pop(0)
        order.append(node)
        freed = []
        for other, ps in remaining.items():
            ps.discard(node)
            if not ps:
                freed.append(other)
        for other in freed:
            del remaining[other]
        if freed:
            ready.extend(freed)
            ready.sort()
    if remaining:
        raise ConfigError(f"dependency cycle among {sorted(remaining)}")
    return order


def simulate_sample(config: SimulationConfig, replicate_index: int = 0) -> PairDataset:
    """Draw one sample of n_obs sibling pairs for the given replicate index."""
    if replicate_index < 0:
        raise ConfigError("replicate_index must be nonnegative")
    n = config.n_obs
    seed = config.master_seed
    u = _stream(seed, replicate_index, _TAG_U).standard_normal(n)
    noise_y1 = _stream(seed, replicate_index, _TAG_NOISE_Y1).standard_normal(n)
    noise_y2 = _stream(seed, replicate_index, _TAG_NOISE_Y2).standard_normal(n)
    binary = config.exposure_mode == BINARY_MODE
    if binary:
        noise_t1 = noise_t2 = None
    else:
        noise_t1 = _stream(seed, replicate_index, _TAG_NOISE_T1).standard_normal(n)
        noise_t2 = _stream(seed, replicate_index, _TAG_NOISE_T2).standard_normal(n)

    v: dict[str, np.ndarray] = {}

    def term(coef, name):
        return coef * v[name] if coef != 0.0 else 0.0

    for node in _generation_order(config):
        if node == "T1":
            index = term(config.tau, "T2") + config.chi * u
            v["T1"] = (index > THRESHOLD_T1).astype(float) if binary else index + noise_t1
        elif node == "T2":
            index = term(config.phi, "T1") + term(config.omega, "Y1") + config.gamma * u
            v["T2"] = (index > THRESHOLD_T2).astype(float) if binary else index + noise_t2
        elif node == "Y1":
            v["Y1"] = (term(config.delta, "T1") + term(config.kappa, "T2")
                       + term(config.lambda_, "Y2") + config.psi * u + noise_y1)
        else:
            v["Y2"] = (term(config.delta, "T2") + term(config.theta, "T1")
                       + term(config.eta, "Y1") + config.psi * u + noise_y2)

    family = tuple(str(i) for i in range(1, n + 1))
    return PairDataset(family_id=family, t1=v["T1"], t2=v["T2"], y1=v["Y1"], y2=v["Y2"])


@dataclass(frozen=True)
class SimulationSummary:
    """Replicate-level aggregation of the spillover coefficient estimates."""

    model_id: str
    exposure_mode: str
    n_obs: int
    n_reps: int
    master_seed: int
    theta_true: float
    mean_sc: float
    empirical_sd: float
    pct_low: float
    pct_high: float
    mean_ci_low: float
    mean_ci_high: float
    coverage: float
    mean_reported_se: float


def thread_count(n_tasks: int) -> int:
    """Worker count: min(cpu count, n_tasks), capped by SPILLOVER_LAB_THREADS."""
    cap = os.cpu_count() or 1
    raw = os.environ.get(THREADS_ENV)
    if raw is not None:
        try:
            cap = int(raw)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
        if cap < 1:
            raise ConfigError(f"{THREADS_ENV} must be positive, got {cap}")
    return max(1, min(cap, n_tasks))


def _one_replicate(config: SimulationConfig, index: int):
    data = simulate_sample(config, index)
    try:
        rep = spillover_estimate(data)
    except RankDeficiencyError as exc:
        raise RankDeficiencyError(
            f"replicate {index} (master_seed {config.master_seed}): {exc}"
        ) from exc
    covered = rep.ci_low <= config.theta <= rep.ci_high
    return rep.sc, rep.se, rep.ci_low, rep.ci_high, covered


def monte_carlo(config: SimulationConfig) -> SimulationSummary:
    """Run n_reps replicates and aggregate in replicate-index order.

    Replicates are independent and individually seeded, so the summary is
    identical for any worker count.
    """
    indices = range(config.n_reps)
    workers = thread_count(config.n_reps)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda i: _one_replicate(config, i), indices))
    else:
        rows = [_one_replicate(config, i) for i in indices]

    scs = np.array([r[0] for r in rows])
    ses = np.array([r[1] for r in rows])
    lows = np.array([r[2] for r in rows])
    highs = np.array([r[3] for r in rows])
    covered = np.array([r[4] for r in rows], dtype=float)
    pct_low, pct_high = np.percentile(scs, [2.5, 97.5])
    return SimulationSummary(
        model_id=config.model_id,
        exposure_mode=config.exposure_mode,
        n_obs=config.n_obs,
        n_reps=config.n_reps,
        master_seed=config.master_seed,
        theta_true=config.theta,
        mean_sc=float(scs.mean()),
        empirical_sd=float(scs.std(ddof=1)) if config.n_reps > 1 else 0.0,
        pct_low=float(pct_low),
        pct_high=float(pct_high),
        mean_ci_low=float(lows.mean()),
        mean_ci_high=float(highs.mean()),
        coverage=float(covered.mean()),
        mean_reported_se=float(ses.mean()),
    )


def model_seed(master_seed: int, model_index: int) -> int:
    """Derived child seed for one model of a multi-model run."""
    state = np.random.SeedSequence([master_seed, model_index]).generate_state(1, np.uint64)
    return int(state[0])


def figure4_table(
    n_obs: int = 5000,
    n_reps: int = 1000,
    master_seed: int = 20107,
    exposure_mode: str = BINARY_MODE,
) -> tuple[SimulationSummary, ...]:
    """Monte Carlo summaries for all nine canonical models.

    Each model runs under its own derived child seed (see model_seed), so a
    row can be reproduced standalone with `simulate` and that seed.
    """
    rows = []
    for index, model_id in enumerate(PRESETS):
        config = preset_config(
            model_id,
            n_obs=n_obs,
            n_reps=n_reps,
            master_seed=model_seed(master_seed, index),
            exposure_mode=exposure_mode,
        )
        rows.append(monte_carlo(config))
    return tuple(rows)
