"""Model-implied second moments and the population gain-score regression.

Two independent routes to the implied covariance matrix are kept side by
side on purpose: the reduced-form matrix solve and an explicit trek sum.
They must agree to near machine precision on any DAG; the test suite holds
them to 1e-12.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np
from scipy.linalg import solve_triangular

from .errors import (
    CollinearityError,
    DegenerateExposureError,
    NumericError,
    SingularityError,
    UnknownVariableError,
)
from .graph import PathModel, topological_order

COLLINEARITY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ImpliedMoments:
    """Covariance matrix over the model's variables, in declaration order."""

    variable_order: tuple[str, ...]
    matrix: np.ndarray

    def index(self, name: str) -> int:
        try:
            return self.variable_order.index(name)
        except ValueError:
            raise UnknownVariableError(f"unknown variable {name!r}") from None

    def covariance(self, a: str, b: str) -> float:
        return float(self.matrix[self.index(a), self.index(b)])

    def variance(self, a: str) -> float:
        return self.covariance(a, a)

    def correlation(self, a: str, b: str) -> float:
        va, vb = self.variance(a), self.variance(b)
        if va <= 0.0 or vb <= 0.0:
            raise DegenerateExposureError(
                f"correlation undefined: zero variance for {a!r} or {b!r}"
            )
        return self.covariance(a, b) / math.sqrt(va * vb)


def _structural_arrays(model: PathModel):
    """Coefficient matrix B (child row, parent column) and noise vector, topo order."""
    order = topological_order(model)
    idx = {name: i for i, name in enumerate(order)}
    n = len(order)
    b = np.zeros((n, n))
    for e in model.all_edges():
        b[idx[e.target], idx[e.source]] = e.coefficient
    noise = np.array([model.variable(name).noise_variance for name in order])
    return order, b, noise


def _invert_unit_lower(i_minus_b: np.ndarray) -> np.ndarray:
    """Inverse of a unit lower-triangular system; guards corrupted input."""
    if not np.all(np.isfinite(i_minus_b)):
        raise SingularityError("non-finite entries in the structural system")
    n = i_minus_b.shape[0]
    inv = solve_triangular(i_minus_b, np.eye(n), lower=True, unit_diagonal=True)
    if not np.all(np.isfinite(inv)):
        raise SingularityError("reduced form did not solve to finite values")
    return inv


def implied_covariance_matrix(model: PathModel) -> ImpliedMoments:
    """Reduced-form implied covariance: solve (I - B) out of the structural system.

    Variables are permuted into topological order so the system is unit lower
    triangular, solved, then permuted back to declaration order.
    """
    order, b, noise = _structural_arrays(model)
    n = len(order)
    a = _invert_unit_lower(np.eye(n) - b)
    sigma_topo = (a * noise) @ a.T
    names = model.names()
    perm = [order.index(name) for name in names]
    sigma = sigma_topo[np.ix_(perm, perm)]
    return ImpliedMoments(tuple(names), sigma)


def _directed_paths(children: Mapping[str, Mapping[str, float]], start: str, goal: str):
    """All directed paths start -> goal as (node frozenset, coefficient product)."""
    out: list[tuple[frozenset, float]] = []
    if start == goal:
        return [(frozenset([start]), 1.0)]

    def walk(node, visited, product):
        for child, coef in children[node].items():
            if child == goal:
                out.append((frozenset(visited + [child]), product * coef))
            elif child not in visited:
                walk(child, visited + [child], product * coef)

    walk(start, [start], 1.0)
    return out


def implied_covariance_treks(model: PathModel) -> ImpliedMoments:
    """Trek-rule implied covariance, independent of any matrix inversion.

    Cov(x, y) sums, over every root z and every pair of directed paths
    z -> x and z -> y sharing no node but z, the product of the two path
    coefficients weighted by the total implied variance of z.  Variances
    come from the parent-moment recursion in topological order, so the
    whole computation stays purely path-based.
    """
    order = topological_order(model)
    children: dict[str, dict[str, float]] = {name: {} for name in order}
    parents: dict[str, dict[str, float]] = {name: {} for name in order}
    for e in model.all_edges():
        children[e.source][e.target] = e.coefficient
        parents[e.target][e.source] = e.coefficient

    path_cache: dict[tuple[str, str], list] = {}

    def paths(z, x):
        key = (z, x)
        if key not in path_cache:
            path_cache[key] = _directed_paths(children, z, x)
        return path_cache[key]

    var: dict[str, float] = {}
    cov_cache: dict[tuple[str, str], float] = {}

    def cov(x: str, y: str) -> float:
        if x == y:
            return var[x]
        key = (x, y) if x < y else (y, x)
        if key in cov_cache:
            return cov_cache[key]
        terms = []
        for z in order:
            if var.get(z) is None:
                continue
            to_x = paths(z, x)
            if not to_x:
                continue
            to_y = paths(z, y)
            for nodes_x, prod_x in to_x:
                for nodes_y, prod_y in to_y:
                    if nodes_x & nodes_y == {z}:
                        terms.append(var[z] * prod_x * prod_y)
        value = math.fsum(terms)
        cov_cache[key] = value
        return value

    for w in order:
        terms = [model.variable(w).noise_variance]
        ps = list(parents[w].items())
        for p, bp in ps:
            for q, bq in ps:
                terms.append(bp * bq * cov(p, q))
        var[w] = math.fsum(terms)

    names = model.names()
    n = len(names)
    sigma = np.empty((n, n))
    for i, a in enumerate(names):
        sigma[i, i] = var[a]
        for j in range(i + 1, n):
            value = cov(a, names[j])
            sigma[i, j] = value
            sigma[j, i] = value
    return ImpliedMoments(tuple(names), sigma)


def partial_covariance(moments: ImpliedMoments, x: str, y: str, given: Iterable[str] = ()) -> float:
    """Cov(x, y) after projecting out the conditioning set (Schur complement)."""
    cond = list(given)
    if not cond:
        return moments.covariance(x, y)
    ix, iy = moments.index(x), moments.index(y)
    ic = [moments.index(c) for c in cond]
    sigma = moments.matrix
    s_cc = sigma[np.ix_(ic, ic)]
    s_cx = sigma[np.ix_(ic, [ix, iy])]
    try:
        solved = np.linalg.solve(s_cc, s_cx)
    except np.linalg.LinAlgError as exc:
        raise SingularityError(f"conditioning set {cond} has singular covariance") from exc
    return float(sigma[ix, iy] - s_cx[:, 0] @ solved[:, 1])


def partial_correlation(moments: ImpliedMoments, x: str, y: str, given: Iterable[str] = ()) -> float:
    """Correlation of x and y given a conditioning set, from implied moments."""
    pxy = partial_covariance(moments, x, y, given)
    pxx = partial_covariance(moments, x, x, given)
    pyy = partial_covariance(moments, y, y, given)
    if pxx <= 0.0 or pyy <= 0.0:
        raise NumericError(f"zero partial variance for {x!r} or {y!r} given {list(given)}")
    return pxy / math.sqrt(pxx * pyy)


@dataclass(frozen=True)
class PopulationRegression:
    """Large-sample OLS coefficients of the gain score on both exposures."""

    b1: float
    b2: float
    sc: float
    rho_dt1: float
    rho_dt2: float
    rho_t1t2: float
    sd_d: float
    sd_t1: float
    sd_t2: float


def population_partial_regression(model: PathModel) -> PopulationRegression:
    """Population coefficients of D on (T1, T2) from the implied moments.

    Uses the textbook two-regressor partial formula on implied correlations;
    raises DegenerateExposureError for zero-variance exposures and
    CollinearityError when the exposures are perfectly correlated.
    """
    moments = implied_covariance_matrix(model)
    var_t1 = moments.variance("T1")
    var_t2 = moments.variance("T2")
    if var_t1 <= 0.0 or var_t2 <= 0.0:
        raise DegenerateExposureError("both exposures need positive implied variance")
    var_d = moments.variance("D")
    sd_t1, sd_t2, sd_d = math.sqrt(var_t1), math.sqrt(var_t2), math.sqrt(var_d)
    r12 = moments.covariance("T1", "T2") / (sd_t1 * sd_t2)
    if abs(r12) >= 1.0 - COLLINEARITY_TOL:
        raise CollinearityError(f"exposures are collinear: corr(T1, T2) = {r12!r}")
    if var_d == 0.0:
        rd1 = rd2 = 0.0
    else:
        rd1 = moments.covariance("D", "T1") / (sd_d * sd_t1)
        rd2 = moments.covariance("D", "T2") / (sd_d * sd_t2)
    denom = 1.0 - r12 * r12
    b1 = (rd1 - rd2 * r12) / denom * (sd_d / sd_t1)
    b2 = (rd2 - rd1 * r12) / denom * (sd_d / sd_t2)
    return PopulationRegression(
        b1=b1, b2=b2, sc=b1 + b2,
        rho_dt1=rd1, rho_dt2=rd2, rho_t1t2=r12,
        sd_d=sd_d, sd_t1=sd_t1, sd_t2=sd_t2,
    )


def draw_coefficient(rng: np.random.Generator) -> float:
    """Magnitude uniform on [0.1, 2], random sign; avoids measure-zero zeros."""
    magnitude = rng.uniform(0.1, 2.0)
    return magnitude if rng.random() < 0.5 else -magnitude


@dataclass(frozen=True)
class SymbolicCheck:
    """Outcome of the generic-parameter identity check for one preset."""

    model_id: str
    draws: int
    sc_target: str  # "theta", "theta-minus-kappa", or "not-identified"
    b1_max_dev: float
    b2_max_dev: float
    sc_max_dev: float
    sc_min_dev: float
    dev_fraction: float
    passed: bool


def symbolic_check(model_id: str, draws: int = 120, seed: int = 20107) -> SymbolicCheck:
    """Check the closed-form b1/b2 identities over random re-parameterizations.

    fig1 presets must give (b1, b2) = (theta - delta, delta), fig2 presets
    (theta - delta, delta - kappa), both to 1e-9 on every draw; fig3 presets
    must show |sc - theta| > 1e-6 on at least 95% of draws.
    """
    from .presets import EXTRA_SLOTS, PARAM_EDGES, preset_parameters, preset_model

    if model_id not in EXTRA_SLOTS:
        raise UnknownVariableError(f"unknown preset {model_id!r}")
    if draws < 1:
        raise NumericError("draws must be positive")
    rng = np.random.default_rng(seed)
    slots = sorted(preset_parameters(model_id))
    identified = not model_id.startswith("fig3")
    target = "theta" if model_id.startswith("fig1") else (
        "theta-minus-kappa" if model_id.startswith("fig2") else "not-identified"
    )

    b1_devs, b2_devs, sc_devs = [], [], []
    for _ in range(draws):
        params = {slot: draw_coefficient(rng) for slot in slots}
        model = preset_model(model_id, overrides=params)
        reg = population_partial_regression(model)
        theta = params["theta"]
        delta = params["delta"]
        kappa = params.get("kappa", 0.0)
        b1_devs.append(abs(reg.b1 - (theta - delta)))
        b2_devs.append(abs(reg.b2 - (delta - kappa)))
        sc_devs.append(abs(reg.sc - theta))

    dev_fraction = sum(d > 1e-6 for d in sc_devs) / draws
    if identified:
        passed = max(b1_devs) < 1e-9 and max(b2_devs) < 1e-9
        if target == "theta":
            passed = passed and max(sc_devs) < 1e-9
    else:
        passed = dev_fraction >= 0.95
    return SymbolicCheck(
        model_id=model_id,
        draws=draws,
        sc_target=target,
        b1_max_dev=max(b1_devs),
        b2_max_dev=max(b2_devs),
        sc_max_dev=max(sc_devs),
        sc_min_dev=min(sc_devs),
        dev_fraction=dev_fraction,
        passed=passed,
    )
