"""Randomised property suite behind ``nestlab verify``.

Each property draws a random instance from its own generator, runs one of
the library operations and returns the deviation from the expected identity
together with the arrays that reproduce the instance.  A trial fails when the
deviation exceeds the property's threshold or the operation raises.  Seeds
are derived from ``(seed, property id, trial)`` so a report is reproducible
and independent of which other properties run.
"""

import logging
import math
import warnings
import zlib
from collections.abc import Callable, Iterable
from typing import Literal, NamedTuple

import numpy as np

from nestlab.linalg import adjoint, spectral_norm
from nestlab.nest_algebra import (
    arveson_distance,
    contains,
    counterexample_family,
    distance_one_certificate,
    kk_distance_estimate,
    nearest_element,
    rank_one_lower_bound,
)
from nestlab.nests import (
    build_similarity,
    intertwining_defects,
    nest_distance,
    preserves_dimension,
    random_perturbed_nest,
    recover_order_iso,
)
from nestlab.projections import (
    closest_pair_check,
    halmos_decompose,
    nearest_in_chain,
    polar_isometry_gap,
    proj_distance_components,
    rank_complement_check,
)
from nestlab.schemas.common import ComplexMatrix, NestlabModel, Tolerances, resolve
from nestlab.schemas.projection import Projection
from nestlab.utils.sampling import (
    distance_one_pair,
    near_identity_unitary,
    orthogonal_quadruple,
    random_complex_matrix,
    random_nest,
    random_projection_pair,
)

logger = logging.getLogger(__name__)

Suite = Literal["all", "projections", "nests", "algebra"]
Outcome = tuple[float, dict[str, np.ndarray]] | None
PropertyFn = Callable[[np.random.Generator, Tolerances], Outcome]

SQRT2 = math.sqrt(2.0)


class Property(NamedTuple):
    id: str
    suite: str
    threshold: float
    check: PropertyFn


PROPERTIES: dict[str, Property] = {}


def register(prop_id: str, suite: str, threshold: float):
    def decorator(fn: PropertyFn) -> PropertyFn:
        PROPERTIES[prop_id] = Property(prop_id, suite, threshold, fn)
        return fn

    return decorator


class Failure(NestlabModel):
    property: str
    trial: int
    deviation: float | None
    error: str | None = None
    counterexample: dict[str, ComplexMatrix]


class VerifyReport(NestlabModel):
    """Outcome of one suite run.

    Attributes:
        suite: Suite name.
        trials: Trials per property.
        seed: Root seed.
        failures: Failing trials with their instances as MatrixFiles.
        max_deviation: Largest finite deviation observed per property.
        checked: Trials per property that produced an instance.
    """

    suite: str
    trials: int
    seed: int
    failures: list[Failure]
    max_deviation: dict[str, float]
    checked: dict[str, int]

    @property
    def ok(self) -> bool:
        return not self.failures


def _rng(seed: int, prop_id: str, trial: int) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(prop_id.encode()), trial])


def _column(array) -> np.ndarray:
    array = np.asarray(array, dtype=np.complex128)
    return array.reshape(-1, 1) if array.ndim == 1 else array


def select(suite: str, properties: Iterable[Property] | None = None) -> list[Property]:
    pool = list(PROPERTIES.values()) if properties is None else list(properties)
    return [p for p in pool if suite == "all" or p.suite == suite]


def run_suite(
    suite: Suite = "all",
    trials: int = 100,
    seed: int = 0,
    tol: Tolerances | None = None,
    properties: Iterable[Property] | None = None,
) -> VerifyReport:
    """Run every property of *suite* for *trials* trials."""
    tol = resolve(tol)
    failures = []
    max_deviation: dict[str, float] = {}
    checked: dict[str, int] = {}
    for prop in select(suite, properties):
        worst = 0.0
        count = 0
        for trial in range(trials):
            try:
                outcome = prop.check(_rng(seed, prop.id, trial), tol)
            except Exception as exc:
                logger.warning("%s trial %d raised %s", prop.id, trial, exc)
                failures.append(
                    Failure(
                        property=prop.id,
                        trial=trial,
                        deviation=None,
                        error=f"{type(exc).__name__}: {exc}",
                        counterexample={},
                    )
                )
                continue
            if outcome is None:
                continue
            deviation, witness = outcome
            count += 1
            worst = max(worst, deviation)
            if not deviation <= prop.threshold:
                logger.info("%s trial %d deviation %.3e", prop.id, trial, deviation)
                failures.append(
                    Failure(
                        property=prop.id,
                        trial=trial,
                        deviation=deviation,
                        counterexample={k: _column(v) for k, v in witness.items()},
                    )
                )
        if trials:
            max_deviation[prop.id] = worst
            checked[prop.id] = count
    return VerifyReport(
        suite=suite,
        trials=trials,
        seed=seed,
        failures=failures,
        max_deviation=max_deviation,
        checked=checked,
    )


def _dim(rng: np.random.Generator, low: int, high: int) -> int:
    return int(rng.integers(low, high + 1))


def _perturbed_pair(rng, tol, low=2, high=8, strength=0.4):
    m = random_nest(_dim(rng, low, high), rng, tol)
    n = random_perturbed_nest(m, float(rng.uniform(0.0, strength)), int(rng.integers(2**31)), tol)
    return m, n


def _element_of(nest, rng) -> np.ndarray:
    """Random member of ``T(nest)``."""
    basis = nest.adapted_basis()
    upper = np.zeros((nest.dim, nest.dim), dtype=bool)
    for lo, hi in zip(nest.ranks, nest.ranks[1:]):
        upper[lo:hi, lo:] = True
    return basis @ (random_complex_matrix((nest.dim, nest.dim), rng) * upper) @ adjoint(basis)


# projections


@register("proj.norm_formula", "projections", 1e-8)
def _norm_formula(rng, tol):
    p, q = random_projection_pair(_dim(rng, 2, 16), rng, tol)
    d = proj_distance_components(p, q)
    return abs(d.d - max(d.d_pq_perp, d.d_pperp_q)), {"p": p.p, "q": q.p}


@register("proj.corner_equality", "projections", 1e-6)
def _corner_equality(rng, tol):
    p, q = random_projection_pair(_dim(rng, 2, 16), rng, tol)
    d = proj_distance_components(p, q)
    if d.d >= 1.0 - 1e-6:
        return None
    return abs(d.d_pq_perp - d.d_pperp_q), {"p": p.p, "q": q.p}


@register("proj.isometry_gap", "projections", 1e-8)
def _isometry_gap(rng, tol):
    p, q = random_projection_pair(_dim(rng, 2, 16), rng, tol)
    if proj_distance_components(p, q).d >= 1.0 - tol.eq_abs:
        return None
    gap = polar_isometry_gap(p, q, tol)
    deviation = abs(gap.gap - gap.predicted)
    if gap.gap >= SQRT2:
        deviation = math.inf
    return deviation, {"p": p.p, "q": q.p}


@register("proj.halmos_roundtrip", "projections", 1e-6)
def _halmos_roundtrip(rng, tol):
    p, q = random_projection_pair(_dim(rng, 2, 10), rng, tol)
    h = halmos_decompose(p, q, tol)
    p_back, q_back = h.reconstruct()
    w = np.asarray(h.w)
    deviation = max(
        spectral_norm(p_back - p.p),
        spectral_norm(q_back - q.p),
        spectral_norm(adjoint(w) @ w - np.eye(p.dim)),
    )
    return deviation, {"p": p.p, "q": q.p}


@register("proj.rank_complement", "projections", 0.5)
def _rank_complement(rng, tol):
    p1, p2, q1, q2 = orthogonal_quadruple(_dim(rng, 3, 12), rng, tol)
    report = rank_complement_check(p1, p2, q1, q2, tol)
    deviation = abs(report.rank_p_complement - report.rank_q_complement) + abs(report.index)
    if report.gap >= SQRT2 or report.gap > report.gap_bound + tol.eq_abs:
        deviation += 1.0
    return float(deviation), {"p1": p1.p, "p2": p2.p, "q1": q1.p, "q2": q2.p}


@register("proj.chain_uniqueness", "projections", 1e-8)
def _chain_uniqueness(rng, tol):
    nest = random_nest(_dim(rng, 2, 8), rng, tol)
    k = int(rng.integers(0, nest.size - 1))
    lower, upper = nest.elements[k], nest.elements[int(rng.integers(k + 1, nest.size))]
    near = lower if rng.random() < 0.5 else upper
    v = near_identity_unitary(nest.dim, float(rng.uniform(0.0, 0.45)), rng)
    p = Projection.from_matrix(v @ near.p @ adjoint(v), tol)
    nearest_in_chain(p, nest.elements, tol)
    return abs(1.0 - closest_pair_check(p, lower, upper)), {
        "p": p.p,
        "q1": lower.p,
        "q2": upper.p,
    }


# nests


@register("nest.pseudometric", "nests", 1e-10)
def _pseudometric(rng, tol):
    m, n = _perturbed_pair(rng, tol)
    third = random_perturbed_nest(m, float(rng.uniform(0.0, 0.4)), int(rng.integers(2**31)), tol)
    d_mn, d_nm = nest_distance(m, n), nest_distance(n, m)
    deviation = max(
        nest_distance(third, n) - nest_distance(third, m) - d_mn,
        abs(d_mn - d_nm),
        nest_distance(m, m),
        0.0,
    )
    return deviation, {"m": m.adapted_basis(), "n": n.adapted_basis(), "third": third.adapted_basis()}


@register("nest.order_iso", "nests", 1e-8)
def _order_iso(rng, tol):
    m, n = _perturbed_pair(rng, tol)
    iso = recover_order_iso(m, n, tol)
    deviation = abs(iso.gamma - nest_distance(m, n))
    if not preserves_dimension(iso, tol):
        deviation = math.inf
    return deviation, {"m": m.adapted_basis(), "n": n.adapted_basis()}


@register("nest.similarity", "nests", 1e-8)
def _similarity(rng, tol):
    m, n = _perturbed_pair(rng, tol)
    iso = recover_order_iso(m, n, tol)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        sim = build_similarity(iso, tol)
    deviation = max(intertwining_defects(sim, iso, tol))
    if iso.gamma < 0.5:
        deviation = max(deviation, sim.s_minus_i_norm - 2.0 * iso.gamma)
    return deviation, {"m": m.adapted_basis(), "n": n.adapted_basis(), "s": sim.s}


# algebra


@register("alg.arveson_consistency", "algebra", 1e-6)
def _arveson_consistency(rng, tol):
    nest = random_nest(_dim(rng, 2, 6), rng, tol)
    t = random_complex_matrix((nest.dim, nest.dim), rng)
    a = nearest_element(t, nest, tol)
    deviation = max(
        abs(spectral_norm(t - a) - arveson_distance(t, nest).distance),
        contains(a, nest, tol).residual,
    )
    return deviation, {"t": t, "n": nest.adapted_basis(), "a": a}


@register("alg.membership_equiv", "algebra", 1e-10)
def _membership_equiv(rng, tol):
    nest = random_nest(_dim(rng, 2, 8), rng, tol)
    a = _element_of(nest, rng)
    member = contains(a, nest, tol)
    deviation = member.residual / max(1.0, spectral_norm(a))
    if not member.member:
        deviation = math.inf
    return deviation, {"a": a, "n": nest.adapted_basis()}


@register("alg.rank_one_membership", "algebra", 1e-10)
def _rank_one_membership(rng, tol):
    nest = random_nest(_dim(rng, 2, 8), rng, tol)
    k = int(rng.integers(0, nest.size - 1))
    zeta = nest.elements[k + 1].p @ random_complex_matrix((nest.dim, 1), rng)
    eta = nest.elements[k].perp @ random_complex_matrix((nest.dim, 1), rng)
    operator = (zeta / np.linalg.norm(zeta)) @ adjoint(eta / np.linalg.norm(eta))
    return contains(operator, nest, tol).residual, {"t": operator, "n": nest.adapted_basis()}


@register("alg.kk_dominates_rank_one", "algebra", 1e-8)
def _kk_dominates(rng, tol):
    if rng.random() < 0.5:
        m, n = _perturbed_pair(rng, tol, high=4)
    else:
        dim = _dim(rng, 2, 4)
        m, n = random_nest(dim, rng, tol), random_nest(dim, rng, tol)
    seed = int(rng.integers(2**31))
    estimate = kk_distance_estimate(m, n, trials=1, seed=seed, tol=tol, max_iter=15)
    bound = rank_one_lower_bound(m, n, tol).bound
    home = m if estimate.side == "m" else n
    deviation = max(
        bound - estimate.lower_bound,
        estimate.lower_bound - estimate.upper_bound,
        spectral_norm(estimate.witness) - 1.0,
        contains(estimate.witness, home, tol).residual,
        0.0,
    )
    return deviation, {"m": m.adapted_basis(), "n": n.adapted_basis(), "witness": estimate.witness}


@register("alg.distance_one", "algebra", 1e-8)
def _distance_one(rng, tol):
    m, n = distance_one_pair(_dim(rng, 2, 6), rng, tol)
    certificate = distance_one_certificate(m, n, tol)
    best = certificate.witnesses[0]
    home = m if best.side == "m" else n
    deviation = max(
        1.0 - certificate.achieved,
        abs(spectral_norm(best.operator) - 1.0),
        contains(best.operator, home, tol).residual,
    )
    return deviation, {"m": m.adapted_basis(), "n": n.adapted_basis(), "witness": best.operator}


@register("alg.example_family", "algebra", 1e-9)
def _example_family(rng, tol):
    s = float(rng.uniform(1.0 / SQRT2, 0.999))
    instance = counterexample_family(s, tol)
    deviation = max(
        abs(instance.nest_dist - s),
        abs(instance.t_norm - 1.0),
        abs(instance.alg_dist_lb - 1.0),
        abs(instance.closed_form - instance.alg_dist_lb),
    )
    return deviation, {"t": instance.t}


@register("alg.similarity_conjugation", "algebra", 1e-6)
def _similarity_conjugation(rng, tol):
    m, n = _perturbed_pair(rng, tol)
    iso = recover_order_iso(m, n, tol)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        sim = build_similarity(iso, tol)
    a = _element_of(m, rng)
    a = a / spectral_norm(a)
    conjugated = sim.s @ a @ np.linalg.inv(sim.s)
    residual = arveson_distance(conjugated, n).distance
    return residual / sim.condition**2, {"a": a, "s": sim.s}
