"""Mean-parameterized count distribution families and their PGFs.

Every family is indexed by its conditional mean ``lam`` (> 0), so the same
fitted intensity path can be paired with any registered family.  The
families shipped here satisfy the stochastic-order property: a larger mean
implies a first-order stochastically larger count, which is what makes the
model class ergodic and the PGF comparison sharp.  ``stochastic_order_check``
vets user-registered families against that property on a grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np
from scipy.special import gammaln

from .errors import DomainError

__all__ = [
    "CountDistribution",
    "Poisson",
    "NegBinomial",
    "ZeroInflatedPoisson",
    "StochasticOrderReport",
    "stochastic_order_check",
    "register_distribution",
    "make_distribution",
]


def _check_lam(lam) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    if np.any(lam <= 0.0):
        raise DomainError("pgf/pmf requires lam > 0")
    return lam


def _check_u(u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if np.any((u < 0.0) | (u > 1.0)):
        raise DomainError("pgf requires u in [0, 1]")
    return u


@runtime_checkable
class CountDistribution(Protocol):
    """Interface a count family must implement to be usable everywhere.

    All methods broadcast over numpy arrays. ``lam`` is always the mean.
    """

    name: str

    def pgf(self, lam, u): ...

    def pmf(self, k, lam): ...

    def cdf(self, y, lam): ...

    def sample(self, rng: np.random.Generator, lam): ...


@dataclass(frozen=True)
class Poisson:
    """Poisson family; pgf(u) = exp(lam (u - 1))."""

    name: str = "poisson"

    def pgf(self, lam, u):
        lam = _check_lam(lam)
        u = _check_u(u)
        return np.exp(lam * (u - 1.0))

    def pmf(self, k, lam):
        lam = _check_lam(lam)
        k = np.asarray(k)
        return np.exp(k * np.log(lam) - lam - gammaln(k + 1.0))

    def cdf(self, y, lam):
        lam = _check_lam(lam)
        y = np.floor(np.asarray(y, dtype=float))
        kmax = int(np.max(y))
        ks = np.arange(kmax + 1)
        table = np.cumsum(self.pmf(ks, np.asarray(lam)[..., None]), axis=-1)
        idx = np.clip(y.astype(int), 0, kmax)
        out = np.take_along_axis(table, np.broadcast_to(idx[..., None], table.shape[:-1] + (1,)), axis=-1)[..., 0]
        return np.where(y < 0, 0.0, out)

    def sample(self, rng: np.random.Generator, lam):
        return rng.poisson(_check_lam(lam))


@dataclass(frozen=True)
class NegBinomial:
    """Negative binomial with dispersion r; mean lam, variance lam (1 + lam/r).

    pgf(u) = (1 + lam (1 - u) / r)^(-r); success probability p = r / (r + lam).
    """

    r: float
    name: str = "negbinomial"

    def __post_init__(self):
        if not self.r > 0:
            raise DomainError("NegBinomial dispersion r must be > 0")

    def pgf(self, lam, u):
        lam = _check_lam(lam)
        u = _check_u(u)
        return (1.0 + lam * (1.0 - u) / self.r) ** (-self.r)

    def pmf(self, k, lam):
        lam = _check_lam(lam)
        k = np.asarray(k)
        r = self.r
        log_p = np.log(r) - np.log(r + lam)
        log_1mp = np.log(lam) - np.log(r + lam)
        return np.exp(
            gammaln(k + r) - gammaln(r) - gammaln(k + 1.0) + r * log_p + k * log_1mp
        )

    def cdf(self, y, lam):
        lam = _check_lam(lam)
        y = np.floor(np.asarray(y, dtype=float))
        kmax = int(np.max(y))
        ks = np.arange(kmax + 1)
        table = np.cumsum(self.pmf(ks, np.asarray(lam)[..., None]), axis=-1)
        idx = np.clip(y.astype(int), 0, kmax)
        out = np.take_along_axis(table, np.broadcast_to(idx[..., None], table.shape[:-1] + (1,)), axis=-1)[..., 0]
        return np.where(y < 0, 0.0, out)

    def sample(self, rng: np.random.Generator, lam):
        # Gamma-Poisson mixture: Y ~ Poisson(lam * G), G ~ Gamma(r, 1/r).
        lam = _check_lam(lam)
        g = rng.gamma(shape=self.r, scale=1.0 / self.r, size=np.shape(lam))
        return rng.poisson(lam * g)


@dataclass(frozen=True)
class ZeroInflatedPoisson:
    """Zero-inflated Poisson, mean-parameterized.

    With zero-inflation probability zeta, a mean of lam requires the Poisson
    branch to have rate lam / (1 - zeta).  Registry slot only: sampling and
    PGF are provided, likelihood fitting is not.
    """

    zero_prob: float
    name: str = "zip"

    def __post_init__(self):
        if not 0.0 <= self.zero_prob < 1.0:
            raise DomainError("ZIP zero_prob must lie in [0, 1)")

    def _rate(self, lam):
        return lam / (1.0 - self.zero_prob)

    def pgf(self, lam, u):
        lam = _check_lam(lam)
        u = _check_u(u)
        z = self.zero_prob
        return z + (1.0 - z) * np.exp(self._rate(lam) * (u - 1.0))

    def pmf(self, k, lam):
        lam = _check_lam(lam)
        k = np.asarray(k)
        z = self.zero_prob
        lp = self._rate(lam)
        base = np.exp(k * np.log(lp) - lp - gammaln(k + 1.0))
        return np.where(k == 0, z + (1.0 - z) * base, (1.0 - z) * base)

    def cdf(self, y, lam):
        lam = _check_lam(lam)
        y = np.floor(np.asarray(y, dtype=float))
        kmax = int(np.max(y))
        ks = np.arange(kmax + 1)
        table = np.cumsum(self.pmf(ks, np.asarray(lam)[..., None]), axis=-1)
        idx = np.clip(y.astype(int), 0, kmax)
        out = np.take_along_axis(table, np.broadcast_to(idx[..., None], table.shape[:-1] + (1,)), axis=-1)[..., 0]
        return np.where(y < 0, 0.0, out)

    def sample(self, rng: np.random.Generator, lam):
        lam = _check_lam(lam)
        inflate = rng.random(size=np.shape(lam)) < self.zero_prob
        draws = rng.poisson(self._rate(lam))
        return np.where(inflate, 0, draws)


@dataclass(frozen=True)
class StochasticOrderReport:
    """Outcome of a grid check of CDF monotonicity in the mean."""

    ok: bool
    worst_violation: float
    at: tuple | None  # (lam1, lam2, y) of the worst violation, if any


def stochastic_order_check(dist: CountDistribution, lam_grid, y_grid) -> StochasticOrderReport:
    """Check that lam1 <= lam2 implies CDF_{lam1}(y) >= CDF_{lam2}(y) on grids.

    Report-only: never raises on violation.  Used to vet user-registered
    families before they enter a test.
    """
    lam_grid = np.sort(np.asarray(lam_grid, dtype=float))
    y_grid = np.asarray(y_grid)
    worst = 0.0
    at = None
    cdfs = np.array([dist.cdf(y_grid, lam) for lam in lam_grid])  # (L, Y)
    for i in range(len(lam_grid) - 1):
        diff = cdfs[i + 1] - cdfs[i]  # should be <= 0
        j = int(np.argmax(diff))
        if diff[j] > worst:
            worst = float(diff[j])
            at = (float(lam_grid[i]), float(lam_grid[i + 1]), float(np.asarray(y_grid)[j]))
    return StochasticOrderReport(ok=worst <= 1e-12, worst_violation=worst, at=at)


_REGISTRY: dict[str, type] = {
    "poisson": Poisson,
    "negbinomial": NegBinomial,
    "zip": ZeroInflatedPoisson,
}


def register_distribution(name: str, cls: type) -> None:
    """Register a user-supplied family for config-file lookup."""
    _REGISTRY[name] = cls


def make_distribution(spec) -> CountDistribution:
    """Build a distribution from a config value.

    Accepts the family name as a string (``"poisson"``) or a one-key mapping
    with constructor kwargs (``{"negbinomial": {"r": 3.0}}``).
    """
    if isinstance(spec, str):
        name, kwargs = spec, {}
    elif isinstance(spec, dict) and len(spec) == 1:
        name, kwargs = next(iter(spec.items()))
        kwargs = dict(kwargs or {})
    elif isinstance(spec, CountDistribution):
        return spec
    else:
        raise DomainError(f"unrecognized distribution spec: {spec!r}")
    if name not in _REGISTRY:
        raise DomainError(f"unknown distribution family '{name}' (known: {sorted(_REGISTRY)})")
    return _REGISTRY[name](**kwargs)
