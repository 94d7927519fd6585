"""Count time series model class: links, parameters, and intensity filtering.

The conditional mean follows the recursion

    lam_t = omega + sum_i alpha_i Y_{t-i} + sum_j beta_j lam_{t-j} + pi(X; c),

where the exogenous part is a sum of per-column terms c_j * phi_j(x_j) with
phi_j drawn from a registry of transforms (identity and the bounded
nonlinear forms used in the simulation designs).  Every registered form is
linear in its coefficient, which keeps the feedback derivative constant and
the quasi-likelihood surface well behaved.

All types are immutable after construction and all operations are pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
from scipy.signal import lfilter, lfiltic

from .distributions import CountDistribution
from .errors import DimensionError, DomainError, FeasibilityError

__all__ = [
    "EXOG_FORMS",
    "register_exog_form",
    "LinkSpec",
    "ParamVector",
    "CountSeries",
    "InitPolicy",
    "ModelSpec",
    "filter_lambda",
    "filter_lambda_with_sensitivity",
]


EXOG_FORMS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "linear": lambda x: x,
    "cos1": lambda x: np.cos(x) + 1.0,
    "sin1": lambda x: np.sin(x) + 1.0,
    "abswin": lambda x: np.where(np.abs(x) < 2.0, 2.0 - np.abs(x), 0.0),
}


def register_exog_form(name: str, fn: Callable[[np.ndarray], np.ndarray]) -> None:
    """Add a nonnegative transform phi to the exogenous-term registry.

    The term enters the mean as c * phi(x) with c >= 0, so phi must map into
    [0, inf) for the intensity to stay positive.
    """
    EXOG_FORMS[name] = fn


@dataclass(frozen=True)
class LinkSpec:
    """Orders and exogenous structure of the conditional-mean link.

    Attributes
    ----------
    p : number of count lags (>= 1)
    q : number of intensity lags (>= 0)
    exog_forms : registry name of phi_j per covariate column
    exog_lags : per-column lag in {0, 1}; 1 means X_{t-1} feeds lam_t
        (the default convention), 0 means the current X_t does (used by the
        applied workflow).
    """

    p: int = 1
    q: int = 0
    exog_forms: tuple[str, ...] = ()
    exog_lags: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.p < 1:
            raise DomainError("LinkSpec requires p >= 1")
        if self.q < 0:
            raise DomainError("LinkSpec requires q >= 0")
        for name in self.exog_forms:
            if name not in EXOG_FORMS:
                raise DomainError(f"unknown exogenous form '{name}' (known: {sorted(EXOG_FORMS)})")
        if self.exog_lags is None:
            object.__setattr__(self, "exog_lags", tuple(1 for _ in self.exog_forms))
        if len(self.exog_lags) != len(self.exog_forms):
            raise DimensionError("exog_lags length must match exog_forms")
        if any(l not in (0, 1) for l in self.exog_lags):
            raise DomainError("exog lags must be 0 or 1")

    @property
    def m(self) -> int:
        return len(self.exog_forms)

    @property
    def n_params(self) -> int:
        return 1 + self.p + self.q + self.m

    @property
    def d(self) -> int:
        """Dimension of the conditioning vector Z_t = (y-lags, lam-lags, x)."""
        return self.p + self.q + self.m


@dataclass(frozen=True)
class ParamVector:
    """Model coefficients with feasibility predicates.

    Layout: intercept omega > 0, count-lag weights alpha >= 0, intensity-lag
    weights beta >= 0 with sum(alpha) + sum(beta) < 1, exogenous coefficients
    >= 0, optional NB dispersion r > 0.
    """

    omega: float
    alpha: tuple[float, ...] = ()
    beta: tuple[float, ...] = ()
    exog: tuple[float, ...] = ()
    dispersion: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(float(a) for a in self.alpha))
        object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))
        object.__setattr__(self, "exog", tuple(float(c) for c in self.exog))

    def validate(self, link: LinkSpec) -> None:
        """Raise FeasibilityError / DimensionError naming the violated constraint."""
        if len(self.alpha) != link.p or len(self.beta) != link.q or len(self.exog) != link.m:
            raise DimensionError(
                f"parameter dimensions (p={len(self.alpha)}, q={len(self.beta)}, "
                f"m={len(self.exog)}) do not match link (p={link.p}, q={link.q}, m={link.m})"
            )
        if not self.omega > 0:
            raise FeasibilityError("omega > 0", f"got {self.omega}")
        if any(a < 0 for a in self.alpha):
            raise FeasibilityError("alpha_i >= 0", f"got {self.alpha}")
        if any(b < 0 for b in self.beta):
            raise FeasibilityError("beta_j >= 0", f"got {self.beta}")
        if any(c < 0 for c in self.exog):
            raise FeasibilityError("exog coefficients >= 0", f"got {self.exog}")
        s = sum(self.alpha) + sum(self.beta)
        if not s < 1.0:
            raise FeasibilityError("sum(alpha) + sum(beta) < 1", f"got {s}")
        if self.dispersion is not None and not self.dispersion > 0:
            raise FeasibilityError("dispersion r > 0", f"got {self.dispersion}")

    def is_feasible(self, link: LinkSpec) -> bool:
        try:
            self.validate(link)
        except (FeasibilityError, DimensionError):
            return False
        return True

    def to_array(self) -> np.ndarray:
        """Flatten to [omega, alpha, beta, exog]; dispersion is kept apart."""
        return np.concatenate(([self.omega], self.alpha, self.beta, self.exog))

    @classmethod
    def from_array(cls, link: LinkSpec, arr, dispersion: float | None = None) -> "ParamVector":
        arr = np.asarray(arr, dtype=float)
        if arr.size != link.n_params:
            raise DimensionError(f"expected {link.n_params} parameters, got {arr.size}")
        p, q = link.p, link.q
        return cls(
            omega=float(arr[0]),
            alpha=tuple(arr[1 : 1 + p]),
            beta=tuple(arr[1 + p : 1 + p + q]),
            exog=tuple(arr[1 + p + q :]),
            dispersion=dispersion,
        )


@dataclass(frozen=True)
class CountSeries:
    """Observed counts Y_1..Y_T with an aligned covariate matrix.

    Row t of ``covariates`` stores X_t; which row feeds lam_t is decided by
    the link's per-column lag.  Arrays are frozen after validation.
    """

    counts: np.ndarray
    covariates: np.ndarray | None = None
    timestamps: tuple | None = None

    def __post_init__(self):
        y = np.asarray(self.counts)
        if y.ndim != 1 or y.size < 1:
            raise DimensionError("counts must be a nonempty 1-D sequence")
        if not np.issubdtype(y.dtype, np.integer):
            yf = np.asarray(self.counts, dtype=float)
            if np.any(yf != np.floor(yf)):
                raise DomainError("counts must be integers")
            y = yf.astype(np.int64)
        if np.any(y < 0):
            raise DomainError("counts must be nonnegative")
        y = np.ascontiguousarray(y, dtype=np.int64)
        y.flags.writeable = False
        object.__setattr__(self, "counts", y)
        x = self.covariates
        if x is None:
            x = np.zeros((y.size, 0))
        x = np.ascontiguousarray(np.atleast_2d(np.asarray(x, dtype=float)))
        if x.shape[0] != y.size:
            if x.shape[1] == y.size:  # accept (m, T) from column-stacked input
                x = np.ascontiguousarray(x.T)
            else:
                raise DimensionError(
                    f"covariate rows ({x.shape[0]}) must equal series length ({y.size})"
                )
        x.flags.writeable = False
        object.__setattr__(self, "covariates", x)

    @property
    def T(self) -> int:
        return int(self.counts.size)

    @property
    def m(self) -> int:
        return int(self.covariates.shape[1])


@dataclass(frozen=True)
class InitPolicy:
    """Pre-sample values for the intensity recursion.

    Defaults follow the convention used throughout: lam_0 = 0, Y_0 = Y_1,
    X_0 = X_1.  ``y_pre="zero"`` matches the simulator's start so that a
    refilter reproduces the internal intensity path exactly.
    """

    lambda_pre: float = 0.0
    y_pre: Union[str, float] = "first"  # "first" | "zero" | numeric
    x_pre: str = "first"  # "first" | "zero"

    def __post_init__(self):
        if self.lambda_pre < 0:
            raise DomainError("lambda_pre must be >= 0")
        if isinstance(self.y_pre, str) and self.y_pre not in ("first", "zero"):
            raise DomainError("y_pre must be 'first', 'zero', or a number")
        if self.x_pre not in ("first", "zero"):
            raise DomainError("x_pre must be 'first' or 'zero'")

    def y_value(self, y: np.ndarray) -> float:
        if self.y_pre == "first":
            return float(y[0])
        if self.y_pre == "zero":
            return 0.0
        return float(self.y_pre)

    def x_row(self, x: np.ndarray) -> np.ndarray:
        if x.shape[1] == 0:
            return np.zeros(0)
        return x[0] if self.x_pre == "first" else np.zeros(x.shape[1])


@dataclass(frozen=True)
class ModelSpec:
    """A conditional distribution family paired with a link specification."""

    dist: CountDistribution
    link: LinkSpec


def _lagged_counts(y: np.ndarray, p: int, y0: float) -> np.ndarray:
    """(T, p) matrix with column i-1 holding Y_{t-i}; pre-sample values = y0."""
    T = y.size
    padded = np.concatenate((np.full(p, y0), y.astype(float)))
    return np.column_stack([padded[p - i : p - i + T] for i in range(1, p + 1)])


def _exog_terms(x: np.ndarray, link: LinkSpec, x0: np.ndarray) -> np.ndarray:
    """(T, m) matrix of phi_j applied to the lag-adjusted covariate columns."""
    T = x.shape[0]
    cols = []
    for j, (form, lag) in enumerate(zip(link.exog_forms, link.exog_lags)):
        col = x[:, j]
        if lag == 1:
            col = np.concatenate(([x0[j]], col[:-1]))
        cols.append(EXOG_FORMS[form](col))
    if not cols:
        return np.zeros((T, 0))
    return np.column_stack(cols)


def _baseline(series: CountSeries, link: LinkSpec, theta: ParamVector, init: InitPolicy):
    """Non-recursive part of the mean plus the lag/exog design blocks."""
    y = series.counts
    ylag = _lagged_counts(y, link.p, init.y_value(y))
    phi = _exog_terms(series.covariates, link, init.x_row(series.covariates))
    b = theta.omega + ylag @ np.asarray(theta.alpha) + phi @ np.asarray(theta.exog)
    return b, ylag, phi


def _ar_filter(b: np.ndarray, beta: tuple[float, ...], pre: float) -> np.ndarray:
    """Solve lam_t = b_t + sum_j beta_j lam_{t-j} with lam_{<=0} = pre."""
    if not beta:
        return b
    a = np.concatenate(([1.0], -np.asarray(beta)))
    if pre == 0.0:
        return lfilter([1.0], a, b)
    zi = lfiltic([1.0], a, y=np.full(len(beta), pre))
    out, _ = lfilter([1.0], a, b, zi=zi)
    return out


def filter_lambda(
    series: CountSeries,
    link: LinkSpec,
    theta: ParamVector,
    init: InitPolicy = InitPolicy(),
) -> np.ndarray:
    """Recursively filtered intensities lam_1..lam_T for the given parameters.

    Deterministic, strictly positive, and exact: the feedback recursion is
    evaluated by a linear filter with the initial intensities supplied by
    ``init``.
    """
    theta.validate(link)
    if series.m != link.m:
        raise DimensionError(f"series has {series.m} covariate columns, link expects {link.m}")
    b, _, _ = _baseline(series, link, theta, init)
    lam = _ar_filter(b, theta.beta, init.lambda_pre)
    return lam


def filter_lambda_with_sensitivity(
    series: CountSeries,
    link: LinkSpec,
    theta: ParamVector,
    init: InitPolicy = InitPolicy(),
):
    """Intensities plus the (T, K) matrix of d lam_t / d theta.

    The sensitivity of each coefficient obeys the same linear recursion as
    the intensity itself, driven by the corresponding design column (and by
    the lagged intensities for the feedback weights), so everything reduces
    to lag-polynomial filtering with zero pre-sample derivatives.
    """
    theta.validate(link)
    if series.m != link.m:
        raise DimensionError(f"series has {series.m} covariate columns, link expects {link.m}")
    b, ylag, phi = _baseline(series, link, theta, init)
    lam = _ar_filter(b, theta.beta, init.lambda_pre)
    T = series.T
    q = link.q
    cols = [np.ones(T)] + [ylag[:, i] for i in range(link.p)]
    if q:
        lam_padded = np.concatenate((np.full(q, init.lambda_pre), lam))
        cols += [lam_padded[q - j : q - j + T] for j in range(1, q + 1)]
    cols += [phi[:, j] for j in range(link.m)]
    drivers = np.column_stack(cols)
    if q:
        a = np.concatenate(([1.0], -np.asarray(theta.beta)))
        sens = lfilter([1.0], a, drivers, axis=0)
    else:
        sens = drivers
    return lam, sens
