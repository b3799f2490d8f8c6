"""Portfolio-level quantities: delta equivalents, risk reports, VaR decomposition.

The engine consumes one vector: the delta-equivalent exposure of the
portfolio to each risk factor.  The helpers here build that vector for
the common cases (option books via spot times sensitivity, cash equity
books, aggregation across businesses) and wrap the model dispatch needed
to produce a full report from any supported model object.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from . import elliptic, mixture as mixture_mod, student as student_mod
from .errors import DimensionError, DomainError
from .linalg import quadratic_form

__all__ = [
    "Position",
    "delta_equivalents",
    "equity_deltas",
    "business_unit_deltas",
    "IncrementalVar",
    "incremental_var",
    "RiskReport",
    "risk_report",
]


@dataclass(frozen=True)
class Position:
    """One underlying: spot level and portfolio dV/dX at that spot."""

    spot: float
    sensitivity: float
    label: str = ""

    def __post_init__(self):
        if not (math.isfinite(self.spot) and self.spot > 0.0):
            raise DomainError(f"spot must be positive, got {self.spot!r}")
        if not math.isfinite(self.sensitivity):
            raise DomainError(f"sensitivity must be finite, got {self.sensitivity!r}")


def delta_equivalents(positions: Sequence[Position]) -> np.ndarray:
    """delta_i = spot_i * dV/dX_i, the exposure to each factor's return."""
    if not positions:
        raise DomainError("need at least one position")
    return np.array([p.spot * p.sensitivity for p in positions], dtype=np.float64)


def equity_deltas(shares, prices) -> np.ndarray:
    """Cash equity book: delta_i = shares_i * price_i."""
    w = np.asarray(shares, dtype=np.float64)
    s = np.asarray(prices, dtype=np.float64)
    if w.ndim != 1 or s.ndim != 1 or w.shape != s.shape:
        raise DimensionError(
            f"shares and prices must be equal-length vectors, got {w.shape} and {s.shape}"
        )
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(s))):
        raise DomainError("shares and prices must be finite")
    if np.any(s <= 0.0):
        raise DomainError("prices must be positive")
    return w * s


def business_unit_deltas(count: int) -> np.ndarray:
    """Aggregation vector over business-unit pnls: all ones."""
    if not isinstance(count, int) or count < 1:
        raise DomainError(f"count must be an integer >= 1, got {count!r}")
    return np.ones(count, dtype=np.float64)


@dataclass(frozen=True)
class IncrementalVar:
    """Euler decomposition of VaR: contributions[i] = delta[i] * gamma[i]."""

    gamma: np.ndarray
    contributions: np.ndarray
    total: float


def _require_centered(mu: np.ndarray) -> None:
    if float(np.max(np.abs(mu))) != 0.0:
        raise DomainError(
            "incremental VaR requires mu = 0: the closed-form gradient and the "
            "Euler identity rely on VaR being homogeneous in the exposures"
        )


def incremental_var(model, delta, alpha: float) -> IncrementalVar:
    """Per-factor VaR gradient gamma and Euler contributions, mu = 0 only.

    For an elliptic model the gradient is closed-form,
    gamma = q * Sigma delta / sqrt(delta Sigma delta^t), and the
    contributions sum to VaR exactly.  For a mixture the gradient comes
    from central finite differences on the mixture VaR (step scaled by
    the exposure norm); homogeneity still makes the contributions sum to
    VaR, up to differencing error.
    """
    d = np.asarray(delta, dtype=np.float64)
    if d.ndim != 1:
        raise DimensionError(f"delta must be a vector, got shape {d.shape}")

    if isinstance(model, student_mod.StudentParams):
        model = model.to_model()

    if isinstance(model, elliptic.EllipticModel):
        _require_centered(model.mu)
        if d.shape[0] != model.dimension:
            raise DimensionError(
                f"delta has length {d.shape[0]}, model dimension is {model.dimension}"
            )
        q = elliptic.quantile_multiplier(model.generator, alpha)
        qf = quadratic_form(d, model.sigma)
        if qf == 0.0:
            raise DomainError("delta has zero volatility; no VaR to decompose")
        vol = math.sqrt(qf)
        gamma = q * (model.sigma @ d) / vol
        contributions = d * gamma
        return IncrementalVar(gamma=gamma, contributions=contributions, total=q * vol)

    if isinstance(model, mixture_mod.MixtureModel):
        for _, comp in model.components:
            _require_centered(comp.mu)
        total = mixture_mod.mixture_var(model, d, alpha)
        step = 1e-6 * float(np.linalg.norm(d))
        if step == 0.0:
            raise DomainError("delta is zero; no VaR to decompose")
        gamma = np.empty_like(d)
        for i in range(d.shape[0]):
            bump = np.zeros_like(d)
            bump[i] = step
            up = mixture_mod.mixture_var(model, d + bump, alpha)
            down = mixture_mod.mixture_var(model, d - bump, alpha)
            gamma[i] = (up - down) / (2.0 * step)
        return IncrementalVar(gamma=gamma, contributions=d * gamma, total=total)

    raise DomainError(f"unsupported model type {type(model).__name__}")


@dataclass(frozen=True)
class RiskReport:
    """One (model, alpha) row of risk numbers for a fixed exposure vector.

    ``mean`` is E[pnl], ``volatility`` the dispersion scale of pnl (for a
    mixture: the weight-averaged component scale), ``quantile`` the
    implied multiplier (var + mean) / volatility.
    """

    model: str
    alpha: float
    mean: float
    volatility: float
    quantile: float
    var: float
    es: float

    def __post_init__(self):
        if not (math.isfinite(self.volatility) and self.volatility > 0.0):
            raise DomainError(f"volatility must be positive, got {self.volatility!r}")
        slack = 1e-9 * max(1.0, abs(self.var))
        if not self.es >= self.var - slack:
            raise DomainError(
                f"expected shortfall {self.es!r} is below VaR {self.var!r}"
            )

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RiskReport":
        return cls(**data)


def risk_report(model, delta, alpha: float) -> RiskReport:
    """Compute VaR and ES for any supported model and wrap them in a report."""
    d = np.asarray(delta, dtype=np.float64)

    if isinstance(model, student_mod.StudentParams):
        model = model.to_model()

    if isinstance(model, (elliptic.EllipticModel, mixture_mod.MixtureModel)):
        if d.ndim != 1 or d.shape[0] != model.dimension:
            raise DimensionError(
                f"delta must be a vector of length {model.dimension}, got shape {d.shape}"
            )

    if isinstance(model, elliptic.EllipticModel):
        mean = float(d @ model.mu)
        qf = quadratic_form(d, model.sigma)
        if qf == 0.0:
            raise DomainError("delta has zero volatility")
        vol = math.sqrt(qf)
        q = elliptic.quantile_multiplier(model.generator, alpha)
        v = elliptic.var(model, d, alpha)
        es = elliptic.expected_shortfall(model, d, alpha)
        return RiskReport(
            model=model.generator.name,
            alpha=float(alpha),
            mean=mean,
            volatility=vol,
            quantile=q,
            var=v,
            es=es,
        )

    if isinstance(model, mixture_mod.MixtureModel):
        v = mixture_mod.mixture_var(model, d, alpha)
        es = mixture_mod.mixture_expected_shortfall(model, d, alpha, var=v)
        mean = 0.0
        pooled = 0.0
        for w, comp in model.components:
            mean += w * float(d @ comp.mu)
            pooled += w * quadratic_form(d, comp.sigma)
        vol = math.sqrt(pooled)
        label = "mixture(" + ", ".join(
            f"{w:g}*{comp.generator.name}" for w, comp in model.components
        ) + ")"
        return RiskReport(
            model=label,
            alpha=float(alpha),
            mean=mean,
            volatility=vol,
            quantile=(v + mean) / vol,
            var=v,
            es=es,
        )

    raise DomainError(f"unsupported model type {type(model).__name__}")
