"""Augmented-Lagrangian layer separation.

Solves

    min ||L_A||_F^2 + alpha ||F l_I||_1 + beta ||F l_I * F l_A||_1
        + gamma ||g - F l_I - F l_A||_F^2      s.t.  C = L_I + L_A

by splitting ``u = F l_I``, ``v = F l_A`` and alternating closed-form
updates (L_A, L_I, u, v) with multiplier ascent and a geometric penalty
``mu <- rho * mu``.
"""
import logging
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernels
from .fft_solver import build_denominator, la_rhs, li_rhs
from .gradient import FORWARD_DIFFERENCE, DerivativeFilter, GradientField, gradient
from .shrinkage import THRESHOLD_RULES, threshold_denominator
from .tensor import as_tensor, default_axes, default_channel_axis, frobenius_norm, l1_norm

log = logging.getLogger(__name__)


class DivergenceError(RuntimeError):
    """The constraint residual blew up; carries the residual history."""

    def __init__(self, message, history):
        super().__init__(message)
        self.history = list(history)


@dataclass
class SolverConfig:
    alpha: float = 0.6
    beta: float = 30.0
    gamma: float = 6.0
    mu0: float = 0.5
    rho: float = 1.25
    delta: float = 1e-7
    max_iters: int = 200
    axes: tuple = None  # None: spatial axes for images, plus time for 4-order video
    threshold_rule: str = "minimizer"
    filter_taps: tuple = (-1.0, 1.0)
    filter_anchor: int = 0

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be non-negative")
        if not self.mu0 > 0:
            raise ValueError("mu0 must be positive")
        if not self.rho > 1:
            raise ValueError("rho must exceed 1")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if int(self.max_iters) < 1:
            raise ValueError("max_iters must be a positive integer")
        self.max_iters = int(self.max_iters)
        if self.threshold_rule not in THRESHOLD_RULES:
            raise ValueError(f"threshold_rule must be one of {THRESHOLD_RULES}")
        if self.axes is not None:
            self.axes = tuple(int(a) for a in self.axes)
        self.filter_taps = tuple(float(t) for t in self.filter_taps)

    @property
    def filter(self):
        return DerivativeFilter(self.filter_taps, self.filter_anchor)

    def resolved_axes(self, ndim):
        return self.axes if self.axes is not None else default_axes(ndim)

    def replace(self, **changes):
        d = asdict(self)
        d.update(changes)
        return SolverConfig(**d)

    def to_dict(self):
        d = asdict(self)
        d["axes"] = None if self.axes is None else list(self.axes)
        d["filter_taps"] = list(self.filter_taps)
        return d


@dataclass
class SolverState:
    L_I: np.ndarray
    L_A: np.ndarray
    X: np.ndarray
    u: np.ndarray  # (J, *dims); ravel() is the stacked vector
    v: np.ndarray
    y1: np.ndarray
    y2: np.ndarray
    mu: float
    iter: int = 0
    residual_history: list = field(default_factory=list)

    @classmethod
    def zeros(cls, dims, n_axes, mu):
        dims = tuple(dims)
        z = lambda shape: np.zeros(shape)  # noqa: E731
        stacked = (n_axes,) + dims
        return cls(z(dims), z(dims), z(dims), z(stacked), z(stacked), z(stacked), z(stacked), mu)


@dataclass
class SolveResult:
    intrinsic: np.ndarray
    artifact: np.ndarray
    iterations: int
    final_residual: float
    converged: bool
    residual_history: list
    gap_history: list = field(default_factory=list)  # (||u - F l_I||, ||v - F l_A||)
    mu_history: list = field(default_factory=list)
    elapsed: float = 0.0
    config: SolverConfig = None


def residual(state, c):
    """Relative constraint residual; absolute when ``||C||_F == 0``."""
    r = frobenius_norm(c - state.L_I - state.L_A)
    nc = frobenius_norm(c)
    return r / nc if nc > 0 else r


def objective_value(state, config, g, filt=None):
    """Relaxed objective at the current layers (diagnostic only)."""
    filt = filt or config.filter
    axes = config.resolved_axes(state.L_I.ndim)
    fli = gradient(state.L_I, axes, filt, channel_axis=None).responses
    fla = gradient(state.L_A, axes, filt, channel_axis=None).responses
    g = g.responses if isinstance(g, GradientField) else np.asarray(g)
    g = g.reshape(fli.shape)
    la = state.L_A.ravel()
    rest = (g - fli - fla).ravel()
    return (
        float(np.dot(la, la))
        + config.alpha * l1_norm(fli)
        + config.beta * l1_norm(fli * fla)
        + config.gamma * float(np.dot(rest, rest))
    )


def _check_axes(c, axes, channel_axis):
    for a in axes:
        if not 0 <= a < c.ndim:
            raise ValueError(f"gradient axis {a} out of range for order-{c.ndim} input")
        if channel_axis is not None and a == channel_axis:
            raise ValueError(f"axis {a} is the channel axis")
    if len(set(axes)) != len(axes):
        raise ValueError(f"gradient axes must be distinct, got {axes}")


def solve(c, config=None, channel_axis="auto", callback=None):
    """Separate ``c`` into intrinsic and artifact layers.

    ``callback(state)`` runs after every iteration. Raises
    :class:`DivergenceError` when the residual stays 10x above its running
    minimum for 20 consecutive iterations or turns non-finite.
    """
    config = config or SolverConfig()
    c = as_tensor(c)
    if channel_axis == "auto":
        channel_axis = default_channel_axis(c.ndim)
    axes = config.resolved_axes(c.ndim)
    _check_axes(c, axes, channel_axis)
    filt = config.filter
    if filt != FORWARD_DIFFERENCE:
        log.debug("using derivative filter %s", filt)

    t0 = time.perf_counter()
    g = gradient(c, axes, filt, channel_axis=channel_axis).responses
    g_flat = g.ravel()
    den_i = build_denominator(c.shape, axes, filt, 1.0)
    state = SolverState.zeros(c.shape, len(axes), config.mu0)
    nc = frobenius_norm(c)
    fli = np.empty_like(g)
    fla = np.empty_like(g)
    gaps, mus = [], []
    best, above = np.inf, 0
    converged = False

    for t in range(config.max_iters):
        mu = state.mu
        mus.append(mu)
        den_a = build_denominator(c.shape, axes, filt, 2.0 / mu + 1.0)
        state.L_A = den_a.apply_inverse(la_rhs(state, c, axes, filt))
        state.L_I = den_i.apply_inverse(li_rhs(state, c, axes, filt))
        gradient(state.L_I, axes, filt, channel_axis=None, out=fli)
        gradient(state.L_A, axes, filt, channel_axis=None, out=fla)
        su, sv = kernels.uv_step(
            g_flat, state.u.reshape(-1), state.v.reshape(-1),
            state.y1.reshape(-1), state.y2.reshape(-1),
            fli.reshape(-1), fla.reshape(-1),
            config.alpha, config.beta, config.gamma, mu,
            threshold_denominator(config.threshold_rule, config.gamma, mu),
        )
        gap = c - state.L_I - state.L_A
        state.X += mu * gap
        state.mu = mu * config.rho
        state.iter = t + 1

        r = frobenius_norm(gap)
        r = r / nc if nc > 0 else r
        state.residual_history.append(r)
        gaps.append((float(np.sqrt(su)), float(np.sqrt(sv))))
        if callback is not None:
            callback(state)

        if not np.isfinite(r):
            raise DivergenceError(f"non-finite residual at iteration {t + 1}", state.residual_history)
        if r <= config.delta:
            converged = True
            break
        best = min(best, r)
        above = above + 1 if r > 10.0 * best else 0
        if above >= 20:
            raise DivergenceError(
                f"residual {r:.3e} exceeded 10x its minimum {best:.3e} for 20 iterations "
                f"(iteration {t + 1})",
                state.residual_history,
            )

    elapsed = time.perf_counter() - t0
    log.info(
        "solve: %d iterations, residual %.3e, converged=%s, %.2fs",
        state.iter, state.residual_history[-1], converged, elapsed,
    )
    return SolveResult(
        intrinsic=state.L_I,
        artifact=state.L_A,
        iterations=state.iter,
        final_residual=state.residual_history[-1],
        converged=converged,
        residual_history=state.residual_history,
        gap_history=gaps,
        mu_history=mus,
        elapsed=elapsed,
        config=config,
    )
