"""End-to-end method variants.

* ``dslp``   - image layer separation with spatial gradients.
* ``vdslp``  - video (H, W, C, T) with spatial and temporal gradients.
* ``tv``     - anisotropic TV baseline: the same solver with beta = gamma = 0.
* ``idslp`` / ``ivdslp`` - denoise first, then separate the denoised input;
  the reported artifact layer is ``input - intrinsic``.

The denoiser here is a lightweight stand-in (median or bilateral), not a
patch-based denoiser.
"""
from dataclasses import dataclass, field
import time

import numpy as np
from scipy.ndimage import median_filter

from .metrics import evaluate
from .solver import SolverConfig, solve
from .tensor import as_tensor

VARIANTS = ("dslp", "vdslp", "tv", "idslp", "ivdslp")
DENOISERS = ("bilateral", "median")

# Standalone and two-stage alpha defaults for heavily compressed (quality ~10) input.
DSLP_ALPHA = 0.6
IDSLP_ALPHA = 0.3
IDSLP_STRENGTH = 25.0


@dataclass
class DenoiserSpec:
    kind: str = "bilateral"
    strength: float = IDSLP_STRENGTH  # noise sigma on the 0..255 scale

    def __post_init__(self):
        if self.kind not in DENOISERS:
            raise ValueError(f"unknown denoiser {self.kind!r}; expected one of {DENOISERS}")
        if not self.strength >= 0:
            raise ValueError("denoiser strength must be non-negative")


@dataclass
class PipelineSpec:
    variant: str = "dslp"
    solver: SolverConfig = field(default_factory=SolverConfig)
    denoiser: DenoiserSpec = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.variant in ("idslp", "ivdslp") and self.denoiser is None:
            raise ValueError(f"variant {self.variant} requires a denoiser")

    @classmethod
    def default(cls, variant, **solver_overrides):
        """Spec with the recommended alpha and denoiser for ``variant``."""
        two_stage = variant in ("idslp", "ivdslp")
        solver_overrides.setdefault("alpha", IDSLP_ALPHA if two_stage else DSLP_ALPHA)
        return cls(variant, SolverConfig(**solver_overrides), DenoiserSpec() if two_stage else None)

    def effective_config(self, ndim):
        cfg = self.solver
        if self.variant == "tv":
            cfg = cfg.replace(beta=0.0, gamma=0.0)
        if self.variant in ("vdslp", "ivdslp"):
            if ndim != 4:
                raise ValueError(f"variant {self.variant} needs a 4-order (H, W, C, T) input")
            cfg = cfg.replace(axes=(0, 1, 3))
        return cfg


@dataclass
class PipelineResult:
    intrinsic: np.ndarray
    artifact: np.ndarray
    solve: object
    denoised: np.ndarray = None
    metrics: object = None
    timings: dict = field(default_factory=dict)


def _bilateral_plane(x, sigma_range, sigma_space=1.5, radius=3):
    padded = np.pad(x, radius, mode="reflect")
    h, w = x.shape
    num = np.zeros_like(x)
    den = np.zeros_like(x)
    for dy in range(-radius, radius + 1):
        for dx in range(-radius, radius + 1):
            nb = padded[radius + dy:radius + dy + h, radius + dx:radius + dx + w]
            wgt = np.exp(-(dy * dy + dx * dx) / (2 * sigma_space ** 2)
                         - (nb - x) ** 2 / (2 * sigma_range ** 2))
            num += wgt * nb
            den += wgt
    return num / den


def _spatial_planes(x):
    """Yield (index, 2-D plane) over all non-spatial axes."""
    for idx in np.ndindex(*x.shape[2:]):
        yield idx, x[(slice(None), slice(None)) + idx]


def placeholder_denoiser(x, strength, kind="bilateral"):
    """Edge-preserving smoothing of each 2-D spatial plane.

    ``strength`` is a noise level on the 0..255 scale. ``bilateral`` uses it
    as the range sigma; ``median`` uses a window of radius
    ``ceil(strength / 25)``. Strength 0 returns the input unchanged.
    """
    x = np.asarray(x, dtype=np.float64)
    if strength < 0:
        raise ValueError("strength must be non-negative")
    if kind not in DENOISERS:
        raise ValueError(f"unknown denoiser {kind!r}")
    if strength == 0:
        return x.copy()
    out = np.empty_like(x)
    for idx, plane in _spatial_planes(x):
        sl = (slice(None), slice(None)) + idx
        if kind == "median":
            radius = int(np.ceil(strength / 25.0))
            out[sl] = median_filter(plane, size=2 * radius + 1, mode="reflect")
        else:
            out[sl] = _bilateral_plane(plane, strength / 255.0)
    return out


def run_pipeline(c, spec, reference=None, callback=None):
    """Run one variant on the compressed tensor ``c``.

    Metrics are computed only when a clean ``reference`` is supplied.
    """
    c = as_tensor(c)
    cfg = spec.effective_config(c.ndim)
    timings = {}
    denoised = None
    target = c
    if spec.variant in ("idslp", "ivdslp"):
        t0 = time.perf_counter()
        denoised = placeholder_denoiser(c, spec.denoiser.strength, spec.denoiser.kind)
        timings["denoise"] = time.perf_counter() - t0
        target = denoised
    result = solve(target, cfg, callback=callback)
    timings["solve"] = result.elapsed
    intrinsic = result.intrinsic
    artifact = c - intrinsic if denoised is not None else result.artifact
    metrics = None
    if reference is not None:
        t0 = time.perf_counter()
        metrics = evaluate(
            as_tensor(reference), intrinsic, axes=cfg.resolved_axes(c.ndim),
            iterations=result.iterations, final_residual=result.final_residual,
            converged=result.converged,
        )
        timings["metrics"] = time.perf_counter() - t0
    return PipelineResult(intrinsic, artifact, result, denoised, metrics, timings)


def amplify_artifact(artifact, gain=10.0):
    """Visualization: ``0.5 + gain * artifact`` clipped to [0, 1]."""
    return np.clip(0.5 + gain * np.asarray(artifact), 0.0, 1.0)
