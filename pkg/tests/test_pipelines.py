import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from layersplit import SolverConfig, solve
from layersplit.codec import blocking_ratio, synthesize_blocking
from layersplit.gradient import gradient
from layersplit.metrics import ssim
from layersplit.pipelines import (
    DSLP_ALPHA, IDSLP_ALPHA, IDSLP_STRENGTH, DenoiserSpec, PipelineSpec, amplify_artifact,
    placeholder_denoiser, run_pipeline,
)
import corpus


def cosine(a, b):
    return float((a * b).sum() / np.linalg.norm(a) / np.linalg.norm(b))


def temporal_l1(x):
    return float(np.abs(gradient(x, (3,)).responses).sum())


def test_spec_invariants():
    assert PipelineSpec.default("dslp").solver.alpha == DSLP_ALPHA == 0.6
    idslp = PipelineSpec.default("idslp")
    assert idslp.solver.alpha == IDSLP_ALPHA == 0.3
    assert idslp.denoiser.strength == IDSLP_STRENGTH == 25
    with pytest.raises(ValueError):
        PipelineSpec("idslp", SolverConfig(), None)
    with pytest.raises(ValueError):
        PipelineSpec("nope", SolverConfig(), None)
    with pytest.raises(ValueError):
        DenoiserSpec("bm3d", 25)
    tv = PipelineSpec.default("tv", beta=30, gamma=6).effective_config(2)
    assert tv.beta == 0 and tv.gamma == 0
    with pytest.raises(ValueError):
        PipelineSpec.default("vdslp").effective_config(2)
    assert PipelineSpec.default("vdslp").effective_config(4).resolved_axes(4) == (0, 1, 3)


def test_tv_variant_is_forwarding():
    c = synthesize_blocking(corpus.photo("moon", 48), 10)
    r = run_pipeline(c, PipelineSpec.default("tv"))
    ref = solve(c, SolverConfig(alpha=0.6, beta=0, gamma=0))
    assert r.intrinsic.tobytes() == ref.intrinsic.tobytes()


def test_artifact_free_flat_patches_pass_through():
    yy, xx = np.mgrid[0:48, 0:48]
    c = 0.2 + 0.15 * (yy // 16) + 0.1 * (xx // 12 % 2)
    r = run_pipeline(c, PipelineSpec.default("dslp"), reference=c)
    assert ssim(r.intrinsic, c) > 0.98
    assert r.metrics.ssim > 0.98


def test_idslp_reports_artifact_against_original():
    c = synthesize_blocking(corpus.photo("moon", 48), 10)
    r = run_pipeline(c, PipelineSpec.default("idslp"), reference=corpus.photo("moon", 48))
    assert r.denoised is not None and "denoise" in r.timings
    np.testing.assert_allclose(r.artifact, c - r.intrinsic, atol=0)
    assert r.metrics.extra["iterations"] == r.solve.iterations


@pytest.mark.parametrize("name", ("sin", "radial", "ramp", "blobs", "moon", "page", "rocket"))
@pytest.mark.parametrize("quality", (10, 20))
def test_deblocking_lowers_blocking_signature(name, quality):
    c = synthesize_blocking(corpus.image(name), quality)
    r = run_pipeline(c, PipelineSpec.default("dslp"))
    assert blocking_ratio(r.intrinsic) < blocking_ratio(c)


@pytest.mark.parametrize("amplitude,period,alpha", [(0.2, 17.0, 0.6), (0.2, 17.0, 1.0), (0.3, 11.0, 1.0)])
def test_dslp_artifact_beats_tv_residual_on_texture(amplitude, period, alpha):
    clean = corpus.textured(64, amplitude, period)
    c = synthesize_blocking(clean, 10)
    true = c - clean
    dslp = run_pipeline(c, PipelineSpec.default("dslp", alpha=alpha))
    tv = run_pipeline(c, PipelineSpec.default("tv", alpha=alpha))
    assert cosine(dslp.artifact, true) > cosine(c - tv.intrinsic, true)
    assert ssim(clean, dslp.intrinsic) > ssim(clean, tv.intrinsic)


def test_vdslp_smooths_time():
    _, video = corpus.static_video(n=48, frames=8)
    r = run_pipeline(video, PipelineSpec.default("vdslp"))
    assert r.solve.converged
    assert temporal_l1(r.intrinsic) < temporal_l1(video)


def test_ivdslp_runs_on_video():
    _, video = corpus.static_video(n=32, frames=4)
    r = run_pipeline(video, PipelineSpec.default("ivdslp"))
    assert r.intrinsic.shape == video.shape and r.denoised.shape == video.shape


@pytest.mark.parametrize("kind", ("bilateral", "median"))
def test_denoiser_strength_zero_is_identity(rng, kind):
    x = rng.random((12, 10, 3))
    np.testing.assert_array_equal(placeholder_denoiser(x, 0, kind), x)


@settings(max_examples=15)
@given(arrays(np.float64, (16, 16), elements=st.floats(0, 1)), st.sampled_from(["bilateral", "median"]),
       st.floats(5, 60))
def test_denoiser_reduces_gradient_l1(x, kind, strength):
    before = np.abs(gradient(x, (0, 1)).responses).sum()
    after = np.abs(gradient(placeholder_denoiser(x, strength, kind), (0, 1)).responses).sum()
    assert after <= before + 1e-9


@pytest.mark.parametrize("strength", (1, 25))
def test_median_removes_impulse(strength):
    x = np.full((9, 9), 0.3)
    x[4, 4] = 1.0
    np.testing.assert_allclose(placeholder_denoiser(x, strength, "median"), 0.3)


def test_denoiser_validation():
    with pytest.raises(ValueError):
        placeholder_denoiser(np.zeros((4, 4)), -1)
    with pytest.raises(ValueError):
        placeholder_denoiser(np.zeros((4, 4)), 5, "wiener")


def test_amplify_artifact():
    a = np.array([[0.0, 0.01, -0.2]])
    np.testing.assert_allclose(amplify_artifact(a), [[0.5, 0.6, 0.0]])
