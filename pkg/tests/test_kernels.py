import numpy as np
import pytest

from spinn import _backend
from spinn.losses import loss_for
from spinn.network import NetworkConfig, NetworkParams, forward_batch, init_params
from spinn.optimizer import FitConfig, Problem, fit
from spinn.penalties import FAMILIES, PenaltySpec

from conftest import KINDS, make_dataset

compiled_only = pytest.mark.skipif("compiled" not in _backend.available(),
                                   reason="extension not built")


def test_backend_selection():
    assert _backend.get("python").__name__.endswith("_pyfit")
    assert _backend.NAME in ("python", "compiled")
    with pytest.raises(ValueError):
        _backend.get("fortran")


@pytest.mark.parametrize("kind", KINDS)
def test_loss_and_grad_against_finite_differences(kind, backend):
    ds = make_dataset(kind, n=30, d=4, seed=5, ties=True)
    prob = Problem(ds)
    p = init_params(NetworkConfig(4, (5, 3)), 3, std=0.6)
    value, grad, pred = prob.loss_and_grad(p, backend)
    assert value == pytest.approx(loss_for(ds.outcome, forward_batch(p, ds.X))[0], rel=1e-12)
    assert np.allclose(pred, forward_batch(p, ds.X), rtol=1e-12, atol=1e-14)
    theta = p.flatten()
    g = grad.flatten()
    h = 1e-5
    for k in range(theta.size):
        up, down = theta.copy(), theta.copy()
        up[k] += h
        down[k] -= h
        fu = prob.loss_and_grad(NetworkParams.from_flat(p.config, up), backend)[0]
        fd = prob.loss_and_grad(NetworkParams.from_flat(p.config, down), backend)[0]
        num = (fu - fd) / (2 * h)
        assert abs(g[k] - num) <= 1e-4 * max(abs(num), 1e-6)


@compiled_only
@pytest.mark.parametrize("kind", KINDS)
def test_compiled_matches_python_gradient(kind):
    ds = make_dataset(kind, n=50, d=6, seed=2, ties=True)
    prob = Problem(ds)
    p = init_params(NetworkConfig(6, (10, 5)), 1, std=0.3)
    a = prob.loss_and_grad(p, "python")
    b = prob.loss_and_grad(p, "compiled")
    assert a[0] == pytest.approx(b[0], rel=1e-13, abs=1e-15)
    assert np.allclose(a[1].flatten(), b[1].flatten(), rtol=1e-11, atol=1e-15)


@compiled_only
@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("family", FAMILIES)
def test_compiled_matches_python_fit(kind, family):
    ds = make_dataset(kind, n=60, d=8, seed=4)
    cfg = NetworkConfig(8, (6, 3))
    fc = FitConfig(alpha=0.005, learning_rate=0.01, epochs=150, seed=2)
    spec = PenaltySpec(family, 0.03)
    a = fit(ds, cfg, fc, spec, backend="python")
    b = fit(ds, cfg, fc, spec, backend="compiled")
    assert np.array_equal(a.selected, b.selected)
    if kind == "survival":  # output bias is unidentified under the partial likelihood
        a.params.biases[-1][:] = b.params.biases[-1]
    assert a.params.allclose(b.params, rtol=1e-6, atol=1e-9)
    assert np.allclose(a.objective_trace, b.objective_trace, rtol=1e-9)


@compiled_only
def test_forward_flat_agrees(rng):
    k = _backend.get("compiled")
    p = init_params(NetworkConfig(7, (4, 2)), 0, std=1.0)
    X = rng.normal(size=(25, 7))
    dims = np.asarray(p.config.dims, dtype=np.intp)
    out = k.forward_flat(p.flatten().copy(), dims, np.ascontiguousarray(X.T))
    assert np.allclose(out, forward_batch(p, X), rtol=1e-13, atol=1e-15)


def test_problem_columns_subsets_inputs():
    ds = make_dataset("regression", n=20, d=6)
    sub = Problem(ds).columns([1, 4])
    assert np.array_equal(sub.Xt, ds.X[:, [1, 4]].T)
    assert sub.Xt.flags.c_contiguous
