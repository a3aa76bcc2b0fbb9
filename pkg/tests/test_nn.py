import numpy as np
import pytest

from ramix.errors import NumericalError, ShapeError
from ramix.nn import (
    AdamState,
    Conv1D,
    Dense,
    Flatten,
    MaxPool1D,
    ReLU,
    Sequential,
    Sigmoid,
    StackNetwork,
    adam_step,
    bce_loss,
    grad_check,
    maxpool1d,
    relu,
    set_debug,
    sigmoid,
    weighted_mse_loss,
)
from ramix.nn import backend

BACKENDS = backend.available()


def conv_oracle(x, w, b):
    """Same-padded cross-correlation by explicit loops; x (B, L, C), w (M, C, N)."""
    B, L, C = x.shape
    M, _, N = w.shape
    h = N // 2
    out = np.empty((B, L, M))
    for bi in range(B):
        for m in range(M):
            for l in range(L):
                acc = b[m]
                for c in range(C):
                    for k in range(N):
                        j = l + k - h
                        if 0 <= j < L:
                            acc += w[m, c, k] * x[bi, j, c]
                out[bi, l, m] = acc
    return out


def _conv(C, M, N, name, seed=0):
    layer = Conv1D(C, M, N, rng=np.random.default_rng(seed), kernels=backend.get(name))
    return layer


@pytest.mark.parametrize("name", BACKENDS)
def test_conv_matches_oracle_on_random_shapes(name):
    rng = np.random.default_rng(2024)
    for _ in range(120):
        B, L, C, M = (int(v) for v in rng.integers(1, [3, 24, 4, 4], endpoint=True))
        N = int(rng.choice([1, 3, 5, 7, 9]))
        layer = _conv(C, M, N, name)
        layer.params["weight"][...] = rng.standard_normal((M, C, N))
        layer.params["bias"][...] = rng.standard_normal(M)
        x = rng.standard_normal((B, L, C))
        got = layer.forward(x)
        ref = conv_oracle(x, layer.params["weight"], layer.params["bias"])
        assert np.max(np.abs(got - ref)) <= 1e-13 * max(1.0, np.max(np.abs(ref)))


@pytest.mark.parametrize("name", BACKENDS)
def test_conv_impulse_response_is_reversed_kernel(name):
    layer = _conv(1, 1, 5, name)
    k = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
    layer.params["weight"][0, 0] = k
    x = np.zeros((1, 11, 1))
    x[0, 5, 0] = 1.0
    out = layer.forward(x)[0, :, 0]
    assert out[3:8].tolist() == k[::-1].tolist()
    assert np.all(out[:3] == 0) and np.all(out[8:] == 0)


@pytest.mark.parametrize("name", BACKENDS)
def test_conv_bias_only(name):
    layer = _conv(2, 3, 3, name)
    layer.params["weight"][...] = 0.0
    layer.params["bias"][...] = [0.5, -1.0, 2.0]
    out = layer.forward(np.random.default_rng(0).standard_normal((2, 7, 2)))
    assert np.array_equal(out, np.broadcast_to([0.5, -1.0, 2.0], (2, 7, 3)))


def test_conv_shape_errors():
    with pytest.raises(ValueError):
        Conv1D(1, 1, 4)
    with pytest.raises(ShapeError):
        Conv1D(2, 1, 3).forward(np.zeros((1, 5, 3)))


@pytest.mark.parametrize("name", BACKENDS)
def test_maxpool_hand_cases(name):
    pool = MaxPool1D(2, kernels=backend.get(name))
    assert pool.forward(np.array([1.0, 3, 2, 0]).reshape(1, 4, 1)).ravel().tolist() == [3, 2]
    assert pool.forward(np.array([5.0, 1, 4, 4, 9]).reshape(1, 5, 1)).ravel().tolist() == [5, 4, 9]
    dx = pool.backward(np.array([[[1.0], [2.0], [3.0]]]))
    assert dx.ravel().tolist() == [1.0, 0, 2.0, 0, 3.0]
    const = pool.forward(np.full((1, 6, 2), 7.0))
    assert const.shape == (1, 3, 2) and np.all(const == 7.0)


def test_maxpool_functional():
    out, _ = maxpool1d(np.array([1.0, 3, 2, 0]).reshape(1, 4, 1))
    assert out.ravel().tolist() == [3, 2]
    with pytest.raises(ValueError):
        maxpool1d(np.zeros((1, 4, 1)), window=2, stride=1)
    with pytest.raises(ShapeError):
        maxpool1d(np.zeros((1, 0, 1)))


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled kernels not built")
def test_backend_parity():
    np_k, c_k = backend.get("numpy"), backend.get("cython")
    rng = np.random.default_rng(5)
    for _ in range(20):
        B, L, C, M = (int(v) for v in rng.integers(1, [4, 60, 6, 6], endpoint=True))
        N = int(rng.choice([1, 3, 9]))
        x = rng.standard_normal((B, L, C))
        w = rng.standard_normal((M, N, C))
        b = rng.standard_normal(M)
        o1, c1 = np_k.conv1d_forward(x, w, b)
        o2, c2 = c_k.conv1d_forward(x, w, b)
        assert np.allclose(o1, o2, rtol=0, atol=1e-12)
        dout = rng.standard_normal(o1.shape)
        for g1, g2 in zip(np_k.conv1d_backward(dout, c1, w, True), c_k.conv1d_backward(dout, c2, w, True)):
            assert np.allclose(g1, g2, rtol=0, atol=1e-11)
        window = int(rng.integers(1, 4, endpoint=True))
        p1, i1 = np_k.maxpool_forward(x, window)
        p2, i2 = c_k.maxpool_forward(x, window)
        assert np.array_equal(p1, p2)
        d = rng.standard_normal(p1.shape)
        assert np.array_equal(np_k.maxpool_backward(d, i1, L), c_k.maxpool_backward(d, i2, L))


def test_activations():
    assert relu([-1.0, 0.0, 2.0]).tolist() == [0.0, 0.0, 2.0]
    assert sigmoid(0.0) == 0.5
    big = sigmoid(np.array([50.0, -50.0, 1000.0, -1000.0]))
    assert np.all(np.isfinite(big))
    assert abs(big[0] - 1.0) < 1e-15 and abs(big[1]) < 1e-15


def test_bce():
    loss, _ = bce_loss(np.array([100.0]), np.array([1.0]))
    assert loss < 1e-40
    loss, _ = bce_loss(np.zeros(4), np.array([0.0, 1.0, 0.0, 1.0]))
    assert loss == pytest.approx(np.log(2.0), abs=1e-15)
    rng = np.random.default_rng(0)
    z = rng.uniform(-5, 5, (8, 4))
    y = (rng.random((8, 4)) > 0.5).astype(float)
    p = 1 / (1 + np.exp(-z))
    naive = -np.mean(y * np.log(p) + (1 - y) * np.log(1 - p))
    assert abs(bce_loss(z, y)[0] - naive) < 1e-10
    loss, _ = bce_loss(np.array([1e4, -1e4]), np.array([0.0, 1.0]))
    assert np.isfinite(loss)


def test_weighted_mse():
    assert weighted_mse_loss([0.2, 0.4], [0.2, 0.4])[0] == 0.0
    p, t = np.array([0.1, 0.9, 0.3]), np.array([0.0, 1.0, 1.0])
    assert weighted_mse_loss(p, t, np.ones(3))[0] == pytest.approx(np.mean((p - t) ** 2), abs=1e-16)
    assert weighted_mse_loss([1.0, 0.0], [0.0, 0.0], [1.0, 3.0])[0] == 0.25
    with pytest.raises(ValueError):
        weighted_mse_loss([1.0], [0.0], [-1.0])
    with pytest.raises(ValueError):
        weighted_mse_loss([1.0], [0.0], [0.0])


def test_adam():
    p = {"w": np.array([1.0, -2.0])}
    st = AdamState()
    adam_step(st, p, {"w": np.zeros(2)})
    assert p["w"].tolist() == [1.0, -2.0]
    p = {"w": np.array([1.0])}
    adam_step(AdamState(lr=0.001), p, {"w": np.array([1.0])})
    assert p["w"][0] == pytest.approx(1.0 - 0.001, abs=1e-10)
    st = AdamState(lr=0.01)
    trace = []
    for _ in range(20):
        adam_step(st, p, {"w": np.array([2.0])})
        trace.append(p["w"][0])
    assert np.all(np.diff(trace) < 0)
    with pytest.raises(ShapeError):
        adam_step(st, p, {"w": np.zeros(3)})


def test_debug_mode_flags_non_finite():
    layer = Dense(2, 1)
    layer.params["weight"][...] = np.inf
    set_debug(True)
    try:
        with pytest.raises(NumericalError):
            with np.errstate(invalid="ignore"):
                layer.forward(np.array([[1.0, -1.0]]))
    finally:
        set_debug(False)


# -- gradient checks


def _targets(rng, shape):
    return (rng.random(shape) > 0.5).astype(float)


def test_gradcheck_dense_bce():
    rng = np.random.default_rng(0)
    net = StackNetwork([Dense(6, 3, rng=rng, init="glorot")], loss="bce")
    x = rng.standard_normal((5, 6))
    # the loss is smooth in the weights, so a wide stencil is safe and more accurate
    assert grad_check(net, x, _targets(rng, (5, 3)), epsilon=1e-3) < 1e-7


def test_gradcheck_dense_sigmoid_mse():
    rng = np.random.default_rng(1)
    net = StackNetwork([Dense(5, 3, rng=rng), Sigmoid()], loss="mse", weights=rng.uniform(0.1, 1.0, (4, 3)))
    assert grad_check(net, rng.standard_normal((4, 5)), rng.random((4, 3)), epsilon=1e-3) < 1e-7


@pytest.mark.parametrize("name", BACKENDS)
def test_gradcheck_conv_mse(name):
    rng = np.random.default_rng(2)
    conv = Conv1D(2, 3, 5, rng=rng, kernels=backend.get(name))
    conv.params["bias"][...] = rng.standard_normal(3)
    net = StackNetwork([conv, Flatten()], loss="mse")
    x = rng.standard_normal((2, 9, 2))
    assert grad_check(net, x, rng.standard_normal((2, 27))) < 1e-7


@pytest.mark.parametrize("name", BACKENDS)
def test_gradcheck_every_layer_type(name):
    rng = np.random.default_rng(3)
    k = backend.get(name)
    layers = [
        Conv1D(1, 3, 3, rng=rng, kernels=k),
        ReLU(),
        MaxPool1D(2, kernels=k),
        Conv1D(3, 2, 3, rng=rng, kernels=k),
        ReLU(),
        MaxPool1D(3, kernels=k),
        Flatten(),
        Dense(6, 4, rng=rng),
        ReLU(),
        Dense(4, 2, rng=rng, init="glorot"),
    ]
    for layer in layers:
        if "bias" in layer.params:
            layer.params["bias"][...] = rng.uniform(0.05, 0.2, layer.params["bias"].shape)
    net = StackNetwork(layers, loss="bce")
    x = rng.standard_normal((3, 17, 1))
    assert grad_check(net, x, _targets(rng, (3, 2))) < 1e-5


def test_sequential_naming():
    seq = Sequential([Dense(2, 3), ReLU(), Dense(3, 1)])
    assert list(seq.named_params("h.")) == ["h.0.weight", "h.0.bias", "h.2.weight", "h.2.bias"]
