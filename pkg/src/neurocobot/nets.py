"""Dense feed-forward networks with hand-written reverse-mode gradients.

Small float64 MLPs carry every learned object in this package: the policy and
value heads of the threshold-tuning agent and the conflict decoder. Training
is plain Adam. A finite-difference checker is included because the analytic
gradients feed the agent's policy/value updates and must be verifiable
independently of any framework.
"""

from __future__ import annotations

import numpy as np

ACTIVATIONS = ("relu", "tanh", "linear", "softmax")

NET_MAGIC = "densenet-v1"


class DivergenceError(RuntimeError):
    """Non-finite values showed up where training should have been stable."""


def _glorot(rng: np.random.Generator, fan_out: int, fan_in: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_out, fan_in))


def _apply_activation(name: str, z: np.ndarray) -> np.ndarray:
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "tanh":
        return np.tanh(z)
    if name == "linear":
        return z
    if name == "softmax":
        shifted = z - z.max(axis=1, keepdims=True)
        e = np.exp(shifted)
        return e / e.sum(axis=1, keepdims=True)
    raise ValueError(f"unknown activation {name!r}")


def _activation_backward(name: str, z: np.ndarray, a: np.ndarray, upstream: np.ndarray) -> np.ndarray:
    """Gradient wrt pre-activation z given upstream = dL/da."""
    if name == "relu":
        return upstream * (z > 0.0)
    if name == "tanh":
        return upstream * (1.0 - a * a)
    if name == "linear":
        return upstream
    if name == "softmax":
        # full Jacobian: dz_i = p_i * (u_i - sum_j u_j p_j), row-wise
        dot = (upstream * a).sum(axis=1, keepdims=True)
        return a * (upstream - dot)
    raise ValueError(f"unknown activation {name!r}")


class DenseNet:
    """Row-major dense MLP.

    ``weights[l]`` has shape (out, in); forward works on a single vector or a
    batch of row vectors. Softmax is only legal as the final activation.
    """

    def __init__(self, weights, biases, activations, input_dim):
        weights = [np.asarray(w, dtype=np.float64) for w in weights]
        biases = [np.asarray(b, dtype=np.float64) for b in biases]
        activations = list(activations)
        if not (len(weights) == len(biases) == len(activations)) or not weights:
            raise ValueError("weights, biases and activations must be equal-length and non-empty")
        prev = input_dim
        for i, (w, b, act) in enumerate(zip(weights, biases, activations)):
            if w.ndim != 2 or b.ndim != 1:
                raise ValueError(f"layer {i}: weights must be 2-D and biases 1-D")
            if w.shape[1] != prev or w.shape[0] != b.shape[0]:
                raise ValueError(
                    f"layer {i}: shape {w.shape} does not chain from width {prev}"
                )
            if act not in ACTIVATIONS:
                raise ValueError(f"layer {i}: unknown activation {act!r}")
            if act == "softmax" and i != len(weights) - 1:
                raise ValueError("softmax is only permitted on the final layer")
            prev = w.shape[0]
        self.weights = weights
        self.biases = biases
        self.activations = activations
        self.input_dim = int(input_dim)

    @classmethod
    def create(cls, widths, activations, seed, final_scale: float = 1.0) -> "DenseNet":
        """Seed-reproducible net: Glorot-uniform weights, zero biases.

        ``widths`` is (input, hidden..., output). ``final_scale`` shrinks the
        last layer's weights (useful to start a policy head near its midpoint).
        """
        if len(widths) < 2 or len(activations) != len(widths) - 1:
            raise ValueError("need len(widths) >= 2 and one activation per layer")
        rng = np.random.default_rng(seed)
        weights, biases = [], []
        for i, (fan_in, fan_out) in enumerate(zip(widths[:-1], widths[1:])):
            w = _glorot(rng, fan_out, fan_in)
            if i == len(widths) - 2:
                w *= final_scale
            weights.append(w)
            biases.append(np.zeros(fan_out))
        return cls(weights, biases, activations, widths[0])

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    @property
    def output_dim(self) -> int:
        return self.weights[-1].shape[0]

    def copy(self) -> "DenseNet":
        return DenseNet(
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            list(self.activations),
            self.input_dim,
        )

    def _as_batch(self, x) -> tuple[np.ndarray, bool]:
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        if single:
            x = x[None, :]
        if x.ndim != 2 or x.shape[1] != self.input_dim:
            raise ValueError(f"input width {x.shape} does not match input_dim {self.input_dim}")
        return x, single

    def forward(self, x) -> np.ndarray:
        x, single = self._as_batch(x)
        a = x
        for w, b, act in zip(self.weights, self.biases, self.activations):
            a = _apply_activation(act, a @ w.T + b)
        return a[0] if single else a

    def _forward_trace(self, x: np.ndarray):
        """Returns (pre-activations z_1..z_L, activations a_0..a_L) for a batch."""
        zs, acts = [], [x]
        a = x
        for w, b, act in zip(self.weights, self.biases, self.activations):
            z = a @ w.T + b
            a = _apply_activation(act, z)
            zs.append(z)
            acts.append(a)
        return zs, acts

    def backward(self, x, upstream):
        """Reverse-mode pass.

        ``upstream`` is dL/d(output), one row per input row. Returns
        (grads, input_grad) where grads is a list of (dW, db) summed over the
        batch and input_grad matches the shape of ``x``.
        """
        x, single = self._as_batch(x)
        upstream = np.asarray(upstream, dtype=np.float64)
        if single and upstream.ndim == 1:
            upstream = upstream[None, :]
        if upstream.shape != (x.shape[0], self.output_dim):
            raise ValueError(
                f"upstream shape {upstream.shape} does not match output ({x.shape[0]}, {self.output_dim})"
            )
        zs, acts = self._forward_trace(x)
        grads = [None] * self.n_layers
        delta = upstream
        for l in range(self.n_layers - 1, -1, -1):
            dz = _activation_backward(self.activations[l], zs[l], acts[l + 1], delta)
            grads[l] = (dz.T @ acts[l], dz.sum(axis=0))
            delta = dz @ self.weights[l]
        return grads, (delta[0] if single else delta)

    # -- persistence: text header + raw little-endian float64, bit-exact --

    def save(self, path) -> None:
        header = [NET_MAGIC, f"input_dim {self.input_dim}", f"layers {self.n_layers}"]
        for w, act in zip(self.weights, self.activations):
            header.append(f"layer {w.shape[0]} {w.shape[1]} {act}")
        header.append("data")
        blob = b"".join(
            np.ascontiguousarray(arr).astype("<f8", copy=False).tobytes()
            for w, b in zip(self.weights, self.biases)
            for arr in (w, b)
        )
        with open(path, "wb") as fh:
            fh.write("\n".join(header).encode("ascii") + b"\n")
            fh.write(blob)

    @classmethod
    def load(cls, path) -> "DenseNet":
        with open(path, "rb") as fh:
            raw = fh.read()
        head, sep, _ = raw.partition(b"data\n")
        if not sep:
            raise ValueError(f"{path}: missing data section")
        lines = head.decode("ascii").strip().splitlines()
        if not lines or lines[0] != NET_MAGIC:
            raise ValueError(f"{path}: not a {NET_MAGIC} file")
        input_dim = int(lines[1].split()[1])
        n_layers = int(lines[2].split()[1])
        shapes, activations = [], []
        for line in lines[3 : 3 + n_layers]:
            _, out, inp, act = line.split()
            shapes.append((int(out), int(inp)))
            activations.append(act)
        blob = raw[len(head) + len(sep) :]
        weights, biases, offset = [], [], 0
        for out, inp in shapes:
            w = np.frombuffer(blob, dtype="<f8", count=out * inp, offset=offset).reshape(out, inp)
            offset += out * inp * 8
            b = np.frombuffer(blob, dtype="<f8", count=out, offset=offset)
            offset += out * 8
            weights.append(w.copy())
            biases.append(b.copy())
        return cls(weights, biases, activations, input_dim)


class AdamState:
    """First/second-moment accumulators mirroring a net's parameter shapes."""

    def __init__(self, net: DenseNet, learning_rate: float, beta1: float = 0.9,
                 beta2: float = 0.999, epsilon: float = 1e-8):
        if not (0.0 < beta1 < 1.0 and 0.0 < beta2 < 1.0):
            raise ValueError("moment decay rates must lie in (0, 1)")
        self.learning_rate = float(learning_rate)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.epsilon = float(epsilon)
        self.step_count = 0
        self.m = [(np.zeros_like(w), np.zeros_like(b)) for w, b in zip(net.weights, net.biases)]
        self.v = [(np.zeros_like(w), np.zeros_like(b)) for w, b in zip(net.weights, net.biases)]


def opt_step(net: DenseNet, grads, state: AdamState) -> None:
    """One Adam update in place; rejects non-finite gradients."""
    if len(grads) != net.n_layers:
        raise ValueError("gradient list length does not match layer count")
    for (dw, db), w, b in zip(grads, net.weights, net.biases):
        if dw.shape != w.shape or db.shape != b.shape:
            raise ValueError("gradient shapes do not mirror parameter shapes")
        if not (np.all(np.isfinite(dw)) and np.all(np.isfinite(db))):
            raise DivergenceError("non-finite gradient")
    state.step_count += 1
    t = state.step_count
    b1, b2, lr, eps = state.beta1, state.beta2, state.learning_rate, state.epsilon
    bias1 = 1.0 - b1**t
    bias2 = 1.0 - b2**t
    for l, (dw, db) in enumerate(grads):
        for k, g, param in ((0, dw, net.weights[l]), (1, db, net.biases[l])):
            m = state.m[l][k]
            v = state.v[l][k]
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            param -= lr * (m / bias1) / (np.sqrt(v / bias2) + eps)
            if not np.all(np.isfinite(param)):
                raise DivergenceError("parameters diverged to non-finite values")


def finite_diff_check(net: DenseNet, x, loss, loss_grad, h: float = 1e-5) -> float:
    """Max relative error between analytic parameter gradients and central differences.

    ``loss`` maps the net output to a scalar; ``loss_grad`` is its gradient wrt
    the output (the analytic upstream). Relative error uses
    |analytic - numeric| / max(|analytic|, |numeric|, 1e-8) per parameter.
    """
    x = np.asarray(x, dtype=np.float64)
    y = net.forward(x)
    grads, _ = net.backward(x, np.asarray(loss_grad(y), dtype=np.float64))
    worst = 0.0
    for l in range(net.n_layers):
        for g, param in ((grads[l][0], net.weights[l]), (grads[l][1], net.biases[l])):
            flat = param.reshape(-1)
            gflat = g.reshape(-1)
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + h
                hi = loss(net.forward(x))
                flat[i] = orig - h
                lo = loss(net.forward(x))
                flat[i] = orig
                numeric = (hi - lo) / (2.0 * h)
                err = abs(gflat[i] - numeric) / max(abs(gflat[i]), abs(numeric), 1e-8)
                worst = max(worst, err)
    return worst
