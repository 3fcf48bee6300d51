"""Parameter containers, gated cells, Adam, and the finite-difference harness.

Parameters live in a :class:`ParameterSet`; per-parameter learning-rate
multipliers implement the smaller step size used for expectation-dictionary
atoms.  Checkpoints are a JSON manifest plus a little-endian float64 blob and
round-trip bit-exactly, Adam moments included.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping

import numpy as np

from .autodiff import (
    ShapeError,
    Tensor,
    add,
    matmul,
    mul,
    sigmoid,
    slice_cols,
    tanh,
    transpose,
)


class ParameterSet:
    """Named trainable tensors with per-parameter learning-rate multipliers."""

    def __init__(self) -> None:
        self._params: dict[str, Tensor] = {}
        self._multipliers: dict[str, float] = {}

    def add(self, name: str, value: np.ndarray, multiplier: float = 1.0) -> Tensor:
        if name in self._params:
            raise ValueError(f"duplicate parameter name {name!r}")
        if multiplier <= 0:
            raise ValueError(f"{name}: multiplier must be positive")
        t = Tensor(np.asarray(value, dtype=np.float64), requires_grad=True)
        self._params[name] = t
        self._multipliers[name] = float(multiplier)
        return t

    def __getitem__(self, name: str) -> Tensor:
        return self._params[name]

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def names(self) -> list[str]:
        return sorted(self._params)

    def multiplier(self, name: str) -> float:
        return self._multipliers[name]

    def zero_grad(self) -> None:
        for t in self._params.values():
            t.grad = None

    def n_values(self) -> int:
        return sum(t.data.size for t in self._params.values())


@dataclass
class AdamState:
    """Adam moments plus the schedule constants."""

    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    base_lr: float = 5e-4
    decay: float = 0.8
    decay_every: int = 5  # epochs
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)

    def lr_at_epoch(self, epoch: int) -> float:
        return self.base_lr * self.decay ** (epoch // self.decay_every)


def adam_step(params: ParameterSet, state: AdamState, lr: float | None = None) -> None:
    """One Adam update from the gradients currently held by ``params``.

    Parameters are visited in sorted-name order; a parameter with no gradient
    (never touched by the loss) is left untouched along with its moments.
    """
    state.step += 1
    t = state.step
    lr = state.base_lr if lr is None else lr
    for name in params.names():
        tensor = params[name]
        g = tensor.grad
        if g is None:
            g = np.zeros_like(tensor.data)
        m = state.m.setdefault(name, np.zeros_like(tensor.data))
        v = state.v.setdefault(name, np.zeros_like(tensor.data))
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        m_hat = m / (1.0 - state.beta1**t)
        v_hat = v / (1.0 - state.beta2**t)
        tensor.data -= lr * params.multiplier(name) * m_hat / (np.sqrt(v_hat) + state.eps)


def linear(x: Tensor, w: Tensor, b: Tensor | None = None) -> Tensor:
    """x @ w.T (+ b); w stored as (out, in)."""
    out = matmul(x, transpose(w))
    return add(out, b) if b is not None else out


def lstm_step(
    x: Tensor, state: tuple[Tensor, Tensor], w_x: Tensor, w_h: Tensor, b: Tensor
) -> tuple[Tensor, tuple[Tensor, Tensor]]:
    """Standard LSTM cell: gates ordered input, forget, candidate, output."""
    h, c = state
    n = h.shape[-1]
    if w_x.shape[0] != 4 * n or w_h.shape != (4 * n, n) or b.shape != (4 * n,):
        raise ShapeError(
            f"lstm_step: weights {w_x.shape}/{w_h.shape}/{b.shape} do not fit state dim {n}"
        )
    pre = add(add(linear(x, w_x), linear(h, w_h)), b)
    i = sigmoid(slice_cols(pre, 0, n))
    f = sigmoid(slice_cols(pre, n, 2 * n))
    g = tanh(slice_cols(pre, 2 * n, 3 * n))
    o = sigmoid(slice_cols(pre, 3 * n, 4 * n))
    c_new = add(mul(f, c), mul(i, g))
    h_new = mul(o, tanh(c_new))
    return h_new, (h_new, c_new)


def glu(x: Tensor, w_v: Tensor, b_v: Tensor, w_g: Tensor, b_g: Tensor) -> Tensor:
    """Gated linear unit: linear(x) * sigmoid(gate(x)), separate weight sets."""
    return mul(linear(x, w_v, b_v), sigmoid(linear(x, w_g, b_g)))


def grad_check(
    fn: Callable[[], Tensor], params: ParameterSet, eps: float = 1e-5
) -> float:
    """Max relative error between backprop and central finite differences.

    Relative error per coordinate is |analytic - numeric| divided by
    max(1e-8, |analytic| + |numeric|).
    """
    params.zero_grad()
    fn().backward()
    analytic = {
        name: (params[name].grad.copy() if params[name].grad is not None
               else np.zeros_like(params[name].data))
        for name in params.names()
    }
    worst = 0.0
    for name in params.names():
        flat = params[name].data.reshape(-1)
        for idx in range(flat.size):
            orig = flat[idx]
            flat[idx] = orig + eps
            hi = float(fn().data)
            flat[idx] = orig - eps
            lo = float(fn().data)
            flat[idx] = orig
            numeric = (hi - lo) / (2.0 * eps)
            a = float(analytic[name].reshape(-1)[idx])
            err = abs(a - numeric) / max(1e-8, abs(a) + abs(numeric))
            worst = max(worst, err)
    return worst


def he_init(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int) -> np.ndarray:
    return rng.standard_normal(shape) * np.sqrt(1.0 / max(1, fan_in))


def save_checkpoint(
    path: str | Path, params: ParameterSet, adam: AdamState | None = None
) -> None:
    """Write manifest JSON + float64 little-endian blob (params then moments)."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    names = params.names()
    manifest = {
        "params": [
            {
                "name": n,
                "shape": list(params[n].data.shape),
                "multiplier": params.multiplier(n),
            }
            for n in names
        ],
        "adam": None
        if adam is None
        else {
            "beta1": adam.beta1,
            "beta2": adam.beta2,
            "eps": adam.eps,
            "base_lr": adam.base_lr,
            "decay": adam.decay,
            "decay_every": adam.decay_every,
            "step": adam.step,
        },
    }
    blob = [params[n].data for n in names]
    if adam is not None:
        blob += [adam.m.get(n, np.zeros_like(params[n].data)) for n in names]
        blob += [adam.v.get(n, np.zeros_like(params[n].data)) for n in names]
    (path / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    data = np.concatenate([a.reshape(-1) for a in blob]) if blob else np.zeros(0)
    (path / "params.bin").write_bytes(data.astype("<f8").tobytes())


def load_checkpoint(path: str | Path) -> tuple[ParameterSet, AdamState | None]:
    path = Path(path)
    manifest = json.loads((path / "manifest.json").read_text())
    raw = np.frombuffer((path / "params.bin").read_bytes(), dtype="<f8")
    params = ParameterSet()
    offset = 0

    def take(shape: list[int]) -> np.ndarray:
        nonlocal offset
        size = int(np.prod(shape, dtype=np.int64)) if shape else 1
        out = raw[offset:offset + size].reshape(shape).copy()
        offset += size
        return out

    for entry in manifest["params"]:
        params.add(entry["name"], take(entry["shape"]), entry["multiplier"])
    adam = None
    if manifest["adam"] is not None:
        meta = manifest["adam"]
        adam = AdamState(
            beta1=meta["beta1"], beta2=meta["beta2"], eps=meta["eps"],
            base_lr=meta["base_lr"], decay=meta["decay"],
            decay_every=meta["decay_every"], step=meta["step"],
        )
        for entry in manifest["params"]:
            adam.m[entry["name"]] = take(entry["shape"])
        for entry in manifest["params"]:
            adam.v[entry["name"]] = take(entry["shape"])
    return params, adam
