"""Central finite-difference gradient check."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .tensor import Tape, Tensor


def finite_diff_check(
    f: Callable[[], Tensor] | Callable[[Tensor], Tensor],
    x: Tensor | Sequence[Tensor],
    step: float = 1e-5,
    coords: int | None = None,
    rng: np.random.Generator | None = None,
) -> float:
    """Max relative error between tape gradients and central differences.

    The error per coordinate is ``|analytic - numeric| / max(1, |analytic|)``.

    Parameters
    ----------
    f : callable
        Returns a scalar tensor. Called as ``f(x)`` when ``x`` is a single
        tensor, otherwise as ``f()`` (closing over the tensors in ``x``).
    x : Tensor or sequence of Tensor
        Inputs to differentiate with respect to. Their ``requires_grad``
        flag is forced on for the duration of the check.
    coords : int, optional
        Check only this many randomly drawn coordinates (over all inputs)
        instead of every one; useful for models with many parameters.
    """
    single = isinstance(x, Tensor)
    xs = [x] if single else list(x)
    call = (lambda: f(xs[0])) if single else f

    saved = [(t.requires_grad, t.grad) for t in xs]
    for t in xs:
        t.data = np.ascontiguousarray(t.data)  # perturbation writes through a flat view
        t.requires_grad = True
        t.grad = None
    try:
        with Tape() as tape:
            loss = call()
        tape.backward(loss)
        analytic = [t.grad if t.grad is not None else np.zeros_like(t.data) for t in xs]

        index = [(k, j) for k, t in enumerate(xs) for j in range(t.size)]
        if coords is not None and coords < len(index):
            rng = rng or np.random.default_rng(0)
            pick = rng.choice(len(index), size=coords, replace=False)
            index = [index[p] for p in sorted(pick)]

        worst = 0.0
        for k, j in index:
            flat = xs[k].data.reshape(-1)
            orig = flat[j]
            flat[j] = orig + step
            up = call().item()
            flat[j] = orig - step
            down = call().item()
            flat[j] = orig
            numeric = (up - down) / (2.0 * step)
            a = analytic[k].reshape(-1)[j]
            worst = max(worst, abs(a - numeric) / max(1.0, abs(a)))
        return worst
    finally:
        for t, (rg, g) in zip(xs, saved):
            t.requires_grad = rg
            t.grad = g
