"""Dormand-Prince 5(4) stepper with hooks for singular vector fields.

The field callback may return ``None`` for a point outside its domain; the
step is then rejected and retried with a smaller size.
"""
from __future__ import annotations

import numpy as np

from .errors import StepUnderflow

C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
B = np.array(A[6] + [0.0])
E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0


def _step(fun, t, y, f0, h):
    k = [f0]
    for i in range(1, 7):
        yi = y + h * (np.dot(A[i], k[:i]) if i > 1 else A[1][0] * k[0])
        fi = fun(t + C[i] * h, yi)
        if fi is None:
            return None
        k.append(fi)
    y_new = y + h * np.dot(B[:6], k[:6])
    err = h * np.dot(E, k)
    # k[6] is f(t + h, y_new) (FSAL)
    return y_new, k[6], err


def solve(fun, t0, y0, t_end, *, rtol=1e-10, atol=1e-10, h0=None,
          max_step=None, accept=None, stop=None, t_eval=(), max_steps=200_000):
    """Integrate ``y' = fun(t, y)`` from t0 towards t_end.

    ``max_step(t, y, f)`` caps the next step, ``accept(t, y)`` may veto an
    otherwise acceptable step, ``stop(t, y, f)`` ends integration after an
    accepted step.  Times in ``t_eval`` are hit exactly.

    Returns ``(ts, ys, fs, reason)`` with reason in {"t_end", "stop",
    "underflow"}.
    """
    y = np.array(y0, dtype=float)
    t = float(t0)
    f = fun(t, y)
    if f is None:
        raise ValueError("initial point outside the field's domain")
    direction = 1.0 if t_end >= t0 else -1.0
    pending = sorted((float(s) for s in t_eval if direction * (s - t0) > 0),
                     reverse=direction < 0)
    ts, ys, fs = [t], [y.copy()], [f.copy()]

    if h0 is None:
        scale = atol + rtol * np.abs(y)
        d0 = np.sqrt(np.mean((y / scale) ** 2))
        d1 = np.sqrt(np.mean((f / scale) ** 2))
        h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
        h0 = min(h0, abs(t_end - t0))
    h = abs(h0)
    reason = "t_end"

    for _ in range(max_steps):
        if direction * (t_end - t) <= 0:
            break
        target = pending[0] if pending else t_end
        h = min(h, abs(target - t))
        if max_step is not None:
            h = min(h, max_step(t, y, f))
        hit = h >= abs(target - t) * (1 - 1e-14)
        if hit:
            h = abs(target - t)
        if h <= 8 * np.finfo(float).eps * max(1.0, abs(t)):
            reason = "underflow"
            break
        res = _step(fun, t, y, f, direction * h)
        if res is None:
            h *= 0.25
            continue
        y_new, f_new, err = res
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        en = float(np.sqrt(np.mean((err / scale) ** 2)))
        if en > 1.0:
            h *= max(MIN_FACTOR, SAFETY * en ** -0.2)
            continue
        t_new = target if hit else t + direction * h
        if accept is not None and not accept(t_new, y_new):
            h *= 0.5
            continue
        t, y, f = t_new, y_new, f_new
        ts.append(t)
        ys.append(y.copy())
        fs.append(f.copy())
        if hit and pending:
            pending.pop(0)
        factor = MAX_FACTOR if en == 0 else min(MAX_FACTOR, SAFETY * en ** -0.2)
        h *= max(MIN_FACTOR, factor)
        if stop is not None and stop(t, y, f):
            reason = "stop"
            break
    else:
        raise StepUnderflow(f"exceeded {max_steps} steps at t={t}")
    return np.array(ts), np.array(ys), np.array(fs), reason
