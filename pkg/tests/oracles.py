"""Independent reference computations used to freeze expected values.

Nothing here calls into the jet arithmetic or the shear pipeline; finite
differences go through the plain float evaluator.
"""

from __future__ import annotations

import numpy as np

from shearlab.expr import evaluate


def fd_gradient(expr, x, h=1e-5):
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (evaluate(expr, x + e) - evaluate(expr, x - e)) / (2 * h)
    return g


def fd_hessian(expr, x, h=1e-5):
    x = np.asarray(x, dtype=float)
    n = x.size
    H = np.zeros((n, n))
    f = lambda y: evaluate(expr, y)
    for i in range(n):
        for j in range(n):
            ei = np.zeros(n)
            ej = np.zeros(n)
            ei[i] = h
            ej[j] = h
            H[i, j] = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) / (4 * h * h)
    return H


def rel_err(approx, exact):
    approx, exact = np.asarray(approx), np.asarray(exact)
    return float(np.max(np.abs(approx - exact), initial=0.0) / max(1.0, np.max(np.abs(exact), initial=0.0)))


def random_trig_polynomial(rng, names, depth=3) -> str:
    """Random expression text built from + - * ^int, sin, cos, exp, tanh."""
    if depth == 0 or rng.random() < 0.25:
        if rng.random() < 0.6:
            return str(rng.choice(names))
        return f"{rng.uniform(0.1, 2.0):.4f}"
    kind = rng.integers(0, 7)
    a = random_trig_polynomial(rng, names, depth - 1)
    if kind == 0:
        return f"({a} + {random_trig_polynomial(rng, names, depth - 1)})"
    if kind == 1:
        return f"({a} - {random_trig_polynomial(rng, names, depth - 1)})"
    if kind == 2:
        return f"({a})*({random_trig_polynomial(rng, names, depth - 1)})"
    if kind == 3:
        return f"({a})^{int(rng.integers(2, 4))}"
    func = ["sin", "cos", "tanh", "exp"][kind - 3]
    if func == "exp":
        return f"exp(0.5*sin({a}))"
    return f"{func}({a})"


def euclidean_normal_components(E, V):
    """Euclidean normal part of ambient vectors V (columns) w.r.t. span E."""
    Q, _ = np.linalg.qr(E)
    return V - Q @ (Q.T @ V)
