"""Reference computations that share no code with the package.

Exact rational arithmetic is used where the quantity has a closed form, so the
package's floating-point results are checked against values that carry no
rounding error of their own.
"""
from fractions import Fraction

import numpy as np


def exact_fidelity(eigenvalues, weights, k):
    """a_1^2 lam_1^{2k} / sum_j a_j^2 lam_j^{2k} with Fractions (weights are a_j^2)."""
    lam = [Fraction(x) for x in eigenvalues]
    w = [Fraction(x) for x in weights]
    num = w[0] * lam[0] ** (2 * k)
    den = sum(wj * lj ** (2 * k) for wj, lj in zip(w, lam))
    return num / den


def exact_first_passage(eigenvalues, weights, epsilon, limit=100000):
    """Smallest k with exact fidelity >= 1 - epsilon (epsilon given as a Fraction or str)."""
    target = 1 - Fraction(epsilon)
    for k in range(limit + 1):
        if exact_fidelity(eigenvalues, weights, k) >= target:
            return k
    raise RuntimeError("no passage within limit")


def plain_power_states(A, phi0, n):
    """Normalized power iterates with a plain 2-norm, rows 0..n."""
    phi = np.asarray(phi0, dtype=float)
    phi = phi / np.linalg.norm(phi)
    out = [phi]
    for _ in range(n):
        phi = A @ phi
        phi = phi / np.linalg.norm(phi)
        out.append(phi)
    return np.array(out)


def two_pass_ols(x, y):
    """Slope, intercept and R^2 by explicit sums in Fractions."""
    xs = [Fraction(float(v)) for v in x]
    ys = [Fraction(float(v)) for v in y]
    n = len(xs)
    mx, my = sum(xs) / n, sum(ys) / n
    sxx = sum((a - mx) ** 2 for a in xs)
    sxy = sum((a - mx) * (b - my) for a, b in zip(xs, ys))
    syy = sum((b - my) ** 2 for b in ys)
    slope = sxy / sxx
    intercept = my - slope * mx
    r2 = Fraction(1) if syy == 0 else sxy * sxy / (sxx * syy)
    return float(slope), float(intercept), float(r2)
