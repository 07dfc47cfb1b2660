"""Stable arithmetic on probabilities represented as log-odds.

A probability r in [0, 1] is carried as phi(r) = log(r / (1 - r)), with
phi(0) = -inf and phi(1) = +inf.  Products, restricted sums, ratios and
complements are computed directly on these values, so quantities
exponentially close to 0 or 1 keep full relative precision.  A plain
log(r) form is used where values may exceed 1.

Case splits never exponentiate a positive argument, so there is no
intermediate overflow for arguments of any realistic magnitude.
"""

from __future__ import annotations

import math

INF = math.inf
_LN2 = math.log(2.0)

__all__ = [
    "INF",
    "phi",
    "phi_inv",
    "phi_complement",
    "phi_mul",
    "phi_add",
    "phi_div",
    "phi_sub",
    "log_from_phi",
    "phi_prod",
    "phi_one_minus_prod_complements",
    "phi_pow_root",
]


def phi(r: float) -> float:
    """Log-odds of a probability."""
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"probability out of range: {r!r}")
    if r == 0.0:
        return -INF
    if r == 1.0:
        return INF
    return math.log(r) - math.log1p(-r)


def phi_inv(u: float) -> float:
    """Probability with log-odds u."""
    if u >= 0.0:
        return 1.0 / (1.0 + math.exp(-u))
    e = math.exp(u)
    return e / (1.0 + e)


def phi_complement(u: float) -> float:
    """phi(1 - r) from u = phi(r)."""
    return -u


def phi_mul(u: float, v: float) -> float:
    """phi(r * s) from u = phi(r), v = phi(s)."""
    if u < v:
        u, v = v, u
    # now u >= v
    if v == INF:
        return INF
    if u < 0.0:
        return u + v - math.log(1.0 + math.exp(u) + math.exp(v))
    return v - math.log(1.0 + math.exp(-u) + math.exp(v - u))


def phi_add(u: float, v: float) -> float:
    """phi(r + s) from u = phi(r) >= v = phi(s); requires r + s <= 1."""
    if v > u:
        raise ValueError("phi_add requires u >= v")
    if u == -INF:
        return -INF
    if v == -INF:
        return u  # adding zero; covers u = +inf
    if u + v > 0.0:
        raise ValueError("phi_add requires r + s <= 1")
    return (
        u
        + math.log(1.0 + math.exp(v - u) + 2.0 * math.exp(v))
        - math.log1p(-math.exp(u + v))
    )


def phi_div(u: float, v: float) -> float:
    """phi(s / r) from v = phi(s) <= u = phi(r); (u, u) -> +inf."""
    if v > u:
        raise ValueError("phi_div requires v <= u")
    if u == v:
        return INF
    if u == INF:
        return v
    if u < 0.0:
        return math.log1p(math.exp(u)) - u + v - math.log1p(-math.exp(v - u))
    return math.log1p(math.exp(-u)) + v - math.log1p(-math.exp(v - u))


def phi_sub(u: float, v: float) -> float:
    """phi(r - s) from u = phi(r) >= v = phi(s), via r * (1 - s/r)."""
    if v > u:
        raise ValueError("phi_sub requires v <= u")
    if u == v:
        return -INF
    if v == -INF:
        return u
    return phi_mul(u, -phi_div(u, v))


def log_from_phi(u: float) -> float:
    """log(r) from u = phi(r)."""
    if u < 0.0:
        return u - math.log1p(math.exp(u))
    return -math.log1p(math.exp(-u))


def phi_prod(values) -> float:
    """phi of a product of probabilities; the empty product is 1."""
    out = INF
    for v in values:
        out = phi_mul(out, v)
    return out


def phi_one_minus_prod_complements(values) -> float:
    """phi(1 - prod(1 - r_k)) from the phi(r_k)."""
    out = INF
    for v in values:
        out = phi_mul(out, -v)
    return -out


def phi_pow_root(u: float, d: int) -> float:
    """phi(r ** (1/d)) from u = phi(r), for integer d >= 1."""
    if d < 1:
        raise ValueError("d must be >= 1")
    if d == 1 or u == INF or u == -INF:
        return u
    ell = log_from_phi(u) / d  # log of the root, in (-inf, 0)
    # phi = ell - log(1 - exp(ell))
    if ell > -_LN2:
        return ell - math.log(-math.expm1(ell))
    return ell - math.log1p(-math.exp(ell))
