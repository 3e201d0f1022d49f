# cython: language_level=3
"""Compiled geometric predicate kernels; see _kernels_py.py for the contract.

Coordinates are unbounded rationals, so arithmetic stays on Python ints
(arbitrary precision); the win over the pure module is interpreter-overhead
removal in these innermost calls.
"""

COMPILED = True


def orient_sign(axn, axd, ayn, ayd, bxn, bxd, byn, byd, cxn, cxd, cyn, cyd):
    u1 = bxn * axd - axn * bxd
    v1 = cyn * ayd - ayn * cyd
    u2 = byn * ayd - ayn * byd
    v2 = cxn * axd - axn * cxd
    s = u1 * v1 * (byd * cxd) - u2 * v2 * (bxd * cyd)
    if s > 0:
        return 1
    if s < 0:
        return -1
    return 0


def cmp_dot_along(axn, axd, ayn, ayd, bxn, bxd, byn, byd, qxn, qxd, qyn, qyd):
    ux_n = bxn * axd - axn * bxd
    ux_d = bxd * axd
    uy_n = byn * ayd - ayn * byd
    uy_d = byd * ayd
    wx_n = qxn * axd - axn * qxd
    wx_d = qxd * axd
    wy_n = qyn * ayd - ayn * qyd
    wy_d = qyd * ayd
    dot_n = ux_n * wx_n * (uy_d * wy_d) + uy_n * wy_n * (ux_d * wx_d)
    len_n = ux_n * ux_n * (uy_d * uy_d) + uy_n * uy_n * (ux_d * ux_d)
    den1 = ux_d * wx_d * uy_d * wy_d
    den2 = (ux_d * uy_d) ** 2
    s1 = 1 if dot_n > 0 else (-1 if dot_n < 0 else 0)
    diff = dot_n * den2 - len_n * den1
    s2 = 1 if diff > 0 else (-1 if diff < 0 else 0)
    return s1, s2
