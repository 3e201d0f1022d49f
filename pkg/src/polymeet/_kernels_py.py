"""Pure-Python geometric predicate kernels over rational coordinates.

Each point enters as (numerator_x, denominator_x, numerator_y, denominator_y)
with positive denominators.  All results are exact integer signs; no value is
ever rounded.  A compiled twin lives in ``_kernels.pyx`` with the identical
interface; ``polymeet.kernels`` selects one at import time.
"""

COMPILED = False


def orient_sign(axn, axd, ayn, ayd, bxn, bxd, byn, byd, cxn, cxd, cyn, cyd):
    """Sign of cross(b - a, c - a) for rational points a, b, c."""
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
    """Exact comparison key for q projected on segment a->b.

    Returns (sign of (q-a).(b-a), sign of (q-a).(b-a) - |b-a|^2), enough to
    decide whether the projection parameter is <0, 0, in (0,1), 1 or >1.
    """
    ux_n = bxn * axd - axn * bxd
    ux_d = bxd * axd
    uy_n = byn * ayd - ayn * byd
    uy_d = byd * ayd
    wx_n = qxn * axd - axn * qxd
    wx_d = qxd * axd
    wy_n = qyn * ayd - ayn * qyd
    wy_d = qyd * ayd
    # dot = ux*wx + uy*wy over common positive denominator
    dot_n = ux_n * wx_n * (uy_d * wy_d) + uy_n * wy_n * (ux_d * wx_d)
    # |u|^2 = ux^2 + uy^2
    len_n = ux_n * ux_n * (uy_d * uy_d) + uy_n * uy_n * (ux_d * ux_d)
    # dot/den1 vs len/den2 with den1 = ux_d*wx_d*uy_d*wy_d, den2 = (ux_d*uy_d)^2
    den1 = ux_d * wx_d * uy_d * wy_d
    den2 = (ux_d * uy_d) ** 2
    s1 = 1 if dot_n > 0 else (-1 if dot_n < 0 else 0)
    diff = dot_n * den2 - len_n * den1
    s2 = 1 if diff > 0 else (-1 if diff < 0 else 0)
    return s1, s2
