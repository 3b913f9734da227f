"""Pure-Python implementations of the numeric hot loops.

Mirrors ``_ckernels.pyx`` function for function. Used when the compiled
extension is missing or when ``GREENMETA_PURE_PYTHON=1`` is set.
"""

import math


def pack_bits(values, widths):
    word = 0
    for v, w in zip(values, widths):
        v = int(v)
        if v < 0 or v >> w:
            raise OverflowError(f"value {v} does not fit in {w} bits")
        word = (word << w) | v
    return word


def unpack_bits(word, widths):
    out = []
    shift = sum(widths)
    for w in widths:
        shift -= w
        out.append((word >> shift) & ((1 << w) - 1))
    return out


def akima_node_slopes(x, y):
    """Derivatives of the Akima spline at each knot.

    Segment slopes are extended by two ghost slopes on each side with the
    usual parabolic extrapolation ``m[-1] = 2 m[0] - m[1]``.
    """
    n = len(x)
    m = [0.0] * (n + 3)
    for i in range(n - 1):
        m[i + 2] = (y[i + 1] - y[i]) / (x[i + 1] - x[i])
    if n == 2:
        m[0] = m[1] = m[3] = m[4] = m[2]
    else:
        m[1] = 2.0 * m[2] - m[3]
        m[0] = 2.0 * m[1] - m[2]
        m[n + 1] = 2.0 * m[n] - m[n - 1]
        m[n + 2] = 2.0 * m[n + 1] - m[n]
    t = [0.0] * n
    for i in range(n):
        w_left = abs(m[i + 3] - m[i + 2])
        w_right = abs(m[i + 1] - m[i])
        denom = w_left + w_right
        if denom == 0.0:
            t[i] = 0.5 * (m[i + 1] + m[i + 2])
        else:
            t[i] = (w_left * m[i + 1] + w_right * m[i + 2]) / denom
    return t


def hermite_eval(x, y, t, xq):
    """Evaluate the cubic Hermite interpolant through (x, y, t) at ``xq``.

    ``xq`` must lie inside ``[x[0], x[-1]]``; callers check the domain.
    """
    n = len(x)
    out = [0.0] * len(xq)
    seg = 0
    for k, q in enumerate(xq):
        # xq is usually sorted, so restart the scan only when it goes back
        if seg > 0 and q < x[seg]:
            seg = 0
        while seg < n - 2 and q > x[seg + 1]:
            seg += 1
        h = x[seg + 1] - x[seg]
        s = (q - x[seg]) / h
        s2 = s * s
        s3 = s2 * s
        out[k] = ((2.0 * s3 - 3.0 * s2 + 1.0) * y[seg]
                  + (s3 - 2.0 * s2 + s) * h * t[seg]
                  + (-2.0 * s3 + 3.0 * s2) * y[seg + 1]
                  + (s3 - s2) * h * t[seg + 1])
    return out


def trapezoid(values, dx):
    n = len(values)
    if n < 2:
        return 0.0
    acc = 0.0
    for i in range(1, n - 1):
        acc += values[i]
    return dx * (acc + 0.5 * (values[0] + values[n - 1]))


def lagrangian_argmin(table, coefficients, lambda_rate, lambda_energy):
    """Index of the row minimising ``D + lR*R + lE*sum(n*e)``.

    Each row of ``table`` is ``(D, R, n_1, ..., n_N)``. Ties go to lower
    distortion, then lower rate, then lower index.
    """
    best = -1
    best_j = best_d = best_r = math.inf
    for i, row in enumerate(table):
        energy = 0.0
        for j, e in enumerate(coefficients):
            energy += row[j + 2] * e
        d = row[0]
        r = row[1]
        j_cost = d + lambda_rate * r + lambda_energy * energy
        if (best < 0 or j_cost < best_j
                or (j_cost == best_j and (d < best_d
                                          or (d == best_d and r < best_r)))):
            best, best_j, best_d, best_r = i, j_cost, d, r
    return best
