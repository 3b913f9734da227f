"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Calls each backend module directly, including the input conversion the
dispatcher in ``greenmeta.kernels`` would do, so the numbers reflect what a
caller pays.
"""

import argparse
import sys
import timeit

import numpy as np

from greenmeta import _pykernels, kernels
from greenmeta.analysis import RdCurve, bd_rate

WIDTHS = (6, 1, 1, 1, 1, 14, 14, 10)


def cases(rng):
    fields = [31, 1, 0, 0, 1, 1280, 720, 30]
    word = _pykernels.pack_bits(fields, WIDTHS)
    yield "pack_bits (48-bit msg)", (
        lambda k: lambda: k.pack_bits(fields, WIDTHS))
    yield "unpack_bits (48-bit msg)", (
        lambda k: lambda: k.unpack_bits(word, WIDTHS))

    for n in (4, 8):
        x = np.cumsum(rng.uniform(0.5, 2.0, n))
        y = rng.normal(size=n)
        xl, yl = x.tolist(), y.tolist()
        yield f"akima_node_slopes n={n}", (
            lambda k, x=x, y=y, xl=xl, yl=yl: (
                (lambda: k.akima_node_slopes(xl, yl)) if k is _pykernels
                else (lambda: k.akima_node_slopes(x, y))))

    for nq in (2001, 20001):
        x = np.cumsum(rng.uniform(0.5, 2.0, 4))
        y = rng.normal(size=4)
        t = np.asarray(_pykernels.akima_node_slopes(x.tolist(), y.tolist()))
        q = np.linspace(x[0], x[-1], nq)
        lists = [v.tolist() for v in (x, y, t, q)]
        yield f"hermite_eval {nq} samples", (
            lambda k, x=x, y=y, t=t, q=q, lists=lists: (
                (lambda: k.hermite_eval(*lists)) if k is _pykernels
                else (lambda: k.hermite_eval(x, y, t, q))))
        vals = rng.normal(size=nq)
        vl = vals.tolist()
        yield f"trapezoid {nq} samples", (
            lambda k, vals=vals, vl=vl: (
                (lambda: k.trapezoid(vl, 0.01)) if k is _pykernels
                else (lambda: k.trapezoid(vals, 0.01))))

    for n in (4, 16, 64, 1024):
        table = np.column_stack([rng.uniform(0, 10, n), rng.uniform(0, 10, n),
                                 rng.integers(0, 3, (n, 3))]).astype(float)
        rows = [tuple(r) for r in table.tolist()]
        coeffs = (0.0, 65536.0, 0.0)
        yield f"lagrangian_argmin n={n}", (
            lambda k, rows=rows, coeffs=coeffs: (
                (lambda: k.lagrangian_argmin(rows, coeffs, 1.0, 1.0))
                if k is _pykernels else
                (lambda: k.lagrangian_argmin(
                    np.array(rows, dtype=np.float64, ndmin=2),
                    np.asarray(coeffs, dtype=np.float64), 1.0, 1.0))))


def time_call(fn, repeat):
    timer = timeit.Timer(fn)
    number, _ = timer.autorange()
    best = min(timer.repeat(repeat=repeat, number=number))
    return best / number


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled kernels not built; only the Python fallback is "
              "available", file=sys.stderr)
    rng = np.random.default_rng(0)
    names = sorted(backends, reverse=True)  # python, cython
    header = f"{'kernel':32}" + "".join(f"{n + ' (us)':>16}" for n in names)
    if len(names) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for label, make in cases(rng):
        times = [time_call(make(backends[n]), args.repeat) * 1e6
                 for n in names]
        line = f"{label:32}" + "".join(f"{t:16.2f}" for t in times)
        if len(times) == 2:
            line += f"{times[0] / times[1]:9.1f}x"
        print(line)

    ref = RdCurve([(1000, 32.0), (1800, 34.5), (3200, 37.0), (6000, 39.2)])
    test = RdCurve([(1300, 32.4), (2100, 34.6), (3900, 37.3), (6800, 39.5)])
    per = time_call(lambda: bd_rate(ref, test), args.repeat) * 1e6
    print(f"\nend-to-end bd_rate with the selected '{kernels.BACKEND}' "
          f"kernels: {per:.1f} us")


if __name__ == "__main__":
    main()
