"""Time the compiled kernels against the NumPy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

from lgkit import kernels, lgi, macroreal


def cases():
    for n in (8, 12, 16):
        terms = lgi.kn_terms(n)
        ii = [i - 1 for _, i, _ in terms]
        jj = [j - 1 for _, _, j in terms]
        coeff = [float(s) for s, _, _ in terms]
        yield f"lg_string_extrema n={n}", lambda b, a=(n, ii, jj, coeff): kernels.lg_string_extrema(*a, backend=b)
    rng = macroreal.make_rng(0)
    for states, length in ((8, 5), (16, 5), (16, 8)):
        m = macroreal.random_model(rng, 5, states, nim=False)
        seq = [k % 5 for k in range(length)]
        yield (f"ontic_sequence_joint S={states} T={length}",
               lambda b, m=m, seq=seq: kernels.ontic_sequence_joint(m.mu, m.xi, m.gamma, seq, backend=b))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = kernels.available_backends()
    print(f"{'case':40s}" + "".join(f"{b:>14s}" for b in backends) + ("   speedup" if len(backends) > 1 else ""))
    for name, fn in cases():
        times = {}
        for b in backends:
            fn(b)
            number = 3
            times[b] = min(timeit.repeat(lambda: fn(b), number=number, repeat=args.repeat)) / number
        row = f"{name:40s}" + "".join(f"{times[b] * 1e3:12.3f}ms" for b in backends)
        if "cython" in times:
            row += f"  {times['python'] / times['cython']:8.1f}x"
        print(row)


if __name__ == "__main__":
    main()
