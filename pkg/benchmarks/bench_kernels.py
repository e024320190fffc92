"""Compiled vs NumPy belief-filter kernels.

    python benchmarks/bench_kernels.py [--bins 181 361 721] [--repeat 2000]

Prints microseconds per call for each kernel and one full
predict/update/entropy cycle, plus the speed-up of the compiled backend.
"""
import argparse
import timeit

import numpy as np

from nfisac import kernels


def cycle(mod, probs, z, sigma_bins):
    k = mod.gaussian_kernel(sigma_bins)
    p = mod.predict_reflect(probs, k)
    post, _ = mod.posterior_update(p, z, 2.0)
    return mod.entropy_bits(post)


def bench(mod, n, repeat, sigma_deg=5.0):
    rng = np.random.default_rng(0)
    probs = rng.random(n)
    probs /= probs.sum()
    z = rng.uniform(0.05, 1.0, n)
    sb = sigma_deg * (n - 1) / 180.0
    kern = mod.gaussian_kernel(sb)
    cases = {
        "gaussian_kernel": lambda: mod.gaussian_kernel(sb),
        "predict_reflect": lambda: mod.predict_reflect(probs, kern),
        "posterior_update": lambda: mod.posterior_update(probs, z, 2.0),
        "entropy_bits": lambda: mod.entropy_bits(probs),
        "full_cycle": lambda: cycle(mod, probs, z, sb),
    }
    out = {}
    for name, fn in cases.items():
        fn()
        # best of 5 batches damps scheduler noise
        t = min(timeit.repeat(fn, number=repeat, repeat=5)) / repeat
        out[name] = 1e6 * t
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--bins", type=int, nargs="+", default=[181, 361, 721])
    ap.add_argument("--repeat", type=int, default=2000)
    args = ap.parse_args(argv)
    if kernels.compiled_backend is None:
        print("compiled backend not available; timing the NumPy fallback only")
    backends = [("python", kernels.python_backend)]
    if kernels.compiled_backend is not None:
        backends.append(("compiled", kernels.compiled_backend))
    print(f"{'bins':>5} {'kernel':<17}" + "".join(f"{b:>12}" for b, _ in backends) + ("    speed-up" if len(backends) > 1 else ""))
    for n in args.bins:
        res = {b: bench(m, n, args.repeat) for b, m in backends}
        for name in res["python"]:
            line = f"{n:>5} {name:<17}" + "".join(f"{res[b][name]:>10.2f}us" for b, _ in backends)
            if len(backends) > 1:
                line += f"{res['python'][name] / res['compiled'][name]:>11.1f}x"
            print(line)


if __name__ == "__main__":
    main()
