"""Compare the numba and numpy kernel backends.

Times each hot kernel on flattened arrays and then full integrator steps,
swapping the active backend in-process. The first numba call per kernel
compiles (or loads the on-disk cache) and is excluded from the timings.

    python benchmarks/bench_kernels.py --points 256 --dim 1
    python benchmarks/bench_kernels.py --points 128 --dim 2 --steps 50
"""
import argparse
import timeit

import numpy as np

from dirac_ewi import Integrator, _kernels, get_preset


def kernel_cases(size, rng):
    def cplx(*shape):
        return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)

    mu1, mu2 = rng.uniform(-50, 50, (2, size))
    phi, prev, g, g_prev = (cplx(2, size) for _ in range(4))
    coeffs = [cplx(size) for _ in range(6)]
    V, A1, A2 = rng.standard_normal((3, size))
    return {
        "symbol_apply": (coeffs[0], coeffs[1], mu1, mu2, phi),
        "ewi_update": (phi, g, g_prev, *coeffs, mu1, mu2, 0.5, 0.01, False),
        "sewi_update": (phi, prev, g, coeffs[0], coeffs[1].real, mu1, mu2, 0.5),
        "apply_potential": (V, A1, A2, phi),
        "potential_flow": (V, A1, A2, 0.01, phi),
    }


def best_of(fn, number, repeat):
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--points", type=int, default=256, help="points per axis")
    parser.add_argument("--dim", type=int, choices=(1, 2), default=1)
    parser.add_argument("--steps", type=int, default=200, help="integrator steps per timing")
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    if _kernels.numba_kernels is None:
        raise SystemExit("numba is not installed; nothing to compare")
    backends = {"numpy": _kernels.numpy_kernels, "numba": _kernels.numba_kernels}
    size = args.points ** args.dim
    rng = np.random.default_rng(args.seed)
    cases = kernel_cases(size, rng)

    print(f"kernels on {size} modes (us per call)")
    print(f"{'kernel':<18}{'numpy':>12}{'numba':>12}{'speedup':>10}")
    for name, call_args in cases.items():
        times = {}
        for label, ns in backends.items():
            fn = getattr(ns, name)
            fn(*call_args)  # warm-up / compile
            times[label] = best_of(lambda: fn(*call_args), 200, args.repeat) * 1e6
        print(f"{name:<18}{times['numpy']:>12.2f}{times['numba']:>12.2f}"
              f"{times['numpy'] / times['numba']:>10.2f}")

    preset = get_preset("1d-convergence" if args.dim == 1 else "2d-honeycomb")
    grid = preset.grid(args.points)
    pot = preset.potential(1.0)
    print(f"\nfull steps on {grid.points} grid (us per step)")
    print(f"{'scheme':<18}{'numpy':>12}{'numba':>12}{'speedup':>10}")
    saved = _kernels.active
    try:
        for method in ("ewi-fp", "sewi-fp", "tsfp"):
            times = {}
            for label, ns in backends.items():
                _kernels.active = ns
                integ = Integrator(method, pot, grid, 1e-3).start(preset.initial(grid))
                integ.advance(2)
                times[label] = best_of(lambda: integ.advance(args.steps), 1,
                                       args.repeat) / args.steps * 1e6
            print(f"{method:<18}{times['numpy']:>12.2f}{times['numba']:>12.2f}"
                  f"{times['numpy'] / times['numba']:>10.2f}")
    finally:
        _kernels.active = saved


if __name__ == "__main__":
    main()
