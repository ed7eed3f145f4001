"""Compare the compiled kernels with their numpy fallbacks.

Usage: python benchmarks/bench_kernels.py [--sites 12] [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from mblsim import _fallback
from mblsim.lattice import power_law_couplings

try:
    from mblsim import _kernels
except ImportError:
    _kernels = None


def cases(n, rng):
    dim = 2**n
    J = np.ascontiguousarray(power_law_couplings(n, 1.0, 1.13).values)
    h = rng.uniform(-4, 4, n)
    basis = np.arange(dim, dtype=np.int64)
    half = basis[np.bitwise_count(basis) % 2 == 0] if hasattr(np, "bitwise_count") else basis[::2]
    inv = np.full(dim, -1, dtype=np.int64)
    inv[half] = np.arange(len(half))
    iu = np.triu_indices(n, 1)
    masks = np.ascontiguousarray((1 << iu[0]) | (1 << iu[1]), dtype=np.int64)
    coefs = np.ascontiguousarray(J[iu])
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    psi /= np.linalg.norm(psi)
    diag = _fallback.diagonal_energies(h, basis)
    batch = np.ascontiguousarray(np.tile(psi, (20, 1)))
    prob = np.ascontiguousarray(np.abs(batch) ** 2)
    return {
        "diagonal_energies": lambda k: k.diagonal_energies(h, basis),
        "build_block": lambda k: k.build_block(J, h, half, inv),
        "apply_offdiag": lambda k: k.apply_offdiag(masks, coefs, diag, psi, np.empty_like(psi)),
        "z_moments(T=20)": lambda k: k.z_moments(prob, n),
        "x_expectations(T=20)": lambda k: k.x_expectations(batch, n),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sites", type=int, default=12)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"N={args.sites}, dim={2**args.sites}")
    print(f"{'kernel':24s} {'numpy [ms]':>12s} {'cython [ms]':>12s} {'speedup':>8s}")
    for name, fn in cases(args.sites, rng).items():
        t_py = min(timeit.repeat(lambda: fn(_fallback), number=1, repeat=args.repeat)) * 1e3
        if _kernels is None:
            print(f"{name:24s} {t_py:12.3f} {'n/a':>12s}")
            continue
        t_cy = min(timeit.repeat(lambda: fn(_kernels), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:24s} {t_py:12.3f} {t_cy:12.3f} {t_py / t_cy:8.1f}x")


if __name__ == "__main__":
    main()
