"""Per-function throughput microbenchmark.

Measures the wall time of applying each basis function to every element of
one large input array (grid kinds produce their full basis vector per
element). One untimed warm-up pass precedes the timed repeats, a float64
checksum of the outputs defeats dead-code elimination, and everything runs
on one thread. Absolute times are machine-specific; the stable, asserted
fact is the ordering between the B-spline expansion and the cheap
elementwise functions.
"""

import csv
import os
import platform
import time
from dataclasses import dataclass

import numpy as np

from . import kernels
from .basis import BasisKind, grid_spec

BENCH_KINDS = ("bspline", "rbf", "dog", "relu", "sin", "cos", "tan", "arctan")

CSV_FIELDS = ("function", "mean_us", "std_us", "repeats", "n", "checksum")


@dataclass
class BenchResult:
    function: str
    mean_us: float  # per full n-element pass
    std_us: float
    repeats: int
    n: int
    checksum: float
    threads: int = 1
    backend: str = kernels.BACKEND


def _bench_kind(name: str) -> BasisKind:
    if name == "bspline":
        return BasisKind.bspline()  # G=5, k=3: the full G+k vector per input
    if name == "rbf":
        return BasisKind.rbf()
    return BasisKind.elementwise(name)


def _make_pass(kind: BasisKind, n: int, impl):
    # uniform inputs over the function's natural domain; tan stays clear of
    # its poles
    lo, hi = (-1.5, 1.5) if kind.name == "tan" else (-1.0, 1.0)
    x = np.random.default_rng(0).uniform(lo, hi, size=n)
    if kind.is_elementwise:
        x32 = x.astype(np.float32)
        return lambda: impl.unary_values(kind.name, x32)
    spec = grid_spec(kind)
    x64 = x.astype(np.float64)
    if kind.name == "bspline":
        return lambda: impl.bspline_values(x64, spec.centers, kind.spline_order)
    return lambda: impl.rbf_values(x64, spec.centers, spec.bandwidth)


def bench_function(kind, n: int = 1_000_000, repeats: int = 10,
                   impl=None) -> BenchResult:
    """Time one function over n elements, repeats times plus a warm-up."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if repeats < 3:
        raise ValueError(f"repeats must be >= 3, got {repeats}")
    kind = _bench_kind(kind) if isinstance(kind, str) else kind
    if kind.name not in BENCH_KINDS:
        raise ValueError(f"benchmark covers {BENCH_KINDS}, got {kind.name!r}")
    impl = impl or kernels.load_backend(kernels.BACKEND)
    one_pass = _make_pass(kind, n, impl)
    out = one_pass()  # warm-up, untimed
    times = np.empty(repeats, dtype=np.float64)
    for r in range(repeats):
        t0 = time.perf_counter()
        out = one_pass()
        times[r] = (time.perf_counter() - t0) * 1e6
    return BenchResult(
        function=kind.name,
        mean_us=float(times.mean()),
        std_us=float(times.std(ddof=1)),
        repeats=repeats,
        n=n,
        checksum=float(np.asarray(out, dtype=np.float64).sum()),
        backend=impl.BACKEND_NAME,
    )


def bench_suite(n: int = 1_000_000, repeats: int = 10, impl=None):
    """All eight functions under identical conditions, slowest first."""
    results = [bench_function(k, n=n, repeats=repeats, impl=impl) for k in BENCH_KINDS]
    results.sort(key=lambda r: r.mean_us, reverse=True)
    return results


def machine_meta() -> dict:
    return {
        "platform": platform.platform(),
        "machine": platform.machine(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "cpus": os.cpu_count(),
        "kernel_backend": kernels.BACKEND,
        "threads": 1,
    }


def write_csv(results, path):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(CSV_FIELDS)
        for r in results:
            w.writerow(
                [r.function, f"{r.mean_us:.3f}", f"{r.std_us:.3f}", r.repeats, r.n,
                 repr(r.checksum)]
            )


def format_table(results) -> str:
    lines = [f"{'function':<10} {'mean_us':>14} {'std_us':>12} {'checksum':>22}"]
    for r in results:
        lines.append(
            f"{r.function:<10} {r.mean_us:>14.3f} {r.std_us:>12.3f} {r.checksum:>22.6f}"
        )
    return "\n".join(lines)


def compare_backends(n: int = 100_000, repeats: int = 5):
    """Run the suite on every available backend; returns {backend: results}.

    Shows what the compiled scalar loops buy over the vectorized NumPy
    fallback on this machine.
    """
    out = {}
    for name in kernels.available_backends():
        impl = kernels.load_backend(name)
        out[name] = bench_suite(n=n, repeats=repeats, impl=impl)
    return out


def format_comparison(per_backend) -> str:
    backends = list(per_backend)
    by_fn = {}
    for b in backends:
        for r in per_backend[b]:
            by_fn.setdefault(r.function, {})[b] = r
    header = f"{'function':<10}" + "".join(f" {b + ' us':>16}" for b in backends)
    if len(backends) == 2:
        header += f" {'speedup':>9}"
    lines = [header]
    order = sorted(by_fn, key=lambda f: -by_fn[f][backends[0]].mean_us)
    for fn in order:
        row = f"{fn:<10}" + "".join(f" {by_fn[fn][b].mean_us:>16.3f}" for b in backends)
        if len(backends) == 2:
            a, b = (by_fn[fn][x].mean_us for x in backends)
            row += f" {b / a:>8.2f}x"
        lines.append(row)
    return "\n".join(lines)
