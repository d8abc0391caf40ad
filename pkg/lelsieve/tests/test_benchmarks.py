from typing import Callable, TypeVar

from typing_extensions import ParamSpec, Protocol

from lelsieve import fraction_exact, fraction_numeric, parse
from lelsieve.lattice import rectangle
from lelsieve.oracle import last_loop_histogram
from lelsieve.series import rp_series_infinite, zeta_tilde

_T = TypeVar("_T")
_P = ParamSpec("_P")


class Benchmark(Protocol):
    def __call__(
        self, func: Callable[_P, _T], *args: _P.args, **kwargs: _P.kwargs
    ) -> _T:
        ...


def test_benchmark_exact_square(benchmark: Benchmark):
    benchmark(fraction_exact, parse("RRUULLDD"))


def test_benchmark_numeric_float(benchmark: Benchmark):
    benchmark(fraction_numeric, rectangle(6, 6), 53)


def test_benchmark_numeric_mp(benchmark: Benchmark):
    benchmark(fraction_numeric, rectangle(2, 2), 256)


def test_benchmark_edge_series(benchmark: Benchmark):
    benchmark(rp_series_infinite, parse("RL"), 30)


def test_benchmark_rooted_zeta(benchmark: Benchmark):
    benchmark(zeta_tilde, 60)


def test_benchmark_histogram(benchmark: Benchmark):
    benchmark(last_loop_histogram, 8)
