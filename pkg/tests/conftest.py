import itertools

import pytest

from subreg import _kernels


def all_strings(symbols, max_len):
    for L in range(max_len + 1):
        yield from itertools.product(symbols, repeat=L)


@pytest.fixture(params=["numba", "numpy"])
def backend(request):
    prev = _kernels.set_backend(request.param)
    yield request.param
    _kernels.set_backend(prev)
