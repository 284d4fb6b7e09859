import pytest
from mpmath import mp


@pytest.fixture(autouse=True)
def _restore_precision():
    prec = mp.prec
    yield
    mp.prec = prec

