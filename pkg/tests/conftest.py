import random

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from qva.scalars import QScalar

settings.register_profile("qva", deadline=None, derandomize=True, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("qva")

small_ints = st.integers(-6, 6)


@st.composite
def qscalars(draw, max_terms: int = 3):
    """Random elements of Q(q) built from Laurent numerators and denominators."""
    def laurent():
        n = draw(st.integers(0, max_terms))
        return QScalar.laurent({draw(st.integers(-2, 2)): draw(st.integers(-5, 5)) for _ in range(n)})

    num = laurent()
    den = laurent()
    return num if den.is_zero() else num / den


def random_qscalar(rng: random.Random) -> QScalar:
    num = QScalar.laurent({rng.randint(-3, 3): rng.randint(-9, 9) for _ in range(rng.randint(0, 3))})
    den = QScalar.laurent({rng.randint(-3, 3): rng.randint(-9, 9) for _ in range(rng.randint(1, 3))})
    if den.is_zero():
        den = QScalar.from_rational(rng.randint(1, 7))
    return num / den


@pytest.fixture
def rng():
    return random.Random(20240601)
