import numpy as np
import pytest


def bits(text: str) -> np.ndarray:
    return np.array([int(c) for c in text], dtype=np.uint8)


def as_text(x) -> str:
    return "".join(str(int(v)) for v in x)


@pytest.fixture
def to_bits():
    return bits
