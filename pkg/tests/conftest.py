import numpy as np
import pytest

from seqreg import FunctionClass, LabeledTree


@pytest.fixture
def two_constants():
    """Constants +0.5 and -0.5 on a one-point domain; fat_1 = 1."""
    return FunctionClass([[0.5], [-0.5]], names=["plus", "minus"])


@pytest.fixture
def small_class():
    rng = np.random.default_rng(7)
    return FunctionClass(rng.uniform(-1, 1, (4, 3)))


@pytest.fixture
def depth3_tree():
    return LabeledTree(3, [0, 1, 0, 1, 1, 0, 0])


def sign_class(num_points: int, level: float = 0.5) -> FunctionClass:
    """All +-level sign patterns on num_points covariates."""
    from itertools import product

    rows = [list(p) for p in product([level, -level], repeat=num_points)]
    return FunctionClass(rows)


def level_tree(depth: int) -> LabeledTree:
    """Covariate tree whose level t is constantly covariate t-1."""
    labels = []
    for t in range(1, depth + 1):
        labels += [t - 1] * (1 << (t - 1))
    return LabeledTree(depth, labels)
