import numpy as np
import pytest

from quasivar import Objective, QpmSpace


@pytest.fixture
def three_point():
    """Symmetric 3-point space with a, b adjacent and c reachable through b."""
    space = QpmSpace.finite(["a", "b", "c"],
                            [[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    f = Objective.from_values({"a": 3.0, "b": 1.0, "c": 0.0})
    return space, f


@pytest.fixture
def upper_grid():
    """{0, 0.5, 1} with the one-sided distance max(y - x, 0)."""
    vals = [0.0, 0.5, 1.0]
    mat = [[max(y - x, 0.0) for y in vals] for x in vals]
    return QpmSpace.finite(["0", "0.5", "1"], np.asarray(mat))
