import pytest

from pckit.circuit import Leaf, Product, Sum, validate
from pckit.oracle import OracleBudget


def pytest_addoption(parser):
    parser.addoption("--seed", type=int, default=0, help="base seed for randomized sweeps")
    parser.addoption(
        "--budget-vars", type=int, default=20, help="oracle enumeration variable budget"
    )


@pytest.fixture(scope="session")
def base_seed(request) -> int:
    return request.config.getoption("--seed")


@pytest.fixture(scope="session")
def budget(request) -> OracleBudget:
    return OracleBudget(max_vars=request.config.getoption("--budget-vars"))


@pytest.fixture
def bernoulli_pc():
    """Sum(0.3 x1, 0.7 not-x1): the smallest nontrivial PC."""
    return validate(1, [Leaf(1, True), Leaf(1, False), Sum((0, 1), (0.3, 0.7))], 2)


@pytest.fixture
def three_var_pc():
    """Smooth, decomposable, deterministic PC over x1..x3.

    Decision layers: the root splits on x3, inner sums split on x2, and the
    innermost sums mix both x1 literals. Weights are arbitrary but fixed.
    """
    nodes = [
        Leaf(1, True),  # 0
        Leaf(1, False),  # 1
        Sum((0, 1), (0.6, 0.4)),  # 2
        Sum((0, 1), (0.2, 0.8)),  # 3
        Leaf(2, True),  # 4
        Leaf(2, False),  # 5
        Product((4, 2)),  # 6
        Product((5, 3)),  # 7
        Sum((6, 7), (0.55, 0.45)),  # 8
        Sum((6, 7), (0.25, 0.75)),  # 9
        Leaf(3, True),  # 10
        Leaf(3, False),  # 11
        Product((10, 8)),  # 12
        Product((11, 9)),  # 13
        Sum((12, 13), (0.7, 0.3)),  # 14
    ]
    return validate(3, nodes, 14)
