# pylint: disable=missing-module-docstring
# pylint: disable=missing-function-docstring

from pathlib import Path
import pytest
from loopcutter.model import (
    AccessGraph,
    AccessTree,
    CostParams,
    Edge,
    EdgeCosts,
    Node,
    NodeKind,
    PowerModel,
)


def make_chain(trunk_m: float = 1000.0) -> AccessTree:
    """Office R, candidate A at `trunk_m`, customers c1 (400 m) and c2 (600 m)
    below A; only the trunk carries a fiber price ($500)"""
    return AccessTree(
        [
            Node("R", NodeKind.OFFICE),
            Node("A", NodeKind.CANDIDATE),
            Node("c1", NodeKind.CUSTOMER),
            Node("c2", NodeKind.CUSTOMER),
        ],
        [
            Edge("A", "R", EdgeCosts(trunk_m, fiber_install=500.0)),
            Edge("c1", "A", EdgeCosts(400.0)),
            Edge("c2", "A", EdgeCosts(600.0)),
        ],
    )


@pytest.fixture
def pm() -> PowerModel:
    return PowerModel.desk()


@pytest.fixture
def params() -> CostParams:
    return CostParams()


@pytest.fixture
def chain() -> AccessTree:
    return make_chain()


@pytest.fixture
def short_chain() -> AccessTree:
    return make_chain(800.0)


@pytest.fixture
def triangle() -> AccessGraph:
    """S office, a candidate, u customer; digging S-a-u is cheaper than S-u"""
    return AccessGraph(
        [
            Node("S", NodeKind.OFFICE),
            Node("a", NodeKind.CANDIDATE),
            Node("u", NodeKind.CUSTOMER),
        ],
        [
            Edge("S", "a", EdgeCosts(10.0, dig=10.0, copper_install=10.0, fiber_install=5.0)),
            Edge("a", "u", EdgeCosts(10.0, dig=10.0, copper_install=10.0, fiber_install=5.0)),
            Edge("S", "u", EdgeCosts(30.0, dig=30.0, copper_install=30.0, fiber_install=15.0)),
        ],
    )


@pytest.fixture
def chain_with_trunk():
    return make_chain


GOLDEN_DIR = Path(__file__).parent / "golden"


def pytest_addoption(parser: pytest.Parser) -> None:
    parser.addoption(
        "--update-golden",
        action="store_true",
        default=False,
        help="rewrite files under tests/golden from the current output",
    )


@pytest.fixture
def golden(request: pytest.FixtureRequest):
    """Compares text with tests/golden/<name>, byte for byte

    A missing file is recorded from the first run and the test is skipped;
    `--update-golden` rewrites every file a test touches.
    """
    update = request.config.getoption("--update-golden")

    def check(name: str, text: str) -> None:
        path = GOLDEN_DIR / name
        if update or not path.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(text.encode("utf-8"))
            if not update:
                pytest.skip(f"recorded {path}; rerun to compare")
            return
        assert text.encode("utf-8") == path.read_bytes()

    return check
