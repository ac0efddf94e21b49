import pytest

from turnq.games import DotsAndBoxes, GridSkirmish, TicTacToe


@pytest.fixture(scope="session")
def ttt():
    return TicTacToe()


@pytest.fixture(scope="session")
def dab11():
    return DotsAndBoxes(1, 1)


@pytest.fixture(scope="session")
def dab12():
    return DotsAndBoxes(1, 2)


@pytest.fixture(scope="session")
def tiny_skirmish():
    # 3x3, one infantry each, two rounds: 62 reachable states
    return GridSkirmish(
        width=3,
        height=3,
        units_p1=[("infantry", 0, 1, 2)],
        units_p2=[("infantry", 2, 1, 2)],
        duration=2,
        cities=[(1, 1)],
    )


@pytest.fixture(scope="session")
def small_skirmish():
    # 1v2 with a city: enough structure for combat and turn-chaining tests
    return GridSkirmish(
        width=3,
        height=3,
        units_p1=[("armor", 0, 1, 3)],
        units_p2=[("infantry", 2, 0, 2), ("infantry", 2, 2, 2)],
        duration=2,
        cities=[(1, 1)],
    )
