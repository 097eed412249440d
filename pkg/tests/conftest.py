import numpy as np
import pytest
from scipy.linalg import expm

from holderbvp.grid import Interval

UNIT = Interval(0.0, 1.0)


def _rotation(theta):
    return np.array([[np.cos(theta), -np.sin(theta)],
                     [np.sin(theta), np.cos(theta)]])


# Corpus of coefficient matrices (m in {1, 2, 3}; constant, polynomial,
# trigonometric entries).  ``exact`` is a closed-form matriciant anchored at
# t0 = 0 where one exists, else None.
SYSTEMS = [
    ("const1", [["1"]], lambda t: np.array([[np.exp(-t)]])),
    ("poly1", [["t"]], lambda t: np.array([[np.exp(-t * t / 2)]])),
    ("trig1", [["sin(t)"]], lambda t: np.array([[np.exp(np.cos(t) - 1.0)]])),
    ("rot2", [["0", "1"], ["-1", "0"]],
     lambda t: expm(-t * np.array([[0.0, 1.0], [-1.0, 0.0]]))),
    ("poly2", [["0", "t"], ["-t", "0"]], lambda t: _rotation(t * t / 2)),
    ("mix2", [["0.5", "sin(t)"], ["0.2i", "-0.25"]], None),
    ("nilp3", [["0", "1", "0"], ["0", "0", "1"], ["0", "0", "0"]],
     lambda t: expm(-t * np.array([[0, 1, 0], [0, 0, 1], [0, 0, 0.0]]))),
    ("tri3", [["t", "1", "0"], ["0", "sin(t)", "1"], ["0", "0", "0.3"]], None),
]

CONSTANT_SYSTEMS = {"const1": [[1.0]],
                    "rot2": [[0.0, 1.0], [-1.0, 0.0]],
                    "nilp3": [[0, 1, 0], [0, 0, 1], [0, 0, 0]]}


@pytest.fixture(scope="session")
def unit_interval():
    return UNIT


@pytest.fixture(scope="session", params=[s[0] for s in SYSTEMS])
def system(request):
    name = request.param
    entries, exact = next((e, x) for n, e, x in SYSTEMS if n == name)
    return name, entries, exact
