import numpy as np
import pytest

from deconfcap.rng import derive_rng
from deconfcap.scm import Cpd, Scm


def random_cpd(child, parents, cards, rng, concentration=1.0):
    n_rows = int(np.prod([cards[p] for p in parents])) if parents else 1
    table = rng.gamma(concentration, size=(n_rows, cards[child]))
    table /= table.sum(axis=1, keepdims=True)
    return Cpd(child, tuple(parents), table)


def make_confounded_scm(seed, cards=None, hidden=(), concentration=1.0):
    """Fig. 1(b) shape: D -> I, D -> L, I -> L."""
    rng = derive_rng(seed, "fixture-confounded")
    cards = cards or {"D": int(rng.integers(2, 4)), "I": int(rng.integers(2, 4)),
                      "L": int(rng.integers(2, 4))}
    cpds = [
        random_cpd("D", (), cards, rng, concentration),
        random_cpd("I", ("D",), cards, rng, concentration),
        random_cpd("L", ("D", "I"), cards, rng, concentration),
    ]
    return Scm.create(cards.items(), cpds, hidden)


def make_frontdoor_scm(seed, hidden=("D",), concentration=1.0):
    """Front-door shape: D -> I, D -> L, I -> Z, Z -> L."""
    rng = derive_rng(seed, "fixture-frontdoor")
    cards = {"D": int(rng.integers(2, 4)), "I": int(rng.integers(2, 4)),
             "Z": int(rng.integers(2, 4)), "L": int(rng.integers(2, 4))}
    cpds = [
        random_cpd("D", (), cards, rng, concentration),
        random_cpd("I", ("D",), cards, rng, concentration),
        random_cpd("Z", ("I",), cards, rng, concentration),
        random_cpd("L", ("D", "Z"), cards, rng, concentration),
    ]
    return Scm.create(cards.items(), cpds, hidden)


def make_dic_scm(seed, s_card=None, hidden=("D",), concentration=1.0):
    """Two-confounder mediated shape: D -> {I, L}, S -> {Z, L}, I -> Z -> L."""
    rng = derive_rng(seed, "fixture-dic")
    cards = {"D": int(rng.integers(2, 4)), "S": s_card or int(rng.integers(2, 4)),
             "I": int(rng.integers(2, 4)), "Z": int(rng.integers(2, 4)),
             "L": int(rng.integers(2, 4))}
    cpds = [
        random_cpd("D", (), cards, rng, concentration),
        random_cpd("S", (), cards, rng, concentration),
        random_cpd("I", ("D",), cards, rng, concentration),
        random_cpd("Z", ("I", "S"), cards, rng, concentration),
        random_cpd("L", ("D", "S", "Z"), cards, rng, concentration),
    ]
    return Scm.create(cards.items(), cpds, hidden)


@pytest.fixture
def bernoulli_scm():
    return Scm.create([("A", 2)], [Cpd("A", (), np.array([[0.7, 0.3]]))])


@pytest.fixture
def copy_chain_scm():
    return Scm.create(
        [("A", 2), ("B", 2)],
        [
            Cpd("A", (), np.array([[0.4, 0.6]])),
            Cpd("B", ("A",), np.array([[1.0, 0.0], [0.0, 1.0]])),
        ],
    )
