import random

import pytest

from dynmember.tree import UnrankedTree


def random_tree(rng, size, alphabet):
    t = UnrankedTree(rng.choice(alphabet))
    for _ in range(size - 1):
        t.attach_last_child(rng.randrange(t.size), rng.choice(alphabet))
    return t


def random_word(rng, length, alphabet):
    return [rng.choice(alphabet) for _ in range(length)]


def random_wellformed(rng, length, internals="ac"):
    out = []

    def fill(budget):
        while budget > 0:
            if budget >= 2 and rng.random() < 0.5:
                inner = rng.randint(0, budget - 2)
                out.append("(")
                fill(inner)
                out.append(")")
                budget -= inner + 2
            else:
                out.append(rng.choice(internals))
                budget -= 1

    fill(length)
    return out


@pytest.fixture
def rng():
    return random.Random(12345)
