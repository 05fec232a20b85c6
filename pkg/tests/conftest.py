import random
from fractions import Fraction

import pytest

from chernloc.formmatrix import FormMatrix
from chernloc.mehler import CurvatureMatrix
from chernloc.multiform import GeneratorTable


@pytest.fixture(scope="session")
def curvature_d2():
    table = GeneratorTable(2)
    table.add_generator("w", 2)
    w = table.gen("w")
    R = CurvatureMatrix(table, 2, FormMatrix(table, [[table.zero(), w],
                                                     [-w, table.zero()]]))
    return table, R


@pytest.fixture(scope="session")
def curvature_d4():
    table = GeneratorTable(4)
    table.add_generator("u", 2)
    table.add_generator("v", 2)
    u, v = table.gen("u"), table.gen("v")
    z = table.zero()
    R = CurvatureMatrix(table, 4, FormMatrix(table, [
        [z, u, z, v],
        [-u, z, v, z],
        [z, -v, z, u],
        [-v, z, -u, z],
    ]))
    return table, R


@pytest.fixture(scope="session")
def model_table():
    """A table whose even generators are not closed, so idempotent words
    carry nonzero curvature and a nonzero sigma part of (dp)^2."""
    table = GeneratorTable(6)
    table.add_generator("y", 3)
    table.add_generator("w", 2)
    table.set_differential("w", "y")
    table.add_generator("z", 3)
    table.add_generator("v", 2)
    table.set_differential("v", "z")
    return table


def make_rng(seed):
    return random.Random(seed)


def random_rule_cochain(table, rng, parity, max_arity=2):
    """Finitely supported scalar cochain with exact rational values whose
    rules respect the declared (shifted) parity."""
    from chernloc.barcomplex import Cochain
    from chernloc.sampling import random_homogeneous_form
    from chernloc.scalars import QC
    rules = {}
    for _ in range(rng.randint(1, 4)):
        arity = rng.randint(0, max_arity)
        word = []
        ok = True
        for _ in range(arity):
            f = random_homogeneous_form(table, rng)
            if f.is_zero():
                ok = False
                break
            word.append(rng.choice(list(f.terms)))
        if not ok:
            continue
        word = tuple(word)
        n_par = (sum(table.mono_degree(m) for m in word) - len(word)) & 1
        if n_par != parity:
            continue
        rules[word] = QC(Fraction(rng.randint(-3, 3), rng.choice([1, 2])))
    return Cochain.from_rules(table, rules, parity)


def random_antisymmetric_curvature(table, d, rng, density=0.7):
    gens = [g for g in range(1, len(table.names)) if table.degree_of(g) == 2]
    z = table.zero()
    rows = [[z] * d for _ in range(d)]
    from chernloc.multiform import FormElement
    from chernloc.scalars import QC
    for i in range(d):
        for j in range(i + 1, d):
            if rng.random() < density and gens:
                g = rng.choice(gens)
                c = QC(Fraction(rng.randint(-2, 2), rng.choice([1, 2])))
                if c:
                    e = FormElement(table, {(g,): c})
                    rows[i][j] = rows[i][j] + e
                    rows[j][i] = rows[j][i] - e
    return CurvatureMatrix(table, d, FormMatrix(table, rows))
