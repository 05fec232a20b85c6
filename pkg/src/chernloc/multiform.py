"""Finitely generated graded-commutative form algebras.

A :class:`GeneratorTable` declares named generators with integer degrees and
assigned differentials, plus an ambient top degree ``d`` above which products
are silently truncated (modelling the vanishing of forms beyond the dimension
of the underlying space).  Every table carries a reserved degree (-1)
generator ``sigma`` with ``sigma^2 = 0``; elements split as
``theta = theta' + sigma * theta''``.

Elements are sparse :class:`FormElement` values: maps from canonically sorted
monomials to coefficients.  Products follow the Koszul rule
``x*y = (-1)^{|x||y|} y*x``; the differential of the extended algebra is
``d_T = d - iota`` with ``iota(theta' + sigma*theta'') = theta''``.
"""

from __future__ import annotations

import re as _re
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction

from .scalars import QC, QC_ONE, QC_ZERO, coerce, iszero

SIGMA = "sigma"
SIGMA_ID = 0


class TableMismatchError(ValueError):
    """Raised when elements over different generator tables are combined."""


class GeneratorTable:
    """Generators, degrees, differentials and the ambient top degree."""

    def __init__(self, top_degree, generators=()):
        top_degree = int(top_degree)
        if top_degree <= 0 or top_degree % 2:
            raise ValueError("top degree must be a positive even integer")
        self.top_degree = top_degree
        self._names = [SIGMA]
        self._degrees = [-1]
        self._ids = {SIGMA: SIGMA_ID}
        self._diffs = {}
        for name, deg in generators:
            self.add_generator(name, deg)

    # -- construction -------------------------------------------------
    def add_generator(self, name, degree):
        if name in self._ids:
            raise ValueError(f"generator {name!r} already defined")
        if not _re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", name):
            raise ValueError(f"bad generator name {name!r}")
        degree = int(degree)
        if degree < 1:
            raise ValueError("non-sigma generators must have degree >= 1")
        gid = len(self._names)
        self._names.append(name)
        self._degrees.append(degree)
        self._ids[name] = gid
        return self.gen(name)

    def set_differential(self, name, form):
        gid = self._ids[name]
        if gid == SIGMA_ID:
            raise ValueError("sigma has no assignable differential")
        if isinstance(form, str):
            form = self.parse(form)
        if not isinstance(form, FormElement) or form.table is not self:
            raise TableMismatchError("differential must live in the same table")
        self._diffs[gid] = form

    @classmethod
    def build(cls, top_degree, entries):
        """Create a table from (name, degree, differential-or-None) triples.

        Differentials may be expression strings; they are resolved after all
        generators exist, so forward references are fine.
        """
        table = cls(top_degree)
        for name, degree, _ in entries:
            table.add_generator(name, degree)
        for name, _, diff in entries:
            if diff not in (None, 0, "0", ""):
                table.set_differential(name, diff)
        return table

    # -- lookup ---------------------------------------------------------
    @property
    def names(self):
        return tuple(self._names)

    def degree_of(self, gid):
        return self._degrees[gid]

    def parity_of(self, gid):
        return self._degrees[gid] & 1

    def differential(self, gid):
        form = self._diffs.get(gid)
        return form if form is not None else self.zero()

    def gen(self, name):
        gid = self._ids[name]
        return FormElement(self, {(gid,): QC_ONE})

    def sigma(self):
        return FormElement(self, {(SIGMA_ID,): QC_ONE})

    def zero(self):
        return FormElement(self, {})

    def one(self):
        return FormElement(self, {(): QC_ONE})

    def scalar(self, c):
        c = coerce(c)
        return FormElement(self, {} if iszero(c) else {(): c})

    # -- monomial helpers -------------------------------------------------
    def mono_degree(self, mono):
        return sum(self._degrees[g] for g in mono)

    def mono_nonsigma_degree(self, mono):
        return sum(self._degrees[g] for g in mono if g != SIGMA_ID)

    def mono_parity(self, mono):
        return self.mono_degree(mono) & 1

    def mono_str(self, mono):
        if not mono:
            return "1"
        parts = []
        i = 0
        while i < len(mono):
            j = i
            while j < len(mono) and mono[j] == mono[i]:
                j += 1
            name = self._names[mono[i]]
            parts.append(name if j - i == 1 else f"{name}^{j - i}")
            i = j
        return " ".join(parts)

    def mul_monomials(self, ma, mb):
        """Product of two sorted monomials: (monomial, sign) or (None, 0)."""
        sign = 1
        if ma and mb:
            odd_a = [g for g in ma if self._degrees[g] & 1]
            for g in mb:
                if self._degrees[g] & 1:
                    crossings = len(odd_a) - bisect_right(odd_a, g)
                    if crossings & 1:
                        sign = -sign
        merged = tuple(sorted(ma + mb))
        prev = -1
        nonsigma = 0
        for g in merged:
            deg = self._degrees[g]
            if deg & 1 and g == prev:
                return None, 0
            prev = g
            if g != SIGMA_ID:
                nonsigma += deg
        if nonsigma > self.top_degree:
            return None, 0
        return merged, sign

    # -- parsing / serialization ----------------------------------------
    def parse(self, text):
        return parse_form(self, text)

    @classmethod
    def from_text(cls, document):
        """Load a table from a plain-text description.

        One directive per line; ``#`` starts a comment.  The first data line
        is ``d <top-degree>``; each following line is
        ``<name> <degree> <differential-expression-or-0>``.
        """
        top = None
        entries = []
        for raw in document.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split(None, 2)
            if top is None:
                if parts[0] != "d" or len(parts) != 2:
                    raise ValueError("first directive must be 'd <top-degree>'")
                top = int(parts[1])
                continue
            if len(parts) < 2:
                raise ValueError(f"bad generator line: {raw!r}")
            name, deg = parts[0], int(parts[1])
            diff = parts[2] if len(parts) == 3 else "0"
            entries.append((name, deg, diff))
        if top is None:
            raise ValueError("empty table document")
        return cls.build(top, entries)

    def to_text(self):
        lines = [f"d {self.top_degree}"]
        for gid in range(1, len(self._names)):
            diff = self._diffs.get(gid)
            dstr = "0" if diff is None or diff.is_zero() else diff.canonical_str()
            lines.append(f"{self._names[gid]} {self._degrees[gid]} {dstr}")
        return "\n".join(lines) + "\n"


class FormElement:
    """Sparse element of a graded-commutative form algebra."""

    __slots__ = ("table", "terms", "_hash")

    def __init__(self, table, terms):
        self.table = table
        self.terms = {m: c for m, c in terms.items() if not iszero(c)}
        self._hash = None

    # -- basics -----------------------------------------------------------
    def is_zero(self):
        return not self.terms

    def coefficient(self, mono):
        return self.terms.get(tuple(mono), QC_ZERO)

    def constant_term(self):
        return self.terms.get((), QC_ZERO)

    def __iter__(self):
        return iter(self.terms.items())

    def _check(self, other):
        if self.table is not other.table:
            raise TableMismatchError("elements over different generator tables")

    # -- linear structure ---------------------------------------------------
    def __add__(self, other):
        if isinstance(other, FormElement):
            self._check(other)
            out = dict(self.terms)
            for m, c in other.terms.items():
                s = out.get(m, QC_ZERO) + c
                if iszero(s):
                    out.pop(m, None)
                else:
                    out[m] = s
            return FormElement(self.table, out)
        if other == 0:
            return self
        return self + self.table.scalar(other)

    __radd__ = __add__

    def __neg__(self):
        return FormElement(self.table, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, FormElement)
                       else self.table.scalar(other).__neg__())

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        c = coerce(c)
        if iszero(c):
            return self.table.zero()
        return FormElement(self.table, {m: c * v for m, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, FormElement):
            self._check(other)
            table = self.table
            out = {}
            for ma, ca in self.terms.items():
                for mb, cb in other.terms.items():
                    mono, sign = table.mul_monomials(ma, mb)
                    if mono is None:
                        continue
                    c = ca * cb
                    if sign < 0:
                        c = -c
                    s = out.get(mono, QC_ZERO) + c
                    if iszero(s):
                        out.pop(mono, None)
                    else:
                        out[mono] = s
            return FormElement(table, out)
        return self.scale(other)

    def __rmul__(self, other):
        # scalars commute with everything by centrality of the coefficient ring
        return self.scale(other)

    # -- grading -------------------------------------------------------------
    def homogeneous_parts(self):
        """Decomposition by integer degree (sigma counts -1)."""
        table = self.table
        parts = {}
        for m, c in self.terms.items():
            parts.setdefault(table.mono_degree(m), {})[m] = c
        return {deg: FormElement(table, t) for deg, t in sorted(parts.items())}

    def degree(self):
        degs = {self.table.mono_degree(m) for m in self.terms}
        if not degs:
            return None
        if len(degs) > 1:
            raise ValueError("element is not degree-homogeneous")
        return degs.pop()

    def parity(self):
        pars = {self.table.mono_degree(m) & 1 for m in self.terms}
        if not pars:
            return None
        if len(pars) > 1:
            raise ValueError("element has mixed parity")
        return pars.pop()

    def top_component(self):
        """The sigma-free component of top degree (the integrand of the
        fiberwise integral)."""
        table = self.table
        top = table.top_degree
        out = {m: c for m, c in self.terms.items()
               if SIGMA_ID not in m and table.mono_degree(m) == top}
        return FormElement(table, out)

    # -- sigma structure -------------------------------------------------------
    def split_sigma(self):
        """theta -> (theta', theta'') with theta = theta' + sigma*theta''."""
        prime, second = {}, {}
        for m, c in self.terms.items():
            if m and m[0] == SIGMA_ID:
                second[m[1:]] = c
            else:
                prime[m] = c
        return FormElement(self.table, prime), FormElement(self.table, second)

    def iota(self):
        return self.split_sigma()[1]

    # -- differentials ------------------------------------------------------------
    def d(self):
        """Extension of the generator differentials as an odd derivation."""
        table = self.table
        result = table.zero()
        for mono, coeff in self.terms.items():
            prefix_parity = 0
            for pos, g in enumerate(mono):
                dg = table.differential(g)
                if not dg.is_zero():
                    left = FormElement(table, {mono[:pos]: QC_ONE})
                    right = FormElement(table, {mono[pos + 1:]: QC_ONE})
                    term = left * dg * right
                    result += term.scale(-coeff if prefix_parity else coeff)
                prefix_parity ^= table.parity_of(g)
        return result

    def d_T(self):
        return self.d() - self.iota()

    # -- hashing / equality ---------------------------------------------------------
    def _key(self):
        return tuple(sorted(self.terms.items(), key=lambda kv: kv[0]))

    def __eq__(self, other):
        if isinstance(other, FormElement):
            return self.table is other.table and self.terms == other.terms
        if other == 0:
            return self.is_zero()
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._key())
        return self._hash

    # -- printing -------------------------------------------------------------------
    def canonical_str(self):
        if not self.terms:
            return "0"
        table = self.table
        keyed = sorted(self.terms.items(),
                       key=lambda kv: (table.mono_degree(kv[0]), kv[0]))
        parts = []
        for m, c in keyed:
            cs = str(c)
            parts.append(cs if not m else f"{cs} * {table.mono_str(m)}")
        return " + ".join(parts)

    def __str__(self):
        return self.canonical_str()

    def __repr__(self):
        return f"<form {self.canonical_str()}>"


# -- module-level operation surface ---------------------------------------------

def wedge(a, b):
    """Graded-commutative product, truncated above the ambient top degree."""
    return a * b


def split_sigma(theta):
    return theta.split_sigma()


def d_T(theta):
    return theta.d_T()


@dataclass
class DgaReport:
    ok: bool
    failures: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


def check_dga(table):
    """Verify degree bookkeeping and d^2 = 0 on all generators."""
    failures = []
    for gid in range(len(table.names)):
        name = table.names[gid]
        dg = table.differential(gid)
        if gid == SIGMA_ID:
            if not dg.is_zero():
                failures.append(f"{name}: sigma must be closed")
            continue
        if table.degree_of(gid) < 1:
            failures.append(f"{name}: degree must be >= 1")
        if dg.is_zero():
            continue
        if any(SIGMA_ID in m for m in dg.terms):
            failures.append(f"{name}: differential must be sigma-free")
            continue
        try:
            deg = dg.degree()
        except ValueError:
            failures.append(f"{name}: differential is not homogeneous")
            continue
        if deg != table.degree_of(gid) + 1:
            failures.append(
                f"{name}: differential has degree {deg}, expected "
                f"{table.degree_of(gid) + 1}")
        if not dg.d().is_zero():
            failures.append(f"{name}: d^2 != 0")
    return DgaReport(not failures, failures)


# -- series utilities on nilpotent elements ----------------------------------------

def exp_nilpotent(u):
    """exp(u) for a form with zero constant term (finite by nilpotency)."""
    if not iszero(u.constant_term()):
        raise ValueError("exp requires a nilpotent element (no constant term)")
    table = u.table
    out = table.one()
    term = table.one()
    k = 1
    while True:
        term = term * u
        if term.is_zero():
            return out
        out += term.scale(Fraction(1, _factorial(k)))
        k += 1


def log_one_plus(u):
    """log(1 + u) for a form u with zero constant term."""
    if not iszero(u.constant_term()):
        raise ValueError("log(1+u) requires u without constant term")
    table = u.table
    out = table.zero()
    power = table.one()
    k = 1
    while True:
        power = power * u
        if power.is_zero():
            return out
        c = Fraction(1, k) if k % 2 else Fraction(-1, k)
        out += power.scale(c)
        k += 1


def inverse_unit(f):
    """Inverse of a form whose constant term is invertible."""
    c0 = f.constant_term()
    if iszero(c0):
        raise ValueError("element has no constant term; not invertible")
    c0 = coerce(c0)
    inv0 = QC(1) / c0 if isinstance(c0, QC) else 1.0 / c0
    u = f.scale(inv0) - f.table.one()   # nilpotent part of f/c0
    out = f.table.one()
    power = f.table.one()
    sign = 1
    while True:
        power = power * u
        if power.is_zero():
            return out.scale(inv0)
        sign = -sign
        out += power.scale(sign)


def _factorial(n):
    out = 1
    for k in range(2, n + 1):
        out *= k
    return out


# -- expression parser ---------------------------------------------------------------

def _parse_coeff(text):
    """Parse 'a', 'a/b', 'ai', 'i', or '(a+bi)' into an exact/inexact scalar."""
    text = text.strip()
    if text.startswith("(") and text.endswith(")"):
        inner = text[1:-1].replace(" ", "")
        m = _re.fullmatch(
            r"(?P<re>[+-]?\d+(?:/\d+)?(?:\.\d+)?)"
            r"(?P<sign>[+-])(?P<im>\d+(?:/\d+)?(?:\.\d+)?)?i", inner)
        if not m:
            raise ValueError(f"bad complex coefficient {text!r}")
        re_part = m.group("re")
        im_part = m.group("im") or "1"
        if m.group("sign") == "-":
            im_part = "-" + im_part
        if "." in re_part or "." in im_part:
            return complex(float(Fraction(re_part)), float(Fraction(im_part)))
        return QC(Fraction(re_part), Fraction(im_part))
    if text == "i":
        return QC(0, 1)
    if text.endswith("i"):
        body = text[:-1]
        if "." in body:
            return complex(0, float(body))
        return QC(0, Fraction(body))
    if "." in text:
        return complex(float(text))
    return QC(Fraction(text))


def parse_form(table, text):
    """Parse the canonical text format: sums of 'coeff * gen^k gen2 ...'.

    Multiplication may be written with '*' or juxtaposition by spaces.
    """
    text = text.strip()
    if text in ("", "0"):
        return table.zero()
    result = table.zero()
    # split into signed terms at top level (no parentheses nesting except coeffs)
    terms = []
    depth = 0
    cur = ""
    sign = 1
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch in "+-" and depth == 0 and cur.strip():
            terms.append((sign, cur))
            sign = 1 if ch == "+" else -1
            cur = ""
        elif ch in "+-" and depth == 0 and not cur.strip():
            sign = sign if ch == "+" else -sign
        else:
            cur += ch
    if cur.strip():
        terms.append((sign, cur))
    for sgn, term in terms:
        factors = [f for chunk in term.split("*") for f in chunk.split()]
        value = table.one().scale(sgn)
        for fac in factors:
            fac = fac.strip()
            if not fac:
                continue
            m = _re.fullmatch(r"([A-Za-z_][A-Za-z_0-9]*)(?:\^(\d+))?", fac)
            if m and m.group(1) in table._ids:
                g = table.gen(m.group(1))
                for _ in range(int(m.group(2) or 1)):
                    value = value * g
            else:
                value = value.scale(_parse_coeff(fac))
        result += value
    return result
