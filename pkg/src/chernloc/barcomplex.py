"""Bar complex of a sigma-extended form algebra, cyclic chains and cochains.

Chains are stored in a canonical basis: every tensor word is expanded
multilinearly until each slot is a single monomial with coefficient one, the
scalars being hoisted into the chain coefficient.  This makes all the signed
identities (b0^2 = 0, b0 b1 + b1 b0 = 0, cyclic invariance) exact coefficient
computations.

Degree bookkeeping follows the shifted convention
``n_k = |theta_1| + ... + |theta_k| - k`` for words of homogeneous entries.
"""

from __future__ import annotations

from math import factorial

import numpy as np

from .multiform import FormElement
from .scalars import QC, QC_ONE, QC_ZERO, coerce, iszero

# -- chains -------------------------------------------------------------------


class BarChain:
    """Formal linear combination of bar words over one generator table.

    Internally a word is a tuple of monomials (each slot homogeneous by
    construction); the public constructors accept words of FormElements.
    """

    __slots__ = ("table", "terms")

    def __init__(self, table, terms=None):
        self.table = table
        self.terms = {}
        if terms:
            for word, c in terms.items():
                if not iszero(c):
                    self.terms[word] = c

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls, table):
        return cls(table, {})

    @classmethod
    def from_word(cls, table, word, coeff=1):
        """Expand a word of FormElements into the monomial basis."""
        return cls.from_words(table, [(coeff, word)])

    @classmethod
    def from_words(cls, table, weighted_words):
        out = {}
        for coeff, word in weighted_words:
            coeff = coerce(coeff)
            if iszero(coeff):
                continue
            expansions = [((), coeff)]
            dead = False
            for entry in word:
                if not isinstance(entry, FormElement):
                    raise TypeError("word entries must be FormElements")
                if entry.table is not table:
                    raise ValueError("word entry over a different table")
                if entry.is_zero():
                    dead = True
                    break
                new = []
                for prefix, c in expansions:
                    for mono, mc in entry.terms.items():
                        new.append((prefix + (mono,), c * mc))
                expansions = new
            if dead:
                continue
            for key, c in expansions:
                s = out.get(key, QC_ZERO) + c
                if iszero(s):
                    out.pop(key, None)
                else:
                    out[key] = s
        return cls(table, out)

    # -- linear structure ----------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, BarChain):
            return NotImplemented
        if self.table is not other.table:
            raise ValueError("chains over different tables")
        out = dict(self.terms)
        for w, c in other.terms.items():
            s = out.get(w, QC_ZERO) + c
            if iszero(s):
                out.pop(w, None)
            else:
                out[w] = s
        return BarChain(self.table, out)

    def __neg__(self):
        return BarChain(self.table, {w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        c = coerce(c)
        if iszero(c):
            return BarChain.zero(self.table)
        return BarChain(self.table, {w: c * v for w, v in self.terms.items()})

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        if isinstance(other, BarChain):
            return self.table is other.table and self.terms == other.terms
        if other == 0:
            return self.is_zero()
        return NotImplemented

    def __iter__(self):
        return iter(self.terms.items())

    def __len__(self):
        return len(self.terms)

    def max_length(self):
        return max((len(w) for w in self.terms), default=0)

    def length_component(self, n):
        return BarChain(self.table, {w: c for w, c in self.terms.items() if len(w) == n})

    def word_degrees(self, word):
        return [self.table.mono_degree(m) for m in word]

    # -- serialization ----------------------------------------------------------
    def to_lists(self):
        """Nested-list text form: [[coeff, [slot, slot, ...]], ...]."""
        table = self.table
        rows = []
        for word in sorted(self.terms, key=lambda w: (len(w), w)):
            coeff = self.terms[word]
            rows.append([str(coeff), [table.mono_str(m) for m in word]])
        return rows

    @classmethod
    def from_lists(cls, table, rows):
        words = []
        for coeff, slots in rows:
            word = tuple(table.parse(s) for s in slots)
            words.append((table.parse(str(coeff)).constant_term() if isinstance(coeff, str)
                          else coerce(coeff), word))
        return cls.from_words(table, words)

    def __str__(self):
        if not self.terms:
            return "0"
        table = self.table
        rows = []
        for word in sorted(self.terms, key=lambda w: (len(w), w)):
            slots = ", ".join(table.mono_str(m) for m in word)
            rows.append(f"{self.terms[word]} * ({slots})")
        return " + ".join(rows)

    __repr__ = __str__


def _shifted_prefix_parities(table, word):
    """Parities of n_k = |m_1| + ... + |m_k| - k for k = 0..N."""
    out = [0]
    acc = 0
    for mono in word:
        acc += table.mono_degree(mono) - 1
        out.append(acc & 1)
    return out


def _prefix_degrees(table, word):
    out = [0]
    acc = 0
    for mono in word:
        acc += table.mono_degree(mono) - 1
        out.append(acc)
    return out


def b0(chain):
    """Differential induced by d_T with signs (-1)^(n_{k-1})."""
    table = chain.table
    out = BarChain.zero(table)
    for word, coeff in chain.terms.items():
        pars = _shifted_prefix_parities(table, word)
        for k, mono in enumerate(word):
            dtheta = FormElement(table, {mono: QC_ONE}).d_T()
            if dtheta.is_zero():
                continue
            sign_coeff = -coeff if pars[k] else coeff
            pieces = [(sign_coeff * mc,
                       word[:k] + (m2,) + word[k + 1:])
                      for m2, mc in dtheta.terms.items()]
            out += BarChain(table, dict(_combine(pieces)))
    return out


def b1(chain):
    """Differential contracting adjacent slots with the algebra product."""
    table = chain.table
    out = BarChain.zero(table)
    for word, coeff in chain.terms.items():
        pars = _shifted_prefix_parities(table, word)
        for k in range(len(word) - 1):
            left = FormElement(table, {word[k]: QC_ONE})
            right = FormElement(table, {word[k + 1]: QC_ONE})
            prod = left * right
            if prod.is_zero():
                continue
            sign_coeff = coeff if pars[k + 1] else -coeff
            pieces = [(sign_coeff * mc,
                       word[:k] + (m2,) + word[k + 2:])
                      for m2, mc in prod.terms.items()]
            out += BarChain(table, dict(_combine(pieces)))
    return out


def _combine(pieces):
    acc = {}
    for c, w in pieces:
        s = acc.get(w, QC_ZERO) + c
        if iszero(s):
            acc.pop(w, None)
        else:
            acc[w] = s
    return acc.items()


def b(chain):
    return b0(chain) + b1(chain)


def cyclic_symmetrize(word_or_chain, table=None):
    """Signed sum of cyclic rotations, one term per rotation.

    The rotation by k carries the sign (-1)^(n_k (n_N - n_k)).
    """
    if isinstance(word_or_chain, BarChain):
        chain = word_or_chain
    else:
        if table is None:
            table = word_or_chain[0].table if word_or_chain else None
            if table is None:
                raise ValueError("need a table for the empty word")
        chain = BarChain.from_word(table, word_or_chain)
    table = chain.table
    out = BarChain.zero(table)
    for word, coeff in chain.terms.items():
        n = len(word)
        if n == 0:
            out += BarChain(table, {word: coeff})
            continue
        degs = _prefix_degrees(table, word)
        n_total = degs[n]
        acc = {}
        for k in range(n):
            nk = degs[k]
            sign = -1 if (nk * (n_total - nk)) & 1 else 1
            rotated = word[k:] + word[:k]
            c = coeff if sign > 0 else -coeff
            s = acc.get(rotated, QC_ZERO) + c
            if iszero(s):
                acc.pop(rotated, None)
            else:
                acc[rotated] = s
        out += BarChain(table, acc)
    return out


def is_cyclic(chain, tol=None):
    """Membership in the span of symmetrized words.

    The symmetrization S satisfies S^2 = N S on length-N words, so the
    cyclic subspace is exactly the eigenspace S x = N x.
    """
    for n in sorted({len(w) for w in chain.terms}):
        comp = chain.length_component(n)
        if n == 0:
            continue
        delta = cyclic_symmetrize(comp) - comp.scale(n)
        if tol is None:
            if not delta.is_zero():
                return False
        else:
            if any(abs(complex(c)) > tol for c in delta.terms.values()):
                return False
    return True


def restrict_i(chain):
    """(theta_1, ..., theta_N) -> (1/N!) theta_1'' ^ ... ^ theta_N''."""
    table = chain.table
    out = table.zero()
    for word, coeff in chain.terms.items():
        value = table.one()
        dead = False
        for mono in word:
            second = FormElement(table, {mono: QC_ONE}).iota()
            if second.is_zero():
                dead = True
                break
            value = value * second
            if value.is_zero():
                dead = True
                break
        if dead:
            continue
        out += value.scale(coeff * QC(1) / factorial(len(word)))
    return out


# -- cochains -------------------------------------------------------------------


class Cochain:
    """Multilinear functional on bar words with scalar or matrix values.

    ``components[N]`` maps a length-N monomial word to a value; missing
    arities evaluate to zero.  ``parity`` refers to the shifted grading, so
    an even cochain takes values of parity n_N on a word with
    n_N = sum |theta_i| - N.
    """

    __slots__ = ("table", "parity", "kind", "dim", "components")

    def __init__(self, table, parity, components, kind="scalar", dim=None):
        self.table = table
        self.parity = parity & 1
        self.kind = kind
        self.dim = dim
        if kind == "matrix" and not dim:
            raise ValueError("matrix cochains need a dimension")
        self.components = dict(components)

    # -- value helpers ---------------------------------------------------------
    def zero_value(self):
        if self.kind == "matrix":
            return np.zeros((self.dim, self.dim), dtype=complex)
        return QC_ZERO

    def _vadd(self, a, b):
        return a + b

    def _vmul(self, a, b):
        if self.kind == "matrix":
            return a @ b
        return a * b

    def _vscale(self, c, a):
        if self.kind == "matrix":
            return complex(c) * a
        return c * a

    def _viszero(self, a):
        if self.kind == "matrix":
            return not np.any(a)
        return iszero(a)

    # -- evaluation -------------------------------------------------------------
    def eval_word(self, word):
        fn = self.components.get(len(word))
        if fn is None:
            return self.zero_value()
        return fn(word)

    def eval_chain(self, chain):
        out = self.zero_value()
        for word, coeff in chain.terms.items():
            v = self.eval_word(word)
            if not self._viszero(v):
                out = self._vadd(out, self._vscale(coeff, v))
        return out

    def __call__(self, arg):
        if isinstance(arg, BarChain):
            return self.eval_chain(arg)
        return self.eval_chain(BarChain.from_word(self.table, tuple(arg)))

    # -- constructors -------------------------------------------------------------
    @classmethod
    def unit(cls, table, kind="scalar", dim=None):
        if kind == "matrix":
            value = np.eye(dim, dtype=complex)
        else:
            value = QC_ONE
        return cls(table, 0, {0: lambda w, v=value: v}, kind=kind, dim=dim)

    @classmethod
    def from_rules(cls, table, rules, parity, kind="scalar", dim=None):
        """Finitely supported cochain: rules map monomial words to values."""
        if kind == "matrix":
            zero = np.zeros((dim, dim), dtype=complex)
        else:
            zero = QC_ZERO
        by_arity = {}
        for word, value in rules.items():
            by_arity.setdefault(len(word), {})[tuple(word)] = value
        components = {
            arity: (lambda word, _r=table_rules, _z=zero: _r.get(word, _z))
            for arity, table_rules in by_arity.items()
        }
        return cls(table, parity, components, kind=kind, dim=dim)


def cochain_mul(l1, l2):
    """Convolution-style product over all splittings, with the Koszul sign
    (-1)^(n_k |l2|) for moving l2 past the first k slots."""
    if l1.table is not l2.table:
        raise ValueError("cochains over different tables")
    if l1.kind != l2.kind or l1.dim != l2.dim:
        raise ValueError("cochain value kinds do not match")
    table = l1.table
    arities1 = set(l1.components)
    arities2 = set(l2.components)
    out_arities = sorted({a1 + a2 for a1 in arities1 for a2 in arities2})
    parity2 = l2.parity

    def make(n):
        def fn(word):
            degs = _prefix_degrees(table, word)
            total = None
            for k in range(len(word) + 1):
                if k not in arities1 or (len(word) - k) not in arities2:
                    continue
                v1 = l1.eval_word(word[:k])
                if l1._viszero(v1):
                    continue
                v2 = l2.eval_word(word[k:])
                if l2._viszero(v2):
                    continue
                v = l1._vmul(v1, v2)
                if parity2 and (degs[k] & 1):
                    v = l1._vscale(QC(-1), v)
                total = v if total is None else l1._vadd(total, v)
            return total if total is not None else l1.zero_value()
        return fn

    comp = {n: make(n) for n in out_arities}
    return Cochain(table, l1.parity ^ l2.parity, comp, kind=l1.kind, dim=l1.dim)


def beta(l):
    """Codifferential: (beta l)(w) = -(-1)^{|l|} l(b(w)); a derivation for
    the cochain product."""
    table = l.table
    arities = sorted(l.components)
    out_arities = sorted({a for a0 in arities for a in (a0, a0 + 1) if a >= 0})
    sign = -1 if l.parity == 0 else 1   # -(-1)^{|l|}

    def make(n):
        def fn(word):
            chain = b(BarChain(table, {word: QC_ONE}))
            v = l.eval_chain(chain)
            return l._vscale(QC(sign), v)
        return fn

    comp = {n: make(n) for n in out_arities}
    return Cochain(table, l.parity ^ 1, comp, kind=l.kind, dim=l.dim)


def cochain_parity_report(l, words):
    """Check value parity against the shifted word parity on sample words.

    For matrix cochains the value must populate only the blocks of parity
    (|l| + n_N) mod 2 with respect to the standard grading.
    """
    bad = []
    for word in words:
        chain = BarChain.from_word(l.table, word)
        for w, _ in chain.terms.items():
            n_par = _prefix_degrees(l.table, w)[len(w)] & 1
            v = l.eval_word(w)
            if l.kind == "scalar":
                if not iszero(v) and (n_par ^ l.parity):
                    bad.append((w, "odd value on scalar cochain"))
            else:
                want = n_par ^ l.parity
                n = l.dim
                half = n // 2
                A = np.asarray(v)
                diag = np.linalg.norm(A[:half, :half]) + np.linalg.norm(A[half:, half:])
                off = np.linalg.norm(A[:half, half:]) + np.linalg.norm(A[half:, :half])
                if want == 0 and off > 1e-12 * max(1.0, diag):
                    bad.append((w, "even slot carries odd blocks"))
                if want == 1 and diag > 1e-12 * max(1.0, off):
                    bad.append((w, "odd slot carries even blocks"))
    return bad
