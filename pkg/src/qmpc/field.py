"""Prime fields, polynomials and the Reed-Solomon codes used by the protocols.

Codeword positions are 0-based indices ``0..n-1``; position ``i`` holds the
evaluation ``q(i + 1)``.  The point 0 is reserved for the secret ``q(0)``.
All field elements are canonical residues ``0..p-1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from qmpc import linalg


class DecodeFailure(Exception):
    """Word lies beyond the correction radius of the code."""


class InconsistentShares(Exception):
    """Shares do not agree with a single low-degree polynomial."""


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % q for q in range(2, int(p**0.5) + 1))


@dataclass(frozen=True)
class PrimeField:
    p: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")

    def __call__(self, a: int) -> int:
        return a % self.p

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.p

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.p

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.p

    def neg(self, a: int) -> int:
        return (-a) % self.p

    def inv(self, a: int) -> int:
        if a % self.p == 0:
            raise ZeroDivisionError("0 has no inverse")
        return pow(a, -1, self.p)

    def pow(self, a: int, e: int) -> int:
        return pow(a, e, self.p)

    def elements(self) -> range:
        return range(self.p)


@dataclass(frozen=True)
class Poly:
    """Polynomial over Z_p, coefficients lowest degree first."""

    coeffs: tuple[int, ...]
    p: int

    def __post_init__(self):
        c = [x % self.p for x in self.coeffs]
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1  # zero polynomial has degree -1

    def __call__(self, x: int) -> int:
        acc = 0
        for c in reversed(self.coeffs):
            acc = (acc * x + c) % self.p
        return acc

    def __add__(self, other: Poly) -> Poly:
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return Poly(tuple(x + y for x, y in zip(a, b)), self.p)

    def __mul__(self, other: Poly) -> Poly:
        if not self.coeffs or not other.coeffs:
            return Poly((), self.p)
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Poly(tuple(out), self.p)

    def scale(self, c: int) -> Poly:
        return Poly(tuple(c * x for x in self.coeffs), self.p)

    @classmethod
    def interpolate(cls, xs: Sequence[int], ys: Sequence[int], p: int) -> Poly:
        """Lagrange interpolation through the points (xs[k], ys[k])."""
        total = Poly((), p)
        for k, (xk, yk) in enumerate(zip(xs, ys)):
            term = Poly((yk,), p)
            for m, xm in enumerate(xs):
                if m != k:
                    denom = pow((xk - xm) % p, -1, p)
                    term = term * Poly(((-xm * denom) % p, denom), p)
            total = total + term
        return total


def lagrange_weights(points: Sequence[int], at: int, p: int) -> list[int]:
    """Weights w_k with sum_k w_k q(points[k]) = q(at) for deg q < len(points)."""
    out = []
    for k, xk in enumerate(points):
        num, den = 1, 1
        for m, xm in enumerate(points):
            if m != k:
                num = num * (at - xm) % p
                den = den * (xk - xm) % p
        out.append(num * pow(den, -1, p) % p)
    return out


def dual_constants(p: int, n: int, delta: int | None = None) -> list[int]:
    """Scaling constants d_1..d_n relating V^delta to its dual.

    With ``d_i = L_i(0)``, the Lagrange weight of point ``i`` for
    interpolating degree < n polynomials at 0, we get
    ``sum_i d_i v_i w_i = (vw)(0) = 0`` whenever deg v + deg w <= n - 1 and
    w(0) = 0, and moreover ``sum_i d_i w_i = w(0)``.  The constants do not
    depend on delta; the argument is accepted for symmetry with the codes.
    """
    if not is_prime(p) or p <= n:
        raise ValueError("need prime p > n")
    if delta is not None and not 0 <= delta < n:
        raise ValueError("need 0 <= delta < n")
    return lagrange_weights(list(range(1, n + 1)), 0, p)


VARIANTS = ("V", "V0", "W", "W0")


@dataclass(frozen=True)
class DecodeResult:
    secret: int
    error_positions: tuple[int, ...]
    error_values: tuple[int, ...]
    codeword: tuple[int, ...]


@dataclass(frozen=True)
class ReedSolomonCode:
    """Evaluation code of polynomials of degree <= delta at points 1..n.

    ``V`` is the full code, ``V0`` the subcode with q(0) = 0.  ``W`` and
    ``W0`` are the same codes with coordinate i multiplied by ``d[i]``, so
    ``W(n-delta-1)`` is the dual of ``V0(delta)`` and ``W0(n-delta-1)`` the
    dual of ``V(delta)``.
    """

    p: int
    n: int
    delta: int
    variant: str = "V"
    d: tuple[int, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if not is_prime(self.p) or self.p <= self.n:
            raise ValueError("need prime p > n")
        if not 0 <= self.delta < self.n:
            raise ValueError("need 0 <= delta < n")
        if not self.d:
            object.__setattr__(self, "d", tuple(dual_constants(self.p, self.n)))

    @property
    def scaled(self) -> bool:
        return self.variant in ("W", "W0")

    @property
    def zero_secret(self) -> bool:
        return self.variant in ("V0", "W0")

    @property
    def radius(self) -> int:
        return (self.n - self.delta - 1) // 2

    @property
    def distance(self) -> int:
        return self.n - self.delta + (1 if self.zero_secret else 0)

    @cached_property
    def vandermonde(self) -> np.ndarray:
        """n x n matrix M[i, j] = (i+1)^j mapping coefficients to values."""
        pts = np.arange(1, self.n + 1, dtype=np.int64)
        return np.array(
            [[pow(int(x), j, self.p) for j in range(self.n)] for x in pts],
            dtype=np.int64,
        )

    @cached_property
    def generator(self) -> np.ndarray:
        """Rows spanning the code."""
        first = 1 if self.zero_secret else 0
        g = self.vandermonde[:, first:self.delta + 1].T.copy()
        if self.scaled:
            g = g * np.array(self.d, dtype=np.int64) % self.p
        return g % self.p

    @cached_property
    def parity_check(self) -> np.ndarray:
        return linalg.nullspace(self.generator, self.p)

    def scale_factors(self) -> np.ndarray:
        if self.scaled:
            return np.array(self.d, dtype=np.int64)
        return np.ones(self.n, dtype=np.int64)

    def unscale(self, word: Sequence[int]) -> list[int]:
        if not self.scaled:
            return [w % self.p for w in word]
        return [w * pow(di, -1, self.p) % self.p for w, di in zip(word, self.d)]

    def rescale(self, word: Sequence[int]) -> list[int]:
        if not self.scaled:
            return [w % self.p for w in word]
        return [w * di % self.p for w, di in zip(word, self.d)]

    def dual(self) -> ReedSolomonCode:
        """The dual code, as one of the four variants."""
        partner = {"V": "W0", "V0": "W", "W": "V0", "W0": "V"}[self.variant]
        return ReedSolomonCode(self.p, self.n, self.n - self.delta - 1, partner)

    def encode(self, secret: int, randomness: Sequence[int]) -> tuple[int, ...]:
        return rs_encode(self, secret, randomness)

    def contains(self, word: Sequence[int]) -> bool:
        return in_neighborhood(self, word, ())

    def codewords(self) -> Iterable[tuple[int, ...]]:
        """Enumerate the whole code (desk-scale only)."""
        g = self.generator
        k = g.shape[0]
        for coeffs in np.ndindex(*([self.p] * k)):
            yield tuple(int(x) for x in (np.array(coeffs) @ g) % self.p)

    def interpolation_weights(self, positions: Sequence[int]) -> list[int]:
        return lagrange_weights([i + 1 for i in positions], 0, self.p)


def _check_word(code: ReedSolomonCode, word: Sequence[int]) -> list[int]:
    if len(word) != code.n:
        raise ValueError(f"word has length {len(word)}, expected {code.n}")
    return [int(w) % code.p for w in word]


def rs_encode(code: ReedSolomonCode, secret: int, randomness: Sequence[int]) -> tuple[int, ...]:
    """Evaluate q(x) = secret + r_1 x + ... + r_delta x^delta at 1..n."""
    if code.zero_secret and secret % code.p:
        raise ValueError(f"{code.variant} codewords have secret 0")
    if len(randomness) != code.delta:
        raise ValueError(f"need {code.delta} random coefficients")
    q = Poly((secret, *randomness), code.p)
    return tuple(code.rescale([q(i) for i in range(1, code.n + 1)]))


@lru_cache(maxsize=4096)
def _evaluation_map(xs: tuple[int, ...], n: int, p: int) -> np.ndarray:
    """Matrix taking values at ``xs`` to values at 0..n of the interpolant."""
    return np.array([lagrange_weights(xs, x, p) for x in range(n + 1)], dtype=np.int64)


def _fit(code: ReedSolomonCode, word: list[int], positions: Sequence[int]) -> np.ndarray | None:
    """Values q(0), ..., q(n) of the degree <= delta polynomial matching
    ``word`` on ``positions``, or None if there is none."""
    xs = [i + 1 for i in positions]
    ys = [word[i] for i in positions]
    if code.zero_secret:
        xs, ys = [0] + xs, [0] + ys
    k = code.delta + 1
    vals = _evaluation_map(tuple(xs[:k]), code.n, code.p) @ np.array(ys[:k], dtype=np.int64) % code.p
    if any(vals[x] != y for x, y in zip(xs[k:], ys[k:])):
        return None
    return vals


def rs_decode(
    code: ReedSolomonCode,
    word: Sequence[int],
    erasures: Iterable[int] = (),
) -> DecodeResult:
    """Nearest-codeword decoding by trial over error supports.

    Positions in ``erasures`` are ignored.  Errors are corrected as long as
    ``|erasures| + 2|errors| <= n - delta - 1``; the minimum-weight error
    vector (word minus codeword, zero on erasures) is returned.
    """
    w = code.unscale(_check_word(code, word))
    erased = sorted(set(erasures))
    live = [i for i in range(code.n) if i not in erased]
    budget = code.n - code.delta - 1 - len(erased)
    if budget < 0 or len(live) < code.delta + 1:
        raise DecodeFailure("too many erasures")
    for weight in range(budget // 2 + 1):
        for support in combinations(live, weight):
            keep = [i for i in live if i not in support]
            q = _fit(code, w, keep)
            if q is None:
                continue
            cw = code.rescale([int(v) for v in q[1:]])
            raw = _check_word(code, word)
            vals = tuple((raw[i] - cw[i]) % code.p for i in support)
            return DecodeResult(int(q[0]), tuple(support), vals, tuple(cw))
    raise DecodeFailure("word is beyond the correction radius")


def erasure_interpolate(code: ReedSolomonCode, word: Sequence[int], positions: Iterable[int]) -> int:
    """Value q(0) from the symbols at ``positions`` alone."""
    w = code.unscale(_check_word(code, word))
    pos = sorted(set(positions))
    if len(pos) < code.delta + 1:
        raise ValueError(f"need at least {code.delta + 1} positions")
    q = _fit(code, w, pos)
    if q is None:
        raise InconsistentShares(f"shares at {pos} do not lie on one polynomial")
    return int(q[0])


def in_neighborhood(code: ReedSolomonCode, word: Sequence[int], B: Iterable[int]) -> bool:
    """True iff word differs from some codeword only on positions in B."""
    w = code.unscale(_check_word(code, word))
    B = set(B)
    rest = [i for i in range(code.n) if i not in B]
    return _fit(code, w, rest) is not None


def syndrome_decode(
    h: np.ndarray,
    syndrome: Sequence[int],
    p: int,
    radius: int,
    within: Iterable[int] | None = None,
) -> np.ndarray:
    """Minimum-weight e (weight <= radius) with h @ e = syndrome.

    ``within`` restricts the allowed support.  Raises DecodeFailure when no
    such e exists.
    """
    h = np.asarray(h, dtype=np.int64) % p
    s = np.asarray(syndrome, dtype=np.int64) % p
    n = h.shape[1]
    allowed = list(range(n)) if within is None else sorted(set(within))
    if not s.any():
        return np.zeros(n, dtype=np.int64)
    for weight in range(1, radius + 1):
        for support in combinations(allowed, weight):
            sub = h[:, list(support)]
            x = linalg.solve(sub, s, p)
            if x is None:
                continue
            e = np.zeros(n, dtype=np.int64)
            e[list(support)] = x
            return e
    raise DecodeFailure("syndrome is outside the correctable set")


@dataclass
class TwoGoodReport:
    ok: bool
    failures: list[str]
    branch_values: dict[int, int]

    def __bool__(self) -> bool:
        return self.ok


def two_good_check(
    tree: Sequence[Sequence[int]],
    code: ReedSolomonCode,
    B: Iterable[int],
    Bs: Sequence[Iterable[int]],
    C: Iterable[int],
) -> TwoGoodReport:
    """Check the three 2-GOOD properties of an n x n share tree.

    ``tree[i][j]`` is leaf j of branch i (held by player j); B is the set of
    rejected branches, ``Bs[i]`` the apparent cheaters of branch i and C the
    real cheaters.
    """
    n = code.n
    B = set(B)
    C = set(C)
    Bs = [set(b) for b in Bs]
    failures: list[str] = []
    for i in range(n):
        if i not in C and not Bs[i] <= C:
            failures.append(f"property 1: B_{i} = {sorted(Bs[i])} contains honest players")
    values: dict[int, int] = {}
    for i in range(n):
        if i in B:
            continue
        word = list(tree[i])
        if not in_neighborhood(code, word, Bs[i] | C):
            failures.append(f"property 2: branch {i} honest leaves are inconsistent")
            continue
        good = [j for j in range(n) if j not in Bs[i] and j not in C]
        if len(good) < code.delta + 1:
            failures.append(f"property 2: branch {i} has too few honest leaves")
            continue
        values[i] = erasure_interpolate(code, word, good)
    if not any(f.startswith("property 2") for f in failures):
        root = [values.get(i, 0) for i in range(n)]
        if not in_neighborhood(code, root, B):
            failures.append("property 3: branch values are not in V_B")
    return TwoGoodReport(not failures, failures, values)
