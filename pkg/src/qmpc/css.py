"""Quantum Reed-Solomon (CSS) codes on top of the simulators.

An encoded block is a list of n wires.  The encoder writes the coefficient
register (s, r_1..r_delta, 0..0) through the Vandermonde map, with the r
wires in the uniform superposition, so in the computational basis the block
holds q(1..n) for random q with q(0) = s.

Frame convention: the code C^delta has computational-basis words in the
plain code V^delta.  Transversal Fourier is followed by the per-wire
rescaling S_{1/d_i}, which keeps the computational words of the image code
C^{delta'} in the plain code V^{delta'} rather than the scaled W^{delta'}.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from qmpc import linalg
from qmpc.field import DecodeFailure, ReedSolomonCode, lagrange_weights, rs_decode, syndrome_decode
from qmpc.sim.pauli import PauliOperator


class CodeMismatch(Exception):
    """Blocks encoded under different codes were combined."""


@dataclass(frozen=True)
class CssCode:
    p: int
    n: int
    delta: int

    def __post_init__(self):
        # validates p, n, delta
        ReedSolomonCode(self.p, self.n, self.delta)

    @property
    def delta_dual(self) -> int:
        return self.n - self.delta - 1

    @cached_property
    def V(self) -> ReedSolomonCode:
        return ReedSolomonCode(self.p, self.n, self.delta, "V")

    @cached_property
    def W(self) -> ReedSolomonCode:
        return ReedSolomonCode(self.p, self.n, self.delta_dual, "W")

    def dual(self) -> CssCode:
        return CssCode(self.p, self.n, self.delta_dual)

    @property
    def d(self) -> tuple[int, ...]:
        return self.V.d

    @property
    def x_radius(self) -> int:
        return (self.n - self.delta - 1) // 2

    @property
    def z_radius(self) -> int:
        return self.delta // 2

    @property
    def t(self) -> int:
        return min(self.x_radius, self.z_radius)

    @cached_property
    def M(self) -> np.ndarray:
        return self.V.vandermonde

    @cached_property
    def Minv(self) -> np.ndarray:
        return linalg.inv(self.M, self.p)

    @cached_property
    def hx(self) -> np.ndarray:
        """X syndrome map e -> (M^{-1} e)_{delta+1..n-1} (parity check of V)."""
        return self.Minv[self.delta + 1:]

    @cached_property
    def hz(self) -> np.ndarray:
        """Z syndrome map z -> (M^T z)_{1..delta} (parity check of W)."""
        return self.M[:, 1:self.delta + 1].T.copy()

    def z_checks(self, A) -> np.ndarray:
        """Basis of {h in V^perp : supp h within A} (Z-type checks)."""
        A = sorted(A)
        g = self.V.generator[:, A]
        null = linalg.nullspace(g, self.p)
        out = np.zeros((null.shape[0], self.n), np.int64)
        out[:, A] = null
        return out

    def x_checks(self, A) -> np.ndarray:
        """Basis of {g in V_0 : supp g within A} (X-type checks)."""
        B = [i for i in range(self.n) if i not in set(A)]
        g0 = ReedSolomonCode(self.p, self.n, self.delta, "V0").generator
        if not B:
            return g0.copy()
        combos = linalg.nullspace(g0[:, B].T, self.p)
        if combos.size == 0:
            return np.zeros((0, self.n), np.int64)
        return combos @ g0 % self.p


@dataclass(frozen=True)
class EncodedBlock:
    wires: tuple[int, ...]
    code: CssCode

    def __post_init__(self):
        object.__setattr__(self, "wires", tuple(self.wires))
        if len(self.wires) != self.code.n:
            raise ValueError("block needs one wire per code position")


@dataclass
class Decoded:
    wire: int
    x_error: np.ndarray
    z_error: np.ndarray

    @property
    def syndrome_id(self) -> tuple[tuple[int, int, int], ...]:
        """(position, X exponent, Z exponent) for each affected position."""
        return tuple(
            (i, int(a), int(b))
            for i, (a, b) in enumerate(zip(self.x_error, self.z_error))
            if a or b
        )


def encode(state, code: CssCode, input_wire: int, ancilla_wires=None, randomness=None) -> EncodedBlock:
    """Encode the qupit on ``input_wire`` into n wires.

    Ancillas are allocated when not given.  ``randomness`` fixes the r
    coefficients classically (test use); by default they are in the uniform
    superposition.
    """
    n, delta = code.n, code.delta
    if ancilla_wires is None:
        ancilla_wires = state.alloc(n - 1)
    wires = [input_wire, *ancilla_wires]
    rwires = wires[1:delta + 1]
    if randomness is None:
        state.apply_local("fourier", rwires, 1)
    else:
        state.apply_local("shift", rwires, np.asarray(randomness) % code.p)
    state.apply_linear(wires, code.M)
    return EncodedBlock(tuple(wires), code)


def _check_same(blocks):
    codes = {b.code for b in blocks}
    if len(codes) != 1:
        raise CodeMismatch(f"blocks use different codes: {codes}")


def transversal_apply(state, blocks, kind: str, scalar: int = 1):
    """Logical gate by independent per-position gates; returns updated blocks."""
    blocks = list(blocks)
    _check_same(blocks)
    code = blocks[0].code
    p = code.p
    d = np.array(code.d, np.int64)
    if kind == "sum":
        if len(blocks) != 2:
            raise ValueError("sum needs (control, target) blocks")
        state.apply_sum(blocks[0].wires, blocks[1].wires, scalar)
        return blocks
    (blk,) = blocks
    w = blk.wires
    if kind in ("shift", "scalar_mul"):
        state.apply_local(kind, w, scalar)
        return blocks
    if kind == "phase_shift":
        state.apply_local("phase_shift", w, scalar * d % p)
        return blocks
    if kind == "fourier":
        state.apply_local("fourier", w, scalar)
        state.apply_local("scalar_mul", w, [pow(int(x), -1, p) for x in d])
        return [replace(blk, code=code.dual())]
    if kind == "fourier_inv":
        state.apply_local("scalar_mul", w, d)
        state.apply_local("fourier_inv", w, scalar)
        return [replace(blk, code=code.dual())]
    raise ValueError(f"{kind} has no transversal implementation")


def extract_syndromes(state, block: EncodedBlock, rng, z_check: bool = True):
    """Undo the encoder and measure the check registers.

    Returns (data_wire, x_syndrome, z_syndrome).  The check wires are
    measured and discarded.  With ``z_check=False`` the randomness wires are
    measured in the computational basis instead and the Z syndrome is None
    (used when the state is known to be dephased).
    """
    code = block.code
    wires = list(block.wires)
    state.apply_linear(wires, code.Minv)
    data, rand, high = wires[0], wires[1:code.delta + 1], wires[code.delta + 1:]
    sx = np.array(state.measure_many(high, rng), np.int64)
    if z_check:
        state.apply_local("fourier_inv", rand, 1)
    sz = np.array(state.measure_many(rand, rng), np.int64)
    state.discard(high + rand)
    return data, sx, (sz if z_check else None)


def solve_errors(code: CssCode, sx, sz, within=None):
    """Minimum-weight X and Z error vectors for the syndromes."""
    ex = syndrome_decode(code.hx, sx, code.p, code.x_radius, within)
    if sz is None:
        ez = np.zeros(code.n, np.int64)
    else:
        ez = syndrome_decode(code.hz, sz, code.p, code.z_radius, within)
    return ex, ez


def correct_logical(state, code: CssCode, wire: int, ex, ez) -> None:
    """Undo the logical effect of X^ex Z^ez on the decoded data wire."""
    p = code.p
    lx = int(code.Minv[0] @ ex) % p
    lz = int(np.sum(ez)) % p
    if lx:
        state.apply_local("shift", [wire], (-lx) % p)
    if lz:
        state.apply_local("phase_shift", [wire], (-lz) % p)


def decode_D(state, block: EncodedBlock, rng, z_check: bool = True, within=None) -> Decoded:
    """Decoder that corrects and identifies errors of weight <= t.

    Raises DecodeFailure when a syndrome is outside the correctable set;
    the block is consumed either way.
    """
    data, sx, sz = extract_syndromes(state, block, rng, z_check)
    ex, ez = solve_errors(block.code, sx, sz, within)
    correct_logical(state, block.code, data, ex, ez)
    return Decoded(data, ex, ez)


def recovery_positions(code: CssCode, B) -> list[int]:
    need = max(code.delta + 1, code.n - code.delta)
    good = [i for i in range(code.n) if i not in set(B)]
    if len(good) < need:
        raise ValueError(f"need {need} positions outside B, have {len(good)}")
    return good[:need]


def ideal_recover(state, block: EncodedBlock, B) -> int:
    """Interpolation recovery that never touches the wires in B.

    With A the chosen good positions, the output wire receives
    sum_{i in A} lambda_i x_i = q(0), and then x_i -= h(i) * out for a
    polynomial h of degree <= delta with h(0) = 1 vanishing off A, which
    leaves the block holding a word independent of the data.
    """
    code = block.code
    p = code.p
    A = recovery_positions(code, B)
    lam = lagrange_weights([i + 1 for i in A[:code.delta + 1]], 0, p)
    out = state.alloc(1)[0]
    src = [block.wires[i] for i in A[:code.delta + 1]]
    state.apply_sum(src, [out] * len(src), lam)
    off = [i for i in range(code.n) if i not in A]
    rows = [[1] + [0] * code.delta]
    rows += [[pow(i + 1, j, p) for j in range(code.delta + 1)] for i in off]
    rhs = [1] + [0] * len(off)
    coeffs = linalg.solve(np.array(rows), np.array(rhs), p)
    h = [sum(int(c) * pow(i + 1, j, p) for j, c in enumerate(coeffs)) % p for i in range(code.n)]
    tgt = [block.wires[i] for i in A]
    state.apply_sum([out] * len(tgt), tgt, [(-h[i]) % p for i in A])
    return out


def measure_word(state, block: EncodedBlock, rng) -> list[int]:
    return list(state.measure_many(block.wires, rng))


def logical_measure(state, block: EncodedBlock, rng, word_hook=None) -> int:
    """Measure every wire and decode the word; ``word_hook`` may alter it."""
    word = measure_word(state, block, rng)
    if word_hook is not None:
        word = word_hook(word)
    return rs_decode(block.code.V, word).secret


def degree_reduce(state, block: EncodedBlock, ancilla: EncodedBlock, rng, word_hook=None):
    """Move a C^{delta'} encoded qupit into the C^delta ancilla block.

    The ancilla must encode sum_a |a>.  SUM from the ancilla into the data,
    measure the data block (logical value b), then apply S_{-1} and X^b to
    the ancilla.  Returns (ancilla block now holding the data, b).
    """
    if block.code.n != ancilla.code.n or ancilla.code.delta > block.code.delta:
        raise CodeMismatch("ancilla code must be the low-degree code of the same length")
    p = block.code.p
    state.apply_sum(ancilla.wires, block.wires, 1)
    b = logical_measure(state, block, rng, word_hook)
    state.discard(block.wires)
    state.apply_local("scalar_mul", ancilla.wires, p - 1)
    if b:
        state.apply_local("shift", ancilla.wires, b)
    return ancilla, b


def cb_member(state, block: EncodedBlock, B) -> bool:
    """Both-basis check on positions outside B.

    The state passes when every Z-type check Z^h (h orthogonal to V,
    supported off B) and every X-type check X^g (g in V_0, supported off B)
    fixes it.
    """
    code = block.code
    A = [i for i in range(code.n) if i not in set(B)]
    zs = code.z_checks(A)
    xs = code.x_checks(A)
    if state.backend == "tableau":
        zero = np.zeros(code.n, np.int64)
        for h in zs:
            if not state.stabilizes(PauliOperator(tuple(zero), tuple(h), 0, code.p), block.wires):
                return False
        for g in xs:
            if not state.stabilizes(PauliOperator(tuple(g), tuple(zero), 0, code.p), block.wires):
                return False
        return True
    return _support_check(state, block, zs, xs)


def _support_check(state, block, zs, xs) -> bool:
    p = state.p
    probe = state.copy()
    words = np.array(sorted(probe.support(block.wires)) if hasattr(probe, "support") else _dense_support(probe, block.wires))
    if zs.size and (words @ zs.T % p).any():
        return False
    probe.apply_local("fourier", block.wires, 1)
    words = np.array(sorted(probe.support(block.wires)) if hasattr(probe, "support") else _dense_support(probe, block.wires))
    # F X^g F^dag = Z^g, so X^g invariance shows up as g . w = 0 after F
    if xs.size and (words @ xs.T % p).any():
        return False
    return True


def _dense_support(state, wires, tol=1e-10):
    probs = state.probabilities(wires)
    idx = np.nonzero(probs > tol)[0]
    return [tuple(int(v) for v in row) for row in np.array(np.unravel_index(idx, (state.p,) * len(wires))).T]


def degree_reduce_split(data_state, data_block: EncodedBlock, anc_state, anc_block: EncodedBlock, rng):
    """degree_reduce for a data block and ancilla block held in separate sparse states.

    Exact in distribution; avoids forming the product of the two supports.
    The ancilla state ends up holding the data.
    """
    from qmpc.sim.sparse import fused_sum_measure

    if data_state.wires != list(data_block.wires) or anc_state.wires != list(anc_block.wires):
        raise ValueError("each state must consist of exactly its block")
    word = fused_sum_measure(anc_state, data_state, rng)
    b = rs_decode(data_block.code.V, word).secret
    p = anc_block.code.p
    anc_state.apply_local("scalar_mul", anc_block.wires, p - 1)
    if b:
        anc_state.apply_local("shift", anc_block.wires, b)
    return anc_block, b
