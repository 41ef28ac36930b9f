"""Verifiable quantum secret sharing over a two-level CSS share tree.

The dealer encodes its qupit and (k+1)^2 - 1 ancilla systems with the
quantum Reed-Solomon code, sends component i of every system to player i,
and each player re-encodes its components and hands leaf j to player j.
Verification is a cut-and-choose in both bases: public coins pick SUM
multiples from the data-carrying systems into the ancillas, the targets are
measured and broadcast, and every honest player decodes the same words to
update the cheater sets.  Reconstruction decodes each branch within a set
of at most t suspects and interpolates the branch values.

System layout, with (l, m) in 0..k:
  (0, 0)          the data
  (0, m), m >= 1  sum_{v in V} |v>   (encoded uniform superposition)
  (l, m), l >= 1  encoded |0>
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from qmpc.css import CssCode, EncodedBlock, correct_logical, encode, extract_syndromes, ideal_recover
from qmpc.field import DecodeFailure, ReedSolomonCode, rs_decode, syndrome_decode, two_good_check

PROVED = (None, "zero", "uniform")


@dataclass
class CheaterSets:
    """Apparent cheaters: B for whole branches, Bs[i] for leaves of branch i."""

    n: int
    t: int
    B: set = field(default_factory=set)
    Bs: list = field(default_factory=list)

    def __post_init__(self):
        if not self.Bs:
            self.Bs = [set() for _ in range(self.n)]

    @property
    def failed(self) -> bool:
        return len(self.B) > self.t

    def add_branch(self, i: int) -> bool:
        if i in self.B:
            return False
        self.B.add(i)
        return True

    def add_leaves(self, i: int, positions) -> bool:
        """Merge positions into B_i; the branch is rejected once |B_i| > t."""
        before = len(self.Bs[i])
        self.Bs[i] |= set(positions)
        if len(self.Bs[i]) > self.t:
            self.add_branch(i)
        return len(self.Bs[i]) != before

    def copy(self) -> CheaterSets:
        return CheaterSets(self.n, self.t, set(self.B), [set(b) for b in self.Bs])

    def as_dict(self) -> dict:
        return {"B": sorted(self.B), "Bs": [sorted(b) for b in self.Bs]}


@dataclass
class ShareTree:
    """Branch blocks per system; leaf j of every branch is held by player j."""

    code: CssCode
    systems: dict

    @property
    def data(self) -> list[EncodedBlock]:
        return self.systems[(0, 0)]

    def leaves(self, key=(0, 0)) -> list[int]:
        return [w for blk in self.systems[key] for w in blk.wires]

    def leaves_of(self, player: int, key=(0, 0)) -> list[int]:
        return [blk.wires[player] for blk in self.systems[key]]


@dataclass
class VqssResult:
    tree: ShareTree
    sets: CheaterSets
    accepted: bool
    reason: str = ""
    coins: dict = field(default_factory=dict)
    rounds: int = 0


# ------------------------------------------------------------------ decoding
def decode_words(rs: ReedSolomonCode, words, erasures=()) -> list:
    """Decode each row of ``words``; returns (secret, error positions) or None.

    Clean codewords take a parity-check fast path.
    """
    words = np.asarray(words, np.int64) % rs.p
    erasures = tuple(sorted(set(erasures)))
    out = []
    if not erasures and rs.variant == "V":
        clean = ~((words @ rs.parity_check.T) % rs.p).any(axis=1)
        secrets = words @ np.array(rs.d, np.int64) % rs.p
    else:
        clean = np.zeros(len(words), bool)
        secrets = None
    for row, ok in enumerate(clean):
        if ok:
            out.append((int(secrets[row]), ()))
            continue
        try:
            res = rs_decode(rs, words[row], erasures)
        except DecodeFailure:
            out.append(None)
            continue
        out.append((int(res.secret), tuple(res.error_positions)))
    return out


def update_cheater_sets(words: dict, sets: CheaterSets, rs: ReedSolomonCode, net=None) -> tuple[dict, bool]:
    """Fold one challenge's broadcast words into the cheater sets.

    ``words[key]`` is an n x n array, row i the word of branch i.  Each
    branch word is decoded; its error support joins B_i, and an undecodable
    word or |B_i| > t puts i in B.  The branch values of every system are
    then decoded at the root with B erased, and root errors join B.

    Returns (root secrets per key, ok); ok is False when some root word is
    beyond repair.
    """
    n = sets.n
    values = {}
    for key, w in words.items():
        dec = decode_words(rs, w)
        vals = []
        for i, res in enumerate(dec):
            if res is None:
                if sets.add_branch(i) and net is not None:
                    net.log("set_update", None, {"system": key, "branch": i, "B_add": i, "why": "undecodable"})
                vals.append(0)
                continue
            secret, errs = res
            if errs and sets.add_leaves(i, errs) and net is not None:
                net.log("set_update", None, {"system": key, "branch": i, "Bi_add": list(errs)})
                if i in sets.B:
                    net.log("set_update", None, {"system": key, "branch": i, "B_add": i, "why": "too many"})
            vals.append(secret)
        values[key] = vals
    ok = True
    roots = {}
    for key, vals in values.items():
        if sets.failed:
            ok = False
            break
        try:
            res = decode_words(rs, [vals], sets.B)[0]
        except DecodeFailure:
            res = None
        if res is None:
            ok = False
            roots[key] = None
            continue
        roots[key] = res[0]
        for i in res[1]:
            if sets.add_branch(i) and net is not None:
                net.log("set_update", None, {"system": key, "B_add": i, "why": "root error"})
    if sets.failed:
        ok = False
    return roots, ok


# ------------------------------------------------------------------- sharing
def _fourier_scalars(code: CssCode, inverse: bool) -> list[int]:
    p = code.p
    d = code.d
    out = []
    for i in range(code.n):
        for j in range(code.n):
            c = d[i] * d[j] % p
            out.append(c if inverse else pow(c, -1, p))
    return out


def _tree_fourier(net, blocks: list[EncodedBlock], inverse: bool = False) -> list[EncodedBlock]:
    """Two-level transversal Fourier: leaf (i, j) gets F and S_{1/(d_i d_j)}."""
    code = blocks[0].code
    wires = [w for b in blocks for w in b.wires]
    scal = _fourier_scalars(code, inverse)
    if inverse:
        net.local("scalar_mul", wires, scal)
        net.local("fourier_inv", wires, 1)
    else:
        net.local("fourier", wires, 1)
        net.local("scalar_mul", wires, scal)
    dual = code.dual()
    return [EncodedBlock(b.wires, dual) for b in blocks]


def _measure_system(net, blocks) -> np.ndarray:
    n = len(blocks)
    vals = net.measure([w for b in blocks for w in b.wires])
    return np.array(vals, np.int64).reshape(n, -1)


def _broadcast_words(net, measured: dict, tag: str) -> dict:
    """Player j broadcasts column j of every measured system."""
    keys = list(measured)
    n = net.n
    msgs = {j: [int(v) for key in keys for v in measured[key][:, j]] for j in range(n)}
    final = net.broadcast(msgs, tag)
    words = {}
    for idx, key in enumerate(keys):
        w = np.zeros((n, n), np.int64)
        for j in range(n):
            w[:, j] = final[j][idx * n:(idx + 1) * n]
        words[key] = w
    return words


def vqss_share(net, dealer: int, input_wire: int | None, code: CssCode, k: int | None = None,
               proved: str | None = None, sets: CheaterSets | None = None) -> VqssResult:
    """Share the dealer's qupit on ``input_wire`` and verify the sharing.

    ``proved`` selects the proved variants: "zero" shares |0> and "uniform"
    shares sum_a |a>, with every ancilla of the same kind and an extra check
    that the relevant root words interpolate to 0.  ``input_wire`` is
    ignored (a fresh wire is used) for proved sharings.
    """
    if proved not in PROVED:
        raise ValueError(f"proved must be one of {PROVED}")
    n, p = code.n, code.p
    k = net.config.k if k is None else k
    sets = CheaterSets(n, net.t) if sets is None else sets
    state = net.state
    keys = [(l, m) for l in range(k + 1) for m in range(k + 1)]
    start_round = net.round

    # sharing step 1: dealer encodes all systems
    net.next_round()
    if proved is not None:
        input_wire = net.alloc(dealer, 1)[0]
        if proved == "uniform":
            state.apply_local("fourier", [input_wire], 1)
    net.check_owned(dealer, [input_wire])
    roots = {}
    for key in keys:
        if key == (0, 0):
            src = input_wire
        else:
            src = net.alloc(dealer, 1)[0]
            uniform = proved == "uniform" or (proved is None and key[0] == 0)
            if uniform:
                state.apply_local("fourier", [src], 1)
        anc = net.alloc(dealer, n - 1, joined=True)
        roots[key] = encode(state, code, src, anc)
    net.adversary.on_phase("dealer_prepared", {"dealer": dealer, "roots": roots, "proved": proved})
    for i in range(n):
        if i != dealer:
            net.deliver_quantum(dealer, i, [roots[key].wires[i] for key in keys], tag="root")

    # sharing step 2: players re-encode and distribute leaves
    net.next_round()
    systems = {key: [] for key in keys}
    for i in range(n):
        for key in keys:
            anc = net.alloc(i, n - 1, joined=True)
            blk = encode(state, code, roots[key].wires[i], anc)
            net.adversary.on_phase("reencoded", {"dealer": dealer, "player": i, "system": key, "block": blk})
            systems[key].append(blk)
        for j in range(n):
            if j != i:
                net.deliver_quantum(i, j, [systems[key][i].wires[j] for key in keys], tag="leaf")
    tree = ShareTree(code, systems)
    net.adversary.on_phase("shared", {"dealer": dealer, "tree": tree})

    def result(ok, reason=""):
        return VqssResult(tree, sets, ok, reason, coins, net.round - start_round)

    # verification, computational basis
    net.next_round()
    coins = {"b": net.public_coin(k, tag="b")}
    measured = {}
    for l in range(k + 1):
        ctrl = [w for blk in systems[(l, 0)] for w in blk.wires]
        for m in range(1, k + 1):
            tgt = [w for blk in systems[(l, m)] for w in blk.wires]
            if coins["b"][m - 1]:
                net.local_sum(ctrl, tgt, coins["b"][m - 1])
            measured[(l, m)] = _measure_system(net, systems.pop((l, m)))
    net.next_round()
    words = _broadcast_words(net, measured, "verify_x")
    rs = code.V
    root_vals, ok = update_cheater_sets(words, sets, rs, net)
    if ok and proved == "zero" and any(v != 0 for v in root_vals.values()):
        return result(False, "root value is not 0")
    if not ok:
        return result(False, "too many errors")

    # verification, Fourier basis
    net.next_round()
    for l in range(k + 1):
        systems[(l, 0)] = _tree_fourier(net, systems[(l, 0)])
    coins["b_prime"] = net.public_coin(k, tag="b_prime")
    data = [w for blk in systems[(0, 0)] for w in blk.wires]
    measured = {}
    for l in range(1, k + 1):
        tgt = [w for blk in systems[(l, 0)] for w in blk.wires]
        if coins["b_prime"][l - 1]:
            net.local_sum(data, tgt, coins["b_prime"][l - 1])
        measured[(l, 0)] = _measure_system(net, systems.pop((l, 0)))
    net.next_round()
    words = _broadcast_words(net, measured, "verify_z")
    root_vals, ok = update_cheater_sets(words, sets, code.dual().V, net)
    if ok and proved == "uniform" and any(v != 0 for v in root_vals.values()):
        return result(False, "root value is not 0")
    if not ok:
        return result(False, "too many errors")

    systems[(0, 0)] = _tree_fourier(net, systems[(0, 0)], inverse=True)
    net.adversary.on_phase("post_sharing", {"dealer": dealer, "tree": tree, "sets": sets})
    return result(True)


def vqss_share_proved(net, dealer: int, which: str, code: CssCode, k: int | None = None,
                      sets: CheaterSets | None = None) -> VqssResult:
    if which == "uniform_sum":
        which = "uniform"
    if which not in ("zero", "uniform"):
        raise ValueError("which is 'zero' or 'uniform_sum'")
    return vqss_share(net, dealer, None, code, k, proved=which, sets=sets)


# ------------------------------------------------------------ reconstruction
def _candidates(Bi: set, n: int, t: int):
    """Supersets of B_i of size <= t, smallest first."""
    rest = [j for j in range(n) if j not in Bi]
    for extra in range(0, t - len(Bi) + 1):
        for add in combinations(rest, extra):
            yield sorted(Bi | set(add))


def decode_branch(state, block: EncodedBlock, Bi: set, t: int, rng):
    """Decode one branch allowing errors only inside some B~ with B_i <= B~, |B~| <= t.

    Returns (data wire, B~) or (None, None) when no such set explains the
    syndromes.
    """
    code = block.code
    data, sx, sz = extract_syndromes(state, block, rng)
    for cand in _candidates(set(Bi), code.n, t):
        try:
            ex = syndrome_decode(code.hx, sx, code.p, len(cand), cand)
            ez = syndrome_decode(code.hz, sz, code.p, len(cand), cand)
        except DecodeFailure:
            continue
        correct_logical(state, code, data, ex, ez)
        return data, cand
    return None, None


def vqss_reconstruct(net, tree: ShareTree, sets: CheaterSets, receiver: int) -> int:
    """Collect the data tree at ``receiver`` and recover the shared qupit.

    Returns the output wire, held by the receiver.  If recovery is
    impossible the output is a fresh |0> and a fault is logged.
    """
    blocks = tree.data
    code = blocks[0].code
    sets = sets.copy()
    net.adversary.on_phase("pre_reconstruct", {"tree": tree, "sets": sets})
    net.next_round()
    for j in range(net.n):
        if j != receiver:
            net.deliver_quantum(j, receiver, tree.leaves_of(j), tag="reconstruct")
    state = net.state
    root_wires = []
    for i, blk in enumerate(blocks):
        if i in sets.B:
            root_wires.append(blk.wires[0])
            continue
        wire, cand = decode_branch(state, blk, sets.Bs[i], net.t, net.rng)
        for w in blk.wires:
            if w != blk.wires[0]:
                net.owner[w] = None
        if wire is None:
            sets.add_branch(i)
            net.log("set_update", receiver, {"branch": i, "B_add": i, "why": "no consistent B~"})
            root_wires.append(blk.wires[0])
        else:
            root_wires.append(wire)
    if sets.failed:
        net.log("note", receiver, {"fault": "reconstruction failed, output |0>"})
        return net.alloc(receiver, 1)[0]
    out = ideal_recover(state, EncodedBlock(root_wires, code), sets.B)
    net.owner[out] = receiver
    # leftover branch wires no longer carry the data; the receiver drops them
    spare = [w for blk in blocks for w in blk.wires if net.owner.get(w) == receiver]
    net.measure(spare)
    return out


def ideal_interpolation_tree(state, tree: ShareTree, sets: CheaterSets, corrupt) -> int:
    """Reference recovery that reads only honest leaves.

    For the first n-2t honest branches outside B, the branch value is
    interpolated from leaves outside B_i and the corrupt set; the branch
    values are then interpolated at the root.  Returns the output wire.
    """
    blocks = tree.data
    code = blocks[0].code
    n = code.n
    C = set(corrupt)
    need = max(code.delta + 1, n - code.delta)
    chosen = [i for i in range(n) if i not in C and i not in sets.B][:need]
    if len(chosen) < need:
        raise ValueError("not enough honest branches outside B")
    root = []
    for i in range(n):
        if i in chosen:
            root.append(ideal_recover(state, blocks[i], sets.Bs[i] | C))
        else:
            root.append(blocks[i].wires[0])
    skip = [i for i in range(n) if i not in chosen]
    out = ideal_recover(state, EncodedBlock(root, code), skip)
    if hasattr(state, "factor"):
        state.factor([out])
    return out


def two_good_quantum_check(state, tree: ShareTree, sets: CheaterSets, corrupt, rng=None) -> bool:
    """Test oracle: measure copies of the data tree in both bases and check 2-GOOD."""
    rng = np.random.default_rng(0) if rng is None else rng
    blocks = tree.data
    code = blocks[0].code
    ok = True
    for basis in ("computational", "fourier"):
        probe = state.copy()
        rs = code.V
        if basis == "fourier":
            wires = [w for b in blocks for w in b.wires]
            scal = _fourier_scalars(code, False)
            probe.apply_local("fourier", wires, 1)
            probe.apply_local("scalar_mul", wires, scal)
            rs = code.dual().V
        leaves = [[probe.measure(w, rng) for w in blk.wires] for blk in blocks]
        report = two_good_check(leaves, rs, sets.B, sets.Bs, corrupt)
        ok = ok and bool(report)
    return ok
