"""Multi-party quantum computation on top-level shared qupits.

A top-level sharing leaves player i holding position i of a CSS encoding
of the dealer's qupit.  It is built from n verified two-level sharings (the
data, delta proved uniform superpositions, the rest proved zeros) by
applying the Vandermonde map at every leaf and letting player r
reconstruct tree r.

Computation is transversal except for the Toffoli.  A Toffoli on (a, b, c)
first moves c into the high-degree code through a proved zero ancilla and
a Fourier-basis measurement, then applies componentwise Toffolis (the
products of two low-degree words are high-degree words), and finally
degree-reduces the target back with a proved uniform ancilla.

Simulation note: Toffoli circuits run on the tableau up to the first
Toffoli, then every live wire is measured in the computational basis and
the run continues on a single-term sparse state.  Everything after that
point is a classical permutation, a computational measurement or a
diagonal phase, so the computational output distribution is unchanged;
output decoding then skips the phase syndrome.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from qmpc.circuit import LogicalCircuit
from qmpc.css import CodeMismatch, CssCode, EncodedBlock, decode_D, transversal_apply
from qmpc.field import DecodeFailure
from qmpc.network import ConfigRejected, Network, NetworkConfig
from qmpc.sim.sparse import SparseState
from qmpc.sim.stabilizer import StabilizerState
from qmpc.vqss import CheaterSets, VqssResult, decode_words, vqss_reconstruct, vqss_share


@dataclass
class TopLevelSharing:
    wires: tuple
    code: CssCode
    dealer: int

    @property
    def block(self) -> EncodedBlock:
        return EncodedBlock(self.wires, self.code)


@dataclass
class TopLevelResult:
    sharing: TopLevelSharing | None
    accepted: bool
    dealer: int
    sets: CheaterSets
    vqss: list[VqssResult] = field(default_factory=list)


def top_level_share(net, dealer: int, input_wire, vcode: CssCode, top_delta: int | None = None,
                    k: int | None = None, proved: str | None = None) -> TopLevelResult:
    """Top-level sharing of the dealer's qupit (or of a proved |0> / sum_a |a>).

    ``vcode`` is the code of the two-level sharings; ``top_delta`` the
    degree of the resulting one-share-per-player code (default vcode's).
    """
    n, p = vcode.n, vcode.p
    top = CssCode(p, n, vcode.delta if top_delta is None else top_delta)
    sets = CheaterSets(n, net.t)
    plan = [proved] + ["uniform"] * top.delta + ["zero"] * (n - top.delta - 1)
    results = []
    for c, kind in enumerate(plan):
        res = vqss_share(net, dealer, input_wire if c == 0 else None, vcode, k, proved=kind, sets=sets)
        results.append(res)
        if not res.accepted:
            net.log("set_update", dealer, {"dealer_rejected": dealer, "reason": res.reason})
            return TopLevelResult(None, False, dealer, sets, results)

    net.next_round()
    trees = [r.tree for r in results]
    for i in range(n):
        for j in range(n):
            net.local_linear(j, [tr.data[i].wires[j] for tr in trees], top.M)

    outs = [vqss_reconstruct(net, tr, sets, receiver=r) for r, tr in enumerate(trees)]
    return TopLevelResult(TopLevelSharing(tuple(outs), top, dealer), True, dealer, sets, results)


@dataclass
class BroadcastDecode:
    value: int
    views: dict
    fault: bool = False

    @property
    def agreed(self) -> bool:
        return len(set(self.views.values())) <= 1


def measurement_broadcast_decode(net, block: EncodedBlock, tag: str = "measure") -> BroadcastDecode:
    """Every player measures its share and broadcasts it; each honest player decodes.

    An undecodable word gives 0 and a logged fault.
    """
    vals = net.measure(block.wires)
    final = net.broadcast({i: [v] for i, v in enumerate(vals)}, tag)
    word = [final[i][0] for i in range(block.code.n)]
    views = {}
    for i in net.config.honest:
        res = decode_words(block.code.V, [word])[0]
        views[i] = 0 if res is None else res[0]
    fault = decode_words(block.code.V, [word])[0] is None
    if fault:
        net.log("note", None, {"fault": "undecodable measurement word", "word": word})
    value = next(iter(views.values())) if views else 0
    return BroadcastDecode(value, views, fault)


def collapse_to_sparse(net) -> None:
    """Measure all live wires and continue on a single-term sparse state."""
    state = net.state
    live = [w for w, o in net.owner.items() if o is not None]
    values = {w: state.measure(w, net.rng) for w in live}
    net.state = SparseState.basis(state.p, values, next_id=state._next)
    net.dephased = True
    net.log("note", None, {"collapse": len(live)})


@dataclass
class MpqcResult:
    outputs: dict
    output_wires: dict
    caught: set
    faults: list
    decodes: list
    codes: list
    net: Network

    @property
    def agreement(self) -> bool:
        return all(d.agreed for d in self.decodes)

    @property
    def transcript(self):
        return self.net.transcript


class _Dealing:
    """Input-phase bookkeeping: caught dealers and replacement order."""

    def __init__(self, net, vcode, k):
        self.net = net
        self.vcode = vcode
        self.k = k
        self.caught: set = set()

    def next_dealer(self) -> int:
        for i in range(self.net.n):
            if i not in self.caught:
                return i
        raise RuntimeError("every player has been caught")

    def share(self, dealer: int | None, wire, top_delta=None, proved=None) -> EncodedBlock:
        """Share with the given dealer, falling back to proved zeros from others."""
        attempts = 0
        if dealer is not None and dealer not in self.caught:
            res = top_level_share(self.net, dealer, wire, self.vcode, top_delta, self.k, proved)
            if res.accepted:
                return res.sharing.block
            self.caught.add(dealer)
        if proved is None:
            proved = "zero"
        while attempts <= self.net.t:
            repl = self.next_dealer()
            self.net.log("note", repl, {"replacement_dealer": repl, "proved": proved})
            res = top_level_share(self.net, repl, None, self.vcode, top_delta, self.k, proved)
            if res.accepted:
                return res.sharing.block
            self.caught.add(repl)
            attempts += 1
        raise RuntimeError("more than t dealers rejected")


def _prepare_input(state, wire: int, spec, p: int) -> None:
    if isinstance(spec, (tuple, list)):
        kind, a = spec
        if a % p:
            state.apply_local("shift", [wire], a % p)
        if kind in ("fourier", "F"):
            state.apply_local("fourier", [wire], 1)
        elif kind != "basis":
            raise ValueError(f"unknown input kind {kind!r}")
    elif spec % p:
        state.apply_local("shift", [wire], spec % p)


def mpqc_run(circuit: LogicalCircuit, inputs, config: NetworkConfig, strategy=None,
             measure_outputs: bool = True) -> MpqcResult:
    """Input, computation and output phases of the distributed circuit.

    Logical wire w is dealt by and output to player w mod n.  ``inputs`` are
    basis values or ("fourier", a) for F|a>.
    """
    n, t, p = config.n, config.t, config.p
    if n != 6 * t + 1:
        raise ConfigRejected(f"computation needs n = 6t+1, got n={n}, t={t}")
    if len(inputs) != circuit.num_wires:
        raise ValueError(f"circuit takes {circuit.num_wires} inputs")
    if circuit.fourier_after_toffoli():
        raise ConfigRejected("Fourier gates after a Toffoli are beyond the desk-scale backends")
    vcode = CssCode(p, n, 2 * t)
    net = Network(config, StabilizerState(p), adversary=strategy)
    net.dephased = False
    dealing = _Dealing(net, vcode, config.k)

    # input phase
    blocks: dict[int, EncodedBlock] = {}
    for w, spec in enumerate(inputs):
        dealer = w % n
        wire = net.alloc(dealer, 1)[0]
        _prepare_input(net.state, wire, spec, p)
        blocks[w] = dealing.share(dealer, wire)
    for a in range(circuit.ancillas):
        blocks[circuit.num_wires + a] = dealing.share(None, None, proved="zero")
    toffoli_anc = []
    for _ in range(circuit.toffoli_count):
        hi = dealing.share(None, None, top_delta=vcode.delta_dual, proved="zero")
        lo = dealing.share(None, None, proved="uniform")
        toffoli_anc.append((hi, lo))

    # computation phase
    decodes: list[BroadcastDecode] = []
    codes = []
    for g in circuit.gates:
        net.next_round()
        state = net.state
        if g.kind == "sum":
            ctrl, tgt = blocks[g.wires[0]], blocks[g.wires[1]]
            net.check_live(ctrl.wires + tgt.wires)
            transversal_apply(state, [ctrl, tgt], "sum", g.scalar)
        elif g.kind == "toffoli":
            hi, lo = toffoli_anc.pop(0)
            blocks[g.wires[2]] = _toffoli(net, [blocks[w] for w in g.wires], hi, lo, g.scalar, decodes)
        else:
            blk = blocks[g.wires[0]]
            net.check_live(blk.wires)
            if net.dephased and g.kind == "phase_shift":
                pass
            else:
                (blocks[g.wires[0]],) = transversal_apply(state, [blk], g.kind, g.scalar)
        codes.append({w: b.code.delta for w, b in blocks.items()})

    # output phase
    net.adversary.on_phase("pre_output", {"blocks": blocks})
    net.next_round()
    outputs, output_wires, faults = {}, {}, []
    for w in range(circuit.num_wires):
        receiver = w % n
        blk = blocks[w]
        for j in range(n):
            if j != receiver:
                net.deliver_quantum(j, receiver, [blk.wires[j]], tag="output")
        try:
            dec = decode_D(net.state, blk, net.rng, z_check=not net.dephased)
            out = dec.wire
        except DecodeFailure:
            faults.append(w)
            net.log("note", receiver, {"fault": "output decoding failed, output |0>", "wire": w})
            out = net.alloc(receiver, 1)[0]
        net.owner[out] = receiver
        output_wires[w] = out
        if measure_outputs:
            outputs[w] = net.state.measure(out, net.rng)
    return MpqcResult(outputs, output_wires, set(dealing.caught), faults, decodes, codes, net)


def _toffoli(net, blocks, hi: EncodedBlock, lo: EncodedBlock, scalar: int, decodes: list) -> EncodedBlock:
    """Distributed Toffoli; returns the block now holding the target."""
    a, b, c = blocks
    low = lo.code
    if any(blk.code != low for blk in blocks):
        raise CodeMismatch("Toffoli operands must be in the low-degree code")
    p = low.p
    n = low.n
    # move the target into the high-degree code
    net.check_live(c.wires + hi.wires)
    net.state.apply_sum(c.wires, hi.wires, 1)
    if net.dephased:
        # the outcome only drives a phase correction, which cannot change
        # computational outputs of the remaining classical circuit
        vals = [net.state.measure_fourier(w, net.rng) for w in c.wires]
        net.retire(c.wires)
        net.broadcast({i: [v] for i, v in enumerate(vals)}, "toffoli_fourier")
        u = BroadcastDecode(0, {})
    else:
        (c_f,) = transversal_apply(net.state, [c], "fourier")
        u = measurement_broadcast_decode(net, c_f, "toffoli_fourier")
    decodes.append(u)
    if u.value and not net.dephased:
        transversal_apply(net.state, [hi], "phase_shift", (-u.value) % p)
    if not net.dephased:
        collapse_to_sparse(net)
    for i in range(n):
        net.local_gate("toffoli", [a.wires[i], b.wires[i], hi.wires[i]], scalar)
    # degree reduction back into the low-degree code
    net.state.apply_sum(lo.wires, hi.wires, 1)
    beta = measurement_broadcast_decode(net, hi, "degree_reduction")
    decodes.append(beta)
    net.state.apply_local("scalar_mul", lo.wires, p - 1)
    if beta.value:
        net.state.apply_local("shift", lo.wires, beta.value)
    return lo
