"""Adversary strategies for the corrupt coalition.

A strategy is a set of callbacks the network and the protocols invoke at
fixed points.  It may only act on wires held by corrupt players; any other
access raises OwnershipViolation.  Corrupt players otherwise run the
protocol's local steps like everybody else.

Protocol checkpoints passed to ``on_phase``:
  dealer_prepared  dealer holds the root encodings (info: dealer, roots)
  reencoded        a player encoded one root component (info: player, system, block)
  shared           distribution finished, before any coin is drawn
  post_sharing     verification finished
  pre_reconstruct  just before reconstruction starts
  pre_output       computation finished, before output delivery (info: blocks)
"""

from __future__ import annotations

from qmpc.css import transversal_apply
from qmpc.network import OwnershipViolation


class Strategy:
    name = "base"

    def bind(self, net, rng) -> None:
        self.net = net
        self.rng = rng

    # protocol hooks
    def on_round(self, round_no: int) -> None:
        pass

    def on_phase(self, phase: str, info: dict) -> None:
        pass

    def before_send(self, src: int, dst: int, wires, tag: str) -> None:
        pass

    def on_receive(self, dst: int, src: int, wires, tag: str) -> None:
        pass

    def on_broadcast(self, player: int, tag: str, values: list, honest: dict) -> list:
        return values

    def on_coins(self, tag: str, coins: list) -> None:
        pass

    # actions restricted to corrupt-held wires
    def held(self) -> list[int]:
        return sorted(w for w, o in self.net.owner.items() if o is not None and o in self.net.corrupt)

    def _check(self, wires) -> None:
        for w in wires:
            o = self.net.owner.get(w)
            if o is None or o not in self.net.corrupt:
                raise OwnershipViolation(f"adversary cannot touch wire {w}")

    def apply(self, kind: str, wires, scalar=1, note: str = "") -> None:
        wires = list(wires)
        self._check(wires)
        self.net.state.apply_local(kind, wires, scalar)
        self.net.adversary_action(self.net.owner[wires[0]] if wires else None, kind, {"wires": wires, "note": note})

    def apply_sum(self, controls, targets, scalar=1) -> None:
        controls, targets = list(controls), list(targets)
        self._check(controls + targets)
        self.net.state.apply_sum(controls, targets, scalar)
        self.net.adversary_action(self.net.owner[controls[0]], "sum", {"controls": controls, "targets": targets})

    def pauli(self, wire: int, a: int, b: int) -> None:
        """Apply X^a Z^b to a held wire."""
        if a % self.net.p:
            self.apply("shift", [wire], a % self.net.p)
        if b % self.net.p:
            self.apply("phase_shift", [wire], b % self.net.p)

    def paulis(self, ops) -> None:
        """Apply X^a Z^b for every (wire, a, b) in ``ops``, as one action per kind."""
        p = self.net.p
        for kind, col in (("shift", 1), ("phase_shift", 2)):
            sel = [op for op in ops if op[col] % p]
            if sel:
                self.apply(kind, [op[0] for op in sel], [op[col] % p for op in sel])

    def random_pauli(self) -> tuple[int, int]:
        p = self.net.p
        while True:
            a, b = (int(v) for v in self.rng.integers(0, p, 2))
            if a or b:
                return a, b


class Honest(Strategy):
    name = "honest"


class PauliTamper(Strategy):
    """Apply Paulis to corrupt-held wires at a chosen checkpoint.

    By default every held wire gets an independent random non-identity
    Pauli.  ``targets`` maps an index into the sorted held-wire list to an
    explicit (a, b) instead; indices past the current holding are skipped.  ``when`` is a checkpoint name or
    ``"every_round"``.
    """

    name = "pauli_tamper"

    def __init__(self, when: str = "post_sharing", targets: dict | None = None):
        self.when = when
        self.targets = None if targets is None else {int(k): tuple(v) for k, v in targets.items()}

    def _tamper(self) -> None:
        held = self.held()
        if self.targets is None:
            ops = [(w, *self.random_pauli()) for w in held]
        else:
            ops = [(held[idx], a, b) for idx, (a, b) in self.targets.items() if idx < len(held)]
        self.paulis(ops)

    def on_phase(self, phase: str, info: dict) -> None:
        if phase == self.when:
            self._tamper()

    def on_round(self, round_no: int) -> None:
        if self.when == "every_round":
            self._tamper()


class BadBranchDealer(Strategy):
    """A corrupt dealer that distributes an invalid encoding of the data.

    ``level="branch"``: the dealer's own re-encoding of its root component
    gets X errors on two leaves held by other players.
    ``level="root"``: two root components get X errors before distribution.
    Either way the data word is at distance 2 from the code.
    """

    name = "bad_branch_dealer"

    def __init__(self, level: str = "branch", positions=None):
        if level not in ("branch", "root"):
            raise ValueError("level is 'branch' or 'root'")
        self.level = level
        self.positions = positions

    def _positions(self, dealer: int) -> list[int]:
        if self.positions is not None:
            return list(self.positions)
        return [j for j in range(self.net.n) if j != dealer][:2]

    def on_phase(self, phase: str, info: dict) -> None:
        dealer = info.get("dealer")
        if dealer is None or dealer not in self.net.corrupt:
            return
        if self.level == "root" and phase == "dealer_prepared":
            block = info["roots"][(0, 0)]
            for j in self._positions(dealer):
                self.pauli(block.wires[j], 1, 0)
        if self.level == "branch" and phase == "reencoded":
            if info["player"] == dealer and info["system"] == (0, 0):
                block = info["block"]
                for j in self._positions(dealer):
                    self.pauli(block.wires[j], 1, 0)


class WrongStateDealer(Strategy):
    """A corrupt dealer of a proved sharing who encodes the wrong state.

    For a proved zero it shares |1> (logical X).  For a proved uniform
    superposition it shares |0> (logical inverse Fourier) when the code is
    self-dual, and otherwise the orthogonal state Z sum_a |a> (logical Z).
    """

    name = "wrong_state_dealer"

    def on_phase(self, phase: str, info: dict) -> None:
        if phase != "dealer_prepared" or info.get("dealer") not in self.net.corrupt:
            return
        block = info["roots"][(0, 0)]
        kind = info.get("proved")
        self._check(block.wires)
        if kind == "uniform" and block.code.delta == block.code.delta_dual:
            transversal_apply(self.net.state, [block], "fourier_inv")
        elif kind == "uniform":
            transversal_apply(self.net.state, [block], "phase_shift", 1)
        else:
            self.net.state.apply_local("shift", block.wires, 1)
        self.net.adversary_action(info["dealer"], "wrong_state", {"proved": kind})


class LyingBroadcaster(Strategy):
    """Every corrupt broadcast value is replaced by a different random value."""

    name = "lying_broadcaster"

    def on_broadcast(self, player: int, tag: str, values: list, honest: dict) -> list:
        p = self.net.p
        offs = self.rng.integers(1, p, len(values))
        return [(int(v) + int(o)) % p for v, o in zip(values, offs)]


class CliffordWireAttack(Strategy):
    """Random Clifford gates on corrupt-held wires at a checkpoint."""

    name = "clifford_wire_attack"

    def __init__(self, when: str = "post_sharing", depth: int = 3):
        self.when = when
        self.depth = depth

    def on_phase(self, phase: str, info: dict) -> None:
        if phase != self.when:
            return
        p = self.net.p
        held = self.held()
        if not held:
            return
        for _ in range(self.depth):
            for w in held:
                kind = ("fourier", "phase_shift", "scalar_mul", "shift")[int(self.rng.integers(4))]
                scalar = int(self.rng.integers(1, p))
                self.apply(kind, [w], scalar)
            if len(held) > 1:
                a, b = self.rng.choice(len(held), 2, replace=False)
                self.apply_sum([held[a]], [held[b]], int(self.rng.integers(1, p)))


STRATEGIES = {
    cls.name: cls
    for cls in (Honest, PauliTamper, BadBranchDealer, WrongStateDealer, LyingBroadcaster, CliffordWireAttack)
}


def make_strategy(name: str, **params) -> Strategy:
    try:
        cls = STRATEGIES[name]
    except KeyError:
        raise ValueError(f"unknown strategy {name!r}; choose from {sorted(STRATEGIES)}") from None
    return cls(**params)
