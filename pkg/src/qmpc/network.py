"""Synchronous network of n players sharing one simulated quantum state.

Quantum messages are transfers of wire ownership inside the global state,
so entanglement between adversary ancillas and protocol wires is kept.
Every wire has an owner (a player index) or None once it has been measured
and retired.  Broadcasts are recorded once, so all players see the same
values; corrupt players speak after the honest ones in each broadcast
round (rushing adversary).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Any, Iterable

import numpy as np

from qmpc.field import is_prime

EVENT_KINDS = ("qsend", "csend", "broadcast", "coin", "measure", "adversary_action", "set_update", "note")


class ConfigRejected(Exception):
    """Parameters violate the threshold or regime rules."""


class OwnershipViolation(Exception):
    """A player touched a wire it does not hold."""


REGIMES = {"vqss": 4, "mpqc": 6}


@dataclass(frozen=True)
class NetworkConfig:
    n: int
    t: int
    p: int
    k: int = 4
    corrupt: frozenset = frozenset()
    seed: int = 0
    regime: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "corrupt", frozenset(int(c) for c in self.corrupt))
        if not is_prime(self.p) or self.p <= self.n:
            raise ConfigRejected(f"p={self.p} must be a prime larger than n={self.n}")
        if len(self.corrupt) > self.t:
            raise ConfigRejected(f"{len(self.corrupt)} corrupt players exceeds t={self.t}")
        if any(not 0 <= c < self.n for c in self.corrupt):
            raise ConfigRejected("corrupt player index out of range")
        if self.regime is not None:
            if self.regime not in REGIMES:
                raise ConfigRejected(f"unknown regime {self.regime!r}")
            f = REGIMES[self.regime]
            if self.n != f * self.t + 1:
                raise ConfigRejected(f"{self.regime} needs n = {f}t+1, got n={self.n}, t={self.t}")
        if self.k < 1:
            raise ConfigRejected("k must be at least 1")

    @property
    def honest(self) -> list[int]:
        return [i for i in range(self.n) if i not in self.corrupt]


@dataclass(frozen=True)
class TranscriptEvent:
    round: int
    kind: str
    actor: Any
    payload: Any

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> TranscriptEvent:
        d = json.loads(line)
        return cls(d["round"], d["kind"], _freeze(d["actor"]), _freeze(d["payload"]))


def _freeze(v):
    """JSON lists back to the canonical in-memory form (lists stay lists)."""
    return v


def _plain(v):
    """Convert numpy scalars/arrays and sets to JSON-friendly values."""
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, (set, frozenset)):
        return sorted(_plain(x) for x in v)
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, np.integer):
        return int(v)
    return v


@dataclass
class Transcript:
    events: list[TranscriptEvent] = field(default_factory=list)

    def append(self, ev: TranscriptEvent) -> None:
        if self.events and ev.round < self.events[-1].round:
            raise ValueError("rounds must be nondecreasing")
        self.events.append(ev)

    def to_jsonl(self) -> str:
        return "".join(e.to_json() + "\n" for e in self.events)

    @classmethod
    def from_jsonl(cls, text: str) -> Transcript:
        return cls([TranscriptEvent.from_json(line) for line in text.splitlines() if line.strip()])

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_jsonl())

    @classmethod
    def read(cls, path) -> Transcript:
        with open(path) as fh:
            return cls.from_jsonl(fh.read())

    def of_kind(self, kind: str) -> list[TranscriptEvent]:
        return [e for e in self.events if e.kind == kind]

    def __len__(self) -> int:
        return len(self.events)

    def __eq__(self, other) -> bool:
        return isinstance(other, Transcript) and self.to_jsonl() == other.to_jsonl()


class Network:
    """Round clock, ownership table, channels, coins and the adversary seam."""

    def __init__(self, config: NetworkConfig, state, adversary=None, log_measurements: bool = False):
        from qmpc.adversary import Honest

        self.config = config
        self.state = state
        self.p = config.p
        seq = np.random.SeedSequence(config.seed)
        meas, coins, adv = seq.spawn(3)
        self.rng = np.random.default_rng(meas)
        self.coin_rng = np.random.default_rng(coins)
        self.owner: dict[int, int | None] = {}
        self.round = 0
        self.transcript = Transcript()
        self.log_measurements = log_measurements
        self.adversary = adversary if adversary is not None else Honest()
        self.adversary.bind(self, np.random.default_rng(adv))

    # ---------------------------------------------------------------- basics
    @property
    def n(self) -> int:
        return self.config.n

    @property
    def t(self) -> int:
        return self.config.t

    @property
    def corrupt(self) -> frozenset:
        return self.config.corrupt

    def is_corrupt(self, player: int) -> bool:
        return player in self.config.corrupt

    def next_round(self) -> int:
        self.round += 1
        self.adversary.on_round(self.round)
        return self.round

    def log(self, kind: str, actor, payload) -> None:
        self.transcript.append(TranscriptEvent(self.round, kind, _plain(actor), _plain(payload)))

    # ---------------------------------------------------------------- wires
    def alloc(self, player: int, count: int = 1, joined: bool = False) -> list[int]:
        if joined and getattr(self.state, "backend", None) == "tableau":
            wires = self.state.alloc(count, joined=True)
        else:
            wires = self.state.alloc(count)
        for w in wires:
            self.owner[w] = player
        return wires

    def held_by(self, player: int) -> list[int]:
        return [w for w, o in self.owner.items() if o == player]

    def check_owned(self, player: int, wires: Iterable[int]) -> None:
        for w in wires:
            if self.owner.get(w, None) != player:
                raise OwnershipViolation(f"player {player} does not hold wire {w}")

    def check_live(self, wires: Iterable[int]) -> None:
        for w in wires:
            if self.owner.get(w, None) is None:
                raise OwnershipViolation(f"wire {w} is not held by any player")

    def deliver_quantum(self, src: int, dst: int, wires, tag: str = "") -> list[int]:
        wires = list(wires)
        self.check_owned(src, wires)
        if self.is_corrupt(src) and src != dst:
            self.adversary.before_send(src, dst, wires, tag)
            self.check_owned(src, wires)
        for w in wires:
            self.owner[w] = dst
        self.log("qsend", src, {"to": dst, "wires": wires, "tag": tag})
        if self.is_corrupt(dst) and src != dst:
            self.adversary.on_receive(dst, src, wires, tag)
        return wires

    def retire(self, wires) -> None:
        """Measured wires leave the protocol."""
        for w in wires:
            self.owner[w] = None
        if hasattr(self.state, "discard"):
            try:
                self.state.discard(list(wires))
            except ValueError:
                pass

    # ------------------------------------------------------ local operations
    def local(self, kind: str, wires, scalar=1) -> None:
        """Each wire's holder applies the single-wire gate to it."""
        wires = list(wires)
        self.check_live(wires)
        self.state.apply_local(kind, wires, scalar)

    def local_sum(self, controls, targets, scalar=1) -> None:
        controls, targets = list(controls), list(targets)
        for a, b in zip(controls, targets):
            if self.owner.get(a) is None or self.owner.get(a) != self.owner.get(b):
                raise OwnershipViolation(f"wires {a}, {b} are not held by one player")
        self.state.apply_sum(controls, targets, scalar)

    def local_gate(self, kind: str, wires, scalar=1) -> None:
        """A multi-wire gate on wires that one player holds."""
        from qmpc.sim.gates import GateOp

        wires = list(wires)
        owners = {self.owner.get(w) for w in wires}
        if len(owners) != 1 or None in owners:
            raise OwnershipViolation(f"wires {wires} are not held by one player")
        self.state.apply(GateOp(kind, tuple(wires), scalar))

    def local_linear(self, player: int, wires, mat) -> None:
        wires = list(wires)
        self.check_owned(player, wires)
        self.state.apply_linear(wires, mat)

    def measure(self, wires, rng=None) -> list[int]:
        """Holders measure their wires; the wires are retired."""
        wires = list(wires)
        self.check_live(wires)
        rng = self.rng if rng is None else rng
        out = [int(v) for v in self.state.measure_many(wires, rng)]
        if self.log_measurements:
            self.log("measure", None, {"wires": wires, "outcomes": out})
        self.retire(wires)
        return out

    # ------------------------------------------------------ classical layer
    def broadcast(self, messages: dict, tag: str = "") -> dict:
        """One broadcast round; ``messages`` maps player -> list of values.

        Honest values are fixed first; each corrupt player then chooses its
        values seeing them.  Everyone receives the same final dict.
        """
        final = {}
        for player in sorted(messages):
            if not self.is_corrupt(player):
                final[player] = [int(v) % self.p for v in messages[player]]
        for player in sorted(messages):
            if self.is_corrupt(player):
                vals = self.adversary.on_broadcast(player, tag, list(messages[player]), dict(final))
                final[player] = [int(v) % self.p for v in vals]
        self.log("broadcast", sorted(final), {"tag": tag, "values": {p: final[p] for p in sorted(final)}})
        return {p: final[p] for p in sorted(final)}

    def public_coin(self, count: int, tag: str = "") -> list[int]:
        coins = [int(c) for c in self.coin_rng.integers(0, self.p, count)]
        self.log("coin", None, {"tag": tag, "values": coins})
        self.adversary.on_coins(tag, coins)
        return coins

    def adversary_action(self, player: int, description: str, detail=None) -> None:
        self.log("adversary_action", player, {"action": description, "detail": detail})


def run_rounds(network: Network, steps) -> Transcript:
    """Run protocol steps (callables taking the network), one round each.

    Exceptions propagate after the transcript up to the failure has been
    attached to them as ``exc.transcript``.
    """
    for step in steps:
        network.next_round()
        try:
            step(network)
        except Exception as exc:  # keep the partial log for the caller
            exc.transcript = network.transcript
            raise
    return network.transcript
