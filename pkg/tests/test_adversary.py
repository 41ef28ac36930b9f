import pytest

from qmpc.adversary import STRATEGIES, PauliTamper, make_strategy
from qmpc.css import CssCode
from qmpc.network import Network, NetworkConfig, OwnershipViolation
from qmpc.sim.stabilizer import StabilizerState
from qmpc.vqss import vqss_share


def net_for(strategy, corrupt=(1,), seed=0):
    cfg = NetworkConfig(5, 1, 7, 1, frozenset(corrupt), seed, "vqss")
    return Network(cfg, StabilizerState(7), adversary=strategy)


def test_registry_names_are_stable():
    assert set(STRATEGIES) == {
        "honest", "pauli_tamper", "bad_branch_dealer", "wrong_state_dealer",
        "lying_broadcaster", "clifford_wire_attack",
    }
    for name, cls in STRATEGIES.items():
        assert cls.name == name


def test_unknown_strategy_and_bad_params():
    with pytest.raises(ValueError):
        make_strategy("nope")
    with pytest.raises(ValueError):
        make_strategy("bad_branch_dealer", level="leaf")
    with pytest.raises(TypeError):
        make_strategy("honest", depth=2)


def test_pauli_targets_from_json_form():
    s = make_strategy("pauli_tamper", targets={"0": [1, 2]})
    assert isinstance(s, PauliTamper) and s.targets == {0: (1, 2)}


def test_actions_restricted_to_corrupt_wires():
    s = make_strategy("honest")
    net = net_for(s)
    (mine,) = net.alloc(1, 1)
    (theirs,) = net.alloc(2, 1)
    s.pauli(mine, 1, 1)
    with pytest.raises(OwnershipViolation):
        s.pauli(theirs, 1, 0)
    with pytest.raises(OwnershipViolation):
        s.apply_sum([mine], [theirs])
    assert s.held() == [mine]
    assert len(net.transcript.of_kind("adversary_action")) == 2


def test_pauli_tamper_every_round_acts_each_round():
    s = make_strategy("pauli_tamper", when="every_round", targets={0: (1, 0)})
    net = net_for(s)
    (w,) = net.alloc(1, 1)
    for _ in range(3):
        net.next_round()
    assert net.measure([w]) == [3]


def test_pauli_targets_past_holding_are_skipped():
    s = make_strategy("pauli_tamper", when="every_round", targets={0: (1, 0), 5: (1, 0)})
    net = net_for(s)
    (w,) = net.alloc(1, 1)
    net.next_round()
    assert net.measure([w]) == [1]


@pytest.mark.parametrize("name", sorted(STRATEGIES))
def test_every_strategy_runs_a_sharing(name):
    params = {}
    net = net_for(make_strategy(name, **params), corrupt=(0,), seed=1)
    (w,) = net.alloc(0, 1)
    res = vqss_share(net, 0, w, CssCode(7, 5, 2), proved="zero" if name == "wrong_state_dealer" else None)
    # whatever happens, no honest player is ever blamed
    assert res.sets.B <= {0}
    assert all(res.sets.Bs[i] <= {0} for i in range(1, 5))


def test_clifford_attack_logs_actions():
    s = make_strategy("clifford_wire_attack", depth=2)
    net = net_for(s, corrupt=(3,))
    (w,) = net.alloc(0, 1)
    vqss_share(net, 0, w, CssCode(7, 5, 2))
    acts = net.transcript.of_kind("adversary_action")
    assert acts and all(e.actor == 3 for e in acts)
