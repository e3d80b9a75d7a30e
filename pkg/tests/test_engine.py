from fractions import Fraction as F

import pytest

from dimarket.engine import (
    Block,
    Market,
    Partition,
    PreconditionError,
    beta_gamma,
    check_consensus,
    clearing_price,
    conditional_bid,
    refine_partition,
    run_all_states,
    run_dynamics,
)
from dimarket.model import (
    SpinState,
    constant_security,
    make_parity,
    make_symmetric,
    prior_from_weights,
    uniform_prior,
)


def S(*spins):
    return SpinState.from_spins(spins)


def blocks_of(part):
    return sorted(tuple(b.members) for b in part.blocks)


# -- per-block quantities ----------------------------------------------------

def test_conditional_bid_examples(xor2, uniform2, biased2, maj3, uniform3):
    assert conditional_bid(xor2, uniform2, Block.full(2), 0, 1) == 0
    assert conditional_bid(xor2, biased2, Block.full(2), 0, 1) == F(1, 2)
    assert conditional_bid(maj3, uniform3, Block.full(3), 0, 1) == F(1, 2)


def test_conditional_bid_empty_slice(xor2, uniform2):
    with pytest.raises(PreconditionError):
        conditional_bid(xor2, uniform2, Block(2, (0b01, 0b11)), 0, -1)


def test_clearing_price_examples(xor2, biased2):
    full = Block.full(2)
    assert clearing_price(xor2, biased2, full, S(1, 1)) == F(1, 2)
    assert clearing_price(xor2, biased2, full, S(1, -1)) == 0
    assert clearing_price(constant_security(2), biased2, Block(2, (1, 2)), S(1, -1)) == 1


def test_clearing_price_state_outside_block(xor2, biased2):
    with pytest.raises(PreconditionError):
        clearing_price(xor2, biased2, Block(2, (0,)), S(1, 1))


def test_beta_gamma_examples(xor2, biased2, uniform2):
    full = Block.full(2)
    for i in range(2):
        assert beta_gamma(xor2, biased2, full, i) == (0, F(1, 2))
        assert beta_gamma(xor2, uniform2, full, i) == (0, 0)
    assert beta_gamma(constant_security(2), biased2, full, 0) == (1, 0)


def test_beta_gamma_single_spin_value_block(xor2, biased2):
    # player 1 is +1 throughout, so the bid cannot depend on the spin
    b, c = beta_gamma(xor2, biased2, Block(2, (0b01, 0b11)), 0)
    assert c == 0
    assert b == conditional_bid(xor2, biased2, Block(2, (0b01, 0b11)), 0, 1)


def test_refine_partition_examples(xor2, biased2, uniform2, maj3, uniform3):
    one = refine_partition(xor2, biased2, Partition.trivial(2))
    assert blocks_of(one) == [(0,), (1, 2), (3,)]
    assert one.round == 1
    assert blocks_of(refine_partition(xor2, uniform2, Partition.trivial(2))) == [(0, 1, 2, 3)]
    by_sum = blocks_of(refine_partition(maj3, uniform3, Partition.trivial(3)))
    assert by_sum == [(0,), (1, 2, 4), (3, 5, 6), (7,)]


def test_block_validation():
    with pytest.raises(Exception):
        Block(2, ())
    with pytest.raises(Exception):
        Block(2, (4,))
    assert Block(2, (3, 1, 1)).members == (1, 3)
    assert Block(2, (1,)) <= Block.full(2)


# -- dynamics ------------------------------------------------------------------

def test_run_dynamics_parity_biased(xor2, biased2):
    t = run_dynamics(xor2, biased2, S(1, -1))
    assert t.prices == [0, -1]
    assert t.equilibrium_round == 2
    assert t.converged_to_truth
    assert t.price_at(2) == -1 and t.price_at(50) == -1


def test_run_dynamics_xor_uniform(xor2, uniform2):
    t = run_dynamics(xor2, uniform2, S(1, 1))
    assert t.prices == [0]
    assert t.equilibrium_round == 1
    assert not t.converged_to_truth
    assert t.rounds[0].block_after.members == (0, 1, 2, 3)


def test_run_dynamics_majority(maj3, uniform3):
    t = run_dynamics(maj3, uniform3, S(1, 1, -1))
    assert t.prices[:2] == [F(1, 6), 1]
    assert t.equilibrium_round == 2
    assert t.converged_to_truth


def test_max_rounds_cut_short(maj3, uniform3):
    t = run_dynamics(maj3, uniform3, S(1, 1, -1), max_rounds=1)
    assert not t.terminated
    assert t.equilibrium_round is None
    with pytest.raises(ValueError):
        t.price_at(2)


def test_bids_recorded_per_player(maj3, uniform3):
    t = run_dynamics(maj3, uniform3, S(1, 1, -1))
    assert t.rounds[0].bids == (F(1, 2), F(1, 2), F(-1, 2))
    assert sum(t.rounds[0].bids) / 3 == t.rounds[0].price


def test_run_all_states_examples(xor2, biased2, uniform2, maj3, uniform3):
    r = run_all_states(xor2, biased2)
    assert all(r.converged(b) and r.equilibrium_round(b) <= 2 for b in range(4))
    r = run_all_states(xor2, uniform2)
    assert sum(r.converged(b) for b in range(4)) == 0
    r = run_all_states(maj3, uniform3)
    assert all(r.converged(b) and r.equilibrium_round(b) <= 3 for b in range(8))
    assert r.terminated
    assert check_consensus(maj3, uniform3, r) == []


def test_all_states_matches_single_runs():
    g = make_symmetric([1, -1, 1, 1])
    P = prior_from_weights(3, [5, 1, 7, 2, 9, 3, 4, 6])
    r = run_all_states(g, P)
    for s in r:
        single = run_dynamics(g, P, s)
        assert r[s] == single


def test_all_states_partitions_refine(maj3, uniform3):
    r = run_all_states(maj3, uniform3)
    for coarse, fine in zip(r.partitions, r.partitions[1:]):
        for b in fine.blocks:
            assert any(b <= c for c in coarse.blocks)


def test_market_split_groups_by_price(xor2, biased2):
    m = Market(xor2, biased2)
    _, groups = m.split((0, 1, 2, 3))
    assert sorted((p, tuple(sorted(sub))) for p, sub in groups) == [
        (F(-1, 2), (0,)), (0, (1, 2)), (F(1, 2), (3,))]


def test_single_player_market():
    g = make_parity(1, 1, {1})
    r = run_all_states(g, uniform_prior(1))
    assert r.converged(0) and r.converged(1)
    assert r.equilibrium_round(0) == 2
