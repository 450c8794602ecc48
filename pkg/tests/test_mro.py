import numpy as np
import pytest

from fchosim.config import ConfigError
from fchosim.events import Event
from fchosim.mro import (MroPolicy, build_H, derive_policy, identity_policy, load_H, save_H)


def ho(a, b):
    return Event(0, 0, "ho_success", a, b)


def test_build_H_counts():
    H = build_H([ho(1, 2)] * 3 + [ho(1, 3)], 10)
    assert H[1, 2] == 0.75 and H[1, 3] == 0.25
    assert not H[9].any()
    rows = H.sum(axis=1)
    assert np.all((np.abs(rows) < 1e-12) | (np.abs(rows - 1) < 1e-12))


def test_build_H_ignores_other_events():
    H = build_H([ho(0, 1), Event(0, 0, "rlf", 0, -1), Event(0, 0, "prep", 0, 2)], 3)
    assert H[0, 1] == 1.0 and H.sum() == 1.0


def test_empty_log_warns(caplog):
    H = build_H([], 4)
    assert not H.any()
    assert "no successful handovers" in caplog.text


def example_H():
    H = np.zeros((5, 5))
    H[1, 2], H[1, 3], H[1, 0] = 0.75, 0.05, 0.20
    return H


def test_policy_thresholds():
    H = example_H()
    assert derive_policy(H, "blocklist").blocked[1, 4]
    assert not derive_policy(H, "blocklist").blocked[1, 1]
    off = derive_policy(H, "offset-reduction")
    assert off.o_prep_db[1, 2] == 10.0
    assert off.o_prep_db[1, 3] == 7.0
    assert not off.blocks_anything
    comb = derive_policy(H, "combined")
    assert not comb.blocked[1, 3] and comb.o_prep_db[1, 3] == 7.0
    assert comb.blocked[1, 4]
    assert comb.o_prep_db[1, 2] == 10.0


def test_policy_is_pure_and_idempotent():
    H = example_H()
    H0 = H.copy()
    a = derive_policy(H, "combined")
    b = derive_policy(H, "combined")
    assert np.array_equal(H, H0)
    assert np.array_equal(a.blocked, b.blocked) and np.array_equal(a.o_prep_db, b.o_prep_db)


def test_policy_touches_at_most_n_squared():
    for n in (3, 21):
        pol = derive_policy(np.zeros((n, n)), "combined")
        assert pol.entries_touched <= n * n


def test_unknown_approach():
    with pytest.raises(ConfigError):
        derive_policy(example_H(), "magic")


def test_gate_and_prune():
    pol = derive_policy(example_H(), "combined")
    assert pol.gate(1, 4) is None
    assert pol.gate(1, 3) == 7.0
    assert pol.reactive_prune([4, 2], 1) == [4]
    assert pol.reactive_prune([2, 3], 1) == []
    assert derive_policy(example_H(), "offset-reduction").reactive_prune([4, 2], 1) == []


def test_identity_policy():
    pol = identity_policy(4)
    assert not pol.blocks_anything and np.all(pol.o_prep_db == 10.0)


def test_policy_and_H_roundtrip(tmp_path):
    H = example_H()
    pol = derive_policy(H, "combined")
    pol.save(tmp_path / "p.csv")
    back = MroPolicy.load(tmp_path / "p.csv")
    assert np.array_equal(back.blocked, pol.blocked)
    assert np.array_equal(back.o_prep_db, np.where(np.eye(5, dtype=bool), 0.0, pol.o_prep_db))
    header = (tmp_path / "p.csv").read_text().splitlines()[0]
    assert header == "i,j,blocked,o_prep_db"
    save_H(tmp_path / "H.csv", H)
    assert np.array_equal(load_H(tmp_path / "H.csv"), H)


def test_incomplete_policy_file(tmp_path):
    (tmp_path / "p.csv").write_text("i,j,blocked,o_prep_db\n0,1,0,10\n")
    with pytest.raises(ConfigError):
        MroPolicy.load(tmp_path / "p.csv")


def test_lower_offset_fires_later_on_rising_ramp():
    from fchosim.cho import evaluate_condition
    ref = np.full(60, -80.0)
    cand = np.linspace(-100.0, -70.0, 60)
    t10 = np.flatnonzero(evaluate_condition("prep", ref, cand, 10.0, 80))[0]
    t7 = np.flatnonzero(evaluate_condition("prep", ref, cand, 7.0, 80))[0]
    assert t7 > t10
