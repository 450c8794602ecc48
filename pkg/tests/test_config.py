import pytest

from fchosim.config import ConfigError, ScenarioConfig


def test_defaults_validate():
    cfg = ScenarioConfig().validate()
    assert cfg.carrier_ghz == 28.0 and cfg.n_max == 4 and cfg.kb == 4
    assert (cfg.o_prep_db, cfg.o_exec_db, cfg.o_rel_db, cfg.o_rep_db) == (10, 3, 13, 3)
    assert cfg.noise_dbm == pytest.approx(-85.0, abs=0.1)


def test_validation_lists_every_problem():
    with pytest.raises(ConfigError) as err:
        ScenarioConfig(t_prep_ms=70, gamma_in_db=-9.0, n_max=9, mode="HO").validate()
    text = " ".join(err.value.problems)
    for field in ("t_prep_ms", "gamma_in_db", "n_max", "mode"):
        assert field in text
    assert len(err.value.problems) == 4


def test_condition_time_must_be_ssb_multiple():
    with pytest.raises(ConfigError):
        ScenarioConfig(t_exec_ms=90).validate()
    ScenarioConfig(t_exec_ms=100).validate()


def test_scale_factor():
    cfg = ScenarioConfig(n_ue=420, t_sim_s=30.0, scale=0.25)
    assert cfg.effective_n_ue == 105
    assert cfg.t_sim_ms == 7500
    assert ScenarioConfig.full_scale().effective_n_ue == 420


def test_json_roundtrip(tmp_path):
    cfg = ScenarioConfig(seed=9, blockage_case="IV", policy_file="x.csv")
    cfg.dump(tmp_path / "c.json")
    assert ScenarioConfig.load(tmp_path / "c.json") == cfg


def test_unknown_field_rejected():
    with pytest.raises(ConfigError):
        ScenarioConfig.from_dict({"carrier": 28})
