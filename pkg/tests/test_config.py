import json
import math
from pathlib import Path

import pytest

from config import AppConfig
from errors import ConfigError
from models.run_config import ChristoffelMethod, PNormMethod, RunConfig, SystemConfig
from models.unsafe import CylinderPredicate, GoalClause, HalfspacePredicate

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


@pytest.mark.parametrize("name", ["duffing", "duffing_pnorm", "laub_loomis", "quadrotor", "rendezvous"])
def test_shipped_configs_load(name):
    config = RunConfig.from_file(str(CONFIGS / f"{name}.toml"))
    assert config.system.name is not None


def test_duffing_config():
    config = RunConfig.from_file(str(CONFIGS / "duffing.toml"))
    assert isinstance(config.method, ChristoffelMethod)
    assert config.method.k == 10
    assert config.method.rho == 1e-4
    assert config.probabilistic.epsilon == 0.05
    assert config.probabilistic.delta == 1e-9


def test_quadrotor_config():
    config = RunConfig.from_file(str(CONFIGS / "quadrotor.toml"))
    assert isinstance(config.method, PNormMethod)
    assert config.method.p == math.inf
    assert config.iso_dims == [2]
    assert config.tube
    assert [g.dim for g in config.goals] == [2, 2, 2]
    assert config.goals[2].at == 5.0


def test_laub_loomis_config_has_halfspace():
    config = RunConfig.from_file(str(CONFIGS / "laub_loomis.toml"))
    assert isinstance(config.unsafe, HalfspacePredicate)
    assert config.unsafe.offset == 5.0


def test_json_config(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({
        "system": {"name": "duffing", "t1": 10.0, "parts": 101},
        "method": {"kind": "pnorm", "p": 2},
        "unsafe": {"kind": "cylinder", "axis": 2, "cross": [0, 1], "center": [0.0, 0.0], "radius": 1.0},
    }))
    config = RunConfig.from_file(str(path))
    assert isinstance(config.method, PNormMethod)
    assert isinstance(config.unsafe, CylinderPredicate)
    assert config.system.t_range() == (None, 10.0)


def test_defaults():
    config = RunConfig(system=SystemConfig(name="duffing"))
    assert isinstance(config.method, ChristoffelMethod)
    assert config.seed == 0
    assert config.plot.grid_n == 200
    assert config.goals == []
    assert config.system.t_range() is None


def test_missing_file():
    with pytest.raises(FileNotFoundError):
        RunConfig.from_file("does/not/exist.toml")


def test_unparsable_toml(tmp_path):
    path = tmp_path / "broken.toml"
    path.write_text("[system\nname = ")
    with pytest.raises(ConfigError):
        RunConfig.from_file(str(path))


@pytest.mark.parametrize("data,field", [
    ({"system": {"name": "pendulum"}}, "system.name"),
    ({"system": {"name": "duffing"}, "probabilistic": {"epsilon": 1.5}}, "probabilistic.epsilon"),
    ({"system": {"name": "duffing"}, "probabilistic": {"delta": 0.0}}, "probabilistic.delta"),
    ({"system": {"name": "duffing"}, "method": {"kind": "christoffel", "k": 0}}, "method.christoffel.k"),
    ({"system": {"name": "duffing"}, "iso_dims": [1, 0]}, "iso_dims"),
    ({"system": {"name": "duffing"}, "seed": -1}, "seed"),
])
def test_validation_errors(data, field):
    with pytest.raises(ConfigError) as info:
        RunConfig.from_dict(data)
    assert info.value.field == field


def test_pnorm_exponent_is_two_or_infinity():
    assert PNormMethod(p="inf").p == math.inf
    assert PNormMethod(p="Infinity").p == math.inf
    assert PNormMethod(p=2).p == 2.0
    with pytest.raises(ValueError):
        PNormMethod(p=3)


def test_system_source_is_exclusive():
    with pytest.raises(ValueError):
        SystemConfig()
    with pytest.raises(ValueError):
        SystemConfig(name="duffing", command=["sim"])
    with pytest.raises(ValueError):
        SystemConfig(command=["sim"], state_dim=2)


def test_system_time_and_recording_checks():
    with pytest.raises(ValueError):
        SystemConfig(name="duffing", t0=1.0, t1=1.0)
    with pytest.raises(ValueError):
        SystemConfig(name="duffing", parts=101, record_every=7)
    assert SystemConfig(name="duffing", parts=101, record_every=10).record_every == 10
    with pytest.raises(ValueError):
        SystemConfig(name="duffing", intervals=[(1.0, 0.0), (0.0, 1.0)])


def test_disturbance_accepts_none_strings():
    config = SystemConfig(name="duffing", disturbance=["none", {"kind": "sin", "m": 3}])
    assert config.disturbance[0] is None
    assert config.disturbance[1].m == 3


def test_predicate_validation():
    with pytest.raises(ValueError):
        HalfspacePredicate(coefficients=[0.0, 0.0], offset=1.0)
    with pytest.raises(ValueError):
        CylinderPredicate(axis=0, cross=(0, 1), center=(0.0, 0.0), radius=1.0)
    with pytest.raises(ValueError):
        CylinderPredicate(axis=2, cross=(0, 1), center=(0.0, 0.0), radius=0.0)
    with pytest.raises(ValueError):
        GoalClause(dim=0)
    with pytest.raises(ValueError):
        GoalClause(dim=0, lower=2.0, upper=1.0)
    with pytest.raises(ValueError):
        GoalClause(dim=0, lower=0.0, at=1.0, after=0.5)


def test_overrides_reach_nested_tables():
    config = RunConfig.from_file(str(CONFIGS / "duffing.toml"))
    changed = config.with_overrides(**{"seed": 7, "probabilistic.epsilon": 0.1, "plot.grid_n": 64, "n": None})
    assert changed.seed == 7
    assert changed.probabilistic.epsilon == 0.1
    assert changed.probabilistic.delta == config.probabilistic.delta
    assert changed.plot.grid_n == 64
    assert changed.n is None
    assert config.seed == 0


def test_invalid_override_is_a_config_error():
    config = RunConfig(system=SystemConfig(name="duffing"))
    with pytest.raises(ConfigError):
        config.with_overrides(**{"probabilistic.delta": 2.0})


def test_hashes():
    config = RunConfig(system=SystemConfig(name="duffing"))
    assert config.config_hash() == RunConfig(system=SystemConfig(name="duffing")).config_hash()
    moved = config.with_overrides(outputs="elsewhere", workers=4)
    assert moved.config_hash() == config.config_hash()
    assert moved.sampling_hash() == config.sampling_hash()
    replotted = config.with_overrides(**{"plot.grid_n": 50})
    assert replotted.sampling_hash() == config.sampling_hash()
    assert replotted.config_hash() != config.config_hash()
    reseeded = config.with_overrides(seed=1)
    assert reseeded.sampling_hash() != config.sampling_hash()


def test_app_config_from_env(monkeypatch):
    monkeypatch.setenv("REACHEST_WORKERS", "0")
    monkeypatch.setenv("REACHEST_OUTPUT_DIR", "/tmp/reach")
    monkeypatch.setenv("REACHEST_BATCH_SIZE", "64")
    monkeypatch.setenv("REACHEST_LOG_LEVEL", "debug")
    config = AppConfig.from_env()
    assert config.workers == 1
    assert config.output_dir == "/tmp/reach"
    assert config.batch_size == 64
    assert config.log_level == "DEBUG"


def test_app_config_defaults_and_file(tmp_path, monkeypatch):
    for name in ("REACHEST_WORKERS", "REACHEST_OUTPUT_DIR", "REACHEST_BATCH_SIZE", "REACHEST_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
    assert AppConfig.from_env() == AppConfig()
    path = tmp_path / "app.json"
    path.write_text(json.dumps({"workers": 3, "output_dir": "out"}))
    config = AppConfig.from_file(str(path))
    assert config.to_dict() == {"workers": 3, "output_dir": "out", "batch_size": 256, "log_level": "INFO"}
