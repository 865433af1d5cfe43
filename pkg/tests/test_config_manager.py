"""Tests für core.config_manager"""

import pytest

from core.config_manager import ConfigManager, ExperimentConfig, parse_value
from core.errors import ConfigError


def _write(tmp_path, text, name='experiment.ini'):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_defaults_are_valid():
    config = ConfigManager().get_experiment_config()

    assert config == ExperimentConfig()
    assert config.lengths == (18, 34, 64)
    assert config.repetitions == 20
    assert config.train_fraction == 0.7
    assert config.latent_dim == 64
    assert config.grid('temporal') == (0, 2, 4, 8, 16, 32)


def test_flat_file_without_section(tmp_path):
    path = _write(tmp_path, "# Kurzlauf\nmaster_seed = 7\nlengths = 18, 34\nrepetitions = 3\n"
                            "gaussian_grid = 0, 0.01, 0.05\n")

    config = ConfigManager(path).get_experiment_config()

    assert config.master_seed == 7
    assert config.lengths == (18, 34)
    assert config.repetitions == 3
    assert config.gaussian_grid == (0.0, 0.01, 0.05)


def test_file_with_section(tmp_path):
    path = _write(tmp_path, "[experiment]\nworkers = 4\ncovariance = ml\n")

    config = ConfigManager(path).get_experiment_config()

    assert (config.workers, config.covariance) == (4, 'ml')


@pytest.mark.parametrize("text,field", [
    ("gaussian_grid = 0, abc\n", 'gaussian_grid'),
    ("gaussian_grid = 0.1, 0.05\n", 'gaussian_grid'),
    ("salt_pepper_grid = 0, 1.5\n", 'salt_pepper_grid'),
    ("temporal_grid = 0, 2.5\n", 'temporal_grid'),
    ("temporal_grid = 0, 80\n", 'temporal_grid'),
    ("lengths = 18, 1\n", 'lengths'),
    ("repetitions = 0\n", 'repetitions'),
    ("train_fraction = 1.0\n", 'train_fraction'),
    ("covariance = biased\n", 'covariance'),
    ("synth_frames = 20\n", 'synth_frames'),
    ("bogus = 1\n", 'bogus'),
    ("[other]\nmaster_seed = 1\n", 'other'),
    ("master_seed = -1\n", 'master_seed'),
    ("master_seed = 18446744073709551616\n", 'master_seed'),
])
def test_invalid_values_name_the_field(tmp_path, text, field):
    path = _write(tmp_path, text)

    with pytest.raises(ConfigError) as info:
        ConfigManager(path).get_experiment_config()

    assert info.value.field == field
    assert field in str(info.value)


def test_missing_dataset_directory(tmp_path):
    manager = ConfigManager()
    manager.apply_overrides({'dataset': str(tmp_path / 'fehlt')})
    with pytest.raises(ConfigError) as info:
        manager.get_experiment_config()
    assert info.value.field == 'dataset'


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        ConfigManager(str(tmp_path / 'nope.ini'))


def test_overrides_take_precedence(tmp_path):
    manager = ConfigManager(_write(tmp_path, "master_seed = 7\nworkers = 2\n"))

    manager.apply_overrides({'master_seed': 99, 'workers': None, 'lengths': '18,34', 'latent_dim': 8})
    config = manager.get_experiment_config()

    assert config.master_seed == 99
    assert config.workers == 2
    assert config.lengths == (18, 34)
    assert config.latent_dim == 8


def test_list_override_becomes_tuple():
    manager = ConfigManager()
    manager.apply_overrides({'lengths': [18, 34]})
    assert manager.get_experiment_config().lengths == (18, 34)


def test_unknown_override():
    with pytest.raises(ConfigError):
        ConfigManager().apply_overrides({'seed': 1})


def test_config_hash():
    base = ExperimentConfig()
    assert base.config_hash() == ExperimentConfig().config_hash()
    assert base.config_hash() != ExperimentConfig(master_seed=1).config_hash()
    assert len(base.config_hash()) == 64


def test_save_and_reload(tmp_path):
    manager = ConfigManager()
    manager.apply_overrides({'master_seed': 5, 'gaussian_grid': '0, 0.02', 'covariance': 'ml'})
    path = str(tmp_path / 'saved.ini')

    manager.save_config(path)
    reloaded = ConfigManager(path).get_experiment_config()

    assert reloaded == manager.get_experiment_config()
    assert reloaded.to_items() == manager.get_experiment_config().to_items()


def test_parse_value():
    assert parse_value('lengths', '18 34, 64') == (18, 34, 64)
    assert parse_value('temporal_grid', '0, 2.0, 4') == (0, 2, 4)
    with pytest.raises(ConfigError):
        parse_value('stride', 'zwei')
