"""Tests for the run configuration parser module."""

import pytest
import yaml
from pathlib import Path
import tempfile

# Add parent directory to path for imports
import sys
sys.path.insert(0, str(Path(__file__).parent.parent))

from lib.config_parser import COMMANDS, RunConfig, RunConfigParser
from lib.errors import ConfigError


class TestRunConfigParser:
    """Test suite for RunConfigParser class."""

    @pytest.fixture
    def temp_config_file(self):
        """Create a temporary config file for testing."""
        with tempfile.NamedTemporaryFile(mode='w', suffix='.yaml', delete=False) as f:
            config = {
                'defaults': {
                    'tol': 1e-8,
                    'seed': 7,
                },
                'commands': {
                    'orbit': {
                        'max_size': 5000,
                        'probes': 512,
                    }
                }
            }
            yaml.dump(config, f)
            temp_path = Path(f.name)

        yield temp_path

        # Cleanup
        if temp_path.exists():
            temp_path.unlink()

    @pytest.fixture
    def fixture_config(self):
        """Return path to the test fixture configuration."""
        return Path(__file__).parent / 'fixtures' / 'run-config.yaml'

    def test_builtin_defaults(self):
        """Test that no file yields the built-in limits."""
        parser = RunConfigParser()
        config = parser.get_run_config('classify')

        assert config == RunConfig()
        assert config.cf_bound == 10 ** 6
        assert config.threads is None
        assert parser.validate_config() == []

    def test_defaults_merge(self, temp_config_file):
        """Test that user defaults override built-ins for every command."""
        parser = RunConfigParser(temp_config_file)

        for name in COMMANDS:
            config = parser.get_run_config(name)
            assert config.tol == 1e-8
            assert config.seed == 7
            assert config.orth_tol == 1e-12

    def test_command_section_overrides_defaults(self, temp_config_file):
        """Test that a command section wins over the defaults."""
        parser = RunConfigParser(temp_config_file)

        orbit = parser.get_run_config('orbit')
        assert orbit.max_size == 5000
        assert orbit.probes == 512

        ball = parser.get_run_config('ball')
        assert ball.max_size == 100000
        assert ball.probes == 4096

    def test_load_fixture_config(self, fixture_config):
        """Test loading the fixture configuration file."""
        parser = RunConfigParser(fixture_config)

        assert parser.validate_config() == []
        assert parser.get_run_config('certify').cf_bound == 10000
        assert parser.get_run_config('orbit').max_depth == 12

    def test_unknown_command(self):
        """Test that asking for an unknown command raises."""
        with pytest.raises(ValueError, match='unknown command'):
            RunConfigParser().get_run_config('deploy')

    def test_out_of_range_value_blocks_command(self, tmp_path):
        """Test that a command refuses a configuration with bad values."""
        path = tmp_path / 'bad.yaml'
        path.write_text('commands:\n  orbit:\n    probes: 0\n')

        parser = RunConfigParser(path)
        with pytest.raises(ConfigError, match="orbit: 'probes' must be a positive integer"):
            parser.get_run_config('orbit')
        assert parser.get_run_config('ball').probes == 4096

    def test_missing_file(self, tmp_path):
        """Test that a missing file raises FileNotFoundError."""
        with pytest.raises(FileNotFoundError):
            RunConfigParser(tmp_path / 'absent.yaml')

    def test_invalid_yaml(self, tmp_path):
        """Test that malformed YAML is reported."""
        path = tmp_path / 'bad.yaml'
        path.write_text('defaults: [tol: \n')

        with pytest.raises(yaml.YAMLError):
            RunConfigParser(path)

    def test_empty_file(self, tmp_path):
        """Test that an empty file behaves like no file."""
        path = tmp_path / 'empty.yaml'
        path.write_text('')

        assert RunConfigParser(path).get_run_config('orbit') == RunConfig()

    def test_unknown_keys_ignored_when_resolving(self, tmp_path):
        """Test that unknown keys do not break get_run_config."""
        path = tmp_path / 'extra.yaml'
        path.write_text('defaults:\n  colour: blue\n  tol: 1.0e-7\n')

        parser = RunConfigParser(path)
        assert parser.get_run_config('ball').tol == 1e-7


class TestValidateConfig:
    """Validation messages for run configurations."""

    def _errors(self, tmp_path, text):
        path = tmp_path / 'config.yaml'
        path.write_text(text)
        return RunConfigParser(path).validate_config()

    def test_unknown_key_reported_once_per_command(self, tmp_path):
        errors = self._errors(tmp_path, 'commands:\n  orbit:\n    colour: blue\n')
        assert errors == ["orbit: unknown key 'colour'"]

    def test_unknown_top_level_key(self, tmp_path):
        errors = self._errors(tmp_path, 'sites: {}\n')
        assert "unknown top-level key 'sites'" in errors

    def test_unknown_command_section(self, tmp_path):
        errors = self._errors(tmp_path, 'commands:\n  deploy:\n    tol: 1.0e-9\n')
        assert "unknown command section 'deploy'" in errors

    def test_non_positive_tolerance(self, tmp_path):
        errors = self._errors(tmp_path, 'defaults:\n  tol: 0\n')
        assert any("'tol' must be a positive number" in e for e in errors)

    def test_boolean_is_not_an_integer(self, tmp_path):
        errors = self._errors(tmp_path, 'commands:\n  ball:\n    max_size: true\n')
        assert errors == ["ball: 'max_size' must be a positive integer, got True"]

    def test_negative_seed(self, tmp_path):
        errors = self._errors(tmp_path, 'commands:\n  orbit:\n    seed: -1\n')
        assert errors == ["orbit: 'seed' must be a non-negative integer, got -1"]

    def test_threads(self, tmp_path):
        errors = self._errors(tmp_path, 'commands:\n  orbit:\n    threads: 0\n')
        assert errors == ["orbit: 'threads' must be a positive integer, got 0"]

    def test_output_must_be_a_path(self, tmp_path):
        errors = self._errors(tmp_path, 'commands:\n  orbit:\n    output: 3\n')
        assert errors == ["orbit: 'output' must be a string path"]


class TestRunConfigOverride:
    """Explicit flags layered over the resolved configuration."""

    def test_override_replaces_values(self):
        config = RunConfig().override(tol=1e-6, seed=3)
        assert config.tol == 1e-6
        assert config.seed == 3

    def test_override_skips_none(self):
        base = RunConfig(max_size=10)
        assert base.override(max_size=None, threads=None) == base

    def test_override_returns_new_instance(self):
        base = RunConfig()
        changed = base.override(probes=16)
        assert base.probes == 4096
        assert changed.probes == 16


if __name__ == '__main__':
    # Run tests with pytest
    pytest.main([__file__, '-v'])
