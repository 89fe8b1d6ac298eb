"""Tests for configuration loading."""

import pytest
import sys
import os

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from subtree_bounds.utils.config import (
    load_config,
    Config,
    DEFAULT_FAMILIES,
    EnumerationConfig,
    SolverConfig,
)


class TestLoadConfig:
    """Tests for configuration loading."""

    def test_load_valid_config(self, sample_config_yaml):
        """Test loading a valid configuration file."""
        config = load_config(str(sample_config_yaml))

        assert isinstance(config, Config)
        assert isinstance(config.solver, SolverConfig)
        assert isinstance(config.enumeration, EnumerationConfig)

    def test_load_config_solver_settings(self, sample_config_yaml):
        """Test that solver settings are loaded correctly."""
        config = load_config(str(sample_config_yaml))

        assert config.solver.max_states == 65536
        assert config.solver.tol == 1e-8
        assert config.solver.route == "dense"

    def test_load_config_enumeration_settings(self, sample_config_yaml):
        """Test that enumeration settings are loaded correctly."""
        config = load_config(str(sample_config_yaml))

        assert config.enumeration.mode == "exhaustive"
        assert config.enumeration.strategy == "greedy"
        assert config.enumeration.max_vertices == 8
        assert config.enumeration.min_vertices == 1

    def test_load_config_suite_settings(self, sample_config_yaml):
        """Test that suite settings are loaded correctly."""
        config = load_config(str(sample_config_yaml))

        assert config.suite.families == ["cycle(3)", "grid(2,2)"]
        assert config.suite.seeds == 2
        assert config.suite.start_seed == 5
        assert config.generator.cardinality == 3
        assert config.logging.log_level == "DEBUG"

    def test_defaults_without_file(self):
        """Test that no path gives the built-in defaults."""
        config = load_config()

        assert config.solver.max_states == 2 ** 22
        assert config.enumeration.mode == "spanning"
        assert config.suite.families == DEFAULT_FAMILIES
        assert config.logging.log_file is None

    def test_missing_sections_use_defaults(self, temp_dir):
        """Test that omitted sections fall back to defaults."""
        config_path = temp_dir / "partial.yaml"
        config_path.write_text("solver:\n  tol: 1.0e-6\n")
        config = load_config(str(config_path))

        assert config.solver.tol == 1e-6
        assert config.generator.coupling_high == 4.0

    def test_load_config_file_not_found(self):
        """Test error handling for missing config file."""
        with pytest.raises(FileNotFoundError):
            load_config("/nonexistent/path/config.yaml")

    def test_load_config_invalid_route(self, temp_dir):
        """Test validation of the excluded-term route."""
        config_path = temp_dir / "invalid_config.yaml"
        config_path.write_text('solver:\n  route: "sampling"\n')

        with pytest.raises(ValueError, match="route"):
            load_config(str(config_path))

    def test_load_config_invalid_coupling(self, temp_dir):
        """Test validation of the coupling range."""
        config_path = temp_dir / "invalid_config.yaml"
        config_path.write_text("generator:\n  coupling_low: 3.0\n  coupling_high: 1.0\n")

        with pytest.raises(ValueError, match="Coupling range"):
            load_config(str(config_path))

    def test_load_config_invalid_section(self, temp_dir):
        """Test that a section must be a mapping."""
        config_path = temp_dir / "invalid_config.yaml"
        config_path.write_text("solver: 3\n")

        with pytest.raises(ValueError, match="mapping"):
            load_config(str(config_path))

    def test_load_config_invalid_yaml(self, temp_dir):
        """Test that broken YAML is a configuration error."""
        config_path = temp_dir / "invalid_config.yaml"
        config_path.write_text("solver: [unclosed\n")

        with pytest.raises(ValueError):
            load_config(str(config_path))
