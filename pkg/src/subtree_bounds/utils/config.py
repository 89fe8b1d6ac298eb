"""Configuration loading and validation utilities."""

import yaml
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional
from dataclasses import dataclass, field

logger = logging.getLogger(__name__)

DEFAULT_FAMILIES = ["cycle(3)", "grid(2,2)", "grid(2,3)", "grid(3,3)", "random_junction(5,3)"]


@dataclass
class SolverConfig:
    """Numerical settings."""
    max_states: int = 2 ** 22
    tol: float = 1e-8
    gdl_tol: float = 1e-9
    route: str = "auto"


@dataclass
class EnumerationConfig:
    """Sub-tree enumeration settings."""
    mode: str = "spanning"
    strategy: str = "exhaustive"
    min_vertices: int = 1
    max_vertices: int = 12
    max_combinations: int = 1_000_000


@dataclass
class GeneratorConfig:
    """Instance generator settings."""
    cardinality: int = 2
    coupling_low: float = 0.25
    coupling_high: float = 4.0
    allow_zeros: bool = False
    zero_probability: float = 0.2
    max_vars: int = 10


@dataclass
class SuiteSettings:
    """Verification suite settings."""
    families: List[str] = field(default_factory=lambda: list(DEFAULT_FAMILIES))
    seeds: int = 20
    start_seed: int = 0
    workers: int = 4


@dataclass
class LoggingConfig:
    """Logging settings."""
    log_level: str = "INFO"
    log_file: Optional[str] = None


@dataclass
class Config:
    """Main configuration container."""
    solver: SolverConfig = field(default_factory=SolverConfig)
    enumeration: EnumerationConfig = field(default_factory=EnumerationConfig)
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    suite: SuiteSettings = field(default_factory=SuiteSettings)
    logging: LoggingConfig = field(default_factory=LoggingConfig)


def _section(raw_config: Dict[str, Any], name: str) -> Dict[str, Any]:
    data = raw_config.get(name) or {}
    if not isinstance(data, dict):
        raise ValueError(f"Configuration section '{name}' must be a mapping")
    return data


def load_config(config_path: Optional[str] = None) -> Config:
    """
    Load and validate configuration from a YAML file.

    Args:
        config_path: Path to configuration file, or None for built-in defaults

    Returns:
        Validated Config object

    Raises:
        FileNotFoundError: If config file doesn't exist
        ValueError: If config is invalid
    """
    if config_path is None:
        config = Config()
        _validate_config(config)
        return config

    path = Path(config_path)
    if not path.exists():
        raise FileNotFoundError(f"Configuration file not found: {config_path}")

    with open(path, 'r') as f:
        try:
            raw_config = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ValueError(f"Configuration is not valid YAML: {e}")
    if not isinstance(raw_config, dict):
        raise ValueError("Configuration must be a mapping")

    solver_data = _section(raw_config, 'solver')
    solver = SolverConfig(
        max_states=int(solver_data.get('max_states', 2 ** 22)),
        tol=float(solver_data.get('tol', 1e-8)),
        gdl_tol=float(solver_data.get('gdl_tol', 1e-9)),
        route=solver_data.get('route', 'auto')
    )

    enum_data = _section(raw_config, 'enumeration')
    enumeration = EnumerationConfig(
        mode=enum_data.get('mode', 'spanning'),
        strategy=enum_data.get('strategy', 'exhaustive'),
        min_vertices=int(enum_data.get('min_vertices', 1)),
        max_vertices=int(enum_data.get('max_vertices', 12)),
        max_combinations=int(enum_data.get('max_combinations', 1_000_000))
    )

    gen_data = _section(raw_config, 'generator')
    generator = GeneratorConfig(
        cardinality=int(gen_data.get('cardinality', 2)),
        coupling_low=float(gen_data.get('coupling_low', 0.25)),
        coupling_high=float(gen_data.get('coupling_high', 4.0)),
        allow_zeros=bool(gen_data.get('allow_zeros', False)),
        zero_probability=float(gen_data.get('zero_probability', 0.2)),
        max_vars=int(gen_data.get('max_vars', 10))
    )

    suite_data = _section(raw_config, 'suite')
    suite = SuiteSettings(
        families=list(suite_data.get('families', DEFAULT_FAMILIES)),
        seeds=int(suite_data.get('seeds', 20)),
        start_seed=int(suite_data.get('start_seed', 0)),
        workers=int(suite_data.get('workers', 4))
    )

    log_data = _section(raw_config, 'logging')
    logging_config = LoggingConfig(
        log_level=log_data.get('log_level', 'INFO'),
        log_file=log_data.get('log_file')
    )

    config = Config(
        solver=solver,
        enumeration=enumeration,
        generator=generator,
        suite=suite,
        logging=logging_config
    )

    _validate_config(config)
    logger.info(f"Configuration loaded from {config_path}")

    return config


def _validate_config(config: Config) -> None:
    """Validate configuration values."""
    if config.solver.max_states < 1:
        raise ValueError("max_states must be positive")

    if config.solver.tol < 0 or config.solver.gdl_tol < 0:
        raise ValueError("Tolerances must be non-negative")

    if config.solver.route not in ("auto", "dense", "elimination"):
        raise ValueError(f"Unknown excluded-term route '{config.solver.route}'")

    if config.enumeration.mode not in ("spanning", "exhaustive"):
        raise ValueError(f"Unknown enumeration mode '{config.enumeration.mode}'")

    if config.enumeration.strategy not in ("exhaustive", "greedy"):
        raise ValueError(f"Unknown selection strategy '{config.enumeration.strategy}'")

    if config.enumeration.max_vertices < 1 or config.enumeration.max_combinations < 1:
        raise ValueError("Enumeration caps must be positive")

    if config.enumeration.min_vertices < 1:
        raise ValueError("min_vertices must be at least 1")

    if config.generator.cardinality < 2:
        raise ValueError("Generator cardinality must be at least 2")

    if not 0 < config.generator.coupling_low <= config.generator.coupling_high:
        raise ValueError("Coupling range must satisfy 0 < coupling_low <= coupling_high")

    if not 0 <= config.generator.zero_probability < 1:
        raise ValueError("zero_probability must be in [0, 1)")

    if config.suite.seeds < 0 or config.suite.start_seed < 0:
        raise ValueError("Seeds must be non-negative")

    if config.suite.workers < 1:
        raise ValueError("At least one suite worker is required")

    if not config.suite.families:
        logger.warning("No instance families configured for the verification suite")

    if config.logging.log_level.upper() not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
        raise ValueError(f"Unknown log level '{config.logging.log_level}'")
