"""
Run configuration: defaults, a TOML file, and command line flags, in increasing priority.
"""
from pathlib import Path
from typing import Any, Mapping, Union

from diskbio.core.assembly import QuadConfig
from diskbio.core.quadrature import SINGULAR_ORDERS, TRIANGLE_ORDERS
from diskbio.errors import ConfigError
from diskbio.tools import Record


# Python 3.11+ ships a TOML parser; older versions use the `tomli` backport it came from.
try:
    import tomllib  # type: ignore[import-not-found]
except ImportError:  # pragma: no cover
    import tomli as tomllib  # type: ignore[no-redef]


SUITES = ("kernels", "wolfe", "krenk", "vbar", "wbar", "wbar1", "calderon")
OPERATORS = ("V", "W", "Vbar", "Wbar", "mass")
SPACES = ("P0", "P1", "P1_0")
PAIRS = ("V-Wbar", "W-Vbar")

# Levels above this make the dense matrices too large for a desktop
MAX_LEVEL = 6


class RunConfig(Record):
    """
    All parameters of a command line run.
    """

    defaults = dict(
        a=1.0,
        level=3,
        levels=(2, 3, 4, 5),
        regular_order=4,
        singular_order=5,
        n_r=None,
        n_theta=None,
        lmax=10,
        series_terms=200,
        tol=None,
        out=None,
        operator="V",
        space=None,
        suite="wolfe",
        pair="V-Wbar",
        lanczos_steps=150,
        cg_tol=1e-8,
        threads=None,
    )

    def check(self) -> None:
        _check_number(self, "a", lambda v: v > 0, "positive")
        _check_int(self, "level", lambda v: 0 <= v <= MAX_LEVEL, f"in [0, {MAX_LEVEL}]")
        levels = self.levels
        if not isinstance(levels, (list, tuple)) or not levels:
            raise ConfigError(f"levels must be a non-empty list of integers, got {levels!r}")
        for level in levels:
            if not isinstance(level, int) or not 0 <= level <= MAX_LEVEL:
                raise ConfigError(
                    f"levels entries must be integers in [0, {MAX_LEVEL}], got {level!r}"
                )
        if list(levels) != sorted(set(levels)):
            raise ConfigError(f"levels must be strictly increasing, got {list(levels)}")
        _check_int(self, "regular_order", lambda v: v in TRIANGLE_ORDERS, "in [1, 10]")
        _check_int(self, "singular_order", lambda v: v in SINGULAR_ORDERS, "in [2, 8]")
        for name in ("n_r", "n_theta", "threads"):
            if self[name] is not None:
                _check_int(self, name, lambda v: v >= (0 if name == "threads" else 1), "positive")
        _check_int(self, "lmax", lambda v: 0 <= v <= 10**4, "in [0, 10^4]")
        _check_int(self, "series_terms", lambda v: 0 <= v <= 10**4, "in [0, 10^4]")
        _check_int(self, "lanczos_steps", lambda v: v >= 1, "positive")
        _check_number(self, "cg_tol", lambda v: v > 0, "positive")
        if self.tol is not None:
            _check_number(self, "tol", lambda v: v > 0, "positive")
        _check_choice(self, "operator", OPERATORS)
        if self.space is not None:
            _check_choice(self, "space", SPACES)
        _check_choice(self, "suite", SUITES)
        _check_choice(self, "pair", PAIRS)
        if self.out is not None:
            parent = Path(self.out).expanduser().resolve().parent
            if not parent.is_dir():
                raise ConfigError(f"Output directory {parent} does not exist")

    def quad_config(self) -> QuadConfig:
        return QuadConfig(
            regular_order=self.regular_order,
            singular_order=self.singular_order,
            weighted_n_r=self.n_r,
            weighted_n_theta=self.n_theta,
            threads=self.threads,
        )


def _check_number(config: RunConfig, name: str, predicate, requirement: str) -> None:
    value = config[name]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not predicate(value):
        raise ConfigError(f"{name} must be {requirement}, got {value!r}")


def _check_int(config: RunConfig, name: str, predicate, requirement: str) -> None:
    value = config[name]
    if isinstance(value, bool) or not isinstance(value, int) or not predicate(value):
        raise ConfigError(f"{name} must be an integer {requirement}, got {value!r}")


def _check_choice(config: RunConfig, name: str, choices) -> None:
    if config[name] not in choices:
        raise ConfigError(f"{name} must be one of {', '.join(choices)}, got {config[name]!r}")


def _normalize(values: Mapping[str, Any]) -> dict:
    normalized = dict(values)
    if isinstance(normalized.get("levels"), list):
        normalized["levels"] = tuple(normalized["levels"])
    return normalized


def load_config(path: Union[str, Path, None] = None, **overrides: Any) -> RunConfig:
    """
    Read a TOML file of ``key = value`` pairs (all optional) and apply ``overrides`` on top.
    Syntax errors are reported as :py:class:`~diskbio.errors.ConfigError` with the line number.
    """
    values: dict = {}
    if path is not None:
        try:
            with open(path, "rb") as f:
                values = tomllib.load(f)
        except OSError as exc:
            raise ConfigError(f"Cannot read config file {path}: {exc}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"Malformed config file {path}: {exc}") from exc
    values.update(overrides)
    return RunConfig(_normalize(values))
