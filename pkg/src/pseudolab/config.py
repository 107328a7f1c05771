"""
config.py

The config module defines ExperimentConfig, the resolved settings of one
pseudolab run.  Settings come from three layers: built-in defaults, an
optional INI file with flat key/value sections, and command-line flags.
Later layers override earlier ones and the merged result is validated
once.

A config file looks like

    [operator]
    beta = 1
    n = 1
    N = 400

    [window]
    re_min = 0
    re_max = 20

    [wkb]
    lambda0 = 2+i
    h_ladder = 0.05, 0.04, 0.03, 0.025, 0.02
"""

import configparser
import hashlib
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, NamedTuple, Optional, Tuple

from .errors import ConfigError
from .operator_core import PotentialSpec

logger = logging.getLogger(__name__)

# -----------------------------------------------------------------------

# Default Sizes and Values

COMMANDS = ("pseudospectrum", "wkb-certify", "exponent", "diagnostics", "matrix-dump")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def default_epsilons() -> List[float]:
    """Return the contour ladder 10^-7, 10^-6.75, ..., 10^1."""
    return [10.0 ** (-7.0 + 0.25 * k) for k in range(33)]


def default_h_ladder() -> List[float]:
    return [0.05, 0.04, 0.03, 0.025, 0.02]


def default_n_ladder() -> List[int]:
    return [100, 200, 400]


# -----------------------------------------------------------------------

# Value parsers shared by the INI reader and the flags.  Each takes the
# raw string and raises ValueError on bad input.


def parse_bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError("not a boolean: %r" % text)


def parse_complex(text: str) -> complex:
    """Parse '2+1j', '2+i', '2+1i', '3', '-i' and the like."""
    value = text.strip().replace(" ", "").replace("i", "j")
    if not value:
        raise ValueError("empty complex number")
    return complex(value)


def parse_float_list(text: str) -> List[float]:
    return [float(part) for part in text.split(",") if part.strip()]


def parse_int_list(text: str) -> List[int]:
    return [int(part) for part in text.split(",") if part.strip()]


def parse_optional_int(text: str) -> Optional[int]:
    value = text.strip().lower()
    if value in ("", "none", "auto"):
        return None
    return int(value)


class Option(NamedTuple):
    dest: str
    section: str
    parse: Callable[[str], object]
    help: str

    @property
    def flag(self) -> str:
        return "--" + self.dest.replace("_", "-")


# One table drives both the INI sections and the command-line flags.
OPTIONS: Tuple[Option, ...] = (
    Option("beta", "operator", float, "coupling of the odd power term"),
    Option("n", "operator", int, "odd power exponent is 2n+1"),
    Option("N", "operator", int, "Hermite basis size"),
    Option("re_min", "window", float, "lower real bound of the sweep window"),
    Option("re_max", "window", float, "upper real bound of the sweep window"),
    Option("im_min", "window", float, "lower imaginary bound of the sweep window"),
    Option("im_max", "window", float, "upper imaginary bound of the sweep window"),
    Option("nx", "window", int, "grid points along the real axis"),
    Option("ny", "window", int, "grid points along the imaginary axis"),
    Option("epsilons", "pseudospectrum", parse_float_list, "comma separated contour levels"),
    Option("trust_stride", "pseudospectrum", int, "sub-grid stride of the larger-N re-sweep"),
    Option("render", "pseudospectrum", parse_bool, "also write pseudospectrum.png"),
    Option("h_ladder", "wkb", parse_float_list, "comma separated semiclassical parameters"),
    Option("lambda0", "wkb", parse_complex, "semiclassical spectral parameter, e.g. 2+i"),
    Option("delta", "wkb", float, "angular margin of the bound region"),
    Option("transport_order", "wkb", int, "number of transport equations solved"),
    Option("plateau_fraction", "wkb", float, "cutoff plateau as a fraction of the window"),
    Option("link_n", "wkb", int, "basis size used to cross-link certificates with the matrix"),
    Option("region_a", "wkb", float, "modulus floor A of the bound region"),
    Option("theta", "exponent", float, "argument of the ray lambda = r exp(i theta)"),
    Option("modulus_min", "exponent", float, "smallest |lambda| on the ray"),
    Option("modulus_max", "exponent", float, "largest |lambda| on the ray"),
    Option("modulus_count", "exponent", int, "number of geometrically spaced moduli"),
    Option("n_cap", "exponent", int, "largest basis size the escalation may reach"),
    Option("k_max", "diagnostics", int, "number of eigenvalues reported"),
    Option("t_max", "diagnostics", float, "semigroup time horizon"),
    Option("t_steps", "diagnostics", int, "semigroup time samples"),
    Option("n_ladder", "diagnostics", parse_int_list, "comma separated basis sizes for the semigroup"),
    Option("output", "output", str, "output directory"),
    Option("threads", "output", parse_optional_int, "worker thread count, default all CPUs"),
    Option("log_level", "output", str, "logging level"),
)

_OPTIONS_BY_DEST = {option.dest: option for option in OPTIONS}
_SECTIONS = sorted({option.section for option in OPTIONS})

# -----------------------------------------------------------------------


@dataclass
class ExperimentConfig:
    """
    Every setting of a run.  Field names double as INI keys and, with
    underscores turned into dashes, as command-line flags.
    """

    command: str = "pseudospectrum"
    # [operator]
    beta: float = 1.0
    n: int = 1
    N: int = 400
    # [window]
    re_min: float = 0.0
    re_max: float = 20.0
    im_min: float = -6.0
    im_max: float = 10.0
    nx: int = 200
    ny: int = 160
    # [pseudospectrum]
    epsilons: List[float] = field(default_factory=default_epsilons)
    trust_stride: int = 4
    render: bool = False
    # [wkb]
    h_ladder: List[float] = field(default_factory=default_h_ladder)
    lambda0: complex = 2.0 + 1.0j
    delta: float = 0.1
    transport_order: int = 12
    plateau_fraction: float = 0.5
    link_n: int = 400
    region_a: float = 10.0
    # [exponent]
    theta: float = 0.2
    modulus_min: float = 10.0
    modulus_max: float = 60.0
    modulus_count: int = 8
    n_cap: int = 1500
    # [diagnostics]
    k_max: int = 20
    t_max: float = 5.0
    t_steps: int = 51
    n_ladder: List[int] = field(default_factory=default_n_ladder)
    # [output]
    output: str = "out"
    threads: Optional[int] = None
    log_level: str = "INFO"

    # -------------------------------------------------------------------

    @classmethod
    def from_sources(
        cls,
        command: str = "pseudospectrum",
        config_path: Optional[str] = None,
        overrides: Optional[Dict[str, str]] = None,
    ) -> "ExperimentConfig":
        """Merge defaults, the INI file and flag overrides, then validate.

        @param command: subcommand name
        @param config_path: optional INI file
        @param overrides: raw flag strings keyed by field name; None values are ignored
        @return: the validated config
        @raises ConfigError: for unreadable files, unknown keys, unparsable or invalid values
        """
        values: Dict[str, object] = {}
        if config_path is not None:
            values.update(read_config_file(config_path))
        for dest, raw in (overrides or {}).items():
            if raw is None:
                continue
            values[dest] = _parse_value(dest, raw, "command line")
        config = cls(command=command, **values)
        config.validate()
        return config

    def validate(self) -> None:
        """Raise ConfigError naming the first invalid field."""

        def require(condition: bool, name: str, message: str):
            if not condition:
                raise ConfigError("%s: %s" % (name, message), field=name, value=getattr(self, name))

        require(self.command in COMMANDS, "command", "unknown subcommand")
        require(math.isfinite(self.beta), "beta", "must be finite")
        require(self.n >= 1, "n", "must be at least 1")
        require(self.N >= self.minimum_dim(), "N", "must be at least %d" % self.minimum_dim())
        require(self.re_min < self.re_max, "re_max", "must exceed re_min")
        require(self.im_min < self.im_max, "im_max", "must exceed im_min")
        require(self.nx >= 2, "nx", "must be at least 2")
        require(self.ny >= 2, "ny", "must be at least 2")
        require(len(self.epsilons) > 0, "epsilons", "must not be empty")
        require(all(e > 0 and math.isfinite(e) for e in self.epsilons), "epsilons", "must be positive")
        require(self.trust_stride >= 1, "trust_stride", "must be positive")
        require(len(self.h_ladder) > 0, "h_ladder", "must not be empty")
        require(all(0 < h < 1 for h in self.h_ladder), "h_ladder", "values must lie in (0, 1)")
        require(0 < self.delta < math.pi / 2, "delta", "must lie in (0, pi/2)")
        require(self.transport_order >= 1, "transport_order", "must be at least 1")
        require(0 < self.plateau_fraction < 1, "plateau_fraction", "must lie in (0, 1)")
        require(self.link_n >= self.minimum_dim(), "link_n", "must be at least %d" % self.minimum_dim())
        require(self.region_a > 0, "region_a", "must be positive")
        require(math.isfinite(self.theta), "theta", "must be finite")
        require(self.modulus_min > 0, "modulus_min", "must be positive")
        require(self.modulus_min < self.modulus_max, "modulus_max", "must exceed modulus_min")
        require(self.modulus_count >= 2, "modulus_count", "must be at least 2")
        require(self.n_cap >= self.minimum_dim(), "n_cap", "must be at least %d" % self.minimum_dim())
        require(self.k_max >= 1, "k_max", "must be positive")
        require(self.t_max > 0, "t_max", "must be positive")
        require(self.t_steps >= 2, "t_steps", "must be at least 2")
        require(len(self.n_ladder) > 0, "n_ladder", "must not be empty")
        require(all(N >= self.minimum_dim() for N in self.n_ladder), "n_ladder",
                "sizes must be at least %d" % self.minimum_dim())
        require(len(self.output) > 0, "output", "must not be empty")
        require(self.threads is None or self.threads >= 1, "threads", "must be positive")
        require(self.log_level.upper() in LOG_LEVELS, "log_level", "unknown level")

    # -------------------------------------------------------------------

    def minimum_dim(self) -> int:
        return 2 * self.n + 2 if self.beta != 0 else 1

    def potential(self) -> PotentialSpec:
        return PotentialSpec(beta=self.beta, n=self.n)

    @property
    def re_range(self) -> Tuple[float, float]:
        return (self.re_min, self.re_max)

    @property
    def im_range(self) -> Tuple[float, float]:
        return (self.im_min, self.im_max)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["lambda0"] = {"re": self.lambda0.real, "im": self.lambda0.imag}
        return data

    def content_hash(self) -> str:
        """sha256 of the resolved settings, stable across runs."""
        payload = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


# -----------------------------------------------------------------------


def _parse_value(dest: str, raw, origin: str):
    option = _OPTIONS_BY_DEST.get(dest)
    if option is None:
        raise ConfigError("unknown setting %r (%s)" % (dest, origin), key=dest)
    if not isinstance(raw, str):
        return raw
    try:
        return option.parse(raw)
    except ValueError as exc:
        raise ConfigError("bad value for %s: %r (%s)" % (dest, raw, exc), key=dest) from exc


def read_config_file(path: str) -> Dict[str, object]:
    """Read an INI file into parsed values keyed by field name.

    @raises ConfigError: when the file is missing or malformed, or names an
        unknown section, a key outside its section, or an unparsable value
    """
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        with open(path, "r", encoding="utf-8") as stream:
            parser.read_file(stream)
    except OSError as exc:
        raise ConfigError("cannot read config file %s: %s" % (path, exc), path=str(path)) from exc
    except configparser.Error as exc:
        raise ConfigError("malformed config file %s: %s" % (path, exc), path=str(path)) from exc

    if parser.defaults():
        raise ConfigError("keys outside any section in %s" % path, path=str(path))
    values: Dict[str, object] = {}
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError("unknown section [%s] in %s" % (section, path), section=section)
        for key, raw in parser.items(section):
            option = _OPTIONS_BY_DEST.get(key)
            if option is None or option.section != section:
                raise ConfigError("unknown key %r in section [%s]" % (key, section), key=key, section=section)
            values[key] = _parse_value(key, raw, path)
    logger.debug("read %d settings from %s", len(values), path)
    return values