"""
Experiment configuration: a JSON file plus command-line overrides.

    {
      "command": "classify",
      "law": {M, background, generator: {type, ...}, background_bound, truncation},
      "horizons": [10000, 100000],
      "replicas": 10000,
      "seeds": {"master": 20240611, "replica_stride": 1},
      "threads": 4,
      "output": {"dir": "results", "format": "csv"},
      "skip_invalid": false,
      "<command>": {command specific options}
    }
"""
import hashlib
import json
import logging
import os
from dataclasses import dataclass, field

import settings
from libs import families
from libs.cookie_env import EnvironmentLaw, law_from_json
from libs.exceptions import ConfigError

COMMANDS = ("simulate", "classify", "sweep", "oracle", "cep", "validate")
FORMATS = ("csv", "json")

logger = logging.getLogger('cookiewalk.libs.config')


@dataclass
class ExperimentConfig:
    command: str
    seed: int
    law: EnvironmentLaw = None
    horizons: tuple = ()
    replicas: int = 1
    replica_stride: int = 1
    threads: int = 1
    output_dir: str = "results"
    output_format: str = "csv"
    skip_invalid: bool = False
    options: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict, repr=False)
    source: str = None

    def to_json(self) -> dict:
        """
        Canonical form of everything that affects results. Output location and thread
        count are left out: they never change an artifact.
        """
        return {"command": self.command,
                "law": self.law.to_json() if self.law else None,
                "law_name": self.law.name if self.law else None,
                "horizons": list(self.horizons),
                "replicas": self.replicas,
                "seeds": {"master": self.seed, "replica_stride": self.replica_stride},
                "skip_invalid": self.skip_invalid,
                "options": self.options}

    @property
    def config_hash(self) -> str:
        canonical = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    @property
    def name(self) -> str:
        if self.source:
            return os.path.splitext(os.path.basename(self.source))[0]
        return self.command


def read_config(path: str) -> dict:
    """
    Load a JSON config file
    :raise ConfigError: with line and column for syntax errors
    """
    try:
        with open(path, "r") as config_file:
            text = config_file.read()
    except OSError as error:
        raise ConfigError("cannot read config '{0}': {1}".format(path, error.strerror))
    try:
        data = json.loads(text)
    except json.JSONDecodeError as error:
        raise ConfigError("invalid JSON in '{0}': {1}".format(path, error.msg), line=error.lineno,
                          column=error.colno)
    if not isinstance(data, dict):
        raise ConfigError("config '{0}' must hold a JSON object".format(path))
    return data


def parse_law(data: dict, seed: int) -> EnvironmentLaw:
    """
    The structured law format, plus two shorthands:
    {"family": name, "parameter": value} and generator type "trap" with a depth
    """
    if not isinstance(data, dict):
        raise ConfigError("law must be an object", field="law")
    if "family" in data:
        try:
            family = families.get_family(data["family"])
        except KeyError as error:
            raise ConfigError(error.args[0], field="law.family")
        if "parameter" not in data:
            raise ConfigError("family law needs a parameter", field="law.parameter")
        extra = {k: v for k, v in data.items() if k not in ("family", "parameter")}
        try:
            return family(data["parameter"], master_seed=seed, **extra)
        except (AttributeError, TypeError, ValueError) as error:
            raise ConfigError(str(error), field="law")
    generator = data.get("generator")
    if isinstance(generator, dict) and generator.get("type") == "trap":
        try:
            depth = int(generator["depth"])
        except (KeyError, TypeError, ValueError):
            raise ConfigError("trap generator needs an integer depth", field="law.generator.depth")
        if depth < 2:
            raise ConfigError("trap depth must be at least 2", field="law.generator.depth")
        return families.trap_law(depth, master_seed=seed)
    return law_from_json(data, master_seed=seed)


def _positive_int(value, name: str) -> int:
    try:
        number = int(value)
    except (TypeError, ValueError):
        raise ConfigError("{0} must be an integer".format(name), field=name)
    if number != value and not isinstance(value, str):
        raise ConfigError("{0} must be an integer".format(name), field=name)
    if number < 1:
        raise ConfigError("{0} must be at least 1".format(name), field=name)
    return number


def build_config(data: dict, overrides: dict = None, source: str = None) -> ExperimentConfig:
    """
    Validate a raw config and apply flag overrides (None values are ignored)
    :raise ConfigError: naming the offending field
    """
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    data = dict(data)

    command = overrides.get("command", data.get("command"))
    if command not in COMMANDS:
        raise ConfigError("command must be one of {0}, got {1!r}".format(", ".join(COMMANDS), command),
                          field="command")

    seeds = data.get("seeds", {})
    if not isinstance(seeds, dict):
        raise ConfigError("seeds must be an object", field="seeds")
    seed = overrides.get("seed", seeds.get("master"))
    if seed is None:
        raise ConfigError("a master seed is required", field="seeds.master")
    try:
        seed = int(seed)
    except (TypeError, ValueError):
        raise ConfigError("seed must be an integer", field="seeds.master")
    if seed < 0:
        raise ConfigError("seed must be non-negative", field="seeds.master")
    stride = _positive_int(seeds.get("replica_stride", settings.REPLICA_STRIDE), "seeds.replica_stride")

    horizons = overrides.get("horizons", data.get("horizons", settings.HORIZONS))
    if not isinstance(horizons, (list, tuple)) or not horizons:
        raise ConfigError("horizons must be a non-empty list", field="horizons")
    horizons = tuple(_positive_int(h, "horizons") for h in horizons)
    if any(b <= a for a, b in zip(horizons, horizons[1:])):
        raise ConfigError("horizons must be strictly increasing", field="horizons")

    replicas = _positive_int(overrides.get("replicas", data.get("replicas", settings.REPLICAS)), "replicas")
    threads = _positive_int(overrides.get("threads", data.get("threads", settings.THREADS)), "threads")

    output = data.get("output", {})
    if not isinstance(output, dict):
        raise ConfigError("output must be an object", field="output")
    output_dir = overrides.get("out", output.get("dir", settings.OUTPUT_DIR))
    output_format = overrides.get("format", output.get("format", "csv"))
    if output_format not in FORMATS:
        raise ConfigError("format must be one of {0}".format(", ".join(FORMATS)), field="output.format")

    skip_invalid = bool(overrides.get("skip_invalid", data.get("skip_invalid", False)))

    law = None
    if "law" in data:
        law = parse_law(data["law"], seed)

    options = data.get(command, {})
    if not isinstance(options, dict):
        raise ConfigError("{0} options must be an object".format(command), field=command)

    config = ExperimentConfig(command=command, seed=seed, law=law, horizons=horizons, replicas=replicas,
                              replica_stride=stride, threads=threads, output_dir=output_dir,
                              output_format=output_format, skip_invalid=skip_invalid, options=options,
                              raw=data, source=source)
    logger.debug("config {0} hash {1}".format(config.name, config.config_hash[:12]))
    return config


def load_config(path: str, overrides: dict = None) -> ExperimentConfig:
    return build_config(read_config(path), overrides, source=path)
