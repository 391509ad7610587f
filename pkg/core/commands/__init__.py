import inspect
import logging
import os
import pathlib
from collections.abc import Generator

import settings
from libs.cookie_env import AssumptionReport, delta, validate_assumptions
from libs.exceptions import ConfigError

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_ASSUMPTION = 2
EXIT_STATISTICAL = 3


class AbstractCommand:
    """
    Abstract command class, commands should inherit from this and be named Command
    """
    name: str = None
    description: str = None
    needs_law: bool = True

    def __init__(self):
        self.logger = logging.getLogger("cookiewalk.commands.{0}".format(self.__module__.split(".")[-1]))
        self.summary: list = []
        self.artifacts: list = []

    def run(self, config) -> int:
        """
        Execute the command and write its artifacts
        :param config: ExperimentConfig
        :return: exit code
        """
        raise NotImplementedError()

    def say(self, line: str = "") -> None:
        """
        Add a line to the summary printed when the command finishes
        """
        self.summary.append(line)

    def wrote(self, path: str) -> None:
        self.artifacts.append(path)

    def require_law(self, config):
        if config.law is None:
            raise ConfigError("the {0} command needs a law".format(config.command), field="law")
        return config.law

    def check_assumptions(self, config) -> AssumptionReport:
        """
        Validate the configured law and add the report and delta to the summary
        """
        law = self.require_law(config)
        report = validate_assumptions(law)
        self.say("law:    {0}".format(law.name or "custom"))
        self.say("delta:  {0:g}".format(delta(law)))
        if law.truncation is not None:
            self.say("truncation: {0}".format(law.truncation))
        for check in report.checks:
            self.say("  {0} {1}  {2}".format(check.name, "pass" if check.passed else "FAIL", check.detail))
        return report

    def assumption_exit(self, config, report: AssumptionReport):
        """
        Exit code for a failed report, or None when the command may go on
        """
        if report.passed:
            return None
        if config.skip_invalid:
            self.logger.warning("assumptions fail, continuing because of --skip-invalid")
            return None
        self.say("assumptions fail; rerun with --skip-invalid to simulate anyway")
        return EXIT_ASSUMPTION

    def option(self, config, key: str, default=None):
        return config.options.get(key, default)

    def int_option(self, config, key: str, default=None, minimum: int = None, section: str = None):
        """
        An integer option of the command section, or of the nested object named section
        :raise ConfigError: naming the field when the value is not an integer or below minimum
        """
        options = config.options if section is None else (config.options.get(section) or {})
        value = options.get(key, default)
        name = ".".join(part for part in (config.command, section, key) if part)
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float, str)):
            raise ConfigError("{0} must be an integer, got {1!r}".format(key, value), field=name)
        try:
            number = int(value)
        except (OverflowError, ValueError):
            raise ConfigError("{0} must be an integer, got {1!r}".format(key, value), field=name)
        if number != float(value):
            raise ConfigError("{0} must be an integer, got {1!r}".format(key, value), field=name)
        if minimum is not None and number < minimum:
            raise ConfigError("{0} must be at least {1}, got {2}".format(key, minimum, number), field=name)
        return number

    def horizon(self, config) -> int:
        return config.horizons[-1] if config.horizons else settings.HORIZONS[-1]


def get_commands() -> list:
    """
    Gets the full list of commands available in the commands/ directory
    :return: list
    """
    commands: list = []

    path: str = os.path.dirname(os.path.abspath(inspect.getfile(inspect.currentframe())))
    command_directory: Generator[pathlib.Path, None, None] = pathlib.Path(path).glob("*.py")

    for file in sorted(command_directory):
        if file.name == "__init__.py":
            continue
        module_name = file.name.split(".")[0]
        logging.debug("Found '{0}' in '{1}'".format(module_name, path))
        commands.append(module_name)

    return commands
