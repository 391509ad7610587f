import datetime
import importlib
import logging
import os
import sys
import time

import humanize

import settings
from commands import EXIT_ERROR, get_commands
from libs.exceptions import CookieWalkError
from libs.system import get_system
from settings import DEBUG, LOGFILE, LOG_LEVEL

LOG_FORMAT = "%(asctime)s %(levelname)-8s [%(filename)s:%(lineno)d] %(message)s"


class App:
    logger = logging.getLogger("cookiewalk.app")

    def __init__(self, out=None):
        if DEBUG:
            logging.basicConfig(level=logging.DEBUG, filename=LOGFILE, format=LOG_FORMAT)
            self.logger.info("Debug messages enabled")
        else:
            logging.basicConfig(level=LOG_LEVEL, filename=LOGFILE, format=LOG_FORMAT)
        self.out = out or sys.stdout
        self.logger.debug("Host: {0}".format(get_system().describe()))

    def load_command(self, command_name):
        """
        Import commands.<name> and instantiate its Command class
        :return: command instance, or None if it could not be loaded
        """
        try:
            command_module = importlib.import_module("commands." + command_name)
        except ImportError as error:
            self.logger.error("Failed to load command module '{0}': {1}".format(command_name, error))
            self.logger.debug("Available commands: {0}".format(", ".join(get_commands())))
            return None
        try:
            return command_module.Command()
        except AttributeError:
            self.logger.error("Command '{0}' has no Command class".format(command_name))
            return None

    def print_summary(self, config, command, elapsed: float) -> None:
        print("cookiewalk {0}: {1} ({2})".format(settings.VERSION, config.command, config.name), file=self.out)
        print("seed {0}, config {1}".format(config.seed, config.config_hash[:12]), file=self.out)
        for line in command.summary:
            print(line, file=self.out)
        for path in command.artifacts:
            print("wrote {0}".format(path), file=self.out)
        print("done in {0}".format(humanize.precisedelta(datetime.timedelta(seconds=elapsed),
                                                         minimum_unit="milliseconds")), file=self.out)

    def run(self, config) -> int:
        """
        Run the configured command
        :param config: ExperimentConfig
        :return: process exit code
        """
        command = self.load_command(config.command)
        if command is None:
            return EXIT_ERROR
        if command.needs_law and config.law is None:
            self.logger.error("Command '{0}' needs a 'law' section in the config".format(config.command))
            print("error: the {0} command needs a law".format(config.command), file=self.out)
            return EXIT_ERROR
        self.logger.info("Running '{0}' with {1} thread(s)".format(config.command, config.threads))
        started = time.perf_counter()
        try:
            code = command.run(config)
        except (CookieWalkError, ValueError) as error:
            self.logger.error("{0} failed: {1}".format(config.command, error))
            if not isinstance(error, CookieWalkError):
                self.logger.debug("unexpected error", exc_info=True)
            for line in command.summary:
                print(line, file=self.out)
            print("error: {0}".format(error), file=self.out)
            return EXIT_ERROR
        self.print_summary(config, command, time.perf_counter() - started)
        return code


if __name__ == '__main__':
    sys.path.append(os.path.dirname(os.path.abspath(__file__)))
    from cli import main

    sys.exit(main())
