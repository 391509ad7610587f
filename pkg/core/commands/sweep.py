from functools import partial

from commands import EXIT_ASSUMPTION, EXIT_OK, AbstractCommand
from libs import artifacts, families
from libs.classifier import delta_sweep
from libs.exceptions import ConfigError


class Command(AbstractCommand):
    name = "sweep"
    description = "classify a one-parameter family of laws over a grid"
    needs_law = False

    def run(self, config):
        name = self.option(config, "family")
        grid = self.option(config, "grid")
        try:
            family = families.get_family(name)
        except KeyError as error:
            raise ConfigError(error.args[0], field="sweep.family")
        if not isinstance(grid, list) or not grid:
            raise ConfigError("grid must be a non-empty list of parameter values", field="sweep.grid")
        extra = {k: v for k, v in config.options.items() if k not in ("family", "grid")}

        result = delta_sweep(partial(family, master_seed=config.seed, **extra), grid, config.horizons,
                             config.replicas, config.seed, config.replica_stride, config.threads)

        self.say("family {0}, {1} grid point(s), horizons {2}".format(name, len(grid), list(config.horizons)))
        for row in result.rows:
            if row.estimate is None:
                self.say("  {0:>8g}  delta {1:>6.3f}  {2}: {3}".format(row.parameter, row.delta, row.verdict.value,
                                                                     row.reason))
                continue
            low, high = row.estimate.intervals[-1]
            self.say("  {0:>8g}  delta {1:>6.3f}  beta {2:.4f} [{3:.4f}, {4:.4f}]  {5}{6}".format(
                row.parameter, row.delta, row.estimate.beta[-1], low, high, row.verdict.value,
                "  (boundary)" if row.boundary else ""))
        self.say("beta monotone in delta: {0}".format("yes" if result.monotone_in_delta else "no"))

        self.wrote(artifacts.write_table(config, "sweep", result.header, result.table()))
        if result.skipped and not config.skip_invalid:
            return EXIT_ASSUMPTION
        return EXIT_OK
