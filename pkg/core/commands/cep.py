import math

from commands import EXIT_OK, AbstractCommand
from libs import artifacts
from libs.cep import collect_statistics
from libs.cookie_env import delta
from libs.exceptions import ConfigError


class Command(AbstractCommand):
    name = "cep"
    description = "frontier statistics of the cookie environment process"

    def lags(self, config, levels: int) -> tuple:
        """
        :raise ConfigError: unless every lag is an integer in [1, levels/2]
        """
        lags = self.option(config, "lags", [20])
        if not isinstance(lags, list) or not all(isinstance(k, int) and not isinstance(k, bool) for k in lags):
            raise ConfigError("lags must be a list of integers", field="cep.lags")
        bad = [k for k in lags if not 1 <= k <= levels // 2]
        if bad:
            raise ConfigError("lag {0} is outside [1, {1}]".format(bad[0], levels // 2), field="cep.lags")
        return tuple(lags)

    def run(self, config):
        report = self.check_assumptions(config)
        code = self.assumption_exit(config, report)
        if code is not None:
            return code

        law = config.law
        levels = self.int_option(config, "levels", 10000, minimum=2)
        lags = self.lags(config, levels)
        keep_rows = bool(self.option(config, "rows", False))
        max_steps = self.int_option(config, "max_steps", minimum=1)
        stats, rows = collect_statistics(law, levels, config.replicas, lags=lags,
                                         max_steps=max_steps, seed=config.seed,
                                         stride=config.replica_stride, threads=config.threads, keep_rows=keep_rows)

        self.say()
        self.say("levels 1..{0}, {1} replica(s), {2} censored".format(levels, config.replicas, stats.censored))
        rate = stats.right_drift_rate
        self.say("D+ at tau_n / n: {0:.4f} +- {1:.4f} (ceiling {2:.4f})".format(
            rate.mean, rate.std_error, 1 + 5 / math.sqrt(levels)))
        for k in lags:
            summary = stats.consumed_drift_at_origin[k]
            self.say("drift consumed at a site, lag {0}: {1:.4f} +- {2:.4f}".format(k, summary.mean, summary.std_error))
        total = sum(stats.overshoot_histogram.values()) or 1
        self.say("overshoot: " + ", ".join("{0}: {1:.3f}".format(k, v / total)
                                           for k, v in sorted(stats.overshoot_histogram.items())))
        violations = stats.profile_violations(delta(law))
        if violations:
            self.say("remaining drift profile off at offsets {0}".format([v[0] for v in violations]))
        if stats.excessive_censoring:
            self.say("WARNING: more than {0:.0%} of replicas censored".format(stats.censored_fraction))

        payload = stats.to_json()
        payload["profile_violations"] = [list(v) for v in violations]
        self.wrote(artifacts.write_json(config, "cep", payload))
        if keep_rows:
            self.wrote(artifacts.write_table(config, "frontier", ["replica", "frontier_n", "overshoot", "D_plus",
                                                                  "D_origin_lagged"], rows))
        return EXIT_OK
