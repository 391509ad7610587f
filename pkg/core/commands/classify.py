import humanize

from commands import EXIT_OK, AbstractCommand
from libs import artifacts
from libs.classifier import BOUNDARY_TOLERANCE, decide, estimate_escape_probability, predicted_verdict
from libs.cookie_env import delta


class Command(AbstractCommand):
    name = "classify"
    description = "recurrence / transience verdict from escape probabilities at nested horizons"

    def run(self, config):
        report = self.check_assumptions(config)
        code = self.assumption_exit(config, report)
        if code is not None:
            return code

        law = config.law
        value = delta(law)
        estimate = estimate_escape_probability(law, config.horizons, config.replicas, config.seed,
                                               config.replica_stride, config.threads)
        verdict = decide(estimate)
        boundary = abs(value - 1.0) < BOUNDARY_TOLERANCE

        self.say()
        self.say("{0} replicas".format(humanize.intcomma(config.replicas)))
        for horizon, beta, (low, high), returned in zip(estimate.horizons, estimate.beta, estimate.intervals,
                                                        estimate.return_fractions):
            self.say("  horizon {0:>10}: beta {1:.4f} [{2:.4f}, {3:.4f}]  returned {4:.4f}".format(
                humanize.intcomma(horizon), beta, low, high, returned))
        self.say("ladder fit: beta {0:.4f} (mean failed rungs {1:.3f})".format(estimate.ladder_beta,
                                                                             estimate.ladder_mean))
        self.say("verdict:    {0}{1}".format(verdict.value, "  (boundary, not certifiable)" if boundary else ""))
        self.say("theory:     {0}".format(predicted_verdict(value)))

        rows = [[h, b, low, high, r] for h, b, (low, high), r in zip(estimate.horizons, estimate.beta,
                                                                     estimate.intervals, estimate.return_fractions)]
        self.wrote(artifacts.write_table(config, "escape", ["horizon", "beta_hat", "beta_ci_lo", "beta_ci_hi",
                                                            "return_fraction"], rows))
        self.wrote(artifacts.write_json(config, "classify", {"verdict": verdict.value,
                                                             "delta": value,
                                                             "prediction": predicted_verdict(value),
                                                             "boundary": boundary,
                                                             "assumptions": report.to_json(),
                                                             "escape": estimate.to_json()}))
        return EXIT_OK
