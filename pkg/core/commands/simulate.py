import humanize

import settings
from commands import EXIT_OK, EXIT_STATISTICAL, AbstractCommand
from libs import artifacts
from libs.exceptions import ConfigError
from libs.families import trap_run_probability
from libs.statistics import binomial_std_error, z_score
from libs.walk_engine import (exit_time_tail, martingale_check, new_walk, optional_stopping_check,
                              straight_run_probability, trajectory_rows)


class Command(AbstractCommand):
    name = "simulate"
    description = "run walks and check the martingale and optional stopping identities"

    def run(self, config):
        report = self.check_assumptions(config)
        code = self.assumption_exit(config, report)
        if code is not None:
            return code

        law = config.law
        common = dict(seed=config.seed, stride=config.replica_stride, threads=config.threads)
        steps = self.int_option(config, "steps", minimum=1)
        start = self.int_option(config, "start", 0)
        up, down = self.int_option(config, "up"), self.int_option(config, "down")
        if (up is None) != (down is None):
            raise ConfigError("up and down go together",
                              field="simulate.{0}".format("down" if down is None else "up"))
        if up is not None and not down < start < up:
            raise ConfigError("need down < start < up, got {0} < {1} < {2}".format(down, start, up),
                              field="simulate.start")
        max_steps = self.int_option(config, "max_steps", self.horizon(config), minimum=1)
        run = self.option(config, "straight_run")
        if run is not None and not isinstance(run, dict):
            raise ConfigError("straight_run must be an object", field="simulate.straight_run")
        if run:
            run_steps = self.int_option(config, "steps", 1000, minimum=1, section="straight_run")
            direction = self.int_option(config, "direction", -1, section="straight_run")
            if direction not in (-1, 1):
                raise ConfigError("direction must be -1 or 1", field="simulate.straight_run.direction")
        trajectory = self.int_option(config, "trajectory", minimum=1)
        self.say()
        self.say("{0} replicas".format(humanize.intcomma(config.replicas)))
        payload = {}
        failed = False

        if steps:
            check = martingale_check(law, steps, config.replicas, start=start, **common)
            self.say("martingale at n={0}: mean {1:+.5f} +- {2:.5f}  z {3:+.2f}  (E[X_n] {4:.3f}, E[D_n] {5:.3f})".format(
                steps, check.mean, check.std_error, check.z, check.mean_position, check.mean_drift))
            payload["martingale"] = check.to_json()
            failed |= not check.passed()

        if up is not None:
            check = optional_stopping_check(law, start, up, down, config.replicas, max_steps, **common)
            self.say("optional stopping on ({0}, {1}): E[X_T] {2:.5f}, start + E[D_T] {3:.5f}, z {4:+.2f}".format(
                down, up, check.mean_exit, start + check.mean_drift, check.z))
            if check.undecided:
                self.say("  {0} replica(s) undecided after {1} steps".format(check.undecided,
                                                                              humanize.intcomma(max_steps)))
            payload["optional_stopping"] = check.to_json()
            failed |= not check.passed()
            if self.option(config, "tail", False):
                tail = exit_time_tail(law, start, up, down, config.replicas, max_steps, **common)
                payload["exit_time_tail"] = {"slope": tail.slope, "intercept": tail.intercept,
                                             "undecided": tail.undecided, "inconclusive": tail.inconclusive}
                if tail.inconclusive:
                    self.say("exit-time tail: inconclusive, too few replicas survive to fit a slope")
                else:
                    self.say("exit-time tail: log-survival slope {0:.4g}".format(tail.slope))
                    failed |= not tail.slope < 0

        if run:
            estimate = straight_run_probability(law, run_steps, config.replicas, direction=direction, **common)
            self.say("straight run of {0} steps: {1:.6f} +- {2:.6f}".format(run_steps, estimate.estimate,
                                                                           estimate.std_error))
            payload["straight_run"] = estimate.to_json()
            depth = config.raw.get("law", {}).get("generator", {}).get("depth")
            if depth is not None and direction == -1:
                exact = trap_run_probability(run_steps, int(depth))
                z = z_score(estimate.estimate, exact, binomial_std_error(exact, config.replicas))
                self.say("  exact {0:.6f}, z {1:+.2f}".format(exact, z))
                payload["straight_run"].update(exact=exact, z=z)
                failed |= abs(z) > settings.Z_LIMIT

        if trajectory:
            state, env = new_walk(law, 0, start, config.seed, config.replica_stride)
            self.wrote(artifacts.write_table(config, "trajectory", ["step", "position", "visit_index",
                                                                    "consumed_drift"],
                                             trajectory_rows(state, env, trajectory)))

        self.wrote(artifacts.write_json(config, "simulate", payload))
        return EXIT_STATISTICAL if failed else EXIT_OK
