import os

import humanize

from commands import EXIT_OK, EXIT_STATISTICAL, AbstractCommand
from libs import artifacts
from libs.config import read_config
from libs.exact_oracle import cross_validate, instance_from_json, regression_suite, solve_exit, validate_suite
from libs.exceptions import ConfigError


class Command(AbstractCommand):
    name = "oracle"
    description = "exact exit analysis of finite-interval instances, optionally checked by simulation"
    needs_law = False

    def instances(self, config) -> list:
        if "instance" in config.options:
            return [instance_from_json(config.options["instance"])]
        if "instance_file" in config.options:
            path = config.options["instance_file"]
            if config.source and not os.path.isabs(path):
                path = os.path.join(os.path.dirname(config.source), path)
            return [instance_from_json(read_config(path))]
        if "suite" in config.options:
            if not isinstance(config.options["suite"], dict):
                raise ConfigError("suite must be an object", field="oracle.suite")
            return regression_suite(count=self.int_option(config, "count", 20, minimum=1, section="suite"),
                                    seed=self.int_option(config, "seed", config.seed, minimum=0, section="suite"),
                                    max_width=self.int_option(config, "max_width", 5, minimum=1, section="suite"),
                                    max_M=self.int_option(config, "max_M", 2, minimum=1, section="suite"),
                                    jump_range=self.int_option(config, "jump_range", 2, minimum=1, section="suite"))
        raise ConfigError("oracle needs 'instance', 'instance_file' or 'suite'", field="oracle")

    def run(self, config):
        instances = self.instances(config)
        check = bool(self.option(config, "cross_validate", False))

        if check and len(instances) > 1:
            pairs = validate_suite(instances, config.replicas, config.seed, config.replica_stride, config.threads)
        else:
            pairs = []
            for instance in instances:
                analysis = solve_exit(instance)
                report = None
                if check:
                    report = cross_validate(instance, config.replicas, config.seed, config.replica_stride,
                                            config.threads, analysis=analysis)
                pairs.append((analysis, report))

        failed = False
        results = []
        for instance, (analysis, report) in zip(instances, pairs):
            self.say("{0}: ({1}, {2}) from {3}, {4} states".format(instance.name or "instance", instance.down,
                                                                  instance.up, instance.start,
                                                                  humanize.intcomma(analysis.states)))
            self.say("  p_up {0:.10f}  E[D_T] {1:.10f}  E[T] {2:.10f}".format(analysis.p_up, analysis.expected_drift,
                                                                              analysis.expected_time))
            self.say("  optional stopping residual {0:.2e} {1}".format(analysis.identity_residual,
                                                                      "ok" if analysis.identity_holds else "FAIL"))
            failed |= not analysis.identity_holds
            entry = {"instance": instance.to_json(), "analysis": analysis.to_json()}
            if report is not None:
                key, z = report.worst
                self.say("  simulation: largest |z| {0:.2f} ({1}) {2}".format(abs(z), key,
                                                                               "ok" if report.passed else "FAIL"))
                failed |= not report.passed
                entry["validation"] = report.to_json()
            results.append(entry)

        self.wrote(artifacts.write_json(config, "oracle", {"instances": results}))
        return EXIT_STATISTICAL if failed else EXIT_OK
