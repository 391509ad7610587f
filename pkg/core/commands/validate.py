from commands import EXIT_ASSUMPTION, EXIT_OK, AbstractCommand
from libs import artifacts
from libs.classifier import predicted_verdict
from libs.cookie_env import delta


class Command(AbstractCommand):
    name = "validate"
    description = "check a law against the model assumptions and report delta"

    def run(self, config):
        report = self.check_assumptions(config)
        value = delta(config.law)
        self.say("prediction: {0}".format(predicted_verdict(value)))
        self.wrote(artifacts.write_json(config, "validate", {"delta": value,
                                                             "passed": report.passed,
                                                             "assumptions": report.to_json(),
                                                             "prediction": predicted_verdict(value)}))
        if report.passed or config.skip_invalid:
            return EXIT_OK
        return EXIT_ASSUMPTION
