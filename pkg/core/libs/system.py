import logging
import platform
import sys

import distro
import psutil

logger = logging.getLogger('cookiewalk.libs.system')


class System:
    """
    This class provides access to information about the host running an experiment.
    None of it enters an artifact.
    """

    @staticmethod
    def get_size(data, suffix="B"):
        """
        Scale bytes to its proper format
        e.g:
            1253656 => '1.20MB'
            1253656678 => '1.17GB'
        :param data: the size in bytes
        :param suffix: which suffix to use as a single letter
        :return the size converted to the proper suffix
        """
        factor = 1024
        for unit in ["", "K", "M", "G", "T", "P"]:
            if data < factor:
                return f"{data:.2f}{unit}{suffix}"
            data /= factor

    @property
    def physical_cores(self):
        return psutil.cpu_count(logical=False) or 1

    @property
    def logical_cores(self):
        return psutil.cpu_count(logical=True) or 1

    @property
    def memory(self):
        return self.get_size(psutil.virtual_memory().total)

    @property
    def dist(self):
        if platform.system() != "Linux":
            return "{0} {1}".format(platform.system(), platform.release())
        return "{0} {1}".format(distro.name(), distro.version())

    @property
    def machine(self):
        return platform.machine()

    @property
    def node(self):
        return platform.node()

    @property
    def python(self):
        return "{0}.{1}.{2}".format(*sys.version_info[:3])

    def describe(self) -> str:
        return "{0} ({1}), {2} cores / {3} threads, {4} RAM, Python {5}".format(
            self.dist, self.machine, self.physical_cores, self.logical_cores, self.memory, self.python)


system = System()


def get_system():
    return system


if __name__ == '__main__':
    logging.basicConfig(level=logging.DEBUG)
    logging.info("Host: {}".format(system.describe()))
