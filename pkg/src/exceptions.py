# src/exceptions.py - Error hierarchy for the simulator


class SimulationError(Exception):
    """Base class for every error raised by the simulator"""


class ConfigError(SimulationError, ValueError):
    """Scenario parameters violate an invariant, or a name is unknown"""


class ShapeMismatchError(SimulationError, ValueError):
    """Vectors or matrices do not conform"""


class InstanceTooLargeError(SimulationError, ValueError):
    """Exhaustive enumeration requested on an instance beyond the guard"""


class DetectionError(SimulationError, ValueError):
    """Detector called with inputs it cannot act on"""


class RelaySelectionError(SimulationError, ValueError):
    """Invalid relay index or relay set"""


class ResultsIOError(SimulationError, OSError):
    """Results could not be written or read back"""
