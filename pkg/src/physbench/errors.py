"""Exception hierarchy shared across the toolkit."""


class PhysbenchError(Exception):
    """Base class for all domain errors."""


# camera geometry
class TooFewViews(PhysbenchError):
    pass


class DegenerateViews(PhysbenchError):
    pass


class DegenerateHomography(PhysbenchError):
    pass


class BehindCamera(PhysbenchError):
    pass


# masks / tracks
class LengthMismatch(PhysbenchError):
    pass


class EmptyMask(PhysbenchError):
    pass


class FrameCountMismatch(PhysbenchError):
    pass


# fitting
class TooFewSamples(PhysbenchError):
    pass


class SingularDesign(PhysbenchError):
    pass


class WrongDegree(PhysbenchError):
    pass


class NotTerminal(PhysbenchError):
    pass


# physical parameters
class ZeroVelocity(PhysbenchError):
    pass


class StaticBlock(PhysbenchError):
    pass


# metrics
class DimensionMismatch(PhysbenchError):
    pass


class IdMismatch(PhysbenchError):
    pass


class EmptyBackground(PhysbenchError):
    pass


class EmptyInput(PhysbenchError):
    pass


# synthetic scenes
class NeverVisible(PhysbenchError):
    pass


class BoardClipped(PhysbenchError):
    pass


# pipeline / reports
class ConfigInvalid(PhysbenchError):
    pass


class InputMissing(PhysbenchError):
    pass


class EmptyReport(PhysbenchError):
    pass
