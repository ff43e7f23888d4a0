"""Exception hierarchy shared by every module."""


class PullbackLabError(Exception):
    """Base class for all library errors."""


class OutOfOverlap(PullbackLabError):
    pass


class DomainEscape(PullbackLabError):
    pass


class ChartGap(PullbackLabError):
    pass


class TagMismatch(PullbackLabError):
    pass


class TooFarFromGroup(PullbackLabError):
    pass


class EmptyCover(PullbackLabError):
    pass


class OutOfCover(PullbackLabError):
    pass


class EndpointMismatch(PullbackLabError):
    pass


class NotSteady(PullbackLabError):
    pass


class PartitionMismatch(PullbackLabError):
    pass


class NonConstantTransitions(PullbackLabError):
    pass


class NoCoveringSet(PullbackLabError):
    pass


class NotALoop(PullbackLabError):
    pass


class NotContractibleSetup(PullbackLabError):
    pass


class Aliasing(PullbackLabError):
    pass


class NonInteger(PullbackLabError):
    pass


class UnknownExperiment(PullbackLabError):
    pass


class ConfigError(PullbackLabError):
    pass
