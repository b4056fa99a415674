"""Exceptions raised by gridtree.

Every exception belongs to one of three families. The family decides the exit
code the command line application uses when the error escapes a subcommand.
"""


class GridTreeError(Exception):
    """Base class for all gridtree errors."""

    exit_code = 1


class InputError(GridTreeError):
    """Bad input data, partition or configuration."""

    exit_code = 2


class ProtocolError(GridTreeError):
    """A multi-party protocol could not complete."""

    exit_code = 3


class AnalysisError(GridTreeError):
    """The cost analysis could not be carried out."""

    exit_code = 4


# dataset


class DuplicateKey(InputError):
    pass


class SchemaError(InputError):
    pass


class EmptyInput(InputError):
    pass


class PartitionError(InputError):
    pass


class IncompleteGrid(InputError):
    pass


class ConfigError(InputError):
    pass


# id3


class EmptyTraining(InputError):
    pass


class HistogramMismatch(InputError):
    pass


class UnseenValue(InputError):
    pass


# distributed trees


class DanglingNode(InputError):
    pass


class Forbidden(InputError):
    pass


# smpc and the party network


class TooFewParties(ProtocolError):
    pass


class DomainViolation(ProtocolError):
    pass


class EncodingError(ProtocolError):
    pass


class PaddingOverflow(ProtocolError):
    pass


class SpecError(ProtocolError):
    pass


class ProtocolHang(ProtocolError):
    pass


# cost model


class FitError(AnalysisError):
    pass


class VerificationFailed(AnalysisError):
    pass
