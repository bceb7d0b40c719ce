"""Exception types raised across encforge."""


class EncforgeError(Exception):
    """Base class for all encforge errors."""


class InvalidRecord(EncforgeError, ValueError):
    pass


class SelfEncounter(InvalidRecord):
    def __init__(self, node_id, line_no=None):
        self.node_id = node_id
        self.line_no = line_no
        where = f"line {line_no}: " if line_no is not None else ""
        super().__init__(f"{where}self-encounter of node {node_id}")


class NonPositiveDuration(InvalidRecord):
    def __init__(self, start_s, end_s, line_no=None):
        self.start_s = start_s
        self.end_s = end_s
        self.line_no = line_no
        where = f"line {line_no}: " if line_no is not None else ""
        super().__init__(f"{where}end {end_s} is not after start {start_s}")


class ParseError(EncforgeError, ValueError):
    def __init__(self, line_no, reason):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"line {line_no}: {reason}")


class ClusterError(EncforgeError):
    pass


class MissingNode(ClusterError):
    def __init__(self, node_id):
        self.node_id = node_id
        super().__init__(f"node {node_id} has no cluster assignment")


class DuplicateNode(ClusterError):
    def __init__(self, node_id, line_no=None):
        self.node_id = node_id
        self.line_no = line_no
        where = f"line {line_no}: " if line_no is not None else ""
        super().__init__(f"{where}node {node_id} assigned more than once")


class EmptyDistribution(EncforgeError, ValueError):
    def __init__(self, what="distribution"):
        super().__init__(f"{what} has no samples")


class AllZeroWeights(EncforgeError, ValueError):
    def __init__(self):
        super().__init__("at least one weight must be positive")


class ClusterCountMismatch(EncforgeError, ValueError):
    def __init__(self, expected, got):
        self.expected = expected
        self.got = got
        super().__init__(f"model has {expected} clusters, config gives {got} counts")


class InsufficientSamples(EncforgeError):
    """A cluster pair cannot be simulated from the samples it has."""

    def __init__(self, clusters, reason, hint):
        self.clusters = tuple(clusters)
        self.reason = reason
        self.hint = hint
        super().__init__(f"cluster pair {self.clusters}: {reason} ({hint})")


class EmptyValues(EncforgeError, ValueError):
    def __init__(self):
        super().__init__("cannot build a CDF table from no values")


class MetricMismatch(EncforgeError, ValueError):
    pass
