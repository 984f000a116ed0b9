"""Exception types shared across the toolkit.

Every error raised by the library derives from TrajAnomalyError so callers
can catch one base class at pipeline boundaries (the CLI maps subclasses to
distinct exit codes).
"""


class TrajAnomalyError(Exception):
    """Base class for all toolkit errors."""


# --- trajectory ingestion -------------------------------------------------

class EmptyInput(TrajAnomalyError):
    """Input text contained no parseable trajectory rows."""


class MalformedRow(TrajAnomalyError):
    """A CSV row had the wrong arity or a non-numeric field."""

    def __init__(self, line: int, detail: str):
        super().__init__(f"line {line}: {detail}")
        self.line = line


class NonMonotonicTime(TrajAnomalyError):
    """A trajectory's timestamps were duplicated or decreasing."""

    def __init__(self, line: int, traj_id: str):
        super().__init__(
            f"line {line}: non-monotonic time for trajectory {traj_id!r}"
        )
        self.line = line
        self.traj_id = traj_id


class DegenerateScene(TrajAnomalyError):
    """Fewer than two usable trajectories, or the scene has zero extent."""


# --- feature extraction ---------------------------------------------------

class MismatchedResolution(TrajAnomalyError):
    """Two resampled trajectories have different point counts."""


# --- clustering -----------------------------------------------------------

class ZeroWeight(TrajAnomalyError):
    """A truncated kernel saw no data inside its window."""


# --- anomaly scoring ------------------------------------------------------

class DimensionMismatch(TrajAnomalyError):
    """Feature vector and cluster centers disagree on dimensionality."""


class SingleCluster(TrajAnomalyError):
    """Entropy is undefined over a single center; the space must abstain."""


class AllZeroDistances(TrajAnomalyError):
    """Every center distance is zero with k >= 2: upstream corruption."""


class NoVotingSpaces(TrajAnomalyError):
    """Every feature space abstained; no majority vote is possible."""


# --- synthetic scenes and evaluation ---------------------------------------

class InvalidConfig(TrajAnomalyError):
    """A generator configuration violates its constraints."""


class IdMismatch(TrajAnomalyError):
    """Predicted trajectory ids do not match the ground-truth universe."""


# --- CLI configuration and plotting ----------------------------------------

class UnknownKey(TrajAnomalyError):
    """A config file key is not a recognized setting."""

    def __init__(self, key: str):
        super().__init__(f"unknown config key {key!r}")
        self.key = key


class InvalidValue(TrajAnomalyError):
    """A config value failed validation."""

    def __init__(self, key: str, constraint: str):
        super().__init__(f"invalid value for {key!r}: {constraint}")
        self.key = key
        self.constraint = constraint


class DigestMismatch(TrajAnomalyError):
    """A report and scene disagree; refusing to render mismatched inputs."""
