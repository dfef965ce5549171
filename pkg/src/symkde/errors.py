"""Exception hierarchy shared across the toolkit.

Every error raised on a library boundary derives from :class:`SymkdeError`
so callers (and the command-line front end) can map failure classes to
exit codes without string matching.
"""


class SymkdeError(Exception):
    """Base class for all symkde errors."""


class InputError(SymkdeError):
    """Unreadable or malformed input: image, detection file, ground truth."""


class ConfigError(SymkdeError):
    """Invalid parameter value or unknown configuration key."""


class NoEvidenceError(SymkdeError):
    """The image yielded no usable symmetry evidence (no features, no
    votes with positive weight, or an all-zero density grid)."""


class DegeneratePairError(SymkdeError):
    """Two coincident feature points cannot define a mirror axis."""


class DegenerateExtentError(SymkdeError):
    """All supporting features project to a single point on the axis."""
