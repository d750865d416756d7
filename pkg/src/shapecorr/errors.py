"""Exception types shared across the package. The CLI maps each to an exit code."""


class MeshError(ValueError):
    """Unreadable or invalid mesh input."""


class InputError(ValueError):
    """Invalid parameters or auxiliary input files (ground truth, configs)."""


class FormatError(ValueError):
    """Corrupt or incompatible binary file (bad magic, version, checksum, size)."""


class NumericalError(RuntimeError):
    """A numerical routine failed (non-convergence, singular system, non-finite output)."""
