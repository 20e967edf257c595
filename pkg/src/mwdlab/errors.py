"""Exception and warning types shared across the package."""


class MwdlabError(Exception):
    """Base class for all package errors."""


class SingularMatrix(MwdlabError):
    """Matrix failed the invertibility pivot test."""


class NotRightRegular(MwdlabError):
    """Operation requires invertible A12 and A22 blocks."""


class OscillationGuard(MwdlabError):
    """Quadrature step cannot resolve the requested frequencies."""


class TailTooFat(MwdlabError):
    """Integrand does not decay below tolerance at the truncation boundary."""


class TailTooFatWarning(UserWarning):
    """Non-fatal variant of TailTooFat, emitted when truncation is allowed."""


class OutOfRange(MwdlabError):
    """Sampled-signal evaluation outside the sampled window."""


class SingularKernel(MwdlabError):
    """Pointwise evaluation of a Cohen kernel that only exists distributionally."""


class ZeroAtOrigin(MwdlabError):
    """Pointwise inversion needs f(0) != 0."""


class DegenerateWindowPair(MwdlabError):
    """Adjoint reconstruction needs <g, gamma> != 0."""


class BadIntervals(MwdlabError):
    """Interference intervals must be disjoint with positive lengths."""


class GridTooLarge(MwdlabError):
    """Phase-space grid exceeds the configured point cap."""


class ConfigError(MwdlabError):
    """Invalid CLI / run configuration."""
