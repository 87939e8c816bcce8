class InvalidArgument(ValueError):
    pass


class PreconditionFailed(ValueError):
    pass


class InternalInconsistency(RuntimeError):
    """Two independent computations disagreed; always a bug, never a math result."""


class CertificateFailed(RuntimeError):
    pass
