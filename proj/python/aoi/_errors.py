class AoiError(RuntimeError):
    """Raised by the native module; ``kind`` names the error category
    (domain, range, admissibility, convergence, config, ...)."""

    def __init__(self, message, kind):
        super().__init__(message)
        self.kind = kind
