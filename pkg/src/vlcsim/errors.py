"""Exception types shared across the simulator."""


class ValidationError(ValueError):
    """A scene, front-end, or config field violates its documented bounds."""


class NoLinkError(RuntimeError):
    """Every receive chain is blocked or silent; there is nothing to select."""


class UnderdeterminedError(ValueError):
    """Fewer receive chains than spatial streams; the linear system has no solution."""
