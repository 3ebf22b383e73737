"""Exception types raised by the gliding-top toolkit."""


class GlideTopError(Exception):
    """Base class for all toolkit errors."""


class DegenerateDenominator(GlideTopError):
    """The linear equation fixing the reaction force is singular at this state."""

    def __init__(self, denominator: float, scale: float):
        self.denominator = denominator
        self.scale = scale
        super().__init__(
            f"reaction-force denominator {denominator:.3e} below guard "
            f"(scale {scale:.3e})"
        )


class ChartSingularity(GlideTopError):
    """Euler-angle chart evaluated where sin(theta) vanishes."""

    def __init__(self, sin_theta: float):
        self.sin_theta = sin_theta
        super().__init__(f"Euler chart singular: |sin(theta)| = {abs(sin_theta):.3e}")


class RootFindFailure(GlideTopError):
    """No state on the requested manifold exists near the sample."""


class ConfigError(GlideTopError):
    """Invalid configuration document; ``field`` names the offending key."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.message = message
        self.field = field
        self.line = line
        where = field or ""
        if line is not None:
            where = f"line {line}: {where}" if where else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)
