"""Exception types raised by the selflink package."""


class SelfLinkError(Exception):
    """Base class for every error raised by this package."""


class InvalidCurve(SelfLinkError, ValueError):
    pass


class TorsionUndefined(SelfLinkError):
    pass


class FrameUndefined(SelfLinkError):
    pass


class CurvatureVanishes(FrameUndefined):
    def __init__(self, t):
        self.t = float(t)
        super().__init__(f"curvature vanishes near t={self.t:.6f}")


class DirectionDegenerate(SelfLinkError):
    def __init__(self, t):
        self.t = float(t)
        super().__init__(f"projection direction is parallel to the tangent near t={self.t:.6f}")


class PushoffCollision(SelfLinkError):
    pass


class LiftAmbiguous(SelfLinkError):
    pass


class CoincidentPoints(SelfLinkError):
    pass


class CurvesIntersect(SelfLinkError):
    pass


class SelfIntersection(SelfLinkError):
    pass


class NonGenericDirection(SelfLinkError):
    def __init__(self, message, attempted=()):
        self.attempted = [list(map(float, d)) for d in attempted]
        super().__init__(message)


class DegenerateCrossing(SelfLinkError):
    pass


class OddCrossingParity(SelfLinkError):
    pass


class ZeroOnGridLine(SelfLinkError):
    pass


class NonIsolatedZero(SelfLinkError):
    pass


class ReportFailed(SelfLinkError):
    def __init__(self, report):
        self.report = report
        super().__init__(f"residual {report.residual:.3g} >= 0.5; refusing to round")


class NontrivialClass(SelfLinkError):
    pass


class InvarianceViolated(SelfLinkError):
    def __init__(self, message, verdict=None):
        self.verdict = verdict
        super().__init__(message)
