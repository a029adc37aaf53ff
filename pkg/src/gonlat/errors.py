"""Exception hierarchy. Every error raised by the library derives from GonlatError."""


class GonlatError(ValueError):
    pass


class NonSymmetric(GonlatError):
    pass


class Degenerate(GonlatError):
    pass


class DimensionMismatch(GonlatError):
    pass


class UnknownPreset(GonlatError):
    pass


class ZeroScale(GonlatError):
    pass


class ZeroVector(GonlatError):
    pass


class LatticePairMismatch(GonlatError):
    pass


class NotHyperbolic(GonlatError):
    pass


class NonPositivePolarization(GonlatError):
    pass


class EmptyRange(GonlatError):
    pass


class BoxTooLarge(GonlatError):
    pass


class NoIsotropicSeed(GonlatError):
    pass


class CapBelowHodgeFloor(GonlatError):
    pass


class WrongLattice(GonlatError):
    pass


class EmptySampleSpace(GonlatError):
    pass


class ConfigError(GonlatError):
    pass
