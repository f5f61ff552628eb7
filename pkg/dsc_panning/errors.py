class DscPanningError(ValueError):
    """Base class for every data/analysis error raised by the package."""


class ValidationError(DscPanningError):
    """A domain value (layout, room, scene, ...) violates its invariants."""


class AnalysisError(DscPanningError):
    """Impulse response analysis failed (silent IR, missing onset, bad window, ...)."""


class ProfileError(DscPanningError):
    pass


class PanningError(DscPanningError):
    pass


class RenderError(DscPanningError):
    pass
