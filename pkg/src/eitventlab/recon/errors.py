class ReconError(Exception):
    pass


class ShapeMismatch(ReconError):
    pass


class SingularRegularization(ReconError):
    pass


class DegenerateRange(ReconError):
    pass
