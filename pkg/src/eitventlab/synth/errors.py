class SynthError(Exception):
    pass


class NonPositiveConductivity(SynthError):
    pass


class UnstableFilter(SynthError):
    pass


class WindowNotFound(SynthError):
    pass
