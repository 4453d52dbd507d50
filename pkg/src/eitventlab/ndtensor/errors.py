class NdTensorError(Exception):
    pass


class ShapeMismatch(NdTensorError):
    pass


class NonPositiveExtent(NdTensorError):
    pass


class NonFiniteValue(NdTensorError):
    pass


class NotScalar(NdTensorError):
    pass


class GraphConsumed(NdTensorError):
    pass
