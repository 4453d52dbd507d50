from .backend import available_backends, kernel_backend, set_kernel_backend
from .checkpoint import load_checkpoint, save_checkpoint
from .errors import (
    GraphConsumed,
    NdTensorError,
    NonFiniteValue,
    NonPositiveExtent,
    NotScalar,
    ShapeMismatch,
)
from .gradcheck import GradCheckReport, grad_check
from .init import conv_kernel, glorot_uniform, zeros
from .optim import AdamState, adam_step
from .tensor import (
    Tensor,
    activations,
    add,
    add_channel_bias,
    add_scalar,
    backward,
    concat_channels,
    conv3d,
    conv_transpose3d,
    cross_entropy_logits,
    dense,
    exp,
    flatten,
    global_avg_pool2d,
    matmul,
    maxpool2d,
    mean_all,
    mul,
    no_grad,
    relu,
    reshape,
    scale,
    sigmoid,
    softmax_rows,
    sub,
    sum_all,
)
