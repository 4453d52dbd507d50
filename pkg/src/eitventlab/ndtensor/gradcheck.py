"""Central-difference verification of the tape's gradients."""

from dataclasses import dataclass

import numpy as np

from .tensor import backward, no_grad


@dataclass
class GradCheckReport:
    block_errors: dict
    max_error: float

    def passed(self, tol):
        return self.max_error < tol


def grad_check(loss_fn, params, h=1e-5):
    """Compare autodiff gradients of `loss_fn()` against central differences.

    loss_fn must rebuild its graph on every call (the tape is single-shot)
    and close over `params`, a dict name -> Tensor with requires_grad.

    The per-block error is ||g_ad - g_fd||_inf normalized by the block's own
    gradient scale, so blocks with tiny gradients are not judged against
    finite-difference noise.
    """
    for p in params.values():
        p.zero_grad()
    loss = loss_fn()
    backward(loss)
    analytic = {name: p.grad.copy() for name, p in params.items()}

    block_errors = {}
    with no_grad():
        for name, p in params.items():
            flat = p.data.reshape(-1)
            fd = np.zeros_like(flat)
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + h
                hi = loss_fn().item()
                flat[i] = orig - h
                lo = loss_fn().item()
                flat[i] = orig
                fd[i] = (hi - lo) / (2.0 * h)
            fd = fd.reshape(p.data.shape)
            ga = analytic[name]
            scale = max(np.abs(ga).max(), np.abs(fd).max(), 1e-12)
            block_errors[name] = float(np.abs(ga - fd).max() / scale)
    return GradCheckReport(block_errors, max(block_errors.values()))
