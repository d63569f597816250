"""Independent numerical oracles shared by the tests.

The gradient oracle is plain central finite differences in float64, evaluated
by mutating one parameter element at a time with autograd switched off, so it
shares no code path with backpropagation.
"""

import numpy as np
import torch


def finite_difference_param_grads(model, loss_fn, eps=1e-5):
    """{name: dLoss/dParam} by central differences.

    loss_fn() must return a float computed from the model's current parameter
    values and nothing else (same batch, same randomness every call).
    """
    grads = {}
    with torch.no_grad():
        for name, p in model.named_parameters():
            flat = p.view(-1)
            g = np.zeros(flat.numel())
            for i in range(flat.numel()):
                orig = flat[i].item()
                flat[i] = orig + eps
                hi = loss_fn()
                flat[i] = orig - eps
                lo = loss_fn()
                flat[i] = orig
                g[i] = (hi - lo) / (2.0 * eps)
            grads[name] = g.reshape(tuple(p.shape))
    return grads


def analytic_param_grads(model, loss_builder):
    """{name: dLoss/dParam} from autograd; loss_builder() returns the loss tensor."""
    model.zero_grad(set_to_none=True)
    loss_builder().backward()
    out = {}
    for name, p in model.named_parameters():
        grad = p.grad
        out[name] = (np.zeros(tuple(p.shape)) if grad is None
                     else grad.detach().numpy().copy())
    model.zero_grad(set_to_none=True)
    return out


def relative_error(a, b):
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    denom = max(np.linalg.norm(a), np.linalg.norm(b), 1e-12)
    return float(np.linalg.norm(a - b) / denom)


def max_param_grad_error(model, loss_builder, loss_fn, eps=1e-5):
    """Worst per-tensor relative error between autograd and finite differences."""
    analytic = analytic_param_grads(model, loss_builder)
    numeric = finite_difference_param_grads(model, loss_fn, eps=eps)
    return max(relative_error(analytic[name], numeric[name])
               for name in analytic)


def lag1_correlation(plane, axis=1):
    """Pearson correlation between horizontally (or vertically) adjacent pixels."""
    plane = np.asarray(plane, dtype=np.float64)
    if axis == 1:
        a, b = plane[:, :-1].ravel(), plane[:, 1:].ravel()
    else:
        a, b = plane[:-1, :].ravel(), plane[1:, :].ravel()
    return float(np.corrcoef(a, b)[0, 1])
