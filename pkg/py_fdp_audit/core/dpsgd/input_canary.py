import math
from typing import Callable

import torch
import torch.nn.functional as F
from loguru import logger
from torch import Tensor

from py_fdp_audit.core.dpsgd.models import TinyModel

MIN_STEP_FRACTION = 2.0**-20


class CanaryCraftingError(Exception): ...


def crafting_objective(model: TinyModel, theta: Tensor, reference: Tensor, y: Tensor) -> Callable[[Tensor], Tensor]:
    """x ↦ |cos(∇_θ l(θ, (x, y)), reference)|."""

    def objective(x: Tensor) -> Tensor:
        gradient = torch.func.grad(model.example_loss)(theta, x, y)
        return F.cosine_similarity(gradient, reference, dim=0).abs()

    return objective


def craft_input_canary(
    model: TinyModel,
    theta: Tensor,
    features: Tensor,
    labels: Tensor,
    steps: int,
    eta: float,
    start: tuple[Tensor, Tensor],
) -> tuple[Tensor, Tensor]:
    """
    Moves an input so its gradient turns away from the mean data gradient.

    Gradient descent on x of the absolute cosine between the example's gradient and the
    mean gradient over (features, labels); the label is kept. A step is accepted only when
    it does not raise the objective, halving the step size until it does.
    """
    if features.shape[0] == 0:
        raise CanaryCraftingError("[CANARY CRAFTING ERROR] the reference data set is empty")
    x, y = start[0].clone(), start[1]
    if steps == 0:
        return x, y
    reference = model.mean_gradient(theta, features, labels)
    objective = crafting_objective(model, theta, reference, y)
    value_and_grad = torch.func.grad_and_value(objective)
    initial = float(objective(x))
    for step in range(steps):
        direction, value = value_and_grad(x)
        if not torch.isfinite(direction).all() or not math.isfinite(float(value)):
            raise CanaryCraftingError(f"[CANARY CRAFTING ERROR] non-finite gradient at step {step}")
        size = eta
        while size >= eta * MIN_STEP_FRACTION:
            candidate = x - size * direction
            if float(objective(candidate)) <= float(value):
                x = candidate
                break
            size /= 2.0
        else:
            logger.debug(f"[CANARY CRAFTING STALLED] no improving step after {step} iterations")
            break
    logger.debug(f"[CANARY CRAFTED] |cos| {initial:.4f} -> {float(objective(x)):.4f} in up to {steps} steps")
    return x.detach(), y
