import math
from enum import Enum
from functools import cached_property

import torch
import torch.nn.functional as F
from torch import Tensor

MAX_PARAMETERS = 100_000
DTYPE = torch.float64


class Architecture(str, Enum):
    Logistic = "logistic"
    Mlp = "mlp"


class TinyModel:
    """
    A small classifier whose parameters live in one flat vector θ.

    Everything is a pure function of θ so per-example gradients come from
    `torch.func.vmap(torch.func.grad(...))` and nested gradients (for crafted canaries)
    compose without module state.
    """

    def __init__(self, architecture: Architecture, input_dim: int, num_classes: int, hidden: int = 16) -> None:
        self.architecture = architecture
        self.input_dim = input_dim
        self.num_classes = num_classes
        self.hidden = hidden
        if self.num_params > MAX_PARAMETERS:
            raise ValueError(
                f"[MODEL TOO LARGE] {self.num_params} parameters exceed the limit of {MAX_PARAMETERS}"
            )

    @cached_property
    def shapes(self) -> dict[str, tuple[int, ...]]:
        match self.architecture:
            case Architecture.Logistic:
                return {"weight": (self.num_classes, self.input_dim), "bias": (self.num_classes,)}
            case Architecture.Mlp:
                return {
                    "hidden_weight": (self.hidden, self.input_dim),
                    "hidden_bias": (self.hidden,),
                    "weight": (self.num_classes, self.hidden),
                    "bias": (self.num_classes,),
                }

    @cached_property
    def num_params(self) -> int:
        return sum(math.prod(shape) for shape in self.shapes.values())

    def unflatten(self, theta: Tensor) -> dict[str, Tensor]:
        params, offset = {}, 0
        for name, shape in self.shapes.items():
            size = math.prod(shape)
            params[name] = theta[offset : offset + size].view(shape)
            offset += size
        return params

    def init_params(self, generator: torch.Generator) -> Tensor:
        chunks = []
        for name, shape in self.shapes.items():
            if name.endswith("bias"):
                chunks.append(torch.zeros(math.prod(shape), dtype=DTYPE))
            else:
                scale = 1.0 / math.sqrt(shape[1])
                chunks.append(scale * torch.randn(math.prod(shape), generator=generator, dtype=DTYPE))
        return torch.cat(chunks)

    def logits(self, theta: Tensor, features: Tensor) -> Tensor:
        params = self.unflatten(theta)
        hidden = features
        if self.architecture is Architecture.Mlp:
            hidden = torch.tanh(features @ params["hidden_weight"].T + params["hidden_bias"])
        return hidden @ params["weight"].T + params["bias"]

    def loss(self, theta: Tensor, features: Tensor, labels: Tensor) -> Tensor:
        return F.cross_entropy(self.logits(theta, features), labels)

    def example_loss(self, theta: Tensor, x: Tensor, y: Tensor) -> Tensor:
        return self.loss(theta, x.unsqueeze(0), y.unsqueeze(0))

    def example_gradient(self, theta: Tensor, x: Tensor, y: Tensor) -> Tensor:
        return torch.func.grad(self.example_loss)(theta, x, y)

    def per_example_gradients(self, theta: Tensor, features: Tensor, labels: Tensor) -> Tensor:
        if features.shape[0] == 0:
            return torch.zeros((0, self.num_params), dtype=DTYPE)
        return torch.func.vmap(torch.func.grad(self.example_loss), in_dims=(None, 0, 0))(theta, features, labels)

    def mean_gradient(self, theta: Tensor, features: Tensor, labels: Tensor) -> Tensor:
        return torch.func.grad(self.loss)(theta, features, labels)

    def predict_proba(self, theta: Tensor, features: Tensor) -> Tensor:
        return torch.softmax(self.logits(theta, features), dim=-1)

    def dormant_indices(self, padding_features: int) -> list[int]:
        """Flat indices of first-layer weights attached to the last `padding_features` inputs."""
        if padding_features <= 0:
            return []
        name = "weight" if self.architecture is Architecture.Logistic else "hidden_weight"
        rows = self.shapes[name][0]
        # the first-layer weight matrix leads the flat vector, row-major
        first_padding = self.input_dim - padding_features
        return [row * self.input_dim + column for row in range(rows) for column in range(first_padding, self.input_dim)]
