import torch
from torch import Tensor


def clip_vector(v: Tensor, clip: float) -> Tensor:
    """v · min{1, C/‖v‖₂}; the zero vector passes through."""
    if clip <= 0.0:
        raise ValueError(f"[CLIP DOMAIN ERROR] clip norm must be positive, got {clip}")
    norm = float(torch.linalg.vector_norm(v))
    if norm <= clip:
        return v
    return v * (clip / norm)


def clip_rows(rows: Tensor, clip: float) -> Tensor:
    norms = torch.linalg.vector_norm(rows, dim=1, keepdim=True)
    factors = torch.where(norms > clip, clip / norms.clamp_min(torch.finfo(rows.dtype).tiny), torch.ones_like(norms))
    return rows * factors


class ContributionRecorder:
    """Collects the norm of every per-example contribution added to a pre-noise gradient sum."""

    def __init__(self) -> None:
        self.contributions: list[float] = []

    def record(self, contributions: Tensor) -> None:
        if contributions.shape[0]:
            self.contributions.extend(torch.linalg.vector_norm(contributions, dim=1).tolist())

    @property
    def max_contribution(self) -> float:
        return max(self.contributions, default=0.0)
