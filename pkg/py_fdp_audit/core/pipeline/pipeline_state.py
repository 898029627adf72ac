from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict

from py_fdp_audit.core.attack.thresholding import RateCurve
from py_fdp_audit.core.auditing.auditor import AuditReport, VerifyReport
from py_fdp_audit.core.estimators.audit_result import AuditMethod
from py_fdp_audit.core.mechanisms.observation_set import ObservationPair

ParameterValue = Union[int, float, str]


@dataclass(frozen=True)
class ObservationCell:
    """One observation pair of an experiment grid; `group` names the cell without its repeat index."""

    group: str
    repeat: int
    parameters: dict[str, ParameterValue]
    pair: ObservationPair
    true_eps: Optional[float] = None

    @property
    def label(self) -> str:
        return f"{self.group}_r{self.repeat}"


class CellAudit(BaseModel):
    model_config = ConfigDict(frozen=True)

    label: str
    group: str
    true_eps: Optional[float] = None
    report: AuditReport


class CellVerification(BaseModel):
    model_config = ConfigDict(frozen=True)

    label: str
    group: str
    true_eps: Optional[float] = None
    report: VerifyReport


class ComposeEstimate(BaseModel):
    """End-to-end epsilon extrapolated from a per-step audit; an estimate, not a bound."""

    model_config = ConfigDict(frozen=True)

    label: str
    method: AuditMethod
    mu_step: float
    steps: int
    q: float
    delta: float
    eps_estimate: float


class SummaryRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    group: str
    method: AuditMethod
    cells: int
    true_eps: Optional[float] = None
    mean_eps_lower: float
    std_eps_lower: float
    mean_mu_lower: float
    violations: Optional[int] = None


class PipelineResult(BaseModel):
    name: str
    seed: int
    audits: list[CellAudit]
    estimates: list[ComposeEstimate] = []
    verifications: list[CellVerification] = []
    summary: list[SummaryRow]
    artifacts: list[str] = []
    violation: bool = False


@dataclass
class PipelineState:
    """Mutable hand-over between stages; stages append, nothing is written back."""

    output_dir: Path
    cells: list[ObservationCell] = field(default_factory=list)
    curves: dict[str, RateCurve] = field(default_factory=dict)
    audits: list[CellAudit] = field(default_factory=list)
    estimates: list[ComposeEstimate] = field(default_factory=list)
    verifications: list[CellVerification] = field(default_factory=list)
    artifacts: list[Path] = field(default_factory=list)

    def summarize(self) -> list[SummaryRow]:
        groups: dict[tuple[str, AuditMethod], list[CellAudit]] = {}
        for audit in self.audits:
            groups.setdefault((audit.group, audit.report.result.method), []).append(audit)
        violations: dict[str, int] = {}
        for verification in self.verifications:
            violations[verification.group] = violations.get(verification.group, 0) + int(verification.report.violation)

        rows: list[SummaryRow] = []
        for (group, method), audits in groups.items():
            eps = np.array([audit.report.result.eps_lower for audit in audits])
            mu = np.array([audit.report.result.mu_lower for audit in audits])
            rows.append(
                SummaryRow(
                    group=group,
                    method=method,
                    cells=len(audits),
                    true_eps=audits[0].true_eps,
                    mean_eps_lower=float(eps.mean()),
                    std_eps_lower=float(eps.std(ddof=1)) if eps.size > 1 else 0.0,
                    mean_mu_lower=float(mu.mean()),
                    violations=violations.get(group) if self.verifications else None,
                )
            )
        return rows
