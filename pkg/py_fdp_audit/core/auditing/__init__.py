from py_fdp_audit.core.auditing.auditor import (
    DEFAULT_THRESHOLD,
    AuditProtocol,
    AuditReport,
    AuditRequest,
    Auditor,
    VerifyReport,
)

__all__ = [
    "DEFAULT_THRESHOLD",
    "AuditProtocol",
    "AuditReport",
    "AuditRequest",
    "Auditor",
    "VerifyReport",
]
