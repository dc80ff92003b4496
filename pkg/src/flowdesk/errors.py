"""Error hierarchy shared across the platform.

Every error carries a stable ``code`` string that the HTTP layer forwards
verbatim in response bodies, so clients can switch on codes instead of
parsing messages.
"""

from __future__ import annotations


class PlatformError(Exception):
    """Base class for all platform errors."""

    code = "PlatformError"
    http_status = 400

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)
        self.message = message or self.code


def _error(name: str, status: int) -> type[PlatformError]:
    return type(name, (PlatformError,), {"code": name, "http_status": status})


# Scheduling
InsufficientResources = _error("InsufficientResources", 409)
CapacityOverflow = _error("CapacityOverflow", 409)

# Compute API
DuplicateHost = _error("DuplicateHost", 409)
UnknownHost = _error("UnknownHost", 404)
CyclicDependency = _error("CyclicDependency", 400)
UnknownDependency = _error("UnknownDependency", 400)
InvalidWorkerCount = _error("InvalidWorkerCount", 400)
UnknownWorkflow = _error("UnknownWorkflow", 404)
UnknownJob = _error("UnknownJob", 404)
UnknownWorker = _error("UnknownWorker", 404)
IllegalTransition = _error("IllegalTransition", 409)
WorkerBusy = _error("WorkerBusy", 409)

# Content registry
DuplicateContent = _error("DuplicateContent", 409)
SchemaViolation = _error("SchemaViolation", 400)
UnknownContentType = _error("UnknownContentType", 400)
UnknownContent = _error("UnknownContent", 404)
UnknownAsset = _error("UnknownAsset", 404)
NotLaunchable = _error("NotLaunchable", 400)

# Access control
AccessDenied = _error("AccessDenied", 403)
UnknownNode = _error("UnknownNode", 404)
DuplicateNode = _error("DuplicateNode", 409)
KindMismatch = _error("KindMismatch", 400)
NotTeamOwner = _error("NotTeamOwner", 403)
NotOwner = _error("NotOwner", 403)
EmptyActionSet = _error("EmptyActionSet", 400)
BadCredentials = _error("BadCredentials", 401)
ExpiredToken = _error("ExpiredToken", 401)

# Runners / launcher
UnsupportedRunner = _error("UnsupportedRunner", 400)
SpawnFailure = _error("SpawnFailure", 500)

# Service lifecycle
AddressInUse = _error("AddressInUse", 500)
CorruptDataDir = _error("CorruptDataDir", 500)
TimeoutWaitingForCompletion = _error("TimeoutWaitingForCompletion", 504)

_CODE_MAP = {cls.code: cls for cls in PlatformError.__subclasses__()}


def error_for_code(code: str, message: str) -> PlatformError:
    """Rebuild a typed error from a wire (code, message) pair."""
    return _CODE_MAP.get(code, PlatformError)(message)
