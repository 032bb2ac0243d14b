"""Exception hierarchy shared by all backend modules.

Every error carries a stable ``code`` (used verbatim in API error bodies)
and a default HTTP status for the service layer.
"""

from __future__ import annotations


class QuarryError(Exception):
    code = "error"
    http_status = 400

    def __init__(self, message: str = "", **details):
        super().__init__(message or self.__class__.__name__)
        self.message = message or self.__class__.__name__
        self.details = details


# --- document pipeline ---

class MalformedPdf(QuarryError):
    code = "malformed_pdf"


class EncryptedPdf(QuarryError):
    code = "encrypted_pdf"


class NoAdapters(QuarryError):
    code = "no_adapters"
    http_status = 500


class UnknownAdapter(QuarryError):
    code = "unknown_adapter"


class PageOutOfRange(QuarryError):
    code = "page_out_of_range"
    http_status = 404


# --- table extraction ---

class UnknownDetector(QuarryError):
    code = "unknown_detector"


class EmptyRegion(QuarryError):
    code = "empty_region"


class PartialSpanOverlap(QuarryError):
    code = "partial_span_overlap"


class AlreadyUnit(QuarryError):
    code = "already_unit"


class IndexOutOfRange(QuarryError):
    code = "index_out_of_range"


class CannotDeleteLast(QuarryError):
    code = "cannot_delete_last"


class InvalidTransition(QuarryError):
    code = "invalid_transition"


class NotFilled(QuarryError):
    code = "not_filled"


# --- map georeferencing ---

class UnparsableLabel(QuarryError):
    code = "unparsable_label"


class InsufficientTicks(QuarryError):
    code = "insufficient_ticks"


class DegenerateTicks(QuarryError):
    code = "degenerate_ticks"


class PixelOutsideRegion(QuarryError):
    code = "pixel_outside_region"


# --- text annotation ---

class InvalidPattern(QuarryError):
    code = "invalid_pattern"


class SpanOutOfRange(QuarryError):
    code = "span_out_of_range"


class UnknownLabel(QuarryError):
    code = "unknown_label"


# --- integration ---

class NoHeaders(QuarryError):
    code = "no_headers"


class NoHeaderRowFound(QuarryError):
    code = "no_header_row_found"


class SchemaMismatch(QuarryError):
    code = "schema_mismatch"


# --- collaboration service ---

class PermissionDenied(QuarryError):
    code = "permission_denied"
    http_status = 403


class DuplicateUsername(QuarryError):
    code = "duplicate_username"
    http_status = 409


class InvalidCredentials(QuarryError):
    code = "invalid_credentials"
    http_status = 401


class LockHeldByOther(QuarryError):
    code = "lock_held_by_other"
    http_status = 409


class LockNotHeld(QuarryError):
    code = "lock_not_held"
    http_status = 409


class NotPrincipal(QuarryError):
    code = "not_principal"
    http_status = 403


class AlreadyAssigned(QuarryError):
    code = "already_assigned"
    http_status = 409


class InvalidSortKey(QuarryError):
    code = "invalid_sort_key"


class NotFound(QuarryError):
    code = "not_found"
    http_status = 404


# --- cli ---

class BadConfig(QuarryError):
    code = "bad_config"


class AddressInUse(QuarryError):
    code = "address_in_use"
