"""Collaborative extraction of structured datasets from scientific PDFs.

The package turns PDF articles into versioned, schema-aligned data: a
document pipeline (parsing, metadata voting), interactive table
extraction over a cell lattice, map tick geo-referencing, dictionary
text tagging, project-level dataset assembly, and a multi-user HTTP
service with roles, locks, and a take-charge principal mechanism.
"""

from .config import PipelineConfig, ServiceConfig, load_config
from .errors import QuarryError
from .model import (
    DocumentRecord,
    MetaCandidate,
    MetaInfo,
    PageContent,
    Region,
    TextBox,
    get_page_text,
)

__version__ = "0.1.0"

__all__ = [
    "PipelineConfig", "ServiceConfig", "load_config",
    "QuarryError",
    "TextBox", "PageContent", "Region", "MetaInfo", "MetaCandidate",
    "DocumentRecord", "get_page_text",
    "__version__",
]
