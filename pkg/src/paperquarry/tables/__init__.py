"""Interactive table extraction: lattice model, recognizers, staging."""

from .artifact import (
    STAGES,
    TableArtifact,
    advance_stage,
    apply_edit,
    export_edit_log,
    export_table,
    replay_log,
)
from .grid import (
    CellGrid,
    CellSpan,
    add_column,
    add_row,
    delete_column,
    delete_row,
    merge_cells,
    set_cell,
    split_cell,
    unit_grid,
)
from .recognize import (
    OCR_ADAPTERS,
    TABLE_DETECTORS,
    detect_table_regions,
    recognize_content,
    recognize_structure,
)

__all__ = [
    "STAGES", "TableArtifact", "advance_stage", "apply_edit",
    "export_edit_log", "export_table", "replay_log",
    "CellGrid", "CellSpan", "unit_grid", "set_cell",
    "merge_cells", "split_cell",
    "add_row", "delete_row", "add_column", "delete_column",
    "TABLE_DETECTORS", "OCR_ADAPTERS",
    "detect_table_regions", "recognize_structure", "recognize_content",
]
