"""Chart answer attribution: bounding-box citations for chart QA.

Thin wrapper over the compiled ``_chartattrib`` extension. Tables, layouts,
ground truth, and reports cross the boundary as JSON strings; the helpers
here decode them for ergonomic use.
"""

import json

from ._chartattrib import (  # noqa: F401
    ChartAttribError,
    __version__,
    attribute,
    evaluate,
    iou,
    line_coverage,
    match_regions,
    rasterize_check,
    render_chart,
    synthesize,
)
from . import _chartattrib as _ext


def parse_table_html(html: str) -> dict:
    """Parse an HTML table fragment into the canonical table dict."""
    return json.loads(_ext.parse_table_html(html))


def serialize_table_html(table: dict) -> str:
    """Serialize the canonical table dict into its HTML fragment."""
    return _ext.serialize_table_html(json.dumps(table))


def render(table: dict, chart_type: str, style_seed: int = 0, layout: dict | None = None):
    """Render a table as a chart; returns (png_bytes, ground_truth_dict)."""
    png, gt = _ext.render_chart(
        json.dumps(table), chart_type, style_seed, json.dumps(layout) if layout else ""
    )
    return png, json.loads(gt)
