"""
Report artifacts for GSV Mode Share.
"""
from gsv_mode_share.reporting.artifacts import (
    FLOAT_FORMAT,
    ArtifactLog,
    atomic_write_text,
    frame_to_csv_text,
    write_frame,
    write_json,
)
from gsv_mode_share.reporting.plots import render_scatter_svg

__all__ = [
    'FLOAT_FORMAT', 'ArtifactLog', 'atomic_write_text', 'frame_to_csv_text', 'write_frame', 'write_json',
    'render_scatter_svg',
]
