"""Queue-monitoring analytics on pose keypoints.

Pipeline: keypoint JSON -> hip midpoints -> ordered queue -> fitted line ->
confidence-band outliers -> mass-spring forces -> Otsu outliers -> color
overlays and a top-view projection.
"""

from .ci import BandSpec, CiFlags, confidence_band, flag_ci_outliers, t_critical
from .ingest import (
    Keypoint,
    PersonPose,
    PoseFrame,
    QueuePoint,
    hip_midpoints,
    order_queue,
    parse_keypoint_file,
    serialize_frame,
)
from .linefit import (
    DirectionVector,
    FittedLine,
    ModelSpec,
    ResidualStats,
    direction_vector,
    fit_line,
    predict,
    residual_stats,
    top_view,
)
from .pipeline import AnalysisReport, Config, analyze, build_report, run_analysis
from .render import PixelBuffer, StyleConfig, jet_color, render_overlay, render_topview
from .springs import (
    ForceField,
    LinkGeometry,
    SpringLink,
    SpringParams,
    chain_forces,
    link_force,
    link_geometry,
    per_link_magnitudes,
)
from .synth import SceneSpec, EvalResult, accuracy_paper, evaluate, generate_queue, prf1
from .threshold import OtsuResult, SpringFlags, flag_force_outliers, minmax_scale, otsu_threshold

__version__ = "0.1.0"
