"""swinglab: pose-keypoint golf swing analytics with interpretable models."""

from . import errors
from .evaluation import (
    BenchmarkResult,
    EvalReport,
    TruthFeature,
    accuracy,
    auc,
    benchmark,
    correlation_table,
    generate_synthetic,
    mse,
)
from .features import (
    FeatureSchema,
    FeatureVector,
    LabelPolicy,
    ShotShape,
    Standardizer,
    assemble,
    default_schema,
    label_direction,
    label_spin,
    pearson,
    shot_shape,
    standardize,
)
from .feedback import (
    FeedbackItem,
    FeedbackReport,
    SessionComparison,
    ShapeCurve,
    compare_sessions,
    extract_curves,
    generate_feedback,
    optimal_value,
    render_curve_svg,
)
from .geometry import Point2, angle_from_horizontal, angle_from_vertical, distance, midpoint, vertex_angle
from .metrics import MetricId, MetricValue, compute_all, compute_metric
from .models import (
    AdditiveModel,
    LinearModel,
    Task,
    TrainingConfig,
    load_model,
    save_model,
    train_linear,
    train_nam,
)
from .pose_io import (
    BallRecord,
    BBox,
    ClubType,
    Joint,
    JointName,
    PairedShot,
    SwingEvent,
    SwingSequence,
    View,
    mirror_sequence,
    normalize_sequence,
    pair_records,
    parse_ball_csv,
    parse_keypoint_file,
    split_dataset,
    write_keypoint_file,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
