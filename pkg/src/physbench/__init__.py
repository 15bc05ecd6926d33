"""physbench: physical-parameter recovery from object tracks and
mask-based video scoring, validated against a synthetic kinematics oracle."""

__version__ = "0.1.0"

from .camera import (  # noqa: F401
    CameraExtrinsics,
    CameraIntrinsics,
    CheckerboardSpec,
    CornerSet,
    calibrate_intrinsics,
    estimate_pose,
    lift_planar,
    project,
)
from .fitting import PolyFit, acceleration_of, fit_poly, terminal_regime_check, velocity_of  # noqa: F401
from .masks import (  # noqa: F401
    BBox,
    MaskSequence,
    bbox_from_mask,
    centroid,
    decode_rle,
    encode_rle,
)
from .metrics import background_rmse, frame_miou, sequence_metrics, summarize  # noqa: F401
from .params import (  # noqa: F401
    DEFAULT_MATERIALS,
    ExperimentSpec,
    MaterialTable,
    aggregate,
    friction_from_track,
    gravity_from_track,
    viscosity_from_track,
)
from .synth import ScenarioConfig, SyntheticBundle, build_bundle, gen_corners, rasterize_masks  # noqa: F401
from .tracks import Track2D, Track3D, VideoMeta, lift_track, track_from_masks  # noqa: F401
