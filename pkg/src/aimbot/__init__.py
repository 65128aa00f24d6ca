"""Visual guidance overlays for multi-view RGB-D robot observations.

Fixed-camera views get shooting lines from the end-effector pixel to the
nearest-surface stop pixel; wrist-camera views get crosshair reticles whose
arm length encodes the end-effector-to-surface distance. Everything is
computed from camera calibration, depth images, and the end-effector pose.
"""

from .errors import (
    AimbotError,
    FrameError,
    ManifestError,
    SceneFileError,
    ValidationError,
)
from .geometry import (
    CameraExtrinsics,
    CameraIntrinsics,
    PixelProjection,
    Pose,
    compute_wrist_extrinsics,
    look_at_extrinsics,
    quat_to_direction,
    world_to_image,
)
from .visibility import DEFAULT_EPSILON, check_visibility
from .raymarch import MarchConfig, RayMarchResult, find_stop_point
from .overlay import (
    GripperState,
    RenderStyle,
    VARIANTS,
    apply_style_variant,
    grasp_sense,
    randomize_cue,
    render_fixed,
    render_wrist,
)
from .synthscene import (
    Box,
    Plane,
    Scene,
    Sphere,
    analytic_intersection,
    ray_cast_depth,
    render_scene_rgb,
)
from .dataset import (
    AugmentSummary,
    Episode,
    EpisodeManifest,
    augment_episode,
    load_episode,
    synthesize_episode,
    validate_episode,
)
from .bench import LatencyReport, reference_bundle, time_augment

__version__ = "0.1.0"
