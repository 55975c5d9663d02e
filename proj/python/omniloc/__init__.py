"""Point-cloud / 360 panorama localization toolkit."""

from ._core import (
    BatchSummary,
    Box,
    CandidateSet,
    LocalPoseParam,
    LocalizationResult,
    LocalizeConfig,
    LossGradient,
    Panorama,
    PointCloud,
    Pose,
    PoseError,
    RefinementTrace,
    RenderOutput,
    RigidTransform,
    SceneDescriptor,
    SceneParams,
    SyntheticScene,
    TextureMode,
    adjust_pose,
    augment_pose,
    bilinear_sample,
    dump_loss_surface,
    evaluate_batch,
    exp_so3,
    filter_by_histogram,
    filter_by_loss,
    generate_candidates,
    generate_scene,
    load_ply,
    load_png,
    localize,
    max_threads,
    photometric_loss,
    pose_error,
    project_equirect,
    refine,
    refine_photometric,
    render,
    rot_z,
    sample_rotations,
    sample_translations,
    sampling_loss,
    sampling_loss_grad,
    save_ply,
    save_png,
    set_max_threads,
    so3_right_jacobian,
    transform_points,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
