"""Learning-from-demonstration toolkit.

Train goal-attractor movement primitives from recorded demonstrations,
chain them into replannable tasks, and scaffold symmetry-aware pose
datasets for training a vision model.
"""

from .dmp import (
    BasisSet,
    DmpModel,
    DmpParams,
    DmpState,
    ForcingModel,
    basis_activation,
    canonical_phase,
    compute_forcing_target,
    fit_lwr,
    forcing_term,
    model_from_json,
    model_to_json,
    place_basis,
    reproduction_rmse,
    rollout,
    step,
    train,
)
from .dataset import (
    DatasetLayout,
    PoseRecord,
    ValidationReport,
    build_dataset_layout,
    read_pose_file,
    validate_dataset,
    write_pose_file,
)
from .errors import (
    FormatError,
    InputFormatError,
    LfdError,
    NumericError,
    ParameterError,
    ValidationError,
)
from .poses import (
    GraspOffset,
    RigidPose,
    SymmetrySpec,
    ViewpointSet,
    canonicalize_pose,
    compose,
    grasp_from_pose,
    invert,
    load_symmetry_config,
    sample_viewpoints,
    symmetry_distance,
    twist_angle,
)
from .tasks import (
    GoalSpec,
    SubTask,
    TaskProgram,
    add_subtask,
    load_program,
    plan_task,
    plan_task_segments,
    save_program,
)
from .trajectory import (
    KinematicTrajectory,
    Trajectory,
    derive_kinematics,
    parse_trajectory,
    read_trajectory_file,
    resample_uniform,
    rmse,
    smooth,
    write_trajectory,
    write_trajectory_file,
)

__version__ = "0.1.0"
