"""Reachability-database IK queries and robust mobile-base stop planning."""

from .geometry import Pose6, pose_metric
from .kinematics import (
    DEGENERATE_PLANAR_TARGET,
    Joint,
    KinematicChain,
    forward_kinematics,
    jacobian,
    manipulability,
    planar_chain,
    planar_two_link_ik,
    refine_ik,
)
from .reachdb import (
    ReachDB,
    SamplingSpec,
    VoxelSpec,
    build,
    load,
    query,
    query_interval,
    reachability_projection,
    save,
    voxel_index,
)
from .collision import (
    Box,
    Capsule,
    PlacedShape,
    RobotGeometry,
    Sphere,
    World,
    robot_in_collision,
    shapes_collide,
)
from .baseregion import (
    BaseGridSpec,
    BaseRegion,
    GraspCheckOptions,
    GraspSet,
    compute_base_region,
    grasp_in_base_frame,
    object_graspable,
)
from .regiongeo import (
    IntersectionRecord,
    UncertaintyModel,
    connected_components,
    enumerate_intersections,
    filter_by_uncertainty,
    inscribed_circle,
    intersect,
)
from .sequencer import (
    Candidate,
    CoverInstance,
    PlanOptions,
    PlanResult,
    min_cover,
    order_stops_exact,
    order_stops_sa,
    plan,
)
from .robustsim import SimReport, evaluate, sample_offset
from .scene import Scene, SceneError, emit_scene, load_scene, parse_scene

__version__ = "0.1.0"
