"""Python access to the navkit C++ core. Poses are 4x4 numpy arrays, point sets are (N, 3) arrays in mm."""

from ._navkit import (
    NavkitError,
    compose,
    derive_seed,
    fre,
    from_axis_angle,
    incision_deviation,
    insertion_error,
    invert,
    marker_corners,
    metric_names,
    orthonormalize,
    pivot_calibrate,
    point_based_register,
    project,
    replay,
    rotation_angle_between,
    run_cli,
    run_monte_carlo,
    solve_marker_pose,
    surface_deviation,
    trajectory_deviation,
    tre,
)

__all__ = [
    "NavkitError",
    "compose",
    "derive_seed",
    "fre",
    "from_axis_angle",
    "incision_deviation",
    "insertion_error",
    "invert",
    "marker_corners",
    "metric_names",
    "orthonormalize",
    "pivot_calibrate",
    "point_based_register",
    "project",
    "replay",
    "rotation_angle_between",
    "run_cli",
    "run_monte_carlo",
    "solve_marker_pose",
    "surface_deviation",
    "trajectory_deviation",
    "tre",
]
