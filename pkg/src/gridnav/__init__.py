"""Deterministic 2D indoor navigation stack.

Simulation, landmark localization, A* global planning and DWA local planning
for a differential-drive robot on occupancy-grid worlds.
"""

from .costmap import (COST_FREE, INSCRIBED, LETHAL, UNKNOWN_COST, Costmap,
                      LocalWindow, build_static_costmap, cost_at, export_pgm,
                      update_local)
from .global_planner import (GoalBlocked, NoPathFound, Path, PlanningError,
                             StartBlocked, plan, simplify)
from .kinematics import (Pose2D, RobotParams, Twist, dead_reckon, rollout,
                         step, wrap_angle)
from .local_planner import (DwaBlocked, DwaConfig, ScoredTrajectory,
                            VelocityWindow, compute_cmd, dynamic_window,
                            evaluate)
from .localization import (CameraParams, Observation, PoseEstimate, Source,
                           estimate_pose, observe, track)
from .metrics import (ColumnStats, ErrorSeries, localization_error,
                      series_to_csv, summarize, tracking_error)
from .navigator import NavMode, NavState, Navigator, Simulation, run_scenario
from .scenario import (NavigationLog, ScenarioConfig, ScenarioError,
                       TickRecord, load_scenario, parse_scenario)
from .world import (FREE, NO_RETURN, OCCUPIED, UNKNOWN, Landmark, LandmarkMap,
                    LidarParams, LidarScan, MapParseError, OccupancyGrid,
                    load_world, parse_world, raycast, simulate_scan)

__version__ = "0.1.0"
