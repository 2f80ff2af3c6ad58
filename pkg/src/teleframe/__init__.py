"""teleframe: control coordinate systems for robot teleoperation.

Build and diagnose the frames that map input-device axes to robot motion,
simulate closed-loop teleoperation with a synthetic screen-feedback
operator, and serve live browser sessions over WebSocket.
"""

from .frames import (ControlFrame, frame_from_name, frame_matrix,
                     hybrid_frame_1, hybrid_frame_2, hybrid_frame_3,
                     orbit_frame, projected_camera_axis, standard_frame,
                     view_dependent_frame)
from .geometry import CameraIntrinsics, Plane, Pose, project_point
from .kinematics import ArmModel, ArmState, default_arm, fk, ik_step, jacobian
from .mapping import DeviceInput, MappingConfig, Twist, map_input
from .metrics import (TrajectoryError, TrialRow, combined_objective,
                      frame_diagnostics, trajectory_error)
from .operator import (OperatorModel, Observation, OperatorController,
                       natural_belief, run_episode)
from .scene import Scene, camera_orientation, default_scene, load_scene, save_scene
from .session import SessionCore, run_qualification

__version__ = "0.1.0"
