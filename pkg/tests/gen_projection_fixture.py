"""Regenerates the frontend's pinhole-agreement fixture: ten arm states
projected server-side, frozen as JSON for the client test suite."""

import json
from pathlib import Path

import numpy as np

from golden import golden_scene
from teleframe.geometry import project_point
from teleframe.kinematics import arm_to_json, default_arm, fk
from teleframe.scene import scene_to_json


def main():
    scene = golden_scene()
    arm = default_arm()
    rng = np.random.default_rng(123)
    cases = []
    for i in range(10):
        if i == 0:
            q = arm.home_q
        else:
            q = np.clip(arm.home_q + rng.normal(scale=0.25, size=arm.dof),
                        arm.lower_limits, arm.upper_limits)
        result = fk(arm, q)
        eef = result.eef.translation
        tip = result.fingertip
        cases.append({
            "joints": list(q),
            "eef_world": list(eef),
            "fingertip_world": list(tip),
            "eef_px": list(project_point(scene.camera, scene.intrinsics, eef)),
            "fingertip_px": list(project_point(scene.camera, scene.intrinsics,
                                               tip)),
            "link_px": [list(project_point(scene.camera, scene.intrinsics,
                                           pose.translation))
                        for pose in result.link_poses],
        })
    out = {
        "scene": scene_to_json(scene),
        "cases": cases,
    }
    fixtures = Path(__file__).resolve().parent.parent / "frontend" / "tests" / \
        "fixtures"
    fixtures.mkdir(parents=True, exist_ok=True)
    path = fixtures / "projection_cases.json"
    path.write_text(json.dumps(out, indent=1) + "\n", encoding="utf-8")
    arm_path = fixtures / "arm.json"
    arm_path.write_text(json.dumps(arm_to_json(arm), indent=1) + "\n",
                        encoding="utf-8")
    print(f"wrote {path}\nwrote {arm_path}")


if __name__ == "__main__":
    main()
