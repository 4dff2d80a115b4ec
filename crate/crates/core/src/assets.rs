/*
Copyright 2026 The motiongen Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/
//! Robot and scene documents bundled with the crate.

use crate::robot::RobotModel;
use crate::world::WorldModel;

pub const FRANKA_JSON: &str = include_str!("../assets/franka.json");

/// Seven-joint arm modelled on the Franka Panda with 60 collision spheres.
pub fn franka() -> RobotModel {
    RobotModel::from_json(FRANKA_JSON).expect("bundled robot document is valid")
}

pub const SCENE_NAMES: [&str; 4] = ["tabletop_with_box", "shelf_slot", "wall_gap", "thin_wall"];

/// Bundled scene by name. The table top is the plane z = 0 in front of the
/// arm; `thin_wall` is a 1 cm slab (half-thickness 5 mm) at x = 0.5 with no table.
pub fn scene(name: &str) -> Option<WorldModel> {
    let text = match name {
        "tabletop_with_box" => include_str!("../assets/scenes/tabletop_with_box.json"),
        "shelf_slot" => include_str!("../assets/scenes/shelf_slot.json"),
        "wall_gap" => include_str!("../assets/scenes/wall_gap.json"),
        "thin_wall" => include_str!("../assets/scenes/thin_wall.json"),
        _ => return None,
    };
    Some(WorldModel::from_json(text).expect("bundled scene is valid"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collision::self_collision_cost;
    use crate::kinematics::forward_kinematics;

    #[test]
    fn franka_loads_and_round_trips() {
        let model = franka();
        assert_eq!(model.dof, 7);
        assert_eq!(model.num_spheres(), 60);
        let again = RobotModel::from_json(&model.to_json()).unwrap();
        assert_eq!(again, model);
    }

    #[test]
    fn bundled_scenes_load_and_leave_the_retract_pose_free() {
        let model = franka();
        for name in SCENE_NAMES {
            let world = scene(name).unwrap();
            assert!(!world.obstacles.is_empty());
            let checker = crate::planner::ValidityChecker::new(&model, &world, 0.0);
            assert!(checker.is_valid(&model.retract_config), "{name}");
        }
        assert!(scene("missing").is_none());
    }

    #[test]
    fn retract_is_free_of_self_collision() {
        let model = franka();
        let fk = forward_kinematics(&model, &model.retract_config).unwrap();
        let (c, _) = self_collision_cost(fk.spheres(0), &fk.sphere_radii, &model.self_pairs, 1.0);
        assert_eq!(c, 0.0);
    }
}
