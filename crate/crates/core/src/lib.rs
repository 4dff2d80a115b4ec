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
//! Batched motion generation for serial manipulators.
//!
//! The crate covers robot kinematics over collision spheres, an oriented
//! box world with smooth and swept collision costs, trajectory rollouts,
//! batched L-BFGS and particle optimizers, a sampling-based geometric
//! planner and the full IK → trajectory optimization → retiming pipeline.

pub mod assets;
pub mod bench;
pub mod collision;
pub mod cost;
pub mod error;
pub mod fixtures;
pub mod geometry;
pub mod halton;
pub mod kinematics;
pub mod metrics;
pub mod motion;
pub mod planner;
pub mod robot;
pub mod rollout;
pub mod solvers;
pub mod world;

pub use error::{Error, Result};
