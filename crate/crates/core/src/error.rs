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
use thiserror::Error;

/// Errors produced while loading models or evaluating costs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("cycle in kinematic chain involving link `{0}`")]
    Cycle(String),
    #[error("unknown link `{0}`")]
    UnknownLink(String),
    #[error("duplicate link `{0}`")]
    DuplicateLink(String),
    #[error("invalid position limit for joint {index}: lower {lower} >= upper {upper}")]
    InvalidLimit { index: usize, lower: f64, upper: f64 },
    #[error("nonpositive limit: {kind} limit of joint {index} is {value}")]
    NonpositiveLimit {
        kind: &'static str,
        index: usize,
        value: f64,
    },
    #[error("retract configuration is not strictly inside the position limits at joint {0}")]
    RetractOutOfLimits(usize),
    #[error("invalid self-collision pair ({0}, {1})")]
    InvalidPair(usize, usize),
    #[error("fixed transform of joint `{0}` has a non-orthonormal rotation block")]
    NonOrthonormal(String),
    #[error("invalid value: {0}")]
    Invalid(String),
    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },
    #[error("non-finite input")]
    NonFinite,
}

pub type Result<T> = std::result::Result<T, Error>;
