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
//! Halton low-discrepancy sequences with an optional random shift.

use rand::Rng;

const PRIMES: [u64; 32] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
    101, 103, 107, 109, 113, 127, 131,
];

/// Van der Corput radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut out = 0.0;
    while index > 0 {
        out += (index % base) as f64 * scale;
        index /= base;
        scale *= inv;
    }
    out
}

#[derive(Clone, Debug)]
pub struct Halton {
    index: u64,
    shift: Vec<f64>,
}

impl Halton {
    /// Plain sequence starting at index 1 (index 0 is the origin).
    ///
    /// # Panics
    /// If `dim` exceeds the number of tabulated primes.
    pub fn new(dim: usize) -> Self {
        assert!(dim <= PRIMES.len(), "Halton dimension {dim} is too large");
        Self { index: 1, shift: vec![0.0; dim] }
    }

    /// Sequence with a Cranley-Patterson rotation drawn from `rng`, so
    /// different seeds give different but equally uniform point sets.
    pub fn shifted(dim: usize, rng: &mut impl Rng) -> Self {
        let mut h = Self::new(dim);
        for s in &mut h.shift {
            *s = rng.gen::<f64>();
        }
        h
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    /// Next point in `[0, 1)^dim`.
    pub fn next_unit(&mut self) -> Vec<f64> {
        let i = self.index;
        self.index += 1;
        self.shift
            .iter()
            .zip(PRIMES)
            .map(|(s, b)| (radical_inverse(i, b) + s).fract())
            .collect()
    }

    /// Next point mapped affinely into the box `[lo, hi]`.
    pub fn next_in_box(&mut self, lo: &[f64], hi: &[f64]) -> Vec<f64> {
        let mut u = self.next_unit();
        for ((x, l), h) in u.iter_mut().zip(lo).zip(hi) {
            *x = l + *x * (h - l);
        }
        u
    }
}
