//! Unnormalized 3D complex FFT on an `n x n x n` cube built from 1D `rustfft` plans.
//!
//! Data is stored row-major with the last axis contiguous. Each pass transforms
//! every line along the contiguous axis and then rotates the axes, so three
//! passes visit all axes and restore the original layout.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// `X_k = sum_j x_j exp(-2 pi i jk/n)`
    Forward,
    /// `x_j = sum_k X_k exp(+2 pi i jk/n)`, no `1/n` factor.
    Inverse,
}

pub struct Fft3d {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Fft3d {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fft3d").field("n", &self.n).finish()
    }
}

#[allow(clippy::len_without_is_empty)]
impl Fft3d {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    /// Transforms `data` in place along all three axes.
    pub fn process(&self, data: &mut [Complex64], direction: Direction) {
        assert_eq!(data.len(), self.len(), "buffer does not match FFT size");
        let plan = match direction {
            Direction::Forward => &self.forward,
            Direction::Inverse => &self.inverse,
        };
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        let mut rotated = vec![Complex64::default(); data.len()];
        for _ in 0..3 {
            // The buffer length is a multiple of n, so rustfft walks every line.
            plan.process_with_scratch(data, &mut scratch);
            rotate_axes(data, &mut rotated, self.n);
            data.copy_from_slice(&rotated);
        }
    }
}

/// `out[k][i][j] = inp[i][j][k]`
fn rotate_axes(inp: &[Complex64], out: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in 0..n {
            let row = &inp[(i * n + j) * n..(i * n + j + 1) * n];
            for (k, value) in row.iter().enumerate() {
                out[(k * n + i) * n + j] = *value;
            }
        }
    }
}
