//! Rectangular query grids and row-major multi-index helpers.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Row-major layout for a d-dimensional array (last axis fastest).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shape {
    dims: Vec<usize>,
    strides: Vec<usize>,
    len: usize,
}

impl Shape {
    pub fn new(dims: Vec<usize>) -> Self {
        let mut strides = vec![1; dims.len()];
        for i in (0..dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        let len = dims.iter().product();
        Self { dims, strides, len }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dims.len()];
        for (i, s) in self.strides.iter().enumerate() {
            idx[i] = flat / s;
            flat %= s;
        }
        idx
    }
}

/// Advances `idx` to the next multi-index inside `[lo, hi]` (inclusive) in row-major
/// order. Returns `false` once the range is exhausted.
pub(crate) fn odometer(idx: &mut [usize], lo: &[usize], hi: &[usize]) -> bool {
    for i in (0..idx.len()).rev() {
        if idx[i] < hi[i] {
            idx[i] += 1;
            return true;
        }
        idx[i] = lo[i];
    }
    false
}

/// Product grid `axes[0] x axes[1] x ...`; points are ordered row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryGrid {
    axes: Vec<Vec<f64>>,
}

impl QueryGrid {
    pub fn new(axes: Vec<Vec<f64>>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::EmptyGrid("grid has no axes".into()));
        }
        for (j, axis) in axes.iter().enumerate() {
            if axis.is_empty() {
                return Err(Error::EmptyGrid(format!("axis {j} has no points")));
            }
            if axis.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "axis {j} has a non-finite point"
                )));
            }
            if axis.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidArgument(format!(
                    "axis {j} is not strictly increasing"
                )));
            }
        }
        Ok(Self { axes })
    }

    /// `per_dim` equally spaced points spanning the observed range of each covariate.
    pub fn equidistant(data: &Dataset, per_dim: usize) -> Result<Self> {
        if per_dim == 0 {
            return Err(Error::InvalidArgument("grid size must be positive".into()));
        }
        let axes = (0..data.d())
            .map(|j| {
                let (lo, hi) = data
                    .column(j)
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
                        (a.min(v), b.max(v))
                    });
                if per_dim == 1 || lo == hi {
                    vec![lo]
                } else {
                    let step = (hi - lo) / (per_dim - 1) as f64;
                    (0..per_dim)
                        .map(|k| {
                            if k + 1 == per_dim {
                                hi
                            } else {
                                lo + step * k as f64
                            }
                        })
                        .collect()
                }
            })
            .collect();
        Self::new(axes)
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn d(&self) -> usize {
        self.axes.len()
    }

    pub fn shape(&self) -> Shape {
        Shape::new(self.axes.iter().map(Vec::len).collect())
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point_at(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().zip(&self.axes).map(|(&i, a)| a[i]).collect()
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.point_at(&self.shape().unravel(flat))
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|g| self.point(g)).collect()
    }

    /// Sub-grid keeping axis indices `lo[j]..=hi[j]`.
    pub fn slice(&self, lo: &[usize], hi: &[usize]) -> Result<Self> {
        let axes = self
            .axes
            .iter()
            .enumerate()
            .map(|(j, a)| a[lo[j]..=hi[j]].to_vec())
            .collect();
        Self::new(axes)
    }
}
