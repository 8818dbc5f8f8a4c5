//! Exact rectangle averages `Av_Y(B)` through d-dimensional summed-area tables.
//!
//! Coordinates are deduplicated per dimension, so the tables live on the lattice
//! of distinct observed values. Response sums are stored as unevaluated pairs
//! `hi + lo` (double-double) so the alternating inclusion-exclusion chains do not
//! lose the low-order bits; counts are exact integers.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::grid::Shape;

/// Default limit on the product of distinct-coordinate counts.
/// Largest supported number of covariates; a rectangle query touches `2^d` corners.
pub const MAX_DIM: usize = 16;

pub const DEFAULT_CELL_BUDGET: u128 = 100_000_000;

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

/// Double-double accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Compensated {
    hi: f64,
    lo: f64,
}

impl Compensated {
    #[inline]
    pub(crate) fn add(&mut self, hi: f64, lo: f64) {
        let (s, e) = two_sum(self.hi, hi);
        let lo = self.lo + lo + e;
        let (s2, e2) = two_sum(s, lo);
        self.hi = s2;
        self.lo = e2;
    }

    #[inline]
    pub(crate) fn value(self) -> f64 {
        self.hi + self.lo
    }
}

/// Which edges of a rectangle belong to it, per dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeClosure {
    pub lower_closed: bool,
    pub upper_closed: bool,
}

impl EdgeClosure {
    /// `[a, b]`
    pub const CLOSED: Self = Self {
        lower_closed: true,
        upper_closed: true,
    };
    /// `(a, b]`
    pub const LEFT_OPEN: Self = Self {
        lower_closed: false,
        upper_closed: true,
    };
    /// `[a, b)`
    pub const RIGHT_OPEN: Self = Self {
        lower_closed: true,
        upper_closed: false,
    };
    /// `(a, b)`
    pub const OPEN: Self = Self {
        lower_closed: false,
        upper_closed: false,
    };
}

/// Prefix sum (split into leading and trailing parts) and prefix count.
#[derive(Debug, Clone, Copy)]
struct Cell {
    hi: f64,
    lo: f64,
    count: u32,
}

#[derive(Debug, Clone)]
pub struct RectAverager {
    coords: Vec<Vec<f64>>,
    shape: Shape,
    cells: Vec<Cell>,
    corner_signs: Vec<bool>,
}

/// Number of lattice cells a build would need: product of distinct coordinates per dimension.
pub fn required_cells(data: &Dataset) -> u128 {
    distinct_coords(data)
        .iter()
        .map(|c| c.len() as u128)
        .product()
}

fn distinct_coords(data: &Dataset) -> Vec<Vec<f64>> {
    (0..data.d())
        .map(|j| {
            let mut c: Vec<f64> = data.column(j).collect();
            c.sort_by(f64::total_cmp);
            c.dedup();
            c
        })
        .collect()
}

impl RectAverager {
    pub fn build(data: &Dataset) -> Result<Self> {
        Self::build_with_budget(data, DEFAULT_CELL_BUDGET)
    }

    pub fn build_with_budget(data: &Dataset, budget: u128) -> Result<Self> {
        if data.d() > MAX_DIM {
            return Err(Error::InvalidArgument(format!(
                "at most {MAX_DIM} covariates are supported, got {}",
                data.d()
            )));
        }
        let coords = distinct_coords(data);
        let cells: u128 = coords.iter().map(|c| c.len() as u128).product();
        if cells > budget {
            return Err(Error::Capacity { cells, budget });
        }
        if data.n() > u32::MAX as usize {
            return Err(Error::InvalidArgument("too many observations".into()));
        }
        let d = data.d();
        let shape = Shape::new(coords.iter().map(|c| c.len() + 1).collect());

        // Place each observation at (index + 1) so the table is an exclusive prefix sum.
        let mut placed: Vec<(usize, f64)> = (0..data.n())
            .map(|t| {
                let row = data.row(t);
                let flat = (0..d)
                    .map(|j| {
                        let k = coords[j].partition_point(|c| *c < row[j]);
                        (k + 1) * shape.strides()[j]
                    })
                    .sum();
                (flat, data.responses()[t])
            })
            .collect();
        // Fixed accumulation order makes the tables independent of row order.
        placed.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));

        let len = shape.len();
        let mut acc = vec![Compensated::default(); len];
        let mut count = vec![0u32; len];
        for (flat, y) in placed {
            acc[flat].add(y, 0.0);
            count[flat] += 1;
        }

        for axis in 0..d {
            let stride = shape.strides()[axis];
            let extent = shape.dims()[axis];
            for flat in 0..len {
                let k = (flat / stride) % extent;
                if k == 0 {
                    continue;
                }
                let prev = flat - stride;
                let p = acc[prev];
                acc[flat].add(p.hi, p.lo);
                count[flat] += count[prev];
            }
        }

        let corner_signs = (0..1usize << d).map(|m| m.count_ones() % 2 == 1).collect();
        Ok(Self {
            coords,
            shape,
            cells: acc
                .iter()
                .zip(&count)
                .map(|(a, &count)| Cell {
                    hi: a.hi,
                    lo: a.lo,
                    count,
                })
                .collect(),
            corner_signs,
        })
    }

    pub fn d(&self) -> usize {
        self.coords.len()
    }

    /// Sorted distinct observed values per dimension.
    pub fn coords(&self) -> &[Vec<f64>] {
        &self.coords
    }

    pub fn n(&self) -> usize {
        self.cells[self.shape.len() - 1].count as usize
    }

    pub fn total_sum(&self) -> f64 {
        let last = self.shape.len() - 1;
        self.cells[last].hi + self.cells[last].lo
    }

    pub(crate) fn strides(&self) -> &[usize] {
        self.shape.strides()
    }

    /// Sum and count over the lattice index box `[start, end)`, given as pre-multiplied
    /// offsets (`index * stride`) per dimension. Requires `start <= end` componentwise.
    #[inline]
    pub(crate) fn stats_by_offsets(&self, start: &[usize], end: &[usize]) -> (f64, i64) {
        let d = start.len();
        let mut sum = Compensated::default();
        let mut cnt: i64 = 0;
        for (mask, &neg) in self.corner_signs.iter().enumerate() {
            let mut off = 0;
            for i in 0..d {
                off += if mask >> i & 1 == 1 { start[i] } else { end[i] };
            }
            let cell = &self.cells[off];
            let (h, l, c) = (cell.hi, cell.lo, cell.count as i64);
            if neg {
                sum.add(-h, -l);
                cnt -= c;
            } else {
                sum.add(h, l);
                cnt += c;
            }
        }
        (sum.value(), cnt)
    }

    /// Like [`Self::stats_by_offsets`] but sums the corners in plain arithmetic; the
    /// result is still a fixed function of the index box. `D` is the dimension when
    /// known at compile time, or 0.
    #[inline(always)]
    pub(crate) fn fast_stats_by_offsets<const D: usize>(
        &self,
        start: &[usize],
        end: &[usize],
    ) -> (f64, i64) {
        let d = if D > 0 { D } else { start.len() };
        let (mut hi, mut lo, mut cnt) = (0.0, 0.0, 0i64);
        for mask in 0..1usize << d {
            let mut off = 0;
            for i in 0..d {
                off += if mask >> i & 1 == 1 { start[i] } else { end[i] };
            }
            let cell = &self.cells[off];
            if mask.count_ones() % 2 == 1 {
                hi -= cell.hi;
                lo -= cell.lo;
                cnt -= cell.count as i64;
            } else {
                hi += cell.hi;
                lo += cell.lo;
                cnt += cell.count as i64;
            }
        }
        (hi + lo, cnt)
    }

    /// Count only; cheaper than [`Self::stats_by_offsets`].
    #[inline]
    pub(crate) fn count_by_offsets(&self, start: &[usize], end: &[usize]) -> i64 {
        let d = start.len();
        let mut cnt: i64 = 0;
        for (mask, &neg) in self.corner_signs.iter().enumerate() {
            let mut off = 0;
            for i in 0..d {
                off += if mask >> i & 1 == 1 { start[i] } else { end[i] };
            }
            let c = self.cells[off].count as i64;
            if neg {
                cnt -= c;
            } else {
                cnt += c;
            }
        }
        cnt
    }

    fn index_range(
        &self,
        lo: &[f64],
        hi: &[f64],
        closure: &[EdgeClosure],
    ) -> Result<Option<(Vec<usize>, Vec<usize>)>> {
        let d = self.d();
        for (got, what) in [(lo.len(), d), (hi.len(), d), (closure.len(), d)] {
            if got != what {
                return Err(Error::DimensionMismatch {
                    expected: what,
                    got,
                });
            }
        }
        let mut start = Vec::with_capacity(d);
        let mut end = Vec::with_capacity(d);
        let mut empty = false;
        for j in 0..d {
            if lo[j].is_nan() || hi[j].is_nan() || lo[j] > hi[j] {
                return Err(Error::InvalidRectangle { dim: j });
            }
            let c = &self.coords[j];
            let s = if closure[j].lower_closed {
                c.partition_point(|v| *v < lo[j])
            } else {
                c.partition_point(|v| *v <= lo[j])
            };
            let e = if closure[j].upper_closed {
                c.partition_point(|v| *v <= hi[j])
            } else {
                c.partition_point(|v| *v < hi[j])
            };
            if s >= e {
                empty = true;
            }
            start.push(s * self.strides()[j]);
            end.push(e.max(s) * self.strides()[j]);
        }
        Ok((!empty).then_some((start, end)))
    }

    /// Response sum and observation count inside the rectangle.
    pub fn sum_count(
        &self,
        lo: &[f64],
        hi: &[f64],
        closure: &[EdgeClosure],
    ) -> Result<(f64, usize)> {
        Ok(match self.index_range(lo, hi, closure)? {
            Some((s, e)) => {
                let (sum, cnt) = self.stats_by_offsets(&s, &e);
                (sum, cnt as usize)
            }
            None => (0.0, 0),
        })
    }

    /// Mean response inside the rectangle, or `None` when it holds no observation.
    pub fn average(&self, lo: &[f64], hi: &[f64], closure: &[EdgeClosure]) -> Result<Option<f64>> {
        let (sum, cnt) = self.sum_count(lo, hi, closure)?;
        Ok((cnt > 0).then(|| sum / cnt as f64))
    }
}
