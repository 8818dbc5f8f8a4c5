//! Rectangle-restricted isotonic estimators.
//!
//! For a query point `x` the lower estimate is
//!
//! ```text
//! lower(x) = max_{a <= x} min_{b >= x} Av_Y([a, b])
//! ```
//!
//! and the upper estimate swaps the order of the two optimizations. `Av_Y([a, b])`
//! only changes when a corner crosses an observed coordinate, so each corner ranges
//! over the observed coordinates on its side of `x` plus `x` itself, which makes the
//! search below exact.
//!
//! Outer corners are restricted to those whose anchor rectangle (`[a, x]` for the
//! lower estimate, `[x, b]` for the upper one) holds an observation. Every rectangle
//! visited by the inner optimization then contains data, and
//! `lower(x) <= Av_Y([a*, b*]) <= upper(x)` holds for the two optimal corners. Merely
//! skipping empty rectangles does not give that guarantee.
//!
//! The search is a branch and bound: outer corners are visited in decreasing order of
//! a cheap bound on their inner optimum, and an inner scan stops as soon as it cannot
//! beat the incumbent.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::path::Path;

use rayon::prelude::*;

use crate::dataset::{fmt_f64, Dataset};
use crate::error::{Error, Result};
use crate::grid::{odometer, QueryGrid, Shape};
use crate::rect_average::{RectAverager, MAX_DIM};

/// Inner corners remembered as quick refuters for later outer corners.
const KILLER_SLOTS: usize = 4;

/// Relative slack used when asserting sandwich and isotonicity on fitted surfaces.
pub const INVARIANT_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Lower,
    Upper,
}

/// Per-dimension corner ranges around a query point.
struct Frame {
    /// Number of coordinates strictly below `x_i`.
    below: Vec<usize>,
    /// Number of coordinates at or below `x_i`.
    at_or_below: Vec<usize>,
    len: Vec<usize>,
}

impl Frame {
    fn new(ra: &RectAverager, x: &[f64]) -> Self {
        let coords = ra.coords();
        Frame {
            below: coords
                .iter()
                .zip(x)
                .map(|(c, v)| c.partition_point(|u| u < v))
                .collect(),
            at_or_below: coords
                .iter()
                .zip(x)
                .map(|(c, v)| c.partition_point(|u| u <= v))
                .collect(),
            len: coords.iter().map(Vec::len).collect(),
        }
    }
}

/// Corner offsets along one side of `x`: step `r` in dimension `i` sits at table offset
/// `offs[i][r]`, nearest to `x` first.
struct Sweep {
    offs: Vec<Vec<usize>>,
}

impl Sweep {
    /// Rectangle starts `s` with `a_i <= x_i`.
    fn starts(f: &Frame, strides: &[usize]) -> Self {
        let offs = f
            .below
            .iter()
            .zip(strides)
            .map(|(&l, &s)| (0..=l).rev().map(|k| k * s).collect())
            .collect();
        Sweep { offs }
    }

    /// Rectangle ends `e` (exclusive) with `b_i >= x_i`.
    fn ends(f: &Frame, strides: &[usize]) -> Self {
        let offs = f
            .at_or_below
            .iter()
            .zip(&f.len)
            .zip(strides)
            .map(|((&h, &m), &s)| (h..=m).map(|k| k * s).collect())
            .collect();
        Sweep { offs }
    }

    fn last_step(&self) -> Vec<usize> {
        self.offs.iter().map(|o| o.len() - 1).collect()
    }

    #[inline]
    fn fill(&self, r: &[usize], out: &mut [usize]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.offs[i][r[i]];
        }
    }

    /// Offsets of the corner with row-major rank `lin`.
    fn decode(&self, mut lin: usize, out: &mut [usize]) {
        for i in (0..out.len()).rev() {
            let k = self.offs[i].len();
            out[i] = self.offs[i][lin % k];
            lin /= k;
        }
    }
}

/// Outer corner with an upper bound on its inner optimum; the heap pops the largest bound, then the lowest rank.
struct Candidate {
    bound: f64,
    rank: usize,
    /// Whether `bound` already includes the far probe.
    refined: bool,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then(other.rank.cmp(&self.rank))
    }
}

/// Query engine over one dataset; the summed-area tables are built once.
#[derive(Debug, Clone)]
pub struct IsotonicEstimator {
    ra: RectAverager,
}

impl IsotonicEstimator {
    pub fn new(data: &Dataset) -> Result<Self> {
        Ok(Self {
            ra: RectAverager::build(data)?,
        })
    }

    pub fn from_averager(ra: RectAverager) -> Self {
        Self { ra }
    }

    pub fn averager(&self) -> &RectAverager {
        &self.ra
    }

    /// True when some observation lies weakly below `x` and some weakly above it.
    pub fn is_estimable(&self, x: &[f64]) -> bool {
        x.len() == self.ra.d() && estimable(&self.ra, &Frame::new(&self.ra, x))
    }

    pub fn lower(&self, x: &[f64]) -> Result<f64> {
        self.extreme(x, Side::Lower)
    }

    pub fn upper(&self, x: &[f64]) -> Result<f64> {
        self.extreme(x, Side::Upper)
    }

    fn extreme(&self, x: &[f64], side: Side) -> Result<f64> {
        if x.len() != self.ra.d() {
            return Err(Error::DimensionMismatch {
                expected: self.ra.d(),
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("query point must be finite".into()));
        }
        let frame = Frame::new(&self.ra, x);
        if !estimable(&self.ra, &frame) {
            return Err(Error::NotEstimable {
                points: vec![x.to_vec()],
            });
        }
        Ok(max_min(&self.ra, &frame, side, None))
    }

    /// Lower, upper and midpoint surfaces on `grid`. Every grid point must be estimable.
    pub fn fit(&self, grid: &QueryGrid) -> Result<IsotonicFit> {
        if grid.d() != self.ra.d() {
            return Err(Error::DimensionMismatch {
                expected: self.ra.d(),
                got: grid.d(),
            });
        }
        let points = grid.points();
        let bad: Vec<Vec<f64>> = points
            .iter()
            .filter(|p| !self.is_estimable(p))
            .cloned()
            .collect();
        if !bad.is_empty() {
            return Err(Error::NotEstimable { points: bad });
        }
        // Lines along the last axis are independent work units. Inside a line the
        // previous lower value bounds the next one from below (and the next upper value
        // bounds the previous one from above), which only prunes the search.
        let line = *grid.shape().dims().last().expect("grid has an axis");
        let lines: Vec<(Vec<f64>, Vec<f64>)> = points
            .par_chunks(line)
            .map(|chunk| {
                let frames: Vec<Frame> = chunk.iter().map(|p| Frame::new(&self.ra, p)).collect();
                let mut lower = Vec::with_capacity(chunk.len());
                for f in &frames {
                    let hint = lower.last().copied();
                    lower.push(max_min(&self.ra, f, Side::Lower, hint));
                }
                let mut upper = vec![0.0; chunk.len()];
                let mut hint = None;
                for (u, f) in upper.iter_mut().zip(&frames).rev() {
                    *u = max_min(&self.ra, f, Side::Upper, hint);
                    hint = Some(*u);
                }
                (lower, upper)
            })
            .collect();
        let (lower, upper): (Vec<Vec<f64>>, Vec<Vec<f64>>) = lines.into_iter().unzip();
        let (lower, upper) = (lower.concat(), upper.concat());
        let fit = IsotonicFit::from_bounds(grid.clone(), lower, upper)?;
        fit.verify()?;
        Ok(fit)
    }
}

fn estimable(ra: &RectAverager, f: &Frame) -> bool {
    let strides = ra.strides();
    let zero = vec![0; f.len.len()];
    let below_end: Vec<usize> = f
        .at_or_below
        .iter()
        .zip(strides)
        .map(|(h, s)| h * s)
        .collect();
    let above_start: Vec<usize> = f.below.iter().zip(strides).map(|(l, s)| l * s).collect();
    let full_end: Vec<usize> = f.len.iter().zip(strides).map(|(m, s)| m * s).collect();
    ra.count_by_offsets(&zero, &below_end) > 0 && ra.count_by_offsets(&above_start, &full_end) > 0
}

/// `max_outer min_inner sign * Av`, returned with the sign undone.
///
/// `hint`, when given, must be attained by some rectangle and lie on the near side of
/// the answer (at most the lower estimate, at least the upper one). It seeds the
/// incumbent; the result is the same with or without it.
fn max_min(ra: &RectAverager, f: &Frame, side: Side, hint: Option<f64>) -> f64 {
    match f.len.len() {
        1 => max_min_d::<1>(ra, f, side, hint),
        2 => max_min_d::<2>(ra, f, side, hint),
        3 => max_min_d::<3>(ra, f, side, hint),
        4 => max_min_d::<4>(ra, f, side, hint),
        _ => max_min_d::<0>(ra, f, side, hint),
    }
}

/// [`max_min`] with the dimension fixed at compile time (`D > 0`) or read from `f`.
fn max_min_d<const D: usize>(ra: &RectAverager, f: &Frame, side: Side, hint: Option<f64>) -> f64 {
    let d = if D > 0 { D } else { f.len.len() };
    let strides = ra.strides();
    let (outer, inner, sign) = match side {
        Side::Lower => (Sweep::starts(f, strides), Sweep::ends(f, strides), 1.0),
        Side::Upper => (Sweep::ends(f, strides), Sweep::starts(f, strides), -1.0),
    };
    let stats = |o: &[usize], i: &[usize]| -> (f64, i64) {
        match side {
            Side::Lower => ra.fast_stats_by_offsets::<D>(&o[..d], &i[..d]),
            Side::Upper => ra.fast_stats_by_offsets::<D>(&i[..d], &o[..d]),
        }
    };
    let value = |o: &[usize], i: &[usize]| -> f64 {
        let (s, c) = stats(o, i);
        debug_assert!(c > 0);
        sign * s / c as f64
    };

    let zero = [0usize; MAX_DIM];
    let zero = &zero[..d];
    let mut buf = [[0usize; MAX_DIM]; 4];
    let [anchor, far, o, i_off] = &mut buf;
    let (anchor, far, o, i_off) = (
        &mut anchor[..d],
        &mut far[..d],
        &mut o[..d],
        &mut i_off[..d],
    );
    inner.fill(zero, anchor);
    inner.fill(&inner.last_step(), far);

    let mut best = hint.map_or(f64::NEG_INFINITY, |h| sign * h);

    // Outer candidates with a nonempty anchor rectangle, scored by a cheap bound.
    let outer_last = outer.last_step();
    let mut candidates = Vec::new();
    let mut r = [0usize; MAX_DIM];
    let r = &mut r[..d];
    let mut rank = 0;
    loop {
        outer.fill(r, o);
        let (s_anchor, c_anchor) = stats(o, anchor);
        if c_anchor > 0 && sign * s_anchor / c_anchor as f64 > best {
            candidates.push(Candidate {
                bound: sign * s_anchor / c_anchor as f64,
                rank,
                refined: false,
            });
        }
        rank += 1;
        if !odometer(r, zero, &outer_last) {
            break;
        }
    }
    let mut heap = BinaryHeap::from(candidates);

    let inner_last = inner.last_step();
    let innermost = &inner.offs[d - 1][..];
    let mut killers: Vec<Vec<usize>> = Vec::with_capacity(KILLER_SLOTS);
    let mut argmin = vec![0; d];
    let mut i_idx = [0usize; MAX_DIM];
    let i_idx = &mut i_idx[..d];
    'outer: while let Some(c) = heap.pop() {
        if c.bound <= best {
            break;
        }
        outer.decode(c.rank, o);
        if !c.refined {
            let bound = c.bound.min(value(o, far));
            if bound < c.bound {
                heap.push(Candidate {
                    bound,
                    rank: c.rank,
                    refined: true,
                });
                continue;
            }
        }
        for k in &killers {
            if value(o, k) <= best {
                continue 'outer;
            }
        }
        let mut local = f64::INFINITY;
        i_idx.fill(0);
        loop {
            inner.fill(i_idx, i_off);
            for &last in innermost {
                i_off[d - 1] = last;
                let v = value(o, i_off);
                if v < local {
                    local = v;
                    if local <= best {
                        remember(&mut killers, i_off);
                        continue 'outer;
                    }
                    argmin.copy_from_slice(i_off);
                }
            }
            if !odometer(&mut i_idx[..d - 1], &zero[..d - 1], &inner_last[..d - 1]) {
                break;
            }
        }
        best = local;
        remember(&mut killers, &argmin);
    }
    sign * best
}

fn remember(killers: &mut Vec<Vec<usize>>, corner: &[usize]) {
    if let Some(pos) = killers.iter().position(|k| k == corner) {
        let k = killers.remove(pos);
        killers.insert(0, k);
        return;
    }
    if killers.len() == KILLER_SLOTS {
        killers.pop();
    }
    killers.insert(0, corner.to_vec());
}

/// Lower estimate at a single point.
pub fn lower_estimate(ra: &RectAverager, x: &[f64]) -> Result<f64> {
    IsotonicEstimator::from_averager(ra.clone()).lower(x)
}

/// Upper estimate at a single point.
pub fn upper_estimate(ra: &RectAverager, x: &[f64]) -> Result<f64> {
    IsotonicEstimator::from_averager(ra.clone()).upper(x)
}

/// Fits all three surfaces on `grid`.
pub fn fit_grid(data: &Dataset, grid: &QueryGrid) -> Result<IsotonicFit> {
    IsotonicEstimator::new(data)?.fit(grid)
}

/// Lower, upper and midpoint surfaces on a rectangular grid.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotonicFit {
    pub grid: QueryGrid,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub mid: Vec<f64>,
}

impl IsotonicFit {
    pub fn from_bounds(grid: QueryGrid, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != grid.len() || upper.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: lower.len().min(upper.len()),
            });
        }
        let mid = lower
            .iter()
            .zip(&upper)
            .map(|(l, u)| 0.5 * (l + u))
            .collect();
        Ok(Self {
            grid,
            lower,
            upper,
            mid,
        })
    }

    pub fn len(&self) -> usize {
        self.mid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mid.is_empty()
    }

    /// Checks `lower <= mid <= upper` and isotonicity of all three surfaces.
    pub fn verify(&self) -> Result<()> {
        let slack = |v: f64| INVARIANT_SLACK * v.abs().max(1.0);
        for g in 0..self.len() {
            let (l, m, u) = (self.lower[g], self.mid[g], self.upper[g]);
            if !(l <= m + slack(m) && m <= u + slack(u)) {
                return Err(Error::Invariant(format!(
                    "sandwich fails at {:?}: lower {l}, mid {m}, upper {u}",
                    self.grid.point(g)
                )));
            }
        }
        let shape = self.grid.shape();
        for (name, surface) in [
            ("lower", &self.lower),
            ("upper", &self.upper),
            ("mid", &self.mid),
        ] {
            if let Some((g, h)) = isotonic_violation(&shape, surface, INVARIANT_SLACK) {
                return Err(Error::Invariant(format!(
                    "{name} surface decreases from {:?} ({}) to {:?} ({})",
                    self.grid.point(g),
                    surface[g],
                    self.grid.point(h),
                    surface[h]
                )));
            }
        }
        Ok(())
    }

    /// Index of the grid point nearest to `x` after scaling every axis to unit span.
    /// Ties go to the lexicographically smaller grid index.
    pub fn nearest(&self, x: &[f64]) -> Result<usize> {
        if self.is_empty() {
            return Err(Error::EmptyGrid("fit has no grid points".into()));
        }
        if x.len() != self.grid.d() {
            return Err(Error::DimensionMismatch {
                expected: self.grid.d(),
                got: x.len(),
            });
        }
        // Squared distance is separable, so per-axis nearest (smallest index on ties)
        // is the lexicographically first global minimizer.
        let idx: Vec<usize> = self
            .grid
            .axes()
            .iter()
            .zip(x)
            .map(|(axis, v)| {
                let mut best = 0;
                let mut best_d = f64::INFINITY;
                for (k, a) in axis.iter().enumerate() {
                    let dist = (a - v).abs();
                    if dist < best_d {
                        best_d = dist;
                        best = k;
                    }
                }
                best
            })
            .collect();
        Ok(self.grid.shape().flat(&idx))
    }

    pub fn write_csv(&self, path: impl AsRef<Path>, names: &[String]) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path)?;
        let mut header: Vec<String> = names.to_vec();
        header.extend(["lower", "upper", "mid"].map(String::from));
        w.write_record(&header)?;
        for g in 0..self.len() {
            let mut rec: Vec<String> = self.grid.point(g).into_iter().map(fmt_f64).collect();
            rec.extend([self.lower[g], self.upper[g], self.mid[g]].map(fmt_f64));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    /// Reads a fit written by [`Self::write_csv`]; returns the fit and covariate names.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<(Self, Vec<String>)> {
        let path = path.as_ref();
        let mut rdr = csv::Reader::from_path(path)?;
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if header.len() < 4 || header[header.len() - 3..] != ["lower", "upper", "mid"] {
            return Err(Error::Schema(
                "fit file must end with columns lower,upper,mid".into(),
            ));
        }
        let d = header.len() - 3;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .enumerate()
                .map(|(c, v)| {
                    v.trim().parse::<f64>().map_err(|_| Error::Parse {
                        row: i + 1,
                        column: header[c].clone(),
                        value: v.to_string(),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        let axes: Vec<Vec<f64>> = (0..d)
            .map(|j| {
                let mut a: Vec<f64> = rows.iter().map(|r| r[j]).collect();
                a.sort_by(f64::total_cmp);
                a.dedup();
                a
            })
            .collect();
        let grid = QueryGrid::new(axes)?;
        if grid.len() != rows.len() {
            return Err(Error::Schema(
                "fit rows do not form a full rectangular grid".into(),
            ));
        }
        let shape = grid.shape();
        let mut lower = vec![f64::NAN; grid.len()];
        let mut upper = vec![f64::NAN; grid.len()];
        let mut mid = vec![f64::NAN; grid.len()];
        for r in &rows {
            let idx: Vec<usize> = (0..d)
                .map(|j| grid.axes()[j].partition_point(|v| *v < r[j]))
                .collect();
            let g = shape.flat(&idx);
            lower[g] = r[d];
            upper[g] = r[d + 1];
            mid[g] = r[d + 2];
        }
        if mid.iter().any(|v| v.is_nan()) {
            return Err(Error::Schema(
                "fit rows do not form a full rectangular grid".into(),
            ));
        }
        let names = header[..d].to_vec();
        Ok((
            Self {
                grid,
                lower,
                upper,
                mid,
            },
            names,
        ))
    }
}

/// First pair of axis-neighbours `(g, h)` with `g <= h` but `values[g] > values[h]`.
/// On a product grid, checking axis neighbours covers the whole componentwise order.
pub fn isotonic_violation(shape: &Shape, values: &[f64], rel_slack: f64) -> Option<(usize, usize)> {
    for g in 0..shape.len() {
        let idx = shape.unravel(g);
        for j in 0..idx.len() {
            if idx[j] + 1 < shape.dims()[j] {
                let h = g + shape.strides()[j];
                let slack = rel_slack * values[h].abs().max(1.0);
                if !(values[g] <= values[h] + slack) {
                    return Some((g, h));
                }
            }
        }
    }
    None
}

/// Midpoint value at the grid point nearest to `x`.
pub fn predict(fit: &IsotonicFit, x: &[f64]) -> Result<f64> {
    Ok(fit.mid[fit.nearest(x)?])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::DimKind;

    fn ds1(x: &[f64], y: &[f64]) -> Dataset {
        Dataset::new(y.to_vec(), x.to_vec(), vec![DimKind::Continuous]).unwrap()
    }

    #[test]
    fn one_d_pooled_pair() {
        let est = IsotonicEstimator::new(&ds1(&[0.1, 0.5, 0.9], &[2.0, 1.0, 3.0])).unwrap();
        assert_eq!(est.lower(&[0.5]).unwrap(), 1.5);
        assert_eq!(est.upper(&[0.5]).unwrap(), 1.5);
        assert_eq!(est.lower(&[0.1]).unwrap(), 1.5);
        assert_eq!(est.lower(&[0.9]).unwrap(), 3.0);
    }

    #[test]
    fn between_observations_lower_and_upper_take_neighbours() {
        let est = IsotonicEstimator::new(&ds1(&[0.1, 0.5, 0.9], &[2.0, 1.0, 3.0])).unwrap();
        assert_eq!(est.lower(&[0.7]).unwrap(), 1.5);
        assert_eq!(est.upper(&[0.7]).unwrap(), 3.0);
    }

    #[test]
    fn constant_responses() {
        let ds = Dataset::new(
            vec![4.0; 5],
            vec![0.1, 0.9, 0.4, 0.2, 0.7, 0.7, 0.3, 0.5, 0.8, 0.1],
            vec![DimKind::Continuous; 2],
        )
        .unwrap();
        let est = IsotonicEstimator::new(&ds).unwrap();
        for x in [[0.5, 0.5], [0.8, 0.9], [0.2, 0.3]] {
            if est.is_estimable(&x) {
                assert_eq!(est.lower(&x).unwrap(), 4.0);
                assert_eq!(est.upper(&x).unwrap(), 4.0);
            }
        }
    }

    #[test]
    fn single_observation() {
        let ds = Dataset::new(vec![7.5], vec![0.3, 0.6], vec![DimKind::Continuous; 2]).unwrap();
        let est = IsotonicEstimator::new(&ds).unwrap();
        assert_eq!(est.lower(&[0.3, 0.6]).unwrap(), 7.5);
        assert_eq!(est.upper(&[0.3, 0.6]).unwrap(), 7.5);
        assert!(matches!(
            est.lower(&[0.4, 0.6]),
            Err(Error::NotEstimable { .. })
        ));
    }

    #[test]
    fn sandwich_holds_where_empty_skipping_fails() {
        // With empty rectangles merely skipped this configuration yields lower = 5 > upper = -5.
        let ds = Dataset::new(
            vec![0.0, 0.0, 10.0, -10.0],
            vec![-1.0, -1.0, 1.0, 1.0, -1.0, 1.0, 1.0, -1.0],
            vec![DimKind::Continuous; 2],
        )
        .unwrap();
        let est = IsotonicEstimator::new(&ds).unwrap();
        let (l, u) = (
            est.lower(&[0.0, 0.0]).unwrap(),
            est.upper(&[0.0, 0.0]).unwrap(),
        );
        assert!(l <= u, "lower {l} upper {u}");
    }

    #[test]
    fn fit_rejects_points_outside_span() {
        let ds = ds1(&[0.2, 0.4], &[1.0, 2.0]);
        let grid = QueryGrid::new(vec![vec![0.1, 0.3]]).unwrap();
        match fit_grid(&ds, &grid) {
            Err(Error::NotEstimable { points }) => assert_eq!(points, vec![vec![0.1]]),
            other => panic!("expected not-estimable, got {other:?}"),
        }
    }

    #[test]
    fn fit_reproduces_monotone_data() {
        let x: Vec<f64> = (0..20).map(|i| i as f64 / 19.0).collect();
        let ds = ds1(&x, &x);
        let grid = QueryGrid::new(vec![x.clone()]).unwrap();
        let fit = fit_grid(&ds, &grid).unwrap();
        for (m, v) in fit.mid.iter().zip(&x) {
            assert!((m - v).abs() < 1e-12);
        }
    }

    #[test]
    fn predict_ties_go_to_smaller_index() {
        let grid = QueryGrid::new(vec![vec![0.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let fit =
            IsotonicFit::from_bounds(grid, vec![1.0, 2.0, 3.0, 4.0], vec![1.0, 2.0, 3.0, 4.0])
                .unwrap();
        assert_eq!(predict(&fit, &[1.0, 0.0]).unwrap(), 3.0);
        assert_eq!(predict(&fit, &[0.5, 0.5]).unwrap(), 1.0);
        assert_eq!(predict(&fit, &[0.5, 0.9]).unwrap(), 2.0);
    }

    #[test]
    fn verify_flags_injected_violation() {
        let grid = QueryGrid::new(vec![vec![0.0, 1.0]]).unwrap();
        let fit = IsotonicFit::from_bounds(grid, vec![2.0, 1.0], vec![2.0, 1.0]).unwrap();
        assert!(fit.verify().unwrap_err().is_invariant());
    }
}
