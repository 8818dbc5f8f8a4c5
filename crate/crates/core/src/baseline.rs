//! Reference isotonic least-squares fits.
//!
//! [`pava`] is the exact one-dimensional projection. [`dykstra_isotonic`] projects onto
//! the intersection of the per-axis monotone cones by cycling chain-wise PAVA with
//! Dykstra's correction terms.

use std::collections::BTreeMap;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::grid::QueryGrid;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct PavaBlock {
    pub start: usize,
    /// Exclusive.
    pub end: usize,
    pub mean: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PavaFit {
    /// Sorted distinct covariates, or positions `0..n` when fitted from a bare sequence.
    pub x: Vec<f64>,
    pub fitted: Vec<f64>,
    pub blocks: Vec<PavaBlock>,
}

/// Weighted L2 projection of `y` onto nondecreasing sequences.
pub fn pava(y: &[f64], w: &[f64]) -> Result<PavaFit> {
    if y.is_empty() {
        return Err(Error::EmptyDataset("pava needs at least one value".into()));
    }
    if y.len() != w.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            got: w.len(),
        });
    }
    if let Some(i) = w.iter().position(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "weight at position {i} is not positive"
        )));
    }
    // Each stack entry: (start, weighted sum, total weight).
    let mut stack: Vec<(usize, f64, f64)> = Vec::with_capacity(y.len());
    for (i, (&yi, &wi)) in y.iter().zip(w).enumerate() {
        let mut cur = (i, yi * wi, wi);
        while let Some(&(s, sy, sw)) = stack.last() {
            if sy / sw >= cur.1 / cur.2 {
                stack.pop();
                cur = (s, sy + cur.1, sw + cur.2);
            } else {
                break;
            }
        }
        stack.push(cur);
    }
    let mut blocks = Vec::with_capacity(stack.len());
    let mut fitted = vec![0.0; y.len()];
    for (b, &(start, sy, sw)) in stack.iter().enumerate() {
        let end = stack.get(b + 1).map_or(y.len(), |next| next.0);
        let mean = sy / sw;
        fitted[start..end].fill(mean);
        blocks.push(PavaBlock {
            start,
            end,
            mean,
            weight: sw,
        });
    }
    Ok(PavaFit {
        x: (0..y.len()).map(|i| i as f64).collect(),
        fitted,
        blocks,
    })
}

/// Sorts by `x`, merges tied covariates (weights become counts) and runs [`pava`].
pub fn isotonic_1d(x: &[f64], y: &[f64]) -> Result<PavaFit> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    let mut ws: Vec<f64> = Vec::new();
    for i in order {
        if xs.last() == Some(&x[i]) {
            let k = ys.len() - 1;
            ys[k] += y[i];
            ws[k] += 1.0;
        } else {
            xs.push(x[i]);
            ys.push(y[i]);
            ws.push(1.0);
        }
    }
    let means: Vec<f64> = ys.iter().zip(&ws).map(|(s, w)| s / w).collect();
    let mut fit = pava(&means, &ws)?;
    fit.x = xs;
    Ok(fit)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DykstraFit {
    /// Fitted value at every input row, in row order.
    pub fitted: Vec<f64>,
    pub iterations: usize,
    /// Largest decrease between chain neighbours at exit.
    pub residual_gap: f64,
    /// Largest change of any fitted value over the last sweep.
    pub last_change: f64,
    /// `0.5 * sum w x^2` after each sweep; the dual objective, non-increasing.
    pub dual_objective: Vec<f64>,
}

struct Solved {
    x: Vec<f64>,
    sweeps: usize,
    gap: f64,
    moved: f64,
    trace: Vec<f64>,
}

/// Distinct design points with their weights, targets and axis chains.
struct Design {
    weights: Vec<f64>,
    targets: Vec<f64>,
    /// `chains[axis]` lists index chains sorted along that axis.
    chains: Vec<Vec<Vec<usize>>>,
}

fn key(v: f64) -> u64 {
    // Map -0.0 and 0.0 to the same key; order is irrelevant here.
    (v + 0.0).to_bits()
}

impl Design {
    fn new(points: &[Vec<f64>], y: &[f64]) -> (Self, Vec<usize>) {
        let d = points.first().map_or(0, Vec::len);
        let mut index: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
        let mut coords: Vec<Vec<f64>> = Vec::new();
        let mut sums: Vec<f64> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        let mut row_cell = Vec::with_capacity(points.len());
        for (p, &yi) in points.iter().zip(y) {
            let k: Vec<u64> = p.iter().map(|v| key(*v)).collect();
            let id = *index.entry(k).or_insert_with(|| {
                coords.push(p.clone());
                sums.push(0.0);
                weights.push(0.0);
                coords.len() - 1
            });
            sums[id] += yi;
            weights[id] += 1.0;
            row_cell.push(id);
        }
        let targets = sums.iter().zip(&weights).map(|(s, w)| s / w).collect();
        let chains = (0..d)
            .map(|axis| {
                let mut groups: BTreeMap<Vec<u64>, Vec<usize>> = BTreeMap::new();
                for (id, c) in coords.iter().enumerate() {
                    let rest: Vec<u64> = c
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != axis)
                        .map(|(_, v)| key(*v))
                        .collect();
                    groups.entry(rest).or_default().push(id);
                }
                groups
                    .into_values()
                    .filter(|g| g.len() > 1)
                    .map(|mut g| {
                        g.sort_by(|&a, &b| coords[a][axis].total_cmp(&coords[b][axis]));
                        g
                    })
                    .collect()
            })
            .collect();
        (
            Self {
                weights,
                targets,
                chains,
            },
            row_cell,
        )
    }

    fn gap(&self, x: &[f64]) -> f64 {
        self.chains
            .iter()
            .flatten()
            .flat_map(|c| c.windows(2).map(|w| x[w[0]] - x[w[1]]))
            .fold(0.0, f64::max)
    }

    fn project_axis(&self, axis: usize, z: &[f64], out: &mut [f64]) -> Result<()> {
        out.copy_from_slice(z);
        for chain in &self.chains[axis] {
            let zs: Vec<f64> = chain.iter().map(|&i| z[i]).collect();
            let ws: Vec<f64> = chain.iter().map(|&i| self.weights[i]).collect();
            let fit = pava(&zs, &ws)?;
            for (&i, v) in chain.iter().zip(fit.fitted) {
                out[i] = v;
            }
        }
        Ok(())
    }

    /// Stops once both the order violation and the per-sweep change are within `tol`.
    fn solve(&self, tol: f64, max_iter: usize) -> Result<Solved> {
        let m = self.targets.len();
        let d = self.chains.len();
        let mut x = self.targets.clone();
        let mut incr = vec![vec![0.0; m]; d];
        let mut z = vec![0.0; m];
        let mut next = vec![0.0; m];
        let mut trace = Vec::new();
        let mut gap = f64::INFINITY;
        for sweep in 1..=max_iter {
            let before = x.clone();
            for axis in 0..d {
                for i in 0..m {
                    z[i] = x[i] + incr[axis][i];
                }
                self.project_axis(axis, &z, &mut next)?;
                for i in 0..m {
                    incr[axis][i] = z[i] - next[i];
                }
                std::mem::swap(&mut x, &mut next);
            }
            trace.push(
                0.5 * x
                    .iter()
                    .zip(&self.weights)
                    .map(|(v, w)| w * v * v)
                    .sum::<f64>(),
            );
            let moved = x
                .iter()
                .zip(&before)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            gap = self.gap(&x);
            if gap <= tol && moved <= tol {
                return Ok(Solved {
                    x,
                    sweeps: sweep,
                    gap,
                    moved,
                    trace,
                });
            }
            gap = gap.max(moved);
        }
        Err(Error::NoConvergence {
            iterations: max_iter,
            gap,
        })
    }
}

/// Isotonic least squares at the observation points over the per-axis chain order.
///
/// Rows sharing a covariate vector are pooled. Chains along axis `j` link points that
/// agree on every other coordinate; on a complete grid this is the full componentwise
/// order.
pub fn dykstra_isotonic(data: &Dataset, tol: f64, max_iter: usize) -> Result<DykstraFit> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let points: Vec<Vec<f64>> = (0..data.n()).map(|t| data.row(t).to_vec()).collect();
    let (design, row_cell) = Design::new(&points, data.responses());
    let s = design.solve(tol, max_iter)?;
    Ok(DykstraFit {
        fitted: row_cell.iter().map(|&c| s.x[c]).collect(),
        iterations: s.sweeps,
        residual_gap: s.gap,
        last_change: s.moved,
        dual_objective: s.trace,
    })
}

/// Dykstra fit on observations snapped to a grid, extended to every grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct GridBaseline {
    pub grid: QueryGrid,
    /// Value at each grid point (row-major).
    pub values: Vec<f64>,
    pub occupied: Vec<bool>,
    pub iterations: usize,
    pub residual_gap: f64,
}

/// Snaps every observation to its nearest grid point (ties to the smaller index), fits
/// [`dykstra_isotonic`] on the occupied cells and fills each grid point with the
/// midpoint of the largest fitted value below it and the smallest fitted value above it.
pub fn dykstra_on_grid(
    data: &Dataset,
    grid: &QueryGrid,
    tol: f64,
    max_iter: usize,
) -> Result<GridBaseline> {
    if data.d() != grid.d() {
        return Err(Error::DimensionMismatch {
            expected: grid.d(),
            got: data.d(),
        });
    }
    let shape = grid.shape();
    let snapped_idx: Vec<Vec<usize>> = (0..data.n())
        .map(|t| {
            data.row(t)
                .iter()
                .zip(grid.axes())
                .map(|(v, axis)| nearest_index(axis, *v))
                .collect()
        })
        .collect();
    let snapped: Vec<Vec<f64>> = snapped_idx.iter().map(|i| grid.point_at(i)).collect();
    let snapped_data = Dataset::new(
        data.responses().to_vec(),
        snapped.concat(),
        vec![crate::dataset::DimKind::Continuous; grid.d()],
    )?;
    let fit = dykstra_isotonic(&snapped_data, tol, max_iter)?;

    let mut cell_value: Vec<Option<f64>> = vec![None; shape.len()];
    for (idx, v) in snapped_idx.iter().zip(&fit.fitted) {
        cell_value[shape.flat(idx)] = Some(*v);
    }
    let cells: Vec<(Vec<usize>, f64)> = cell_value
        .iter()
        .enumerate()
        .filter_map(|(g, v)| v.map(|v| (shape.unravel(g), v)))
        .collect();
    let values = (0..shape.len())
        .map(|g| {
            let gi = shape.unravel(g);
            let mut below = f64::NEG_INFINITY;
            let mut above = f64::INFINITY;
            for (c, v) in &cells {
                if c.iter().zip(&gi).all(|(a, b)| a <= b) {
                    below = below.max(*v);
                }
                if c.iter().zip(&gi).all(|(a, b)| a >= b) {
                    above = above.min(*v);
                }
            }
            match (below.is_finite(), above.is_finite()) {
                (true, true) => 0.5 * (below + above),
                (true, false) => below,
                (false, true) => above,
                (false, false) => f64::NAN,
            }
        })
        .collect();
    Ok(GridBaseline {
        grid: grid.clone(),
        values,
        occupied: cell_value.iter().map(Option::is_some).collect(),
        iterations: fit.iterations,
        residual_gap: fit.residual_gap,
    })
}

/// Index of the axis point nearest to `v`; ties go to the smaller index.
pub(crate) fn nearest_index(axis: &[f64], v: f64) -> usize {
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
}
