//! Bandwidth, boxes, occupancy and interior domains.
//!
//! Continuous dimensions are cut at empirical marginal quantiles, which stand in for
//! the unknown rescaling functions `G_i^{-1}`. Trend dimensions are cut at `k/M` and
//! discrete dimensions keep their observed levels.

use serde::Serialize;

use crate::dataset::{Dataset, DimKind};
use crate::error::{Error, Result};
use crate::grid::{odometer, QueryGrid, Shape};

/// `M = floor(n^{1/(d+2)})` and `h = 1/M`. With no smoothed dimension `M = 1`.
pub fn bandwidth(n: usize, d_continuous: usize) -> (usize, f64) {
    if d_continuous == 0 || n <= 1 {
        return (1, 1.0);
    }
    let p = (d_continuous + 2) as u32;
    let mut m = (n as f64).powf(1.0 / p as f64).floor() as u128;
    let n = n as u128;
    // Correct floating error so that m^p <= n < (m+1)^p.
    while m > 1 && m.checked_pow(p).is_none_or(|v| v > n) {
        m -= 1;
    }
    while (m + 1).checked_pow(p).is_some_and(|v| v <= n) {
        m += 1;
    }
    let m = m.max(1) as usize;
    (m, 1.0 / m as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeSpec {
    /// Breakpoints for smoothed dimensions (`M + 1` values), observed levels for discrete ones.
    pub breaks: Vec<Vec<f64>>,
    pub m: usize,
    pub h: f64,
    pub kinds: Vec<DimKind>,
    pub n: usize,
}

/// Lower-interpolated empirical quantile of sorted data at level `k/m`.
fn lower_quantile(sorted: &[f64], k: usize, m: usize) -> f64 {
    sorted[k * (sorted.len() - 1) / m]
}

pub fn build_lattice(data: &Dataset) -> Result<LatticeSpec> {
    let (m, h) = bandwidth(data.n(), data.d_continuous());
    let mut breaks = Vec::with_capacity(data.d());
    for (j, kind) in data.kinds().iter().enumerate() {
        let mut col: Vec<f64> = data.column(j).collect();
        col.sort_by(f64::total_cmp);
        let b = match kind {
            DimKind::Discrete => {
                col.dedup();
                col
            }
            DimKind::Trend => (0..=m).map(|k| k as f64 / m as f64).collect(),
            DimKind::Continuous => {
                let mut distinct = col.clone();
                distinct.dedup();
                if distinct.len() < m + 1 {
                    return Err(Error::DegenerateLattice {
                        dim: j,
                        reason: format!(
                            "{} distinct value(s), need at least {} for M = {m}",
                            distinct.len(),
                            m + 1
                        ),
                    });
                }
                let b: Vec<f64> = (0..=m).map(|k| lower_quantile(&col, k, m)).collect();
                if b.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::DegenerateLattice {
                        dim: j,
                        reason: "tied quantile breakpoints".into(),
                    });
                }
                b
            }
        };
        breaks.push(b);
    }
    Ok(LatticeSpec {
        breaks,
        m,
        h,
        kinds: data.kinds().to_vec(),
        n: data.n(),
    })
}

impl LatticeSpec {
    pub fn d(&self) -> usize {
        self.kinds.len()
    }

    pub fn d_continuous(&self) -> usize {
        self.kinds.iter().filter(|k| k.is_smoothed()).count()
    }

    /// Boxes per dimension: `M` for smoothed dimensions, the level count for discrete ones.
    pub fn box_shape(&self) -> Shape {
        Shape::new(
            self.kinds
                .iter()
                .zip(&self.breaks)
                .map(|(k, b)| if k.is_smoothed() { self.m } else { b.len() })
                .collect(),
        )
    }

    /// 0-based box index along `dim`. Boxes are right-closed; the first one also
    /// takes its left endpoint and values beyond the outer breakpoints are clamped.
    /// Unknown discrete levels yield `None`.
    pub fn bin(&self, dim: usize, v: f64) -> Option<usize> {
        let b = &self.breaks[dim];
        if self.kinds[dim].is_smoothed() {
            let below = b.partition_point(|u| *u < v);
            Some(below.clamp(1, self.m) - 1)
        } else {
            b.iter().position(|u| *u == v)
        }
    }

    /// Interval `(lo, hi]` of a smoothed box.
    pub fn box_bounds(&self, dim: usize, k: usize) -> (f64, f64) {
        (self.breaks[dim][k], self.breaks[dim][k + 1])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OccupancyTable {
    pub dims: Vec<usize>,
    pub counts: Vec<usize>,
    pub threshold: f64,
    pub passed: bool,
}

/// Box counts and the regularity event `#{t : I_t in B_k} >= c n^{2/(d_2+2)}` for all `k`.
pub fn occupancy(data: &Dataset, lattice: &LatticeSpec, c: f64) -> Result<OccupancyTable> {
    if !(c > 0.0) {
        return Err(Error::InvalidArgument(
            "occupancy constant must be positive".into(),
        ));
    }
    if data.d() != lattice.d() {
        return Err(Error::DimensionMismatch {
            expected: lattice.d(),
            got: data.d(),
        });
    }
    let shape = lattice.box_shape();
    let mut counts = vec![0usize; shape.len()];
    let mut idx = vec![0; data.d()];
    'rows: for t in 0..data.n() {
        for (j, v) in data.row(t).iter().enumerate() {
            match lattice.bin(j, *v) {
                Some(k) => idx[j] = k,
                None => continue 'rows,
            }
        }
        counts[shape.flat(&idx)] += 1;
    }
    let exponent = 2.0 / (lattice.d_continuous() + 2) as f64;
    let threshold = c * (data.n() as f64).powf(exponent);
    let passed = counts.iter().all(|&k| k as f64 >= threshold);
    Ok(OccupancyTable {
        dims: shape.dims().to_vec(),
        counts,
        threshold,
        passed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxMask {
    pub dims: Vec<usize>,
    pub mask: Vec<bool>,
    pub warning: Option<String>,
}

impl BoxMask {
    pub fn selected(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }
}

/// Boxes with `1 < k_i < M` on every smoothed dimension; all discrete levels are kept.
pub fn interior_domain(lattice: &LatticeSpec) -> BoxMask {
    let shape = lattice.box_shape();
    let warning = (lattice.d_continuous() > 0 && lattice.m < 3).then(|| {
        let msg = format!("M = {} leaves no interior boxes", lattice.m);
        log::warn!("{msg}");
        msg
    });
    let mask =
        (0..shape.len())
            .map(|f| {
                shape.unravel(f).iter().enumerate().all(|(j, &k)| {
                    !lattice.kinds[j].is_smoothed() || (k >= 1 && k + 2 <= lattice.m)
                })
            })
            .collect();
    BoxMask {
        dims: shape.dims().to_vec(),
        mask,
        warning,
    }
}

/// Machine-readable lattice description.
#[derive(Debug, Clone, Serialize)]
pub struct LatticeSummary {
    pub kinds: Vec<DimKind>,
    pub breakpoints: Vec<Vec<f64>>,
    #[serde(rename = "M")]
    pub m: usize,
    pub h: f64,
    pub occupancy_c: f64,
    pub box_dims: Vec<usize>,
    pub counts: Vec<usize>,
    pub threshold: f64,
    pub passed: bool,
}

impl LatticeSummary {
    pub fn new(lattice: &LatticeSpec, occ: &OccupancyTable, c: f64) -> Self {
        Self {
            kinds: lattice.kinds.clone(),
            breakpoints: lattice.breaks.clone(),
            m: lattice.m,
            h: lattice.h,
            occupancy_c: c,
            box_dims: occ.dims.clone(),
            counts: occ.counts.clone(),
            threshold: occ.threshold,
            passed: occ.passed,
        }
    }
}

/// Exact integer prefix counts over a small d-dimensional index space.
struct CountTable {
    shape: Shape,
    prefix: Vec<i64>,
}

impl CountTable {
    /// `dims[i]` is the extent of position space along axis `i`.
    fn new(dims: &[usize], points: impl Iterator<Item = Vec<usize>>) -> Self {
        let shape = Shape::new(dims.iter().map(|d| d + 1).collect());
        let mut prefix = vec![0i64; shape.len()];
        for p in points {
            let shifted: Vec<usize> = p.iter().map(|v| v + 1).collect();
            prefix[shape.flat(&shifted)] += 1;
        }
        for axis in 0..dims.len() {
            let stride = shape.strides()[axis];
            let extent = shape.dims()[axis];
            for f in 0..shape.len() {
                if (f / stride) % extent != 0 {
                    prefix[f] += prefix[f - stride];
                }
            }
        }
        Self { shape, prefix }
    }

    /// Number of points with `lo <= p <= hi` componentwise.
    fn count(&self, lo: &[usize], hi: &[usize]) -> i64 {
        let d = lo.len();
        let mut total = 0;
        let mut corner = vec![0; d];
        for mask in 0..1usize << d {
            for i in 0..d {
                corner[i] = if mask >> i & 1 == 1 { lo[i] } else { hi[i] + 1 };
            }
            let v = self.prefix[self.shape.flat(&corner)];
            if mask.count_ones() % 2 == 1 {
                total -= v;
            } else {
                total += v;
            }
        }
        total
    }
}

/// Result of [`trim_to_data`]: the retained sub-grid and where it sits in the original.
#[derive(Debug, Clone, PartialEq)]
pub struct TrimmedGrid {
    pub grid: QueryGrid,
    pub lo: Vec<usize>,
    pub hi: Vec<usize>,
    /// Observations inside the closed rectangle spanned by the retained grid.
    pub observations: usize,
}

/// Largest sub-grid on which every point has an observation weakly below and weakly above it.
///
/// Candidates are boxes `[l, u]` of grid indices whose points all satisfy that condition
/// (equivalently: `l` has data below, `u` has data above). The box holding the most
/// observations wins; ties go to more grid points, then to the lexicographically smallest
/// lower corner, then upper corner.
pub fn trim_to_data(grid: &QueryGrid, data: &Dataset) -> Result<TrimmedGrid> {
    if data.d() != grid.d() {
        return Err(Error::DimensionMismatch {
            expected: grid.d(),
            got: data.d(),
        });
    }
    let d = grid.d();
    let sizes: Vec<usize> = grid.axes().iter().map(Vec::len).collect();
    // Position of a coordinate relative to an axis: 2j+1 when on point j, 2j+2 when
    // strictly between j and j+1, 0 below the axis, 2G above it.
    let position = |axis: &[f64], v: f64| -> usize {
        let below = axis.partition_point(|g| *g < v);
        if below < axis.len() && axis[below] == v {
            2 * below + 1
        } else {
            2 * below
        }
    };
    let table = CountTable::new(
        &sizes.iter().map(|g| 2 * g + 1).collect::<Vec<_>>(),
        (0..data.n()).map(|t| {
            data.row(t)
                .iter()
                .zip(grid.axes())
                .map(|(v, a)| position(a, *v))
                .collect()
        }),
    );
    let top: Vec<usize> = sizes.iter().map(|g| 2 * g).collect();
    let zero = vec![0; d];
    let pos = |idx: &[usize]| -> Vec<usize> { idx.iter().map(|i| 2 * i + 1).collect() };
    let has_below = |idx: &[usize]| table.count(&zero, &pos(idx)) > 0;
    let has_above = |idx: &[usize]| table.count(&pos(idx), &top) > 0;

    let shape = grid.shape();
    let lowers: Vec<bool> = (0..shape.len())
        .map(|g| has_below(&shape.unravel(g)))
        .collect();
    let uppers: Vec<bool> = (0..shape.len())
        .map(|g| has_above(&shape.unravel(g)))
        .collect();

    let last: Vec<usize> = sizes.iter().map(|g| g - 1).collect();
    let mut best: Option<(i64, usize, Vec<usize>, Vec<usize>)> = None;
    for l in 0..shape.len() {
        if !lowers[l] {
            continue;
        }
        let l_idx = shape.unravel(l);
        let mut u_idx = l_idx.clone();
        loop {
            if uppers[shape.flat(&u_idx)] {
                let obs = table.count(&pos(&l_idx), &pos(&u_idx));
                let points: usize = l_idx.iter().zip(&u_idx).map(|(a, b)| b - a + 1).product();
                let better = match &best {
                    None => true,
                    Some((bo, bp, _, _)) => (obs, points) > (*bo, *bp),
                };
                if better {
                    best = Some((obs, points, l_idx.clone(), u_idx.clone()));
                }
            }
            if !odometer(&mut u_idx, &l_idx, &last) {
                break;
            }
        }
    }
    match best {
        Some((obs, _, lo, hi)) => Ok(TrimmedGrid {
            grid: grid.slice(&lo, &hi)?,
            lo,
            hi,
            observations: obs as usize,
        }),
        None => Err(Error::EmptyGrid(
            "no grid point has observations both below and above it".into(),
        )),
    }
}
