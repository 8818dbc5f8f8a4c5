//! Error functionals and experiments: integrated L1 error, MAPE, convergence-rate sweeps,
//! the lattice-sum inequality and the comparison with the least-squares baseline.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{Binomial, DiscreteCDF};

use crate::baseline::{dykstra_on_grid, nearest_index};
use crate::dataset::{lag_embed, Dataset};
use crate::error::{Error, Result};
use crate::estimator::{predict, IsotonicEstimator, IsotonicFit};
use crate::grid::{QueryGrid, Shape};
use crate::lattice::{build_lattice, interior_domain, trim_to_data, BoxMask, LatticeSpec};
use crate::simulate::{design_stream, poisson_trend_truth, simulate_poisson_trend_with, DgpKind};

/// Share of failed replicates above which an experiment is abandoned.
pub const MAX_FAILURE_SHARE: f64 = 0.10;

/// Default sample sizes of the comparison study; an arbitrary choice, flagged in reports.
pub const DEFAULT_COMPARE_NS: [usize; 2] = [200, 500];

/// How smoothed dimensions are weighted in the integrated error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    /// Box widths in the original coordinates.
    Lebesgue,
    /// `h` per box on quantile-rescaled (continuous) dimensions.
    Nu,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalOptions {
    /// Evaluation points per box along smoothed dimensions (at the sub-box midpoints).
    pub sub: usize,
    pub measure: Measure,
    /// Optional fixed level set per dimension; used for discrete dimensions only.
    pub levels: Vec<Option<Vec<f64>>>,
}

impl EvalOptions {
    pub fn new(d: usize, sub: usize, measure: Measure) -> Self {
        Self {
            sub,
            measure,
            levels: vec![None; d],
        }
    }
}

/// Product grid over a box mask with one quadrature weight per point.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalDomain {
    pub grid: QueryGrid,
    pub weights: Vec<f64>,
    pub mask: Vec<bool>,
}

impl EvalDomain {
    pub fn measure(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.mask)
            .filter(|(_, m)| **m)
            .map(|(w, _)| w)
            .sum()
    }
}

/// Quadrature grid for the boxes selected by `mask`.
///
/// The mask enters through its projection on each axis, which is exact for product
/// masks such as [`interior_domain`]. Discrete dimensions use counting measure.
pub fn eval_domain(
    lattice: &LatticeSpec,
    mask: &BoxMask,
    opts: &EvalOptions,
) -> Result<EvalDomain> {
    let d = lattice.d();
    if opts.levels.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: opts.levels.len(),
        });
    }
    if opts.sub == 0 {
        return Err(Error::InvalidArgument(
            "points per box must be positive".into(),
        ));
    }
    let shape = Shape::new(mask.dims.clone());
    let mut used: Vec<Vec<bool>> = mask.dims.iter().map(|&k| vec![false; k]).collect();
    for (f, &m) in mask.mask.iter().enumerate() {
        if m {
            for (j, k) in shape.unravel(f).into_iter().enumerate() {
                used[j][k] = true;
            }
        }
    }
    let mut axes = Vec::with_capacity(d);
    let mut axis_weights = Vec::with_capacity(d);
    for j in 0..d {
        let (pts, ws): (Vec<f64>, Vec<f64>) = if lattice.kinds[j].is_smoothed() {
            (0..lattice.m)
                .filter(|&k| used[j][k])
                .flat_map(|k| {
                    let (lo, hi) = lattice.box_bounds(j, k);
                    let width = hi - lo;
                    let w = match (opts.measure, lattice.kinds[j]) {
                        (Measure::Nu, crate::dataset::DimKind::Continuous) => lattice.h,
                        _ => width,
                    } / opts.sub as f64;
                    (0..opts.sub).map(move |i| (lo + (i as f64 + 0.5) * width / opts.sub as f64, w))
                })
                .unzip()
        } else {
            match &opts.levels[j] {
                Some(levels) => levels.iter().map(|v| (*v, 1.0)).unzip(),
                None => lattice.breaks[j]
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| used[j][*k])
                    .map(|(_, v)| (*v, 1.0))
                    .unzip(),
            }
        };
        if pts.is_empty() {
            return Err(Error::EmptyDomain(format!(
                "no evaluation points along dimension {j}"
            )));
        }
        axes.push(pts);
        axis_weights.push(ws);
    }
    let grid = QueryGrid::new(axes)?;
    let gshape = grid.shape();
    let weights = (0..grid.len())
        .map(|g| {
            gshape
                .unravel(g)
                .iter()
                .enumerate()
                .map(|(j, &i)| axis_weights[j][i])
                .product()
        })
        .collect();
    Ok(EvalDomain {
        mask: vec![true; grid.len()],
        grid,
        weights,
    })
}

/// Riemann sum of `|mid - f_true|` over the masked grid points.
pub fn integrated_l1(
    fit: &IsotonicFit,
    f_true: impl Fn(&[f64]) -> f64,
    mask: &[bool],
    weights: &[f64],
) -> Result<f64> {
    if mask.len() != fit.len() || weights.len() != fit.len() {
        return Err(Error::DimensionMismatch {
            expected: fit.len(),
            got: mask.len().min(weights.len()),
        });
    }
    if !mask.iter().any(|m| *m) {
        return Err(Error::EmptyDomain("the mask selects no grid point".into()));
    }
    let shape = fit.grid.shape();
    Ok((0..fit.len())
        .filter(|&g| mask[g])
        .map(|g| {
            let x = fit.grid.point_at(&shape.unravel(g));
            (fit.mid[g] - f_true(&x)).abs() * weights[g]
        })
        .sum())
}

/// Mean absolute prediction error.
pub fn mape(predictions: &[f64], observations: &[f64]) -> Result<f64> {
    if predictions.len() != observations.len() {
        return Err(Error::DimensionMismatch {
            expected: observations.len(),
            got: predictions.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::InvalidArgument(
            "mape needs at least one pair".into(),
        ));
    }
    Ok(predictions
        .iter()
        .zip(observations)
        .map(|(p, o)| (p - o).abs())
        .sum::<f64>()
        / predictions.len() as f64)
}

/// Least-squares line `y = intercept + slope * x` with its coefficient of determination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Regresses `log(values)` on `log(ns)`.
pub fn log_log_fit(ns: &[usize], values: &[f64]) -> Result<RateFit> {
    if ns.len() != values.len() || ns.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least two (n, value) pairs".into(),
        ));
    }
    if values.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidArgument(
            "log-log fit needs positive values".into(),
        ));
    }
    let x: Vec<f64> = ns.iter().map(|n| (*n as f64).ln()).collect();
    let y: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument(
            "sample sizes must not all be equal".into(),
        ));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Ok(RateFit {
        slope,
        intercept: my - slope * mx,
        r2,
    })
}

/// Linear-interpolation quantile (type 7) of unsorted data.
pub fn quantile(values: &[f64], p: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    if v.is_empty() {
        return f64::NAN;
    }
    let pos = p * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quartiles {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

impl Quartiles {
    pub fn of(values: &[f64]) -> Self {
        Self {
            q1: quantile(values, 0.25),
            median: quantile(values, 0.5),
            q3: quantile(values, 0.75),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateFailure {
    pub n: usize,
    pub replicate: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRow {
    pub n: usize,
    /// Integrated L1 error per successful replicate, in replicate order.
    pub l1: Vec<f64>,
    pub median_l1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRecord {
    pub seed: u64,
    pub reps: usize,
    pub rows: Vec<RateRow>,
    pub failures: Vec<ReplicateFailure>,
    pub rate: RateFit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateOptions {
    pub eval: EvalOptions,
    pub reps: usize,
    pub seed: u64,
}

/// Integrated L1 error of the midpoint estimator on one replicate.
pub fn replicate_l1(
    kind: &DgpKind,
    n: usize,
    seed: u64,
    replicate: u64,
    opts: &EvalOptions,
) -> Result<f64> {
    let data = kind.sample(n, seed, replicate)?;
    let lattice = build_lattice(&data)?;
    let mask = interior_domain(&lattice);
    let domain = eval_domain(&lattice, &mask, opts)?;
    let fit = IsotonicEstimator::new(&data)?.fit(&domain.grid)?;
    integrated_l1(&fit, |x| kind.truth(n, x), &domain.mask, &domain.weights)
}

/// Median integrated L1 error per sample size and the log-log slope across sizes.
pub fn rate_experiment(kind: &DgpKind, ns: &[usize], opts: &RateOptions) -> Result<RateRecord> {
    let mut distinct = ns.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::InvalidArgument(
            "need at least three distinct sample sizes".into(),
        ));
    }
    if opts.reps < 10 {
        return Err(Error::InvalidArgument(
            "need at least ten replicates".into(),
        ));
    }
    let jobs: Vec<(usize, u64)> = ns
        .iter()
        .flat_map(|&n| (0..opts.reps as u64).map(move |r| (n, r)))
        .collect();
    let results: Vec<Result<f64>> = jobs
        .par_iter()
        .map(|&(n, r)| replicate_l1(kind, n, opts.seed, r, &opts.eval))
        .collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (k, &n) in ns.iter().enumerate() {
        let chunk = &results[k * opts.reps..(k + 1) * opts.reps];
        let mut l1 = Vec::new();
        for (r, res) in chunk.iter().enumerate() {
            match res {
                Ok(v) => l1.push(*v),
                Err(e) if e.is_invariant() => return Err(Error::Invariant(e.to_string())),
                Err(e) => failures.push(ReplicateFailure {
                    n,
                    replicate: r as u64,
                    error: e.to_string(),
                }),
            }
        }
        check_failures(opts.reps - l1.len(), opts.reps)?;
        rows.push(RateRow {
            n,
            median_l1: quantile(&l1, 0.5),
            l1,
        });
    }
    let rate = log_log_fit(
        &rows.iter().map(|r| r.n).collect::<Vec<_>>(),
        &rows.iter().map(|r| r.median_l1).collect::<Vec<_>>(),
    )?;
    Ok(RateRecord {
        seed: opts.seed,
        reps: opts.reps,
        rows,
        failures,
        rate,
    })
}

fn check_failures(failed: usize, total: usize) -> Result<()> {
    if failed as f64 > MAX_FAILURE_SHARE * total as f64 {
        return Err(Error::TooManyFailures { failed, total });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LemmaA1 {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Checks `sum_{0<k_i<M} (f(x_{k+1}) - f(x_{k-1})) <= 2 d M^{d-1} (f(1,..,1) - f(0,..,0))`
/// for values of an isotonic function on the `(M+1)^d` lattice (row-major).
pub fn lemma_a1_check(values: &[f64], m: usize, d: usize) -> Result<LemmaA1> {
    if d == 0 || m == 0 {
        return Err(Error::InvalidArgument("need d >= 1 and M >= 1".into()));
    }
    let shape = Shape::new(vec![m + 1; d]);
    if values.len() != shape.len() {
        return Err(Error::DimensionMismatch {
            expected: shape.len(),
            got: values.len(),
        });
    }
    if let Some((a, b)) = crate::estimator::isotonic_violation(&shape, values, 0.0) {
        return Err(Error::Precondition(format!(
            "values are not isotonic between lattice points {a} and {b}"
        )));
    }
    let ones: usize = shape.strides().iter().sum();
    let mut lhs = 0.0;
    if m >= 2 {
        let lo = vec![1; d];
        let hi = vec![m - 1; d];
        let mut k = lo.clone();
        loop {
            let f = shape.flat(&k);
            lhs += values[f + ones] - values[f - ones];
            if !crate::grid::odometer(&mut k, &lo, &hi) {
                break;
            }
        }
    }
    let rhs =
        2.0 * d as f64 * (m as f64).powi(d as i32 - 1) * (values[shape.len() - 1] - values[0]);
    Ok(LemmaA1 {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-12,
    })
}

/// In-sample prediction errors of both estimators on one series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapeReport {
    pub n: usize,
    pub grid_points: usize,
    pub mape_mid: f64,
    pub mape_baseline: f64,
    pub mape_mean: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BaselineOptions {
    pub grid_size: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for BaselineOptions {
    fn default() -> Self {
        Self {
            grid_size: 21,
            tol: crate::baseline::DEFAULT_TOL,
            max_iter: crate::baseline::DEFAULT_MAX_ITER,
        }
    }
}

/// Both estimators on the equidistant grid protocol, for a lag-1 design with trend.
struct Protocol {
    data: Dataset,
    fit: IsotonicFit,
    /// Baseline values on the full grid.
    baseline: crate::baseline::GridBaseline,
    /// Offset of the trimmed grid inside the full one.
    lo: Vec<usize>,
}

impl Protocol {
    fn run(data: Dataset, opts: &BaselineOptions) -> Result<Self> {
        let full = QueryGrid::equidistant(&data, opts.grid_size)?;
        let trimmed = trim_to_data(&full, &data)?;
        let fit = IsotonicEstimator::new(&data)?.fit(&trimmed.grid)?;
        let baseline = dykstra_on_grid(&data, &full, opts.tol, opts.max_iter)?;
        Ok(Self {
            data,
            fit,
            baseline,
            lo: trimmed.lo,
        })
    }

    /// Baseline value at trimmed-grid point `g`.
    fn baseline_at(&self, g: usize) -> f64 {
        let idx: Vec<usize> = self
            .fit
            .grid
            .shape()
            .unravel(g)
            .iter()
            .zip(&self.lo)
            .map(|(i, o)| i + o)
            .collect();
        self.baseline.values[self.baseline.grid.shape().flat(&idx)]
    }

    fn mape(&self) -> Result<MapeReport> {
        let y = self.data.responses();
        let n = self.data.n();
        let mid = (0..n)
            .map(|t| predict(&self.fit, self.data.row(t)))
            .collect::<Result<Vec<_>>>()?;
        let bshape = self.baseline.grid.shape();
        let base: Vec<f64> = (0..n)
            .map(|t| {
                let idx: Vec<usize> = self
                    .data
                    .row(t)
                    .iter()
                    .zip(self.baseline.grid.axes())
                    .map(|(v, a)| nearest_index(a, *v))
                    .collect();
                self.baseline.values[bshape.flat(&idx)]
            })
            .collect();
        let mean = y.iter().sum::<f64>() / n as f64;
        Ok(MapeReport {
            n,
            grid_points: self.fit.len(),
            mape_mid: mape(&mid, y)?,
            mape_baseline: mape(&base, y)?,
            mape_mean: mape(&vec![mean; n], y)?,
        })
    }

    /// Integrated L1 errors `(mid, baseline)` over the trimmed grid, each point weighted
    /// by the area of one cell of the full grid.
    fn l1(&self, truth: impl Fn(&[f64]) -> f64) -> (f64, f64) {
        let cell: f64 = self
            .baseline
            .grid
            .axes()
            .iter()
            .map(|a| {
                if a.len() > 1 {
                    (a[a.len() - 1] - a[0]) / (a.len() - 1) as f64
                } else {
                    1.0
                }
            })
            .product();
        let mut l1_mid = 0.0;
        let mut l1_base = 0.0;
        for g in 0..self.fit.len() {
            let f = truth(&self.fit.grid.point(g));
            l1_mid += (self.fit.mid[g] - f).abs() * cell;
            l1_base += (self.baseline_at(g) - f).abs() * cell;
        }
        (l1_mid, l1_base)
    }
}

/// MAPE of the midpoint estimator, the baseline and the global mean for a series, using
/// the lag-1 design with trend. The midpoint predicts from the nearest trimmed-grid
/// point, the baseline from the nearest point of the full grid.
pub fn mape_pipeline(series: &[f64], opts: &BaselineOptions) -> Result<MapeReport> {
    Protocol::run(lag_embed(series, 1, true)?, opts)?.mape()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateRecord {
    pub seed: u64,
    pub n: usize,
    pub replicate: u64,
    pub grid_points: usize,
    pub l1_mid: f64,
    pub l1_baseline: f64,
    pub mape_mid: f64,
    pub mape_baseline: f64,
    pub mape_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub n: usize,
    pub replicates: usize,
    pub l1_mid: Quartiles,
    pub l1_baseline: Quartiles,
    pub mape_mid: Quartiles,
    pub mape_baseline: Quartiles,
    /// Replicates with `l1_mid < l1_baseline`.
    pub wins: usize,
    pub losses: usize,
    pub ties: usize,
    /// One-sided sign-test p-value for `l1_mid < l1_baseline`.
    pub sign_test_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub seed: u64,
    pub reps: usize,
    pub options: BaselineOptions,
    pub note: Option<String>,
    pub per_replicate: Vec<ReplicateRecord>,
    pub failures: Vec<ReplicateFailure>,
    pub summary: Vec<SummaryRow>,
    pub rate: Option<RateFit>,
}

/// `P(X >= wins)` for `X ~ Binomial(wins + losses, 1/2)`.
pub fn sign_test(wins: usize, losses: usize) -> f64 {
    let trials = (wins + losses) as u64;
    if wins == 0 || trials == 0 {
        return 1.0;
    }
    let b = Binomial::new(0.5, trials).expect("valid binomial");
    b.sf(wins as u64 - 1)
}

/// One replicate of the comparison study on the Poisson autoregression.
pub fn compare_replicate(
    n: usize,
    seed: u64,
    replicate: u64,
    opts: &BaselineOptions,
) -> Result<ReplicateRecord> {
    let mut rng = design_stream(seed, n, replicate);
    let data = simulate_poisson_trend_with(n, &mut rng)?.dataset()?;
    let p = Protocol::run(data, opts)?;
    let (l1_mid, l1_baseline) = p.l1(|x| poisson_trend_truth(n, x[0], x[1]));
    let m = p.mape()?;
    Ok(ReplicateRecord {
        seed,
        n,
        replicate,
        grid_points: m.grid_points,
        l1_mid,
        l1_baseline,
        mape_mid: m.mape_mid,
        mape_baseline: m.mape_baseline,
        mape_mean: m.mape_mean,
    })
}

/// Midpoint estimator against the least-squares baseline on repeated Poisson paths.
pub fn compare_study(
    ns: &[usize],
    reps: usize,
    seed: u64,
    opts: &BaselineOptions,
) -> Result<ExperimentReport> {
    if reps < 2 {
        return Err(Error::InvalidArgument(
            "need at least two replicates".into(),
        ));
    }
    if ns.is_empty() {
        return Err(Error::InvalidArgument(
            "need at least one sample size".into(),
        ));
    }
    let jobs: Vec<(usize, u64)> = ns
        .iter()
        .flat_map(|&n| (0..reps as u64).map(move |r| (n, r)))
        .collect();
    let results: Vec<Result<ReplicateRecord>> = jobs
        .par_iter()
        .map(|&(n, r)| compare_replicate(n, seed, r, opts))
        .collect();
    let mut per_replicate = Vec::new();
    let mut failures = Vec::new();
    let mut summary = Vec::new();
    for (k, &n) in ns.iter().enumerate() {
        let mut rows = Vec::new();
        for (r, res) in results[k * reps..(k + 1) * reps].iter().enumerate() {
            match res {
                Ok(rec) => rows.push(rec.clone()),
                Err(e) if e.is_invariant() => return Err(Error::Invariant(e.to_string())),
                Err(e) => failures.push(ReplicateFailure {
                    n,
                    replicate: r as u64,
                    error: e.to_string(),
                }),
            }
        }
        check_failures(reps - rows.len(), reps)?;
        let col = |f: fn(&ReplicateRecord) -> f64| rows.iter().map(f).collect::<Vec<_>>();
        let wins = rows.iter().filter(|r| r.l1_mid < r.l1_baseline).count();
        let losses = rows.iter().filter(|r| r.l1_mid > r.l1_baseline).count();
        summary.push(SummaryRow {
            n,
            replicates: rows.len(),
            l1_mid: Quartiles::of(&col(|r| r.l1_mid)),
            l1_baseline: Quartiles::of(&col(|r| r.l1_baseline)),
            mape_mid: Quartiles::of(&col(|r| r.mape_mid)),
            mape_baseline: Quartiles::of(&col(|r| r.mape_baseline)),
            wins,
            losses,
            ties: rows.len() - wins - losses,
            sign_test_p: sign_test(wins, losses),
        });
        per_replicate.extend(rows);
    }
    let mut sizes: Vec<usize> = summary.iter().map(|s| s.n).collect();
    sizes.sort_unstable();
    sizes.dedup();
    let rate = if sizes.len() >= 3 {
        let ns: Vec<usize> = summary.iter().map(|s| s.n).collect();
        let med: Vec<f64> = summary.iter().map(|s| s.l1_mid.median).collect();
        Some(log_log_fit(&ns, &med)?)
    } else {
        None
    };
    let note = (ns == DEFAULT_COMPARE_NS).then(|| {
        "sample sizes 200 and 500 are implementation defaults, not prescribed values".to_string()
    });
    Ok(ExperimentReport {
        seed,
        reps,
        options: *opts,
        note,
        per_replicate,
        failures,
        summary,
        rate,
    })
}

impl ExperimentReport {
    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        write_json(self, path)
    }

    /// One row per replicate.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path)?;
        w.write_record([
            "seed",
            "n",
            "replicate",
            "grid_points",
            "l1_mid",
            "l1_baseline",
            "mape_mid",
            "mape_baseline",
            "mape_mean",
        ])?;
        for r in &self.per_replicate {
            w.write_record([
                r.seed.to_string(),
                r.n.to_string(),
                r.replicate.to_string(),
                r.grid_points.to_string(),
                crate::dataset::fmt_f64(r.l1_mid),
                crate::dataset::fmt_f64(r.l1_baseline),
                crate::dataset::fmt_f64(r.mape_mid),
                crate::dataset::fmt_f64(r.mape_baseline),
                crate::dataset::fmt_f64(r.mape_mean),
            ])?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}
