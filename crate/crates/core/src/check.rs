//! Seeded property suites behind `rectiso check`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::baseline::isotonic_1d;
use crate::dataset::{Dataset, DimKind};
use crate::error::{Error, Result};
use crate::estimator::{isotonic_violation, IsotonicEstimator, IsotonicFit, INVARIANT_SLACK};
use crate::evaluate::lemma_a1_check;
use crate::grid::{QueryGrid, Shape};
use crate::lattice::{build_lattice, occupancy, trim_to_data};
use crate::simulate::stream;

/// Messages kept per suite.
const MAX_MESSAGES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Sandwich,
    Isotonicity,
    Pava,
    LemmaA1,
    Occupancy,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Sandwich,
        Suite::Isotonicity,
        Suite::Pava,
        Suite::LemmaA1,
        Suite::Occupancy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Sandwich => "sandwich",
            Suite::Isotonicity => "isotonicity",
            Suite::Pava => "pava",
            Suite::LemmaA1 => "lemma-a1",
            Suite::Occupancy => "occupancy",
        }
    }

    /// Whether the first fixture can be corrupted on request.
    pub fn injectable(self) -> bool {
        matches!(self, Suite::Sandwich | Suite::Isotonicity | Suite::Pava)
    }

    fn id(self) -> u64 {
        self as u64 + 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub cases: usize,
    pub passed: usize,
    /// First few failure messages, in case order.
    pub failures: Vec<String>,
}

impl SuiteReport {
    pub fn ok(&self) -> bool {
        self.passed == self.cases
    }
}

/// Runs `cases` seeded cases of `suite`. With `inject`, case 0 gets a corrupted fit.
pub fn run_suite(suite: Suite, cases: usize, seed: u64, inject: bool) -> Result<SuiteReport> {
    if inject && !suite.injectable() {
        return Err(Error::InvalidArgument(format!(
            "suite {} has no fitted surface to corrupt",
            suite.name()
        )));
    }
    let outcomes: Vec<std::result::Result<(), String>> = (0..cases)
        .into_par_iter()
        .map(|case| {
            let mut rng = stream(seed, suite.id() << 32 | case as u64);
            let corrupt = inject && case == 0;
            let res = match suite {
                Suite::Sandwich => sandwich_case(&mut rng, case, corrupt),
                Suite::Isotonicity => isotonicity_case(&mut rng, case, corrupt),
                Suite::Pava => pava_case(&mut rng, corrupt),
                Suite::LemmaA1 => lemma_case(&mut rng, case),
                Suite::Occupancy => occupancy_case(&mut rng, case),
            };
            res.map_err(|e| format!("case {case}: {e}"))
        })
        .collect();
    let passed = outcomes.iter().filter(|o| o.is_ok()).count();
    let failures = outcomes
        .into_iter()
        .filter_map(|o| o.err())
        .take(MAX_MESSAGES)
        .collect();
    Ok(SuiteReport {
        suite,
        cases,
        passed,
        failures,
    })
}

type CaseResult = std::result::Result<(), Error>;

fn fail(msg: String) -> CaseResult {
    Err(Error::Invariant(msg))
}

/// Random dataset with `d = 1 + case % 3`; the 3-d case sits on a coarse support.
fn random_fit(rng: &mut ChaCha8Rng, case: usize) -> Result<IsotonicFit> {
    let d = 1 + case % 3;
    let n = rng.random_range(5..=120);
    let mut cov = Vec::with_capacity(n * d);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let mut s = 0.0;
        for _ in 0..d {
            let v = if d == 3 {
                rng.random_range(0..6) as f64 / 5.0
            } else {
                rng.random::<f64>()
            };
            s += v;
            cov.push(v);
        }
        y.push(s + rng.random::<f64>() - 0.5);
    }
    let data = Dataset::new(y, cov, vec![DimKind::Continuous; d])?;
    let per_dim = [15, 10, 6][d - 1];
    let grid = trim_to_data(&QueryGrid::equidistant(&data, per_dim)?, &data)?.grid;
    IsotonicEstimator::new(&data)?.fit(&grid)
}

fn sandwich_case(rng: &mut ChaCha8Rng, case: usize, corrupt: bool) -> CaseResult {
    let mut fit = random_fit(rng, case)?;
    if corrupt {
        fit.mid[0] = fit.upper[0] + 1.0;
    }
    for g in 0..fit.len() {
        let (l, m, u) = (fit.lower[g], fit.mid[g], fit.upper[g]);
        let slack = INVARIANT_SLACK * l.abs().max(u.abs()).max(1.0);
        if !(l <= m + slack && m <= u + slack) {
            return fail(format!(
                "lower {l} <= mid {m} <= upper {u} fails at grid point {g}"
            ));
        }
    }
    Ok(())
}

fn isotonicity_case(rng: &mut ChaCha8Rng, case: usize, corrupt: bool) -> CaseResult {
    let mut fit = random_fit(rng, case)?;
    if corrupt {
        let top = fit.mid.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        fit.mid[0] = top + 1.0;
        if fit.len() == 1 {
            return fail("corrupted single-point fit".into());
        }
    }
    let shape = fit.grid.shape();
    for (name, v) in [
        ("lower", &fit.lower),
        ("upper", &fit.upper),
        ("mid", &fit.mid),
    ] {
        if let Some((a, b)) = isotonic_violation(&shape, v, INVARIANT_SLACK) {
            return fail(format!("{name} decreases from grid point {a} to {b}"));
        }
    }
    Ok(())
}

/// One-dimensional data, with ties half of the time, against pool-adjacent-violators.
fn pava_case(rng: &mut ChaCha8Rng, corrupt: bool) -> CaseResult {
    let n = rng.random_range(3..=50);
    let tied = rng.random_bool(0.5);
    let x: Vec<f64> = (0..n)
        .map(|_| {
            if tied {
                rng.random_range(0..=n / 2) as f64
            } else {
                rng.random::<f64>()
            }
        })
        .collect();
    let y: Vec<f64> = x
        .iter()
        .map(|v| v.sqrt() + rng.random::<f64>() * 2.0 - 1.0)
        .collect();
    let reference = isotonic_1d(&x, &y)?;
    let data = Dataset::new(y, x, vec![DimKind::Continuous])?;
    let grid = QueryGrid::new(vec![reference.x.clone()])?;
    let mut fit = IsotonicEstimator::new(&data)?.fit(&grid)?;
    if corrupt {
        fit.mid[0] += 1.0;
    }
    for (g, want) in reference.fitted.iter().enumerate() {
        if (fit.mid[g] - want).abs() > 1e-10 {
            return fail(format!(
                "mid {} differs from PAVA {want} at x = {}",
                fit.mid[g], reference.x[g]
            ));
        }
        if (fit.lower[g] - fit.upper[g]).abs() > 1e-10 {
            return fail(format!(
                "lower {} and upper {} differ at x = {}",
                fit.lower[g], fit.upper[g], reference.x[g]
            ));
        }
    }
    Ok(())
}

/// Random isotonic function on the `(M+1)^d` lattice: prefix sums of nonnegative draws.
pub fn random_isotonic_lattice<R: Rng + ?Sized>(rng: &mut R, m: usize, d: usize) -> Vec<f64> {
    let shape = Shape::new(vec![m + 1; d]);
    let mut v: Vec<f64> = (0..shape.len()).map(|_| rng.random::<f64>()).collect();
    for axis in 0..d {
        let stride = shape.strides()[axis];
        for f in 0..shape.len() {
            if (f / stride) % (m + 1) != 0 {
                v[f] += v[f - stride];
            }
        }
    }
    v
}

fn lemma_case(rng: &mut ChaCha8Rng, case: usize) -> CaseResult {
    let d = 1 + case % 3;
    let m = rng.random_range(3..=10);
    let values = random_isotonic_lattice(rng, m, d);
    let r = lemma_a1_check(&values, m, d)?;
    if !r.holds {
        return fail(format!(
            "lhs {} exceeds rhs {} (d = {d}, M = {m})",
            r.lhs, r.rhs
        ));
    }
    Ok(())
}

/// Uniform design in two dimensions: box counts partition the sample and the
/// event is monotone in the constant.
fn occupancy_case(rng: &mut ChaCha8Rng, case: usize) -> CaseResult {
    let n = 500 + 100 * (case % 20);
    let cov: Vec<f64> = (0..2 * n).map(|_| rng.random::<f64>()).collect();
    let data = Dataset::new(vec![0.0; n], cov, vec![DimKind::Continuous; 2])?;
    let lattice = build_lattice(&data)?;
    for (j, b) in lattice.breaks.iter().enumerate() {
        if b.windows(2).any(|w| w[0] > w[1]) {
            return fail(format!("breakpoints of dimension {j} are not monotone"));
        }
    }
    let c = rng.random_range(0.05..1.0);
    let hi = occupancy(&data, &lattice, c)?;
    let lo = occupancy(&data, &lattice, c / 2.0)?;
    let total: usize = hi.counts.iter().sum();
    if total != n {
        return fail(format!("box counts sum to {total}, expected {n}"));
    }
    if hi.passed && !lo.passed {
        return fail(format!("passes at c = {c} but not at c = {}", c / 2.0));
    }
    Ok(())
}
