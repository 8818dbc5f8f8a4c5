//! Synthetic data: the Poisson autoregression with a time trend and i.i.d. designs on
//! the unit cube.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::dataset::{lag_embed, Dataset, DimKind};
use crate::error::{Error, Result};

/// Intensity of the Poisson autoregression.
pub fn f_sim(y: f64, z: f64) -> f64 {
    -5.0 + 20.0 / (1.0 + (-0.3 * y).exp()) + 4.0 * z
}

/// Independent RNG for replicate `replicate` of an experiment seeded with `seed`.
pub fn stream(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

/// Stream of replicate `replicate` at sample size `n`; distinct for every `(n, replicate)`.
pub fn design_stream(seed: u64, n: usize, replicate: u64) -> ChaCha8Rng {
    stream(seed, ((n as u64) << 32) ^ replicate)
}

/// Poisson draw by sequential inversion; exact for the moderate intensities used here.
pub fn poisson_inversion<R: Rng + ?Sized>(rng: &mut R, lambda: f64) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    if lambda >= 30.0 {
        return Poisson::new(lambda)
            .expect("positive intensity")
            .sample(rng) as u64;
    }
    let u: f64 = rng.random();
    let mut k = 0u64;
    let mut p = (-lambda).exp();
    let mut cdf = p;
    while u > cdf {
        k += 1;
        p *= lambda / k as f64;
        cdf += p;
        if p < f64::MIN_POSITIVE {
            break;
        }
    }
    k
}

/// A path of the Poisson autoregression.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonTrendPath {
    /// `Y_0, ..., Y_n`.
    pub series: Vec<f64>,
    /// `lambda_0, ..., lambda_n`; `lambda_0 = f(0, 0)` is the intensity of the initial draw.
    pub intensities: Vec<f64>,
}

impl PoissonTrendPath {
    /// Lag-1 design with trend: row `t` regresses `Y_t` on `(Y_{t-1}, t/n)`.
    pub fn dataset(&self) -> Result<Dataset> {
        lag_embed(&self.series, 1, true)
    }

    pub fn n(&self) -> usize {
        self.series.len() - 1
    }
}

/// Simulates `Y_0 ~ Poisson(f(0, 0))` and `Y_t ~ Poisson(f(Y_{t-1}, (t-1)/n))` for
/// `t = 1..=n`.
pub fn simulate_poisson_trend(n: usize, seed: u64) -> Result<PoissonTrendPath> {
    simulate_poisson_trend_with(n, &mut stream(seed, 0))
}

pub fn simulate_poisson_trend_with<R: Rng + ?Sized>(
    n: usize,
    rng: &mut R,
) -> Result<PoissonTrendPath> {
    if n < 2 {
        return Err(Error::InvalidArgument(
            "path length must be at least 2".into(),
        ));
    }
    let mut series = Vec::with_capacity(n + 1);
    let mut intensities = Vec::with_capacity(n + 1);
    let mut lambda = f_sim(0.0, 0.0);
    for t in 0..=n {
        if t > 0 {
            lambda = f_sim(series[t - 1], (t - 1) as f64 / n as f64);
        }
        intensities.push(lambda);
        series.push(poisson_inversion(rng, lambda) as f64);
    }
    Ok(PoissonTrendPath {
        series,
        intensities,
    })
}

/// True regression function of the lag-1 design built by [`PoissonTrendPath::dataset`],
/// at `(y, z)` with `z` on the `t/n` scale.
pub fn poisson_trend_truth(n: usize, y: f64, z: f64) -> f64 {
    f_sim(y, z - 1.0 / n as f64)
}

/// Covariate density on `[0,1]^d`.
#[derive(Debug, Clone, PartialEq)]
pub enum Density {
    Uniform,
    /// Product of `1 + s_j (x_j - 1/2)` with `|s_j| < 2`.
    Linear(Vec<f64>),
}

impl Density {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R, d: usize) -> Vec<f64> {
        (0..d)
            .map(|j| {
                let u: f64 = rng.random();
                match self {
                    Density::Uniform => u,
                    Density::Linear(slopes) => {
                        let s = slopes[j];
                        if s.abs() < 1e-12 {
                            u
                        } else {
                            let b = 1.0 - s / 2.0;
                            ((b * b + 2.0 * s * u).sqrt() - b) / s
                        }
                    }
                }
            })
            .collect()
    }

    /// Bounds `(c1, c2)` with `c1 <= p <= c2` on the cube.
    pub fn bounds(&self) -> (f64, f64) {
        match self {
            Density::Uniform => (1.0, 1.0),
            Density::Linear(slopes) => slopes.iter().fold((1.0, 1.0), |(lo, hi), s| {
                (lo * (1.0 - s.abs() / 2.0), hi * (1.0 + s.abs() / 2.0))
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Noise {
    None,
    Gaussian { sd: f64 },
    Uniform { half_width: f64 },
}

impl Noise {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Noise::None => 0.0,
            Noise::Gaussian { sd } => Normal::new(0.0, sd).expect("finite sd").sample(rng),
            Noise::Uniform { half_width } => half_width * (2.0 * rng.random::<f64>() - 1.0),
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Noise::None => 0.0,
            Noise::Gaussian { sd } => sd * sd,
            Noise::Uniform { half_width } => half_width * half_width / 3.0,
        }
    }
}

/// Nondecreasing regression function on the cube.
#[derive(Clone)]
pub enum RegressionFn {
    /// `sum x_j^2`.
    Square,
    /// `sum x_j`.
    CoordSum,
    /// `sum 1{x_j > 1/2}`.
    Step,
    Custom(Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>),
}

impl RegressionFn {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            RegressionFn::Square => x.iter().map(|v| v * v).sum(),
            RegressionFn::CoordSum => x.iter().sum(),
            RegressionFn::Step => x.iter().filter(|v| **v > 0.5).count() as f64,
            RegressionFn::Custom(f) => f(x),
        }
    }
}

impl fmt::Debug for RegressionFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegressionFn::Square => f.write_str("Square"),
            RegressionFn::CoordSum => f.write_str("CoordSum"),
            RegressionFn::Step => f.write_str("Step"),
            RegressionFn::Custom(_) => f.write_str("Custom"),
        }
    }
}

/// Parameters of the i.i.d. design `Y = f(X) + eps` with continuous covariates on `[0,1]^d`.
#[derive(Debug, Clone)]
pub struct IidParams {
    pub d: usize,
    pub density: Density,
    pub noise: Noise,
    /// Upper bound on the noise variance; the noise must respect it.
    pub noise_variance_bound: f64,
    pub f: RegressionFn,
}

impl IidParams {
    pub fn new(d: usize, f: RegressionFn, noise: Noise) -> Self {
        Self {
            d,
            density: Density::Uniform,
            noise_variance_bound: noise.variance(),
            noise,
            f,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        if let Density::Linear(s) = &self.density {
            if s.len() != self.d {
                return Err(Error::DimensionMismatch {
                    expected: self.d,
                    got: s.len(),
                });
            }
            if s.iter().any(|v| !(v.abs() < 2.0)) {
                return Err(Error::InvalidArgument(
                    "density slopes must lie in (-2, 2)".into(),
                ));
            }
        }
        let var = self.noise.variance();
        if !var.is_finite() || var > self.noise_variance_bound {
            return Err(Error::InvalidArgument(format!(
                "noise variance {var} exceeds the bound {}",
                self.noise_variance_bound
            )));
        }
        Ok(())
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Dataset> {
        self.validate()?;
        if n == 0 {
            return Err(Error::InvalidArgument(
                "sample size must be positive".into(),
            ));
        }
        let mut y = Vec::with_capacity(n);
        let mut cov = Vec::with_capacity(n * self.d);
        for _ in 0..n {
            let x = self.density.sample(rng, self.d);
            y.push(self.f.eval(&x) + self.noise.sample(rng));
            cov.extend(x);
        }
        Dataset::new(y, cov, vec![DimKind::Continuous; self.d])
    }
}

type Sampler = dyn Fn(usize, &mut ChaCha8Rng) -> Result<Dataset> + Send + Sync;
type Truth = dyn Fn(usize, &[f64]) -> f64 + Send + Sync;

/// User-supplied process: a sampler and the true regression function, both given `n`.
#[derive(Clone)]
pub struct CustomDgp {
    pub sample: Arc<Sampler>,
    pub truth: Arc<Truth>,
}

impl fmt::Debug for CustomDgp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CustomDgp")
    }
}

#[derive(Debug, Clone)]
pub enum DgpKind {
    IidRegression(IidParams),
    PoissonTrend,
    Custom(CustomDgp),
}

impl DgpKind {
    /// One replicate of size `n`; streams differ across `(n, replicate)`.
    pub fn sample(&self, n: usize, seed: u64, replicate: u64) -> Result<Dataset> {
        let mut rng = design_stream(seed, n, replicate);
        match self {
            DgpKind::IidRegression(p) => p.sample_with(n, &mut rng),
            DgpKind::PoissonTrend => simulate_poisson_trend_with(n, &mut rng)?.dataset(),
            DgpKind::Custom(c) => (c.sample)(n, &mut rng),
        }
    }

    /// True regression function at `x` for the design of size `n`.
    pub fn truth(&self, n: usize, x: &[f64]) -> f64 {
        match self {
            DgpKind::IidRegression(p) => p.f.eval(x),
            DgpKind::PoissonTrend => poisson_trend_truth(n, x[0], x[1]),
            DgpKind::Custom(c) => (c.truth)(n, x),
        }
    }
}

/// A fully specified draw: process, sample size and seed.
#[derive(Debug, Clone)]
pub struct DgpSpec {
    pub kind: DgpKind,
    pub n: usize,
    pub seed: u64,
}

impl DgpSpec {
    pub fn generate(&self) -> Result<Dataset> {
        self.kind.sample(self.n, self.seed, 0)
    }
}

/// Draws the i.i.d. design described by `spec`.
pub fn simulate_iid(spec: &DgpSpec) -> Result<Dataset> {
    match &spec.kind {
        DgpKind::IidRegression(_) => spec.generate(),
        _ => Err(Error::InvalidArgument(
            "simulate_iid needs an i.i.d. regression spec".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intensity_values() {
        assert!((f_sim(0.0, 0.0) - 5.0).abs() < 1e-12);
        assert_eq!(f_sim(0.0, 1.0), 9.0);
        assert!(f_sim(1e6, 1.0) <= 23.0);
        assert!(f_sim(-1e6, 0.0) > -5.0 - 1e-12);
        assert!(f_sim(1.0, 0.5) > f_sim(0.0, 0.5));
    }

    #[test]
    fn poisson_path_is_reproducible() {
        let a = simulate_poisson_trend(200, 7).unwrap();
        let b = simulate_poisson_trend(200, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.series.len(), 201);
        assert_eq!(a.intensities[0], 5.0);
        assert_ne!(a, simulate_poisson_trend(200, 8).unwrap());
        for t in 1..=200 {
            let z = (t - 1) as f64 / 200.0;
            assert_eq!(a.intensities[t], f_sim(a.series[t - 1], z));
        }
    }

    #[test]
    fn poisson_dataset_layout() {
        let path = simulate_poisson_trend(50, 1).unwrap();
        let ds = path.dataset().unwrap();
        assert_eq!(ds.n(), 50);
        assert_eq!(ds.row(0), &[path.series[0], 1.0 / 50.0]);
        assert_eq!(ds.responses()[0], path.series[1]);
        assert_eq!(
            poisson_trend_truth(50, ds.row(3)[0], ds.row(3)[1]),
            path.intensities[4]
        );
    }

    #[test]
    fn poisson_inversion_mean() {
        let mut rng = stream(3, 0);
        let n = 20_000;
        let mean = (0..n)
            .map(|_| poisson_inversion(&mut rng, 4.0) as f64)
            .sum::<f64>()
            / n as f64;
        assert!((mean - 4.0).abs() < 0.1, "{mean}");
    }

    fn iid(params: IidParams, n: usize, seed: u64) -> DgpSpec {
        DgpSpec {
            kind: DgpKind::IidRegression(params),
            n,
            seed,
        }
    }

    #[test]
    fn intensities_stay_in_range() {
        // The logistic term lies in [10, 20) for y >= 0 and 4z in [0, 4], so f lies in
        // [5, 19); along a path z <= (n-1)/n.
        for seed in 0..20 {
            let path = simulate_poisson_trend(300, seed).unwrap();
            assert!(path.intensities.iter().all(|l| (5.0..19.0).contains(l)));
        }
    }

    #[test]
    fn poisson_mean_matches_intensity() {
        let (mut sum_y, mut sum_l, mut count) = (0.0, 0.0, 0.0);
        for r in 0..100 {
            let mut rng = stream(1, r);
            let path = simulate_poisson_trend_with(500, &mut rng).unwrap();
            sum_y += path.series[1..].iter().sum::<f64>();
            sum_l += path.intensities[1..].iter().sum::<f64>();
            count += 500.0;
        }
        // Y_t - lambda_t is a martingale difference with variance lambda_t.
        let sd = (sum_l / count / count).sqrt();
        assert!(((sum_y - sum_l) / count).abs() < 3.0 * sd);
    }

    #[test]
    fn zero_noise_coordinate_sum() {
        let ds = simulate_iid(&iid(
            IidParams::new(3, RegressionFn::CoordSum, Noise::None),
            50,
            4,
        ))
        .unwrap();
        for t in 0..50 {
            assert_eq!(ds.responses()[t], ds.row(t).iter().sum::<f64>());
        }
    }

    #[test]
    fn noise_is_centered() {
        for noise in [
            Noise::Gaussian { sd: 0.7 },
            Noise::Uniform { half_width: 1.2 },
        ] {
            let ds = simulate_iid(&iid(
                IidParams::new(1, RegressionFn::Step, noise),
                100_000,
                9,
            ))
            .unwrap();
            let mean = (0..ds.n())
                .map(|t| ds.responses()[t] - RegressionFn::Step.eval(ds.row(t)))
                .sum::<f64>()
                / ds.n() as f64;
            assert!(mean.abs() < 4.0 * noise.variance().sqrt() / (1e5f64).sqrt());
        }
    }

    #[test]
    fn noise_above_bound_is_rejected() {
        let params = IidParams {
            noise_variance_bound: 0.5,
            ..IidParams::new(1, RegressionFn::Step, Noise::Gaussian { sd: 1.0 })
        };
        assert!(simulate_iid(&iid(params, 10, 0)).is_err());
        assert!(simulate_iid(&DgpSpec {
            kind: DgpKind::PoissonTrend,
            n: 10,
            seed: 0
        })
        .is_err());
    }

    #[test]
    fn linear_density_stays_in_cube_and_tilts() {
        let spec = IidParams {
            density: Density::Linear(vec![1.5]),
            ..IidParams::new(1, RegressionFn::CoordSum, Noise::None)
        };
        let ds = simulate_iid(&iid(spec.clone(), 4000, 11)).unwrap();
        assert!(ds.covariates().iter().all(|v| (0.0..=1.0).contains(v)));
        let upper = ds.covariates().iter().filter(|v| **v > 0.5).count();
        // Mass above 1/2 is (1 + s/4) / 2 = 0.6875.
        assert!((upper as f64 / 4000.0 - 0.6875).abs() < 0.03);
        assert_eq!(spec.density.bounds(), (0.25, 1.75));
    }

    #[test]
    fn replicate_streams_differ() {
        let dgp = DgpKind::IidRegression(IidParams::new(
            2,
            RegressionFn::Square,
            Noise::Gaussian { sd: 1.0 },
        ));
        let a = dgp.sample(10, 5, 0).unwrap();
        let b = dgp.sample(10, 5, 1).unwrap();
        assert_ne!(a.responses(), b.responses());
        assert_eq!(a.responses(), dgp.sample(10, 5, 0).unwrap().responses());
    }

    #[test]
    fn rejects_bad_slopes() {
        let spec = IidParams {
            density: Density::Linear(vec![2.5]),
            ..IidParams::new(1, RegressionFn::CoordSum, Noise::None)
        };
        assert!(simulate_iid(&iid(spec, 5, 0)).is_err());
    }
}
