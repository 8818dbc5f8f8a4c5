//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rectiso::dataset::{Dataset, DimKind};

/// Sum and count of responses with `lo <= x <= hi`, by scanning every row.
pub fn scan(data: &Dataset, lo: &[f64], hi: &[f64]) -> (f64, usize) {
    let mut s = 0.0;
    let mut c = 0;
    for t in 0..data.n() {
        let r = data.row(t);
        if r.iter().zip(lo).zip(hi).all(|((v, a), b)| a <= v && v <= b) {
            s += data.responses()[t];
            c += 1;
        }
    }
    (s, c)
}

pub fn scan_avg(data: &Dataset, lo: &[f64], hi: &[f64]) -> Option<f64> {
    let (s, c) = scan(data, lo, hi);
    (c > 0).then(|| s / c as f64)
}

/// Candidate corner coordinates along `j`: observed values on the wanted side of `x_j`
/// plus `x_j` itself.
fn candidates(data: &Dataset, j: usize, xj: f64, below: bool) -> Vec<f64> {
    let mut c: Vec<f64> = data
        .column(j)
        .filter(|v| if below { *v <= xj } else { *v >= xj })
        .collect();
    c.push(xj);
    c.sort_by(f64::total_cmp);
    c.dedup();
    c
}

fn corners(data: &Dataset, x: &[f64], below: bool) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for (j, &xj) in x.iter().enumerate() {
        let c = candidates(data, j, xj, below);
        out = out
            .into_iter()
            .flat_map(|p| {
                c.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(*v);
                    q
                })
            })
            .collect();
    }
    out
}

/// `max_{a <= x, [a,x] holds data} min_{b >= x} Av([a,b])` by exhaustive search.
pub fn brute_lower(data: &Dataset, x: &[f64]) -> Option<f64> {
    let uppers = corners(data, x, false);
    corners(data, x, true)
        .into_iter()
        .filter(|a| scan(data, a, x).1 > 0)
        .map(|a| {
            uppers
                .iter()
                .filter_map(|b| scan_avg(data, &a, b))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(f64::max)
}

/// `min_{b >= x, [x,b] holds data} max_{a <= x} Av([a,b])` by exhaustive search.
pub fn brute_upper(data: &Dataset, x: &[f64]) -> Option<f64> {
    let lowers = corners(data, x, true);
    corners(data, x, false)
        .into_iter()
        .filter(|b| scan(data, x, b).1 > 0)
        .map(|b| {
            lowers
                .iter()
                .filter_map(|a| scan_avg(data, a, &b))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .reduce(f64::min)
}

/// Isotonic regression at sorted distinct points by the min-max formula
/// `max_{i <= k} min_{j >= k} mean(y_i..=y_j)`, with tied covariates pooled.
pub fn minmax_1d(x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut xs: Vec<f64> = x.to_vec();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let m = xs.len();
    let mut s = vec![0.0; m];
    let mut w = vec![0.0; m];
    for (xi, yi) in x.iter().zip(y) {
        let k = xs.iter().position(|v| v == xi).unwrap();
        s[k] += yi;
        w[k] += 1.0;
    }
    let fitted = (0..m)
        .map(|k| {
            (0..=k)
                .map(|i| {
                    (k..m)
                        .map(|j| s[i..=j].iter().sum::<f64>() / w[i..=j].iter().sum::<f64>())
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    (xs, fitted)
}

/// Weighted isotonic least squares over an arbitrary partial order given by `le(i, j)`,
/// via `max_{upper sets U containing i} min_{lower sets L containing i} Av(U and L)`,
/// enumerating all subsets. Only for a handful of points.
pub fn lse_by_sets(m: usize, le: impl Fn(usize, usize) -> bool, y: &[f64], w: &[f64]) -> Vec<f64> {
    assert!(m <= 12);
    let is_upper =
        |s: u32| (0..m).all(|i| s >> i & 1 == 0 || (0..m).all(|j| !le(i, j) || s >> j & 1 == 1));
    let is_lower =
        |s: u32| (0..m).all(|i| s >> i & 1 == 0 || (0..m).all(|j| !le(j, i) || s >> j & 1 == 1));
    let ups: Vec<u32> = (1..1u32 << m).filter(|&s| is_upper(s)).collect();
    let lows: Vec<u32> = (1..1u32 << m).filter(|&s| is_lower(s)).collect();
    let av = |s: u32| {
        let (mut a, mut b) = (0.0, 0.0);
        for i in 0..m {
            if s >> i & 1 == 1 {
                a += w[i] * y[i];
                b += w[i];
            }
        }
        a / b
    };
    (0..m)
        .map(|i| {
            ups.iter()
                .filter(|&&u| u >> i & 1 == 1)
                .map(|&u| {
                    lows.iter()
                        .filter(|&&l| l >> i & 1 == 1)
                        .map(|&l| av(u & l))
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}

/// `n` rows on `[0,1]^d`, each coordinate drawn from `levels` equally spaced values
/// when `levels > 0`, uniformly otherwise; response `sum x + noise`.
pub fn random_data<R: Rng>(rng: &mut R, n: usize, d: usize, levels: usize, noise: f64) -> Dataset {
    let mut cov = Vec::with_capacity(n * d);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let mut s = 0.0;
        for _ in 0..d {
            let v = if levels > 0 {
                rng.random_range(0..levels) as f64 / (levels.max(2) - 1) as f64
            } else {
                rng.random::<f64>()
            };
            s += v;
            cov.push(v);
        }
        y.push(s + noise * (2.0 * rng.random::<f64>() - 1.0));
    }
    Dataset::new(y, cov, vec![DimKind::Continuous; d]).unwrap()
}

/// Exact comparison up to a relative slack.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
