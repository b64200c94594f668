use faer::c64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::Linearization;
use crate::error::{Error, Result};
use crate::linalg::{dense_eigen, SparseLu};

/// Operators up to this size are solved densely.
pub const DENSE_LIMIT: usize = 2000;
/// Sign margin for stability verdicts.
pub const VERDICT_MARGIN: f64 = 1e-6;
/// Relative residual `||M x - lambda x|| / ||x||` required of reported pairs.
pub const CERTIFY_TOL: f64 = 1e-8;
const MAX_KRYLOV: usize = 800;
const START_SEED: u64 = 0x5eed_a7c0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumMethod {
    Dense,
    Iterative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Stable,
    Unstable,
    Marginal,
}

impl Verdict {
    pub fn from_rightmost(re: f64) -> Self {
        if re > VERDICT_MARGIN {
            Verdict::Unstable
        } else if re < -VERDICT_MARGIN {
            Verdict::Stable
        } else {
            Verdict::Marginal
        }
    }
}

/// Rightmost eigenvalues of a linearization, sorted by real part descending.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    /// `[re, im]` pairs.
    pub eigenvalues: Vec<[f64; 2]>,
    pub method: SpectrumMethod,
    /// Relative residual of each reported pair.
    pub residuals: Vec<f64>,
    pub verdict: Verdict,
}

impl SpectrumReport {
    pub fn rightmost_re(&self) -> f64 {
        self.eigenvalues.first().map_or(f64::NAN, |e| e[0])
    }

    fn from_pairs(mut pairs: Vec<(c64, f64)>, m: usize, method: SpectrumMethod) -> Self {
        pairs.sort_by(|x, y| y.0.re.total_cmp(&x.0.re).then(y.0.im.total_cmp(&x.0.im)));
        pairs.truncate(m);
        let verdict = Verdict::from_rightmost(pairs.first().map_or(f64::NAN, |p| p.0.re));
        SpectrumReport {
            eigenvalues: pairs.iter().map(|p| [p.0.re, p.0.im]).collect(),
            residuals: pairs.iter().map(|p| p.1).collect(),
            method,
            verdict,
        }
    }
}

/// The `m` eigenvalues of largest real part: dense below [`DENSE_LIMIT`],
/// shift-invert Arnoldi above.
pub fn rightmost_spectrum(lin: &Linearization, m: usize) -> Result<SpectrumReport> {
    let method = if lin.size() <= DENSE_LIMIT {
        SpectrumMethod::Dense
    } else {
        SpectrumMethod::Iterative
    };
    rightmost_spectrum_with(lin, m, method)
}

pub fn rightmost_spectrum_with(lin: &Linearization, m: usize, method: SpectrumMethod) -> Result<SpectrumReport> {
    if m == 0 {
        return Err(Error::InvalidInput("requested zero eigenvalues".into()));
    }
    if lin.size() > 100_000 {
        return Err(Error::InvalidInput(format!("operator size {} exceeds 1e5", lin.size())));
    }
    match method {
        SpectrumMethod::Dense => dense(lin, m),
        SpectrumMethod::Iterative => iterative(lin, m),
    }
}

/// Every eigenvalue of `M`, unsorted.
pub fn full_spectrum(lin: &Linearization) -> Result<Vec<c64>> {
    crate::linalg::dense_eigenvalues(lin.size(), &lin.dense())
}

fn residual(lin: &Linearization, lambda: c64, xr: &[f64], xi: &[f64]) -> f64 {
    let mr = lin.apply(xr);
    let mi = lin.apply(xi);
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..xr.len() {
        let rr = mr[k] - (lambda.re * xr[k] - lambda.im * xi[k]);
        let ri = mi[k] - (lambda.re * xi[k] + lambda.im * xr[k]);
        num += rr * rr + ri * ri;
        den += xr[k] * xr[k] + xi[k] * xi[k];
    }
    (num / den).sqrt()
}

fn dense(lin: &Linearization, m: usize) -> Result<SpectrumReport> {
    let n = lin.size();
    let (vals, vecs) = dense_eigen(n, &lin.dense())?;
    let pairs = vals
        .iter()
        .zip(&vecs)
        .map(|(&l, x)| {
            let xr: Vec<f64> = x.iter().map(|z| z.re).collect();
            let xi: Vec<f64> = x.iter().map(|z| z.im).collect();
            (l, residual(lin, l, &xr, &xi))
        })
        .collect();
    Ok(SpectrumReport::from_pairs(pairs, m, SpectrumMethod::Dense))
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Ritz pairs of `(M - sigma)^{-1}` from a `kdim`-step Arnoldi process,
/// mapped back to `lambda = sigma + 1/theta`, with residuals against `M`.
fn arnoldi(lin: &Linearization, lu: &SparseLu, sigma: f64, kdim: usize) -> Result<Vec<RitzPair>> {
    let n = lin.size();
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut q0: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let nrm = dot(&q0, &q0).sqrt();
    q0.iter_mut().for_each(|x| *x /= nrm);
    let mut basis = vec![q0];
    let mut h = vec![vec![0.0; kdim]; kdim + 1];
    let mut k = kdim;
    for j in 0..kdim {
        let mut w = lu.solve(&basis[j])?;
        let wnorm0 = dot(&w, &w).sqrt();
        for _ in 0..2 {
            for (i, qi) in basis.iter().enumerate() {
                let c = dot(qi, &w);
                h[i][j] += c;
                w.iter_mut().zip(qi).for_each(|(a, b)| *a -= c * b);
            }
        }
        let beta = dot(&w, &w).sqrt();
        h[j + 1][j] = beta;
        if beta <= 1e-14 * wnorm0.max(f64::MIN_POSITIVE) {
            k = j + 1;
            break;
        }
        w.iter_mut().for_each(|x| *x /= beta);
        basis.push(w);
    }
    let mut hk = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            hk[i * k + j] = h[i][j];
        }
    }
    let (thetas, ys) = dense_eigen(k, &hk)?;
    let mut out = Vec::with_capacity(k);
    for (theta, y) in thetas.iter().zip(&ys) {
        if theta.norm() == 0.0 {
            continue;
        }
        let lambda = c64::new(sigma, 0.0) + c64::new(1.0, 0.0) / theta;
        let mut xr = vec![0.0; n];
        let mut xi = vec![0.0; n];
        for (q, yj) in basis.iter().zip(y) {
            for t in 0..n {
                xr[t] += q[t] * yj.re;
                xi[t] += q[t] * yj.im;
            }
        }
        let res = residual(lin, lambda, &xr, &xi);
        out.push(RitzPair { lambda, residual: res, xr, xi });
    }
    Ok(out)
}

struct RitzPair {
    lambda: c64,
    residual: f64,
    xr: Vec<f64>,
    xi: Vec<f64>,
}

impl RitzPair {
    fn vector(&self) -> Vec<c64> {
        self.xr.iter().zip(&self.xi).map(|(&r, &i)| c64::new(r, i)).collect()
    }
}

/// A certified pair repeats earlier ones when its eigenvalue is close to
/// theirs and its vector lies in the span of their vectors. Near-degenerate
/// eigenvalues with independent vectors are kept.
fn in_span_of_close(p: &RitzPair, accepted: &[RitzPair]) -> bool {
    let close: Vec<&RitzPair> = accepted
        .iter()
        .filter(|q| (q.lambda - p.lambda).norm() <= 1e-8 * (1.0 + p.lambda.norm()))
        .collect();
    if close.is_empty() {
        return false;
    }
    let inner = |x: &[c64], y: &[c64]| x.iter().zip(y).map(|(a, b)| a.conj() * b).sum::<c64>();
    let mut basis: Vec<Vec<c64>> = Vec::new();
    for q in close {
        let mut w = q.vector();
        for e in &basis {
            let c = inner(e, &w);
            w.iter_mut().zip(e).for_each(|(a, b)| *a -= c * b);
        }
        let n = inner(&w, &w).re.sqrt();
        if n > 1e-8 {
            w.iter_mut().for_each(|a| *a /= n);
            basis.push(w);
        }
    }
    let mut x = p.vector();
    let n0 = inner(&x, &x).re.sqrt();
    for _ in 0..2 {
        for e in &basis {
            let c = inner(e, &x);
            x.iter_mut().zip(e).for_each(|(a, b)| *a -= c * b);
        }
    }
    inner(&x, &x).re.sqrt() < 0.1 * n0
}

fn iterative(lin: &Linearization, m: usize) -> Result<SpectrumReport> {
    let n = lin.size();
    let max_a = lin.a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let shifts = [lin.gershgorin_right().max(max_a) + 1.0, 0.0];
    let mut lus = Vec::new();
    for &s in &shifts {
        match lin.shifted_sparse(s)?.lu() {
            Ok(lu) => lus.push((s, lu)),
            Err(Error::Singular(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    let kmax = n.min(MAX_KRYLOV);
    let mut kdim = (4 * m).max(40).min(kmax);
    loop {
        let mut certified: Vec<RitzPair> = Vec::new();
        let mut pending: Vec<(c64, f64)> = Vec::new();
        for (s, lu) in &lus {
            let pairs = match arnoldi(lin, lu, *s, kdim) {
                Ok(p) => p,
                // A shift on an eigenvalue is skipped; the other one still runs.
                Err(Error::Singular(_)) => continue,
                Err(e) => return Err(e),
            };
            for p in pairs {
                if p.residual > CERTIFY_TOL {
                    pending.push((p.lambda, p.residual));
                } else if !in_span_of_close(&p, &certified) {
                    certified.push(p);
                }
            }
        }
        let report = SpectrumReport::from_pairs(
            certified.iter().map(|p| (p.lambda, p.residual)).collect(),
            m,
            SpectrumMethod::Iterative,
        );
        if report.eigenvalues.len() == m {
            // Done once no unconverged Ritz value competes for the top m.
            let edge = report.eigenvalues[m - 1][0];
            let open = pending.iter().any(|(l, _)| l.re > edge + 1e-8 * (1.0 + edge.abs()));
            if !open || kdim == kmax {
                return Ok(report);
            }
        }
        if kdim == kmax {
            // Largest residual among the m rightmost unconverged Ritz values.
            let worst = SpectrumReport::from_pairs(pending, m, SpectrumMethod::Iterative)
                .residuals
                .into_iter()
                .fold(0.0, f64::max);
            return Err(Error::Arnoldi {
                requested: m,
                worst_residual: worst,
            });
        }
        kdim = (2 * kdim).min(kmax);
    }
}
