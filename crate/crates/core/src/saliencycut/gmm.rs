//! Full-covariance Gaussian mixtures over Lab colors, fitted by EM from a
//! seeded k-means++ start.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Lower bound on covariance eigenvalues.
pub const COV_FLOOR: f64 = 1e-6;
/// EM stops once the mean per-sample log-likelihood improves by less than this.
pub const LL_TOLERANCE: f64 = 1e-4;
pub const MAX_EM_ITERS: usize = 100;

pub type Mat3 = [[f64; 3]; 3];

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianComponent {
    pub weight: f64,
    pub mean: [f64; 3],
    pub cov: Mat3,
    inv_cov: Mat3,
    /// `ln(weight) - (3 ln(2 pi) + ln det cov) / 2`
    log_scale: f64,
}

impl GaussianComponent {
    fn new(weight: f64, mean: [f64; 3], cov: Mat3) -> Result<Self> {
        let (inv_cov, log_det) = invert_spd(&cov).ok_or_else(|| {
            Error::InvalidParameter(format!("covariance {cov:?} is not positive definite"))
        })?;
        let log_scale = weight.ln() - 0.5 * (3.0 * (2.0 * std::f64::consts::PI).ln() + log_det);
        Ok(Self {
            weight,
            mean,
            cov,
            inv_cov,
            log_scale,
        })
    }

    /// `ln(weight * N(z | mean, cov))`
    #[inline]
    fn weighted_log_density(&self, z: &[f64; 3]) -> f64 {
        let d = [z[0] - self.mean[0], z[1] - self.mean[1], z[2] - self.mean[2]];
        let m = &self.inv_cov;
        let q = d[0] * (m[0][0] * d[0] + 2.0 * (m[0][1] * d[1] + m[0][2] * d[2]))
            + d[1] * (m[1][1] * d[1] + 2.0 * m[1][2] * d[2])
            + d[2] * m[2][2] * d[2];
        self.log_scale - 0.5 * q
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GmmModel {
    components: Vec<GaussianComponent>,
}

impl GmmModel {
    /// Builds a model from explicit parameters; weights are used as given and
    /// must sum to 1.
    pub fn from_parts(parts: &[(f64, [f64; 3], Mat3)]) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::UnfittedModel);
        }
        let total: f64 = parts.iter().map(|p| p.0).sum();
        if (total - 1.0).abs() > 1e-9 || parts.iter().any(|p| !(p.0 > 0.0)) {
            return Err(Error::InvalidParameter(format!("mixture weights sum to {total}")));
        }
        let components = parts
            .iter()
            .map(|&(w, m, c)| GaussianComponent::new(w, m, c))
            .collect::<Result<_>>()?;
        Ok(Self { components })
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    /// `ln p(z)` under the mixture.
    pub fn log_likelihood(&self, z: &[f64; 3]) -> f64 {
        let mut best = f64::NEG_INFINITY;
        let mut buf = [0.0f64; 16];
        let logs: &mut [f64] = if self.components.len() <= buf.len() {
            &mut buf[..self.components.len()]
        } else {
            return log_sum_exp(self.components.iter().map(|c| c.weighted_log_density(z)).collect::<Vec<_>>().as_slice());
        };
        for (l, c) in logs.iter_mut().zip(&self.components) {
            *l = c.weighted_log_density(z);
            best = best.max(*l);
        }
        if best == f64::NEG_INFINITY {
            return best;
        }
        best + logs.iter().map(|l| (l - best).exp()).sum::<f64>().ln()
    }
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let best = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if best == f64::NEG_INFINITY {
        return best;
    }
    best + v.iter().map(|l| (l - best).exp()).sum::<f64>().ln()
}

/// A fitted model with its EM trace.
#[derive(Clone, Debug)]
pub struct GmmFit {
    pub model: GmmModel,
    /// Mean per-sample log-likelihood before each M-step.
    pub log_likelihoods: Vec<f64>,
}

pub fn fit_gmm(samples: &[[f64; 3]], k: usize, seed: u64) -> Result<GmmModel> {
    fit_gmm_traced(samples, k, seed).map(|f| f.model)
}

/// Fits a `k`-component mixture. Identical samples are collapsed into
/// weighted points first, which leaves the EM result unchanged. If there are
/// fewer distinct samples than `k`, one component per distinct sample is used.
pub fn fit_gmm_traced(samples: &[[f64; 3]], k: usize, seed: u64) -> Result<GmmFit> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter("cannot fit a mixture to zero samples".into()));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("mixture needs at least one component".into()));
    }
    let (points, weights) = collapse(samples);
    let k = k.min(points.len());
    let total: f64 = weights.iter().sum();

    let centers = kmeans_pp(&points, &weights, k, seed);
    let mut resp = vec![0.0; points.len() * k];
    for (i, p) in points.iter().enumerate() {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (c, center) in centers.iter().enumerate() {
            let d = dist_sq(p, center);
            if d < best_d {
                best_d = d;
                best = c;
            }
        }
        resp[i * k + best] = 1.0;
    }
    let (mass, sums) = first_moments(&points, &weights, &resp, k);
    let mut model = m_step(&points, &weights, &resp, total, &mass, &sums)?;

    let mut trace = Vec::new();
    let mut logs = Vec::with_capacity(k);
    for _ in 0..MAX_EM_ITERS {
        let kk = model.k();
        resp.resize(points.len() * kk, 0.0);
        logs.resize(kk, 0.0);
        let mut mass = vec![0.0; kk];
        let mut sums = vec![[0.0; 3]; kk];
        let mut ll = 0.0;
        for (i, p) in points.iter().enumerate() {
            let mut top = f64::NEG_INFINITY;
            for (l, c) in logs.iter_mut().zip(&model.components) {
                *l = c.weighted_log_density(p);
                top = top.max(*l);
            }
            let row = &mut resp[i * kk..(i + 1) * kk];
            let mut norm = 0.0;
            for (r, l) in row.iter_mut().zip(&logs) {
                *r = (l - top).exp();
                norm += *r;
            }
            ll += weights[i] * (top + norm.ln());
            for (c, r) in row.iter_mut().enumerate() {
                *r /= norm;
                let wr = weights[i] * *r;
                mass[c] += wr;
                for d in 0..3 {
                    sums[c][d] += wr * p[d];
                }
            }
        }
        let ll = ll / total;
        let converged = trace.last().is_some_and(|&prev: &f64| ll - prev < LL_TOLERANCE);
        trace.push(ll);
        if converged {
            break;
        }
        model = m_step(&points, &weights, &resp[..points.len() * kk], total, &mass, &sums)?;
    }
    Ok(GmmFit {
        model,
        log_likelihoods: trace,
    })
}

/// Sorted distinct samples with multiplicities.
fn collapse(samples: &[[f64; 3]]) -> (Vec<[f64; 3]>, Vec<f64>) {
    let mut keyed: Vec<[u64; 3]> = samples.iter().map(|s| s.map(f64::to_bits)).collect();
    keyed.sort_unstable();
    let mut points = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    let mut prev: Option<[u64; 3]> = None;
    for key in keyed {
        if prev == Some(key) {
            *weights.last_mut().expect("non-empty") += 1.0;
        } else {
            points.push(key.map(f64::from_bits));
            weights.push(1.0);
            prev = Some(key);
        }
    }
    (points, weights)
}

#[inline]
fn dist_sq(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
}

/// Weighted k-means++ seeding over distinct points.
fn kmeans_pp(points: &[[f64; 3]], weights: &[f64], k: usize, seed: u64) -> Vec<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = |rng: &mut ChaCha8Rng, mass: &[f64]| -> usize {
        let total: f64 = mass.iter().sum();
        let mut t = rng.random::<f64>() * total;
        for (i, &m) in mass.iter().enumerate() {
            if t < m {
                return i;
            }
            t -= m;
        }
        mass.iter().rposition(|&m| m > 0.0).unwrap_or(0)
    };
    let mut centers = vec![points[pick(&mut rng, weights)]];
    let mut d2: Vec<f64> = points.iter().map(|p| dist_sq(p, &centers[0])).collect();
    while centers.len() < k {
        let mass: Vec<f64> = d2.iter().zip(weights).map(|(d, w)| d * w).collect();
        let c = points[pick(&mut rng, &mass)];
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(dist_sq(p, &c));
        }
        centers.push(c);
    }
    centers
}

/// Responsibility mass and weighted coordinate sums per component.
fn first_moments(points: &[[f64; 3]], weights: &[f64], resp: &[f64], k: usize) -> (Vec<f64>, Vec<[f64; 3]>) {
    let mut mass = vec![0.0; k];
    let mut sums = vec![[0.0; 3]; k];
    for (i, p) in points.iter().enumerate() {
        for c in 0..k {
            let r = weights[i] * resp[i * k + c];
            mass[c] += r;
            for d in 0..3 {
                sums[c][d] += r * p[d];
            }
        }
    }
    (mass, sums)
}

fn m_step(
    points: &[[f64; 3]],
    weights: &[f64],
    resp: &[f64],
    total: f64,
    mass: &[f64],
    sums: &[[f64; 3]],
) -> Result<GmmModel> {
    let k = mass.len();
    let means: Vec<[f64; 3]> = (0..k)
        .map(|c| if mass[c] > 0.0 { sums[c].map(|s| s / mass[c]) } else { [0.0; 3] })
        .collect();
    let mut scatter = vec![[[0.0; 3]; 3]; k];
    for (i, p) in points.iter().enumerate() {
        for c in 0..k {
            let r = weights[i] * resp[i * k + c];
            if r == 0.0 {
                continue;
            }
            let d = [p[0] - means[c][0], p[1] - means[c][1], p[2] - means[c][2]];
            for a in 0..3 {
                for b in a..3 {
                    scatter[c][a][b] += r * d[a] * d[b];
                }
            }
        }
    }
    // Components that lost all their mass carry no likelihood; drop them.
    let live: Vec<usize> = (0..k).filter(|&c| mass[c] > 1e-12 * total).collect();
    let live_mass: f64 = live.iter().map(|&c| mass[c]).sum();
    let components = live
        .into_iter()
        .map(|c| {
            let mut cov = [[0.0; 3]; 3];
            for a in 0..3 {
                for b in a..3 {
                    cov[a][b] = scatter[c][a][b] / mass[c];
                    cov[b][a] = cov[a][b];
                }
            }
            GaussianComponent::new(mass[c] / live_mass, means[c], floor_eigenvalues(&cov, COV_FLOOR))
        })
        .collect::<Result<Vec<_>>>()?;
    if components.is_empty() {
        return Err(Error::UnfittedModel);
    }
    Ok(GmmModel { components })
}

/// Symmetric eigen-decomposition by cyclic Jacobi rotations.
fn symmetric_eigen(m: &Mat3) -> ([f64; 3], Mat3) {
    let mut a = *m;
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for _ in 0..50 {
        let off = a[0][1].abs() + a[0][2].abs() + a[1][2].abs();
        let scale = a[0][0].abs() + a[1][1].abs() + a[2][2].abs();
        if off <= 1e-15 * scale || off == 0.0 {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            if a[p][q] == 0.0 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let t = if theta == 0.0 { 1.0 } else { t };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            for k in 0..3 {
                let (akp, akq) = (a[k][p], a[k][q]);
                a[k][p] = c * akp - s * akq;
                a[k][q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let (apk, aqk) = (a[p][k], a[q][k]);
                a[p][k] = c * apk - s * aqk;
                a[q][k] = s * apk + c * aqk;
            }
            for row in v.iter_mut() {
                let (vkp, vkq) = (row[p], row[q]);
                row[p] = c * vkp - s * vkq;
                row[q] = s * vkp + c * vkq;
            }
        }
    }
    ([a[0][0], a[1][1], a[2][2]], v)
}

/// Raises every eigenvalue below `floor` to `floor`. Leaves matrices that
/// already satisfy the bound untouched.
fn floor_eigenvalues(m: &Mat3, floor: f64) -> Mat3 {
    let (vals, vecs) = symmetric_eigen(m);
    if vals.iter().all(|&l| l >= floor) && invert_spd(m).is_some() {
        return *m;
    }
    let vals = vals.map(|l| l.max(floor));
    let mut out = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            out[a][b] = (0..3).map(|k| vecs[a][k] * vals[k] * vecs[b][k]).sum();
        }
    }
    for a in 0..3 {
        for b in a + 1..3 {
            let s = 0.5 * (out[a][b] + out[b][a]);
            out[a][b] = s;
            out[b][a] = s;
        }
    }
    out
}

/// Inverse and log-determinant via Cholesky; `None` unless positive definite.
fn invert_spd(m: &Mat3) -> Option<(Mat3, f64)> {
    let mut l = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = m[i][i] - s;
                if !(d > 0.0) {
                    return None;
                }
                l[i][j] = d.sqrt();
            } else {
                l[i][j] = (m[i][j] - s) / l[j][j];
            }
        }
    }
    let log_det = 2.0 * (l[0][0].ln() + l[1][1].ln() + l[2][2].ln());
    // inv(L) by forward substitution, then inv(M) = inv(L)^T inv(L).
    let mut li = [[0.0; 3]; 3];
    for i in 0..3 {
        li[i][i] = 1.0 / l[i][i];
        for j in 0..i {
            let s: f64 = (j..i).map(|k| l[i][k] * li[k][j]).sum();
            li[i][j] = -s / l[i][i];
        }
    }
    let mut inv = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            inv[a][b] = (0..3).map(|k| li[k][a] * li[k][b]).sum();
        }
    }
    Some((inv, log_det))
}
