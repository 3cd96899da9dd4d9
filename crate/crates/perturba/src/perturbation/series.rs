//! Transgression against a pointwise (possibly nonlinear, odd) contraction:
//! geometric-series solve of (d + delta) w = v with certified stopping,
//! divergence detection, and probed norm constants.

use crate::complexes::{Complex, Orientation};
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::perturbation::small::Perturbation;
use crate::scalar::Tol;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormKind {
    Sup,
    Euclidean,
}

impl NormKind {
    pub fn norm(self, v: &[f64]) -> f64 {
        match self {
            NormKind::Sup => v.iter().fold(0.0, |m, x| m.max(x.abs())),
            NormKind::Euclidean => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        }
    }
}

/// A pointwise map f: R^in → R^out assumed odd (f(−v) = −f(v)). Linear maps
/// embed via `from_matrix`; `odd_part` forces oddness on arbitrary maps.
#[derive(Clone)]
pub struct OddMap {
    in_dim: usize,
    out_dim: usize,
    f: Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
}

impl std::fmt::Debug for OddMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "OddMap({} -> {})", self.in_dim, self.out_dim)
    }
}

impl OddMap {
    pub fn new(
        in_dim: usize,
        out_dim: usize,
        f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        OddMap { in_dim, out_dim, f: Arc::new(f) }
    }

    pub fn from_matrix(m: &Mat<f64>) -> Self {
        let m = m.clone();
        OddMap {
            in_dim: m.ncols(),
            out_dim: m.nrows(),
            f: Arc::new(move |v| m.matvec(v).expect("dimension checked by apply")),
        }
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.in_dim {
            return Err(Error::ShapeMismatch {
                context: "OddMap::apply".into(),
                detail: format!("expected input of length {}, got {}", self.in_dim, v.len()),
            });
        }
        let out = (self.f)(v);
        if out.len() != self.out_dim {
            return Err(Error::InvariantViolation(format!(
                "OddMap returned length {} instead of {}",
                out.len(),
                self.out_dim
            )));
        }
        Ok(out)
    }

    /// (f(v) − f(−v)) / 2 — the odd part; idempotent on odd maps.
    pub fn odd_part(&self) -> OddMap {
        let f = self.f.clone();
        OddMap {
            in_dim: self.in_dim,
            out_dim: self.out_dim,
            f: Arc::new(move |v| {
                let neg: Vec<f64> = v.iter().map(|x| -x).collect();
                let plus = f(v);
                let minus = f(&neg);
                plus.iter().zip(&minus).map(|(a, b)| (a - b) / 2.0).collect()
            }),
        }
    }
}

/// A degree contraction with norm control: `h_k: C^k → C^{k−1}` and
/// `h_k1: C^{k+1} → C^k`, odd pointwise maps with constants
/// ‖h(v)‖ ≤ c_h·‖v‖; c_lambda plays the same role for the perturbation
/// family the series will face.
#[derive(Clone, Debug)]
pub struct NormedDegree {
    pub k: i64,
    pub norm: NormKind,
    pub h_k: OddMap,
    pub h_k1: OddMap,
    pub c_h: f64,
    pub c_lambda: f64,
}

impl NormedDegree {
    /// Largest perturbation size with a convergence guarantee.
    pub fn epsilon(&self) -> f64 {
        banach_epsilon(self.c_h, self.c_lambda)
    }
}

/// ε below which the transgression series is a Banach contraction:
/// 0.99 / (c_h + c_lambda). The 1% margin absorbs probing error.
pub fn banach_epsilon(c_h: f64, c_lambda: f64) -> f64 {
    0.99 / (c_h + c_lambda)
}

const PROBE_SAMPLES: usize = 1_000;
const PROBE_INFLATION: f64 = 1.1;
const ODDNESS_SPOT_CHECKS: usize = 10;

fn unit_vector(rng: &mut ChaCha8Rng, dim: usize, norm: NormKind) -> Vec<f64> {
    loop {
        // Box–Muller normals give an isotropic direction
        let mut v: Vec<f64> = Vec::with_capacity(dim);
        while v.len() < dim {
            let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let u2: f64 = rng.gen_range(0.0..1.0);
            let r = (-2.0 * u1.ln()).sqrt();
            v.push(r * (std::f64::consts::TAU * u2).cos());
            if v.len() < dim {
                v.push(r * (std::f64::consts::TAU * u2).sin());
            }
        }
        let n = norm.norm(&v);
        if n > 1e-300 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

/// Estimate a joint norm constant for a family of odd maps: max of
/// ‖f(u)‖ over random unit vectors, inflated by 10%. The first few samples
/// double as an oddness check.
pub fn probe_constants(maps: &[&OddMap], norm: NormKind, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for map in maps {
        if map.in_dim() == 0 {
            continue;
        }
        for sample in 0..PROBE_SAMPLES {
            let u = unit_vector(&mut rng, map.in_dim(), norm);
            let fu = map.apply(&u)?;
            if sample < ODDNESS_SPOT_CHECKS {
                let neg: Vec<f64> = u.iter().map(|x| -x).collect();
                let fneg = map.apply(&neg)?;
                let defect: Vec<f64> =
                    fu.iter().zip(&fneg).map(|(a, b)| a + b).collect();
                if norm.norm(&defect) > 1e-8 * (1.0 + norm.norm(&fu)) {
                    return Err(Error::DomainViolation(
                        "probed map is not odd; wrap it with odd_part".into(),
                    ));
                }
            }
            worst = worst.max(norm.norm(&fu));
        }
    }
    Ok(worst * PROBE_INFLATION)
}

#[derive(Clone, Copy, Debug)]
pub struct SeriesOptions {
    /// stop once ‖v_n‖ falls below this
    pub tau_series: f64,
    /// accepted residual of (d+delta)w = v, relative to 1 + ‖v‖
    pub tau_accept: f64,
    pub max_iter: usize,
    /// declare divergence when ‖v_n‖ fails to drop across this many steps
    pub window: usize,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        SeriesOptions { tau_series: 1e-12, tau_accept: 1e-8, max_iter: 10_000, window: 10 }
    }
}

#[derive(Clone, Debug)]
pub struct Transgression {
    pub w: Vec<f64>,
    pub terms: usize,
    pub residual: f64,
}

/// Solve (d + delta) w = v for v ∈ ker(d + delta) ∩ C^k by the iteration
///
/// ```text
/// v₀ = v ,   v_{n+1} = delta∘h_k(v_n) + h_k1∘delta(v_n) ,   w = −Σ h_k(v_n) .
/// ```
///
/// Each partial sum satisfies (d+delta) w_n = v − v_{n+1}, so the stopping
/// rule ‖v_{n+1}‖ < tau_series certifies the final residual, which is
/// nevertheless measured once more against tau_accept. Kernel membership is
/// an invariant of the iteration and is re-checked at every step.
pub fn transgress_series(
    c: &Complex<f64>,
    delta: &Perturbation<f64>,
    nd: &NormedDegree,
    v: &[f64],
    opts: &SeriesOptions,
    tol: &Tol,
) -> Result<Transgression> {
    if c.orientation() != Orientation::Cochain {
        return Err(Error::DomainViolation(
            "transgress_series is stated for cochain complexes; reindex with to_cochain".into(),
        ));
    }
    let k = nd.k;
    let (nkm, nk, nk1) = (c.dim(k - 1), c.dim(k), c.dim(k + 1));
    if nd.h_k.in_dim() != nk
        || nd.h_k.out_dim() != nkm
        || nd.h_k1.in_dim() != nk1
        || nd.h_k1.out_dim() != nk
        || v.len() != nk
    {
        return Err(Error::ShapeMismatch {
            context: "transgress_series".into(),
            detail: format!("maps or input do not match dimensions around degree {k}"),
        });
    }
    let norm = nd.norm;
    let dtot_k = c.d().block(k).add(&delta.delta().block(k))?;
    let dtot_km = c.d().block(k - 1).add(&delta.delta().block(k - 1))?;
    let e_km = delta.delta().block(k - 1);
    let e_k = delta.delta().block(k);

    let kernel_defect = norm.norm(&dtot_k.matvec(v)?);
    if kernel_defect > tol.tau * (1.0 + norm.norm(v)) {
        return Err(Error::PreconditionViolation(format!(
            "input is not in ker(d + delta) (residual {kernel_defect:e})"
        )));
    }

    let mut w = vec![0.0; nkm];
    let mut v_n = v.to_vec();
    let mut history: Vec<f64> = Vec::new();
    let mut terms = 0usize;
    let mut converged = false;
    while terms < opts.max_iter {
        let hv = nd.h_k.apply(&v_n)?;
        for (wi, hi) in w.iter_mut().zip(&hv) {
            *wi -= hi;
        }
        terms += 1;
        let mut next = e_km.matvec(&hv)?;
        let second = nd.h_k1.apply(&e_k.matvec(&v_n)?)?;
        for (a, b) in next.iter_mut().zip(&second) {
            *a += b;
        }
        let drift = norm.norm(&dtot_k.matvec(&next)?);
        if drift > tol.tau * (1.0 + norm.norm(&next)) {
            return Err(Error::ToleranceMiss {
                context: "transgression kernel drift".into(),
                residual: drift,
                tol: tol.tau,
            });
        }
        v_n = next;
        let size = norm.norm(&v_n);
        if size < opts.tau_series {
            converged = true;
            break;
        }
        if history.len() >= opts.window && size >= history[history.len() - opts.window] {
            return Err(Error::Divergence { window: opts.window, last: size });
        }
        history.push(size);
    }
    if !converged {
        return Err(Error::Divergence {
            window: opts.max_iter,
            last: norm.norm(&v_n),
        });
    }

    let residual_vec: Vec<f64> = dtot_km
        .matvec(&w)?
        .iter()
        .zip(v)
        .map(|(a, b)| a - b)
        .collect();
    let residual = norm.norm(&residual_vec);
    if residual > opts.tau_accept * (1.0 + norm.norm(v)) {
        return Err(Error::ToleranceMiss {
            context: "transgression residual".into(),
            residual,
            tol: opts.tau_accept,
        });
    }
    Ok(Transgression { w, terms, residual })
}
