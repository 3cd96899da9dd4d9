//! The b′-resolution of functions on powers of a finite metric space, its
//! normalized subcomplex, and the explicit ρ-weighted contracting homotopy.
//!
//! Degrees are indexed by arity: `C(M^k)` sits over the algebra `C(M)` of
//! functions on the point set, with b′ the alternating sum of diagonal
//! insertions and `m = b′` at the bottom the restriction to the diagonal.
//! The homotopy components carry the alternating sign (−1)^{arity−1}
//! relative to the raw weighted formulas: that is the unique orientation
//! for which b′h + hb′ = 1 holds on the normalized complex.

use crate::error::{Error, Result};
use crate::hochschild_deform::{AssocAlgebra, HochschildCochain};
use crate::matrix::Mat;
use crate::scalar::{Scalar, Tol};

/// Largest tensor arity we materialize densely (n^arity entries).
pub const MAX_TENSOR_ARITY: usize = 8;
/// Largest input arity accepted by the general homotopy.
pub const MAX_H_ARITY: usize = 6;

fn npow(n: usize, k: usize) -> usize {
    n.pow(k as u32)
}

fn digits(mut flat: usize, n: usize, k: usize) -> Vec<usize> {
    let mut out = vec![0usize; k];
    for slot in (0..k).rev() {
        out[slot] = flat % n;
        flat /= n;
    }
    out
}

fn encode(tuple: &[usize], n: usize) -> usize {
    tuple.iter().fold(0, |acc, &t| acc * n + t)
}

/// A finite metric space: n points with an exact distance matrix.
#[derive(Clone, Debug)]
pub struct FiniteMetricSpace<S: Scalar> {
    n: usize,
    rho: Mat<S>,
}

impl<S: Scalar> FiniteMetricSpace<S> {
    pub fn new(rho: Mat<S>, tol: &Tol) -> Result<Self> {
        let n = rho.nrows();
        if n == 0 {
            return Err(Error::DomainViolation("a metric space needs at least one point".into()));
        }
        if rho.ncols() != n {
            return Err(Error::ShapeMismatch {
                context: "FiniteMetricSpace::new".into(),
                detail: format!("distance matrix is {}×{}", rho.nrows(), rho.ncols()),
            });
        }
        for i in 0..n {
            if !rho[(i, i)].is_zero_within(tol) {
                return Err(Error::AxiomViolation(format!("ρ({i},{i}) must be zero")));
            }
            for j in 0..n {
                if i == j {
                    continue;
                }
                if !rho[(i, j)].approx_eq(&rho[(j, i)], tol) {
                    return Err(Error::AxiomViolation(format!("ρ({i},{j}) ≠ ρ({j},{i})")));
                }
                if !rho[(i, j)].is_positive() {
                    return Err(Error::AxiomViolation(format!(
                        "ρ({i},{j}) must be positive for distinct points"
                    )));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let slack = rho[(i, j)].clone() + rho[(j, k)].clone() - rho[(i, k)].clone();
                    if (-slack.clone()).is_positive() && !slack.is_zero_within(tol) {
                        return Err(Error::AxiomViolation(format!(
                            "triangle inequality fails on ({i},{j},{k})"
                        )));
                    }
                }
            }
        }
        Ok(FiniteMetricSpace { n, rho })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rho(&self, i: usize, j: usize) -> S {
        self.rho[(i, j)].clone()
    }

    pub fn rho_matrix(&self) -> &Mat<S> {
        &self.rho
    }
}

/// A scalar field on M^arity, stored densely with big-endian tuple indexing.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionTensor<S: Scalar> {
    n: usize,
    arity: usize,
    values: Vec<S>,
}

impl<S: Scalar> FunctionTensor<S> {
    pub fn zero(n: usize, arity: usize) -> Result<Self> {
        if arity == 0 || arity > MAX_TENSOR_ARITY {
            return Err(Error::ArityViolation { arity, max: MAX_TENSOR_ARITY });
        }
        if n == 0 {
            return Err(Error::DomainViolation("tensors need a positive point count".into()));
        }
        Ok(FunctionTensor { n, arity, values: vec![S::zero(); npow(n, arity)] })
    }

    pub fn from_values(n: usize, arity: usize, values: Vec<S>) -> Result<Self> {
        let z = Self::zero(n, arity)?;
        if values.len() != z.values.len() {
            return Err(Error::ShapeMismatch {
                context: "FunctionTensor::from_values".into(),
                detail: format!("expected {} entries, got {}", z.values.len(), values.len()),
            });
        }
        Ok(FunctionTensor { values, ..z })
    }

    /// The indicator of a single tuple.
    pub fn delta(n: usize, tuple: &[usize]) -> Result<Self> {
        let mut out = Self::zero(n, tuple.len())?;
        out.set(tuple, S::one());
        Ok(out)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn get(&self, tuple: &[usize]) -> S {
        debug_assert_eq!(tuple.len(), self.arity);
        self.values[encode(tuple, self.n)].clone()
    }

    pub fn set(&mut self, tuple: &[usize], v: S) {
        debug_assert_eq!(tuple.len(), self.arity);
        let idx = encode(tuple, self.n);
        self.values[idx] = v;
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        if self.n != rhs.n || self.arity != rhs.arity {
            return Err(Error::ShapeMismatch {
                context: "FunctionTensor::add".into(),
                detail: format!(
                    "({} pts, arity {}) vs ({} pts, arity {})",
                    self.n, self.arity, rhs.n, rhs.arity
                ),
            });
        }
        let values = self.values.iter().zip(&rhs.values).map(|(a, b)| a.clone() + b.clone()).collect();
        Ok(FunctionTensor { n: self.n, arity: self.arity, values })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Self {
        FunctionTensor {
            n: self.n,
            arity: self.arity,
            values: self.values.iter().map(|a| -a.clone()).collect(),
        }
    }

    pub fn scale(&self, c: &S) -> Self {
        FunctionTensor {
            n: self.n,
            arity: self.arity,
            values: self.values.iter().map(|a| a.clone() * c.clone()).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|a| a.is_zero())
    }

    pub fn norm_inf(&self) -> f64 {
        self.values.iter().map(|a| a.magnitude()).fold(0.0, f64::max)
    }

    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T) -> FunctionTensor<T> {
        FunctionTensor { n: self.n, arity: self.arity, values: self.values.iter().map(f).collect() }
    }
}

/// Positions whose coincidence the normalization condition covers: all
/// adjacent pairs except the final one.
fn violating_pair(tuple: &[usize]) -> Option<usize> {
    if tuple.len() < 3 {
        return None;
    }
    (0..tuple.len() - 2).find(|&i| tuple[i] == tuple[i + 1])
}

/// A tensor in the normalized subcomplex: zero whenever two adjacent
/// coordinates other than the final pair coincide.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedTensor<S: Scalar>(FunctionTensor<S>);

impl<S: Scalar> NormalizedTensor<S> {
    pub fn new(f: FunctionTensor<S>) -> Result<Self> {
        for (flat, v) in f.values.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            let t = digits(flat, f.n, f.arity);
            if let Some(i) = violating_pair(&t) {
                return Err(Error::DomainViolation(format!(
                    "tensor is not normalized: entry {t:?} has equal coordinates at {i}, {}",
                    i + 1
                )));
            }
        }
        Ok(NormalizedTensor(f))
    }

    pub fn tensor(&self) -> &FunctionTensor<S> {
        &self.0
    }

    pub fn into_tensor(self) -> FunctionTensor<S> {
        self.0
    }
}

/// Project onto the normalized subcomplex by zeroing violating entries.
/// Idempotent; the identity on already-normalized tensors.
pub fn normalize_project<S: Scalar>(f: &FunctionTensor<S>) -> NormalizedTensor<S> {
    let mut out = f.clone();
    for flat in 0..out.values.len() {
        let t = digits(flat, out.n, out.arity);
        if violating_pair(&t).is_some() {
            out.values[flat] = S::zero();
        }
    }
    NormalizedTensor(out)
}

/// The b′ boundary: the alternating sum of diagonal insertions,
///
/// ```text
/// (b′F)(y_0, …, y_{k−2}) = Σ_{i=0}^{k−2} (−1)^i F(y_0, …, y_i, y_i, …, y_{k−2}) ,
/// ```
///
/// lowering arity by one. At arity 2 this is the restriction to the
/// diagonal, i.e. the multiplication augmentation.
pub fn bprime<S: Scalar>(f: &FunctionTensor<S>) -> Result<FunctionTensor<S>> {
    let k = f.arity;
    if k < 2 || k > MAX_TENSOR_ARITY {
        return Err(Error::ArityViolation { arity: k, max: MAX_TENSOR_ARITY });
    }
    let n = f.n;
    let mut out = FunctionTensor::zero(n, k - 1)?;
    let mut arg = vec![0usize; k];
    for flat in 0..out.values.len() {
        let y = digits(flat, n, k - 1);
        let mut acc = S::zero();
        for i in 0..k - 1 {
            arg[..=i].copy_from_slice(&y[..=i]);
            arg[i + 1] = y[i];
            arg[i + 2..].copy_from_slice(&y[i + 1..]);
            let v = f.get(&arg);
            acc = if i % 2 == 1 { acc - v } else { acc + v };
        }
        out.values[flat] = acc;
    }
    Ok(out)
}

/// Argument convention for the arity-4 homotopy component's inner
/// corrections. `Telescoped` threads the penultimate coordinate through;
/// `RepeatedEndpoint` repeats the final coordinate instead. Both satisfy
/// the contraction identity at every supported arity — the identity only
/// sees the outer weight and head term, because every inner lookup pins the
/// final coordinate and normalization kills the rest. `Telescoped` is the
/// default because it is the arity-4 instance of the uniform recursion that
/// `metric_h_general` implements, whereas `RepeatedEndpoint` deviates from
/// that recursion (its inner weights are those of the telescoped argument
/// lists, so it is not the specialization of any one recursion).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum HomotopyReading {
    #[default]
    Telescoped,
    RepeatedEndpoint,
}

/// P/(P + ρ(x_{a−1}, x_a)) for P the product of consecutive distances along
/// x_0..x_{a−1}; zero when P is zero (the 0/0 := 0 policy).
fn spine_weight<S: Scalar>(ms: &FiniteMetricSpace<S>, x: &[usize]) -> Result<S> {
    let a = x.len() - 1;
    let mut p = S::one();
    for i in 0..a - 1 {
        p = p * ms.rho(x[i], x[i + 1]);
    }
    if p.is_zero() {
        return Ok(S::zero());
    }
    let den = p.clone() + ms.rho(x[a - 1], x[a]);
    let inv = den.inv().ok_or_else(|| {
        Error::InvariantViolation(
            "nonzero spine with zero weight denominator; distance matrix is not a metric".into(),
        )
    })?;
    Ok(p * inv)
}

/// Unsigned recursive homotopy: the weighted bracket with the last
/// coordinate of the evaluation point pinned into the tensor's trailing
/// arguments as the recursion descends.
fn h_eval<S: Scalar>(
    ms: &FiniteMetricSpace<S>,
    f: &FunctionTensor<S>,
    y: &[usize],
    pinned: &mut Vec<usize>,
    reading: HomotopyReading,
) -> Result<S> {
    let a = f.arity - pinned.len();
    debug_assert_eq!(y.len(), a + 1);
    let w = spine_weight(ms, y)?;
    if w.is_zero() {
        return Ok(S::zero());
    }
    let lookup = |mid: &[usize], pinned: &[usize]| {
        let mut arg = Vec::with_capacity(f.arity);
        arg.extend_from_slice(mid);
        arg.extend_from_slice(pinned);
        f.get(&arg)
    };
    if a == 4 && reading == HomotopyReading::RepeatedEndpoint {
        let w2 = spine_weight(ms, &y[..4])?;
        let w1 = spine_weight(ms, &y[..3])?;
        let inner = lookup(&[y[0], y[1], y[4], y[4]], pinned)
            - w1 * lookup(&[y[0], y[2], y[4], y[4]], pinned);
        let bracket = lookup(&[y[0], y[1], y[2], y[4]], pinned) - w2 * inner;
        return Ok(w * bracket);
    }
    let mut mid: Vec<usize> = y[..a - 1].to_vec();
    mid.push(y[a]);
    let head = lookup(&mid, pinned);
    let rec = if a == 2 {
        S::zero()
    } else {
        pinned.insert(0, y[a]);
        let r = h_eval(ms, f, &y[..a], pinned, reading)?;
        pinned.remove(0);
        r
    };
    Ok(w * (head - rec))
}

fn sign_for_arity(a: usize) -> i64 {
    if a % 2 == 0 {
        -1
    } else {
        1
    }
}

fn require_ker_m<S: Scalar>(f: &FunctionTensor<S>, tol: &Tol) -> Result<()> {
    for x in 0..f.n {
        if !f.get(&[x, x]).is_zero_within(tol) {
            return Err(Error::DomainViolation(format!(
                "arity-2 input is not in ker(m): nonzero on the diagonal at point {x}"
            )));
        }
    }
    Ok(())
}

/// The three explicit homotopy components (input arities 2, 3, 4), written
/// as closed forms. Arity-2 inputs must lie in ker(m). Output lands in the
/// normalized subcomplex by construction of the weights.
pub fn metric_h<S: Scalar>(
    f: &NormalizedTensor<S>,
    ms: &FiniteMetricSpace<S>,
    reading: HomotopyReading,
    tol: &Tol,
) -> Result<NormalizedTensor<S>> {
    let t = f.tensor();
    let a = t.arity();
    if !(2..=4).contains(&a) {
        return Err(Error::ArityViolation { arity: a, max: 4 });
    }
    if t.n() != ms.n() {
        return Err(Error::ShapeMismatch {
            context: "metric_h".into(),
            detail: format!("tensor over {} points vs metric space with {}", t.n(), ms.n()),
        });
    }
    if a == 2 {
        require_ker_m(t, tol)?;
    }
    let n = ms.n();
    let sigma = S::from_i64(sign_for_arity(a));
    let mut out = FunctionTensor::zero(n, a + 1)?;
    for flat in 0..out.values.len() {
        let x = digits(flat, n, a + 1);
        let w = spine_weight(ms, &x)?;
        if w.is_zero() {
            continue;
        }
        let bracket = match a {
            2 => t.get(&[x[0], x[2]]),
            3 => {
                let w1 = spine_weight(ms, &x[..3])?;
                t.get(&[x[0], x[1], x[3]]) - w1 * t.get(&[x[0], x[2], x[3]])
            }
            _ => {
                let w2 = spine_weight(ms, &x[..4])?;
                let w1 = spine_weight(ms, &x[..3])?;
                let inner = match reading {
                    HomotopyReading::Telescoped => {
                        t.get(&[x[0], x[1], x[3], x[4]]) - w1 * t.get(&[x[0], x[2], x[3], x[4]])
                    }
                    HomotopyReading::RepeatedEndpoint => {
                        t.get(&[x[0], x[1], x[4], x[4]]) - w1 * t.get(&[x[0], x[2], x[4], x[4]])
                    }
                };
                t.get(&[x[0], x[1], x[2], x[4]]) - w2 * inner
            }
        };
        out.values[flat] = sigma.clone() * w * bracket;
    }
    NormalizedTensor::new(out).map_err(|_| {
        Error::InvariantViolation("homotopy output escaped the normalized subcomplex".into())
    })
}

/// The homotopy at any supported arity via the recursive pattern the
/// explicit components follow; agrees with `metric_h` exactly through
/// arity 4.
pub fn metric_h_general<S: Scalar>(
    f: &NormalizedTensor<S>,
    ms: &FiniteMetricSpace<S>,
    reading: HomotopyReading,
    tol: &Tol,
) -> Result<NormalizedTensor<S>> {
    let t = f.tensor();
    let a = t.arity();
    if !(2..=MAX_H_ARITY).contains(&a) {
        return Err(Error::ArityViolation { arity: a, max: MAX_H_ARITY });
    }
    if t.n() != ms.n() {
        return Err(Error::ShapeMismatch {
            context: "metric_h_general".into(),
            detail: format!("tensor over {} points vs metric space with {}", t.n(), ms.n()),
        });
    }
    if a == 2 {
        require_ker_m(t, tol)?;
    }
    let n = ms.n();
    let sigma = S::from_i64(sign_for_arity(a));
    let mut out = FunctionTensor::zero(n, a + 1)?;
    let mut pinned = Vec::new();
    for flat in 0..out.values.len() {
        let y = digits(flat, n, a + 1);
        let v = h_eval(ms, t, &y, &mut pinned, reading)?;
        out.values[flat] = sigma.clone() * v;
    }
    NormalizedTensor::new(out).map_err(|_| {
        Error::InvariantViolation("homotopy output escaped the normalized subcomplex".into())
    })
}

/// Symbolic expansion of the homotopy at one evaluation point: the pairs
/// (input tuple, coefficient) such that h(f)(y) = Σ coef·f(tuple). Mirrors
/// `h_eval` exactly, σ sign included; `verify_contraction` runs on these
/// sparse rows so that basis-exhaustive checks cost O(nonzeros) instead of
/// O(n^arity) per basis element.
fn sym_h<S: Scalar>(
    ms: &FiniteMetricSpace<S>,
    f_arity: usize,
    y: &[usize],
    pinned: &mut Vec<usize>,
    reading: HomotopyReading,
    out: &mut Vec<(usize, S)>,
    carry: S,
) -> Result<()> {
    let n = ms.n();
    let a = f_arity - pinned.len();
    let w = spine_weight(ms, y)?;
    if w.is_zero() {
        return Ok(());
    }
    let scale = carry * w;
    let idx_of = |mid: &[usize], pinned: &[usize]| {
        let mut arg = Vec::with_capacity(f_arity);
        arg.extend_from_slice(mid);
        arg.extend_from_slice(pinned);
        encode(&arg, n)
    };
    if a == 4 && reading == HomotopyReading::RepeatedEndpoint {
        let w2 = spine_weight(ms, &y[..4])?;
        let w1 = spine_weight(ms, &y[..3])?;
        out.push((idx_of(&[y[0], y[1], y[2], y[4]], pinned), scale.clone()));
        out.push((idx_of(&[y[0], y[1], y[4], y[4]], pinned), -(scale.clone() * w2.clone())));
        out.push((idx_of(&[y[0], y[2], y[4], y[4]], pinned), scale * w2 * w1));
        return Ok(());
    }
    let mut mid: Vec<usize> = y[..a - 1].to_vec();
    mid.push(y[a]);
    out.push((idx_of(&mid, pinned), scale.clone()));
    if a > 2 {
        pinned.insert(0, y[a]);
        sym_h(ms, f_arity, &y[..a], pinned, reading, out, -scale)?;
        pinned.remove(0);
    }
    Ok(())
}

/// The matrix of the signed homotopy on arity-a tensors, one sparse row per
/// output tuple.
fn h_rows<S: Scalar>(
    ms: &FiniteMetricSpace<S>,
    a: usize,
    reading: HomotopyReading,
) -> Result<Vec<Vec<(usize, S)>>> {
    let n = ms.n();
    let sigma = S::from_i64(sign_for_arity(a));
    let mut rows = Vec::with_capacity(npow(n, a + 1));
    let mut pinned = Vec::new();
    for flat in 0..npow(n, a + 1) {
        let y = digits(flat, n, a + 1);
        let mut row = Vec::new();
        sym_h(ms, a, &y, &mut pinned, reading, &mut row, sigma.clone())?;
        rows.push(row);
    }
    Ok(rows)
}

type Sparse<S> = std::collections::BTreeMap<usize, S>;

fn sparse_add<S: Scalar>(acc: &mut Sparse<S>, idx: usize, v: S) {
    let e = acc.entry(idx).or_insert_with(S::zero);
    *e = e.clone() + v;
}

/// b′ of a sparse tensor: only values at tuples with an adjacent duplicate
/// enter the boundary, each contributing to the tuple with the duplicate
/// collapsed.
fn bprime_sparse<S: Scalar>(n: usize, arity: usize, f: &Sparse<S>) -> Sparse<S> {
    let mut out = Sparse::new();
    for (&flat, v) in f {
        let t = digits(flat, n, arity);
        for i in 0..arity - 1 {
            if t[i] != t[i + 1] {
                continue;
            }
            let mut z = t.clone();
            z.remove(i + 1);
            let signed = if i % 2 == 1 { -v.clone() } else { v.clone() };
            sparse_add(&mut out, encode(&z, n), signed);
        }
    }
    out
}

/// Per-arity outcome of the contraction check.
#[derive(Clone, Debug)]
pub struct ArityCheck {
    pub arity: usize,
    pub basis_checked: usize,
    pub max_residual: f64,
    pub exact: bool,
}

#[derive(Clone, Debug)]
pub struct ContractionReport {
    pub reading: HomotopyReading,
    pub per_arity: Vec<ArityCheck>,
    pub all_exact: bool,
}

fn normalized_basis(n: usize, a: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for flat in 0..npow(n, a) {
        let t = digits(flat, n, a);
        if a == 2 {
            if t[0] == t[1] {
                continue; // basis of ker(m)
            }
        } else if violating_pair(&t).is_some() {
            continue;
        }
        out.push(t);
    }
    out
}

/// Exhaustively check b′h + hb′ = 1 on a basis of the normalized subcomplex
/// in every arity 2..=max_arity (arity 2 relative to ker(m), where the hb′
/// term vanishes). Exactness is literal for rational scalars.
pub fn verify_contraction<S: Scalar>(
    ms: &FiniteMetricSpace<S>,
    max_arity: usize,
    reading: HomotopyReading,
    tol: &Tol,
) -> Result<ContractionReport> {
    if max_arity < 2 {
        return Err(Error::DomainViolation("max_arity must be at least 2".into()));
    }
    if max_arity > MAX_H_ARITY {
        return Err(Error::ArityViolation { arity: max_arity, max: MAX_H_ARITY });
    }
    let _ = tol;
    let n = ms.n();
    let mut cols: Vec<Vec<Vec<(usize, S)>>> = Vec::new();
    for a in 2..=max_arity {
        let rows = h_rows(ms, a, reading)?;
        let mut c: Vec<Vec<(usize, S)>> = vec![Vec::new(); npow(n, a)];
        for (row, pairs) in rows.iter().enumerate() {
            for (idx, v) in pairs {
                c[*idx].push((row, v.clone()));
            }
        }
        cols.push(c);
    }
    let mut per_arity = Vec::new();
    let mut all_exact = true;
    for a in 2..=max_arity {
        let basis = normalized_basis(n, a);
        let mut max_residual: f64 = 0.0;
        let mut exact = true;
        for tuple in &basis {
            let t_flat = encode(tuple, n);
            let mut hd = Sparse::new();
            for (row, v) in &cols[a - 2][t_flat] {
                sparse_add(&mut hd, *row, v.clone());
            }
            // residual of (b′h + hb′ − 1) applied to the indicator of `tuple`
            let mut res = bprime_sparse(n, a + 1, &hd);
            sparse_add(&mut res, t_flat, -S::one());
            if a >= 3 {
                let mut d = Sparse::new();
                d.insert(t_flat, S::one());
                for (&z, c) in &bprime_sparse(n, a, &d) {
                    for (row, v) in &cols[a - 3][z] {
                        sparse_add(&mut res, *row, c.clone() * v.clone());
                    }
                }
            }
            for v in res.values() {
                max_residual = max_residual.max(v.magnitude());
                exact &= v.is_zero();
            }
        }
        all_exact &= exact;
        per_arity.push(ArityCheck { arity: a, basis_checked: basis.len(), max_residual, exact });
    }
    Ok(ContractionReport { reading, per_arity, all_exact })
}

/// The algebra of functions on the point set: the diagonal product
/// e_i·e_j = δ_{ij} e_i with unit (1, …, 1).
pub fn functions_algebra<S: Scalar>(n: usize, tol: &Tol) -> Result<AssocAlgebra<S>> {
    let mut product = HochschildCochain::zero(n, 2)?;
    for i in 0..n {
        product.set(&[i, i], i, S::one());
    }
    AssocAlgebra::from_product(product, Some(vec![S::one(); n]), tol)
}

/// The Hochschild boundary of the functions algebra, obtained by dualizing
/// b′ through the bimodule identification rather than from the cochain
/// formula: a bimodule map C(M^{k+2}) → C(M) is a cochain of arity k, and
/// b′ pulls back along indicator functions.
pub fn hochschild_boundary_from_bprime<S: Scalar>(n: usize, k: usize) -> Result<Mat<S>> {
    if n == 0 {
        return Err(Error::DomainViolation("need a positive point count".into()));
    }
    if k + 1 > crate::hochschild_deform::MAX_ARITY {
        return Err(Error::ArityViolation {
            arity: k + 1,
            max: crate::hochschild_deform::MAX_ARITY,
        });
    }
    let mut out: Mat<S> = Mat::zeros(npow(n, k + 1) * n, npow(n, k) * n);
    for pt in 0..npow(n, k + 1) {
        let p = digits(pt, n, k + 1);
        for x in 0..n {
            let row = pt * n + x;
            let mut q = Vec::with_capacity(k + 3);
            q.push(x);
            q.extend_from_slice(&p);
            q.push(x);
            for i in 0..=k + 1 {
                if q[i] != q[i + 1] {
                    continue;
                }
                let mut dropped = q.clone();
                dropped.remove(i + 1);
                if dropped[0] != x || dropped[k + 1] != x {
                    continue;
                }
                let col = encode(&dropped[1..=k], n) * n + x;
                let e = &mut out[(row, col)];
                *e = if i % 2 == 1 { e.clone() - S::one() } else { e.clone() + S::one() };
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hochschild_deform::{
        build_degree2_splitting, hochschild_d_block, product_conjugation_family,
        trivialize_product_family, SplittingOutcome,
    };
    use crate::lie_deform::TAU_TRIV;
    use crate::scalar::Rat;
    use proptest::prelude::*;

    fn ri(n: i64) -> Rat {
        Rat::from_i64(n)
    }

    fn rr(p: i64, q: i64) -> Rat {
        Rat::from_ratio(p, q)
    }

    fn tol() -> Tol {
        Tol::default()
    }

    fn two_point() -> FiniteMetricSpace<Rat> {
        let rho = Mat::from_rows(vec![vec![ri(0), ri(1)], vec![ri(1), ri(0)]]).unwrap();
        FiniteMetricSpace::new(rho, &tol()).unwrap()
    }

    fn three_point() -> FiniteMetricSpace<Rat> {
        let rho = Mat::from_rows(vec![
            vec![ri(0), ri(1), ri(2)],
            vec![ri(1), ri(0), rr(3, 2)],
            vec![ri(2), rr(3, 2), ri(0)],
        ])
        .unwrap();
        FiniteMetricSpace::new(rho, &tol()).unwrap()
    }

    /// All off-diagonal distances in [1, 2], so the triangle inequality is
    /// automatic and the values can be scrambled freely.
    fn seeded_metric(n: usize, seed: i64) -> FiniteMetricSpace<Rat> {
        let mut rho = Mat::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let v = rr(8 + (seed + 31 * i as i64 + 17 * j as i64).rem_euclid(8), 8);
                rho[(i, j)] = v.clone();
                rho[(j, i)] = v;
            }
        }
        FiniteMetricSpace::new(rho, &tol()).unwrap()
    }

    fn seeded_tensor(n: usize, arity: usize, seed: i64) -> FunctionTensor<Rat> {
        let mut f = FunctionTensor::zero(n, arity).unwrap();
        let mut s = seed;
        for v in f.values.iter_mut() {
            s = (s * 31 + 7) % 23;
            *v = ri(s - 11);
        }
        f
    }

    #[test]
    fn metric_space_validation() {
        assert_eq!(two_point().n(), 2);
        assert_eq!(three_point().rho(1, 2), rr(3, 2));
        let bad_sym = Mat::from_rows(vec![vec![ri(0), ri(1)], vec![ri(2), ri(0)]]).unwrap();
        assert!(matches!(
            FiniteMetricSpace::new(bad_sym, &tol()),
            Err(Error::AxiomViolation(_))
        ));
        let bad_diag = Mat::from_rows(vec![vec![ri(1), ri(1)], vec![ri(1), ri(0)]]).unwrap();
        assert!(matches!(
            FiniteMetricSpace::new(bad_diag, &tol()),
            Err(Error::AxiomViolation(_))
        ));
        let bad_pos = Mat::from_rows(vec![vec![ri(0), ri(-1)], vec![ri(-1), ri(0)]]).unwrap();
        assert!(matches!(
            FiniteMetricSpace::new(bad_pos, &tol()),
            Err(Error::AxiomViolation(_))
        ));
        let bad_tri = Mat::from_rows(vec![
            vec![ri(0), ri(1), ri(5)],
            vec![ri(1), ri(0), ri(1)],
            vec![ri(5), ri(1), ri(0)],
        ])
        .unwrap();
        assert!(matches!(
            FiniteMetricSpace::new(bad_tri, &tol()),
            Err(Error::AxiomViolation(_))
        ));
    }

    #[test]
    fn bprime_bottom_is_restriction_to_diagonal() {
        let f = seeded_tensor(3, 2, 5);
        let m = bprime(&f).unwrap();
        for x in 0..3 {
            assert_eq!(m.get(&[x]), f.get(&[x, x]));
        }
        assert!(matches!(
            bprime(&seeded_tensor(3, 1, 1)),
            Err(Error::ArityViolation { .. })
        ));
    }

    #[test]
    fn bprime_of_constants_telescopes() {
        // odd argument counts cancel completely, even ones leave one survivor
        let n = 3;
        let one3 = FunctionTensor::from_values(n, 3, vec![ri(1); 27]).unwrap();
        assert!(bprime(&one3).unwrap().is_zero());
        let one4 = FunctionTensor::from_values(n, 4, vec![ri(1); 81]).unwrap();
        let b = bprime(&one4).unwrap();
        for v in b.values() {
            assert_eq!(*v, ri(1));
        }
        // direct-summation oracle on a non-constant tensor
        let f = seeded_tensor(2, 3, 9);
        let b = bprime(&f).unwrap();
        for y0 in 0..2 {
            for y1 in 0..2 {
                let want = f.get(&[y0, y0, y1]) - f.get(&[y0, y1, y1]);
                assert_eq!(b.get(&[y0, y1]), want);
            }
        }
    }

    #[test]
    fn bprime_squares_to_zero() {
        for arity in 3..=5usize {
            let f = seeded_tensor(3, arity, 11 + arity as i64);
            let bb = bprime(&bprime(&f).unwrap()).unwrap();
            assert!(bb.is_zero(), "arity {arity}");
        }
    }

    #[test]
    fn normalize_project_behavior() {
        let n = 2;
        let one3 = FunctionTensor::from_values(n, 3, vec![ri(1); 8]).unwrap();
        let p = normalize_project(&one3);
        for flat in 0..8 {
            let t = digits(flat, n, 3);
            let want = if t[0] == t[1] { ri(0) } else { ri(1) };
            assert_eq!(p.tensor().values()[flat], want, "{t:?}");
        }
        // the final adjacent pair is exempt
        assert_eq!(p.tensor().get(&[0, 1, 1]), ri(1));
        // idempotence
        let f = seeded_tensor(3, 4, 21);
        let once = normalize_project(&f);
        let twice = normalize_project(once.tensor());
        assert_eq!(once, twice);
        // checked constructor accepts exactly the projected tensors
        assert!(NormalizedTensor::new(f.clone()).is_err());
        assert!(NormalizedTensor::new(once.tensor().clone()).is_ok());
        // arities 1 and 2 are vacuously normalized
        assert!(NormalizedTensor::new(seeded_tensor(3, 2, 3)).is_ok());
    }

    #[test]
    fn bprime_preserves_normalization() {
        for arity in 3..=5usize {
            let f = normalize_project(&seeded_tensor(3, arity, 2 * arity as i64));
            let b = bprime(f.tensor()).unwrap();
            assert!(NormalizedTensor::new(b).is_ok(), "arity {arity}");
        }
    }

    #[test]
    fn metric_h_hand_table_on_two_points() {
        // f ∈ ker(m) on {a, b} with ρ(a,b) = 1; weights by hand:
        //   h(f)(x₀,x₁,x₂) = −ρ(x₀,x₁)/(ρ(x₀,x₁)+ρ(x₁,x₂))·f(x₀,x₂)
        let ms = two_point();
        let mut f = FunctionTensor::zero(2, 2).unwrap();
        f.set(&[0, 1], ri(5));
        f.set(&[1, 0], ri(7));
        let nf = NormalizedTensor::new(f).unwrap();
        let h = metric_h(&nf, &ms, HomotopyReading::Telescoped, &tol()).unwrap();
        let expect = [
            ((0, 0, 0), ri(0)),  // weight 0/0
            ((0, 0, 1), ri(0)),  // weight 0/(0+1)
            ((0, 1, 0), ri(0)),  // weight 1/2, f(0,0) = 0
            ((0, 1, 1), ri(-5)), // weight 1/(1+0) = 1, f(0,1) = 5
            ((1, 0, 0), ri(-7)), // weight 1, f(1,0) = 7
            ((1, 0, 1), ri(0)),  // weight 1/2, f(1,1) = 0
            ((1, 1, 0), ri(0)),
            ((1, 1, 1), ri(0)),
        ];
        for ((a, b, c), v) in expect {
            assert_eq!(h.tensor().get(&[a, b, c]), v, "({a},{b},{c})");
        }
        // the quoted weight pattern: |h(f)(a,b,x₂)| = f(a,x₂)/(1+ρ(b,x₂))
        assert_eq!(
            h.tensor().get(&[0, 1, 1]).magnitude(),
            5.0 / (1.0 + ms.rho(1, 1).to_f64())
        );
    }

    #[test]
    fn metric_h_domain_checks() {
        let ms = two_point();
        let mut diag = FunctionTensor::zero(2, 2).unwrap();
        diag.set(&[0, 0], ri(1));
        let nd = NormalizedTensor::new(diag).unwrap();
        assert!(matches!(
            metric_h(&nd, &ms, HomotopyReading::Telescoped, &tol()),
            Err(Error::DomainViolation(_))
        ));
        let zero = NormalizedTensor::new(FunctionTensor::zero(2, 2).unwrap()).unwrap();
        let h = metric_h(&zero, &ms, HomotopyReading::Telescoped, &tol()).unwrap();
        assert!(h.tensor().is_zero());
        let five = NormalizedTensor::new(FunctionTensor::<Rat>::zero(2, 5).unwrap()).unwrap();
        assert!(matches!(
            metric_h(&five, &ms, HomotopyReading::Telescoped, &tol()),
            Err(Error::ArityViolation { .. })
        ));
    }

    #[test]
    fn general_homotopy_matches_components() {
        let ms = three_point();
        for arity in 2..=4usize {
            let mut raw = seeded_tensor(3, arity, 6 + arity as i64);
            if arity == 2 {
                for x in 0..3 {
                    raw.set(&[x, x], ri(0));
                }
            }
            let f = normalize_project(&raw);
            for reading in [HomotopyReading::Telescoped, HomotopyReading::RepeatedEndpoint] {
                let a = metric_h(&f, &ms, reading, &tol()).unwrap();
                let b = metric_h_general(&f, &ms, reading, &tol()).unwrap();
                assert_eq!(a, b, "arity {arity}, {reading:?}");
            }
        }
        // the two readings are genuinely different operators at arity 4
        let k = normalize_project(&seeded_tensor(3, 4, 13));
        let t = metric_h(&k, &ms, HomotopyReading::Telescoped, &tol()).unwrap();
        let r = metric_h(&k, &ms, HomotopyReading::RepeatedEndpoint, &tol()).unwrap();
        assert_ne!(t, r);
    }

    #[test]
    fn contraction_identity_small_spaces() {
        for ms in [two_point(), three_point()] {
            let report =
                verify_contraction(&ms, 4, HomotopyReading::Telescoped, &tol()).unwrap();
            assert!(report.all_exact, "{report:?}");
            for check in &report.per_arity {
                assert_eq!(check.max_residual, 0.0);
                assert!(check.basis_checked > 0);
            }
        }
        // one point: every space is zero and the check is vacuous
        let one = FiniteMetricSpace::new(Mat::from_rows(vec![vec![ri(0)]]).unwrap(), &tol())
            .unwrap();
        let report = verify_contraction(&one, 4, HomotopyReading::Telescoped, &tol()).unwrap();
        assert!(report.all_exact);
        assert!(report.per_arity.iter().all(|c| c.basis_checked == 0));
    }

    #[test]
    fn reading_resolution() {
        // The contraction identity cannot tell the two conventions apart at
        // any arity: in b′h + hb′ every inner correction is evaluated either
        // under a vanishing weight or on a tuple that normalization kills,
        // so only the outer weight and head term — identical in both
        // readings — survive. Both must therefore verify exactly through
        // arity 5, even though they are different operators.
        let ms = seeded_metric(3, 41);
        for reading in [HomotopyReading::Telescoped, HomotopyReading::RepeatedEndpoint] {
            let report = verify_contraction(&ms, 5, reading, &tol()).unwrap();
            assert!(report.all_exact, "{reading:?} must contract through arity 5");
        }
        // What does discriminate: the uniform recursion. Its arity-4
        // specialization is exactly the Telescoped component, and it cannot
        // reproduce RepeatedEndpoint (whose inner weights belong to the
        // telescoped argument lists).
        let k = normalize_project(&seeded_tensor(3, 4, 29));
        let recursion =
            metric_h_general(&k, &ms, HomotopyReading::Telescoped, &tol()).unwrap();
        let tele = metric_h(&k, &ms, HomotopyReading::Telescoped, &tol()).unwrap();
        let rep = metric_h(&k, &ms, HomotopyReading::RepeatedEndpoint, &tol()).unwrap();
        assert_eq!(recursion, tele);
        assert_ne!(recursion, rep);
    }

    #[test]
    fn contraction_identity_four_points_arity_five() {
        let ms = seeded_metric(4, 7);
        let report = verify_contraction(&ms, 5, HomotopyReading::Telescoped, &tol()).unwrap();
        assert!(report.all_exact, "{report:?}");
        assert_eq!(report.per_arity.last().unwrap().arity, 5);
    }

    #[test]
    fn dualized_bprime_is_the_hochschild_boundary() {
        for n in [2usize, 3] {
            let a = functions_algebra::<Rat>(n, &tol()).unwrap();
            for k in 0..=3usize {
                let via_bprime = hochschild_boundary_from_bprime::<Rat>(n, k).unwrap();
                let direct = hochschild_d_block(&a, k).unwrap();
                assert_eq!(via_bprime, direct, "n = {n}, degree {k}");
            }
        }
    }

    #[test]
    fn functions_algebra_trivializes_smoothly() {
        // the ODE pipeline wired to a functions algebra as a smoke test
        let a = functions_algebra::<Rat>(3, &tol()).unwrap();
        let SplittingOutcome::Found { h, g } = build_degree2_splitting(&a, &tol()).unwrap()
        else {
            panic!("functions algebras are separable and must split");
        };
        let mut x = Mat::<Rat>::zeros(3, 3);
        x[(0, 1)] = ri(1);
        x[(1, 2)] = ri(-1);
        let fam = product_conjugation_family(&a, &x, 1.0, &tol()).unwrap();
        let out = trivialize_product_family(&fam, &h, &g, 0.4, 8, &tol()).unwrap();
        assert!(out.defects.iter().all(|&d| d <= TAU_TRIV));
    }

    #[test]
    fn sparse_rows_match_dense_homotopy() {
        // verify_contraction runs on the symbolic row expansion; anchor it
        // to the dense evaluator on every normalized basis element
        for n in [2usize, 3] {
            let ms = seeded_metric(n, 17);
            for a in 2..=4usize {
                for reading in
                    [HomotopyReading::Telescoped, HomotopyReading::RepeatedEndpoint]
                {
                    let rows = h_rows::<Rat>(&ms, a, reading).unwrap();
                    for tuple in normalized_basis(n, a) {
                        let t_flat = encode(&tuple, n);
                        let delta = FunctionTensor::<Rat>::delta(n, &tuple).unwrap();
                        let nt = NormalizedTensor::new(delta).unwrap();
                        let dense = metric_h_general(&nt, &ms, reading, &tol()).unwrap();
                        for (row_idx, pairs) in rows.iter().enumerate() {
                            let mut acc = ri(0);
                            for (idx, c) in pairs {
                                if *idx == t_flat {
                                    acc = acc + c.clone();
                                }
                            }
                            assert_eq!(
                                dense.tensor().values()[row_idx],
                                acc,
                                "n={n} a={a} {reading:?} tuple {tuple:?} row {row_idx}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn five_point_verification_is_fast() {
        let ms = seeded_metric(5, 3);
        let start = std::time::Instant::now();
        let report = verify_contraction(&ms, 4, HomotopyReading::Telescoped, &tol()).unwrap();
        assert!(report.all_exact, "{report:?}");
        assert!(
            start.elapsed() < std::time::Duration::from_secs(5),
            "5-point verification took {:?}",
            start.elapsed()
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        /// normalize_project is idempotent and b′ preserves its image.
        #[test]
        fn projection_idempotent_and_stable(
            values in proptest::collection::vec(-9i64..=9, 81),
        ) {
            let f = FunctionTensor::from_values(
                3, 4, values.iter().map(|&v| ri(v)).collect(),
            ).unwrap();
            let once = normalize_project(&f);
            prop_assert_eq!(&once, &normalize_project(once.tensor()));
            let b = bprime(once.tensor()).unwrap();
            prop_assert!(NormalizedTensor::new(b).is_ok());
        }

        /// b′∘b′ = 0 on arbitrary arity-4 tensors.
        #[test]
        fn bprime_square_zero(values in proptest::collection::vec(-9i64..=9, 81)) {
            let f = FunctionTensor::from_values(
                3, 4, values.iter().map(|&v| ri(v)).collect(),
            ).unwrap();
            prop_assert!(bprime(&bprime(&f).unwrap()).unwrap().is_zero());
        }
    }
}
