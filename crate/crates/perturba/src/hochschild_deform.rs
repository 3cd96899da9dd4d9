//! Hochschild deformation theory for finite-dimensional associative
//! algebras: the cochain complex and Gerstenhaber structure, Poisson
//! obstructions, degree-2 splittings, order-by-order trivialization of
//! formal deformations, and the ODE trivialization of product families.
//!
//! At finite dimension all multilinear maps are continuous, so the
//! topological-tensor-product of the Banach setting collapses to plain
//! tensors; everything here is exact over the rationals or runs in `f64`.

use crate::complexes::Complex;
use crate::error::{Error, Result};
use crate::graded::{GradedMap, GradedModule};
use crate::lie_deform::{one_cochain_from_coords, TrivializationResult, TAU_TRIV};
use crate::matrix::Mat;
use crate::perturbation::Perturbation;
use crate::perturbation::{perturb_degree_contraction, DegreeContraction};
use crate::scalar::{Scalar, Tol};
use std::collections::BTreeMap;

/// Largest cochain arity kept in memory: C⁴ has n⁵ coordinates, which is the
/// most the degree-2 pipeline ever touches (d of a 3-cochain).
pub const MAX_ARITY: usize = 4;

fn npow(n: usize, k: usize) -> usize {
    n.pow(k as u32)
}

/// Big-endian digits of `flat` in base n: the basis tuple (t_1, …, t_k).
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

/// A multilinear map A^⊗k → A as a dense coordinate tensor:
/// `coords[tuple·n + m]` is the e_m-coefficient of the value on the basis
/// tuple, with tuples packed big-endian in base n. Arity 0 is an element of
/// A; arity 2 cochains double as multiplication tensors.
#[derive(Clone, Debug, PartialEq)]
pub struct HochschildCochain<S: Scalar> {
    n: usize,
    arity: usize,
    coords: Vec<S>,
}

impl<S: Scalar> HochschildCochain<S> {
    pub fn zero(n: usize, arity: usize) -> Result<Self> {
        if arity > MAX_ARITY {
            return Err(Error::ArityViolation { arity, max: MAX_ARITY });
        }
        if n == 0 {
            return Err(Error::DomainViolation("cochains need a positive dimension".into()));
        }
        Ok(HochschildCochain { n, arity, coords: vec![S::zero(); npow(n, arity) * n] })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn coords(&self) -> &[S] {
        &self.coords
    }

    pub fn from_coords(n: usize, arity: usize, coords: Vec<S>) -> Result<Self> {
        let want = npow(n, arity) * n;
        if coords.len() != want {
            return Err(Error::ShapeMismatch {
                context: "HochschildCochain::from_coords".into(),
                detail: format!("expected {want} coordinates, got {}", coords.len()),
            });
        }
        let z = Self::zero(n, arity)?;
        Ok(HochschildCochain { coords, ..z })
    }

    pub fn get(&self, tuple: &[usize], m: usize) -> S {
        debug_assert_eq!(tuple.len(), self.arity);
        self.coords[encode(tuple, self.n) * self.n + m].clone()
    }

    pub fn set(&mut self, tuple: &[usize], m: usize, v: S) {
        debug_assert_eq!(tuple.len(), self.arity);
        let idx = encode(tuple, self.n) * self.n + m;
        self.coords[idx] = v;
    }

    /// The value on a basis tuple, as a coefficient slice of length n.
    pub fn value_on(&self, tuple: &[usize]) -> &[S] {
        debug_assert_eq!(tuple.len(), self.arity);
        let base = encode(tuple, self.n) * self.n;
        &self.coords[base..base + self.n]
    }

    /// Bilinear evaluation for arity-2 cochains.
    pub fn eval2(&self, x: &[S], y: &[S]) -> Result<Vec<S>> {
        if self.arity != 2 {
            return Err(Error::ArityViolation { arity: self.arity, max: 2 });
        }
        if x.len() != self.n || y.len() != self.n {
            return Err(Error::ShapeMismatch {
                context: "HochschildCochain::eval2".into(),
                detail: format!("arguments must have length {}", self.n),
            });
        }
        let mut out = vec![S::zero(); self.n];
        for (a, xa) in x.iter().enumerate() {
            if xa.is_zero() {
                continue;
            }
            for (b, yb) in y.iter().enumerate() {
                if yb.is_zero() {
                    continue;
                }
                let c = xa.clone() * yb.clone();
                let base = (a * self.n + b) * self.n;
                for (m, o) in out.iter_mut().enumerate() {
                    *o = o.clone() + c.clone() * self.coords[base + m].clone();
                }
            }
        }
        Ok(out)
    }

    /// Arity-2 tensor in the out-major nesting t[k][i][j] used by the JSON
    /// schema (the value of e_i·e_j has e_k-coefficient t[k][i][j]).
    pub fn from_nested2(t: &[Vec<Vec<S>>]) -> Result<Self> {
        let n = t.len();
        if n == 0 || t.iter().any(|p| p.len() != n || p.iter().any(|r| r.len() != n)) {
            return Err(Error::ShapeMismatch {
                context: "HochschildCochain::from_nested2".into(),
                detail: "tensor is not n×n×n".into(),
            });
        }
        let mut out = Self::zero(n, 2)?;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    out.set(&[i, j], k, t[k][i][j].clone());
                }
            }
        }
        Ok(out)
    }

    pub fn to_nested2(&self) -> Result<Vec<Vec<Vec<S>>>> {
        if self.arity != 2 {
            return Err(Error::ArityViolation { arity: self.arity, max: 2 });
        }
        Ok((0..self.n)
            .map(|k| {
                (0..self.n)
                    .map(|i| (0..self.n).map(|j| self.get(&[i, j], k)).collect())
                    .collect()
            })
            .collect())
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        if self.n != rhs.n || self.arity != rhs.arity {
            return Err(Error::ShapeMismatch {
                context: "HochschildCochain::add".into(),
                detail: format!(
                    "({}, arity {}) vs ({}, arity {})",
                    self.n, self.arity, rhs.n, rhs.arity
                ),
            });
        }
        let coords = self.coords.iter().zip(&rhs.coords).map(|(a, b)| a.clone() + b.clone()).collect();
        Ok(HochschildCochain { n: self.n, arity: self.arity, coords })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Self {
        HochschildCochain {
            n: self.n,
            arity: self.arity,
            coords: self.coords.iter().map(|a| -a.clone()).collect(),
        }
    }

    pub fn scale(&self, c: &S) -> Self {
        HochschildCochain {
            n: self.n,
            arity: self.arity,
            coords: self.coords.iter().map(|a| a.clone() * c.clone()).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|a| a.is_zero())
    }

    pub fn is_zero_within(&self, tol: &Tol) -> bool {
        self.coords.iter().all(|a| a.is_zero_within(tol))
    }

    pub fn norm_inf(&self) -> f64 {
        self.coords.iter().map(|a| a.magnitude()).fold(0.0, f64::max)
    }

    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T) -> HochschildCochain<T> {
        HochschildCochain { n: self.n, arity: self.arity, coords: self.coords.iter().map(f).collect() }
    }
}

/// A finite-dimensional associative algebra by structure constants, with an
/// optional declared unit. The boundary sign s in d(α) = s·[α, m] is probed
/// once at construction and stored.
#[derive(Clone, Debug)]
pub struct AssocAlgebra<S: Scalar> {
    product: HochschildCochain<S>,
    unit: Option<Vec<S>>,
    boundary_sign: i64,
}

impl<S: Scalar> AssocAlgebra<S> {
    /// Structure constants in the out-major nesting m[k][i][j].
    pub fn new(m: &[Vec<Vec<S>>], unit: Option<Vec<S>>, tol: &Tol) -> Result<Self> {
        Self::from_product(HochschildCochain::from_nested2(m)?, unit, tol)
    }

    pub fn from_product(
        product: HochschildCochain<S>,
        unit: Option<Vec<S>>,
        tol: &Tol,
    ) -> Result<Self> {
        if product.arity() != 2 {
            return Err(Error::ArityViolation { arity: product.arity(), max: 2 });
        }
        let n = product.n();
        // associativity is exactly m∘m = 0
        let assoc = circle(&product, &product)?;
        if !assoc.is_zero_within(tol) {
            return Err(Error::AxiomViolation(format!(
                "structure constants are not associative (residual {:e})",
                assoc.norm_inf()
            )));
        }
        if let Some(u) = &unit {
            if u.len() != n {
                return Err(Error::ShapeMismatch {
                    context: "AssocAlgebra::new".into(),
                    detail: format!("unit vector must have length {n}"),
                });
            }
            for i in 0..n {
                let mut e = vec![S::zero(); n];
                e[i] = S::one();
                let left = product.eval2(u, &e)?;
                let right = product.eval2(&e, u)?;
                let ok = |v: &[S]| {
                    v.iter()
                        .enumerate()
                        .all(|(m, c)| c.approx_eq(if m == i { &e[i] } else { &e[m] }, tol))
                };
                if !ok(&left) || !ok(&right) {
                    return Err(Error::AxiomViolation(format!(
                        "declared unit does not act as an identity on basis vector {i}"
                    )));
                }
            }
        }
        let boundary_sign = probe_boundary_sign(&product, tol)?;
        Ok(AssocAlgebra { product, unit, boundary_sign })
    }

    pub fn dim(&self) -> usize {
        self.product.n()
    }

    pub fn product(&self) -> &HochschildCochain<S> {
        &self.product
    }

    pub fn unit(&self) -> Option<&[S]> {
        self.unit.as_deref()
    }

    /// The empirical global sign s with d(α) = s·[α, m].
    pub fn boundary_sign(&self) -> i64 {
        self.boundary_sign
    }

    pub fn mul(&self, x: &[S], y: &[S]) -> Result<Vec<S>> {
        self.product.eval2(x, y)
    }

    pub fn mul_basis(&self, i: usize, j: usize) -> &[S] {
        self.product.value_on(&[i, j])
    }

    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T) -> AssocAlgebra<T> {
        AssocAlgebra {
            product: self.product.map_scalars(&f),
            unit: self.unit.as_ref().map(|u| u.iter().map(&f).collect()),
            boundary_sign: self.boundary_sign,
        }
    }
}

/// Determine s ∈ {±1} with d(α) = s·[α, m] by sweeping basis 1-cochains
/// (falling back to 2-cochains for degenerate products). Inconsistent
/// coordinates are an internal error; a product with d ≡ 0 defaults to −1.
fn probe_boundary_sign<S: Scalar>(product: &HochschildCochain<S>, tol: &Tol) -> Result<i64> {
    let n = product.n();
    let mut sign: Option<i64> = None;
    for arity in [1usize, 2] {
        for flat in 0..npow(n, arity) * n {
            let mut alpha = HochschildCochain::zero(n, arity)?;
            alpha.coords[flat] = S::one();
            let da = d_of(product, &alpha)?;
            let br = gerstenhaber(&alpha, product)?;
            for (x, y) in da.coords.iter().zip(&br.coords) {
                if x.is_zero_within(tol) && y.is_zero_within(tol) {
                    continue;
                }
                let plus = x.approx_eq(y, tol);
                let minus = x.approx_eq(&-y.clone(), tol);
                let found = match (plus, minus) {
                    (true, true) => continue,
                    (true, false) => 1,
                    (false, true) => -1,
                    (false, false) => {
                        return Err(Error::InvariantViolation(
                            "d(α) is not proportional to [α, m] on a basis cochain".into(),
                        ))
                    }
                };
                match sign {
                    None => sign = Some(found),
                    Some(s) if s != found => {
                        return Err(Error::InvariantViolation(
                            "the sign relating d and [·, m] is not global".into(),
                        ))
                    }
                    _ => {}
                }
            }
        }
        if sign.is_some() {
            break;
        }
    }
    Ok(sign.unwrap_or(-1))
}

/// The Hochschild boundary against an explicit product tensor:
///
/// ```text
/// (dα)(a_0, …, a_k) = a_0·α(a_1, …, a_k)
///                   + Σ_{i=1}^{k} (−1)^i α(a_0, …, a_{i−1}a_i, …, a_k)
///                   + (−1)^{k+1} α(a_0, …, a_{k−1})·a_k .
/// ```
fn d_of<S: Scalar>(
    product: &HochschildCochain<S>,
    alpha: &HochschildCochain<S>,
) -> Result<HochschildCochain<S>> {
    let n = product.n();
    if alpha.n() != n {
        return Err(Error::ShapeMismatch {
            context: "hochschild_d".into(),
            detail: format!("cochain dimension {} vs algebra {n}", alpha.n()),
        });
    }
    let k = alpha.arity();
    let mut out: HochschildCochain<S> = HochschildCochain::zero(n, k + 1)?;
    let last_neg = k % 2 == 0; // (−1)^{k+1}
    for out_t in 0..npow(n, k + 1) {
        let u = digits(out_t, n, k + 1);
        let base = out_t * n;
        // a_0 · α(a_1..a_k)
        let head = encode(&u[1..], n) * n;
        for p in 0..n {
            let ap = &alpha.coords[head + p];
            if ap.is_zero() {
                continue;
            }
            let pb = (u[0] * n + p) * n;
            for m in 0..n {
                let c = product.coords[pb + m].clone() * ap.clone();
                out.coords[base + m] = out.coords[base + m].clone() + c;
            }
        }
        // merged arguments
        for i in 1..=k {
            let neg = i % 2 == 1;
            let pb = (u[i - 1] * n + u[i]) * n;
            for p in 0..n {
                let coef = product.coords[pb + p].clone();
                if coef.is_zero() {
                    continue;
                }
                let mut col = Vec::with_capacity(k);
                col.extend_from_slice(&u[..i - 1]);
                col.push(p);
                col.extend_from_slice(&u[i + 1..]);
                let src = encode(&col, n) * n;
                for m in 0..n {
                    let c = coef.clone() * alpha.coords[src + m].clone();
                    let e = &mut out.coords[base + m];
                    *e = if neg { e.clone() - c } else { e.clone() + c };
                }
            }
        }
        // α(a_0..a_{k−1}) · a_k
        let tail = encode(&u[..k], n) * n;
        for p in 0..n {
            let ap = &alpha.coords[tail + p];
            if ap.is_zero() {
                continue;
            }
            let pb = (p * n + u[k]) * n;
            for m in 0..n {
                let c = ap.clone() * product.coords[pb + m].clone();
                let e = &mut out.coords[base + m];
                *e = if last_neg { e.clone() - c } else { e.clone() + c };
            }
        }
    }
    Ok(out)
}

pub fn hochschild_d<S: Scalar>(
    alpha: &HochschildCochain<S>,
    a: &AssocAlgebra<S>,
) -> Result<HochschildCochain<S>> {
    d_of(a.product(), alpha)
}

/// The boundary C^k → C^{k+1} as a matrix in the flat coordinates.
fn d_block_of<S: Scalar>(product: &HochschildCochain<S>, k: usize) -> Result<Mat<S>> {
    let n = product.n();
    if k + 1 > MAX_ARITY {
        return Err(Error::ArityViolation { arity: k + 1, max: MAX_ARITY });
    }
    let mut out: Mat<S> = Mat::zeros(npow(n, k + 1) * n, npow(n, k) * n);
    let last_neg = k % 2 == 0;
    for out_t in 0..npow(n, k + 1) {
        let u = digits(out_t, n, k + 1);
        let head = encode(&u[1..], n);
        let tail = encode(&u[..k], n);
        for p in 0..n {
            let pb = (u[0] * n + p) * n;
            for m in 0..n {
                let c = product.coords[pb + m].clone();
                if c.is_zero() {
                    continue;
                }
                let e = &mut out[(out_t * n + m, head * n + p)];
                *e = e.clone() + c;
            }
            let pb = (p * n + u[k]) * n;
            for m in 0..n {
                let c = product.coords[pb + m].clone();
                if c.is_zero() {
                    continue;
                }
                let e = &mut out[(out_t * n + m, tail * n + p)];
                *e = if last_neg { e.clone() - c } else { e.clone() + c };
            }
        }
        for i in 1..=k {
            let neg = i % 2 == 1;
            let pb = (u[i - 1] * n + u[i]) * n;
            for p in 0..n {
                let coef = product.coords[pb + p].clone();
                if coef.is_zero() {
                    continue;
                }
                let mut col = Vec::with_capacity(k);
                col.extend_from_slice(&u[..i - 1]);
                col.push(p);
                col.extend_from_slice(&u[i + 1..]);
                let src = encode(&col, n);
                for m in 0..n {
                    let e = &mut out[(out_t * n + m, src * n + m)];
                    *e = if neg { e.clone() - coef.clone() } else { e.clone() + coef.clone() };
                }
            }
        }
    }
    Ok(out)
}

pub fn hochschild_d_block<S: Scalar>(a: &AssocAlgebra<S>, k: usize) -> Result<Mat<S>> {
    d_block_of(a.product(), k)
}

/// The Hochschild complex in degrees 0..=top (top ≤ 4), dim C^k = n^{k+1}.
/// Verifies d² = 0 with the default tolerance.
pub fn hochschild_complex<S: Scalar>(a: &AssocAlgebra<S>, top: usize) -> Result<Complex<S>> {
    if top > MAX_ARITY {
        return Err(Error::ArityViolation { arity: top, max: MAX_ARITY });
    }
    let n = a.dim();
    let dims: Vec<(i64, usize)> = (0..=top).map(|k| (k as i64, npow(n, k) * n)).collect();
    let module = GradedModule::from_pairs(&dims);
    let mut blocks = BTreeMap::new();
    for k in 0..top {
        blocks.insert(k as i64, hochschild_d_block(a, k)?);
    }
    let d = GradedMap::new(module.clone(), module.clone(), 1, blocks)?;
    let c = Complex::new(module, d)?;
    if !c.is_complex(&Tol::default())? {
        return Err(Error::AxiomViolation(
            "Hochschild boundary does not square to zero".into(),
        ));
    }
    Ok(c)
}

/// Gerstenhaber circle product,
///
/// ```text
/// (α∘β)(a_1, …, a_{p+q−1}) = Σ_{i=0}^{p−1} (−1)^{(q−1)i}
///     α(a_1, …, a_i, β(a_{i+1}, …, a_{i+q}), a_{i+q+1}, …, a_{p+q−1}) .
/// ```
pub fn circle<S: Scalar>(
    alpha: &HochschildCochain<S>,
    beta: &HochschildCochain<S>,
) -> Result<HochschildCochain<S>> {
    let (p, q) = (alpha.arity(), beta.arity());
    if p == 0 {
        return Err(Error::ArityViolation { arity: 0, max: MAX_ARITY });
    }
    if p + q - 1 > MAX_ARITY {
        return Err(Error::ArityViolation { arity: p + q - 1, max: MAX_ARITY });
    }
    let n = alpha.n();
    if beta.n() != n {
        return Err(Error::ShapeMismatch {
            context: "circle".into(),
            detail: format!("cochain dimensions {} vs {}", n, beta.n()),
        });
    }
    let r = p + q - 1;
    let mut out: HochschildCochain<S> = HochschildCochain::zero(n, r)?;
    for out_t in 0..npow(n, r) {
        let t = digits(out_t, n, r);
        let base = out_t * n;
        for i in 0..p {
            let neg = ((q as i64 - 1) * i as i64).rem_euclid(2) == 1;
            let inner = encode(&t[i..i + q], n) * n;
            let prefix = encode(&t[..i], n);
            let tail = encode(&t[i + q..], n);
            let tail_w = npow(n, p - 1 - i);
            for s in 0..n {
                let bs = &beta.coords[inner + s];
                if bs.is_zero() {
                    continue;
                }
                let outer = ((prefix * n + s) * tail_w + tail) * n;
                for m in 0..n {
                    let c = bs.clone() * alpha.coords[outer + m].clone();
                    let e = &mut out.coords[base + m];
                    *e = if neg { e.clone() - c } else { e.clone() + c };
                }
            }
        }
    }
    Ok(out)
}

/// [α, β] = α∘β − (−1)^{(p−1)(q−1)} β∘α, arities ≥ 1.
pub fn gerstenhaber<S: Scalar>(
    alpha: &HochschildCochain<S>,
    beta: &HochschildCochain<S>,
) -> Result<HochschildCochain<S>> {
    let (p, q) = (alpha.arity(), beta.arity());
    if p == 0 || q == 0 {
        return Err(Error::ArityViolation { arity: 0, max: MAX_ARITY });
    }
    let ab = circle(alpha, beta)?;
    let ba = circle(beta, alpha)?;
    if ((p - 1) * (q - 1)) % 2 == 1 {
        ab.add(&ba)
    } else {
        ab.sub(&ba)
    }
}

/// Report for a Poisson-structure candidate π ∈ C²: is it a cocycle, and is
/// [π, π] a coboundary? When solvable, `sigma` witnesses dσ = [π, π].
#[derive(Clone, Debug)]
pub struct PoissonReport<S: Scalar> {
    pub is_cocycle: bool,
    pub bracket_class_zero: bool,
    pub sigma: Option<HochschildCochain<S>>,
}

pub fn poisson_check<S: Scalar>(
    pi: &HochschildCochain<S>,
    a: &AssocAlgebra<S>,
    tol: &Tol,
) -> Result<PoissonReport<S>> {
    if pi.arity() != 2 {
        return Err(Error::ArityViolation { arity: pi.arity(), max: 2 });
    }
    if pi.n() != a.dim() {
        return Err(Error::ShapeMismatch {
            context: "poisson_check".into(),
            detail: format!("cochain dimension {} vs algebra {}", pi.n(), a.dim()),
        });
    }
    let is_cocycle = hochschild_d(pi, a)?.is_zero_within(tol);
    let br = gerstenhaber(pi, pi)?;
    let b2 = hochschild_d_block(a, 2)?;
    let rhs = Mat::from_fn(br.coords().len(), 1, |i, _| br.coords()[i].clone());
    let sigma = match b2.solve(&rhs, tol)? {
        Some(x) => Some(HochschildCochain::from_coords(a.dim(), 2, x.col(0))?),
        None => None,
    };
    Ok(PoissonReport { is_cocycle, bracket_class_zero: sigma.is_some(), sigma })
}

/// A candidate formal deformation a⋆b = ab + Σ c_k(a,b) t^k truncated at
/// order N. Order-by-order associativity is what `check_formal_order`
/// measures; construction only validates shapes.
#[derive(Clone, Debug)]
pub struct FormalDeformation<S: Scalar> {
    coeffs: Vec<HochschildCochain<S>>,
}

impl<S: Scalar> FormalDeformation<S> {
    pub fn new(coeffs: Vec<HochschildCochain<S>>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::DomainViolation(
                "a formal deformation needs at least one coefficient".into(),
            ));
        }
        let n = coeffs[0].n();
        for c in &coeffs {
            if c.arity() != 2 {
                return Err(Error::ArityViolation { arity: c.arity(), max: 2 });
            }
            if c.n() != n {
                return Err(Error::ShapeMismatch {
                    context: "FormalDeformation::new".into(),
                    detail: "coefficients live on different algebras".into(),
                });
            }
        }
        Ok(FormalDeformation { coeffs })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn n(&self) -> usize {
        self.coeffs[0].n()
    }

    pub fn coeffs(&self) -> &[HochschildCochain<S>] {
        &self.coeffs
    }
}

/// The order-k associativity residual d(c_k) − Σ_{i+j=k, i,j≥1} c_i∘c_j.
/// Zero exactly when the t^k-coefficient of the associator of ⋆ vanishes.
/// At k = 1 this is d(c₁); at k = 2 it is d(c₂) − ½[c₁, c₁] (the circle
/// square is half the Gerstenhaber square in even arity).
pub fn check_formal_order<S: Scalar>(
    def: &FormalDeformation<S>,
    a: &AssocAlgebra<S>,
    k: usize,
) -> Result<HochschildCochain<S>> {
    if k == 0 || k > def.order() {
        return Err(Error::DomainViolation(format!(
            "order {k} outside 1..={}",
            def.order()
        )));
    }
    if def.n() != a.dim() {
        return Err(Error::ShapeMismatch {
            context: "check_formal_order".into(),
            detail: format!("deformation dimension {} vs algebra {}", def.n(), a.dim()),
        });
    }
    let mut res = hochschild_d(&def.coeffs[k - 1], a)?;
    for i in 1..k {
        let j = k - i;
        res = res.sub(&circle(&def.coeffs[i - 1], &def.coeffs[j - 1])?)?;
    }
    Ok(res)
}

/// Outcome of the degree-2 splitting construction: either maps (h, g) with
/// b·h + g·b = 1 on C² exactly, or the dimension of H² obstructing it.
#[derive(Clone, Debug)]
pub enum SplittingOutcome<S: Scalar> {
    Found { h: Mat<S>, g: Mat<S> },
    Failed { h2_dim: usize },
}

fn degree2_window<S: Scalar>(product: &HochschildCochain<S>) -> Result<Complex<S>> {
    let n = product.n();
    let dims: Vec<(i64, usize)> = (1..=3).map(|k| (k, npow(n, k as usize) * n)).collect();
    let module = GradedModule::from_pairs(&dims);
    let mut blocks = BTreeMap::new();
    blocks.insert(1, d_block_of(product, 1)?);
    blocks.insert(2, d_block_of(product, 2)?);
    let d = GradedMap::new(module.clone(), module.clone(), 1, blocks)?;
    Complex::new(module, d)
}

/// Attempt the linear-algebra splitting of the Hochschild complex around
/// degree 2. Succeeds exactly when H²(A; A) = 0.
pub fn build_degree2_splitting<S: Scalar>(
    a: &AssocAlgebra<S>,
    tol: &Tol,
) -> Result<SplittingOutcome<S>> {
    let window = degree2_window(a.product())?;
    let dc = match crate::perturbation::build_contraction(&window, 2, tol) {
        Ok(dc) => dc,
        Err(Error::CohomologyNonzero { dim, .. }) => {
            return Ok(SplittingOutcome::Failed { h2_dim: dim })
        }
        Err(e) => return Err(e),
    };
    // our contraction convention is d·h + h·d = −1; the splitting wants +1
    let h = dc.h_k.neg();
    let g = dc.h_k1.neg();
    let b1 = window.d().block(1);
    let b2 = window.d().block(2);
    let ident = b1.mul(&h)?.add(&g.mul(&b2)?)?;
    if !ident.sub(&Mat::identity(ident.nrows()))?.is_zero_within(tol) {
        return Err(Error::InvariantViolation(
            "constructed splitting fails bh + gb = 1".into(),
        ));
    }
    Ok(SplittingOutcome::Found { h, g })
}

/// How to transgress cocycles when trivializing a formal deformation:
/// through a validated degree-2 splitting, or by a plain linear solve at
/// each order (which reports the obstructed order when it fails).
#[derive(Clone, Debug)]
pub enum TransgressionMethod<S: Scalar> {
    Splitting { h: Mat<S>, g: Mat<S> },
    LinearSolve,
}

/// Conjugate a truncated star product by the polynomial φ = Σ p_r t^r
/// (p_0 = 1): the new coefficients of a ⋆' b = φ⁻¹(φ(a) ⋆ φ(b)).
fn conj_by_poly<S: Scalar>(
    star: &[HochschildCochain<S>],
    p: &[Mat<S>],
) -> Result<Vec<HochschildCochain<S>>> {
    let top = star.len() - 1;
    let n = star[0].n();
    // formal inverse q of p
    let mut q: Vec<Mat<S>> = vec![Mat::identity(n)];
    for r in 1..=top {
        let mut acc: Mat<S> = Mat::zeros(n, n);
        for j in 1..=r {
            if p[j].is_zero() {
                continue;
            }
            acc = acc.add(&q[r - j].mul(&p[j])?)?;
        }
        q.push(acc.neg());
    }
    let mut out = Vec::with_capacity(top + 1);
    for r in 0..=top {
        let mut acc = HochschildCochain::zero(n, 2)?;
        for u in 0..=r {
            if q[u].is_zero() {
                continue;
            }
            for v in 0..=(r - u) {
                if star[v].is_zero() {
                    continue;
                }
                for w in 0..=(r - u - v) {
                    let x = r - u - v - w;
                    if p[w].is_zero() || p[x].is_zero() {
                        continue;
                    }
                    for i in 0..n {
                        for j in 0..n {
                            let val = star[v].eval2(&p[w].col(i), &p[x].col(j))?;
                            let tw = q[u].matvec(&val)?;
                            for (m, c) in tw.into_iter().enumerate() {
                                acc.set(&[i, j], m, acc.get(&[i, j], m) + c);
                            }
                        }
                    }
                }
            }
        }
        out.push(acc);
    }
    Ok(out)
}

/// Order-by-order trivialization of a formal deformation: returns the
/// coefficients φ_1..φ_N of a single polynomial φ = 1 + Σ φ_k t^k whose
/// conjugation kills every coefficient of ⋆ through order N. The final
/// re-expansion is asserted exactly.
pub fn trivialize_formal<S: Scalar>(
    def: &FormalDeformation<S>,
    a: &AssocAlgebra<S>,
    method: &TransgressionMethod<S>,
    tol: &Tol,
) -> Result<Vec<Mat<S>>> {
    let n = a.dim();
    if def.n() != n {
        return Err(Error::ShapeMismatch {
            context: "trivialize_formal".into(),
            detail: format!("deformation dimension {} vs algebra {n}", def.n()),
        });
    }
    let order = def.order();
    for k in 1..=order {
        let res = check_formal_order(def, a, k)?;
        if !res.is_zero_within(tol) {
            return Err(Error::AxiomViolation(format!(
                "deformation violates associativity at order {k} (residual {:e})",
                res.norm_inf()
            )));
        }
    }
    let b1 = hochschild_d_block(a, 1)?;
    if let TransgressionMethod::Splitting { h, g } = method {
        let b2 = hochschild_d_block(a, 2)?;
        if h.nrows() != npow(n, 1) * n
            || h.ncols() != npow(n, 2) * n
            || g.nrows() != npow(n, 2) * n
            || g.ncols() != npow(n, 3) * n
        {
            return Err(Error::ShapeMismatch {
                context: "trivialize_formal".into(),
                detail: "splitting maps have the wrong shapes for C¹, C², C³".into(),
            });
        }
        let ident = b1.mul(h)?.add(&g.mul(&b2)?)?;
        let defect = ident.sub(&Mat::identity(ident.nrows()))?;
        if !defect.is_zero_within(tol) {
            return Err(Error::SplittingInvalid(format!(
                "bh + gb − 1 has residual {:e} on C²",
                defect.max_magnitude()
            )));
        }
    }
    let mut star: Vec<HochschildCochain<S>> = Vec::with_capacity(order + 1);
    star.push(a.product().clone());
    star.extend(def.coeffs().iter().cloned());
    let mut phi: Vec<Mat<S>> = (0..=order)
        .map(|r| if r == 0 { Mat::identity(n) } else { Mat::zeros(n, n) })
        .collect();
    for k in 1..=order {
        let ck = star[k].clone();
        if ck.is_zero() {
            continue;
        }
        if !d_of(a.product(), &ck)?.is_zero_within(tol) {
            return Err(Error::InvariantViolation(format!(
                "order-{k} coefficient is not a cocycle after lower-order kills"
            )));
        }
        let step: Mat<S> = match method {
            TransgressionMethod::Splitting { h, .. } => {
                one_cochain_from_coords(n, &h.matvec(ck.coords())?).neg()
            }
            TransgressionMethod::LinearSolve => {
                let rhs = Mat::from_fn(ck.coords().len(), 1, |i, _| -ck.coords()[i].clone());
                match b1.solve(&rhs, tol)? {
                    Some(x) => one_cochain_from_coords(n, &x.col(0)),
                    None => return Err(Error::ObstructionNonzero { order: k }),
                }
            }
        };
        let mut p: Vec<Mat<S>> = (0..=order)
            .map(|r| if r == 0 { Mat::identity(n) } else { Mat::zeros(n, n) })
            .collect();
        p[k] = step.clone();
        star = conj_by_poly(&star, &p)?;
        if !star[k].is_zero_within(tol) {
            return Err(Error::InvariantViolation(format!(
                "transgression failed to kill the order-{k} coefficient"
            )));
        }
        // total conjugation composes on the right
        for r in (k..=order).rev() {
            let add = phi[r - k].mul(&step)?;
            phi[r] = phi[r].add(&add)?;
        }
    }
    // re-expand from scratch as the final exactness check
    let mut original: Vec<HochschildCochain<S>> = Vec::with_capacity(order + 1);
    original.push(a.product().clone());
    original.extend(def.coeffs().iter().cloned());
    let re = conj_by_poly(&original, &phi)?;
    if re[0] != *a.product() || re[1..].iter().any(|c| !c.is_zero_within(tol)) {
        return Err(Error::InvariantViolation(
            "re-expansion of the conjugated product does not match the base product".into(),
        ));
    }
    Ok(phi[1..].to_vec())
}

/// A polynomial family of multiplications m_t = Σ M_r t^r with associativity
/// holding as a polynomial identity in t (validated coefficient-wise) and a
/// parameter domain |t| ≤ t_max.
#[derive(Clone, Debug)]
pub struct ProductFamily<S: Scalar> {
    coeffs: Vec<HochschildCochain<S>>,
    t_max: f64,
}

impl<S: Scalar> ProductFamily<S> {
    pub fn new(coeffs: Vec<HochschildCochain<S>>, t_max: f64, tol: &Tol) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::DomainViolation("a family needs at least one coefficient".into()));
        }
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::DomainViolation(format!("t_max = {t_max} must be positive")));
        }
        let n = coeffs[0].n();
        for c in &coeffs {
            if c.arity() != 2 {
                return Err(Error::ArityViolation { arity: c.arity(), max: 2 });
            }
            if c.n() != n {
                return Err(Error::ShapeMismatch {
                    context: "ProductFamily::new".into(),
                    detail: "coefficients live on different spaces".into(),
                });
            }
        }
        let deg = coeffs.len() - 1;
        for s in 0..=(2 * deg) {
            let mut acc = HochschildCochain::zero(n, 3)?;
            for r1 in 0..=deg.min(s) {
                let r2 = s - r1;
                if r2 > deg {
                    continue;
                }
                acc = acc.add(&circle(&coeffs[r1], &coeffs[r2])?)?;
            }
            if !acc.is_zero_within(tol) {
                return Err(Error::AxiomViolation(format!(
                    "family associativity fails at t-order {s} (residual {:e})",
                    acc.norm_inf()
                )));
            }
        }
        Ok(ProductFamily { coeffs, t_max })
    }

    pub fn n(&self) -> usize {
        self.coeffs[0].n()
    }

    pub fn coeffs(&self) -> &[HochschildCochain<S>] {
        &self.coeffs
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn base_product(&self) -> &HochschildCochain<S> {
        &self.coeffs[0]
    }

    pub fn check_t(&self, t: &S) -> Result<()> {
        let m = t.magnitude();
        if m > self.t_max {
            return Err(Error::DomainViolation(format!(
                "|t| = {m} lies outside the family domain [-{0}, {0}]",
                self.t_max
            )));
        }
        Ok(())
    }

    pub fn product_at(&self, t: &S) -> HochschildCochain<S> {
        let mut acc = self.coeffs.last().expect("nonempty").clone();
        for b in self.coeffs.iter().rev().skip(1) {
            acc = acc.scale(t).add(b).expect("family coefficients share a space");
        }
        acc
    }

    pub fn derivative_at(&self, t: &S) -> HochschildCochain<S> {
        let n = self.n();
        if self.coeffs.len() == 1 {
            return HochschildCochain::zero(n, 2).expect("arity 2 is valid");
        }
        let scaled: Vec<HochschildCochain<S>> = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(r, b)| b.scale(&S::from_i64(r as i64)))
            .collect();
        let mut acc = scaled.last().expect("degree >= 1").clone();
        for b in scaled.iter().rev().skip(1) {
            acc = acc.scale(t).add(b).expect("family coefficients share a space");
        }
        acc
    }

    pub fn to_f64(&self) -> ProductFamily<f64> {
        ProductFamily {
            coeffs: self.coeffs.iter().map(|c| c.map_scalars(|x| x.to_f64())).collect(),
            t_max: self.t_max,
        }
    }
}

/// The family t ↦ exp(tX)⁻¹( exp(tX)a · exp(tX)b ) for a nilpotent operator
/// X on A: an honest polynomial family, trivialized exactly by h_t = exp(tX).
pub fn product_conjugation_family<S: Scalar>(
    a: &AssocAlgebra<S>,
    x: &Mat<S>,
    t_max: f64,
    tol: &Tol,
) -> Result<ProductFamily<S>> {
    let n = a.dim();
    if x.nrows() != n || x.ncols() != n {
        return Err(Error::ShapeMismatch {
            context: "product_conjugation_family".into(),
            detail: format!("twist must be {n}×{n}"),
        });
    }
    let mut nil = None;
    let mut p = Mat::<S>::identity(n);
    for k in 1..=n {
        p = p.mul(x)?;
        if p.is_zero_within(tol) {
            nil = Some(k);
            break;
        }
    }
    let Some(nil) = nil else {
        return Err(Error::DomainViolation(
            "the twist is not nilpotent; conjugation families need a polynomial exp(tX)".into(),
        ));
    };
    let mut pows = vec![Mat::<S>::identity(n)];
    let mut xa = Mat::<S>::identity(n);
    let mut fact: i64 = 1;
    for k in 1..nil {
        xa = xa.mul(x)?;
        fact *= k as i64;
        pows.push(xa.scale(&S::from_ratio(1, fact)));
    }
    let mut coeffs = Vec::new();
    for r in 0..=3 * (nil - 1) {
        let mut b = HochschildCochain::zero(n, 2)?;
        for i in 0..n {
            for j in 0..n {
                let mut col = vec![S::zero(); n];
                for (u, pu) in pows.iter().enumerate() {
                    if u > r {
                        break;
                    }
                    let rest = r - u;
                    let mut inner = vec![S::zero(); n];
                    for (v, pv) in pows.iter().enumerate() {
                        if v > rest {
                            break;
                        }
                        let w = rest - v;
                        if w >= nil {
                            continue;
                        }
                        let prod = a.mul(&pv.col(i), &pows[w].col(j))?;
                        for (m, c) in prod.into_iter().enumerate() {
                            inner[m] = inner[m].clone() + c;
                        }
                    }
                    let applied = pu.matvec(&inner)?;
                    let neg = u % 2 == 1;
                    for (m, c) in applied.into_iter().enumerate() {
                        col[m] = if neg { col[m].clone() - c } else { col[m].clone() + c };
                    }
                }
                for (m, c) in col.into_iter().enumerate() {
                    b.set(&[i, j], m, c);
                }
            }
        }
        coeffs.push(b);
    }
    while coeffs.len() > 1 && coeffs.last().expect("nonempty").is_zero() {
        coeffs.pop();
    }
    ProductFamily::new(coeffs, t_max, tol)
}

fn prod_try_h<S: Scalar>(
    fam: &ProductFamily<S>,
    t: &S,
    base: &DegreeContraction<S>,
    window: &Complex<S>,
    tol: &Tol,
) -> Result<DegreeContraction<S>> {
    let mt = fam.product_at(t);
    let mut blocks = BTreeMap::new();
    for k in window.module().support() {
        if window.module().dim(k + 1) == 0 {
            continue;
        }
        let dt = d_block_of(&mt, k as usize)?;
        blocks.insert(k, dt.sub(&window.d().block(k))?);
    }
    let delta = GradedMap::new(window.module().clone(), window.module().clone(), 1, blocks)?;
    let pert = Perturbation::new(window, delta, tol)?;
    perturb_degree_contraction(window, base, &pert, tol)
}

fn prod_smallness_sup<S: Scalar>(
    fam: &ProductFamily<S>,
    t: &S,
    base: &DegreeContraction<S>,
    window: &Complex<S>,
    tol: &Tol,
) -> f64 {
    let half = S::from_ratio(1, 2);
    let mut lo = S::zero();
    let mut hi = S::one();
    for _ in 0..30 {
        let mid = (lo.clone() + hi.clone()) * half.clone();
        let at = t.clone() * mid.clone();
        if prod_try_h(fam, &at, base, window, tol).is_ok() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (t.clone() * lo).magnitude()
}

fn prod_certified_h<S: Scalar>(
    fam: &ProductFamily<S>,
    t: &S,
    base: &DegreeContraction<S>,
    window: &Complex<S>,
    tol: &Tol,
) -> Result<DegreeContraction<S>> {
    match prod_try_h(fam, t, base, window, tol) {
        Err(Error::NotSmall { degree, .. }) => {
            let sup = prod_smallness_sup(fam, t, base, window, tol);
            Err(Error::NotSmall {
                degree,
                detail: Some(format!(
                    "certification holds up to |t| ≈ {sup:.6} but fails at |t| = {}",
                    t.magnitude()
                )),
            })
        }
        Err(Error::NumericRankAmbiguity { magnitude, .. }) => {
            let sup = prod_smallness_sup(fam, t, base, window, tol);
            Err(Error::NotSmall {
                degree: base.k,
                detail: Some(format!(
                    "pivot of magnitude {magnitude:e} is inside the ambiguity band at \
                     |t| = {}; certification holds up to |t| ≈ {sup:.6}",
                    t.magnitude()
                )),
            })
        }
        other => other,
    }
}

fn prod_defect(fam: &ProductFamily<f64>, h: &Mat<f64>, t: f64) -> Result<f64> {
    let n = fam.n();
    let base = fam.base_product();
    let mt = fam.product_at(&t);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let lhs = h.matvec(mt.value_on(&[i, j]))?;
            let rhs = base.eval2(&h.col(i), &h.col(j))?;
            for (a, b) in lhs.iter().zip(&rhs) {
                let e = (a - b).abs();
                if !e.is_finite() {
                    return Ok(f64::INFINITY);
                }
                worst = worst.max(e);
            }
        }
    }
    Ok(worst)
}

fn frobenius(m: &Mat<f64>) -> f64 {
    m.entries().map(|x| x * x).sum::<f64>().sqrt()
}

struct ProdStage<'a> {
    fam: &'a ProductFamily<f64>,
    base: &'a DegreeContraction<f64>,
    window: &'a Complex<f64>,
    tol: Tol,
    sign: Option<i64>,
    n: usize,
}

impl ProdStage<'_> {
    fn a_at(&mut self, t: f64) -> Result<Mat<f64>> {
        let c = self.fam.derivative_at(&t);
        let c_norm = c.norm_inf();
        if c_norm <= 1e-14 {
            return Ok(Mat::zeros(self.n, self.n));
        }
        let hdc = prod_certified_h(self.fam, &t, self.base, self.window, &self.tol)?;
        let a_plus = hdc.h_k.matvec(c.coords())?;
        if a_plus.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvariantViolation(format!(
                "transgression produced non-finite coordinates at t = {t}"
            )));
        }
        let d1 = d_block_of(&self.fam.product_at(&t), 1)?;
        let d_plus = d1.matvec(&a_plus)?;
        let res = |s: f64| -> f64 {
            d_plus
                .iter()
                .zip(c.coords())
                .fold(0.0f64, |m, (dp, cc)| m.max((s * dp - cc).abs()))
        };
        let sign = *self.sign.get_or_insert_with(|| if res(1.0) <= res(-1.0) { 1 } else { -1 });
        let r = res(sign as f64);
        if r > 1e-8 * (1.0 + c_norm) {
            return Err(Error::InvariantViolation(format!(
                "transgressed a_t misses d_t a = c_t at t = {t} (residual {r:e})"
            )));
        }
        let coords: Vec<f64> = a_plus.iter().map(|x| sign as f64 * x).collect();
        Ok(one_cochain_from_coords(self.n, &coords))
    }
}

/// ODE trivialization of a product family through a degree-2 splitting
/// (h, g) of the base Hochschild complex: solve dh_t/dt = h_t ∘ a_t with
/// a_t = ±H_t(dm_t/dt), checking the multiplicativity defect
/// ‖h_t(a ⊙_t b) − h_t(a)·h_t(b)‖ ≤ τ on basis pairs at every grid point.
pub fn trivialize_product_family<S: Scalar>(
    fam: &ProductFamily<S>,
    h: &Mat<S>,
    g: &Mat<S>,
    t_max: f64,
    steps: usize,
    tol: &Tol,
) -> Result<TrivializationResult> {
    if steps == 0 {
        return Err(Error::DomainViolation("at least one integration step is required".into()));
    }
    if !(t_max > 0.0) {
        return Err(Error::DomainViolation(format!("t_max = {t_max} must be positive")));
    }
    if t_max > fam.t_max() {
        return Err(Error::DomainViolation(format!(
            "t_max = {t_max} exceeds the family domain bound {}",
            fam.t_max()
        )));
    }
    let n = fam.n();
    let b1 = d_block_of(fam.base_product(), 1)?;
    let b2 = d_block_of(fam.base_product(), 2)?;
    if h.nrows() != npow(n, 1) * n
        || h.ncols() != npow(n, 2) * n
        || g.nrows() != npow(n, 2) * n
        || g.ncols() != npow(n, 3) * n
    {
        return Err(Error::ShapeMismatch {
            context: "trivialize_product_family".into(),
            detail: "splitting maps have the wrong shapes for C¹, C², C³".into(),
        });
    }
    let ident = b1.mul(h)?.add(&g.mul(&b2)?)?;
    let defect = ident.sub(&Mat::identity(ident.nrows()))?;
    if !defect.is_zero_within(tol) {
        return Err(Error::SplittingInvalid(format!(
            "bh + gb − 1 has residual {:e} on C²",
            defect.max_magnitude()
        )));
    }
    let fam_f = fam.to_f64();
    let dc = DegreeContraction {
        k: 2,
        h_k: h.map(|x| x.to_f64()).neg(),
        h_k1: g.map(|x| x.to_f64()).neg(),
    };
    let window = degree2_window(fam_f.base_product())?;
    let mut stage =
        ProdStage { fam: &fam_f, base: &dc, window: &window, tol: *tol, sign: None, n };
    let cond_of = |hm: &Mat<f64>, t: f64| -> Result<f64> {
        let inv = hm
            .inverse(tol)?
            .ok_or_else(|| Error::Singular(format!("trivialization matrix at t = {t}")))?;
        Ok(frobenius(hm) * frobenius(&inv))
    };
    let mut hm: Mat<f64> = Mat::identity(n);
    let mut grid = vec![0.0];
    let mut hs = vec![hm.clone()];
    let mut defects = vec![prod_defect(&fam_f, &hm, 0.0)?];
    let mut conds = vec![cond_of(&hm, 0.0)?];
    let dt = t_max / steps as f64;
    let mut a_left = stage.a_at(0.0)?;
    for i in 0..steps {
        let t0 = dt * i as f64;
        let t1 = if i + 1 == steps { t_max } else { dt * (i + 1) as f64 };
        let a_mid = stage.a_at(t0 + dt / 2.0)?;
        let a_right = stage.a_at(t1)?;
        let k1 = hm.mul(&a_left)?;
        let k2 = hm.add(&k1.scale(&(dt / 2.0)))?.mul(&a_mid)?;
        let k3 = hm.add(&k2.scale(&(dt / 2.0)))?.mul(&a_mid)?;
        let k4 = hm.add(&k3.scale(&dt))?.mul(&a_right)?;
        let incr = k1.add(&k2.scale(&2.0))?.add(&k3.scale(&2.0))?.add(&k4)?.scale(&(dt / 6.0));
        hm = hm.add(&incr)?;
        a_left = a_right;
        let d = prod_defect(&fam_f, &hm, t1)?;
        if d > TAU_TRIV {
            return Err(Error::DefectExceeded { t: t1, defect: d, tol: TAU_TRIV });
        }
        grid.push(t1);
        hs.push(hm.clone());
        defects.push(d);
        conds.push(cond_of(&hm, t1)?);
    }
    Ok(TrivializationResult {
        grid,
        h: hs,
        defects,
        conds,
        sign: stage.sign.unwrap_or(-1),
    })
}

/// 2×2 rational matrices in the basis E11, E12, E21, E22; the unit is
/// E11 + E22. Separable, so all Hochschild cohomology above degree 0
/// vanishes.
pub fn mat2() -> AssocAlgebra<crate::scalar::Rat> {
    use crate::scalar::Rat;
    let pair = |e: usize| ((e / 2) + 1, (e % 2) + 1);
    let mut t = vec![vec![vec![Rat::from_i64(0); 4]; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let ((a, b), (c, d)) = (pair(i), pair(j));
            if b == c {
                let k = (a - 1) * 2 + (d - 1);
                t[k][i][j] = Rat::from_i64(1);
            }
        }
    }
    let one = Rat::from_i64(1);
    let zero = Rat::from_i64(0);
    AssocAlgebra::new(&t, Some(vec![one.clone(), zero.clone(), zero, one]), &Tol::default())
        .expect("matrix algebra")
}

/// ℚ[x]/(x²): basis (1, ε) with ε² = 0. H² is nonzero — the x² = t
/// deformation is obstructed against trivialization.
pub fn dual_numbers() -> AssocAlgebra<crate::scalar::Rat> {
    use crate::scalar::Rat;
    let o = || Rat::from_i64(1);
    let z = || Rat::from_i64(0);
    let t = vec![
        vec![vec![o(), z()], vec![z(), z()]],
        vec![vec![z(), o()], vec![o(), z()]],
    ];
    AssocAlgebra::new(&t, Some(vec![o(), z()]), &Tol::default()).expect("dual numbers")
}

/// ℚ[x]/(x² − 1): basis (1, x) with x² = 1. Separable (≅ ℚ × ℚ), so the
/// degree-2 splitting exists.
pub fn split_complex() -> AssocAlgebra<crate::scalar::Rat> {
    use crate::scalar::Rat;
    let o = || Rat::from_i64(1);
    let z = || Rat::from_i64(0);
    let t = vec![
        vec![vec![o(), z()], vec![z(), o()]],
        vec![vec![z(), o()], vec![o(), z()]],
    ];
    AssocAlgebra::new(&t, Some(vec![o(), z()]), &Tol::default()).expect("split-complex numbers")
}

/// ℚ itself.
pub fn ground_field() -> AssocAlgebra<crate::scalar::Rat> {
    use crate::scalar::Rat;
    let t = vec![vec![vec![Rat::from_i64(1)]]];
    AssocAlgebra::new(&t, Some(vec![Rat::from_i64(1)]), &Tol::default()).expect("ground field")
}
