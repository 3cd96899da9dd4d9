//! Lie algebra rigidity: Chevalley–Eilenberg cohomology from structure
//! constants, deformation cocycles of bracket families, transgression through
//! perturbed degree-2 contractions, ODE trivialization of deformations, and
//! the conjugation / Jacobi maps with a chord–Newton solver for the nearby
//! bracket problem.

use crate::complexes::Complex;
use crate::error::{Error, Result};
use crate::graded::{GradedMap, GradedModule};
use crate::matrix::Mat;
use crate::perturbation::{build_contraction, perturb_degree_contraction, DegreeContraction};
use crate::perturbation::Perturbation;
use crate::scalar::{Scalar, Tol};
use std::collections::BTreeMap;

/// Defect bound for accepting a trivialization on its grid.
pub const TAU_TRIV: f64 = 1e-6;
/// Residual bound for the chord–Newton conjugation solver.
pub const TAU_NEWTON: f64 = 1e-9;
pub const NEWTON_MAX_ITER: usize = 50;

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut out = 1usize;
    for i in 0..k.min(n - k) {
        out = out * (n - i) / (i + 1);
    }
    out
}

/// All k-element subsets of {0, …, n−1} as increasing tuples, lexicographic.
/// This ordering fixes the coordinates of C^k = Λ^k g* ⊗ g everywhere in this
/// module: a cochain is the vector (α(e_T)_m) with T running over subsets and
/// m over the output basis, flattened as `subset_index * n + m`.
pub fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k > n {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let mut i = k;
        while i > 0 && cur[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        cur[i - 1] += 1;
        for j in i..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Sort p into the increasing tuple w. None when p already occurs; otherwise
/// the sorted tuple and the sign (−1)^{#{x ∈ w : x < p}} of the permutation
/// that moves p from the front into place.
fn insert_sorted(w: &[usize], p: usize) -> Option<(Vec<usize>, i64)> {
    if w.contains(&p) {
        return None;
    }
    let smaller = w.iter().filter(|&&x| x < p).count();
    let mut t = w.to_vec();
    t.push(p);
    t.sort_unstable();
    Some((t, if smaller % 2 == 0 { 1 } else { -1 }))
}

/// An alternating bilinear map g × g → g: structure constants `t[k][i][j]`
/// with c(e_i, e_j) = Σ_k t[k][i][j] e_k. Brackets, deformation cocycles and
/// Newton targets all share this shape.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoCochain<S: Scalar> {
    n: usize,
    t: Vec<S>,
}

impl<S: Scalar> TwoCochain<S> {
    pub fn zero(n: usize) -> Self {
        TwoCochain { n, t: vec![S::zero(); n * n * n] }
    }

    fn idx(&self, k: usize, i: usize, j: usize) -> usize {
        (k * self.n + i) * self.n + j
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> S {
        self.t[self.idx(k, i, j)].clone()
    }

    /// Set c(e_i, e_j) = vals (and c(e_j, e_i) = −vals).
    pub fn set_pair(&mut self, i: usize, j: usize, vals: &[S]) -> Result<()> {
        if i == j || i >= self.n || j >= self.n || vals.len() != self.n {
            return Err(Error::DomainViolation(format!(
                "set_pair({i}, {j}) needs two distinct indices below {} and {} values",
                self.n, self.n
            )));
        }
        for (m, v) in vals.iter().enumerate() {
            let a = self.idx(m, i, j);
            self.t[a] = v.clone();
            let b = self.idx(m, j, i);
            self.t[b] = -v.clone();
        }
        Ok(())
    }

    /// Build from a sparse list of basis brackets; pairs not listed are zero.
    pub fn from_brackets(n: usize, entries: &[(usize, usize, Vec<S>)]) -> Result<Self> {
        let mut out = TwoCochain::zero(n);
        for (i, j, vals) in entries {
            out.set_pair(*i, *j, vals)?;
        }
        Ok(out)
    }

    /// Full tensor, nested as t[k][i][j]. Antisymmetry in (i, j) is checked.
    pub fn from_nested(t: &[Vec<Vec<S>>], tol: &Tol) -> Result<Self> {
        let n = t.len();
        if t.iter().any(|p| p.len() != n || p.iter().any(|r| r.len() != n)) {
            return Err(Error::ShapeMismatch {
                context: "TwoCochain::from_nested".into(),
                detail: "tensor is not n×n×n".into(),
            });
        }
        let mut out = TwoCochain::zero(n);
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let a = out.idx(k, i, j);
                    out.t[a] = t[k][i][j].clone();
                }
            }
        }
        if !out.is_antisymmetric(tol) {
            return Err(Error::AxiomViolation(
                "structure tensor is not antisymmetric in its two inputs".into(),
            ));
        }
        Ok(out)
    }

    pub fn to_nested(&self) -> Vec<Vec<Vec<S>>> {
        (0..self.n)
            .map(|k| {
                (0..self.n)
                    .map(|i| (0..self.n).map(|j| self.get(k, i, j)).collect())
                    .collect()
            })
            .collect()
    }

    pub fn is_antisymmetric(&self, tol: &Tol) -> bool {
        for k in 0..self.n {
            for i in 0..self.n {
                for j in 0..self.n {
                    let s = self.get(k, i, j) + self.get(k, j, i);
                    if !s.is_zero_within(tol) {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn eval_basis(&self, i: usize, j: usize) -> Vec<S> {
        (0..self.n).map(|k| self.get(k, i, j)).collect()
    }

    pub fn eval(&self, x: &[S], y: &[S]) -> Result<Vec<S>> {
        if x.len() != self.n || y.len() != self.n {
            return Err(Error::ShapeMismatch {
                context: "TwoCochain::eval".into(),
                detail: format!("arguments must have length {}", self.n),
            });
        }
        let mut out = vec![S::zero(); self.n];
        for i in 0..self.n {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..self.n {
                if y[j].is_zero() {
                    continue;
                }
                let c = x[i].clone() * y[j].clone();
                for (k, o) in out.iter_mut().enumerate() {
                    *o = o.clone() + c.clone() * self.get(k, i, j);
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        if self.n != rhs.n {
            return Err(Error::ShapeMismatch {
                context: "TwoCochain::add".into(),
                detail: format!("dimensions {} vs {}", self.n, rhs.n),
            });
        }
        let t = self.t.iter().zip(&rhs.t).map(|(a, b)| a.clone() + b.clone()).collect();
        Ok(TwoCochain { n: self.n, t })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Self {
        TwoCochain { n: self.n, t: self.t.iter().map(|a| -a.clone()).collect() }
    }

    pub fn scale(&self, c: &S) -> Self {
        TwoCochain { n: self.n, t: self.t.iter().map(|a| a.clone() * c.clone()).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.t.iter().all(|a| a.is_zero())
    }

    pub fn norm_inf(&self) -> f64 {
        self.t.iter().map(|a| a.magnitude()).fold(0.0, f64::max)
    }

    /// Coordinates in C², ordered by the 2-subset convention of `k_subsets`.
    pub fn to_coords(&self) -> Vec<S> {
        let mut out = Vec::with_capacity(binomial(self.n, 2) * self.n);
        for pair in k_subsets(self.n, 2) {
            for m in 0..self.n {
                out.push(self.get(m, pair[0], pair[1]));
            }
        }
        out
    }

    pub fn from_coords(n: usize, coords: &[S]) -> Result<Self> {
        if coords.len() != binomial(n, 2) * n {
            return Err(Error::ShapeMismatch {
                context: "TwoCochain::from_coords".into(),
                detail: format!("expected {} coordinates, got {}", binomial(n, 2) * n, coords.len()),
            });
        }
        let mut out = TwoCochain::zero(n);
        for (s, pair) in k_subsets(n, 2).iter().enumerate() {
            let vals: Vec<S> = coords[s * n..(s + 1) * n].to_vec();
            out.set_pair(pair[0], pair[1], &vals)?;
        }
        Ok(out)
    }

    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T) -> TwoCochain<T> {
        TwoCochain { n: self.n, t: self.t.iter().map(f).collect() }
    }

    pub fn approx_eq(&self, rhs: &Self, tol: &Tol) -> bool {
        self.n == rhs.n && self.t.iter().zip(&rhs.t).all(|(a, b)| a.approx_eq(b, tol))
    }
}

/// An alternating trilinear map in C³-coordinates (3-subsets × output index).
#[derive(Clone, Debug, PartialEq)]
pub struct ThreeCochain<S: Scalar> {
    n: usize,
    coords: Vec<S>,
}

impl<S: Scalar> ThreeCochain<S> {
    pub fn zero(n: usize) -> Self {
        ThreeCochain { n, coords: vec![S::zero(); binomial(n, 3) * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coords(&self) -> &[S] {
        &self.coords
    }

    /// Value on (e_i, e_j, e_k) for i < j < k.
    pub fn eval_basis(&self, i: usize, j: usize, k: usize) -> Option<&[S]> {
        let s = k_subsets(self.n, 3).iter().position(|t| t == &[i, j, k])?;
        Some(&self.coords[s * self.n..(s + 1) * self.n])
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        if self.n != rhs.n {
            return Err(Error::ShapeMismatch {
                context: "ThreeCochain::add".into(),
                detail: format!("dimensions {} vs {}", self.n, rhs.n),
            });
        }
        let coords =
            self.coords.iter().zip(&rhs.coords).map(|(a, b)| a.clone() + b.clone()).collect();
        Ok(ThreeCochain { n: self.n, coords })
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
}

/// The mixed Jacobi expression (x,y,z) ↦ Σ_cyclic b(c(x,y), z). For b = c
/// this is the Jacobiator of c; the mixed form is what shows up as a
/// t-coefficient when expanding the Jacobiator of a polynomial family.
pub fn jacobi_pair<S: Scalar>(b: &TwoCochain<S>, c: &TwoCochain<S>) -> Result<ThreeCochain<S>> {
    if b.n() != c.n() {
        return Err(Error::ShapeMismatch {
            context: "jacobi_pair".into(),
            detail: format!("dimensions {} vs {}", b.n(), c.n()),
        });
    }
    let n = b.n();
    let mut out = ThreeCochain::zero(n);
    let apply = |x: &[S], j: usize| -> Vec<S> {
        // b(x, e_j) for a vector x
        let mut v = vec![S::zero(); n];
        for (p, xp) in x.iter().enumerate() {
            if xp.is_zero() {
                continue;
            }
            for (m, o) in v.iter_mut().enumerate() {
                *o = o.clone() + xp.clone() * b.get(m, p, j);
            }
        }
        v
    };
    for (s, t) in k_subsets(n, 3).iter().enumerate() {
        let (i, j, k) = (t[0], t[1], t[2]);
        let t1 = apply(&c.eval_basis(i, j), k);
        let t2 = apply(&c.eval_basis(j, k), i);
        let t3 = apply(&c.eval_basis(k, i), j);
        for m in 0..n {
            out.coords[s * n + m] = t1[m].clone() + t2[m].clone() + t3[m].clone();
        }
    }
    Ok(out)
}

/// J(c)(x,y,z) = Σ_cyclic c(c(x,y), z); zero exactly when c satisfies Jacobi.
pub fn jacobi_map<S: Scalar>(c: &TwoCochain<S>) -> Result<ThreeCochain<S>> {
    jacobi_pair(c, c)
}

#[derive(Clone, Debug)]
pub struct LieAlgebra<S: Scalar> {
    bracket: TwoCochain<S>,
}

impl<S: Scalar> LieAlgebra<S> {
    /// Validates antisymmetry and the Jacobi identity.
    pub fn new(bracket: TwoCochain<S>, tol: &Tol) -> Result<Self> {
        if !bracket.is_antisymmetric(tol) {
            return Err(Error::AxiomViolation("bracket is not antisymmetric".into()));
        }
        let j = jacobi_map(&bracket)?;
        if !j.is_zero_within(tol) {
            return Err(Error::AxiomViolation(format!(
                "Jacobi identity fails (residual {:e})",
                j.norm_inf()
            )));
        }
        Ok(LieAlgebra { bracket })
    }

    pub fn dim(&self) -> usize {
        self.bracket.n()
    }

    pub fn bracket(&self) -> &TwoCochain<S> {
        &self.bracket
    }

    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T) -> LieAlgebra<T> {
        LieAlgebra { bracket: self.bracket.map_scalars(f) }
    }
}

/// sl₂ in the basis (e, f, h): [e,f] = h, [h,e] = 2e, [h,f] = −2f.
pub fn sl2() -> LieAlgebra<crate::scalar::Rat> {
    use crate::scalar::Rat;
    let b = TwoCochain::from_brackets(
        3,
        &[
            (0, 1, vec![Rat::from_i64(0), Rat::from_i64(0), Rat::from_i64(1)]),
            (2, 0, vec![Rat::from_i64(2), Rat::from_i64(0), Rat::from_i64(0)]),
            (2, 1, vec![Rat::from_i64(0), Rat::from_i64(-2), Rat::from_i64(0)]),
        ],
    )
    .expect("sl2 table");
    LieAlgebra::new(b, &Tol::default()).expect("sl2 is a Lie algebra")
}

/// so₃: [e_i, e_j] = e_k for (i,j,k) cyclic.
pub fn so3() -> LieAlgebra<crate::scalar::Rat> {
    use crate::scalar::Rat;
    let e = |k: usize| {
        let mut v = vec![Rat::from_i64(0); 3];
        v[k] = Rat::from_i64(1);
        v
    };
    let b = TwoCochain::from_brackets(3, &[(0, 1, e(2)), (1, 2, e(0)), (2, 0, e(1))])
        .expect("so3 table");
    LieAlgebra::new(b, &Tol::default()).expect("so3 is a Lie algebra")
}

/// The 3-dimensional Heisenberg algebra: [e₀,e₁] = e₂ central.
pub fn heisenberg3() -> LieAlgebra<crate::scalar::Rat> {
    use crate::scalar::Rat;
    let b = TwoCochain::from_brackets(
        3,
        &[(0, 1, vec![Rat::from_i64(0), Rat::from_i64(0), Rat::from_i64(1)])],
    )
    .expect("heisenberg table");
    LieAlgebra::new(b, &Tol::default()).expect("heisenberg3 is a Lie algebra")
}

pub fn abelian(n: usize) -> LieAlgebra<crate::scalar::Rat> {
    LieAlgebra { bracket: TwoCochain::zero(n) }
}

/// The block of the Chevalley–Eilenberg differential C^k → C^{k+1} attached
/// to an antisymmetric bracket candidate b (Jacobi not required here; d² = 0
/// holds exactly when it does):
///
/// ```text
/// (dα)(x_0,…,x_k) = Σ_i (−1)^i [x_i, α(…x̂_i…)]
///                 + Σ_{i<j} (−1)^{i+j} α([x_i,x_j], …x̂_i…x̂_j…) ,
/// ```
///
/// normalized so that on C¹ this is (da)(v,w) = [a v, w] + [v, a w] − a([v,w]).
pub fn ce_diff_block<S: Scalar>(b: &TwoCochain<S>, k: usize) -> Result<Mat<S>> {
    let n = b.n();
    let src = k_subsets(n, k);
    let tgt = k_subsets(n, k + 1);
    let src_pos: BTreeMap<&[usize], usize> =
        src.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
    let mut out: Mat<S> = Mat::zeros(tgt.len() * n, src.len() * n);
    for (ui, u) in tgt.iter().enumerate() {
        for (i, &x) in u.iter().enumerate() {
            let rest: Vec<usize> = u.iter().copied().filter(|&y| y != x).collect();
            let col_set = src_pos[rest.as_slice()];
            let pos = i % 2 == 0;
            for m in 0..n {
                for mp in 0..n {
                    let c = b.get(mp, x, m);
                    if c.is_zero() {
                        continue;
                    }
                    let e = &mut out[(ui * n + mp, col_set * n + m)];
                    *e = if pos { e.clone() + c } else { e.clone() - c };
                }
            }
        }
        for i in 0..u.len() {
            for j in (i + 1)..u.len() {
                let w: Vec<usize> = u
                    .iter()
                    .enumerate()
                    .filter(|&(a, _)| a != i && a != j)
                    .map(|(_, &y)| y)
                    .collect();
                for p in 0..n {
                    let c = b.get(p, u[i], u[j]);
                    if c.is_zero() {
                        continue;
                    }
                    let Some((t, ins)) = insert_sorted(&w, p) else {
                        continue;
                    };
                    let col_set = src_pos[t.as_slice()];
                    let sgn = if (i + j) % 2 == 0 { ins } else { -ins };
                    let coeff = if sgn > 0 { c } else { -c };
                    for m in 0..n {
                        let e = &mut out[(ui * n + m, col_set * n + m)];
                        *e = e.clone() + coeff.clone();
                    }
                }
            }
        }
    }
    Ok(out)
}

/// The Chevalley–Eilenberg complex C^k = Λ^k g* ⊗ g, k = 0…n, with adjoint
/// coefficients. dim C^k = n · C(n, k).
pub struct CEComplex<S: Scalar> {
    n: usize,
    complex: Complex<S>,
}

impl<S: Scalar> CEComplex<S> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn complex(&self) -> &Complex<S> {
        &self.complex
    }

    pub fn cohomology_dim(&self, k: i64, tol: &Tol) -> Result<usize> {
        Ok(self.complex.cohomology_basis(k, tol)?.dim())
    }
}

pub fn ce_complex<S: Scalar>(g: &LieAlgebra<S>) -> Result<CEComplex<S>> {
    let n = g.dim();
    let dims: Vec<(i64, usize)> =
        (0..=n).map(|k| (k as i64, n * binomial(n, k))).collect();
    let module = GradedModule::from_pairs(&dims);
    let mut blocks = BTreeMap::new();
    for k in 0..n {
        blocks.insert(k as i64, ce_diff_block(g.bracket(), k)?);
    }
    let d = GradedMap::new(module.clone(), module.clone(), 1, blocks)?;
    let c = Complex::new(module, d)?;
    if !c.is_complex(&Tol::default())? {
        return Err(Error::AxiomViolation(
            "Chevalley–Eilenberg differential does not square to zero \
             (the bracket violates Jacobi)"
                .into(),
        ));
    }
    Ok(CEComplex { n, complex: c })
}

pub fn h2_vanishes<S: Scalar>(g: &LieAlgebra<S>, tol: &Tol) -> Result<bool> {
    Ok(ce_complex(g)?.cohomology_dim(2, tol)? == 0)
}

/// A polynomial family of brackets Σ_r B_r t^r on a fixed underlying space,
/// with the Jacobi identity holding as a polynomial identity in t (validated
/// coefficient-wise on construction) and an interval |t| ≤ t_max.
#[derive(Clone, Debug)]
pub struct BracketFamily<S: Scalar> {
    coeffs: Vec<TwoCochain<S>>,
    t_max: f64,
}

impl<S: Scalar> BracketFamily<S> {
    pub fn new(coeffs: Vec<TwoCochain<S>>, t_max: f64, tol: &Tol) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::DomainViolation("a family needs at least one coefficient".into()));
        }
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::DomainViolation(format!("t_max = {t_max} must be positive")));
        }
        let n = coeffs[0].n();
        if coeffs.iter().any(|c| c.n() != n) {
            return Err(Error::ShapeMismatch {
                context: "BracketFamily::new".into(),
                detail: "coefficients live on different spaces".into(),
            });
        }
        for (r, c) in coeffs.iter().enumerate() {
            if !c.is_antisymmetric(tol) {
                return Err(Error::AxiomViolation(format!(
                    "coefficient B_{r} is not antisymmetric"
                )));
            }
        }
        let deg = coeffs.len() - 1;
        for s in 0..=(2 * deg) {
            let mut acc = ThreeCochain::zero(n);
            for r1 in 0..=deg.min(s) {
                let r2 = s - r1;
                if r2 > deg {
                    continue;
                }
                acc = acc.add(&jacobi_pair(&coeffs[r1], &coeffs[r2])?)?;
            }
            if !acc.is_zero_within(tol) {
                return Err(Error::AxiomViolation(format!(
                    "family Jacobi identity fails at t-order {s} (residual {:e})",
                    acc.norm_inf()
                )));
            }
        }
        Ok(BracketFamily { coeffs, t_max })
    }

    pub fn n(&self) -> usize {
        self.coeffs[0].n()
    }

    pub fn coeffs(&self) -> &[TwoCochain<S>] {
        &self.coeffs
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    /// The algebra at t = 0. Valid by the order-0 family invariant.
    pub fn base(&self) -> LieAlgebra<S> {
        LieAlgebra { bracket: self.coeffs[0].clone() }
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

    pub fn bracket_at(&self, t: &S) -> TwoCochain<S> {
        let mut acc = self.coeffs.last().expect("nonempty").clone();
        for b in self.coeffs.iter().rev().skip(1) {
            acc = acc.scale(t).add(b).expect("family coefficients share a space");
        }
        acc
    }

    /// d/dt of the family: Σ_r r B_r t^{r−1}.
    pub fn derivative_at(&self, t: &S) -> TwoCochain<S> {
        let n = self.n();
        if self.coeffs.len() == 1 {
            return TwoCochain::zero(n);
        }
        let scaled: Vec<TwoCochain<S>> = self
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

    pub fn to_f64(&self) -> BracketFamily<f64> {
        BracketFamily {
            coeffs: self.coeffs.iter().map(|c| c.map_scalars(|x| x.to_f64())).collect(),
            t_max: self.t_max,
        }
    }
}

/// The family t ↦ conjugation of g's bracket by exp(tX), for nilpotent X.
/// Nilpotency keeps exp(±tX) polynomial in t, so the result is an honest
/// polynomial family — and a known-trivial one: h_t = exp(tX) trivializes it.
pub fn conjugation_family<S: Scalar>(
    g: &LieAlgebra<S>,
    x: &Mat<S>,
    t_max: f64,
    tol: &Tol,
) -> Result<BracketFamily<S>> {
    let n = g.dim();
    if x.nrows() != n || x.ncols() != n {
        return Err(Error::ShapeMismatch {
            context: "conjugation_family".into(),
            detail: format!("twist must be {n}×{n}"),
        });
    }
    let mut nil = None;
    let mut p = Mat::<S>::identity(n);
    for a in 1..=n {
        p = p.mul(x)?;
        if p.is_zero_within(tol) {
            nil = Some(a);
            break;
        }
    }
    let Some(nil) = nil else {
        return Err(Error::DomainViolation(
            "the twist is not nilpotent; conjugation families need a polynomial exp(tX)".into(),
        ));
    };
    // P_a = X^a / a!  for a < nil
    let mut pows = vec![Mat::<S>::identity(n)];
    let mut xa = Mat::<S>::identity(n);
    let mut fact: i64 = 1;
    for a in 1..nil {
        xa = xa.mul(x)?;
        fact *= a as i64;
        pows.push(xa.scale(&S::from_ratio(1, fact)));
    }
    let mut coeffs = Vec::new();
    for r in 0..=3 * (nil - 1) {
        let mut b = TwoCochain::zero(n);
        for i in 0..n {
            for j in (i + 1)..n {
                let mut col = vec![S::zero(); n];
                for (a, pa) in pows.iter().enumerate() {
                    if a > r {
                        break;
                    }
                    let border = r - a;
                    let mut mb = vec![S::zero(); n];
                    for (p, pp) in pows.iter().enumerate() {
                        if p > border {
                            break;
                        }
                        let q = border - p;
                        if q >= nil {
                            continue;
                        }
                        let w = g.bracket().eval(&pp.col(i), &pows[q].col(j))?;
                        for (m, wv) in w.into_iter().enumerate() {
                            mb[m] = mb[m].clone() + wv;
                        }
                    }
                    let applied = pa.matvec(&mb)?;
                    let neg = a % 2 == 1;
                    for (m, av) in applied.into_iter().enumerate() {
                        col[m] = if neg { col[m].clone() - av } else { col[m].clone() + av };
                    }
                }
                b.set_pair(i, j, &col)?;
            }
        }
        coeffs.push(b);
    }
    while coeffs.len() > 1 && coeffs.last().expect("nonempty").is_zero() {
        coeffs.pop();
    }
    BracketFamily::new(coeffs, t_max, tol)
}

/// c_t = Σ_r r B_r t^{r−1}, verified closed for the differential of the
/// bracket at t.
pub fn deformation_cocycle<S: Scalar>(
    fam: &BracketFamily<S>,
    t: &S,
    tol: &Tol,
) -> Result<TwoCochain<S>> {
    fam.check_t(t)?;
    let c = fam.derivative_at(t);
    let d2 = ce_diff_block(&fam.bracket_at(t), 2)?;
    let r = d2.matvec(&c.to_coords())?;
    let worst = r.iter().map(|x| x.magnitude()).fold(0.0, f64::max);
    if r.iter().any(|x| !x.is_zero_within(tol)) {
        return Err(Error::NotClosed {
            context: format!("deformation cocycle at t = {t}"),
            residual: format!("{worst:e}"),
        });
    }
    Ok(c)
}

/// The CE complex of `b` restricted to degrees lo..=hi (a brutal truncation;
/// still a complex). The degree-2 pipeline only ever touches this window.
fn ce_window<S: Scalar>(b: &TwoCochain<S>, lo: i64, hi: i64) -> Result<Complex<S>> {
    let n = b.n();
    let dims: Vec<(i64, usize)> = (lo..=hi)
        .filter(|&k| k >= 0)
        .map(|k| (k, n * binomial(n, k as usize)))
        .collect();
    let module = GradedModule::from_pairs(&dims);
    let mut blocks = BTreeMap::new();
    for k in lo..hi {
        if k < 0 || module.dim(k) == 0 || module.dim(k + 1) == 0 {
            continue;
        }
        blocks.insert(k, ce_diff_block(b, k as usize)?);
    }
    let d = GradedMap::new(module.clone(), module.clone(), 1, blocks)?;
    Complex::new(module, d)
}

fn delta_on_window<S: Scalar>(
    b_t: &TwoCochain<S>,
    window: &Complex<S>,
) -> Result<GradedMap<S>> {
    let mut blocks = BTreeMap::new();
    for k in window.module().support() {
        if window.module().dim(k + 1) == 0 {
            continue;
        }
        let dt = ce_diff_block(b_t, k as usize)?;
        blocks.insert(k, dt.sub(&window.d().block(k))?);
    }
    GradedMap::new(window.module().clone(), window.module().clone(), 1, blocks)
}

fn try_h<S: Scalar>(
    fam: &BracketFamily<S>,
    t: &S,
    base: &DegreeContraction<S>,
    window: &Complex<S>,
    tol: &Tol,
) -> Result<DegreeContraction<S>> {
    let delta = delta_on_window(&fam.bracket_at(t), window)?;
    let pert = Perturbation::new(window, delta, tol)?;
    perturb_degree_contraction(window, base, &pert, tol)
}

/// Largest |t·s|, s ∈ [0, 1], at which certification still succeeds
/// (bisection; used to decorate NotSmall errors).
fn smallness_sup<S: Scalar>(
    fam: &BracketFamily<S>,
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
        if try_h(fam, &at, base, window, tol).is_ok() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (t.clone() * lo).magnitude()
}

fn certified_h<S: Scalar>(
    fam: &BracketFamily<S>,
    t: &S,
    base: &DegreeContraction<S>,
    window: &Complex<S>,
    tol: &Tol,
) -> Result<DegreeContraction<S>> {
    match try_h(fam, t, base, window, tol) {
        Err(Error::NotSmall { degree, .. }) => {
            let sup = smallness_sup(fam, t, base, window, tol);
            Err(Error::NotSmall {
                degree,
                detail: Some(format!(
                    "certification holds up to |t| ≈ {sup:.6} but fails at |t| = {}",
                    t.magnitude()
                )),
            })
        }
        // rank ambiguity at the invertibility threshold is a failed
        // smallness certificate, not a user-facing linear-algebra error
        Err(Error::NumericRankAmbiguity { magnitude, .. }) => {
            let sup = smallness_sup(fam, t, base, window, tol);
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

/// The contracting homotopy of the family's complex at parameter t, obtained
/// by perturbing the base degree contraction with δ_t = d_t − d_0. Fails with
/// NotSmall (decorated with the certifiable radius) outside the invertibility
/// region.
pub fn perturbed_contraction_at<S: Scalar>(
    fam: &BracketFamily<S>,
    t: &S,
    base: &DegreeContraction<S>,
    tol: &Tol,
) -> Result<DegreeContraction<S>> {
    fam.check_t(t)?;
    let window = ce_window(&fam.coeffs()[0], (base.k - 1).max(0), base.k + 2)?;
    certified_h(fam, t, base, &window, tol)
}

/// Trivialization data on a grid: h_0 = 1, each h_t invertible with its
/// condition number, and the bracket defect at every grid point.
#[derive(Clone, Debug)]
pub struct TrivializationResult {
    pub grid: Vec<f64>,
    pub h: Vec<Mat<f64>>,
    pub defects: Vec<f64>,
    pub conds: Vec<f64>,
    /// Sign s with a_t = s·H_t(c_t) selected by the residual of d_t a_t = c_t.
    pub sign: i64,
}

fn defect_at(fam: &BracketFamily<f64>, h: &Mat<f64>, t: f64) -> Result<f64> {
    let n = fam.n();
    let b0 = &fam.coeffs()[0];
    let bt = fam.bracket_at(&t);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let lhs = b0.eval(&h.col(i), &h.col(j))?;
            let rhs = h.matvec(&bt.eval_basis(i, j))?;
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

struct Stage<'a> {
    fam: &'a BracketFamily<f64>,
    base: &'a DegreeContraction<f64>,
    window: &'a Complex<f64>,
    tol: Tol,
    sign: Option<i64>,
    n: usize,
}

impl Stage<'_> {
    fn a_at(&mut self, t: f64) -> Result<Mat<f64>> {
        let c_coords = self.fam.derivative_at(&t).to_coords();
        let c_norm = c_coords.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if c_norm <= 1e-14 {
            return Ok(Mat::zeros(self.n, self.n));
        }
        let hdc = certified_h(self.fam, &t, self.base, self.window, &self.tol)?;
        let a_plus = hdc.h_k.matvec(&c_coords)?;
        if a_plus.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvariantViolation(format!(
                "transgression produced non-finite coordinates at t = {t}"
            )));
        }
        let d1 = ce_diff_block(&self.fam.bracket_at(&t), 1)?;
        let d_plus = d1.matvec(&a_plus)?;
        let res = |s: f64| -> f64 {
            d_plus
                .iter()
                .zip(&c_coords)
                .fold(0.0f64, |m, (dp, c)| m.max((s * dp - c).abs()))
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

/// Solve dh_t/dt = h_t ∘ a_t, h_0 = 1, by fixed-step RK4 on [0, t_max],
/// where a_t = ±H_t(c_t) transgresses the deformation cocycle through the
/// perturbed degree-2 contraction. The defect
/// ‖[h_t v, h_t w]_0 − h_t([v,w]_t)‖ is checked at every grid point against
/// `TAU_TRIV`.
pub fn trivialize<S: Scalar>(
    fam: &BracketFamily<S>,
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
    let base = fam.base();
    let ce = ce_complex(&base)?;
    let dc = build_contraction(ce.complex(), 2, tol)?;
    let fam_f = fam.to_f64();
    let dc_f = DegreeContraction {
        k: 2,
        h_k: dc.h_k.map(|x| x.to_f64()),
        h_k1: dc.h_k1.map(|x| x.to_f64()),
    };
    let n = fam.n();
    let window = ce_window(&fam_f.coeffs()[0], 1, 4)?;
    let mut stage = Stage { fam: &fam_f, base: &dc_f, window: &window, tol: *tol, sign: None, n };

    let cond_of = |h: &Mat<f64>, t: f64| -> Result<f64> {
        let inv = h
            .inverse(tol)?
            .ok_or_else(|| Error::Singular(format!("trivialization matrix at t = {t}")))?;
        Ok(frobenius(h) * frobenius(&inv))
    };

    let mut h: Mat<f64> = Mat::identity(n);
    let mut grid = vec![0.0];
    let mut hs = vec![h.clone()];
    let mut defects = vec![defect_at(&fam_f, &h, 0.0)?];
    let mut conds = vec![cond_of(&h, 0.0)?];
    let dt = t_max / steps as f64;
    let mut a_left = stage.a_at(0.0)?;
    for i in 0..steps {
        let t0 = dt * i as f64;
        let t1 = if i + 1 == steps { t_max } else { dt * (i + 1) as f64 };
        let a_mid = stage.a_at(t0 + dt / 2.0)?;
        let a_right = stage.a_at(t1)?;
        let k1 = h.mul(&a_left)?;
        let k2 = h.add(&k1.scale(&(dt / 2.0)))?.mul(&a_mid)?;
        let k3 = h.add(&k2.scale(&(dt / 2.0)))?.mul(&a_mid)?;
        let k4 = h.add(&k3.scale(&dt))?.mul(&a_right)?;
        let incr = k1.add(&k2.scale(&2.0))?.add(&k3.scale(&2.0))?.add(&k4)?.scale(&(dt / 6.0));
        h = h.add(&incr)?;
        a_left = a_right;
        let d = defect_at(&fam_f, &h, t1)?;
        if d > TAU_TRIV {
            return Err(Error::DefectExceeded { t: t1, defect: d, tol: TAU_TRIV });
        }
        grid.push(t1);
        hs.push(h.clone());
        defects.push(d);
        conds.push(cond_of(&h, t1)?);
    }
    Ok(TrivializationResult {
        grid,
        h: hs,
        defects,
        conds,
        sign: stage.sign.unwrap_or(-1),
    })
}

/// C¹ = End(g) in the subset coordinates: coords[i·n + m] = a(e_i)_m.
pub fn one_cochain_coords<S: Scalar>(a: &Mat<S>) -> Vec<S> {
    let n = a.nrows();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for m in 0..n {
            out.push(a[(m, i)].clone());
        }
    }
    out
}

pub fn one_cochain_from_coords<S: Scalar>(n: usize, coords: &[S]) -> Mat<S> {
    Mat::from_fn(n, n, |m, i| coords[i * n + m].clone())
}

/// C(φ)(v, w) = φ⁻¹[φ v, φ w]; C(1) is the bracket itself, and the
/// derivative of C at the identity is the CE differential C¹ → C².
pub fn conjugation_map<S: Scalar>(
    g: &LieAlgebra<S>,
    phi: &Mat<S>,
    tol: &Tol,
) -> Result<TwoCochain<S>> {
    let n = g.dim();
    if phi.nrows() != n || phi.ncols() != n {
        return Err(Error::ShapeMismatch {
            context: "conjugation_map".into(),
            detail: format!("expected a {n}×{n} matrix"),
        });
    }
    let inv = phi
        .inverse(tol)?
        .ok_or_else(|| Error::Singular("conjugation_map".into()))?;
    let mut out = TwoCochain::zero(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let w = g.bracket().eval(&phi.col(i), &phi.col(j))?;
            out.set_pair(i, j, &inv.matvec(&w)?)?;
        }
    }
    Ok(out)
}

/// Chord–Newton for C(φ) = m′: the frozen approximate inverse of the
/// linearization is the base degree-2 contraction, so each step conjugates by
/// 1 + h_k(C(φ) − m′). Stops when the residual drops below `TAU_NEWTON`;
/// gives up after `NEWTON_MAX_ITER` steps.
pub fn conjugate_nearby_bracket<S: Scalar>(
    g: &LieAlgebra<S>,
    target: &TwoCochain<S>,
    tol: &Tol,
) -> Result<Mat<f64>> {
    let n = g.dim();
    if target.n() != n {
        return Err(Error::ShapeMismatch {
            context: "conjugate_nearby_bracket".into(),
            detail: format!("target lives on dimension {}, the algebra on {n}", target.n()),
        });
    }
    let jt = jacobi_map(target)?;
    if !jt.is_zero_within(tol) {
        return Err(Error::AxiomViolation(format!(
            "target bracket fails the Jacobi identity (residual {:e})",
            jt.norm_inf()
        )));
    }
    let gf = g.map_scalars(|x| x.to_f64());
    let tf = target.map_scalars(|x| x.to_f64());
    let ce = ce_complex(&gf)?;
    let dc = build_contraction(ce.complex(), 2, tol)?;
    let mut phi: Mat<f64> = Mat::identity(n);
    let mut iters = 0usize;
    loop {
        let cur = match conjugation_map(&gf, &phi, tol) {
            Ok(c) => c,
            Err(Error::Singular(_)) => {
                return Err(Error::NoConvergence { iters, residual: f64::INFINITY })
            }
            Err(e) => return Err(e),
        };
        let diff = cur.sub(&tf)?;
        // max-folds ignore NaN, so divergence to non-finite values must be
        // caught before trusting the residual
        if diff.t.iter().any(|x| !x.is_finite()) {
            return Err(Error::NoConvergence { iters, residual: f64::INFINITY });
        }
        let residual = diff.norm_inf();
        if residual <= TAU_NEWTON {
            return Ok(phi);
        }
        if iters == NEWTON_MAX_ITER {
            return Err(Error::NoConvergence { iters, residual });
        }
        let step = dc.h_k.matvec(&diff.to_coords())?;
        let a = one_cochain_from_coords(n, &step);
        phi = phi.mul(&Mat::identity(n).add(&a)?)?;
        iters += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rat;
    use proptest::prelude::*;

    fn ri(n: i64) -> Rat {
        Rat::from_i64(n)
    }

    fn tol() -> Tol {
        Tol::default()
    }

    /// [e0, e1] = e1 — the smallest nonabelian algebra.
    fn affine2() -> LieAlgebra<Rat> {
        let b = TwoCochain::from_brackets(2, &[(0, 1, vec![ri(0), ri(1)])]).unwrap();
        LieAlgebra::new(b, &tol()).unwrap()
    }

    fn unit(n: usize, k: usize) -> Vec<Rat> {
        let mut v = vec![ri(0); n];
        v[k] = ri(1);
        v
    }

    #[test]
    fn ce_dims_match_the_binomial_count() {
        let ce = ce_complex(&sl2()).unwrap();
        for (k, want) in [(0, 3), (1, 9), (2, 9), (3, 3)] {
            assert_eq!(ce.complex().dim(k), want);
        }
        assert!(ce.complex().is_complex(&tol()).unwrap());
    }

    #[test]
    fn degree_zero_differential_is_the_bracket_action() {
        // Oracle: for a = e_p in C⁰, (da)(e_u) = [e_u, e_p].
        let g = sl2();
        let d0 = ce_diff_block(g.bracket(), 0).unwrap();
        for p in 0..3 {
            let da = d0.matvec(&unit(3, p)).unwrap();
            for u in 0..3 {
                let want = g.bracket().eval_basis(u, p);
                assert_eq!(&da[u * 3..(u + 1) * 3], want.as_slice());
            }
        }
    }

    #[test]
    fn degree_one_differential_matches_the_defining_equation() {
        // Oracle: (da)(v,w) = [a v, w] + [v, a w] − a([v,w]), evaluated
        // directly from the structure tensor.
        for g in [sl2(), so3()] {
            let a = Mat::from_rows(vec![
                vec![ri(1), ri(-2), ri(0)],
                vec![ri(3), ri(0), ri(5)],
                vec![ri(-1), ri(4), ri(2)],
            ])
            .unwrap();
            let d1 = ce_diff_block(g.bracket(), 1).unwrap();
            let img = d1.matvec(&one_cochain_coords(&a)).unwrap();
            for (s, pair) in k_subsets(3, 2).iter().enumerate() {
                let (i, j) = (pair[0], pair[1]);
                let t1 = g.bracket().eval(&a.col(i), &unit(3, j)).unwrap();
                let t2 = g.bracket().eval(&unit(3, i), &a.col(j)).unwrap();
                let t3 = a.matvec(&g.bracket().eval_basis(i, j)).unwrap();
                for m in 0..3 {
                    let want = t1[m].clone() + t2[m].clone() - t3[m].clone();
                    assert_eq!(img[s * 3 + m], want, "pair ({i},{j}), output {m}");
                }
            }
        }
    }

    #[test]
    fn abelian_algebras_have_zero_differential() {
        let ce = ce_complex(&abelian(3)).unwrap();
        assert!(ce.complex().d().is_zero());
    }

    #[test]
    fn affine2_gives_a_complex() {
        let ce = ce_complex(&affine2()).unwrap();
        assert!(ce.complex().is_complex(&tol()).unwrap());
        assert_eq!(ce.complex().dim(1), 4);
    }

    #[test]
    fn sl2_low_cohomology_vanishes_with_rank_oracle() {
        // Independent oracle: dim H^k = dim C^k − rank d^k − rank d^{k−1}.
        let ce = ce_complex(&sl2()).unwrap();
        for k in 0..=2i64 {
            let via_basis = ce.cohomology_dim(k, &tol()).unwrap();
            let rk_out = ce.complex().d().block(k).rank(&tol()).unwrap();
            let rk_in = ce.complex().d().block(k - 1).rank(&tol()).unwrap();
            let via_rank = ce.complex().dim(k) - rk_out - rk_in;
            assert_eq!(via_basis, via_rank, "degree {k}");
            assert_eq!(via_basis, 0, "degree {k}");
        }
    }

    #[test]
    fn h2_vanishing_flags() {
        assert!(h2_vanishes(&sl2(), &tol()).unwrap());
        assert!(h2_vanishes(&so3(), &tol()).unwrap());
        assert!(!h2_vanishes(&abelian(2), &tol()).unwrap());
        assert!(h2_vanishes(&abelian(1), &tol()).unwrap());
        assert!(!h2_vanishes(&heisenberg3(), &tol()).unwrap());
    }

    #[test]
    fn lie_algebra_validation_rejects_non_jacobi_tensors() {
        // c(e0,e1) = e0, c(e1,e2) = e1: the Jacobiator is −e0 on (e0,e1,e2).
        let c = TwoCochain::from_brackets(3, &[(0, 1, unit(3, 0)), (1, 2, unit(3, 1))]).unwrap();
        assert!(!jacobi_map(&c).unwrap().is_zero());
        assert!(matches!(
            LieAlgebra::new(c, &tol()),
            Err(Error::AxiomViolation(_))
        ));
    }

    fn scaling_family(g: &LieAlgebra<Rat>, t_max: f64) -> BracketFamily<Rat> {
        let b = g.bracket().clone();
        BracketFamily::new(vec![b.clone(), b], t_max, &tol()).unwrap()
    }

    #[test]
    fn family_validation_rejects_broken_jacobi_mixes() {
        // sl₂ + t·([e2,e0] = e0) violates Jacobi at t-order 1. (Mixing sl₂
        // with so₃ would not do: both are cross-product brackets b_A(x,y) =
        // A(x×y) with symmetric A, and every such mix stays Jacobi.)
        let b1 = TwoCochain::from_brackets(3, &[(2, 0, unit(3, 0))]).unwrap();
        let err = BracketFamily::new(vec![sl2().bracket().clone(), b1], 1.0, &tol());
        assert!(matches!(err, Err(Error::AxiomViolation(_))));
    }

    #[test]
    fn deformation_cocycles_of_simple_families() {
        let g = sl2();
        let constant = BracketFamily::new(vec![g.bracket().clone()], 1.0, &tol()).unwrap();
        assert!(deformation_cocycle(&constant, &Rat::from_ratio(1, 3), &tol())
            .unwrap()
            .is_zero());
        let scaling = scaling_family(&g, 2.0);
        let c = deformation_cocycle(&scaling, &Rat::from_ratio(1, 2), &tol()).unwrap();
        assert_eq!(&c, g.bracket());
        assert!(matches!(
            deformation_cocycle(&scaling, &ri(3), &tol()),
            Err(Error::DomainViolation(_))
        ));
    }

    #[test]
    fn conjugation_family_matches_pointwise_conjugation() {
        // Oracle: the family evaluated at rational t must equal the
        // conjugation of the bracket by exp(tX) computed directly.
        let g = sl2();
        let x = Mat::from_rows(vec![
            vec![ri(0), ri(1), ri(2)],
            vec![ri(0), ri(0), ri(1)],
            vec![ri(0), ri(0), ri(0)],
        ])
        .unwrap();
        let fam = conjugation_family(&g, &x, 1.0, &tol()).unwrap();
        assert_eq!(fam.coeffs()[0], *g.bracket());
        let t = Rat::from_ratio(1, 2);
        let mut phi = Mat::<Rat>::identity(3);
        let mut xa = Mat::<Rat>::identity(3);
        let mut fact = 1i64;
        for a in 1..3 {
            xa = xa.mul(&x).unwrap();
            fact *= a as i64;
            let ta = (0..a).fold(ri(1), |acc, _| acc * t.clone());
            phi = phi.add(&xa.scale(&(ta * Rat::from_ratio(1, fact)))).unwrap();
        }
        let direct = conjugation_map(&g, &phi, &tol()).unwrap();
        assert_eq!(fam.bracket_at(&t), direct);
        // exact closedness at a rational grid point
        deformation_cocycle(&fam, &Rat::from_ratio(1, 3), &tol()).unwrap();
    }

    #[test]
    fn conjugation_family_requires_nilpotent_twists() {
        assert!(matches!(
            conjugation_family(&sl2(), &Mat::identity(3), 1.0, &tol()),
            Err(Error::DomainViolation(_))
        ));
    }

    #[test]
    fn perturbed_contraction_at_zero_is_the_base() {
        let g = sl2();
        let ce = ce_complex(&g).unwrap();
        let base = build_contraction(ce.complex(), 2, &tol()).unwrap();
        let fam = scaling_family(&g, 2.0);
        let out = perturbed_contraction_at(&fam, &ri(0), &base, &tol()).unwrap();
        assert_eq!(out.h_k, base.h_k);
        assert_eq!(out.h_k1, base.h_k1);
        let moved = perturbed_contraction_at(&fam, &Rat::from_ratio(1, 10), &base, &tol()).unwrap();
        assert_ne!(moved.h_k, base.h_k);
    }

    #[test]
    fn perturbed_contraction_fails_at_the_degeneration_point() {
        // At t = −1 the scaled bracket collapses, 1 − δ h drops rank, and the
        // failure names degree 2 together with the certifiable radius.
        let g = sl2();
        let ce = ce_complex(&g).unwrap();
        let base = build_contraction(ce.complex(), 2, &tol()).unwrap();
        let fam = scaling_family(&g, 2.0);
        match perturbed_contraction_at(&fam, &ri(-1), &base, &tol()) {
            Err(Error::NotSmall { degree, detail }) => {
                assert_eq!(degree, 2);
                assert!(detail.unwrap().contains("certification holds up to"));
            }
            other => panic!("expected NotSmall, got {other:?}"),
        }
    }

    /// Recompute the defect of a trivialization grid from scratch.
    fn defect_oracle(fam: &BracketFamily<f64>, h: &Mat<f64>, t: f64) -> f64 {
        let n = fam.n();
        let b0 = &fam.coeffs()[0];
        let bt = fam.bracket_at(&t);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let lhs = b0.eval(&h.col(i), &h.col(j)).unwrap();
                let rhs = h.matvec(&bt.eval_basis(i, j)).unwrap();
                for (a, b) in lhs.iter().zip(&rhs) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
        worst
    }

    #[test]
    fn trivialize_constant_family_stays_at_the_identity() {
        let fam = BracketFamily::new(vec![sl2().bracket().clone()], 1.0, &tol()).unwrap();
        let out = trivialize(&fam, 0.5, 20, &tol()).unwrap();
        for h in &out.h {
            assert_eq!(*h, Mat::identity(3));
        }
        assert!(out.defects.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn trivialize_scaling_family_on_sl2() {
        let fam = scaling_family(&sl2(), 1.0);
        let out = trivialize(&fam, 0.5, 100, &tol()).unwrap();
        assert_eq!(out.h[0], Mat::identity(3));
        assert_eq!(out.grid.len(), 101);
        assert_eq!(out.sign, -1);
        let fam_f = fam.to_f64();
        for (h, &t) in out.h.iter().zip(&out.grid) {
            assert!(defect_oracle(&fam_f, h, t) <= TAU_TRIV, "defect at t = {t}");
        }
        // sanity of the oracle itself: the closed-form trivialization
        // h̃_t = (1+t)·1 has defect ~ machine epsilon
        for &t in &out.grid {
            let closed = Mat::<f64>::identity(3).scale(&(1.0 + t));
            assert!(defect_oracle(&fam_f, &closed, t) <= 1e-12);
        }
        for c in &out.conds {
            assert!(c.is_finite() && *c >= 3.0 - 1e-9);
        }
    }

    #[test]
    fn trivialize_conjugation_family_on_so3() {
        let x = Mat::from_rows(vec![
            vec![ri(0), ri(2), ri(-1)],
            vec![ri(0), ri(0), ri(3)],
            vec![ri(0), ri(0), ri(0)],
        ])
        .unwrap();
        let fam = conjugation_family(&so3(), &x, 1.0, &tol()).unwrap();
        let out = trivialize(&fam, 0.5, 100, &tol()).unwrap();
        let fam_f = fam.to_f64();
        for (h, &t) in out.h.iter().zip(&out.grid) {
            assert!(defect_oracle(&fam_f, h, t) <= TAU_TRIV, "defect at t = {t}");
        }
    }

    #[test]
    fn trivialize_gates_on_h2() {
        // Heisenberg is not rigid; the pipeline must refuse at the
        // contraction-building step.
        let g = heisenberg3();
        let b1 = TwoCochain::from_brackets(
            3,
            &[(2, 0, unit(3, 0)), (2, 1, vec![ri(0), ri(-1), ri(0)])],
        )
        .unwrap();
        let fam = BracketFamily::new(vec![g.bracket().clone(), b1], 1.0, &tol()).unwrap();
        assert!(matches!(
            trivialize(&fam, 0.5, 10, &tol()),
            Err(Error::CohomologyNonzero { degree: 2, .. })
        ));
    }

    #[test]
    fn trivialize_rejects_bad_parameters() {
        let fam = scaling_family(&sl2(), 1.0);
        assert!(matches!(
            trivialize(&fam, 0.5, 0, &tol()),
            Err(Error::DomainViolation(_))
        ));
        assert!(matches!(
            trivialize(&fam, 2.5, 10, &tol()),
            Err(Error::DomainViolation(_))
        ));
    }

    #[test]
    fn conjugation_map_identity_and_scaling() {
        let g = sl2();
        assert_eq!(conjugation_map(&g, &Mat::identity(3), &tol()).unwrap(), *g.bracket());
        let two = Mat::<Rat>::identity(3).scale(&ri(2));
        assert_eq!(
            conjugation_map(&g, &two, &tol()).unwrap(),
            g.bracket().scale(&ri(2))
        );
        let sing = Mat::<Rat>::zeros(3, 3);
        assert!(matches!(
            conjugation_map(&g, &sing, &tol()),
            Err(Error::Singular(_))
        ));
    }

    fn fd_direction() -> Mat<f64> {
        Mat::from_rows(vec![
            vec![0.3, -0.7, 0.2],
            vec![0.1, 0.4, -0.5],
            vec![-0.2, 0.6, 0.9],
        ])
        .unwrap()
    }

    fn conj_fd_err(g: &LieAlgebra<f64>, a: &Mat<f64>, eps: f64) -> f64 {
        let n = g.dim();
        let plus = conjugation_map(g, &Mat::identity(n).add(&a.scale(&eps)).unwrap(), &tol())
            .unwrap();
        let minus = conjugation_map(g, &Mat::identity(n).add(&a.scale(&-eps)).unwrap(), &tol())
            .unwrap();
        let fd = plus.sub(&minus).unwrap().scale(&(1.0 / (2.0 * eps)));
        let d1 = ce_diff_block(g.bracket(), 1).unwrap();
        let exact =
            TwoCochain::from_coords(n, &d1.matvec(&one_cochain_coords(a)).unwrap()).unwrap();
        fd.sub(&exact).unwrap().norm_inf()
    }

    #[test]
    fn conjugation_derivative_is_the_ce_differential() {
        let g = sl2().map_scalars(|x| x.to_f64());
        let a = fd_direction();
        assert!(conj_fd_err(&g, &a, 1e-3) <= 1e-4);
        let e1 = conj_fd_err(&g, &a, 1e-2);
        let e2 = conj_fd_err(&g, &a, 5e-3);
        assert!(e2 <= e1 / 3.0 + 1e-12, "no quadratic error decay: {e1:e} -> {e2:e}");
    }

    #[test]
    fn jacobi_map_vanishes_on_brackets() {
        assert!(jacobi_map(sl2().bracket()).unwrap().is_zero());
        assert!(jacobi_map(so3().bracket()).unwrap().is_zero());
        assert!(jacobi_map(&TwoCochain::<Rat>::zero(3)).unwrap().is_zero());
    }

    fn jac_fd_err(g: &LieAlgebra<f64>, c: &TwoCochain<f64>, eps: f64) -> f64 {
        let m = g.bracket();
        let plus = jacobi_map(&m.add(&c.scale(&eps)).unwrap()).unwrap();
        let minus = jacobi_map(&m.add(&c.scale(&-eps)).unwrap()).unwrap();
        let d2 = ce_diff_block(m, 2).unwrap();
        let exact = d2.matvec(&c.to_coords()).unwrap();
        plus.coords()
            .iter()
            .zip(minus.coords())
            .zip(&exact)
            .map(|((p, q), e)| ((p - q) / (2.0 * eps) + e).abs())
            .fold(0.0f64, f64::max)
    }

    #[test]
    fn jacobi_derivative_is_minus_the_ce_differential() {
        // DJ at the bracket equals −d on C²: central differences at two step
        // sizes, with quadratic error decay.
        let g = sl2().map_scalars(|x| x.to_f64());
        let c = TwoCochain::from_brackets(
            3,
            &[
                (0, 1, vec![0.4, -0.3, 0.7]),
                (0, 2, vec![-0.1, 0.5, 0.2]),
                (1, 2, vec![0.8, 0.1, -0.6]),
            ],
        )
        .unwrap();
        assert!(jac_fd_err(&g, &c, 1e-3) <= 1e-6);
        let e1 = jac_fd_err(&g, &c, 1e-2);
        let e2 = jac_fd_err(&g, &c, 5e-3);
        assert!(e2 <= e1 / 3.0 + 1e-12, "no quadratic error decay: {e1:e} -> {e2:e}");
    }

    #[test]
    fn newton_is_instant_at_the_original_bracket() {
        let g = sl2();
        let phi = conjugate_nearby_bracket(&g, g.bracket(), &tol()).unwrap();
        assert_eq!(phi, Mat::identity(3));
    }

    #[test]
    fn newton_recovers_a_planted_conjugation() {
        // Plant the conjugation in exact arithmetic so the target passes the
        // Jacobi gate exactly, then solve in floats.
        let g = sl2();
        let q = |p: i64| Rat::from_ratio(p, 200);
        let phi_star = Mat::from_rows(vec![
            vec![ri(1) + q(3), q(-7), q(2)],
            vec![q(1), ri(1) + q(4), q(-5)],
            vec![q(-2), q(6), ri(1) + q(9)],
        ])
        .unwrap();
        let target = conjugation_map(&g, &phi_star, &tol()).unwrap();
        let phi = conjugate_nearby_bracket(&g, &target, &tol()).unwrap();
        let gf = g.map_scalars(|x| x.to_f64());
        let achieved = conjugation_map(&gf, &phi, &tol()).unwrap();
        let tf = target.map_scalars(|x| x.to_f64());
        assert!(achieved.sub(&tf).unwrap().norm_inf() <= TAU_NEWTON);
    }

    #[test]
    fn newton_gives_up_far_from_the_bracket() {
        // 11·[·,·] is conjugate to the bracket (by 11·1), but far outside the
        // chord basin; the solver must report the failure, not garbage.
        let g = sl2();
        let far = g.bracket().scale(&ri(11));
        match conjugate_nearby_bracket(&g, &far, &tol()) {
            Err(Error::NoConvergence { iters, residual }) => {
                assert!(iters <= NEWTON_MAX_ITER);
                assert!(residual > TAU_NEWTON);
            }
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn newton_rejects_non_jacobi_targets_and_h2() {
        let g = sl2();
        let bad = TwoCochain::from_brackets(3, &[(0, 1, unit(3, 0)), (1, 2, unit(3, 1))]).unwrap();
        assert!(matches!(
            conjugate_nearby_bracket(&g, &bad, &tol()),
            Err(Error::AxiomViolation(_))
        ));
        let ab = abelian(2);
        assert!(matches!(
            conjugate_nearby_bracket(&ab, ab.bracket(), &tol()),
            Err(Error::CohomologyNonzero { degree: 2, .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        /// Conjugating by any unipotent matrix preserves the Lie axioms and
        /// the vanishing of H² — the CE complex of the conjugated bracket is
        /// again a complex with zero degree-2 cohomology.
        #[test]
        fn conjugated_sl2_stays_rigid(
            a in -3i64..=3, b in -3i64..=3, c in -3i64..=3,
        ) {
            let phi = Mat::from_rows(vec![
                vec![ri(1), ri(a), ri(b)],
                vec![ri(0), ri(1), ri(c)],
                vec![ri(0), ri(0), ri(1)],
            ]).unwrap();
            let conj = conjugation_map(&sl2(), &phi, &tol()).unwrap();
            let g = LieAlgebra::new(conj, &tol()).unwrap();
            prop_assert!(h2_vanishes(&g, &tol()).unwrap());
        }
    }
}
