//! (Co)chain complexes of finite-dimensional modules, cohomology with
//! explicit representatives and a coboundary decision procedure, chain maps,
//! quasi-isomorphisms, homotopies.

use crate::error::{Error, Result};
use crate::graded::{GradedModule, GradedMap};
use crate::matrix::Mat;
use crate::scalar::{Scalar, Tol};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Differential raises degree by one.
    Cochain,
    /// Differential lowers degree by one.
    Chain,
}

impl Orientation {
    pub fn shift(self) -> i64 {
        match self {
            Orientation::Cochain => 1,
            Orientation::Chain => -1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Complex<S: Scalar> {
    module: GradedModule,
    d: GradedMap<S>,
}

impl<S: Scalar> Complex<S> {
    /// The differential must be an endo-map of `module` with shift ±1.
    /// d² = 0 is *not* assumed here; `is_complex` checks it.
    pub fn new(module: GradedModule, d: GradedMap<S>) -> Result<Self> {
        if d.source() != &module || d.target() != &module {
            return Err(Error::ShapeMismatch {
                context: "Complex::new".into(),
                detail: "differential is not an endomorphism of the module".into(),
            });
        }
        if d.shift().abs() != 1 {
            return Err(Error::ShapeMismatch {
                context: "Complex::new".into(),
                detail: format!("differential shift {} is not ±1", d.shift()),
            });
        }
        Ok(Complex { module, d })
    }

    pub fn zero_complex(module: GradedModule, orientation: Orientation) -> Self {
        let d = GradedMap::zero(module.clone(), module.clone(), orientation.shift());
        Complex { module, d }
    }

    pub fn module(&self) -> &GradedModule {
        &self.module
    }

    pub fn d(&self) -> &GradedMap<S> {
        &self.d
    }

    pub fn orientation(&self) -> Orientation {
        if self.d.shift() == 1 {
            Orientation::Cochain
        } else {
            Orientation::Chain
        }
    }

    pub fn dim(&self, k: i64) -> usize {
        self.module.dim(k)
    }

    pub fn is_complex(&self, tol: &Tol) -> Result<bool> {
        let dd = self.d.compose(&self.d)?;
        Ok(dd.is_zero_within(tol))
    }

    /// Cohomology at degree k with representatives and decision data.
    pub fn cohomology_basis(&self, k: i64, tol: &Tol) -> Result<CohomologySpace<S>> {
        let s = self.d.shift();
        let d_out = self.d.block(k); // C^k -> C^{k+s}
        let d_in = self.d.block(k - s); // C^{k-s} -> C^k
        let ker = d_out.kernel_basis(tol)?;
        let im_cols = d_in.independent_columns(tol)?;
        let im_basis = d_in.columns(&im_cols);
        // choose kernel vectors extending the image to a basis of ker d_out
        let nk = self.module.dim(k);
        let mut cand = im_basis.clone();
        for v in &ker {
            let col = Mat::from_fn(nk, 1, |i, _| v[i].clone());
            cand = cand.hstack(&col)?;
        }
        let indep = cand.independent_columns(tol)?;
        let reps: Vec<Vec<S>> = indep
            .iter()
            .filter(|&&c| c >= im_basis.ncols())
            .map(|&c| cand.col(c))
            .collect();
        Ok(CohomologySpace {
            degree: k,
            space_dim: nk,
            d_out,
            d_in,
            im_basis,
            reps,
            tol: *tol,
        })
    }

    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T + Copy) -> Complex<T> {
        Complex { module: self.module.clone(), d: self.d.map_scalars(f) }
    }

    /// Reindex k ↦ −k so the differential raises degree. Degree-indexed
    /// operations (contractions at a fixed degree, transgression) are stated
    /// for cochain complexes; this is the canonical bridge. Cochain input is
    /// returned unchanged.
    pub fn to_cochain(&self) -> Complex<S> {
        if self.orientation() == Orientation::Cochain {
            return self.clone();
        }
        let pairs: Vec<(i64, usize)> =
            self.module.support().map(|k| (-k, self.module.dim(k))).collect();
        let module = GradedModule::from_pairs(&pairs);
        let blocks = self
            .d
            .stored_blocks()
            .iter()
            .map(|(&k, b)| (-k, b.clone()))
            .collect();
        let d = GradedMap::new(module.clone(), module.clone(), 1, blocks)
            .expect("reindexed differential keeps its block shapes");
        Complex { module, d }
    }
}

/// H^k with explicit representatives; also answers "is this vector a
/// coboundary?" and expresses cocycles in the representative basis.
pub struct CohomologySpace<S> {
    pub degree: i64,
    space_dim: usize,
    d_out: Mat<S>,
    d_in: Mat<S>,
    im_basis: Mat<S>,
    pub reps: Vec<Vec<S>>,
    tol: Tol,
}

impl<S: Scalar> CohomologySpace<S> {
    pub fn dim(&self) -> usize {
        self.reps.len()
    }

    pub fn is_cocycle(&self, v: &[S]) -> Result<bool> {
        let dv = self.d_out.matvec(v)?;
        Ok(dv.iter().all(|x| x.is_zero_within(&self.tol)))
    }

    /// Membership in the image of the incoming differential, with a witness
    /// preimage when the answer is yes.
    pub fn coboundary_witness(&self, v: &[S]) -> Result<Option<Vec<S>>> {
        let rhs = Mat::from_fn(self.space_dim, 1, |i, _| v[i].clone());
        match self.d_in.solve(&rhs, &self.tol)? {
            Some(x) => Ok(Some(x.col(0))),
            None => Ok(None),
        }
    }

    pub fn is_coboundary(&self, v: &[S]) -> Result<bool> {
        Ok(self.coboundary_witness(v)?.is_some())
    }

    /// Coordinates of a cocycle's class in the representative basis.
    /// `None` when v is not a cocycle.
    pub fn class_coords(&self, v: &[S]) -> Result<Option<Vec<S>>> {
        if !self.is_cocycle(v)? {
            return Ok(None);
        }
        // [reps | im] y = v is solvable for any cocycle v
        let mut span = Mat::zeros(self.space_dim, 0);
        for r in &self.reps {
            let col = Mat::from_fn(self.space_dim, 1, |i, _| r[i].clone());
            span = span.hstack(&col)?;
        }
        let nreps = span.ncols();
        span = span.hstack(&self.im_basis)?;
        let rhs = Mat::from_fn(self.space_dim, 1, |i, _| v[i].clone());
        let sol = span.solve(&rhs, &self.tol)?.ok_or_else(|| {
            Error::InvariantViolation("cocycle not in span of reps + image".into())
        })?;
        Ok(Some((0..nreps).map(|i| sol[(i, 0)].clone()).collect()))
    }
}

/// f: C -> D is a chain map when f has shift 0 and f∘d_C = d_D∘f.
pub fn is_chain_map<S: Scalar>(
    f: &GradedMap<S>,
    c: &Complex<S>,
    d: &Complex<S>,
    tol: &Tol,
) -> Result<bool> {
    if f.source() != c.module() || f.target() != d.module() || f.shift() != 0 {
        return Err(Error::ShapeMismatch {
            context: "is_chain_map".into(),
            detail: "expected a shift-0 map C -> D".into(),
        });
    }
    if c.d().shift() != d.d().shift() {
        return Err(Error::ShapeMismatch {
            context: "is_chain_map".into(),
            detail: "complex orientations disagree".into(),
        });
    }
    let lhs = f.compose(c.d())?;
    let rhs = d.d().compose(f)?;
    Ok(lhs.sub(&rhs)?.is_zero_within(tol))
}

/// f − g = d_D ∘ h + h ∘ d_C for h of shift opposite to the differential.
pub fn is_homotopy<S: Scalar>(
    h: &GradedMap<S>,
    f: &GradedMap<S>,
    g: &GradedMap<S>,
    c: &Complex<S>,
    d: &Complex<S>,
    tol: &Tol,
) -> Result<bool> {
    if h.shift() != -c.d().shift() {
        return Err(Error::ShapeMismatch {
            context: "is_homotopy".into(),
            detail: format!("homotopy shift {} must be {}", h.shift(), -c.d().shift()),
        });
    }
    let dh = d.d().compose(h)?;
    let hd = h.compose(c.d())?;
    let rhs = dh.add(&hd)?;
    let lhs = f.sub(g)?;
    Ok(lhs.sub(&rhs)?.is_zero_within(tol))
}

/// Induced map on cohomology at degree k, as a matrix in the representative
/// bases. Requires f to be a chain map.
pub fn induced_on_cohomology<S: Scalar>(
    f: &GradedMap<S>,
    hc: &CohomologySpace<S>,
    hd: &CohomologySpace<S>,
) -> Result<Mat<S>> {
    let k = hc.degree;
    let mut out = Mat::zeros(hd.dim(), hc.dim());
    for (j, rep) in hc.reps.iter().enumerate() {
        let img = f.block(k).matvec(rep)?;
        let coords = hd.class_coords(&img)?.ok_or_else(|| {
            Error::InvariantViolation(format!(
                "image of H^{k} representative is not a cocycle; f is not a chain map"
            ))
        })?;
        for (i, c) in coords.into_iter().enumerate() {
            out[(i, j)] = c;
        }
    }
    Ok(out)
}

/// True when the induced map on cohomology is bijective in every degree of
/// the joint support.
pub fn is_quasi_iso<S: Scalar>(
    f: &GradedMap<S>,
    c: &Complex<S>,
    d: &Complex<S>,
    tol: &Tol,
) -> Result<bool> {
    if !is_chain_map(f, c, d, tol)? {
        return Ok(false);
    }
    for k in c.module().joint_support(d.module()) {
        let hc = c.cohomology_basis(k, tol)?;
        let hd = d.cohomology_basis(k, tol)?;
        if hc.dim() != hd.dim() {
            return Ok(false);
        }
        if hc.dim() == 0 {
            continue;
        }
        let m = induced_on_cohomology(f, &hc, &hd)?;
        if m.rank(tol)? != hc.dim() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rat;
    use std::collections::BTreeMap;

    fn ri(n: i64) -> Rat {
        Rat::from_i64(n)
    }

    fn tol() -> Tol {
        Tol::default()
    }

    fn cochain(dims: &[(i64, usize)], blocks: Vec<(i64, Mat<Rat>)>) -> Complex<Rat> {
        let m = GradedModule::from_pairs(dims);
        let d = GradedMap::new(m.clone(), m.clone(), 1, blocks.into_iter().collect()).unwrap();
        Complex::new(m, d).unwrap()
    }

    // Independent rank oracle: Smith normal form over the integers.
    // Counts nonzero diagonal entries after clearing with exact integer ops.
    fn snf_rank(m: &Mat<Rat>) -> usize {
        use num_bigint::BigInt;
        use num_traits::{Signed, Zero};
        let mut a: Vec<Vec<BigInt>> = (0..m.nrows())
            .map(|i| {
                (0..m.ncols())
                    .map(|j| {
                        let x = &m[(i, j)];
                        assert!(
                            x.is_integer(),
                            "snf oracle wants integer matrices"
                        );
                        x.to_integer()
                    })
                    .collect()
            })
            .collect();
        let (rows, cols) = (m.nrows(), m.ncols());
        let mut rank = 0usize;
        let mut r = 0usize;
        let mut c = 0usize;
        while r < rows && c < cols {
            // find smallest-magnitude nonzero entry in the remaining block
            let mut piv: Option<(usize, usize)> = None;
            for i in r..rows {
                for j in c..cols {
                    if !a[i][j].is_zero()
                        && piv.map_or(true, |(pi, pj)| {
                            a[i][j].abs() < a[pi][pj].abs()
                        })
                    {
                        piv = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = piv else { break };
            a.swap(r, pi);
            for row in a.iter_mut() {
                row.swap(c, pj);
            }
            // reduce column and row by the pivot
            let mut again = false;
            for i in (r + 1)..rows {
                if !a[i][c].is_zero() {
                    let q = &a[i][c] / &a[r][c];
                    for j in c..cols {
                        let t = &q * &a[r][j];
                        a[i][j] = &a[i][j] - t;
                    }
                    if !a[i][c].is_zero() {
                        again = true;
                    }
                }
            }
            for j in (c + 1)..cols {
                if !a[r][j].is_zero() {
                    let q = &a[r][j] / &a[r][c];
                    for i in r..rows {
                        let t = &q * &a[i][c];
                        a[i][j] = &a[i][j] - t;
                    }
                    if !a[r][j].is_zero() {
                        again = true;
                    }
                }
            }
            if again {
                continue;
            }
            rank += 1;
            r += 1;
            c += 1;
        }
        rank
    }

    #[test]
    fn two_term_identity_is_complex() {
        let c = cochain(
            &[(0, 1), (1, 1)],
            vec![(0, Mat::from_rows(vec![vec![ri(1)]]).unwrap())],
        );
        assert!(c.is_complex(&tol()).unwrap());
    }

    #[test]
    fn three_term_identity_squares_nonzero() {
        let c = cochain(
            &[(0, 1), (1, 1), (2, 1)],
            vec![
                (0, Mat::from_rows(vec![vec![ri(1)]]).unwrap()),
                (1, Mat::from_rows(vec![vec![ri(1)]]).unwrap()),
            ],
        );
        assert!(!c.is_complex(&tol()).unwrap());
    }

    #[test]
    fn zero_differential_cohomology_dims() {
        let c = cochain(&[(0, 2), (1, 3), (2, 2)], vec![]);
        assert_eq!(c.cohomology_basis(1, &tol()).unwrap().dim(), 3);
        assert_eq!(c.cohomology_basis(0, &tol()).unwrap().dim(), 2);
    }

    #[test]
    fn rank_one_inclusion_leaves_h1_dim_one() {
        // d0 = [[1],[0]] : C^0 = Q -> C^1 = Q^2
        let c = cochain(
            &[(0, 1), (1, 2)],
            vec![(0, Mat::from_rows(vec![vec![ri(1)], vec![ri(0)]]).unwrap())],
        );
        let h1 = c.cohomology_basis(1, &tol()).unwrap();
        assert_eq!(h1.dim(), 1);
        // the class of (0,1) generates; (1,0) is a coboundary
        assert!(h1.is_coboundary(&[ri(1), ri(0)]).unwrap());
        assert!(!h1.is_coboundary(&[ri(0), ri(1)]).unwrap());
        let w = h1.coboundary_witness(&[ri(5), ri(0)]).unwrap().unwrap();
        assert_eq!(w, vec![ri(5)]);
    }

    #[test]
    fn cohomology_dims_match_snf_oracle() {
        // fixed mid-size complex over Z: dims chosen so ranks are nontrivial
        let d0 = Mat::from_rows(vec![
            vec![ri(1), ri(2)],
            vec![ri(0), ri(0)],
            vec![ri(3), ri(6)],
        ])
        .unwrap();
        let d1 = Mat::from_rows(vec![
            vec![ri(-3), ri(1), ri(1)],
            vec![ri(-6), ri(2), ri(2)],
        ])
        .unwrap();
        // check d1 ∘ d0 = 0 so this is a complex
        assert!(d1.mul(&d0).unwrap().is_zero());
        let c = cochain(&[(0, 2), (1, 3), (2, 2)], vec![(0, d0.clone()), (1, d1.clone())]);
        assert!(c.is_complex(&tol()).unwrap());
        let r0 = snf_rank(&d0);
        let r1 = snf_rank(&d1);
        assert_eq!(r0, 1);
        assert_eq!(r1, 1);
        let h1 = c.cohomology_basis(1, &tol()).unwrap();
        // dim H^1 = dim ker d1 − rank d0 = (3 − r1) − r0
        assert_eq!(h1.dim(), 3 - r1 - r0);
        for rep in &h1.reps {
            assert!(h1.is_cocycle(rep).unwrap());
            assert!(!h1.is_coboundary(rep).unwrap());
        }
    }

    #[test]
    fn chain_map_and_quasi_iso() {
        // C: 0 -> Q =1=> Q -> 0 (contractible), D: Q at degree 0
        let c = cochain(
            &[(0, 1), (1, 1)],
            vec![(0, Mat::from_rows(vec![vec![ri(1)]]).unwrap())],
        );
        let d = cochain(&[(0, 1)], vec![]);
        // zero map C -> D is a chain map and a quasi-iso? No: H^0(D) = 1 ≠ 0 = H^0(C).
        let z = GradedMap::zero(c.module().clone(), d.module().clone(), 0);
        assert!(is_chain_map(&z, &c, &d, &tol()).unwrap());
        assert!(!is_quasi_iso(&z, &c, &d, &tol()).unwrap());
        // identity on D is a quasi-iso
        let idd = GradedMap::identity(d.module());
        assert!(is_quasi_iso(&idd, &d, &d, &tol()).unwrap());
    }

    #[test]
    fn homotopy_on_contractible_two_term() {
        let dmat = Mat::from_rows(vec![vec![ri(2)]]).unwrap();
        let c = cochain(&[(0, 1), (1, 1)], vec![(0, dmat.clone())]);
        // h = d^{-1} exhibits id ≃ 0: each degree picks up exactly one of
        // d∘h (degree 1) or h∘d (degree 0), both equal to the identity.
        let hinv = Mat::from_rows(vec![vec![Rat::from_ratio(1, 2)]]).unwrap();
        let h = GradedMap::new(
            c.module().clone(),
            c.module().clone(),
            -1,
            BTreeMap::from([(1, hinv)]),
        )
        .unwrap();
        let id = GradedMap::identity(c.module());
        let zero = GradedMap::zero(c.module().clone(), c.module().clone(), 0);
        assert!(is_homotopy(&h, &id, &zero, &c, &c, &tol()).unwrap());
    }

    #[test]
    fn chain_orientation_supported() {
        // chain complex: d: C_1 -> C_0
        let m = GradedModule::from_pairs(&[(0, 1), (1, 1)]);
        let d = GradedMap::new(
            m.clone(),
            m.clone(),
            -1,
            BTreeMap::from([(1, Mat::from_rows(vec![vec![ri(1)]]).unwrap())]),
        )
        .unwrap();
        let c = Complex::new(m, d).unwrap();
        assert_eq!(c.orientation(), Orientation::Chain);
        assert!(c.is_complex(&tol()).unwrap());
        assert_eq!(c.cohomology_basis(0, &tol()).unwrap().dim(), 0);
        assert_eq!(c.cohomology_basis(1, &tol()).unwrap().dim(), 0);
    }

    #[test]
    fn to_cochain_reindexes_and_is_idempotent() {
        let m = GradedModule::from_pairs(&[(0, 2), (1, 1)]);
        let b = Mat::from_rows(vec![vec![ri(3)], vec![ri(0)]]).unwrap();
        let d = GradedMap::new(m.clone(), m.clone(), -1, BTreeMap::from([(1, b.clone())]))
            .unwrap();
        let c = Complex::new(m, d).unwrap();
        let cc = c.to_cochain();
        assert_eq!(cc.orientation(), Orientation::Cochain);
        assert_eq!(cc.dim(-1), 1);
        assert_eq!(cc.dim(0), 2);
        assert_eq!(cc.d().block(-1), b);
        assert!(cc.is_complex(&tol()).unwrap());
        assert_eq!(cc.cohomology_basis(0, &tol()).unwrap().dim(), 1);
        // already-cochain input passes through unchanged
        let again = cc.to_cochain();
        assert!(again.d().eq_map(cc.d()));
    }
}
