//! Contractions — global and concentrated in one degree — and how they
//! transform under a small perturbation of the differential.

use crate::complexes::{Complex, Orientation};
use crate::error::{Error, Result};
use crate::graded::GradedMap;
use crate::matrix::Mat;
use crate::perturbation::small::{certify, Perturbation};
use crate::scalar::{Scalar, Tol};

fn require_cochain<S: Scalar>(c: &Complex<S>, context: &str) -> Result<()> {
    if c.orientation() != Orientation::Cochain {
        return Err(Error::DomainViolation(format!(
            "{context} is stated for cochain complexes; reindex with to_cochain"
        )));
    }
    Ok(())
}

/// A contraction concentrated at one degree: maps `h_k: C^k → C^{k−1}` and
/// `h_k1: C^{k+1} → C^k` with
///
/// ```text
/// d∘h_k + h_k1∘d + 1 = 0   on C^k .
/// ```
#[derive(Clone, Debug)]
pub struct DegreeContraction<S: Scalar> {
    pub k: i64,
    pub h_k: Mat<S>,
    pub h_k1: Mat<S>,
}

impl<S: Scalar> DegreeContraction<S> {
    pub fn verify(&self, c: &Complex<S>, tol: &Tol) -> Result<()> {
        require_cochain(c, "DegreeContraction::verify")?;
        let k = self.k;
        let (nkm, nk, nk1) = (c.dim(k - 1), c.dim(k), c.dim(k + 1));
        if self.h_k.nrows() != nkm
            || self.h_k.ncols() != nk
            || self.h_k1.nrows() != nk
            || self.h_k1.ncols() != nk1
        {
            return Err(Error::ShapeMismatch {
                context: "DegreeContraction::verify".into(),
                detail: format!("homotopy blocks do not match dimensions around degree {k}"),
            });
        }
        let d1 = c.d().block(k - 1);
        let d2 = c.d().block(k);
        let defect = d1
            .mul(&self.h_k)?
            .add(&self.h_k1.mul(&d2)?)?
            .add(&Mat::identity(nk))?;
        if !defect.is_zero_within(tol) {
            return Err(Error::NotContractible {
                degree: k,
                detail: format!(
                    "d·h + h·d + 1 has residual {:e} on C^{k}",
                    defect.max_magnitude()
                ),
            });
        }
        Ok(())
    }
}

/// Section λ of the column space of `d` together with a coordinate
/// projection π: λ sends B-coordinates to unit-vector preimages in the
/// source, π reads B-coordinates off the target (π∘B = 1, zero on a chosen
/// complement). B is the independent-column basis of im(d).
fn section_and_projection<S: Scalar>(d: &Mat<S>, tol: &Tol) -> Result<(Mat<S>, Mat<S>)> {
    let cols = d.independent_columns(tol)?;
    let r = cols.len();
    let b = d.columns(&cols);
    let lambda = Mat::from_fn(d.ncols(), r, |i, j| {
        if i == cols[j] {
            S::one()
        } else {
            S::zero()
        }
    });
    let ext = b.hstack(&Mat::identity(d.nrows()))?;
    let keep = ext.independent_columns(tol)?;
    if keep.len() != d.nrows() || keep.iter().take(r).enumerate().any(|(j, &c)| c != j) {
        return Err(Error::InvariantViolation(
            "basis extension of the column space failed".into(),
        ));
    }
    let e = ext.columns(&keep);
    let einv = e
        .inverse(tol)?
        .ok_or_else(|| Error::InvariantViolation("basis extension is singular".into()))?;
    let pi = Mat::from_fn(r, d.nrows(), |i, j| einv[(i, j)].clone());
    Ok((lambda, pi))
}

/// Build a contraction at degree k of a cochain complex with H^k = 0.
///
/// Sections and projections for the two differentials around degree k give
///
/// ```text
/// h_k1 = −λ∘π ,   h_k = −λ'∘π₁∘(1 − λ∘π∘d) ,
/// ```
///
/// where the second factor projects onto ker d = im d and the primed pair
/// lifts through the incoming differential. Fails with `CohomologyNonzero`
/// when the degree has cohomology.
pub fn build_contraction<S: Scalar>(
    c: &Complex<S>,
    k: i64,
    tol: &Tol,
) -> Result<DegreeContraction<S>> {
    require_cochain(c, "build_contraction")?;
    let hk = c.cohomology_basis(k, tol)?;
    if hk.dim() > 0 {
        return Err(Error::CohomologyNonzero { degree: k, dim: hk.dim() });
    }
    let nk = c.dim(k);
    let d2 = c.d().block(k);
    let (lambda2, pi2) = section_and_projection(&d2, tol)?;
    let h_k1 = lambda2.mul(&pi2)?.neg();
    let lam_b = lambda2.mul(&pi2)?.mul(&d2)?;
    let d1 = c.d().block(k - 1);
    let (lambda1, pi1) = section_and_projection(&d1, tol)?;
    let h_k = lambda1
        .mul(&pi1)?
        .mul(&Mat::identity(nk).sub(&lam_b)?)?
        .neg();
    let dc = DegreeContraction { k, h_k, h_k1 };
    dc.verify(c, tol).map_err(|e| {
        Error::InvariantViolation(format!("constructed contraction failed verification: {e}"))
    })?;
    Ok(dc)
}

/// Perturb a global contraction: for `h` with d∘h + h∘d + 1 = 0 on all of M
/// and small `delta`,
///
/// ```text
/// H = h∘(1 − delta·h)⁻¹
/// ```
///
/// contracts (M, d + delta). Returns the perturbed complex and H.
pub fn perturb_contraction<S: Scalar>(
    m: &Complex<S>,
    h: &GradedMap<S>,
    delta: &Perturbation<S>,
    tol: &Tol,
) -> Result<(Complex<S>, GradedMap<S>)> {
    if h.source() != m.module() || h.target() != m.module() || h.shift() != -m.d().shift() {
        return Err(Error::ShapeMismatch {
            context: "perturb_contraction".into(),
            detail: "h must be an endomorphism of M with shift opposite to d".into(),
        });
    }
    let one = GradedMap::identity(m.module());
    let defect = m.d().compose(h)?.add(&h.compose(m.d())?)?.add(&one)?;
    if !defect.is_zero_within(tol) {
        let (degree, residual) = defect.worst_block().unwrap_or((0, 0.0));
        return Err(Error::NotContractible {
            degree,
            detail: format!("d·h + h·d + 1 has residual {residual:e}"),
        });
    }
    let cert = certify(m, h, delta, tol)?;
    let hh = h.compose(cert.inv())?;
    let out = Complex::new(m.module().clone(), m.d().add(delta.delta())?)?;
    let defect2 = out.d().compose(&hh)?.add(&hh.compose(out.d())?)?.add(&one)?;
    if !defect2.is_zero_within(tol) {
        return Err(Error::InvariantViolation(format!(
            "perturbed contraction identity has residual {:e}",
            defect2.max_magnitude()
        )));
    }
    Ok((out, hh))
}

fn invert_one_minus<S: Scalar>(t: &Mat<S>, degree: i64, tol: &Tol) -> Result<Mat<S>> {
    let one = Mat::identity(t.nrows());
    match one.sub(t)?.inverse(tol)? {
        Some(inv) => Ok(inv),
        None => Err(Error::NotSmall {
            degree,
            detail: Some("1 − delta·h is singular in this degree".into()),
        }),
    }
}

/// Perturb a degree contraction: only the two homotopy blocks move,
///
/// ```text
/// H_k = h_k∘(1 − delta·h_k)⁻¹ ,   H_k1 = h_k1∘(1 − delta·h_k1)⁻¹ ,
/// ```
///
/// each inverse taken in its own degree. Smallness is required exactly
/// there and nowhere else.
pub fn perturb_degree_contraction<S: Scalar>(
    c: &Complex<S>,
    dc: &DegreeContraction<S>,
    delta: &Perturbation<S>,
    tol: &Tol,
) -> Result<DegreeContraction<S>> {
    require_cochain(c, "perturb_degree_contraction")?;
    dc.verify(c, tol)?;
    let k = dc.k;
    let e1 = delta.delta().block(k - 1);
    let e2 = delta.delta().block(k);
    let uk = invert_one_minus(&e1.mul(&dc.h_k)?, k, tol)?;
    let uk1 = invert_one_minus(&e2.mul(&dc.h_k1)?, k + 1, tol)?;
    let out = DegreeContraction { k, h_k: dc.h_k.mul(&uk)?, h_k1: dc.h_k1.mul(&uk1)? };
    let perturbed = Complex::new(c.module().clone(), c.d().add(delta.delta())?)?;
    out.verify(&perturbed, tol).map_err(|e| {
        Error::InvariantViolation(format!("perturbed degree contraction failed: {e}"))
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::GradedModule;
    use crate::scalar::Rat;

    fn ri(n: i64) -> Rat {
        Rat::from_i64(n)
    }

    fn rq(n: i64, d: i64) -> Rat {
        Rat::from_ratio(n, d)
    }

    fn tol() -> Tol {
        Tol::default()
    }

    fn imat(rows: &[&[i64]]) -> Mat<Rat> {
        Mat::from_rows(rows.iter().map(|r| r.iter().map(|&n| ri(n)).collect()).collect()).unwrap()
    }

    fn cochain(dims: &[(i64, usize)], blocks: Vec<(i64, Mat<Rat>)>) -> Complex<Rat> {
        let m = GradedModule::from_pairs(dims);
        let d = GradedMap::new(m.clone(), m.clone(), 1, blocks.into_iter().collect()).unwrap();
        Complex::new(m, d).unwrap()
    }

    fn two_term() -> Complex<Rat> {
        cochain(&[(0, 2), (1, 2)], vec![(0, imat(&[&[1, 2], &[3, 4]]))])
    }

    /// C⁰ = Q, C¹ = Q², C² = Q with d⁰ = [[1],[0]], d¹ = [[0,1]]; H¹ = 0.
    fn three_term() -> Complex<Rat> {
        cochain(
            &[(0, 1), (1, 2), (2, 1)],
            vec![(0, imat(&[&[1], &[0]])), (1, imat(&[&[0, 1]]))],
        )
    }

    #[test]
    fn invertible_differential_gives_minus_inverse() {
        // Oracle: with d invertible the identity pins h_k1·d = −1, so the
        // construction must return exactly −d⁻¹.
        let c = two_term();
        let d0 = c.d().block(0);
        let minus_dinv = d0.inverse(&tol()).unwrap().unwrap().neg();
        let at0 = build_contraction(&c, 0, &tol()).unwrap();
        assert_eq!(at0.h_k1, minus_dinv);
        assert_eq!(at0.h_k.nrows(), 0);
        let at1 = build_contraction(&c, 1, &tol()).unwrap();
        assert_eq!(at1.h_k, minus_dinv);
        assert_eq!(at1.h_k1.ncols(), 0);
    }

    #[test]
    fn three_term_matches_hand_computation() {
        let c = three_term();
        let dc = build_contraction(&c, 1, &tol()).unwrap();
        assert_eq!(dc.h_k, imat(&[&[-1, 0]]));
        assert_eq!(dc.h_k1, imat(&[&[0], &[-1]]));
        dc.verify(&c, &tol()).unwrap();
    }

    #[test]
    fn nonzero_cohomology_is_rejected() {
        let c = cochain(&[(0, 1), (1, 1)], vec![]);
        match build_contraction(&c, 1, &tol()) {
            Err(Error::CohomologyNonzero { degree, dim }) => {
                assert_eq!((degree, dim), (1, 1));
            }
            other => panic!("expected CohomologyNonzero, got {other:?}"),
        }
    }

    #[test]
    fn chain_orientation_goes_through_to_cochain() {
        let m = GradedModule::from_pairs(&[(0, 2), (1, 2)]);
        let d = GradedMap::new(
            m.clone(),
            m.clone(),
            -1,
            [(1, imat(&[&[1, 2], &[3, 4]]))].into_iter().collect(),
        )
        .unwrap();
        let chain = Complex::new(m, d).unwrap();
        assert!(matches!(
            build_contraction(&chain, 0, &tol()),
            Err(Error::DomainViolation(_))
        ));
        let cc = chain.to_cochain();
        build_contraction(&cc, 0, &tol()).unwrap();
    }

    #[test]
    fn broken_contraction_fails_verify() {
        let c = three_term();
        let mut dc = build_contraction(&c, 1, &tol()).unwrap();
        dc.h_k = dc.h_k.neg();
        assert!(matches!(
            dc.verify(&c, &tol()),
            Err(Error::NotContractible { degree: 1, .. })
        ));
    }

    #[test]
    fn scalar_perturbed_contraction() {
        // d = [1], h = [−1], delta = ε·d: H must be [−1/(1+ε)] exactly.
        let c = cochain(&[(0, 1), (1, 1)], vec![(0, imat(&[&[1]]))]);
        let h = GradedMap::new(
            c.module().clone(),
            c.module().clone(),
            -1,
            [(1, imat(&[&[-1]]))].into_iter().collect(),
        )
        .unwrap();
        let eps = rq(1, 4);
        let delta = Perturbation::new(&c, c.d().scale(&eps), &tol()).unwrap();
        let (out, hh) = perturb_contraction(&c, &h, &delta, &tol()).unwrap();
        assert_eq!(hh.block(1), Mat::from_rows(vec![vec![rq(-4, 5)]]).unwrap());
        assert!(out.d().eq_map(&c.d().scale(&rq(5, 4))));
    }

    #[test]
    fn non_contractible_input_is_rejected() {
        let c = cochain(&[(0, 1)], vec![]);
        let h = GradedMap::zero(c.module().clone(), c.module().clone(), -1);
        let delta = Perturbation::zero(&c);
        assert!(matches!(
            perturb_contraction(&c, &h, &delta, &tol()),
            Err(Error::NotContractible { degree: 0, .. })
        ));
    }

    #[test]
    fn not_small_delta_is_rejected() {
        let c = cochain(&[(0, 1), (1, 1)], vec![(0, imat(&[&[1]]))]);
        let h = GradedMap::new(
            c.module().clone(),
            c.module().clone(),
            -1,
            [(1, imat(&[&[-1]]))].into_iter().collect(),
        )
        .unwrap();
        let delta = Perturbation::new(&c, c.d().neg(), &tol()).unwrap();
        assert!(matches!(
            perturb_contraction(&c, &h, &delta, &tol()),
            Err(Error::NotSmall { .. })
        ));
    }

    #[test]
    fn degree_perturbation_matches_hand_values() {
        let c = three_term();
        let dc = build_contraction(&c, 1, &tol()).unwrap();
        let delta = Perturbation::new(&c, c.d().scale(&rq(1, 2)), &tol()).unwrap();
        let out = perturb_degree_contraction(&c, &dc, &delta, &tol()).unwrap();
        assert_eq!(out.k, 1);
        assert_eq!(
            out.h_k,
            Mat::from_rows(vec![vec![rq(-2, 3), ri(0)]]).unwrap()
        );
        assert_eq!(
            out.h_k1,
            Mat::from_rows(vec![vec![ri(0)], vec![rq(-2, 3)]]).unwrap()
        );
    }

    #[test]
    fn degree_perturbation_not_small_names_the_degree() {
        let c = three_term();
        let dc = build_contraction(&c, 1, &tol()).unwrap();
        let delta = Perturbation::new(&c, c.d().neg(), &tol()).unwrap();
        match perturb_degree_contraction(&c, &dc, &delta, &tol()) {
            Err(Error::NotSmall { degree, .. }) => assert_eq!(degree, 1),
            other => panic!("expected NotSmall, got {other:?}"),
        }
    }
}
