//! Dense matrices with exact (rational) or tolerance-thresholded (f64)
//! Gauss–Jordan elimination. Everything downstream — cohomology ranks,
//! smallness certificates, contraction builders — reduces to these routines.

use crate::error::{Error, Result};
use crate::scalar::{PivotClass, Scalar, Tol};

#[derive(Clone, PartialEq)]
pub struct Mat<S> {
    nrows: usize,
    ncols: usize,
    data: Vec<S>, // row-major
}

impl<S: Scalar> std::fmt::Debug for Mat<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Mat {}x{} [", self.nrows, self.ncols)?;
        for i in 0..self.nrows {
            let row: Vec<String> = (0..self.ncols).map(|j| self[(i, j)].to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl<S: Scalar> std::ops::Index<(usize, usize)> for Mat<S> {
    type Output = S;
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.ncols + j]
    }
}

impl<S: Scalar> std::ops::IndexMut<(usize, usize)> for Mat<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.ncols + j]
    }
}

impl<S: Scalar> Mat<S> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Mat { nrows, ncols, data: vec![S::zero(); nrows * ncols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        for (i, r) in rows.iter().enumerate() {
            if r.len() != ncols {
                return Err(Error::ShapeMismatch {
                    context: "Mat::from_rows".into(),
                    detail: format!("row {i} has {} entries, expected {ncols}", r.len()),
                });
            }
        }
        Ok(Mat { nrows, ncols, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(nrows * ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                data.push(f(i, j));
            }
        }
        Mat { nrows, ncols, data }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn col(&self, j: usize) -> Vec<S> {
        (0..self.nrows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = &S> {
        self.data.iter()
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Mat<T> {
        Mat { nrows: self.nrows, ncols: self.ncols, data: self.data.iter().map(f).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_zero_within(&self, tol: &Tol) -> bool {
        self.data.iter().all(|x| x.is_zero_within(tol))
    }

    /// Sup-norm of the entries (exact zero iff `is_zero` for rationals).
    pub fn max_magnitude(&self) -> f64 {
        self.data.iter().map(|x| x.magnitude()).fold(0.0, f64::max)
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.check_same_shape(rhs, "Mat::add")?;
        let data =
            self.data.iter().zip(&rhs.data).map(|(a, b)| a.clone() + b.clone()).collect();
        Ok(Mat { nrows: self.nrows, ncols: self.ncols, data })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.check_same_shape(rhs, "Mat::sub")?;
        let data =
            self.data.iter().zip(&rhs.data).map(|(a, b)| a.clone() - b.clone()).collect();
        Ok(Mat { nrows: self.nrows, ncols: self.ncols, data })
    }

    pub fn neg(&self) -> Self {
        Mat {
            nrows: self.nrows,
            ncols: self.ncols,
            data: self.data.iter().map(|x| -x.clone()).collect(),
        }
    }

    pub fn scale(&self, c: &S) -> Self {
        Mat {
            nrows: self.nrows,
            ncols: self.ncols,
            data: self.data.iter().map(|x| c.clone() * x.clone()).collect(),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.ncols != rhs.nrows {
            return Err(Error::ShapeMismatch {
                context: "Mat::mul".into(),
                detail: format!(
                    "{}x{} * {}x{}",
                    self.nrows, self.ncols, rhs.nrows, rhs.ncols
                ),
            });
        }
        let mut out: Mat<S> = Mat::zeros(self.nrows, rhs.ncols);
        for i in 0..self.nrows {
            for k in 0..self.ncols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.ncols {
                    let term = a.clone() * rhs[(k, j)].clone();
                    out[(i, j)] = out[(i, j)].clone() + term;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[S]) -> Result<Vec<S>> {
        if self.ncols != v.len() {
            return Err(Error::ShapeMismatch {
                context: "Mat::matvec".into(),
                detail: format!("{}x{} * vec {}", self.nrows, self.ncols, v.len()),
            });
        }
        let mut out = vec![S::zero(); self.nrows];
        for i in 0..self.nrows {
            for (k, x) in v.iter().enumerate() {
                if !x.is_zero() {
                    out[i] = out[i].clone() + self[(i, k)].clone() * x.clone();
                }
            }
        }
        Ok(out)
    }

    pub fn hstack(&self, rhs: &Self) -> Result<Self> {
        if self.nrows != rhs.nrows {
            return Err(Error::ShapeMismatch {
                context: "Mat::hstack".into(),
                detail: format!("{} vs {} rows", self.nrows, rhs.nrows),
            });
        }
        let mut out = Mat::zeros(self.nrows, self.ncols + rhs.ncols);
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                out[(i, j)] = self[(i, j)].clone();
            }
            for j in 0..rhs.ncols {
                out[(i, self.ncols + j)] = rhs[(i, j)].clone();
            }
        }
        Ok(out)
    }

    pub fn columns(&self, idx: &[usize]) -> Self {
        Mat::from_fn(self.nrows, idx.len(), |i, j| self[(i, idx[j])].clone())
    }

    fn check_same_shape(&self, rhs: &Self, context: &str) -> Result<()> {
        if self.nrows != rhs.nrows || self.ncols != rhs.ncols {
            return Err(Error::ShapeMismatch {
                context: context.into(),
                detail: format!(
                    "{}x{} vs {}x{}",
                    self.nrows, self.ncols, rhs.nrows, rhs.ncols
                ),
            });
        }
        Ok(())
    }

    /// Gauss–Jordan reduction. For floats, pivots are chosen by maximal
    /// magnitude and a pivot falling in the ambiguous band around tau is an
    /// error rather than a silent rank decision.
    pub fn rref(&self, tol: &Tol) -> Result<Rref<S>> {
        let mut m = self.clone();
        let mut pivots: Vec<(usize, usize)> = Vec::new();
        let mut r = 0usize;
        for c in 0..m.ncols {
            if r == m.nrows {
                break;
            }
            // pick pivot row
            let mut best: Option<(usize, f64)> = None;
            for i in r..m.nrows {
                let mag = m[(i, c)].magnitude();
                match m[(i, c)].pivot_class(tol) {
                    PivotClass::Zero => {}
                    PivotClass::Ambiguous | PivotClass::Usable => {
                        if best.map_or(true, |(_, bm)| mag > bm) {
                            best = Some((i, mag));
                        }
                        if S::EXACT {
                            break; // first nonzero is fine in exact arithmetic
                        }
                    }
                }
            }
            let Some((prow, _)) = best else { continue };
            match m[(prow, c)].pivot_class(tol) {
                PivotClass::Zero => continue,
                PivotClass::Ambiguous => {
                    return Err(Error::NumericRankAmbiguity {
                        magnitude: m[(prow, c)].magnitude(),
                        low: tol.tau / 10.0,
                        high: tol.tau * 10.0,
                    });
                }
                PivotClass::Usable => {}
            }
            m.swap_rows(r, prow);
            let pinv = m[(r, c)].inv().expect("usable pivot is invertible");
            for j in c..m.ncols {
                m[(r, j)] = pinv.clone() * m[(r, j)].clone();
            }
            for i in 0..m.nrows {
                if i != r && !m[(i, c)].is_zero() {
                    let factor = m[(i, c)].clone();
                    for j in c..m.ncols {
                        let t = factor.clone() * m[(r, j)].clone();
                        m[(i, j)] = m[(i, j)].clone() - t;
                    }
                    // enforce exact zero in the pivot column for floats too
                    m[(i, c)] = S::zero();
                }
            }
            pivots.push((r, c));
            r += 1;
        }
        Ok(Rref { reduced: m, pivots })
    }

    pub fn rank(&self, tol: &Tol) -> Result<usize> {
        Ok(self.rref(tol)?.pivots.len())
    }

    /// Basis of the right kernel (solutions of A x = 0), one Vec per basis vector.
    pub fn kernel_basis(&self, tol: &Tol) -> Result<Vec<Vec<S>>> {
        let rref = self.rref(tol)?;
        let pivot_cols: Vec<usize> = rref.pivots.iter().map(|&(_, c)| c).collect();
        let mut basis = Vec::new();
        for free in 0..self.ncols {
            if pivot_cols.contains(&free) {
                continue;
            }
            let mut v = vec![S::zero(); self.ncols];
            v[free] = S::one();
            for &(pr, pc) in &rref.pivots {
                v[pc] = -rref.reduced[(pr, free)].clone();
            }
            basis.push(v);
        }
        Ok(basis)
    }

    /// Indices of a maximal independent set of columns (pivot columns).
    pub fn independent_columns(&self, tol: &Tol) -> Result<Vec<usize>> {
        Ok(self.rref(tol)?.pivots.iter().map(|&(_, c)| c).collect())
    }

    /// Solve A X = B for all columns of B at once. `None` if inconsistent.
    pub fn solve(&self, rhs: &Self, tol: &Tol) -> Result<Option<Self>> {
        if self.nrows != rhs.nrows {
            return Err(Error::ShapeMismatch {
                context: "Mat::solve".into(),
                detail: format!("{} vs {} rows", self.nrows, rhs.nrows),
            });
        }
        let aug = self.hstack(rhs)?.rref(tol)?;
        // consistency: no pivot may fall in the B-block
        if aug.pivots.iter().any(|&(_, c)| c >= self.ncols) {
            return Ok(None);
        }
        let mut x = Mat::zeros(self.ncols, rhs.ncols);
        for &(pr, pc) in &aug.pivots {
            for j in 0..rhs.ncols {
                x[(pc, j)] = aug.reduced[(pr, self.ncols + j)].clone();
            }
        }
        Ok(Some(x))
    }

    pub fn inverse(&self, tol: &Tol) -> Result<Option<Self>> {
        if self.nrows != self.ncols {
            return Err(Error::ShapeMismatch {
                context: "Mat::inverse".into(),
                detail: format!("{}x{} not square", self.nrows, self.ncols),
            });
        }
        let n = self.nrows;
        let aug = self.hstack(&Mat::identity(n))?.rref(tol)?;
        // singular inputs leak pivots into the identity half, so count only
        // pivots that actually reduce this matrix
        if aug.pivots.iter().filter(|&&(_, c)| c < n).count() < n {
            return Ok(None);
        }
        let mut inv = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv[(i, j)] = aug.reduced[(i, n + j)].clone();
            }
        }
        Ok(Some(inv))
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.ncols {
            self.data.swap(a * self.ncols + j, b * self.ncols + j);
        }
    }
}

pub struct Rref<S> {
    pub reduced: Mat<S>,
    /// (row, col) of each pivot, in order.
    pub pivots: Vec<(usize, usize)>,
}
