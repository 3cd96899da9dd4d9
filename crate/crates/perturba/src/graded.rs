//! Graded modules over a fixed scalar and degree-homogeneous maps between
//! them. Degrees are signed integers with bounded support; maps are total,
//! with absent blocks denoting zero.

use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::scalar::{Scalar, Tol};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedModule {
    dims: BTreeMap<i64, usize>,
}

impl GradedModule {
    pub fn new(dims: BTreeMap<i64, usize>) -> Self {
        let dims = dims.into_iter().filter(|&(_, d)| d > 0).collect();
        GradedModule { dims }
    }

    pub fn from_pairs(pairs: &[(i64, usize)]) -> Self {
        Self::new(pairs.iter().copied().collect())
    }

    pub fn zero() -> Self {
        GradedModule { dims: BTreeMap::new() }
    }

    pub fn dim(&self, k: i64) -> usize {
        self.dims.get(&k).copied().unwrap_or(0)
    }

    pub fn support(&self) -> impl Iterator<Item = i64> + '_ {
        self.dims.keys().copied()
    }

    pub fn dims(&self) -> &BTreeMap<i64, usize> {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.dims.values().sum()
    }

    pub fn min_degree(&self) -> Option<i64> {
        self.dims.keys().next().copied()
    }

    pub fn max_degree(&self) -> Option<i64> {
        self.dims.keys().next_back().copied()
    }

    /// Degrees in the union of both supports.
    pub fn joint_support(&self, other: &GradedModule) -> Vec<i64> {
        let mut ks: Vec<i64> = self.dims.keys().chain(other.dims.keys()).copied().collect();
        ks.sort_unstable();
        ks.dedup();
        ks
    }

    /// Direct sum, used by the total-complex and block constructions.
    pub fn direct_sum(&self, other: &GradedModule) -> GradedModule {
        let mut dims = self.dims.clone();
        for (&k, &d) in &other.dims {
            *dims.entry(k).or_insert(0) += d;
        }
        GradedModule::new(dims)
    }
}

/// A degree-homogeneous linear map: block at source degree k maps into
/// target degree k + shift, with shape (target.dim(k+shift), source.dim(k)).
#[derive(Debug, Clone)]
pub struct GradedMap<S: Scalar> {
    source: GradedModule,
    target: GradedModule,
    shift: i64,
    blocks: BTreeMap<i64, Mat<S>>,
}

impl<S: Scalar> GradedMap<S> {
    pub fn new(
        source: GradedModule,
        target: GradedModule,
        shift: i64,
        blocks: BTreeMap<i64, Mat<S>>,
    ) -> Result<Self> {
        for (&k, b) in &blocks {
            let rows = target.dim(k + shift);
            let cols = source.dim(k);
            if b.nrows() != rows || b.ncols() != cols {
                return Err(Error::ShapeMismatch {
                    context: "GradedMap::new".into(),
                    detail: format!(
                        "block at degree {k}: got {}x{}, expected {rows}x{cols}",
                        b.nrows(),
                        b.ncols()
                    ),
                });
            }
        }
        let blocks = blocks
            .into_iter()
            .filter(|(_, b)| b.nrows() > 0 && b.ncols() > 0)
            .collect();
        Ok(GradedMap { source, target, shift, blocks })
    }

    pub fn zero(source: GradedModule, target: GradedModule, shift: i64) -> Self {
        GradedMap { source, target, shift, blocks: BTreeMap::new() }
    }

    pub fn identity(m: &GradedModule) -> Self {
        let blocks = m
            .dims()
            .iter()
            .map(|(&k, &d)| (k, Mat::identity(d)))
            .collect();
        GradedMap { source: m.clone(), target: m.clone(), shift: 0, blocks }
    }

    pub fn source(&self) -> &GradedModule {
        &self.source
    }

    pub fn target(&self) -> &GradedModule {
        &self.target
    }

    pub fn shift(&self) -> i64 {
        self.shift
    }

    /// The block at source degree k, materializing zeros for absent blocks.
    pub fn block(&self, k: i64) -> Mat<S> {
        match self.blocks.get(&k) {
            Some(b) => b.clone(),
            None => Mat::zeros(self.target.dim(k + self.shift), self.source.dim(k)),
        }
    }

    pub fn stored_blocks(&self) -> &BTreeMap<i64, Mat<S>> {
        &self.blocks
    }

    pub fn set_block(&mut self, k: i64, b: Mat<S>) -> Result<()> {
        let rows = self.target.dim(k + self.shift);
        let cols = self.source.dim(k);
        if b.nrows() != rows || b.ncols() != cols {
            return Err(Error::ShapeMismatch {
                context: "GradedMap::set_block".into(),
                detail: format!("degree {k}: got {}x{}, expected {rows}x{cols}", b.nrows(), b.ncols()),
            });
        }
        if rows == 0 || cols == 0 || b.is_zero() {
            self.blocks.remove(&k);
        } else {
            self.blocks.insert(k, b);
        }
        Ok(())
    }

    /// self ∘ rhs (apply rhs first). Requires rhs.target == self.source.
    pub fn compose(&self, rhs: &GradedMap<S>) -> Result<GradedMap<S>> {
        if rhs.target != self.source {
            return Err(Error::ShapeMismatch {
                context: "GradedMap::compose".into(),
                detail: "inner modules disagree".into(),
            });
        }
        let shift = self.shift + rhs.shift;
        let mut blocks = BTreeMap::new();
        for k in rhs.source.support() {
            let first = rhs.block(k);
            let second = self.block(k + rhs.shift);
            let prod = second.mul(&first)?;
            if !prod.is_zero() && prod.nrows() > 0 && prod.ncols() > 0 {
                blocks.insert(k, prod);
            }
        }
        GradedMap::new(rhs.source.clone(), self.target.clone(), shift, blocks)
    }

    pub fn add(&self, rhs: &GradedMap<S>) -> Result<GradedMap<S>> {
        self.check_parallel(rhs, "GradedMap::add")?;
        let mut out = self.clone();
        for k in rhs.blocks.keys().copied().collect::<Vec<_>>() {
            let sum = out.block(k).add(&rhs.block(k))?;
            out.set_block(k, sum)?;
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &GradedMap<S>) -> Result<GradedMap<S>> {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> GradedMap<S> {
        let blocks = self.blocks.iter().map(|(&k, b)| (k, b.neg())).collect();
        GradedMap { source: self.source.clone(), target: self.target.clone(), shift: self.shift, blocks }
    }

    pub fn scale(&self, c: &S) -> GradedMap<S> {
        let blocks = self
            .blocks
            .iter()
            .map(|(&k, b)| (k, b.scale(c)))
            .filter(|(_, b)| !b.is_zero())
            .collect();
        GradedMap { source: self.source.clone(), target: self.target.clone(), shift: self.shift, blocks }
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.values().all(|b| b.is_zero())
    }

    pub fn is_zero_within(&self, tol: &Tol) -> bool {
        self.blocks.values().all(|b| b.is_zero_within(tol))
    }

    /// Sup-norm over all block entries.
    pub fn max_magnitude(&self) -> f64 {
        self.blocks.values().map(|b| b.max_magnitude()).fold(0.0, f64::max)
    }

    /// Source degree and magnitude of the largest stored entry, when nonzero.
    pub fn worst_block(&self) -> Option<(i64, f64)> {
        let mut out: Option<(i64, f64)> = None;
        for (&k, b) in &self.blocks {
            let m = b.max_magnitude();
            if m > 0.0 && out.map_or(true, |(_, best)| m > best) {
                out = Some((k, m));
            }
        }
        out
    }

    /// Structural equality modulo zero blocks.
    pub fn eq_map(&self, rhs: &GradedMap<S>) -> bool {
        self.source == rhs.source
            && self.target == rhs.target
            && self.shift == rhs.shift
            && {
                let mut ks: Vec<i64> =
                    self.blocks.keys().chain(rhs.blocks.keys()).copied().collect();
                ks.sort_unstable();
                ks.dedup();
                ks.iter().all(|&k| self.block(k) == rhs.block(k))
            }
    }

    pub fn approx_eq(&self, rhs: &GradedMap<S>, tol: &Tol) -> bool {
        self.source == rhs.source
            && self.target == rhs.target
            && self.shift == rhs.shift
            && self.sub(rhs).map(|d| d.is_zero_within(tol)).unwrap_or(false)
    }

    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T + Copy) -> GradedMap<T> {
        GradedMap {
            source: self.source.clone(),
            target: self.target.clone(),
            shift: self.shift,
            blocks: self.blocks.iter().map(|(&k, b)| (k, b.map(f))).collect(),
        }
    }

    fn check_parallel(&self, rhs: &GradedMap<S>, context: &str) -> Result<()> {
        if self.source != rhs.source || self.target != rhs.target || self.shift != rhs.shift {
            return Err(Error::ShapeMismatch {
                context: context.into(),
                detail: "maps are not parallel (source/target/shift differ)".into(),
            });
        }
        Ok(())
    }
}

pub fn to_f64_map(m: &GradedMap<crate::scalar::Rat>) -> GradedMap<f64> {
    m.map_scalars(|x| crate::scalar::Scalar::to_f64(x))
}
