//! JSON ingestion and emission for problem bundles: complexes, graded maps,
//! homotopy-equivalence data, double complexes with row contractions,
//! Lie brackets and bracket families, associative algebras, formal
//! deformations, product families, and finite metric spaces.
//!
//! Numeric entries are JSON numbers or rational strings `"p/q"`. Rational
//! mode rejects non-integer numbers (they are not exact); float mode
//! accepts both forms. Schema failures carry the path of the offending
//! field; algebraic axioms (d² = 0, Jacobi, associativity, the metric
//! axioms) are *not* schema concerns and surface as ordinary math errors
//! after parsing.

use std::collections::BTreeMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::complexes::Complex;
use crate::constructions::{DoubleComplex, RowContraction};
use crate::error::{Error, Result};
use crate::graded::{GradedMap, GradedModule};
use crate::hochschild_deform::{
    AssocAlgebra, FormalDeformation, HochschildCochain, ProductFamily,
};
use crate::lie_deform::{BracketFamily, LieAlgebra, TwoCochain};
use crate::matrix::Mat;
use crate::metric_hochschild::{FiniteMetricSpace, FunctionTensor};
use crate::perturbation::HEData;
use crate::scalar::{Rat, Scalar, Tol};

fn schema(path: impl Into<String>, detail: impl Into<String>) -> Error {
    Error::Schema { path: path.into(), detail: detail.into() }
}

/// A numeric JSON entry: integer, float, or rational string.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
pub enum NumJson {
    Int(i64),
    Float(f64),
    Str(String),
}

/// Scalars that the JSON schemas can carry.
pub trait JsonScalar: Scalar {
    /// Name used in CLI flags and reports: "rational" or "f64".
    const MODE: &'static str;
    fn from_json(v: &NumJson, path: &str) -> Result<Self>;
    fn to_json(&self) -> NumJson;
}

fn parse_ratio(s: &str, path: &str) -> Result<(i64, i64)> {
    let s = s.trim();
    let (p, q) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let p: i64 =
        p.parse().map_err(|_| schema(path, format!("cannot parse numerator of {s:?}")))?;
    let q: i64 =
        q.parse().map_err(|_| schema(path, format!("cannot parse denominator of {s:?}")))?;
    if q == 0 {
        return Err(schema(path, format!("denominator of {s:?} is zero")));
    }
    Ok((p, q))
}

impl JsonScalar for Rat {
    const MODE: &'static str = "rational";

    fn from_json(v: &NumJson, path: &str) -> Result<Self> {
        match v {
            NumJson::Int(i) => Ok(Rat::from_i64(*i)),
            NumJson::Float(f) => {
                if f.fract() == 0.0 && f.abs() <= 9.0e15 {
                    Ok(Rat::from_i64(*f as i64))
                } else {
                    Err(schema(
                        path,
                        format!("number {f} is not an exact rational; use a \"p/q\" string"),
                    ))
                }
            }
            NumJson::Str(s) => {
                let (p, q) = parse_ratio(s, path)?;
                Ok(Rat::from_ratio(p, q))
            }
        }
    }

    fn to_json(&self) -> NumJson {
        NumJson::Str(format!("{self}"))
    }
}

impl JsonScalar for f64 {
    const MODE: &'static str = "f64";

    fn from_json(v: &NumJson, path: &str) -> Result<Self> {
        match v {
            NumJson::Int(i) => Ok(*i as f64),
            NumJson::Float(f) => Ok(*f),
            NumJson::Str(s) => {
                let (p, q) = parse_ratio(s, path)?;
                Ok(p as f64 / q as f64)
            }
        }
    }

    fn to_json(&self) -> NumJson {
        if self.fract() == 0.0 && self.abs() < 9.0e15 {
            NumJson::Int(*self as i64)
        } else {
            NumJson::Float(*self)
        }
    }
}

fn parse_degree(key: &str, path: &str) -> Result<i64> {
    key.trim()
        .parse()
        .map_err(|_| schema(path, format!("degree key {key:?} is not an integer")))
}

fn parse_bidegree(key: &str, path: &str) -> Result<(i64, i64)> {
    let err = || schema(path, format!("key {key:?} is not of the form \"p,q\""));
    let (p, q) = key.split_once(',').ok_or_else(err)?;
    Ok((p.trim().parse().map_err(|_| err())?, q.trim().parse().map_err(|_| err())?))
}

fn mat_from_json<S: JsonScalar>(
    rows: &[Vec<NumJson>],
    nrows: usize,
    ncols: usize,
    path: &str,
) -> Result<Mat<S>> {
    let got_cols = rows.first().map(|r| r.len()).unwrap_or(0);
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        return Err(schema(
            path,
            format!("expected a {nrows}x{ncols} matrix, got {}x{got_cols}", rows.len()),
        ));
    }
    let mut m = Mat::zeros(nrows, ncols);
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            m[(i, j)] = S::from_json(v, &format!("{path}[{i}][{j}]"))?;
        }
    }
    Ok(m)
}

fn mat_to_json<S: JsonScalar>(m: &Mat<S>) -> Vec<Vec<NumJson>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].to_json()).collect())
        .collect()
}

fn vec_from_json<S: JsonScalar>(vals: &[NumJson], len: usize, path: &str) -> Result<Vec<S>> {
    if vals.len() != len {
        return Err(schema(path, format!("expected {len} entries, got {}", vals.len())));
    }
    vals.iter()
        .enumerate()
        .map(|(i, v)| S::from_json(v, &format!("{path}[{i}]")))
        .collect()
}

/// n×n×n structure tensor, nested output-first: t[k][i][j] is the
/// coefficient of basis element k in the product or bracket of i and j.
fn nested3_from_json<S: JsonScalar>(
    t: &[Vec<Vec<NumJson>>],
    n: usize,
    path: &str,
) -> Result<Vec<Vec<Vec<S>>>> {
    if t.len() != n || t.iter().any(|p| p.len() != n) {
        return Err(schema(path, format!("expected an {n}x{n}x{n} tensor")));
    }
    let mut out = Vec::with_capacity(n);
    for (i, plane) in t.iter().enumerate() {
        let mut row = Vec::with_capacity(n);
        for (j, v) in plane.iter().enumerate() {
            row.push(vec_from_json(v, n, &format!("{path}[{i}][{j}]"))?);
        }
        out.push(row);
    }
    Ok(out)
}

fn nested3_to_json<S: JsonScalar>(t: &[Vec<Vec<S>>]) -> Vec<Vec<Vec<NumJson>>> {
    t.iter()
        .map(|p| p.iter().map(|v| v.iter().map(S::to_json).collect()).collect())
        .collect()
}

// ---------------------------------------------------------------------------
// complexes and graded maps

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation: Option<String>,
    pub dims: BTreeMap<String, usize>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub d: BTreeMap<String, Vec<Vec<NumJson>>>,
}

pub fn complex_from_json<S: JsonScalar>(j: &ComplexJson, path: &str) -> Result<Complex<S>> {
    let shift = match j.orientation.as_deref() {
        None | Some("cochain") => 1,
        Some("chain") => -1,
        Some(o) => {
            return Err(schema(
                format!("{path}.orientation"),
                format!("unknown orientation {o:?} (expected \"cochain\" or \"chain\")"),
            ))
        }
    };
    let mut dims: BTreeMap<i64, usize> = BTreeMap::new();
    for (k, &n) in &j.dims {
        let deg = parse_degree(k, &format!("{path}.dims"))?;
        if n > 0 {
            dims.insert(deg, n);
        }
    }
    let module = GradedModule::new(dims);
    let mut blocks = BTreeMap::new();
    for (k, rows) in &j.d {
        let deg = parse_degree(k, &format!("{path}.d"))?;
        let m = mat_from_json(
            rows,
            module.dim(deg + shift),
            module.dim(deg),
            &format!("{path}.d[\"{k}\"] (degree {deg})"),
        )?;
        if m.nrows() > 0 && m.ncols() > 0 {
            blocks.insert(deg, m);
        }
    }
    let d = GradedMap::new(module.clone(), module.clone(), shift, blocks)
        .map_err(|e| schema(path, e.to_string()))?;
    Complex::new(module, d).map_err(|e| schema(path, e.to_string()))
}

pub fn complex_to_json<S: JsonScalar>(c: &Complex<S>) -> ComplexJson {
    let orientation = if c.d().shift() == 1 { "cochain" } else { "chain" };
    let dims = c.module().dims().iter().map(|(&k, &n)| (k.to_string(), n)).collect();
    let mut d = BTreeMap::new();
    for k in c.module().support() {
        let b = c.d().block(k);
        if b.nrows() > 0 && b.ncols() > 0 {
            d.insert(k.to_string(), mat_to_json(&b));
        }
    }
    ComplexJson { orientation: Some(orientation.into()), dims, d }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GradedMapJson {
    pub shift: i64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub blocks: BTreeMap<String, Vec<Vec<NumJson>>>,
}

pub fn graded_map_from_json<S: JsonScalar>(
    j: &GradedMapJson,
    source: &GradedModule,
    target: &GradedModule,
    path: &str,
) -> Result<GradedMap<S>> {
    let mut blocks = BTreeMap::new();
    for (k, rows) in &j.blocks {
        let deg = parse_degree(k, &format!("{path}.blocks"))?;
        let m = mat_from_json(
            rows,
            target.dim(deg + j.shift),
            source.dim(deg),
            &format!("{path}.blocks[\"{k}\"] (degree {deg})"),
        )?;
        if m.nrows() > 0 && m.ncols() > 0 {
            blocks.insert(deg, m);
        }
    }
    GradedMap::new(source.clone(), target.clone(), j.shift, blocks)
        .map_err(|e| schema(path, e.to_string()))
}

pub fn graded_map_to_json<S: JsonScalar>(f: &GradedMap<S>) -> GradedMapJson {
    let mut blocks = BTreeMap::new();
    for k in f.source().support() {
        let b = f.block(k);
        if b.nrows() > 0 && b.ncols() > 0 {
            blocks.insert(k.to_string(), mat_to_json(&b));
        }
    }
    GradedMapJson { shift: f.shift(), blocks }
}

// ---------------------------------------------------------------------------
// homotopy equivalence bundles

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct HeBundleJson {
    #[serde(rename = "L")]
    pub l: ComplexJson,
    #[serde(rename = "M")]
    pub m: ComplexJson,
    pub i: GradedMapJson,
    pub p: GradedMapJson,
    pub h: GradedMapJson,
}

pub fn he_from_json<S: JsonScalar>(j: &HeBundleJson, path: &str) -> Result<HEData<S>> {
    let l = complex_from_json(&j.l, &format!("{path}.L"))?;
    let m = complex_from_json(&j.m, &format!("{path}.M"))?;
    let i = graded_map_from_json(&j.i, l.module(), m.module(), &format!("{path}.i"))?;
    let p = graded_map_from_json(&j.p, m.module(), l.module(), &format!("{path}.p"))?;
    let h = graded_map_from_json(&j.h, m.module(), m.module(), &format!("{path}.h"))?;
    HEData::new(l, m, i, p, h).map_err(|e| schema(path, e.to_string()))
}

pub fn he_to_json<S: JsonScalar>(he: &HEData<S>) -> HeBundleJson {
    HeBundleJson {
        l: complex_to_json(&he.l),
        m: complex_to_json(&he.m),
        i: graded_map_to_json(&he.i),
        p: graded_map_to_json(&he.p),
        h: graded_map_to_json(&he.h),
    }
}

// ---------------------------------------------------------------------------
// double complexes with row contractions

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RowContractionJson {
    pub a: BTreeMap<String, usize>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub i: BTreeMap<String, Vec<Vec<NumJson>>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub p: BTreeMap<String, Vec<Vec<NumJson>>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub h: BTreeMap<String, Vec<Vec<NumJson>>>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DoubleBundleJson {
    pub dims: BTreeMap<String, usize>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub horiz: BTreeMap<String, Vec<Vec<NumJson>>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub vert: BTreeMap<String, Vec<Vec<NumJson>>>,
    pub rows: RowContractionJson,
}

pub fn double_from_json<S: JsonScalar>(
    j: &DoubleBundleJson,
    tol: &Tol,
    path: &str,
) -> Result<(DoubleComplex<S>, RowContraction<S>)> {
    let mut dims: BTreeMap<(i64, i64), usize> = BTreeMap::new();
    for (k, &n) in &j.dims {
        let pq = parse_bidegree(k, &format!("{path}.dims"))?;
        if n > 0 {
            dims.insert(pq, n);
        }
    }
    let dim = |p: i64, q: i64| dims.get(&(p, q)).copied().unwrap_or(0);
    let mut horiz = BTreeMap::new();
    for (k, rows) in &j.horiz {
        let (p, q) = parse_bidegree(k, &format!("{path}.horiz"))?;
        let m = mat_from_json(
            rows,
            dim(p - 1, q),
            dim(p, q),
            &format!("{path}.horiz[\"{k}\"] (bidegree ({p},{q}))"),
        )?;
        if m.nrows() > 0 && m.ncols() > 0 {
            horiz.insert((p, q), m);
        }
    }
    let mut vert = BTreeMap::new();
    for (k, rows) in &j.vert {
        let (p, q) = parse_bidegree(k, &format!("{path}.vert"))?;
        let m = mat_from_json(
            rows,
            dim(p, q + 1),
            dim(p, q),
            &format!("{path}.vert[\"{k}\"] (bidegree ({p},{q}))"),
        )?;
        if m.nrows() > 0 && m.ncols() > 0 {
            vert.insert((p, q), m);
        }
    }
    let dc = DoubleComplex::new(dims, horiz, vert, tol)?;

    let mut a_pairs = Vec::new();
    for (k, &n) in &j.rows.a {
        a_pairs.push((parse_degree(k, &format!("{path}.rows.a"))?, n));
    }
    let a = GradedModule::from_pairs(&a_pairs);
    let mut rc_i = BTreeMap::new();
    for (k, rows) in &j.rows.i {
        let q = parse_degree(k, &format!("{path}.rows.i"))?;
        let m = mat_from_json(
            rows,
            dc.dim(0, q),
            a.dim(q),
            &format!("{path}.rows.i[\"{k}\"] (row {q})"),
        )?;
        rc_i.insert(q, m);
    }
    let mut rc_p = BTreeMap::new();
    for (k, rows) in &j.rows.p {
        let q = parse_degree(k, &format!("{path}.rows.p"))?;
        let m = mat_from_json(
            rows,
            a.dim(q),
            dc.dim(0, q),
            &format!("{path}.rows.p[\"{k}\"] (row {q})"),
        )?;
        rc_p.insert(q, m);
    }
    let mut rc_h = BTreeMap::new();
    for (k, rows) in &j.rows.h {
        let (p, q) = parse_bidegree(k, &format!("{path}.rows.h"))?;
        let m = mat_from_json(
            rows,
            dc.dim(p + 1, q),
            dc.dim(p, q),
            &format!("{path}.rows.h[\"{k}\"] (bidegree ({p},{q}))"),
        )?;
        rc_h.insert((p, q), m);
    }
    Ok((dc, RowContraction { a, i: rc_i, p: rc_p, h: rc_h }))
}

// ---------------------------------------------------------------------------
// split complexes for kill_contractible

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SplitBundleJson {
    pub complex: ComplexJson,
    pub a_dims: BTreeMap<String, usize>,
    pub h: GradedMapJson,
}

pub fn split_from_json<S: JsonScalar>(
    j: &SplitBundleJson,
    path: &str,
) -> Result<(Complex<S>, GradedModule, GradedMap<S>)> {
    let c = complex_from_json(&j.complex, &format!("{path}.complex"))?;
    let mut a_pairs = Vec::new();
    for (k, &n) in &j.a_dims {
        let deg = parse_degree(k, &format!("{path}.a_dims"))?;
        if n > c.dim(deg) {
            return Err(schema(
                format!("{path}.a_dims[\"{k}\"]"),
                format!("A-dimension {n} exceeds the complex dimension {}", c.dim(deg)),
            ));
        }
        a_pairs.push((deg, n));
    }
    let a = GradedModule::from_pairs(&a_pairs);
    let prime_pairs: Vec<(i64, usize)> =
        c.module().support().map(|k| (k, c.dim(k) - a.dim(k))).collect();
    let prime = GradedModule::from_pairs(&prime_pairs);
    let h = graded_map_from_json(&j.h, &prime, &prime, &format!("{path}.h"))?;
    Ok((c, a, h))
}

// ---------------------------------------------------------------------------
// Lie algebras and bracket families

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct LieJson {
    pub dim: usize,
    pub c: Vec<Vec<Vec<NumJson>>>,
}

pub fn lie_from_json<S: JsonScalar>(j: &LieJson, tol: &Tol, path: &str) -> Result<LieAlgebra<S>> {
    let nested = nested3_from_json(&j.c, j.dim, &format!("{path}.c"))?;
    let bracket = TwoCochain::from_nested(&nested, tol)?;
    LieAlgebra::new(bracket, tol)
}

pub fn lie_to_json<S: JsonScalar>(g: &LieAlgebra<S>) -> LieJson {
    LieJson { dim: g.dim(), c: nested3_to_json(&g.bracket().to_nested()) }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyJson {
    pub coeffs: Vec<Vec<Vec<Vec<NumJson>>>>,
    pub t_max: f64,
}

pub fn bracket_family_from_json<S: JsonScalar>(
    j: &FamilyJson,
    dim: usize,
    tol: &Tol,
    path: &str,
) -> Result<BracketFamily<S>> {
    if j.coeffs.is_empty() {
        return Err(schema(format!("{path}.coeffs"), "a family needs at least one coefficient"));
    }
    let mut coeffs = Vec::with_capacity(j.coeffs.len());
    for (r, t) in j.coeffs.iter().enumerate() {
        let nested = nested3_from_json(t, dim, &format!("{path}.coeffs[{r}]"))?;
        coeffs.push(TwoCochain::from_nested(&nested, tol)?);
    }
    BracketFamily::new(coeffs, j.t_max, tol)
}

// ---------------------------------------------------------------------------
// associative algebras, formal deformations, product families

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraJson {
    pub dim: usize,
    pub m: Vec<Vec<Vec<NumJson>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<Vec<NumJson>>,
}

pub fn algebra_from_json<S: JsonScalar>(
    j: &AlgebraJson,
    tol: &Tol,
    path: &str,
) -> Result<AssocAlgebra<S>> {
    let nested = nested3_from_json(&j.m, j.dim, &format!("{path}.m"))?;
    let unit = match &j.unit {
        Some(u) => Some(vec_from_json(u, j.dim, &format!("{path}.unit"))?),
        None => None,
    };
    AssocAlgebra::new(&nested, unit, tol)
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DeformationJson {
    pub order: usize,
    pub coeffs: Vec<Vec<Vec<Vec<NumJson>>>>,
}

pub fn deformation_from_json<S: JsonScalar>(
    j: &DeformationJson,
    dim: usize,
    path: &str,
) -> Result<FormalDeformation<S>> {
    if j.coeffs.len() != j.order {
        return Err(schema(
            format!("{path}.coeffs"),
            format!("order {} does not match {} coefficients", j.order, j.coeffs.len()),
        ));
    }
    let mut coeffs = Vec::with_capacity(j.order);
    for (r, t) in j.coeffs.iter().enumerate() {
        let nested = nested3_from_json(t, dim, &format!("{path}.coeffs[{r}]"))?;
        coeffs.push(HochschildCochain::from_nested2(&nested)?);
    }
    FormalDeformation::new(coeffs)
}

/// Product family JSON shares the family layout; `coeffs[0]` is the base
/// product.
pub fn product_family_from_json<S: JsonScalar>(
    j: &FamilyJson,
    dim: usize,
    tol: &Tol,
    path: &str,
) -> Result<ProductFamily<S>> {
    if j.coeffs.is_empty() {
        return Err(schema(format!("{path}.coeffs"), "a family needs at least one coefficient"));
    }
    let mut coeffs = Vec::with_capacity(j.coeffs.len());
    for (r, t) in j.coeffs.iter().enumerate() {
        let nested = nested3_from_json(t, dim, &format!("{path}.coeffs[{r}]"))?;
        coeffs.push(HochschildCochain::from_nested2(&nested)?);
    }
    ProductFamily::new(coeffs, j.t_max, tol)
}

// ---------------------------------------------------------------------------
// finite metric spaces and tensors

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MetricJson {
    pub n: usize,
    pub rho: Vec<Vec<NumJson>>,
}

pub fn metric_from_json<S: JsonScalar>(
    j: &MetricJson,
    tol: &Tol,
    path: &str,
) -> Result<FiniteMetricSpace<S>> {
    let rho = mat_from_json(&j.rho, j.n, j.n, &format!("{path}.rho"))?;
    FiniteMetricSpace::new(rho, tol)
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TensorJson {
    pub arity: usize,
    pub values: Vec<NumJson>,
}

pub fn tensor_from_json<S: JsonScalar>(
    j: &TensorJson,
    n: usize,
    path: &str,
) -> Result<FunctionTensor<S>> {
    if j.arity == 0 {
        return Err(schema(format!("{path}.arity"), "arity must be positive"));
    }
    let len = n.checked_pow(j.arity as u32).ok_or_else(|| {
        schema(format!("{path}.arity"), format!("arity {} overflows", j.arity))
    })?;
    let values = vec_from_json(&j.values, len, &format!("{path}.values"))?;
    FunctionTensor::from_values(n, j.arity, values)
}

// ---------------------------------------------------------------------------
// file plumbing

/// Parse a JSON file into one of the schema types; malformed JSON or
/// unknown fields surface as schema errors carrying the file path.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| schema(path.display().to_string(), e.to_string()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
