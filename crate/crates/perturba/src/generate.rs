//! Seeded generators for randomized tests. Every structure is assembled in
//! canonical coordinates, where the axioms hold by construction, and then
//! conjugated by random unipotent changes of basis so the matrices the
//! library sees are dense and unstructured.
//!
//! Generators panic on internal invariant breakage: they promise valid data.

use crate::complexes::Complex;
use crate::constructions::{DoubleComplex, RowContraction};
use crate::graded::{GradedMap, GradedModule};
use crate::matrix::Mat;
use crate::perturbation::{certify, HEData, Perturbation};
use crate::scalar::{Rat, Scalar, Tol};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn small_rat(rng: &mut ChaCha8Rng) -> Rat {
    let num = *[-2i64, -1, 1, 2, 3].choose(rng).unwrap();
    let den = *[1i64, 2, 3].choose(rng).unwrap();
    Rat::from_ratio(num, den)
}

/// Random unipotent change of basis with its exact inverse.
fn unipotent(rng: &mut ChaCha8Rng, n: usize) -> (Mat<Rat>, Mat<Rat>) {
    let mut l = Mat::identity(n);
    let mut u = Mat::identity(n);
    for i in 0..n {
        for j in 0..i {
            if rng.gen_bool(0.4) {
                l[(i, j)] = small_rat(rng);
            }
            if rng.gen_bool(0.4) {
                u[(j, i)] = small_rat(rng);
            }
        }
    }
    let v = l.mul(&u).unwrap();
    let v_inv = v.inverse(&Tol::default()).unwrap().expect("unipotent is invertible");
    (v, v_inv)
}

/// Shift-0 change of basis on a graded module, with inverse.
fn graded_basis(rng: &mut ChaCha8Rng, module: &GradedModule) -> (GradedMap<Rat>, GradedMap<Rat>) {
    let mut blocks = BTreeMap::new();
    let mut inv_blocks = BTreeMap::new();
    for k in module.support() {
        let (v, vi) = unipotent(rng, module.dim(k));
        blocks.insert(k, v);
        inv_blocks.insert(k, vi);
    }
    let w = GradedMap::new(module.clone(), module.clone(), 0, blocks).unwrap();
    let wi = GradedMap::new(module.clone(), module.clone(), 0, inv_blocks).unwrap();
    (w, wi)
}

/// Cochain complex in canonical form on degrees 0..=a.len()-1: coordinates
/// at degree k are [cohomology a_k | sources r_k | targets r_{k-1}] and d
/// carries the source block identically onto the next target block.
pub fn canonical_complex(a: &[usize], r: &[usize]) -> Complex<Rat> {
    let top = a.len() - 1;
    assert_eq!(r.len(), top, "one rank per adjacent pair of degrees");
    let r_at = |k: usize| if k < top { r[k] } else { 0 };
    let rprev_at = |k: usize| if k > 0 { r[k - 1] } else { 0 };
    let dim = |k: usize| a[k] + r_at(k) + rprev_at(k);
    let pairs: Vec<(i64, usize)> = (0..=top).map(|k| (k as i64, dim(k))).collect();
    let module = GradedModule::from_pairs(&pairs);
    let mut blocks = BTreeMap::new();
    for k in 0..top {
        let mut m = Mat::zeros(dim(k + 1), dim(k));
        for j in 0..r[k] {
            m[(a[k + 1] + r_at(k + 1) + j, a[k] + j)] = Rat::one();
        }
        blocks.insert(k as i64, m);
    }
    let d = GradedMap::new(module.clone(), module, 1, blocks).unwrap();
    Complex::new(d.source().clone(), d).unwrap()
}

/// Canonical complex in a random basis. Cohomology dims stay `a`.
pub fn random_complex(rng: &mut ChaCha8Rng, a: &[usize], r: &[usize]) -> Complex<Rat> {
    let c = canonical_complex(a, r);
    let (w, wi) = graded_basis(rng, c.module());
    let d = w.compose(c.d()).unwrap().compose(&wi).unwrap();
    Complex::new(c.module().clone(), d).unwrap()
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Part,
    Bottom,
    Top,
}

#[derive(Clone, Copy)]
struct Coord {
    kind: Kind,
    level: u32,
}

/// An HE (or DR) together with a perturbation whose smallness is automatic:
/// the perturbation strictly raises a planted filtration that the homotopy
/// preserves, so delta·h is nilpotent.
pub struct GeneratedHe {
    pub he: HEData<Rat>,
    pub delta: GradedMap<Rat>,
}

pub struct HeOptions {
    /// Deformation retract (p∘i = 1) or a genuine two-sided HE with
    /// collapsed redundancy on the L side.
    pub retract: bool,
    /// Twist the homotopy by a commutator d∘σ − σ∘d, which preserves the
    /// homotopy identity but destroys the special-DR equations.
    pub twist: bool,
}

pub fn random_he(rng: &mut ChaCha8Rng, opts: &HeOptions) -> GeneratedHe {
    // a draw can come out degenerate (no admissible arrows for delta);
    // every retry rerolls the whole structure, so this terminates quickly
    loop {
        if let Some(g) = try_random_he(rng, opts) {
            return g;
        }
    }
}

fn try_random_he(rng: &mut ChaCha8Rng, opts: &HeOptions) -> Option<GeneratedHe> {
    let top = 3usize;
    // the essential part, shared by L and M
    let a: Vec<usize> = (0..=top).map(|_| rng.gen_range(0..=2)).collect();
    let r: Vec<usize> = (0..top).map(|_| rng.gen_range(0..=1)).collect();
    let a = if a.iter().all(|&x| x == 0) { vec![1, 1, 0, 0] } else { a };
    let l0 = canonical_complex(&a, &r);
    let l0_dim = |k: usize| l0.module().dim(k as i64);

    // levels: b must preserve them, so a source coordinate and its target
    // share a level while cohomology coordinates are free
    let r_at = |k: usize| if k < top { r[k] } else { 0 };
    let mut l0_levels: Vec<Vec<u32>> = Vec::new();
    let mut r_levels: Vec<Vec<u32>> = Vec::new();
    for k in 0..=top {
        let mut lv = Vec::new();
        for _ in 0..a[k] {
            lv.push(*[0u32, 2, 4].choose(rng).unwrap());
        }
        let mut rl = Vec::new();
        for _ in 0..r_at(k) {
            let x = *[0u32, 2, 4].choose(rng).unwrap();
            rl.push(x);
            lv.push(x);
        }
        if k > 0 {
            for &x in &r_levels[k - 1] {
                lv.push(x);
            }
        }
        r_levels.push(rl);
        l0_levels.push(lv);
    }

    let n_cones = rng.gen_range(2..=3);
    let cone_bottom: Vec<usize> = (0..n_cones).map(|_| rng.gen_range(0..top)).collect();
    let cone_level: Vec<u32> = (0..n_cones).map(|_| *[1u32, 3].choose(rng).unwrap()).collect();

    let m_dim = |k: usize| {
        l0_dim(k)
            + cone_bottom.iter().filter(|&&b| b == k).count()
            + cone_bottom.iter().filter(|&&b| b + 1 == k).count()
    };
    let bottom_idx = |j: usize| {
        l0_dim(cone_bottom[j])
            + cone_bottom[..j].iter().filter(|&&b| b == cone_bottom[j]).count()
    };
    let top_idx = |j: usize| {
        let k = cone_bottom[j] + 1;
        l0_dim(k)
            + cone_bottom.iter().filter(|&&b| b == k).count()
            + cone_bottom[..j].iter().filter(|&&b| b + 1 == k).count()
    };

    let m_pairs: Vec<(i64, usize)> = (0..=top + 1).map(|k| (k as i64, m_dim(k))).collect();
    let m_module = GradedModule::from_pairs(&m_pairs);

    // coordinate classification per degree
    let mut coords: Vec<Vec<Coord>> = (0..=top + 1)
        .map(|k| {
            let base = if k <= top { l0_levels[k].clone() } else { Vec::new() };
            base.into_iter().map(|level| Coord { kind: Kind::Part, level }).collect()
        })
        .collect();
    for j in 0..n_cones {
        coords[cone_bottom[j]].push(Coord { kind: Kind::Bottom, level: cone_level[j] });
    }
    for j in 0..n_cones {
        coords[cone_bottom[j] + 1].push(Coord { kind: Kind::Top, level: cone_level[j] });
    }
    for (k, cs) in coords.iter().enumerate() {
        assert_eq!(cs.len(), m_dim(k), "coordinate bookkeeping at degree {k}");
    }

    // canonical differential, homotopy, inclusion, projection on M
    let mut b_blocks = BTreeMap::new();
    let mut h_blocks = BTreeMap::new();
    for k in 0..=top {
        let mut m = Mat::zeros(m_dim(k + 1), m_dim(k));
        let dl = l0.d().block(k as i64);
        for i in 0..dl.nrows() {
            for jx in 0..dl.ncols() {
                m[(i, jx)] = dl[(i, jx)].clone();
            }
        }
        for j in 0..n_cones {
            if cone_bottom[j] == k {
                m[(top_idx(j), bottom_idx(j))] = Rat::one();
            }
        }
        b_blocks.insert(k as i64, m);
        let mut hm = Mat::zeros(m_dim(k), m_dim(k + 1));
        for j in 0..n_cones {
            if cone_bottom[j] == k {
                hm[(bottom_idx(j), top_idx(j))] = -Rat::one();
            }
        }
        h_blocks.insert(k as i64 + 1, hm);
    }
    let b = GradedMap::new(m_module.clone(), m_module.clone(), 1, b_blocks).unwrap();
    let mut h = GradedMap::new(m_module.clone(), m_module.clone(), -1, h_blocks).unwrap();

    // the L side: the essential part alone for a retract, or padded with a
    // cone of its own (collapsed by i) for a non-retract HE
    let (l, i_map, p_map) = if opts.retract {
        let mut i_blocks = BTreeMap::new();
        let mut p_blocks = BTreeMap::new();
        for k in 0..=top {
            i_blocks.insert(
                k as i64,
                Mat::from_fn(m_dim(k), l0_dim(k), |x, y| {
                    if x == y { Rat::one() } else { Rat::zero() }
                }),
            );
            p_blocks.insert(
                k as i64,
                Mat::from_fn(l0_dim(k), m_dim(k), |x, y| {
                    if x == y { Rat::one() } else { Rat::zero() }
                }),
            );
        }
        let i_map = GradedMap::new(l0.module().clone(), m_module.clone(), 0, i_blocks).unwrap();
        let p_map = GradedMap::new(m_module.clone(), l0.module().clone(), 0, p_blocks).unwrap();
        (l0.clone(), i_map, p_map)
    } else {
        let lb = rng.gen_range(0..top);
        let l_dim = |k: usize| l0_dim(k) + usize::from(k == lb) + usize::from(k == lb + 1);
        let l_pairs: Vec<(i64, usize)> = (0..=top + 1).map(|k| (k as i64, l_dim(k))).collect();
        let l_module = GradedModule::from_pairs(&l_pairs);
        let mut dl_blocks = BTreeMap::new();
        for k in 0..=top {
            let mut m = Mat::zeros(l_dim(k + 1), l_dim(k));
            let dl = l0.d().block(k as i64);
            for i in 0..dl.nrows() {
                for jx in 0..dl.ncols() {
                    m[(i, jx)] = dl[(i, jx)].clone();
                }
            }
            if k == lb {
                m[(l_dim(k + 1) - 1, l_dim(k) - 1)] = Rat::one();
            }
            dl_blocks.insert(k as i64, m);
        }
        let dl = GradedMap::new(l_module.clone(), l_module.clone(), 1, dl_blocks).unwrap();
        let l = Complex::new(l_module.clone(), dl).unwrap();
        let mut i_blocks = BTreeMap::new();
        let mut p_blocks = BTreeMap::new();
        for k in 0..=top + 1 {
            i_blocks.insert(
                k as i64,
                Mat::from_fn(m_dim(k), l_dim(k), |x, y| {
                    if x == y && x < l0_dim(k) { Rat::one() } else { Rat::zero() }
                }),
            );
            p_blocks.insert(
                k as i64,
                Mat::from_fn(l_dim(k), m_dim(k), |x, y| {
                    if x == y && x < l0_dim(k) { Rat::one() } else { Rat::zero() }
                }),
            );
        }
        let i_map = GradedMap::new(l_module.clone(), m_module.clone(), 0, i_blocks).unwrap();
        let p_map = GradedMap::new(m_module.clone(), l_module, 0, p_blocks).unwrap();
        (l, i_map, p_map)
    };

    // nilpotent perturbation from a strictly level-raising N: delta is the
    // conjugation difference (1+N) b (1+N)^{-1} − b
    let mut delta_found = None;
    for _ in 0..16 {
        let mut n_blocks = BTreeMap::new();
        let mut any = false;
        for (k, cs) in coords.iter().enumerate() {
            let mut m = Mat::zeros(cs.len(), cs.len());
            for (c1, s) in cs.iter().enumerate() {
                for (c2, t) in cs.iter().enumerate() {
                    let kinds_ok = matches!(
                        (s.kind, t.kind),
                        (Kind::Part, Kind::Bottom) | (Kind::Top, Kind::Part) | (Kind::Bottom, Kind::Bottom)
                    );
                    if kinds_ok && t.level > s.level && rng.gen_bool(0.45) {
                        m[(c2, c1)] = small_rat(rng);
                        any = true;
                    }
                }
            }
            n_blocks.insert(k as i64, m);
        }
        if !any {
            continue;
        }
        let n = GradedMap::new(m_module.clone(), m_module.clone(), 0, n_blocks).unwrap();
        let one = GradedMap::identity(&m_module);
        let v = one.add(&n).unwrap();
        let mut vi_blocks = BTreeMap::new();
        for k in m_module.support() {
            vi_blocks.insert(
                k,
                v.block(k).inverse(&Tol::default()).unwrap().expect("1 + nilpotent"),
            );
        }
        let vi = GradedMap::new(m_module.clone(), m_module.clone(), 0, vi_blocks).unwrap();
        let delta = v.compose(&b).unwrap().compose(&vi).unwrap().sub(&b).unwrap();
        if !delta.is_zero() {
            delta_found = Some(delta);
            break;
        }
    }
    let delta = delta_found?;

    if opts.twist {
        // sigma strictly raises the level, hence so does the commutator,
        // and delta·(h + [d, sigma]) stays nilpotent
        let mut s_blocks = BTreeMap::new();
        for k in 2..coords.len() {
            let src = &coords[k];
            let tgt = &coords[k - 2];
            let mut m = Mat::zeros(tgt.len(), src.len());
            for (c1, s) in src.iter().enumerate() {
                for (c2, t) in tgt.iter().enumerate() {
                    if t.level > s.level && rng.gen_bool(0.45) {
                        m[(c2, c1)] = small_rat(rng);
                    }
                }
            }
            s_blocks.insert(k as i64, m);
        }
        let sigma = GradedMap::new(m_module.clone(), m_module.clone(), -2, s_blocks).unwrap();
        let chi = b.compose(&sigma).unwrap().sub(&sigma.compose(&b).unwrap()).unwrap();
        h = h.add(&chi).unwrap();
    }

    // final random basis on both sides
    let (w, wi) = graded_basis(rng, &m_module);
    let (wl, wli) = graded_basis(rng, l.module());
    let d_m = w.compose(&b).unwrap().compose(&wi).unwrap();
    let d_l = wl.compose(l.d()).unwrap().compose(&wli).unwrap();
    let he = HEData::new(
        Complex::new(l.module().clone(), d_l).unwrap(),
        Complex::new(m_module.clone(), d_m).unwrap(),
        w.compose(&i_map).unwrap().compose(&wli).unwrap(),
        wl.compose(&p_map).unwrap().compose(&wi).unwrap(),
        w.compose(&h).unwrap().compose(&wi).unwrap(),
    )
    .unwrap();
    let delta = w.compose(&delta).unwrap().compose(&wi).unwrap();

    let tol = Tol::default();
    he.verify(&tol).expect("generated HE satisfies the axioms");
    let pert = Perturbation::new(&he.m, delta.clone(), &tol).expect("generated delta is square-zero");
    certify(&he.m, &he.h, &pert, &tol).expect("generated delta is small");
    Some(GeneratedHe { he, delta })
}

/// Double complex with exact rows, its row contraction data, and the
/// planted induced differential on the zeroth row homology.
pub struct GeneratedDouble {
    pub dc: DoubleComplex<Rat>,
    pub rc: RowContraction<Rat>,
    pub induced: GradedMap<Rat>,
}

pub fn random_double_complex(rng: &mut ChaCha8Rng) -> GeneratedDouble {
    let rows = rng.gen_range(2..=3usize); // rows q = 0..rows
    let pmax = rng.gen_range(2..=3usize); // columns p = 0..=pmax
    let a: Vec<usize> = (0..rows).map(|_| rng.gen_range(1..=2)).collect();
    let ar: Vec<usize> = (0..rows - 1).map(|_| rng.gen_range(0..=1)).collect();
    let acx = random_complex(rng, &a, &ar);
    let a_dim = |q: usize| acx.module().dim(q as i64);

    let n_cones = rng.gen_range(3..=5usize);
    let cone_at: Vec<(usize, usize)> = (0..n_cones)
        .map(|_| (rng.gen_range(1..=pmax), rng.gen_range(0..rows)))
        .collect();

    // bipartite vertical arrows between same-column cones in adjacent rows
    #[derive(Clone, Copy, PartialEq)]
    enum Role {
        Free,
        Source,
        Sink,
    }
    let mut role = vec![Role::Free; n_cones];
    let mut arrows: Vec<(usize, usize, Rat)> = Vec::new();
    for src in 0..n_cones {
        if role[src] == Role::Sink {
            continue;
        }
        for snk in 0..n_cones {
            if role[snk] == Role::Source || snk == src {
                continue;
            }
            if cone_at[snk].0 == cone_at[src].0
                && cone_at[snk].1 == cone_at[src].1 + 1
                && rng.gen_bool(0.7)
            {
                arrows.push((src, snk, small_rat(rng)));
                role[src] = Role::Source;
                role[snk] = Role::Sink;
                break;
            }
        }
    }

    // arrows from the homology part of one row into column-one sink cones
    let q0 = rng.gen_range(0..rows - 1);
    let mut kappa: Vec<(usize, usize, Rat)> = Vec::new(); // (a-coordinate, cone, coeff)
    for j in 0..n_cones {
        if cone_at[j] == (1, q0 + 1) && role[j] != Role::Source && a_dim(q0) > 0 {
            if rng.gen_bool(0.8) {
                kappa.push((rng.gen_range(0..a_dim(q0)), j, small_rat(rng)));
            }
        }
    }

    let cones_at = |p: usize, q: usize| -> Vec<usize> {
        (0..n_cones).filter(|&j| cone_at[j] == (p, q)).collect()
    };
    let dim = |p: usize, q: usize| -> usize {
        if p == 0 {
            a_dim(q) + cones_at(1, q).len()
        } else {
            cones_at(p, q).len() + cones_at(p + 1, q).len()
        }
    };
    // e of cone j sits at (p_j, q_j); f of cone j sits at (p_j - 1, q_j)
    let e_idx = |j: usize| -> usize {
        cones_at(cone_at[j].0, cone_at[j].1).iter().position(|&x| x == j).unwrap()
    };
    let f_idx = |j: usize| -> usize {
        let (p, q) = cone_at[j];
        let among = cones_at(p, q).iter().position(|&x| x == j).unwrap();
        if p == 1 {
            a_dim(q) + among
        } else {
            cones_at(p - 1, q).len() + among
        }
    };

    let mut dims = BTreeMap::new();
    let mut horiz = BTreeMap::new();
    let mut vert = BTreeMap::new();
    for p in 0..=pmax {
        for q in 0..rows {
            let d = dim(p, q);
            if d > 0 {
                dims.insert((p as i64, q as i64), d);
            }
        }
    }
    for p in 0..=pmax {
        for q in 0..rows {
            // horizontal: e ↦ f for cones in this column
            let mut hm = Mat::zeros(if p > 0 { dim(p - 1, q) } else { 0 }, dim(p, q));
            if p > 0 {
                for j in cones_at(p, q) {
                    hm[(f_idx(j), e_idx(j))] = Rat::one();
                }
                if !hm.is_zero() {
                    horiz.insert((p as i64, q as i64), hm);
                }
            }
            // vertical
            if q + 1 < rows {
                let mut vm = Mat::zeros(dim(p, q + 1), dim(p, q));
                if p == 0 {
                    let ab = acx.d().block(q as i64);
                    for i in 0..ab.nrows() {
                        for jx in 0..ab.ncols() {
                            vm[(i, jx)] = ab[(i, jx)].clone();
                        }
                    }
                    for &(src, snk, ref mu) in &arrows {
                        if cone_at[src].0 == 1 && cone_at[src].1 == q {
                            vm[(f_idx(snk), f_idx(src))] = -mu.clone();
                        }
                    }
                    if q == q0 {
                        for &(ac, j, ref co) in &kappa {
                            vm[(f_idx(j), ac)] = co.clone();
                        }
                    }
                } else {
                    for &(src, snk, ref mu) in &arrows {
                        if cone_at[src] == (p, q) {
                            vm[(e_idx(snk), e_idx(src))] = mu.clone();
                        }
                        if cone_at[src].0 == p + 1 && cone_at[src].1 == q {
                            vm[(f_idx(snk), f_idx(src))] = -mu.clone();
                        }
                    }
                }
                if !vm.is_zero() {
                    vert.insert((p as i64, q as i64), vm);
                }
            }
        }
    }

    // canonical row contraction
    let mut rc_i = BTreeMap::new();
    let mut rc_p = BTreeMap::new();
    let mut rc_h = BTreeMap::new();
    for q in 0..rows {
        rc_i.insert(
            q as i64,
            Mat::from_fn(dim(0, q), a_dim(q), |x, y| {
                if x == y { Rat::one() } else { Rat::zero() }
            }),
        );
        rc_p.insert(
            q as i64,
            Mat::from_fn(a_dim(q), dim(0, q), |x, y| {
                if x == y { Rat::one() } else { Rat::zero() }
            }),
        );
        for p in 0..pmax {
            let mut hm = Mat::zeros(dim(p + 1, q), dim(p, q));
            for j in cones_at(p + 1, q) {
                hm[(e_idx(j), f_idx(j))] = -Rat::one();
            }
            if !hm.is_zero() {
                rc_h.insert((p as i64, q as i64), hm);
            }
        }
    }

    // conjugate every component separately; p∘δ∘i is untouched by this
    let mut vs: BTreeMap<(usize, usize), (Mat<Rat>, Mat<Rat>)> = BTreeMap::new();
    for (&(p, q), &d) in &dims {
        vs.insert((p as usize, q as usize), unipotent(rng, d));
    }
    let v_of = |p: i64, q: i64| -> Option<&(Mat<Rat>, Mat<Rat>)> {
        if p < 0 {
            None
        } else {
            vs.get(&(p as usize, q as usize))
        }
    };
    let horiz: BTreeMap<(i64, i64), Mat<Rat>> = horiz
        .into_iter()
        .map(|((p, q), m)| {
            let m = match v_of(p - 1, q) {
                Some((v, _)) => v.mul(&m).unwrap(),
                None => m,
            };
            let m = match v_of(p, q) {
                Some((_, vi)) => m.mul(vi).unwrap(),
                None => m,
            };
            ((p, q), m)
        })
        .collect();
    let vert: BTreeMap<(i64, i64), Mat<Rat>> = vert
        .into_iter()
        .map(|((p, q), m)| {
            let m = match v_of(p, q + 1) {
                Some((v, _)) => v.mul(&m).unwrap(),
                None => m,
            };
            let m = match v_of(p, q) {
                Some((_, vi)) => m.mul(vi).unwrap(),
                None => m,
            };
            ((p, q), m)
        })
        .collect();
    let rc_i: BTreeMap<i64, Mat<Rat>> = rc_i
        .into_iter()
        .map(|(q, m)| {
            let m = match v_of(0, q) {
                Some((v, _)) => v.mul(&m).unwrap(),
                None => m,
            };
            (q, m)
        })
        .collect();
    let rc_p: BTreeMap<i64, Mat<Rat>> = rc_p
        .into_iter()
        .map(|(q, m)| {
            let m = match v_of(0, q) {
                Some((_, vi)) => m.mul(vi).unwrap(),
                None => m,
            };
            (q, m)
        })
        .collect();
    let rc_h: BTreeMap<(i64, i64), Mat<Rat>> = rc_h
        .into_iter()
        .map(|((p, q), m)| {
            let m = match v_of(p + 1, q) {
                Some((v, _)) => v.mul(&m).unwrap(),
                None => m,
            };
            let m = match v_of(p, q) {
                Some((_, vi)) => m.mul(vi).unwrap(),
                None => m,
            };
            ((p, q), m)
        })
        .collect();

    let dc = DoubleComplex::new(dims, horiz, vert, &Tol::default())
        .expect("generated double complex satisfies the axioms");
    let a_pairs: Vec<(i64, usize)> = (0..rows).map(|q| (q as i64, a_dim(q))).collect();
    let rc = RowContraction {
        a: GradedModule::from_pairs(&a_pairs),
        i: rc_i,
        p: rc_p,
        h: rc_h,
    };
    GeneratedDouble { dc, rc, induced: acx.d().clone() }
}

/// Complex split as A ⊕ A′ with A′ contractible, together with the
/// contraction H and the A dimensions. When `rich` is set, one cone carries
/// both an incoming γ and an outgoing β arrow, so the induced differential
/// α − β∘H∘γ genuinely differs from α.
pub struct GeneratedSplit {
    pub c: Complex<Rat>,
    pub a_dims: GradedModule,
    pub h: GradedMap<Rat>,
}

pub fn random_contractible_split(rng: &mut ChaCha8Rng, rich: bool) -> GeneratedSplit {
    let top = 3usize;
    let a: Vec<usize> = (0..=top).map(|_| rng.gen_range(1..=2)).collect();
    let mut r: Vec<usize> = (0..top).map(|_| rng.gen_range(0..=1)).collect();
    let kstar = rng.gen_range(0..top);
    if rich {
        r[kstar] = r[kstar].max(1);
    }
    let acx = canonical_complex(&a, &r);
    let r_at = |k: usize| if k < top { r[k] } else { 0 };
    let a_dim = |k: usize| acx.module().dim(k as i64);

    let mut cone_bottom: Vec<usize> = (0..rng.gen_range(1..=2))
        .map(|_| rng.gen_range(0..top))
        .collect();
    if rich {
        cone_bottom.push(kstar);
    }
    let n_cones = cone_bottom.len();
    let forced = n_cones - 1; // only meaningful when rich

    let bottoms_at = |k: usize| -> Vec<usize> {
        (0..n_cones).filter(|&j| cone_bottom[j] == k).collect()
    };
    let tops_at = |k: usize| -> Vec<usize> {
        (0..n_cones).filter(|&j| cone_bottom[j] + 1 == k).collect()
    };
    let prime_dim = |k: usize| bottoms_at(k).len() + tops_at(k).len();
    let bottom_idx = |j: usize| bottoms_at(cone_bottom[j]).iter().position(|&x| x == j).unwrap();
    let top_idx = |j: usize| {
        let k = cone_bottom[j] + 1;
        bottoms_at(k).len() + tops_at(k).iter().position(|&x| x == j).unwrap()
    };

    let dim = |k: usize| a_dim(k) + prime_dim(k);
    let pairs: Vec<(i64, usize)> = (0..=top + 1).map(|k| (k as i64, dim(k))).collect();
    let module = GradedModule::from_pairs(&pairs);

    // β: cone bottoms → target part of A (inside ker α); γ: cohomology part
    // of A → cone tops; both directions vanish where the chain conditions
    // and β∘γ = γ∘β = 0 demand it
    let mut d_blocks = BTreeMap::new();
    for k in 0..=top {
        let mut m = Mat::zeros(dim(k + 1), dim(k));
        let ab = acx.d().block(k as i64);
        for i in 0..ab.nrows() {
            for jx in 0..ab.ncols() {
                m[(i, jx)] = ab[(i, jx)].clone();
            }
        }
        for j in bottoms_at(k) {
            // δ′ inside A′
            m[(a_dim(k + 1) + top_idx(j), a_dim(k) + bottom_idx(j))] = Rat::one();
            // β into the target block [a .. a+r_k) shifted past cohomology
            // and source parts of A at degree k+1
            for t in 0..r_at(k) {
                let row = a[k + 1] + r_at(k + 1) + t;
                let forced_here = rich && j == forced && t == 0;
                if forced_here || rng.gen_bool(0.4) {
                    let c = small_rat(rng);
                    m[(row, a_dim(k) + bottom_idx(j))] =
                        if forced_here { Rat::one() } else { c };
                }
            }
        }
        for j in bottoms_at(k) {
            // γ from the cohomology part of A at degree k into the top of j;
            // in the rich case γ runs only through the forced cone so that
            // no other cone can cancel the planted β∘H∘γ entry
            for ac in 0..a[k] {
                let forced_here = rich && j == forced && ac == 0;
                if forced_here || rng.gen_bool(if rich { 0.0 } else { 0.3 }) {
                    let c = small_rat(rng);
                    m[(a_dim(k + 1) + top_idx(j), ac)] =
                        if forced_here { Rat::one() } else { c };
                }
            }
        }
        d_blocks.insert(k as i64, m);
    }
    let d = GradedMap::new(module.clone(), module.clone(), 1, d_blocks).unwrap();

    let prime_pairs: Vec<(i64, usize)> = (0..=top + 1).map(|k| (k as i64, prime_dim(k))).collect();
    let prime = GradedModule::from_pairs(&prime_pairs);
    let mut h_blocks = BTreeMap::new();
    for k in 1..=top + 1 {
        let mut m = Mat::zeros(prime_dim(k - 1), prime_dim(k));
        for j in tops_at(k) {
            m[(bottom_idx(j), top_idx(j))] = Rat::one();
        }
        h_blocks.insert(k as i64, m);
    }
    let h = GradedMap::new(prime.clone(), prime.clone(), -1, h_blocks).unwrap();

    // block-diagonal conjugation keeps the A | A′ split intact
    let mut wa: BTreeMap<usize, (Mat<Rat>, Mat<Rat>)> = BTreeMap::new();
    let mut wp: BTreeMap<usize, (Mat<Rat>, Mat<Rat>)> = BTreeMap::new();
    for k in 0..=top + 1 {
        wa.insert(k, unipotent(rng, a_dim(k)));
        wp.insert(k, unipotent(rng, prime_dim(k)));
    }
    let embed = |k: usize| -> (Mat<Rat>, Mat<Rat>) {
        let make = |va: &Mat<Rat>, vp: &Mat<Rat>| {
            Mat::from_fn(dim(k), dim(k), |i, j| {
                let adim = a_dim(k);
                if i < adim && j < adim {
                    va[(i, j)].clone()
                } else if i >= adim && j >= adim {
                    vp[(i - adim, j - adim)].clone()
                } else {
                    Rat::zero()
                }
            })
        };
        let (va, vai) = &wa[&k];
        let (vp, vpi) = &wp[&k];
        (make(va, vp), make(vai, vpi))
    };
    let mut d2_blocks = BTreeMap::new();
    for k in 0..=top {
        let (wn, _) = embed(k + 1);
        let (_, wii) = embed(k);
        d2_blocks.insert(k as i64, wn.mul(&d.block(k as i64)).unwrap().mul(&wii).unwrap());
    }
    let d2 = GradedMap::new(module.clone(), module.clone(), 1, d2_blocks).unwrap();
    let mut h2_blocks = BTreeMap::new();
    for k in 1..=top + 1 {
        let h2 = wp[&(k - 1)].0.mul(&h.block(k as i64)).unwrap().mul(&wp[&k].1).unwrap();
        h2_blocks.insert(k as i64, h2);
    }
    let h2 = GradedMap::new(prime.clone(), prime, -1, h2_blocks).unwrap();

    let c = Complex::new(module, d2).unwrap();
    assert!(c.is_complex(&Tol::default()).unwrap(), "generated split squares to zero");
    let a_pairs: Vec<(i64, usize)> = (0..=top).map(|k| (k as i64, a_dim(k))).collect();
    GeneratedSplit { c, a_dims: GradedModule::from_pairs(&a_pairs), h: h2 }
}

/// Finite metric space with rational distances in [1, 2]: the triangle
/// inequality holds automatically.
pub fn random_metric(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<Rat>> {
    let mut d = vec![vec![Rat::zero(); n]; n];
    for i in 0..n {
        for j in 0..i {
            let v = Rat::one() + Rat::from_ratio(rng.gen_range(0..=8), 8);
            d[i][j] = v.clone();
            d[j][i] = v;
        }
    }
    d
}
