//! Exact rational linear algebra and small polyhedral computations.
//!
//! Everything here works over [`BigInt`]/[`BigRational`]; there is no
//! floating point. Polyhedra are kept as `a·x ≥ b` systems ([`HPolyhedron`])
//! or as points plus rays plus lines ([`VRep`]); conversions between the two
//! use the double description method and are capped by dimension.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{bail, Result};

pub type Rat = BigRational;

/// Default dimension cap for double description conversions.
pub const DIM_CAP: usize = 9;

/// Default node budget for lattice-point enumeration.
pub const NODE_BUDGET: u64 = 20_000_000;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_vec(v: &[i64]) -> Vec<Rat> {
    v.iter().map(|&x| rat(x)).collect()
}

pub fn int_vec(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

/// Converts an integral rational vector back to `i64`s.
pub fn to_i64_vec(v: &[Rat]) -> Option<Vec<i64>> {
    v.iter().map(|x| if x.is_integer() { x.to_integer().to_i64() } else { None }).collect()
}

pub fn rat_str(x: &Rat) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

fn dot_int_rat(a: &[BigInt], x: &[Rat]) -> Rat {
    a.iter()
        .zip(x)
        .filter(|(c, _)| !c.is_zero())
        .fold(Rat::zero(), |acc, (c, v)| acc + Rat::from_integer(c.clone()) * v)
}

fn dot_int(a: &[BigInt], x: &[BigInt]) -> BigInt {
    a.iter().zip(x).fold(BigInt::zero(), |acc, (c, v)| acc + c * v)
}

fn primitive(v: Vec<BigInt>) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if g.is_zero() || g.is_one() {
        v
    } else {
        v.into_iter().map(|x| x / &g).collect()
    }
}

/// Clears denominators of a rational vector and returns a primitive integer
/// vector pointing the same way.
pub fn primitive_direction(v: &[Rat]) -> Vec<BigInt> {
    let l = v.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
    primitive(v.iter().map(|x| (x * Rat::from_integer(l.clone())).to_integer()).collect())
}

/// A polyhedron `{x | a·x ≥ b for every row}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HPolyhedron {
    pub dim: usize,
    pub rows: Vec<(Vec<BigInt>, Rat)>,
}

impl HPolyhedron {
    pub fn new(dim: usize) -> Self {
        HPolyhedron { dim, rows: Vec::new() }
    }

    /// Adds `a·x ≥ b`, skipping exact duplicates.
    pub fn push(&mut self, a: Vec<BigInt>, b: Rat) {
        assert_eq!(a.len(), self.dim);
        if !self.rows.iter().any(|(a2, b2)| a2 == &a && b2 == &b) {
            self.rows.push((a, b));
        }
    }

    pub fn push_i64(&mut self, a: &[i64], b: i64) {
        self.push(int_vec(a), rat(b));
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        self.rows.iter().all(|(a, b)| dot_int_rat(a, x) >= *b)
    }

    pub fn contains_int(&self, x: &[i64]) -> bool {
        let x = int_vec(x);
        self.rows.iter().all(|(a, b)| Rat::from_integer(dot_int(a, &x)) >= *b)
    }

    /// Strict interior test: every row holds strictly.
    pub fn contains_strictly(&self, x: &[Rat]) -> bool {
        self.rows.iter().all(|(a, b)| a.iter().all(Zero::is_zero) || dot_int_rat(a, x) > *b)
    }

    /// `k·P`, valid for any polyhedron (scaling the right-hand sides).
    pub fn dilate(&self, k: i64) -> Self {
        let k = rat(k);
        HPolyhedron { dim: self.dim, rows: self.rows.iter().map(|(a, b)| (a.clone(), b * &k)).collect() }
    }

    /// `P − t`.
    pub fn translate_neg(&self, t: &[Rat]) -> Self {
        HPolyhedron {
            dim: self.dim,
            rows: self.rows.iter().map(|(a, b)| (a.clone(), b - dot_int_rat(a, t))).collect(),
        }
    }

    pub fn to_json(&self) -> Value {
        let ineqs: Vec<Value> = self
            .rows
            .iter()
            .map(|(a, b)| {
                let mut row: Vec<Value> = a.iter().map(|c| json!(c.to_i64().unwrap_or(0))).collect();
                row.push(json!(rat_str(b)));
                Value::Array(row)
            })
            .collect();
        json!({ "ineqs": ineqs })
    }
}

fn ceil_div(a: i128, b: i128) -> i128 {
    -(-a).div_euclid(b)
}

/// Integer points of `P ∩ [lo, hi]` in lexicographic order.
///
/// Bounds are first tightened by interval propagation over the rows; the
/// search then assigns coordinates in order and prunes with the best case
/// of the unassigned coordinates.
pub fn lattice_points(p: &HPolyhedron, lo: &[i64], hi: &[i64], budget: u64) -> Result<Vec<Vec<i64>>> {
    let d = p.dim;
    assert!(lo.len() == d && hi.len() == d);
    let mut rows: Vec<(Vec<i128>, i128)> = Vec::with_capacity(p.rows.len());
    for (a, b) in &p.rows {
        let a: Option<Vec<i128>> = a.iter().map(|c| c.to_i128()).collect();
        let b = b.ceil().to_integer().to_i128();
        let (Some(a), Some(b)) = (a, b) else {
            bail!(BoxTooLarge, "coefficients exceed the 128-bit enumeration range");
        };
        rows.push((a, b));
    }
    let mut lo: Vec<i128> = lo.iter().map(|&x| x as i128).collect();
    let mut hi: Vec<i128> = hi.iter().map(|&x| x as i128).collect();
    let best = |a: i128, lo: i128, hi: i128| if a >= 0 { a * hi } else { a * lo };

    // interval propagation to a fixpoint (bounded number of sweeps)
    for _ in 0..64 {
        let mut changed = false;
        for (a, b) in &rows {
            let total: i128 = (0..d).map(|j| best(a[j], lo[j], hi[j])).sum();
            for k in 0..d {
                if a[k] == 0 {
                    continue;
                }
                let rest = total - best(a[k], lo[k], hi[k]);
                let need = b - rest;
                if a[k] > 0 {
                    let nl = ceil_div(need, a[k]);
                    if nl > lo[k] {
                        lo[k] = nl;
                        changed = true;
                    }
                } else {
                    let nh = (-need).div_euclid(-a[k]);
                    if nh < hi[k] {
                        hi[k] = nh;
                        changed = true;
                    }
                }
            }
            if (0..d).any(|k| lo[k] > hi[k]) {
                return Ok(Vec::new());
            }
        }
        if !changed {
            break;
        }
    }
    if (0..d).any(|k| lo[k] > hi[k]) {
        return Ok(Vec::new());
    }
    if rows.iter().any(|(a, b)| a.iter().all(|&c| c == 0) && *b > 0) {
        return Ok(Vec::new());
    }

    // suffix[r][k] = best contribution of coordinates k.. in row r
    let suffix: Vec<Vec<i128>> = rows
        .iter()
        .map(|(a, _)| {
            let mut s = vec![0i128; d + 1];
            for k in (0..d).rev() {
                s[k] = s[k + 1] + best(a[k], lo[k], hi[k]);
            }
            s
        })
        .collect();

    struct Search<'a> {
        rows: &'a [(Vec<i128>, i128)],
        suffix: &'a [Vec<i128>],
        lo: &'a [i128],
        hi: &'a [i128],
        partial: Vec<i128>,
        x: Vec<i64>,
        out: Vec<Vec<i64>>,
        nodes: u64,
        budget: u64,
    }

    impl Search<'_> {
        fn go(&mut self, k: usize) -> Result<()> {
            self.nodes += 1;
            if self.nodes > self.budget {
                bail!(BoxTooLarge, "lattice-point enumeration exceeded {} search nodes", self.budget);
            }
            let d = self.lo.len();
            if k == d {
                self.out.push(self.x.clone());
                return Ok(());
            }
            let (mut l, mut h) = (self.lo[k], self.hi[k]);
            for (r, (a, b)) in self.rows.iter().enumerate() {
                let need = b - self.partial[r] - self.suffix[r][k + 1];
                match a[k].signum() {
                    0 => {
                        if need > 0 {
                            return Ok(());
                        }
                    }
                    1 => l = l.max(ceil_div(need, a[k])),
                    _ => h = h.min((-need).div_euclid(-a[k])),
                }
            }
            let mut v = l;
            while v <= h {
                for (r, (a, _)) in self.rows.iter().enumerate() {
                    self.partial[r] += a[k] * v;
                }
                self.x[k] = v as i64;
                let res = self.go(k + 1);
                for (r, (a, _)) in self.rows.iter().enumerate() {
                    self.partial[r] -= a[k] * v;
                }
                res?;
                v += 1;
            }
            Ok(())
        }
    }

    let mut s = Search {
        rows: &rows,
        suffix: &suffix,
        lo: &lo,
        hi: &hi,
        partial: vec![0; rows.len()],
        x: vec![0; d],
        out: Vec::new(),
        nodes: 0,
        budget,
    };
    s.go(0)?;
    Ok(s.out)
}

/// Generators of a polyhedral cone: rays plus a lineality basis.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConeVRep {
    pub rays: Vec<Vec<BigInt>>,
    pub lines: Vec<Vec<BigInt>>,
}

/// Double description: generators of `{y | m·y ≥ 0 for every row m}`.
pub fn cone_generators(dim: usize, rows: &[Vec<BigInt>], cap: usize) -> Result<ConeVRep> {
    if dim > cap {
        bail!(DimCapExceeded, "dimension {dim} exceeds the double-description cap {cap}");
    }
    let mut lines: Vec<Vec<BigInt>> = (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    let mut rays: Vec<Vec<BigInt>> = Vec::new();
    // tight[r] = indices of processed rows vanishing on ray r
    let mut tight: Vec<Vec<bool>> = Vec::new();
    let mut processed: Vec<&Vec<BigInt>> = Vec::new();

    for row in rows {
        if row.iter().all(Zero::is_zero) {
            continue;
        }
        if let Some(pos) = lines.iter().position(|l| !dot_int(row, l).is_zero()) {
            let mut l0 = lines.swap_remove(pos);
            let mut v0 = dot_int(row, &l0);
            if v0.is_negative() {
                l0 = l0.into_iter().map(|x| -x).collect();
                v0 = -v0;
            }
            let project = |v: &Vec<BigInt>| -> Vec<BigInt> {
                let c = dot_int(row, v);
                if c.is_zero() {
                    return v.clone();
                }
                primitive(v.iter().zip(&l0).map(|(x, y)| x * &v0 - &c * y).collect())
            };
            lines = lines.iter().map(project).collect();
            rays = rays.iter().map(project).collect();
            for t in &mut tight {
                t.push(true);
            }
            let mut t0 = vec![true; processed.len()];
            t0.push(false);
            processed.push(row);
            rays.push(primitive(l0));
            tight.push(t0);
            continue;
        }
        let vals: Vec<BigInt> = rays.iter().map(|r| dot_int(row, r)).collect();
        let lin_dim = lines.len();
        let mut new_rays = Vec::new();
        let mut new_tight = Vec::new();
        for (i, r) in rays.iter().enumerate() {
            if !vals[i].is_negative() {
                let mut t = tight[i].clone();
                t.push(vals[i].is_zero());
                new_rays.push(r.clone());
                new_tight.push(t);
            }
        }
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_negative()).collect();
        let need = dim.saturating_sub(lin_dim).saturating_sub(2);
        for &p in &pos {
            for &n in &neg {
                let common: Vec<bool> = tight[p].iter().zip(&tight[n]).map(|(a, b)| *a && *b).collect();
                let count = common.iter().filter(|&&b| b).count();
                if count < need {
                    continue;
                }
                let adjacent = (0..rays.len()).all(|r| {
                    r == p || r == n || !common.iter().zip(&tight[r]).all(|(c, t)| !*c || *t)
                });
                if !adjacent {
                    continue;
                }
                let comb: Vec<BigInt> = rays[n]
                    .iter()
                    .zip(&rays[p])
                    .map(|(xn, xp)| &vals[p] * xn - &vals[n] * xp)
                    .collect();
                let mut t = common;
                t.push(true);
                new_rays.push(primitive(comb));
                new_tight.push(t);
            }
        }
        processed.push(row);
        rays = new_rays;
        tight = new_tight;
    }
    let mut rays: Vec<Vec<BigInt>> = rays.into_iter().filter(|r| r.iter().any(|x| !x.is_zero())).collect();
    rays.sort();
    rays.dedup();
    Ok(ConeVRep { rays, lines })
}

/// A polyhedron in generator form: `conv(points) + cone(rays) + span(lines)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VRep {
    pub dim: usize,
    pub points: Vec<Vec<Rat>>,
    pub rays: Vec<Vec<BigInt>>,
    pub lines: Vec<Vec<BigInt>>,
}

impl VRep {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Vertices, rays and lines of an H-polyhedron.
pub fn h_to_v(p: &HPolyhedron, cap: usize) -> Result<VRep> {
    let d = p.dim;
    if d > cap {
        bail!(DimCapExceeded, "dimension {d} exceeds the double-description cap {cap}");
    }
    // homogenize: (x, t) with a·x − b t ≥ 0 and t ≥ 0
    let mut rows = Vec::new();
    for (a, b) in &p.rows {
        let l = b.denom().clone();
        let mut row: Vec<BigInt> = a.iter().map(|c| c * &l).collect();
        row.push(-(b * Rat::from_integer(l)).to_integer());
        rows.push(row);
    }
    let mut t_row = vec![BigInt::zero(); d + 1];
    t_row[d] = BigInt::one();
    rows.push(t_row);
    let cone = cone_generators(d + 1, &rows, cap + 1)?;
    let mut out = VRep { dim: d, ..Default::default() };
    for r in cone.rays {
        let t = r[d].clone();
        if t.is_zero() {
            out.rays.push(r[..d].to_vec());
        } else {
            let t = Rat::from_integer(t);
            out.points.push(r[..d].iter().map(|x| Rat::from_integer(x.clone()) / &t).collect());
        }
    }
    for l in cone.lines {
        debug_assert!(l[d].is_zero());
        out.lines.push(l[..d].to_vec());
    }
    Ok(out)
}

/// Facet-type inequalities of a generator-form polyhedron (via the polar
/// cone). An empty V-representation yields the infeasible row `0 ≥ 1`.
pub fn v_to_h(v: &VRep, cap: usize) -> Result<HPolyhedron> {
    let d = v.dim;
    if d > cap {
        bail!(DimCapExceeded, "dimension {d} exceeds the double-description cap {cap}");
    }
    let mut out = HPolyhedron::new(d);
    if v.points.is_empty() {
        out.push(vec![BigInt::zero(); d], rat(1));
        return Ok(out);
    }
    // unknowns (w, c): w·p − c ≥ 0, w·r ≥ 0, ±w·l ≥ 0
    let mut rows = Vec::new();
    for p in &v.points {
        let l = p.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
        let lr = Rat::from_integer(l.clone());
        let mut row: Vec<BigInt> = p.iter().map(|x| (x * &lr).to_integer()).collect();
        row.push(-l);
        rows.push(row);
    }
    for r in &v.rays {
        let mut row = r.clone();
        row.push(BigInt::zero());
        rows.push(row);
    }
    for l in &v.lines {
        let mut row = l.clone();
        row.push(BigInt::zero());
        rows.push(row.iter().map(|x| -x).collect());
        rows.push(row);
    }
    let cone = cone_generators(d + 1, &rows, cap + 1)?;
    let mut emit = |w: &[BigInt], c: &BigInt| {
        if w.iter().any(|x| !x.is_zero()) {
            out.push(w.to_vec(), Rat::from_integer(c.clone()));
        }
    };
    for r in &cone.rays {
        emit(&r[..d], &r[d]);
    }
    for l in &cone.lines {
        emit(&l[..d], &l[d]);
        let neg: Vec<BigInt> = l.iter().map(|x| -x).collect();
        emit(&neg[..d], &neg[d]);
    }
    Ok(out)
}

/// Either representation of a polyhedron.
#[derive(Debug, Clone)]
pub enum Polyhedron {
    H(HPolyhedron),
    V(VRep),
}

impl Polyhedron {
    fn both(&self, cap: usize) -> Result<(HPolyhedron, VRep)> {
        match self {
            Polyhedron::H(h) => Ok((h.clone(), h_to_v(h, cap)?)),
            Polyhedron::V(v) => Ok((v_to_h(v, cap)?, v.clone())),
        }
    }
}

fn v_inside_h(v: &VRep, h: &HPolyhedron) -> bool {
    v.points.iter().all(|p| h.contains(p))
        && v.rays.iter().all(|r| h.rows.iter().all(|(a, _)| !dot_int(a, r).is_negative()))
        && v.lines.iter().all(|l| h.rows.iter().all(|(a, _)| dot_int(a, l).is_zero()))
}

/// Whether two polyhedra have the same point set (mutual inclusion of
/// generators against the other side's inequalities).
pub fn polyhedron_equal(p: &Polyhedron, q: &Polyhedron, cap: usize) -> Result<bool> {
    let (hp, vp) = p.both(cap)?;
    let (hq, vq) = q.both(cap)?;
    Ok(v_inside_h(&vp, &hq) && v_inside_h(&vq, &hp))
}

/// `conv(points) + K*` where `K*` is the dual of the cone spanned by the
/// given covectors.
pub fn minkowski_sum_hull(points: &[Vec<Rat>], dim: usize, covectors: &[Vec<BigInt>], cap: usize) -> Result<VRep> {
    let dual = cone_generators(dim, covectors, cap)?;
    Ok(VRep { dim, points: points.to_vec(), rays: dual.rays, lines: dual.lines })
}

/// Gaussian elimination over the rationals; returns the row echelon form
/// and the pivot columns.
fn echelon(mut m: Vec<Vec<Rat>>) -> (Vec<Vec<Rat>>, Vec<usize>) {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        let pivot = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, p) in row.iter_mut().zip(&pivot) {
                    *x -= p * &f;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (m, pivots)
}

pub fn rank(m: &[Vec<Rat>]) -> usize {
    echelon(m.to_vec()).1.len()
}

/// Coefficients `c` with `Σ c_i basis_i = x`.
pub fn expand_in_basis(x: &[Rat], basis: &[Vec<Rat>]) -> Result<Vec<Rat>> {
    let d = x.len();
    if basis.len() != d || basis.iter().any(|b| b.len() != d) {
        bail!(Singular, "{} vectors cannot form a basis of a {d}-dimensional space", basis.len());
    }
    // augmented system: columns are basis vectors
    let m: Vec<Vec<Rat>> = (0..d)
        .map(|i| {
            let mut row: Vec<Rat> = basis.iter().map(|b| b[i].clone()).collect();
            row.push(x[i].clone());
            row
        })
        .collect();
    let (e, pivots) = echelon(m);
    if pivots.len() != d || pivots.iter().enumerate().any(|(i, &p)| p != i) {
        bail!(Singular, "vectors do not form a basis");
    }
    Ok(e.into_iter().map(|row| row[d].clone()).collect())
}

/// Inverse of a square rational matrix.
pub fn inverse(m: &[Vec<Rat>]) -> Result<Vec<Vec<Rat>>> {
    let d = m.len();
    if m.iter().any(|r| r.len() != d) {
        bail!(NotSquare, "matrix is not square");
    }
    let aug: Vec<Vec<Rat>> = (0..d)
        .map(|i| {
            let mut row = m[i].clone();
            row.extend((0..d).map(|j| if i == j { Rat::one() } else { Rat::zero() }));
            row
        })
        .collect();
    let (e, pivots) = echelon(aug);
    if pivots.len() < d || pivots[d - 1] >= d {
        bail!(Singular, "matrix is singular");
    }
    Ok(e.into_iter().map(|row| row[d..].to_vec()).collect())
}

/// Exact determinant by fraction-free (Bareiss) elimination.
pub fn determinant(m: &[Vec<BigInt>]) -> Result<BigInt> {
    let n = m.len();
    if m.iter().any(|r| r.len() != n) {
        bail!(NotSquare, "matrix with {n} rows is not square");
    }
    if n == 0 {
        return Ok(BigInt::one());
    }
    let mut a = m.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                return Ok(BigInt::zero());
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    Ok(sign * &a[n - 1][n - 1])
}

pub fn is_unimodular(m: &[Vec<BigInt>]) -> Result<bool> {
    Ok(determinant(m)?.abs().is_one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn square() -> HPolyhedron {
        let mut p = HPolyhedron::new(2);
        p.push_i64(&[1, 0], 0);
        p.push_i64(&[-1, 0], -1);
        p.push_i64(&[0, 1], 0);
        p.push_i64(&[0, -1], -1);
        p
    }

    #[test]
    fn interval_points() {
        let mut p = HPolyhedron::new(1);
        p.push_i64(&[1], 0);
        p.push_i64(&[-1], -3);
        assert_eq!(lattice_points(&p, &[-10], &[10], NODE_BUDGET).unwrap(), vec![vec![0], vec![1], vec![2], vec![3]]);
        let mut e = HPolyhedron::new(1);
        e.push_i64(&[1], 1);
        e.push_i64(&[-1], 0);
        assert!(lattice_points(&e, &[-10], &[10], NODE_BUDGET).unwrap().is_empty());
    }

    #[test]
    fn budget_is_enforced() {
        let p = HPolyhedron::new(3);
        let err = lattice_points(&p, &[0, 0, 0], &[100, 100, 100], 1000).unwrap_err();
        assert_eq!(err.code, crate::Code::BoxTooLarge);
    }

    #[test]
    fn square_vertices_and_equality() {
        let v = h_to_v(&square(), DIM_CAP).unwrap();
        assert_eq!(v.points.len(), 4);
        assert!(v.rays.is_empty() && v.lines.is_empty());
        let sq = Polyhedron::H(square());
        assert!(polyhedron_equal(&sq, &sq, DIM_CAP).unwrap());
        let shifted = Polyhedron::H(square().translate_neg(&rat_vec(&[1, 0])));
        assert!(!polyhedron_equal(&sq, &shifted, DIM_CAP).unwrap());
        let back = Polyhedron::H(v_to_h(&v, DIM_CAP).unwrap());
        assert!(polyhedron_equal(&sq, &back, DIM_CAP).unwrap());
    }

    #[test]
    fn half_strip_differs_from_triangle_plus_ray() {
        // conv{0, e1} + cone{e2} versus conv{0, e1, e1 + e2}
        let a = VRep { dim: 2, points: vec![rat_vec(&[0, 0]), rat_vec(&[1, 0])], rays: vec![int_vec(&[0, 1])], lines: vec![] };
        let b = VRep {
            dim: 2,
            points: vec![rat_vec(&[0, 0]), rat_vec(&[1, 0]), rat_vec(&[1, 1])],
            rays: vec![],
            lines: vec![],
        };
        assert!(!polyhedron_equal(&Polyhedron::V(a), &Polyhedron::V(b), DIM_CAP).unwrap());
    }

    #[test]
    fn dual_cone_hulls() {
        let full: Vec<Vec<BigInt>> = vec![int_vec(&[1, 0]), int_vec(&[-1, 0]), int_vec(&[0, 1]), int_vec(&[0, -1])];
        let h = minkowski_sum_hull(&[rat_vec(&[0, 0])], 2, &full, DIM_CAP).unwrap();
        assert!(h.rays.is_empty() && h.lines.is_empty());

        let h = minkowski_sum_hull(&[rat_vec(&[0, 0])], 2, &[int_vec(&[1, 0])], DIM_CAP).unwrap();
        assert_eq!(h.rays, vec![int_vec(&[1, 0])]);
        assert_eq!(h.lines.len(), 1);

        let h = minkowski_sum_hull(&[rat_vec(&[0, 0]), rat_vec(&[-1, 0])], 2, &[int_vec(&[1, 0])], DIM_CAP).unwrap();
        let mut half = HPolyhedron::new(2);
        half.push_i64(&[1, 0], -1);
        assert!(polyhedron_equal(&Polyhedron::V(h), &Polyhedron::H(half), DIM_CAP).unwrap());
    }

    #[test]
    fn octahedron_vertices() {
        let mut p = HPolyhedron::new(3);
        for sx in [-1, 1] {
            for sy in [-1, 1] {
                for sz in [-1, 1] {
                    p.push_i64(&[sx, sy, sz], -1);
                }
            }
        }
        let v = h_to_v(&p, DIM_CAP).unwrap();
        assert_eq!(v.points.len(), 6);
        let h = v_to_h(&v, DIM_CAP).unwrap();
        assert_eq!(h.rows.len(), 8);
        assert!(polyhedron_equal(&Polyhedron::H(p), &Polyhedron::V(v), DIM_CAP).unwrap());
    }

    #[test]
    fn dim_cap() {
        let p = HPolyhedron::new(12);
        assert_eq!(h_to_v(&p, DIM_CAP).unwrap_err().code, crate::Code::DimCapExceeded);
    }

    #[test]
    fn unimodularity() {
        assert!(is_unimodular(&[int_vec(&[1, 0]), int_vec(&[0, 1])]).unwrap());
        assert!(!is_unimodular(&[int_vec(&[1, 0]), int_vec(&[0, 2])]).unwrap());
        assert_eq!(is_unimodular(&[int_vec(&[1, 0])]).unwrap_err().code, crate::Code::NotSquare);
        assert_eq!(determinant(&[int_vec(&[2, 1, 0]), int_vec(&[1, 3, 1]), int_vec(&[0, 1, 4])]).unwrap(), BigInt::from(18));
    }

    #[test]
    fn expand_unit_basis() {
        let basis = vec![rat_vec(&[1, 0]), rat_vec(&[0, 1])];
        assert_eq!(expand_in_basis(&rat_vec(&[1, 1]), &basis).unwrap(), rat_vec(&[1, 1]));
        let bad = vec![rat_vec(&[1, 1]), rat_vec(&[2, 2])];
        assert_eq!(expand_in_basis(&rat_vec(&[1, 1]), &bad).unwrap_err().code, crate::Code::Singular);
    }

    fn brute(p: &HPolyhedron, lo: &[i64], hi: &[i64]) -> Vec<Vec<i64>> {
        let mut out = Vec::new();
        let mut x = lo.to_vec();
        loop {
            if p.contains_int(&x) {
                out.push(x.clone());
            }
            let mut k = x.len();
            loop {
                if k == 0 {
                    return out;
                }
                k -= 1;
                if x[k] < hi[k] {
                    x[k] += 1;
                    x[k + 1..].copy_from_slice(&lo[k + 1..]);
                    break;
                }
            }
        }
    }

    proptest! {
        #[test]
        fn enumeration_matches_brute_force(rows in proptest::collection::vec((proptest::collection::vec(-2i64..=2, 3), -4i64..=4), 1..6)) {
            let mut p = HPolyhedron::new(3);
            for (a, b) in &rows {
                p.push_i64(a, *b);
            }
            let lo = [-3, -3, -3];
            let hi = [3, 3, 3];
            prop_assert_eq!(lattice_points(&p, &lo, &hi, NODE_BUDGET).unwrap(), brute(&p, &lo, &hi));
        }

        #[test]
        fn expand_recombines(v in proptest::collection::vec(-5i64..=5, 3), diag in proptest::collection::vec(1i64..=3, 3), off in -3i64..=3) {
            let basis = vec![rat_vec(&[diag[0], off, 0]), rat_vec(&[0, diag[1], 0]), rat_vec(&[off, 0, diag[2]])];
            let x = rat_vec(&v);
            if let Ok(c) = expand_in_basis(&x, &basis) {
                let back: Vec<Rat> = (0..3).map(|i| (0..3).map(|j| &c[j] * &basis[j][i]).fold(Rat::zero(), |a, b| a + b)).collect();
                prop_assert_eq!(back, x);
            }
        }

        #[test]
        fn hv_round_trip(rows in proptest::collection::vec((proptest::collection::vec(-2i64..=2, 2), -3i64..=3), 1..5)) {
            let mut p = HPolyhedron::new(2);
            for (a, b) in &rows {
                p.push_i64(a, *b);
            }
            // bound it so the polytope is compact
            for (a, b) in [([1, 0], -4), ([-1, 0], -4), ([0, 1], -4), ([0, -1], -4)] {
                p.push_i64(&a, b);
            }
            let v = h_to_v(&p, DIM_CAP).unwrap();
            let h = v_to_h(&v, DIM_CAP).unwrap();
            let pts = |q: &HPolyhedron| lattice_points(q, &[-5, -5], &[5, 5], NODE_BUDGET).unwrap();
            prop_assert_eq!(pts(&p), pts(&h));
        }
    }
}
