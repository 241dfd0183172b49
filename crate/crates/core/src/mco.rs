//! Marked chain-order polytopes, the transfer maps between them and their
//! linear parts, the mutations `μ_C`.
//!
//! A chart is a subset `C` of the unmarked elements, stored as a bitmask over
//! the coordinate order of [`MarkedPoset::coords`]. Coordinates of the
//! remaining unmarked elements form the order part `O`.

use std::collections::BTreeSet;
use std::fmt::Debug;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{bail, Result};
use crate::geometry::{lattice_points, rat, HPolyhedron, Rat};
use crate::marked_poset::MarkedPoset;

/// Scalar type the piecewise-linear maps are evaluated over.
pub trait Coord: Clone + Ord + Debug + Add<Output = Self> + Sub<Output = Self> + Neg<Output = Self> {
    fn zero() -> Self;
    fn from_i64(x: i64) -> Self;
}

impl Coord for i64 {
    fn zero() -> Self {
        0
    }
    fn from_i64(x: i64) -> Self {
        x
    }
}

impl Coord for Rat {
    fn zero() -> Self {
        Zero::zero()
    }
    fn from_i64(x: i64) -> Self {
        rat(x)
    }
}

/// Subset of the coordinates, as a bitmask in coordinate order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Chart(pub u64);

impl Chart {
    pub const EMPTY: Chart = Chart(0);

    pub fn full(d: usize) -> Chart {
        Chart(if d >= 64 { u64::MAX } else { (1u64 << d) - 1 })
    }

    pub fn contains(&self, c: usize) -> bool {
        self.0 >> c & 1 == 1
    }

    pub fn with(self, c: usize) -> Chart {
        Chart(self.0 | 1 << c)
    }

    pub fn is_subset(&self, other: Chart) -> bool {
        self.0 & !other.0 == 0
    }

    /// All `2^d` charts in increasing bitmask order.
    pub fn all(d: usize) -> impl Iterator<Item = Chart> {
        assert!(d < 32, "chart enumeration is limited to fewer than 32 coordinates");
        (0..1u64 << d).map(Chart)
    }

    pub fn names(&self, poset: &MarkedPoset) -> Vec<String> {
        (0..poset.dim()).filter(|&c| self.contains(c)).map(|c| poset.coord_name(c).to_string()).collect()
    }

    pub fn label(&self, poset: &MarkedPoset) -> String {
        let n = self.names(poset);
        if n.is_empty() {
            "∅".to_string()
        } else {
            format!("{{{}}}", n.join(","))
        }
    }

    /// Parses a comma-separated list of element names; commas inside braces
    /// belong to the name. Compact aliases such as `q31` for `q_{3,1}` are
    /// accepted. The empty string is `∅`.
    pub fn parse(poset: &MarkedPoset, s: &str) -> Result<Chart> {
        let mut chart = Chart::EMPTY;
        for token in split_names(s) {
            let Some(e) = resolve_name(poset, &token) else {
                bail!(BadInput, "unknown element {token:?} in chart");
            };
            let Some(c) = poset.coord_of(e) else {
                bail!(BadInput, "chart element {token} is marked");
            };
            chart = chart.with(c);
        }
        Ok(chart)
    }
}

/// Splits on commas that are not inside braces, dropping empty pieces.
pub fn split_names(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '{' => depth += 1,
            '}' => depth -= 1,
            ',' if depth == 0 => {
                out.push(std::mem::take(&mut cur));
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    out.push(cur);
    out.into_iter().map(|t| t.trim().to_string()).filter(|t| !t.is_empty()).collect()
}

fn compact(name: &str) -> String {
    name.chars().filter(|c| !matches!(c, '_' | '{' | '}' | ',' | ' ')).collect()
}

/// Exact name, or the unique element whose compact form matches.
pub fn resolve_name(poset: &MarkedPoset, token: &str) -> Option<usize> {
    poset.element(token).or_else(|| {
        let key = compact(token);
        let hits: Vec<usize> = (0..poset.len()).filter(|&e| compact(poset.name(e)) == key).collect();
        (hits.len() == 1).then(|| hits[0])
    })
}

/// A lower cover of a coordinate: another coordinate or a marked element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lower {
    Coord(usize),
    Marked(i64),
}

/// Lower-cover data in coordinate form; evaluates transfer maps and
/// mutations on any [`Coord`] scalar.
#[derive(Debug, Clone)]
pub struct Transfer {
    lower: Vec<Vec<Lower>>,
}

impl Transfer {
    pub fn new(poset: &MarkedPoset) -> Self {
        let lower = poset
            .coords()
            .iter()
            .map(|&p| {
                poset
                    .lower_covers(p)
                    .iter()
                    .map(|&q| match poset.coord_of(q) {
                        Some(c) => Lower::Coord(c),
                        None => Lower::Marked(poset.marking(q).expect("non-coordinates are marked")),
                    })
                    .collect()
            })
            .collect();
        Transfer { lower }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self, c: usize) -> &[Lower] {
        &self.lower[c]
    }

    /// `min({−x_q} ∪ {−λ_q or 0})` over the lower covers of `c`.
    fn shift<T: Coord>(&self, c: usize, x: &[T], affine: bool) -> T {
        self.lower[c]
            .iter()
            .map(|l| match *l {
                Lower::Coord(q) => -x[q].clone(),
                Lower::Marked(lam) => {
                    if affine {
                        T::from_i64(-lam)
                    } else {
                        T::zero()
                    }
                }
            })
            .min()
            .expect("unmarked elements have lower covers")
    }

    fn forward<T: Coord>(&self, chart: Chart, x: &[T], affine: bool) -> Vec<T> {
        (0..x.len())
            .map(|c| if chart.contains(c) { x[c].clone() + self.shift(c, x, affine) } else { x[c].clone() })
            .collect()
    }

    fn backward<T: Coord>(&self, chart: Chart, y: &[T], affine: bool) -> Vec<T> {
        let mut x: Vec<T> = y.to_vec();
        for c in 0..y.len() {
            if chart.contains(c) {
                // lower covers have smaller coordinate index, so already recovered
                x[c] = y[c].clone() - self.shift(c, &x, affine);
            }
        }
        x
    }

    /// The transfer map `φ_{C,O}`.
    pub fn transfer<T: Coord>(&self, chart: Chart, x: &[T]) -> Vec<T> {
        self.forward(chart, x, true)
    }

    pub fn transfer_inverse<T: Coord>(&self, chart: Chart, y: &[T]) -> Vec<T> {
        self.backward(chart, y, true)
    }

    /// The mutation `μ_C = μ_{∅,C}`.
    pub fn mu<T: Coord>(&self, chart: Chart, x: &[T]) -> Vec<T> {
        self.forward(chart, x, false)
    }

    pub fn mu_inverse<T: Coord>(&self, chart: Chart, y: &[T]) -> Vec<T> {
        self.backward(chart, y, false)
    }

    /// `μ_{C₁,C₂} = μ_{C₂} ∘ μ_{C₁}⁻¹`.
    pub fn mu_between<T: Coord>(&self, from: Chart, to: Chart, x: &[T]) -> Vec<T> {
        self.mu(to, &self.mu_inverse(from, x))
    }
}

/// The marked chain-order polytope `Δ_{C,O}` as an H-polyhedron over the
/// coordinates. Every saturated chain `a ⋖ p₁ ⋖ … ⋖ p_ℓ ⋖ b` with all `pᵢ`
/// in `C` and `a, b` outside `C` gives one row; redundant rows are kept.
pub fn build_mco(poset: &MarkedPoset, chart: Chart) -> HPolyhedron {
    let d = poset.dim();
    let mut h = HPolyhedron::new(d);
    let in_chart = |e: usize| poset.coord_of(e).is_some_and(|c| chart.contains(c));
    for c in 0..d {
        if chart.contains(c) {
            let mut a = vec![BigInt::zero(); d];
            a[c] = BigInt::from(1);
            h.push(a, rat(0));
        }
    }
    let mut seen = BTreeSet::new();
    for start in 0..poset.len() {
        if in_chart(start) {
            continue;
        }
        let mut stack: Vec<(usize, Vec<usize>)> = vec![(start, Vec::new())];
        while let Some((top, chain)) = stack.pop() {
            for &p in poset.upper_covers(top) {
                if in_chart(p) {
                    let mut next = chain.clone();
                    next.push(poset.coord_of(p).unwrap());
                    stack.push((p, next));
                    continue;
                }
                let mut a = vec![0i64; d];
                let mut rhs = 0i64;
                match poset.coord_of(p) {
                    Some(c) => a[c] += 1,
                    None => rhs -= poset.marking(p).unwrap(),
                }
                match poset.coord_of(start) {
                    Some(c) => a[c] -= 1,
                    None => rhs += poset.marking(start).unwrap(),
                }
                for &c in &chain {
                    a[c] -= 1;
                }
                if a.iter().all(|&x| x == 0) {
                    continue;
                }
                if seen.insert((a.clone(), rhs)) {
                    h.push_i64(&a, rhs);
                }
            }
        }
    }
    h
}

/// `φ_{C,O}(u)` on the coordinates.
pub fn translation(poset: &MarkedPoset, u: &[i64], chart: Chart) -> Vec<i64> {
    Transfer::new(poset).transfer(chart, u)
}

/// `Δ̂_C = Δ_{C,O} − φ_{C,O}(u)`, with `u` given on the coordinates.
pub fn hat_delta(poset: &MarkedPoset, u: &[i64], chart: Chart) -> HPolyhedron {
    let t: Vec<Rat> = translation(poset, u, chart).into_iter().map(rat).collect();
    build_mco(poset, chart).translate_neg(&t)
}

/// Integer box containing `k·Δ̂_C`: order coordinates in `[min λ, max λ]`,
/// chain coordinates in `[0, max λ − min λ]`, translated and dilated.
pub fn hat_box(poset: &MarkedPoset, u: &[i64], chart: Chart, k: i64) -> (Vec<i64>, Vec<i64>) {
    let vals = poset.marked_values();
    let (lmin, lmax) = (
        vals.iter().copied().min().unwrap_or(0),
        vals.iter().copied().max().unwrap_or(0),
    );
    let t = translation(poset, u, chart);
    let mut lo = Vec::with_capacity(t.len());
    let mut hi = Vec::with_capacity(t.len());
    for (c, tc) in t.iter().enumerate() {
        let (a, b) = if chart.contains(c) { (0, lmax - lmin) } else { (lmin, lmax) };
        lo.push(k * (a - tc));
        hi.push(k * (b - tc));
    }
    (lo, hi)
}

/// Lattice points of `k·Δ̂_C`, lexicographically sorted.
pub fn hat_points(poset: &MarkedPoset, u: &[i64], chart: Chart, k: i64, budget: u64) -> Result<Vec<Vec<i64>>> {
    let (lo, hi) = hat_box(poset, u, chart, k);
    lattice_points(&hat_delta(poset, u, chart).dilate(k), &lo, &hi, budget)
}

/// Lattice points of `k·Δ_{C,O}` (untranslated).
pub fn mco_points(poset: &MarkedPoset, chart: Chart, k: i64, budget: u64) -> Result<Vec<Vec<i64>>> {
    let vals = poset.marked_values();
    let (lmin, lmax) = (vals.iter().copied().min().unwrap_or(0), vals.iter().copied().max().unwrap_or(0));
    let (lo, hi): (Vec<i64>, Vec<i64>) = (0..poset.dim())
        .map(|c| if chart.contains(c) { (0, k * (lmax - lmin)) } else { (k * lmin, k * lmax) })
        .unzip();
    lattice_points(&build_mco(poset, chart).dilate(k), &lo, &hi, budget)
}

#[derive(Debug, Clone, Serialize)]
pub struct ChartCount {
    pub chart: Vec<String>,
    pub direct: usize,
    pub image: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BijectionReport {
    pub k: i64,
    pub pass: bool,
    pub charts: Vec<ChartCount>,
}

/// For every chart: enumerates `k·Δ̂_C` directly and as the `μ_C` image of
/// `k·Δ̂_∅`, checking that the image is injective, lands inside, and has the
/// same size.
pub fn verify_transfer_bijection(poset: &MarkedPoset, u: &[i64], k: i64, budget: u64) -> Result<BijectionReport> {
    let tr = Transfer::new(poset);
    let base = hat_points(poset, u, Chart::EMPTY, k, budget)?;
    let mut charts = Vec::new();
    for chart in Chart::all(poset.dim()) {
        let direct: BTreeSet<Vec<i64>> = hat_points(poset, u, chart, k, budget)?.into_iter().collect();
        let image: BTreeSet<Vec<i64>> = base.iter().map(|x| tr.mu(chart, x)).collect();
        let pass = image.len() == base.len() && image == direct;
        charts.push(ChartCount { chart: chart.names(poset), direct: direct.len(), image: image.len(), pass });
    }
    Ok(BijectionReport { k, pass: charts.iter().all(|c| c.pass), charts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::NODE_BUDGET;
    use crate::marked_poset::{gt_type_a, gt_type_c};

    fn a2() -> MarkedPoset {
        gt_type_a(2, &[0, 2, 4]).unwrap()
    }

    #[test]
    fn order_polytope_rows() {
        let p = a2();
        let h = build_mco(&p, Chart::EMPTY);
        let mut rows: Vec<(Vec<i64>, i64)> = h
            .rows
            .iter()
            .map(|(a, b)| (a.iter().map(|x| i64::try_from(x).unwrap()).collect(), i64::try_from(b.to_integer()).unwrap()))
            .collect();
        rows.sort();
        let mut expected = vec![
            (vec![1, 0, 0], 0),
            (vec![-1, 1, 0], 0),
            (vec![-1, 0, 0], -2),
            (vec![0, -1, 1], 0),
            (vec![0, 0, 1], 2),
            (vec![0, 0, -1], -4),
        ];
        expected.sort();
        assert_eq!(rows, expected);
    }

    #[test]
    fn chain_polytope_a1() {
        let p = gt_type_a(1, &[0, 3]).unwrap();
        let h = build_mco(&p, Chart::full(1));
        assert_eq!(mco_points(&p, Chart::full(1), 1, NODE_BUDGET).unwrap().len(), 4);
        assert!(h.contains_int(&[0]) && h.contains_int(&[3]) && !h.contains_int(&[4]));
    }

    #[test]
    fn chart_through_top() {
        let p = a2();
        let chart = Chart::parse(&p, "q31").unwrap();
        let h = build_mco(&p, chart);
        // x31 ≤ λ3 − x21 and x31 ≤ λ3 − λ2
        assert!(h.rows.contains(&(crate::geometry::int_vec(&[0, -1, -1]), rat(-4))));
        assert!(h.rows.contains(&(crate::geometry::int_vec(&[0, 0, -1]), rat(-2))));
    }

    #[test]
    fn transfer_examples() {
        let p = a2();
        let tr = Transfer::new(&p);
        let c31 = Chart::parse(&p, "q_{3,1}").unwrap();
        assert_eq!(tr.transfer(c31, &[0i64, 2, 3]), vec![0, 2, 1]);
        assert_eq!(tr.transfer_inverse(c31, &[0i64, 2, 1]), vec![0, 2, 3]);
        assert_eq!(tr.transfer(Chart::EMPTY, &[5i64, -1, 7]), vec![5, -1, 7]);
        let c12 = Chart::parse(&p, "q12").unwrap();
        assert_eq!(tr.transfer(c12, &[3i64, 0, 0])[0], 3);
        assert_eq!(tr.mu(c31, &[0i64, 1, 0]), vec![0, 1, -1]);
        let u = [1i64, 2, 3];
        let a = [0i64, 1, 0];
        let sum: Vec<i64> = a.iter().zip(&u).map(|(x, y)| x + y).collect();
        let lhs: Vec<i64> = tr.transfer(c31, &sum).iter().zip(tr.transfer(c31, &u)).map(|(x, y)| x - y).collect();
        assert_eq!(lhs, vec![0, 1, -1]);
    }

    #[test]
    fn hat_translation_and_interior() {
        let p = a2();
        let c31 = Chart::parse(&p, "q31").unwrap();
        assert_eq!(translation(&p, &[1, 2, 3], c31), vec![1, 2, 1]);
        let zero = vec![rat(0); 3];
        for chart in Chart::all(3) {
            assert!(hat_delta(&p, &[1, 2, 3], chart).contains_strictly(&zero));
        }
    }

    #[test]
    fn bijection_counts() {
        let p = a2();
        let r = verify_transfer_bijection(&p, &[1, 2, 3], 1, NODE_BUDGET).unwrap();
        assert!(r.pass);
        assert!(r.charts.iter().all(|c| c.direct == 27));
        let c1 = gt_type_c(1, &[2]).unwrap();
        let r = verify_transfer_bijection(&c1, &[1], 1, NODE_BUDGET).unwrap();
        assert!(r.pass && r.charts.iter().all(|c| c.direct == 3));
        let a1 = gt_type_a(1, &[0, 3]).unwrap();
        let r = verify_transfer_bijection(&a1, &[1], 2, NODE_BUDGET).unwrap();
        assert!(r.pass && r.charts.iter().all(|c| c.direct == 7));
    }

    #[test]
    fn chart_parsing() {
        let p = a2();
        assert_eq!(Chart::parse(&p, "").unwrap(), Chart::EMPTY);
        assert_eq!(Chart::parse(&p, "q_{3,1},q_{2,1}").unwrap(), Chart(0b110));
        assert_eq!(Chart::parse(&p, "q31, q21").unwrap(), Chart(0b110));
        assert!(Chart::parse(&p, "q*_1").is_err());
        assert!(Chart::parse(&p, "nope").is_err());
    }
}
