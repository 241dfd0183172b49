//! The idempotent semialgebra `S_𝓜`.
//!
//! An element is `∞` or a finite set of lattice elements; two sets are equal
//! when every point of `𝓜` has the same minimum on both. For the families
//! with a dual lattice this is decided exactly, one maximal dual cone at a
//! time: on a chart where the cone's points are linear they form a cone `K`
//! of covectors, and equal minima over `K` means equal `conv(·) + K*`.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::Result;
use crate::geometry::{self, rat, Polyhedron, VRep};
use crate::polyptych::{for_each_box_point, MElement, Polyptych};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum SElem {
    Infinity,
    Set(BTreeSet<MElement>),
}

impl SElem {
    pub fn single(m: MElement) -> Self {
        SElem::Set(BTreeSet::from([m]))
    }

    pub fn zero(d: usize) -> Self {
        SElem::single(MElement::zero(d))
    }


    pub fn generators(&self) -> Option<&BTreeSet<MElement>> {
        match self {
            SElem::Infinity => None,
            SElem::Set(s) => Some(s),
        }
    }
}

impl FromIterator<MElement> for SElem {
    /// The empty set is `∞`.
    fn from_iter<I: IntoIterator<Item = MElement>>(it: I) -> Self {
        let s: BTreeSet<MElement> = it.into_iter().collect();
        if s.is_empty() {
            SElem::Infinity
        } else {
            SElem::Set(s)
        }
    }
}

pub fn oplus(a: &SElem, b: &SElem) -> SElem {
    match (a, b) {
        (SElem::Infinity, x) | (x, SElem::Infinity) => x.clone(),
        (SElem::Set(x), SElem::Set(y)) => SElem::Set(x.union(y).cloned().collect()),
    }
}

/// `A ⋆ B = ⋃ Υ(a, b)`.
pub fn star(m: &Polyptych, a: &SElem, b: &SElem) -> SElem {
    match (a, b) {
        (SElem::Infinity, _) | (_, SElem::Infinity) => SElem::Infinity,
        (SElem::Set(x), SElem::Set(y)) => {
            let mut out = BTreeSet::new();
            for p in x {
                for q in y {
                    out.extend(m.upsilon(p, q));
                }
            }
            SElem::Set(out)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    /// Compare minima of all dual elements with `|y_i| ≤ r` and of the
    /// structural points.
    Sampled(i64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Equal,
    NotEqual,
    /// Sampled mode found no separating point up to the given radius.
    Inconclusive(i64),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        !matches!(self, Verdict::NotEqual)
    }
}

/// Exact comparison engine; caches the dual cones per sign vector.
pub struct Comparator<'a> {
    m: &'a Polyptych,
    cones: Vec<(crate::mco::Chart, VRep)>,
}

impl<'a> Comparator<'a> {
    pub fn new(m: &'a Polyptych) -> Result<Self> {
        let dd = m.dual()?;
        let k = dd.hat_circ.len();
        let d = m.dim();
        let mut cones = Vec::new();
        for bits in 0..1u64 << k {
            let signs: Vec<i8> = (0..k).map(|i| if bits >> i & 1 == 1 { 1 } else { -1 }).collect();
            let chart = m.chart_for_signs(&signs)?;
            let cov = m.chart_covectors(chart)?;
            let dual = geometry::minkowski_sum_hull(&[], d, &cov, geometry::DIM_CAP)?;
            cones.push((chart, dual));
        }
        Ok(Comparator { m, cones })
    }

    pub fn equal(&self, a: &SElem, b: &SElem) -> Result<bool> {
        let (x, y) = match (a, b) {
            (SElem::Infinity, SElem::Infinity) => return Ok(true),
            (SElem::Set(x), SElem::Set(y)) => (x, y),
            _ => return Ok(false),
        };
        if x == y {
            return Ok(true);
        }
        for (chart, dual) in &self.cones {
            let hull = |s: &BTreeSet<MElement>| VRep {
                dim: dual.dim,
                points: s.iter().map(|e| self.m.chart_coord(e, *chart).into_iter().map(rat).collect()).collect(),
                rays: dual.rays.clone(),
                lines: dual.lines.clone(),
            };
            if !geometry::polyhedron_equal(&Polyhedron::V(hull(x)), &Polyhedron::V(hull(y)), geometry::DIM_CAP)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Drops generators that lie in the hull of the others.
    pub fn canonical(&self, a: &SElem) -> Result<SElem> {
        let SElem::Set(s) = a else { return Ok(SElem::Infinity) };
        let mut cur: Vec<MElement> = s.iter().cloned().collect();
        let mut i = 0;
        while i < cur.len() && cur.len() > 1 {
            let without: BTreeSet<MElement> = cur.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, e)| e.clone()).collect();
            let with: BTreeSet<MElement> = cur.iter().cloned().collect();
            if self.equal(&SElem::Set(without), &SElem::Set(with))? {
                cur.remove(i);
            } else {
                i += 1;
            }
        }
        Ok(SElem::from_iter(cur))
    }
}

/// Point-convex-hull equality.
pub fn equal(m: &Polyptych, a: &SElem, b: &SElem, mode: Mode) -> Result<Verdict> {
    match mode {
        Mode::Exact => Ok(if Comparator::new(m)?.equal(a, b)? { Verdict::Equal } else { Verdict::NotEqual }),
        Mode::Sampled(r) => Ok(if sampled_equal(m, a, b, r)? { Verdict::Inconclusive(r) } else { Verdict::NotEqual }),
    }
}

fn sampled_equal(m: &Polyptych, a: &SElem, b: &SElem, r: i64) -> Result<bool> {
    let (x, y) = match (a, b) {
        (SElem::Infinity, SElem::Infinity) => return Ok(true),
        (SElem::Set(x), SElem::Set(y)) => (x, y),
        _ => return Ok(false),
    };
    for phi in m.structural_points() {
        let min = |s: &BTreeSet<MElement>| s.iter().map(|e| m.eval_structural(phi, &e.0)).min();
        if min(x) != min(y) {
            return Ok(false);
        }
    }
    if m.dual().is_err() {
        return Ok(true);
    }
    let d = m.dim();
    let mut ok = true;
    let mut err = None;
    for_each_box_point(&vec![-r; d], &vec![r; d], |yv| {
        if !ok || err.is_some() {
            return;
        }
        match m.dual_complete(yv) {
            Ok(n) => {
                let min = |s: &BTreeSet<MElement>| s.iter().map(|e| m.eval_dual(&n, &e.0).unwrap()).min();
                if min(x) != min(y) {
                    ok = false;
                }
            }
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(ok)
}

/// `A ≤ B` iff `A ⊕ B ≡ A`.
pub fn leq(c: &Comparator, a: &SElem, b: &SElem) -> Result<bool> {
    c.equal(&oplus(a, b), a)
}

/// Minimum of a point over an element (`None` for `∞`).
pub fn min_of(a: &SElem, f: impl Fn(&MElement) -> i64) -> Option<i64> {
    a.generators().and_then(|s| s.iter().map(f).min())
}

/// Integer covector data per representative chart, for reports.
pub fn cone_summary(c: &Comparator) -> BTreeMap<String, usize> {
    c.cones
        .iter()
        .map(|(chart, v)| (chart.label(&c.m.poset), v.rays.len() + 2 * v.lines.len()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marked_poset::{gt_type_a, gt_type_c};
    use crate::mco::Chart;
    use proptest::prelude::*;

    fn c2() -> Polyptych {
        Polyptych::new(&gt_type_c(2, &[2, 4]).unwrap())
    }

    #[test]
    fn identities() {
        let m = c2();
        let a = SElem::from_iter([MElement(vec![1, 0, -1, 2]), MElement(vec![0, 1, 0, 0])]);
        assert_eq!(oplus(&a, &SElem::Infinity), a);
        assert_eq!(star(&m, &a, &SElem::Infinity), SElem::Infinity);
        let cmp = Comparator::new(&m).unwrap();
        assert!(cmp.equal(&star(&m, &a, &SElem::zero(4)), &a).unwrap());
        assert!(cmp.equal(&oplus(&a, &a), &a).unwrap());
    }

    #[test]
    fn middle_point_is_redundant() {
        let m = c2();
        let cmp = Comparator::new(&m).unwrap();
        let e = MElement(vec![1, -2, 0, 1]);
        let three = SElem::from_iter([MElement::zero(4), e.clone(), e.scale(2)]);
        let two = SElem::from_iter([MElement::zero(4), e.scale(2)]);
        assert!(cmp.equal(&three, &two).unwrap());
        assert_eq!(cmp.canonical(&three).unwrap(), two);
        let other = SElem::from_iter([MElement::zero(4), e.clone()]);
        assert!(!cmp.equal(&other, &two).unwrap());
    }

    #[test]
    fn epsilon_products_match_relations() {
        for m in [c2(), Polyptych::new(&gt_type_a(2, &[0, 2, 4]).unwrap())] {
            let cmp = Comparator::new(&m).unwrap();
            let dd = m.dual().unwrap().clone();
            for p in 0..m.dim() {
                let he = m.hat_e(p).unwrap();
                let prod = star(&m, &SElem::single(he.clone()), &SElem::single(he.neg()));
                let expected = match dd.tail[p] {
                    None => SElem::zero(m.dim()),
                    Some(t) => {
                        let mut tail = m.hat_e(t.upper).unwrap().neg();
                        if let Some(x) = t.x_part {
                            tail = m.add_in_chart(&tail, &m.hat_e(x).unwrap(), Chart::EMPTY);
                        }
                        SElem::from_iter([MElement::zero(m.dim()), tail])
                    }
                };
                assert!(cmp.equal(&prod, &expected).unwrap(), "{}", m.poset.coord_name(p));
            }
        }
    }

    #[test]
    fn exact_and_sampled_agree() {
        let m = c2();
        let cmp = Comparator::new(&m).unwrap();
        let pairs = m.sample_pairs(3, 9, 12, 2);
        for (x, y) in pairs.chunks(2).map(|c| (c[0].clone(), c[1].clone())) {
            let a = SElem::from_iter([x.0.clone(), x.1.clone()]);
            let b = oplus(&SElem::from_iter([x.0.clone()]), &SElem::from_iter([y.0.clone(), x.1.clone()]));
            let exact = cmp.equal(&a, &b).unwrap();
            let sampled = sampled_equal(&m, &a, &b, 6).unwrap();
            assert_eq!(exact, sampled);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn star_laws(v in proptest::collection::vec(-2i64..=2, 12)) {
            let m = c2();
            let cmp = Comparator::new(&m).unwrap();
            let a = SElem::single(MElement(v[0..4].to_vec()));
            let b = SElem::single(MElement(v[4..8].to_vec()));
            let c = SElem::single(MElement(v[8..12].to_vec()));
            prop_assert!(cmp.equal(&star(&m, &a, &b), &star(&m, &b, &a)).unwrap());
            prop_assert!(cmp.equal(&star(&m, &star(&m, &a, &b), &c), &star(&m, &a, &star(&m, &b, &c))).unwrap());
            prop_assert!(cmp.equal(&star(&m, &a, &oplus(&b, &c)), &oplus(&star(&m, &a, &b), &star(&m, &a, &c))).unwrap());
            prop_assert!(cmp.equal(&oplus(&a, &oplus(&b, &c)), &oplus(&oplus(&a, &b), &c)).unwrap());
            let ab = oplus(&a, &b);
            prop_assert!(leq(&cmp, &ab, &a).unwrap());
        }
    }
}
