//! Graded pieces of the compactified algebra, their Hilbert function against
//! chart Ehrhart counts, chart valuations and divisor orders.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use serde_json::{json, Value};

use crate::algebra::{Algebra, Elem, Monomial};
use crate::error::{bail, Result};
use crate::geometry::{self, rat, HPolyhedron};
use crate::mco::{self, Chart};
use crate::polyptych::{for_each_box_point, DualElement, DualGen, MElement, Polyptych, StructuralPoint};
use crate::rng;
use crate::semialgebra::SElem;

/// Standard monomials `b` with `m_b ∈ kΔ̂`.
#[derive(Debug, Clone, Serialize)]
pub struct GradedPiece {
    pub k: i64,
    #[serde(skip)]
    pub basis: Vec<Monomial>,
    pub dimension: usize,
}

pub struct Degeneration {
    pub alg: Algebra,
    pub m: Polyptych,
    pub u: Vec<i64>,
    pub budget: u64,
    hat: Vec<(Vec<i64>, i64)>,
}

fn integer_rows(h: &HPolyhedron) -> Vec<(Vec<i64>, i64)> {
    use num_integer::Integer;
    h.rows
        .iter()
        .map(|(a, b)| {
            let a: Vec<i64> = a.iter().map(|v| i64::try_from(v).expect("small coefficients")).collect();
            let b = b.numer().div_ceil(b.denom());
            (a, i64::try_from(&b).expect("small bound"))
        })
        .collect()
}

impl Degeneration {
    /// Uses the strict rank-constant shift vector, so `0` is interior.
    pub fn new(alg: Algebra, budget: u64) -> Result<Self> {
        let u = alg.poset.choose_u(true)?.coords(&alg.poset);
        let m = Polyptych::new(&alg.poset);
        let hat = integer_rows(&mco::hat_delta(&alg.poset, &u, Chart::EMPTY));
        Ok(Degeneration { alg, m, u, budget, hat })
    }

    fn spread(&self) -> i64 {
        let v = self.alg.poset.marked_values();
        v.iter().max().unwrap() - v.iter().min().unwrap()
    }

    fn in_hat(&self, x: &[i64], k: i64) -> bool {
        self.hat.iter().all(|(a, b)| a.iter().zip(x).map(|(a, x)| a * x).sum::<i64>() >= k * b)
    }

    /// Enumerates the `ĥe`-coefficient box `|a_p − b_p| ≤ k · spread` and
    /// keeps the monomials whose image lies in `kΔ̂_∅`.
    pub fn gamma(&self, k: i64) -> Result<GradedPiece> {
        let d = self.alg.dim();
        let r = k * self.spread();
        let size = (2 * r + 1) as f64;
        if size.powi(d as i32) > self.budget as f64 {
            bail!(BoxTooLarge, "degree {k} exponent box has more than {} points", self.budget);
        }
        let mut basis = Vec::new();
        for_each_box_point(&vec![-r; d], &vec![r; d], |c| {
            let b = Monomial::from_diff(c);
            if self.in_hat(&self.alg.monomial_to_m(&b).0, k) {
                basis.push(b);
            }
        });
        Ok(GradedPiece { k, dimension: basis.len(), basis })
    }

    pub fn ehrhart(&self, chart: Chart, k: i64) -> Result<usize> {
        Ok(mco::hat_points(&self.alg.poset, &self.u, chart, k, self.budget)?.len())
    }

    /// Hilbert function against all chart Ehrhart counts for `k ≤ kmax`, plus
    /// the degree-one generation shadow for `k ≤ gen_max`.
    pub fn hilbert_vs_ehrhart(&self, kmax: i64, gen_max: i64) -> Result<HilbertReport> {
        let mut rows = Vec::new();
        let mut pieces: Vec<GradedPiece> = Vec::new();
        for k in 0..=kmax {
            let g = self.gamma(k)?;
            let mut charts = BTreeMap::new();
            for chart in Chart::all(self.alg.dim()) {
                charts.insert(chart.label(&self.alg.poset), self.ehrhart(chart, k)?);
            }
            let agree = charts.values().all(|&c| c == g.dimension);
            rows.push(HilbertRow { k, gamma: g.dimension, agree, charts });
            pieces.push(g);
        }
        let mut generation = Vec::new();
        for k in 2..=gen_max.min(kmax) {
            generation.push(self.generation_shadow(&pieces, k as usize));
        }
        let pass = rows.iter().all(|r| r.agree) && generation.iter().all(|g| g.pass);
        Ok(HilbertReport { pass, u: self.u.clone(), rows, generation })
    }

    /// Every degree-`k` basis monomial appears in some product of a degree-1
    /// and a degree-`(k−1)` basis monomial, and no product leaves degree `k`.
    fn generation_shadow(&self, pieces: &[GradedPiece], k: usize) -> GenerationRow {
        let target: BTreeSet<&Monomial> = pieces[k].basis.iter().collect();
        let mut hit = BTreeSet::new();
        let mut escapes = 0;
        for b1 in &pieces[1].basis {
            for b2 in &pieces[k - 1].basis {
                let prod = self.alg.multiply(&Elem::term(b1.clone(), rat(1)), &Elem::term(b2.clone(), rat(1)));
                for b in prod.support() {
                    if target.contains(b) {
                        hit.insert(b.clone());
                    } else {
                        escapes += 1;
                    }
                }
            }
        }
        let gaps = target.len() - hit.len();
        GenerationRow { k: k as i64, basis: target.len(), gaps, escapes, pass: gaps == 0 && escapes == 0 }
    }

    /// `ρ̃` for a chart: the generators of the dual cone `σ′_{ε(C)}`, with the
    /// matrix of their covectors in chart coordinates.
    pub fn chart_valuation_basis(&self, chart: Chart) -> Result<ValuationBasis> {
        let signs = self.m.chart_signs(chart)?;
        let gens = self.m.dual_cone_generators(&signs)?;
        let d = self.alg.dim();
        let basis: Vec<MElement> = (0..d)
            .map(|i| {
                let mut e = vec![0; d];
                e[i] = 1;
                self.m.from_chart(&e, chart)
            })
            .collect();
        let mut elems = Vec::new();
        let mut matrix = Vec::new();
        for (g, _) in &gens {
            let n = self.m.dual_gen(*g)?;
            let row: Vec<i64> = basis.iter().map(|b| self.m.eval_dual(&n, &b.0)).collect::<Result<_>>()?;
            matrix.push(row);
            elems.push(n);
        }
        let big: Vec<Vec<num_bigint::BigInt>> =
            matrix.iter().map(|r| r.iter().map(|&v| num_bigint::BigInt::from(v)).collect()).collect();
        if !geometry::is_unimodular(&big)? {
            bail!(UnimodularityFail, "dual cone generators for chart {} are not a lattice basis", chart.label(&self.alg.poset));
        }
        let dd = self.m.dual()?;
        for (g, n) in gens.iter().zip(&elems) {
            let inside = dd.hat_circ.iter().zip(&signs).all(|(&p, &s)| {
                let t = dd.tail[p].unwrap();
                let v = n.yp[t.upper] - t.x_part.map_or(0, |q| n.y[q]);
                v * s as i64 >= 0
            });
            if !inside {
                bail!(UnimodularityFail, "generator {:?} lies outside the dual cone of its chart", g.0);
            }
        }
        Ok(ValuationBasis { chart, gens: gens.into_iter().map(|g| g.0).collect(), elems, matrix })
    }

    /// `𝔳(f)`: lexicographic minimum of the `ρ̃` values over `ν(f)`.
    pub fn chart_valuation(&self, vb: &ValuationBasis, f: &Elem) -> Result<Option<Vec<i64>>> {
        let SElem::Set(s) = self.alg.valuation(f) else { return Ok(None) };
        let mut best: Option<Vec<i64>> = None;
        for m in &s {
            let v = vb.values(&self.m, m)?;
            if best.as_ref().is_none_or(|b| v < *b) {
                best = Some(v);
            }
        }
        Ok(best)
    }

    /// Value sets of `𝔳` on degree-`k` basis elements against the lattice
    /// points of `kΔ̂_C` mapped by the covector matrix.
    pub fn no_body_sample(&self, chart: Chart, kmax: i64) -> Result<NoBodyReport> {
        let vb = self.chart_valuation_basis(chart)?;
        let mut levels = Vec::new();
        let mut nonlinear = 0;
        for k in 0..=kmax {
            let g = self.gamma(k)?;
            let mut values = BTreeSet::new();
            for b in &g.basis {
                let m = self.alg.monomial_to_m(b);
                let v = vb.values(&self.m, &m)?;
                if v != vb.apply(&self.m.chart_coord(&m, chart)) {
                    nonlinear += 1;
                }
                values.insert(v);
            }
            let pts: BTreeSet<Vec<i64>> =
                mco::hat_points(&self.alg.poset, &self.u, chart, k, self.budget)?.iter().map(|y| vb.apply(y)).collect();
            levels.push(NoBodyLevel { k, values: values.len(), lattice_points: pts.len(), equal: values == pts });
        }
        Ok(NoBodyReport {
            pass: nonlinear == 0 && levels.iter().all(|l| l.equal),
            chart: chart.names(&self.alg.poset),
            rho: vb.gen_names(&self.alg.poset),
            nonlinear,
            levels,
        })
    }

    /// `ord(fg) = ord(f) + ord(g)` for every structural point and sampled
    /// pairs, with `ord = min φ ∘ ν`.
    pub fn ord_divisor_check(&self, seed: u64, count: usize) -> Result<OrdReport> {
        let mut g = rng::stream(seed, 17);
        let phis = self.m.structural_points();
        let ord = |phi: StructuralPoint, f: &Elem| {
            crate::semialgebra::min_of(&self.alg.valuation(f), |m| self.m.eval_structural(phi, &m.0))
        };
        let mut failures = Vec::new();
        for i in 0..count {
            let f = self.alg.random_sparse(&mut g, 2, 2);
            let h = self.alg.random_sparse(&mut g, 2, 2);
            let fh = self.alg.multiply(&f, &h);
            for &phi in &phis {
                let lhs = ord(phi, &fh);
                let rhs = ord(phi, &f).zip(ord(phi, &h)).map(|(a, b)| a + b);
                if lhs != rhs {
                    failures.push(json!({
                        "draw": i,
                        "divisor": phi.name(&self.alg.poset),
                        "lhs": lhs,
                        "rhs": rhs,
                        "f": self.alg.to_json(&f),
                        "g": self.alg.to_json(&h),
                    }));
                }
            }
        }
        Ok(OrdReport { pass: failures.is_empty(), pairs: count, divisors: phis.len(), failures })
    }
}

#[derive(Debug, Clone)]
pub struct ValuationBasis {
    pub chart: Chart,
    pub gens: Vec<DualGen>,
    pub elems: Vec<DualElement>,
    /// Row `i` is the covector of `ρ̃_i` in chart coordinates.
    pub matrix: Vec<Vec<i64>>,
}

impl ValuationBasis {
    pub fn values(&self, m: &Polyptych, x: &MElement) -> Result<Vec<i64>> {
        self.elems.iter().map(|n| m.eval_dual(n, &x.0)).collect()
    }

    pub fn apply(&self, y: &[i64]) -> Vec<i64> {
        self.matrix.iter().map(|r| r.iter().zip(y).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn gen_names(&self, poset: &crate::marked_poset::MarkedPoset) -> Vec<String> {
        self.gens
            .iter()
            .map(|g| match *g {
                DualGen::Eps(q) => format!("eps({})", poset.coord_name(q)),
                DualGen::EpsPrime(q) => format!("eps'({})", poset.coord_name(q)),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HilbertRow {
    pub k: i64,
    pub gamma: usize,
    pub agree: bool,
    pub charts: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GenerationRow {
    pub k: i64,
    pub basis: usize,
    pub gaps: usize,
    pub escapes: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct HilbertReport {
    pub pass: bool,
    pub u: Vec<i64>,
    pub rows: Vec<HilbertRow>,
    pub generation: Vec<GenerationRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NoBodyLevel {
    pub k: i64,
    pub values: usize,
    pub lattice_points: usize,
    pub equal: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct NoBodyReport {
    pub pass: bool,
    pub chart: Vec<String>,
    pub rho: Vec<String>,
    pub nonlinear: usize,
    pub levels: Vec<NoBodyLevel>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrdReport {
    pub pass: bool,
    pub pairs: usize,
    pub divisors: usize,
    pub failures: Vec<Value>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marked_poset::{gt_type_a, gt_type_c};

    fn deg(p: crate::marked_poset::MarkedPoset) -> Degeneration {
        Degeneration::new(Algebra::new(&p).unwrap(), 20_000_000).unwrap()
    }

    #[test]
    fn gamma_small_cases() {
        let a = deg(gt_type_a(2, &[0, 2, 4]).unwrap());
        assert_eq!(a.gamma(0).unwrap().dimension, 1);
        assert_eq!(a.gamma(1).unwrap().dimension, 27);
        let c1 = deg(gt_type_c(1, &[2]).unwrap());
        assert_eq!(c1.gamma(1).unwrap().dimension, 3);
    }

    #[test]
    fn hilbert_matches_ehrhart_type_a() {
        let a = deg(gt_type_a(2, &[0, 2, 4]).unwrap());
        let rep = a.hilbert_vs_ehrhart(2, 2).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(rep.rows[1].charts.values().all(|&c| c == 27));
    }

    #[test]
    fn valuation_values_fill_the_chart_polytope() {
        let a = deg(gt_type_a(2, &[0, 2, 4]).unwrap());
        for chart in Chart::all(3) {
            let rep = a.no_body_sample(chart, 2).unwrap();
            assert!(rep.pass, "{rep:?}");
        }
        let c1 = deg(gt_type_c(1, &[2]).unwrap());
        let rep = c1.no_body_sample(Chart::EMPTY, 1).unwrap();
        assert_eq!(rep.levels[1].values, 3);
    }

    #[test]
    fn chart_valuation_is_additive_on_monomials() {
        let c = deg(gt_type_c(2, &[2, 4]).unwrap());
        let mut g = rng::stream(5, 1);
        for chart in [Chart::EMPTY, Chart::full(4)] {
            let vb = c.chart_valuation_basis(chart).unwrap();
            assert_eq!(c.chart_valuation(&vb, &c.alg.one()).unwrap(), Some(vec![0; 4]));
            for _ in 0..30 {
                let b1 = Monomial::from_diff(&rng::int_vector(&mut g, 4, 2));
                let b2 = Monomial::from_diff(&rng::int_vector(&mut g, 4, 2));
                let e1 = Elem::term(b1, rat(1));
                let e2 = Elem::term(b2, rat(1));
                let v1 = c.chart_valuation(&vb, &e1).unwrap().unwrap();
                let v2 = c.chart_valuation(&vb, &e2).unwrap().unwrap();
                let v12 = c.chart_valuation(&vb, &c.alg.multiply(&e1, &e2)).unwrap().unwrap();
                let sum: Vec<i64> = v1.iter().zip(&v2).map(|(a, b)| a + b).collect();
                assert_eq!(v12, sum);
            }
        }
    }

    #[test]
    fn divisor_orders_are_additive() {
        let c = deg(gt_type_c(2, &[2, 4]).unwrap());
        let rep = c.ord_divisor_check(0, 100).unwrap();
        assert!(rep.pass, "{:?}", rep.failures);
        let p21 = c.alg.poset.coord_of(c.alg.poset.element("q_{2,1}").unwrap()).unwrap();
        let p31 = c.alg.poset.coord_of(c.alg.poset.element("q_{3,1}").unwrap()).unwrap();
        let f = c.alg.x(p21);
        let ord = |e: &Elem| {
            crate::semialgebra::min_of(&c.alg.valuation(e), |m| c.m.eval_structural(StructuralPoint::Inner(p31), &m.0))
        };
        assert_eq!(ord(&c.alg.multiply(&f, &f)), ord(&f).map(|v| 2 * v));
        assert_eq!(ord(&c.alg.one()), Some(0));
    }
}
