//! The polyptych lattice `𝓜` of a marked poset.
//!
//! Elements are stored by their `∅`-chart coordinate; the chart `C`
//! coordinate is `μ_C` of it. Points of `𝓜` are integer-valued functions
//! that are min-additive over all charts; this module evaluates the
//! structural points `φ_p`, `φ_{p,p′}`, builds the dual lattice for the
//! supported families, and checks the strict dual pairing.
//!
//! The dual side is driven by the relation tails: an unmarked `p` with tail
//! `(q, p′)` contributes the equation `y_p − y′_p = min(0, −y′_q + y_{p′})`
//! and the sign `ε_p` of the maximal cones on both sides.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{bail, Code, Error, Result};
use crate::geometry::{self, expand_in_basis, rat, HPolyhedron, Polyhedron, Rat};
use crate::marked_poset::{Family, MarkedPoset, SpadeClassification, Tail};
use crate::mco::{self, Chart, Lower, Transfer};
use crate::rng;

/// An element of `𝓜`, stored as `π_∅(m)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct MElement(pub Vec<i64>);

impl MElement {
    pub fn zero(d: usize) -> Self {
        MElement(vec![0; d])
    }

    pub fn neg(&self) -> Self {
        MElement(self.0.iter().map(|x| -x).collect())
    }

    pub fn scale(&self, k: i64) -> Self {
        MElement(self.0.iter().map(|x| k * x).collect())
    }

    pub fn plus(&self, other: &MElement) -> Self {
        MElement(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

/// The point functionals attached to the poset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum StructuralPoint {
    /// `φ_p` for an unmarked `p` (coordinate index).
    Inner(usize),
    /// `φ_{p,p′}` for a marked `p` (element index) and an unmarked lower
    /// cover `p′` (coordinate index).
    Corner(usize, usize),
}

impl StructuralPoint {
    pub fn name(&self, poset: &MarkedPoset) -> String {
        match *self {
            StructuralPoint::Inner(c) => format!("phi[{}]", poset.coord_name(c)),
            StructuralPoint::Corner(e, c) => format!("phi[{},{}]", poset.name(e), poset.coord_name(c)),
        }
    }
}

/// A dual element `(y, y′)` indexed by coordinates.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct DualElement {
    pub y: Vec<i64>,
    pub yp: Vec<i64>,
}

/// Dual generators: `ε_q` (the point `φ_q`) and `ε′_q` (the point `−x_q`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum DualGen {
    Eps(usize),
    EpsPrime(usize),
}

/// Tail data in coordinate indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoordTail {
    pub upper: usize,
    pub x_part: Option<usize>,
}

/// Combinatorial data of the dual side, derived from the level components.
#[derive(Debug, Clone)]
pub struct DualData {
    pub tail: Vec<Option<CoordTail>>,
    /// Coordinates with a tail, in coordinate order.
    pub hat_circ: Vec<usize>,
    /// Coordinates without a tail.
    pub units: Vec<usize>,
    /// Coordinates that are nobody's tail upper.
    pub non_uppers: Vec<usize>,
    /// Next lower element `p_{k+1}` when unmarked.
    pub next: Vec<Option<usize>>,
    pub hat_e: Vec<Vec<usize>>,
}

/// The polyptych lattice of a marked poset.
#[derive(Debug, Clone)]
pub struct Polyptych {
    pub poset: MarkedPoset,
    pub tr: Transfer,
    effective: Vec<Chart>,
    spade: Option<SpadeClassification>,
    dual: Option<DualData>,
}

impl Polyptych {
    pub fn new(poset: &MarkedPoset) -> Self {
        let tr = Transfer::new(poset);
        let d = poset.dim();
        // coordinates whose lower covers are all marked never move
        let movable: Vec<usize> =
            (0..d).filter(|&c| tr.lower(c).iter().any(|l| matches!(l, Lower::Coord(_)))).collect();
        assert!(movable.len() < 32, "too many mutable coordinates");
        let effective = (0..1u64 << movable.len())
            .map(|bits| {
                movable
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| bits >> i & 1 == 1)
                    .fold(Chart::EMPTY, |ch, (_, &c)| ch.with(c))
            })
            .collect();
        let spade = poset.classify_spade().ok();
        let dual = spade.as_ref().map(|s| build_dual(poset, s));
        Polyptych { poset: poset.clone(), tr, effective, spade, dual }
    }

    pub fn dim(&self) -> usize {
        self.poset.dim()
    }

    pub fn spade(&self) -> Result<&SpadeClassification> {
        match &self.spade {
            Some(s) => Ok(s),
            None => Err(self.poset.classify_spade().unwrap_err()),
        }
    }

    /// Charts that give pairwise distinct mutations up to coordinates that
    /// only have marked lower covers.
    pub fn effective_charts(&self) -> &[Chart] {
        &self.effective
    }

    pub fn chart_coord(&self, m: &MElement, chart: Chart) -> Vec<i64> {
        self.tr.mu(chart, &m.0)
    }

    pub fn from_chart(&self, y: &[i64], chart: Chart) -> MElement {
        MElement(self.tr.mu_inverse(chart, y))
    }

    /// `m₁ +_C m₂`.
    pub fn add_in_chart(&self, m1: &MElement, m2: &MElement, chart: Chart) -> MElement {
        let a = self.tr.mu(chart, &m1.0);
        let b = self.tr.mu(chart, &m2.0);
        let s: Vec<i64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        MElement(self.tr.mu_inverse(chart, &s))
    }

    /// `Υ(m₁, m₂)`: all chart sums, deduplicated.
    pub fn upsilon(&self, m1: &MElement, m2: &MElement) -> BTreeSet<MElement> {
        self.effective.iter().map(|&c| self.add_in_chart(m1, m2, c)).collect()
    }

    pub fn structural_points(&self) -> Vec<StructuralPoint> {
        let p = &self.poset;
        let mut out: Vec<StructuralPoint> = (0..p.dim()).map(StructuralPoint::Inner).collect();
        for e in 0..p.len() {
            if p.is_marked(e) {
                for &q in p.lower_covers(e) {
                    if let Some(c) = p.coord_of(q) {
                        out.push(StructuralPoint::Corner(e, c));
                    }
                }
            }
        }
        out
    }

    pub fn eval_structural(&self, phi: StructuralPoint, x: &[i64]) -> i64 {
        match phi {
            StructuralPoint::Inner(c) => {
                x[c] + self
                    .tr
                    .lower(c)
                    .iter()
                    .map(|l| match *l {
                        Lower::Coord(q) => -x[q],
                        Lower::Marked(_) => 0,
                    })
                    .min()
                    .unwrap()
            }
            StructuralPoint::Corner(_, c) => -x[c],
        }
    }

    /// Checks the point axioms for `f` on seeded pairs: min-additivity over
    /// `Υ` and homogeneity for `k = 0..3`.
    pub fn verify_point_axiom(
        &self,
        f: &dyn Fn(&[i64]) -> i64,
        pairs: &[(MElement, MElement)],
    ) -> std::result::Result<(), PointAxiomWitness> {
        for (i, (m1, m2)) in pairs.iter().enumerate() {
            let lhs = f(&m1.0) + f(&m2.0);
            let rhs = self.upsilon(m1, m2).iter().map(|m| f(&m.0)).min().unwrap();
            if lhs != rhs {
                return Err(PointAxiomWitness { index: i, m1: m1.clone(), m2: m2.clone(), kind: "min_additivity", lhs, rhs });
            }
            for k in 0..=3 {
                let lhs = f(&m1.scale(k).0);
                let rhs = k * f(&m1.0);
                if lhs != rhs {
                    return Err(PointAxiomWitness { index: i, m1: m1.clone(), m2: m2.clone(), kind: "homogeneity", lhs, rhs });
                }
            }
        }
        Ok(())
    }

    /// Seeded pairs of elements with coordinates in `[-r, r]`.
    pub fn sample_pairs(&self, seed: u64, stream: u64, count: usize, r: i64) -> Vec<(MElement, MElement)> {
        let mut g = rng::stream(seed, stream);
        let d = self.dim();
        (0..count)
            .map(|_| (MElement(rng::int_vector(&mut g, d, r)), MElement(rng::int_vector(&mut g, d, r))))
            .collect()
    }

    pub fn dual(&self) -> Result<&DualData> {
        if !self.poset.family().has_dual() {
            bail!(Unsupported, "the dual lattice is only constructed for the Gelfand–Tsetlin and zigzag families");
        }
        self.spade()?;
        Ok(self.dual.as_ref().unwrap())
    }

    /// `ĥe_p` as an element.
    pub fn hat_e(&self, c: usize) -> Result<MElement> {
        let dd = self.dual()?;
        let mut v = vec![0; self.dim()];
        for &k in &dd.hat_e[c] {
            v[k] = 1;
        }
        Ok(MElement(v))
    }

    /// Coefficients of `π_∅(m)` in the `ĥe` basis.
    pub fn he_coords(&self, x: &[i64]) -> Result<Vec<i64>> {
        let dd = self.dual()?;
        Ok((0..x.len()).map(|c| x[c] - dd.next[c].map_or(0, |n| x[n])).collect())
    }

    pub fn from_he(&self, coeffs: &[i64]) -> Result<MElement> {
        let dd = self.dual()?;
        let mut v = vec![0; self.dim()];
        for (c, &a) in coeffs.iter().enumerate() {
            for &k in &dd.hat_e[c] {
                v[k] += a;
            }
        }
        Ok(MElement(v))
    }

    /// Fills in `y′` from `y` by the triangular min-equations.
    pub fn dual_complete(&self, y: &[i64]) -> Result<DualElement> {
        let dd = self.dual()?;
        let d = self.dim();
        if y.len() != d {
            bail!(BadInput, "dual element needs {d} coordinates, got {}", y.len());
        }
        let mut yp = y.to_vec();
        for c in (0..d).rev() {
            if let Some(t) = dd.tail[c] {
                let inner = -yp[t.upper] + t.x_part.map_or(0, |p| y[p]);
                yp[c] = y[c] - inner.min(0);
            }
        }
        Ok(DualElement { y: y.to_vec(), yp })
    }

    /// Validates the min-equations of a dual element.
    pub fn dual_element(&self, y: Vec<i64>, yp: Vec<i64>) -> Result<DualElement> {
        let dd = self.dual()?;
        for c in 0..self.dim() {
            let want = match dd.tail[c] {
                Some(t) => (-yp[t.upper] + t.x_part.map_or(0, |p| y[p])).min(0),
                None => 0,
            };
            if y[c] - yp[c] != want {
                bail!(EquationFail, "equation for {} fails: y − y′ = {} but should be {want}", self.poset.coord_name(c), y[c] - yp[c]);
            }
        }
        Ok(DualElement { y, yp })
    }

    /// `(w(n))(m)`: the dual element acting as a point of `𝓜`.
    pub fn eval_dual(&self, n: &DualElement, x: &[i64]) -> Result<i64> {
        let c = self.he_coords(x)?;
        Ok(c.iter().enumerate().map(|(p, &a)| a * if a >= 0 { n.y[p] } else { n.yp[p] }).sum())
    }

    /// Dual generator as a dual element.
    pub fn dual_gen(&self, g: DualGen) -> Result<DualElement> {
        let d = self.dim();
        let mut y = vec![0; d];
        let mut yp = vec![0; d];
        for p in 0..d {
            let he = self.hat_e(p)?;
            match g {
                DualGen::Eps(q) => {
                    y[p] = self.eval_structural(StructuralPoint::Inner(q), &he.0);
                    yp[p] = -self.eval_structural(StructuralPoint::Inner(q), &he.neg().0);
                }
                DualGen::EpsPrime(q) => {
                    y[p] = -he.0[q];
                    yp[p] = -he.0[q];
                }
            }
        }
        Ok(DualElement { y, yp })
    }

    /// `(v(m))(g)` for a dual generator.
    pub fn gen_value(&self, g: DualGen, x: &[i64]) -> i64 {
        match g {
            DualGen::Eps(q) => self.eval_structural(StructuralPoint::Inner(q), x),
            DualGen::EpsPrime(q) => -x[q],
        }
    }

    /// Sign vector of the dual cone `σ′` containing `n` (ties count as +1),
    /// indexed like [`DualData::hat_circ`].
    pub fn dual_signs(&self, n: &DualElement) -> Result<Vec<i8>> {
        let dd = self.dual()?;
        Ok(dd
            .hat_circ
            .iter()
            .map(|&p| {
                let t = dd.tail[p].unwrap();
                if n.yp[t.upper] - t.x_part.map_or(0, |q| n.y[q]) >= 0 {
                    1
                } else {
                    -1
                }
            })
            .collect())
    }

    /// Sign vector of the cone `σ` containing `m` (ties count as +1).
    pub fn primal_signs(&self, x: &[i64]) -> Result<Vec<i8>> {
        let dd = self.dual()?;
        let c = self.he_coords(x)?;
        Ok(dd.hat_circ.iter().map(|&p| if c[p] >= 0 { 1 } else { -1 }).collect())
    }

    /// `ε(C₀)`: `+1` exactly when the tail upper lies in the chart.
    pub fn chart_signs(&self, chart: Chart) -> Result<Vec<i8>> {
        let dd = self.dual()?;
        Ok(dd
            .hat_circ
            .iter()
            .map(|&p| if chart.contains(dd.tail[p].unwrap().upper) { 1 } else { -1 })
            .collect())
    }

    /// Smallest chart with the given sign vector.
    pub fn chart_for_signs(&self, signs: &[i8]) -> Result<Chart> {
        let dd = self.dual()?;
        Ok(dd
            .hat_circ
            .iter()
            .zip(signs)
            .filter(|(_, &s)| s > 0)
            .fold(Chart::EMPTY, |ch, (&p, _)| ch.with(dd.tail[p].unwrap().upper)))
    }

    /// Generators of `σ′_ε`: one signed generator per tailed coordinate and
    /// a free `ε_q` for every non-upper coordinate. The flag marks free
    /// (lineality) generators.
    pub fn dual_cone_generators(&self, signs: &[i8]) -> Result<Vec<(DualGen, bool)>> {
        let dd = self.dual()?;
        let mut out = Vec::new();
        for (&p, &s) in dd.hat_circ.iter().zip(signs) {
            let q = dd.tail[p].unwrap().upper;
            out.push((if s > 0 { DualGen::Eps(q) } else { DualGen::EpsPrime(q) }, false));
        }
        for &q in &dd.non_uppers {
            out.push((DualGen::Eps(q), true));
        }
        Ok(out)
    }

    /// `(v(m))(n)`: expands `n` over the generators of its cone and sums the
    /// generator values. Fails with `DUAL_FAIL` if a non-free coefficient is
    /// negative (the sign classification and the cone disagree).
    pub fn pair_v(&self, x: &[i64], n: &DualElement) -> Result<Rat> {
        let signs = self.dual_signs(n)?;
        let gens = self.dual_cone_generators(&signs)?;
        let basis: Vec<Vec<Rat>> = gens
            .iter()
            .map(|(g, _)| self.dual_gen(*g).map(|e| e.y.iter().map(|&v| rat(v)).collect()))
            .collect::<Result<_>>()?;
        let target: Vec<Rat> = n.y.iter().map(|&v| rat(v)).collect();
        let coeffs = expand_in_basis(&target, &basis)?;
        let mut total = Rat::zero();
        for ((g, free), a) in gens.iter().zip(&coeffs) {
            if !free && a.is_negative() {
                bail!(DualFail, "dual element has a negative coefficient on a cone generator");
            }
            total += a * rat(self.gen_value(*g, x));
        }
        Ok(total)
    }

    /// Covectors, in chart `C₀` coordinates, of the generators of the dual
    /// cone attached to `C₀`; free generators appear with both signs.
    pub fn chart_covectors(&self, chart: Chart) -> Result<Vec<Vec<num_bigint::BigInt>>> {
        let signs = self.chart_signs(chart)?;
        let gens = self.dual_cone_generators(&signs)?;
        let d = self.dim();
        let basis: Vec<MElement> = (0..d)
            .map(|i| {
                let mut e = vec![0; d];
                e[i] = 1;
                self.from_chart(&e, chart)
            })
            .collect();
        let mut out = Vec::new();
        for (g, free) in gens {
            let n = self.dual_gen(g)?;
            let cov: Vec<num_bigint::BigInt> = basis
                .iter()
                .map(|b| self.eval_dual(&n, &b.0).map(num_bigint::BigInt::from))
                .collect::<Result<_>>()?;
            if free {
                out.push(cov.iter().map(|v| -v).collect());
            }
            out.push(cov);
        }
        Ok(out)
    }

    /// Half-space data `(φ, a)` describing `Δ̂` as a PL polytope.
    pub fn pl_hat_delta(&self, u: &[i64]) -> Vec<(StructuralPoint, i64)> {
        let p = &self.poset;
        let u_of = |e: usize| match p.coord_of(e) {
            Some(c) => u[c],
            None => p.marking(e).unwrap(),
        };
        self.structural_points()
            .into_iter()
            .map(|phi| {
                let a = match phi {
                    StructuralPoint::Inner(c) => {
                        let e = p.coords()[c];
                        u_of(p.lower_covers(e)[0]) - u[c]
                    }
                    StructuralPoint::Corner(e, c) => u[c] - p.marking(e).unwrap(),
                };
                (phi, a)
            })
            .collect()
    }

    /// The `∅`-chart H-representation of the PL description: each `φ_p ≥ a`
    /// unfolds into one linear row per lower cover.
    pub fn pl_hat_delta_hrep(&self, u: &[i64]) -> HPolyhedron {
        let d = self.dim();
        let mut h = HPolyhedron::new(d);
        for (phi, a) in self.pl_hat_delta(u) {
            match phi {
                StructuralPoint::Inner(c) => {
                    for l in self.tr.lower(c) {
                        let mut row = vec![0i64; d];
                        row[c] = 1;
                        if let Lower::Coord(q) = *l {
                            row[q] -= 1;
                        }
                        h.push_i64(&row, a);
                    }
                }
                StructuralPoint::Corner(_, c) => {
                    let mut row = vec![0i64; d];
                    row[c] = -1;
                    h.push_i64(&row, a);
                }
            }
        }
        h
    }

    /// Compares the PL description with the chain-order polytopes: exact
    /// equality in the `∅` chart and lattice points of `kΔ̂_C` for every
    /// chart and `k ≤ kmax`.
    pub fn verify_pl_hat_delta(&self, u: &[i64], kmax: i64, budget: u64) -> Result<PlReport> {
        let p = &self.poset;
        let exact = geometry::polyhedron_equal(
            &Polyhedron::H(self.pl_hat_delta_hrep(u)),
            &Polyhedron::H(mco::hat_delta(p, u, Chart::EMPTY)),
            geometry::DIM_CAP,
        )?;
        let data = self.pl_hat_delta(u);
        let mut mismatches = Vec::new();
        for k in 1..=kmax {
            for chart in Chart::all(self.dim()) {
                let direct: BTreeSet<Vec<i64>> = mco::hat_points(p, u, chart, k, budget)?.into_iter().collect();
                let (lo, hi) = mco::hat_box(p, u, chart, k);
                let mut pl = BTreeSet::new();
                for_each_box_point(&lo, &hi, |y| {
                    let x = self.tr.mu_inverse(chart, y);
                    if data.iter().all(|&(phi, a)| self.eval_structural(phi, &x) >= k * a) {
                        pl.insert(y.to_vec());
                    }
                });
                if pl != direct {
                    mismatches.push(json!({"k": k, "chart": chart.names(p), "direct": direct.len(), "pl": pl.len()}));
                }
            }
        }
        let constants: Vec<Value> = data
            .iter()
            .map(|(phi, a)| json!({"point": phi.name(p), "a": a}))
            .collect();
        Ok(PlReport { pass: exact && mismatches.is_empty(), exact_empty_chart: exact, constants, mismatches })
    }

    /// Strict dual pairing checks on seeded samples.
    pub fn verify_strict_dual(&self, seed: u64, samples: usize) -> Result<DualReport> {
        let d = self.dim();
        let dd = self.dual()?.clone();
        let mut g = rng::stream(seed, 11);
        let mut failures: Vec<Value> = Vec::new();

        // generators satisfy the min-equations
        for q in 0..d {
            for gen in [DualGen::Eps(q), DualGen::EpsPrime(q)] {
                let e = self.dual_gen(gen)?;
                if self.dual_element(e.y.clone(), e.yp.clone()).is_err() {
                    failures.push(json!({"check": "generator_equations", "generator": format!("{gen:?}")}));
                }
            }
        }

        // (ii) symmetry and (iii) injectivity
        let mut seen = std::collections::BTreeMap::new();
        for i in 0..samples {
            let x = rng::int_vector(&mut g, d, 4);
            let y = rng::int_vector(&mut g, d, 4);
            let n = self.dual_complete(&y)?;
            let w = rat(self.eval_dual(&n, &x)?);
            let v = self.pair_v(&x, &n)?;
            if v != w {
                failures.push(json!({"check": "symmetry", "draw": i, "m": x, "y": y, "v": geometry::rat_str(&v), "w": geometry::rat_str(&w)}));
            }
            let image: Vec<i64> = (0..d)
                .flat_map(|q| [self.gen_value(DualGen::Eps(q), &x), self.gen_value(DualGen::EpsPrime(q), &x)])
                .collect();
            if let Some(prev) = seen.insert(image, x.clone()) {
                if prev != x {
                    failures.push(json!({"check": "injectivity", "draw": i, "m": x, "other": prev}));
                }
            }
        }

        // (iv) chart ↔ dual cone correspondence
        let mut charts_checked = 0;
        let mut outside_checked = 0;
        for chart in Chart::all(d) {
            charts_checked += 1;
            let signs = self.chart_signs(chart)?;
            let gens = self.dual_cone_generators(&signs)?;
            let pairs = self.sample_pairs(seed, 12 + chart.0, 8, 3);
            for draw in 0..6 {
                let mut y = vec![0i64; d];
                for (gen, free) in &gens {
                    let a: i64 = if *free { g.gen_range(-2..=2) } else { g.gen_range(0..=2) };
                    let e = self.dual_gen(*gen)?;
                    for (t, v) in y.iter_mut().zip(&e.y) {
                        *t += a * v;
                    }
                }
                let n = self.dual_complete(&y)?;
                for (m1, m2) in &pairs {
                    let lhs = self.eval_dual(&n, &self.add_in_chart(m1, m2, chart).0)?;
                    let rhs = self.eval_dual(&n, &m1.0)? + self.eval_dual(&n, &m2.0)?;
                    if lhs != rhs {
                        failures.push(json!({"check": "inside_linear", "chart": chart.names(&self.poset), "draw": draw, "y": y, "m1": m1, "m2": m2}));
                    }
                }
            }
            // an element strictly outside along one sign must fail on (ĥe_p, −ĥe_p)
            for (idx, &p) in dd.hat_circ.iter().enumerate() {
                let mut flipped = signs.clone();
                flipped[idx] = -flipped[idx];
                let mut y = vec![0i64; d];
                for (k, (gen, free)) in self.dual_cone_generators(&flipped)?.iter().enumerate() {
                    let a = if *free { 0 } else if k == idx { 1 } else { 0 };
                    let e = self.dual_gen(*gen)?;
                    for (t, v) in y.iter_mut().zip(&e.y) {
                        *t += a * v;
                    }
                }
                let n = self.dual_complete(&y)?;
                let s = self.dual_signs(&n)?;
                let strictly_outside = {
                    let t = dd.tail[p].unwrap();
                    let diff = n.yp[t.upper] - t.x_part.map_or(0, |q| n.y[q]);
                    diff != 0 && s[idx] != signs[idx]
                };
                if !strictly_outside {
                    continue;
                }
                outside_checked += 1;
                let he = self.hat_e(p)?;
                let lhs = self.eval_dual(&n, &self.add_in_chart(&he, &he.neg(), chart).0)?;
                let rhs = self.eval_dual(&n, &he.0)? + self.eval_dual(&n, &he.neg().0)?;
                if lhs == rhs {
                    failures.push(json!({"check": "outside_nonlinear", "chart": chart.names(&self.poset), "element": self.poset.coord_name(p)}));
                }
            }
        }
        Ok(DualReport { pass: failures.is_empty(), samples, charts_checked, outside_checked, failures })
    }
}

fn build_dual(poset: &MarkedPoset, s: &SpadeClassification) -> DualData {
    let d = poset.dim();
    let coord = |e: usize| poset.coord_of(e);
    let mut tail = vec![None; d];
    let mut next = vec![None; d];
    let mut hat_e = vec![Vec::new(); d];
    for c in 0..d {
        let e = poset.coords()[c];
        tail[c] = match s.tail(e) {
            Tail::None => None,
            Tail::Y(q) => Some(CoordTail { upper: coord(q).unwrap(), x_part: None }),
            Tail::XY(p, q) => Some(CoordTail { upper: coord(q).unwrap(), x_part: coord(p) }),
        };
        next[c] = s.next_lower(e).and_then(coord);
        hat_e[c] = s.hat_e(e).into_iter().filter_map(coord).collect();
    }
    let hat_circ: Vec<usize> = (0..d).filter(|&c| tail[c].is_some()).collect();
    let units: Vec<usize> = (0..d).filter(|&c| tail[c].is_none()).collect();
    let uppers: BTreeSet<usize> = tail.iter().flatten().map(|t| t.upper).collect();
    let non_uppers = (0..d).filter(|c| !uppers.contains(c)).collect();
    DualData { tail, hat_circ, units, non_uppers, next, hat_e }
}

/// Visits every integer point of a box in lexicographic order.
pub fn for_each_box_point(lo: &[i64], hi: &[i64], mut f: impl FnMut(&[i64])) {
    if lo.iter().zip(hi).any(|(a, b)| a > b) {
        return;
    }
    let mut x = lo.to_vec();
    loop {
        f(&x);
        let mut k = x.len();
        loop {
            if k == 0 {
                return;
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

#[derive(Debug, Clone, Serialize)]
pub struct PointAxiomWitness {
    pub index: usize,
    pub m1: MElement,
    pub m2: MElement,
    pub kind: &'static str,
    pub lhs: i64,
    pub rhs: i64,
}

impl PointAxiomWitness {
    pub fn into_error(self) -> Error {
        Error::new(
            Code::AxiomFail,
            format!("{} fails at draw {}: {} ≠ {} for m1={:?}, m2={:?}", self.kind, self.index, self.lhs, self.rhs, self.m1.0, self.m2.0),
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PlReport {
    pub pass: bool,
    pub exact_empty_chart: bool,
    pub constants: Vec<Value>,
    pub mismatches: Vec<Value>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DualReport {
    pub pass: bool,
    pub samples: usize,
    pub charts_checked: usize,
    pub outside_checked: usize,
    pub failures: Vec<Value>,
}

/// Whether a family carries the dual-lattice construction.
pub fn family_supported(f: Family) -> bool {
    f.has_dual()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marked_poset::{basic_pi1, basic_pi2, gt_type_a, gt_type_c};

    fn a2() -> Polyptych {
        Polyptych::new(&gt_type_a(2, &[0, 2, 4]).unwrap())
    }

    fn c2() -> Polyptych {
        Polyptych::new(&gt_type_c(2, &[2, 4]).unwrap())
    }

    #[test]
    fn chart_addition_example() {
        let m = a2();
        let c31 = Chart::parse(&m.poset, "q31").unwrap();
        let e = MElement(vec![0, 1, 0]);
        assert_eq!(m.add_in_chart(&e, &e.neg(), c31), MElement(vec![0, 0, -1]));
        assert_eq!(m.add_in_chart(&e, &e.neg(), Chart::EMPTY), MElement::zero(3));
        let ups = m.upsilon(&e, &e.neg());
        assert_eq!(ups, BTreeSet::from([MElement::zero(3), MElement(vec![0, 0, -1])]));
        let x = MElement(vec![2, -1, 3]);
        for &c in m.effective_charts() {
            assert_eq!(m.add_in_chart(&x, &MElement::zero(3), c), x);
        }
    }

    #[test]
    fn structural_examples() {
        let m = a2();
        assert_eq!(m.eval_structural(StructuralPoint::Inner(2), &[0, 1, 0]), -1);
        let top = m.poset.element("q*_3").unwrap();
        assert_eq!(m.eval_structural(StructuralPoint::Corner(top, 2), &[0, 1, 2]), -2);
    }

    #[test]
    fn structural_points_pass_axioms() {
        for m in [a2(), c2()] {
            let pairs = m.sample_pairs(0, 1, 100, 4);
            for phi in m.structural_points() {
                m.verify_point_axiom(&|x| m.eval_structural(phi, x), &pairs).unwrap();
            }
        }
    }

    #[test]
    fn squared_functional_fails() {
        let m = a2();
        let pairs = m.sample_pairs(0, 1, 20, 3);
        let err = m.verify_point_axiom(&|x| x[0] * x[0], &pairs).unwrap_err();
        assert!(err.kind == "homogeneity" || err.kind == "min_additivity");
    }

    #[test]
    fn dual_complete_examples() {
        let m = c2();
        assert_eq!(m.dual_complete(&[0, 0, 0, -1]).unwrap().yp, vec![0, 0, 0, -1]);
        assert_eq!(m.dual_complete(&[0, 0, 1, 1]).unwrap().yp, vec![2, 0, 2, 1]);
        assert_eq!(m.dual_complete(&[0, 0, 0, 0]).unwrap().yp, vec![0; 4]);
        assert_eq!(m.dual_element(vec![0, 0, 1, 1], vec![0, 0, 1, 1]).unwrap_err().code, Code::EquationFail);
    }

    #[test]
    fn eval_dual_example() {
        let m = c2();
        let n = m.dual_complete(&[0, 0, 0, -1]).unwrap();
        let top = m.hat_e(3).unwrap();
        assert_eq!(m.eval_dual(&n, &top.0).unwrap(), -1);
        assert_eq!(m.eval_dual(&n, &[0, 0, 0, 0]).unwrap(), 0);
    }

    #[test]
    fn hat_e_layout() {
        let m = c2();
        // q_{1,2} is the second element of row 1
        assert_eq!(m.hat_e(1).unwrap(), MElement(vec![1, 1, 0, 0]));
        assert_eq!(m.hat_e(2).unwrap(), MElement(vec![0, 0, 1, 0]));
        let dd = m.dual().unwrap();
        let names: Vec<&str> = dd.hat_circ.iter().map(|&c| m.poset.coord_name(c)).collect();
        assert_eq!(names, ["q_{1,1}", "q_{2,1}"]);
    }

    #[test]
    fn pl_constants() {
        let m = a2();
        let consts: Vec<i64> = m.pl_hat_delta(&[1, 2, 3]).iter().map(|x| x.1).collect();
        assert!(consts.iter().all(|&a| a == -1), "{consts:?}");
        let r = m.verify_pl_hat_delta(&[1, 2, 3], 2, geometry::NODE_BUDGET).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn strict_dual_small_families() {
        for m in [a2(), c2(), Polyptych::new(&basic_pi1(2).unwrap()), Polyptych::new(&basic_pi2(2, 4).unwrap())] {
            let r = m.verify_strict_dual(0, 60).unwrap();
            assert!(r.pass, "{}: {:?}", m.poset.names().join(" "), r.failures);
            assert!(r.outside_checked >= r.charts_checked, "{r:?}");
        }
    }

    #[test]
    fn general_posets_have_no_dual() {
        let p = MarkedPoset::from_json(&gt_type_a(2, &[0, 2, 4]).unwrap().to_json()).unwrap();
        assert_eq!(Polyptych::new(&p).dual().unwrap_err().code, Code::Unsupported);
    }
}
