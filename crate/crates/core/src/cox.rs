//! Cox ring combinatorics: divisor counts, semigroup generators of the
//! divisorial cones, and the polynomial presentation.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::Serialize;
use serde_json::{json, Value};

use crate::algebra::var_name;
use crate::error::{bail, Result};
use crate::geometry::{self, rat};
use crate::marked_poset::{natural_cmp, Family, MarkedPoset};
use crate::polyptych::{Polyptych, StructuralPoint};
use crate::rng;

#[derive(Debug, Clone, Serialize)]
pub struct CoxCounts {
    pub dim: usize,
    pub u: usize,
    pub l: usize,
    pub variables: usize,
    pub per_level: BTreeMap<usize, usize>,
}

/// `U`, `L` and the variable count `|Π∖Π*| − U + L`.
pub fn cox_counts(poset: &MarkedPoset) -> Result<CoxCounts> {
    let spade = poset.classify_spade()?;
    let per_level = spade.units_per_level(poset);
    let u: usize = per_level.values().sum();
    let corners = (0..poset.len())
        .filter(|&e| poset.is_marked(e))
        .map(|e| poset.lower_covers(e).iter().filter(|&&q| !poset.is_marked(q)).count())
        .sum::<usize>();
    let l = poset.dim() + corners;
    Ok(CoxCounts { dim: poset.dim(), u, l, variables: poset.dim() - u + l, per_level })
}

/// Boundary divisors in report order: inner ones first, then corners, each
/// by element name.
pub fn divisors(m: &Polyptych) -> Vec<StructuralPoint> {
    let p = &m.poset;
    let mut out = m.structural_points();
    let key = |s: &StructuralPoint| match *s {
        StructuralPoint::Inner(c) => (0, p.coord_name(c).to_string(), String::new()),
        StructuralPoint::Corner(e, c) => (1, p.name(e).to_string(), p.coord_name(c).to_string()),
    };
    out.sort_by(|a, b| {
        let (ka, kb) = (key(a), key(b));
        ka.0.cmp(&kb.0).then_with(|| natural_cmp(&ka.1, &kb.1)).then_with(|| natural_cmp(&ka.2, &kb.2))
    });
    out
}

fn t_name(poset: &MarkedPoset, s: StructuralPoint) -> String {
    match s {
        StructuralPoint::Inner(c) => format!("t[{}]", poset.coord_name(c)),
        StructuralPoint::Corner(e, c) => format!("t[{},{}]", poset.name(e), poset.coord_name(c)),
    }
}

/// A vector of `ℤ^{Π∖Π*} × ℤ^L`.
pub type Gen = Vec<i64>;

#[derive(Debug, Clone)]
pub struct SemigroupData {
    pub signs: Vec<i8>,
    pub divisors: Vec<StructuralPoint>,
    /// Rows of the square substitution matrix.
    pub matrix: Vec<Vec<i64>>,
    /// `e_r` per divisor, then `f` per tailed coordinate, then `v` per unit.
    pub e: Vec<Gen>,
    pub f: Vec<(usize, Gen)>,
    pub v: Vec<(usize, Gen)>,
}

pub struct Cox<'a> {
    pub m: &'a Polyptych,
    pub divisors: Vec<StructuralPoint>,
}

impl<'a> Cox<'a> {
    pub fn new(m: &'a Polyptych) -> Result<Self> {
        m.dual()?;
        Ok(Cox { m, divisors: divisors(m) })
    }

    fn d(&self) -> usize {
        self.m.dim()
    }

    fn l(&self) -> usize {
        self.divisors.len()
    }

    fn index_of(&self, s: StructuralPoint) -> usize {
        self.divisors.iter().position(|&x| x == s).unwrap()
    }

    fn corner_of(&self, p: usize) -> Option<StructuralPoint> {
        self.divisors.iter().copied().find(|s| matches!(*s, StructuralPoint::Corner(_, c) if c == p))
    }

    /// Interior point of `π_∅(σ_ε)`, scaled so that every wall is far away.
    fn interior(&self, signs: &[i8]) -> Result<Vec<i64>> {
        let dd = self.m.dual()?;
        let mut c = vec![0; self.d()];
        for (&p, &s) in dd.hat_circ.iter().zip(signs) {
            c[p] = 1000 * s as i64;
        }
        Ok(self.m.from_he(&c)?.0)
    }

    /// Linear form of a divisor point on `π_∅(σ_ε)`.
    fn linear_form(&self, s: StructuralPoint, signs: &[i8]) -> Result<Vec<i64>> {
        let x0 = self.interior(signs)?;
        let base = self.m.eval_structural(s, &x0);
        Ok((0..self.d())
            .map(|i| {
                let mut x = x0.clone();
                x[i] += 1;
                self.m.eval_structural(s, &x) - base
            })
            .collect())
    }

    fn in_cone(&self, x: &[i64], signs: &[i8]) -> Result<bool> {
        let dd = self.m.dual()?;
        let c = self.m.he_coords(x)?;
        Ok(dd.hat_circ.iter().zip(signs).all(|(&p, &s)| c[p] * s as i64 >= 0))
    }

    /// Membership in `𝓗_{C,∅}(σ_ε)` using the piecewise-linear points.
    pub fn member(&self, g: &[i64], signs: &[i8]) -> Result<bool> {
        let d = self.d();
        let x = &g[..d];
        Ok(self.in_cone(x, signs)?
            && self.divisors.iter().enumerate().all(|(k, &s)| self.m.eval_structural(s, x) + g[d + k] >= 0))
    }

    /// Generators from the inverse of the substitution matrix whose rows are
    /// the sign inequalities, the divisor inequalities and the unit
    /// coordinates.
    pub fn semigroup(&self, signs: &[i8]) -> Result<SemigroupData> {
        let dd = self.m.dual()?;
        let (d, l) = (self.d(), self.l());
        let n = d + l;
        let mut rows = Vec::with_capacity(n);
        for (&p, &s) in dd.hat_circ.iter().zip(signs) {
            let mut row = vec![0; n];
            row[p] += s as i64;
            if let Some(q) = dd.next[p] {
                row[q] -= s as i64;
            }
            rows.push(row);
        }
        for (k, &s) in self.divisors.iter().enumerate() {
            let mut row = self.linear_form(s, signs)?;
            row.resize(n, 0);
            row[d + k] = 1;
            rows.push(row);
        }
        for &p in &dd.units {
            let mut row = vec![0; n];
            row[p] = 1;
            rows.push(row);
        }
        if rows.len() != n {
            bail!(NotSquare, "substitution matrix has {} rows for {n} columns", rows.len());
        }
        let big: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect();
        if !geometry::is_unimodular(&big)? {
            bail!(UnimodularityFail, "substitution matrix for signs {signs:?} is not unimodular");
        }
        let inv = geometry::inverse(&rows.iter().map(|r| r.iter().map(|&v| rat(v)).collect()).collect::<Vec<_>>())?;
        let column = |j: usize| -> Gen {
            inv.iter().map(|r| i64::try_from(r[j].to_integer()).expect("small entries")).collect()
        };
        let k0 = dd.hat_circ.len();
        let f = dd.hat_circ.iter().enumerate().map(|(i, &p)| (p, column(i))).collect();
        let e = (0..l).map(|k| column(k0 + k)).collect();
        let v = dd.units.iter().enumerate().map(|(i, &p)| (p, column(k0 + l + i))).collect();
        Ok(SemigroupData { signs: signs.to_vec(), divisors: self.divisors.clone(), matrix: rows, e, f, v })
    }

    fn unit_vec(&self, i: usize) -> Gen {
        let mut g = vec![0; self.d() + self.l()];
        g[i] = 1;
        g
    }

    fn r_inner(&self, p: usize) -> usize {
        self.d() + self.index_of(StructuralPoint::Inner(p))
    }

    /// `f_{p,ε}` written out over `ĥe_p`.
    pub fn formula_f(&self, p: usize, sign: i8) -> Result<Gen> {
        let dd = self.m.dual()?;
        let mut g = vec![0; self.d() + self.l()];
        for &q in &dd.hat_e[p] {
            let up = self.r_inner(dd.tail[q].expect("every ĥe member has a tail").upper);
            if sign > 0 {
                g[q] += 1;
                g[self.r_inner(q)] -= 1;
                g[up] += 1;
            } else {
                g[q] -= 1;
                g[self.r_inner(q)] += 1;
                if q != p {
                    g[up] -= 1;
                }
            }
        }
        Ok(g)
    }

    /// Orders of `X̄_p` along the divisors, read off the support `S = ĥe_p`:
    /// an inner divisor `D_q` gets `[q ∈ S] − [every lower cover of q is in S]`
    /// and a corner `D_{a,p′}` gets `−[p′ ∈ S]`.
    pub fn closed_orders(&self, p: usize) -> Result<Vec<i64>> {
        let dd = self.m.dual()?;
        let poset = &self.m.poset;
        let support = &dd.hat_e[p];
        let in_s = |e: usize| poset.coord_of(e).is_some_and(|c| support.contains(&c));
        Ok(self
            .divisors
            .iter()
            .map(|&s| match s {
                StructuralPoint::Inner(q) => {
                    let e = poset.coords()[q];
                    let lower = poset.lower_covers(e);
                    support.contains(&q) as i64 - (!lower.is_empty() && lower.iter().all(|&l| in_s(l))) as i64
                }
                StructuralPoint::Corner(_, c) => -(support.contains(&c) as i64),
            })
            .collect())
    }

    /// `v_s = (ĥe_p, −ord(X̄_p))` for the unit coordinate `p`.
    pub fn formula_v(&self, p: usize) -> Result<Gen> {
        let dd = self.m.dual()?;
        let mut g = vec![0; self.d()];
        for &q in &dd.hat_e[p] {
            g[q] += 1;
        }
        g.extend(self.closed_orders(p)?.iter().map(|v| -v));
        Ok(g)
    }

    pub fn label(&self, g: &[i64]) -> BTreeMap<String, i64> {
        let p = &self.m.poset;
        let d = self.d();
        g.iter()
            .enumerate()
            .filter(|(_, &v)| v != 0)
            .map(|(i, &v)| {
                let name = if i < d { format!("e[{}]", p.coord_name(i)) } else { t_name(p, self.divisors[i - d]).replacen('t', "r", 1) };
                (name, v)
            })
            .collect()
    }

    /// Generators for one sign vector, checked for membership, against the
    /// closed formulas, and through the pair identity.
    pub fn semigroup_generators(&self, signs: &[i8]) -> Result<GeneratorReport> {
        let data = self.semigroup(signs)?;
        let dd = self.m.dual()?;
        let mut problems = Vec::new();
        for (i, g) in data.e.iter().enumerate() {
            if *g != self.unit_vec(self.d() + i) {
                problems.push(format!("e_r column {i} is not a unit vector"));
            }
        }
        let mut members = 0;
        let mut all: Vec<&Gen> = data.e.iter().collect();
        all.extend(data.f.iter().map(|(_, g)| g));
        for g in &all {
            if self.member(g, signs)? {
                members += 1;
            } else {
                problems.push(format!("{:?} is not in the semigroup", self.label(g)));
            }
        }
        for (p, v) in &data.v {
            let neg: Gen = v.iter().map(|x| -x).collect();
            for w in [v, &neg] {
                let x = &w[..self.d()];
                let tight = self.in_cone(x, signs)?
                    && self.divisors.iter().enumerate().all(|(k, &s)| self.m.eval_structural(s, x) + w[self.d() + k] == 0);
                if !tight {
                    problems.push(format!("±v for {} is not on every divisor hyperplane", self.m.poset.coord_name(*p)));
                }
            }
            if *v != self.formula_v(*p)? {
                problems.push(format!("v for {} differs from the closed formula", self.m.poset.coord_name(*p)));
            }
        }
        for ((p, f), &s) in data.f.iter().zip(signs) {
            if *f != self.formula_f(*p, s)? {
                problems.push(format!("f for {} differs from the closed formula", self.m.poset.coord_name(*p)));
            }
            let sum: Gen = self.formula_f(*p, 1)?.iter().zip(&self.formula_f(*p, -1)?).map(|(a, b)| a + b).collect();
            if sum != self.unit_vec(self.r_inner(dd.tail[*p].unwrap().upper)) {
                problems.push(format!("f pair identity fails for {}", self.m.poset.coord_name(*p)));
            }
        }
        // the point forms are linear on the cone
        let mut g = rng::stream(0, 23);
        for (k, &s) in self.divisors.iter().enumerate() {
            let form = &data.matrix[dd.hat_circ.len() + k][..self.d()];
            for _ in 0..40 {
                let mut c = rng::int_vector(&mut g, self.d(), 6);
                for (&p, &sg) in dd.hat_circ.iter().zip(signs) {
                    c[p] = c[p].abs() * sg as i64;
                }
                let x = self.m.from_he(&c)?.0;
                let lin: i64 = form.iter().zip(&x).map(|(a, b)| a * b).sum();
                if lin != self.m.eval_structural(s, &x) {
                    problems.push(format!("{} is not linear on the cone", s.name(&self.m.poset)));
                    break;
                }
            }
        }
        let p = &self.m.poset;
        Ok(GeneratorReport {
            pass: problems.is_empty(),
            signs: signs.to_vec(),
            unimodular: true,
            divisor_order: self.divisors.iter().map(|&s| t_name(p, s)).collect(),
            e: data.e.len(),
            v: data.v.iter().map(|(q, g)| (p.coord_name(*q).to_string(), self.label(g))).collect(),
            f: data.f.iter().map(|(q, g)| (p.coord_name(*q).to_string(), self.label(g))).collect(),
            members,
            problems,
        })
    }

    /// Free-variable list after eliminating the `t` of every tail upper.
    pub fn presentation(&self) -> Result<Presentation> {
        let dd = self.m.dual()?;
        let p = &self.m.poset;
        let name = |c: usize| p.coord_name(c).to_string();
        let w = |c: usize| var_name('W', &name(c));
        let z = |c: usize| var_name('Z', &name(c));
        let t = |c: usize| format!("t[{}]", name(c));
        let mut relations = Vec::new();
        let mut eliminated = Vec::new();
        for &c in &dd.hat_circ {
            let tail = dd.tail[c].unwrap();
            let second = match tail.x_part {
                Some(a) => format!("{}{}", w(a), z(tail.upper)),
                None => z(tail.upper),
            };
            relations.push(format!("{}{} - {} - {}", w(c), z(c), t(tail.upper), second));
            eliminated.push(json!({ "variable": t(tail.upper), "value": format!("{}{} - {}", w(c), z(c), second) }));
        }
        let mut free: Vec<String> = dd.hat_circ.iter().map(|&c| w(c)).collect();
        free.extend((0..self.d()).map(z));
        free.extend(dd.non_uppers.iter().map(|&c| t(c)));
        // a unit's corner variable is its Z; leftover corners stay free
        let mut problems = Vec::new();
        let absorbed: Vec<StructuralPoint> = dd.units.iter().filter_map(|&c| self.corner_of(c)).collect();
        for &c in &dd.units {
            if self.corner_of(c).is_none() {
                problems.push(format!("unit {} has no marked upper cover", name(c)));
            }
        }
        for &s in &self.divisors {
            if matches!(s, StructuralPoint::Corner(..)) && !absorbed.contains(&s) {
                free.push(t_name(p, s));
            }
        }
        let declared: Vec<String> = dd
            .hat_circ
            .iter()
            .map(|&c| w(c))
            .chain((0..self.d()).map(z))
            .chain((0..self.d()).map(t))
            .chain(self.divisors.iter().filter(|s| matches!(s, StructuralPoint::Corner(..))).map(|&s| t_name(p, s)))
            .collect();
        let counts = cox_counts(p)?;
        let pass = problems.is_empty() && free.len() == counts.variables;
        Ok(Presentation { pass, declared, relations, eliminated, free_count: free.len(), free, expected: counts.variables, problems })
    }

    /// Orders of the boundary units along all divisors against the monomial
    /// pattern of the unit relation.
    pub fn eta_unit_check(&self) -> Result<EtaReport> {
        let dd = self.m.dual()?;
        let p = &self.m.poset;
        let mut units = Vec::new();
        let mut pass = true;
        for &c in &dd.units {
            let nu = self.m.hat_e(c)?;
            let ord: Vec<i64> = self.divisors.iter().map(|&s| self.m.eval_structural(s, &nu.0)).collect();
            let expected = self.closed_orders(c)?;
            let ok = ord == expected;
            pass &= ok;
            let exps: BTreeMap<String, i64> = self
                .divisors
                .iter()
                .zip(&ord)
                .filter(|(_, &v)| v != 0)
                .map(|(&s, &v)| (t_name(p, s), v))
                .collect();
            units.push(json!({ "unit": var_name('X', p.coord_name(c)), "exponents": exps, "pass": ok }));
        }
        Ok(EtaReport { pass, units })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GeneratorReport {
    pub pass: bool,
    pub signs: Vec<i8>,
    pub unimodular: bool,
    pub divisor_order: Vec<String>,
    pub e: usize,
    pub v: Vec<(String, BTreeMap<String, i64>)>,
    pub f: Vec<(String, BTreeMap<String, i64>)>,
    pub members: usize,
    pub problems: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Presentation {
    pub pass: bool,
    pub declared: Vec<String>,
    pub relations: Vec<String>,
    pub eliminated: Vec<Value>,
    pub free: Vec<String>,
    pub free_count: usize,
    pub expected: usize,
    pub problems: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EtaReport {
    pub pass: bool,
    pub units: Vec<Value>,
}

/// All sign vectors for the tailed coordinates, `−1` before `+1`.
pub fn sign_vectors(k: usize) -> Vec<Vec<i8>> {
    (0..1u64 << k).map(|bits| (0..k).map(|i| if bits >> i & 1 == 1 { 1 } else { -1 }).collect()).collect()
}

/// The variable count the closed formulas predict for the GT families.
pub fn expected_variables(f: Family) -> Option<usize> {
    match f {
        Family::GtC(n) => Some(2 * n * n),
        Family::GtA(n) => Some(n * (n + 1)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marked_poset::{basic_pi1, basic_pi2, gt_type_a, gt_type_c};

    #[test]
    fn counts_match_the_closed_formulas() {
        for n in 1..=4usize {
            let la: Vec<i64> = (0..=n as i64).map(|i| 2 * i).collect();
            let lc: Vec<i64> = (1..=n as i64).map(|i| 2 * i).collect();
            let a = gt_type_a(n, &la).unwrap();
            let c = gt_type_c(n, &lc).unwrap();
            assert_eq!(cox_counts(&a).unwrap().variables, n * (n + 1));
            assert_eq!(cox_counts(&c).unwrap().variables, 2 * n * n);
        }
    }

    #[test]
    fn generators_for_every_sign_vector() {
        for poset in [gt_type_c(2, &[2, 4]).unwrap(), gt_type_a(2, &[0, 2, 4]).unwrap(), gt_type_c(3, &[2, 4, 6]).unwrap()] {
            let m = Polyptych::new(&poset);
            let cox = Cox::new(&m).unwrap();
            let k = m.dual().unwrap().hat_circ.len();
            for s in sign_vectors(k) {
                let rep = cox.semigroup_generators(&s).unwrap();
                assert!(rep.pass, "{:?}", rep.problems);
            }
        }
    }

    #[test]
    fn example_generators_type_c() {
        let m = Polyptych::new(&gt_type_c(2, &[2, 4]).unwrap());
        let cox = Cox::new(&m).unwrap();
        let rep = cox.semigroup_generators(&[1, 1]).unwrap();
        let v1 = &rep.v.iter().find(|(q, _)| q == "q_{1,2}").unwrap().1;
        let want: BTreeMap<String, i64> = [
            ("e[q_{1,1}]", 1),
            ("e[q_{1,2}]", 1),
            ("r[q_{1,1}]", -1),
            ("r[q_{1,2}]", -1),
            ("r[q_{2,1}]", 1),
            ("r[q*_1,q_{1,2}]", 1),
        ]
        .into_iter()
        .map(|(a, b)| (a.to_string(), b))
        .collect();
        assert_eq!(v1, &want);
    }

    #[test]
    fn presentation_and_units() {
        for (poset, n) in [(gt_type_c(2, &[2, 4]).unwrap(), 8), (gt_type_a(2, &[0, 2, 4]).unwrap(), 6)] {
            let m = Polyptych::new(&poset);
            let cox = Cox::new(&m).unwrap();
            let pres = cox.presentation().unwrap();
            assert!(pres.pass, "{pres:?}");
            assert_eq!(pres.free_count, n);
            assert!(cox.eta_unit_check().unwrap().pass);
        }
        let m = Polyptych::new(&gt_type_c(2, &[2, 4]).unwrap());
        let eta = Cox::new(&m).unwrap().eta_unit_check().unwrap();
        assert_eq!(
            eta.units[0]["exponents"],
            json!({ "t[q_{1,1}]": 1, "t[q_{1,2}]": 1, "t[q_{2,1}]": -1, "t[q*_1,q_{1,2}]": -1 })
        );
        assert_eq!(eta.units[1]["exponents"], json!({ "t[q_{3,1}]": 1, "t[q*_2,q_{3,1}]": -1 }));
    }

    #[test]
    fn zigzag_builders_have_counts() {
        for p in [basic_pi1(2).unwrap(), basic_pi2(2, 4).unwrap()] {
            let c = cox_counts(&p).unwrap();
            assert_eq!(c.variables, c.dim - c.u + c.l);
        }
    }
}
