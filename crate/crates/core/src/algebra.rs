//! The detropicalization algebra `𝒜 = k[X_p, Y_p] / (g_p)`.
//!
//! Each unmarked `p` carries one relation `g_p = X_p Y_p − 1 − tail`, where
//! the tail is `0`, `Y_q`, or `X_{p′} Y_q` with `q, p′` one rank above `p`.
//! The leading terms `X_p Y_p` are pairwise coprime, so rewriting them away
//! gives a normal form whose monomials are the standard ones
//! (`min(a_p, b_p) = 0`).

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{bail, Result};
use crate::geometry::{self, rat, rat_str, Rat};
use crate::marked_poset::{MarkedPoset, Tail};
use crate::polyptych::{MElement, Polyptych};
use crate::rng;
use crate::semialgebra::{self, Comparator, SElem};

/// Exponents `(a_p, b_p)` of `X_p^{a_p} Y_p^{b_p}` per coordinate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(pub Vec<[u32; 2]>);

impl Monomial {
    pub fn one(d: usize) -> Self {
        Monomial(vec![[0, 0]; d])
    }

    pub fn x(d: usize, p: usize) -> Self {
        let mut m = Monomial::one(d);
        m.0[p][0] = 1;
        m
    }

    pub fn y(d: usize, p: usize) -> Self {
        let mut m = Monomial::one(d);
        m.0[p][1] = 1;
        m
    }

    pub fn is_standard(&self) -> bool {
        self.0.iter().all(|e| e[0] == 0 || e[1] == 0)
    }

    pub fn mul(&self, o: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&o.0).map(|(a, b)| [a[0] + b[0], a[1] + b[1]]).collect())
    }

    pub fn pow(&self, k: u32) -> Monomial {
        Monomial(self.0.iter().map(|e| [e[0] * k, e[1] * k]).collect())
    }

    /// Standard monomial with `a_p − b_p = c_p`.
    pub fn from_diff(c: &[i64]) -> Monomial {
        Monomial(c.iter().map(|&v| [v.max(0) as u32, (-v).max(0) as u32]).collect())
    }

    pub fn diff(&self) -> Vec<i64> {
        self.0.iter().map(|e| e[0] as i64 - e[1] as i64).collect()
    }

    pub fn coprime(&self, o: &Monomial) -> bool {
        self.0.iter().zip(&o.0).all(|(a, b)| (a[0] == 0 || b[0] == 0) && (a[1] == 0 || b[1] == 0))
    }
}

/// A finite rational combination of monomials.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Elem(pub BTreeMap<Monomial, Rat>);

impl Elem {
    pub fn zero() -> Self {
        Elem(BTreeMap::new())
    }

    pub fn term(m: Monomial, c: Rat) -> Self {
        let mut e = Elem::zero();
        e.add_term(m, c);
        e
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add_term(&mut self, m: Monomial, c: Rat) {
        let slot = self.0.entry(m).or_insert_with(Rat::zero);
        *slot += c;
        if slot.is_zero() {
            self.0.retain(|_, v| !v.is_zero());
        }
    }

    pub fn plus(&self, o: &Elem) -> Elem {
        let mut out = self.clone();
        for (m, c) in &o.0 {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> Elem {
        if c.is_zero() {
            return Elem::zero();
        }
        Elem(self.0.iter().map(|(m, v)| (m.clone(), v * c)).collect())
    }

    /// Formal product, no reduction.
    pub fn formal_mul(&self, o: &Elem) -> Elem {
        let mut out = Elem::zero();
        for (m1, c1) in &self.0 {
            for (m2, c2) in &o.0 {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    pub fn support(&self) -> impl Iterator<Item = &Monomial> {
        self.0.keys()
    }
}

/// Relation data: tail per coordinate, in coordinate indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoordTail {
    None,
    Y(usize),
    XY(usize, usize),
}

#[derive(Debug, Clone)]
pub struct Algebra {
    pub poset: MarkedPoset,
    pub tails: Vec<CoordTail>,
    pub rank: Vec<usize>,
    hat_e: Vec<Vec<usize>>,
    next: Vec<Option<usize>>,
    units: usize,
}

/// Monomial orders used by the rewriting.
pub enum Order<'a> {
    /// Smallest rank first, ties by coordinate index.
    Rank,
    Random(&'a mut rng::Stream),
}

fn binomial(m: u32, i: u32) -> Rat {
    let mut c = num_bigint::BigInt::one();
    for k in 0..i {
        c = c * (m - k) / (k + 1);
    }
    Rat::from_integer(c)
}

pub fn var_name(prefix: char, name: &str) -> String {
    match name.strip_prefix("q_") {
        Some(rest) => format!("{prefix}_{rest}"),
        None => format!("{prefix}_{{{name}}}"),
    }
}

impl Algebra {
    /// Builds the relations from the level classification.
    pub fn new(poset: &MarkedPoset) -> Result<Self> {
        let spade = poset.classify_spade()?;
        let d = poset.dim();
        let coord = |e: usize| poset.coord_of(e);
        let mut tails = Vec::with_capacity(d);
        let mut hat_e = Vec::with_capacity(d);
        let mut next = Vec::with_capacity(d);
        let mut rank = Vec::with_capacity(d);
        for &e in poset.coords() {
            tails.push(match spade.tail(e) {
                Tail::None => CoordTail::None,
                Tail::Y(q) => match coord(q) {
                    Some(q) => CoordTail::Y(q),
                    None => CoordTail::None,
                },
                Tail::XY(p, q) => match (coord(p), coord(q)) {
                    (Some(p), Some(q)) => CoordTail::XY(p, q),
                    (None, Some(q)) => CoordTail::Y(q),
                    _ => CoordTail::None,
                },
            });
            hat_e.push(spade.hat_e(e).into_iter().filter_map(coord).collect());
            next.push(spade.next_lower(e).and_then(coord));
            rank.push(poset.rank(e)?);
        }
        for (c, t) in tails.iter().enumerate() {
            let refs: Vec<usize> = match *t {
                CoordTail::None => vec![],
                CoordTail::Y(q) => vec![q],
                CoordTail::XY(p, q) => vec![p, q],
            };
            if refs.iter().any(|&r| rank[r] <= rank[c]) {
                bail!(SpadeViolation, "tail of {} does not lie in a higher rank", poset.coord_name(c));
            }
        }
        let units = spade.units_per_level(poset).values().sum();
        Ok(Algebra { poset: poset.clone(), tails, rank, hat_e, next, units })
    }

    pub fn dim(&self) -> usize {
        self.tails.len()
    }

    /// `U_𝓜` from the classification.
    pub fn unit_rank(&self) -> usize {
        self.units
    }

    pub fn tail_monomial(&self, p: usize) -> Option<Monomial> {
        let d = self.dim();
        match self.tails[p] {
            CoordTail::None => None,
            CoordTail::Y(q) => Some(Monomial::y(d, q)),
            CoordTail::XY(p2, q) => Some(Monomial::x(d, p2).mul(&Monomial::y(d, q))),
        }
    }

    pub fn leading_monomials(&self) -> Vec<Monomial> {
        (0..self.dim()).map(|p| Monomial::x(self.dim(), p).mul(&Monomial::y(self.dim(), p))).collect()
    }

    /// The relation `g_p` as a formal polynomial.
    pub fn relation(&self, p: usize) -> Elem {
        let d = self.dim();
        let mut g = Elem::term(self.leading_monomials()[p].clone(), rat(1));
        g.add_term(Monomial::one(d), rat(-1));
        if let Some(t) = self.tail_monomial(p) {
            g.add_term(t, rat(-1));
        }
        g
    }

    pub fn relations_json(&self) -> Value {
        let p = &self.poset;
        let rels: Vec<Value> = (0..self.dim())
            .map(|c| {
                let x = var_name('X', p.coord_name(c));
                let y = var_name('Y', p.coord_name(c));
                let tail = match self.tails[c] {
                    CoordTail::None => None,
                    CoordTail::Y(q) => Some(var_name('Y', p.coord_name(q))),
                    CoordTail::XY(a, q) => Some(format!("{}{}", var_name('X', p.coord_name(a)), var_name('Y', p.coord_name(q)))),
                };
                let text = match &tail {
                    None => format!("{x}{y} - 1"),
                    Some(t) => format!("{x}{y} - 1 - {t}"),
                };
                json!({ "element": p.coord_name(c), "relation": text, "tail": tail })
            })
            .collect();
        json!(rels)
    }

    fn rewrite_step(&self, m: &Monomial, p: usize) -> Vec<(Monomial, Rat)> {
        let k = m.0[p][0].min(m.0[p][1]);
        let mut base = m.clone();
        base.0[p][0] -= k;
        base.0[p][1] -= k;
        match self.tail_monomial(p) {
            None => vec![(base, rat(1))],
            Some(t) => (0..=k).map(|i| (base.mul(&t.pow(i)), binomial(k, i))).collect(),
        }
    }

    /// Rewrites until only standard monomials remain.
    pub fn normal_form_with(&self, f: &Elem, order: &mut Order) -> Elem {
        let mut out = Elem::zero();
        let mut work: BTreeMap<Monomial, Rat> = f.0.clone();
        while let Some((m, c)) = work.pop_first() {
            let reducible: Vec<usize> = (0..self.dim()).filter(|&p| m.0[p][0] > 0 && m.0[p][1] > 0).collect();
            if reducible.is_empty() {
                out.add_term(m, c);
                continue;
            }
            let p = match order {
                Order::Rank => *reducible.iter().min_by_key(|&&p| (self.rank[p], p)).unwrap(),
                Order::Random(g) => reducible[g.gen_range(0..reducible.len())],
            };
            for (m2, c2) in self.rewrite_step(&m, p) {
                let slot = work.entry(m2.clone()).or_insert_with(Rat::zero);
                *slot += &c * c2;
                if slot.is_zero() {
                    work.remove(&m2);
                }
            }
        }
        out
    }

    pub fn normal_form(&self, f: &Elem) -> Elem {
        self.normal_form_with(f, &mut Order::Rank)
    }

    pub fn multiply(&self, f: &Elem, g: &Elem) -> Elem {
        self.normal_form(&f.formal_mul(g))
    }

    pub fn add(&self, f: &Elem, g: &Elem) -> Elem {
        self.normal_form(&f.plus(g))
    }

    pub fn one(&self) -> Elem {
        Elem::term(Monomial::one(self.dim()), rat(1))
    }

    pub fn x(&self, p: usize) -> Elem {
        Elem::term(Monomial::x(self.dim(), p), rat(1))
    }

    pub fn y(&self, p: usize) -> Elem {
        Elem::term(Monomial::y(self.dim(), p), rat(1))
    }

    /// `m_b` in ∅-chart coordinates: `Σ (a_p − b_p) ĥe_p`.
    pub fn monomial_to_m(&self, b: &Monomial) -> MElement {
        let mut v = vec![0; self.dim()];
        for (p, c) in b.diff().into_iter().enumerate() {
            for &k in &self.hat_e[p] {
                v[k] += c;
            }
        }
        MElement(v)
    }

    /// The standard monomial mapped to `m`.
    pub fn m_to_monomial(&self, m: &MElement) -> Monomial {
        let c: Vec<i64> = (0..self.dim()).map(|p| m.0[p] - self.next[p].map_or(0, |n| m.0[n])).collect();
        Monomial::from_diff(&c)
    }

    /// `ν(f)`: the generating set `{m_b}` over the support.
    pub fn valuation(&self, f: &Elem) -> SElem {
        SElem::from_iter(f.support().map(|b| self.monomial_to_m(b)))
    }

    pub fn to_json(&self, f: &Elem) -> Value {
        let p = &self.poset;
        let terms: Vec<Value> = f
            .0
            .iter()
            .map(|(m, c)| {
                let mono: BTreeMap<String, [u32; 2]> = m
                    .0
                    .iter()
                    .enumerate()
                    .filter(|(_, e)| e[0] + e[1] > 0)
                    .map(|(i, e)| (p.coord_name(i).to_string(), *e))
                    .collect();
                json!({ "mono": mono, "coef": rat_str(c) })
            })
            .collect();
        json!(terms)
    }

    pub fn from_json(&self, v: &Value) -> Result<Elem> {
        let Some(terms) = v.as_array() else { bail!(BadInput, "an element is a list of terms") };
        let mut out = Elem::zero();
        for t in terms {
            let mut m = Monomial::one(self.dim());
            if let Some(mono) = t.get("mono").and_then(Value::as_object) {
                for (name, e) in mono {
                    let Some(c) = crate::mco::resolve_name(&self.poset, name).and_then(|e| self.poset.coord_of(e)) else {
                        bail!(BadInput, "unknown coordinate {name}")
                    };
                    let ab: Vec<u64> = e.as_array().map(|a| a.iter().filter_map(Value::as_u64).collect()).unwrap_or_default();
                    if ab.len() != 2 {
                        bail!(BadInput, "exponent of {name} must be [a, b]");
                    }
                    m.0[c] = [ab[0] as u32, ab[1] as u32];
                }
            }
            let coef = match t.get("coef") {
                None => rat(1),
                Some(Value::String(s)) => s.parse::<Rat>().map_err(|_| crate::Error::new(crate::Code::BadInput, format!("bad coefficient {s}")))?,
                Some(Value::Number(n)) => rat(n.as_i64().unwrap_or(1)),
                Some(_) => bail!(BadInput, "coefficient must be a string or integer"),
            };
            out.add_term(m, coef);
        }
        Ok(self.normal_form(&out))
    }

    /// Seeded sparse element: up to `terms` standard monomials with
    /// `|a_p − b_p| ≤ r`, each coordinate nonzero with probability 1/2.
    pub fn random_sparse(&self, g: &mut rng::Stream, terms: usize, r: i64) -> Elem {
        let mut out = Elem::zero();
        let count = g.gen_range(1..=terms);
        while out.0.len() < count {
            let c: Vec<i64> = (0..self.dim()).map(|_| if g.gen_bool(0.5) { g.gen_range(-r..=r) } else { 0 }).collect();
            let mut coef = g.gen_range(-3i64..=3);
            if coef == 0 {
                coef = 1;
            }
            out.add_term(Monomial::from_diff(&c), rat(coef));
        }
        out
    }
}

/// True when the leading monomials are pairwise coprime.
pub fn leading_coprime_check(leading: &[Monomial]) -> bool {
    leading.iter().enumerate().all(|(i, a)| leading[i + 1..].iter().all(|b| a.coprime(b)))
}

/// How elements are compared in the semialgebra.
pub enum Equality<'a> {
    Exact(&'a Comparator<'a>),
    Sampled(&'a Polyptych, i64),
}

impl Equality<'_> {
    pub fn equal(&self, a: &SElem, b: &SElem) -> Result<bool> {
        match self {
            Equality::Exact(c) => c.equal(a, b),
            Equality::Sampled(m, r) => Ok(semialgebra::equal(m, a, b, semialgebra::Mode::Sampled(*r))?.holds()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Equality::Exact(_) => "EXACT",
            Equality::Sampled(..) => "SAMPLED",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValuationReport {
    pub pass: bool,
    pub mode: &'static str,
    pub pairs: usize,
    pub product_checks: usize,
    pub sum_checks: usize,
    pub zero_divisor_checks: usize,
    pub failures: Vec<Value>,
}

/// `ν(fg) ≡ ν(f) ⋆ ν(g)` and `ν(f + g) ≥ ν(f) ⊕ ν(g)` on seeded sparse pairs.
pub fn verify_valuation(alg: &Algebra, m: &Polyptych, eq: &Equality, seed: u64, count: usize) -> Result<ValuationReport> {
    let mut g = rng::stream(seed, 7);
    let mut failures = Vec::new();
    let (mut prod, mut sum, mut zd) = (0, 0, 0);
    for i in 0..count {
        let f = alg.random_sparse(&mut g, 2, 2);
        let h = alg.random_sparse(&mut g, 2, 2);
        let fh = alg.multiply(&f, &h);
        zd += 1;
        if fh.is_zero() {
            failures.push(json!({ "draw": i, "kind": "zero_divisor", "f": alg.to_json(&f), "g": alg.to_json(&h) }));
            continue;
        }
        let lhs = alg.valuation(&fh);
        let rhs = semialgebra::star(m, &alg.valuation(&f), &alg.valuation(&h));
        prod += 1;
        if !eq.equal(&lhs, &rhs)? {
            failures.push(json!({ "draw": i, "kind": "product", "f": alg.to_json(&f), "g": alg.to_json(&h) }));
        }
        let s = alg.add(&f, &h);
        let both = semialgebra::oplus(&alg.valuation(&f), &alg.valuation(&h));
        sum += 1;
        if !eq.equal(&semialgebra::oplus(&both, &alg.valuation(&s)), &both)? {
            failures.push(json!({ "draw": i, "kind": "sum", "f": alg.to_json(&f), "g": alg.to_json(&h) }));
        }
    }
    Ok(ValuationReport {
        pass: failures.is_empty(),
        mode: eq.name(),
        pairs: count,
        product_checks: prod,
        sum_checks: sum,
        zero_divisor_checks: zd,
        failures,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EpsilonIdentity {
    pub element: String,
    pub pass: bool,
}

/// `ν(X_p) ⋆ ν(Y_p) ≡ ν(1 + tail_p)` for every coordinate.
pub fn epsilon_identities(alg: &Algebra, m: &Polyptych, eq: &Equality) -> Result<Vec<EpsilonIdentity>> {
    let mut out = Vec::new();
    for p in 0..alg.dim() {
        let lhs = semialgebra::star(m, &alg.valuation(&alg.x(p)), &alg.valuation(&alg.y(p)));
        let mut rhs = alg.one();
        if let Some(t) = alg.tail_monomial(p) {
            rhs.add_term(t, rat(1));
        }
        let rhs = alg.valuation(&alg.normal_form(&rhs));
        out.push(EpsilonIdentity { element: alg.poset.coord_name(p).to_string(), pass: eq.equal(&lhs, &rhs)? });
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct BijectionCheck {
    pub pass: bool,
    pub injective_radius: i64,
    pub monomials: usize,
    pub collisions: usize,
    pub surjective_radius: i64,
    pub targets: usize,
    pub misses: usize,
}

/// Injectivity of `b ↦ m_b` on an exponent box and surjectivity onto a box of
/// ∅-coordinates.
pub fn adapted_basis_check(alg: &Algebra, inj_r: i64, surj_r: i64) -> BijectionCheck {
    let d = alg.dim();
    let mut seen = BTreeSet::new();
    let mut monomials = 0;
    let mut collisions = 0;
    crate::polyptych::for_each_box_point(&vec![-inj_r; d], &vec![inj_r; d], |c| {
        monomials += 1;
        if !seen.insert(alg.monomial_to_m(&Monomial::from_diff(c))) {
            collisions += 1;
        }
    });
    let mut targets = 0;
    let mut misses = 0;
    crate::polyptych::for_each_box_point(&vec![-surj_r; d], &vec![surj_r; d], |x| {
        targets += 1;
        let m = MElement(x.to_vec());
        let b = alg.m_to_monomial(&m);
        if !b.is_standard() || alg.monomial_to_m(&b) != m {
            misses += 1;
        }
    });
    BijectionCheck {
        pass: collisions == 0 && misses == 0,
        injective_radius: inj_r,
        monomials,
        collisions,
        surjective_radius: surj_r,
        targets,
        misses,
    }
}

/// Laurent polynomial in the `X` variables.
type Laurent = BTreeMap<Vec<i64>, Rat>;

fn laurent_mul(a: &Laurent, b: &Laurent) -> Laurent {
    let mut out = Laurent::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e: Vec<i64> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            *out.entry(e).or_insert_with(Rat::zero) += ca * cb;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn laurent_add(a: &Laurent, b: &Laurent, sign: i64) -> Laurent {
    let mut out = a.clone();
    for (e, c) in b {
        *out.entry(e.clone()).or_insert_with(Rat::zero) += c * rat(sign);
    }
    out.retain(|_, c| !c.is_zero());
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct UnitReport {
    pub pass: bool,
    pub units: Vec<String>,
    pub unit_rank: usize,
    pub classification_u: usize,
    pub unit_products_one: bool,
    pub krull_dimension: usize,
    pub laurent: bool,
}

/// Unit elements and the Laurent shadow of the localization at all `X`.
pub fn unit_and_dimension_report(alg: &Algebra) -> UnitReport {
    let d = alg.dim();
    let units: Vec<usize> = (0..d).filter(|&p| alg.tails[p] == CoordTail::None).collect();
    let unit_products_one = units.iter().all(|&p| alg.multiply(&alg.x(p), &alg.y(p)) == alg.one());
    // Y_p = X_p^{-1}(1 + tail), substituted from the top rank down
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by_key(|&p| std::cmp::Reverse(alg.rank[p]));
    let unit_vec = |p: usize, s: i64| {
        let mut e = vec![0; d];
        e[p] = s;
        e
    };
    let one: Laurent = BTreeMap::from([(vec![0; d], rat(1))]);
    let mut ys: Vec<Option<Laurent>> = vec![None; d];
    let mut laurent = true;
    for &p in &order {
        let tail = match alg.tails[p] {
            CoordTail::None => Laurent::new(),
            CoordTail::Y(q) => ys[q].clone().unwrap_or_default(),
            CoordTail::XY(a, q) => laurent_mul(&BTreeMap::from([(unit_vec(a, 1), rat(1))]), &ys[q].clone().unwrap_or_default()),
        };
        let rhs = laurent_add(&one, &tail, 1);
        let y = laurent_mul(&BTreeMap::from([(unit_vec(p, -1), rat(1))]), &rhs);
        // X_p Y_p − 1 − tail must vanish identically
        let check = laurent_add(&laurent_mul(&BTreeMap::from([(unit_vec(p, 1), rat(1))]), &y), &rhs, -1);
        laurent &= check.is_empty() && !y.is_empty();
        ys[p] = Some(y);
    }
    let pass = unit_products_one && laurent && units.len() == alg.unit_rank();
    UnitReport {
        pass,
        units: units.iter().map(|&p| alg.poset.coord_name(p).to_string()).collect(),
        unit_rank: units.len(),
        classification_u: alg.unit_rank(),
        unit_products_one,
        krull_dimension: d,
        laurent,
    }
}

/// Values of `(X, Y)` at a point of the variety.
#[derive(Debug, Clone)]
pub struct VarietyPoint {
    pub x: Vec<Rat>,
    pub y: Vec<Rat>,
}

impl Algebra {
    fn tail_value(&self, p: usize, pt: &VarietyPoint) -> Rat {
        match self.tails[p] {
            CoordTail::None => rat(0),
            CoordTail::Y(q) => pt.y[q].clone(),
            CoordTail::XY(a, q) => &pt.x[a] * &pt.y[q],
        }
    }

    fn top_down(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by_key(|&p| (std::cmp::Reverse(self.rank[p]), p));
        order
    }

    pub fn on_variety(&self, pt: &VarietyPoint) -> bool {
        (0..self.dim()).all(|p| &pt.x[p] * &pt.y[p] - rat(1) - self.tail_value(p, pt) == rat(0))
    }

    /// Torus point with the given nonzero `X`; `Y` solved from the top rank down.
    pub fn torus_point(&self, x: Vec<Rat>) -> VarietyPoint {
        let mut pt = VarietyPoint { y: vec![rat(0); x.len()], x };
        for p in self.top_down() {
            pt.y[p] = (rat(1) + self.tail_value(p, &pt)) / &pt.x[p];
        }
        pt
    }

    /// Point with `X_p = Y_p = 0` for a coordinate with a tail, forcing the
    /// tail to equal `−1`. Retries the free `X` values until solvable.
    pub fn degenerate_point(&self, p: usize, g: &mut rng::Stream) -> Option<VarietyPoint> {
        let (xp, q) = match self.tails[p] {
            CoordTail::None => return None,
            CoordTail::Y(q) => (None, q),
            CoordTail::XY(a, q) => (Some(a), q),
        };
        for _ in 0..100 {
            let x: Vec<Rat> = (0..self.dim()).map(|_| random_nonzero(g)).collect();
            let mut pt = VarietyPoint { y: vec![rat(0); x.len()], x };
            let mut ok = true;
            for c in self.top_down() {
                if c == p {
                    pt.x[c] = rat(0);
                    pt.y[c] = rat(0);
                    continue;
                }
                let t = rat(1) + self.tail_value(c, &pt);
                if c == q {
                    if t.is_zero() {
                        ok = false;
                        break;
                    }
                    // Y_q = t / X_q must equal −1 / X_{p′}
                    pt.x[q] = -&t * xp.map_or(rat(1), |a| pt.x[a].clone());
                }
                if pt.x[c].is_zero() {
                    ok = false;
                    break;
                }
                pt.y[c] = t / &pt.x[c];
            }
            if ok && self.on_variety(&pt) {
                return Some(pt);
            }
        }
        None
    }

    /// Jacobian of `(g_p)` in the variables `X_1..X_N, Y_1..Y_N`.
    pub fn jacobian(&self, pt: &VarietyPoint) -> Vec<Vec<Rat>> {
        let d = self.dim();
        (0..d)
            .map(|p| {
                let mut row = vec![rat(0); 2 * d];
                row[p] = pt.y[p].clone();
                row[d + p] = pt.x[p].clone();
                match self.tails[p] {
                    CoordTail::None => {}
                    CoordTail::Y(q) => row[d + q] -= rat(1),
                    CoordTail::XY(a, q) => {
                        row[a] -= &pt.y[q];
                        row[d + q] -= &pt.x[a];
                    }
                }
                row
            })
            .collect()
    }
}

fn random_nonzero(g: &mut rng::Stream) -> Rat {
    let num = loop {
        let v = g.gen_range(-6i64..=6);
        if v != 0 {
            break v;
        }
    };
    Rat::new(num.into(), g.gen_range(1i64..=3).into())
}

#[derive(Debug, Clone, Serialize)]
pub struct JacobianReport {
    pub pass: bool,
    pub n: usize,
    pub samples: usize,
    pub min_rank: usize,
    pub degenerate: Option<Value>,
    pub failures: Vec<Value>,
}

/// Exact Jacobian rank at seeded torus points plus one degenerate point.
pub fn jacobian_rank_at_samples(alg: &Algebra, seed: u64, count: usize) -> Result<JacobianReport> {
    let d = alg.dim();
    let mut g = rng::stream(seed, 13);
    let mut failures = Vec::new();
    let mut min_rank = d;
    let fmt = |pt: &VarietyPoint| {
        json!({
            "x": pt.x.iter().map(rat_str).collect::<Vec<_>>(),
            "y": pt.y.iter().map(rat_str).collect::<Vec<_>>(),
        })
    };
    let check = |pt: &VarietyPoint, draw: Option<usize>, failures: &mut Vec<Value>| -> Result<usize> {
        if !alg.on_variety(pt) {
            bail!(RankFail, "sample point is not on the variety");
        }
        let r = geometry::rank(&alg.jacobian(pt));
        if r != d {
            failures.push(json!({ "draw": draw, "rank": r, "point": fmt(pt) }));
        }
        Ok(r)
    };
    for i in 0..count {
        let x: Vec<Rat> = (0..d).map(|_| random_nonzero(&mut g)).collect();
        let pt = alg.torus_point(x);
        min_rank = min_rank.min(check(&pt, Some(i), &mut failures)?);
    }
    let mut degenerate = None;
    if let Some(p) = (0..d).find(|&p| alg.tails[p] != CoordTail::None) {
        match alg.degenerate_point(p, &mut g) {
            Some(pt) => {
                let r = check(&pt, None, &mut failures)?;
                min_rank = min_rank.min(r);
                degenerate = Some(json!({ "element": alg.poset.coord_name(p), "rank": r, "point": fmt(&pt) }));
            }
            None => failures.push(json!({ "element": alg.poset.coord_name(p), "reason": "no degenerate point found" })),
        }
    }
    Ok(JacobianReport { pass: failures.is_empty(), n: d, samples: count, min_rank, degenerate, failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marked_poset::{gt_type_a, gt_type_c};

    fn c2() -> Algebra {
        Algebra::new(&gt_type_c(2, &[2, 4]).unwrap()).unwrap()
    }

    fn a2() -> Algebra {
        Algebra::new(&gt_type_a(2, &[0, 2, 4]).unwrap()).unwrap()
    }

    fn idx(alg: &Algebra, name: &str) -> usize {
        crate::mco::resolve_name(&alg.poset, name).and_then(|e| alg.poset.coord_of(e)).unwrap()
    }

    #[test]
    fn relations_match_the_gt_examples() {
        let c = c2();
        let texts: Vec<String> =
            c.relations_json().as_array().unwrap().iter().map(|r| r["relation"].as_str().unwrap().to_string()).collect();
        assert_eq!(
            texts,
            [
                "X_{1,1}Y_{1,1} - 1 - Y_{2,1}",
                "X_{1,2}Y_{1,2} - 1",
                "X_{2,1}Y_{2,1} - 1 - Y_{3,1}",
                "X_{3,1}Y_{3,1} - 1",
            ]
        );
        let a = a2();
        let texts: Vec<String> =
            a.relations_json().as_array().unwrap().iter().map(|r| r["relation"].as_str().unwrap().to_string()).collect();
        assert_eq!(texts, ["X_{1,2}Y_{1,2} - 1", "X_{2,1}Y_{2,1} - 1 - Y_{3,1}", "X_{3,1}Y_{3,1} - 1"]);
        assert!(leading_coprime_check(&c.leading_monomials()));
        let mut dup = c.leading_monomials();
        dup.push(dup[0].clone());
        assert!(!leading_coprime_check(&dup));
    }

    #[test]
    fn normal_form_examples() {
        let a = a2();
        let (p21, p31) = (idx(&a, "q_{2,1}"), idx(&a, "q_{3,1}"));
        let lhs = a.multiply(&a.x(p21), &a.y(p21));
        assert_eq!(lhs, a.one().plus(&a.y(p31)));
        assert_eq!(a.multiply(&a.x(p31), &a.y(p31)), a.one());
        let c = c2();
        let (p11, p21, p31) = (idx(&c, "q_{1,1}"), idx(&c, "q_{2,1}"), idx(&c, "q_{3,1}"));
        let f = c.x(p11).formal_mul(&c.y(p11)).formal_mul(&c.x(p21)).formal_mul(&c.y(p21));
        let expected = c.one().plus(&c.y(p21)).formal_mul(&c.one().plus(&c.y(p31)));
        assert_eq!(c.normal_form(&f), expected);
    }

    #[test]
    fn normal_form_is_confluent() {
        let c = c2();
        let mut g = rng::stream(0, 1);
        let mut h = rng::stream(0, 2);
        for _ in 0..1000 {
            let mut f = Elem::zero();
            for _ in 0..2 {
                let m = Monomial((0..c.dim()).map(|_| [g.gen_range(0..3), g.gen_range(0..3)]).collect());
                f.add_term(m, rat(g.gen_range(1..4)));
            }
            let a = c.normal_form(&f);
            let b = c.normal_form_with(&f, &mut Order::Random(&mut h));
            assert_eq!(a, b);
            assert_eq!(c.normal_form(&a), a);
            assert!(a.support().all(Monomial::is_standard));
        }
    }

    #[test]
    fn monomial_images() {
        let c = c2();
        let m = c.monomial_to_m(&Monomial::x(4, idx(&c, "q_{2,1}")));
        assert_eq!(m.0, vec![0, 0, 1, 0]);
        let m = c.monomial_to_m(&Monomial::x(4, idx(&c, "q_{1,2}")));
        assert_eq!(m.0, vec![1, 1, 0, 0]);
        assert!(adapted_basis_check(&c, 3, 2).pass);
    }

    #[test]
    fn valuation_is_multiplicative() {
        for alg in [c2(), a2()] {
            let m = Polyptych::new(&alg.poset);
            let cmp = Comparator::new(&m).unwrap();
            let eq = Equality::Exact(&cmp);
            let rep = verify_valuation(&alg, &m, &eq, 0, 40).unwrap();
            assert!(rep.pass, "{:?}", rep.failures);
            assert!(epsilon_identities(&alg, &m, &eq).unwrap().iter().all(|e| e.pass));
        }
    }

    #[test]
    fn units_and_laurent() {
        let c = c2();
        let r = unit_and_dimension_report(&c);
        assert!(r.pass);
        assert_eq!(r.units, ["q_{1,2}", "q_{3,1}"]);
        let a = unit_and_dimension_report(&a2());
        assert!(a.pass);
        assert_eq!(a.unit_rank, 2);
    }

    #[test]
    fn jacobian_has_full_rank() {
        let rep = jacobian_rank_at_samples(&c2(), 0, 50).unwrap();
        assert!(rep.pass, "{:?}", rep.failures);
        assert_eq!(rep.min_rank, 4);
        assert_eq!(rep.degenerate.as_ref().unwrap()["element"], "q_{1,1}");
    }
}
