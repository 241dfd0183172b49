//! Finite graded marked posets `(Π, Π*, λ)`.
//!
//! A [`MarkedPoset`] stores its Hasse diagram, the marked subset with its
//! integer marking, and (when the poset is graded) the rank function. The
//! module also builds the standard families (Gelfand–Tsetlin posets of types
//! A and C, and the two zigzag posets), classifies the level components used
//! by the relation recipe, and picks the shift vector `u`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{bail, Code, Error, Result};

/// Which builder produced a poset. Family-specific routines (dual lattices,
/// Cox presentations) refuse to run on [`Family::General`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "family", content = "n", rename_all = "camelCase")]
pub enum Family {
    GtA(usize),
    GtC(usize),
    Pi1(usize),
    Pi2(usize),
    General,
}

impl Family {
    pub fn is_gt(&self) -> bool {
        matches!(self, Family::GtA(_) | Family::GtC(_))
    }

    pub fn has_dual(&self) -> bool {
        !matches!(self, Family::General)
    }
}

/// Compares names so that embedded digit runs order numerically
/// (`q_{1,2}` < `q_{1,10}`).
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    let (mut ai, mut bi) = (a.char_indices().peekable(), b.char_indices().peekable());
    loop {
        match (ai.peek().copied(), bi.peek().copied()) {
            (None, None) => return Ordering::Equal,
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some((_, ca)), Some((_, cb))) => {
                if ca.is_ascii_digit() && cb.is_ascii_digit() {
                    let mut da = String::new();
                    while let Some(&(_, c)) = ai.peek() {
                        if !c.is_ascii_digit() {
                            break;
                        }
                        da.push(c);
                        ai.next();
                    }
                    let mut db = String::new();
                    while let Some(&(_, c)) = bi.peek() {
                        if !c.is_ascii_digit() {
                            break;
                        }
                        db.push(c);
                        bi.next();
                    }
                    let ta = da.trim_start_matches('0');
                    let tb = db.trim_start_matches('0');
                    let ord = ta.len().cmp(&tb.len()).then_with(|| ta.cmp(tb)).then_with(|| da.len().cmp(&db.len()));
                    if ord != Ordering::Equal {
                        return ord;
                    }
                } else {
                    let ord = ca.cmp(&cb);
                    if ord != Ordering::Equal {
                        return ord;
                    }
                    ai.next();
                    bi.next();
                }
            }
        }
    }
}

/// Rank function and levels of a graded poset.
#[derive(Debug, Clone, Serialize)]
pub struct GradedStructure {
    pub rank: Vec<usize>,
    pub levels: Vec<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct MarkedPoset {
    names: Vec<String>,
    index: BTreeMap<String, usize>,
    lower: Vec<Vec<usize>>,
    upper: Vec<Vec<usize>>,
    marking: Vec<Option<i64>>,
    u_override: Option<BTreeMap<usize, i64>>,
    family: Family,
    gt_index: Vec<Option<(i64, i64)>>,
    graded: Option<GradedStructure>,
    coords: Vec<usize>,
    coord_of: Vec<Option<usize>>,
}

impl MarkedPoset {
    /// Builds a poset from names, cover pairs `(q, p)` meaning `q ⋖ p`, and
    /// the marking. Structural problems (unknown names, loops, cycles) are
    /// rejected here; order-theoretic invariants are reported by
    /// [`MarkedPoset::validate`].
    pub fn new(elements: Vec<String>, covers: Vec<(String, String)>, marked: BTreeMap<String, i64>) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (i, name) in elements.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                bail!(BadInput, "duplicate element name {name}");
            }
        }
        let n = elements.len();
        let mut lower = vec![Vec::new(); n];
        let mut upper = vec![Vec::new(); n];
        let mut seen = BTreeSet::new();
        for (q, p) in &covers {
            let (Some(&qi), Some(&pi)) = (index.get(q), index.get(p)) else {
                bail!(BadInput, "cover ({q}, {p}) mentions an unknown element");
            };
            if qi == pi {
                bail!(BadInput, "element {q} covers itself");
            }
            if !seen.insert((qi, pi)) {
                bail!(BadInput, "cover ({q}, {p}) listed twice");
            }
            lower[pi].push(qi);
            upper[qi].push(pi);
        }
        let mut marking = vec![None; n];
        for (name, v) in marked {
            let Some(&i) = index.get(&name) else {
                bail!(BadInput, "marking mentions unknown element {name}");
            };
            marking[i] = Some(v);
        }
        let by_name = |a: &usize, b: &usize| natural_cmp(&elements[*a], &elements[*b]);
        for l in lower.iter_mut().chain(upper.iter_mut()) {
            l.sort_by(by_name);
        }
        let mut poset = MarkedPoset {
            names: elements,
            index,
            lower,
            upper,
            marking,
            u_override: None,
            family: Family::General,
            gt_index: vec![None; n],
            graded: None,
            coords: Vec::new(),
            coord_of: vec![None; n],
        };
        if poset.topological_order().is_none() {
            bail!(BadInput, "cover relation contains a cycle");
        }
        poset.graded = poset.compute_grading().ok();
        poset.compute_coords();
        Ok(poset)
    }

    fn compute_coords(&mut self) {
        let mut coords: Vec<usize> = (0..self.len()).filter(|&i| self.marking[i].is_none()).collect();
        let rank = self.graded.as_ref().map(|g| g.rank.clone());
        coords.sort_by(|&a, &b| {
            let ra = rank.as_ref().map_or(0, |r| r[a]);
            let rb = rank.as_ref().map_or(0, |r| r[b]);
            ra.cmp(&rb).then_with(|| natural_cmp(&self.names[a], &self.names[b]))
        });
        self.coord_of = vec![None; self.len()];
        for (c, &e) in coords.iter().enumerate() {
            self.coord_of[e] = Some(c);
        }
        self.coords = coords;
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, e: usize) -> &str {
        &self.names[e]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn element(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Lower covers of `e`, sorted by name.
    pub fn lower_covers(&self, e: usize) -> &[usize] {
        &self.lower[e]
    }

    pub fn upper_covers(&self, e: usize) -> &[usize] {
        &self.upper[e]
    }

    pub fn is_marked(&self, e: usize) -> bool {
        self.marking[e].is_some()
    }

    pub fn marking(&self, e: usize) -> Option<i64> {
        self.marking[e]
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// The `(i, j)` index of a Gelfand–Tsetlin element `q_{i,j}`.
    pub fn gt_index(&self, e: usize) -> Option<(i64, i64)> {
        self.gt_index[e]
    }

    pub fn gt_element(&self, i: i64, j: i64) -> Option<usize> {
        (0..self.len()).find(|&e| self.gt_index[e] == Some((i, j)))
    }

    /// Unmarked elements in coordinate order (rank, then name).
    pub fn coords(&self) -> &[usize] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coord_of(&self, e: usize) -> Option<usize> {
        self.coord_of[e]
    }

    pub fn coord_name(&self, c: usize) -> &str {
        &self.names[self.coords[c]]
    }

    pub fn graded(&self) -> Result<&GradedStructure> {
        self.graded
            .as_ref()
            .ok_or_else(|| Error::new(Code::NotGraded, "poset is not graded"))
    }

    pub fn rank(&self, e: usize) -> Result<usize> {
        Ok(self.graded()?.rank[e])
    }

    pub fn marked_values(&self) -> Vec<i64> {
        self.marking.iter().flatten().copied().collect()
    }

    /// Attaches an explicit shift vector, used instead of [`choose_u`].
    pub fn set_u(&mut self, u: BTreeMap<String, i64>) -> Result<()> {
        let mut m = BTreeMap::new();
        for (name, v) in u {
            let Some(e) = self.element(&name) else {
                bail!(BadInput, "u mentions unknown element {name}");
            };
            m.insert(e, v);
        }
        self.u_override = Some(m);
        Ok(())
    }

    fn topological_order(&self) -> Option<Vec<usize>> {
        let mut indeg: Vec<usize> = self.lower.iter().map(Vec::len).collect();
        let mut queue: VecDeque<usize> = (0..self.len()).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(self.len());
        while let Some(e) = queue.pop_front() {
            order.push(e);
            for &p in &self.upper[e] {
                indeg[p] -= 1;
                if indeg[p] == 0 {
                    queue.push_back(p);
                }
            }
        }
        (order.len() == self.len()).then_some(order)
    }

    fn compute_grading(&self) -> Result<GradedStructure> {
        let order = self.topological_order().expect("acyclic");
        let mut rank = vec![0usize; self.len()];
        for &e in &order {
            for &q in &self.lower[e] {
                rank[e] = rank[e].max(rank[q] + 1);
            }
        }
        for e in 0..self.len() {
            for &q in &self.lower[e] {
                if rank[e] != rank[q] + 1 {
                    bail!(
                        NotGraded,
                        "maximal chains through {} and {} have different lengths",
                        self.names[q],
                        self.names[e]
                    );
                }
            }
        }
        let maxima: Vec<usize> = (0..self.len()).filter(|&e| self.upper[e].is_empty()).collect();
        if let Some(&first) = maxima.first() {
            if let Some(&bad) = maxima.iter().find(|&&m| rank[m] != rank[first]) {
                bail!(
                    NotGraded,
                    "maximal elements {} and {} sit at ranks {} and {}",
                    self.names[first],
                    self.names[bad],
                    rank[first],
                    rank[bad]
                );
            }
        }
        let top = rank.iter().copied().max().unwrap_or(0);
        let mut levels = vec![Vec::new(); if self.is_empty() { 0 } else { top + 1 }];
        for e in 0..self.len() {
            levels[rank[e]].push(e);
        }
        for l in &mut levels {
            l.sort_by(|a, b| natural_cmp(&self.names[*a], &self.names[*b]));
        }
        Ok(GradedStructure { rank, levels })
    }

    /// Elements strictly above `e`.
    fn up_set(&self, e: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![e];
        while let Some(x) = stack.pop() {
            for &p in &self.upper[x] {
                if seen.insert(p) {
                    stack.push(p);
                }
            }
        }
        seen
    }

    /// Checks every invariant of a marked poset and returns a per-check
    /// diagnostic plus the grading on success.
    pub fn validate(&self) -> Validation {
        let mut checks = Vec::new();

        let mut redundant = None;
        'outer: for p in 0..self.len() {
            for &q in &self.lower[p] {
                for &r in &self.upper[q] {
                    if r != p && (self.up_set(r).contains(&p)) {
                        redundant = Some((q, p));
                        break 'outer;
                    }
                }
            }
        }
        checks.push(match redundant {
            None => ValidationCheck::pass("hasse"),
            Some((q, p)) => ValidationCheck::fail(
                "hasse",
                Code::BadHasse,
                format!("cover ({}, {}) is implied by a longer chain", self.names[q], self.names[p]),
            ),
        });

        let unmarked_extreme = (0..self.len())
            .find(|&e| self.marking[e].is_none() && (self.lower[e].is_empty() || self.upper[e].is_empty()));
        checks.push(match unmarked_extreme {
            None => ValidationCheck::pass("extremes_marked"),
            Some(e) => ValidationCheck::fail(
                "extremes_marked",
                Code::BadInput,
                format!("extreme element {} is not marked", self.names[e]),
            ),
        });

        let mut violation = None;
        'mono: for a in 0..self.len() {
            let Some(la) = self.marking[a] else { continue };
            for b in self.up_set(a) {
                if let Some(lb) = self.marking[b] {
                    if la > lb {
                        violation = Some((a, b));
                        break 'mono;
                    }
                }
            }
        }
        checks.push(match violation {
            None => ValidationCheck::pass("monotone"),
            Some((a, b)) => ValidationCheck::fail(
                "monotone",
                Code::NotMonotone,
                format!(
                    "{} ⪯ {} but λ = {} > {}",
                    self.names[a],
                    self.names[b],
                    self.marking[a].unwrap(),
                    self.marking[b].unwrap()
                ),
            ),
        });

        let graded = self.compute_grading();
        checks.push(match &graded {
            Ok(_) => ValidationCheck::pass("graded"),
            Err(e) => ValidationCheck::fail("graded", e.code, e.message.clone()),
        });

        let pass = checks.iter().all(|c| c.pass);
        let ranks = graded.ok().map(|g| {
            (0..self.len())
                .map(|e| (self.names[e].clone(), g.rank[e]))
                .collect::<BTreeMap<_, _>>()
        });
        Validation { pass, checks, ranks }
    }

    /// Hard validation: the first failing invariant becomes an error.
    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        match v.checks.into_iter().find(|c| !c.pass) {
            None => Ok(()),
            Some(c) => Err(Error::new(c.code.unwrap_or(Code::BadInput), c.detail.unwrap_or_default())),
        }
    }

    /// The reduced double level `Π̆(i)`: lower level `Π(i)` and the elements
    /// of `Π(i+1)` that are unmarked and cover at least two elements of
    /// `Π(i)` (marked lower covers count).
    pub fn breve_level(&self, i: usize) -> Result<BreveLevel> {
        let g = self.graded()?;
        let lower = g.levels.get(i).cloned().unwrap_or_default();
        let upper: Vec<usize> = g
            .levels
            .get(i + 1)
            .map(|l| {
                l.iter()
                    .copied()
                    .filter(|&p| !self.is_marked(p) && self.lower[p].len() >= 2)
                    .collect()
            })
            .unwrap_or_default();
        let edges = upper
            .iter()
            .flat_map(|&p| self.lower[p].iter().map(move |&q| (q, p)))
            .collect();
        Ok(BreveLevel { level: i, lower, upper, edges })
    }

    /// Decomposes every reduced double level into connected components and
    /// matches each against the two zigzag shapes.
    pub fn classify_spade(&self) -> Result<SpadeClassification> {
        let g = self.graded()?;
        let mut components = Vec::new();
        let mut position = vec![None; self.len()];
        for i in 0..g.levels.len() {
            let breve = self.breve_level(i)?;
            for comp in breve.components() {
                let c = self.match_component(i, &comp.0, &comp.1)?;
                let idx = components.len();
                for (k, &p) in c.lower.iter().enumerate() {
                    position[p] = Some((idx, k));
                }
                components.push(c);
            }
        }
        Ok(SpadeClassification { components, position })
    }

    fn match_component(&self, level: usize, lower: &[usize], upper: &[usize]) -> Result<LevelComponent> {
        if upper.is_empty() {
            return Ok(LevelComponent { level, lower: lower.to_vec(), upper: Vec::new(), shape: Shape::Trivial });
        }
        let describe = || {
            let mut all: Vec<&str> = lower.iter().chain(upper).map(|&e| self.names[e].as_str()).collect();
            all.sort_by(|a, b| natural_cmp(a, b));
            all.join(", ")
        };
        let lower_set: BTreeSet<usize> = lower.iter().copied().collect();
        let mut degree: BTreeMap<usize, usize> = lower.iter().map(|&p| (p, 0)).collect();
        for &q in upper {
            let covered: Vec<usize> = self.lower[q].iter().copied().filter(|p| lower_set.contains(p)).collect();
            if covered.len() != 2 {
                bail!(
                    SpadeViolation,
                    "level {level}: {} covers {} elements of the lower level in component {{{}}}",
                    self.names[q],
                    covered.len(),
                    describe()
                );
            }
            for p in covered {
                *degree.get_mut(&p).unwrap() += 1;
            }
        }
        if lower.len() != upper.len() + 1 || degree.values().any(|&d| d == 0 || d > 2) {
            bail!(SpadeViolation, "level {level}: component {{{}}} is not a zigzag", describe());
        }
        let ends: Vec<usize> = degree.iter().filter(|(_, &d)| d == 1).map(|(&p, _)| p).collect();
        if ends.len() != 2 {
            bail!(SpadeViolation, "level {level}: component {{{}}} is not a zigzag", describe());
        }
        let marked: Vec<usize> = lower.iter().copied().filter(|&p| self.is_marked(p)).collect();
        let (start, shape) = match marked.as_slice() {
            [] => {
                let s = if natural_cmp(&self.names[ends[0]], &self.names[ends[1]]) == Ordering::Greater {
                    ends[1]
                } else {
                    ends[0]
                };
                (s, Shape::ZigzagUnmarked)
            }
            [m] if ends.contains(m) => (if ends[0] == *m { ends[1] } else { ends[0] }, Shape::ZigzagMarkedTop),
            _ => bail!(
                SpadeViolation,
                "level {level}: component {{{}}} has marked elements away from a single end",
                describe()
            ),
        };
        let upper_set: BTreeSet<usize> = upper.iter().copied().collect();
        let mut p_list = vec![start];
        let mut q_list = Vec::new();
        let mut cur = start;
        loop {
            let next_q = self.upper[cur]
                .iter()
                .copied()
                .find(|q| upper_set.contains(q) && !q_list.contains(q));
            let Some(q) = next_q else { break };
            let next_p = self.lower[q]
                .iter()
                .copied()
                .find(|&p| lower_set.contains(&p) && p != cur)
                .expect("zigzag upper has two lower covers");
            q_list.push(q);
            p_list.push(next_p);
            cur = next_p;
        }
        if p_list.len() != lower.len() {
            bail!(SpadeViolation, "level {level}: component {{{}}} is disconnected", describe());
        }
        Ok(LevelComponent { level, lower: p_list, upper: q_list, shape })
    }

    /// Serializes to the poset JSON exchange format.
    pub fn to_json(&self) -> Value {
        let covers: Vec<[&str; 2]> = (0..self.len())
            .flat_map(|p| self.lower[p].iter().map(move |&q| (q, p)))
            .map(|(q, p)| [self.names[q].as_str(), self.names[p].as_str()])
            .collect();
        let marked: BTreeMap<&str, i64> = (0..self.len())
            .filter_map(|e| self.marking[e].map(|v| (self.names[e].as_str(), v)))
            .collect();
        let mut v = serde_json::json!({
            "elements": self.names,
            "covers": covers,
            "marked": marked,
        });
        if let Some(u) = &self.u_override {
            let u: BTreeMap<&str, i64> = u.iter().map(|(&e, &x)| (self.names[e].as_str(), x)).collect();
            v["u"] = serde_json::json!(u);
        }
        v
    }

    /// Parses the poset JSON exchange format.
    pub fn from_json(v: &Value) -> Result<Self> {
        let raw: PosetJson = serde_json::from_value(v.clone()).map_err(|e| Error::new(Code::BadInput, e.to_string()))?;
        let marked = raw
            .marked
            .into_iter()
            .map(|(k, v)| Ok((k, json_int(&v)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        let mut poset = MarkedPoset::new(raw.elements, raw.covers.into_iter().map(|[q, p]| (q, p)).collect(), marked)?;
        if let Some(u) = raw.u {
            let u = u
                .into_iter()
                .map(|(k, v)| Ok((k, json_int(&v)?)))
                .collect::<Result<BTreeMap<_, _>>>()?;
            poset.set_u(u)?;
        }
        Ok(poset)
    }

    /// Picks the shift vector `u`: the marking on marked ranks, evenly
    /// spread with floor rounding in between. In strict mode `u` strictly
    /// increases along every cover.
    pub fn choose_u(&self, strict: bool) -> Result<ShiftVector> {
        let g = self.graded()?;
        let mut per_rank: Vec<Option<i64>> = vec![None; g.levels.len()];
        for (r, level) in g.levels.iter().enumerate() {
            for &e in level {
                if let Some(l) = self.marking[e] {
                    match per_rank[r] {
                        Some(v) if v != l => bail!(
                            NoInteriorU,
                            "marking is not constant on rank {r} ({v} and {l}); no rank-constant u exists"
                        ),
                        _ => per_rank[r] = Some(l),
                    }
                }
            }
        }
        let u = if let Some(ov) = &self.u_override {
            let u = (0..self.len())
                .map(|e| match (self.marking[e], ov.get(&e)) {
                    (Some(l), _) => Ok(l),
                    (None, Some(&v)) => Ok(v),
                    (None, None) => Err(Error::new(Code::BadInput, format!("u does not assign {}", self.names[e]))),
                })
                .collect::<Result<Vec<i64>>>()?;
            for (r, level) in g.levels.iter().enumerate() {
                let vals: BTreeSet<i64> = level.iter().map(|&e| u[e]).collect();
                if vals.len() > 1 || per_rank[r].is_some_and(|l| !vals.contains(&l)) {
                    bail!(NoInteriorU, "given u is not constant on rank {r} or disagrees with the marking there");
                }
            }
            u
        } else {
            let marked_ranks: Vec<usize> = (0..per_rank.len()).filter(|&r| per_rank[r].is_some()).collect();
            let mut value = vec![0i64; per_rank.len()];
            for w in marked_ranks.windows(2) {
                let (r0, r1) = (w[0], w[1]);
                let (a, b) = (per_rank[r0].unwrap(), per_rank[r1].unwrap());
                if b < a {
                    bail!(NoInteriorU, "marking decreases from rank {r0} to rank {r1}");
                }
                if strict && b - a < (r1 - r0) as i64 {
                    bail!(
                        NoInteriorU,
                        "no integers strictly between {a} and {b} for the {} intermediate ranks",
                        r1 - r0 - 1
                    );
                }
                for (t, v) in value[r0..=r1].iter_mut().enumerate() {
                    *v = a + ((b - a) * t as i64).div_euclid((r1 - r0) as i64);
                }
            }
            if let Some(&r) = marked_ranks.first() {
                value[r] = per_rank[r].unwrap();
            }
            (0..self.len()).map(|e| value[g.rank[e]]).collect()
        };
        if strict {
            for p in 0..self.len() {
                for &q in &self.lower[p] {
                    if u[q] >= u[p] {
                        bail!(NoInteriorU, "u is not strictly increasing along {} ⋖ {}", self.names[q], self.names[p]);
                    }
                }
            }
        }
        Ok(ShiftVector { u })
    }
}

fn json_int(v: &Value) -> Result<i64> {
    match v {
        Value::Number(n) => n.as_i64().ok_or_else(|| Error::new(Code::BadInput, format!("{n} is not a 64-bit integer"))),
        Value::String(s) => s
            .trim()
            .parse::<i64>()
            .map_err(|_| Error::new(Code::Unsupported, format!("integer {s} is outside the supported 64-bit range"))),
        other => Err(Error::new(Code::BadInput, format!("expected an integer, found {other}"))),
    }
}

#[derive(Deserialize)]
struct PosetJson {
    elements: Vec<String>,
    covers: Vec<[String; 2]>,
    marked: BTreeMap<String, Value>,
    #[serde(default)]
    u: Option<BTreeMap<String, Value>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationCheck {
    pub name: &'static str,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub code: Option<Code>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl ValidationCheck {
    fn pass(name: &'static str) -> Self {
        ValidationCheck { name, pass: true, code: None, detail: None }
    }

    fn fail(name: &'static str, code: Code, detail: String) -> Self {
        ValidationCheck { name, pass: false, code: Some(code), detail: Some(detail) }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Validation {
    pub pass: bool,
    pub checks: Vec<ValidationCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ranks: Option<BTreeMap<String, usize>>,
}

/// Induced subposet on `Π(i) ∪ Π(i+1)` after the removal rule.
#[derive(Debug, Clone)]
pub struct BreveLevel {
    pub level: usize,
    pub lower: Vec<usize>,
    pub upper: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
}

impl BreveLevel {
    /// Connected components as `(lower part, upper part)`, ordered by their
    /// first lower element.
    pub fn components(&self) -> Vec<(Vec<usize>, Vec<usize>)> {
        let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &v in self.lower.iter().chain(&self.upper) {
            adj.entry(v).or_default();
        }
        for &(q, p) in &self.edges {
            adj.get_mut(&q).unwrap().push(p);
            adj.get_mut(&p).unwrap().push(q);
        }
        let lower_set: BTreeSet<usize> = self.lower.iter().copied().collect();
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &start in &self.lower {
            if seen.contains(&start) {
                continue;
            }
            let mut stack = vec![start];
            seen.insert(start);
            let (mut lo, mut up) = (Vec::new(), Vec::new());
            while let Some(v) = stack.pop() {
                if lower_set.contains(&v) {
                    lo.push(v);
                } else {
                    up.push(v);
                }
                for &w in &adj[&v] {
                    if seen.insert(w) {
                        stack.push(w);
                    }
                }
            }
            let key = |v: &usize| self.lower.iter().chain(&self.upper).position(|x| x == v).unwrap();
            lo.sort_by_key(key);
            up.sort_by_key(key);
            out.push((lo, up));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Shape {
    ZigzagUnmarked,
    ZigzagMarkedTop,
    Trivial,
}

/// One connected component of a reduced double level, arranged so that
/// `lower[k]` and `lower[k + 1]` are covered by `upper[k]`.
#[derive(Debug, Clone, Serialize)]
pub struct LevelComponent {
    pub level: usize,
    pub lower: Vec<usize>,
    pub upper: Vec<usize>,
    pub shape: Shape,
}

/// Tail term of the relation `g_p = X_p Y_p − 1 − tail`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tail {
    None,
    Y(usize),
    XY(usize, usize),
}

impl Tail {
    /// The upper element `q` whose `Y_q` appears, if any.
    pub fn upper(&self) -> Option<usize> {
        match *self {
            Tail::None => None,
            Tail::Y(q) | Tail::XY(_, q) => Some(q),
        }
    }

    /// The element `p′` whose `X_{p′}` appears, if any.
    pub fn x_part(&self) -> Option<usize> {
        match *self {
            Tail::XY(p, _) => Some(p),
            _ => None,
        }
    }
}

/// Output of [`MarkedPoset::classify_spade`]: all level components plus the
/// position of every element as a lower element of its own level.
#[derive(Debug, Clone)]
pub struct SpadeClassification {
    pub components: Vec<LevelComponent>,
    position: Vec<Option<(usize, usize)>>,
}

impl SpadeClassification {
    /// `(component, k)` with `e = p_{k+1}` of that component.
    pub fn position(&self, e: usize) -> (usize, usize) {
        self.position[e].expect("every element is a lower element of its own level")
    }

    fn component_of(&self, e: usize) -> &LevelComponent {
        &self.components[self.position(e).0]
    }

    /// Zigzag upper element paired with `p` (`q_k` for `p = p_k`).
    pub fn upper_of(&self, p: usize) -> Option<usize> {
        let (c, k) = self.position(p);
        self.components[c].upper.get(k).copied()
    }

    /// Inverse of [`Self::upper_of`]: for a zigzag upper element `q = q_k`
    /// returns `p_k`.
    pub fn left_of(&self, q: usize) -> Option<usize> {
        self.components
            .iter()
            .find_map(|c| c.upper.iter().position(|&x| x == q).map(|k| c.lower[k]))
    }

    /// The next lower element `p_{k+1}` after `p = p_k`, if any.
    pub fn next_lower(&self, p: usize) -> Option<usize> {
        let (c, k) = self.position(p);
        self.components[c].lower.get(k + 1).copied()
    }

    /// Relation tail for an unmarked element, per the three-case recipe.
    pub fn tail(&self, p: usize) -> Tail {
        let Some(q) = self.upper_of(p) else { return Tail::None };
        let (_, j) = self.position(q);
        if j >= 1 {
            Tail::XY(self.component_of(q).lower[j - 1], q)
        } else {
            Tail::Y(q)
        }
    }

    /// Support of `ĥe_p`: the lower elements `p_1, …, p_k` up to `p`.
    pub fn hat_e(&self, p: usize) -> Vec<usize> {
        let (c, k) = self.position(p);
        self.components[c].lower[..=k].to_vec()
    }

    /// Number of components on each level that are zigzags with every
    /// element unmarked, counting an isolated unmarked element as the zigzag
    /// with no upper elements.
    pub fn units_per_level(&self, poset: &MarkedPoset) -> BTreeMap<usize, usize> {
        let mut out = BTreeMap::new();
        for c in &self.components {
            let entry = out.entry(c.level).or_insert(0);
            let unit = match c.shape {
                Shape::ZigzagUnmarked => true,
                Shape::Trivial => c.lower.iter().all(|&p| !poset.is_marked(p)),
                Shape::ZigzagMarkedTop => false,
            };
            if unit {
                *entry += 1;
            }
        }
        out
    }

    pub fn to_json(&self, poset: &MarkedPoset) -> Value {
        let comps: Vec<Value> = self
            .components
            .iter()
            .map(|c| {
                serde_json::json!({
                    "level": c.level,
                    "shape": c.shape,
                    "lower": c.lower.iter().map(|&e| poset.name(e)).collect::<Vec<_>>(),
                    "upper": c.upper.iter().map(|&e| poset.name(e)).collect::<Vec<_>>(),
                })
            })
            .collect();
        serde_json::json!({ "components": comps })
    }
}

/// Rank-constant shift vector, extended over marked elements by `λ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShiftVector {
    pub u: Vec<i64>,
}

impl ShiftVector {
    /// Restriction to the coordinates `Π ∖ Π*`.
    pub fn coords(&self, poset: &MarkedPoset) -> Vec<i64> {
        poset.coords().iter().map(|&e| self.u[e]).collect()
    }
}

fn gt_name(i: i64, j: i64) -> String {
    format!("q_{{{i},{j}}}")
}

fn build_gt(
    family: Family,
    unmarked: Vec<(i64, i64)>,
    marked: Vec<((i64, i64), String, i64)>,
    skip_cover: impl Fn((i64, i64), (i64, i64)) -> bool,
) -> MarkedPoset {
    let mut names = Vec::new();
    let mut at: BTreeMap<(i64, i64), String> = BTreeMap::new();
    let mut marking = BTreeMap::new();
    for &(i, j) in &unmarked {
        at.insert((i, j), gt_name(i, j));
    }
    for (ij, name, l) in &marked {
        at.insert(*ij, name.clone());
        marking.insert(name.clone(), *l);
    }
    let mut cells: Vec<(i64, i64)> = at.keys().copied().collect();
    cells.sort_by_key(|&(i, j)| (i, j));
    for c in &cells {
        names.push(at[c].clone());
    }
    let mut covers = Vec::new();
    for &(i, j) in &cells {
        for target in [(i + 1, j), (i + 1, j - 1)] {
            if at.contains_key(&target) && !skip_cover((i, j), target) {
                covers.push((at[&(i, j)].clone(), at[&target].clone()));
            }
        }
    }
    let mut poset = MarkedPoset::new(names, covers, marking).expect("builder output is well formed");
    poset.family = family;
    for &c in &cells {
        let e = poset.element(&at[&c]).unwrap();
        poset.gt_index[e] = Some(c);
    }
    poset
}

/// Gelfand–Tsetlin poset of type A_n with marking `λ_1 ≤ … ≤ λ_{n+1}`.
pub fn gt_type_a(n: usize, lambda: &[i64]) -> Result<MarkedPoset> {
    if n == 0 || lambda.len() != n + 1 {
        bail!(BadInput, "type A_{n} needs n ≥ 1 and {} marking values, got {}", n + 1, lambda.len());
    }
    if lambda.windows(2).any(|w| w[0] > w[1]) {
        bail!(NotMonotone, "λ must be weakly increasing");
    }
    let n = n as i64;
    let mut unmarked = Vec::new();
    for j in 1..=n {
        for i in (n + 1 - j)..=(2 * n + 1 - 2 * j) {
            unmarked.push((i, j));
        }
    }
    let marked = (1..=n + 1)
        .map(|k| ((2 * k - 2, n - k + 2), format!("q*_{k}"), lambda[(k - 1) as usize]))
        .collect();
    Ok(build_gt(Family::GtA(n as usize), unmarked, marked, |_, _| false))
}

/// Gelfand–Tsetlin poset of type C_n with marking `0 ≤ λ_1 ≤ … ≤ λ_n`; the
/// `n` minimal elements `q_{0,j}` are marked with 0 and each is covered by
/// `q_{1,j}` only.
pub fn gt_type_c(n: usize, lambda: &[i64]) -> Result<MarkedPoset> {
    if n == 0 || lambda.len() != n {
        bail!(BadInput, "type C_{n} needs n ≥ 1 and {n} marking values, got {}", lambda.len());
    }
    if lambda.first().is_some_and(|&l| l < 0) || lambda.windows(2).any(|w| w[0] > w[1]) {
        bail!(NotMonotone, "λ must satisfy 0 ≤ λ_1 ≤ … ≤ λ_n");
    }
    let n = n as i64;
    let mut unmarked = Vec::new();
    for j in 1..=n {
        for i in 1..=(2 * n + 1 - 2 * j) {
            unmarked.push((i, j));
        }
    }
    let mut marked: Vec<((i64, i64), String, i64)> = (1..=n).map(|j| ((0, j), gt_name(0, j), 0)).collect();
    marked.extend((1..=n).map(|k| ((2 * k, n - k + 1), format!("q*_{k}"), lambda[(k - 1) as usize])));
    Ok(build_gt(Family::GtC(n as usize), unmarked, marked, |from, to| from.0 == 0 && to.1 != from.1))
}

const BOTTOM: &str = "bot";
const TOP: &str = "top";

fn zigzag(n: usize, marked_end: Option<i64>) -> MarkedPoset {
    let mut names = vec![BOTTOM.to_string(), TOP.to_string()];
    names.extend((1..=n + 1).map(|k| format!("p_{k}")));
    names.extend((1..=n).map(|k| format!("q_{k}")));
    let mut covers = Vec::new();
    for k in 1..=n + 1 {
        covers.push((BOTTOM.to_string(), format!("p_{k}")));
    }
    for k in 1..=n {
        covers.push((format!("p_{k}"), format!("q_{k}")));
        covers.push((format!("p_{}", k + 1), format!("q_{k}")));
        covers.push((format!("q_{k}"), TOP.to_string()));
    }
    let mut marking = BTreeMap::new();
    match marked_end {
        None => {
            marking.insert(BOTTOM.to_string(), 0);
            marking.insert(TOP.to_string(), 3);
        }
        Some(l) => {
            marking.insert(BOTTOM.to_string(), l - 1);
            marking.insert(format!("p_{}", n + 1), l);
            marking.insert(TOP.to_string(), l + 2);
        }
    }
    MarkedPoset::new(names, covers, marking).expect("builder output is well formed")
}

/// The zigzag `p_1, p_2 ⋖ q_1, …, p_n, p_{n+1} ⋖ q_n` with a bottom and a
/// top element added, both marked (by 0 and 3, the rank marking).
pub fn basic_pi1(n: usize) -> Result<MarkedPoset> {
    if n == 0 {
        bail!(BadInput, "n must be at least 1");
    }
    let mut p = zigzag(n, None);
    p.family = Family::Pi1(n);
    Ok(p)
}

/// As [`basic_pi1`] with `p_{n+1}` marked by `lambda`; the bottom and top
/// are marked `lambda − 1` and `lambda + 2`.
pub fn basic_pi2(n: usize, lambda: i64) -> Result<MarkedPoset> {
    if n == 0 {
        bail!(BadInput, "n must be at least 1");
    }
    let mut p = zigzag(n, Some(lambda));
    p.family = Family::Pi2(n);
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> MarkedPoset {
        let names = vec!["a".into(), "p".into(), "b".into()];
        let covers = vec![("a".into(), "p".into()), ("p".into(), "b".into())];
        let marked = BTreeMap::from([("a".to_string(), 0), ("b".to_string(), 1)]);
        MarkedPoset::new(names, covers, marked).unwrap()
    }

    #[test]
    fn natural_order() {
        assert_eq!(natural_cmp("q_{1,2}", "q_{1,10}"), Ordering::Less);
        assert_eq!(natural_cmp("p_2", "p_2"), Ordering::Equal);
        assert_eq!(natural_cmp("a", "b"), Ordering::Less);
    }

    #[test]
    fn smallest_chain_validates() {
        let v = chain().validate();
        assert!(v.pass, "{v:?}");
    }

    #[test]
    fn uneven_diamond_is_not_graded() {
        let names = ["a", "x", "y1", "y2", "b"].map(String::from).to_vec();
        let covers = [("a", "x"), ("x", "b"), ("a", "y1"), ("y1", "y2"), ("y2", "b")]
            .map(|(q, p)| (q.to_string(), p.to_string()))
            .to_vec();
        let marked = BTreeMap::from([("a".to_string(), 0), ("b".to_string(), 5)]);
        let p = MarkedPoset::new(names, covers, marked).unwrap();
        let v = p.validate();
        assert!(!v.pass);
        assert_eq!(v.checks.iter().find(|c| c.name == "graded").unwrap().code, Some(Code::NotGraded));
    }

    #[test]
    fn redundant_cover_is_bad_hasse() {
        let names = ["a", "p", "b"].map(String::from).to_vec();
        let covers = [("a", "p"), ("p", "b"), ("a", "b")]
            .map(|(q, p)| (q.to_string(), p.to_string()))
            .to_vec();
        let marked = BTreeMap::from([("a".to_string(), 0), ("b".to_string(), 5)]);
        let v = MarkedPoset::new(names, covers, marked).unwrap().validate();
        assert_eq!(v.checks[0].code, Some(Code::BadHasse));
    }

    #[test]
    fn non_monotone_marking() {
        let names = ["a", "p", "b"].map(String::from).to_vec();
        let covers = [("a", "p"), ("p", "b")].map(|(q, p)| (q.to_string(), p.to_string())).to_vec();
        let marked = BTreeMap::from([("a".to_string(), 4), ("b".to_string(), 1)]);
        let v = MarkedPoset::new(names, covers, marked).unwrap().validate();
        assert!(v.checks.iter().any(|c| c.code == Some(Code::NotMonotone)));
    }

    #[test]
    fn gt_a2_ranks_and_covers() {
        let p = gt_type_a(2, &[0, 2, 4]).unwrap();
        assert!(p.validate().pass);
        let names: Vec<&str> = p.coords().iter().map(|&e| p.name(e)).collect();
        assert_eq!(names, ["q_{1,2}", "q_{2,1}", "q_{3,1}"]);
        let r: Vec<usize> = p.coords().iter().map(|&e| p.rank(e).unwrap()).collect();
        assert_eq!(r, [1, 2, 3]);
        let e = |s: &str| p.element(s).unwrap();
        let lower = |s: &str| -> Vec<&str> { p.lower_covers(e(s)).iter().map(|&x| p.name(x)).collect() };
        assert_eq!(lower("q_{1,2}"), ["q*_1"]);
        assert_eq!(lower("q_{2,1}"), ["q_{1,2}"]);
        assert_eq!(lower("q*_2"), ["q_{1,2}"]);
        assert_eq!(lower("q_{3,1}"), ["q*_2", "q_{2,1}"]);
        assert_eq!(lower("q*_3"), ["q_{3,1}"]);
    }

    #[test]
    fn gt_sizes() {
        for n in 1..=4 {
            assert_eq!(gt_type_a(n, &vec![0; n + 1]).unwrap().dim(), n * (n + 1) / 2);
            assert_eq!(gt_type_c(n, &vec![0; n]).unwrap().dim(), n * n);
        }
        let c2 = gt_type_c(2, &[2, 4]).unwrap();
        let names: Vec<&str> = c2.coords().iter().map(|&e| c2.name(e)).collect();
        assert_eq!(names, ["q_{1,1}", "q_{1,2}", "q_{2,1}", "q_{3,1}"]);
    }

    #[test]
    fn breve_examples() {
        let c2 = gt_type_c(2, &[2, 4]).unwrap();
        let b = c2.breve_level(1).unwrap();
        let up: Vec<&str> = b.upper.iter().map(|&e| c2.name(e)).collect();
        assert_eq!(up, ["q_{2,1}"]);
        let a2 = gt_type_a(2, &[0, 2, 4]).unwrap();
        let b = a2.breve_level(2).unwrap();
        let up: Vec<&str> = b.upper.iter().map(|&e| a2.name(e)).collect();
        assert_eq!(up, ["q_{3,1}"]);
        let top = a2.graded().unwrap().levels.len() - 1;
        let b = a2.breve_level(top).unwrap();
        assert!(b.upper.is_empty());
    }

    #[test]
    fn spade_holds_for_families() {
        for n in 1..=4 {
            gt_type_a(n, &(0..=n as i64).map(|k| 2 * k).collect::<Vec<_>>()).unwrap().classify_spade().unwrap();
            gt_type_c(n, &(1..=n as i64).map(|k| 2 * k).collect::<Vec<_>>()).unwrap().classify_spade().unwrap();
            basic_pi1(n).unwrap().classify_spade().unwrap();
            basic_pi2(n, 5).unwrap().classify_spade().unwrap();
        }
    }

    #[test]
    fn three_fan_violates_spade() {
        let names = ["bot", "a", "b", "c", "x", "top"].map(String::from).to_vec();
        let mut covers = Vec::new();
        for l in ["a", "b", "c"] {
            covers.push(("bot".to_string(), l.to_string()));
            covers.push((l.to_string(), "x".to_string()));
        }
        covers.push(("x".to_string(), "top".to_string()));
        let marked = BTreeMap::from([("bot".to_string(), 0), ("top".to_string(), 3)]);
        let p = MarkedPoset::new(names, covers, marked).unwrap();
        let err = p.classify_spade().unwrap_err();
        assert_eq!(err.code, Code::SpadeViolation);
    }

    #[test]
    fn choose_u_examples() {
        let a2 = gt_type_a(2, &[0, 2, 4]).unwrap();
        assert_eq!(a2.choose_u(true).unwrap().coords(&a2), [1, 2, 3]);
        let c1 = gt_type_c(1, &[2]).unwrap();
        assert_eq!(c1.choose_u(true).unwrap().coords(&c1), [1]);
        let names = ["a", "p", "b"].map(String::from).to_vec();
        let covers = [("a", "p"), ("p", "b")].map(|(q, p)| (q.to_string(), p.to_string())).to_vec();
        let marked = BTreeMap::from([("a".to_string(), 0), ("b".to_string(), 1)]);
        let p = MarkedPoset::new(names, covers, marked).unwrap();
        assert_eq!(p.choose_u(true).unwrap_err().code, Code::NoInteriorU);
        assert_eq!(p.choose_u(false).unwrap().coords(&p), [0]);
    }

    #[test]
    fn json_round_trip() {
        let p = gt_type_c(2, &[2, 4]).unwrap();
        let q = MarkedPoset::from_json(&p.to_json()).unwrap();
        assert_eq!(q.to_json(), p.to_json());
        let big = serde_json::json!({
            "elements": ["a", "b"], "covers": [["a", "b"]],
            "marked": {"a": "0", "b": "99999999999999999999999"}
        });
        assert_eq!(MarkedPoset::from_json(&big).unwrap_err().code, Code::Unsupported);
    }
}
