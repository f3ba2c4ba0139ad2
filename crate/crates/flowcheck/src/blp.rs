//! The y/z constraint system (the relaxed linear program "BLP"): admissibility
//! predicates for conditioned variables and the seventeen coupling families
//! labelled R302 through R318, plus the older-version extras.
//!
//! Constraints are streamed through a callback, never materialized wholesale:
//! the 32-node restricted model has close to a million equations and ~169 MB
//! of text, so peak memory must stay at one constraint plus the variable
//! index.

use crate::config::{Dimension, ModelConfig, StartMode, Version, ANY};
use crate::constraint::Constraint;
use crate::error::Error;
use crate::instance::Instance;
use crate::rational::{rat, Rational};
use crate::varkey::{arc, Arc, VarKey};
use std::collections::BTreeSet;

/// Generator for one (instance, config) pair. `M` is the node range, `R` the
/// stage range; both equal the node count.
pub struct BlpModel<'a> {
    #[allow(dead_code)]
    instance: &'a Instance,
    config: &'a ModelConfig,
    m: u16,
    r: u16,
    /// Stage-range extension: 1 under free start (every flow may also start
    /// away from node 1, which is equivalent to adding one more stage), else 0.
    ext: u16,
}

/// Per-family and total constraint counts.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BlpStats {
    pub constraints: u64,
    pub per_family: std::collections::BTreeMap<&'static str, u64>,
}

/// The admissibility predicates alone, usable without a cost matrix (the flow
/// constructors need them too). `m` is the node range, `r` the stage range.
#[derive(Clone, Copy)]
pub struct Admissibility<'a> {
    pub m: u16,
    pub r: u16,
    config: &'a ModelConfig,
}

impl<'a> Admissibility<'a> {
    pub fn new(n: u16, config: &'a ModelConfig) -> Self {
        Admissibility { m: n, r: n, config }
    }

    /// Support query with wildcard positions ([`ANY`]); concrete indices are
    /// bounds-checked. With two or more wildcards the query is answered
    /// optimistically (a pure loop-pruning shortcut, mirroring the reference
    /// generator; it never changes which terms are emitted).
    pub fn any_x(&self, i: u16, s: u16, j: u16) -> bool {
        if i != ANY && (i < 1 || i > self.m) {
            return false;
        }
        if s != ANY && (s < 1 || s > self.r) {
            return false;
        }
        if j != ANY && (j < 1 || j > self.m) {
            return false;
        }
        let Some(sup) = &self.config.support else {
            return true;
        };
        let wild = (i == ANY) as u8 + (s == ANY) as u8 + (j == ANY) as u8;
        if wild >= 2 {
            return true;
        }
        sup.check(i, s, j)
    }

    pub fn check_x(&self, i: u16, s: u16, j: u16) -> bool {
        i >= 1 && i <= self.m && s >= 1 && s <= self.r && j >= 1 && j <= self.m
            && i != j
            && self.config.supported(i, s, j)
    }

    /// True iff the ordered arc pair `(i,s,j) -> (u,p,v)` may carry conditioned
    /// flow. Mirrors the reference checker: nine structural parts plus the
    /// valley side rules when band geometry is configured. The boundary
    /// exemption (`s = 1` with `p = R`) admits the cycle-closure pairs that
    /// every Hamiltonian tour needs.
    pub fn check_y(&self, i: u16, s: u16, j: u16, u: u16, p: u16, v: u16) -> bool {
        if !self.check_x(i, s, j) || !self.check_x(u, p, v) {
            return false;
        }
        // part 1: no flow caused on previous layers
        if p < s {
            return false;
        }
        // part 2: same layer only for the diagonal
        if p == s && (i != u || j != v) {
            return false;
        }
        // part 3: flow cannot be broken
        if p == s + 1 && j != u {
            return false;
        }
        // part 4: no revisit of the source node (cycle closure exempted)
        if p > s && (s > 1 || p < self.r) && i == v {
            return false;
        }
        // part 5: no re-departure from the source node
        if p > s && i == u {
            return false;
        }
        // part 6: no revisit of the target node
        if p > s && j == v {
            return false;
        }
        // part 7: no re-departure from the target node after the next stage
        if p > s + 1 && j == u {
            return false;
        }
        // parts 8/9: no self-arcs
        if i == j || u == v {
            return false;
        }
        if let Some(b) = self.config.bands {
            let hi = b.lead_in + 2 * b.valley_size;
            // Rule A: inside the pair, conditioned flow stays on the side of
            // the conditioning arc's source.
            if s > b.lead_in && s < p && p <= hi && b.side(i) != b.side(u) {
                return false;
            }
            // Rule B: at the fan-out stage the side is set by the target.
            if s == b.lead_in && s < p && p <= hi && b.side(j) != b.side(u) {
                return false;
            }
        }
        true
    }

    /// z admissibility: strict stage ordering plus all three pairwise y
    /// admissibilities.
    pub fn check_z(&self, a: Arc, b: Arc, c: Arc) -> bool {
        if a.stage >= b.stage || b.stage >= c.stage {
            return false;
        }
        self.check_y(a.from, a.stage, a.to, b.from, b.stage, b.to)
            && self.check_y(a.from, a.stage, a.to, c.from, c.stage, c.to)
            && self.check_y(b.from, b.stage, b.to, c.from, c.stage, c.to)
    }
}

impl<'a> BlpModel<'a> {
    pub fn new(instance: &'a Instance, config: &'a ModelConfig) -> Result<Self, Error> {
        if config.dimension == Dimension::X {
            return Err(Error::Validation(
                "BLP generation needs dimension Y or Z".into(),
            ));
        }
        let n = instance.n() as u16;
        Ok(BlpModel {
            instance,
            config,
            m: n,
            r: n,
            ext: if config.start_mode == StartMode::FreeStart { 1 } else { 0 },
        })
    }

    // ----- admissibility predicates (delegated) -------------------------

    fn adm(&self) -> Admissibility<'a> {
        Admissibility {
            m: self.m,
            r: self.r,
            config: self.config,
        }
    }

    fn any_x(&self, i: u16, s: u16, j: u16) -> bool {
        self.adm().any_x(i, s, j)
    }

    fn check_x(&self, i: u16, s: u16, j: u16) -> bool {
        self.adm().check_x(i, s, j)
    }

    /// See [`Admissibility::check_y`].
    pub fn check_y(&self, i: u16, s: u16, j: u16, u: u16, p: u16, v: u16) -> bool {
        self.adm().check_y(i, s, j, u, p, v)
    }

    /// See [`Admissibility::check_z`].
    pub fn check_z(&self, a: Arc, b: Arc, c: Arc) -> bool {
        self.adm().check_z(a, b, c)
    }

    /// "The conditioned variable can be non-zero": both arcs supported and the
    /// pair admissible. (The flow constructor assigns positive value to every
    /// such pair, so this matches non-zeroness of constructed solutions.)
    fn any_y(&self, i: u16, s: u16, j: u16, u: u16, p: u16, v: u16) -> bool {
        self.check_y(i, s, j, u, p, v)
    }

    // ----- term helpers -------------------------------------------------

    fn push_y(&self, terms: &mut Vec<(Rational, VarKey)>, sign: i64, a: Arc, b: Arc) {
        if self.check_y(a.from, a.stage, a.to, b.from, b.stage, b.to) {
            terms.push((rat(sign), VarKey::y(a, b)));
        }
    }

    fn push_z(&self, terms: &mut Vec<(Rational, VarKey)>, sign: i64, a: Arc, b: Arc, c: Arc) {
        if self.check_z(a, b, c) {
            terms.push((rat(sign), VarKey::z(a, b, c)));
        }
    }

    /// Objective terms: arc costs over the diagonal y variables.
    pub fn objective_terms(&self) -> Vec<(Rational, VarKey)> {
        let mut out = Vec::new();
        for i in 1..=self.m {
            for s in 1..=self.r {
                for j in 1..=self.m {
                    if self.check_x(i, s, j) {
                        out.push((rat(self.instance.cost(i, j)), VarKey::y_diag(arc(i, s, j))));
                    }
                }
            }
        }
        out
    }

    // ----- family generation --------------------------------------------

    /// Streams every enabled constraint in family order. Labels carry a single
    /// running equation number, so they are unique across the whole stream.
    pub fn for_each_constraint(&self, emit: &mut dyn FnMut(Constraint)) -> BlpStats {
        let mut stats = BlpStats::default();
        let mut no: u64 = 0;
        let total = rat(self.config.total_flow_constant as i64);

        let mut out = |fam: &'static str,
                       terms: Vec<(Rational, VarKey)>,
                       rhs: Rational,
                       stats: &mut BlpStats,
                       emit: &mut dyn FnMut(Constraint)| {
            if terms.is_empty() {
                return;
            }
            no += 1;
            stats.constraints += 1;
            *stats.per_family.entry(fam).or_insert(0) += 1;
            emit(Constraint::eq(format!("{fam}_{no}"), terms, rhs));
        };

        let (m, r, ext) = (self.m, self.r, self.ext);
        let with_z = self.config.dimension == Dimension::Z;

        // R302: all stage-1 flow sums to the total.
        {
            let mut terms = Vec::new();
            for i in 1..=m {
                if !self.any_x(i, 1, ANY) {
                    continue;
                }
                for j in 1..=m {
                    if i == j || !self.any_x(i, 1, j) {
                        continue;
                    }
                    self.push_y(&mut terms, 1, arc(i, 1, j), arc(i, 1, j));
                }
            }
            out("R302", terms, total.clone(), &mut stats, emit);
        }

        // R303: stage-2 flow is caused by stage-1 flow entering its source.
        for i in 1..=m {
            if !self.any_x(i, 2, ANY) {
                continue;
            }
            for j in 1..=m {
                if i == j || !self.any_x(i, 2, j) {
                    continue;
                }
                let mut terms = Vec::new();
                self.push_y(&mut terms, 1, arc(i, 2, j), arc(i, 2, j));
                for u in 1..=m {
                    if u == i || u == j || !self.any_x(u, 1, i) {
                        continue;
                    }
                    self.push_y(&mut terms, -1, arc(u, 1, i), arc(i, 2, j));
                }
                out("R303", terms, rat(0), &mut stats, emit);
            }
        }

        // R304: every later flow is caused by some stage-1 flow.
        for i in 1..=m {
            if !self.any_x(i, ANY, ANY) {
                continue;
            }
            for j in 1..=m {
                if i == j || !self.any_x(i, ANY, j) {
                    continue;
                }
                for rr in 3..=r {
                    if !self.any_x(i, rr, j) {
                        continue;
                    }
                    let mut terms = Vec::new();
                    self.push_y(&mut terms, 1, arc(i, rr, j), arc(i, rr, j));
                    for u in 1..=m {
                        if u == i || (u == j && rr < r) || !self.any_x(u, 1, ANY) {
                            continue;
                        }
                        for v in 1..=m {
                            if v == i || v == j || v == u || !self.any_x(u, 1, v) {
                                continue;
                            }
                            self.push_y(&mut terms, -1, arc(u, 1, v), arc(i, rr, j));
                        }
                    }
                    out("R304", terms, rat(0), &mut stats, emit);
                }
            }
        }

        // R305: flow on an arc continues out of the arc's target.
        for i in 1..=m {
            if !self.any_x(i, ANY, ANY) {
                continue;
            }
            for j in 1..=m {
                if i == j || !self.any_x(i, ANY, j) {
                    continue;
                }
                for rr in 1..=((r + ext).saturating_sub(3)) {
                    if !self.any_x(i, rr, j) {
                        continue;
                    }
                    let mut terms = Vec::new();
                    self.push_y(&mut terms, 1, arc(i, rr, j), arc(i, rr, j));
                    for t in 1..=m {
                        if t == i || t == j || !self.any_x(j, rr + 1, t) {
                            continue;
                        }
                        self.push_y(&mut terms, -1, arc(i, rr, j), arc(j, rr + 1, t));
                    }
                    out("R305", terms, rat(0), &mut stats, emit);
                }
            }
        }

        // R306: conditioned flow continues stage by stage.
        for i in 1..=m {
            if !self.any_x(i, ANY, ANY) {
                continue;
            }
            for j in 1..=m {
                if i == j || !self.any_x(i, ANY, j) {
                    continue;
                }
                for rr in 1..=((r + ext).saturating_sub(4)) {
                    if !(self.any_x(i, rr, j) && self.any_x(j, rr + 1, ANY)) {
                        continue;
                    }
                    for t in 1..=m {
                        if t == i || t == j || !self.any_x(j, rr + 1, t) {
                            continue;
                        }
                        let mut terms = Vec::new();
                        self.push_y(&mut terms, 1, arc(i, rr, j), arc(j, rr + 1, t));
                        for k in 1..=m {
                            if k == i || k == j || k == t || !self.any_x(t, rr + 2, k) {
                                continue;
                            }
                            self.push_y(&mut terms, -1, arc(i, rr, j), arc(t, rr + 2, k));
                        }
                        out("R306", terms, rat(0), &mut stats, emit);
                    }
                }
            }
        }

        // R307: conditioned flow into a node equals conditioned flow out of it.
        for i in 1..=m {
            if !self.any_x(i, ANY, ANY) {
                continue;
            }
            for j in 1..=m {
                if i == j || !self.any_x(i, ANY, j) {
                    continue;
                }
                for t in 1..=m {
                    if t == i || t == j {
                        continue;
                    }
                    if !(self.any_x(t, ANY, ANY) || self.any_x(ANY, ANY, t)) {
                        continue;
                    }
                    for rr in 1..=((r + ext).saturating_sub(5)) {
                        if !self.any_x(i, rr, j) {
                            continue;
                        }
                        for s in (rr + 2)..=((r + ext).saturating_sub(3)) {
                            if !(self.any_x(t, s + 1, ANY) || self.any_x(ANY, s, t)) {
                                continue;
                            }
                            let mut terms = Vec::new();
                            for k in 1..=m {
                                if (k == i && (rr > 1 || s < r - 1)) || k == j || k == t {
                                    continue;
                                }
                                if !(self.any_x(t, s + 1, k) || self.any_x(k, s, t)) {
                                    continue;
                                }
                                self.push_y(&mut terms, 1, arc(i, rr, j), arc(k, s, t));
                                self.push_y(&mut terms, -1, arc(i, rr, j), arc(t, s + 1, k));
                            }
                            out("R307", terms, rat(0), &mut stats, emit);
                        }
                    }
                }
            }
        }

        if with_z {
            self.z_families(&mut out, &mut stats, emit);
        }

        if self.config.version == Version::Old {
            self.old_families(&mut out, &mut stats, emit, &total);
        }
        if self.config.include_visit_constraints {
            self.visit_family(&mut out, &mut stats, emit);
        }

        stats
    }

    /// Families coupling z variables to y variables (R308 through R318).
    fn z_families(
        &self,
        out: &mut dyn FnMut(
            &'static str,
            Vec<(Rational, VarKey)>,
            Rational,
            &mut BlpStats,
            &mut dyn FnMut(Constraint),
        ),
        stats: &mut BlpStats,
        emit: &mut dyn FnMut(Constraint),
    ) {
        let (m, r, ext) = (self.m, self.r, self.ext);

        // R308: a consecutive pair continues one stage further through z.
        for i in 1..=m {
            if !self.any_x(i, ANY, ANY) {
                continue;
            }
            for u in 1..=m {
                if u == i || !(self.any_x(i, ANY, u) && self.any_x(u, ANY, ANY)) {
                    continue;
                }
                for v in 1..=m {
                    if v == i || v == u || !self.any_x(u, ANY, v) {
                        continue;
                    }
                    for p in 2..=((r + ext).saturating_sub(3)) {
                        if !(self.any_x(i, p - 1, u)
                            && self.any_x(u, p, v)
                            && self.any_y(i, p - 1, u, u, p, v))
                        {
                            continue;
                        }
                        let mut terms = Vec::new();
                        self.push_y(&mut terms, 1, arc(i, p - 1, u), arc(u, p, v));
                        for t in 1..=m {
                            if t == i || t == u || t == v || !self.any_x(v, p + 1, t) {
                                continue;
                            }
                            self.push_z(
                                &mut terms,
                                -1,
                                arc(i, p - 1, u),
                                arc(u, p, v),
                                arc(v, p + 1, t),
                            );
                        }
                        out("R308", terms, rat(0), stats, emit);
                    }
                }
            }
        }

        // R309: a consecutive pair reaches every later stage through z.
        for i in 1..=m {
            if !self.any_x(i, ANY, ANY) {
                continue;
            }
            for u in 1..=m {
                if u == i || !(self.any_x(i, ANY, u) && self.any_x(u, ANY, ANY)) {
                    continue;
                }
                for v in 1..=m {
                    if v == i || v == u || !self.any_x(u, ANY, v) {
                        continue;
                    }
                    for p in 2..=((r + ext).saturating_sub(3)) {
                        if !(self.any_x(i, p - 1, u)
                            && self.any_x(u, p, v)
                            && self.any_y(i, p - 1, u, u, p, v))
                        {
                            continue;
                        }
                        for s in (p + 2)..=r {
                            let mut terms = Vec::new();
                            self.push_y(&mut terms, 1, arc(i, p - 1, u), arc(u, p, v));
                            for k in 1..=m {
                                if k == i || k == u || k == v || !self.any_x(k, s, ANY) {
                                    continue;
                                }
                                for t in 1..=m {
                                    if (t == i && (s < r || p > 2))
                                        || t == u
                                        || t == v
                                        || t == k
                                        || !self.any_x(k, s, t)
                                    {
                                        continue;
                                    }
                                    self.push_z(
                                        &mut terms,
                                        -1,
                                        arc(i, p - 1, u),
                                        arc(u, p, v),
                                        arc(k, s, t),
                                    );
                                }
                            }
                            out("R309", terms, rat(0), stats, emit);
                        }
                    }
                }
            }
        }

        // R310: a separated pair continues right after its second arc.
        for i in 1..=m {
            if !self.any_x(i, ANY, ANY) {
                continue;
            }
            for j in 1..=m {
                if j == i || !self.any_x(i, ANY, j) {
                    continue;
                }
                for u in 1..=m {
                    if u == i || u == j || !self.any_x(u, ANY, ANY) {
                        continue;
                    }
                    for v in 1..=m {
                        if v == i || v == j || v == u || !self.any_x(u, ANY, v) {
                            continue;
                        }
                        for p in 3..=((r + ext).saturating_sub(3)) {
                            if !self.any_x(u, p, v) {
                                continue;
                            }
                            for rr in 1..=(p - 2) {
                                if !(self.any_x(i, rr, j) && self.any_y(i, rr, j, u, p, v)) {
                                    continue;
                                }
                                let mut terms = Vec::new();
                                self.push_y(&mut terms, 1, arc(i, rr, j), arc(u, p, v));
                                for t in 1..=m {
                                    if (t == i && (rr > 1 || p < r - 1))
                                        || t == j
                                        || t == u
                                        || t == v
                                        || !self.any_x(v, p + 1, t)
                                    {
                                        continue;
                                    }
                                    self.push_z(
                                        &mut terms,
                                        -1,
                                        arc(i, rr, j),
                                        arc(u, p, v),
                                        arc(v, p + 1, t),
                                    );
                                }
                                out("R310", terms, rat(0), stats, emit);
                            }
                        }
                    }
                }
            }
        }

        // R311: a separated pair reaches every later stage through z.
        for i in 1..=m {
            if !self.any_x(i, ANY, ANY) {
                continue;
            }
            for j in 1..=m {
                if j == i || !self.any_x(i, ANY, j) {
                    continue;
                }
                for u in 1..=m {
                    if u == i || u == j || !self.any_x(u, ANY, ANY) {
                        continue;
                    }
                    for v in 1..=m {
                        if v == i || v == j || v == u || !self.any_x(u, ANY, v) {
                            continue;
                        }
                        for p in 3..=((r + ext).saturating_sub(4)) {
                            if !self.any_x(u, p, v) {
                                continue;
                            }
                            for rr in 1..=(p - 2) {
                                if !(self.any_x(i, rr, j) && self.any_y(i, rr, j, u, p, v)) {
                                    continue;
                                }
                                for s in (p + 2)..=r {
                                    let mut terms = Vec::new();
                                    self.push_y(&mut terms, 1, arc(i, rr, j), arc(u, p, v));
                                    for k in 1..=m {
                                        if k == i
                                            || k == j
                                            || k == u
                                            || k == v
                                            || !self.any_x(k, s, ANY)
                                        {
                                            continue;
                                        }
                                        for t in 1..=m {
                                            if (t == i && (s < r || rr > 1))
                                                || t == j
                                                || t == u
                                                || t == v
                                                || t == k
                                                || !self.any_x(k, s, t)
                                            {
                                                continue;
                                            }
                                            self.push_z(
                                                &mut terms,
                                                -1,
                                                arc(i, rr, j),
                                                arc(u, p, v),
                                                arc(k, s, t),
                                            );
                                        }
                                    }
                                    out("R311", terms, rat(0), stats, emit);
                                }
                            }
                        }
                    }
                }
            }
        }

        // R312: a two-stage-separated pair determines its unique middle arc.
        for i in 1..=m {
            if !self.any_x(i, ANY, ANY) {
                continue;
            }
            for j in 1..=m {
                if j == i || !self.any_x(i, ANY, j) {
                    continue;
                }
                for k in 1..=m {
                    if k == i || k == j || !self.any_x(k, ANY, ANY) {
                        continue;
                    }
                    for t in 1..=m {
                        if t == i || t == j || t == k || !self.any_x(k, ANY, t) {
                            continue;
                        }
                        for rr in 1..=((r + ext).saturating_sub(4)) {
                            if !(self.any_x(i, rr, j)
                                && self.any_x(k, rr + 2, t)
                                && self.any_y(i, rr, j, k, rr + 2, t))
                            {
                                continue;
                            }
                            let mut terms = Vec::new();
                            self.push_y(&mut terms, 1, arc(i, rr, j), arc(k, rr + 2, t));
                            self.push_z(
                                &mut terms,
                                -1,
                                arc(i, rr, j),
                                arc(j, rr + 1, k),
                                arc(k, rr + 2, t),
                            );
                            out("R312", terms, rat(0), stats, emit);
                        }
                    }
                }
            }
        }

        // R313: the middle arc right after the first arc of a separated pair.
        for i in 1..=m {
            if !self.any_x(i, ANY, ANY) {
                continue;
            }
            for j in 1..=m {
                if j == i || !self.any_x(i, ANY, j) {
                    continue;
                }
                for k in 1..=m {
                    if k == i || k == j || !self.any_x(k, ANY, ANY) {
                        continue;
                    }
                    for t in 1..=m {
                        if t == j || t == k || !self.any_x(k, ANY, t) {
                            continue;
                        }
                        for rr in 1..=((r + ext).saturating_sub(5)) {
                            if !self.any_x(i, rr, j) {
                                continue;
                            }
                            for s in (rr + 3)..=r {
                                if !(self.any_x(k, s, t) && self.any_y(i, rr, j, k, s, t)) {
                                    continue;
                                }
                                let mut first = Vec::new();
                                self.push_y(&mut first, 1, arc(i, rr, j), arc(k, s, t));
                                for v in 1..=m {
                                    if v == i || v == k || v == t || !self.any_x(j, rr + 1, v) {
                                        continue;
                                    }
                                    self.push_z(
                                        &mut first,
                                        -1,
                                        arc(i, rr, j),
                                        arc(j, rr + 1, v),
                                        arc(k, s, t),
                                    );
                                }
                                out("R313", first, rat(0), stats, emit);
                                let mut last = Vec::new();
                                self.push_y(&mut last, 1, arc(i, rr, j), arc(k, s, t));
                                for u in 1..=m {
                                    if u == i || u == j || u == t || !self.any_x(u, s - 1, k) {
                                        continue;
                                    }
                                    self.push_z(
                                        &mut last,
                                        -1,
                                        arc(i, rr, j),
                                        arc(u, s - 1, k),
                                        arc(k, s, t),
                                    );
                                }
                                out("R313", last, rat(0), stats, emit);
                            }
                        }
                    }
                }
            }
        }

        // R314: a separated pair is reachable from every stage before its
        // first arc (the separated-pair analogue of R317).
        for u in 1..=m {
            if !self.any_x(u, ANY, ANY) {
                continue;
            }
            for v in 1..=m {
                if v == u || !self.any_x(u, ANY, v) {
                    continue;
                }
                for k in 1..=m {
                    if k == u || k == v || !self.any_x(k, ANY, ANY) {
                        continue;
                    }
                    for t in 1..=m {
                        if t == k || !self.any_x(k, ANY, t) {
                            continue;
                        }
                        for p in 3..=((r + ext).saturating_sub(4)) {
                            if !self.any_x(u, p, v) {
                                continue;
                            }
                            for s in (p + 2)..=r {
                                if !(self.any_x(k, s, t) && self.any_y(u, p, v, k, s, t)) {
                                    continue;
                                }
                                for rr in 1..=(p - 2) {
                                    let mut terms = Vec::new();
                                    self.push_y(&mut terms, 1, arc(u, p, v), arc(k, s, t));
                                    for i in 1..=m {
                                        if i == u
                                            || i == v
                                            || i == k
                                            || (i == t && (rr > 1 || s < r))
                                            || !self.any_x(i, rr, ANY)
                                        {
                                            continue;
                                        }
                                        for j in 1..=m {
                                            if j == i
                                                || j == u
                                                || j == v
                                                || j == k
                                                || j == t
                                                || !self.any_x(i, rr, j)
                                            {
                                                continue;
                                            }
                                            self.push_z(
                                                &mut terms,
                                                -1,
                                                arc(i, rr, j),
                                                arc(u, p, v),
                                                arc(k, s, t),
                                            );
                                        }
                                    }
                                    out("R314", terms, rat(0), stats, emit);
                                }
                            }
                        }
                    }
                }
            }
        }

        // R315: every strictly-between stage carries the pair's full flow.
        for i in 1..=m {
            if !self.any_x(i, ANY, ANY) {
                continue;
            }
            for j in 1..=m {
                if j == i || !self.any_x(i, ANY, j) {
                    continue;
                }
                for k in 1..=m {
                    if k == i || k == j || !self.any_x(k, ANY, ANY) {
                        continue;
                    }
                    for t in 1..=m {
                        if t == j || t == k || !self.any_x(k, ANY, t) {
                            continue;
                        }
                        for rr in 1..=((r + ext).saturating_sub(6)) {
                            if !self.any_x(i, rr, j) {
                                continue;
                            }
                            for s in (rr + 4)..=r {
                                if !self.any_x(k, s, t) {
                                    continue;
                                }
                                for p in (rr + 2)..=(s - 2) {
                                    if (i == t && (rr > 1 || s < r))
                                        || !self.any_y(i, rr, j, k, s, t)
                                    {
                                        continue;
                                    }
                                    let mut terms = Vec::new();
                                    self.push_y(&mut terms, 1, arc(i, rr, j), arc(k, s, t));
                                    for u in 1..=m {
                                        if u == i
                                            || u == j
                                            || u == k
                                            || u == t
                                            || !self.any_x(u, p, ANY)
                                        {
                                            continue;
                                        }
                                        for v in 1..=m {
                                            if v == i
                                                || v == j
                                                || v == k
                                                || v == t
                                                || v == u
                                                || !self.any_x(u, p, v)
                                            {
                                                continue;
                                            }
                                            self.push_z(
                                                &mut terms,
                                                -1,
                                                arc(i, rr, j),
                                                arc(u, p, v),
                                                arc(k, s, t),
                                            );
                                        }
                                    }
                                    out("R315", terms, rat(0), stats, emit);
                                }
                            }
                        }
                    }
                }
            }
        }

        // R316: a consecutive pair is reachable from some stage-(p-1) arc.
        for u in 1..=m {
            if !self.any_x(u, ANY, ANY) {
                continue;
            }
            for v in 1..=m {
                if u == v || !self.any_x(u, ANY, v) {
                    continue;
                }
                for t in 1..=m {
                    if t == u || t == v || !self.any_x(v, ANY, t) {
                        continue;
                    }
                    for p in 2..=((r + ext).saturating_sub(3)) {
                        if !self.any_y(u, p, v, v, p + 1, t) {
                            continue;
                        }
                        let mut terms = Vec::new();
                        self.push_y(&mut terms, 1, arc(u, p, v), arc(v, p + 1, t));
                        for i in 1..=m {
                            if i == u || i == v || i == t {
                                continue;
                            }
                            self.push_z(
                                &mut terms,
                                -1,
                                arc(i, p - 1, u),
                                arc(u, p, v),
                                arc(v, p + 1, t),
                            );
                        }
                        out("R316", terms, rat(0), stats, emit);
                    }
                }
            }
        }

        // R317: a consecutive pair is reachable from every earlier stage.
        for u in 1..=m {
            if !self.any_x(u, ANY, ANY) {
                continue;
            }
            for v in 1..=m {
                if u == v || !self.any_x(u, ANY, v) {
                    continue;
                }
                for t in 1..=m {
                    if t == u || t == v || !self.any_x(v, ANY, t) {
                        continue;
                    }
                    for p in 3..=((r + ext).saturating_sub(3)) {
                        if !self.any_y(u, p, v, v, p + 1, t) {
                            continue;
                        }
                        for rr in 1..=(p - 2) {
                            let mut terms = Vec::new();
                            self.push_y(&mut terms, 1, arc(u, p, v), arc(v, p + 1, t));
                            for i in 1..=m {
                                if i == u
                                    || i == v
                                    || (i == t && (rr > 1 || p < r - 1))
                                    || !self.any_x(i, rr, ANY)
                                {
                                    continue;
                                }
                                for j in 1..=m {
                                    if j == u
                                        || j == v
                                        || j == t
                                        || j == i
                                        || !self.any_x(i, rr, j)
                                    {
                                        continue;
                                    }
                                    self.push_z(
                                        &mut terms,
                                        -1,
                                        arc(i, rr, j),
                                        arc(u, p, v),
                                        arc(v, p + 1, t),
                                    );
                                }
                            }
                            out("R317", terms, rat(0), stats, emit);
                        }
                    }
                }
            }
        }

        // R318: a separated pair is reachable via the arc entering its first
        // arc's source.
        for u in 1..=m {
            if !self.any_x(u, ANY, ANY) {
                continue;
            }
            for v in 1..=m {
                if u == v || !self.any_x(u, ANY, v) {
                    continue;
                }
                for k in 1..=m {
                    if k == u || k == v || !self.any_x(k, ANY, ANY) {
                        continue;
                    }
                    for t in 1..=m {
                        if t == u || t == v || t == k || !self.any_x(k, ANY, t) {
                            continue;
                        }
                        for p in 2..=((r + ext).saturating_sub(4)) {
                            if !self.any_x(u, p, v) {
                                continue;
                            }
                            for s in (p + 2)..=r {
                                if !(self.any_x(k, s, t) && self.any_y(u, p, v, k, s, t)) {
                                    continue;
                                }
                                let mut terms = Vec::new();
                                self.push_y(&mut terms, 1, arc(u, p, v), arc(k, s, t));
                                for i in 1..=m {
                                    if i == u
                                        || i == v
                                        || i == k
                                        || (i == t && (p > 2 || s < r))
                                        || !self.any_x(i, p - 1, u)
                                    {
                                        continue;
                                    }
                                    self.push_z(
                                        &mut terms,
                                        -1,
                                        arc(i, p - 1, u),
                                        arc(u, p, v),
                                        arc(k, s, t),
                                    );
                                }
                                out("R318", terms, rat(0), stats, emit);
                            }
                        }
                    }
                }
            }
        }
    }

    /// Older-version extras: diagonal conservation, first-step reach, and the
    /// two flow-relation families.
    fn old_families(
        &self,
        out: &mut dyn FnMut(
            &'static str,
            Vec<(Rational, VarKey)>,
            Rational,
            &mut BlpStats,
            &mut dyn FnMut(Constraint),
        ),
        stats: &mut BlpStats,
        emit: &mut dyn FnMut(Constraint),
        _total: &Rational,
    ) {
        let (m, r) = (self.m, self.r);

        // OLD2.18: conservation over the diagonal variables.
        for j in 1..=m {
            for s in 1..r {
                let mut terms = Vec::new();
                for i in 1..=m {
                    if i == j {
                        continue;
                    }
                    if self.check_x(i, s, j) {
                        terms.push((rat(1), VarKey::y_diag(arc(i, s, j))));
                    }
                    if self.check_x(j, s + 1, i) {
                        terms.push((rat(-1), VarKey::y_diag(arc(j, s + 1, i))));
                    }
                }
                out("ROLD218", terms, rat(0), stats, emit);
            }
        }

        // OLD2.24: first-step flow reaches every node with the same value.
        for i in 1..=m {
            for j in 1..=m {
                if i == j || !self.check_x(i, 1, j) {
                    continue;
                }
                for t in 1..=m {
                    if t == i || t == j {
                        continue;
                    }
                    let mut terms = Vec::new();
                    self.push_y(&mut terms, 1, arc(i, 1, j), arc(i, 1, j));
                    for k in 1..=m {
                        for rr in 2..=r {
                            self.push_y(&mut terms, -1, arc(i, 1, j), arc(k, rr, t));
                        }
                    }
                    out("ROLD224", terms, rat(0), stats, emit);
                }
            }
        }

        // RELATE_I: flow conditioned on an arc sums to the arc's flow at every
        // later stage.
        for i in 1..=m {
            for j in 1..=m {
                if i == j {
                    continue;
                }
                for s in 1..=r {
                    if !self.check_x(i, s, j) {
                        continue;
                    }
                    for p in (s + 1)..=r {
                        let mut terms = Vec::new();
                        self.push_y(&mut terms, 1, arc(i, s, j), arc(i, s, j));
                        for u in 1..=m {
                            for v in 1..=m {
                                self.push_y(&mut terms, -1, arc(i, s, j), arc(u, p, v));
                            }
                        }
                        out("RRELATE1", terms, rat(0), stats, emit);
                    }
                }
            }
        }

        // RELATE_II: the same, looking backwards.
        for i in 1..=m {
            for j in 1..=m {
                if i == j {
                    continue;
                }
                for s in 1..=r {
                    if !self.check_x(i, s, j) {
                        continue;
                    }
                    for p in 1..s {
                        let mut terms = Vec::new();
                        self.push_y(&mut terms, 1, arc(i, s, j), arc(i, s, j));
                        for u in 1..=m {
                            for v in 1..=m {
                                self.push_y(&mut terms, -1, arc(u, p, v), arc(i, s, j));
                            }
                        }
                        out("RRELATE2", terms, rat(0), stats, emit);
                    }
                }
            }
        }
    }

    /// The per-stage visit family the current formulation leaves out: flow
    /// conditioned on an arc must pass through every other node exactly once,
    /// summing forward and backward conditioned variables.
    fn visit_family(
        &self,
        out: &mut dyn FnMut(
            &'static str,
            Vec<(Rational, VarKey)>,
            Rational,
            &mut BlpStats,
            &mut dyn FnMut(Constraint),
        ),
        stats: &mut BlpStats,
        emit: &mut dyn FnMut(Constraint),
    ) {
        let (m, r) = (self.m, self.r);
        for i in 1..=m {
            for j in 1..=m {
                if i == j {
                    continue;
                }
                for s in 1..=r {
                    if !self.check_x(i, s, j) {
                        continue;
                    }
                    for t in 1..=m {
                        if t == i || t == j {
                            continue;
                        }
                        let mut terms = Vec::new();
                        for k in 1..=m {
                            for rr in (s + 1)..=r {
                                self.push_y(&mut terms, 1, arc(i, s, j), arc(k, rr, t));
                            }
                            for rr in 1..s {
                                self.push_y(&mut terms, 1, arc(k, rr, t), arc(i, s, j));
                            }
                        }
                        // Emit even when no conditioned visit variable exists:
                        // the equation then pins y_{i,s,j,i,s,j} to zero, which
                        // is exactly the restriction this family adds.
                        self.push_y(&mut terms, -1, arc(i, s, j), arc(i, s, j));
                        out("RVISIT213", terms, rat(0), stats, emit);
                    }
                }
            }
        }
    }

    /// The model's variable set: every admissible supported variable of the
    /// configured dimension, in canonical order. This is a superset of the
    /// variables appearing in constraint terms — a handful of admissible
    /// late-stage variables fall outside every family's stage caps but are
    /// still part of the model (they get bounds lines and may carry flow).
    pub fn variables(&self) -> BTreeSet<VarKey> {
        let (m, r) = (self.m, self.r);
        let mut arcs: Vec<Arc> = Vec::new();
        for s in 1..=r {
            for i in 1..=m {
                for j in 1..=m {
                    if self.check_x(i, s, j) {
                        arcs.push(arc(i, s, j));
                    }
                }
            }
        }
        let adm = self.adm();
        let mut vars = BTreeSet::new();
        for a in &arcs {
            vars.insert(VarKey::y_diag(*a));
        }
        // `arcs` is stage-major, so a simple index split keeps pairs ordered.
        for (ai, a) in arcs.iter().enumerate() {
            for b in &arcs[ai + 1..] {
                if b.stage <= a.stage
                    || !adm.check_y(a.from, a.stage, a.to, b.from, b.stage, b.to)
                {
                    continue;
                }
                vars.insert(VarKey::y(*a, *b));
                if self.config.dimension == Dimension::Z {
                    for c in &arcs[ai + 1..] {
                        if c.stage > b.stage && adm.check_z(*a, *b, *c) {
                            vars.insert(VarKey::z(*a, *b, *c));
                        }
                    }
                }
            }
        }
        vars
    }
}

/// Standalone pair-admissibility predicate over node/stage range `n`.
#[allow(clippy::too_many_arguments)]
pub fn admissible_y(
    i: u16,
    s: u16,
    j: u16,
    u: u16,
    p: u16,
    v: u16,
    n: u16,
    config: &ModelConfig,
) -> bool {
    Admissibility::new(n, config).check_y(i, s, j, u, p, v)
}

/// Standalone triple-admissibility predicate over node/stage range `n`.
pub fn admissible_z(a: Arc, b: Arc, c: Arc, n: u16, config: &ModelConfig) -> bool {
    Admissibility::new(n, config).check_z(a, b, c)
}

/// Lifts a Hamiltonian tour into the y or z dimension at full value: the
/// diagonal carries the tour's arcs, every stage-ordered admissible pair of
/// tour arcs gets the full flow, and (for the z dimension) every stage-ordered
/// admissible triple does too. The result is the integral point the relaxation
/// is supposed to contain, used to test that every family admits real tours.
pub fn lift_tour(
    tour: &[u16],
    config: &ModelConfig,
    total_flow: Rational,
) -> Result<crate::assignment::Assignment, Error> {
    let n = tour.len() as u16;
    if n < 3 {
        return Err(Error::Validation(format!(
            "tour lifting needs at least 3 nodes, got {}",
            tour.len()
        )));
    }
    let mut seen = vec![false; tour.len() + 1];
    for &v in tour {
        if v == 0 || v > n || seen[v as usize] {
            return Err(Error::Validation(format!(
                "tour is not a permutation of 1..={n}: offending node {v}"
            )));
        }
        seen[v as usize] = true;
    }
    if matches!(config.dimension, Dimension::X) {
        return Err(Error::Unsupported(
            "lift_tour targets the y or z dimension; use tour_to_assignment for x".into(),
        ));
    }
    let arcs: Vec<Arc> = (0..tour.len())
        .map(|s| arc(tour[s], (s + 1) as u16, tour[(s + 1) % tour.len()]))
        .collect();
    let adm = Admissibility::new(n, config);
    let mut a = crate::assignment::Assignment::new(total_flow.clone());
    for b in &arcs {
        a.set(VarKey::y_diag(*b), total_flow.clone());
    }
    for s in 0..arcs.len() {
        for p in (s + 1)..arcs.len() {
            let (b, c) = (arcs[s], arcs[p]);
            if adm.check_y(b.from, b.stage, b.to, c.from, c.stage, c.to) {
                a.set(VarKey::y(b, c), total_flow.clone());
            }
            if matches!(config.dimension, Dimension::Z) {
                for q in (p + 1)..arcs.len() {
                    let d = arcs[q];
                    if adm.check_z(b, c, d) {
                        a.set(VarKey::z(b, c, d), total_flow.clone());
                    }
                }
            }
        }
    }
    Ok(a)
}

/// Streams the model into a callback, returning the counts.
pub fn build_blp(
    instance: &Instance,
    config: &ModelConfig,
    emit: &mut dyn FnMut(Constraint),
) -> Result<BlpStats, Error> {
    Ok(BlpModel::new(instance, config)?.for_each_constraint(emit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Dimension;

    fn inst(n: usize) -> Instance {
        let mut m = vec![vec![1i64; n]; n];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 99;
        }
        Instance::new(m).unwrap()
    }

    fn ycfg() -> ModelConfig {
        ModelConfig::new(Dimension::Y)
    }

    #[test]
    fn predicate_basics() {
        let inst = inst(5);
        let cfg = ycfg();
        let m = BlpModel::new(&inst, &cfg).unwrap();
        // consecutive arcs
        assert!(m.check_y(1, 1, 2, 2, 2, 3));
        // broken flow
        assert!(!m.check_y(1, 1, 2, 3, 2, 4));
        // revisit of source at interior stage
        assert!(!m.check_y(1, 1, 2, 2, 3, 1));
        // cycle closure: return to source allowed at (s=1, p=R)
        assert!(m.check_y(1, 1, 2, 3, 5, 1));
        // diagonal admissible
        assert!(m.check_y(2, 3, 4, 2, 3, 4));
        // same layer, different arcs
        assert!(!m.check_y(1, 1, 2, 3, 1, 4));
    }

    #[test]
    fn z_needs_ordered_stages_and_all_pairs() {
        let i = inst(6);
        let cfg = ModelConfig::new(Dimension::Z);
        let m = BlpModel::new(&i, &cfg).unwrap();
        assert!(m.check_z(arc(1, 1, 2), arc(2, 2, 3), arc(3, 3, 4)));
        assert!(!m.check_z(arc(1, 1, 2), arc(3, 3, 4), arc(2, 2, 3)));
        // k = u revisits node 2 on the middle/last pair
        assert!(!m.check_z(arc(1, 1, 2), arc(2, 2, 3), arc(2, 3, 5)));
    }

    #[test]
    fn r302_is_single_total_flow_equation() {
        let i = inst(5);
        let cfg = ycfg().with_total_flow(7);
        let mut r302 = Vec::new();
        build_blp(&i, &cfg, &mut |c| {
            if c.label.starts_with("R302") {
                r302.push(c);
            }
        })
        .unwrap();
        assert_eq!(r302.len(), 1);
        assert_eq!(r302[0].rhs, rat(7));
        // 5*4 stage-1 arcs
        assert_eq!(r302[0].terms.len(), 20);
    }

    #[test]
    fn y_dimension_emits_no_z_families() {
        let i = inst(5);
        let cfg = ycfg();
        let model = BlpModel::new(&i, &cfg).unwrap();
        let stats = model.for_each_constraint(&mut |_| {});
        for fam in stats.per_family.keys() {
            assert!(
                !matches!(*fam, "R308" | "R309" | "R310" | "R311" | "R312" | "R313" | "R314"
                    | "R315" | "R316" | "R317" | "R318"),
                "unexpected z family {fam} in Y model"
            );
        }
        assert!(stats.per_family.contains_key("R305"));
    }
}
