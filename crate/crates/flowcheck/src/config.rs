//! Model configuration: dimension, start mode, constraint-family version, and
//! optional generator-side support restriction.

use crate::assignment::Assignment;
use crate::varkey::VarKey;
use std::collections::HashSet;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Dimension {
    X,
    Y,
    Z,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum StartMode {
    /// All flow departs node 1 at stage 1.
    FixedStart,
    /// Flow may start anywhere; stage ranges extend by one and cycle-closure
    /// boundary exemptions apply.
    FreeStart,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Version {
    /// Includes the older coupling families in addition to the current set.
    Old,
    /// The current family set only (R3.2 through R3.18).
    New,
}

/// Valley-band geometry used both for pruning conditioned variables that the
/// valley topology forces to zero and for side-consistency rules. `lead_in`
/// nodes form the start band; the next `valley_size` nodes are the first
/// valley of the pair, the following `valley_size` the second.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct ValleyBands {
    pub lead_in: u16,
    pub valley_size: u16,
}

impl ValleyBands {
    /// Which side of the mountain pair a node sits on: `false` for the lead-in
    /// band plus first valley, `true` beyond.
    pub fn side(&self, node: u16) -> bool {
        node > self.lead_in + self.valley_size
    }
}

/// Wildcard index in support queries: "any node" / "any stage".
pub const ANY: u16 = 0;

/// The support of an x assignment, queryable with wildcards. Conditioned
/// (y / z) variables vanish when any conditioning arc carries zero x flow, so
/// generators prune against this set.
#[derive(Clone, Debug, Default)]
pub struct XSupport {
    arcs: HashSet<(u16, u16, u16)>,
    from_stage: HashSet<(u16, u16)>,   // (i, s): some arc leaves i at stage s
    stage_to: HashSet<(u16, u16)>,     // (s, j): some arc enters j at stage s
    from_to: HashSet<(u16, u16)>,      // (i, j): some arc i -> j at any stage
    froms: HashSet<u16>,
    stages: HashSet<u16>,
    tos: HashSet<u16>,
}

impl XSupport {
    pub fn from_assignment(a: &Assignment) -> Self {
        let mut s = XSupport::default();
        for (key, _) in a.iter() {
            if let VarKey::X(arc) = key {
                s.insert(arc.from, arc.stage, arc.to);
            }
        }
        s
    }

    pub fn from_arcs(arcs: impl IntoIterator<Item = (u16, u16, u16)>) -> Self {
        let mut s = XSupport::default();
        for (i, st, j) in arcs {
            s.insert(i, st, j);
        }
        s
    }

    pub fn insert(&mut self, i: u16, s: u16, j: u16) {
        self.arcs.insert((i, s, j));
        self.from_stage.insert((i, s));
        self.stage_to.insert((s, j));
        self.from_to.insert((i, j));
        self.froms.insert(i);
        self.stages.insert(s);
        self.tos.insert(j);
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    /// True iff some supported arc matches the query; [`ANY`] (0) in any
    /// position is a wildcard.
    pub fn check(&self, i: u16, s: u16, j: u16) -> bool {
        match (i, s, j) {
            (ANY, ANY, ANY) => !self.arcs.is_empty(),
            (i, ANY, ANY) => self.froms.contains(&i),
            (ANY, s, ANY) => self.stages.contains(&s),
            (ANY, ANY, j) => self.tos.contains(&j),
            (i, s, ANY) => self.from_stage.contains(&(i, s)),
            (ANY, s, j) => self.stage_to.contains(&(s, j)),
            (i, ANY, j) => self.from_to.contains(&(i, j)),
            (i, s, j) => self.arcs.contains(&(i, s, j)),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &(u16, u16, u16)> {
        self.arcs.iter()
    }
}

/// Full model configuration.
#[derive(Clone, Debug)]
pub struct ModelConfig {
    pub dimension: Dimension,
    pub start_mode: StartMode,
    pub version: Version,
    /// The per-stage visit family the current formulation leaves out; on by
    /// default only for [`Version::Old`].
    pub include_visit_constraints: bool,
    /// Positive integer scaling of the unit flow.
    pub total_flow_constant: u64,
    /// Optional generator-side pruning to a known x support.
    pub support: Option<XSupport>,
    /// Optional valley geometry for topology-based pruning.
    pub bands: Option<ValleyBands>,
}

impl ModelConfig {
    pub fn new(dimension: Dimension) -> Self {
        ModelConfig {
            dimension,
            start_mode: StartMode::FixedStart,
            version: Version::New,
            include_visit_constraints: false,
            total_flow_constant: 1,
            support: None,
            bands: None,
        }
    }

    pub fn with_start(mut self, m: StartMode) -> Self {
        self.start_mode = m;
        self
    }

    pub fn with_version(mut self, v: Version) -> Self {
        self.version = v;
        self.include_visit_constraints = v == Version::Old;
        self
    }

    pub fn with_visit_constraints(mut self, on: bool) -> Self {
        self.include_visit_constraints = on;
        self
    }

    pub fn with_total_flow(mut self, c: u64) -> Self {
        assert!(c >= 1, "total_flow_constant must be >= 1");
        self.total_flow_constant = c;
        self
    }

    pub fn with_support(mut self, s: XSupport) -> Self {
        self.support = Some(s);
        self
    }

    pub fn with_bands(mut self, b: ValleyBands) -> Self {
        self.bands = Some(b);
        self
    }

    /// Support query honouring the optional restriction; unrestricted configs
    /// treat every arc as supported.
    pub fn supported(&self, i: u16, s: u16, j: u16) -> bool {
        match &self.support {
            Some(sup) => sup.check(i, s, j),
            None => true,
        }
    }
}
