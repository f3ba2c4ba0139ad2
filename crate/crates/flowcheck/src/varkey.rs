//! Variable keys for the x / y / z model dimensions.
//!
//! All indices are 1-based to match the usual statement of the flow models:
//! node indices run in `1..=M`, stage indices in `1..=R`. The derived `Ord`
//! gives the canonical emission order: variant first (x before y before z),
//! then lexicographic on the index tuple.

use std::fmt;

/// A directed arc `from -> to` taken at a given stage.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Arc {
    pub from: u16,
    pub stage: u16,
    pub to: u16,
}

impl Arc {
    pub fn new(from: u16, stage: u16, to: u16) -> Self {
        Arc { from, stage, to }
    }

    pub fn tuple(&self) -> (u16, u16, u16) {
        (self.from, self.stage, self.to)
    }
}

/// Shorthand constructor used pervasively in tests and generators.
pub fn arc(from: u16, stage: u16, to: u16) -> Arc {
    Arc::new(from, stage, to)
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum VarKey {
    /// `x_{i,s,j}`: the tour traverses arc `i -> j` at step `s`.
    X(Arc),
    /// `y_{i,s,j,u,p,v}`: flow caused on arc `(u,p,v)` by arc `(i,s,j)`.
    /// The diagonal `y` (both arcs equal) is identified with `x`.
    Y(Arc, Arc),
    /// `z_{i,s,j,u,p,v,k,r,t}`: flow conditioned on an ordered pair of arcs.
    Z(Arc, Arc, Arc),
}

impl VarKey {
    pub fn x(i: u16, s: u16, j: u16) -> Self {
        VarKey::X(arc(i, s, j))
    }

    pub fn y(a: Arc, b: Arc) -> Self {
        VarKey::Y(a, b)
    }

    pub fn y_diag(a: Arc) -> Self {
        VarKey::Y(a, a)
    }

    pub fn z(a: Arc, b: Arc, c: Arc) -> Self {
        VarKey::Z(a, b, c)
    }

    /// The conditioning-free arc of an `x` key, or the diagonal arc of a
    /// diagonal `y` key. `None` for off-diagonal keys.
    pub fn as_flow_arc(&self) -> Option<Arc> {
        match self {
            VarKey::X(a) => Some(*a),
            VarKey::Y(a, b) if a == b => Some(*a),
            _ => None,
        }
    }

    /// Largest node index referenced by the key.
    pub fn max_node(&self) -> u16 {
        self.arcs().iter().map(|a| a.from.max(a.to)).max().unwrap()
    }

    /// Largest stage index referenced by the key.
    pub fn max_stage(&self) -> u16 {
        self.arcs().iter().map(|a| a.stage).max().unwrap()
    }

    pub fn arcs(&self) -> Vec<Arc> {
        match self {
            VarKey::X(a) => vec![*a],
            VarKey::Y(a, b) => vec![*a, *b],
            VarKey::Z(a, b, c) => vec![*a, *b, *c],
        }
    }

    /// Variable name in the LP output grammar: underscore-joined indices.
    pub fn name(&self) -> String {
        self.to_string()
    }

    /// Parses a name produced by [`VarKey::name`]; the grammar is injective.
    pub fn parse(name: &str) -> Result<Self, String> {
        let mut parts = name.split('_');
        let tag = parts.next().ok_or_else(|| format!("empty variable name {name:?}"))?;
        let idx: Result<Vec<u16>, _> = parts
            .map(|p| p.parse::<u16>().map_err(|e| format!("bad index {p:?} in {name:?}: {e}")))
            .collect();
        let idx = idx?;
        let want = match tag {
            "x" => 3,
            "y" => 6,
            "z" => 9,
            _ => return Err(format!("unknown variable tag {tag:?} in {name:?}")),
        };
        if idx.len() != want {
            return Err(format!("variable {name:?}: expected {want} indices, got {}", idx.len()));
        }
        if idx.iter().any(|&v| v == 0) {
            return Err(format!("variable {name:?}: indices are 1-based, found 0"));
        }
        Ok(match tag {
            "x" => VarKey::x(idx[0], idx[1], idx[2]),
            "y" => VarKey::y(arc(idx[0], idx[1], idx[2]), arc(idx[3], idx[4], idx[5])),
            _ => VarKey::z(
                arc(idx[0], idx[1], idx[2]),
                arc(idx[3], idx[4], idx[5]),
                arc(idx[6], idx[7], idx[8]),
            ),
        })
    }
}

impl fmt::Display for VarKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarKey::X(a) => write!(f, "x_{}_{}_{}", a.from, a.stage, a.to),
            VarKey::Y(a, b) => write!(
                f,
                "y_{}_{}_{}_{}_{}_{}",
                a.from, a.stage, a.to, b.from, b.stage, b.to
            ),
            VarKey::Z(a, b, c) => write!(
                f,
                "z_{}_{}_{}_{}_{}_{}_{}_{}_{}",
                a.from, a.stage, a.to, b.from, b.stage, b.to, c.from, c.stage, c.to
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn name_round_trip() {
        let keys = [
            VarKey::x(1, 2, 3),
            VarKey::y(arc(1, 1, 2), arc(2, 2, 3)),
            VarKey::z(arc(1, 1, 2), arc(2, 2, 3), arc(3, 3, 4)),
        ];
        for k in keys {
            assert_eq!(VarKey::parse(&k.name()).unwrap(), k);
        }
    }

    #[test]
    fn rejects_malformed() {
        assert!(VarKey::parse("x_1_2").is_err());
        assert!(VarKey::parse("w_1_2_3").is_err());
        assert!(VarKey::parse("x_1_0_3").is_err());
        assert!(VarKey::parse("y_1_2_3_4_5_6_7").is_err());
    }

    #[test]
    fn variant_then_lexicographic_order() {
        let mut keys = vec![
            VarKey::y(arc(1, 1, 2), arc(2, 2, 3)),
            VarKey::x(9, 9, 9),
            VarKey::x(1, 2, 3),
            VarKey::x(1, 1, 9),
        ];
        keys.sort();
        assert_eq!(
            keys,
            vec![
                VarKey::x(1, 1, 9),
                VarKey::x(1, 2, 3),
                VarKey::x(9, 9, 9),
                VarKey::y(arc(1, 1, 2), arc(2, 2, 3)),
            ]
        );
    }
}
