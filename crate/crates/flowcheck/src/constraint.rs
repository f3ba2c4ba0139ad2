//! Linear constraints: signed terms, a relation, and a rational right side.

use crate::rational::{format_rational, Rational};
use crate::varkey::VarKey;
use std::fmt;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Relation {
    Eq,
    Le,
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Eq => "=",
            Relation::Le => "<=",
            Relation::Ge => ">=",
        })
    }
}

/// One linear constraint. `label` is a family tag plus ordinal, for example
/// `R305_17`, and is unique within a model stream.
#[derive(Clone, Debug)]
pub struct Constraint {
    pub label: String,
    pub terms: Vec<(Rational, VarKey)>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Constraint {
    pub fn eq(label: String, terms: Vec<(Rational, VarKey)>, rhs: Rational) -> Self {
        Constraint {
            label,
            terms,
            relation: Relation::Eq,
            rhs,
        }
    }

    /// Renders the body in LP text form: `label: t1 + t2 - t3 = rhs`.
    /// Coefficients 1 and -1 render as bare `+ name` / `- name`.
    pub fn render(&self) -> String {
        use num_traits::Signed;
        let mut out = String::with_capacity(32 * self.terms.len());
        out.push_str(&self.label);
        out.push(':');
        for (idx, (coef, key)) in self.terms.iter().enumerate() {
            let neg = coef.is_negative();
            let mag = if neg { -coef.clone() } else { coef.clone() };
            if idx == 0 && !neg {
                out.push(' ');
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if !mag.is_integer() || mag.numer().to_string() != "1" {
                out.push_str(&format_rational(&mag));
                out.push(' ');
            }
            out.push_str(&key.name());
        }
        out.push(' ');
        out.push_str(&self.relation.to_string());
        out.push(' ');
        out.push_str(&format_rational(&self.rhs));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, ratio};

    #[test]
    fn renders_unit_and_general_coefficients() {
        let c = Constraint::eq(
            "R303_1".into(),
            vec![
                (rat(1), VarKey::x(1, 1, 2)),
                (rat(-1), VarKey::x(2, 2, 3)),
                (ratio(1, 2), VarKey::x(3, 3, 1)),
            ],
            rat(0),
        );
        assert_eq!(c.render(), "R303_1: x_1_1_2 - x_2_2_3 + 1/2 x_3_3_1 = 0");
    }
}
