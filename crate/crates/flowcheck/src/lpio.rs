//! Bit-stable serialization: LP-format model emission and assignment files.
//!
//! The LP grammar is fixed: `Minimize cost: `, the objective body, `Subject
//! to`, one labelled constraint per line (wrapped at the 200-character
//! watermark), the bounds lines, `End`. Variable names are underscore-joined
//! index tuples and parse back injectively. Assignment files carry one
//! `name<TAB>numerator/denominator` record per line.

use crate::assignment::Assignment;
use crate::blp::Admissibility;
use crate::config::ModelConfig;
use crate::constraint::Constraint;
use crate::error::Error;
use crate::rational::{parse_rational, Rational};
use crate::varkey::VarKey;
use num_traits::One;
use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

/// Wrap watermark: a newline is inserted before any piece that would push the
/// current line past this many characters.
pub const WRAP_COLUMN: usize = 200;

/// Bounds section data: the default range is `[0, total_flow]`; pinned
/// variables emit the fixed-value form `v <= name <= v`.
#[derive(Clone, Debug, Default)]
pub struct LpBounds {
    pub total_flow: String,
    pub pinned: BTreeMap<VarKey, String>,
}

impl LpBounds {
    pub fn new(total_flow: &Rational) -> Self {
        LpBounds {
            total_flow: crate::rational::format_rational(total_flow),
            pinned: BTreeMap::new(),
        }
    }
}

struct CountingWriter<W: Write> {
    inner: W,
    bytes: u64,
}

impl<W: Write> CountingWriter<W> {
    fn put(&mut self, s: &str) -> io::Result<()> {
        self.inner.write_all(s.as_bytes())?;
        self.bytes += s.len() as u64;
        Ok(())
    }
}

/// Renders one signed term: `+ name`, `- name`, or with an explicit
/// coefficient when it is not ±1.
fn term_text(coef: &Rational, key: &VarKey) -> String {
    use num_traits::Signed;
    let (sign, mag) = if coef.is_negative() {
        ('-', -coef.clone())
    } else {
        ('+', coef.clone())
    };
    if mag.is_one() {
        format!("{sign} {key}")
    } else {
        format!("{sign} {} {key}", crate::rational::format_rational(&mag))
    }
}

/// Appends a piece to `line`, wrapping at [`WRAP_COLUMN`] characters measured
/// since the last newline.
fn push_wrapped(line: &mut String, piece: &str) {
    let since_cut = line.len() - line.rfind('\n').map_or(0, |p| p + 1);
    if since_cut > 0 && since_cut + 1 + piece.len() > WRAP_COLUMN {
        line.push('\n');
    } else if since_cut > 0 {
        line.push(' ');
    }
    line.push_str(piece);
}

/// Streams the model as LP text; returns the byte count written.
pub fn emit_lp<W: Write>(
    objective: &[(Rational, VarKey)],
    constraints: impl IntoIterator<Item = Constraint>,
    variables: impl IntoIterator<Item = VarKey>,
    bounds: &LpBounds,
    sink: W,
) -> io::Result<u64> {
    let mut w = CountingWriter {
        inner: io::BufWriter::new(sink),
        bytes: 0,
    };
    w.put("Minimize cost: \n")?;
    let mut line = String::new();
    for (coef, key) in objective {
        push_wrapped(&mut line, &term_text(coef, key));
    }
    if !line.is_empty() {
        line.push('\n');
        w.put(&line)?;
    }
    w.put("Subject to\n")?;
    for c in constraints {
        let mut line = format!("{}:", c.label);
        for (coef, key) in &c.terms {
            push_wrapped(&mut line, &term_text(coef, key));
        }
        push_wrapped(
            &mut line,
            &format!("{} {}", c.relation, crate::rational::format_rational(&c.rhs)),
        );
        line.push('\n');
        w.put(&line)?;
    }
    for key in variables {
        match bounds.pinned.get(&key) {
            Some(v) => w.put(&format!("{v} <= {key} <= {v}\n"))?,
            None => w.put(&format!("0 <= {key} <= {}\n", bounds.total_flow))?,
        }
    }
    w.put("End\n")?;
    w.inner.flush()?;
    Ok(w.bytes)
}

/// Label-level LP parse: verifies the section skeleton and returns the
/// constraint labels in order. Used for round-trip testing and inspection;
/// coefficients are not reconstructed.
pub fn parse_lp_labels(source: impl BufRead) -> Result<Vec<String>, Error> {
    let mut labels = Vec::new();
    let mut lines = source.lines();
    let header = lines
        .next()
        .transpose()?
        .ok_or_else(|| Error::Parse("empty LP document".into()))?;
    if header.trim_end() != "Minimize cost:" {
        return Err(Error::Parse(format!("unexpected LP header {header:?}")));
    }
    let mut in_body = false;
    let mut ended = false;
    for line in lines {
        let line = line?;
        if !in_body {
            if line == "Subject to" {
                in_body = true;
            }
            continue;
        }
        if line == "End" {
            ended = true;
            break;
        }
        if let Some(colon) = line.find(':') {
            let label = &line[..colon];
            if !label.is_empty()
                && label.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
                && label.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
            {
                labels.push(label.to_string());
            }
        }
    }
    if !in_body || !ended {
        return Err(Error::Parse("LP document is missing a section".into()));
    }
    Ok(labels)
}

/// Writes an assignment in canonical key order, one
/// `name<TAB>numerator/denominator` record per line; returns the byte count.
pub fn write_assignment<W: Write>(a: &Assignment, sink: W) -> io::Result<u64> {
    let mut w = CountingWriter {
        inner: io::BufWriter::new(sink),
        bytes: 0,
    };
    for key in a.sorted_keys() {
        let v = a.get(&key);
        w.put(&format!("{key}\t{}/{}\n", v.numer(), v.denom()))?;
    }
    w.inner.flush()?;
    Ok(w.bytes)
}

/// Reads an assignment file. When `validate` is supplied, every key must pass
/// its admissibility predicate over that (node range, config) pair.
pub fn read_assignment(
    source: impl BufRead,
    total_flow: Rational,
    validate: Option<(u16, &ModelConfig)>,
) -> Result<Assignment, Error> {
    let adm = validate.map(|(n, cfg)| Admissibility::new(n, cfg));
    let mut a = Assignment::new(total_flow);
    for (no, line) in source.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let at = |msg: String| Error::Parse(format!("line {}: {msg}", no + 1));
        let (name, value) = line
            .split_once('\t')
            .ok_or_else(|| at(format!("expected <name><TAB><value>, got {line:?}")))?;
        let key = VarKey::parse(name).map_err(at)?;
        let value = parse_rational(value).map_err(at)?;
        if let Some(adm) = &adm {
            let ok = match key {
                VarKey::X(p) => adm.check_x(p.from, p.stage, p.to),
                VarKey::Y(p, q) => adm.check_y(p.from, p.stage, p.to, q.from, q.stage, q.to),
                VarKey::Z(p, q, r) => adm.check_z(p, q, r),
            };
            if !ok {
                return Err(Error::Validation(format!(
                    "line {}: variable {key} is not admissible",
                    no + 1
                )));
            }
        }
        a.set(key, value);
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Dimension;
    use crate::rational::{rat, ratio};
    use crate::varkey::arc;
    use std::io::BufReader;

    #[test]
    fn lp_skeleton_and_round_trip_labels() {
        let objective = vec![(rat(5), VarKey::x(1, 1, 2)), (rat(1), VarKey::x(2, 2, 3))];
        let constraints = vec![
            Constraint::eq(
                "R302_1".into(),
                vec![(rat(1), VarKey::x(1, 1, 2))],
                rat(1),
            ),
            Constraint::eq(
                "R303_2".into(),
                vec![(rat(1), VarKey::x(1, 1, 2)), (rat(-1), VarKey::x(2, 2, 3))],
                rat(0),
            ),
        ];
        let vars = vec![VarKey::x(1, 1, 2), VarKey::x(2, 2, 3)];
        let mut buf = Vec::new();
        let n = emit_lp(
            &objective,
            constraints.clone(),
            vars,
            &LpBounds::new(&rat(1)),
            &mut buf,
        )
        .unwrap();
        assert_eq!(n as usize, buf.len());
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("Minimize cost: \n+ 5 x_1_1_2 + x_2_2_3\nSubject to\n"));
        assert!(text.contains("R302_1: + x_1_1_2 = 1\n"));
        assert!(text.contains("R303_2: + x_1_1_2 - x_2_2_3 = 0\n"));
        assert!(text.contains("0 <= x_1_1_2 <= 1\n"));
        assert!(text.ends_with("End\n"));
        let labels = parse_lp_labels(BufReader::new(&buf[..])).unwrap();
        assert_eq!(labels, vec!["R302_1", "R303_2"]);
    }

    #[test]
    fn long_constraints_wrap_at_watermark() {
        let terms: Vec<_> = (1..=40)
            .map(|i| (rat(1), VarKey::x(i, 1, i + 1)))
            .collect();
        let c = Constraint::eq("R1_1".into(), terms, rat(0));
        let mut buf = Vec::new();
        emit_lp(&[], vec![c], vec![], &LpBounds::new(&rat(1)), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        for line in text.lines() {
            assert!(line.len() <= WRAP_COLUMN, "line too long: {}", line.len());
        }
        assert!(text.lines().count() > 4, "expected wrapped continuation lines");
    }

    #[test]
    fn pinned_bounds_form() {
        let mut b = LpBounds::new(&rat(7));
        b.pinned.insert(VarKey::x(1, 1, 2), "3".into());
        let mut buf = Vec::new();
        emit_lp(
            &[],
            vec![Constraint::eq(
                "R1_1".into(),
                vec![(rat(1), VarKey::x(1, 1, 2))],
                rat(3),
            )],
            vec![VarKey::x(1, 1, 2), VarKey::x(2, 1, 3)],
            &b,
            &mut buf,
        )
        .unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("3 <= x_1_1_2 <= 3\n"));
        assert!(text.contains("0 <= x_2_1_3 <= 7\n"));
    }

    #[test]
    fn assignment_round_trip() {
        let mut a = Assignment::new(rat(1));
        a.set(VarKey::x(1, 1, 2), ratio(1, 18));
        a.set(VarKey::y(arc(1, 1, 2), arc(2, 2, 3)), ratio(5, 3));
        let mut buf = Vec::new();
        write_assignment(&a, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text, "x_1_1_2\t1/18\ny_1_1_2_2_2_3\t5/3\n");
        let b = read_assignment(BufReader::new(&buf[..]), rat(1), None).unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(b.get(&VarKey::x(1, 1, 2)), ratio(1, 18));
    }

    #[test]
    fn read_rejects_inadmissible_with_validation() {
        let cfg = ModelConfig::new(Dimension::Z);
        // z_1_1_2_2_2_3_2_3_5 revisits node 2.
        let data = b"z_1_1_2_2_2_3_2_3_5\t1/1\n";
        let err = read_assignment(BufReader::new(&data[..]), rat(1), Some((5, &cfg)));
        assert!(err.is_err());
        let ok = read_assignment(BufReader::new(&data[..]), rat(1), None);
        assert!(ok.is_ok());
    }

    #[test]
    fn read_reports_line_numbers() {
        let data = b"x_1_1_2\t1/2\nnot a record\n";
        let err = read_assignment(BufReader::new(&data[..]), rat(1), None).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }
}
