//! Line-oriented text format for fragments.
//!
//! ```text
//! # comment
//! vec_dim 3
//! unit 0 0 1
//! state 1 1 1
//! effect 0.5 0 0.5
//! measurement 2 3
//! ```
//!
//! `measurement i j` lines are optional and name a dichotomic measurement by the
//! indices of its `+1` and `−1` effects among the `effect` rows.

use std::fmt::Write;

use super::{GptFragment, GptMeasurement};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FragmentFile {
    pub fragment: GptFragment,
    pub measurements: Vec<GptMeasurement>,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn numbers(line: usize, fields: &[&str]) -> Result<Vec<f64>> {
    fields
        .iter()
        .map(|f| f.parse::<f64>().map_err(|_| parse_err(line, format!("not a number: {f:?}"))))
        .collect()
}

pub fn parse(text: &str) -> Result<FragmentFile> {
    let mut vec_dim = None;
    let mut unit = None;
    let mut states = Vec::new();
    let mut effects = Vec::new();
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        match fields[0] {
            "vec_dim" => {
                let [_, d] = fields[..] else { return Err(parse_err(line, "expected `vec_dim <count>`")) };
                vec_dim = Some(d.parse::<usize>().map_err(|_| parse_err(line, "vec_dim must be a count"))?);
            }
            "unit" => unit = Some(numbers(line, &fields[1..])?),
            "state" => states.push(numbers(line, &fields[1..])?),
            "effect" => effects.push(numbers(line, &fields[1..])?),
            "measurement" => {
                let [_, p, m] = fields[..] else { return Err(parse_err(line, "expected `measurement <plus> <minus>`")) };
                let idx = |s: &str| s.parse::<usize>().map_err(|_| parse_err(line, "effect index must be a count"));
                pairs.push((line, idx(p)?, idx(m)?));
            }
            other => return Err(parse_err(line, format!("unknown keyword {other:?}"))),
        }
    }
    let vec_dim = vec_dim.ok_or_else(|| parse_err(0, "missing vec_dim"))?;
    let unit = unit.ok_or_else(|| parse_err(0, "missing unit"))?;
    let fragment = GptFragment::new(vec_dim, states, effects, unit)?;
    let measurements = pairs
        .into_iter()
        .map(|(line, p, m)| {
            let get = |k: usize| fragment.effects.get(k).cloned().ok_or_else(|| parse_err(line, format!("no effect {k}")));
            GptMeasurement::new(&fragment, get(p)?, get(m)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FragmentFile { fragment, measurements })
}

fn row(out: &mut String, key: &str, v: &[f64]) {
    out.push_str(key);
    for x in v {
        write!(out, " {x}").expect("writing to a String");
    }
    out.push('\n');
}

/// Serializes with shortest round-trip float formatting; measurements are written
/// as index pairs and must use effects listed in the fragment.
pub fn write(file: &FragmentFile) -> Result<String> {
    let f = &file.fragment;
    let mut out = String::new();
    writeln!(out, "vec_dim {}", f.vec_dim).expect("writing to a String");
    row(&mut out, "unit", &f.unit);
    for s in &f.states {
        row(&mut out, "state", s);
    }
    for e in &f.effects {
        row(&mut out, "effect", e);
    }
    for m in &file.measurements {
        let find = |v: &[f64]| {
            f.effects.iter().position(|e| e.as_slice() == v).ok_or_else(|| {
                Error::Domain("measurement effect is not listed in the fragment".into())
            })
        };
        writeln!(out, "measurement {} {}", find(m.plus())?, find(m.minus())?).expect("writing to a String");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gptfrag::{gbit, gbit_fiducials};

    #[test]
    fn gbit_roundtrip() {
        let file = FragmentFile { fragment: gbit(), measurements: gbit_fiducials().to_vec() };
        let text = write(&file).unwrap();
        assert_eq!(parse(&text).unwrap(), file);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse("vec_dim 2\nunit 1 1\nstate 1 zero\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        assert!(matches!(parse("vec_dim 2\nstate 1 0\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse("vec_dim 2\nunit 1 1\nstate 1 0\nbogus 1\n"), Err(Error::Parse { line: 4, .. })));
        assert!(parse("vec_dim 2\nunit 1 1\nstate 1 0\neffect 1 0\nmeasurement 0 4\n").is_err());
    }
}
