//! Text format for assemblages.
//!
//! ```text
//! n 1
//! dim_b 2
//! sigma 0 +
//! 0.5 0 0 0
//! 0 0 0 0
//! sigma 0 -
//! 0 0 0 0
//! 0 0 0.5 0
//! ```
//!
//! Each `sigma x ±` header is followed by `dim_b` rows, each holding `dim_b`
//! real/imaginary pairs. Lines starting with `#` are comments.

use std::fmt::Write;

use super::Assemblage;
use crate::error::{Error, Result};
use crate::matcore::{ComplexMatrix, HermitianOperator, C64};
use crate::observables::Outcome;

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn parse(text: &str) -> Result<Assemblage> {
    let lines: Vec<(usize, Vec<&str>)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").split_whitespace().collect::<Vec<_>>()))
        .filter(|(_, f)| !f.is_empty())
        .collect();
    let mut it = lines.into_iter();
    let mut header = |key: &str| -> Result<usize> {
        let (line, f) = it.next().ok_or_else(|| parse_err(0, format!("missing `{key}`")))?;
        match f[..] {
            [k, v] if k == key => v.parse().map_err(|_| parse_err(line, format!("{key} must be a count"))),
            _ => Err(parse_err(line, format!("expected `{key} <count>`"))),
        }
    };
    let n = header("n")?;
    let dim_b = header("dim_b")?;
    if n == 0 || dim_b == 0 {
        return Err(parse_err(0, "n and dim_b must be positive"));
    }
    let mut slots: Vec<[Option<HermitianOperator>; 2]> = vec![[None, None]; n];
    while let Some((line, f)) = it.next() {
        let [kw, x, a] = f[..] else { return Err(parse_err(line, "expected `sigma <x> <+|->`")) };
        if kw != "sigma" {
            return Err(parse_err(line, format!("unknown keyword {kw:?}")));
        }
        let x: usize = x.parse().map_err(|_| parse_err(line, "setting must be a count"))?;
        let outcome = match a {
            "+" => Outcome::Plus,
            "-" => Outcome::Minus,
            _ => return Err(parse_err(line, "outcome must be + or -")),
        };
        if x >= n {
            return Err(parse_err(line, format!("setting {x} out of range for n = {n}")));
        }
        let mut data = Vec::with_capacity(dim_b * dim_b);
        for _ in 0..dim_b {
            let (rl, row) = it.next().ok_or_else(|| parse_err(line, "matrix ends early"))?;
            if row.len() != 2 * dim_b {
                return Err(parse_err(rl, format!("expected {} numbers, got {}", 2 * dim_b, row.len())));
            }
            let nums = row
                .iter()
                .map(|s| s.parse::<f64>().map_err(|_| parse_err(rl, format!("not a number: {s:?}"))))
                .collect::<Result<Vec<_>>>()?;
            data.extend(nums.chunks(2).map(|p| C64::new(p[0], p[1])));
        }
        let op = HermitianOperator::with_tolerance(ComplexMatrix::new(dim_b, dim_b, data)?, 1e-9)
            .map_err(|e| parse_err(line, e.to_string()))?;
        let slot = &mut slots[x][outcome.index()];
        if slot.is_some() {
            return Err(parse_err(line, format!("duplicate member ({x}, {a})")));
        }
        *slot = Some(op);
    }
    let members = slots
        .into_iter()
        .enumerate()
        .map(|(x, [p, m])| match (p, m) {
            (Some(p), Some(m)) => Ok([p, m]),
            _ => Err(parse_err(0, format!("setting {x} lacks a member"))),
        })
        .collect::<Result<Vec<_>>>()?;
    Assemblage::new(members)
}

pub fn write(asm: &Assemblage) -> String {
    let mut out = String::new();
    let w = |out: &mut String, s: std::fmt::Arguments| out.write_fmt(s).expect("writing to a String");
    w(&mut out, format_args!("n {}\ndim_b {}\n", asm.n(), asm.dim_b()));
    for x in 0..asm.n() {
        for o in Outcome::BOTH {
            let label = if o == Outcome::Plus { "+" } else { "-" };
            w(&mut out, format_args!("sigma {x} {label}\n"));
            let m = asm.member(x, o).matrix();
            for r in 0..asm.dim_b() {
                let row: Vec<String> = (0..asm.dim_b()).map(|c| format!("{} {}", m[(r, c)].re, m[(r, c)].im)).collect();
                w(&mut out, format_args!("{}\n", row.join(" ")));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assemblage::steer;
    use crate::observables::{paulis, unsharp_povms, UnsharpnessParam};
    use crate::states::maximally_entangled;

    #[test]
    fn roundtrip_is_exact() {
        let asm = steer(&maximally_entangled(2), &unsharp_povms(&paulis(), UnsharpnessParam::new(0.6).unwrap())).unwrap();
        let text = write(&asm);
        assert_eq!(parse(&text).unwrap(), asm);
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(parse("n 1\ndim_b 1\nsigma 0 +\n1 0\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse("n 1\ndim_b 1\nsigma 0 +\n1 x\n"), Err(Error::Parse { line: 4, .. })));
        assert!(matches!(parse("n 1\ndim_b 1\nsigma 2 +\n1 0\n"), Err(Error::Parse { line: 3, .. })));
        assert!(parse("n 1\ndim_b 1\nsigma 0 +\n0.4 0\nsigma 0 -\n0.6 0\n").is_ok());
        assert!(parse("n 1\ndim_b 1\nsigma 0 +\n0.4 0\nsigma 0 -\n0.7 0\n").is_err());
    }
}
