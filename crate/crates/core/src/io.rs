//! Text sequence files.
//!
//! ```text
//! #ppclab v1 kind=<label> n=<N> repr=<dyadic|f64> seed=<u64|none>
//! <num> <exp>          # dyadic, canonical form
//! 6.1803398874989490e-1  # f64, 17 significant digits
//! ```

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::torus::{check_unit, DyadicPoint, Points, SequenceMeta, SequenceRecord};

/// Binary64 with 17 significant digits; parses back to the identical value.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_sequence<W: Write>(mut w: W, rec: &SequenceRecord) -> Result<()> {
    let meta = rec.meta();
    let repr = if rec.is_exact() { "dyadic" } else { "f64" };
    let seed = meta
        .seed
        .map_or_else(|| "none".to_string(), |s| s.to_string());
    writeln!(
        w,
        "#ppclab v1 kind={} n={} repr={repr} seed={seed}",
        meta.kind,
        rec.len()
    )?;
    match rec.points() {
        Points::Exact(v) => {
            for p in v {
                writeln!(w, "{} {}", p.num(), p.exp())?;
            }
        }
        Points::Approx(v) => {
            for &x in v {
                writeln!(w, "{}", fmt_f64(x))?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn sequence_to_string(rec: &SequenceRecord) -> String {
    let mut buf = Vec::new();
    write_sequence(&mut buf, rec).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("ascii output")
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn field<'a>(tok: Option<&'a str>, key: &str, line: usize) -> Result<&'a str> {
    tok.and_then(|t| t.strip_prefix(key))
        .and_then(|t| t.strip_prefix('='))
        .ok_or_else(|| parse_err(line, format!("expected `{key}=` in header")))
}

pub fn read_sequence<R: BufRead>(r: R) -> Result<SequenceRecord> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| parse_err(1, "empty input"))??;
    let mut toks = header.split(' ');
    if toks.next() != Some("#ppclab") || toks.next() != Some("v1") {
        return Err(parse_err(1, "missing `#ppclab v1` header"));
    }
    let kind = field(toks.next(), "kind", 1)?.to_string();
    let n: usize = field(toks.next(), "n", 1)?
        .parse()
        .map_err(|_| parse_err(1, "bad n"))?;
    let repr = field(toks.next(), "repr", 1)?;
    let seed = match field(toks.next(), "seed", 1)? {
        "none" => None,
        s => Some(s.parse::<u64>().map_err(|_| parse_err(1, "bad seed"))?),
    };
    if toks.next().is_some() {
        return Err(parse_err(1, "trailing header fields"));
    }

    let points = match repr {
        "dyadic" => {
            let mut v = Vec::with_capacity(n);
            for (i, line) in lines.by_ref().take(n).enumerate() {
                let line = line?;
                let lineno = i + 2;
                let mut it = line.split(' ');
                let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
                    return Err(parse_err(lineno, "expected `<num> <exp>`"));
                };
                let num = a
                    .parse::<u64>()
                    .map_err(|_| parse_err(lineno, "bad numerator"))?;
                let exp = b
                    .parse::<u32>()
                    .map_err(|_| parse_err(lineno, "bad exponent"))?;
                let p = DyadicPoint::from_canonical(num, exp)
                    .map_err(|e| parse_err(lineno, e.to_string()))?;
                v.push(p);
            }
            Points::Exact(v)
        }
        "f64" => {
            let mut v = Vec::with_capacity(n);
            for (i, line) in lines.by_ref().take(n).enumerate() {
                let line = line?;
                let lineno = i + 2;
                let x = line
                    .trim_end()
                    .parse::<f64>()
                    .map_err(|_| parse_err(lineno, "bad float"))?;
                v.push(check_unit(x).map_err(|e| parse_err(lineno, e.to_string()))?);
            }
            Points::Approx(v)
        }
        other => return Err(parse_err(1, format!("unknown repr `{other}`"))),
    };
    if points.len() != n {
        return Err(parse_err(
            points.len() + 2,
            format!("expected {n} points, found {}", points.len()),
        ));
    }
    if let Some(extra) = lines.next() {
        if !extra?.trim().is_empty() {
            return Err(parse_err(n + 2, "trailing data after last point"));
        }
    }
    SequenceRecord::new(SequenceMeta { kind, seed }, points)
}
