//! Flag value parsers.

use std::fs;
use std::path::Path;

use crate::CliError;

/// `start:stop:step`: `start, start + step, ...` below `stop`, plus `stop`
/// itself when it lies on the step lattice.
pub fn s_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("--s-grid expects start:stop:step, got {text:?}"));
    let parts: Vec<f64> = text
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    let [start, stop, step] = parts[..] else {
        return Err(bad());
    };
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) || step <= 0.0 || stop < start {
        return Err(bad());
    }
    let span = (stop - start) / step;
    if span > 1e7 {
        return Err(CliError::Usage(format!(
            "--s-grid {text:?} has more than 10^7 points"
        )));
    }
    let k_stop = span.round();
    let on_lattice = (span - k_stop).abs() <= 1e-9 * span.max(1.0);
    let mut grid = Vec::new();
    let mut k = 0u64;
    loop {
        let s = start + k as f64 * step;
        if (on_lattice && k as f64 >= k_stop) || (!on_lattice && s >= stop) {
            break;
        }
        grid.push(s);
        k += 1;
    }
    if on_lattice {
        grid.push(stop);
    }
    Ok(grid)
}

/// Comma-separated, strictly increasing positive integers.
pub fn checkpoints(text: &str) -> Result<Vec<usize>, CliError> {
    let v: Vec<usize> = text
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("bad checkpoint {p:?} in --checkpoints")))
        })
        .collect::<Result<_, _>>()?;
    if v.first() == Some(&0) || v.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Usage(
            "--checkpoints must be strictly increasing and positive".into(),
        ));
    }
    Ok(v)
}

/// Integers separated by whitespace or commas; `[` `]` are ignored, so a
/// JSON array works too.
pub fn int_table(path: &Path) -> Result<Vec<u32>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    text.split(|c: char| c.is_whitespace() || matches!(c, ',' | '[' | ']'))
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<u32>().map_err(|_| {
                CliError::Validation(format!("{}: bad table entry {t:?}", path.display()))
            })
        })
        .collect()
}
