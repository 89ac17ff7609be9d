//! Parsing of grid and count arguments.

use anyhow::{bail, ensure, Context, Result};

/// A count written as an integer or in float notation (`1e5`).
pub fn parse_count(s: &str) -> Result<u64> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = s.parse().with_context(|| format!("not a count: {s:?}"))?;
    ensure!(
        v.is_finite() && v >= 0.0 && v.fract() == 0.0 && v <= 2f64.powi(53),
        "not a whole count: {s:?}"
    );
    Ok(v as u64)
}

/// Integer grid: `7`, `0,2,5`, `0..30` (inclusive) or `0..30:2`.
pub fn parse_int_grid(s: &str) -> Result<Vec<usize>> {
    let s = s.trim();
    ensure!(!s.is_empty(), "empty grid");
    if let Some((lo, rest)) = s.split_once("..") {
        let (hi, step) = match rest.split_once(':') {
            Some((hi, step)) => (hi, step.trim().parse::<usize>().context("grid step")?),
            None => (rest, 1),
        };
        let lo: usize = lo.trim().parse().context("grid start")?;
        let hi: usize = hi.trim().parse().context("grid end")?;
        ensure!(step > 0, "grid step must be positive");
        ensure!(lo <= hi, "grid {s:?} is empty");
        return Ok((lo..=hi).step_by(step).collect());
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .with_context(|| format!("grid value {t:?}"))
        })
        .collect()
}

/// Erasure-rate grid converted to erased counts `round(p N)`, ascending and
/// without repeats: `0.35`, `0.3,0.4` or `0.30..0.50` stepped by `step`.
pub fn parse_p_grid(s: &str, step: f64, length: usize) -> Result<Vec<usize>> {
    let s = s.trim();
    ensure!(!s.is_empty(), "empty grid");
    let ps: Vec<f64> = if let Some((lo, hi)) = s.split_once("..") {
        let lo: f64 = lo.trim().parse().context("grid start")?;
        let hi: f64 = hi.trim().parse().context("grid end")?;
        ensure!(step > 0.0, "grid step must be positive");
        ensure!(lo <= hi, "grid {s:?} is empty");
        let count = ((hi - lo) / step + 1e-9).floor() as usize;
        (0..=count).map(|i| lo + i as f64 * step).collect()
    } else {
        s.split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .with_context(|| format!("grid value {t:?}"))
            })
            .collect::<Result<_>>()?
    };
    let mut out = Vec::with_capacity(ps.len());
    for p in ps {
        if !(0.0..=1.0).contains(&p) {
            bail!("erasure rate {p} outside [0, 1]");
        }
        out.push((p * length as f64).round() as usize);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(parse_count("100000").unwrap(), 100_000);
        assert_eq!(parse_count("1e5").unwrap(), 100_000);
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
    }

    #[test]
    fn int_grids() {
        assert_eq!(parse_int_grid("0..3").unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(parse_int_grid("0..10:5").unwrap(), vec![0, 5, 10]);
        assert_eq!(parse_int_grid("4, 1").unwrap(), vec![4, 1]);
        assert!(parse_int_grid("").is_err());
        assert!(parse_int_grid("5..2").is_err());
        assert!(parse_int_grid("0..4:0").is_err());
    }

    #[test]
    fn p_grids() {
        let g = parse_p_grid("0.30..0.50", 0.01, 200).unwrap();
        assert_eq!(g.len(), 21);
        assert_eq!((g[0], g[20]), (60, 100));
        assert_eq!(parse_p_grid("0.35", 0.01, 200).unwrap(), vec![70]);
        assert_eq!(parse_p_grid("0.301,0.3", 0.01, 200).unwrap(), vec![60]);
        assert!(parse_p_grid("1.2", 0.01, 200).is_err());
    }
}
