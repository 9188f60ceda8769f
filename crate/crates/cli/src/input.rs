//! Parsing of input files and flag values.

use std::collections::HashSet;
use std::path::Path;

use accessalloc::{EtaSpec, LocationProfile, Observation};

use crate::error::{CliError, CliResult};

/// Reads a locations table with columns `id,population,beta`.
///
/// Without a `beta` column, the share is composed from the vulnerability
/// columns as `beta_moderate + beta_high + 0.5 beta_very_high`, clipped
/// to `[0, 1]`. `beta_low` is accepted and ignored.
pub fn read_locations(path: &Path) -> CliResult<Vec<LocationProfile>> {
    let mut reader = open(path)?;
    let headers = reader
        .headers()
        .map_err(|e| data(path, format!("unreadable header: {e}")))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let id_col = col("id").ok_or_else(|| data(path, "missing column `id`".into()))?;
    let pop_col = col("population").ok_or_else(|| data(path, "missing column `population`".into()))?;
    let beta_source = match col("beta") {
        Some(c) => BetaSource::Direct(c),
        None => {
            let need = |name: &str| {
                col(name).ok_or_else(|| {
                    data(path, format!("missing column `beta` (or `{name}` to compose it)"))
                })
            };
            BetaSource::Composed {
                moderate: need("beta_moderate")?,
                high: need("beta_high")?,
                very_high: need("beta_very_high")?,
            }
        }
    };

    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| data(path, e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |c: usize, name: &str| {
            record
                .get(c)
                .map(str::trim)
                .ok_or_else(|| data(path, format!("line {line}: column `{name}` is missing")))
        };
        let id = field(id_col, "id")?.to_string();
        if id.is_empty() {
            return Err(data(path, format!("line {line}: column `id` is empty")));
        }
        if !seen.insert(id.clone()) {
            return Err(data(path, format!("line {line}: duplicate id `{id}`")));
        }
        let raw = field(pop_col, "population")?;
        let population: u64 = raw
            .parse()
            .ok()
            .filter(|&p: &u64| p > 0)
            .ok_or_else(|| {
                data(path, format!("line {line}, column `population`: `{raw}` is not a positive integer"))
            })?;
        let number = |c: usize, name: &str| -> CliResult<f64> {
            let raw = field(c, name)?;
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| data(path, format!("line {line}, column `{name}`: `{raw}` is not a number")))
        };
        let beta = match beta_source {
            BetaSource::Direct(c) => {
                let b = number(c, "beta")?;
                if !(0.0..=1.0).contains(&b) {
                    return Err(data(path, format!("line {line}, column `beta`: {b} is not in [0, 1]")));
                }
                b
            }
            BetaSource::Composed {
                moderate,
                high,
                very_high,
            } => {
                let b = number(moderate, "beta_moderate")?
                    + number(high, "beta_high")?
                    + 0.5 * number(very_high, "beta_very_high")?;
                b.clamp(0.0, 1.0)
            }
        };
        out.push(LocationProfile::new(id, population, beta).map_err(|e| data(path, e.to_string()))?);
    }
    if out.is_empty() {
        return Err(data(path, "no locations".into()));
    }
    Ok(out)
}

#[derive(Clone, Copy)]
enum BetaSource {
    Direct(usize),
    Composed {
        moderate: usize,
        high: usize,
        very_high: usize,
    },
}

/// Reads `beta,y[,weight]` observations; a missing weight means 1.
pub fn read_observations(path: &Path) -> CliResult<Vec<Observation>> {
    let mut reader = open(path)?;
    let headers = reader
        .headers()
        .map_err(|e| data(path, format!("unreadable header: {e}")))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let beta_col = col("beta").ok_or_else(|| data(path, "missing column `beta`".into()))?;
    let y_col = col("y").ok_or_else(|| data(path, "missing column `y`".into()))?;
    let weight_col = col("weight");
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| data(path, e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let number = |c: usize, name: &str| -> CliResult<f64> {
            let raw = record.get(c).map(str::trim).unwrap_or("");
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| data(path, format!("line {line}, column `{name}`: `{raw}` is not a number")))
        };
        let weight = match weight_col {
            Some(c) => {
                let w = number(c, "weight")?;
                if w < 0.0 {
                    return Err(data(path, format!("line {line}, column `weight`: {w} is negative")));
                }
                w
            }
            None => 1.0,
        };
        out.push(Observation::weighted(number(beta_col, "beta")?, number(y_col, "y")?, weight));
    }
    if out.is_empty() {
        return Err(data(path, "no observations".into()));
    }
    Ok(out)
}

fn open(path: &Path) -> CliResult<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| data(path, e.to_string()))
}

fn data(path: &Path, msg: String) -> CliError {
    CliError::Data(format!("{}: {msg}", path.display()))
}

/// `0.5`, `0.1,0.3,0.5` (grid) or `dist:0.2:0.25,0.8:0.75` (eta:probability pairs).
pub fn parse_eta(s: &str) -> CliResult<EtaSpec> {
    let bad = |msg: String| CliError::Config(format!("--eta `{s}`: {msg}"));
    let num = |t: &str| -> CliResult<f64> {
        t.trim()
            .parse::<f64>()
            .map_err(|_| bad(format!("`{t}` is not a number")))
    };
    let spec = if let Some(rest) = s.strip_prefix("dist:") {
        let pairs = rest
            .split(',')
            .map(|pair| {
                let (eta, w) = pair
                    .split_once(':')
                    .ok_or_else(|| bad(format!("`{pair}` is not an eta:probability pair")))?;
                Ok((num(eta)?, num(w)?))
            })
            .collect::<CliResult<Vec<_>>>()?;
        EtaSpec::Distribution(pairs)
    } else if s.contains(',') {
        EtaSpec::Grid(s.split(',').map(num).collect::<CliResult<Vec<_>>>()?)
    } else {
        EtaSpec::Point(num(s)?)
    };
    spec.validate().map_err(|e| bad(e.to_string()))?;
    Ok(spec)
}

/// `start:stop:count` (inclusive, evenly spaced) or a comma list.
pub fn parse_grid(s: &str) -> CliResult<Vec<f64>> {
    let bad = |msg: &str| CliError::Config(format!("--grid `{s}`: {msg}"));
    let parts: Vec<&str> = s.split(':').collect();
    let values = if parts.len() == 3 {
        let start: f64 = parts[0].trim().parse().map_err(|_| bad("bad start"))?;
        let stop: f64 = parts[1].trim().parse().map_err(|_| bad("bad stop"))?;
        let count: usize = parts[2].trim().parse().map_err(|_| bad("bad count"))?;
        match count {
            0 => return Err(bad("count must be positive")),
            1 => vec![start],
            _ => (0..count)
                .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
                .collect(),
        }
    } else {
        s.split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| bad("not a number")))
            .collect::<CliResult<Vec<_>>>()?
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(bad("values must be finite"));
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eta_forms() {
        assert_eq!(parse_eta("0.5").unwrap(), EtaSpec::Point(0.5));
        assert_eq!(parse_eta("0.2,0.4").unwrap(), EtaSpec::Grid(vec![0.2, 0.4]));
        assert_eq!(
            parse_eta("dist:0.2:0.25,0.8:0.75").unwrap(),
            EtaSpec::Distribution(vec![(0.2, 0.25), (0.8, 0.75)])
        );
        assert!(parse_eta("0").is_err());
        assert!(parse_eta("dist:0.2:0.5").is_err());
        assert!(parse_eta("abc").is_err());
    }

    #[test]
    fn grid_forms() {
        assert_eq!(parse_grid("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("0.1,0.2").unwrap(), vec![0.1, 0.2]);
        assert!(parse_grid("0:1:0").is_err());
    }
}
