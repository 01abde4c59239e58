use rayon::prelude::*;
use serde_json::json;

use y00_core::infotheory::decryption_failure_prob;
use y00_core::measurement::{default_truncation, helstrom_mixed, mixed_state_density};

use super::Outcome;
use crate::config::{bool_entry, Entries, RunConfig};
use crate::error::{usage, CliResult};
use crate::report::{num, Payload};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    M,
    S,
}

impl Axis {
    pub fn parse(text: &str) -> CliResult<Self> {
        match text {
            "M" => Ok(Axis::M),
            "S" => Ok(Axis::S),
            other => Err(usage(format!(
                "unknown sweep axis {other:?} (expected M or S)"
            ))),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Axis::M => "M",
            Axis::S => "S",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub axis: Axis,
    pub values: Vec<f64>,
    pub failprob: bool,
}

impl SweepOptions {
    pub fn resolve(
        axis: Option<&str>,
        values: Option<&str>,
        failprob: bool,
        entries: &Entries,
    ) -> CliResult<Self> {
        let axis = Axis::parse(
            axis.or(entries.get("sweep.axis"))
                .ok_or_else(|| usage("sweep needs --axis M|S"))?,
        )?;
        let text = values
            .or(entries.get("sweep.values"))
            .ok_or_else(|| usage("sweep needs --values"))?;
        let values = parse_values(text)?;
        let failprob = failprob || bool_entry(entries, "sweep.failprob")?.unwrap_or(false);
        Ok(Self {
            axis,
            values,
            failprob,
        })
    }
}

/// Comma-separated values; `a..b` expands to the integers `a..=b`.
pub fn parse_values(text: &str) -> CliResult<Vec<f64>> {
    let bad = || {
        usage(format!(
            "--values {text:?}: expected comma-separated numbers or a..b"
        ))
    };
    let mut values = Vec::new();
    for part in text.split(',').map(str::trim) {
        if let Some((a, b)) = part.split_once("..") {
            let a: u32 = a.trim().parse().map_err(|_| bad())?;
            let b: u32 = b.trim().parse().map_err(|_| bad())?;
            values.extend((a..=b).map(f64::from));
        } else {
            values.push(part.parse().map_err(|_| bad())?);
        }
    }
    if values.is_empty() {
        return Err(bad());
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(usage("sweep values must be strictly ascending"));
    }
    Ok(values)
}

fn helstrom_point(cfg: &RunConfig, s: f64, m: u32) -> CliResult<f64> {
    let params = cfg.params_with(s, m, 1)?;
    let n_max = cfg.n_max_override.unwrap_or_else(|| default_truncation(s));
    let rho0 = mixed_state_density(0, &params, n_max)?;
    let rho1 = mixed_state_density(1, &params, n_max)?;
    Ok(helstrom_mixed(&rho0, &rho1)?.value())
}

pub fn run(cfg: &RunConfig, opts: &SweepOptions) -> CliResult<Outcome> {
    let points: Vec<(u32, f64)> = opts
        .values
        .iter()
        .map(|&v| match opts.axis {
            Axis::S => Ok((cfg.m, v)),
            Axis::M if v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64 => {
                Ok((v as u32, cfg.s))
            }
            Axis::M => Err(usage(format!("M = {v} is not a positive integer"))),
        })
        .collect::<CliResult<_>>()?;

    let rows = points
        .par_iter()
        .map(|&(m, s)| {
            let mut row = vec![json!(m), num(s), num(helstrom_point(cfg, s, m)?)];
            if opts.failprob {
                row.push(num(decryption_failure_prob(&cfg.params_with(s, m, 1)?)?));
            }
            Ok(row)
        })
        .collect::<CliResult<Vec<_>>>()?;

    let mut columns = vec!["M", "S", "helstrom_mixed_pe"];
    if opts.failprob {
        columns.push("log10_failure_prob");
    }
    let mut payload = Payload::table(&columns);
    rows.into_iter().for_each(|r| payload.push_row(r));

    let values: Vec<String> = opts.values.iter().map(|v| v.to_string()).collect();
    let options = vec![
        ("sweep.axis".to_string(), opts.axis.name().to_string()),
        ("sweep.values".to_string(), values.join(",")),
        ("sweep.failprob".to_string(), opts.failprob.to_string()),
    ];
    Ok(Outcome { options, payload })
}
