//! Flat `key = value` run configuration.
//!
//! Values come from an optional file, then `--set key=value` overrides, then
//! dedicated flags such as `--seed`. The resolved configuration is echoed into
//! every report in the same syntax, so an echo can be fed back as `--config`.

use std::collections::BTreeMap;

use y00_core::keystream::{BlockExtraction, LfsrConfig, SeedKey};
use y00_core::measurement::NoiseModel;
use y00_core::modulation::ProtocolParams;

use crate::error::{usage, CliResult};

const KNOWN_KEYS: &[&str] = &[
    "command",
    "protocol.S",
    "protocol.M",
    "protocol.N",
    "lfsr.degree",
    "lfsr.taps",
    "lfsr.fold_mod_m",
    "seed.bits",
    "measurement.n_max_override",
    "measurement.noise_model",
    "rng.seed",
    "sweep.axis",
    "sweep.values",
    "sweep.failprob",
    "attack.known_plaintext",
    "attack.band_constant",
    "attack.l_rule",
    "entropy.l_rule",
    "entropy.search_rules",
    "advantage.target",
];

/// Raw key/value entries before interpretation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Entries {
    map: BTreeMap<String, String>,
}

impl Entries {
    /// Parse config text: one `key = value` per line, `#` starts a comment.
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut entries = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                usage(format!(
                    "config line {}: expected `key = value`",
                    lineno + 1
                ))
            })?;
            entries
                .set(key.trim(), value.trim())
                .map_err(|e| usage(format!("config line {}: {e}", lineno + 1)))?;
        }
        Ok(entries)
    }

    /// Apply a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> CliResult<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| usage(format!("--set {assignment:?}: expected key=value")))?;
        self.set(key.trim(), value.trim()).map_err(usage)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(format!("unknown config key {key:?}"));
        }
        self.map.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    pub fn parsed<T: std::str::FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| usage(format!("{key} = {v:?} is not a valid value")))
            })
            .transpose()
    }
}

fn parse_bool(key: &str, value: &str) -> CliResult<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(usage(format!("{key} = {value:?} is not a boolean"))),
    }
}

pub(crate) fn bool_entry(entries: &Entries, key: &str) -> CliResult<Option<bool>> {
    entries.get(key).map(|v| parse_bool(key, v)).transpose()
}

/// Fully resolved settings shared by every subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub s: f64,
    pub m: u32,
    pub n: usize,
    pub lfsr: LfsrConfig,
    pub extraction: BlockExtraction,
    pub seed_key: SeedKey,
    pub noise: NoiseModel,
    pub n_max_override: Option<usize>,
    pub master_seed: u64,
}

impl RunConfig {
    pub const DEFAULT_S: f64 = 1.0;
    pub const DEFAULT_M: u32 = 4;
    pub const DEFAULT_N: usize = 1000;
    pub const DEFAULT_DEGREE: u32 = 16;

    pub fn resolve(entries: &Entries) -> CliResult<Self> {
        let s = entries.parsed("protocol.S")?.unwrap_or(Self::DEFAULT_S);
        let m = entries.parsed("protocol.M")?.unwrap_or(Self::DEFAULT_M);
        let n = entries.parsed("protocol.N")?.unwrap_or(Self::DEFAULT_N);
        // Validated here with N forced to 1; N = 0 is a legal empty run.
        ProtocolParams::new(s, m, 1)?;

        let degree = entries
            .parsed("lfsr.degree")?
            .unwrap_or(Self::DEFAULT_DEGREE);
        let lfsr = match entries.get("lfsr.taps") {
            Some(text) => {
                let taps = text
                    .split(',')
                    .map(|t| t.trim().parse::<u32>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| {
                        usage(format!(
                            "lfsr.taps = {text:?} is not a comma-separated list"
                        ))
                    })?;
                LfsrConfig::new(degree, &taps)?
            }
            None => LfsrConfig::primitive(degree)?,
        };
        let extraction = if bool_entry(entries, "lfsr.fold_mod_m")?.unwrap_or(false) {
            BlockExtraction::FoldModM
        } else {
            BlockExtraction::PowerOfTwo
        };
        let seed_key = SeedKey::from_hex(entries.get("seed.bits").unwrap_or("1"), degree)?;
        let noise = NoiseModel::parse(
            entries
                .get("measurement.noise_model")
                .unwrap_or("qfunction"),
        )?;
        let n_max_override = entries.parsed("measurement.n_max_override")?;
        let master_seed = entries.parsed("rng.seed")?.unwrap_or(0);
        Ok(Self {
            s,
            m,
            n,
            lfsr,
            extraction,
            seed_key,
            noise,
            n_max_override,
            master_seed,
        })
    }

    /// Parameters for the configured message length; N must be positive.
    pub fn params(&self) -> CliResult<ProtocolParams> {
        Ok(ProtocolParams::new(self.s, self.m, self.n)?)
    }

    pub fn params_with(&self, s: f64, m: u32, n: usize) -> CliResult<ProtocolParams> {
        Ok(ProtocolParams::new(s, m, n)?)
    }

    /// Canonical `key = value` pairs reproducing this configuration.
    pub fn echo(&self) -> Vec<(String, String)> {
        let taps: Vec<String> = self.lfsr.taps().iter().map(u32::to_string).collect();
        let hex_width = self.lfsr.degree().div_ceil(4) as usize;
        let mut out = vec![
            ("protocol.S".into(), format!("{}", self.s)),
            ("protocol.M".into(), self.m.to_string()),
            ("protocol.N".into(), self.n.to_string()),
            ("lfsr.degree".into(), self.lfsr.degree().to_string()),
            ("lfsr.taps".into(), taps.join(",")),
            (
                "lfsr.fold_mod_m".into(),
                (self.extraction == BlockExtraction::FoldModM).to_string(),
            ),
            (
                "seed.bits".into(),
                format!("{:0width$x}", self.seed_key.to_u64(), width = hex_width),
            ),
            ("measurement.noise_model".into(), self.noise.name().into()),
        ];
        if let Some(n_max) = self.n_max_override {
            out.push(("measurement.n_max_override".into(), n_max.to_string()));
        }
        out.push(("rng.seed".into(), self.master_seed.to_string()));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_blank_lines() {
        let text = "# experiment\nprotocol.S = 0.5   # energy\n\nprotocol.M=32\n";
        let e = Entries::parse(text).unwrap();
        assert_eq!(e.get("protocol.S"), Some("0.5"));
        assert_eq!(e.get("protocol.M"), Some("32"));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_lines() {
        assert!(Entries::parse("protocol.s = 1").is_err());
        assert!(Entries::parse("protocol.S 1").is_err());
        let mut e = Entries::default();
        assert!(e.apply_override("protocol.N").is_err());
    }

    #[test]
    fn defaults_resolve() {
        let cfg = RunConfig::resolve(&Entries::default()).unwrap();
        assert_eq!(cfg.m, 4);
        assert_eq!(cfg.lfsr.degree(), 16);
        assert_eq!(cfg.seed_key.to_u64(), 1);
        assert_eq!(cfg.master_seed, 0);
    }

    #[test]
    fn echo_round_trips() {
        let text = "protocol.S = 0.1\nprotocol.M = 8\nlfsr.degree = 8\nlfsr.taps = 8,6,5,4\n\
                    seed.bits = a7\nmeasurement.noise_model = paper_uniform\n\
                    measurement.n_max_override = 60\nrng.seed = 99\nlfsr.fold_mod_m = true\n";
        let cfg = RunConfig::resolve(&Entries::parse(text).unwrap()).unwrap();
        let echo: String = cfg
            .echo()
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect();
        let again = RunConfig::resolve(&Entries::parse(&echo).unwrap()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn invalid_values_are_usage_errors() {
        for text in [
            "protocol.M = 0",
            "protocol.S = -1",
            "protocol.M = x",
            "lfsr.fold_mod_m = maybe",
        ] {
            let entries = Entries::parse(text).unwrap();
            let err = RunConfig::resolve(&entries).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{text}");
        }
    }
}
