//! Tester constants, read from a flat `key = value` file.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Which histogram statistic the Poisson distinguisher thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HistogramStatistic {
    /// Number of distinct values seen at least `ceil(k/2)` times.
    AtLeastHalfK,
    /// Poissonized log-likelihood ratio of the histogram under `q` vs `p`.
    LogLikelihoodRatio,
}

impl HistogramStatistic {
    pub fn label(self) -> &'static str {
        match self {
            HistogramStatistic::AtLeastHalfK => "half_k",
            HistogramStatistic::LogLikelihoodRatio => "llr",
        }
    }
}

impl FromStr for HistogramStatistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "half_k" => Ok(HistogramStatistic::AtLeastHalfK),
            "llr" => Ok(HistogramStatistic::LogLikelihoodRatio),
            other => Err(Error::InvalidArgument(format!("unknown statistic `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TesterConfig {
    /// Bidirectional tester samples `ceil(c_bi / eps)` vertices.
    pub c_bi: f64,
    /// Unidirectional high budget is `ceil(c_uni * n^(1 - 1/k))`.
    pub c_uni: f64,
    /// Sequence tester budget is `ceil(c_seq * n^(1 - 1/k))`.
    pub c_seq: f64,
    /// Exploration radius; 0 means `|V(H)|`.
    pub bfs_radius: usize,
    pub statistic: HistogramStatistic,
}

impl Default for TesterConfig {
    fn default() -> Self {
        TesterConfig {
            c_bi: 0.25,
            c_uni: 12.0,
            c_seq: 3.0,
            bfs_radius: 0,
            statistic: HistogramStatistic::LogLikelihoodRatio,
        }
    }
}

impl TesterConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut cfg = TesterConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = idx + 1;
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(origin, lineno, "expected `key = value`"))?;
            let value = value.trim();
            let bad = |what: &str| Error::parse(origin, lineno, format!("bad {what} `{value}`"));
            let positive = |v: f64| {
                if v.is_finite() && v > 0.0 {
                    Ok(v)
                } else {
                    Err(bad("constant"))
                }
            };
            match key.trim() {
                "c_bi" => cfg.c_bi = positive(value.parse().map_err(|_| bad("number"))?)?,
                "c_uni" => cfg.c_uni = positive(value.parse().map_err(|_| bad("number"))?)?,
                "c_seq" => cfg.c_seq = positive(value.parse().map_err(|_| bad("number"))?)?,
                "bfs_radius" => cfg.bfs_radius = value.parse().map_err(|_| bad("radius"))?,
                "statistic" => cfg.statistic = value.parse().map_err(|_| bad("statistic"))?,
                other => {
                    return Err(Error::parse(origin, lineno, format!("unknown key `{other}`")));
                }
            }
        }
        Ok(cfg)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Canonical `key = value` lines, one per field.
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for TesterConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "c_bi = {}", self.c_bi)?;
        writeln!(f, "c_uni = {}", self.c_uni)?;
        writeln!(f, "c_seq = {}", self.c_seq)?;
        writeln!(f, "bfs_radius = {}", self.bfs_radius)?;
        writeln!(f, "statistic = {}", self.statistic.label())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let cfg = TesterConfig {
            c_uni: 12.5,
            statistic: HistogramStatistic::AtLeastHalfK,
            ..TesterConfig::default()
        };
        assert_eq!(TesterConfig::parse(&cfg.to_text(), "x").unwrap(), cfg);
    }

    #[test]
    fn comments_and_defaults() {
        let cfg = TesterConfig::parse("# frozen\nc_bi = 0.5  # tuned\n\n", "x").unwrap();
        assert_eq!(cfg.c_bi, 0.5);
        assert_eq!(cfg.c_uni, TesterConfig::default().c_uni);
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(TesterConfig::parse("c_bi 3", "x").is_err());
        assert!(TesterConfig::parse("c_bi = -1", "x").is_err());
        assert!(TesterConfig::parse("nope = 1", "x").is_err());
        assert!(TesterConfig::parse("statistic = max", "x").is_err());
    }

    #[test]
    fn shipped_file_matches_default() {
        let text = include_str!("../../../config/testers.conf");
        assert_eq!(TesterConfig::parse(text, "testers.conf").unwrap(), TesterConfig::default());
    }
}
