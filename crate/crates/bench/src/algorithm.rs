use std::fmt;
use std::str::FromStr;

use crate::error::BenchError;

/// Solver tags accepted by `--algo`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    Scsg,
    Svrg,
    Sarah,
    KatyushaNs,
    Sgd,
    SgdDecay,
    Gd,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::Scsg,
        Algorithm::Svrg,
        Algorithm::Sarah,
        Algorithm::KatyushaNs,
        Algorithm::Sgd,
        Algorithm::SgdDecay,
        Algorithm::Gd,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::Scsg => "scsg",
            Algorithm::Svrg => "svrg",
            Algorithm::Sarah => "sarah",
            Algorithm::KatyushaNs => "katyusha-ns",
            Algorithm::Sgd => "sgd",
            Algorithm::SgdDecay => "sgd-decay",
            Algorithm::Gd => "gd",
        }
    }

    pub(crate) fn index(self) -> u64 {
        Self::ALL.iter().position(|a| *a == self).unwrap() as u64
    }

    /// Parses a comma-separated list; `all` expands to every tag.
    pub fn parse_list(s: &str) -> Result<Vec<Algorithm>, BenchError> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if part == "all" {
                out.extend(Self::ALL);
            } else {
                out.push(part.parse()?);
            }
        }
        out.sort();
        out.dedup();
        if out.is_empty() {
            return Err(BenchError::InvalidSetting {
                key: "algo".into(),
                message: "no algorithm given".into(),
            });
        }
        Ok(out)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Algorithm {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|a| a.tag() == s).ok_or_else(|| BenchError::InvalidSetting {
            key: "algo".into(),
            message: format!(
                "unknown algorithm `{s}` (expected one of {})",
                Self::ALL.map(|a| a.tag()).join(", ")
            ),
        })
    }
}
