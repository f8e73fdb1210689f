use std::fmt;
use std::str::FromStr;

use rankgm::simulation::PrecisionKind;

/// A simulation design written `kind:p:n`, e.g. `ar1:10:200`, `ar4:25:50`
/// or `sparse0.1:25:50` (target off-diagonal fill 0.1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Design {
    pub kind: PrecisionKind,
    pub p: usize,
    pub n: usize,
}

impl FromStr for Design {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let [kind, p, n] = parts[..] else {
            return Err(format!("design {s:?} is not of the form kind:p:n"));
        };
        let kind = match kind.to_ascii_lowercase().as_str() {
            "ar1" => PrecisionKind::Ar1,
            "ar4" => PrecisionKind::Ar4,
            other => match other.strip_prefix("sparse").map(str::parse::<f64>) {
                Some(Ok(fraction)) if fraction > 0.0 && fraction < 1.0 => {
                    PrecisionKind::PercentSparse { fraction }
                }
                _ => {
                    return Err(format!(
                        "unknown design kind {kind:?} (expected ar1, ar4 or sparse<fraction>)"
                    ))
                }
            },
        };
        let p: usize = p
            .parse()
            .map_err(|_| format!("design {s:?}: bad dimension {p:?}"))?;
        let n: usize = n
            .parse()
            .map_err(|_| format!("design {s:?}: bad sample size {n:?}"))?;
        if p < 2 || n < 2 {
            return Err(format!("design {s:?}: p and n must both be at least 2"));
        }
        Ok(Design { kind, p, n })
    }
}

impl fmt::Display for Design {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            PrecisionKind::Ar1 => write!(f, "ar1")?,
            PrecisionKind::Ar4 => write!(f, "ar4")?,
            PrecisionKind::PercentSparse { fraction } => write!(f, "sparse{fraction}")?,
        }
        write!(f, ":{}:{}", self.p, self.n)
    }
}

/// Splits a comma-separated list of designs.
pub fn parse_designs(s: &str) -> Result<Vec<Design>, String> {
    s.split(',')
        .filter(|d| !d.trim().is_empty())
        .map(str::parse)
        .collect()
}
