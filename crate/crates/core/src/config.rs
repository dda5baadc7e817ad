//! Run configuration shared by the estimators and embedded in every report.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scan::ScaleRange;

/// Serde helpers writing non-finite floats as `"inf"`, `"-inf"` and `"nan"`.
pub mod ext_f64 {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn to_repr(v: f64) -> Option<&'static str> {
        if v.is_nan() {
            Some("nan")
        } else if v == f64::INFINITY {
            Some("inf")
        } else if v == f64::NEG_INFINITY {
            Some("-inf")
        } else {
            None
        }
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        match to_repr(*v) {
            Some(r) => s.serialize_str(r),
            None => s.serialize_f64(*v),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn parse(r: &str) -> Option<f64> {
        match r {
            "inf" | "+inf" | "infinity" => Some(f64::INFINITY),
            "-inf" | "-infinity" => Some(f64::NEG_INFINITY),
            "nan" => Some(f64::NAN),
            other => other.parse().ok(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) => parse(&s).ok_or_else(|| de::Error::custom(format!("bad number {s}"))),
        }
    }

    pub mod vec {
        use serde::ser::SerializeSeq;
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for x in v {
                match super::to_repr(*x) {
                    Some(r) => seq.serialize_element(r)?,
                    None => seq.serialize_element(x)?,
                }
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
            let raw = Vec::<super::Repr>::deserialize(d)?;
            raw.into_iter()
                .map(|r| match r {
                    super::Repr::Num(v) => Ok(v),
                    super::Repr::Str(s) => super::parse(&s)
                        .ok_or_else(|| serde::de::Error::custom(format!("bad number {s}"))),
                })
                .collect()
        }
    }
}

/// Settings for a reproducible run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Periodic grid nodes per axis, indexed by dimension (1D, 2D).
    pub grid_sizes: [usize; 2],
    /// Top Littlewood–Paley block per dimension.
    pub j_max: [usize; 2],
    pub scales: ScaleRange,
    #[serde(with = "ext_f64::vec")]
    pub p_samples: Vec<f64>,
    /// Margin for admissibility decisions.
    pub margin: f64,
    /// Test-function dictionary name; only `standard` is shipped.
    pub dictionary: String,
    pub seed: u64,
    pub output_dir: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            grid_sizes: [1 << 12, 1 << 9],
            j_max: [9, 7],
            scales: ScaleRange::default(),
            p_samples: vec![2.0, 4.0, 8.0, f64::INFINITY],
            margin: 0.1,
            dictionary: "standard".into(),
            seed: 0,
            output_dir: "reports".into(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        for (i, n) in self.grid_sizes.iter().enumerate() {
            if !n.is_power_of_two() || *n < 8 {
                return Err(Error::InvalidInput(format!(
                    "grid size {n} for d = {} must be a power of two >= 8",
                    i + 1
                )));
            }
        }
        if self.scales.n_min == 0 || self.scales.n_max < self.scales.n_min + 4 {
            return Err(Error::InvalidInput(format!(
                "scale range {}..={} must start at 1 or later and cover at least 5 scales",
                self.scales.n_min, self.scales.n_max
            )));
        }
        if self.scales.n_max > 30 {
            return Err(Error::InvalidInput(
                "n_max above 30 underflows the test functions".into(),
            ));
        }
        if self.p_samples.is_empty() || self.p_samples.iter().any(|p| p.is_nan() || *p < 2.0) {
            return Err(Error::InvalidInput("p samples must lie in [2, ∞]".into()));
        }
        if !(self.margin > 0.0 && self.margin < 1.0) {
            return Err(Error::InvalidInput("margin must lie in (0, 1)".into()));
        }
        if self.dictionary != "standard" {
            return Err(Error::InvalidInput(format!(
                "unknown dictionary {}",
                self.dictionary
            )));
        }
        Ok(())
    }

    pub fn grid_size(&self, dim: usize) -> usize {
        self.grid_sizes[dim - 1]
    }

    pub fn j_max_for(&self, dim: usize) -> usize {
        self.j_max[dim - 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_with_infinite_p() {
        let c = RunConfig::default();
        let s = serde_json::to_string(&c).unwrap();
        assert!(s.contains("\"inf\""));
        let back: RunConfig = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
        c.validate().unwrap();
    }

    #[test]
    fn rejects_bad_ranges() {
        let c = RunConfig {
            p_samples: vec![1.0],
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
        let c = RunConfig {
            scales: ScaleRange { n_min: 2, n_max: 4 },
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
