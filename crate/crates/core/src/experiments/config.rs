use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::combinatorics::{KDistinctnessInstance, ProblemParams};
use crate::error::{Error, Result};
use crate::full::DEFAULT_CAP;
use crate::reduced::StepMode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!("unknown format `{other}` (csv|json)"))),
        }
    }
}

/// Everything a command may read. Every field is optional so a JSON file
/// and command-line flags can be layered; see [`ExperimentConfig::overlay`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: Option<usize>,
    pub k: Option<usize>,
    /// Overrides `nearest_r(N, k)`.
    pub r: Option<usize>,
    pub m: Option<u64>,
    pub t1: Option<usize>,
    pub t2: Option<usize>,
    pub mode: Option<StepMode>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    /// Inclusive `[lo, hi]`.
    pub t1_range: Option<[usize; 2]>,
    pub t2_range: Option<[usize; 2]>,
    /// `N` values for the convergence ladder.
    pub ladder: Option<Vec<usize>>,
    /// Explicit list values; otherwise a list with a single collision.
    pub values: Option<Vec<u64>>,
    /// 1-based positions of the colliding set when `values` is absent.
    pub collision: Option<Vec<usize>>,
    /// Replaces every check tolerance in `verify`.
    pub tolerance: Option<f64>,
    /// Suites skipped by `verify`: `reduced`, `full`, `microsim`.
    pub skip: Option<Vec<String>>,
    pub cap: Option<u64>,
    pub out: Option<String>,
    pub format: Option<OutputFormat>,
}

macro_rules! overlay_fields {
    ($base:expr, $top:expr, $($field:ident),*) => {
        ExperimentConfig { $($field: $top.$field.or($base.$field)),* }
    };
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Fields set in `top` win over `self`.
    pub fn overlay(self, top: ExperimentConfig) -> ExperimentConfig {
        overlay_fields!(
            self, top, n, k, r, m, t1, t2, mode, samples, seed, t1_range, t2_range, ladder, values,
            collision, tolerance, skip, cap, out, format
        )
    }

    /// First 16 hex digits of the SHA-256 of the compact JSON form. The
    /// output path is left out: where a report goes does not change it.
    pub fn hash(&self) -> String {
        let keyed = ExperimentConfig {
            out: None,
            ..self.clone()
        };
        let digest = Sha256::digest(keyed.to_json().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn require_n(&self) -> Result<usize> {
        self.n.ok_or_else(|| Error::Config("--n is required".into()))
    }

    pub fn require_k(&self) -> Result<usize> {
        self.k.ok_or_else(|| Error::Config("--k is required".into()))
    }

    pub fn params(&self) -> Result<ProblemParams> {
        let (n, k) = (self.require_n()?, self.require_k()?);
        let params = match self.r {
            Some(r) => ProblemParams::with_r(n, k, r)?,
            None => ProblemParams::new(n, k)?,
        };
        Ok(match self.m {
            Some(m) => params.with_max_value(m),
            None => params,
        })
    }

    /// The list to search: explicit `values`, or `N` distinct values except
    /// on `collision` (default positions `1..=k`).
    pub fn instance(&self) -> Result<KDistinctnessInstance> {
        let (n, k) = (self.require_n()?, self.require_k()?);
        if let Some(values) = &self.values {
            if values.len() != n {
                return Err(Error::Config(format!(
                    "{} values given but N = {n}",
                    values.len()
                )));
            }
            return KDistinctnessInstance::new(values.clone(), k);
        }
        let positions = self.collision.clone().unwrap_or_else(|| (1..=k).collect());
        if positions.len() != k {
            return Err(Error::Config(format!(
                "collision needs exactly k = {k} positions"
            )));
        }
        KDistinctnessInstance::with_collision(n, &positions)
    }

    pub fn mode(&self) -> StepMode {
        self.mode.unwrap_or(StepMode::Closed)
    }

    pub fn cap(&self) -> u128 {
        self.cap.map(u128::from).unwrap_or(DEFAULT_CAP)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn skips(&self, suite: &str) -> bool {
        self.skip.as_ref().is_some_and(|s| s.iter().any(|x| x == suite))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::option;
    use proptest::prelude::*;

    fn arb_config() -> impl Strategy<Value = ExperimentConfig> {
        (
            (
                option::of(2usize..100_000),
                option::of(2usize..6),
                option::of(1usize..500),
                option::of(1u64..64),
            ),
            (
                option::of(0usize..200),
                option::of(0usize..200),
                option::of(prop_oneof![Just(StepMode::Closed), Just(StepMode::Exact)]),
            ),
            (
                option::of(0usize..1_000_000),
                option::of(any::<u64>()),
                option::of((0usize..50, 0usize..50).prop_map(|(a, b)| [a, b])),
            ),
            (
                option::of(prop::collection::vec(2usize..1_000_000, 0..5)),
                option::of(prop::collection::vec(1u64..9, 0..6)),
            ),
            (
                option::of(1e-30f64..1.0),
                option::of(prop::collection::vec("[a-z]{1,8}", 0..3)),
                option::of(any::<u64>()),
            ),
            (
                option::of("[a-z/._]{1,12}"),
                option::of(prop_oneof![Just(OutputFormat::Csv), Just(OutputFormat::Json)]),
            ),
        )
            .prop_map(
                |(
                    (n, k, r, m),
                    (t1, t2, mode),
                    (samples, seed, t1_range),
                    (ladder, values),
                    (tolerance, skip, cap),
                    (out, format),
                )| {
                    ExperimentConfig {
                        n,
                        k,
                        r,
                        m,
                        t1,
                        t2,
                        mode,
                        samples,
                        seed,
                        t1_range,
                        t2_range: t1_range.map(|[a, b]| [b, a]),
                        ladder,
                        values,
                        collision: None,
                        tolerance,
                        skip,
                        cap,
                        out,
                        format,
                    }
                },
            )
    }

    proptest! {
        #[test]
        fn serialized_form_round_trips(cfg in arb_config()) {
            let text = cfg.to_json();
            let back = ExperimentConfig::from_json(&text).unwrap();
            prop_assert_eq!(&back, &cfg);
            prop_assert_eq!(back.to_json(), text);
            prop_assert_eq!(back.hash(), cfg.hash());
        }
    }

    #[test]
    fn flags_override_file() {
        let file = ExperimentConfig::from_json(r#"{"n": 100, "k": 3, "seed": 9}"#).unwrap();
        let flags = ExperimentConfig {
            n: Some(8),
            k: Some(2),
            ..Default::default()
        };
        let merged = file.overlay(flags);
        assert_eq!((merged.n, merged.k, merged.seed), (Some(8), Some(2), Some(9)));
    }

    #[test]
    fn hash_ignores_output_path() {
        let a = ExperimentConfig {
            n: Some(8),
            out: Some("a.json".into()),
            ..Default::default()
        };
        let b = ExperimentConfig {
            out: Some("b.json".into()),
            ..a.clone()
        };
        assert_eq!(a.hash(), b.hash());
        assert_ne!(
            a.hash(),
            ExperimentConfig {
                n: Some(9),
                ..a.clone()
            }
            .hash()
        );
    }

    #[test]
    fn rejects_unknown_fields() {
        assert!(ExperimentConfig::from_json(r#"{"nn": 3}"#).is_err());
    }

    #[test]
    fn builds_params_and_instance() {
        let cfg = ExperimentConfig {
            n: Some(8),
            k: Some(2),
            ..Default::default()
        };
        assert_eq!(cfg.params().unwrap().r(), 4);
        assert_eq!(cfg.instance().unwrap().colliding_set(), Some(&[1, 2][..]));
        let cfg = ExperimentConfig {
            collision: Some(vec![3, 8]),
            ..cfg
        };
        assert_eq!(cfg.instance().unwrap().colliding_set(), Some(&[3, 8][..]));
        assert!(ExperimentConfig::default().params().is_err());
    }
}
