use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::HarnessError;
use crate::arithmetic::AlphaSpec;
use crate::cocycle::{parse_cocycle, CocycleFn, ProjPoint};

/// Which arithmetic weight multiplies the observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Weights {
    #[default]
    Mobius,
    /// Constant one: plain Birkhoff averages.
    One,
}

/// One correlation experiment.
///
/// Config files are flat `key = value` lines (TOML syntax): strings in
/// double quotes, integers and floats bare, `checkpoints` as a bracketed
/// list, `#` starting a comment. Keys:
///
/// | key | type | default |
/// |---|---|---|
/// | `system` | cocycle spec, e.g. `"rotation:rho=0.1"` | required |
/// | `alpha` | frequency spec, e.g. `"golden"` | required |
/// | `iota1`, `iota2` | integers | 0 |
/// | `theta0`, `phi0` | floats | drawn from `seed` |
/// | `n` | integer | required |
/// | `checkpoints` | list of integers | powers of two up to `n` |
/// | `seed` | integer | 0 |
/// | `weights` | `"mobius"` or `"one"` | `"mobius"` |
/// | `workers` | integer | 1 |
/// | `output` | directory | none |
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: String,
    pub alpha: String,
    #[serde(default)]
    pub iota1: i64,
    #[serde(default)]
    pub iota2: i64,
    #[serde(default)]
    pub theta0: Option<f64>,
    #[serde(default)]
    pub phi0: Option<f64>,
    pub n: u64,
    #[serde(default)]
    pub checkpoints: Option<Vec<u64>>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub weights: Weights,
    #[serde(default = "one")]
    pub workers: usize,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn one() -> usize {
    1
}

impl ExperimentConfig {
    pub fn new(system: &str, alpha: &str, n: u64) -> Self {
        ExperimentConfig {
            system: system.into(),
            alpha: alpha.into(),
            iota1: 0,
            iota2: 0,
            theta0: None,
            phi0: None,
            n,
            checkpoints: None,
            seed: 0,
            weights: Weights::Mobius,
            workers: 1,
            output: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| HarnessError::ConfigParse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.n == 0 {
            return Err(HarnessError::ConfigParse("n must be positive".into()));
        }
        if self.workers == 0 {
            return Err(HarnessError::ConfigParse("workers must be positive".into()));
        }
        if let Some(cp) = &self.checkpoints {
            if cp.windows(2).any(|w| w[0] >= w[1]) {
                return Err(HarnessError::ConfigParse("checkpoints must be strictly increasing".into()));
            }
            if cp.first() == Some(&0) || cp.last().is_some_and(|&c| c > self.n) {
                return Err(HarnessError::ConfigParse(format!("checkpoints must lie in [1, {}]", self.n)));
            }
        }
        self.alpha_spec()?;
        Ok(())
    }

    pub fn alpha_spec(&self) -> Result<AlphaSpec, HarnessError> {
        self.alpha.parse().map_err(|e: crate::arithmetic::ArithmeticError| HarnessError::ConfigParse(e.to_string()))
    }

    pub fn alpha_value(&self) -> Result<f64, HarnessError> {
        Ok(self.alpha_spec()?.approx())
    }

    pub fn cocycle(&self) -> Result<CocycleFn, HarnessError> {
        parse_cocycle(self.alpha_value()?, &self.system).map_err(|e| HarnessError::ConfigParse(e.to_string()))
    }

    /// Explicit checkpoints, an empty list meaning just `n`, or by default
    /// the powers of two below `n` followed by `n`.
    pub fn checkpoint_schedule(&self) -> Vec<u64> {
        match &self.checkpoints {
            Some(cp) if cp.is_empty() => vec![self.n],
            Some(cp) => cp.clone(),
            None => {
                let mut v: Vec<u64> = (0..64).map(|k| 1u64 << k).take_while(|&p| p < self.n).collect();
                v.push(self.n);
                v
            }
        }
    }

    /// Starting point; unset coordinates come from the seed.
    pub fn start(&self) -> ProjPoint {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let t: f64 = rng.gen();
        let p: f64 = rng.gen::<f64>() - 0.5;
        ProjPoint::new(self.theta0.unwrap_or(t), self.phi0.unwrap_or(p))
    }

    /// SHA-256 of the fields that determine the result; worker count and
    /// output location are excluded.
    pub fn hash(&self) -> String {
        let mut id = self.clone();
        id.workers = 1;
        id.output = None;
        let bytes = serde_json::to_vec(&id).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
# rotation system, golden frequency
system = "rotation:rho=0.1"
alpha = "golden"
iota1 = 1
iota2 = 1
n = 1000
checkpoints = [10, 100, 1000]
seed = 3
"#;

    #[test]
    fn parses_sample() {
        let c = ExperimentConfig::parse(SAMPLE).unwrap();
        assert_eq!(c.iota2, 1);
        assert_eq!(c.checkpoint_schedule(), vec![10, 100, 1000]);
        assert_eq!(c.weights, Weights::Mobius);
        assert_eq!(c.workers, 1);
    }

    #[test]
    fn rejects_unknown_key_and_bad_checkpoints() {
        assert!(matches!(ExperimentConfig::parse("system = \"x\"\nalpha=\"golden\"\nn=5\nbogus=1"), Err(HarnessError::ConfigParse(_))));
        let bad = SAMPLE.replace("[10, 100, 1000]", "[100, 10]");
        assert!(ExperimentConfig::parse(&bad).is_err());
        let over = SAMPLE.replace("[10, 100, 1000]", "[10, 2000]");
        assert!(ExperimentConfig::parse(&over).is_err());
    }

    #[test]
    fn schedules() {
        let mut c = ExperimentConfig::new("rotation:rho=0.1", "golden", 100);
        assert_eq!(c.checkpoint_schedule(), vec![1, 2, 4, 8, 16, 32, 64, 100]);
        c.checkpoints = Some(Vec::new());
        assert_eq!(c.checkpoint_schedule(), vec![100]);
    }

    #[test]
    fn hash_ignores_workers() {
        let a = ExperimentConfig::new("rotation:rho=0.1", "golden", 100);
        let mut b = a.clone();
        b.workers = 8;
        assert_eq!(a.hash(), b.hash());
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
    }
}
