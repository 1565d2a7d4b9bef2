use crate::error::{Error, Result};
use crate::expr::C64;
use crate::symbols::WeightFunction;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    ResidualScaling,
    L2Bound,
    BlockDecay,
    ScalingIdentity,
    ChartTransfer,
    SelfAdjoint,
    ExprSelftest,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::ResidualScaling,
        Experiment::L2Bound,
        Experiment::BlockDecay,
        Experiment::ScalingIdentity,
        Experiment::ChartTransfer,
        Experiment::SelfAdjoint,
        Experiment::ExprSelftest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::ResidualScaling => "residual-scaling",
            Experiment::L2Bound => "l2-bound",
            Experiment::BlockDecay => "block-decay",
            Experiment::ScalingIdentity => "scaling-identity",
            Experiment::ChartTransfer => "chart-transfer",
            Experiment::SelfAdjoint => "selfadjoint",
            Experiment::ExprSelftest => "expr-selftest",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Experiment> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment `{s}`")))
    }
}

/// The operator family used by the parametrix experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    /// `(ħD_r)² + (ħD_θ)²`, requires `f ≡ 1`.
    Constant,
    /// `(ħD_r)² + c(r)` with a Gaussian `c`.
    Potential,
    /// The warped-product Laplacian with `h ≡ 1`.
    Warped,
}

impl OperatorKind {
    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::Constant => "constant",
            OperatorKind::Potential => "potential",
            OperatorKind::Warped => "warped",
        }
    }
}

impl FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<OperatorKind> {
        match s {
            "constant" => Ok(OperatorKind::Constant),
            "potential" => Ok(OperatorKind::Potential),
            "warped" => Ok(OperatorKind::Warped),
            _ => Err(Error::Config(format!("unknown operator `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub weight: String,
    pub operator: OperatorKind,
    pub n_r: usize,
    pub n_theta: usize,
    pub r_length: f64,
    pub r_origin: f64,
    pub hbar: Vec<f64>,
    pub z: C64,
    pub n: usize,
    pub t: f64,
    pub seed: u64,
    pub fields: usize,
    pub output: PathBuf,
}

pub const KEYS: [&str; 14] = [
    "experiment",
    "weight",
    "operator",
    "n_r",
    "n_theta",
    "r_length",
    "r_origin",
    "hbar",
    "z",
    "n",
    "t",
    "seed",
    "fields",
    "output",
];

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config(format!("bad value `{v}` for `{key}`")))
}

impl ExperimentConfig {
    /// Defaults sized for the acceptance thresholds of each experiment.
    pub fn for_experiment(e: Experiment) -> ExperimentConfig {
        let base = ExperimentConfig {
            experiment: e,
            weight: "sqrt1pr2".into(),
            operator: OperatorKind::Warped,
            n_r: 256,
            n_theta: 128,
            r_length: 10.0,
            r_origin: -5.0,
            hbar: vec![0.125, 0.0625, 0.03125, 0.015625],
            z: C64::new(-1.0, 0.0),
            n: 2,
            t: 1.0,
            seed: 11,
            fields: 3,
            output: PathBuf::from(format!("out/{}", e.name())),
        };
        match e {
            Experiment::ResidualScaling | Experiment::ExprSelftest => base,
            Experiment::L2Bound => ExperimentConfig {
                weight: "one".into(),
                n_r: 64,
                n_theta: 32,
                r_length: 8.0,
                r_origin: -4.0,
                hbar: vec![0.125, 0.0625],
                ..base
            },
            Experiment::BlockDecay => ExperimentConfig {
                weight: "one".into(),
                n_r: 256,
                n_theta: 8,
                r_length: 16.0,
                r_origin: -4.0,
                hbar: vec![0.125],
                ..base
            },
            Experiment::ScalingIdentity => ExperimentConfig { weight: "exp-windowed".into(), hbar: vec![0.5], ..base },
            Experiment::ChartTransfer => ExperimentConfig { weight: "one".into(), hbar: vec![0.125, 0.0625], ..base },
            Experiment::SelfAdjoint => ExperimentConfig { n: 1, z: C64::new(0.0, 1.0), seed: 7, ..base },
        }
    }

    pub fn weight_function(&self) -> Result<WeightFunction> {
        WeightFunction::by_name(&self.weight).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn get(&self, key: &str) -> Result<String> {
        Ok(match key {
            "experiment" => self.experiment.name().to_string(),
            "weight" => self.weight.clone(),
            "operator" => self.operator.name().to_string(),
            "n_r" => self.n_r.to_string(),
            "n_theta" => self.n_theta.to_string(),
            "r_length" => self.r_length.to_string(),
            "r_origin" => self.r_origin.to_string(),
            "hbar" => self.hbar.iter().map(f64::to_string).collect::<Vec<_>>().join(","),
            "z" => format!("{},{}", self.z.re, self.z.im),
            "n" => self.n.to_string(),
            "t" => self.t.to_string(),
            "seed" => self.seed.to_string(),
            "fields" => self.fields.to_string(),
            "output" => self.output.display().to_string(),
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        })
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "experiment" => self.experiment = v.parse()?,
            "weight" => {
                WeightFunction::by_name(v).map_err(|e| Error::Config(e.to_string()))?;
                self.weight = v.to_string();
            }
            "operator" => self.operator = v.parse()?,
            "n_r" => self.n_r = parse(key, v)?,
            "n_theta" => self.n_theta = parse(key, v)?,
            "r_length" => self.r_length = parse(key, v)?,
            "r_origin" => self.r_origin = parse(key, v)?,
            "hbar" => self.hbar = v.split(',').map(|x| parse_hbar(x.trim())).collect::<Result<_>>()?,
            "z" => {
                let (re, im) = v.split_once(',').unwrap_or((v, "0"));
                self.z = C64::new(parse(key, re.trim())?, parse(key, im.trim())?);
            }
            "n" => self.n = parse(key, v)?,
            "t" => self.t = parse(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "fields" => self.fields = parse(key, v)?,
            "output" => self.output = PathBuf::from(v),
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// One `key = value` line per field.
    pub fn to_text(&self) -> String {
        KEYS.iter().map(|k| format!("{k} = {}\n", self.get(k).expect("known key"))).collect()
    }

    /// Parses `key = value` lines; `#` starts a comment. The experiment key
    /// selects the defaults the remaining keys override.
    pub fn from_text(text: &str) -> Result<ExperimentConfig> {
        let mut pairs = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", no + 1)))?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        let exp = pairs
            .iter()
            .find(|(k, _)| k == "experiment")
            .ok_or_else(|| Error::Config("missing `experiment`".into()))?
            .1
            .parse()?;
        let mut cfg = ExperimentConfig::for_experiment(exp);
        for (k, v) in &pairs {
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.hbar.is_empty() || self.hbar.iter().any(|h| !(*h > 0.0 && *h <= 1.0)) {
            return bad(format!("hbar values must lie in (0, 1], got {:?}", self.hbar));
        }
        if !(0.0..=1.0).contains(&self.t) {
            return bad(format!("t must lie in [0, 1], got {}", self.t));
        }
        if self.n > crate::parametrix::MAX_DEPTH {
            return bad(format!("n = {} exceeds {}", self.n, crate::parametrix::MAX_DEPTH));
        }
        if !(self.r_length > 0.0) || self.fields == 0 {
            return bad("r_length and fields must be positive".into());
        }
        if self.operator == OperatorKind::Constant && self.weight != "one" {
            return bad("operator `constant` needs weight `one`".into());
        }
        Ok(())
    }
}

/// Accepts decimals and `1/k` fractions.
fn parse_hbar(s: &str) -> Result<f64> {
    match s.split_once('/') {
        Some((a, b)) => Ok(parse::<f64>("hbar", a.trim())? / parse::<f64>("hbar", b.trim())?),
        None => parse("hbar", s),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip_for_every_experiment() {
        for e in Experiment::ALL {
            let mut c = ExperimentConfig::for_experiment(e);
            c.z = C64::new(0.25, -1.5);
            c.seed = 42;
            let back = ExperimentConfig::from_text(&c.to_text()).unwrap();
            assert_eq!(back, c);
        }
    }

    #[test]
    fn overrides_comments_and_fractions() {
        let text = "# residuals\nexperiment = residual-scaling\nhbar = 1/8, 1/16 # two\nn = 0\nz = -2\n";
        let c = ExperimentConfig::from_text(text).unwrap();
        assert_eq!(c.hbar, vec![0.125, 0.0625]);
        assert_eq!((c.n, c.z), (0, C64::new(-2.0, 0.0)));
        assert_eq!(c.n_r, 256);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ExperimentConfig::from_text("n = 1\n").is_err());
        assert!(ExperimentConfig::from_text("experiment = nope\n").is_err());
        assert!(ExperimentConfig::from_text("experiment = l2-bound\ncolour = red\n").is_err());
        let mut c = ExperimentConfig::for_experiment(Experiment::ResidualScaling);
        c.set("operator", "constant").unwrap();
        assert!(c.validate().is_err());
        c.set("weight", "one").unwrap();
        assert!(c.validate().is_ok());
        assert!(c.set("weight", "cosh").is_err());
    }
}
