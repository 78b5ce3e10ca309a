use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::oracle::{
    maximally_entangled, random_pure_state, schmidt_state, singlet, PureBipartiteState,
    StateDocument, TracelessBinaryObservable,
};
use crate::protocol::CodecChoice;

/// Which state the experiment measures.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    /// `(1/√d) Σᵢ |ii⟩`.
    Bell,
    /// `(|01⟩ − |10⟩)/√2`; `d = 2` only.
    Singlet,
    /// Fresh random pure state per observable pair.
    Random,
    Schmidt(Vec<f64>),
    Explicit(PureBipartiteState<f64>),
}

impl StateSpec {
    /// Whether every state this spec yields is maximally entangled.
    pub fn is_maximally_entangled(&self) -> bool {
        match self {
            StateSpec::Bell | StateSpec::Singlet => true,
            StateSpec::Random => false,
            StateSpec::Schmidt(c) => c.windows(2).all(|w| (w[0] - w[1]).abs() <= 1e-12),
            StateSpec::Explicit(s) => s.is_maximally_entangled(1e-9),
        }
    }

    pub(crate) fn build<R: rand::Rng + ?Sized>(
        &self,
        d: usize,
        rng: &mut R,
    ) -> Result<PureBipartiteState<f64>, HarnessError> {
        Ok(match self {
            StateSpec::Bell => maximally_entangled(d)?,
            StateSpec::Singlet => singlet(),
            StateSpec::Random => random_pure_state(d, rng)?,
            StateSpec::Schmidt(c) => schmidt_state(c)?,
            StateSpec::Explicit(s) => s.clone(),
        })
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSpec::Bell => f.write_str("bell"),
            StateSpec::Singlet => f.write_str("singlet"),
            StateSpec::Random => f.write_str("random"),
            StateSpec::Schmidt(c) => {
                let parts: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                write!(f, "schmidt:{}", parts.join(","))
            }
            StateSpec::Explicit(s) => {
                write!(
                    f,
                    "json:{}",
                    serde_json::to_string(s).map_err(|_| fmt::Error)?
                )
            }
        }
    }
}

impl FromStr for StateSpec {
    type Err = HarnessError;

    /// `bell`, `singlet`, `random`, `schmidt:c1,c2,..`, `json:{..}` or
    /// `file:<path>` (a JSON state document).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = |why: &str| HarnessError::ConfigInvalid(format!("state `{s}`: {why}"));
        match s {
            "bell" | "max" => return Ok(StateSpec::Bell),
            "singlet" => return Ok(StateSpec::Singlet),
            "random" => return Ok(StateSpec::Random),
            _ => {}
        }
        if let Some(list) = s.strip_prefix("schmidt:") {
            let coeffs = list
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| bad(&e.to_string()))?;
            return Ok(StateSpec::Schmidt(coeffs));
        }
        if let Some(json) = s.strip_prefix("json:") {
            let st = serde_json::from_str(json).map_err(|e| bad(&e.to_string()))?;
            return Ok(StateSpec::Explicit(st));
        }
        if let Some(path) = s.strip_prefix("file:") {
            let text = std::fs::read_to_string(path).map_err(|e| bad(&e.to_string()))?;
            let st = serde_json::from_str(&text).map_err(|e| bad(&e.to_string()))?;
            return Ok(StateSpec::Explicit(st));
        }
        Err(bad(
            "expected bell, singlet, random, schmidt:.., json:.. or file:..",
        ))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum StateRepr {
    Name(String),
    Document(StateDocument<f64>),
}

impl Serialize for StateSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            StateSpec::Explicit(st) => StateRepr::Document(st.to_document()),
            other => StateRepr::Name(other.to_string()),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for StateSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        match StateRepr::deserialize(deserializer)? {
            StateRepr::Name(s) => s.parse().map_err(serde::de::Error::custom),
            StateRepr::Document(doc) => PureBipartiteState::try_from(doc)
                .map(StateSpec::Explicit)
                .map_err(serde::de::Error::custom),
        }
    }
}

/// A pair of observables, Alice's first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservablePair {
    pub alice: TracelessBinaryObservable<f64>,
    pub bob: TracelessBinaryObservable<f64>,
}

/// Which observables are measured.
#[derive(Debug, Clone, PartialEq)]
pub enum ObservableSpec {
    /// `pairs` independent Haar-random pairs.
    Random {
        pairs: usize,
    },
    Explicit(Vec<ObservablePair>),
}

impl ObservableSpec {
    pub fn pair_count(&self) -> usize {
        match self {
            ObservableSpec::Random { pairs } => *pairs,
            ObservableSpec::Explicit(v) => v.len(),
        }
    }
}

impl fmt::Display for ObservableSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObservableSpec::Random { pairs } => write!(f, "random:{pairs}"),
            ObservableSpec::Explicit(v) => {
                write!(
                    f,
                    "json:{}",
                    serde_json::to_string(v).map_err(|_| fmt::Error)?
                )
            }
        }
    }
}

impl FromStr for ObservableSpec {
    type Err = HarnessError;

    /// `random`, `random:<pairs>`, `json:[..]` or `file:<path>` holding a JSON
    /// array of `{"alice": matrix, "bob": matrix}`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = |why: &str| HarnessError::ConfigInvalid(format!("observables `{s}`: {why}"));
        if s == "random" {
            return Ok(ObservableSpec::Random { pairs: 1 });
        }
        if let Some(k) = s.strip_prefix("random:") {
            let pairs = k.parse().map_err(|_| bad("pair count is not an integer"))?;
            return Ok(ObservableSpec::Random { pairs });
        }
        let text = if let Some(json) = s.strip_prefix("json:") {
            json.to_string()
        } else if let Some(path) = s.strip_prefix("file:") {
            std::fs::read_to_string(path).map_err(|e| bad(&e.to_string()))?
        } else {
            return Err(bad("expected random, random:<pairs>, json:.. or file:.."));
        };
        let pairs = serde_json::from_str(&text).map_err(|e| bad(&e.to_string()))?;
        Ok(ObservableSpec::Explicit(pairs))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ObservableRepr {
    Name(String),
    Pairs(Vec<ObservablePair>),
}

impl Serialize for ObservableSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ObservableSpec::Explicit(v) => ObservableRepr::Pairs(v.clone()),
            other => ObservableRepr::Name(other.to_string()),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ObservableSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        match ObservableRepr::deserialize(deserializer)? {
            ObservableRepr::Name(s) => s.parse().map_err(serde::de::Error::custom),
            ObservableRepr::Pairs(v) => Ok(ObservableSpec::Explicit(v)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Full protocol with the iteration message.
    #[default]
    Protocol,
    /// Single rejection trial, abort on reject.
    Postselected,
    /// Random unit vectors fed straight to the protocol, no quantum layer.
    AbstractVectors,
}

impl FromStr for Mode {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "protocol" => Ok(Mode::Protocol),
            "postselected" => Ok(Mode::Postselected),
            "abstract-vectors" | "abstract" => Ok(Mode::AbstractVectors),
            other => Err(HarnessError::ConfigInvalid(format!(
                "unknown mode `{other}`"
            ))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Protocol => "protocol",
            Mode::Postselected => "postselected",
            Mode::AbstractVectors => "abstract-vectors",
        })
    }
}

/// Fully resolved experiment description. Re-running a report's embedded
/// config reproduces the report exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub d: usize,
    pub state: StateSpec,
    pub observables: ObservableSpec,
    pub trials: u64,
    pub seed: u64,
    pub codec: CodecChoice,
    pub mode: Mode,
    /// Sphere dimension for abstract-vector runs; defaults to `2d² − 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(d: usize) -> Self {
        Self {
            d,
            state: StateSpec::Bell,
            observables: ObservableSpec::Random { pairs: 1 },
            trials: 100_000,
            seed: 0,
            codec: CodecChoice::GolombTuned,
            mode: Mode::Protocol,
            n: None,
        }
    }

    /// Dimension of the sphere the protocol runs on.
    pub fn sphere_dim(&self) -> usize {
        match (self.mode, self.n) {
            (Mode::AbstractVectors, Some(n)) => n,
            _ => 2 * self.d * self.d - 1,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::ConfigInvalid(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.observables.pair_count() == 0 {
            return bad("at least one observable pair is required".into());
        }
        if self.mode == Mode::AbstractVectors {
            if self.sphere_dim() == 0 {
                return bad("sphere dimension n must be at least 1".into());
            }
            return Ok(());
        }
        if self.d < 2 {
            return bad(format!("d = {} but must be at least 2", self.d));
        }
        if self.d % 2 == 1 {
            return bad(format!(
                "d = {} is odd; traceless binary observables need even d",
                self.d
            ));
        }
        match &self.state {
            StateSpec::Singlet if self.d != 2 => {
                return bad("the singlet state requires d = 2".into())
            }
            StateSpec::Schmidt(c) if c.len() != self.d => {
                return bad(format!(
                    "{} Schmidt coefficients for d = {}",
                    c.len(),
                    self.d
                ))
            }
            StateSpec::Explicit(s) if s.dim() != self.d => {
                return bad(format!(
                    "state has d = {}, config has d = {}",
                    s.dim(),
                    self.d
                ))
            }
            _ => {}
        }
        if let ObservableSpec::Explicit(pairs) = &self.observables {
            if let Some(p) = pairs
                .iter()
                .find(|p| p.alice.dim() != self.d || p.bob.dim() != self.d)
            {
                return bad(format!(
                    "observable dimensions ({}, {}) differ from d = {}",
                    p.alice.dim(),
                    p.bob.dim(),
                    self.d
                ));
            }
        }
        Ok(())
    }
}

/// Partially specified config, as read from a file or command-line flags.
///
/// Files use flat `key = value` lines (TOML syntax), e.g.
///
/// ```text
/// d = 4
/// state = "schmidt:0.9,0.3,0.3,0.1"
/// observables = "random:20"
/// trials = 100000
/// seed = 7
/// codec = "golomb"
/// mode = "protocol"
/// ```
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub d: Option<usize>,
    pub state: Option<String>,
    pub observables: Option<String>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub codec: Option<String>,
    pub mode: Option<String>,
    pub n: Option<usize>,
}

impl PartialConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::ConfigInvalid(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::ConfigInvalid(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Fields set in `over` win.
    pub fn overridden_by(self, over: PartialConfig) -> PartialConfig {
        PartialConfig {
            d: over.d.or(self.d),
            state: over.state.or(self.state),
            observables: over.observables.or(self.observables),
            trials: over.trials.or(self.trials),
            seed: over.seed.or(self.seed),
            codec: over.codec.or(self.codec),
            mode: over.mode.or(self.mode),
            n: over.n.or(self.n),
        }
    }

    pub fn resolve(self) -> Result<ExperimentConfig, HarnessError> {
        let d = self
            .d
            .ok_or_else(|| HarnessError::ConfigInvalid("d is required".into()))?;
        let mut cfg = ExperimentConfig::new(d);
        if let Some(s) = self.state {
            cfg.state = s.parse()?;
        }
        if let Some(o) = self.observables {
            cfg.observables = o.parse()?;
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(c) = self.codec {
            cfg.codec = c.parse().map_err(|e: crate::protocol::CodecError| {
                HarnessError::ConfigInvalid(e.to_string())
            })?;
        }
        if let Some(m) = self.mode {
            cfg.mode = m.parse()?;
        }
        cfg.n = self.n;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::Codec;

    #[test]
    fn file_values_overridden_by_flags() {
        let file =
            PartialConfig::from_toml_str("d = 4\ntrials = 10\nseed = 3\ncodec = \"unary\"\n")
                .unwrap();
        let flags = PartialConfig {
            seed: Some(9),
            ..Default::default()
        };
        let cfg = file.overridden_by(flags).resolve().unwrap();
        assert_eq!(cfg.d, 4);
        assert_eq!(cfg.trials, 10);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.codec, CodecChoice::Fixed(Codec::Unary));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(PartialConfig::from_toml_str("d = 2\ncolour = 1\n").is_err());
    }

    #[test]
    fn odd_dimension_rejected() {
        let err = PartialConfig {
            d: Some(3),
            ..Default::default()
        }
        .resolve()
        .unwrap_err();
        assert!(err.to_string().contains("odd"));
    }

    #[test]
    fn config_guards() {
        let mut cfg = ExperimentConfig::new(4);
        cfg.state = StateSpec::Singlet;
        assert!(cfg.validate().is_err());
        cfg.state = StateSpec::Schmidt(vec![1.0, 1.0]);
        assert!(cfg.validate().is_err());
        cfg.state = StateSpec::Bell;
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
        let mut abs = ExperimentConfig::new(3);
        abs.mode = Mode::AbstractVectors;
        abs.n = Some(3);
        assert!(abs.validate().is_ok());
        assert_eq!(abs.sphere_dim(), 3);
    }

    #[test]
    fn state_spec_strings() {
        assert_eq!("bell".parse::<StateSpec>().unwrap(), StateSpec::Bell);
        assert_eq!(
            "schmidt:0.9,0.1".parse::<StateSpec>().unwrap(),
            StateSpec::Schmidt(vec![0.9, 0.1])
        );
        assert!("schmidt:a".parse::<StateSpec>().is_err());
        assert!("ghz".parse::<StateSpec>().is_err());
        assert!(StateSpec::Schmidt(vec![0.5, 0.5]).is_maximally_entangled());
        assert!(!StateSpec::Schmidt(vec![0.9, 0.1]).is_maximally_entangled());
    }

    #[test]
    fn config_json_round_trip() {
        let mut cfg = ExperimentConfig::new(2);
        cfg.state = StateSpec::Explicit(crate::oracle::singlet());
        cfg.observables = ObservableSpec::Explicit(vec![ObservablePair {
            alice: TracelessBinaryObservable::pauli_z(),
            bob: TracelessBinaryObservable::pauli_x(),
        }]);
        let json = serde_json::to_string(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(
            serde_json::to_value(ExperimentConfig::new(2)).unwrap()["state"],
            "bell"
        );
    }
}
