//! Run configuration: a JSON document split into named sections, with
//! command-line overrides applied before validation.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::baselines::Optimizer;
use crate::datagen::{BounceConfig, CosineConfig, GlyphSet, OverlapMode};
use crate::error::{Error, Result};
use crate::harness::{BenchConfig, MetricKind, ObserveMode, RecordLevel, RnnAlgorithm};
use crate::numerics::ActivationKind;
use crate::ptncn::Hyperparams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Train,
    Eval,
    Zeroshot,
    Continual,
    Bench,
    Gendata,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Train => "train",
            Experiment::Eval => "eval",
            Experiment::Zeroshot => "zeroshot",
            Experiment::Continual => "continual",
            Experiment::Bench => "bench",
            Experiment::Gendata => "gendata",
        }
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(Value::String(s.to_string())).map_err(|_| {
            Error::Config(format!(
                "unknown subcommand `{s}` (expected train, eval, zeroshot, continual, bench or gendata)"
            ))
        })
    }
}

fn d_layers() -> Vec<usize> {
    vec![20, 20]
}
fn d_tanh() -> ActivationKind {
    ActivationKind::Tanh
}
fn d_variance() -> f64 {
    0.025
}
fn d_true() -> bool {
    true
}
fn d_hidden() -> usize {
    64
}
fn d_window() -> usize {
    10
}
fn d_reservoir() -> usize {
    256
}
fn d_radius() -> f64 {
    0.9
}
fn d_half() -> f64 {
    0.5
}
fn d_density() -> f64 {
    0.2
}
fn d_esn_lr() -> f64 {
    0.01
}

/// Learner architecture. Input and output widths come from the data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Ptncn {
        #[serde(default = "d_layers")]
        layer_dims: Vec<usize>,
        #[serde(default = "d_tanh")]
        state_activation: ActivationKind,
        /// Data head; defaults to the likelihood's canonical link.
        #[serde(default)]
        output_activation: Option<ActivationKind>,
        #[serde(default = "d_variance")]
        init_variance: f64,
        #[serde(default = "d_true")]
        biases: bool,
        /// Evaluate layers concurrently.
        #[serde(default)]
        parallel: bool,
    },
    Rnn {
        algorithm: RnnAlgorithm,
        #[serde(default = "d_hidden")]
        hidden: usize,
        /// Truncation window for `tbptt`.
        #[serde(default = "d_window")]
        window: usize,
        #[serde(default)]
        optimizer: Optimizer,
        #[serde(default = "d_variance")]
        init_variance: f64,
    },
    Esn {
        #[serde(default = "d_reservoir")]
        reservoir: usize,
        #[serde(default = "d_radius")]
        spectral_radius: f64,
        #[serde(default = "d_half")]
        leak: f64,
        #[serde(default = "d_half")]
        input_scale: f64,
        #[serde(default = "d_density")]
        density: f64,
        /// Readout SGD step.
        #[serde(default = "d_esn_lr")]
        lr: f64,
    },
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec::Ptncn {
            layer_dims: d_layers(),
            state_activation: d_tanh(),
            output_activation: None,
            init_variance: d_variance(),
            biases: true,
            parallel: false,
        }
    }
}

fn d_scale() -> usize {
    1
}
fn d_train_count() -> usize {
    1000
}
fn d_test_count() -> usize {
    100
}
fn d_seq_len() -> usize {
    100
}
fn d_valid_fraction() -> f64 {
    0.1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BouncingSpec {
    /// Built-in glyph set, used unless `idx_path` is given.
    #[serde(default)]
    pub sprites: GlyphSet,
    /// IDX file of sprites (unsigned bytes, three dimensions).
    #[serde(default)]
    pub idx_path: Option<PathBuf>,
    /// Integer upscale factor for the sprites.
    #[serde(default = "d_scale")]
    pub scale: usize,
    #[serde(default = "default_frame_size")]
    pub frame_size: usize,
    #[serde(default = "default_seq_len")]
    pub seq_len: usize,
    #[serde(default = "default_num_objects")]
    pub num_objects: usize,
    #[serde(default = "default_speed_range")]
    pub speed_range: [f64; 2],
    #[serde(default = "default_overlap")]
    pub overlap_mode: OverlapMode,
    #[serde(default = "d_train_count")]
    pub train_count: usize,
    #[serde(default = "d_test_count")]
    pub test_count: usize,
    /// Threshold frames at 0.5.
    #[serde(default = "d_true")]
    pub binarize: bool,
}

fn default_frame_size() -> usize {
    BounceConfig::default().frame_size
}
fn default_seq_len() -> usize {
    BounceConfig::default().seq_len
}
fn default_num_objects() -> usize {
    BounceConfig::default().num_objects
}
fn default_speed_range() -> [f64; 2] {
    BounceConfig::default().speed_range
}
fn default_overlap() -> OverlapMode {
    BounceConfig::default().overlap_mode
}

impl BouncingSpec {
    pub fn bounce_config(&self) -> BounceConfig {
        BounceConfig {
            frame_size: self.frame_size,
            seq_len: self.seq_len,
            num_objects: self.num_objects,
            speed_range: self.speed_range,
            overlap_mode: self.overlap_mode,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TextSpec {
    pub path: PathBuf,
    #[serde(default = "d_seq_len")]
    pub seq_len: usize,
    /// Trailing share of the corpus held out for testing.
    #[serde(default = "d_valid_fraction")]
    pub valid_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataSpec {
    Cosine(CosineConfig),
    Bouncing(BouncingSpec),
    Text(TextSpec),
}

impl DataSpec {
    fn validate(&self, key: &str) -> Result<()> {
        match self {
            DataSpec::Cosine(c) => c.validate(),
            DataSpec::Bouncing(b) => {
                if let Some(p) = &b.idx_path {
                    require_file(p, &format!("{key}.idx_path"))?;
                }
                if b.scale == 0 {
                    return Err(Error::Config(format!("{key}.scale must be at least 1")));
                }
                if b.train_count == 0 {
                    return Err(Error::Config(format!("{key}.train_count must be at least 1")));
                }
                Ok(())
            }
            DataSpec::Text(t) => {
                require_file(&t.path, &format!("{key}.path"))?;
                if t.seq_len == 0 {
                    return Err(Error::Config(format!("{key}.seq_len must be at least 1")));
                }
                if !(0.0..1.0).contains(&t.valid_fraction) {
                    return Err(Error::Config(format!("{key}.valid_fraction must lie in [0, 1)")));
                }
                Ok(())
            }
        }
    }
}

fn require_file(p: &Path, key: &str) -> Result<()> {
    if p.is_file() {
        Ok(())
    } else {
        Err(Error::Config(format!("{key}: no such file `{}`", p.display())))
    }
}

fn d_one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSpec {
    /// Sequences advanced side by side.
    #[serde(default = "d_one")]
    pub batch: usize,
    #[serde(default = "d_one")]
    pub epochs: usize,
    #[serde(default = "d_record")]
    pub record: RecordLevel,
    /// Defaults to the likelihood's natural metric.
    #[serde(default)]
    pub metric: Option<MetricKind>,
}

fn d_record() -> RecordLevel {
    RecordLevel::Step
}

impl Default for TrainSpec {
    fn default() -> Self {
        Self {
            batch: 1,
            epochs: 1,
            record: RecordLevel::Step,
            metric: None,
        }
    }
}

fn d_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "d_out")]
    pub dir: PathBuf,
    /// Record wall time; off writes zeros so runs compare byte for byte.
    #[serde(default = "d_true")]
    pub timing: bool,
    /// Save the trained model.
    #[serde(default = "d_true")]
    pub checkpoint: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: d_out(),
            timing: true,
            checkpoint: true,
        }
    }
}

fn d_adapt() -> ObserveMode {
    ObserveMode::Adapt
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSpec {
    /// Model to evaluate; when absent the `train` section is run first.
    #[serde(default)]
    pub checkpoint: Option<PathBuf>,
    #[serde(default = "d_adapt")]
    pub mode: ObserveMode,
}

impl Default for EvalSpec {
    fn default() -> Self {
        Self {
            checkpoint: None,
            mode: ObserveMode::Adapt,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZeroshotSpec {
    /// Trained P-TNCN; when absent one is trained on `data` first.
    #[serde(default)]
    pub checkpoint: Option<PathBuf>,
    /// Unseen data, evaluated on its test split.
    pub data: DataSpec,
    #[serde(default)]
    pub metric: Option<MetricKind>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub name: String,
    pub data: DataSpec,
    #[serde(default = "d_true")]
    pub train_online: bool,
    #[serde(default)]
    pub frozen: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinualSpec {
    pub tasks: Vec<TaskSpec>,
    #[serde(default = "d_adapt")]
    pub eval_mode: ObserveMode,
}

/// Fully resolved run description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub model: ModelSpec,
    pub hyperparams: Hyperparams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<DataSpec>,
    pub train: TrainSpec,
    pub eval: EvalSpec,
    pub output: OutputSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zeroshot: Option<ZeroshotSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub continual: Option<ContinualSpec>,
    pub bench: BenchConfig,
}

pub const SECTIONS: [&str; 11] = [
    "experiment",
    "seed",
    "model",
    "hyperparams",
    "data",
    "train",
    "eval",
    "output",
    "zeroshot",
    "continual",
    "bench",
];

/// Command-line adjustments layered over the config file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub experiment: Option<Experiment>,
    /// `section.key=value` assignments; values parse as JSON, else as strings.
    pub set: Vec<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub no_timing: bool,
}

fn apply_set(root: &mut Map<String, Value>, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("--set expects key=value, got `{assignment}`")))?;
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Error::Config(format!("--set: malformed key `{path}`")));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let (last, parents) = keys.split_last().expect("split yields at least one key");
    let mut node = root;
    for k in parents {
        let slot = node
            .entry(k.to_string())
            .or_insert_with(|| Value::Object(Map::new()));
        node = slot
            .as_object_mut()
            .ok_or_else(|| Error::Config(format!("--set {path}: `{k}` is not a section")))?;
    }
    node.insert(last.to_string(), value);
    Ok(())
}

fn section<T: for<'de> Deserialize<'de>>(root: &Map<String, Value>, key: &str) -> Result<Option<T>> {
    root.get(key)
        .filter(|v| !v.is_null())
        .map(|v| serde_json::from_value(v.clone()).map_err(|e| Error::Config(format!("section `{key}`: {e}"))))
        .transpose()
}

/// Parses and validates a config document, filling defaults for absent
/// sections.
pub fn parse_config_str(text: &str, ov: &Overrides) -> Result<RunConfig> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::Config(format!("config is not valid JSON: {e}")))?;
    let Value::Object(mut root) = doc else {
        return Err(Error::Config("config root must be a JSON object".into()));
    };
    for s in &ov.set {
        apply_set(&mut root, s)?;
    }
    if let Some(e) = ov.experiment {
        root.insert("experiment".into(), Value::String(e.name().into()));
    }
    if let Some(seed) = ov.seed {
        root.insert("seed".into(), Value::from(seed));
    }
    let mut output: OutputSpec = section(&root, "output")?.unwrap_or_default();
    if let Some(dir) = &ov.out {
        output.dir = dir.clone();
    }
    if ov.no_timing {
        output.timing = false;
    }
    if let Some(k) = root.keys().find(|k| !SECTIONS.contains(&k.as_str())) {
        return Err(Error::Config(format!("unknown key `{k}`")));
    }
    let cfg = RunConfig {
        experiment: section(&root, "experiment")?
            .ok_or_else(|| Error::Config("missing required key `experiment`".into()))?,
        seed: section(&root, "seed")?.unwrap_or(0),
        model: section(&root, "model")?.unwrap_or_default(),
        hyperparams: section(&root, "hyperparams")?.unwrap_or_default(),
        data: section(&root, "data")?,
        train: section(&root, "train")?.unwrap_or_default(),
        eval: section(&root, "eval")?.unwrap_or_default(),
        output,
        zeroshot: section(&root, "zeroshot")?,
        continual: section(&root, "continual")?,
        bench: section(&root, "bench")?.unwrap_or_default(),
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: impl AsRef<Path>, ov: &Overrides) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config `{}`: {e}", path.display())))?;
    parse_config_str(&text, ov)
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let named = |key: &str, r: Result<()>| {
            r.map_err(|e| match e {
                Error::Config(m) if m.contains(key) => Error::Config(m),
                other => Error::Config(format!("section `{key}`: {other}")),
            })
        };
        named("hyperparams", self.hyperparams.validate())?;
        named("model", self.validate_model())?;
        if let Some(d) = &self.data {
            named("data", d.validate("data"))?;
        }
        if self.train.batch == 0 || self.train.epochs == 0 {
            return Err(Error::Config("section `train`: batch and epochs must be at least 1".into()));
        }
        if self.eval.mode == ObserveMode::Learn {
            return Err(Error::Config("section `eval`: mode must be adapt or frozen".into()));
        }
        if let Some(p) = &self.eval.checkpoint {
            require_file(p, "eval.checkpoint")?;
        }
        let needs_data = || {
            self.data
                .as_ref()
                .map(|_| ())
                .ok_or_else(|| Error::Config(format!("{} needs a `data` section", self.experiment.name())))
        };
        match self.experiment {
            Experiment::Train | Experiment::Gendata => needs_data()?,
            Experiment::Eval => {
                needs_data()?;
            }
            Experiment::Zeroshot => {
                let z = self
                    .zeroshot
                    .as_ref()
                    .ok_or_else(|| Error::Config("zeroshot needs a `zeroshot` section".into()))?;
                if !matches!(self.model, ModelSpec::Ptncn { .. }) && z.checkpoint.is_none() {
                    return Err(Error::Config("section `model`: zero-shot evaluation needs a ptncn model".into()));
                }
                match &z.checkpoint {
                    Some(p) => require_file(p, "zeroshot.checkpoint")?,
                    None => needs_data()?,
                }
                named("zeroshot", z.data.validate("zeroshot.data"))?;
            }
            Experiment::Continual => {
                let c = self
                    .continual
                    .as_ref()
                    .ok_or_else(|| Error::Config("continual needs a `continual` section".into()))?;
                if c.tasks.is_empty() {
                    return Err(Error::Config("section `continual`: tasks must not be empty".into()));
                }
                for (i, t) in c.tasks.iter().enumerate() {
                    named("continual", t.data.validate(&format!("continual.tasks[{i}].data")))?;
                }
            }
            Experiment::Bench => named("bench", self.bench.validate())?,
        }
        Ok(())
    }

    fn validate_model(&self) -> Result<()> {
        let positive = |v: f64, what: &str| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("section `model`: {what} must be positive")))
            }
        };
        match &self.model {
            ModelSpec::Ptncn {
                layer_dims,
                init_variance,
                ..
            } => {
                if layer_dims.is_empty() || layer_dims.contains(&0) {
                    return Err(Error::Config("section `model`: layer_dims must be non-empty and positive".into()));
                }
                positive(*init_variance, "init_variance")
            }
            ModelSpec::Rnn {
                hidden,
                window,
                init_variance,
                ..
            } => {
                if *hidden == 0 || *window == 0 {
                    return Err(Error::Config("section `model`: hidden and window must be positive".into()));
                }
                positive(*init_variance, "init_variance")
            }
            ModelSpec::Esn { reservoir, lr, .. } => {
                if *reservoir == 0 {
                    return Err(Error::Config("section `model`: reservoir must be positive".into()));
                }
                positive(*lr, "lr")
            }
        }
    }

    /// Pretty JSON that parses back to the same configuration.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig> {
        parse_config_str(text, &Overrides::default())
    }

    #[test]
    fn defaults_fill_absent_sections() {
        let c = parse(r#"{"experiment": "train", "data": {"kind": "cosine"}}"#).unwrap();
        assert_eq!(c.hyperparams.beta, 0.15);
        assert_eq!(c.hyperparams.gamma, 0.01);
        assert_eq!(c.hyperparams.lambda_sparse, 0.001);
        assert_eq!(c.hyperparams.eta, 0.035);
        assert_eq!(c.model, ModelSpec::default());
        assert_eq!(c.data, Some(DataSpec::Cosine(CosineConfig::default())));
    }

    #[test]
    fn empty_model_section_names_model() {
        let e = parse(r#"{"experiment": "train", "model": {}, "data": {"kind": "cosine"}}"#).unwrap_err();
        assert!(matches!(&e, Error::Config(m) if m.contains("model")), "{e}");
    }

    #[test]
    fn unknown_keys_rejected_with_name() {
        let e = parse(r#"{"experiment": "train", "data": {"kind": "cosine"}, "modle": {}}"#).unwrap_err();
        assert!(e.to_string().contains("modle"), "{e}");
        let e = parse(r#"{"experiment": "train", "data": {"kind": "cosine"}, "hyperparams": {"betta": 1}}"#)
            .unwrap_err();
        assert!(e.to_string().contains("betta") && e.to_string().contains("hyperparams"), "{e}");
        let e = parse(r#"{"experiment": "train", "data": {"kind": "cosine", "sigmaa": 1}}"#).unwrap_err();
        assert!(e.to_string().contains("sigmaa"), "{e}");
    }

    #[test]
    fn type_mismatch_names_section() {
        let e = parse(r#"{"experiment": "train", "data": {"kind": "cosine"}, "train": {"batch": "x"}}"#)
            .unwrap_err();
        assert!(e.to_string().contains("train"), "{e}");
    }

    #[test]
    fn effective_config_round_trips() {
        let text = r#"{"experiment": "train", "seed": 4,
            "model": {"kind": "rnn", "algorithm": "uoro", "hidden": 8},
            "data": {"kind": "bouncing", "frame_size": 16, "seq_len": 5},
            "train": {"batch": 4, "record": "sequence"}}"#;
        let c = parse(text).unwrap();
        assert_eq!(parse(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn overrides_apply() {
        let ov = Overrides {
            experiment: Some(Experiment::Train),
            set: vec!["hyperparams.beta=0.3".into(), "model.layer_dims=[5,6]".into(), "model.kind=ptncn".into()],
            seed: Some(9),
            out: Some("elsewhere".into()),
            no_timing: true,
        };
        let c = parse_config_str(r#"{"data": {"kind": "cosine"}}"#, &ov).unwrap();
        assert_eq!(c.hyperparams.beta, 0.3);
        assert_eq!(c.seed, 9);
        assert!(!c.output.timing);
        assert_eq!(c.output.dir, PathBuf::from("elsewhere"));
        assert!(matches!(c.model, ModelSpec::Ptncn { ref layer_dims, .. } if layer_dims == &[5, 6]));
        let bad = Overrides {
            set: vec!["nonsense".into()],
            ..Overrides::default()
        };
        assert!(parse_config_str("{}", &bad).is_err());
    }

    #[test]
    fn missing_paths_are_config_errors() {
        let e = parse(r#"{"experiment": "train", "data": {"kind": "text", "path": "/no/such/file"}}"#).unwrap_err();
        assert!(matches!(&e, Error::Config(m) if m.contains("data.path")), "{e}");
    }

    #[test]
    fn experiment_requirements() {
        assert!(parse(r#"{"experiment": "train"}"#).is_err());
        assert!(parse(r#"{"experiment": "bench"}"#).is_ok());
        assert!(parse(r#"{"experiment": "bench", "bench": {"widths": [8, 16]}}"#).is_err());
        assert!(parse(r#"{"experiment": "continual"}"#).is_err());
        assert!(parse(r#"{"data": {"kind": "cosine"}}"#).is_err());
        assert!("zeroshot".parse::<Experiment>().is_ok());
        assert!("fly".parse::<Experiment>().is_err());
    }
}
