//! Run configuration: one TOML file describes the dataset, the rule file,
//! the embedding provider, view toggles, split fractions, and training
//! hyperparameters. Secrets never appear in the file — the provider block
//! names an environment variable instead.

use anyhow::{bail, Context, Result};
use mvmol_core::model::TaskKind;
use mvmol_core::views::{ViewKind, WrapperStyle};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: DatasetConfig,
    pub rules: RulesConfig,
    pub provider: ProviderConfig,
    #[serde(default)]
    pub views: ViewsConfig,
    #[serde(default)]
    pub split: SplitConfig,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub prompts: PromptsConfig,
    pub output: OutputConfig,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub name: String,
    pub path: PathBuf,
    pub task_kind: TaskKind,
    pub smiles_column: String,
    pub label_columns: Vec<String>,
    /// CSV columns fed to the rule DSL as `external` descriptors.
    #[serde(default)]
    pub external_descriptor_columns: Vec<String>,
    /// Cell value marking a missing label; empty cells always count as
    /// missing.
    #[serde(default)]
    pub missing_label_token: String,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
}

fn default_delimiter() -> char {
    ','
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RulesConfig {
    pub path: PathBuf,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProviderConfig {
    /// Deterministic digest-based embeddings; no network.
    Mock {
        #[serde(default = "default_mock_dim")]
        dim: usize,
        #[serde(default)]
        seed: u64,
        #[serde(default = "default_batch_size")]
        batch_size: usize,
    },
    /// Embeddings-over-HTTP endpoint: POST {model, input} -> {data: [...]}.
    Http {
        url: String,
        model: String,
        /// Name of the environment variable holding the bearer token.
        #[serde(default)]
        auth_env: Option<String>,
        #[serde(default = "default_batch_size")]
        batch_size: usize,
    },
}

fn default_mock_dim() -> usize {
    64
}

fn default_batch_size() -> usize {
    16
}

impl ProviderConfig {
    pub fn batch_size(&self) -> usize {
        match *self {
            ProviderConfig::Mock { batch_size, .. } | ProviderConfig::Http { batch_size, .. } => {
                batch_size
            }
        }
    }
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViewsConfig {
    #[serde(default = "default_true")]
    pub structure: bool,
    #[serde(default = "default_true")]
    pub task: bool,
    #[serde(default = "default_true")]
    pub rule: bool,
    /// Question interpolated into the task-view prompt; required when the
    /// task view is enabled.
    #[serde(default)]
    pub task_question: Option<String>,
    #[serde(default = "default_wrapper")]
    pub wrapper_style: WrapperStyle,
}

fn default_true() -> bool {
    true
}

fn default_wrapper() -> WrapperStyle {
    WrapperStyle::GalacticaSmilesTags
}

impl Default for ViewsConfig {
    fn default() -> ViewsConfig {
        ViewsConfig {
            structure: true,
            task: true,
            rule: true,
            task_question: None,
            wrapper_style: WrapperStyle::GalacticaSmilesTags,
        }
    }
}

impl ViewsConfig {
    pub fn enabled(&self) -> Vec<ViewKind> {
        let mut kinds = Vec::new();
        if self.structure {
            kinds.push(ViewKind::Structure);
        }
        if self.task {
            kinds.push(ViewKind::Task);
        }
        if self.rule {
            kinds.push(ViewKind::Rule);
        }
        kinds
    }
}

#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    #[serde(default = "default_split_train")]
    pub train: f64,
    #[serde(default = "default_split_rest")]
    pub valid: f64,
    #[serde(default = "default_split_rest")]
    pub test: f64,
}

fn default_split_train() -> f64 {
    0.8
}

fn default_split_rest() -> f64 {
    0.1
}

impl Default for SplitConfig {
    fn default() -> SplitConfig {
        SplitConfig {
            train: 0.8,
            valid: 0.1,
            test: 0.1,
        }
    }
}

impl SplitConfig {
    pub fn fractions(&self) -> (f64, f64, f64) {
        (self.train, self.valid, self.test)
    }
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_train_batch")]
    pub batch_size: usize,
    #[serde(default = "default_hidden_dim")]
    pub hidden_dim: usize,
    #[serde(default = "default_mlp_hidden")]
    pub mlp_hidden: Vec<usize>,
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    /// Consecutive epochs without validation improvement before stopping;
    /// 0 disables early stopping.
    #[serde(default = "default_patience")]
    pub patience: usize,
    #[serde(default = "default_init_scale")]
    pub init_scale: f64,
    /// One training run (checkpoint, log) per seed.
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
}

fn default_epochs() -> usize {
    50
}

fn default_train_batch() -> usize {
    32
}

fn default_hidden_dim() -> usize {
    32
}

fn default_mlp_hidden() -> Vec<usize> {
    vec![32]
}

fn default_learning_rate() -> f64 {
    1e-3
}

fn default_patience() -> usize {
    10
}

fn default_init_scale() -> f64 {
    1.0
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

impl Default for TrainSection {
    fn default() -> TrainSection {
        TrainSection {
            epochs: default_epochs(),
            batch_size: default_train_batch(),
            hidden_dim: default_hidden_dim(),
            mlp_hidden: default_mlp_hidden(),
            learning_rate: default_learning_rate(),
            patience: default_patience(),
            init_scale: default_init_scale(),
            seeds: default_seeds(),
        }
    }
}

impl TrainSection {
    /// Early-stopping patience as the trainer wants it; 0 means disabled.
    pub fn patience_option(&self) -> Option<usize> {
        (self.patience > 0).then_some(self.patience)
    }
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PromptsConfig {
    /// How the task is described in the scientific rule prompt
    /// (e.g. "predicting blood-brain barrier penetration").
    #[serde(default)]
    pub task_description: Option<String>,
    /// What label 1 means in the data-pattern rule prompt
    /// (e.g. "BBBP").
    #[serde(default)]
    pub label_meaning: Option<String>,
    #[serde(default = "default_scientific_rule_count")]
    pub scientific_rule_count: usize,
    #[serde(default = "default_data_rule_count")]
    pub data_rule_count: usize,
    /// Number of labeled subsets sampled for data-pattern prompts.
    #[serde(default = "default_data_subset_count")]
    pub data_subset_count: usize,
    #[serde(default = "default_data_subset_size")]
    pub data_subset_size: usize,
    #[serde(default)]
    pub data_subset_seed: u64,
}

fn default_scientific_rule_count() -> usize {
    20
}

fn default_data_rule_count() -> usize {
    3
}

fn default_data_subset_count() -> usize {
    2
}

fn default_data_subset_size() -> usize {
    20
}

impl Default for PromptsConfig {
    fn default() -> PromptsConfig {
        PromptsConfig {
            task_description: None,
            label_meaning: None,
            scientific_rule_count: default_scientific_rule_count(),
            data_rule_count: default_data_rule_count(),
            data_subset_count: default_data_subset_count(),
            data_subset_size: default_data_subset_size(),
            data_subset_seed: 0,
        }
    }
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

/// Command-line overrides applied on top of the file.
#[derive(Clone, Default, Debug)]
pub struct Overrides {
    pub seed: Option<u64>,
    /// Comma-separated subset of {structure, task, rule}.
    pub views: Option<String>,
    pub out: Option<PathBuf>,
    /// Currently only "mock" is accepted.
    pub provider: Option<String>,
}

pub fn load_config(path: &Path, overrides: &Overrides) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    let mut config: RunConfig = toml::from_str(&text)
        .with_context(|| format!("config file {} is not valid", path.display()))?;

    // Paths in the file are relative to the file itself.
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    config.dataset.path = resolve(base, &config.dataset.path);
    config.rules.path = resolve(base, &config.rules.path);
    config.output.dir = resolve(base, &config.output.dir);

    apply_overrides(&mut config, overrides)?;
    validate(&config)?;
    Ok(config)
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn apply_overrides(config: &mut RunConfig, overrides: &Overrides) -> Result<()> {
    if let Some(seed) = overrides.seed {
        config.train.seeds = vec![seed];
    }
    if let Some(out) = &overrides.out {
        config.output.dir = out.clone();
    }
    if let Some(views) = &overrides.views {
        config.views.structure = false;
        config.views.task = false;
        config.views.rule = false;
        for part in views.split(',') {
            match part.trim() {
                "structure" | "struct" => config.views.structure = true,
                "task" => config.views.task = true,
                "rule" | "rules" => config.views.rule = true,
                other => bail!("unknown view `{other}` (expected structure, task, rule)"),
            }
        }
    }
    if let Some(provider) = &overrides.provider {
        match provider.as_str() {
            "mock" => {
                if !matches!(config.provider, ProviderConfig::Mock { .. }) {
                    config.provider = ProviderConfig::Mock {
                        dim: default_mock_dim(),
                        seed: 0,
                        batch_size: default_batch_size(),
                    };
                }
            }
            other => bail!("unsupported provider override `{other}` (only `mock`)"),
        }
    }
    Ok(())
}

pub fn validate(config: &RunConfig) -> Result<()> {
    if config.views.enabled().is_empty() {
        bail!("at least one view must be enabled");
    }
    if config.dataset.label_columns.is_empty() {
        bail!("dataset.label_columns must name at least one column");
    }
    if config.dataset.task_kind == TaskKind::Regression && config.dataset.label_columns.len() > 1 {
        bail!("regression supports exactly one label column");
    }
    if config.views.task && config.views.task_question.is_none() {
        bail!("views.task_question is required while the task view is enabled");
    }
    let (t, v, s) = config.split.fractions();
    if !(t > 0.0 && v > 0.0 && s > 0.0) || ((t + v + s) - 1.0).abs() > 1e-9 {
        bail!("split fractions must be positive and sum to 1 (got {t}, {v}, {s})");
    }
    if config.train.seeds.is_empty() {
        bail!("train.seeds must list at least one seed");
    }
    if config.train.batch_size == 0 || config.train.epochs == 0 || config.train.hidden_dim == 0 {
        bail!("train.epochs, train.batch_size, and train.hidden_dim must be at least 1");
    }
    if config.provider.batch_size() == 0 {
        bail!("provider.batch_size must be at least 1");
    }
    Ok(())
}

/// The model's output head for this dataset.
pub fn head_for(config: &RunConfig) -> mvmol_core::model::OutputHead {
    use mvmol_core::model::OutputHead;
    match config.dataset.task_kind {
        TaskKind::Regression => OutputHead::LinearScalar,
        TaskKind::Classification => {
            if config.dataset.label_columns.len() == 1 {
                OutputHead::SigmoidScalar
            } else {
                OutputHead::SigmoidMultitask(config.dataset.label_columns.len())
            }
        }
    }
}
