//! Command-line front end. Every flag can also come from an environment
//! variable; an explicit flag wins.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sopcheck_core::classifiers::{ClassifierKind, ClassifierSpec};
use sopcheck_core::corpus::{load_corpus, Corpus};
use sopcheck_core::embedding::{load_embeddings, EmbeddingTable};
use sopcheck_core::evaluation::{
    ablate, evaluate, render_grid_csv, render_grid_text, render_metrics_csv, render_metrics_text, EvalOptions,
    EvalReport, Protocol,
};
use sopcheck_core::features::{
    parse_sets, FeatureConfig, FeatureResources, ReferenceMode, ResourcePaths, Weighting,
};
use sopcheck_core::model::{train_model, EvaluationResponse, TrainedModel};
use sopcheck_core::pipeline::{analyze_corpus, feature_matrix};
use sopcheck_core::text::LexicalResources;
use sopcheck_core::Error;

#[derive(Debug, Parser)]
#[command(name = "sopcheck", version, about = "Accept/reject prediction for statement-of-purpose essays")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the feature matrix of a corpus as CSV.
    Extract(ExtractArgs),
    /// Train a model on a whole corpus and save it.
    Train(TrainArgs),
    /// Cross-validate one or more classifiers and write reports.
    Cv(CvArgs),
    /// Run the 7 x 4 feature-set ablation grid and write reports.
    Ablate(AblateArgs),
    /// Classify one essay with a saved model.
    Predict(PredictArgs),
    /// Serve a saved model over HTTP.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ResourceArgs {
    /// Word embedding table in text format.
    #[arg(long, env = "SOPCHECK_EMBEDDINGS")]
    pub embeddings: Option<PathBuf>,
    /// Table for adjacent-sentence similarity; defaults to --embeddings.
    #[arg(long, env = "SOPCHECK_GLOVE")]
    pub glove: Option<PathBuf>,
    /// Required embedding dimension; rows of another width are rejected.
    #[arg(long, env = "SOPCHECK_EMBEDDING_DIM")]
    pub embedding_dim: Option<usize>,
    /// Directory overriding the bundled lexical resources.
    #[arg(long, env = "RESOURCE_DIR")]
    pub resource_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum WeightingArg {
    Tfidf,
    Tf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ReferenceArg {
    TrainingFold,
    AllAccepted,
}

#[derive(Debug, Clone, Args)]
pub struct FeatureArgs {
    /// Feature configuration JSON; the flags below override it.
    #[arg(long, env = "SOPCHECK_FEATURE_CONFIG")]
    pub feature_config: Option<PathBuf>,
    /// Feature sets, e.g. "SE+WE" or "T,WE,SE".
    #[arg(long, env = "SOPCHECK_FEATURES")]
    pub features: Option<String>,
    /// Add the named-entity count to the textual set.
    #[arg(long, env = "SOPCHECK_NE_COUNT")]
    pub ne_count: bool,
    /// Add adjacent-sentence mean/max similarity to the SE set.
    #[arg(long, env = "SOPCHECK_ADJACENT_SIMILARITY")]
    pub adjacent_similarity: bool,
    /// Report counts per 1000 words.
    #[arg(long, env = "SOPCHECK_NORMALIZE_COUNTS")]
    pub normalize_counts: bool,
    #[arg(long, value_enum, env = "SOPCHECK_WEIGHTING")]
    pub weighting: Option<WeightingArg>,
    #[arg(long, value_enum, env = "SOPCHECK_REFERENCE_MODE")]
    pub reference_mode: Option<ReferenceArg>,
}

#[derive(Debug, Clone, Args)]
pub struct ClassifierArgs {
    /// Classifier kind: svm, lr, rfdt, mlp or ffnn.
    #[arg(long = "model", env = "SOPCHECK_CLASSIFIER", default_value = "svm")]
    pub kind: ClassifierKind,
    /// Classifier hyperparameters as JSON; `kind` in the file is ignored.
    #[arg(long, env = "SOPCHECK_CLASSIFIER_CONFIG")]
    pub classifier_config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Corpus in JSON Lines.
    #[arg(long, env = "SOPCHECK_CORPUS")]
    pub corpus: PathBuf,
    /// Output CSV file.
    #[arg(long, env = "SOPCHECK_OUT")]
    pub out: PathBuf,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[command(flatten)]
    pub resources: ResourceArgs,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, env = "SOPCHECK_CORPUS")]
    pub corpus: PathBuf,
    /// Output model file.
    #[arg(long, env = "SOPCHECK_OUT")]
    pub out: PathBuf,
    #[arg(long, env = "SOPCHECK_SEED", default_value_t = 7)]
    pub seed: u64,
    #[command(flatten)]
    pub classifier: ClassifierArgs,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[command(flatten)]
    pub resources: ResourceArgs,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[arg(long, env = "SOPCHECK_CORPUS")]
    pub corpus: PathBuf,
    /// Output directory for report.txt, report.csv, predictions.csv,
    /// config.json and seeds.txt.
    #[arg(long, env = "SOPCHECK_OUT")]
    pub out: PathBuf,
    #[arg(long, env = "SOPCHECK_K", default_value_t = 10)]
    pub k: usize,
    /// Use a stratified holdout with this training fraction instead of k folds.
    #[arg(long, env = "SOPCHECK_HOLDOUT")]
    pub holdout: Option<f64>,
    #[arg(long, env = "SOPCHECK_SEED", default_value_t = 7)]
    pub seed: u64,
    /// Classifiers to evaluate, comma separated.
    #[arg(long = "models", env = "SOPCHECK_CLASSIFIERS", value_delimiter = ',', default_value = "svm")]
    pub kinds: Vec<ClassifierKind>,
    #[arg(long, env = "SOPCHECK_CLASSIFIER_CONFIG")]
    pub classifier_config: Option<PathBuf>,
    /// Average per-fold metrics instead of pooling confusion counts.
    #[arg(long, env = "SOPCHECK_PER_FOLD_AVERAGE")]
    pub per_fold_average: bool,
    /// Skip the per-fold leakage audit.
    #[arg(long, env = "SOPCHECK_NO_AUDIT")]
    pub no_audit: bool,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[command(flatten)]
    pub resources: ResourceArgs,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    #[arg(long, env = "SOPCHECK_CORPUS")]
    pub corpus: PathBuf,
    /// Output directory for grid.txt, grid.csv, config.json and seeds.txt.
    #[arg(long, env = "SOPCHECK_OUT")]
    pub out: PathBuf,
    #[arg(long, env = "SOPCHECK_SEED", default_value_t = 7)]
    pub seed: u64,
    /// Additional seeds for a per-cell spread, comma separated.
    #[arg(long, env = "SOPCHECK_EXTRA_SEEDS", value_delimiter = ',')]
    pub extra_seeds: Vec<u64>,
    #[command(flatten)]
    pub classifier: ClassifierArgs,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[command(flatten)]
    pub resources: ResourceArgs,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Saved model file.
    #[arg(long = "model", env = "MODEL_PATH")]
    pub model: PathBuf,
    /// Essay text file, or "-" for standard input.
    #[arg(long, env = "SOPCHECK_ESSAY")]
    pub essay: PathBuf,
    /// Print the full response as JSON.
    #[arg(long, env = "SOPCHECK_JSON")]
    pub json: bool,
    #[command(flatten)]
    pub resources: ResourceArgs,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long = "model", env = "MODEL_PATH")]
    pub model: PathBuf,
    #[arg(long, env = "PORT", default_value_t = 8080)]
    pub port: u16,
    #[arg(long, env = "SOPCHECK_HOST", default_value = "127.0.0.1")]
    pub host: String,
    #[command(flatten)]
    pub resources: ResourceArgs,
}

/// Failure of a subcommand, split by exit status.
#[derive(Debug)]
pub enum CliError {
    /// Missing input or resource: exit 2.
    Usage(String),
    /// The pipeline itself failed: exit 1.
    Pipeline(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Pipeline(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Pipeline(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::MissingResource(_) => CliError::Usage(e.to_string()),
            e => CliError::Pipeline(e),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn require_file(path: &Path, what: &str) -> CliResult<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{what} {} not found", path.display())))
    }
}

fn read_text(path: &Path, what: &str) -> CliResult<String> {
    require_file(path, what)?;
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{what} {}: {e}", path.display())))
}

fn write_text(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|e| {
        CliError::Pipeline(Error::Evaluation(format!("writing {}: {e}", path.display())))
    })
}

fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Pipeline(Error::Evaluation(format!("creating {}: {e}", dir.display()))))
}

fn corpus(path: &Path) -> CliResult<Corpus> {
    require_file(path, "corpus")?;
    Ok(load_corpus(path)?)
}

impl FeatureArgs {
    pub fn config(&self, resources: &ResourceArgs) -> CliResult<FeatureConfig> {
        let mut config = match &self.feature_config {
            Some(p) => FeatureConfig::from_json(&read_text(p, "feature config")?)?,
            None => FeatureConfig::default(),
        };
        if let Some(s) = &self.features {
            config.sets = parse_sets(s)?;
        }
        if self.ne_count {
            config.set_ne_count(true);
        }
        if self.adjacent_similarity {
            config.set_adjacent_similarity(true);
        }
        if self.normalize_counts {
            config.normalize_counts = true;
        }
        match self.weighting {
            Some(WeightingArg::Tf) => config.weighting = Weighting::Tf,
            Some(WeightingArg::Tfidf) => config.weighting = Weighting::TfIdf,
            None => {}
        }
        match self.reference_mode {
            Some(ReferenceArg::TrainingFold) => config.reference_mode = ReferenceMode::TrainingFold,
            Some(ReferenceArg::AllAccepted) => config.reference_mode = ReferenceMode::AllAccepted,
            None => {}
        }
        config.resources = ResourcePaths {
            embeddings: resources.embeddings.clone(),
            glove: resources.glove.clone(),
            resource_dir: resources.resource_dir.clone(),
        };
        config.canonicalize();
        config.validate()?;
        Ok(config)
    }
}

fn table(path: &Path, dim: Option<usize>) -> CliResult<Arc<EmbeddingTable>> {
    require_file(path, "embedding table")?;
    Ok(Arc::new(load_embeddings(path, dim)?))
}

impl ResourceArgs {
    /// Flags first, then the paths recorded in `fallback`.
    pub fn load(&self, fallback: Option<&ResourcePaths>) -> CliResult<FeatureResources> {
        let pick = |flag: &Option<PathBuf>, saved: fn(&ResourcePaths) -> &Option<PathBuf>| {
            flag.clone().or_else(|| fallback.and_then(|f| saved(f).clone()))
        };
        let resource_dir = pick(&self.resource_dir, |r| &r.resource_dir);
        let lexical = match resource_dir {
            Some(dir) => Arc::new(LexicalResources::from_dir(dir)?),
            None => LexicalResources::bundled_shared(),
        };
        let embeddings = match pick(&self.embeddings, |r| &r.embeddings) {
            Some(p) => Some(table(&p, self.embedding_dim)?),
            None => None,
        };
        let glove = match pick(&self.glove, |r| &r.glove) {
            Some(p) => Some(table(&p, None)?),
            None => embeddings.clone(),
        };
        Ok(FeatureResources::new(lexical, embeddings, glove))
    }
}

impl ClassifierArgs {
    pub fn spec(&self) -> CliResult<ClassifierSpec> {
        spec_for(self.kind, self.classifier_config.as_deref())
    }
}

fn spec_for(kind: ClassifierKind, config: Option<&Path>) -> CliResult<ClassifierSpec> {
    let mut spec = match config {
        Some(p) => serde_json::from_str(&read_text(p, "classifier config")?)
            .map_err(|e| CliError::Pipeline(Error::Training(format!("classifier config: {e}"))))?,
        None => ClassifierSpec::default(),
    };
    spec.kind = kind;
    Ok(spec)
}

/// Settings written next to every report so a run can be repeated.
#[derive(Serialize)]
struct RunConfig<'a> {
    feature_config: &'a FeatureConfig,
    config_hash: String,
    classifiers: &'a [ClassifierSpec],
    #[serde(skip_serializing_if = "Option::is_none")]
    protocol: Option<Protocol>,
    seed: u64,
    #[serde(skip_serializing_if = "<[u64]>::is_empty")]
    extra_seeds: &'a [u64],
}

fn run_config(run: &RunConfig) -> String {
    let mut s = serde_json::to_string_pretty(run).expect("run config serializes");
    s.push('\n');
    s
}

fn seeds_file(seed: u64, extra: &[u64]) -> String {
    let mut s = format!("seed {seed}\n");
    for e in extra {
        s.push_str(&format!("extra_seed {e}\n"));
    }
    s
}

fn predictions_csv(reports: &[EvalReport]) -> String {
    let mut s = String::from("classifier,id,fold,gold,predicted,decision_value\n");
    for r in reports {
        for p in &r.predictions {
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.classifier, p.id, p.fold, p.gold, p.predicted, p.decision_value
            ));
        }
    }
    s
}

pub fn run_extract(args: &ExtractArgs) -> CliResult<()> {
    let config = args.features.config(&args.resources)?;
    let corpus = corpus(&args.corpus)?;
    let res = args.resources.load(None)?;
    let data = analyze_corpus(&corpus, &config, &res)?;
    let matrix = feature_matrix(&data, &config)?;
    write_text(&args.out, &matrix.to_csv())?;
    log::info!("wrote {} rows x {} features to {}", matrix.rows.len(), matrix.names.len(), args.out.display());
    Ok(())
}

pub fn run_train(args: &TrainArgs) -> CliResult<()> {
    let config = args.features.config(&args.resources)?;
    let spec = args.classifier.spec()?;
    let corpus = corpus(&args.corpus)?;
    let res = args.resources.load(None)?;
    let data = analyze_corpus(&corpus, &config, &res)?;
    let model = train_model(&data, &config, &spec, args.seed)?;
    if let Some(note) = model.model.convergence_note() {
        log::warn!("{note}");
    }
    model.save(&args.out)?;
    println!("model_id: {}", model.model_id);
    println!("config_hash: {}", model.config_hash);
    Ok(())
}

pub fn run_cv(args: &CvArgs) -> CliResult<()> {
    let config = args.features.config(&args.resources)?;
    let specs = args
        .kinds
        .iter()
        .map(|k| spec_for(*k, args.classifier_config.as_deref()))
        .collect::<CliResult<Vec<_>>>()?;
    let corpus = corpus(&args.corpus)?;
    let res = args.resources.load(None)?;
    let data = analyze_corpus(&corpus, &config, &res)?;
    let protocol = match args.holdout {
        Some(f) => Protocol::Holdout { train_fraction: f },
        None => Protocol::KFold { k: args.k },
    };
    let opts = EvalOptions {
        protocol,
        seed: args.seed,
        per_fold_average: args.per_fold_average,
        audit: !args.no_audit,
    };
    let reports = specs
        .iter()
        .map(|spec| evaluate(&data, &config, spec, &opts))
        .collect::<sopcheck_core::Result<Vec<_>>>()?;
    for r in &reports {
        for note in &r.notes {
            log::warn!("{}: {note}", r.classifier);
        }
    }
    create_dir(&args.out)?;
    let text = render_metrics_text(&reports);
    write_text(&args.out.join("report.txt"), &text)?;
    write_text(&args.out.join("report.csv"), &render_metrics_csv(&reports))?;
    write_text(&args.out.join("predictions.csv"), &predictions_csv(&reports))?;
    write_text(
        &args.out.join("config.json"),
        &run_config(&RunConfig {
            feature_config: &config,
            config_hash: config.hash(),
            classifiers: &specs,
            protocol: Some(protocol),
            seed: args.seed,
            extra_seeds: &[],
        }),
    )?;
    write_text(&args.out.join("seeds.txt"), &seeds_file(args.seed, &[]))?;
    print!("{text}");
    Ok(())
}

pub fn run_ablate(args: &AblateArgs) -> CliResult<()> {
    let config = args.features.config(&args.resources)?;
    let spec = args.classifier.spec()?;
    let corpus = corpus(&args.corpus)?;
    let res = args.resources.load(None)?;
    let data = analyze_corpus(&corpus, &config, &res)?;
    let grid = ablate(&data, &config, &spec, args.seed, &args.extra_seeds)?;
    create_dir(&args.out)?;
    let text = render_grid_text(&grid);
    write_text(&args.out.join("grid.txt"), &text)?;
    write_text(&args.out.join("grid.csv"), &render_grid_csv(&grid))?;
    write_text(
        &args.out.join("config.json"),
        &run_config(&RunConfig {
            feature_config: &config,
            config_hash: config.hash(),
            classifiers: std::slice::from_ref(&spec),
            protocol: None,
            seed: args.seed,
            extra_seeds: &args.extra_seeds,
        }),
    )?;
    write_text(&args.out.join("seeds.txt"), &seeds_file(args.seed, &args.extra_seeds))?;
    print!("{text}");
    Ok(())
}

/// Loads a model and the resources its configuration needs.
pub fn load_model(path: &Path, resources: &ResourceArgs) -> CliResult<(TrainedModel, FeatureResources)> {
    require_file(path, "model")?;
    let model = TrainedModel::load(path)?;
    let res = resources.load(Some(&model.feature_config.resources))?;
    res.check(&model.feature_config)?;
    Ok((model, res))
}

pub fn render_response(r: &EvaluationResponse) -> String {
    let mut s = format!("label: {}\ndecision_value: {}\nmodel_id: {}\n", r.label, r.decision_value, r.model_id);
    for w in &r.warnings {
        s.push_str(&format!("warning: {w}\n"));
    }
    s.push_str("feature,raw,standardized\n");
    for f in &r.feature_breakdown {
        let std = f.standardized.map_or(String::new(), |v| v.to_string());
        s.push_str(&format!("{},{},{}\n", f.name, f.raw, std));
    }
    s
}

pub fn run_predict(args: &PredictArgs) -> CliResult<()> {
    let text = if args.essay.as_os_str() == "-" {
        let mut s = String::new();
        std::io::Read::read_to_string(&mut std::io::stdin(), &mut s)
            .map_err(|e| CliError::Usage(format!("reading standard input: {e}")))?;
        s
    } else {
        read_text(&args.essay, "essay")?
    };
    let (model, res) = load_model(&args.model, &args.resources)?;
    let response = model.evaluate(&text, &res)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&response).expect("response serializes"));
    } else {
        print!("{}", render_response(&response));
    }
    Ok(())
}

