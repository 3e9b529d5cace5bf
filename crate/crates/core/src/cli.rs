//! The `isocrf` command line.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::corpus::{parse_corpus, Discussion, LabelSource};
use crate::crf::{train, TrainConfig};
use crate::error::{Error, Result};
use crate::eval::{chi2_rank, collapse_labels, downsample, polarity_baseline, score, write_chi2_tsv, ScoreMode};
use crate::features::{write_feature_dump, FeatureExtractor, FeatureFamily, FeatureGroupConfig, UnitContext};
use crate::lexicon::Lexicon;
use crate::lexicon_builder::{build_lexicon, load_seeds, BuilderConfig};
use crate::pipeline::{
    align, fit_extractor, gold_units, read_three_way, training_sequences, write_predictions, write_three_way, Tagger,
    UnitKey,
};

pub const EXIT_UNKNOWN_COMMAND: i32 = 2;
pub const EXIT_USAGE: i32 = 3;
pub const EXIT_UNREADABLE: i32 = 4;
pub const EXIT_DATA: i32 = 5;
pub const EXIT_TRAINING: i32 = 6;

#[derive(Parser, Debug)]
#[command(
    name = "isocrf",
    version,
    about = "Ordinal (dis)agreement tagging with isotonic CRFs"
)]
pub struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "ISOCRF_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Induce a domain sentiment lexicon from a discussion corpus.
    LexiconBuild(LexiconBuildArgs),
    /// Train a CRF tagger, optionally with isotonic constraints.
    Train(TrainArgs),
    /// Tag every unit of a corpus with a trained model.
    Tag(TagArgs),
    /// Score predictions against gold labels.
    Eval(EvalArgs),
    /// Dump extracted features, optionally with a χ² ranking.
    Features(FeaturesArgs),
    /// Lexicon polarity-count baseline.
    Baseline(BaselineArgs),
}

#[derive(Args, Debug)]
pub struct LexiconBuildArgs {
    /// Discussion corpus (JSON lines).
    #[arg(long)]
    pub corpus: PathBuf,
    /// MPQA-style seed list.
    #[arg(long)]
    pub seeds_mpqa: Option<PathBuf>,
    /// General Inquirer-style seed list.
    #[arg(long)]
    pub seeds_gi: Option<PathBuf>,
    /// SentiWordNet-style seed list.
    #[arg(long)]
    pub seeds_swn: Option<PathBuf>,
    /// Propagation iterations.
    #[arg(long, default_value_t = 10)]
    pub iters: usize,
    /// Minimum |score| for a unit to enter the lexicon.
    #[arg(long, default_value_t = 0.2)]
    pub theta: f64,
    #[arg(long, default_value_t = 5)]
    pub min_participants: usize,
    #[arg(long, default_value_t = 10)]
    pub min_discussions: usize,
    /// PMI vector length.
    #[arg(long, default_value_t = 50)]
    pub top_k: usize,
    /// Output lexicon TSV (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct FeatureArgs {
    /// Comma-separated families: lexical, discourse, syntactic, conversation, sentiment
    /// (default: all, minus sentiment when no lexicon is given).
    #[arg(long, value_delimiter = ',')]
    pub families: Option<Vec<FeatureFamily>>,
    #[arg(long)]
    pub hedges: Option<PathBuf>,
    #[arg(long)]
    pub negators: Option<PathBuf>,
    #[arg(long)]
    pub connectives: Option<PathBuf>,
    /// Max token distance between a connective and a sentiment word.
    #[arg(long, default_value_t = 3)]
    pub connective_window: usize,
}

impl FeatureArgs {
    fn config(&self, lexicon: Option<&Path>) -> FeatureGroupConfig {
        let families = match &self.families {
            Some(f) => f.iter().copied().collect(),
            None => FeatureFamily::ALL
                .into_iter()
                .filter(|f| lexicon.is_some() || *f != FeatureFamily::Sentiment)
                .collect(),
        };
        FeatureGroupConfig {
            families,
            hedges: self.hedges.clone(),
            negators: self.negators.clone(),
            connectives: self.connectives.clone(),
            sentiment_lexicon: lexicon.map(Path::to_path_buf),
            connective_window: self.connective_window,
        }
    }

    fn paths(&self) -> Vec<&Path> {
        [&self.hedges, &self.negators, &self.connectives]
            .into_iter()
            .flatten()
            .map(PathBuf::as_path)
            .collect()
    }
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Sentiment lexicon TSV; feeds sentiment features and isotonic constraints.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Constrain lexicon-matched emission weights to be monotone.
    #[arg(long, requires = "lexicon")]
    pub isotonic: bool,
    /// Output model file.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = LabelSource::Gold)]
    pub label_source: LabelSource,
    /// Drop training turns whose units are all O.
    #[arg(long)]
    pub downsample: bool,
    #[arg(long, default_value_t = 10.0)]
    pub l2_variance: f64,
    #[arg(long, default_value_t = 300)]
    pub max_iterations: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
    /// Seeds every random choice.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub features: FeatureArgs,
}

#[derive(Args, Debug)]
pub struct TagArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    /// Output predictions TSV (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Corpus with gold labels.
    #[arg(long)]
    pub gold: PathBuf,
    /// Predictions TSV from `tag` or `baseline`.
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long, value_enum, default_value_t = ScoreMode::Strict)]
    pub mode: ScoreMode,
    #[arg(long, value_enum, default_value_t = LabelSource::Gold)]
    pub label_source: LabelSource,
    /// Report TSV (class, precision, recall, f1, mode).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Human-readable table.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FeaturesArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Sentiment lexicon for sentiment features.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Feature dump TSV (unit id, feature).
    #[arg(long)]
    pub out: PathBuf,
    /// Also write a χ² ranking against the 3-way labels.
    #[arg(long)]
    pub chi2: Option<PathBuf>,
    /// Rank every (feature, class) pair instead of each feature's best class.
    #[arg(long, requires = "chi2")]
    pub per_class: bool,
    #[arg(long, value_enum, default_value_t = LabelSource::Gold)]
    pub label_source: LabelSource,
    #[command(flatten)]
    pub features: FeatureArgs,
}

#[derive(Args, Debug)]
pub struct BaselineArgs {
    #[arg(long)]
    pub lexicon: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    /// Output 3-way predictions TSV (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `argv` (program name first), runs the subcommand, and returns the
/// process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                ErrorKind::InvalidSubcommand => EXIT_UNKNOWN_COMMAND,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } => EXIT_UNREADABLE,
        Error::Config(_) => EXIT_USAGE,
        Error::Training { .. } => EXIT_TRAINING,
        _ => EXIT_DATA,
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::LexiconBuild(a) => lexicon_build(a),
        Command::Train(a) => train_cmd(a),
        Command::Tag(a) => tag(a),
        Command::Eval(a) => eval_cmd(a),
        Command::Features(a) => features_cmd(a),
        Command::Baseline(a) => baseline(a),
    })
}

fn check_readable<'a>(paths: impl IntoIterator<Item = &'a Path>) -> Result<()> {
    for p in paths {
        File::open(p).map_err(|e| Error::io(p, e))?;
    }
    Ok(())
}

fn read_corpus(path: &Path) -> Result<Vec<Discussion>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(BufReader::new(f))
}

/// Writes to `path`, or to stdout when absent. Returns whether stdout was used.
fn with_output(path: Option<&Path>, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<bool> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| Error::io(p, e))?;
            let mut w = BufWriter::new(f);
            body(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(p, e))?;
            Ok(false)
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            body(&mut w)
                .and_then(|_| w.flush())
                .map_err(|e| Error::io("<stdout>", e))?;
            Ok(true)
        }
    }
}

/// The summary goes to stderr when stdout already carries the data.
fn summary(value: serde_json::Value, data_on_stdout: bool) {
    if data_on_stdout {
        eprintln!("{value}");
    } else {
        println!("{value}");
    }
}

fn lexicon_build(a: &LexiconBuildArgs) -> Result<()> {
    let seeds = [&a.seeds_mpqa, &a.seeds_gi, &a.seeds_swn];
    check_readable(std::iter::once(a.corpus.as_path()).chain(seeds.iter().filter_map(|p| p.as_deref())))?;
    if seeds.iter().all(|s| s.is_none()) {
        return Err(Error::Config(
            "give at least one of --seeds-mpqa, --seeds-gi, --seeds-swn".into(),
        ));
    }
    let corpus = read_corpus(&a.corpus)?;
    let seeds = load_seeds(a.seeds_mpqa.as_deref(), a.seeds_gi.as_deref(), a.seeds_swn.as_deref())?;
    let config = BuilderConfig {
        min_participants: a.min_participants,
        min_discussions: a.min_discussions,
        top_k: a.top_k,
        iterations: a.iters,
        theta: a.theta,
    };
    let built = build_lexicon(&corpus, &seeds, &config)?;
    let stdout = with_output(a.out.as_deref(), |w| built.lexicon.write(w))?;
    summary(
        json!({
            "command": "lexicon-build",
            "discussions": built.discussions_used,
            "seeds": seeds.len(),
            "nodes": built.graph.node_count(),
            "edges": built.graph.edge_count(),
            "entries": built.lexicon.len(),
            "positive": built.lexicon.positive().count(),
            "negative": built.lexicon.negative().count(),
        }),
        stdout,
    );
    Ok(())
}

fn train_cmd(a: &TrainArgs) -> Result<()> {
    check_readable(
        std::iter::once(a.corpus.as_path())
            .chain(a.lexicon.as_deref())
            .chain(a.features.paths()),
    )?;
    let config = TrainConfig {
        l2_variance: a.l2_variance,
        max_iterations: a.max_iterations,
        relative_tolerance: a.tolerance,
        seed: a.seed,
    };
    config.validate()?;
    let corpus = read_corpus(&a.corpus)?;
    let lexicon = a.lexicon.as_deref().map(Lexicon::load).transpose()?;

    let mut extractor = FeatureExtractor::new(&a.features.config(a.lexicon.as_deref()))?;
    fit_extractor(&mut extractor, &corpus);
    let mut data = training_sequences(&corpus, &extractor, a.label_source)?;
    let before = data.len();
    if a.downsample {
        data = downsample(data);
        log::info!("downsampling kept {} of {before} turns", data.len());
    }
    let constraints = if a.isotonic { lexicon.as_ref() } else { None };
    let (model, report) = train(&data, constraints, &config)?;
    let tagger = Tagger { model, extractor };
    tagger.save(&a.out)?;
    summary(
        json!({
            "command": "train",
            "sequences": data.len(),
            "units": data.iter().map(|s| s.len()).sum::<usize>(),
            "features": tagger.model.feature_index().len(),
            "constrained_features": report.constrained_features,
            "iterations": report.iterations,
            "converged": report.converged,
            "objective": report.objective,
            "model": a.out,
        }),
        false,
    );
    Ok(())
}

fn tag(a: &TagArgs) -> Result<()> {
    check_readable([a.model.as_path(), a.corpus.as_path()])?;
    let tagger = Tagger::load(&a.model)?;
    let corpus = read_corpus(&a.corpus)?;
    let predictions = tagger.tag(&corpus)?;
    let stdout = with_output(a.out.as_deref(), |w| write_predictions(w, &predictions))?;
    let mut counts = [0usize; 3];
    for p in &predictions {
        counts[collapse_labels(p.label).index()] += 1;
    }
    summary(
        json!({
            "command": "tag",
            "units": predictions.len(),
            "agreement": counts[0],
            "disagreement": counts[1],
            "neutral": counts[2],
        }),
        stdout,
    );
    Ok(())
}

fn eval_cmd(a: &EvalArgs) -> Result<()> {
    check_readable([a.gold.as_path(), a.pred.as_path()])?;
    let corpus = read_corpus(&a.gold)?;
    let gold = gold_units(&corpus, a.label_source)?;
    let f = File::open(&a.pred).map_err(|e| Error::io(&a.pred, e))?;
    let pred = read_three_way(BufReader::new(f))?;
    let (g, p) = align(&gold, &pred)?;
    let report = score(&g, &p, a.mode)?;
    if let Some(path) = &a.out {
        with_output(Some(path), |w| report.write_tsv(w))?;
    }
    if let Some(path) = &a.table {
        with_output(Some(path), |w| w.write_all(report.table().as_bytes()))?;
    }
    eprint!("{}", report.table());
    let class = |c: crate::eval::ThreeWay| {
        let s = report.get(c);
        json!({"precision": s.precision, "recall": s.recall, "f1": s.f1})
    };
    summary(
        json!({
            "command": "eval",
            "mode": a.mode.to_string(),
            "units": g.len(),
            "agreement": class(crate::eval::ThreeWay::Agreement),
            "disagreement": class(crate::eval::ThreeWay::Disagreement),
            "neutral": class(crate::eval::ThreeWay::Neutral),
            "macro_f1": report.macro_f1(),
        }),
        false,
    );
    Ok(())
}

fn features_cmd(a: &FeaturesArgs) -> Result<()> {
    check_readable(
        std::iter::once(a.corpus.as_path())
            .chain(a.lexicon.as_deref())
            .chain(a.features.paths()),
    )?;
    let corpus = read_corpus(&a.corpus)?;
    let mut extractor = FeatureExtractor::new(&a.features.config(a.lexicon.as_deref()))?;
    fit_extractor(&mut extractor, &corpus);
    let mut rows = Vec::new();
    let mut labeled = Vec::new();
    for d in &corpus {
        for t in &d.turns {
            let ctx = UnitContext::for_turn(d, t);
            for (i, u) in t.units.iter().enumerate() {
                let fv = extractor.extract(u, &ctx)?;
                if a.chi2.is_some() {
                    if let Some(l) = a.label_source.resolve(u)? {
                        labeled.push((fv.clone(), collapse_labels(l)));
                    }
                }
                rows.push((format!("{}/{}/{i}", d.id, t.id), fv));
            }
        }
    }
    let n_units = rows.len();
    let distinct: std::collections::BTreeSet<String> =
        rows.iter().flat_map(|(_, fv)| fv.names().map(str::to_string)).collect();
    with_output(Some(&a.out), |w| write_feature_dump(w, rows))?;
    let mut ranked = None;
    if let Some(path) = &a.chi2 {
        let ranking = chi2_rank(&labeled, a.per_class)?;
        with_output(Some(path), |w| write_chi2_tsv(w, &ranking))?;
        ranked = Some(ranking.len());
    }
    summary(
        json!({
            "command": "features",
            "units": n_units,
            "distinct_features": distinct.len(),
            "chi2_entries": ranked,
        }),
        false,
    );
    Ok(())
}

fn baseline(a: &BaselineArgs) -> Result<()> {
    check_readable([a.lexicon.as_path(), a.corpus.as_path()])?;
    let lexicon = Lexicon::load(&a.lexicon)?;
    let corpus = read_corpus(&a.corpus)?;
    let mut predictions = Vec::new();
    for d in &corpus {
        for t in &d.turns {
            for (i, u) in t.units.iter().enumerate() {
                let key = UnitKey {
                    discussion_id: d.id.clone(),
                    turn_id: t.id.clone(),
                    unit_index: i,
                };
                predictions.push((key, polarity_baseline(u, &lexicon)));
            }
        }
    }
    let stdout = with_output(a.out.as_deref(), |w| write_three_way(w, &predictions))?;
    let mut counts = [0usize; 3];
    for (_, l) in &predictions {
        counts[l.index()] += 1;
    }
    summary(
        json!({
            "command": "baseline",
            "units": predictions.len(),
            "agreement": counts[0],
            "disagreement": counts[1],
            "neutral": counts[2],
        }),
        stdout,
    );
    Ok(())
}
