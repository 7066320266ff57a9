use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use kannada_ocr::classify::{train, Models, TrainingConfig};
use kannada_ocr::decode::train_bigram;
use kannada_ocr::eval::synth::{training_sets, AtlasParams, AugmentParams};
use kannada_ocr::eval::{compose_synthetic_page, eval_page, EvalReport, GlyphAtlas, NoiseParams, PageParams};
use kannada_ocr::layout::format_uzn;
use kannada_ocr::pipeline::{parse_manifest, run_batch, Engine, PipelineConfig, PipelineError};
use kannada_ocr::preprocess::write_pgm;
use kannada_ocr::script::{load_registry, SymbolRegistry};

/// Optical character recognition for printed Kannada.
#[derive(Parser)]
#[command(name = "kannada-ocr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Recognise one page image (binary PGM).
    Ocr(OcrArgs),
    /// Recognise every page listed in a manifest.
    Batch(BatchArgs),
    /// Train the base and ottu classifiers from a glyph atlas.
    TrainClassifier(TrainClassifierArgs),
    /// Estimate symbol bigram probabilities from a Unicode text corpus.
    TrainBigram(TrainBigramArgs),
    /// Score recognised text against ground truth.
    Eval(EvalArgs),
    /// Generate synthetic glyph atlases and pages.
    #[command(subcommand)]
    Synth(SynthCommand),
}

#[derive(Args)]
struct EngineArgs {
    /// Engine configuration (TOML).
    #[arg(long, default_value = "kannada-ocr.toml")]
    config: PathBuf,
    /// Candidates kept per symbol for decoding.
    #[arg(long)]
    topk: Option<usize>,
}

#[derive(Args)]
struct OcrArgs {
    image: PathBuf,
    /// Zone file restricting recognition to text blocks.
    #[arg(long)]
    zones: Option<PathBuf>,
    #[command(flatten)]
    engine: EngineArgs,
    /// Text output path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the per-word box and confidence table here.
    #[arg(long)]
    words: Option<PathBuf>,
}

#[derive(Args)]
struct BatchArgs {
    /// Tab-separated lines: image, truth or `-`, zones or `-`.
    manifest: PathBuf,
    #[command(flatten)]
    engine: EngineArgs,
    /// Directory receiving page texts and reports.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct TrainClassifierArgs {
    /// Atlas directory written by `synth atlas`.
    atlas: PathBuf,
    /// Directory receiving base.model and ottu.model.
    #[arg(long)]
    out: PathBuf,
    /// TOML with optional [training] and [augment] tables.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Symbol registry (TSV); the built-in one when absent.
    #[arg(long)]
    registry: Option<PathBuf>,
}

#[derive(Args)]
struct TrainBigramArgs {
    /// UTF-8 corpus; words are whitespace separated.
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    registry: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Recognised text. Omit when using --manifest.
    ocr: Option<PathBuf>,
    /// Ground-truth text.
    truth: Option<PathBuf>,
    /// Tab-separated lines of `ocr-text truth-text` paths.
    #[arg(long, conflicts_with_all = ["ocr", "truth"])]
    manifest: Option<PathBuf>,
    /// Report table path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a JSON summary here.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Subcommand)]
enum SynthCommand {
    /// Render glyph variants for every recognition unit.
    Atlas {
        out: PathBuf,
        #[arg(long, default_value_t = 6)]
        variants: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        registry: Option<PathBuf>,
    },
    /// Compose a page image with exact ground truth.
    Page(SynthPageArgs),
}

#[derive(Args)]
struct SynthPageArgs {
    /// UTF-8 text to typeset.
    text: PathBuf,
    /// Atlas directory written by `synth atlas`.
    #[arg(long)]
    atlas: PathBuf,
    /// Output prefix; writes PREFIX.pgm, PREFIX.txt and PREFIX.uzn.
    #[arg(long)]
    out: PathBuf,
    /// Print vowel parts as separate glyphs.
    #[arg(long)]
    letterpress: bool,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    rotate: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    shear: f64,
    /// Salt-and-pepper probability.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    registry: Option<PathBuf>,
}

/// A failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

const CONFIG: u8 = 2;
const INPUT: u8 = 3;
const PROCESSING: u8 = 4;

fn fail(code: u8, message: impl Display) -> Failure {
    Failure {
        code,
        message: message.to_string(),
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        fail(e.exit_code() as u8, e)
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match cli.command {
        Command::Ocr(a) => ocr(a),
        Command::Batch(a) => batch(a),
        Command::TrainClassifier(a) => train_classifier(a),
        Command::TrainBigram(a) => train_bigram_cmd(a),
        Command::Eval(a) => eval(a),
        Command::Synth(SynthCommand::Atlas {
            out,
            variants,
            seed,
            registry,
        }) => synth_atlas(&out, variants, seed, registry.as_deref()),
        Command::Synth(SynthCommand::Page(a)) => synth_page(a),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| fail(INPUT, format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| fail(PROCESSING, format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| fail(PROCESSING, format!("{}: {e}", path.display())))
}

fn registry(path: Option<&Path>) -> Result<SymbolRegistry> {
    match path {
        Some(p) => load_registry(p).map_err(|e| fail(CONFIG, e)),
        None => Ok(SymbolRegistry::builtin()),
    }
}

fn engine(args: &EngineArgs) -> Result<Engine> {
    let mut cfg = PipelineConfig::load(&args.config)?;
    if let Some(k) = args.topk {
        cfg.top_k = k;
    }
    Ok(Engine::from_config(cfg)?)
}

fn ocr(a: OcrArgs) -> Result<()> {
    let engine = engine(&a.engine)?;
    let page = engine.recognize_file(&a.image, a.zones.as_deref())?;
    match &a.out {
        Some(p) => write_file(p, &page.text)?,
        None => print!("{}", page.text),
    }
    if let Some(p) = &a.words {
        write_file(p, page.word_report())?;
    }
    eprintln!("{} lines in {:.2} s", page.lines.len(), page.elapsed.as_secs_f64());
    Ok(())
}

fn batch(a: BatchArgs) -> Result<()> {
    let engine = engine(&a.engine)?;
    let text = read_text(&a.manifest)?;
    let entries = parse_manifest(&text, a.manifest.parent().unwrap_or(Path::new(".")))?;
    let result = run_batch(&engine, &entries, a.jobs)?;
    let mut failed = 0;
    for (entry, r) in &result.pages {
        match r {
            Ok(page) => write_file(&a.out.join(format!("{}.txt", entry.name())), &page.text)?,
            Err(e) => {
                failed += 1;
                eprintln!("{}: {e}", entry.image.display());
            }
        }
    }
    if let Some(report) = &result.report {
        write_file(&a.out.join("report.tsv"), report.to_tsv())?;
        write_file(&a.out.join("report.json"), report.to_json())?;
        print!("{}", report.to_tsv());
    }
    eprintln!("{} pages, {failed} failed", result.pages.len());
    if failed == result.pages.len() {
        return Err(fail(PROCESSING, "every page failed"));
    }
    Ok(())
}

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct TrainFile {
    training: TrainingConfig,
    augment: AugmentParams,
}

fn train_classifier(a: TrainClassifierArgs) -> Result<()> {
    let cfg: TrainFile = match &a.config {
        Some(p) => toml::from_str(&read_text(p)?).map_err(|e| fail(CONFIG, format!("{}: {e}", p.display())))?,
        None => TrainFile::default(),
    };
    let reg = registry(a.registry.as_deref())?;
    let atlas = GlyphAtlas::load(&a.atlas).map_err(|e| fail(INPUT, e))?;
    let sets = training_sets(&atlas, &reg, &cfg.augment).map_err(|e| fail(PROCESSING, e))?;
    let fit = |name: &str, samples| {
        let outcome = train(samples, &cfg.training).map_err(|e| fail(PROCESSING, format!("{name} model: {e}")))?;
        for (c, acc) in &outcome.cv_accuracy {
            eprintln!("{name}: C = {c}, cross-validation accuracy {acc:.4}");
        }
        eprintln!("{name}: {} labels, C = {}", outcome.model.labels.len(), outcome.model.c);
        Ok::<_, Failure>(outcome.model)
    };
    let models = Models {
        base: fit("base", &sets.base)?,
        ottu: fit("ottu", &sets.ottu)?,
    };
    models.save_dir(&a.out).map_err(|e| fail(PROCESSING, e))
}

fn train_bigram_cmd(a: TrainBigramArgs) -> Result<()> {
    let reg = registry(a.registry.as_deref())?;
    let corpus = read_text(&a.corpus)?;
    let (model, stats) = train_bigram(&corpus, &reg).map_err(|e| fail(INPUT, e))?;
    write_file(&a.out, model.to_text())?;
    eprintln!("{} words counted, {} skipped", stats.words, stats.skipped);
    Ok(())
}

fn eval(a: EvalArgs) -> Result<()> {
    let mut report = EvalReport::default();
    let pairs: Vec<(String, PathBuf, PathBuf)> = match (&a.manifest, &a.ocr, &a.truth) {
        (Some(m), _, _) => {
            let base = m.parent().unwrap_or(Path::new("."));
            let mut pairs = Vec::new();
            for (i, line) in read_text(m)?.lines().enumerate() {
                let line = line.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let f: Vec<&str> = line.split('\t').map(str::trim).collect();
                if f.len() != 2 {
                    return Err(fail(INPUT, format!("{}: line {}: expected `ocr-text<TAB>truth-text`", m.display(), i + 1)));
                }
                let (o, t) = (base.join(f[0]), base.join(f[1]));
                let name = o.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                pairs.push((name, o, t));
            }
            if pairs.is_empty() {
                return Err(fail(INPUT, format!("{}: no pages listed", m.display())));
            }
            pairs
        }
        (None, Some(o), Some(t)) => vec![(o.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(), o.clone(), t.clone())],
        _ => return Err(fail(CONFIG, "give OCR and TRUTH paths, or --manifest")),
    };
    for (name, o, t) in pairs {
        match (fs::read_to_string(&o), fs::read_to_string(&t)) {
            (Ok(ocr), Ok(truth)) => match eval_page(&ocr, &truth) {
                Ok(c) => report.push(name, c),
                Err(e) => report.fail(name, e),
            },
            (Err(e), _) => report.fail(name, format!("{}: {e}", o.display())),
            (_, Err(e)) => report.fail(name, format!("{}: {e}", t.display())),
        }
    }
    for f in &report.failures {
        eprintln!("{}: {}", f.page, f.error);
    }
    match &a.out {
        Some(p) => write_file(p, report.to_tsv())?,
        None => print!("{}", report.to_tsv()),
    }
    if let Some(p) = &a.json {
        write_file(p, report.to_json())?;
    }
    if report.pages.is_empty() {
        return Err(fail(INPUT, "no page could be evaluated"));
    }
    Ok(())
}

fn synth_atlas(out: &Path, variants: usize, seed: u64, reg: Option<&Path>) -> Result<()> {
    let reg = registry(reg)?;
    let atlas = GlyphAtlas::generate(
        &reg,
        &AtlasParams {
            variants,
            seed,
            ..Default::default()
        },
    );
    atlas.save(out).map_err(|e| fail(PROCESSING, e))?;
    eprintln!("{} glyphs written to {}", atlas.len(), out.display());
    Ok(())
}

fn synth_page(a: SynthPageArgs) -> Result<()> {
    let reg = registry(a.registry.as_deref())?;
    let atlas = GlyphAtlas::load(&a.atlas).map_err(|e| fail(INPUT, e))?;
    let text = read_text(&a.text)?;
    let params = PageParams {
        letterpress: a.letterpress,
        rotation_degrees: a.rotate,
        shear_degrees: a.shear,
        seed: a.seed,
        ..Default::default()
    };
    let page = compose_synthetic_page(&atlas, &reg, &text, &params, &NoiseParams { salt_pepper: a.noise }).map_err(|e| fail(INPUT, e))?;
    let with_ext = |ext: &str| {
        let mut p = a.out.clone().into_os_string();
        p.push(ext);
        PathBuf::from(p)
    };
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| fail(PROCESSING, format!("{}: {e}", dir.display())))?;
    }
    write_pgm(with_ext(".pgm"), &page.image).map_err(|e| fail(PROCESSING, e))?;
    write_file(&with_ext(".txt"), &page.truth)?;
    write_file(&with_ext(".uzn"), format_uzn(&page.zones))?;
    Ok(())
}
