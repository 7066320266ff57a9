//! Page recognition: image to Unicode text, and batch processing.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{classify_symbol, Candidate, ClassifyError, Models};
use crate::decode::{is_standalone, viterbi_decode, BigramModel, CandidateLattice, DecodeError, DEFAULT_TOP_K};
use crate::eval::{eval_page, EvalReport};
use crate::layout::{
    connected_components, correct_italics_components, parse_uzn, remove_specks, segment_lines, segment_symbols,
    segment_words, BBox, Component, LayoutConfig, LayoutError, Zone,
};
use crate::preprocess::{binarize, decode_pgm, deskew, detect_skew, rotate_point, GrayImage, PreprocessError, DEFAULT_SKEW_THRESHOLD};
use crate::script::{load_registry, raw_unicode, word_unicode, LabelId, ScriptError, SymbolRegistry};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("input {path}: {message}")]
    Input { path: String, message: String },
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("line {line}, word {word}: {source}")]
    Classify {
        line: usize,
        word: usize,
        #[source]
        source: ClassifyError,
    },
    #[error("line {line}, word {word}: {source}")]
    Decode {
        line: usize,
        word: usize,
        #[source]
        source: DecodeError,
    },
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
}

impl PipelineError {
    /// Process exit status: 2 configuration, 3 input, 4 processing.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Input { .. } | Self::Manifest(_) => 3,
            _ => 4,
        }
    }
}

/// Engine settings, usually read from a TOML file. Relative paths are
/// resolved against the file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Symbol registry; the built-in one when absent.
    pub registry: Option<PathBuf>,
    pub base_model: PathBuf,
    pub ottu_model: PathBuf,
    pub bigram_model: PathBuf,
    pub layout: LayoutConfig,
    pub top_k: usize,
    /// Skews below this many degrees are not corrected.
    pub skew_threshold: f64,
    /// Multiplier of the bigram log-probabilities in decoding.
    pub transition_weight: f64,
    pub correct_italics: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            registry: None,
            base_model: PathBuf::from("models/base.model"),
            ottu_model: PathBuf::from("models/ottu.model"),
            bigram_model: PathBuf::from("models/bigram.tsv"),
            layout: LayoutConfig::default(),
            top_k: DEFAULT_TOP_K,
            skew_threshold: DEFAULT_SKEW_THRESHOLD,
            transition_weight: 1.0,
            correct_italics: true,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self, PipelineError> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base_dir.join(&*p);
            }
        };
        resolve(&mut cfg.base_model);
        resolve(&mut cfg.ottu_model);
        resolve(&mut cfg.bigram_model);
        if let Some(r) = cfg.registry.as_mut() {
            resolve(r);
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Range checks on the numeric settings.
    pub fn validate(&self) -> Result<(), PipelineError> {
        let l = &self.layout;
        let bad = |m: &str| Err(PipelineError::Config(m.to_string()));
        if self.top_k == 0 {
            return bad("top_k must be at least 1");
        }
        if !(0.0..=15.0).contains(&self.skew_threshold) {
            return bad("skew_threshold must lie in [0, 15]");
        }
        if !(self.transition_weight >= 0.0 && self.transition_weight.is_finite()) {
            return bad("transition_weight must be finite and non-negative");
        }
        if !(l.word_gap_ratio > 0.0 && l.word_gap_ratio < 2.0) {
            return bad("layout.word_gap_ratio must lie in (0, 2)");
        }
        for (name, v) in [("overlap_ratio", l.overlap_ratio), ("ottu_mass_ratio", l.ottu_mass_ratio), ("strip_height_ratio", l.strip_height_ratio)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(PipelineError::Config(format!("layout.{name} must lie in (0, 1]")));
            }
        }
        Ok(())
    }
}

/// One recognised word.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WordOutput {
    pub text: String,
    /// Page coordinates, `[left, right) x [top, bottom)`.
    pub bbox: BBox,
    /// Mean classifier confidence of the chosen symbols.
    pub confidence: f64,
    pub labels: Vec<LabelId>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineOutput {
    pub bbox: BBox,
    pub shear_degrees: f64,
    pub words: Vec<WordOutput>,
}

/// Recognition result for one page.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PageOutput {
    pub text: String,
    pub lines: Vec<LineOutput>,
    pub skew_degrees: f64,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl PageOutput {
    fn empty(elapsed: Duration) -> Self {
        Self {
            text: String::new(),
            lines: Vec::new(),
            skew_degrees: 0.0,
            elapsed,
        }
    }

    /// Tab-separated word table: line, word, box, confidence, text.
    pub fn word_report(&self) -> String {
        let mut s = String::from("line\tword\tleft\ttop\tright\tbottom\tconfidence\ttext\n");
        for (li, line) in self.lines.iter().enumerate() {
            for (wi, w) in line.words.iter().enumerate() {
                let b = &w.bbox;
                let _ = writeln!(s, "{li}\t{wi}\t{}\t{}\t{}\t{}\t{:.4}\t{}", b.left, b.top, b.right, b.bottom, w.confidence, w.text);
            }
        }
        s
    }
}

/// Loaded models and settings; immutable and shareable across threads.
pub struct Engine {
    pub registry: SymbolRegistry,
    pub models: Models,
    pub bigram: BigramModel,
    pub config: PipelineConfig,
}

impl Engine {
    pub fn new(registry: SymbolRegistry, models: Models, bigram: BigramModel, config: PipelineConfig) -> Result<Self, PipelineError> {
        config.validate()?;
        models.validate(&registry).map_err(|e| PipelineError::Config(e.to_string()))?;
        for &l in models.base.labels.iter().chain(&models.ottu.labels) {
            if !bigram.contains(l) {
                return Err(PipelineError::Config(format!("bigram model lacks label {l}")));
            }
        }
        Ok(Self {
            registry,
            models,
            bigram,
            config,
        })
    }

    /// Load every artifact named by the configuration. Missing or corrupt
    /// files are configuration errors.
    pub fn from_config(config: PipelineConfig) -> Result<Self, PipelineError> {
        config.validate()?;
        let cfg_err = |e: &dyn std::fmt::Display| PipelineError::Config(e.to_string());
        let registry = match &config.registry {
            Some(p) => load_registry(p).map_err(|e: ScriptError| cfg_err(&e))?,
            None => SymbolRegistry::builtin(),
        };
        let load = |p: &Path| crate::classify::LinearModel::load(p).map_err(|e| cfg_err(&e));
        let models = Models {
            base: load(&config.base_model)?,
            ottu: load(&config.ottu_model)?,
        };
        let bigram = BigramModel::load(&config.bigram_model).map_err(|e| cfg_err(&e))?;
        Self::new(registry, models, bigram, config)
    }

    /// Recognise a page image given in memory.
    pub fn recognize(&self, gray: &GrayImage, zones: Option<&[Zone]>) -> Result<PageOutput, PipelineError> {
        let start = Instant::now();
        let (binary, _) = match binarize(gray) {
            Ok(b) => b,
            Err(PreprocessError::ZeroVariance | PreprocessError::EmptyHistogram) => return Ok(PageOutput::empty(start.elapsed())),
            Err(e) => return Err(e.into()),
        };
        let skew = match detect_skew(&binary) {
            Ok(s) => s,
            Err(PreprocessError::NoContent) => return Ok(PageOutput::empty(start.elapsed())),
            Err(e) => return Err(e.into()),
        };
        let corrected = skew.angle_degrees.abs() >= self.config.skew_threshold;
        let binary = if corrected {
            binarize(&deskew(gray, &skew, self.config.skew_threshold))?.0
        } else {
            binary
        };

        let zones: Vec<Zone> = match zones {
            Some(z) if corrected => z.iter().map(|z| rotate_zone(z, gray, -skew.angle_degrees, &binary)).collect(),
            Some(z) => {
                if let Some(bad) = z.iter().find(|z| !z.fits_in(binary.width(), binary.height())) {
                    return Err(LayoutError::ZoneOutOfBounds(bad.clone()).into());
                }
                z.to_vec()
            }
            None => vec![Zone::whole_page(binary.width(), binary.height())],
        };

        let components = remove_specks(connected_components(&binary), self.config.layout.min_component_area);
        let by_id: std::collections::HashMap<usize, &Component> = components.iter().map(|c| (c.id, c)).collect();
        let mut lines_out = Vec::new();
        let mut line_index = 0usize;
        for zone in &zones {
            for mut line in segment_lines(&components, zone, &self.config.layout) {
                let refs: Vec<&Component> = line.component_ids.iter().filter_map(|id| by_id.get(id).copied()).collect();
                let fixed: Vec<Component> = if self.config.correct_italics {
                    let (s, fixed) = correct_italics_components(&refs, line.baseline);
                    line.shear_degrees = s;
                    fixed
                } else {
                    refs.iter().map(|c| (*c).clone()).collect()
                };
                let mut words_out = Vec::new();
                for (wi, word) in segment_words(&line, line_index, &fixed, &self.config.layout).into_iter().enumerate() {
                    let members: Vec<&Component> = fixed.iter().filter(|c| word.component_ids.binary_search(&c.id).is_ok()).collect();
                    if members.is_empty() {
                        continue;
                    }
                    let out = self.recognize_word(&members, line.foreline, line.baseline, line_index, wi)?;
                    // Report the box in page coordinates, before italic correction.
                    let mut bbox = by_id[&members[0].id].bbox;
                    for c in &members {
                        bbox = bbox.union(&by_id[&c.id].bbox);
                    }
                    words_out.push(WordOutput { bbox, ..out });
                }
                lines_out.push(LineOutput {
                    bbox: line.bbox,
                    shear_degrees: line.shear_degrees,
                    words: words_out,
                });
                line_index += 1;
            }
        }
        let text = lines_out
            .iter()
            .map(|l| l.words.iter().map(|w| w.text.as_str()).collect::<Vec<_>>().join(" "))
            .collect::<Vec<_>>()
            .join("\n");
        Ok(PageOutput {
            text,
            lines: lines_out,
            skew_degrees: skew.angle_degrees,
            elapsed: start.elapsed(),
        })
    }

    fn recognize_word(&self, members: &[&Component], foreline: i32, baseline: i32, line: usize, word: usize) -> Result<WordOutput, PipelineError> {
        let symbols = segment_symbols(members, baseline, &self.config.layout);
        let mut positions: Vec<Vec<Candidate>> = Vec::with_capacity(symbols.len());
        for s in &symbols {
            let c = classify_symbol(s, foreline, baseline, &self.models, &self.registry, self.config.top_k)
                .map_err(|source| PipelineError::Classify { line, word, source })?;
            positions.push(c);
        }
        let labels = self.decode_positions(&positions).map_err(|source| PipelineError::Decode { line, word, source })?;
        let confidence = if labels.is_empty() {
            0.0
        } else {
            labels
                .iter()
                .zip(&positions)
                .map(|(l, cands)| cands.iter().find(|c| c.label == *l).map_or(0.0, |c| c.confidence))
                .sum::<f64>()
                / labels.len() as f64
        };
        let text = word_unicode(&self.registry, &labels).unwrap_or_else(|_| raw_unicode(&self.registry, &labels));
        Ok(WordOutput {
            text,
            bbox: BBox::new(0, 0, 0, 0),
            confidence,
            labels,
        })
    }

    /// Viterbi over runs of letter symbols; punctuation, digits and other
    /// standalone symbols keep their best candidate and break the runs.
    fn decode_positions(&self, positions: &[Vec<Candidate>]) -> Result<Vec<LabelId>, DecodeError> {
        let mut out = Vec::with_capacity(positions.len());
        let mut run: Vec<Vec<Candidate>> = Vec::new();
        let flush = |run: &mut Vec<Vec<Candidate>>, out: &mut Vec<LabelId>| -> Result<(), DecodeError> {
            if !run.is_empty() {
                let lattice = CandidateLattice::new(std::mem::take(run));
                out.extend(viterbi_decode(&lattice, &self.bigram, self.config.transition_weight)?);
            }
            Ok(())
        };
        for (i, cands) in positions.iter().enumerate() {
            let best = CandidateLattice::new(vec![cands.clone()]).greedy();
            let Some(&top) = best.first().filter(|_| !cands.is_empty()) else {
                return Err(DecodeError::EmptyPosition(i));
            };
            if is_standalone(&self.registry, top) {
                flush(&mut run, &mut out)?;
                out.push(top);
            } else {
                run.push(cands.clone());
            }
        }
        flush(&mut run, &mut out)?;
        Ok(out)
    }

    /// Read a PGM page and optional zone file, then recognise it.
    pub fn recognize_file(&self, image: &Path, zones: Option<&Path>) -> Result<PageOutput, PipelineError> {
        let input_err = |p: &Path, m: String| PipelineError::Input {
            path: p.display().to_string(),
            message: m,
        };
        let bytes = std::fs::read(image).map_err(|e| input_err(image, e.to_string()))?;
        let gray = decode_pgm(&bytes).map_err(|e| input_err(image, e.to_string()))?;
        let zones = match zones {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| input_err(p, e.to_string()))?;
                Some(parse_uzn(&text).map_err(|e| input_err(p, e.to_string()))?)
            }
            None => None,
        };
        self.recognize(&gray, zones.as_deref())
    }
}

/// Zone moved into the frame of the deskewed image: the bounding box of
/// its rotated corners, clipped to the page.
fn rotate_zone(z: &Zone, original: &GrayImage, degrees: f64, target: &crate::preprocess::BinaryImage) -> Zone {
    let (w, h) = (original.width(), original.height());
    let b = z.bbox();
    let corners = [(b.left, b.top), (b.right, b.top), (b.left, b.bottom), (b.right, b.bottom)];
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for (x, y) in corners {
        let (rx, ry) = rotate_point(w, h, degrees, x as f64, y as f64);
        x0 = x0.min(rx);
        y0 = y0.min(ry);
        x1 = x1.max(rx);
        y1 = y1.max(ry);
    }
    let clamp = |v: f64, hi: usize| v.max(0.0).min(hi as f64);
    let (l, t) = (clamp(x0.floor(), target.width()), clamp(y0.floor(), target.height()));
    let (r, btm) = (clamp(x1.ceil(), target.width()), clamp(y1.ceil(), target.height()));
    Zone {
        left: l as u32,
        top: t as u32,
        width: (r - l) as u32,
        height: (btm - t) as u32,
        kind: z.kind.clone(),
    }
}

/// One page of a batch manifest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub image: PathBuf,
    pub truth: Option<PathBuf>,
    pub zones: Option<PathBuf>,
}

impl ManifestEntry {
    /// Page name used in reports: the image file stem.
    pub fn name(&self) -> String {
        self.image.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
    }
}

/// Parse a manifest: one page per line, tab-separated `image [truth [zones]]`,
/// `-` for an absent field, `#` starting a comment. Relative paths are
/// taken relative to `base_dir`.
pub fn parse_manifest(text: &str, base_dir: &Path) -> Result<Vec<ManifestEntry>, PipelineError> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        if fields.len() > 3 || fields[0].is_empty() || fields[0] == "-" {
            return Err(PipelineError::Manifest(format!("line {}: expected `image [truth [zones]]`", i + 1)));
        }
        let path = |s: &str| {
            let p = PathBuf::from(s);
            if p.is_relative() {
                base_dir.join(p)
            } else {
                p
            }
        };
        let opt = |k: usize| fields.get(k).filter(|s| !s.is_empty() && **s != "-").map(|s| path(s));
        entries.push(ManifestEntry {
            image: path(fields[0]),
            truth: opt(1),
            zones: opt(2),
        });
    }
    if entries.is_empty() {
        return Err(PipelineError::Manifest("no pages listed".into()));
    }
    Ok(entries)
}

/// Outcome of a batch run, in manifest order.
pub struct BatchResult {
    pub pages: Vec<(ManifestEntry, Result<PageOutput, PipelineError>)>,
    /// Accuracy report over pages that have ground truth.
    pub report: Option<EvalReport>,
}

/// Recognise every page with up to `jobs` worker threads. A failing page is
/// recorded and the rest continue.
pub fn run_batch(engine: &Engine, entries: &[ManifestEntry], jobs: usize) -> Result<BatchResult, PipelineError> {
    if entries.is_empty() {
        return Err(PipelineError::Manifest("no pages listed".into()));
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<PageOutput, PipelineError>>>> = Mutex::new((0..entries.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..jobs.clamp(1, entries.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= entries.len() {
                    break;
                }
                let e = &entries[i];
                let r = engine.recognize_file(&e.image, e.zones.as_deref());
                slots.lock().expect("no worker panics while holding the lock")[i] = Some(r);
            });
        }
    });
    let results = slots.into_inner().expect("workers joined");
    let mut pages = Vec::with_capacity(entries.len());
    let mut report: Option<EvalReport> = None;
    for (e, r) in entries.iter().zip(results) {
        let r = r.expect("every page processed");
        if let Some(truth_path) = &e.truth {
            let rep = report.get_or_insert_with(EvalReport::default);
            match (&r, std::fs::read_to_string(truth_path)) {
                (Ok(out), Ok(truth)) => match eval_page(&out.text, &truth) {
                    Ok(c) => rep.push(e.name(), c),
                    Err(err) => rep.fail(e.name(), err),
                },
                (Err(err), _) => rep.fail(e.name(), err),
                (_, Err(err)) => rep.fail(e.name(), format!("{}: {err}", truth_path.display())),
            }
        }
        pages.push((e.clone(), r));
    }
    Ok(BatchResult { pages, report })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_parsing() {
        let m = "# pages\na.pgm\tA.txt\nb.pgm\t-\tb.uzn\n\n/abs/c.pgm\n";
        let e = parse_manifest(m, Path::new("/data")).unwrap();
        assert_eq!(e.len(), 3);
        assert_eq!(e[0].truth.as_deref(), Some(Path::new("/data/A.txt")));
        assert_eq!(e[1].truth, None);
        assert_eq!(e[1].zones.as_deref(), Some(Path::new("/data/b.uzn")));
        assert_eq!(e[2].image, PathBuf::from("/abs/c.pgm"));
        assert!(matches!(parse_manifest("# nothing\n", Path::new(".")), Err(PipelineError::Manifest(_))));
    }

    #[test]
    fn config_round_trip_and_checks() {
        let cfg = PipelineConfig::from_toml("base_model = \"m/b\"\ntop_k = 3\n[layout]\nword_gap_ratio = 0.3\n", Path::new("/etc/ocr")).unwrap();
        assert_eq!(cfg.base_model, PathBuf::from("/etc/ocr/m/b"));
        assert_eq!(cfg.top_k, 3);
        assert_eq!(cfg.layout.word_gap_ratio, 0.3);
        assert_eq!(cfg.layout.overlap_ratio, LayoutConfig::default().overlap_ratio);
        assert!(cfg.validate().is_ok());
        let bad = PipelineConfig { top_k: 0, ..Default::default() };
        assert_eq!(bad.validate().unwrap_err().exit_code(), 2);
        assert!(PipelineConfig::from_toml("nonsense = 1", Path::new(".")).is_err());
    }

    #[test]
    fn missing_model_is_a_config_error() {
        let cfg = PipelineConfig {
            base_model: "/nonexistent/base.model".into(),
            ..Default::default()
        };
        let err = Engine::from_config(cfg).err().unwrap();
        assert_eq!(err.exit_code(), 2);
    }
}
