use std::path::Path;
use std::process::{Command, Output};

use kannada_ocr::classify::{train, Models, TrainingConfig};
use kannada_ocr::decode::train_bigram;
use kannada_ocr::eval::synth::{training_sets, AugmentParams};
use kannada_ocr::eval::GlyphAtlas;
use kannada_ocr::script::SymbolRegistry;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kannada-ocr")).current_dir(dir).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn eval_scores_text_files() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("out.txt"), "ಕನ್ನಡ ಭಾಷ\n").unwrap();
    std::fs::write(dir.path().join("truth.txt"), "ಕನ್ನಡ ಭಾಷೆ\n").unwrap();
    let o = run(dir.path(), &["eval", "out.txt", "truth.txt", "--json", "e.json"]);
    assert!(o.status.success());
    let table = stdout(&o);
    assert!(table.starts_with("page\tN\tM\tS\tI\tD"));
    assert!(table.lines().any(|l| l.starts_with("TOTAL\t")));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("e.json")).unwrap()).unwrap();
    assert_eq!(json["aggregate"]["d"], 1);
    assert_eq!(json["aggregate"]["s_w"], 1);

    std::fs::write(dir.path().join("empty.txt"), "").unwrap();
    let o = run(dir.path(), &["eval", "out.txt", "empty.txt"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn exit_codes_separate_failure_kinds() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["ocr", "page.pgm", "--config", "missing.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.toml"));
    std::fs::write(dir.path().join("bad.toml"), "top_k = 0\n").unwrap();
    assert_eq!(run(dir.path(), &["ocr", "page.pgm", "--config", "bad.toml"]).status.code(), Some(2));
    let o = run(dir.path(), &["eval", "--manifest", "none.tsv"]);
    assert_eq!(o.status.code(), Some(3));
}

/// Small models on disk plus a config naming them.
fn install_engine(dir: &Path, letters: &[&str], corpus: &str) {
    let reg = SymbolRegistry::builtin();
    let atlas = GlyphAtlas::load(&dir.join("atlas")).unwrap();
    let mut small = GlyphAtlas::new();
    for name in letters {
        let id = reg.id(name).unwrap();
        for g in atlas.get(id).unwrap() {
            small.insert(id, g.clone());
        }
    }
    let sets = training_sets(&small, &reg, &AugmentParams::default()).unwrap();
    let cfg = TrainingConfig { c_grid: vec![1.0], ..Default::default() };
    Models {
        base: train(&sets.base, &cfg).unwrap().model,
        ottu: train(&sets.ottu, &cfg).unwrap().model,
    }
    .save_dir(&dir.join("models"))
    .unwrap();
    let (bigram, _) = train_bigram(corpus, &reg).unwrap();
    bigram.save(&dir.join("models/bigram.tsv")).unwrap();
    std::fs::write(
        dir.join("kannada-ocr.toml"),
        "base_model = \"models/base.model\"\nottu_model = \"models/ottu.model\"\nbigram_model = \"models/bigram.tsv\"\n",
    )
    .unwrap();
}

#[test]
fn synth_ocr_and_batch() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(run(d, &["synth", "atlas", "atlas", "--variants", "3"]).status.success());
    let corpus = "ಕಮಲ ನಗರ ಕಾಲ ಮುಸಲ ಅಕ್ಕ ಸತ್ತ";
    std::fs::write(d.join("page.txt"), corpus).unwrap();
    let o = run(d, &["synth", "page", "page.txt", "--atlas", "atlas", "--out", "pages/p1", "--rotate", "-2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for ext in ["pgm", "txt", "uzn"] {
        assert!(d.join(format!("pages/p1.{ext}")).exists());
    }
    install_engine(d, &["ka", "kaa", "ga", "ma", "mu", "la", "na", "ra", "sa", "ta", "v_a", "k_ottu", "t_ottu"], corpus);

    let o = run(d, &["ocr", "pages/p1.pgm", "--zones", "pages/p1.uzn", "--words", "w.tsv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).split_whitespace().collect::<Vec<_>>(), corpus.split_whitespace().collect::<Vec<_>>());
    let words = std::fs::read_to_string(d.join("w.tsv")).unwrap();
    assert_eq!(words.lines().count(), 1 + 6);

    std::fs::write(d.join("m.tsv"), "pages/p1.pgm\tpages/p1.txt\nmissing.pgm\tpages/p1.txt\n").unwrap();
    let o = run(d, &["batch", "m.tsv", "--out", "res", "--jobs", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(d.join("res/p1.txt").exists());
    let report = std::fs::read_to_string(d.join("res/report.tsv")).unwrap();
    assert!(report.lines().any(|l| l.starts_with("p1\t") && l.ends_with("\t100.00\t100.00")), "{report}");
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("res/report.json")).unwrap()).unwrap();
    assert_eq!(json["failures"].as_array().unwrap().len(), 1);

    let o = run(d, &["ocr", "missing.pgm"]);
    assert_eq!(o.status.code(), Some(3));
    std::fs::write(d.join("empty.tsv"), "# nothing\n").unwrap();
    assert_eq!(run(d, &["batch", "empty.tsv", "--out", "res2"]).status.code(), Some(3));
}

#[test]
fn bigram_training_from_corpus() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.txt"), "ಕನ್ನಡ ಭಾಷೆ ಕನ್ನಡ\n").unwrap();
    let o = run(dir.path(), &["train-bigram", "c.txt", "--out", "b.tsv"]);
    assert!(o.status.success());
    let model = kannada_ocr::decode::BigramModel::load(&dir.path().join("b.tsv")).unwrap();
    assert!(!model.vocab().is_empty());
}
