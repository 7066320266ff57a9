use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use unicode_normalization::UnicodeNormalization;

use super::DecodeError;
use crate::script::{unicode_to_symbols, LabelId, Role, SymbolRegistry};

const MAGIC: &str = "kannada-ocr-bigram";
const VERSION: u32 = 1;

/// Pseudo-label marking a word boundary in transition lookups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Token {
    Start,
    Label(LabelId),
    End,
}

/// Add-one smoothed symbol bigram model.
///
/// Rows are START plus every vocabulary label; columns are every vocabulary
/// label plus END. Each row is a proper distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct BigramModel {
    vocab: Vec<LabelId>,
    index: HashMap<LabelId, usize>,
    /// `counts[row][col]`, row 0 = START, column `vocab.len()` = END.
    counts: Vec<Vec<u64>>,
    row_totals: Vec<u64>,
}

/// Corpus statistics from [`train_bigram`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CorpusStats {
    pub words: usize,
    pub skipped: usize,
}

/// Labels that stand alone as one-symbol words in the language model.
pub fn is_standalone(registry: &SymbolRegistry, label: LabelId) -> bool {
    matches!(
        registry.role(label),
        Role::Punctuation | Role::ArabicDigit | Role::KannadaDigit | Role::Special
    )
}

/// Split a label stream into language-model words: runs of script labels,
/// with each punctuation mark, digit or special sign on its own.
pub fn split_standalone(registry: &SymbolRegistry, labels: &[LabelId]) -> Vec<Vec<LabelId>> {
    let mut out: Vec<Vec<LabelId>> = Vec::new();
    let mut run = Vec::new();
    for &l in labels {
        if is_standalone(registry, l) {
            if !run.is_empty() {
                out.push(std::mem::take(&mut run));
            }
            out.push(vec![l]);
        } else {
            run.push(l);
        }
    }
    if !run.is_empty() {
        out.push(run);
    }
    out
}

impl BigramModel {
    /// A model with no observations: every transition is equally likely.
    pub fn uniform(vocab: Vec<LabelId>) -> Self {
        let n = vocab.len();
        let index = vocab.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        Self {
            vocab,
            index,
            counts: vec![vec![0; n + 1]; n + 1],
            row_totals: vec![0; n + 1],
        }
    }

    pub fn for_registry(registry: &SymbolRegistry) -> Self {
        Self::uniform(registry.recognition_labels().map(|l| l.id).collect())
    }

    pub fn vocab(&self) -> &[LabelId] {
        &self.vocab
    }

    pub fn contains(&self, label: LabelId) -> bool {
        self.index.contains_key(&label)
    }

    fn row(&self, t: Token) -> Result<usize, DecodeError> {
        match t {
            Token::Start => Ok(0),
            Token::Label(l) => self.index.get(&l).map(|i| i + 1).ok_or(DecodeError::UnknownLabel(l)),
            Token::End => Err(DecodeError::UnknownLabel(usize::MAX)),
        }
    }

    fn col(&self, t: Token) -> Result<usize, DecodeError> {
        match t {
            Token::End => Ok(self.vocab.len()),
            Token::Label(l) => self.index.get(&l).copied().ok_or(DecodeError::UnknownLabel(l)),
            Token::Start => Err(DecodeError::UnknownLabel(usize::MAX)),
        }
    }

    /// Record one word (a label sequence between START and END).
    pub fn observe(&mut self, word: &[LabelId]) -> Result<(), DecodeError> {
        let mut prev = Token::Start;
        for &l in word.iter() {
            self.bump(prev, Token::Label(l))?;
            prev = Token::Label(l);
        }
        self.bump(prev, Token::End)
    }

    fn bump(&mut self, prev: Token, cur: Token) -> Result<(), DecodeError> {
        let (r, c) = (self.row(prev)?, self.col(cur)?);
        self.counts[r][c] += 1;
        self.row_totals[r] += 1;
        Ok(())
    }

    pub fn count(&self, prev: Token, cur: Token) -> Result<u64, DecodeError> {
        Ok(self.counts[self.row(prev)?][self.col(cur)?])
    }

    /// Smoothed `P(cur | prev) = (count + 1) / (count(prev) + V)` with `V`
    /// the number of columns.
    pub fn probability(&self, prev: Token, cur: Token) -> Result<f64, DecodeError> {
        let (r, c) = (self.row(prev)?, self.col(cur)?);
        Ok((self.counts[r][c] + 1) as f64 / (self.row_totals[r] + self.vocab.len() as u64 + 1) as f64)
    }

    pub fn log_probability(&self, prev: Token, cur: Token) -> Result<f64, DecodeError> {
        Ok(self.probability(prev, cur)?.ln())
    }

    /// Dense log-probability table for decoding, row/column layout as above.
    pub(crate) fn log_table(&self) -> Vec<Vec<f64>> {
        let v = self.vocab.len() as u64 + 1;
        self.counts
            .iter()
            .zip(&self.row_totals)
            .map(|(row, &tot)| row.iter().map(|&c| ((c + 1) as f64 / (tot + v) as f64).ln()).collect())
            .collect()
    }

    pub(crate) fn index_of(&self, label: LabelId) -> Option<usize> {
        self.index.get(&label).copied()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{MAGIC}\t{VERSION}");
        let ids: Vec<String> = self.vocab.iter().map(|l| l.to_string()).collect();
        let _ = writeln!(s, "vocab\t{}", ids.join(" "));
        let name = |r: usize, is_row: bool| -> String {
            if is_row && r == 0 {
                "start".into()
            } else if !is_row && r == self.vocab.len() {
                "end".into()
            } else {
                self.vocab[if is_row { r - 1 } else { r }].to_string()
            }
        };
        let v = self.vocab.len() as u64 + 1;
        for (r, row) in self.counts.iter().enumerate() {
            let tot = self.row_totals[r];
            if tot == 0 {
                continue;
            }
            let _ = writeln!(s, "row\t{}\t{}\t{:.12}", name(r, true), tot, (1.0 / (tot + v) as f64).ln());
            for (c, &n) in row.iter().enumerate() {
                if n > 0 {
                    let lp = ((n + 1) as f64 / (tot + v) as f64).ln();
                    let _ = writeln!(s, "pair\t{}\t{}\t{}\t{:.12}", name(r, true), name(c, false), n, lp);
                }
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, DecodeError> {
        let bad = |line: usize, msg: &str| DecodeError::CorruptModel(format!("line {line}: {msg}"));
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| bad(1, "empty file"))?;
        let mut h = header.split('\t');
        if h.next() != Some(MAGIC) {
            return Err(bad(1, "not a bigram model"));
        }
        let version: u32 = h.next().and_then(|v| v.parse().ok()).ok_or_else(|| bad(1, "bad version"))?;
        if version != VERSION {
            return Err(DecodeError::VersionMismatch { found: version, expected: VERSION });
        }
        let (_, vocab_line) = lines.next().ok_or_else(|| bad(2, "missing vocab"))?;
        let vocab: Vec<LabelId> = vocab_line
            .strip_prefix("vocab\t")
            .ok_or_else(|| bad(2, "missing vocab"))?
            .split(' ')
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|_| bad(2, "bad label id")))
            .collect::<Result<_, _>>()?;
        let mut model = Self::uniform(vocab);
        for (i, line) in lines {
            let f: Vec<&str> = line.split('\t').collect();
            let tok = |s: &str| -> Result<Token, DecodeError> {
                match s {
                    "start" => Ok(Token::Start),
                    "end" => Ok(Token::End),
                    _ => s.parse().map(Token::Label).map_err(|_| bad(i + 1, "bad label")),
                }
            };
            match f.first().copied() {
                Some("row") if f.len() == 4 => {
                    let r = model.row(tok(f[1])?).map_err(|_| bad(i + 1, "unknown row label"))?;
                    model.row_totals[r] = f[2].parse().map_err(|_| bad(i + 1, "bad total"))?;
                }
                Some("pair") if f.len() == 5 => {
                    let r = model.row(tok(f[1])?).map_err(|_| bad(i + 1, "unknown row label"))?;
                    let c = model.col(tok(f[2])?).map_err(|_| bad(i + 1, "unknown column label"))?;
                    model.counts[r][c] = f[3].parse().map_err(|_| bad(i + 1, "bad count"))?;
                }
                Some("") | None => {}
                _ => return Err(bad(i + 1, "unknown record")),
            }
        }
        for (r, row) in model.counts.iter().enumerate() {
            if row.iter().sum::<u64>() != model.row_totals[r] {
                return Err(bad(0, "row total does not match its pairs"));
            }
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<(), DecodeError> {
        std::fs::write(path, self.to_text()).map_err(|e| DecodeError::Io {
            path: path.display().to_string(),
            source: e,
        })
    }

    pub fn load(path: &Path) -> Result<Self, DecodeError> {
        let text = std::fs::read_to_string(path).map_err(|e| DecodeError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_text(&text)
    }
}

/// Count symbol bigrams over a Unicode corpus. Whitespace separates words;
/// tokens the codec cannot spell are skipped and counted.
pub fn train_bigram(corpus: &str, registry: &SymbolRegistry) -> Result<(BigramModel, CorpusStats), DecodeError> {
    let mut model = BigramModel::for_registry(registry);
    let mut stats = CorpusStats::default();
    for token in corpus.split_whitespace() {
        let token: String = token.nfc().collect();
        match unicode_to_symbols(registry, &token) {
            Ok(labels) => {
                for word in split_standalone(registry, &labels) {
                    model.observe(&word)?;
                    stats.words += 1;
                }
            }
            Err(_) => stats.skipped += 1,
        }
    }
    if stats.words == 0 {
        return Err(DecodeError::EmptyCorpus);
    }
    Ok((model, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reg() -> SymbolRegistry {
        SymbolRegistry::builtin()
    }

    #[test]
    fn rows_are_distributions() {
        let r = reg();
        let (m, stats) = train_bigram("ಕನ್ನಡ ಭಾಷೆ ಕನ್ನಡ, 12", &r).unwrap();
        assert_eq!(stats.words, 6);
        let mut rows = vec![Token::Start];
        rows.extend(m.vocab().iter().map(|&l| Token::Label(l)));
        let mut cols: Vec<Token> = m.vocab().iter().map(|&l| Token::Label(l)).collect();
        cols.push(Token::End);
        for &row in &rows {
            let s: f64 = cols.iter().map(|&c| m.probability(row, c).unwrap()).sum();
            assert!((s - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn hand_counted_probabilities() {
        let r = reg();
        // ಕಮಲ, ಕಲ, ಮಲ: labels ka, ma, la.
        let (m, _) = train_bigram("ಕಮಲ ಕಲ ಮಲ", &r).unwrap();
        let id = |n: &str| Token::Label(r.id(n).unwrap());
        let v = 391.0;
        // START row: ka twice, ma once.
        assert_eq!(m.probability(Token::Start, id("ka")).unwrap(), 3.0 / (3.0 + v));
        assert_eq!(m.probability(Token::Start, id("la")).unwrap(), 1.0 / (3.0 + v));
        // ka row: ma once, la once.
        assert_eq!(m.probability(id("ka"), id("ma")).unwrap(), 2.0 / (2.0 + v));
        // la row: END three times.
        assert_eq!(m.probability(id("la"), Token::End).unwrap(), 4.0 / (3.0 + v));
        // unseen row ya: 1 / V.
        assert_eq!(m.probability(id("ya"), id("ka")).unwrap(), 1.0 / v);
    }

    #[test]
    fn repeated_word_dominates_its_rows() {
        let r = reg();
        let (m, _) = train_bigram("ಕಮಲ ಕಮಲ ಕಮಲ", &r).unwrap();
        let ka = Token::Label(r.id("ka").unwrap());
        let ma = Token::Label(r.id("ma").unwrap());
        let best = m
            .vocab()
            .iter()
            .map(|&l| Token::Label(l))
            .chain([Token::End])
            .max_by(|a, b| m.probability(ka, *a).unwrap().total_cmp(&m.probability(ka, *b).unwrap()))
            .unwrap();
        assert_eq!(best, ma);
    }

    #[test]
    fn empty_corpus() {
        assert!(matches!(train_bigram("  abc \n", &reg()), Err(DecodeError::EmptyCorpus)));
    }

    #[test]
    fn text_round_trip() {
        let r = reg();
        let (m, _) = train_bigram("ಕನ್ನಡ ಸೂರ್ಯ 3.", &r).unwrap();
        let back = BigramModel::from_text(&m.to_text()).unwrap();
        assert_eq!(back, m);
        let future = m.to_text().replacen("\t1\n", "\t9\n", 1);
        assert!(matches!(BigramModel::from_text(&future), Err(DecodeError::VersionMismatch { .. })));
    }
}
