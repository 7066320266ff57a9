use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use super::{levenshtein_align, EvalError};

/// Recognition accuracy `(N - S - I - D) / N`. Negative values are possible
/// for outputs with many insertions and are returned unchanged.
pub fn accuracy(n: usize, s: usize, i: usize, d: usize) -> Result<f64, EvalError> {
    if n == 0 {
        return Err(EvalError::ZeroGroundTruth);
    }
    Ok((n as f64 - (s + i + d) as f64) / n as f64)
}

/// Unicode-level and word-level counts for one page (or a sum of pages).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EvalCounts {
    pub n: usize,
    pub m: usize,
    pub s: usize,
    pub i: usize,
    pub d: usize,
    pub n_w: usize,
    pub m_w: usize,
    pub s_w: usize,
    pub i_w: usize,
    pub d_w: usize,
}

impl EvalCounts {
    pub fn ua(&self) -> Result<f64, EvalError> {
        accuracy(self.n, self.s, self.i, self.d)
    }

    pub fn wa(&self) -> Result<f64, EvalError> {
        accuracy(self.n_w, self.s_w, self.i_w, self.d_w)
    }

    pub fn add(&mut self, o: &EvalCounts) {
        self.n += o.n;
        self.m += o.m;
        self.s += o.s;
        self.i += o.i;
        self.d += o.d;
        self.n_w += o.n_w;
        self.m_w += o.m_w;
        self.s_w += o.s_w;
        self.i_w += o.i_w;
        self.d_w += o.d_w;
    }
}

/// NFC with every whitespace run collapsed to one space and the ends trimmed.
pub fn normalize_text(text: &str) -> String {
    let nfc: String = text.nfc().collect();
    nfc.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Compare OCR output with ground truth at code-point and word level.
/// Spaces between words count as code points.
pub fn eval_page(ocr_text: &str, truth_text: &str) -> Result<EvalCounts, EvalError> {
    let (ocr, truth) = (normalize_text(ocr_text), normalize_text(truth_text));
    let (oc, tc): (Vec<char>, Vec<char>) = (ocr.chars().collect(), truth.chars().collect());
    if tc.is_empty() {
        return Err(EvalError::ZeroGroundTruth);
    }
    let (ow, tw): (Vec<&str>, Vec<&str>) = (ocr.split(' ').filter(|w| !w.is_empty()).collect(), truth.split(' ').collect());
    let u = levenshtein_align(&tc, &oc);
    let w = levenshtein_align(&tw, &ow);
    Ok(EvalCounts {
        n: tc.len(),
        m: oc.len(),
        s: u.substitutions,
        i: u.insertions,
        d: u.deletions,
        n_w: tw.len(),
        m_w: ow.len(),
        s_w: w.substitutions,
        i_w: w.insertions,
        d_w: w.deletions,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageResult {
    pub page: String,
    pub counts: EvalCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageFailure {
    pub page: String,
    pub error: String,
}

/// Per-page counts plus their aggregate.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalReport {
    pub pages: Vec<PageResult>,
    pub failures: Vec<PageFailure>,
}

#[derive(Serialize)]
struct Summary<'a> {
    pages: usize,
    failures: &'a [PageFailure],
    aggregate: EvalCounts,
    ua: Option<f64>,
    wa: Option<f64>,
    unicode_error_rates: Vec<Option<f64>>,
    word_error_rates: Vec<Option<f64>>,
}

impl EvalReport {
    pub fn push(&mut self, page: impl Into<String>, counts: EvalCounts) {
        self.pages.push(PageResult { page: page.into(), counts });
    }

    pub fn fail(&mut self, page: impl Into<String>, error: impl ToString) {
        self.failures.push(PageFailure {
            page: page.into(),
            error: error.to_string(),
        });
    }

    pub fn aggregate(&self) -> EvalCounts {
        let mut total = EvalCounts::default();
        for p in &self.pages {
            total.add(&p.counts);
        }
        total
    }

    /// Tab-separated table, one row per page and a final `TOTAL` row.
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("page\tN\tM\tS\tI\tD\tN_W\tM_W\tS_W\tI_W\tD_W\tUA\tWA\n");
        let row = |s: &mut String, name: &str, c: &EvalCounts| {
            let pct = |v: Result<f64, EvalError>| v.map(|x| format!("{:.2}", 100.0 * x)).unwrap_or_else(|_| "-".into());
            let _ = writeln!(
                s,
                "{name}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                c.n,
                c.m,
                c.s,
                c.i,
                c.d,
                c.n_w,
                c.m_w,
                c.s_w,
                c.i_w,
                c.d_w,
                pct(c.ua()),
                pct(c.wa())
            );
        };
        for p in &self.pages {
            row(&mut s, &p.page, &p.counts);
        }
        row(&mut s, "TOTAL", &self.aggregate());
        s
    }

    /// Machine-readable summary with the per-page error-rate series.
    pub fn to_json(&self) -> String {
        let agg = self.aggregate();
        let summary = Summary {
            pages: self.pages.len(),
            failures: &self.failures,
            aggregate: agg,
            ua: agg.ua().ok(),
            wa: agg.wa().ok(),
            unicode_error_rates: self.pages.iter().map(|p| p.counts.ua().ok().map(|a| 1.0 - a)).collect(),
            word_error_rates: self.pages.iter().map(|p| p.counts.wa().ok().map(|a| 1.0 - a)).collect(),
        };
        serde_json::to_string_pretty(&summary).expect("summary serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_rows() {
        let ua = accuracy(397_371, 9_588, 3_470, 4_312).unwrap();
        assert!((100.0 * ua - 95.63).abs() < 0.01);
        let wa = accuracy(47_464, 8_718, 759, 667).unwrap();
        assert!((100.0 * wa - 78.63).abs() < 0.01);
        assert_eq!(accuracy(10, 0, 0, 0).unwrap(), 1.0);
        assert!(matches!(accuracy(0, 0, 0, 0), Err(EvalError::ZeroGroundTruth)));
    }

    #[test]
    fn identical_page() {
        let c = eval_page("ಕನ್ನಡ  ಭಾಷೆ\n", "ಕನ್ನಡ ಭಾಷೆ").unwrap();
        assert_eq!(c.ua().unwrap(), 1.0);
        assert_eq!(c.wa().unwrap(), 1.0);
        assert_eq!(c.n_w, 2);
    }

    #[test]
    fn one_word_wrong() {
        let c = eval_page("ಕನ್ನಡ ಭಾಷ", "ಕನ್ನಡ ಭಾಷೆ").unwrap();
        assert_eq!((c.s, c.i, c.d), (0, 0, 1));
        assert_eq!((c.s_w, c.i_w, c.d_w), (1, 0, 0));
        assert_eq!(c.m, c.n - c.d + c.i);
    }

    #[test]
    fn empty_truth() {
        assert!(matches!(eval_page("x", "  "), Err(EvalError::ZeroGroundTruth)));
    }

    #[test]
    fn empty_output_deletes_everything() {
        let c = eval_page("", "ab cd").unwrap();
        assert_eq!((c.m, c.d, c.m_w, c.d_w), (0, 5, 0, 2));
    }

    #[test]
    fn report_aggregates() {
        let mut r = EvalReport::default();
        r.push("a", eval_page("ab", "ab").unwrap());
        r.push("b", eval_page("ax", "ab").unwrap());
        r.fail("c", "unreadable");
        let agg = r.aggregate();
        assert_eq!((agg.n, agg.s), (4, 1));
        let tsv = r.to_tsv();
        assert_eq!(tsv.lines().count(), 4);
        assert!(tsv.lines().last().unwrap().starts_with("TOTAL\t4\t4\t1"));
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json["pages"], 2);
        assert_eq!(json["failures"][0]["page"], "c");
    }

    proptest::proptest! {
        #[test]
        fn accuracy_is_monotone(n in 1usize..10_000, s in 0usize..500, i in 0usize..500, d in 0usize..500, bump in 1usize..50) {
            let a = accuracy(n, s, i, d).unwrap();
            proptest::prop_assert!(accuracy(n, s + bump, i, d).unwrap() <= a);
            proptest::prop_assert!(accuracy(n, s, i + bump, d).unwrap() <= a);
            proptest::prop_assert!(accuracy(n, s, i, d + bump).unwrap() <= a);
        }

        #[test]
        fn swapping_texts_swaps_insertions_and_deletions(a in "[ab c]{1,12}", b in "[ab c]{1,12}") {
            proptest::prop_assume!(!a.trim().is_empty() && !b.trim().is_empty());
            let x = eval_page(&a, &b).unwrap();
            let y = eval_page(&b, &a).unwrap();
            proptest::prop_assert_eq!((x.s, x.i, x.d), (y.s, y.d, y.i));
            proptest::prop_assert_eq!((x.s_w, x.i_w, x.d_w), (y.s_w, y.d_w, y.i_w));
            proptest::prop_assert_eq!(x.m, x.n - x.d + x.i);
            proptest::prop_assert_eq!(x.m_w, x.n_w - x.d_w + x.i_w);
        }
    }
}
