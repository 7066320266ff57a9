use super::{BigramModel, DecodeError};
pub use crate::classify::Candidate;
use crate::script::LabelId;

/// Confidences are clamped to this floor before taking logs.
const MIN_CONFIDENCE: f64 = 1e-12;

/// Classifier candidates for each symbol position of one word.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CandidateLattice {
    pub positions: Vec<Vec<Candidate>>,
}

impl CandidateLattice {
    pub fn new(positions: Vec<Vec<Candidate>>) -> Self {
        Self { positions }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Highest-confidence label per position, ties to the lower id.
    pub fn greedy(&self) -> Vec<LabelId> {
        self.positions
            .iter()
            .map(|cands| {
                cands
                    .iter()
                    .min_by(|a, b| b.confidence.total_cmp(&a.confidence).then(a.label.cmp(&b.label)))
                    .map(|c| c.label)
                    .unwrap_or_default()
            })
            .collect()
    }
}

/// Path score: sum of log confidences plus `weight` times the sum of log
/// transition probabilities, START and END included.
pub fn path_score(lattice: &CandidateLattice, choice: &[usize], model: &BigramModel, weight: f64) -> Result<f64, DecodeError> {
    use super::Token;
    let mut score = 0.0;
    let mut prev = Token::Start;
    for (cands, &k) in lattice.positions.iter().zip(choice) {
        let c = cands[k];
        score += c.confidence.max(MIN_CONFIDENCE).ln();
        score += weight * model.log_probability(prev, Token::Label(c.label))?;
        prev = Token::Label(c.label);
    }
    if !choice.is_empty() {
        score += weight * model.log_probability(prev, Token::End)?;
    }
    Ok(score)
}

/// Best label sequence through the lattice.
///
/// A backward pass computes, for every candidate, the best score of the
/// remaining suffix; a forward pass then picks, position by position, the
/// candidate that attains the optimum, preferring the smaller label id on
/// ties. The result is the lexicographically smallest optimal path.
pub fn viterbi_decode(lattice: &CandidateLattice, model: &BigramModel, weight: f64) -> Result<Vec<LabelId>, DecodeError> {
    let n = lattice.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let end_col = model.vocab().len();
    let table = model.log_table();
    let mut idx: Vec<Vec<usize>> = Vec::with_capacity(n);
    for (i, cands) in lattice.positions.iter().enumerate() {
        if cands.is_empty() {
            return Err(DecodeError::EmptyPosition(i));
        }
        idx.push(
            cands
                .iter()
                .map(|c| model.index_of(c.label).ok_or(DecodeError::UnknownLabel(c.label)))
                .collect::<Result<_, _>>()?,
        );
    }
    let emit = |i: usize, k: usize| lattice.positions[i][k].confidence.max(MIN_CONFIDENCE).ln();

    // suffix[i][k]: best score from position i onward given candidate k at i.
    let mut suffix: Vec<Vec<f64>> = vec![Vec::new(); n];
    suffix[n - 1] = (0..idx[n - 1].len())
        .map(|k| emit(n - 1, k) + weight * table[idx[n - 1][k] + 1][end_col])
        .collect();
    for i in (0..n - 1).rev() {
        suffix[i] = (0..idx[i].len())
            .map(|k| {
                let row = &table[idx[i][k] + 1];
                let best_next = (0..idx[i + 1].len())
                    .map(|j| weight * row[idx[i + 1][j]] + suffix[i + 1][j])
                    .fold(f64::NEG_INFINITY, f64::max);
                emit(i, k) + best_next
            })
            .collect();
    }

    let mut path = Vec::with_capacity(n);
    let mut prev_row = 0usize;
    for i in 0..n {
        let mut best: Option<(f64, LabelId)> = None;
        for k in 0..idx[i].len() {
            let s = weight * table[prev_row][idx[i][k]] + suffix[i][k];
            let label = lattice.positions[i][k].label;
            best = match best {
                Some((bs, bl)) if s < bs || (s == bs && label >= bl) => Some((bs, bl)),
                _ => Some((s, label)),
            };
        }
        let (_, label) = best.expect("position is non-empty");
        path.push(label);
        prev_row = model.index_of(label).expect("checked above") + 1;
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_force(lattice: &CandidateLattice, model: &BigramModel) -> (f64, Vec<Vec<LabelId>>) {
        let sizes: Vec<usize> = lattice.positions.iter().map(Vec::len).collect();
        let mut choice = vec![0usize; sizes.len()];
        let mut best = f64::NEG_INFINITY;
        let mut paths: Vec<(f64, Vec<LabelId>)> = Vec::new();
        loop {
            let s = path_score(lattice, &choice, model, 1.0).unwrap();
            let labels = choice.iter().enumerate().map(|(i, &k)| lattice.positions[i][k].label).collect();
            best = best.max(s);
            paths.push((s, labels));
            let mut i = 0;
            while i < sizes.len() {
                choice[i] += 1;
                if choice[i] < sizes[i] {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
            if i == sizes.len() {
                break;
            }
        }
        let winners = paths.into_iter().filter(|(s, _)| (s - best).abs() < 1e-9).map(|(_, p)| p).collect();
        (best, winners)
    }

    fn model_from(words: &[Vec<usize>]) -> BigramModel {
        let mut m = BigramModel::uniform((0..8).collect());
        for w in words {
            m.observe(w).unwrap();
        }
        m
    }

    fn lattice_strategy() -> impl Strategy<Value = CandidateLattice> {
        proptest::collection::vec(
            proptest::collection::vec((0usize..8, 0.01f64..1.0), 1..=4),
            1..=6,
        )
        .prop_map(|ps| {
            CandidateLattice::new(
                ps.into_iter()
                    .map(|p| p.into_iter().map(|(label, confidence)| Candidate { label, confidence }).collect())
                    .collect(),
            )
        })
    }

    #[test]
    fn single_candidates_pass_through() {
        let m = model_from(&[]);
        let l = CandidateLattice::new(vec![
            vec![Candidate { label: 3, confidence: 0.2 }],
            vec![Candidate { label: 1, confidence: 0.9 }],
        ]);
        assert_eq!(viterbi_decode(&l, &m, 1.0).unwrap(), vec![3, 1]);
    }

    #[test]
    fn unknown_label() {
        let m = model_from(&[]);
        let l = CandidateLattice::new(vec![vec![Candidate { label: 99, confidence: 1.0 }]]);
        assert!(matches!(viterbi_decode(&l, &m, 1.0), Err(DecodeError::UnknownLabel(99))));
    }

    #[test]
    fn exact_ties_prefer_smaller_ids() {
        let m = model_from(&[]);
        let l = CandidateLattice::new(vec![vec![
            Candidate { label: 5, confidence: 0.5 },
            Candidate { label: 2, confidence: 0.5 },
        ]]);
        assert_eq!(viterbi_decode(&l, &m, 1.0).unwrap(), vec![2]);
    }

    proptest! {
        #[test]
        fn matches_exhaustive_search(
            lattice in lattice_strategy(),
            words in proptest::collection::vec(proptest::collection::vec(0usize..8, 1..5), 0..12),
        ) {
            let m = model_from(&words);
            let got = viterbi_decode(&lattice, &m, 1.0).unwrap();
            let (best, winners) = brute_force(&lattice, &m);
            let choice: Vec<usize> = got
                .iter()
                .enumerate()
                .map(|(i, l)| {
                    // the best-scoring candidate carrying this label
                    (0..lattice.positions[i].len())
                        .filter(|&k| lattice.positions[i][k].label == *l)
                        .max_by(|&a, &b| lattice.positions[i][a].confidence.total_cmp(&lattice.positions[i][b].confidence))
                        .unwrap()
                })
                .collect();
            let s = path_score(&lattice, &choice, &m, 1.0).unwrap();
            prop_assert!((s - best).abs() < 1e-9, "{} vs {}", s, best);
            if winners.len() == 1 {
                prop_assert_eq!(&got, &winners[0]);
            } else {
                prop_assert!(winners.iter().all(|w| &got <= w));
            }
        }

        #[test]
        fn uniform_model_is_greedy(lattice in lattice_strategy()) {
            let m = model_from(&[]);
            prop_assert_eq!(viterbi_decode(&lattice, &m, 1.0).unwrap(), lattice.greedy());
        }

        #[test]
        fn boosting_the_winner_keeps_it(
            lattice in lattice_strategy(),
            words in proptest::collection::vec(proptest::collection::vec(0usize..8, 1..5), 0..12),
            boost in 1.0f64..3.0,
        ) {
            let m = model_from(&words);
            let winner = viterbi_decode(&lattice, &m, 1.0).unwrap();
            let mut boosted = lattice.clone();
            for (i, cands) in boosted.positions.iter_mut().enumerate() {
                for c in cands.iter_mut() {
                    if c.label == winner[i] {
                        c.confidence *= boost;
                    }
                }
            }
            prop_assert_eq!(viterbi_decode(&boosted, &m, 1.0).unwrap(), winner);
        }
    }
}
