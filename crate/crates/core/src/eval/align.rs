/// Edit operation counts of a minimal alignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EditCounts {
    pub substitutions: usize,
    pub insertions: usize,
    pub deletions: usize,
}

impl EditCounts {
    pub fn distance(&self) -> usize {
        self.substitutions + self.insertions + self.deletions
    }
}

/// Unit-cost Levenshtein alignment of `hypothesis` against `reference`.
///
/// Among minimal alignments the one with the fewest insertions plus
/// deletions is reported, so the split is canonical and swapping the
/// arguments swaps insertions with deletions. Since the hypothesis length is
/// `len(ref) - D + I`, the split follows from the edit distance and the
/// indel count alone, and two rolling rows suffice.
pub fn levenshtein_align<T: PartialEq>(reference: &[T], hypothesis: &[T]) -> EditCounts {
    let (n, m) = (reference.len(), hypothesis.len());
    // (edits, indels), compared lexicographically.
    let mut prev: Vec<(usize, usize)> = (0..=m).map(|j| (j, j)).collect();
    let mut cur = vec![(0usize, 0usize); m + 1];
    for i in 1..=n {
        cur[0] = (i, i);
        for j in 1..=m {
            let diag = if reference[i - 1] == hypothesis[j - 1] {
                prev[j - 1]
            } else {
                (prev[j - 1].0 + 1, prev[j - 1].1)
            };
            let up = (prev[j].0 + 1, prev[j].1 + 1);
            let left = (cur[j - 1].0 + 1, cur[j - 1].1 + 1);
            cur[j] = diag.min(up).min(left);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let (edits, indels) = prev[m];
    // I + D = indels and I - D = m - n.
    let insertions = ((indels as i64 + m as i64 - n as i64) / 2) as usize;
    EditCounts {
        substitutions: edits - indels,
        insertions,
        deletions: indels - insertions,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Plain exhaustive recursion over the three edit choices.
    fn oracle_distance(a: &[u8], b: &[u8]) -> usize {
        match (a.split_first(), b.split_first()) {
            (None, _) => b.len(),
            (_, None) => a.len(),
            (Some((x, ra)), Some((y, rb))) => {
                let sub = oracle_distance(ra, rb) + usize::from(x != y);
                let del = oracle_distance(ra, b) + 1;
                let ins = oracle_distance(a, rb) + 1;
                sub.min(del).min(ins)
            }
        }
    }

    #[test]
    fn identical() {
        assert_eq!(levenshtein_align(b"abc", b"abc"), EditCounts::default());
    }

    #[test]
    fn single_substitution() {
        let c = levenshtein_align(b"abc", b"axc");
        assert_eq!((c.substitutions, c.insertions, c.deletions), (1, 0, 0));
    }

    #[test]
    fn pure_indels() {
        let c = levenshtein_align(b"abc", b"");
        assert_eq!((c.substitutions, c.insertions, c.deletions), (0, 0, 3));
        let c = levenshtein_align(b"", b"ab");
        assert_eq!((c.substitutions, c.insertions, c.deletions), (0, 2, 0));
        let c = levenshtein_align(b"abcd", b"abxcd");
        assert_eq!((c.substitutions, c.insertions, c.deletions), (0, 1, 0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn matches_recursion(a in proptest::collection::vec(0u8..5, 0..8), b in proptest::collection::vec(0u8..5, 0..8)) {
            let c = levenshtein_align(&a, &b);
            prop_assert_eq!(c.distance(), oracle_distance(&a, &b));
            prop_assert_eq!(b.len(), a.len() - c.deletions + c.insertions);
            let r = levenshtein_align(&b, &a);
            prop_assert_eq!((r.substitutions, r.insertions, r.deletions), (c.substitutions, c.deletions, c.insertions));
        }
    }
}
