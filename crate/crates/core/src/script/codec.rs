use unicode_normalization::UnicodeNormalization;

use super::{LabelId, Role, ScriptError, SymbolRegistry, Vowel};

const VIRAMA: char = '\u{0CCD}';
const RA: char = '\u{0CB0}';
const KANNADA_ZERO: char = '\u{0CE6}';

/// One orthographic syllable: a starter followed by its attachers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Akshara {
    pub members: Vec<LabelId>,
    /// Dependent vowel of the starting consonant-vowel unit, emitted last.
    pub pending_vowel: Option<Vowel>,
}

/// Join letterpress vowel parts onto their base. A part combines with the
/// nearest preceding base unit, skipping any ottus printed between them.
pub fn combine_parts(registry: &SymbolRegistry, labels: &[LabelId]) -> Vec<LabelId> {
    let mut out: Vec<LabelId> = Vec::with_capacity(labels.len());
    for &l in labels {
        if registry.role(l) == Role::VowelModifierPart {
            let base_pos = out
                .iter()
                .rposition(|&p| !matches!(registry.role(p), Role::Ottu | Role::OttuComplex));
            if let Some(pos) = base_pos {
                if let Some(joined) = registry.combined(out[pos], l) {
                    out[pos] = joined;
                    continue;
                }
            }
        }
        out.push(l);
    }
    out
}

/// Resolve glyphs that stand for two different characters using the labels
/// around them.
///
/// * the nine/arkaa glyph is an arkaa when the preceding starter is a
///   consonant-vowel unit, otherwise the digit nine;
/// * a run of anusvara/zero glyphs is the digit zero when a digit sits on
///   either side of the run, otherwise anusvara;
/// * a visarga not preceded by a Kannada letter is a colon and a colon that
///   is preceded by one is a visarga.
pub fn disambiguate(registry: &SymbolRegistry, labels: &[LabelId]) -> Vec<LabelId> {
    let nine_or_arkaa = registry.required("nine_or_arkaa");
    let anusvara_or_zero = registry.required("anusvara_or_zero");
    let (arkaa, nine, zero) = (
        registry.required("arkaa"),
        registry.required("kdigit_9"),
        registry.required("kdigit_0"),
    );
    let (visarga, colon) = (registry.required("visarga"), registry.required("colon"));

    let mut out = labels.to_vec();
    for i in 0..out.len() {
        if out[i] != nine_or_arkaa {
            continue;
        }
        let prev_starter = out[..i].iter().rev().find(|&&p| !registry.role(p).is_attacher());
        out[i] = match prev_starter {
            Some(&p) if registry.role(p) == Role::ConsonantVowel => arkaa,
            _ => nine,
        };
    }

    let mut i = 0;
    while i < out.len() {
        if out[i] != anusvara_or_zero {
            i += 1;
            continue;
        }
        let start = i;
        while i < out.len() && out[i] == anusvara_or_zero {
            i += 1;
        }
        let digit_before = start > 0 && registry.role(out[start - 1]).is_digit();
        let digit_after = i < out.len() && registry.role(out[i]).is_digit();
        if digit_before || digit_after {
            out[start..i].iter_mut().for_each(|l| *l = zero);
        }
    }

    for i in 0..out.len() {
        let after_letter = i > 0 && registry.role(out[i - 1]).is_letter();
        if out[i] == visarga && !after_letter {
            out[i] = colon;
        } else if out[i] == colon && after_letter {
            out[i] = visarga;
        }
    }
    out
}

/// Split a label stream into aksharas.
pub fn group_aksharas(registry: &SymbolRegistry, labels: &[LabelId]) -> Result<Vec<Akshara>, ScriptError> {
    let mut out: Vec<Akshara> = Vec::new();
    for &l in labels {
        let label = registry.label(l);
        if label.role.is_attacher() {
            let Some(current) = out.last_mut() else {
                return Err(ScriptError::OrphanAttacher { label: label.name.clone() });
            };
            current.members.push(l);
        } else {
            out.push(Akshara {
                members: vec![l],
                pending_vowel: label.vowel,
            });
        }
    }
    Ok(out)
}

/// Combine the pending vowel with a modifier mark.
pub fn resolve_vowel_sign(registry: &SymbolRegistry, previous: Vowel, mark: LabelId) -> Result<Vowel, ScriptError> {
    registry
        .resolved(previous, mark)
        .ok_or_else(|| ScriptError::UnresolvablePair {
            vowel: previous.name().to_string(),
            mark: registry.label(mark).name.clone(),
        })
}

fn apply_mark(registry: &SymbolRegistry, pending: Option<Vowel>, mark: LabelId) -> Result<Vowel, ScriptError> {
    match pending {
        Some(v) => resolve_vowel_sign(registry, v, mark),
        None => Err(ScriptError::UnresolvablePair {
            vowel: "none".to_string(),
            mark: registry.label(mark).name.clone(),
        }),
    }
}

/// Code points of one akshara. An arkaa moves to the front, and the
/// starting unit's vowel sign, after resolving any marks, goes last.
pub fn akshara_unicode(registry: &SymbolRegistry, akshara: &Akshara) -> Result<Vec<char>, ScriptError> {
    let mut out = Vec::new();
    if akshara.members.iter().any(|&m| registry.role(m) == Role::ArkaaMark) {
        out.extend([RA, VIRAMA]);
    }
    let Some((&first, rest)) = akshara.members.split_first() else {
        return Ok(out);
    };
    let head = registry.label(first);
    let mut pending = None;
    match head.role {
        Role::ConsonantVowel => {
            out.push(head.unicode[0]);
            pending = head.vowel;
        }
        Role::VowelModifierPart | Role::Dheergha => {
            return Err(ScriptError::OrphanAttacher { label: head.name.clone() });
        }
        _ => out.extend(&head.unicode),
    }
    for &m in rest {
        let label = registry.label(m);
        match label.role {
            Role::Ottu => out.extend(&label.unicode),
            Role::OttuComplex => {
                out.extend(&label.unicode);
                if let Some(mark) = label.mark {
                    pending = Some(apply_mark(registry, pending, mark)?);
                }
            }
            Role::ArkaaMark => {}
            Role::VowelModifierPart | Role::Dheergha => pending = Some(apply_mark(registry, pending, m)?),
            _ => out.extend(&label.unicode),
        }
    }
    if let Some(sign) = pending.and_then(Vowel::sign) {
        out.push(sign);
    }
    Ok(out)
}

/// Unicode text of one word's label stream.
pub fn word_unicode(registry: &SymbolRegistry, labels: &[LabelId]) -> Result<String, ScriptError> {
    let combined = combine_parts(registry, labels);
    let resolved = disambiguate(registry, &combined);
    let mut s = String::new();
    for a in group_aksharas(registry, &resolved)? {
        s.extend(akshara_unicode(registry, &a)?);
    }
    Ok(s)
}

/// Plain concatenation of each label's code points; the fallback when a
/// stream cannot be shaped into valid aksharas.
pub fn raw_unicode(registry: &SymbolRegistry, labels: &[LabelId]) -> String {
    labels.iter().flat_map(|&l| registry.label(l).unicode.iter()).collect()
}

/// Recognition units that spell `text`, in the order a page shows them.
///
/// Derived characters map back to the glyph that prints them: the Kannada
/// digits zero and nine become the shared anusvara/zero and nine/arkaa units
/// and a leading ra + virama of a cluster becomes the arkaa glyph.
pub fn unicode_to_symbols(registry: &SymbolRegistry, text: &str) -> Result<Vec<LabelId>, ScriptError> {
    let chars: Vec<char> = text.nfc().collect();
    let unsupported = |i: usize| ScriptError::UnsupportedCodePoint {
        code_point: chars[i],
        position: i,
    };
    let nine_or_arkaa = registry.required("nine_or_arkaa");
    let anusvara_or_zero = registry.required("anusvara_or_zero");

    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if !registry.is_consonant(c) {
            let id = if c == KANNADA_ZERO {
                Some(anusvara_or_zero)
            } else {
                registry.single_unit(c)
            };
            match id {
                Some(id) if !registry.role(id).is_attacher() => out.push(id),
                _ => return Err(unsupported(i)),
            }
            i += 1;
            continue;
        }

        let start = i;
        let mut chain = vec![c];
        i += 1;
        let mut dead = false;
        while i < chars.len() && chars[i] == VIRAMA {
            if i + 1 < chars.len() && registry.is_consonant(chars[i + 1]) {
                chain.push(chars[i + 1]);
                i += 2;
            } else {
                dead = true;
                i += 1;
                break;
            }
        }
        if dead {
            if chain.len() != 1 {
                return Err(unsupported(i - 1));
            }
            out.push(registry.pure_unit(c).ok_or_else(|| unsupported(start))?);
            continue;
        }
        let mut vowel = Vowel::A;
        if i < chars.len() {
            if let Some(v) = Vowel::from_sign(chars[i]) {
                vowel = v;
                i += 1;
            }
        }
        let arkaa = chain.len() >= 2 && chain[0] == RA;
        if arkaa {
            chain.remove(0);
        }
        let (cv, mark) = match registry.cv_unit(chain[0], vowel) {
            Some(id) => (id, None),
            None => {
                let (base, mark) = registry.split_vowel(vowel).ok_or_else(|| unsupported(i - 1))?;
                (registry.cv_unit(chain[0], base).ok_or_else(|| unsupported(start))?, Some(mark))
            }
        };
        out.push(cv);
        for &o in &chain[1..] {
            out.push(registry.ottu_unit(o).ok_or_else(|| unsupported(start))?);
        }
        out.extend(mark);
        if arkaa {
            out.push(nine_or_arkaa);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reg() -> SymbolRegistry {
        SymbolRegistry::builtin()
    }

    fn ids(r: &SymbolRegistry, names: &[&str]) -> Vec<LabelId> {
        names.iter().map(|n| r.id(n).unwrap_or_else(|| panic!("{n}"))).collect()
    }

    #[test]
    fn part_combination() {
        let r = reg();
        assert_eq!(combine_parts(&r, &ids(&r, &["ka", "aa_part"])), ids(&r, &["kaa"]));
        assert_eq!(combine_parts(&r, &ids(&r, &["na", "u_part"])), ids(&r, &["nu"]));
        assert_eq!(combine_parts(&r, &ids(&r, &["ka", "k_ottu", "aa_part"])), ids(&r, &["kaa", "k_ottu"]));
        let plain = ids(&r, &["sa", "v_ottu", "ta"]);
        assert_eq!(combine_parts(&r, &plain), plain);
    }

    #[test]
    fn context_disambiguation() {
        let r = reg();
        let d = disambiguate(&r, &ids(&r, &["kdigit_1", "anusvara_or_zero", "kdigit_2"]));
        assert_eq!(d, ids(&r, &["kdigit_1", "kdigit_0", "kdigit_2"]));
        let d = disambiguate(&r, &ids(&r, &["ka", "anusvara_or_zero"]));
        assert_eq!(d, ids(&r, &["ka", "anusvara_or_zero"]));
        let d = disambiguate(&r, &ids(&r, &["suu", "ya", "nine_or_arkaa"]));
        assert_eq!(d, ids(&r, &["suu", "ya", "arkaa"]));
        let d = disambiguate(&r, &ids(&r, &["kdigit_1", "nine_or_arkaa"]));
        assert_eq!(d, ids(&r, &["kdigit_1", "kdigit_9"]));
        let d = disambiguate(&r, &ids(&r, &["visarga"]));
        assert_eq!(d, ids(&r, &["colon"]));
        let d = disambiguate(&r, &ids(&r, &["bhuu", "colon"]));
        assert_eq!(d, ids(&r, &["bhuu", "visarga"]));
    }

    #[test]
    fn grouping() {
        let r = reg();
        let g = group_aksharas(&r, &ids(&r, &["sa", "v_ottu", "anusvara_or_zero", "ta"])).unwrap();
        let members: Vec<Vec<LabelId>> = g.into_iter().map(|a| a.members).collect();
        assert_eq!(members, vec![ids(&r, &["sa", "v_ottu"]), ids(&r, &["anusvara_or_zero"]), ids(&r, &["ta"])]);
        assert_eq!(group_aksharas(&r, &ids(&r, &["kdigit_1", "kdigit_2"])).unwrap().len(), 2);
        assert!(matches!(
            group_aksharas(&r, &ids(&r, &["k_ottu", "ka"])),
            Err(ScriptError::OrphanAttacher { .. })
        ));
    }

    #[test]
    fn vowel_resolution() {
        let r = reg();
        assert_eq!(resolve_vowel_sign(&r, Vowel::I, r.id("dheergha").unwrap()).unwrap(), Vowel::Ii);
        assert_eq!(resolve_vowel_sign(&r, Vowel::E, r.id("ai_mark").unwrap()).unwrap(), Vowel::Ai);
        assert!(matches!(
            resolve_vowel_sign(&r, Vowel::I, r.id("ki").unwrap()),
            Err(ScriptError::UnresolvablePair { .. })
        ));
    }

    #[test]
    fn reordering_inside_aksharas() {
        let r = reg();
        let ya = Akshara {
            members: ids(&r, &["ya", "arkaa"]),
            pending_vowel: Some(Vowel::A),
        };
        assert_eq!(akshara_unicode(&r, &ya).unwrap(), vec!['ರ', '್', 'ಯ']);
        let kai = Akshara {
            members: ids(&r, &["ke", "r_ottu", "ai_mark"]),
            pending_vowel: Some(Vowel::E),
        };
        assert_eq!(akshara_unicode(&r, &kai).unwrap(), vec!['ಕ', '್', 'ರ', 'ೈ']);
        let ka = Akshara {
            members: ids(&r, &["ka"]),
            pending_vowel: Some(Vowel::A),
        };
        assert_eq!(akshara_unicode(&r, &ka).unwrap(), vec!['ಕ']);
    }

    #[test]
    fn sample_words() {
        let r = reg();
        let cases: [(&[&str], &str); 5] = [
            (&["raa", "ssa", "tt_ottu", "r_ottu", "pa", "ti"], "ರಾಷ್ಟ್ರಪತಿ"),
            (&["sa", "anusvara_or_zero", "sa", "k_ottu", "ru_mark", "ti"], "ಸಂಸ್ಕೃತಿ"),
            (&["ke", "r_ottu", "ai_mark", "sa", "t_ottu"], "ಕ್ರೈಸ್ತ"),
            (&["suu", "ya", "nine_or_arkaa"], "ಸೂರ್ಯ"),
            (&["sa", "kru_ottu", "ti"], "ಸ್ಕೃತಿ"),
        ];
        for (names, want) in cases {
            assert_eq!(word_unicode(&r, &ids(&r, names)).unwrap(), want, "{names:?}");
        }
        assert_eq!(word_unicode(&r, &[]).unwrap(), "");
    }

    #[test]
    fn reverse_transform() {
        let r = reg();
        assert_eq!(unicode_to_symbols(&r, "ಸೂರ್ಯ").unwrap(), ids(&r, &["suu", "ya", "nine_or_arkaa"]));
        assert_eq!(
            unicode_to_symbols(&r, "ಕ್ರೈಸ್ತ").unwrap(),
            ids(&r, &["ke", "r_ottu", "ai_mark", "sa", "t_ottu"])
        );
        assert_eq!(unicode_to_symbols(&r, "ಕೀ").unwrap(), ids(&r, &["ki", "dheergha"]));
        assert_eq!(unicode_to_symbols(&r, "ಕ್").unwrap(), ids(&r, &["k_pure"]));
        assert!(unicode_to_symbols(&r, "").unwrap().is_empty());
        assert!(matches!(
            unicode_to_symbols(&r, "ಕ್ಕ್"),
            Err(ScriptError::UnsupportedCodePoint { .. })
        ));
        assert!(matches!(
            unicode_to_symbols(&r, "abc"),
            Err(ScriptError::UnsupportedCodePoint { code_point: 'a', position: 0 })
        ));
    }

    #[test]
    fn decomposed_input_is_normalised() {
        let r = reg();
        // ka + e sign + length mark composes to ka + ee sign.
        assert_eq!(unicode_to_symbols(&r, "ಕ\u{0CC6}\u{0CD5}").unwrap(), ids(&r, &["ke", "dheergha"]));
    }

    #[test]
    fn lexicon_round_trip() {
        let r = reg();
        for word in include_str!("../../data/lexicon.txt").lines() {
            let labels = unicode_to_symbols(&r, word).unwrap_or_else(|e| panic!("{word}: {e}"));
            let back = word_unicode(&r, &labels).unwrap_or_else(|e| panic!("{word}: {e}"));
            assert_eq!(back, word.nfc().collect::<String>(), "{word}");
        }
    }
}
