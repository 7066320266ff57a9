use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use super::ScriptError;

pub type LabelId = usize;

const BUILTIN: &str = include_str!("../../data/registry.tsv");
const FORMAT_VERSION: u32 = 1;

/// Labels the codec refers to by name.
const REQUIRED: &[&str] = &[
    "anusvara_or_zero",
    "nine_or_arkaa",
    "visarga",
    "colon",
    "kdigit_0",
    "kdigit_9",
    "arkaa",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    IndependentVowel,
    ConsonantVowel,
    PureConsonant,
    Ottu,
    OttuComplex,
    VowelModifierPart,
    Dheergha,
    ArkaaMark,
    AnusvaraOrZero,
    NineOrArkaa,
    Visarga,
    KannadaDigit,
    ArabicDigit,
    Punctuation,
    Special,
}

impl Role {
    const NAMES: [(&'static str, Role); 15] = [
        ("independent_vowel", Role::IndependentVowel),
        ("consonant_vowel", Role::ConsonantVowel),
        ("pure_consonant", Role::PureConsonant),
        ("ottu", Role::Ottu),
        ("ottu_complex", Role::OttuComplex),
        ("vowel_modifier_part", Role::VowelModifierPart),
        ("dheergha", Role::Dheergha),
        ("arkaa_mark", Role::ArkaaMark),
        ("anusvara_or_zero", Role::AnusvaraOrZero),
        ("nine_or_arkaa", Role::NineOrArkaa),
        ("visarga", Role::Visarga),
        ("kannada_digit", Role::KannadaDigit),
        ("arabic_digit", Role::ArabicDigit),
        ("punctuation", Role::Punctuation),
        ("special", Role::Special),
    ];

    pub fn name(self) -> &'static str {
        Self::NAMES.iter().find(|(_, r)| *r == self).map(|(n, _)| *n).unwrap_or("?")
    }

    /// Roles that join the preceding akshara instead of opening one.
    pub fn is_attacher(self) -> bool {
        matches!(
            self,
            Role::Ottu | Role::OttuComplex | Role::VowelModifierPart | Role::Dheergha | Role::ArkaaMark
        )
    }

    pub fn is_digit(self) -> bool {
        matches!(self, Role::KannadaDigit | Role::ArabicDigit)
    }

    /// Roles that only occur inside Kannada words.
    pub fn is_letter(self) -> bool {
        matches!(
            self,
            Role::IndependentVowel
                | Role::ConsonantVowel
                | Role::PureConsonant
                | Role::Ottu
                | Role::OttuComplex
                | Role::VowelModifierPart
                | Role::Dheergha
                | Role::ArkaaMark
                | Role::AnusvaraOrZero
                | Role::Visarga
        )
    }
}

impl FromStr for Role {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        Self::NAMES.iter().find(|(n, _)| *n == s).map(|(_, r)| *r).ok_or(())
    }
}

/// Dependent vowels, `A` being the inherent vowel with no sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Vowel {
    A,
    Aa,
    I,
    Ii,
    U,
    Uu,
    Ru,
    E,
    Ee,
    Ai,
    O,
    Oo,
    Au,
}

impl Vowel {
    pub const ALL: [Vowel; 13] = [
        Vowel::A,
        Vowel::Aa,
        Vowel::I,
        Vowel::Ii,
        Vowel::U,
        Vowel::Uu,
        Vowel::Ru,
        Vowel::E,
        Vowel::Ee,
        Vowel::Ai,
        Vowel::O,
        Vowel::Oo,
        Vowel::Au,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Vowel::A => "a",
            Vowel::Aa => "aa",
            Vowel::I => "i",
            Vowel::Ii => "ii",
            Vowel::U => "u",
            Vowel::Uu => "uu",
            Vowel::Ru => "ru",
            Vowel::E => "e",
            Vowel::Ee => "ee",
            Vowel::Ai => "ai",
            Vowel::O => "o",
            Vowel::Oo => "oo",
            Vowel::Au => "au",
        }
    }

    /// The dependent vowel sign, `None` for the inherent vowel.
    pub fn sign(self) -> Option<char> {
        let cp = match self {
            Vowel::A => return None,
            Vowel::Aa => 0x0CBE,
            Vowel::I => 0x0CBF,
            Vowel::Ii => 0x0CC0,
            Vowel::U => 0x0CC1,
            Vowel::Uu => 0x0CC2,
            Vowel::Ru => 0x0CC3,
            Vowel::E => 0x0CC6,
            Vowel::Ee => 0x0CC7,
            Vowel::Ai => 0x0CC8,
            Vowel::O => 0x0CCA,
            Vowel::Oo => 0x0CCB,
            Vowel::Au => 0x0CCC,
        };
        char::from_u32(cp)
    }

    pub fn from_sign(c: char) -> Option<Vowel> {
        Vowel::ALL.into_iter().find(|v| v.sign() == Some(c))
    }
}

impl fmt::Display for Vowel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Vowel {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        Vowel::ALL.into_iter().find(|v| v.name() == s).ok_or(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolLabel {
    pub id: LabelId,
    pub name: String,
    pub role: Role,
    pub unicode: Vec<char>,
    /// Dependent vowel carried by a consonant-vowel unit.
    pub vowel: Option<Vowel>,
    /// Vowel mark folded into an ottu complex.
    pub mark: Option<LabelId>,
    /// Context-resolved label that the classifier never emits.
    pub derived: bool,
}

impl SymbolLabel {
    /// Consonant of consonant-bearing units.
    pub fn consonant(&self) -> Option<char> {
        match self.role {
            Role::ConsonantVowel | Role::PureConsonant => self.unicode.first().copied(),
            Role::Ottu => self.unicode.get(1).copied(),
            _ => None,
        }
    }
}

/// The recognition-unit inventory with its combination and resolution tables.
#[derive(Debug, Clone)]
pub struct SymbolRegistry {
    labels: Vec<SymbolLabel>,
    by_name: HashMap<String, LabelId>,
    combine: HashMap<(LabelId, LabelId), LabelId>,
    resolve: HashMap<(Vowel, LabelId), Vowel>,
    split: HashMap<Vowel, (Vowel, LabelId)>,
    cv: HashMap<(char, Vowel), LabelId>,
    pure: HashMap<char, LabelId>,
    ottu: HashMap<char, LabelId>,
    single: HashMap<char, LabelId>,
}

fn malformed(line: usize, message: impl Into<String>) -> ScriptError {
    ScriptError::MalformedRegistry {
        line,
        message: message.into(),
    }
}

impl SymbolRegistry {
    /// The registry shipped with the crate.
    pub fn builtin() -> Self {
        Self::parse(BUILTIN).expect("shipped registry is valid")
    }

    pub fn load(path: &Path) -> Result<Self, ScriptError> {
        let text = std::fs::read_to_string(path).map_err(|e| ScriptError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ScriptError> {
        let mut version = None;
        let mut labels: Vec<SymbolLabel> = Vec::new();
        let mut pending_marks: Vec<(usize, LabelId, String)> = Vec::new();
        let mut combine_rows: Vec<(usize, [String; 3])> = Vec::new();
        let mut resolve_rows: Vec<(usize, [String; 3])> = Vec::new();

        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.trim_end();
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            match f[0] {
                "version" => {
                    let v: u32 = f
                        .get(1)
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| malformed(lineno, "bad version"))?;
                    if v != FORMAT_VERSION {
                        return Err(malformed(lineno, format!("unsupported version {v}")));
                    }
                    version = Some(v);
                }
                "label" => {
                    if f.len() < 5 || f.len() > 6 {
                        return Err(malformed(lineno, "label needs 4 or 5 fields"));
                    }
                    let id: LabelId = f[1].parse().map_err(|_| malformed(lineno, "bad id"))?;
                    if id != labels.len() {
                        return Err(malformed(lineno, format!("expected id {}, found {id}", labels.len())));
                    }
                    let role: Role = f[3].parse().map_err(|_| malformed(lineno, format!("unknown role {}", f[3])))?;
                    let unicode = if f[4] == "-" {
                        Vec::new()
                    } else {
                        f[4].split(' ')
                            .map(|h| u32::from_str_radix(h, 16).ok().and_then(char::from_u32))
                            .collect::<Option<Vec<char>>>()
                            .ok_or_else(|| malformed(lineno, "bad code point"))?
                    };
                    let mut label = SymbolLabel {
                        id,
                        name: f[2].to_string(),
                        role,
                        unicode,
                        vowel: None,
                        mark: None,
                        derived: false,
                    };
                    if let Some(attrs) = f.get(5) {
                        for attr in attrs.split(' ') {
                            match attr.split_once('=') {
                                Some(("vowel", v)) => {
                                    label.vowel = Some(v.parse().map_err(|_| malformed(lineno, format!("unknown vowel {v}")))?)
                                }
                                Some(("mark", m)) => pending_marks.push((lineno, id, m.to_string())),
                                None if attr == "derived" => label.derived = true,
                                _ => return Err(malformed(lineno, format!("unknown attribute {attr}"))),
                            }
                        }
                    }
                    let needs_code = !matches!(role, Role::VowelModifierPart | Role::Dheergha);
                    if needs_code && label.unicode.is_empty() {
                        return Err(malformed(lineno, "missing code points"));
                    }
                    if (role == Role::ConsonantVowel) != label.vowel.is_some() {
                        return Err(malformed(lineno, "vowel= is required exactly on consonant_vowel labels"));
                    }
                    labels.push(label);
                }
                "combine" | "resolve" => {
                    if f.len() != 4 {
                        return Err(malformed(lineno, format!("{} needs 3 fields", f[0])));
                    }
                    let row = [f[1].to_string(), f[2].to_string(), f[3].to_string()];
                    if f[0] == "combine" {
                        combine_rows.push((lineno, row));
                    } else {
                        resolve_rows.push((lineno, row));
                    }
                }
                other => return Err(malformed(lineno, format!("unknown record {other}"))),
            }
        }
        if version.is_none() {
            return Err(malformed(0, "missing version record"));
        }
        if labels.is_empty() {
            return Err(malformed(0, "no labels"));
        }

        let mut by_name = HashMap::new();
        for l in &labels {
            if by_name.insert(l.name.clone(), l.id).is_some() {
                return Err(malformed(0, format!("duplicate label name {}", l.name)));
            }
        }
        let lookup = |line: usize, name: &str| -> Result<LabelId, ScriptError> {
            by_name.get(name).copied().ok_or_else(|| ScriptError::DanglingReference {
                line,
                name: name.to_string(),
            })
        };
        for name in REQUIRED {
            lookup(0, name)?;
        }
        for (line, id, m) in pending_marks {
            labels[id].mark = Some(lookup(line, &m)?);
        }

        let mut combine = HashMap::new();
        for (line, [b, p, r]) in &combine_rows {
            let (b, p, r) = (lookup(*line, b)?, lookup(*line, p)?, lookup(*line, r)?);
            if labels[p].role != Role::VowelModifierPart {
                return Err(malformed(*line, "combine part must be a vowel_modifier_part"));
            }
            if !matches!(labels[r].role, Role::ConsonantVowel | Role::PureConsonant) {
                return Err(malformed(*line, "combine result must be a consonant unit"));
            }
            combine.insert((b, p), r);
        }
        let mut resolve = HashMap::new();
        let mut split = HashMap::new();
        for (line, [v, m, out]) in &resolve_rows {
            let v: Vowel = v.parse().map_err(|_| malformed(*line, format!("unknown vowel {v}")))?;
            let out: Vowel = out.parse().map_err(|_| malformed(*line, format!("unknown vowel {out}")))?;
            let m = lookup(*line, m)?;
            resolve.insert((v, m), out);
            split.entry(out).or_insert((v, m));
        }

        let mut cv = HashMap::new();
        let mut pure = HashMap::new();
        let mut ottu = HashMap::new();
        let mut single = HashMap::new();
        for l in labels.iter().filter(|l| !l.derived) {
            match l.role {
                Role::ConsonantVowel => {
                    cv.insert((l.unicode[0], l.vowel.expect("checked above")), l.id);
                }
                Role::PureConsonant => {
                    pure.insert(l.unicode[0], l.id);
                }
                Role::Ottu => {
                    ottu.insert(l.unicode[1], l.id);
                }
                _ => {
                    if let [c] = l.unicode[..] {
                        single.entry(c).or_insert(l.id);
                    }
                }
            }
        }

        Ok(Self {
            labels,
            by_name,
            combine,
            resolve,
            split,
            cv,
            pure,
            ottu,
            single,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[SymbolLabel] {
        &self.labels
    }

    /// Labels a classifier can emit (everything not context-derived).
    pub fn recognition_labels(&self) -> impl Iterator<Item = &SymbolLabel> {
        self.labels.iter().filter(|l| !l.derived)
    }

    pub fn label(&self, id: LabelId) -> &SymbolLabel {
        &self.labels[id]
    }

    pub fn get(&self, id: LabelId) -> Option<&SymbolLabel> {
        self.labels.get(id)
    }

    pub fn id(&self, name: &str) -> Option<LabelId> {
        self.by_name.get(name).copied()
    }

    /// Like [`id`](Self::id) for names the registry is known to contain.
    pub(crate) fn required(&self, name: &str) -> LabelId {
        self.by_name[name]
    }

    pub fn role(&self, id: LabelId) -> Role {
        self.labels[id].role
    }

    pub fn combined(&self, base: LabelId, part: LabelId) -> Option<LabelId> {
        self.combine.get(&(base, part)).copied()
    }

    pub fn combinations(&self) -> impl Iterator<Item = ((LabelId, LabelId), LabelId)> + '_ {
        self.combine.iter().map(|(&k, &v)| (k, v))
    }

    pub fn resolved(&self, vowel: Vowel, mark: LabelId) -> Option<Vowel> {
        self.resolve.get(&(vowel, mark)).copied()
    }

    /// Base vowel and mark that spell `vowel` when no unit carries it whole.
    pub fn split_vowel(&self, vowel: Vowel) -> Option<(Vowel, LabelId)> {
        self.split.get(&vowel).copied()
    }

    pub fn cv_unit(&self, consonant: char, vowel: Vowel) -> Option<LabelId> {
        self.cv.get(&(consonant, vowel)).copied()
    }

    pub fn pure_unit(&self, consonant: char) -> Option<LabelId> {
        self.pure.get(&consonant).copied()
    }

    pub fn ottu_unit(&self, consonant: char) -> Option<LabelId> {
        self.ottu.get(&consonant).copied()
    }

    /// Recognition unit spelled by a single code point (vowels, digits,
    /// punctuation, signs).
    pub fn single_unit(&self, c: char) -> Option<LabelId> {
        self.single.get(&c).copied()
    }

    pub fn is_consonant(&self, c: char) -> bool {
        self.cv.contains_key(&(c, Vowel::A))
    }
}

pub fn load_registry(path: &Path) -> Result<SymbolRegistry, ScriptError> {
    SymbolRegistry::load(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_inventory() {
        let r = SymbolRegistry::builtin();
        assert_eq!(r.recognition_labels().count(), 390);
        assert_eq!(r.len(), 393);
        let ka = r.id("ka").unwrap();
        assert_eq!(r.combined(ka, r.id("aa_part").unwrap()), r.id("kaa"));
        assert_eq!(r.resolved(Vowel::I, r.id("dheergha").unwrap()), Some(Vowel::Ii));
        assert_eq!(r.split_vowel(Vowel::Ai), Some((Vowel::E, r.id("ai_mark").unwrap())));
        assert_eq!(r.label(r.id("rai_ottu").unwrap()).mark, r.id("ai_mark"));
    }

    #[test]
    fn closure_holds() {
        let r = SymbolRegistry::builtin();
        for ((_, _), out) in r.combinations() {
            assert!(!r.label(out).unicode.is_empty());
        }
        for v in Vowel::ALL {
            if let Some((base, mark)) = r.split_vowel(v) {
                assert_eq!(r.resolved(base, mark), Some(v));
            }
        }
    }

    #[test]
    fn empty_file_is_malformed() {
        assert!(matches!(SymbolRegistry::parse(""), Err(ScriptError::MalformedRegistry { .. })));
    }

    #[test]
    fn dangling_combination() {
        let mut text = BUILTIN.to_string();
        text.push_str("combine\tka\taa_part\tno_such_label\n");
        assert!(matches!(
            SymbolRegistry::parse(&text),
            Err(ScriptError::DanglingReference { name, .. }) if name == "no_such_label"
        ));
    }

    #[test]
    fn future_version_rejected() {
        let text = BUILTIN.replacen("version\t1", "version\t2", 1);
        assert!(SymbolRegistry::parse(&text).is_err());
    }
}
