//! Phone inventory, binary phonological features, the letter to candidate
//! phone table, and the hierarchical linguistic representation that the
//! downstream stages consume.
//!
//! The representation is stored as a flat word list with boundary marks at
//! word ends. Constituents at each level (phrase, clause, sentence) are the
//! maximal word runs closed by a mark of that level, so the hierarchy is
//! recovered with [`LinguisticRep::constituents`].

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::Range;
use std::path::Path;

use crate::error::{Error, Result};

/// Deletion symbol of the postlexical alphabet.
pub const EPSILON: &str = "ε";

/// Pad symbol used for out-of-range window positions.
pub const PAD: &str = "#";

pub const ENGLISH_PHONES: &str = include_str!("../data/phones.txt");
pub const ENGLISH_LETTERS: &str = include_str!("../data/letters.txt");

/// Set of binary phonological features, one bit per declared feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct FeatureSet(u64);

impl FeatureSet {
    pub const EMPTY: FeatureSet = FeatureSet(0);

    pub fn from_bits(bits: u64) -> Self {
        FeatureSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn with(self, feature: usize) -> Self {
        FeatureSet(self.0 | (1 << feature))
    }

    pub fn contains(self, feature: usize) -> bool {
        self.0 & (1 << feature) != 0
    }

    pub fn union(self, other: FeatureSet) -> Self {
        FeatureSet(self.0 | other.0)
    }

    pub fn intersection(self, other: FeatureSet) -> Self {
        FeatureSet(self.0 & other.0)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: FeatureSet) -> bool {
        self.0 & !other.0 == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Phone {
    pub symbol: String,
    pub features: FeatureSet,
    pub lexical: bool,
    pub postlexical: bool,
}

/// Phone inventory with feature table and letter candidates.
#[derive(Debug, Clone)]
pub struct FeatureSystem {
    feature_names: Vec<String>,
    phones: Vec<Phone>,
    index: HashMap<String, usize>,
    letter_candidates: BTreeMap<char, Vec<String>>,
    composites: Vec<Vec<String>>,
}

impl FeatureSystem {
    /// The shipped English inventory.
    pub fn english() -> Self {
        Self::parse(ENGLISH_PHONES, ENGLISH_LETTERS, "phones.txt", "letters.txt")
            .expect("shipped phone tables are valid")
    }

    pub fn load(phones: &Path, letters: &Path) -> Result<Self> {
        let p = std::fs::read_to_string(phones).map_err(|e| Error::io(phones, e))?;
        let l = std::fs::read_to_string(letters).map_err(|e| Error::io(letters, e))?;
        Self::parse(&p, &l, phones, letters)
    }

    pub fn parse(
        phones_text: &str,
        letters_text: &str,
        phones_path: impl AsRef<Path>,
        letters_path: impl AsRef<Path>,
    ) -> Result<Self> {
        let ppath = phones_path.as_ref();
        let lpath = letters_path.as_ref();
        let mut feature_names: Vec<String> = Vec::new();
        let mut phones = Vec::new();
        let mut index = HashMap::new();

        for (lineno, raw) in phones_text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols[0] == "features" {
                let list = cols.get(1).copied().unwrap_or("");
                feature_names = list.split(',').map(|s| s.trim().to_string()).collect();
                if feature_names.len() > 64 {
                    return Err(Error::parse(ppath, lineno + 1, "more than 64 features"));
                }
                continue;
            }
            if cols.len() < 2 {
                return Err(Error::parse(ppath, lineno + 1, "expected symbol, membership, features"));
            }
            if feature_names.is_empty() {
                return Err(Error::parse(ppath, lineno + 1, "phone listed before the features line"));
            }
            let symbol = cols[0].trim().to_string();
            let membership = cols[1].trim();
            if membership.chars().any(|c| c != 'L' && c != 'P') {
                return Err(Error::parse(ppath, lineno + 1, format!("bad membership {membership:?}")));
            }
            let mut features = FeatureSet::EMPTY;
            for name in cols.get(2).copied().unwrap_or("").split(',') {
                let name = name.trim();
                if name.is_empty() {
                    continue;
                }
                let f = feature_names
                    .iter()
                    .position(|n| n == name)
                    .ok_or_else(|| Error::parse(ppath, lineno + 1, format!("unknown feature {name:?}")))?;
                features = features.with(f);
            }
            if index.contains_key(&symbol) {
                return Err(Error::parse(ppath, lineno + 1, format!("duplicate phone {symbol:?}")));
            }
            if symbol != EPSILON && features.is_empty() {
                return Err(Error::parse(ppath, lineno + 1, format!("phone {symbol:?} has no features")));
            }
            index.insert(symbol.clone(), phones.len());
            phones.push(Phone {
                symbol,
                features,
                lexical: membership.contains('L'),
                postlexical: membership.contains('P'),
            });
        }
        for must in ["dx", "q", EPSILON] {
            match index.get(must) {
                Some(&i) if phones[i].lexical => {
                    return Err(Error::parse(ppath, 0, format!("{must:?} must be postlexical-only")))
                }
                Some(_) => {}
                None => return Err(Error::parse(ppath, 0, format!("inventory lacks {must:?}"))),
            }
        }

        let mut letter_candidates = BTreeMap::new();
        let mut composites = Vec::new();
        for (lineno, raw) in letters_text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (head, rest) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(lpath, lineno + 1, "expected letter<TAB>phones"))?;
            let list: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
            for p in &list {
                match index.get(p) {
                    Some(&i) if phones[i].lexical => {}
                    _ => return Err(Error::parse(lpath, lineno + 1, format!("unknown lexical phone {p:?}"))),
                }
            }
            if head == "composite" {
                if list.len() != 2 {
                    return Err(Error::parse(lpath, lineno + 1, "composites expand to exactly two phones"));
                }
                composites.push(list);
                continue;
            }
            let mut chars = head.chars();
            let letter = match (chars.next(), chars.next()) {
                (Some(c), None) if c.is_ascii_lowercase() => c,
                _ => return Err(Error::parse(lpath, lineno + 1, format!("bad letter {head:?}"))),
            };
            if list.is_empty() {
                return Err(Error::parse(lpath, lineno + 1, "letter needs at least one candidate"));
            }
            letter_candidates.insert(letter, list);
        }
        for c in 'a'..='z' {
            if !letter_candidates.contains_key(&c) {
                return Err(Error::parse(lpath, 0, format!("letter {c:?} has no candidates")));
            }
        }

        Ok(FeatureSystem {
            feature_names,
            phones,
            index,
            letter_candidates,
            composites,
        })
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn feature_count(&self) -> usize {
        self.feature_names.len()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    pub fn phones(&self) -> &[Phone] {
        &self.phones
    }

    pub fn phone(&self, symbol: &str) -> Option<&Phone> {
        self.index.get(symbol).map(|&i| &self.phones[i])
    }

    pub fn contains(&self, symbol: &str) -> bool {
        self.index.contains_key(symbol)
    }

    pub fn lexical_phones(&self) -> impl Iterator<Item = &Phone> {
        self.phones.iter().filter(|p| p.lexical)
    }

    pub fn postlexical_phones(&self) -> impl Iterator<Item = &Phone> {
        self.phones.iter().filter(|p| p.postlexical)
    }

    /// Features of a phone; empty for unknown symbols and for ε.
    pub fn features(&self, symbol: &str) -> FeatureSet {
        self.phone(symbol).map(|p| p.features).unwrap_or_default()
    }

    pub fn has_feature(&self, symbol: &str, feature: &str) -> bool {
        match self.feature_index(feature) {
            Some(f) => self.features(symbol).contains(f),
            None => false,
        }
    }

    pub fn is_vowel(&self, symbol: &str) -> bool {
        self.has_feature(symbol, "syllabic")
    }

    pub fn letter_candidates(&self, letter: char) -> Option<&[String]> {
        self.letter_candidates.get(&letter).map(Vec::as_slice)
    }

    /// Adds a candidate phone for a letter.
    pub fn add_letter_candidate(&mut self, letter: char, phone: &str) -> Result<()> {
        if !self.contains(phone) {
            return Err(Error::invalid(format!("unknown phone {phone:?}")));
        }
        let list = self.letter_candidates.entry(letter).or_default();
        if !list.iter().any(|p| p == phone) {
            list.push(phone.to_string());
        }
        Ok(())
    }

    pub fn composites(&self) -> &[Vec<String>] {
        &self.composites
    }

    /// Union of the features of every phone the letter may represent.
    pub fn letter_features(&self, letter: char) -> Result<FeatureSet> {
        let letter = letter.to_ascii_lowercase();
        let cands = self
            .letter_candidates
            .get(&letter)
            .ok_or_else(|| Error::invalid(format!("no letter candidates for {letter:?}")))?;
        Ok(cands
            .iter()
            .fold(FeatureSet::EMPTY, |acc, p| acc.union(self.features(p))))
    }

    /// Expands a feature set into a 0/1 vector in declared feature order.
    pub fn feature_vector(&self, set: FeatureSet, out: &mut Vec<f64>) {
        for f in 0..self.feature_count() {
            out.push(if set.contains(f) { 1.0 } else { 0.0 });
        }
    }
}

// ---------------------------------------------------------------------------
// Linguistic representation
// ---------------------------------------------------------------------------

/// Prosodic levels, finest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Level {
    Word = 0,
    Phrase = 1,
    Clause = 2,
    Sentence = 3,
}

impl Level {
    pub const ALL: [Level; 4] = [Level::Word, Level::Phrase, Level::Clause, Level::Sentence];
}

/// Boundary marks at the end of a word. The word boundary itself is implicit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BoundaryMarks {
    pub phrase: bool,
    pub clause: bool,
    pub sentence: bool,
}

impl BoundaryMarks {
    pub const NONE: BoundaryMarks = BoundaryMarks {
        phrase: false,
        clause: false,
        sentence: false,
    };

    /// Marks for the strongest level closed here, with every weaker level implied.
    pub fn closing(level: Level) -> Self {
        BoundaryMarks {
            phrase: level >= Level::Phrase,
            clause: level >= Level::Clause,
            sentence: level >= Level::Sentence,
        }
    }

    pub fn has(&self, level: Level) -> bool {
        match level {
            Level::Word => true,
            Level::Phrase => self.phrase,
            Level::Clause => self.clause,
            Level::Sentence => self.sentence,
        }
    }

    /// Strongest level marked.
    pub fn strongest(&self) -> Level {
        if self.sentence {
            Level::Sentence
        } else if self.clause {
            Level::Clause
        } else if self.phrase {
            Level::Phrase
        } else {
            Level::Word
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Syllable {
    pub phones: Vec<String>,
    /// 0 unstressed, 1 primary, 2 secondary.
    pub stress: u8,
    pub nucleus: Option<usize>,
    pub accent: bool,
}

impl Syllable {
    pub fn new(phones: Vec<String>, stress: u8, nucleus: usize) -> Self {
        Syllable {
            phones,
            stress,
            nucleus: Some(nucleus),
            accent: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Word {
    pub orthography: String,
    pub pos: String,
    pub content: bool,
    pub prominence: u8,
    pub syllables: Vec<Syllable>,
    pub boundary: BoundaryMarks,
    /// ToBI break index after the word (0-4).
    pub break_index: Option<u8>,
}

impl Word {
    pub fn phone_count(&self) -> usize {
        self.syllables.iter().map(|s| s.phones.len()).sum()
    }

    pub fn phones(&self) -> impl Iterator<Item = &str> {
        self.syllables
            .iter()
            .flat_map(|s| s.phones.iter().map(String::as_str))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinguisticRep {
    pub words: Vec<Word>,
}

/// Position of one phone in a representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhoneSlot {
    pub word: usize,
    pub syllable: usize,
    pub global_syllable: usize,
    pub index_in_syllable: usize,
}

impl LinguisticRep {
    pub fn phone_count(&self) -> usize {
        self.words.iter().map(Word::phone_count).sum()
    }

    pub fn syllable_count(&self) -> usize {
        self.words.iter().map(|w| w.syllables.len()).sum()
    }

    pub fn phone_slots(&self) -> Vec<PhoneSlot> {
        let mut out = Vec::with_capacity(self.phone_count());
        let mut gs = 0;
        for (w, word) in self.words.iter().enumerate() {
            for (s, syl) in word.syllables.iter().enumerate() {
                for i in 0..syl.phones.len() {
                    out.push(PhoneSlot {
                        word: w,
                        syllable: s,
                        global_syllable: gs,
                        index_in_syllable: i,
                    });
                }
                gs += 1;
            }
        }
        out
    }

    pub fn phone_symbols(&self) -> Vec<&str> {
        self.words.iter().flat_map(Word::phones).collect()
    }

    pub fn syllable(&self, slot: &PhoneSlot) -> &Syllable {
        &self.words[slot.word].syllables[slot.syllable]
    }

    pub fn symbol(&self, slot: &PhoneSlot) -> &str {
        &self.syllable(slot).phones[slot.index_in_syllable]
    }

    /// True when a boundary of `level` closes after word `w`. The last word
    /// always closes every level.
    pub fn closes_after(&self, w: usize, level: Level) -> bool {
        w + 1 >= self.words.len() || self.words[w].boundary.has(level)
    }

    /// Word ranges of the constituents at `level`.
    pub fn constituents(&self, level: Level) -> Vec<Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for w in 0..self.words.len() {
            if self.closes_after(w, level) {
                out.push(start..w + 1);
                start = w + 1;
            }
        }
        out
    }

    /// Every invariant violation, or `Ok` when the representation is well formed.
    pub fn validate(&self, fs: &FeatureSystem) -> std::result::Result<(), Vec<Violation>> {
        let mut v = Vec::new();
        let n = self.words.len();
        for (wi, word) in self.words.iter().enumerate() {
            let wpath = format!("words[{wi}]({})", word.orthography);
            if word.syllables.is_empty() {
                v.push(Violation::new(&wpath, ViolationKind::EmptyWord));
            }
            if let Some(b) = word.break_index {
                if b > 4 {
                    v.push(Violation::new(&wpath, ViolationKind::BreakIndex(b)));
                }
            }
            let m = word.boundary;
            if m.clause && !m.phrase {
                v.push(Violation::new(&wpath, ViolationKind::Nesting { inner: Level::Phrase, outer: Level::Clause }));
            }
            if m.sentence && !m.clause {
                v.push(Violation::new(&wpath, ViolationKind::Nesting { inner: Level::Clause, outer: Level::Sentence }));
            }
            if wi + 1 == n && !(m.sentence && m.clause && m.phrase) {
                v.push(Violation::new(&wpath, ViolationKind::Unterminated));
            }
            for (si, syl) in word.syllables.iter().enumerate() {
                let spath = format!("{wpath}/syllables[{si}]");
                if syl.stress > 2 {
                    v.push(Violation::new(&spath, ViolationKind::Stress(syl.stress)));
                }
                match syl.nucleus {
                    None => v.push(Violation::new(&spath, ViolationKind::NoNucleus)),
                    Some(k) if k >= syl.phones.len() => {
                        v.push(Violation::new(&spath, ViolationKind::NucleusOutOfRange(k)))
                    }
                    Some(_) => {}
                }
                for (pi, p) in syl.phones.iter().enumerate() {
                    if p == EPSILON || !fs.contains(p) {
                        v.push(Violation::new(
                            &format!("{spath}/phones[{pi}]"),
                            ViolationKind::UnknownPhone(p.clone()),
                        ));
                    }
                }
            }
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(v)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    EmptyWord,
    NoNucleus,
    NucleusOutOfRange(usize),
    Stress(u8),
    BreakIndex(u8),
    UnknownPhone(String),
    Nesting { inner: Level, outer: Level },
    Unterminated,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub kind: ViolationKind,
}

impl Violation {
    fn new(path: &str, kind: ViolationKind) -> Self {
        Violation {
            path: path.to_string(),
            kind,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ViolationKind::EmptyWord => write!(f, "{}: word has no syllables", self.path),
            ViolationKind::NoNucleus => write!(f, "{}: syllable has no nucleus", self.path),
            ViolationKind::NucleusOutOfRange(k) => write!(f, "{}: nucleus index {k} out of range", self.path),
            ViolationKind::Stress(s) => write!(f, "{}: stress {s} not in 0..=2", self.path),
            ViolationKind::BreakIndex(b) => write!(f, "{}: break index {b} not in 0..=4", self.path),
            ViolationKind::UnknownPhone(p) => write!(f, "{}: unknown phone {p:?}", self.path),
            ViolationKind::Nesting { inner, outer } => {
                write!(f, "{}: {outer:?} boundary without {inner:?} boundary", self.path)
            }
            ViolationKind::Unterminated => write!(f, "{}: utterance does not end with a sentence boundary", self.path),
        }
    }
}

// ---------------------------------------------------------------------------
// Boundary distances
// ---------------------------------------------------------------------------

/// Per-phone distances, in phones, to the previous and next boundary at each
/// level. Indexed by `Level as usize`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BoundaryDistances {
    pub prev: Vec<[usize; 4]>,
    pub next: Vec<[usize; 4]>,
}

pub fn boundary_distances(rep: &LinguisticRep) -> BoundaryDistances {
    let n = rep.phone_count();
    let mut prev = vec![[0usize; 4]; n];
    let mut next = vec![[0usize; 4]; n];
    let word_len: Vec<usize> = rep.words.iter().map(Word::phone_count).collect();
    let mut word_start = Vec::with_capacity(word_len.len());
    let mut acc = 0;
    for &l in &word_len {
        word_start.push(acc);
        acc += l;
    }
    for level in Level::ALL {
        for range in rep.constituents(level) {
            let start = word_start[range.start];
            let end = word_start[range.end - 1] + word_len[range.end - 1];
            for i in start..end {
                prev[i][level as usize] = i - start;
                next[i][level as usize] = end - 1 - i;
            }
        }
    }
    BoundaryDistances { prev, next }
}

// ---------------------------------------------------------------------------
// Pronunciation strings
// ---------------------------------------------------------------------------

/// Parses a syllabified pronunciation such as `w-ao1*.t-er0`: syllables split
/// on `.`, phones on `-`, a stress digit on the nucleus and an optional `*`
/// pitch-accent mark at the end of a syllable.
pub fn parse_pronunciation(text: &str, fs: &FeatureSystem) -> std::result::Result<Vec<Syllable>, String> {
    let mut out = Vec::new();
    for syl_text in text.split('.') {
        let (body, accent) = match syl_text.strip_suffix('*') {
            Some(b) => (b, true),
            None => (syl_text, false),
        };
        if body.is_empty() {
            return Err(format!("empty syllable in {text:?}"));
        }
        let mut phones = Vec::new();
        let mut nucleus = None;
        let mut stress = 0u8;
        for (i, tok) in body.split('-').enumerate() {
            let (sym, digit) = match tok.chars().last() {
                Some(c @ '0'..='2') => (&tok[..tok.len() - 1], Some(c as u8 - b'0')),
                _ => (tok, None),
            };
            if !fs.phone(sym).is_some_and(|p| p.lexical || p.postlexical) || sym == EPSILON {
                return Err(format!("unknown phone {sym:?}"));
            }
            if let Some(d) = digit {
                if nucleus.is_some() {
                    return Err(format!("two stressed nuclei in syllable {body:?}"));
                }
                nucleus = Some(i);
                stress = d;
            }
            phones.push(sym.to_string());
        }
        if nucleus.is_none() {
            nucleus = phones.iter().position(|p| fs.is_vowel(p));
        }
        if nucleus.is_none() {
            return Err(format!("syllable {body:?} has no nucleus"));
        }
        out.push(Syllable {
            phones,
            stress,
            nucleus,
            accent,
        });
    }
    Ok(out)
}

pub fn format_pronunciation(syllables: &[Syllable]) -> String {
    syllables
        .iter()
        .map(|s| {
            let mut parts: Vec<String> = Vec::with_capacity(s.phones.len());
            for (i, p) in s.phones.iter().enumerate() {
                if Some(i) == s.nucleus {
                    parts.push(format!("{p}{}", s.stress));
                } else {
                    parts.push(p.clone());
                }
            }
            let mut t = parts.join("-");
            if s.accent {
                t.push('*');
            }
            t
        })
        .collect::<Vec<_>>()
        .join(".")
}

const LEGAL_ONSETS: &[&[&str]] = &[
    &["p", "r"], &["p", "l"], &["b", "r"], &["b", "l"], &["t", "r"], &["d", "r"], &["k", "r"],
    &["k", "l"], &["g", "r"], &["g", "l"], &["f", "r"], &["f", "l"], &["th", "r"], &["sh", "r"],
    &["s", "p"], &["s", "t"], &["s", "k"], &["s", "m"], &["s", "n"], &["s", "l"], &["s", "w"],
    &["s", "p", "r"], &["s", "p", "l"], &["s", "t", "r"], &["s", "k", "r"], &["s", "k", "w"],
    &["t", "w"], &["d", "w"], &["k", "w"], &["g", "w"], &["th", "w"], &["p", "y"], &["b", "y"],
    &["f", "y"], &["v", "y"], &["m", "y"], &["k", "y"], &["hh", "y"], &["s", "k", "y"],
];

fn legal_onset(cons: &[&str]) -> bool {
    match cons.len() {
        0 => true,
        1 => cons[0] != "ng",
        _ => LEGAL_ONSETS.iter().any(|o| *o == cons),
    }
}

/// Groups a flat phone string into syllables by maximal onset. Used for
/// pronunciations that come out of the letter-to-sound network, which carry
/// no syllable structure. Primary stress goes on the first syllable.
pub fn syllabify(phones: &[String], fs: &FeatureSystem) -> Vec<Syllable> {
    if phones.is_empty() {
        return Vec::new();
    }
    let mut nuclei: Vec<usize> = (0..phones.len()).filter(|&i| fs.is_vowel(&phones[i])).collect();
    if nuclei.is_empty() {
        let k = phones
            .iter()
            .position(|p| fs.has_feature(p, "sonorant"))
            .unwrap_or(0);
        nuclei.push(k);
    }
    let mut bounds = vec![0];
    for pair in nuclei.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let cons: Vec<&str> = phones[a + 1..b].iter().map(String::as_str).collect();
        let split = (0..=cons.len()).find(|&j| legal_onset(&cons[j..])).unwrap_or(cons.len());
        bounds.push(a + 1 + split);
    }
    bounds.push(phones.len());
    bounds
        .windows(2)
        .enumerate()
        .map(|(k, r)| Syllable {
            phones: phones[r[0]..r[1]].to_vec(),
            stress: if k == 0 { 1 } else { 0 },
            nucleus: Some(nuclei[k] - r[0]),
            accent: false,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word(orth: &str, pron: &str, boundary: BoundaryMarks, fs: &FeatureSystem) -> Word {
        Word {
            orthography: orth.into(),
            pos: "NN".into(),
            content: true,
            prominence: 1,
            syllables: parse_pronunciation(pron, fs).unwrap(),
            boundary,
            break_index: None,
        }
    }

    #[test]
    fn shipped_inventory_invariants() {
        let fs = FeatureSystem::english();
        for p in fs.phones() {
            if p.symbol != EPSILON {
                assert!(!p.features.is_empty(), "{}", p.symbol);
            }
        }
        for s in ["dx", "q", EPSILON] {
            let p = fs.phone(s).unwrap();
            assert!(!p.lexical && p.postlexical);
        }
        assert!(fs.lexical_phones().count() >= 39);
        for c in 'a'..='z' {
            assert!(!fs.letter_candidates(c).unwrap().is_empty());
        }
    }

    #[test]
    fn letter_c_is_union_of_its_candidates() {
        let fs = FeatureSystem::english();
        let c = fs.letter_features('c').unwrap();
        assert!(fs.features("s").is_subset(c));
        assert!(fs.features("k").is_subset(c));
        let expected = fs
            .letter_candidates('c')
            .unwrap()
            .iter()
            .fold(FeatureSet::EMPTY, |a, p| a.union(fs.features(p)));
        assert_eq!(c, expected);
    }

    #[test]
    fn single_candidate_letter_has_that_phones_features() {
        let fs = FeatureSystem::english();
        assert_eq!(fs.letter_candidates('b').unwrap(), ["b"]);
        assert_eq!(fs.letter_features('b').unwrap(), fs.features("b"));
    }

    #[test]
    fn letter_x_three_way_union() {
        let fs = FeatureSystem::english();
        let expected = fs.features("k").union(fs.features("s")).union(fs.features("z"));
        assert_eq!(fs.letter_features('x').unwrap(), expected);
    }

    #[test]
    fn unknown_letter_is_rejected() {
        let fs = FeatureSystem::english();
        assert!(matches!(fs.letter_features('3'), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn adding_a_candidate_never_removes_features() {
        let mut fs = FeatureSystem::english();
        for c in 'a'..='z' {
            let before = fs.letter_features(c).unwrap();
            fs.add_letter_candidate(c, "m").unwrap();
            assert!(before.is_subset(fs.letter_features(c).unwrap()));
        }
    }

    #[test]
    fn parse_and_format_pronunciation() {
        let fs = FeatureSystem::english();
        let s = parse_pronunciation("w-ao1*.t-er0", &fs).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].phones, ["w", "ao"]);
        assert_eq!(s[0].nucleus, Some(1));
        assert_eq!(s[0].stress, 1);
        assert!(s[0].accent);
        assert_eq!(s[1].stress, 0);
        assert_eq!(format_pronunciation(&s), "w-ao1*.t-er0");
        assert!(parse_pronunciation("l-zz1-v", &fs).unwrap_err().contains("zz"));
    }

    #[test]
    fn syllabify_uses_maximal_onset() {
        let fs = FeatureSystem::english();
        let phones: Vec<String> = "ae s t r ah n aa t".split(' ').map(String::from).collect();
        let s = syllabify(&phones, &fs);
        let groups: Vec<Vec<String>> = s.iter().map(|s| s.phones.clone()).collect();
        assert_eq!(groups, vec![vec!["ae"], vec!["s", "t", "r", "ah"], vec!["n", "aa", "t"]]);
        assert_eq!(s[0].stress, 1);
        assert_eq!(s[2].nucleus, Some(1));
    }

    #[test]
    fn well_formed_single_word_validates() {
        let fs = FeatureSystem::english();
        let rep = LinguisticRep {
            words: vec![word("cab", "k-ae1-b", BoundaryMarks::closing(Level::Sentence), &fs)],
        };
        assert_eq!(rep.validate(&fs), Ok(()));
    }

    #[test]
    fn syllable_without_nucleus_is_reported() {
        let fs = FeatureSystem::english();
        let mut w = word("cab", "k-ae1-b", BoundaryMarks::closing(Level::Sentence), &fs);
        w.syllables[0].nucleus = None;
        let rep = LinguisticRep { words: vec![w] };
        let v = rep.validate(&fs).unwrap_err();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::NoNucleus);
        assert!(v[0].path.contains("syllables[0]"), "{}", v[0]);
    }

    #[test]
    fn sentence_end_without_clause_is_a_nesting_violation() {
        let fs = FeatureSystem::english();
        let marks = BoundaryMarks {
            phrase: true,
            clause: false,
            sentence: true,
        };
        let rep = LinguisticRep {
            words: vec![word("cab", "k-ae1-b", marks, &fs)],
        };
        let v = rep.validate(&fs).unwrap_err();
        assert!(v.iter().any(|v| v.kind
            == ViolationKind::Nesting {
                inner: Level::Clause,
                outer: Level::Sentence
            }));
    }

    #[test]
    fn stress_and_break_ranges_are_checked() {
        let fs = FeatureSystem::english();
        let mut w = word("cab", "k-ae1-b", BoundaryMarks::closing(Level::Sentence), &fs);
        w.syllables[0].stress = 3;
        w.break_index = Some(5);
        let v = LinguisticRep { words: vec![w] }.validate(&fs).unwrap_err();
        assert!(v.iter().any(|v| v.kind == ViolationKind::Stress(3)));
        assert!(v.iter().any(|v| v.kind == ViolationKind::BreakIndex(5)));
    }

    #[test]
    fn distances_at_utterance_edges() {
        let fs = FeatureSystem::english();
        let rep = LinguisticRep {
            words: vec![
                word("the", "dh-ah0", BoundaryMarks::NONE, &fs),
                word("cab", "k-ae1-b", BoundaryMarks::closing(Level::Sentence), &fs),
            ],
        };
        let d = boundary_distances(&rep);
        assert_eq!(d.prev[0], [0, 0, 0, 0]);
        assert_eq!(d.next[4], [0, 0, 0, 0]);
        // interior phone "k": word onset, two phones from sentence start
        assert_eq!(d.prev[2], [0, 2, 2, 2]);
        assert_eq!(d.next[2], [2, 2, 2, 2]);
    }
}
