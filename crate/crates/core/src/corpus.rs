//! Labeled utterance corpora and the synthetic generators that stand in for
//! a recorded speaker database.
//!
//! Corpus file format, one utterance per block:
//!
//! ```text
//! # comment
//! utt <id> [wav=<path relative to the corpus file>]
//! <orth> <POS> <c|f> <prominence> <w|p|c|s> <break|-> <pron> [post=<p-h-o-n-e-s>] [dur=<ms,ms,...>]
//! end
//! ```
//!
//! `c`/`f` marks content and function words, the fifth field the strongest
//! boundary after the word (word, phrase, clause, sentence), the sixth a
//! break index 0-4. `pron` is a syllabified pronunciation as used by the
//! lexicon. `post=` gives the word's surface phones (empty when every phone
//! was deleted); `dur=` gives one duration in ms per phone of `pron`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::lexicon::{english_tagged_corpus, is_function_tag, is_punctuation, Lexicon, TaggedSentence};
use crate::lingnets::PostlexExample;
use crate::phonology::{
    format_pronunciation, parse_pronunciation, BoundaryMarks, FeatureSystem, Level, LinguisticRep, Syllable, Word,
    EPSILON,
};
use crate::vocoder::{AudioBuffer, SAMPLE_RATE};

/// Minimum duration any generator emits.
pub const MIN_DURATION_MS: f64 = 20.0;
/// Identity rate the flapping corpus is tuned to.
pub const TARGET_IDENTITY: f64 = 0.70;

// ---------------------------------------------------------------------------
// Building representations

/// ToBI-style break index for the strongest boundary after a word.
pub fn break_index(level: Level) -> u8 {
    match level {
        Level::Word => 1,
        Level::Phrase => 3,
        Level::Clause | Level::Sentence => 4,
    }
}

/// A word with prominence from its part of speech: content words get
/// prominence 1 and a pitch accent on their primary-stressed syllable.
pub fn make_word(orth: &str, pos: &str, mut syllables: Vec<Syllable>, boundary: BoundaryMarks) -> Word {
    let content = !is_function_tag(pos);
    if content {
        if let Some(s) = syllables.iter_mut().find(|s| s.stress == 1) {
            s.accent = true;
        }
    }
    Word {
        orthography: orth.to_string(),
        pos: pos.to_string(),
        content,
        prominence: u8::from(content),
        syllables,
        boundary,
        break_index: Some(break_index(boundary.strongest())),
    }
}

/// Boundary level cued by a punctuation token.
pub fn punctuation_level(token: &str) -> Option<Level> {
    match token {
        "," => Some(Level::Phrase),
        ";" | ":" => Some(Level::Clause),
        "." | "!" | "?" => Some(Level::Sentence),
        _ => None,
    }
}

/// Builds a representation from tagged tokens. Punctuation tokens become
/// boundaries on the preceding word; the final word closes a sentence.
pub fn rep_from_tagged<F>(tokens: &[(String, String)], mut pronounce: F) -> Result<LinguisticRep>
where
    F: FnMut(&str, &str) -> Result<Vec<Syllable>>,
{
    let mut words: Vec<Word> = Vec::new();
    for (tok, tag) in tokens {
        if is_punctuation(tok) {
            if let (Some(level), Some(last)) = (punctuation_level(tok), words.last_mut()) {
                if level > last.boundary.strongest() {
                    last.boundary = BoundaryMarks::closing(level);
                    last.break_index = Some(break_index(level));
                }
            }
            continue;
        }
        let syl = pronounce(tok, tag)?;
        if syl.is_empty() {
            continue;
        }
        words.push(make_word(tok, tag, syl, BoundaryMarks::NONE));
    }
    if let Some(last) = words.last_mut() {
        last.boundary = BoundaryMarks::closing(Level::Sentence);
        last.break_index = Some(4);
    }
    Ok(LinguisticRep { words })
}

// ---------------------------------------------------------------------------
// Corpus file

#[derive(Debug, Clone, PartialEq)]
pub struct Utterance {
    pub id: String,
    pub wav: Option<PathBuf>,
    pub rep: LinguisticRep,
    /// Surface phones per word.
    pub surface: Option<Vec<Vec<String>>>,
    /// One duration per phone of `rep`, in ms.
    pub durations: Option<Vec<f64>>,
}

impl Utterance {
    pub fn postlex_example(&self) -> Option<PostlexExample> {
        self.surface.as_ref().map(|s| PostlexExample {
            rep: self.rep.clone(),
            surface: s.clone(),
        })
    }
}

fn boundary_code(m: BoundaryMarks) -> char {
    match m.strongest() {
        Level::Word => 'w',
        Level::Phrase => 'p',
        Level::Clause => 'c',
        Level::Sentence => 's',
    }
}

pub fn format_corpus(utts: &[Utterance]) -> String {
    let mut s = String::new();
    for u in utts {
        let _ = write!(s, "utt {}", u.id);
        if let Some(w) = &u.wav {
            let _ = write!(s, " wav={}", w.display());
        }
        s.push('\n');
        let mut at = 0;
        for (wi, w) in u.rep.words.iter().enumerate() {
            let _ = write!(
                s,
                "{} {} {} {} {} {} {}",
                w.orthography,
                w.pos,
                if w.content { 'c' } else { 'f' },
                w.prominence,
                boundary_code(w.boundary),
                w.break_index.map_or("-".to_string(), |b| b.to_string()),
                format_pronunciation(&w.syllables)
            );
            if let Some(surface) = &u.surface {
                let _ = write!(s, " post={}", surface[wi].join("-"));
            }
            if let Some(d) = &u.durations {
                let n = w.phone_count();
                let list: Vec<String> = d[at..at + n].iter().map(|v| v.to_string()).collect();
                let _ = write!(s, " dur={}", list.join(","));
                at += n;
            }
            s.push('\n');
        }
        s.push_str("end\n");
    }
    s
}

pub fn parse_corpus(text: &str, path: impl AsRef<Path>, fs: &FeatureSystem) -> Result<Vec<Utterance>> {
    let path = path.as_ref();
    let err = |line: usize, msg: String| Error::parse(path, line, msg);
    let mut out = Vec::new();
    let mut current: Option<(Utterance, Vec<Option<Vec<String>>>, Vec<Option<Vec<f64>>>, usize)> = None;
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "utt" => {
                if current.is_some() {
                    return Err(err(ln, "`utt` inside an open utterance".into()));
                }
                let id = fields.get(1).ok_or_else(|| err(ln, "missing utterance id".into()))?;
                let mut wav = None;
                for f in &fields[2..] {
                    match f.strip_prefix("wav=") {
                        Some(p) => wav = Some(PathBuf::from(p)),
                        None => return Err(err(ln, format!("unexpected field {f:?}"))),
                    }
                }
                let u = Utterance {
                    id: id.to_string(),
                    wav,
                    rep: LinguisticRep::default(),
                    surface: None,
                    durations: None,
                };
                current = Some((u, Vec::new(), Vec::new(), ln));
            }
            "end" => {
                let Some((mut u, posts, durs, start)) = current.take() else {
                    return Err(err(ln, "`end` without `utt`".into()));
                };
                if u.rep.words.is_empty() {
                    return Err(err(start, format!("utterance {} has no words", u.id)));
                }
                if let Err(v) = u.rep.validate(fs) {
                    return Err(err(start, format!("utterance {}: {}", u.id, v[0])));
                }
                if posts.iter().all(Option::is_some) {
                    u.surface = Some(posts.into_iter().map(Option::unwrap).collect());
                } else if posts.iter().any(Option::is_some) {
                    return Err(err(start, format!("utterance {}: post= on some words only", u.id)));
                }
                if durs.iter().all(Option::is_some) {
                    u.durations = Some(durs.into_iter().flatten().flatten().collect());
                } else if durs.iter().any(Option::is_some) {
                    return Err(err(start, format!("utterance {}: dur= on some words only", u.id)));
                }
                out.push(u);
            }
            _ => {
                let Some((u, posts, durs, _)) = current.as_mut() else {
                    return Err(err(ln, "word line outside an utterance".into()));
                };
                if fields.len() < 7 {
                    return Err(err(ln, format!("expected at least 7 fields, found {}", fields.len())));
                }
                let content = match fields[2] {
                    "c" => true,
                    "f" => false,
                    x => return Err(err(ln, format!("content flag {x:?} is not c or f"))),
                };
                let prominence: u8 = fields[3]
                    .parse()
                    .map_err(|_| err(ln, format!("bad prominence {:?}", fields[3])))?;
                let boundary = match fields[4] {
                    "w" => BoundaryMarks::NONE,
                    "p" => BoundaryMarks::closing(Level::Phrase),
                    "c" => BoundaryMarks::closing(Level::Clause),
                    "s" => BoundaryMarks::closing(Level::Sentence),
                    x => return Err(err(ln, format!("boundary {x:?} is not w, p, c or s"))),
                };
                let break_index = match fields[5] {
                    "-" => None,
                    x => Some(x.parse::<u8>().map_err(|_| err(ln, format!("bad break index {x:?}")))?),
                };
                let syllables = parse_pronunciation(fields[6], fs).map_err(|m| err(ln, m))?;
                let n = syllables.iter().map(|s| s.phones.len()).sum::<usize>();
                let mut post = None;
                let mut dur = None;
                for f in &fields[7..] {
                    if let Some(p) = f.strip_prefix("post=") {
                        let phones: Vec<String> = p.split('-').filter(|x| !x.is_empty()).map(String::from).collect();
                        for ph in &phones {
                            if ph == EPSILON || !fs.phone(ph).is_some_and(|x| x.postlexical) {
                                return Err(err(ln, format!("{ph:?} is not a post-lexical phone")));
                            }
                        }
                        post = Some(phones);
                    } else if let Some(d) = f.strip_prefix("dur=") {
                        let v: std::result::Result<Vec<f64>, _> = d.split(',').map(str::parse::<f64>).collect();
                        let v = v.map_err(|_| err(ln, format!("bad duration list {d:?}")))?;
                        if v.len() != n {
                            return Err(err(ln, format!("{} durations for {n} phones", v.len())));
                        }
                        if v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                            return Err(err(ln, "durations must be positive".into()));
                        }
                        dur = Some(v);
                    } else {
                        return Err(err(ln, format!("unexpected field {f:?}")));
                    }
                }
                u.rep.words.push(Word {
                    orthography: fields[0].to_string(),
                    pos: fields[1].to_string(),
                    content,
                    prominence,
                    syllables,
                    boundary,
                    break_index,
                });
                posts.push(post);
                durs.push(dur);
            }
        }
    }
    if let Some((u, _, _, start)) = current {
        return Err(err(start, format!("utterance {} is missing `end`", u.id)));
    }
    Ok(out)
}

pub fn read_corpus(path: &Path, fs: &FeatureSystem) -> Result<Vec<Utterance>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(&text, path, fs)
}

pub fn write_corpus(utts: &[Utterance], path: &Path) -> Result<()> {
    std::fs::write(path, format_corpus(utts)).map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// Synthetic post-lexical rules

const REDUCIBLE: &[&str] = &["ae", "eh", "ao", "aa", "ow", "uw", "ey"];

/// Rule-based surface form of every lexical phone of `rep` (ε for a
/// deletion). Context never crosses a phrase boundary. In priority order:
///
/// * t, d after a vowel and before an unstressed vowel become the flap dx;
/// * t before a nasal becomes the glottal stop q;
/// * word-final t, d after a consonant of the same word and before a
///   consonant-initial word are deleted;
/// * word-final ng after ih in an unstressed syllable becomes n;
/// * unstressed ae, eh, ao, aa, ow, uw, ey reduce to ah;
/// * stressed ao merges with aa.
pub fn postlex_rules(rep: &LinguisticRep, fs: &FeatureSystem) -> Vec<String> {
    let slots = rep.phone_slots();
    let syms = rep.phone_symbols();
    let mut phrase_of = vec![0; rep.words.len()];
    for (k, r) in rep.constituents(Level::Phrase).into_iter().enumerate() {
        for w in r {
            phrase_of[w] = k;
        }
    }
    let n = syms.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let s = &slots[i];
        let p = syms[i];
        let prev = (i > 0 && phrase_of[slots[i - 1].word] == phrase_of[s.word]).then(|| i - 1);
        let next = (i + 1 < n && phrase_of[slots[i + 1].word] == phrase_of[s.word]).then(|| i + 1);
        let stress = rep.syllable(s).stress;
        let word_final = i + 1 == n || slots[i + 1].word != s.word;
        let vowel = |j: usize| fs.is_vowel(syms[j]);
        let surface = if (p == "t" || p == "d")
            && prev.is_some_and(vowel)
            && next.is_some_and(|j| vowel(j) && rep.syllable(&slots[j]).stress == 0)
        {
            "dx"
        } else if p == "t" && next.is_some_and(|j| fs.has_feature(syms[j], "nasal")) {
            "q"
        } else if (p == "t" || p == "d")
            && word_final
            && prev.is_some_and(|j| slots[j].word == s.word && !vowel(j))
            && next.is_some_and(|j| !vowel(j))
        {
            EPSILON
        } else if p == "ng" && word_final && stress == 0 && i > 0 && syms[i - 1] == "ih" && slots[i - 1].word == s.word {
            "n"
        } else if stress == 0 && REDUCIBLE.contains(&p) {
            "ah"
        } else if p == "ao" {
            "aa"
        } else {
            p
        };
        out.push(surface.to_string());
    }
    out
}

/// Surface phones per word, deletions removed.
pub fn surface_words(rep: &LinguisticRep, symbols: &[String]) -> Vec<Vec<String>> {
    let mut out = vec![Vec::new(); rep.words.len()];
    for (slot, s) in rep.phone_slots().iter().zip(symbols) {
        if s != EPSILON {
            out[slot.word].push(s.clone());
        }
    }
    out
}

/// Fraction of lexical phones left unchanged by the rules.
pub fn identity_rate(utts: &[Utterance], fs: &FeatureSystem) -> f64 {
    let mut same = 0usize;
    let mut total = 0usize;
    for u in utts {
        let rules = postlex_rules(&u.rep, fs);
        for (a, b) in u.rep.phone_symbols().iter().zip(&rules) {
            total += 1;
            same += usize::from(*a == b.as_str());
        }
    }
    if total == 0 {
        1.0
    } else {
        same as f64 / total as f64
    }
}

struct WordPools<'a> {
    all: Vec<(&'a str, &'a str, Vec<Syllable>)>,
    changing: Vec<usize>,
    /// Lexical representations of the tagged sentences.
    sentences: Vec<LinguisticRep>,
}

fn word_pools<'a>(lex: &'a Lexicon, fs: &FeatureSystem) -> WordPools<'a> {
    let mut all = Vec::new();
    let mut changing = Vec::new();
    for e in lex.entries() {
        let v = &e.variants[0];
        let pos = v.tags[0].as_str();
        let word = make_word(&e.orthography, pos, v.pronunciation.clone(), BoundaryMarks::closing(Level::Sentence));
        let rep = LinguisticRep { words: vec![word] };
        let rules = postlex_rules(&rep, fs);
        let changed = rep.phone_symbols().iter().zip(&rules).filter(|(a, b)| **a != b.as_str()).count();
        if changed * 4 >= rep.phone_count() {
            changing.push(all.len());
        }
        all.push((e.orthography.as_str(), pos, v.pronunciation.clone()));
    }
    let sentences = english_tagged_corpus()
        .iter()
        .filter_map(|s| {
            rep_from_tagged(s, |tok, tag| {
                lex.lookup(tok, tag)
                    .map(|v| v.pronunciation.clone())
                    .ok_or_else(|| Error::invalid(tok.to_string()))
            })
            .ok()
        })
        .filter(|r| !r.words.is_empty())
        .collect();
    WordPools {
        all,
        changing,
        sentences,
    }
}

fn random_utterances(pools: &WordPools, mix: f64, size: usize, seed: u64, fs: &FeatureSystem, prefix: &str) -> Vec<Utterance> {
    (0..size)
        .map(|u| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(u as u64));
            let rep = if rng.random::<f64>() >= mix && !pools.sentences.is_empty() {
                pools.sentences[rng.random_range(0..pools.sentences.len())].clone()
            } else {
                let n = rng.random_range(3..=8);
                let mut words = Vec::with_capacity(n);
                for k in 0..n {
                    let idx: usize = rng.random_range(0..usize::MAX);
                    let entry = if pools.changing.is_empty() {
                        &pools.all[idx % pools.all.len()]
                    } else {
                        &pools.all[pools.changing[idx % pools.changing.len()]]
                    };
                    let b: f64 = rng.random();
                    let level = if k + 1 == n {
                        Level::Sentence
                    } else if b < 0.06 {
                        Level::Clause
                    } else if b < 0.2 {
                        Level::Phrase
                    } else {
                        Level::Word
                    };
                    let marks = if level == Level::Word { BoundaryMarks::NONE } else { BoundaryMarks::closing(level) };
                    words.push(make_word(entry.0, entry.1, entry.2.clone(), marks));
                }
                LinguisticRep { words }
            };
            let rules = postlex_rules(&rep, fs);
            let surface = surface_words(&rep, &rules);
            Utterance {
                id: format!("{prefix}{u:04}"),
                wav: None,
                rep,
                surface: Some(surface),
                durations: None,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlappingCorpus {
    pub utterances: Vec<Utterance>,
    /// Probability that an utterance is a string of words the rules alter
    /// rather than a sentence of the tagged corpus.
    pub mix: f64,
    pub identity_rate: f64,
}

/// Utterances whose surface forms follow [`postlex_rules`]: a mix of
/// tagged-corpus sentences and random strings of words the rules alter.
/// The share of the latter is bisected so that the lexical phone is
/// kept `target_identity` of the time.
pub fn flapping_corpus(lex: &Lexicon, fs: &FeatureSystem, size: usize, seed: u64, target_identity: f64) -> FlappingCorpus {
    let pools = word_pools(lex, fs);
    let probe = size.max(400);
    let rate = |mix: f64| identity_rate(&random_utterances(&pools, mix, probe, seed, fs, "flap"), fs);
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut mix = if rate(1.0) > target_identity { 1.0 } else { 0.5 };
    if mix < 1.0 {
        for _ in 0..20 {
            mix = 0.5 * (lo + hi);
            if rate(mix) > target_identity {
                lo = mix;
            } else {
                hi = mix;
            }
        }
    }
    let utterances = random_utterances(&pools, mix, size, seed, fs, "flap");
    let identity_rate = identity_rate(&utterances, fs);
    FlappingCorpus {
        utterances,
        mix,
        identity_rate,
    }
}

// ---------------------------------------------------------------------------
// Klatt-style durations

/// Inherent and minimum durations in ms.
pub fn klatt_table(phone: &str) -> (f64, f64) {
    match phone {
        "aa" => (240.0, 100.0),
        "ae" => (230.0, 80.0),
        "ah" => (140.0, 60.0),
        "ao" => (240.0, 100.0),
        "aw" => (260.0, 100.0),
        "ay" => (250.0, 150.0),
        "eh" => (150.0, 70.0),
        "er" => (180.0, 80.0),
        "ey" => (190.0, 100.0),
        "ih" => (135.0, 40.0),
        "iy" => (155.0, 55.0),
        "ow" => (220.0, 80.0),
        "oy" => (280.0, 150.0),
        "uh" => (160.0, 60.0),
        "uw" => (210.0, 70.0),
        "b" => (85.0, 60.0),
        "ch" => (70.0, 50.0),
        "d" => (75.0, 50.0),
        "dh" => (50.0, 30.0),
        "dx" => (25.0, 20.0),
        "f" => (100.0, 80.0),
        "g" => (80.0, 60.0),
        "hh" => (80.0, 20.0),
        "jh" => (70.0, 50.0),
        "k" => (80.0, 60.0),
        "l" => (80.0, 40.0),
        "m" => (70.0, 60.0),
        "n" => (60.0, 50.0),
        "ng" => (95.0, 80.0),
        "p" => (90.0, 50.0),
        "q" => (40.0, 20.0),
        "r" => (80.0, 30.0),
        "s" => (105.0, 60.0),
        "sh" => (105.0, 80.0),
        "t" => (75.0, 50.0),
        "th" => (90.0, 60.0),
        "v" => (60.0, 40.0),
        "w" => (80.0, 60.0),
        "y" => (80.0, 40.0),
        "z" => (75.0, 40.0),
        "zh" => (70.0, 40.0),
        _ => (80.0, 40.0),
    }
}

/// Rule-generated durations: DUR = MIN + (INH − MIN)·Π factors, times a
/// lognormal factor with spread `noise`, floored at 20 ms.
pub fn klatt_durations(rep: &LinguisticRep, fs: &FeatureSystem, noise: f64, rng: &mut impl Rng) -> Vec<f64> {
    let slots = rep.phone_slots();
    let syms = rep.phone_symbols();
    slots
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let word = &rep.words[s.word];
            let syl = rep.syllable(s);
            let p = syms[i];
            let v = fs.is_vowel(p);
            let last_syl = s.syllable + 1 == word.syllables.len();
            let mut f = 1.0;
            if last_syl && word.boundary.clause {
                f *= 1.4;
            } else if last_syl && word.boundary.phrase {
                f *= 1.2;
            } else if v {
                f *= 0.85;
            }
            if v && word.syllables.len() > 1 {
                f *= 0.8;
            }
            if syl.stress == 0 {
                f *= if v { 0.6 } else { 0.8 };
            }
            if !word.content {
                f *= 0.85;
            }
            if v && syl.accent {
                f *= 1.3;
            }
            let same_word = |j: usize| slots[j].word == s.word;
            if v && i + 1 < syms.len() && same_word(i + 1) && !fs.is_vowel(syms[i + 1]) {
                f *= if fs.has_feature(syms[i + 1], "voiced") { 1.2 } else { 0.85 };
            }
            if !v {
                let cons = |j: usize| same_word(j) && !fs.is_vowel(syms[j]);
                if (i > 0 && cons(i - 1)) || (i + 1 < syms.len() && cons(i + 1)) {
                    f *= 0.8;
                }
            }
            let (inh, min) = klatt_table(p);
            let z: f64 = StandardNormal.sample(rng);
            let d = (min + (inh - min) * f) * (noise * z).exp();
            (d.max(MIN_DURATION_MS) * 100.0).round() / 100.0
        })
        .collect()
}

fn tagged_sentences(seed: u64, size: usize) -> Vec<TaggedSentence> {
    let mut base = english_tagged_corpus();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    base.shuffle(&mut rng);
    (0..size).map(|i| base[i % base.len()].clone()).collect()
}

/// Lexical representation of a tagged sentence with the surface rules
/// applied, so durations and audio are generated for surface phones.
fn surface_rep(sentence: &TaggedSentence, lex: &Lexicon, fs: &FeatureSystem) -> Result<LinguisticRep> {
    let rep = rep_from_tagged(sentence, |tok, tag| {
        lex.lookup(tok, tag)
            .map(|v| v.pronunciation.clone())
            .ok_or_else(|| Error::invalid(format!("{tok:?} is not in the lexicon")))
    })?;
    let rules = postlex_rules(&rep, fs);
    Ok(crate::lingnets::apply_surface(&rep, &rules))
}

/// Sentences of the tagged corpus with Klatt-style durations on their
/// surface phones.
pub fn duration_corpus(lex: &Lexicon, fs: &FeatureSystem, size: usize, seed: u64) -> Result<Vec<Utterance>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xd0d0);
    tagged_sentences(seed, size)
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let rep = surface_rep(s, lex, fs)?;
            let durations = klatt_durations(&rep, fs, 0.02, &mut rng);
            Ok(Utterance {
                id: format!("dur{i:04}"),
                wav: None,
                rep,
                surface: None,
                durations: Some(durations),
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Formant renderer

#[derive(Debug, Clone, Copy)]
struct Target {
    voice: f64,
    noise: f64,
    formants: [f64; 3],
    end: [f64; 3],
    noise_centre: f64,
    noise_bw: f64,
    /// Fraction of the phone spent in silent closure (stops).
    closure: f64,
}

fn target(p: &str) -> Target {
    let vowel = |f: [f64; 3]| Target {
        voice: 1.0,
        noise: 0.0,
        formants: f,
        end: f,
        noise_centre: 0.0,
        noise_bw: 0.0,
        closure: 0.0,
    };
    let glide = |a: [f64; 3], b: [f64; 3]| Target { end: b, ..vowel(a) };
    let son = |f: [f64; 3], amp: f64| Target { voice: amp, ..vowel(f) };
    let fric = |centre: f64, bw: f64, amp: f64, voiced: bool| Target {
        voice: if voiced { 0.3 } else { 0.0 },
        noise: amp,
        formants: [400.0, 1500.0, 2500.0],
        end: [400.0, 1500.0, 2500.0],
        noise_centre: centre,
        noise_bw: bw,
        closure: 0.0,
    };
    let stop = |centre: f64, voiced: bool| Target {
        closure: 0.6,
        voice: if voiced { 0.15 } else { 0.0 },
        ..fric(centre, 1500.0, 0.6, voiced)
    };
    match p {
        "iy" => vowel([270.0, 2290.0, 3010.0]),
        "ih" => vowel([390.0, 1990.0, 2550.0]),
        "eh" => vowel([530.0, 1840.0, 2480.0]),
        "ae" => vowel([660.0, 1720.0, 2410.0]),
        "aa" => vowel([730.0, 1090.0, 2440.0]),
        "ao" => vowel([570.0, 840.0, 2410.0]),
        "uh" => vowel([440.0, 1020.0, 2240.0]),
        "uw" => glide([350.0, 1000.0, 2250.0], [300.0, 870.0, 2240.0]),
        "ah" => vowel([640.0, 1190.0, 2390.0]),
        "er" => vowel([490.0, 1350.0, 1690.0]),
        "ey" => glide([480.0, 2000.0, 2600.0], [350.0, 2200.0, 2800.0]),
        "ay" => glide([700.0, 1200.0, 2500.0], [400.0, 2000.0, 2600.0]),
        "aw" => glide([700.0, 1200.0, 2500.0], [450.0, 900.0, 2400.0]),
        "oy" => glide([500.0, 850.0, 2400.0], [400.0, 1900.0, 2500.0]),
        "ow" => glide([500.0, 900.0, 2400.0], [400.0, 800.0, 2300.0]),
        "l" => son([360.0, 1300.0, 2700.0], 0.6),
        "r" => son([420.0, 1300.0, 1600.0], 0.6),
        "w" => son([300.0, 610.0, 2200.0], 0.6),
        "y" => son([280.0, 2250.0, 2900.0], 0.6),
        "m" => son([280.0, 900.0, 2200.0], 0.4),
        "n" => son([280.0, 1700.0, 2600.0], 0.4),
        "ng" => son([280.0, 2300.0, 2750.0], 0.4),
        "dx" => son([300.0, 1600.0, 2600.0], 0.5),
        "s" => fric(5500.0, 1000.0, 0.5, false),
        "z" => fric(5500.0, 1000.0, 0.4, true),
        "sh" => fric(2800.0, 800.0, 0.5, false),
        "zh" => fric(2800.0, 800.0, 0.4, true),
        "f" => fric(4000.0, 3000.0, 0.2, false),
        "v" => fric(4000.0, 3000.0, 0.15, true),
        "th" => fric(4500.0, 3000.0, 0.15, false),
        "dh" => fric(4500.0, 3000.0, 0.12, true),
        "hh" => fric(1500.0, 2000.0, 0.2, false),
        "ch" => Target { closure: 0.4, ..fric(2800.0, 800.0, 0.5, false) },
        "jh" => Target { closure: 0.4, ..fric(2800.0, 800.0, 0.4, true) },
        "p" | "b" => stop(1000.0, p == "b"),
        "t" | "d" => stop(4000.0, p == "d"),
        "k" | "g" => stop(2000.0, p == "g"),
        _ => Target {
            voice: 0.0,
            noise: 0.0,
            ..vowel([500.0, 1500.0, 2500.0])
        },
    }
}

struct Resonator {
    a: f64,
    b: f64,
    c: f64,
    y1: f64,
    y2: f64,
}

impl Resonator {
    fn new() -> Self {
        Resonator { a: 0.0, b: 0.0, c: 0.0, y1: 0.0, y2: 0.0 }
    }

    fn tune(&mut self, f: f64, bw: f64) {
        let fs = SAMPLE_RATE as f64;
        self.c = -(-2.0 * PI * bw / fs).exp();
        self.b = 2.0 * (-PI * bw / fs).exp() * (2.0 * PI * f / fs).cos();
        self.a = 1.0 - self.b - self.c;
    }

    /// Scales the input so the gain at the centre frequency is 1.
    fn normalize_peak(&mut self, f: f64) {
        let w = 2.0 * PI * f / SAMPLE_RATE as f64;
        let re = 1.0 - self.b * w.cos() - self.c * (2.0 * w).cos();
        let im = self.b * w.sin() + self.c * (2.0 * w).sin();
        self.a = (re * re + im * im).sqrt();
    }

    fn step(&mut self, x: f64) -> f64 {
        let y = self.a * x + self.b * self.y1 + self.c * self.y2;
        self.y2 = self.y1;
        self.y1 = y;
        y
    }
}

/// Renders surface phones with a cascade formant synthesizer. Pitch falls
/// from 130 to 95 Hz over the utterance with a rise on accented syllables;
/// formants and amplitudes glide between phone targets with a 12 ms time
/// constant. The result is normalized to a 0.5 peak.
pub fn render_formants(rep: &LinguisticRep, durations: &[f64], seed: u64) -> AudioBuffer {
    let fs = SAMPLE_RATE as f64;
    let syms = rep.phone_symbols();
    let slots = rep.phone_slots();
    let bounds: Vec<usize> = std::iter::once(0.0)
        .chain(durations.iter().scan(0.0, |acc, d| {
            *acc += d;
            Some(*acc)
        }))
        .map(|ms| (ms * fs / 1000.0).round() as usize)
        .collect();
    let total = *bounds.last().unwrap_or(&0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![0.0; total];
    let mut res = [Resonator::new(), Resonator::new(), Resonator::new()];
    let mut noise_res = Resonator::new();
    let bws = [70.0, 100.0, 140.0];
    let smooth = (-1.0 / (0.012 * fs)).exp();
    let mut cur = target(syms.first().copied().unwrap_or(""));
    let mut formants = cur.formants;
    let (mut voice, mut noise_amp) = (0.0, 0.0);
    let mut since_pulse = f64::INFINITY;
    let mut glottal = 0.0;
    const BLOCK: usize = 16;
    for (k, &p) in syms.iter().enumerate() {
        cur = target(p);
        let accent = rep.syllable(&slots[k]).accent;
        let (start, end) = (bounds[k], bounds[k + 1]);
        let len = (end - start).max(1) as f64;
        for n in start..end {
            let frac = (n - start) as f64 / len;
            if (n - start) % BLOCK == 0 {
                for j in 0..3 {
                    let goal = cur.formants[j] + frac * (cur.end[j] - cur.formants[j]);
                    formants[j] = goal + (formants[j] - goal) * smooth.powi(BLOCK as i32);
                    res[j].tune(formants[j], bws[j]);
                }
                if cur.noise > 0.0 {
                    noise_res.tune(cur.noise_centre, cur.noise_bw);
                    noise_res.normalize_peak(cur.noise_centre);
                }
            }
            let closed = frac < cur.closure;
            let (gv, gn) = if closed {
                (cur.voice * 0.3, 0.0)
            } else {
                (cur.voice, cur.noise)
            };
            voice = gv + (voice - gv) * smooth;
            noise_amp = gn + (noise_amp - gn) * smooth;

            let t = n as f64 / total.max(1) as f64;
            let mut f0 = 130.0 - 35.0 * t;
            if accent {
                f0 += 15.0 * (PI * frac).sin();
            }
            let mut pulse = 0.0;
            let period = fs / f0;
            if since_pulse >= period {
                pulse = 1.0;
                since_pulse = if since_pulse.is_finite() { since_pulse - period } else { 0.0 };
            }
            since_pulse += 1.0;
            glottal = 0.9 * glottal + pulse;
            let mut v = glottal * voice;
            for r in &mut res {
                v = r.step(v);
            }
            let w: f64 = StandardNormal.sample(&mut rng);
            let nz = noise_res.step(w * noise_amp * 0.05);
            out[n] = v + nz;
        }
    }
    let peak = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        out.iter_mut().for_each(|v| *v *= 0.5 / peak);
    }
    AudioBuffer::new(out)
}

/// Duration-corpus utterances rendered to audio. Returns the utterances
/// (with `wav=` set to `<id>.wav`) and the matching audio.
pub fn vowel_corpus(lex: &Lexicon, fs: &FeatureSystem, size: usize, seed: u64) -> Result<(Vec<Utterance>, Vec<AudioBuffer>)> {
    let mut utts = duration_corpus(lex, fs, size, seed ^ 0xa0d1)?;
    let mut audio = Vec::with_capacity(utts.len());
    for (i, u) in utts.iter_mut().enumerate() {
        u.id = format!("voc{i:04}");
        u.wav = Some(PathBuf::from(format!("{}.wav", u.id)));
        let d = u.durations.as_ref().expect("duration corpus has durations");
        audio.push(render_formants(&u.rep, d, seed.wrapping_add(i as u64)));
    }
    Ok((utts, audio))
}

/// A few random words of the lexicon, used where any text will do.
pub fn random_words(lex: &Lexicon, n: usize, seed: u64) -> Vec<String> {
    let words: Vec<&str> = lex.entries().map(|e| e.orthography.as_str()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| words.choose(&mut rng).unwrap().to_string()).collect()
}
