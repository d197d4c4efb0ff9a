//! Letter-to-sound and post-lexical networks.
//!
//! Both are windowed classifiers: the letter-to-sound net sees nine letters
//! and names the phone class of the middle one, the post-lexical net sees
//! nine lexical phones plus the centre phone's distances to prosodic
//! boundaries and names its connected-speech realization.

use std::collections::HashMap;

use log::{debug, warn};

use crate::align::{align, phone_phone_cost, LetterPhoneCost, PhonePhoneCost};
use crate::error::{Error, Result};
use crate::lexicon::Lexicon;
use crate::nn::{self, Activation, Loss, NetSpec, Network, OutputActivation, Sample, TrainConfig, TrainReport};
use crate::phonology::{boundary_distances, FeatureSet, FeatureSystem, LinguisticRep, Syllable, EPSILON};

pub const G2P_RADIUS: usize = 4;
pub const POSTLEX_RADIUS: usize = 4;
/// Entries whose alignment costs more than this many times the longer
/// sequence length are skipped.
pub const SKIP_COST_RATIO: f64 = 1.5;
pub const MAX_COMPOSITE: usize = 2;
const LETTERS: usize = 26;

/// One-hot phone identity (plus a pad slot) followed by its features.
#[derive(Debug, Clone)]
pub struct PhoneCoder {
    symbols: Vec<String>,
    index: HashMap<String, usize>,
    fs: FeatureSystem,
}

impl PhoneCoder {
    /// Every phone of the inventory except ε.
    pub fn new(fs: &FeatureSystem) -> Self {
        let symbols: Vec<String> = fs
            .phones()
            .iter()
            .filter(|p| p.symbol != EPSILON)
            .map(|p| p.symbol.clone())
            .collect();
        let index = symbols.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        PhoneCoder {
            symbols,
            index,
            fs: fs.clone(),
        }
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn index(&self, symbol: &str) -> Option<usize> {
        self.index.get(symbol).copied()
    }

    pub fn width(&self) -> usize {
        self.symbols.len() + 1 + self.fs.feature_count()
    }

    pub fn features(&self) -> &FeatureSystem {
        &self.fs
    }

    /// `None` encodes the pad: pad one-hot bit, no features.
    pub fn push(&self, symbol: Option<&str>, out: &mut Vec<f64>) {
        let n = self.symbols.len();
        let start = out.len();
        out.resize(start + n + 1, 0.0);
        match symbol.and_then(|s| self.index(s)) {
            Some(i) => out[start + i] = 1.0,
            None => out[start + n] = 1.0,
        }
        let set = symbol.map(|s| self.fs.features(s)).unwrap_or_default();
        self.fs.feature_vector(set, out);
    }
}

fn distance_code(d: usize) -> f64 {
    1.0 / (1.0 + d as f64)
}

// ---------------------------------------------------------------------------
// Letter-to-sound

/// Output classes: each lexical phone, ε, then composite pseudo-phones.
#[derive(Debug, Clone, PartialEq)]
pub struct G2pAlphabet {
    classes: Vec<Vec<String>>,
    index: HashMap<Vec<String>, usize>,
    epsilon: usize,
}

impl G2pAlphabet {
    pub fn new(fs: &FeatureSystem) -> Self {
        let mut classes: Vec<Vec<String>> = fs.lexical_phones().map(|p| vec![p.symbol.clone()]).collect();
        let epsilon = classes.len();
        classes.push(Vec::new());
        for c in fs.composites() {
            if c.len() <= MAX_COMPOSITE && !classes.contains(c) {
                classes.push(c.clone());
            }
        }
        let index = classes.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();
        G2pAlphabet {
            classes,
            index,
            epsilon,
        }
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn epsilon(&self) -> usize {
        self.epsilon
    }

    pub fn class_of(&self, phones: &[String]) -> Option<usize> {
        self.index.get(phones).copied()
    }

    pub fn expand(&self, class: usize) -> &[String] {
        &self.classes[class]
    }

    pub fn label(&self, class: usize) -> String {
        let c = &self.classes[class];
        if c.is_empty() {
            EPSILON.to_string()
        } else {
            c.join("+")
        }
    }
}

#[derive(Debug, Clone)]
pub struct G2pEncoder {
    letters: [FeatureSet; LETTERS],
    feature_count: usize,
}

impl G2pEncoder {
    pub fn new(fs: &FeatureSystem) -> Result<Self> {
        let mut letters = [FeatureSet::EMPTY; LETTERS];
        for (i, c) in ('a'..='z').enumerate() {
            letters[i] = fs.letter_features(c)?;
        }
        Ok(G2pEncoder {
            letters,
            feature_count: fs.feature_count(),
        })
    }

    pub fn letter_width(&self) -> usize {
        LETTERS + 1 + self.feature_count
    }

    pub fn input_width(&self) -> usize {
        (2 * G2P_RADIUS + 1) * self.letter_width()
    }

    fn letter_frame(&self, c: Option<char>) -> Vec<f64> {
        let mut v = vec![0.0; LETTERS + 1];
        let set = match c {
            Some(c) => {
                let i = (c as u8 - b'a') as usize;
                v[i] = 1.0;
                self.letters[i]
            }
            None => {
                v[LETTERS] = 1.0;
                FeatureSet::EMPTY
            }
        };
        for f in 0..self.feature_count {
            v.push(if set.contains(f) { 1.0 } else { 0.0 });
        }
        v
    }

    /// One input window per letter of `letters` (already reduced to a–z).
    pub fn encode(&self, letters: &[char]) -> Vec<Vec<f64>> {
        let frames: Vec<Vec<f64>> = letters.iter().map(|&c| self.letter_frame(Some(c))).collect();
        let pad = self.letter_frame(None);
        (0..letters.len())
            .map(|i| nn::assemble_window(&frames, i, G2P_RADIUS, &pad))
            .collect()
    }
}

/// Lowercased a–z letters of a word; other characters carry no sound.
pub fn spelling(word: &str) -> Vec<char> {
    word.chars()
        .map(|c| c.to_ascii_lowercase())
        .filter(char::is_ascii_lowercase)
        .collect()
}

/// Aligns a spelling with a pronunciation and assigns one class per letter.
/// A phone with no letter of its own joins a neighbouring letter: it takes
/// over an adjacent silent letter, or forms a composite with the letter
/// before or after. `None` when that is impossible or the alignment is too
/// costly.
pub fn align_entry(
    letters: &[char],
    phones: &[String],
    cm: &LetterPhoneCost,
    alphabet: &G2pAlphabet,
) -> Option<Vec<usize>> {
    if letters.is_empty() || phones.is_empty() {
        return None;
    }
    let al = align(letters, phones, cm);
    if al.total_cost > SKIP_COST_RATIO * letters.len().max(phones.len()) as f64 {
        return None;
    }
    let mut slots: Vec<Vec<String>> = Vec::with_capacity(letters.len());
    // (gap, phone): the phone sits before letter `gap`
    let mut inserted: Vec<(usize, String)> = Vec::new();
    for (l, p) in &al.pairs {
        match (l, p) {
            (Some(_), Some(p)) => slots.push(vec![p.clone()]),
            (Some(_), None) => slots.push(Vec::new()),
            (None, Some(p)) => inserted.push((slots.len(), p.clone())),
            (None, None) => unreachable!(),
        }
    }
    for (gap, p) in inserted {
        let prev = gap.checked_sub(1);
        let next = (gap < slots.len()).then_some(gap);
        if let Some(i) = prev.filter(|&i| slots[i].is_empty()) {
            slots[i].push(p);
        } else if let Some(i) = next.filter(|&i| slots[i].is_empty()) {
            slots[i].push(p);
        } else if let Some(i) = prev.filter(|&i| {
            slots[i].len() == 1 && alphabet.class_of(&[slots[i][0].clone(), p.clone()]).is_some()
        }) {
            slots[i].push(p);
        } else if let Some(i) = next.filter(|&i| {
            slots[i].len() == 1 && alphabet.class_of(&[p.clone(), slots[i][0].clone()]).is_some()
        }) {
            slots[i].insert(0, p);
        } else {
            return None;
        }
    }
    slots.iter().map(|s| alphabet.class_of(s)).collect()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetReport {
    pub used: usize,
    pub skipped: Vec<String>,
}

/// One sample per letter of every alignable lexicon entry, in lexicon order.
/// Homographs contribute their first pronunciation.
pub fn build_g2p_dataset(lex: &Lexicon, fs: &FeatureSystem, cm: &LetterPhoneCost) -> Result<(Vec<Sample>, DatasetReport)> {
    let alphabet = G2pAlphabet::new(fs);
    let encoder = G2pEncoder::new(fs)?;
    let mut samples = Vec::new();
    let mut report = DatasetReport::default();
    for entry in lex.entries() {
        let letters = spelling(&entry.orthography);
        let phones = entry.variants[0].phones();
        match align_entry(&letters, &phones, cm, &alphabet) {
            Some(classes) => {
                report.used += 1;
                for (input, class) in encoder.encode(&letters).into_iter().zip(classes) {
                    samples.push(Sample::new(input, nn::one_hot(class, alphabet.len())));
                }
            }
            None => {
                debug!("letter-to-sound: skipping unalignable entry {:?}", entry.orthography);
                report.skipped.push(entry.orthography.clone());
            }
        }
    }
    if !report.skipped.is_empty() {
        warn!("letter-to-sound: skipped {} unalignable entries", report.skipped.len());
    }
    Ok((samples, report))
}

#[derive(Debug, Clone, PartialEq)]
pub struct G2pConfig {
    pub hidden: usize,
    pub train: TrainConfig,
}

impl Default for G2pConfig {
    fn default() -> Self {
        G2pConfig {
            hidden: 128,
            train: TrainConfig {
                learning_rate: 0.1,
                momentum: 0.9,
                epochs: 40,
                batch_size: 16,
                seed: 1,
                init_scale: 1.0,
                loss: Loss::CrossEntropy,
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct G2pModel {
    pub net: Network,
    alphabet: G2pAlphabet,
    encoder: G2pEncoder,
}

impl G2pModel {
    pub fn from_network(net: Network, fs: &FeatureSystem) -> Result<Self> {
        let alphabet = G2pAlphabet::new(fs);
        let encoder = G2pEncoder::new(fs)?;
        check_shape(&net, encoder.input_width(), alphabet.len(), "letter-to-sound")?;
        Ok(G2pModel { net, alphabet, encoder })
    }

    pub fn train(samples: &[Sample], fs: &FeatureSystem, cfg: &G2pConfig) -> Result<(Self, TrainReport)> {
        let alphabet = G2pAlphabet::new(fs);
        let encoder = G2pEncoder::new(fs)?;
        let spec = NetSpec::new(
            &[encoder.input_width(), cfg.hidden, alphabet.len()],
            Activation::Tanh,
            OutputActivation::Softmax,
        );
        let mut net = spec.build(cfg.train.seed, cfg.train.init_scale)?;
        let report = nn::train(&mut net, samples, &cfg.train)?;
        Ok((G2pModel { net, alphabet, encoder }, report))
    }

    pub fn alphabet(&self) -> &G2pAlphabet {
        &self.alphabet
    }

    /// Most likely class for each letter.
    pub fn classify(&self, word: &str) -> Vec<usize> {
        let letters = spelling(word);
        self.encoder
            .encode(&letters)
            .iter()
            .map(|x| nn::argmax(&self.net.forward(x).expect("input width fixed by encoder")))
            .collect()
    }

    /// Per-letter classes with ε dropped and composites expanded.
    pub fn predict(&self, word: &str) -> Result<Vec<String>> {
        let classes = self.classify(word);
        if classes.is_empty() {
            return Ok(Vec::new());
        }
        let phones: Vec<String> = classes
            .iter()
            .flat_map(|&c| self.alphabet.expand(c).iter().cloned())
            .collect();
        if phones.is_empty() {
            return Err(Error::EmptyPronunciation(word.to_string()));
        }
        Ok(phones)
    }

    /// Fraction of samples whose target class is the network's argmax.
    pub fn accuracy(&self, samples: &[Sample]) -> f64 {
        classification_accuracy(&self.net, samples)
    }
}

pub fn classification_accuracy(net: &Network, samples: &[Sample]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let correct = samples
        .iter()
        .filter(|s| net.classify(&s.input).ok() == Some(nn::argmax(&s.target)))
        .count();
    correct as f64 / samples.len() as f64
}

fn check_shape(net: &Network, inputs: usize, outputs: usize, what: &str) -> Result<()> {
    if net.input_size() != inputs || net.output_size() != outputs {
        return Err(Error::Model(format!(
            "{what} network is {}→{}, expected {inputs}→{outputs}",
            net.input_size(),
            net.output_size()
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Post-lexical

/// Output classes: every post-lexical phone, ε (deletion) included.
#[derive(Debug, Clone, PartialEq)]
pub struct PostlexAlphabet {
    symbols: Vec<String>,
    index: HashMap<String, usize>,
}

impl PostlexAlphabet {
    pub fn new(fs: &FeatureSystem) -> Self {
        let mut symbols: Vec<String> = fs.postlexical_phones().map(|p| p.symbol.clone()).collect();
        if !symbols.iter().any(|s| s == EPSILON) {
            symbols.push(EPSILON.to_string());
        }
        let index = symbols.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        PostlexAlphabet { symbols, index }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn index(&self, symbol: &str) -> Option<usize> {
        self.index.get(symbol).copied()
    }

    pub fn symbol(&self, class: usize) -> &str {
        &self.symbols[class]
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }
}

#[derive(Debug, Clone)]
pub struct PostlexEncoder {
    coder: PhoneCoder,
}

const STRESS_BITS: usize = 3;

impl PostlexEncoder {
    pub fn new(fs: &FeatureSystem) -> Self {
        PostlexEncoder {
            coder: PhoneCoder::new(fs),
        }
    }

    pub fn slot_width(&self) -> usize {
        self.coder.width() + STRESS_BITS
    }

    pub fn input_width(&self) -> usize {
        (2 * POSTLEX_RADIUS + 1) * self.slot_width() + 8
    }

    /// One input vector per phone of `rep`: a nine-phone window where every
    /// slot holds identity, features and the stress of its syllable, then the
    /// centre phone's previous/next distances to word, phrase, clause and
    /// sentence boundaries, each coded as 1/(1 + d).
    pub fn encode(&self, rep: &LinguisticRep) -> Vec<Vec<f64>> {
        let slots = rep.phone_slots();
        let frames: Vec<Vec<f64>> = slots
            .iter()
            .map(|s| {
                let mut v = Vec::with_capacity(self.slot_width());
                self.coder.push(Some(rep.symbol(s)), &mut v);
                let mut stress = [0.0; STRESS_BITS];
                stress[rep.syllable(s).stress.min(2) as usize] = 1.0;
                v.extend_from_slice(&stress);
                v
            })
            .collect();
        let mut pad = Vec::with_capacity(self.slot_width());
        self.coder.push(None, &mut pad);
        pad.extend_from_slice(&[0.0; STRESS_BITS]);
        let dist = boundary_distances(rep);
        (0..slots.len())
            .map(|i| {
                let mut x = nn::assemble_window(&frames, i, POSTLEX_RADIUS, &pad);
                for l in 0..4 {
                    x.push(distance_code(dist.prev[i][l]));
                    x.push(distance_code(dist.next[i][l]));
                }
                x
            })
            .collect()
    }
}

/// A lexical utterance paired with each word's observed surface phones.
#[derive(Debug, Clone, PartialEq)]
pub struct PostlexExample {
    pub rep: LinguisticRep,
    pub surface: Vec<Vec<String>>,
}

/// Surface symbol for each lexical phone (ε where it was deleted), or `None`
/// when the pair needs an insertion or costs too much to align.
pub fn align_postlex_word(lexical: &[String], surface: &[String], cm: &PhonePhoneCost) -> Option<Vec<String>> {
    let al = align(lexical, surface, cm);
    let limit = SKIP_COST_RATIO * lexical.len().max(surface.len()).max(1) as f64;
    if al.total_cost > limit {
        return None;
    }
    let mut out = Vec::with_capacity(lexical.len());
    for (l, s) in al.pairs {
        match (l, s) {
            (Some(_), Some(s)) => out.push(s),
            (Some(_), None) => out.push(EPSILON.to_string()),
            (None, _) => return None,
        }
    }
    Some(out)
}

/// One sample per lexical phone of every alignable word, in corpus order.
pub fn build_postlex_dataset(examples: &[PostlexExample], fs: &FeatureSystem) -> Result<(Vec<Sample>, DatasetReport)> {
    let alphabet = PostlexAlphabet::new(fs);
    let encoder = PostlexEncoder::new(fs);
    let cm = phone_phone_cost(fs);
    let mut samples = Vec::new();
    let mut report = DatasetReport::default();
    for ex in examples {
        if ex.surface.len() != ex.rep.words.len() {
            return Err(Error::invalid(format!(
                "{} surface words for {} lexical words",
                ex.surface.len(),
                ex.rep.words.len()
            )));
        }
        let inputs = encoder.encode(&ex.rep);
        let mut at = 0;
        for (word, surface) in ex.rep.words.iter().zip(&ex.surface) {
            let lexical: Vec<String> = word.phones().map(String::from).collect();
            let n = lexical.len();
            match align_postlex_word(&lexical, surface, &cm) {
                Some(targets) => {
                    report.used += 1;
                    for (k, t) in targets.iter().enumerate() {
                        let class = alphabet
                            .index(t)
                            .ok_or_else(|| Error::invalid(format!("{t:?} is not a post-lexical phone")))?;
                        samples.push(Sample::new(inputs[at + k].clone(), nn::one_hot(class, alphabet.len())));
                    }
                }
                None => {
                    debug!("post-lexical: skipping unalignable word {:?}", word.orthography);
                    report.skipped.push(word.orthography.clone());
                }
            }
            at += n;
        }
    }
    Ok((samples, report))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PostlexConfig {
    pub hidden: usize,
    pub train: TrainConfig,
}

impl Default for PostlexConfig {
    fn default() -> Self {
        PostlexConfig {
            hidden: 64,
            train: TrainConfig {
                learning_rate: 0.1,
                momentum: 0.9,
                epochs: 25,
                batch_size: 16,
                seed: 2,
                init_scale: 1.0,
                loss: Loss::CrossEntropy,
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct PostlexModel {
    pub net: Network,
    alphabet: PostlexAlphabet,
    encoder: PostlexEncoder,
}

impl PostlexModel {
    pub fn from_network(net: Network, fs: &FeatureSystem) -> Result<Self> {
        let alphabet = PostlexAlphabet::new(fs);
        let encoder = PostlexEncoder::new(fs);
        check_shape(&net, encoder.input_width(), alphabet.len(), "post-lexical")?;
        Ok(PostlexModel { net, alphabet, encoder })
    }

    /// A network that copies its centre phone: one hidden unit per phone
    /// wired from the centre slot's identity bit to the same output class.
    pub fn identity(fs: &FeatureSystem) -> Result<Self> {
        let alphabet = PostlexAlphabet::new(fs);
        let encoder = PostlexEncoder::new(fs);
        let coder = &encoder.coder;
        let n = coder.symbols().len();
        let spec = NetSpec::new(
            &[encoder.input_width(), n, alphabet.len()],
            Activation::Tanh,
            OutputActivation::Softmax,
        );
        let mut net = Network::zeros(&spec)?;
        let centre = POSTLEX_RADIUS * encoder.slot_width();
        for (i, sym) in coder.symbols().iter().enumerate() {
            net.layers[0].set_weight(centre + i, i, 4.0);
            if let Some(c) = alphabet.index(sym) {
                net.layers[1].set_weight(i, c, 8.0);
            }
        }
        Ok(PostlexModel { net, alphabet, encoder })
    }

    pub fn train(samples: &[Sample], fs: &FeatureSystem, cfg: &PostlexConfig) -> Result<(Self, TrainReport)> {
        let alphabet = PostlexAlphabet::new(fs);
        let encoder = PostlexEncoder::new(fs);
        let spec = NetSpec::new(
            &[encoder.input_width(), cfg.hidden, alphabet.len()],
            Activation::Tanh,
            OutputActivation::Softmax,
        );
        let mut net = spec.build(cfg.train.seed, cfg.train.init_scale)?;
        let report = nn::train(&mut net, samples, &cfg.train)?;
        Ok((PostlexModel { net, alphabet, encoder }, report))
    }

    pub fn alphabet(&self) -> &PostlexAlphabet {
        &self.alphabet
    }

    pub fn encoder(&self) -> &PostlexEncoder {
        &self.encoder
    }

    /// Predicted surface symbol (possibly ε) for every lexical phone.
    pub fn classify(&self, rep: &LinguisticRep) -> Vec<String> {
        self.encoder
            .encode(rep)
            .iter()
            .map(|x| {
                let c = nn::argmax(&self.net.forward(x).expect("input width fixed by encoder"));
                self.alphabet.symbol(c).to_string()
            })
            .collect()
    }

    /// Surface phones per word, deletions removed.
    pub fn predict(&self, rep: &LinguisticRep) -> Vec<Vec<String>> {
        let surface = apply_surface(rep, &self.classify(rep));
        surface
            .words
            .iter()
            .map(|w| w.phones().map(String::from).collect())
            .collect()
    }

    /// The representation rewritten with predicted surface phones.
    pub fn apply(&self, rep: &LinguisticRep) -> LinguisticRep {
        apply_surface(rep, &self.classify(rep))
    }

    pub fn accuracy(&self, samples: &[Sample]) -> f64 {
        classification_accuracy(&self.net, samples)
    }
}

/// Replaces each phone of `rep` with the matching entry of `symbols` and
/// removes ε. A syllable nucleus is never deleted: if ε is predicted for it
/// the lexical phone stays, so every syllable keeps its nucleus.
pub fn apply_surface(rep: &LinguisticRep, symbols: &[String]) -> LinguisticRep {
    let mut out = rep.clone();
    let mut k = 0;
    for word in &mut out.words {
        for syl in &mut word.syllables {
            let mut phones = Vec::with_capacity(syl.phones.len());
            let mut nucleus = None;
            for (i, lexical) in syl.phones.iter().enumerate() {
                let s = &symbols[k];
                k += 1;
                let is_nucleus = syl.nucleus == Some(i);
                if s == EPSILON && !is_nucleus {
                    continue;
                }
                if is_nucleus {
                    nucleus = Some(phones.len());
                }
                phones.push(if s == EPSILON { lexical.clone() } else { s.clone() });
            }
            *syl = Syllable {
                phones,
                stress: syl.stress,
                nucleus,
                accent: syl.accent,
            };
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PostlexMetrics {
    /// Percentage of slots whose reference equals the lexical phone.
    pub identity_baseline: f64,
    /// Percentage of slots predicted correctly.
    pub accuracy: f64,
    pub slots: usize,
}

/// Phone-level percentages over aligned slots; ε counts as a phone.
pub fn postlex_metrics(lexical: &[String], predictions: &[String], references: &[String]) -> Result<PostlexMetrics> {
    if lexical.len() != references.len() || predictions.len() != references.len() {
        return Err(Error::invalid(format!(
            "aligned lengths differ: {} lexical, {} predicted, {} reference",
            lexical.len(),
            predictions.len(),
            references.len()
        )));
    }
    let n = references.len();
    if n == 0 {
        return Ok(PostlexMetrics {
            identity_baseline: 100.0,
            accuracy: 100.0,
            slots: 0,
        });
    }
    let same = lexical.iter().zip(references).filter(|(a, b)| a == b).count();
    let right = predictions.iter().zip(references).filter(|(a, b)| a == b).count();
    Ok(PostlexMetrics {
        identity_baseline: 100.0 * same as f64 / n as f64,
        accuracy: 100.0 * right as f64 / n as f64,
        slots: n,
    })
}

/// Lexical symbols, aligned references and predictions for every alignable
/// word of `examples`.
pub fn evaluate_postlex(model: &PostlexModel, examples: &[PostlexExample], fs: &FeatureSystem) -> Result<PostlexMetrics> {
    let cm = phone_phone_cost(fs);
    let mut lex = Vec::new();
    let mut pred = Vec::new();
    let mut refs = Vec::new();
    for ex in examples {
        let predicted = model.classify(&ex.rep);
        let mut at = 0;
        for (word, surface) in ex.rep.words.iter().zip(&ex.surface) {
            let lexical: Vec<String> = word.phones().map(String::from).collect();
            let n = lexical.len();
            if let Some(targets) = align_postlex_word(&lexical, surface, &cm) {
                lex.extend(lexical);
                refs.extend(targets);
                pred.extend_from_slice(&predicted[at..at + n]);
            }
            at += n;
        }
    }
    postlex_metrics(&lex, &pred, &refs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::letter_phone_cost;
    use crate::phonology::{BoundaryMarks, Word};

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn alphabet_has_epsilon_and_composites() {
        let fs = FeatureSystem::english();
        let a = G2pAlphabet::new(&fs);
        assert!(a.expand(a.epsilon()).is_empty());
        assert_eq!(a.label(a.epsilon()), EPSILON);
        let ks = a.class_of(&s(&["k", "s"])).unwrap();
        assert_eq!(a.expand(ks), ["k", "s"]);
        assert_eq!(a.label(ks), "k+s");
        let mut seen = std::collections::HashSet::new();
        for c in 0..a.len() {
            assert!(seen.insert(a.expand(c).to_vec()));
            assert!(a.expand(c).len() <= MAX_COMPOSITE);
            for p in a.expand(c) {
                assert!(fs.contains(p));
            }
        }
    }

    #[test]
    fn postlex_alphabet_has_flap_and_glottal_stop() {
        let a = PostlexAlphabet::new(&FeatureSystem::english());
        assert!(a.index("dx").is_some());
        assert!(a.index("q").is_some());
        assert!(a.index(EPSILON).is_some());
    }

    #[test]
    fn silent_e_maps_to_epsilon() {
        let fs = FeatureSystem::english();
        let cm = letter_phone_cost(&fs);
        let a = G2pAlphabet::new(&fs);
        let classes = align_entry(&spelling("cake"), &s(&["k", "ey", "k"]), &cm, &a).unwrap();
        assert_eq!(classes.len(), 4);
        assert_eq!(classes[3], a.epsilon());
    }

    #[test]
    fn apply_surface_keeps_nuclei() {
        let fs = FeatureSystem::english();
        let syl = crate::phonology::parse_pronunciation("s-ih1-t", &fs).unwrap();
        let rep = LinguisticRep {
            words: vec![Word {
                orthography: "sit".into(),
                pos: "VB".into(),
                content: true,
                prominence: 1,
                syllables: syl,
                boundary: BoundaryMarks::NONE,
                break_index: None,
            }],
        };
        let out = apply_surface(&rep, &s(&[EPSILON, EPSILON, "q"]));
        assert_eq!(out.words[0].syllables[0].phones, ["ih", "q"]);
        assert_eq!(out.words[0].syllables[0].nucleus, Some(0));
    }

    #[test]
    fn metrics_length_mismatch_is_an_error() {
        assert!(postlex_metrics(&s(&["t"]), &s(&["t", "t"]), &s(&["t"])).is_err());
        let m = postlex_metrics(&s(&["t", "d"]), &s(&["dx", "d"]), &s(&["dx", "d"])).unwrap();
        assert_eq!(m.accuracy, 100.0);
        assert_eq!(m.identity_baseline, 50.0);
    }

    #[test]
    fn insertion_cannot_be_a_postlex_target() {
        let fs = FeatureSystem::english();
        let cm = phone_phone_cost(&fs);
        assert_eq!(align_postlex_word(&s(&["t"]), &s(&["t", "ah"]), &cm), None);
        assert_eq!(
            align_postlex_word(&s(&["w", "aa", "n", "t"]), &s(&["w", "aa", "n"]), &cm).unwrap(),
            s(&["w", "aa", "n", EPSILON])
        );
    }
}
