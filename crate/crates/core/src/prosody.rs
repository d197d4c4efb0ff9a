//! Duration network: per-phone context encoding, log and z-score duration
//! targets, and duration prediction.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::corpus::{Utterance, MIN_DURATION_MS};
use crate::error::{Error, Result};
use crate::lingnets::PhoneCoder;
use crate::nn::{self, Activation, Loss, NetSpec, Network, OutputActivation, Sample, TrainConfig, TrainReport};
use crate::phonology::{FeatureSystem, Level, LinguisticRep, PhoneSlot};

pub const DURATION_RADIUS: usize = 2;
pub const RULE_BITS: usize = 8;
const STATS_HEADER: &str = "neurotts-duration-stats 1";

/// Names of the rule-condition bits, in input order.
pub const RULE_NAMES: [&str; RULE_BITS] = [
    "phrase-final syllable",
    "clause-final syllable",
    "unstressed syllable",
    "function word",
    "syllable nucleus",
    "pre-pausal (sentence-final) syllable",
    "polysyllabic word",
    "pitch-accented syllable",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DurationMode {
    Log,
    #[default]
    ZScore,
}

impl DurationMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "log" => Ok(DurationMode::Log),
            "zscore" => Ok(DurationMode::ZScore),
            _ => Err(Error::invalid(format!("duration mode {s:?} is not log or zscore"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DurationMode::Log => "log",
            DurationMode::ZScore => "zscore",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhoneStat {
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DurationStats {
    pub phones: BTreeMap<String, PhoneStat>,
    pub global: PhoneStat,
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Per-phone mean and unbiased standard deviation. A phone whose durations
/// do not vary borrows the global deviation; if that is zero too, 1 ms.
pub fn phone_stats<'a>(tokens: impl IntoIterator<Item = (&'a str, f64)>) -> Result<DurationStats> {
    let mut by_phone: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut all = Vec::new();
    for (p, d) in tokens {
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::invalid(format!("duration {d} of {p:?} is not positive")));
        }
        by_phone.entry(p.to_string()).or_default().push(d);
        all.push(d);
    }
    if all.is_empty() {
        return Err(Error::invalid("no durations to summarize"));
    }
    let (gm, mut gs) = mean_std(&all);
    if !(gs > 0.0) {
        gs = 1.0;
    }
    let global = PhoneStat {
        mean: gm,
        std: gs,
        count: all.len(),
    };
    let phones = by_phone
        .into_iter()
        .map(|(p, v)| {
            let (mean, std) = mean_std(&v);
            let std = if std > 0.0 { std } else { gs };
            (p, PhoneStat { mean, std, count: v.len() })
        })
        .collect();
    Ok(DurationStats { phones, global })
}

impl DurationStats {
    /// Stats of every phone/duration pair in a corpus.
    pub fn from_corpus(utts: &[Utterance]) -> Result<Self> {
        let mut tokens = Vec::new();
        for u in utts {
            let d = u
                .durations
                .as_ref()
                .ok_or_else(|| Error::invalid(format!("utterance {} has no durations", u.id)))?;
            tokens.extend(u.rep.phone_symbols().into_iter().zip(d.iter().copied()));
        }
        phone_stats(tokens)
    }

    pub fn get(&self, phone: &str) -> PhoneStat {
        self.phones.get(phone).copied().unwrap_or(self.global)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{STATS_HEADER}\n");
        let line = |s: &mut String, name: &str, p: &PhoneStat| {
            let _ = writeln!(s, "{name} {:?} {:?} {}", p.mean, p.std, p.count);
        };
        line(&mut s, "*", &self.global);
        for (p, st) in &self.phones {
            line(&mut s, p, st);
        }
        s
    }

    pub fn parse(text: &str, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == STATS_HEADER => {}
            _ => return Err(Error::parse(path, 1, format!("expected header {STATS_HEADER:?}"))),
        }
        let mut global = None;
        let mut phones = BTreeMap::new();
        for (i, line) in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.is_empty() {
                continue;
            }
            let bad = || Error::parse(path, i + 1, format!("malformed stats line {line:?}"));
            if f.len() != 4 {
                return Err(bad());
            }
            let mean: f64 = f[1].parse().map_err(|_| bad())?;
            let std: f64 = f[2].parse().map_err(|_| bad())?;
            let count: usize = f[3].parse().map_err(|_| bad())?;
            if !(mean > 0.0 && std > 0.0) {
                return Err(bad());
            }
            let st = PhoneStat { mean, std, count };
            if f[0] == "*" {
                global = Some(st);
            } else {
                phones.insert(f[0].to_string(), st);
            }
        }
        let global = global.ok_or_else(|| Error::parse(path, 1, "missing global `*` line"))?;
        Ok(DurationStats { phones, global })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

pub fn to_log(ms: f64) -> Result<f64> {
    if ms > 0.0 && ms.is_finite() {
        Ok(ms.ln())
    } else {
        Err(Error::invalid(format!("duration {ms} ms is not positive")))
    }
}

pub fn from_log(v: f64) -> f64 {
    v.exp()
}

pub fn to_zscore(ms: f64, phone: &str, stats: &DurationStats) -> f64 {
    let s = stats.get(phone);
    (ms - s.mean) / s.std
}

/// Inverse z-score, floored at the minimum duration.
pub fn from_zscore(z: f64, phone: &str, stats: &DurationStats) -> f64 {
    let s = stats.get(phone);
    (s.mean + z * s.std).max(MIN_DURATION_MS)
}

/// Rule-condition bits of one phone, in [`RULE_NAMES`] order.
pub fn rule_conditions(rep: &LinguisticRep, slot: &PhoneSlot) -> [bool; RULE_BITS] {
    let word = &rep.words[slot.word];
    let syl = rep.syllable(slot);
    let last = slot.syllable + 1 == word.syllables.len();
    [
        last && word.boundary.has(Level::Phrase),
        last && word.boundary.has(Level::Clause),
        syl.stress == 0,
        !word.content,
        syl.nucleus == Some(slot.index_in_syllable),
        last && word.boundary.has(Level::Sentence),
        word.syllables.len() > 1,
        syl.accent,
    ]
}

fn signed_code(d: isize) -> f64 {
    d.clamp(-4, 4) as f64 / 4.0
}

fn distance_code(d: usize) -> f64 {
    1.0 / (1.0 + d as f64)
}

/// Encodes each phone for the duration network.
///
/// Per phone: a ±2 window whose slots hold identity and features, the
/// syllable's stress (3 bits), a content-word flag and word-start/word-end
/// flags; then the signed offset from the syllable nucleus (clamped to ±4,
/// scaled by 1/4), syllable distances to the start and end of the phrase
/// coded 1/(1 + d), the signed syllable offset to the nearest pitch accent
/// (±4 scaled, 0 with a no-accent flag when the utterance has none), the 8
/// rule bits and ln(phone mean duration)/6.
#[derive(Debug, Clone)]
pub struct DurationEncoder {
    coder: PhoneCoder,
}

impl DurationEncoder {
    pub fn new(fs: &FeatureSystem) -> Self {
        DurationEncoder {
            coder: PhoneCoder::new(fs),
        }
    }

    pub fn slot_width(&self) -> usize {
        self.coder.width() + 3 + 3
    }

    pub fn input_width(&self) -> usize {
        (2 * DURATION_RADIUS + 1) * self.slot_width() + 1 + 2 + 2 + RULE_BITS + 1
    }

    fn pad(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.slot_width());
        self.coder.push(None, &mut v);
        v.resize(self.slot_width(), 0.0);
        v
    }

    fn slot_vectors(&self, rep: &LinguisticRep, slots: &[PhoneSlot]) -> Vec<Vec<f64>> {
        slots
            .iter()
            .map(|s| {
                let word = &rep.words[s.word];
                let mut v = Vec::with_capacity(self.slot_width());
                self.coder.push(Some(rep.symbol(s)), &mut v);
                let mut stress = [0.0; 3];
                stress[rep.syllable(s).stress.min(2) as usize] = 1.0;
                v.extend_from_slice(&stress);
                let first = s.syllable == 0 && s.index_in_syllable == 0;
                let lastp = s.syllable + 1 == word.syllables.len()
                    && s.index_in_syllable + 1 == word.syllables[s.syllable].phones.len();
                v.push(f64::from(u8::from(word.content)));
                v.push(f64::from(u8::from(first)));
                v.push(f64::from(u8::from(lastp)));
                v
            })
            .collect()
    }

    /// Input for the phone at `index`.
    pub fn encode_phone(&self, rep: &LinguisticRep, index: usize, stats: &DurationStats) -> Result<Vec<f64>> {
        let n = rep.phone_count();
        if index >= n {
            return Err(Error::invalid(format!("phone index {index} out of range for {n} phones")));
        }
        Ok(self.encode(rep, stats).swap_remove(index))
    }

    /// Inputs for every phone of `rep`.
    pub fn encode(&self, rep: &LinguisticRep, stats: &DurationStats) -> Vec<Vec<f64>> {
        let slots = rep.phone_slots();
        let frames = self.slot_vectors(rep, &slots);
        let pad = self.pad();

        // Syllable-level context: phrase index of each syllable, accents.
        let mut syl_phrase = Vec::new();
        let mut accented = Vec::new();
        for (k, r) in rep.constituents(Level::Phrase).into_iter().enumerate() {
            for w in r {
                for syl in &rep.words[w].syllables {
                    syl_phrase.push(k);
                    accented.push(syl.accent);
                }
            }
        }
        let nsyl = syl_phrase.len();
        let mut phrase_start = vec![0; nsyl];
        let mut phrase_end = vec![0; nsyl];
        for i in 0..nsyl {
            phrase_start[i] = if i > 0 && syl_phrase[i - 1] == syl_phrase[i] { phrase_start[i - 1] + 1 } else { 0 };
        }
        for i in (0..nsyl).rev() {
            phrase_end[i] = if i + 1 < nsyl && syl_phrase[i + 1] == syl_phrase[i] { phrase_end[i + 1] + 1 } else { 0 };
        }
        let accents: Vec<usize> = (0..nsyl).filter(|&i| accented[i]).collect();

        slots
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let mut x = nn::assemble_window(&frames, i, DURATION_RADIUS, &pad);
                let syl = rep.syllable(s);
                let nucleus = syl.nucleus.unwrap_or(0) as isize;
                x.push(signed_code(s.index_in_syllable as isize - nucleus));
                let g = s.global_syllable;
                x.push(distance_code(phrase_start[g]));
                x.push(distance_code(phrase_end[g]));
                match accents.iter().map(|&a| a as isize - g as isize).min_by_key(|d| d.abs()) {
                    Some(d) => {
                        x.push(signed_code(d));
                        x.push(0.0);
                    }
                    None => {
                        x.push(0.0);
                        x.push(1.0);
                    }
                }
                for b in rule_conditions(rep, s) {
                    x.push(f64::from(u8::from(b)));
                }
                x.push(stats.get(rep.symbol(s)).mean.ln() / 6.0);
                x
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DurationConfig {
    pub hidden: usize,
    pub mode: DurationMode,
    pub train: TrainConfig,
}

impl Default for DurationConfig {
    fn default() -> Self {
        DurationConfig {
            hidden: 32,
            mode: DurationMode::ZScore,
            train: TrainConfig {
                learning_rate: 0.01,
                momentum: 0.9,
                epochs: 40,
                batch_size: 16,
                seed: 3,
                init_scale: 1.0,
                loss: Loss::Mse,
            },
        }
    }
}

fn target(mode: DurationMode, ms: f64, phone: &str, stats: &DurationStats) -> Result<f64> {
    match mode {
        DurationMode::Log => to_log(ms),
        DurationMode::ZScore => Ok(to_zscore(ms, phone, stats)),
    }
}

/// Training pairs for every phone of every utterance with durations.
pub fn build_duration_dataset(
    utts: &[Utterance],
    stats: &DurationStats,
    mode: DurationMode,
    fs: &FeatureSystem,
) -> Result<Vec<Sample>> {
    let enc = DurationEncoder::new(fs);
    let mut out = Vec::new();
    for u in utts {
        let d = u
            .durations
            .as_ref()
            .ok_or_else(|| Error::invalid(format!("utterance {} has no durations", u.id)))?;
        let syms = u.rep.phone_symbols();
        if d.len() != syms.len() {
            return Err(Error::Dimension {
                expected: syms.len(),
                got: d.len(),
            });
        }
        for ((x, ms), p) in enc.encode(&u.rep, stats).into_iter().zip(d).zip(syms) {
            out.push(Sample::new(x, vec![target(mode, *ms, p, stats)?]));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct DurationModel {
    pub net: Network,
    pub stats: DurationStats,
    pub mode: DurationMode,
    encoder: DurationEncoder,
}

impl DurationModel {
    pub fn new(net: Network, stats: DurationStats, mode: DurationMode, fs: &FeatureSystem) -> Result<Self> {
        let encoder = DurationEncoder::new(fs);
        if net.input_size() != encoder.input_width() || net.output_size() != 1 {
            return Err(Error::Model(format!(
                "duration network is {}→{}, expected {}→1",
                net.input_size(),
                net.output_size(),
                encoder.input_width()
            )));
        }
        Ok(DurationModel {
            net,
            stats,
            mode,
            encoder,
        })
    }

    /// Trains on every utterance with durations; stats come from the same
    /// utterances.
    pub fn train(utts: &[Utterance], fs: &FeatureSystem, cfg: &DurationConfig) -> Result<(Self, TrainReport)> {
        let stats = DurationStats::from_corpus(utts)?;
        let data = build_duration_dataset(utts, &stats, cfg.mode, fs)?;
        let enc = DurationEncoder::new(fs);
        let spec = NetSpec::new(&[enc.input_width(), cfg.hidden, 1], Activation::Tanh, OutputActivation::Linear);
        let mut net = spec.build(cfg.train.seed, cfg.train.init_scale)?;
        // start as the mean predictor: log targets sit far from zero, and
        // random output weights leave input-dependent offsets that train
        // away slowly
        let mean = data.iter().map(|s| s.target[0]).sum::<f64>() / data.len().max(1) as f64;
        let out = net.layers.last_mut().expect("two layers");
        out.weights.iter_mut().for_each(|w| *w = 0.0);
        out.bias[0] = mean;
        let report = nn::train(&mut net, &data, &cfg.train)?;
        Ok((DurationModel::new(net, stats, cfg.mode, fs)?, report))
    }

    /// Duration in ms of every phone, floored at 20 ms.
    pub fn predict(&self, rep: &LinguisticRep) -> Result<Vec<f64>> {
        let syms = rep.phone_symbols();
        self.encoder
            .encode(rep, &self.stats)
            .iter()
            .zip(syms)
            .map(|(x, p)| {
                let y = self.net.forward(x)?[0];
                let ms = match self.mode {
                    DurationMode::Log => from_log(y),
                    DurationMode::ZScore => from_zscore(y, p, &self.stats),
                };
                Ok(ms.max(MIN_DURATION_MS))
            })
            .collect()
    }
}

pub fn predict_durations(rep: &LinguisticRep, model: &DurationModel) -> Result<Vec<f64>> {
    model.predict(rep)
}

/// Mean absolute error in ms between predicted and reference durations.
pub fn duration_mae(model: &DurationModel, utts: &[Utterance]) -> Result<f64> {
    let mut total = 0.0;
    let mut n = 0usize;
    for u in utts {
        let reference = u
            .durations
            .as_ref()
            .ok_or_else(|| Error::invalid(format!("utterance {} has no durations", u.id)))?;
        let pred = model.predict(&u.rep)?;
        total += pred.iter().zip(reference).map(|(a, b)| (a - b).abs()).sum::<f64>();
        n += pred.len();
    }
    Ok(if n == 0 { 0.0 } else { total / n as f64 })
}

/// MAE of predicting each phone's mean duration.
pub fn phone_mean_mae(stats: &DurationStats, utts: &[Utterance]) -> f64 {
    let mut total = 0.0;
    let mut n = 0usize;
    for u in utts {
        if let Some(d) = &u.durations {
            for (p, ms) in u.rep.phone_symbols().into_iter().zip(d) {
                total += (stats.get(p).mean - ms).abs();
                n += 1;
            }
        }
    }
    if n == 0 {
        0.0
    } else {
        total / n as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_value_stats() {
        let s = phone_stats([("a", 80.0), ("a", 120.0)]).unwrap();
        let a = s.get("a");
        assert_eq!(a.mean, 100.0);
        assert!((a.std - 800f64.sqrt()).abs() < 1e-12);
        assert_eq!(s.get("zz"), s.global);
    }

    #[test]
    fn constant_phone_falls_back() {
        let s = phone_stats([("a", 100.0), ("a", 100.0), ("a", 100.0)]).unwrap();
        assert_eq!(s.get("a").mean, 100.0);
        assert_eq!(s.get("a").std, 1.0);
        let s = phone_stats([("a", 100.0), ("a", 100.0), ("b", 50.0), ("b", 70.0)]).unwrap();
        assert_eq!(s.get("a").std, s.global.std);
        assert!(phone_stats(std::iter::empty()).is_err());
    }

    #[test]
    fn transforms() {
        assert!((to_log(100.0).unwrap() - 4.605_170_185_988_091).abs() < 1e-12);
        assert!(to_log(0.0).is_err());
        assert!(to_log(-3.0).is_err());
        let s = phone_stats([("a", 80.0), ("a", 120.0)]).unwrap();
        assert_eq!(to_zscore(100.0, "a", &s), 0.0);
        assert!((to_zscore(100.0 + s.get("a").std, "a", &s) - 1.0).abs() < 1e-12);
        assert_eq!(from_zscore(-10.0, "a", &s), MIN_DURATION_MS);
    }

    #[test]
    fn stats_text_round_trip() {
        let s = phone_stats([("a", 80.0), ("a", 120.0), ("b", 33.3)]).unwrap();
        assert_eq!(DurationStats::parse(&s.to_text(), "s").unwrap(), s);
        assert!(DurationStats::parse("bad\n", "s").is_err());
    }
}
