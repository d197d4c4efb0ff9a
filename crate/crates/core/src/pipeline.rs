//! End-to-end pipeline: configuration, synthesis with a trace, training
//! harnesses for the four networks, and benchmarking.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::json;

use crate::acoustic::{corpus_frame_dataset, AcousticConfig, AcousticModel};
use crate::align::letter_phone_cost;
use crate::corpus::{self, rep_from_tagged, Utterance};
use crate::error::{Error, Result};
use crate::lexicon::{self, is_punctuation, parse_tagged_corpus, train_tagger, Lexicon, TagModel};
use crate::lingnets::{
    build_g2p_dataset, build_postlex_dataset, evaluate_postlex, G2pConfig, G2pModel, PostlexConfig, PostlexExample,
    PostlexModel,
};
use crate::nn::Network;
use crate::phonology::{self, format_pronunciation, syllabify, FeatureSystem};
use crate::prosody::{duration_mae, phone_mean_mae, DurationConfig, DurationMode, DurationModel, DurationStats};
use crate::vocoder::{self, AudioBuffer, FrameParams, VocoderConfig};

pub const CONFIG_VERSION: u32 = 1;
pub const CONFIG_FILE: &str = "neurotts.conf";

/// Everything needed to load a trained pipeline. Paths are stored as
/// written and resolved against the directory of the config file.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub dir: PathBuf,
    pub phones: PathBuf,
    pub letters: PathBuf,
    pub lexicon: PathBuf,
    pub tagged_corpus: PathBuf,
    pub g2p: PathBuf,
    pub postlex: PathBuf,
    pub duration: PathBuf,
    pub duration_stats: PathBuf,
    pub acoustic: PathBuf,
    pub duration_mode: DurationMode,
    pub vocoder: VocoderConfig,
    pub seed: u64,
}

const PATH_KEYS: [&str; 9] = [
    "phones",
    "letters",
    "lexicon",
    "tagged_corpus",
    "g2p",
    "postlex",
    "duration",
    "duration_stats",
    "acoustic",
];

impl PipelineConfig {
    /// Config for a directory laid out by [`train_all`].
    pub fn standard(dir: &Path, seed: u64) -> Self {
        PipelineConfig {
            dir: dir.to_path_buf(),
            phones: "phones.txt".into(),
            letters: "letters.txt".into(),
            lexicon: "lexicon.tsv".into(),
            tagged_corpus: "tagged.txt".into(),
            g2p: "g2p.nnw".into(),
            postlex: "postlex.nnw".into(),
            duration: "duration.nnw".into(),
            duration_stats: "duration.stats".into(),
            acoustic: "acoustic.nnw".into(),
            duration_mode: DurationMode::ZScore,
            vocoder: VocoderConfig::default(),
            seed,
        }
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        self.dir.join(p)
    }

    fn paths(&self) -> [&PathBuf; 9] {
        [
            &self.phones,
            &self.letters,
            &self.lexicon,
            &self.tagged_corpus,
            &self.g2p,
            &self.postlex,
            &self.duration,
            &self.duration_stats,
            &self.acoustic,
        ]
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("version = {CONFIG_VERSION}\n");
        for (k, p) in PATH_KEYS.iter().zip(self.paths()) {
            let _ = writeln!(s, "{k} = {}", p.display());
        }
        let _ = writeln!(s, "duration_mode = {}", self.duration_mode.name());
        let _ = writeln!(s, "voicing_threshold = {}", self.vocoder.voicing_threshold);
        let _ = writeln!(s, "octave_ratio = {}", self.vocoder.octave_ratio);
        let _ = writeln!(s, "noise_seed = {}", self.vocoder.noise_seed);
        let _ = writeln!(s, "seed = {}", self.seed);
        s
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut kv: BTreeMap<String, (String, usize)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(path, i + 1, format!("expected key = value, got {line:?}")))?;
            let k = k.trim().to_string();
            if kv.insert(k.clone(), (v.trim().to_string(), i + 1)).is_some() {
                return Err(Error::parse(path, i + 1, format!("duplicate key {k:?}")));
            }
        }
        let take = |kv: &mut BTreeMap<String, (String, usize)>, k: &str| {
            kv.remove(k)
                .ok_or_else(|| Error::invalid(format!("{}: missing key {k:?}", path.display())))
        };
        fn num<T: std::str::FromStr>(path: &Path, (v, line): (String, usize), k: &str) -> Result<T> {
            v.parse().map_err(|_| Error::parse(path, line, format!("bad value {v:?} for {k}")))
        }
        let version: u32 = num(path, take(&mut kv, "version")?, "version")?;
        if version != CONFIG_VERSION {
            return Err(Error::Model(format!(
                "{}: config version {version}, expected {CONFIG_VERSION}",
                path.display()
            )));
        }
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let mut cfg = PipelineConfig::standard(&dir, 0);
        let mut paths = Vec::new();
        for k in PATH_KEYS {
            paths.push(PathBuf::from(take(&mut kv, k)?.0));
        }
        let mut it = paths.into_iter();
        for slot in [
            &mut cfg.phones,
            &mut cfg.letters,
            &mut cfg.lexicon,
            &mut cfg.tagged_corpus,
            &mut cfg.g2p,
            &mut cfg.postlex,
            &mut cfg.duration,
            &mut cfg.duration_stats,
            &mut cfg.acoustic,
        ] {
            *slot = it.next().unwrap();
        }
        if let Some((v, line)) = kv.remove("duration_mode") {
            cfg.duration_mode = DurationMode::parse(&v).map_err(|e| Error::parse(path, line, e.to_string()))?;
        }
        if let Some(v) = kv.remove("voicing_threshold") {
            cfg.vocoder.voicing_threshold = num(path, v, "voicing_threshold")?;
        }
        if let Some(v) = kv.remove("octave_ratio") {
            cfg.vocoder.octave_ratio = num(path, v, "octave_ratio")?;
        }
        if let Some(v) = kv.remove("noise_seed") {
            cfg.vocoder.noise_seed = num(path, v, "noise_seed")?;
        }
        if let Some(v) = kv.remove("seed") {
            cfg.seed = num(path, v, "seed")?;
        }
        if let Some((k, (_, line))) = kv.into_iter().next() {
            return Err(Error::parse(path, line, format!("unknown key {k:?}")));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

/// Where a word's lexical pronunciation came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PronSource {
    Lexicon,
    G2p,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WordTrace {
    pub orthography: String,
    pub tag: String,
    pub source: PronSource,
    /// Syllabified lexical pronunciation, e.g. `l-ih1-v`.
    pub lexical: String,
    /// Lexical phones separated by spaces, e.g. `l ih v`.
    pub lexical_phones: String,
    pub postlexical_phones: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthesisTrace {
    pub text: String,
    pub tokens: Vec<Vec<String>>,
    pub tags: Vec<Vec<String>>,
    pub words: Vec<WordTrace>,
    pub lexical_phone_count: usize,
    pub postlexical_phone_count: usize,
    pub durations_ms: Vec<f64>,
    pub total_duration_ms: f64,
    pub frame_count: usize,
    pub samples: usize,
    pub audio_ms: f64,
}

impl SynthesisTrace {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }
}

pub struct Pipeline {
    pub config: PipelineConfig,
    pub fs: FeatureSystem,
    pub lexicon: Lexicon,
    pub tagger: TagModel,
    pub g2p: G2pModel,
    pub postlex: PostlexModel,
    pub duration: DurationModel,
    pub acoustic: AcousticModel,
}

impl Pipeline {
    /// Loads every component; the tagger is trained from the tagged corpus.
    pub fn load(config: &PipelineConfig) -> Result<Self> {
        for p in config.paths() {
            let full = config.resolve(p);
            if !full.is_file() {
                return Err(Error::io(
                    full,
                    std::io::Error::new(std::io::ErrorKind::NotFound, "referenced file does not exist"),
                ));
            }
        }
        let r = |p: &PathBuf| config.resolve(p);
        let fs = FeatureSystem::load(&r(&config.phones), &r(&config.letters))?;
        let lexicon = Lexicon::load(&r(&config.lexicon), &fs)?;
        let tagged_path = r(&config.tagged_corpus);
        let text = std::fs::read_to_string(&tagged_path).map_err(|e| Error::io(&tagged_path, e))?;
        let tagger = train_tagger(&parse_tagged_corpus(&text, &tagged_path)?)?.with_lexicon(&lexicon)?;
        let g2p = G2pModel::from_network(Network::load(&r(&config.g2p))?, &fs)?;
        let postlex = PostlexModel::from_network(Network::load(&r(&config.postlex))?, &fs)?;
        let stats = DurationStats::load(&r(&config.duration_stats))?;
        let duration = DurationModel::new(Network::load(&r(&config.duration))?, stats, config.duration_mode, &fs)?;
        let acoustic = AcousticModel::new(Network::load(&r(&config.acoustic))?, &fs)?;
        Ok(Pipeline {
            config: config.clone(),
            fs,
            lexicon,
            tagger,
            g2p,
            postlex,
            duration,
            acoustic,
        })
    }

    pub fn load_file(path: &Path) -> Result<Self> {
        Self::load(&PipelineConfig::load(path)?)
    }

    /// Text to audio: tokenize, tag, look up or letter-to-sound, post-lexical
    /// rewrite, durations, frames, vocoder.
    pub fn say(&self, text: &str) -> Result<(AudioBuffer, SynthesisTrace)> {
        let sentences = lexicon::tokenize(text);
        let mut tags = Vec::with_capacity(sentences.len());
        let mut pairs = Vec::new();
        for s in &sentences {
            let t = self.tagger.pos_tag(s);
            pairs.extend(s.iter().cloned().zip(t.iter().cloned()));
            tags.push(t);
        }
        let mut words = Vec::new();
        let rep = rep_from_tagged(&pairs, |tok, tag| {
            let (syl, source) = match self.lexicon.lookup(tok, tag) {
                Some(v) => (v.pronunciation.clone(), PronSource::Lexicon),
                None => {
                    let phones = self.g2p.predict(tok).map_err(|e| e.in_stage("g2p"))?;
                    (syllabify(&phones, &self.fs), PronSource::G2p)
                }
            };
            if !syl.is_empty() {
                words.push(WordTrace {
                    orthography: tok.to_string(),
                    tag: tag.to_string(),
                    source,
                    lexical: format_pronunciation(&syl),
                    lexical_phones: syl.iter().flat_map(|s| s.phones.iter().cloned()).collect::<Vec<_>>().join(" "),
                    postlexical_phones: String::new(),
                });
            }
            Ok(syl)
        })
        .map_err(|e| e.in_stage("lexicon"))?;
        if rep.words.is_empty() {
            return Err(Error::invalid("no words to synthesize").in_stage("lexicon"));
        }
        let surface = self.postlex.apply(&rep);
        for (w, s) in words.iter_mut().zip(&surface.words) {
            w.postlexical_phones = s.phones().collect::<Vec<_>>().join(" ");
        }
        let durations = self.duration.predict(&surface).map_err(|e| e.in_stage("duration"))?;
        let frames = self
            .acoustic
            .generate(&surface, &durations)
            .map_err(|e| e.in_stage("acoustic"))?;
        let audio = vocoder::synthesize(&frames, &self.config.vocoder).map_err(|e| e.in_stage("vocoder"))?;
        let trace = SynthesisTrace {
            text: text.to_string(),
            tokens: sentences,
            tags,
            words,
            lexical_phone_count: rep.phone_count(),
            postlexical_phone_count: surface.phone_count(),
            total_duration_ms: durations.iter().sum(),
            durations_ms: durations,
            frame_count: frames.len(),
            samples: audio.samples.len(),
            audio_ms: audio.duration_ms(),
        };
        Ok((audio, trace))
    }
}

/// Synthesizes a frame dump directly, bypassing the networks.
pub fn say_frames(frames: &[FrameParams], vcfg: &VocoderConfig) -> Result<(AudioBuffer, SynthesisTrace)> {
    let audio = vocoder::synthesize(frames, vcfg).map_err(|e| e.in_stage("vocoder"))?;
    let trace = SynthesisTrace {
        text: String::new(),
        tokens: Vec::new(),
        tags: Vec::new(),
        words: Vec::new(),
        lexical_phone_count: 0,
        postlexical_phone_count: 0,
        durations_ms: Vec::new(),
        total_duration_ms: frames.len() as f64 * 10.0,
        frame_count: frames.len(),
        samples: audio.samples.len(),
        audio_ms: audio.duration_ms(),
    };
    Ok((audio, trace))
}

// ---------------------------------------------------------------------------
// Training harnesses. Each returns the model and a JSON metrics object.

/// Utterances after the first 80% are held out.
pub fn split_holdout<T>(items: &[T]) -> (&[T], &[T]) {
    let cut = (items.len() * 4).div_ceil(5).min(items.len());
    items.split_at(cut)
}

pub fn train_g2p(lex: &Lexicon, fs: &FeatureSystem, cfg: &G2pConfig) -> Result<(G2pModel, serde_json::Value)> {
    let cm = letter_phone_cost(fs);
    let (samples, report) = build_g2p_dataset(lex, fs, &cm)?;
    let t = Instant::now();
    let (model, tr) = G2pModel::train(&samples, fs, cfg)?;
    let metrics = json!({
        "stage": "g2p",
        "words": lex.len(),
        "words_used": report.used,
        "words_skipped": report.skipped.len(),
        "letters": samples.len(),
        "train_accuracy": model.accuracy(&samples),
        "final_loss": tr.final_loss(),
        "seconds": t.elapsed().as_secs_f64(),
    });
    Ok((model, metrics))
}

pub fn train_postlex(utts: &[Utterance], fs: &FeatureSystem, cfg: &PostlexConfig) -> Result<(PostlexModel, serde_json::Value)> {
    let examples: Vec<PostlexExample> = utts.iter().filter_map(Utterance::postlex_example).collect();
    if examples.is_empty() {
        return Err(Error::invalid("corpus has no post= surface forms"));
    }
    let (train, test) = split_holdout(&examples);
    let (samples, report) = build_postlex_dataset(train, fs)?;
    let (model, tr) = PostlexModel::train(&samples, fs, cfg)?;
    let held = evaluate_postlex(&model, test, fs)?;
    let metrics = json!({
        "stage": "postlex",
        "train_utterances": train.len(),
        "heldout_utterances": test.len(),
        "skipped_words": report.skipped.len(),
        "train_accuracy": model.accuracy(&samples),
        "heldout_accuracy_percent": held.accuracy,
        "identity_baseline_percent": held.identity_baseline,
        "heldout_slots": held.slots,
        "final_loss": tr.final_loss(),
    });
    Ok((model, metrics))
}

pub fn train_duration(utts: &[Utterance], fs: &FeatureSystem, cfg: &DurationConfig) -> Result<(DurationModel, serde_json::Value)> {
    let (train, test) = split_holdout(utts);
    let (model, tr) = DurationModel::train(train, fs, cfg)?;
    let metrics = json!({
        "stage": "duration",
        "mode": cfg.mode.name(),
        "train_utterances": train.len(),
        "heldout_utterances": test.len(),
        "train_mae_ms": duration_mae(&model, train)?,
        "heldout_mae_ms": duration_mae(&model, test)?,
        "phone_mean_baseline_mae_ms": phone_mean_mae(&model.stats, test),
        "final_loss": tr.final_loss(),
    });
    Ok((model, metrics))
}

/// `base` is the directory `wav=` paths are relative to.
pub fn train_acoustic(
    utts: &[Utterance],
    base: &Path,
    fs: &FeatureSystem,
    vcfg: &VocoderConfig,
    cfg: &AcousticConfig,
) -> Result<(AcousticModel, serde_json::Value)> {
    let data = corpus_frame_dataset(utts, base, fs, vcfg)?;
    let (model, tr) = AcousticModel::train(&data, fs, cfg)?;
    let metrics = json!({
        "stage": "acoustic",
        "utterances": data.len(),
        "frames": data.iter().map(Vec::len).sum::<usize>(),
        "final_frame_mse": tr.final_loss(),
        "loss_curve": tr.loss_curve,
    });
    Ok((model, metrics))
}

pub fn write_metrics(weights: &Path, metrics: &serde_json::Value) -> Result<PathBuf> {
    let mut name = weights.as_os_str().to_owned();
    name.push(".metrics.json");
    let path = PathBuf::from(name);
    let text = serde_json::to_string_pretty(metrics).expect("metrics serialize") + "\n";
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

// ---------------------------------------------------------------------------
// Corpus generation

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusKind {
    Flapping,
    Durations,
    Vowels,
}

impl CorpusKind {
    pub fn default_size(self) -> usize {
        match self {
            CorpusKind::Flapping => 800,
            CorpusKind::Durations => 900,
            CorpusKind::Vowels => 150,
        }
    }

    pub fn file_name(self) -> &'static str {
        match self {
            CorpusKind::Flapping => "flapping.txt",
            CorpusKind::Durations => "durations.txt",
            CorpusKind::Vowels => "vowels.txt",
        }
    }
}

/// Writes a synthetic corpus (and, for vowels, its WAV files) into `dir`.
/// Returns the corpus file path.
pub fn generate_corpus(kind: CorpusKind, dir: &Path, seed: u64, size: usize) -> Result<PathBuf> {
    let fs = FeatureSystem::english();
    let lex = Lexicon::english(&fs);
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(kind.file_name());
    let utts = match kind {
        CorpusKind::Flapping => corpus::flapping_corpus(&lex, &fs, size, seed, corpus::TARGET_IDENTITY).utterances,
        CorpusKind::Durations => corpus::duration_corpus(&lex, &fs, size, seed)?,
        CorpusKind::Vowels => {
            let (mut utts, audio) = corpus::vowel_corpus(&lex, &fs, size, seed)?;
            let wav_dir = dir.join("wav");
            std::fs::create_dir_all(&wav_dir).map_err(|e| Error::io(&wav_dir, e))?;
            for (u, a) in utts.iter_mut().zip(&audio) {
                let rel = Path::new("wav").join(u.wav.as_ref().unwrap());
                vocoder::write_wav(a, &dir.join(&rel))?;
                u.wav = Some(rel);
            }
            utts
        }
    };
    corpus::write_corpus(&utts, &path)?;
    Ok(path)
}

// ---------------------------------------------------------------------------
// Full training run

#[derive(Debug, Clone, PartialEq)]
pub struct TrainAllOptions {
    pub seed: u64,
    pub flapping_size: usize,
    pub duration_size: usize,
    pub vowel_size: usize,
    pub duration_mode: DurationMode,
}

impl Default for TrainAllOptions {
    fn default() -> Self {
        TrainAllOptions {
            seed: 1,
            flapping_size: CorpusKind::Flapping.default_size(),
            duration_size: CorpusKind::Durations.default_size(),
            vowel_size: CorpusKind::Vowels.default_size(),
            duration_mode: DurationMode::ZScore,
        }
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Generates the synthetic corpora, trains all four networks and writes a
/// self-contained model directory with a config file. Returns the config
/// path and the per-stage metrics.
pub fn train_all(dir: &Path, opts: &TrainAllOptions) -> Result<(PathBuf, Vec<serde_json::Value>)> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut cfg = PipelineConfig::standard(dir, opts.seed);
    cfg.duration_mode = opts.duration_mode;
    write_text(&cfg.resolve(&cfg.phones), phonology::ENGLISH_PHONES)?;
    write_text(&cfg.resolve(&cfg.letters), phonology::ENGLISH_LETTERS)?;
    write_text(&cfg.resolve(&cfg.lexicon), lexicon::ENGLISH_LEXICON)?;
    write_text(&cfg.resolve(&cfg.tagged_corpus), lexicon::ENGLISH_TAGGED)?;
    let fs = FeatureSystem::load(&cfg.resolve(&cfg.phones), &cfg.resolve(&cfg.letters))?;
    let lex = Lexicon::load(&cfg.resolve(&cfg.lexicon), &fs)?;

    let corpora = dir.join("corpora");
    let seed = opts.seed;
    let flap = generate_corpus(CorpusKind::Flapping, &corpora, seed, opts.flapping_size)?;
    let durs = generate_corpus(CorpusKind::Durations, &corpora, seed, opts.duration_size)?;
    let vows = generate_corpus(CorpusKind::Vowels, &corpora, seed, opts.vowel_size)?;
    let stage_seed = |k: u64| seed.wrapping_mul(16).wrapping_add(k);
    let mut metrics = Vec::new();

    let mut g = G2pConfig::default();
    g.train.seed = stage_seed(1);
    let (g2p, m) = train_g2p(&lex, &fs, &g).map_err(|e| e.in_stage("g2p"))?;
    g2p.net.save(&cfg.resolve(&cfg.g2p))?;
    write_metrics(&cfg.resolve(&cfg.g2p), &m)?;
    metrics.push(m);

    let mut p = PostlexConfig::default();
    p.train.seed = stage_seed(2);
    let utts = corpus::read_corpus(&flap, &fs)?;
    let (postlex, m) = train_postlex(&utts, &fs, &p).map_err(|e| e.in_stage("postlex"))?;
    postlex.net.save(&cfg.resolve(&cfg.postlex))?;
    write_metrics(&cfg.resolve(&cfg.postlex), &m)?;
    metrics.push(m);

    let mut d = DurationConfig {
        mode: opts.duration_mode,
        ..DurationConfig::default()
    };
    d.train.seed = stage_seed(3);
    let utts = corpus::read_corpus(&durs, &fs)?;
    let (duration, m) = train_duration(&utts, &fs, &d).map_err(|e| e.in_stage("duration"))?;
    duration.net.save(&cfg.resolve(&cfg.duration))?;
    duration.stats.save(&cfg.resolve(&cfg.duration_stats))?;
    write_metrics(&cfg.resolve(&cfg.duration), &m)?;
    metrics.push(m);

    let mut a = AcousticConfig::default();
    a.train.seed = stage_seed(4);
    let utts = corpus::read_corpus(&vows, &fs)?;
    let (acoustic, m) =
        train_acoustic(&utts, &corpora, &fs, &cfg.vocoder, &a).map_err(|e| e.in_stage("acoustic"))?;
    acoustic.net.save(&cfg.resolve(&cfg.acoustic))?;
    write_metrics(&cfg.resolve(&cfg.acoustic), &m)?;
    metrics.push(m);

    let path = dir.join(CONFIG_FILE);
    cfg.save(&path)?;
    Ok((path, metrics))
}

// ---------------------------------------------------------------------------
// Benchmark

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub sentences: usize,
    pub audio_seconds: f64,
    pub synthesis_seconds: f64,
    /// Synthesis time over audio time; 0 when nothing was synthesized.
    pub real_time_factor: f64,
}

/// Synthesizes each non-empty line and times the whole text-to-audio path.
pub fn bench(pipeline: &Pipeline, text: &str) -> Result<BenchReport> {
    let mut audio_s = 0.0;
    let mut synth_s = 0.0;
    let mut n = 0;
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let t = Instant::now();
        let (audio, _) = pipeline.say(line)?;
        synth_s += t.elapsed().as_secs_f64();
        audio_s += audio.duration_ms() / 1000.0;
        n += 1;
    }
    Ok(BenchReport {
        sentences: n,
        audio_seconds: audio_s,
        synthesis_seconds: synth_s,
        real_time_factor: if audio_s > 0.0 { synth_s / audio_s } else { 0.0 },
    })
}

/// `n` sentences of the shipped tagged corpus, rendered as plain text.
pub fn sample_sentences(n: usize) -> Vec<String> {
    lexicon::english_tagged_corpus()
        .iter()
        .take(n)
        .map(|s| {
            let mut out = String::new();
            for (tok, _) in s {
                if !out.is_empty() && !is_punctuation(tok) {
                    out.push(' ');
                }
                out.push_str(tok);
            }
            out
        })
        .collect()
}
