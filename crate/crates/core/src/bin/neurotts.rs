use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;

use neurotts::acoustic::AcousticConfig;
use neurotts::align;
use neurotts::corpus;
use neurotts::lexicon::Lexicon;
use neurotts::lingnets::{G2pConfig, PostlexConfig};
use neurotts::phonology::FeatureSystem;
use neurotts::pipeline::{self, CorpusKind, Pipeline, PipelineConfig, TrainAllOptions};
use neurotts::prosody::{DurationConfig, DurationMode};
use neurotts::vocoder::{self, VocoderConfig};
use neurotts::{Error, Result};

#[derive(Parser)]
#[command(name = "neurotts", version, about = "Neural-network text-to-speech")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Stage {
    G2p,
    Postlex,
    Duration,
    Acoustic,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Flapping,
    Durations,
    Vowels,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Log,
    Zscore,
}

impl From<Mode> for DurationMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Log => DurationMode::Log,
            Mode::Zscore => DurationMode::ZScore,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train one network, or everything from freshly generated corpora.
    Train {
        #[arg(long, value_enum)]
        stage: Stage,
        /// Lexicon (g2p) or labeled corpus (postlex, duration, acoustic).
        /// Not used with `--stage all`.
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Weight file, or the model directory for `--stage all`.
        #[arg(long)]
        out: PathBuf,
        /// Take phone and letter tables from this pipeline config.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value = "zscore")]
        mode: Mode,
    },
    /// Synthesize text to a WAV file.
    Say {
        text: String,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Print the per-stage trace as JSON.
        #[arg(long)]
        trace: bool,
        /// Synthesize this frame dump instead of running the networks.
        #[arg(long)]
        copy_frames: Option<PathBuf>,
    },
    /// Analyze a WAV file into a frame dump.
    Analyze {
        wav: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Synthesize a frame dump to a WAV file.
    Synth {
        frames: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a synthetic corpus.
    GenCorpus {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        size: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Report the real-time factor over a text file, one utterance per line.
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to 100 sentences of the shipped corpus.
        #[arg(long)]
        text: Option<PathBuf>,
    },
    /// Compare DP alignment with brute force on random pairs.
    AlignTest {
        #[arg(long, default_value_t = 200)]
        pairs: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn feature_system(config: Option<&Path>) -> Result<FeatureSystem> {
    match config {
        Some(p) => {
            let cfg = PipelineConfig::load(p)?;
            FeatureSystem::load(&cfg.resolve(&cfg.phones), &cfg.resolve(&cfg.letters))
        }
        None => Ok(FeatureSystem::english()),
    }
}

fn print_json(v: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn need_corpus(corpus: Option<PathBuf>) -> Result<PathBuf> {
    corpus.ok_or_else(|| Error::InvalidInput("--corpus is required for this stage".into()))
}

fn train(stage: Stage, corpus_path: Option<PathBuf>, out: &Path, config: Option<&Path>, seed: u64, mode: Mode) -> Result<()> {
    let stage_seed = |k: u64| seed.wrapping_mul(16).wrapping_add(k);
    let (weights, metrics) = match stage {
        Stage::All => {
            let opts = TrainAllOptions {
                seed,
                duration_mode: mode.into(),
                ..TrainAllOptions::default()
            };
            let (cfg, metrics) = pipeline::train_all(out, &opts)?;
            print_json(&metrics);
            println!("config written to {}", cfg.display());
            return Ok(());
        }
        Stage::G2p => {
            let fs = feature_system(config)?;
            let lex = Lexicon::load(&need_corpus(corpus_path)?, &fs)?;
            let mut cfg = G2pConfig::default();
            cfg.train.seed = stage_seed(1);
            let (m, metrics) = pipeline::train_g2p(&lex, &fs, &cfg)?;
            (m.net, metrics)
        }
        Stage::Postlex => {
            let fs = feature_system(config)?;
            let utts = corpus::read_corpus(&need_corpus(corpus_path)?, &fs)?;
            let mut cfg = PostlexConfig::default();
            cfg.train.seed = stage_seed(2);
            let (m, metrics) = pipeline::train_postlex(&utts, &fs, &cfg)?;
            (m.net, metrics)
        }
        Stage::Duration => {
            let fs = feature_system(config)?;
            let utts = corpus::read_corpus(&need_corpus(corpus_path)?, &fs)?;
            let mut cfg = DurationConfig {
                mode: mode.into(),
                ..DurationConfig::default()
            };
            cfg.train.seed = stage_seed(3);
            let (m, metrics) = pipeline::train_duration(&utts, &fs, &cfg)?;
            let mut stats = out.as_os_str().to_owned();
            stats.push(".stats");
            m.stats.save(Path::new(&stats))?;
            (m.net, metrics)
        }
        Stage::Acoustic => {
            let fs = feature_system(config)?;
            let path = need_corpus(corpus_path)?;
            let utts = corpus::read_corpus(&path, &fs)?;
            let base = path.parent().unwrap_or(Path::new("."));
            let mut cfg = AcousticConfig::default();
            cfg.train.seed = stage_seed(4);
            let (m, metrics) = pipeline::train_acoustic(&utts, base, &fs, &VocoderConfig::default(), &cfg)?;
            (m.net, metrics)
        }
    };
    weights.save(out)?;
    let mpath = pipeline::write_metrics(out, &metrics)?;
    print_json(&metrics);
    info!("weights {} metrics {}", out.display(), mpath.display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train {
            stage,
            corpus,
            out,
            config,
            seed,
            mode,
        } => train(stage, corpus, &out, config.as_deref(), seed, mode),
        Command::Say {
            text,
            config,
            out,
            trace,
            copy_frames,
        } => {
            let (audio, tr) = match copy_frames {
                Some(f) => {
                    let cfg = PipelineConfig::load(&config)?;
                    pipeline::say_frames(&vocoder::read_frames(&f)?, &cfg.vocoder)?
                }
                None => Pipeline::load_file(&config)?.say(&text)?,
            };
            vocoder::write_wav(&audio, &out)?;
            if trace {
                println!("{}", tr.to_json());
            }
            Ok(())
        }
        Command::Analyze { wav, out } => {
            let audio = vocoder::read_wav(&wav)?;
            let frames = vocoder::analyze(&audio, &VocoderConfig::default())?;
            vocoder::write_frames(&frames, &out)?;
            println!("{} frames", frames.len());
            Ok(())
        }
        Command::Synth { frames, out } => {
            let frames = vocoder::read_frames(&frames)?;
            let audio = vocoder::synthesize(&frames, &VocoderConfig::default())?;
            vocoder::write_wav(&audio, &out)?;
            println!("{} samples", audio.samples.len());
            Ok(())
        }
        Command::GenCorpus { kind, seed, size, out } => {
            let kind = match kind {
                Kind::Flapping => CorpusKind::Flapping,
                Kind::Durations => CorpusKind::Durations,
                Kind::Vowels => CorpusKind::Vowels,
            };
            let path = pipeline::generate_corpus(kind, &out, seed, size.unwrap_or(kind.default_size()))?;
            println!("{}", path.display());
            Ok(())
        }
        Command::Bench { config, text } => {
            let p = Pipeline::load_file(&config)?;
            let text = match text {
                Some(t) => std::fs::read_to_string(&t).map_err(|e| Error::Io { path: t, source: e })?,
                None => pipeline::sample_sentences(100).join("\n"),
            };
            print_json(&pipeline::bench(&p, &text)?);
            Ok(())
        }
        Command::AlignTest { pairs, seed } => {
            let t = Instant::now();
            let r = align::self_check(pairs, seed);
            println!(
                "{} pairs, {} mismatches, max difference {}, {:.3} s",
                r.pairs,
                r.mismatches,
                r.max_difference,
                t.elapsed().as_secs_f64()
            );
            if r.mismatches > 0 {
                return Err(Error::InvalidInput("alignment disagrees with brute force".into()));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_model_error() { 3 } else { 2 })
        }
    }
}
