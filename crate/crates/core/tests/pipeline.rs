mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use neurotts::corpus::{identity_rate, read_corpus};
use neurotts::lingnets::{G2pAlphabet, G2pEncoder, G2pModel};
use neurotts::nn::{Activation, NetSpec, OutputActivation};
use neurotts::phonology::FeatureSystem;
use neurotts::pipeline::{
    bench, generate_corpus, train_all, CorpusKind, Pipeline, PipelineConfig, PronSource, TrainAllOptions,
};
use neurotts::vocoder::{write_wav, AudioBuffer, HOP};

/// A small model directory trained once for the whole file.
fn model() -> &'static Path {
    static DIR: OnceLock<(tempfile::TempDir, PathBuf)> = OnceLock::new();
    let (_, cfg) = DIR.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let opts = TrainAllOptions {
            seed: 3,
            flapping_size: 150,
            duration_size: 150,
            vowel_size: 12,
            ..TrainAllOptions::default()
        };
        let (cfg, _) = train_all(dir.path(), &opts).unwrap();
        (dir, cfg)
    });
    cfg
}

fn neurotts(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_neurotts")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn config_text_round_trip() {
    let dir = Path::new("/models/x");
    let mut cfg = PipelineConfig::standard(dir, 42);
    cfg.vocoder.noise_seed = 9;
    let back = PipelineConfig::parse(&cfg.to_text(), &dir.join("neurotts.conf")).unwrap();
    assert_eq!(back, cfg);
    assert_eq!(back.resolve(&back.g2p), dir.join("g2p.nnw"));
}

#[test]
fn config_errors_name_the_line() {
    let path = Path::new("m/neurotts.conf");
    let good = PipelineConfig::standard(Path::new("m"), 1).to_text();
    let err = |text: &str| PipelineConfig::parse(text, path).unwrap_err();

    let e = err(&format!("{good}no equals sign\n"));
    let n = good.lines().count() + 1;
    assert!(e.to_string().contains(&format!(":{n}:")), "{e}");
    assert!(!e.is_model_error());

    let e = err(&format!("{good}seed = 4\n"));
    assert!(e.to_string().contains("duplicate"), "{e}");
    let e = err(&format!("{good}colour = blue\n"));
    assert!(e.to_string().contains("unknown key"), "{e}");
    let e = err(&good.replace("seed = 1", "seed = many"));
    assert!(e.to_string().contains("bad value"), "{e}");
    let e = err(&good.replace("duration_mode = zscore", "duration_mode = cubic"));
    assert!(e.to_string().contains(":11:"), "{e}");
    let e = err(&good.replace("g2p = g2p.nnw\n", ""));
    assert!(e.to_string().contains("missing key"), "{e}");
    assert!(err(&good.replace("version = 1", "version = 2")).is_model_error());
}

#[test]
fn generators_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    for kind in [CorpusKind::Flapping, CorpusKind::Durations, CorpusKind::Vowels] {
        let pa = generate_corpus(kind, a.path(), 5, 40).unwrap();
        let pb = generate_corpus(kind, b.path(), 5, 40).unwrap();
        let pc = generate_corpus(kind, c.path(), 6, 40).unwrap();
        let text = std::fs::read(&pa).unwrap();
        assert_eq!(text, std::fs::read(&pb).unwrap(), "{kind:?}");
        assert_ne!(text, std::fs::read(&pc).unwrap(), "{kind:?}");
    }
    let fs = FeatureSystem::english();
    let utts = read_corpus(&a.path().join("vowels.txt"), &fs).unwrap();
    for u in &utts {
        let wav = u.wav.as_ref().unwrap();
        assert_eq!(std::fs::read(a.path().join(wav)).unwrap(), std::fs::read(b.path().join(wav)).unwrap());
    }
}

#[test]
fn generated_corpora_have_their_properties() {
    let dir = tempfile::tempdir().unwrap();
    let fs = FeatureSystem::english();
    let durs = read_corpus(&generate_corpus(CorpusKind::Durations, dir.path(), 2, 300).unwrap(), &fs).unwrap();
    assert_eq!(durs.len(), 300);
    for u in &durs {
        let d = u.durations.as_ref().unwrap();
        assert_eq!(d.len(), u.rep.phone_count());
        assert!(d.iter().all(|&v| v >= 20.0), "{}: {d:?}", u.id);
    }
    let flap = read_corpus(
        &generate_corpus(CorpusKind::Flapping, dir.path(), 2, CorpusKind::Flapping.default_size()).unwrap(),
        &fs,
    )
    .unwrap();
    let rate = identity_rate(&flap, &fs);
    assert!((rate - 0.70).abs() < 0.03, "{rate}");
}

#[test]
fn trace_is_internally_consistent() {
    let p = Pipeline::load_file(model()).unwrap();
    let text = "The cat sat on the mat. They live here, near 12 zorblat trees!";
    let (audio, t) = p.say(text).unwrap();
    assert_eq!(t.samples, audio.samples.len());
    assert_eq!(t.samples, t.frame_count * HOP);
    assert!((t.audio_ms - 10.0 * t.frame_count as f64).abs() < 1e-9);
    let total: f64 = t.durations_ms.iter().sum();
    assert!((t.total_duration_ms - total).abs() < 1e-9);
    assert_eq!(t.frame_count, (total / 10.0).round() as usize);
    assert_eq!(t.durations_ms.len(), t.postlexical_phone_count);

    let mut deletions = 0;
    for w in &t.words {
        let lex = w.lexical_phones.split_whitespace().count();
        let post = w.postlexical_phones.split_whitespace().count();
        assert!(post <= lex && post > 0, "{w:?}");
        deletions += lex - post;
    }
    assert_eq!(t.postlexical_phone_count, t.lexical_phone_count - deletions);
    assert_eq!(t.tokens.len(), 2);

    let word = |o: &str| t.words.iter().find(|w| w.orthography == o).unwrap();
    assert_eq!(word("zorblat").source, PronSource::G2p);
    assert_eq!(word("cat").source, PronSource::Lexicon);
    assert_eq!(word("twelve").source, PronSource::Lexicon);
    assert_eq!(word("live").lexical_phones, "l ih v");
}

#[test]
fn stage_errors_carry_the_stage_name() {
    let mut p = Pipeline::load_file(model()).unwrap();
    // a letter-to-sound net that always answers ε
    let fs = FeatureSystem::english();
    let alphabet = G2pAlphabet::new(&fs);
    let width = G2pEncoder::new(&fs).unwrap().input_width();
    let mut net =
        NetSpec::new(&[width, 2, alphabet.len()], Activation::Tanh, OutputActivation::Softmax).build(1, 0.0).unwrap();
    net.layers[1].bias[alphabet.epsilon()] = 5.0;
    p.g2p = G2pModel::from_network(net, &fs).unwrap();
    let e = p.say("the zorblat").unwrap_err();
    assert!(e.to_string().starts_with("g2p: "), "{e}");
    assert!(p.say("the cat").is_ok());
    let e = p.say("...").unwrap_err();
    assert!(e.to_string().starts_with("lexicon: "), "{e}");
}

#[test]
fn bench_on_empty_text_is_a_no_op() {
    let p = Pipeline::load_file(model()).unwrap();
    let r = bench(&p, "\n  \n").unwrap();
    assert_eq!(r.sentences, 0);
    assert_eq!(r.audio_seconds, 0.0);
    assert_eq!(r.real_time_factor, 0.0);
    let r = bench(&p, "The cat sat.\nA dog ran.").unwrap();
    assert_eq!(r.sentences, 2);
    assert!(r.audio_seconds > 0.0);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&neurotts(&["--help"])), 0);
    assert_eq!(code(&neurotts(&["frobnicate"])), 1);
    assert_eq!(code(&neurotts(&["say", "hello"])), 1);

    let dir = tempfile::tempdir().unwrap();
    let wav = dir.path().join("o.wav");
    let wav = wav.to_str().unwrap();
    let missing = dir.path().join("nope.conf");
    assert_eq!(code(&neurotts(&["say", "hi", "--config", missing.to_str().unwrap(), "--out", wav])), 2);

    // same model, wrong config version
    let conf = std::fs::read_to_string(model()).unwrap();
    let bad = model().with_file_name("v9.conf");
    std::fs::write(&bad, conf.replace("version = 1", "version = 9")).unwrap();
    assert_eq!(code(&neurotts(&["say", "hi", "--config", bad.to_str().unwrap(), "--out", wav])), 3);

    // truncated weights
    let copy = tempfile::tempdir().unwrap();
    for e in std::fs::read_dir(model().parent().unwrap()).unwrap() {
        let e = e.unwrap();
        if e.file_type().unwrap().is_file() {
            std::fs::copy(e.path(), copy.path().join(e.file_name())).unwrap();
        }
    }
    let g2p = copy.path().join("g2p.nnw");
    let bytes = std::fs::read(&g2p).unwrap();
    std::fs::write(&g2p, &bytes[..bytes.len() / 2]).unwrap();
    let conf = copy.path().join("neurotts.conf");
    assert_eq!(code(&neurotts(&["say", "hi", "--config", conf.to_str().unwrap(), "--out", wav])), 3);

    let ok = neurotts(&["align-test", "--pairs", "50", "--seed", "4"]);
    assert_eq!(code(&ok), 0);
    assert!(String::from_utf8_lossy(&ok.stdout).contains("50 pairs, 0 mismatches"));
}

#[test]
fn say_writes_a_wav_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let wav = dir.path().join("o.wav");
    let out = neurotts(&[
        "say",
        "They live here.",
        "--config",
        model().to_str().unwrap(),
        "--out",
        wav.to_str().unwrap(),
        "--trace",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let trace: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let audio = neurotts::vocoder::read_wav(&wav).unwrap();
    assert_eq!(trace["samples"].as_u64().unwrap() as usize, audio.samples.len());
    assert_eq!(trace["words"][1]["orthography"], "live");
    assert_eq!(trace["words"][1]["lexical_phones"], "l ih v");
}

#[test]
fn analyze_then_copy_frames_keeps_the_length() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("in.wav");
    let x = common::vowel(120.0, &[(700.0, 90.0), (1200.0, 110.0)], 0.73, 0.5);
    write_wav(&AudioBuffer::new(x), &src).unwrap();
    let frames = dir.path().join("in.frames");
    let out = neurotts(&["analyze", src.to_str().unwrap(), "--out", frames.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let n = neurotts::vocoder::read_frames(&frames).unwrap().len();
    assert_eq!(n, 73);
    let dump = std::fs::read_to_string(&frames).unwrap();
    let row = dump.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(row.split_whitespace().count(), 14);

    let wav = dir.path().join("copy.wav");
    let out = neurotts(&[
        "say",
        "",
        "--config",
        model().to_str().unwrap(),
        "--copy-frames",
        frames.to_str().unwrap(),
        "--out",
        wav.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(neurotts::vocoder::read_wav(&wav).unwrap().samples.len(), n * HOP);

    let synth = dir.path().join("synth.wav");
    let out = neurotts(&["synth", frames.to_str().unwrap(), "--out", synth.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(std::fs::read(&synth).unwrap(), std::fs::read(&wav).unwrap());

    // garbage frame dump is a data error
    std::fs::write(&frames, "1 2 3\n").unwrap();
    assert_eq!(code(&neurotts(&["synth", frames.to_str().unwrap(), "--out", synth.to_str().unwrap()])), 2);
}

#[test]
fn cli_training_and_generation_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let lex: String = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/data/lexicon.tsv"))
        .unwrap()
        .lines()
        .take(60)
        .map(|l| format!("{l}\n"))
        .collect();
    let lex_path = d.join("small.tsv");
    std::fs::write(&lex_path, lex).unwrap();
    let mut weights = Vec::new();
    for name in ["a.nnw", "b.nnw"] {
        let out = d.join(name);
        let r = neurotts(&[
            "train",
            "--stage",
            "g2p",
            "--corpus",
            lex_path.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--seed",
            "5",
        ]);
        assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
        weights.push(std::fs::read(&out).unwrap());
        assert!(d.join(format!("{name}.metrics.json")).is_file());
    }
    assert_eq!(weights[0], weights[1]);

    let mut texts = Vec::new();
    for sub in ["x", "y"] {
        let out = d.join(sub);
        let r = neurotts(&["gen-corpus", "--kind", "durations", "--seed", "8", "--size", "30", "--out", out.to_str().unwrap()]);
        assert_eq!(code(&r), 0);
        texts.push(std::fs::read(out.join("durations.txt")).unwrap());
    }
    assert_eq!(texts[0], texts[1]);

    let r = neurotts(&["train", "--stage", "duration", "--out", d.join("d.nnw").to_str().unwrap()]);
    assert_eq!(code(&r), 2, "missing --corpus");
}
