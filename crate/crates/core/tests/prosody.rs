mod common;

use neurotts::corpus::{duration_corpus, make_word, Utterance};
use neurotts::lexicon::Lexicon;
use neurotts::phonology::{parse_pronunciation, BoundaryMarks, FeatureSystem, Level, LinguisticRep};
use neurotts::pipeline::split_holdout;
use neurotts::prosody::{
    from_log, from_zscore, phone_stats, rule_conditions, to_log, to_zscore, DurationConfig, DurationEncoder,
    DurationMode, DurationModel, DurationStats, RULE_BITS,
};
use proptest::prelude::*;

fn fixture(fs: &FeatureSystem) -> LinguisticRep {
    let p = |s: &str| parse_pronunciation(s, fs).unwrap();
    LinguisticRep {
        words: vec![
            make_word("the", "DT", p("dh-ah0"), BoundaryMarks::NONE),
            make_word("cat", "NN", p("k-ae1-t"), BoundaryMarks::closing(Level::Phrase)),
            make_word("ran", "VBD", p("r-ae1-n"), BoundaryMarks::closing(Level::Clause)),
            make_word("away", "RB", p("ah0.w-ey1"), BoundaryMarks::closing(Level::Sentence)),
        ],
    }
}

// Mean absolute error recomputed from raw predictions.
fn mae(model: &DurationModel, utts: &[Utterance]) -> f64 {
    let mut total = 0.0;
    let mut n = 0;
    for u in utts {
        let pred = model.predict(&u.rep).unwrap();
        for (a, b) in pred.iter().zip(u.durations.as_ref().unwrap()) {
            total += (a - b).abs();
            n += 1;
        }
    }
    total / n as f64
}

fn baseline(stats: &DurationStats, utts: &[Utterance]) -> f64 {
    let mut total = 0.0;
    let mut n = 0;
    for u in utts {
        for (p, d) in u.rep.phone_symbols().iter().zip(u.durations.as_ref().unwrap()) {
            let s = &stats.phones[*p];
            total += (s.mean - d).abs();
            n += 1;
        }
    }
    total / n as f64
}

#[test]
fn rule_bits_on_hand_built_sentence() {
    let fs = FeatureSystem::english();
    let rep = fixture(&fs);
    let slots = rep.phone_slots();
    let bits = |i: usize| rule_conditions(&rep, &slots[i]);
    // order: phrase-final, clause-final, unstressed, function, nucleus,
    // pre-pausal, polysyllabic, accented
    assert_eq!(bits(0), [false, false, true, true, false, false, false, false]); // dh
    assert_eq!(bits(3), [true, false, false, false, true, false, false, true]); // ae of cat
    assert_eq!(bits(6), [true, true, false, false, true, false, false, true]); // ae of ran
    assert_eq!(bits(8), [false, false, true, false, true, false, true, false]); // ah of away
    assert_eq!(bits(10), [true, true, false, false, true, true, true, true]); // ey of away
}

#[test]
fn encoder_tail_holds_rule_bits_and_mean() {
    let fs = FeatureSystem::english();
    let rep = fixture(&fs);
    let syms = rep.phone_symbols();
    let stats = phone_stats(syms.iter().enumerate().map(|(i, p)| (*p, 50.0 + 10.0 * i as f64))).unwrap();
    let enc = DurationEncoder::new(&fs);
    let rows = enc.encode(&rep, &stats);
    assert_eq!(rows.len(), rep.phone_count());
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row.len(), enc.input_width());
        let w = row.len();
        let want = rule_conditions(&rep, &rep.phone_slots()[i]);
        for b in 0..RULE_BITS {
            assert_eq!(row[w - 1 - RULE_BITS + b], f64::from(u8::from(want[b])));
        }
        assert!((row[w - 1] - stats.get(syms[i]).mean.ln() / 6.0).abs() < 1e-12);
        assert_eq!(&enc.encode_phone(&rep, i, &stats).unwrap(), row);
    }
    assert!(enc.encode_phone(&rep, rows.len(), &stats).is_err());
}

// "the cat." by hand: window of 5 slots (code, stress one-hot, content,
// word-initial, word-final), then position re nucleus, phrase distances,
// nearest accent, rule bits, ln(mean)/6.
#[test]
fn full_vector_for_two_word_sentence() {
    let fs = FeatureSystem::english();
    let p = |s: &str| parse_pronunciation(s, &fs).unwrap();
    let rep = LinguisticRep {
        words: vec![
            make_word("the", "DT", p("dh-ah0"), BoundaryMarks::NONE),
            make_word("cat", "NN", p("k-ae1-t"), BoundaryMarks::closing(Level::Sentence)),
        ],
    };
    let stats = phone_stats([("dh", 40.0), ("ah", 50.0), ("k", 60.0), ("ae", 120.0), ("t", 70.0)]).unwrap();
    let slot = |sym: Option<&str>, stress: usize, content: f64, first: f64, last: f64| {
        let mut v = common::phone_code(&fs, sym);
        if sym.is_some() {
            let mut st = [0.0; 3];
            st[stress] = 1.0;
            v.extend(st);
            v.extend([content, first, last]);
        } else {
            v.extend([0.0; 6]);
        }
        v
    };
    let dh = slot(Some("dh"), 0, 0.0, 1.0, 0.0);
    let ah = slot(Some("ah"), 0, 0.0, 0.0, 1.0);
    let k = slot(Some("k"), 1, 1.0, 1.0, 0.0);
    let ae = slot(Some("ae"), 1, 1.0, 0.0, 0.0);
    let t = slot(Some("t"), 1, 1.0, 0.0, 1.0);
    let pad = slot(None, 0, 0.0, 0.0, 0.0);

    let mut want_dh: Vec<f64> = [&pad, &pad, &dh, &ah, &k].into_iter().flatten().copied().collect();
    want_dh.extend([-0.25, 1.0, 0.5, 0.25, 0.0]);
    want_dh.extend([0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
    want_dh.push(40f64.ln() / 6.0);

    let mut want_ae: Vec<f64> = [&ah, &k, &ae, &t, &pad].into_iter().flatten().copied().collect();
    want_ae.extend([0.0, 0.5, 1.0, 0.0, 0.0]);
    want_ae.extend([1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0]);
    want_ae.push(120f64.ln() / 6.0);

    let rows = DurationEncoder::new(&fs).encode(&rep, &stats);
    for (got, want) in [(&rows[0], &want_dh), (&rows[3], &want_ae)] {
        assert_eq!(got.len(), want.len());
        for (i, (a, b)) in got.iter().zip(want.iter()).enumerate() {
            assert!((a - b).abs() < 1e-12, "position {i}: {a} vs {b}");
        }
    }
}

#[test]
fn stats_match_hand_computation() {
    let s = phone_stats([("aa", 100.0), ("aa", 120.0), ("aa", 140.0), ("t", 40.0)]).unwrap();
    assert_eq!(s.phones["aa"].mean, 120.0);
    assert!((s.phones["aa"].std - 20.0).abs() < 1e-12);
    // single token: borrows the global deviation
    let all = [100.0, 120.0, 140.0, 40.0];
    let gm = all.iter().sum::<f64>() / 4.0;
    let gs = (all.iter().map(|x| (x - gm).powi(2)).sum::<f64>() / 3.0).sqrt();
    assert!((s.phones["t"].std - gs).abs() < 1e-12);
    assert!(phone_stats([("aa", 0.0)]).is_err());
    let two = phone_stats([("aa", 80.0), ("aa", 120.0)]).unwrap();
    assert_eq!(two.phones["aa"].mean, 100.0);
    assert!((two.phones["aa"].std - 28.28).abs() < 0.01);
    let back = DurationStats::parse(&s.to_text(), "x").unwrap();
    assert_eq!(back, s);
}

proptest! {
    #[test]
    fn transforms_invert(ms in 20.0f64..400.0, mean in 30.0f64..200.0, std in 1.0f64..60.0) {
        let stats = DurationStats {
            phones: [("aa".to_string(), neurotts::prosody::PhoneStat { mean, std, count: 10 })].into(),
            global: neurotts::prosody::PhoneStat { mean, std, count: 10 },
        };
        prop_assert!((from_log(to_log(ms).unwrap()) - ms).abs() < 1e-9);
        prop_assert!((from_zscore(to_zscore(ms, "aa", &stats), "aa", &stats) - ms).abs() < 1e-9);
    }
}

#[test]
fn constant_durations_are_learned() {
    let fs = FeatureSystem::english();
    let lex = Lexicon::english(&fs);
    let mut utts = duration_corpus(&lex, &fs, 120, 8).unwrap();
    for u in &mut utts {
        u.durations = Some(vec![80.0; u.rep.phone_count()]);
    }
    for mode in [DurationMode::Log, DurationMode::ZScore] {
        let cfg = DurationConfig { mode, ..DurationConfig::default() };
        let (model, _) = DurationModel::train(&utts, &fs, &cfg).unwrap();
        for u in &utts {
            for d in model.predict(&u.rep).unwrap() {
                assert!((d - 80.0).abs() < 1.0, "{mode:?}: {d}");
            }
        }
    }
}

#[test]
fn klatt_durations_are_learned_in_both_modes() {
    let fs = FeatureSystem::english();
    let lex = Lexicon::english(&fs);
    let utts = duration_corpus(&lex, &fs, 900, 21).unwrap();
    let (train, held) = split_holdout(&utts);
    for mode in [DurationMode::Log, DurationMode::ZScore] {
        let cfg = DurationConfig { mode, ..DurationConfig::default() };
        let (model, _) = DurationModel::train(train, &fs, &cfg).unwrap();
        let err = mae(&model, held);
        let base = baseline(&model.stats, held);
        eprintln!("{}: held-out MAE {err:.2} ms, phone-mean baseline {base:.2} ms", mode.name());
        assert!(err < 10.0);
        assert!(err < base);
    }
}
