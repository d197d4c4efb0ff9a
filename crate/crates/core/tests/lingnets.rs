use neurotts::align::{brute_force_align, letter_phone_cost};
use neurotts::corpus::{flapping_corpus, identity_rate, postlex_rules, TARGET_IDENTITY};
use neurotts::lexicon::Lexicon;
use neurotts::lingnets::{build_g2p_dataset, spelling, G2pAlphabet, G2pConfig, PostlexConfig, PostlexModel};
use neurotts::nn::argmax;
use neurotts::phonology::FeatureSystem;
use neurotts::pipeline::{split_holdout, train_g2p, train_postlex};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn five_hundred_words(lex: &Lexicon) -> Lexicon {
    let mut words: Vec<&str> = lex.entries().map(|e| e.orthography.as_str()).collect();
    words.shuffle(&mut ChaCha8Rng::seed_from_u64(500));
    lex.subset(words.into_iter().take(500))
}

#[test]
fn letter_to_sound_fits_five_hundred_words() {
    let fs = FeatureSystem::english();
    let lex = five_hundred_words(&Lexicon::english(&fs));
    assert_eq!(lex.len(), 500);
    let (model, metrics) = train_g2p(&lex, &fs, &G2pConfig::default()).unwrap();

    // recount accuracy directly from the network outputs
    let (samples, _) = build_g2p_dataset(&lex, &fs, &letter_phone_cost(&fs)).unwrap();
    let right = samples
        .iter()
        .filter(|s| argmax(&model.net.forward(&s.input).unwrap()) == argmax(&s.target))
        .count();
    let acc = right as f64 / samples.len() as f64;
    eprintln!("g2p per-letter training accuracy {:.2}% over {} letters", 100.0 * acc, samples.len());
    assert!(acc >= 0.90);
    assert_eq!(metrics["train_accuracy"].as_f64().unwrap(), acc);

    for w in ["blorf", "kettering", "snape"] {
        let phones = model.predict(w).unwrap();
        assert!(!phones.is_empty());
        assert!(phones.iter().all(|p| fs.phone(p).is_some_and(|ph| ph.lexical)), "{w}: {phones:?}");
    }
}

#[test]
fn postlexical_net_beats_identity_on_flapping_corpus() {
    let fs = FeatureSystem::english();
    let lex = Lexicon::english(&fs);
    let corpus = flapping_corpus(&lex, &fs, 800, 6, TARGET_IDENTITY);
    assert!((corpus.identity_rate - 0.70).abs() < 0.02, "{}", corpus.identity_rate);

    // surface forms are exactly what the rules produce
    for u in &corpus.utterances {
        let surface: Vec<String> = u.surface.as_ref().unwrap().iter().flatten().cloned().collect();
        let rules: Vec<String> = postlex_rules(&u.rep, &fs).into_iter().filter(|p| p != "ε").collect();
        assert_eq!(surface, rules, "{}", u.id);
    }

    let (_, held) = split_holdout(&corpus.utterances);
    assert!((identity_rate(held, &fs) - 0.70).abs() < 0.05);

    let (model, metrics) = train_postlex(&corpus.utterances, &fs, &PostlexConfig::default()).unwrap();
    let acc = metrics["heldout_accuracy_percent"].as_f64().unwrap();
    let base = metrics["identity_baseline_percent"].as_f64().unwrap();
    eprintln!("postlex held-out accuracy {acc:.2}% vs identity {base:.2}%");
    assert!(acc >= 95.0);
    assert!(acc > base);

    let identity = PostlexModel::identity(&fs).unwrap();
    for u in held.iter().take(20) {
        let lexical: Vec<String> = u.rep.phone_symbols().iter().map(|s| s.to_string()).collect();
        assert_eq!(identity.classify(&u.rep), lexical);
        assert_eq!(model.classify(&u.rep).len(), lexical.len());
    }
}

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

// Classes from the exhaustive alignment: matched letters take their phone,
// skipped letters take ε, an inserted phone joins a neighbour it forms a
// composite with.
fn brute_force_classes(word: &str, phones: &[&str], fs: &FeatureSystem) -> Vec<usize> {
    let cm = letter_phone_cost(fs);
    let alphabet = G2pAlphabet::new(fs);
    let letters = spelling(word);
    let phones = strings(phones);
    let al = brute_force_align(&letters, &phones, &cm).unwrap();
    let mut slots: Vec<Vec<String>> = Vec::new();
    let mut pending: Vec<String> = Vec::new();
    for (l, p) in &al.pairs {
        match (l, p) {
            (Some(_), Some(p)) => {
                let mut s = std::mem::take(&mut pending);
                s.push(p.clone());
                slots.push(s);
            }
            (Some(_), None) => slots.push(std::mem::take(&mut pending)),
            (None, Some(p)) => match slots.last_mut() {
                Some(last) if last.len() == 1 && alphabet.class_of(&[last[0].clone(), p.clone()]).is_some() => {
                    last.push(p.clone())
                }
                _ => pending.push(p.clone()),
            },
            (None, None) => unreachable!(),
        }
    }
    assert!(pending.is_empty());
    slots.iter().map(|s| alphabet.class_of(s).unwrap_or_else(|| panic!("{word}: {:?}", al.pairs))).collect()
}

fn dataset_classes(word: &str, fs: &FeatureSystem) -> Vec<usize> {
    let lex = Lexicon::english(fs).subset([word]);
    let (samples, report) = build_g2p_dataset(&lex, fs, &letter_phone_cost(fs)).unwrap();
    assert_eq!(report.used, 1);
    samples.iter().map(|s| argmax(&s.target)).collect()
}

#[test]
fn dataset_classes_follow_the_exhaustive_alignment() {
    let fs = FeatureSystem::english();
    let alphabet = G2pAlphabet::new(&fs);
    let class = |p: &[&str]| alphabet.class_of(&strings(p)).unwrap();

    let cab = dataset_classes("cab", &fs);
    assert_eq!(cab, brute_force_classes("cab", &["k", "ae", "b"], &fs));
    assert_eq!(cab, [class(&["k"]), class(&["ae"]), class(&["b"])]);

    let box_ = dataset_classes("box", &fs);
    assert_eq!(box_, brute_force_classes("box", &["b", "aa", "k", "s"], &fs));
    assert_eq!(box_[2], class(&["k", "s"]));

    let make = dataset_classes("make", &fs);
    assert_eq!(make, brute_force_classes("make", &["m", "ey", "k"], &fs));
    assert_eq!(make[3], alphabet.epsilon());
}

#[test]
fn hundred_word_lexicon_is_memorized() {
    let fs = FeatureSystem::english();
    let full = Lexicon::english(&fs);
    let mut words: Vec<&str> = full.entries().map(|e| e.orthography.as_str()).filter(|w| *w != "a" && *w != "cab").collect();
    words.shuffle(&mut ChaCha8Rng::seed_from_u64(100));
    words.truncate(98);
    words.extend(["a", "cab"]);
    let lex = full.subset(words.iter().copied());
    assert_eq!(lex.len(), 100);
    let (model, metrics) = train_g2p(&lex, &fs, &G2pConfig::default()).unwrap();
    let acc = metrics["train_accuracy"].as_f64().unwrap();
    eprintln!("g2p 100-word training accuracy {:.2}%", 100.0 * acc);
    assert!(acc >= 0.99);

    assert_eq!(model.predict("cab").unwrap(), ["k", "ae", "b"]);
    let a = model.predict("a").unwrap();
    assert_eq!(a.len(), 1, "{a:?}");
    assert!(fs.is_vowel(&a[0]));
}
