use neurotts::lexicon::{english_tagged_corpus, train_tagger, Lexicon, TagModel};
use neurotts::phonology::FeatureSystem;
use proptest::prelude::*;
use std::sync::OnceLock;

fn tagger() -> &'static (TagModel, Vec<String>) {
    static T: OnceLock<(TagModel, Vec<String>)> = OnceLock::new();
    T.get_or_init(|| {
        let fs = FeatureSystem::english();
        let corpus = english_tagged_corpus();
        let model = train_tagger(&corpus).unwrap().with_lexicon(&Lexicon::english(&fs)).unwrap();
        let mut vocab: Vec<String> = corpus.iter().flatten().map(|(t, _)| t.clone()).collect();
        vocab.sort();
        vocab.dedup();
        vocab.push("zorblat".to_string());
        (model, vocab)
    })
}

// Every tag sequence, scored with the model's own sequence score.
fn exhaustive_best(model: &TagModel, tokens: &[String]) -> f64 {
    let n = model.tags().len();
    let mut best = f64::NEG_INFINITY;
    let mut tags = vec![0usize; tokens.len()];
    loop {
        best = best.max(model.sequence_score(tokens, &tags));
        let mut k = 0;
        loop {
            if k == tags.len() {
                return best;
            }
            tags[k] += 1;
            if tags[k] < n {
                break;
            }
            tags[k] = 0;
            k += 1;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn viterbi_matches_exhaustive_search(picks in prop::collection::vec(any::<prop::sample::Index>(), 1..=3)) {
        let (model, vocab) = tagger();
        let tokens: Vec<String> = picks.iter().map(|i| vocab[i.index(vocab.len())].clone()).collect();
        let decoded = model.decode(&tokens);
        let got = model.sequence_score(&tokens, &decoded);
        let want = exhaustive_best(model, &tokens);
        prop_assert!(want.is_finite());
        prop_assert!((got - want).abs() < 1e-9, "{got} vs {want} for {tokens:?}");
    }
}

#[test]
fn transition_rows_are_distributions() {
    let (model, _) = tagger();
    for prev in model.tags() {
        let total: f64 = model.tags().iter().map(|t| model.transition(prev, t)).sum::<f64>() + model.end_probability(prev);
        assert!((total - 1.0).abs() < 1e-9, "{prev}: {total}");
    }
}

#[test]
fn live_is_tagged_by_context() {
    let (model, _) = tagger();
    let toks = |s: &str| s.split_whitespace().map(String::from).collect::<Vec<_>>();
    let a = model.pos_tag(&toks("they live here ."));
    let b = model.pos_tag(&toks("a live wire ."));
    assert!(a[1].starts_with("VB"), "{a:?}");
    assert_eq!(b[1], "JJ", "{b:?}");
}

#[test]
fn homograph_lookup_follows_the_tag() {
    let fs = FeatureSystem::english();
    let lex = Lexicon::english(&fs);
    let verb = lex.lookup("live", "VBP").unwrap().phones();
    let adj = lex.lookup("live", "JJ").unwrap().phones();
    assert_eq!(verb, ["l", "ih", "v"]);
    assert_eq!(adj, ["l", "ay", "v"]);
    assert!(lex.lookup("zorblat", "NN").is_none());
}
