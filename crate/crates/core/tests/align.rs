use neurotts::align::{align, brute_force_align, path_cost, FnCost, Op};
use neurotts::phonology::FeatureSystem;
use proptest::prelude::*;

// Plain recursive minimum, kept separate from the library's search.
fn oracle(a: &[u8], b: &[u8], sub: &[[f64; 4]; 4], ins: f64, del: f64) -> f64 {
    match (a.split_first(), b.split_first()) {
        (None, None) => 0.0,
        (Some(_), None) => del * a.len() as f64,
        (None, Some(_)) => ins * b.len() as f64,
        (Some((x, ra)), Some((y, rb))) => {
            let s = sub[*x as usize][*y as usize] + oracle(ra, rb, sub, ins, del);
            let d = del + oracle(ra, b, sub, ins, del);
            let i = ins + oracle(a, rb, sub, ins, del);
            s.min(d).min(i)
        }
    }
}

fn quarter() -> impl Strategy<Value = f64> {
    (0u8..12).prop_map(|q| q as f64 / 4.0)
}

fn case() -> impl Strategy<Value = (Vec<u8>, Vec<u8>, [[f64; 4]; 4], f64, f64)> {
    (
        prop::collection::vec(0u8..4, 0..=6),
        prop::collection::vec(0u8..4, 0..=6),
        prop::array::uniform4(prop::array::uniform4(quarter())),
        quarter(),
        quarter(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn dp_cost_equals_exhaustive_minimum((a, b, sub, ins, del) in case()) {
        let cm = FnCost { sub: |x: &u8, y: &u8| sub[*x as usize][*y as usize], ins, del };
        let dp = align(&a, &b, &cm);
        prop_assert_eq!(dp.total_cost, oracle(&a, &b, &sub, ins, del));
        prop_assert_eq!(dp.total_cost, brute_force_align(&a, &b, &cm).unwrap().total_cost);
    }

    #[test]
    fn alignment_path_is_consistent((a, b, sub, ins, del) in case()) {
        let cm = FnCost { sub: |x: &u8, y: &u8| sub[*x as usize][*y as usize], ins, del };
        let al = align(&a, &b, &cm);
        prop_assert_eq!(al.first(), a.clone());
        prop_assert_eq!(al.second(), b.clone());
        let borrowed: Vec<(Option<&u8>, Option<&u8>)> =
            al.pairs.iter().map(|(x, y)| (x.as_ref(), y.as_ref())).collect();
        prop_assert_eq!(path_cost(&borrowed, &cm), al.total_cost);
        prop_assert!(al.pairs.iter().all(|p| p.0.is_some() || p.1.is_some()));
    }
}

#[test]
fn identical_sequences_align_diagonally_at_zero_cost() {
    let cm = FnCost { sub: |x: &char, y: &char| if x == y { 0.0 } else { 1.0 }, ins: 1.0, del: 1.0 };
    let s: Vec<char> = "phone".chars().collect();
    let al = align(&s, &s, &cm);
    assert_eq!(al.total_cost, 0.0);
    assert!(al.ops().iter().all(|&o| o == Op::Sub));
}

#[test]
fn levenshtein_distance_of_known_pair() {
    // kitten -> sitting is the textbook distance of 3
    let cm = FnCost { sub: |x: &char, y: &char| if x == y { 0.0 } else { 1.0 }, ins: 1.0, del: 1.0 };
    let a: Vec<char> = "kitten".chars().collect();
    let b: Vec<char> = "sitting".chars().collect();
    assert_eq!(align(&a, &b, &cm).total_cost, 3.0);
}

#[test]
fn brute_force_refuses_long_inputs() {
    let cm = FnCost { sub: |_: &u8, _: &u8| 0.0, ins: 1.0, del: 1.0 };
    assert!(brute_force_align(&[0u8; 7], &[0u8; 2], &cm).is_err());
}

#[test]
fn letter_phone_costs_favor_plausible_pairs() {
    use neurotts::align::{letter_phone_cost, CostModel};
    let fs = FeatureSystem::english();
    let cm = letter_phone_cost(&fs);
    let letters: Vec<char> = "cat".chars().collect();
    let phones: Vec<String> = ["k", "ae", "t"].iter().map(|s| s.to_string()).collect();
    let al = align(&letters, &phones, &cm);
    assert_eq!(al.ops(), vec![Op::Sub, Op::Sub, Op::Sub]);
    assert!(cm.substitution(&'t', &"t".to_string()) < cm.substitution(&'t', &"iy".to_string()));
}

#[test]
fn two_hundred_pairs_run_quickly() {
    let t = std::time::Instant::now();
    let r = neurotts::align::self_check(200, 11);
    assert_eq!(r.mismatches, 0);
    assert!(t.elapsed().as_secs_f64() < 5.0);
}
