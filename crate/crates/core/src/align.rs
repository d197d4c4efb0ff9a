//! Global minimum-cost alignment of two symbol sequences.

use crate::error::{Error, Result};
use crate::phonology::{FeatureSet, FeatureSystem, EPSILON};

/// Cost of indels in both shipped cost models.
pub const INDEL_COST: f64 = 0.9;

/// Longest sequence `brute_force_align` accepts.
pub const BRUTE_FORCE_MAX: usize = 6;

pub trait CostModel<A: ?Sized, B: ?Sized> {
    fn substitution(&self, a: &A, b: &B) -> f64;
    /// Cost of a `b` symbol paired with a gap.
    fn insertion(&self) -> f64;
    /// Cost of an `a` symbol paired with a gap.
    fn deletion(&self) -> f64;
}

/// Cost model backed by a closure.
pub struct FnCost<F> {
    pub sub: F,
    pub ins: f64,
    pub del: f64,
}

impl<A: ?Sized, B: ?Sized, F: Fn(&A, &B) -> f64> CostModel<A, B> for FnCost<F> {
    fn substitution(&self, a: &A, b: &B) -> f64 {
        (self.sub)(a, b)
    }
    fn insertion(&self) -> f64 {
        self.ins
    }
    fn deletion(&self) -> f64 {
        self.del
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Sub,
    Del,
    Ins,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Alignment<A, B> {
    /// `None` marks a gap. No pair is (gap, gap).
    pub pairs: Vec<(Option<A>, Option<B>)>,
    pub total_cost: f64,
}

impl<A: Clone, B: Clone> Alignment<A, B> {
    pub fn ops(&self) -> Vec<Op> {
        self.pairs
            .iter()
            .map(|p| match p {
                (Some(_), Some(_)) => Op::Sub,
                (Some(_), None) => Op::Del,
                (None, Some(_)) => Op::Ins,
                (None, None) => unreachable!("gap paired with gap"),
            })
            .collect()
    }

    pub fn first(&self) -> Vec<A> {
        self.pairs.iter().filter_map(|p| p.0.clone()).collect()
    }

    pub fn second(&self) -> Vec<B> {
        self.pairs.iter().filter_map(|p| p.1.clone()).collect()
    }
}

/// Sum of per-pair costs, accumulated left to right.
pub fn path_cost<A, B: ?Sized, C>(pairs: &[(Option<&A>, Option<&B>)], cm: &C) -> f64
where
    A: ?Sized,
    C: CostModel<A, B>,
{
    let mut total = 0.0;
    for p in pairs {
        total += match p {
            (Some(a), Some(b)) => cm.substitution(a, b),
            (Some(_), None) => cm.deletion(),
            (None, Some(_)) => cm.insertion(),
            (None, None) => 0.0,
        };
    }
    total
}

/// Dynamic-programming alignment. Ties in the backtrace prefer substitution,
/// then deletion, then insertion.
pub fn align<A: Clone, B: Clone, C: CostModel<A, B>>(a: &[A], b: &[B], cm: &C) -> Alignment<A, B> {
    let n = a.len();
    let m = b.len();
    let w = m + 1;
    let mut d = vec![0.0f64; (n + 1) * w];
    for j in 1..=m {
        d[j] = d[j - 1] + cm.insertion();
    }
    for i in 1..=n {
        d[i * w] = d[(i - 1) * w] + cm.deletion();
        for j in 1..=m {
            let sub = d[(i - 1) * w + j - 1] + cm.substitution(&a[i - 1], &b[j - 1]);
            let del = d[(i - 1) * w + j] + cm.deletion();
            let ins = d[i * w + j - 1] + cm.insertion();
            d[i * w + j] = sub.min(del).min(ins);
        }
    }

    let mut pairs = Vec::with_capacity(n + m);
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = d[i * w + j];
        if i > 0 && j > 0 && d[(i - 1) * w + j - 1] + cm.substitution(&a[i - 1], &b[j - 1]) == here {
            pairs.push((Some(a[i - 1].clone()), Some(b[j - 1].clone())));
            i -= 1;
            j -= 1;
        } else if i > 0 && d[(i - 1) * w + j] + cm.deletion() == here {
            pairs.push((Some(a[i - 1].clone()), None));
            i -= 1;
        } else {
            pairs.push((None, Some(b[j - 1].clone())));
            j -= 1;
        }
    }
    pairs.reverse();
    let out = Alignment {
        pairs,
        total_cost: d[n * w + m],
    };
    debug_assert_eq!(out.first().len(), n);
    debug_assert_eq!(out.second().len(), m);
    out
}

/// Exhaustive minimum over every gapped pairing. Test oracle for [`align`].
pub fn brute_force_align<A: Clone, B: Clone, C: CostModel<A, B>>(
    a: &[A],
    b: &[B],
    cm: &C,
) -> Result<Alignment<A, B>> {
    if a.len() > BRUTE_FORCE_MAX || b.len() > BRUTE_FORCE_MAX {
        return Err(Error::invalid(format!(
            "brute force alignment is limited to {BRUTE_FORCE_MAX} symbols per side"
        )));
    }

    struct Search<'x, A, B, C> {
        a: &'x [A],
        b: &'x [B],
        cm: &'x C,
        path: Vec<Op>,
        best: Option<(f64, Vec<Op>)>,
    }

    impl<A, B, C: CostModel<A, B>> Search<'_, A, B, C> {
        fn go(&mut self, i: usize, j: usize, cost: f64) {
            if i == self.a.len() && j == self.b.len() {
                if self.best.as_ref().is_none_or(|(c, _)| cost < *c) {
                    self.best = Some((cost, self.path.clone()));
                }
                return;
            }
            if i < self.a.len() && j < self.b.len() {
                self.path.push(Op::Sub);
                self.go(i + 1, j + 1, cost + self.cm.substitution(&self.a[i], &self.b[j]));
                self.path.pop();
            }
            if i < self.a.len() {
                self.path.push(Op::Del);
                self.go(i + 1, j, cost + self.cm.deletion());
                self.path.pop();
            }
            if j < self.b.len() {
                self.path.push(Op::Ins);
                self.go(i, j + 1, cost + self.cm.insertion());
                self.path.pop();
            }
        }
    }

    let mut s = Search {
        a,
        b,
        cm,
        path: Vec::new(),
        best: None,
    };
    s.go(0, 0, 0.0);
    let (total_cost, ops) = s.best.expect("at least the empty path exists");
    let (mut i, mut j) = (0, 0);
    let pairs = ops
        .into_iter()
        .map(|op| match op {
            Op::Sub => {
                i += 1;
                j += 1;
                (Some(a[i - 1].clone()), Some(b[j - 1].clone()))
            }
            Op::Del => {
                i += 1;
                (Some(a[i - 1].clone()), None)
            }
            Op::Ins => {
                j += 1;
                (None, Some(b[j - 1].clone()))
            }
        })
        .collect();
    Ok(Alignment { pairs, total_cost })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfCheckReport {
    pub pairs: usize,
    pub mismatches: usize,
    pub max_difference: f64,
}

/// Aligns `pairs` random sequence pairs (lengths 0-6 over a 4-symbol
/// alphabet) under random cost tables with both the DP and the brute-force
/// search, and counts pairs whose optimal costs differ. Costs are
/// multiples of 1/4 so sums are exact.
pub fn self_check(pairs: usize, seed: u64) -> SelfCheckReport {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut mismatches = 0;
    let mut max_difference: f64 = 0.0;
    for _ in 0..pairs {
        let mut table = [[0.0; 4]; 4];
        for row in &mut table {
            for c in row.iter_mut() {
                *c = rng.random_range(0..12) as f64 / 4.0;
            }
        }
        let cm = FnCost {
            sub: move |a: &u8, b: &u8| table[*a as usize][*b as usize],
            ins: rng.random_range(0..12) as f64 / 4.0,
            del: rng.random_range(0..12) as f64 / 4.0,
        };
        let la = rng.random_range(0..=BRUTE_FORCE_MAX);
        let lb = rng.random_range(0..=BRUTE_FORCE_MAX);
        let a: Vec<u8> = (0..la).map(|_| rng.random_range(0..4)).collect();
        let b: Vec<u8> = (0..lb).map(|_| rng.random_range(0..4)).collect();
        let dp = align(&a, &b, &cm).total_cost;
        let bf = brute_force_align(&a, &b, &cm).expect("lengths within limit").total_cost;
        if dp != bf {
            mismatches += 1;
            max_difference = max_difference.max((dp - bf).abs());
        }
    }
    SelfCheckReport {
        pairs,
        mismatches,
        max_difference,
    }
}

/// 1 − |x ∩ y| / |x ∪ y|; 0 for two empty sets.
pub fn jaccard_distance(x: FeatureSet, y: FeatureSet) -> f64 {
    let union = x.union(y).len();
    if union == 0 {
        return 0.0;
    }
    1.0 - x.intersection(y).len() as f64 / union as f64
}

/// Letter (a) against phone (b) costs: Jaccard dissimilarity between the
/// letter's candidate-union features and the phone's features.
pub struct LetterPhoneCost {
    letters: [FeatureSet; 26],
    fs: FeatureSystem,
    pub indel: f64,
}

pub fn letter_phone_cost(fs: &FeatureSystem) -> LetterPhoneCost {
    let mut letters = [FeatureSet::EMPTY; 26];
    for (i, c) in ('a'..='z').enumerate() {
        letters[i] = fs.letter_features(c).unwrap_or_default();
    }
    LetterPhoneCost {
        letters,
        fs: fs.clone(),
        indel: INDEL_COST,
    }
}

impl LetterPhoneCost {
    pub fn letter_set(&self, c: char) -> FeatureSet {
        let c = c.to_ascii_lowercase();
        if c.is_ascii_lowercase() {
            self.letters[(c as u8 - b'a') as usize]
        } else {
            FeatureSet::EMPTY
        }
    }
}

impl<S: AsRef<str> + ?Sized> CostModel<char, S> for LetterPhoneCost {
    fn substitution(&self, a: &char, b: &S) -> f64 {
        let letter = self.letter_set(*a);
        if letter.is_empty() {
            return 1.0;
        }
        jaccard_distance(letter, self.fs.features(b.as_ref()))
    }
    fn insertion(&self) -> f64 {
        self.indel
    }
    fn deletion(&self) -> f64 {
        self.indel
    }
}

/// Phone against phone costs: 0 for identical symbols, feature Jaccard
/// otherwise. ε never takes part in a substitution.
pub struct PhonePhoneCost {
    fs: FeatureSystem,
    pub indel: f64,
}

pub fn phone_phone_cost(fs: &FeatureSystem) -> PhonePhoneCost {
    PhonePhoneCost {
        fs: fs.clone(),
        indel: INDEL_COST,
    }
}

impl<S: AsRef<str> + ?Sized> CostModel<S, S> for PhonePhoneCost {
    fn substitution(&self, a: &S, b: &S) -> f64 {
        let (a, b) = (a.as_ref(), b.as_ref());
        if a == EPSILON || b == EPSILON {
            // forces an indel instead
            return f64::INFINITY;
        }
        if a == b {
            return 0.0;
        }
        jaccard_distance(self.fs.features(a), self.fs.features(b))
    }
    fn insertion(&self) -> f64 {
        self.indel
    }
    fn deletion(&self) -> f64 {
        self.indel
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> FnCost<impl Fn(&char, &char) -> f64> {
        FnCost {
            sub: |a: &char, b: &char| if a == b { 0.0 } else { 1.0 },
            ins: 1.0,
            del: 1.0,
        }
    }

    #[test]
    fn identical_sequences_align_at_zero_cost() {
        let x: Vec<char> = "kitten".chars().collect();
        let al = align(&x, &x, &unit());
        assert_eq!(al.total_cost, 0.0);
        assert!(al.ops().iter().all(|&o| o == Op::Sub));
    }

    #[test]
    fn against_empty() {
        let a: Vec<char> = "ab".chars().collect();
        let al = align(&a, &[], &FnCost { sub: |_: &char, _: &char| 0.0, ins: 0.3, del: 0.7 });
        assert_eq!(al.ops(), [Op::Del, Op::Del]);
        assert!((al.total_cost - 1.4).abs() < 1e-12);
        let e = align::<char, char, _>(&[], &[], &unit());
        assert!(e.pairs.is_empty());
        assert_eq!(e.total_cost, 0.0);
        let bf = brute_force_align::<char, char, _>(&[], &[], &unit()).unwrap();
        assert_eq!(bf.total_cost, 0.0);
    }

    #[test]
    fn cheap_substitution_is_taken() {
        let cm = FnCost { sub: |_: &char, _: &char| 0.5, ins: 1.0, del: 1.0 };
        let bf = brute_force_align(&['a'], &['b'], &cm).unwrap();
        assert_eq!(bf.pairs, vec![(Some('a'), Some('b'))]);
        assert_eq!(bf.total_cost, 0.5);
    }

    #[test]
    fn tie_prefers_substitution_then_deletion() {
        // sub = del + ins, so both paths cost 2; backtrace must pick sub
        let cm = FnCost { sub: |_: &char, _: &char| 2.0, ins: 1.0, del: 1.0 };
        let al = align(&['a'], &['b'], &cm);
        assert_eq!(al.ops(), [Op::Sub]);
        // "ab" vs "b": deleting either symbol costs the same
        let cm = FnCost { sub: |_: &char, _: &char| 0.0, ins: 1.0, del: 1.0 };
        let al = align(&['a', 'b'], &['b'], &cm);
        assert_eq!(al.ops(), [Op::Del, Op::Sub]);
    }

    #[test]
    fn brute_force_rejects_long_input() {
        let a = ['a'; 7];
        assert!(brute_force_align(&a, &['b'], &unit()).is_err());
    }

    #[test]
    fn letter_phone_costs() {
        let fs = FeatureSystem::english();
        let cm = letter_phone_cost(&fs);
        assert_eq!(CostModel::<char, str>::substitution(&cm, &'b', "b"), 0.0);
        // 'c' shares stop/velar features with /k/ and almost nothing with /m/
        let ck = CostModel::<char, str>::substitution(&cm, &'c', "k");
        let cm_m = CostModel::<char, str>::substitution(&cm, &'c', "m");
        assert!(ck < cm_m, "{ck} {cm_m}");
        let expected = jaccard_distance(fs.letter_features('c').unwrap(), fs.features("k"));
        assert_eq!(ck, expected);
        assert_eq!(CostModel::<char, str>::insertion(&cm), 0.9);
    }

    #[test]
    fn disjoint_features_cost_one() {
        let x = FeatureSet::EMPTY.with(0).with(1);
        let y = FeatureSet::EMPTY.with(2);
        assert_eq!(jaccard_distance(x, y), 1.0);
    }

    #[test]
    fn phone_phone_costs() {
        let fs = FeatureSystem::english();
        let cm = phone_phone_cost(&fs);
        let c = |a: &str, b: &str| CostModel::<str, str>::substitution(&cm, a, b);
        assert_eq!(c("t", "t"), 0.0);
        assert!(c("t", "dx") < c("t", "m"));
        assert!(c("t", EPSILON).is_infinite());
    }
}
