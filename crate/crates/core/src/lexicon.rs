//! Text preprocessing, the pronunciation lexicon and the bigram HMM
//! part-of-speech tagger used to pick between homograph pronunciations.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use crate::error::{Error, Result};
use crate::phonology::{parse_pronunciation, FeatureSystem, Syllable};

pub const ENGLISH_LEXICON: &str = include_str!("../data/lexicon.tsv");
pub const ENGLISH_TAGGED: &str = include_str!("../data/tagged.txt");

/// Add-k constant for transition and emission smoothing.
pub const SMOOTHING: f64 = 0.1;

/// Tags that may be assigned to words found in neither the lexicon nor the
/// training corpus.
pub const OPEN_CLASS_TAGS: &[&str] = &["NN", "NNS", "NNP", "VB", "VBD", "VBG", "VBN", "VBP", "VBZ", "JJ", "RB"];

const FUNCTION_TAGS: &[&str] = &["DT", "PRP", "IN", "CC", "TO", "MD"];

pub fn is_punctuation(token: &str) -> bool {
    matches!(token, "." | "!" | "?" | "," | ";" | ":")
}

pub fn is_terminal(token: &str) -> bool {
    matches!(token, "." | "!" | "?")
}

pub fn is_function_tag(tag: &str) -> bool {
    FUNCTION_TAGS.contains(&tag)
}

// ---------------------------------------------------------------------------
// Tokenizer
// ---------------------------------------------------------------------------

/// Splits text into sentences of lowercased tokens. Punctuation that cues a
/// boundary is kept as its own token; digit runs are spelled out.
pub fn tokenize(text: &str) -> Vec<Vec<String>> {
    let mut sentences = Vec::new();
    let mut current: Vec<String> = Vec::new();
    let mut word = String::new();

    fn flush(word: &mut String, current: &mut Vec<String>) {
        if word.is_empty() {
            return;
        }
        let w = std::mem::take(word);
        let trimmed = w.trim_matches('\'');
        if trimmed.is_empty() {
            return;
        }
        if trimmed.chars().all(|c| c.is_ascii_digit()) {
            current.extend(number_words(trimmed));
        } else {
            current.push(trimmed.to_string());
        }
    }

    let chars: Vec<char> = text.chars().collect();
    for (i, &c) in chars.iter().enumerate() {
        if c.is_alphanumeric() || c == '\'' {
            // keep digit groups like 1,000 together
            word.extend(c.to_lowercase());
        } else if c == ',' && word.chars().all(|d| d.is_ascii_digit()) && !word.is_empty()
            && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())
        {
            continue;
        } else {
            flush(&mut word, &mut current);
            if is_punctuation(&c.to_string()) {
                current.push(c.to_string());
                if is_terminal(&c.to_string()) {
                    sentences.push(std::mem::take(&mut current));
                }
            }
        }
    }
    flush(&mut word, &mut current);
    if !current.is_empty() {
        sentences.push(current);
    }
    sentences
}

/// Renders tokens back to text with single spaces.
pub fn render(sentences: &[Vec<String>]) -> String {
    sentences
        .iter()
        .map(|s| s.join(" "))
        .collect::<Vec<_>>()
        .join(" ")
}

const ONES: [&str; 20] = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven",
    "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen",
];
const TENS: [&str; 10] = [
    "", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety",
];

/// Spells out a digit string. Values beyond 999,999,999 are read digit by digit.
pub fn number_words(digits: &str) -> Vec<String> {
    fn below_thousand(n: u64, out: &mut Vec<String>) {
        let h = n / 100;
        let r = n % 100;
        if h > 0 {
            out.push(ONES[h as usize].into());
            out.push("hundred".into());
        }
        if r >= 20 {
            out.push(TENS[(r / 10) as usize].into());
            if r % 10 != 0 {
                out.push(ONES[(r % 10) as usize].into());
            }
        } else if r > 0 {
            out.push(ONES[r as usize].into());
        }
    }

    let value = match digits.parse::<u64>() {
        Ok(v) if v <= 999_999_999 && !(digits.len() > 1 && digits.starts_with('0')) => v,
        _ => {
            return digits
                .chars()
                .filter_map(|c| c.to_digit(10))
                .map(|d| ONES[d as usize].to_string())
                .collect()
        }
    };
    if value == 0 {
        return vec!["zero".into()];
    }
    let mut out = Vec::new();
    let millions = value / 1_000_000;
    let thousands = (value / 1000) % 1000;
    let rest = value % 1000;
    if millions > 0 {
        below_thousand(millions, &mut out);
        out.push("million".into());
    }
    if thousands > 0 {
        below_thousand(thousands, &mut out);
        out.push("thousand".into());
    }
    below_thousand(rest, &mut out);
    out
}

// ---------------------------------------------------------------------------
// Lexicon
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    pub tags: Vec<String>,
    pub pronunciation: Vec<Syllable>,
}

impl Variant {
    pub fn phones(&self) -> Vec<String> {
        self.pronunciation
            .iter()
            .flat_map(|s| s.phones.iter().cloned())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LexEntry {
    pub orthography: String,
    pub variants: Vec<Variant>,
}

#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: BTreeMap<String, LexEntry>,
}

impl Lexicon {
    pub fn english(fs: &FeatureSystem) -> Self {
        Self::parse(ENGLISH_LEXICON, "lexicon.tsv", fs).expect("shipped lexicon is valid")
    }

    pub fn load(path: &Path, fs: &FeatureSystem) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path, fs)
    }

    /// Parses `orthography<TAB>POS[,POS...]<TAB>pronunciation` rows. Rows with
    /// an identical pronunciation are merged into one variant.
    pub fn parse(text: &str, path: impl AsRef<Path>, fs: &FeatureSystem) -> Result<Self> {
        let path = path.as_ref();
        let mut entries: BTreeMap<String, LexEntry> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(Error::parse(path, lineno + 1, format!("expected 3 tab-separated columns, got {}", cols.len())));
            }
            let orth = cols[0].trim().to_lowercase();
            if orth.is_empty() {
                return Err(Error::parse(path, lineno + 1, "empty orthography"));
            }
            let tags: Vec<String> = cols[1]
                .split(',')
                .map(|t| t.trim().to_string())
                .filter(|t| !t.is_empty())
                .collect();
            if tags.is_empty() {
                return Err(Error::parse(path, lineno + 1, "no POS tags"));
            }
            let pron = parse_pronunciation(cols[2].trim(), fs).map_err(|m| Error::parse(path, lineno + 1, m))?;
            let entry = entries.entry(orth.clone()).or_insert_with(|| LexEntry {
                orthography: orth.clone(),
                variants: Vec::new(),
            });
            for t in &tags {
                if entry.variants.iter().any(|v| v.tags.contains(t)) {
                    return Err(Error::parse(path, lineno + 1, format!("duplicate row for ({orth}, {t})")));
                }
            }
            let phones: Vec<&String> = pron.iter().flat_map(|s| s.phones.iter()).collect();
            let same = entry
                .variants
                .iter_mut()
                .find(|v| v.pronunciation.iter().flat_map(|s| s.phones.iter()).eq(phones.iter().copied()));
            match same {
                Some(v) => v.tags.extend(tags),
                None => entry.variants.push(Variant {
                    tags,
                    pronunciation: pron,
                }),
            }
        }
        Ok(Lexicon { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, orthography: &str) -> Option<&LexEntry> {
        self.entries.get(orthography)
    }

    pub fn entries(&self) -> impl Iterator<Item = &LexEntry> {
        self.entries.values()
    }

    pub fn tags(&self) -> BTreeSet<&str> {
        self.entries
            .values()
            .flat_map(|e| e.variants.iter().flat_map(|v| v.tags.iter().map(String::as_str)))
            .collect()
    }

    /// Keeps only the named words.
    pub fn subset<'a>(&self, words: impl IntoIterator<Item = &'a str>) -> Lexicon {
        let entries = words
            .into_iter()
            .filter_map(|w| self.entries.get(w).map(|e| (w.to_string(), e.clone())))
            .collect();
        Lexicon { entries }
    }

    /// The variant whose tag set contains `tag`, else the first variant in
    /// file order. `None` routes the token to letter-to-sound.
    pub fn lookup(&self, token: &str, tag: &str) -> Option<&Variant> {
        let entry = self.entries.get(token)?;
        entry
            .variants
            .iter()
            .find(|v| v.tags.iter().any(|t| t == tag))
            .or_else(|| entry.variants.first())
    }
}

// ---------------------------------------------------------------------------
// Tagger
// ---------------------------------------------------------------------------

pub type TaggedSentence = Vec<(String, String)>;

/// Parses `token/TAG` items, one sentence per line.
pub fn parse_tagged_corpus(text: &str, path: impl AsRef<Path>) -> Result<Vec<TaggedSentence>> {
    let path = path.as_ref();
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut sent = Vec::new();
        for item in line.split_whitespace() {
            let (tok, tag) = item
                .rsplit_once('/')
                .filter(|(a, b)| !a.is_empty() && !b.is_empty())
                .ok_or_else(|| Error::parse(path, lineno + 1, format!("expected token/TAG, got {item:?}")))?;
            sent.push((tok.to_lowercase(), tag.to_string()));
        }
        out.push(sent);
    }
    Ok(out)
}

pub fn english_tagged_corpus() -> Vec<TaggedSentence> {
    parse_tagged_corpus(ENGLISH_TAGGED, "tagged.txt").expect("shipped corpus is valid")
}

/// Bigram HMM with add-k smoothed transitions.
#[derive(Debug, Clone)]
pub struct TagModel {
    tags: Vec<String>,
    tag_index: HashMap<String, usize>,
    /// log P(tag | start)
    start: Vec<f64>,
    /// log P(next | prev), row-major
    transitions: Vec<f64>,
    /// log P(end | tag)
    end: Vec<f64>,
    tag_counts: Vec<f64>,
    emissions: HashMap<String, Vec<f64>>,
    vocabulary: usize,
    allowed: HashMap<String, Vec<usize>>,
    k: f64,
}

pub fn train_tagger(corpus: &[TaggedSentence]) -> Result<TagModel> {
    train_tagger_with(corpus, SMOOTHING)
}

pub fn train_tagger_with(corpus: &[TaggedSentence], k: f64) -> Result<TagModel> {
    if corpus.iter().all(|s| s.is_empty()) {
        return Err(Error::invalid("empty tagged corpus"));
    }
    let tags: Vec<String> = corpus
        .iter()
        .flatten()
        .map(|(_, t)| t.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut model = TagModel::empty(tags, k);
    model.fit(corpus);
    Ok(model)
}

impl TagModel {
    fn empty(tags: Vec<String>, k: f64) -> Self {
        let n = tags.len();
        let tag_index = tags.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        TagModel {
            tags,
            tag_index,
            start: vec![0.0; n],
            transitions: vec![0.0; n * n],
            end: vec![0.0; n],
            tag_counts: vec![0.0; n],
            emissions: HashMap::new(),
            vocabulary: 0,
            allowed: HashMap::new(),
            k,
        }
    }

    fn fit(&mut self, corpus: &[TaggedSentence]) {
        let n = self.tags.len();
        let mut start = vec![0.0; n];
        let mut trans = vec![0.0; n * n];
        let mut end = vec![0.0; n];
        let mut from = vec![0.0; n];
        let mut emissions: HashMap<String, Vec<f64>> = HashMap::new();
        let mut sentences = 0.0;
        for sent in corpus.iter().filter(|s| !s.is_empty()) {
            sentences += 1.0;
            let ids: Vec<usize> = sent.iter().map(|(_, t)| self.tag_index[t]).collect();
            start[ids[0]] += 1.0;
            for w in ids.windows(2) {
                trans[w[0] * n + w[1]] += 1.0;
                from[w[0]] += 1.0;
            }
            let last = *ids.last().unwrap();
            end[last] += 1.0;
            from[last] += 1.0;
            for ((tok, _), &t) in sent.iter().zip(&ids) {
                emissions.entry(tok.clone()).or_insert_with(|| vec![0.0; n])[t] += 1.0;
                self.tag_counts[t] += 1.0;
            }
        }
        let k = self.k;
        let nf = n as f64;
        for t in 0..n {
            self.start[t] = ((start[t] + k) / (sentences + k * nf)).ln();
            // the end state is one more outcome of each row
            let denom = from[t] + k * (nf + 1.0);
            for u in 0..n {
                self.transitions[t * n + u] = ((trans[t * n + u] + k) / denom).ln();
            }
            self.end[t] = ((end[t] + k) / denom).ln();
        }
        self.vocabulary = emissions.len();
        for (tok, counts) in &emissions {
            let allowed = (0..n).filter(|&t| counts[t] > 0.0).collect();
            self.allowed.insert(tok.clone(), allowed);
        }
        self.emissions = emissions;
    }

    pub fn tags(&self) -> &[String] {
        &self.tags
    }

    pub fn tag_id(&self, tag: &str) -> Option<usize> {
        self.tag_index.get(tag).copied()
    }

    /// Transition probability (not log) from `prev` to `next`.
    pub fn transition(&self, prev: &str, next: &str) -> f64 {
        let n = self.tags.len();
        self.transitions[self.tag_index[prev] * n + self.tag_index[next]].exp()
    }

    pub fn end_probability(&self, tag: &str) -> f64 {
        self.end[self.tag_index[tag]].exp()
    }

    /// Registers the tag sets of lexicon words so that lexicon tags are
    /// permitted for them even when the corpus never showed the pairing.
    pub fn with_lexicon(mut self, lex: &Lexicon) -> Result<Self> {
        for tag in lex.tags() {
            if !self.tag_index.contains_key(tag) {
                return Err(Error::Model(format!("lexicon tag {tag:?} is missing from the tagger")));
            }
        }
        for entry in lex.entries() {
            let ids = self.allowed.entry(entry.orthography.clone()).or_default();
            for v in &entry.variants {
                for t in &v.tags {
                    let id = self.tag_index[t];
                    if !ids.contains(&id) {
                        ids.push(id);
                    }
                }
            }
            ids.sort_unstable();
        }
        Ok(self)
    }

    /// log P(token | tag), or `None` when the tag is not permitted for the token.
    pub fn emission(&self, token: &str, tag: usize) -> Option<f64> {
        match self.allowed.get(token) {
            Some(ids) => {
                if !ids.contains(&tag) {
                    return None;
                }
                let c = self.emissions.get(token).map_or(0.0, |c| c[tag]);
                Some(((c + self.k) / (self.tag_counts[tag] + self.k * (self.vocabulary as f64 + 1.0))).ln())
            }
            None => {
                let open: Vec<usize> = OPEN_CLASS_TAGS.iter().filter_map(|t| self.tag_id(t)).collect();
                if open.is_empty() {
                    Some(-(self.tags.len() as f64).ln())
                } else if open.contains(&tag) {
                    Some(-(open.len() as f64).ln())
                } else {
                    None
                }
            }
        }
    }

    /// Log score of a complete tag sequence. Used by tests as a brute-force oracle.
    pub fn sequence_score(&self, tokens: &[String], tags: &[usize]) -> f64 {
        let n = self.tags.len();
        if tokens.is_empty() {
            return 0.0;
        }
        let mut s = self.start[tags[0]];
        for (i, tok) in tokens.iter().enumerate() {
            match self.emission(tok, tags[i]) {
                Some(e) => s += e,
                None => return f64::NEG_INFINITY,
            }
            if i > 0 {
                s += self.transitions[tags[i - 1] * n + tags[i]];
            }
        }
        s + self.end[*tags.last().unwrap()]
    }

    /// Viterbi decoding.
    pub fn pos_tag(&self, tokens: &[String]) -> Vec<String> {
        self.decode(tokens)
            .into_iter()
            .map(|t| self.tags[t].clone())
            .collect()
    }

    pub fn decode(&self, tokens: &[String]) -> Vec<usize> {
        let n = self.tags.len();
        let len = tokens.len();
        if len == 0 {
            return Vec::new();
        }
        let neg = f64::NEG_INFINITY;
        let mut score = vec![neg; len * n];
        let mut back = vec![0usize; len * n];
        for t in 0..n {
            if let Some(e) = self.emission(&tokens[0], t) {
                score[t] = self.start[t] + e;
            }
        }
        for i in 1..len {
            for t in 0..n {
                let Some(e) = self.emission(&tokens[i], t) else {
                    continue;
                };
                let mut best = neg;
                let mut arg = 0;
                for p in 0..n {
                    let s = score[(i - 1) * n + p] + self.transitions[p * n + t];
                    if s > best {
                        best = s;
                        arg = p;
                    }
                }
                score[i * n + t] = best + e;
                back[i * n + t] = arg;
            }
        }
        let mut best = neg;
        let mut arg = 0;
        for t in 0..n {
            let s = score[(len - 1) * n + t] + self.end[t];
            if s > best {
                best = s;
                arg = t;
            }
        }
        let mut out = vec![arg; len];
        for i in (1..len).rev() {
            out[i - 1] = back[i * n + out[i]];
        }
        out
    }
}
