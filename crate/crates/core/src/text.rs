//! Linguistic feature extraction: preprocessing, polarity labels,
//! bag-of-words vectors, and best/worst review selection.

use std::collections::{BTreeMap, HashMap};
use std::sync::LazyLock;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{ReviewRecord, Snapshot};
use crate::error::{Error, Result};
use crate::table::FeatureTable;

/// Reserved separator inserted between the worst and best review token
/// streams. Preprocessing lowercases and strips bracket punctuation, so no
/// corpus token can ever collide with it.
pub const SEP_TOKEN: &str = "<SEP>";

/// Default vocabulary size.
pub const DEFAULT_VOCAB_SIZE: usize = 1000;

const STOPWORDS_RAW: &str = include_str!("../data/stopwords.txt");

static STOPWORDS: LazyLock<std::collections::BTreeSet<&'static str>> = LazyLock::new(|| {
    STOPWORDS_RAW
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect()
});

pub fn stop_words() -> &'static std::collections::BTreeSet<&'static str> {
    &STOPWORDS
}

/// Lowercase, split on Unicode whitespace, strip leading and trailing
/// non-alphanumeric characters (interior apostrophes and hyphens survive),
/// drop empty tokens and stop words.
pub fn preprocess(text: &str) -> Vec<String> {
    let lowered = text.to_lowercase();
    lowered
        .split_whitespace()
        .filter_map(|raw| {
            let token = raw.trim_matches(|c: char| !c.is_alphanumeric());
            if token.is_empty() || STOPWORDS.contains(token) {
                None
            } else {
                Some(token.to_string())
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    Positive,
    Negative,
    /// Only produced by the alternative map; neutral reviews are dropped
    /// from the sentiment task.
    Neutral,
}

/// Star-to-polarity mapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolarityMap {
    /// 1-2 negative, 3-5 positive.
    #[default]
    ThreePositive,
    /// 1-2 negative, 4-5 positive, 3 neutral (dropped).
    DropNeutral,
}

pub fn polarity(stars: u8, map: PolarityMap) -> Polarity {
    match map {
        PolarityMap::ThreePositive => {
            if stars <= 2 {
                Polarity::Negative
            } else {
                Polarity::Positive
            }
        }
        PolarityMap::DropNeutral => match stars {
            0..=2 => Polarity::Negative,
            3 => Polarity::Neutral,
            _ => Polarity::Positive,
        },
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Vocabulary {
    terms: Vec<String>,
    #[serde(skip)]
    index: BTreeMap<String, usize>,
}

impl Vocabulary {
    /// Top `size` tokens by total corpus frequency, ties broken by the
    /// lexicographically smaller term getting the lower index.
    pub fn build<'a>(tokens: impl IntoIterator<Item = &'a str>, size: usize) -> Result<Vocabulary> {
        let mut counts: HashMap<&str, u64> = HashMap::new();
        for t in tokens {
            *counts.entry(t).or_insert(0) += 1;
        }
        if counts.is_empty() {
            return Err(Error::invalid("empty corpus: no tokens to build a vocabulary"));
        }
        let mut ranked: Vec<(&str, u64)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        ranked.truncate(size);
        let terms: Vec<String> = ranked.into_iter().map(|(t, _)| t.to_string()).collect();
        Ok(Vocabulary::from_terms(terms))
    }

    pub fn from_terms(terms: Vec<String>) -> Vocabulary {
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vocabulary { terms, index }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    /// Rebuild the lookup index after deserialization.
    pub fn rebuild_index(&mut self) {
        self.index = self
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
    }
}

/// Count in-vocabulary tokens; out-of-vocabulary tokens are dropped.
pub fn bow_vector<'a>(tokens: impl IntoIterator<Item = &'a str>, vocab: &Vocabulary) -> Vec<u32> {
    let mut counts = vec![0u32; vocab.len()];
    for t in tokens {
        if let Some(i) = vocab.index_of(t) {
            counts[i] += 1;
        }
    }
    counts
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtremeReviews {
    pub business_id: String,
    pub best_review_id: String,
    pub worst_review_id: String,
    /// tokens(worst) ++ [<SEP>] ++ tokens(best)
    pub tokens: Vec<String>,
}

/// Pick the best (max stars) and worst (min stars) review, resolving star
/// ties uniformly with the caller's seeded rng. A single review serves as
/// both. Errors when the restaurant has no reviews.
pub fn select_extreme_reviews(
    business_id: &str,
    reviews: &[&ReviewRecord],
    rng: &mut impl Rng,
) -> Result<ExtremeReviews> {
    if reviews.is_empty() {
        return Err(Error::invalid(format!(
            "no reviews for business {business_id}; excluded from linguistic models"
        )));
    }
    let mut sorted: Vec<&ReviewRecord> = reviews.to_vec();
    sorted.sort_by(|a, b| a.review_id.cmp(&b.review_id));
    let max_stars = sorted.iter().map(|r| r.stars).max().unwrap();
    let min_stars = sorted.iter().map(|r| r.stars).min().unwrap();
    let best_pool: Vec<&&ReviewRecord> = sorted.iter().filter(|r| r.stars == max_stars).collect();
    let worst_pool: Vec<&&ReviewRecord> = sorted.iter().filter(|r| r.stars == min_stars).collect();
    let best = best_pool[rng.random_range(0..best_pool.len())];
    let worst = worst_pool[rng.random_range(0..worst_pool.len())];

    let mut tokens = preprocess(&worst.text);
    tokens.push(SEP_TOKEN.to_string());
    tokens.extend(preprocess(&best.text));
    Ok(ExtremeReviews {
        business_id: business_id.to_string(),
        best_review_id: best.review_id.clone(),
        worst_review_id: worst.review_id.clone(),
        tokens,
    })
}

/// Reviews grouped by business, in snapshot order within each group.
pub fn reviews_by_business(s: &Snapshot) -> BTreeMap<&str, Vec<&ReviewRecord>> {
    let mut map: BTreeMap<&str, Vec<&ReviewRecord>> = BTreeMap::new();
    for r in &s.reviews {
        map.entry(r.business_id.as_str()).or_default().push(r);
    }
    map
}

/// Build the vocabulary over all reviews in the snapshot.
pub fn build_corpus_vocabulary(s: &Snapshot, size: usize) -> Result<Vocabulary> {
    let mut all_tokens: Vec<String> = Vec::new();
    for r in &s.reviews {
        all_tokens.extend(preprocess(&r.text));
    }
    Vocabulary::build(all_tokens.iter().map(String::as_str), size)
}

/// Per-restaurant bag-of-words table over the given population. Restaurants
/// with no reviews get a zero row plus the `no_reviews` flag.
pub fn bow_feature_table(
    s: &Snapshot,
    population: &[String],
    vocab: &Vocabulary,
) -> FeatureTable {
    let by_business = reviews_by_business(s);
    let mut columns: Vec<String> = vocab.terms().iter().map(|t| format!("bow_{t}")).collect();
    columns.push("no_reviews".to_string());
    let mut table = FeatureTable::new("text", columns);
    let mut population: Vec<&String> = population.iter().collect();
    population.sort();
    for id in population {
        let reviews = by_business.get(id.as_str());
        let mut tokens: Vec<String> = Vec::new();
        if let Some(reviews) = reviews {
            for r in reviews {
                tokens.extend(preprocess(&r.text));
            }
        }
        let counts = bow_vector(tokens.iter().map(String::as_str), vocab);
        let mut row: Vec<f64> = counts.into_iter().map(f64::from).collect();
        row.push(reviews.is_none() as u8 as f64);
        table.push_row(id.clone(), row);
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn preprocess_rules() {
        assert_eq!(preprocess("The food was GREAT!"), vec!["food", "great"]);
        assert_eq!(preprocess(""), Vec::<String>::new());
        assert_eq!(
            preprocess("don't stop-believing"),
            vec!["don't", "stop-believing"]
        );
    }

    #[test]
    fn preprocess_is_idempotent() {
        let first = preprocess("Truly DELICIOUS, (really)! the don't-miss spot...");
        let again = preprocess(&first.join(" "));
        assert_eq!(first, again);
    }

    #[test]
    fn sep_token_cannot_be_produced() {
        let tokens = preprocess("<SEP> <sep> SEP!");
        assert!(tokens.iter().all(|t| t != SEP_TOKEN));
    }

    #[test]
    fn polarity_maps() {
        assert_eq!(polarity(1, PolarityMap::ThreePositive), Polarity::Negative);
        assert_eq!(polarity(2, PolarityMap::ThreePositive), Polarity::Negative);
        assert_eq!(polarity(3, PolarityMap::ThreePositive), Polarity::Positive);
        assert_eq!(polarity(4, PolarityMap::ThreePositive), Polarity::Positive);
        assert_eq!(polarity(5, PolarityMap::ThreePositive), Polarity::Positive);
        assert_eq!(polarity(3, PolarityMap::DropNeutral), Polarity::Neutral);
        assert_eq!(polarity(5, PolarityMap::DropNeutral), Polarity::Positive);
    }

    #[test]
    fn default_map_never_neutral() {
        for stars in 1..=5u8 {
            assert_ne!(polarity(stars, PolarityMap::default()), Polarity::Neutral);
        }
    }

    #[test]
    fn vocabulary_min_rule_and_ties() {
        let tokens = ["b", "a", "b", "a", "c"];
        let v = Vocabulary::build(tokens, 1000).unwrap();
        assert_eq!(v.len(), 3);
        // a and b tie at 2; a sorts first.
        assert_eq!(v.terms()[0], "a");
        assert_eq!(v.terms()[1], "b");
        assert_eq!(v.terms()[2], "c");

        let capped = Vocabulary::build(tokens, 2).unwrap();
        assert_eq!(capped.len(), 2);
        assert!(Vocabulary::build(std::iter::empty(), 10).is_err());
    }

    #[test]
    fn bow_counts_and_oov() {
        let v = Vocabulary::from_terms(vec!["good".into(), "food".into()]);
        let counts = bow_vector(["good", "food", "good"], &v);
        assert_eq!(counts, vec![2, 1]);
        let zero = bow_vector(["unknown", "words"], &v);
        assert_eq!(zero, vec![0, 0]);
    }

    fn review(id: &str, stars: u8, text: &str) -> ReviewRecord {
        ReviewRecord {
            review_id: id.to_string(),
            business_id: "b".to_string(),
            user_id: "u".to_string(),
            stars,
            timestamp: crate::corpus::parse_datetime("2017-01-01").unwrap(),
            text: text.to_string(),
        }
    }

    #[test]
    fn extreme_reviews_basic_and_degenerate() {
        let r1 = review("r1", 1, "awful visit");
        let r3 = review("r2", 3, "fine");
        let r5 = review("r3", 5, "superb dinner");
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let picked =
            select_extreme_reviews("b", &[&r1, &r3, &r5], &mut rng).unwrap();
        assert_eq!(picked.best_review_id, "r3");
        assert_eq!(picked.worst_review_id, "r1");
        assert_eq!(
            picked.tokens,
            vec!["awful", "visit", SEP_TOKEN, "superb", "dinner"]
        );

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let single = select_extreme_reviews("b", &[&r5], &mut rng).unwrap();
        assert_eq!(single.best_review_id, single.worst_review_id);
        assert_eq!(
            single.tokens,
            vec!["superb", "dinner", SEP_TOKEN, "superb", "dinner"]
        );

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(select_extreme_reviews("b", &[], &mut rng).is_err());
    }

    #[test]
    fn extreme_tie_break_is_seed_stable() {
        let a = review("r1", 5, "first");
        let b = review("r2", 5, "second");
        let picks: Vec<String> = (0..3)
            .map(|_| {
                let mut rng = ChaCha8Rng::seed_from_u64(99);
                select_extreme_reviews("b", &[&a, &b], &mut rng)
                    .unwrap()
                    .best_review_id
            })
            .collect();
        assert!(picks.iter().all(|p| p == &picks[0]));
    }

    #[test]
    fn stopword_list_is_hash_pinned() {
        use sha2::{Digest, Sha256};
        let digest = Sha256::digest(STOPWORDS_RAW.as_bytes());
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        // Pinned so silent edits to the shipped list are caught.
        assert_eq!(
            hex,
            "245fd09434a16e63171630b988cba0c6518b0fc2804aca500c14fb166ec58218"
        );
        assert!(stop_words().contains("the"));
        assert!(stop_words().contains("was"));
    }
}
