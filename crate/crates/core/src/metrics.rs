//! Scoring: label accuracy, slot micro-F1, exact match, joint goal accuracy,
//! ROUGE-L, corpus BLEU-4 and the combined end-to-end score.
//!
//! All text metrics compare lowercased, whitespace-collapsed strings split on
//! whitespace.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// F-measure weight for ROUGE-L; recall counts `BETA²` times as much as precision.
pub const ROUGE_BETA: f64 = 1.2;
/// Substitute match count for n-gram orders with no matches.
pub const BLEU_EPSILON: f64 = 0.1;
pub const BLEU_MAX_ORDER: usize = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("{preds} predictions vs {golds} references")]
    LengthMismatch { preds: usize, golds: usize },
    #[error("nothing to score")]
    Empty,
    #[error("reference {0} is empty")]
    EmptyGold(usize),
    #[error("{name} = {value} outside [0, 100]")]
    RangeViolation { name: &'static str, value: f64 },
    #[error("slot `{slot}` has conflicting values `{first}` and `{second}`")]
    DuplicateSlot { slot: String, first: String, second: String },
}

pub fn normalize_answer(s: &str) -> String {
    s.to_lowercase().split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn tokenize(s: &str) -> Vec<String> {
    s.to_lowercase().split_whitespace().map(str::to_owned).collect()
}

fn check_lengths(preds: usize, golds: usize) -> Result<(), MetricError> {
    if preds != golds {
        return Err(MetricError::LengthMismatch { preds, golds });
    }
    if preds == 0 {
        return Err(MetricError::Empty);
    }
    Ok(())
}

pub fn accuracy<S: AsRef<str>>(preds: &[S], golds: &[S]) -> Result<f64, MetricError> {
    check_lengths(preds.len(), golds.len())?;
    let hits = preds
        .iter()
        .zip(golds)
        .filter(|(p, g)| normalize_answer(p.as_ref()) == normalize_answer(g.as_ref()))
        .count();
    Ok(hits as f64 / preds.len() as f64)
}

pub fn exact_match(pred: &str, gold: &str) -> bool {
    normalize_answer(pred) == normalize_answer(gold)
}

/// Mean of [`exact_match`] over aligned pairs.
pub fn exact_match_corpus<S: AsRef<str>>(preds: &[S], golds: &[S]) -> Result<f64, MetricError> {
    accuracy(preds, golds)
}

pub type SlotSet = BTreeSet<(String, String)>;

/// Micro-averaged F1 over exact (slot, value) matches, pooled across examples.
/// With no pairs on either side at all the score is 1.
pub fn slot_f1(preds: &[SlotSet], golds: &[SlotSet]) -> Result<f64, MetricError> {
    if preds.len() != golds.len() {
        return Err(MetricError::LengthMismatch {
            preds: preds.len(),
            golds: golds.len(),
        });
    }
    let (mut tp, mut np, mut ng) = (0usize, 0usize, 0usize);
    for (p, g) in preds.iter().zip(golds) {
        tp += p.intersection(g).count();
        np += p.len();
        ng += g.len();
    }
    if np + ng == 0 {
        return Ok(1.0);
    }
    // 2PR/(P+R) with P = tp/np, R = tp/ng.
    Ok(2.0 * tp as f64 / (np + ng) as f64)
}

/// Dialogue state: at most one value per domain-slot, both sides lowercased and trimmed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BeliefState(BTreeMap<String, String>);

impl BeliefState {
    pub fn new<I, K, V>(pairs: I) -> Result<Self, MetricError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let mut m = BTreeMap::<String, String>::new();
        for (k, v) in pairs {
            let (k, v) = (normalize_answer(k.as_ref()), normalize_answer(v.as_ref()));
            if let Some(prev) = m.get(&k) {
                if *prev != v {
                    return Err(MetricError::DuplicateSlot {
                        slot: k,
                        first: prev.clone(),
                        second: v,
                    });
                }
                continue;
            }
            m.insert(k, v);
        }
        Ok(BeliefState(m))
    }

    /// Reads `slot = value ; slot = value`, or `none` for the empty state.
    /// A segment without `=` becomes a slot with an empty value, so malformed
    /// predictions never match.
    pub fn parse(text: &str) -> Result<Self, MetricError> {
        let t = text.trim();
        if t.is_empty() || t.eq_ignore_ascii_case("none") {
            return Ok(BeliefState::default());
        }
        let pairs = t.split(';').map(str::trim).filter(|s| !s.is_empty()).map(|seg| match seg.split_once('=') {
            Some((k, v)) => (k.to_owned(), v.to_owned()),
            None => (seg.to_owned(), String::new()),
        });
        Self::new(pairs)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, slot: &str) -> Option<&str> {
        self.0.get(slot).map(String::as_str)
    }

    pub fn to_slot_set(&self) -> SlotSet {
        self.0.iter().map(|(k, v)| (k.clone(), v.clone())).collect()
    }
}

/// Fraction of turns whose predicted state equals the reference exactly.
pub fn joint_goal_accuracy(preds: &[BeliefState], golds: &[BeliefState]) -> Result<f64, MetricError> {
    check_lengths(preds.len(), golds.len())?;
    let hits = preds.iter().zip(golds).filter(|(p, g)| p == g).count();
    Ok(hits as f64 / preds.len() as f64)
}

/// Length of the longest common subsequence.
pub fn lcs<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut row = vec![0usize; b.len() + 1];
    for x in a {
        let mut diag = 0;
        for (j, y) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[b.len()]
}

pub fn f_beta(precision: f64, recall: f64, beta: f64) -> f64 {
    let b2 = beta * beta;
    let denom = recall + b2 * precision;
    if denom == 0.0 {
        0.0
    } else {
        (1.0 + b2) * precision * recall / denom
    }
}

/// ROUGE-L F-score of one pair.
pub fn rouge_l(pred: &str, gold: &str) -> Result<f64, MetricError> {
    let (p, g) = (tokenize(pred), tokenize(gold));
    if g.is_empty() {
        return Err(MetricError::EmptyGold(0));
    }
    if p.is_empty() {
        return Ok(0.0);
    }
    let l = lcs(&p, &g) as f64;
    Ok(f_beta(l / p.len() as f64, l / g.len() as f64, ROUGE_BETA))
}

/// Mean ROUGE-L F over aligned pairs.
pub fn rouge_l_corpus<S: AsRef<str>>(preds: &[S], golds: &[S]) -> Result<f64, MetricError> {
    check_lengths(preds.len(), golds.len())?;
    let mut sum = 0.0;
    for (i, (p, g)) in preds.iter().zip(golds).enumerate() {
        sum += rouge_l(p.as_ref(), g.as_ref()).map_err(|e| match e {
            MetricError::EmptyGold(_) => MetricError::EmptyGold(i),
            e => e,
        })?;
    }
    Ok(sum / preds.len() as f64)
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut m = HashMap::new();
    for w in tokens.windows(n) {
        *m.entry(w).or_insert(0) += 1;
    }
    m
}

/// Corpus BLEU-4 against a single reference per hypothesis, scaled to 0–100.
///
/// Orders for which the hypotheses contain no n-grams at all are left out of
/// the geometric mean. An order with n-grams but no clipped match uses
/// `BLEU_EPSILON` in place of the zero count.
pub fn bleu4<S: AsRef<str>>(preds: &[S], golds: &[S]) -> Result<f64, MetricError> {
    check_lengths(preds.len(), golds.len())?;
    let mut matches = [0usize; BLEU_MAX_ORDER];
    let mut totals = [0usize; BLEU_MAX_ORDER];
    let (mut hyp_len, mut ref_len) = (0usize, 0usize);
    for (p, g) in preds.iter().zip(golds) {
        let (p, g) = (tokenize(p.as_ref()), tokenize(g.as_ref()));
        hyp_len += p.len();
        ref_len += g.len();
        for n in 1..=BLEU_MAX_ORDER {
            if p.len() < n {
                continue;
            }
            totals[n - 1] += p.len() + 1 - n;
            let refs = ngram_counts(&g, n);
            for (gram, c) in ngram_counts(&p, n) {
                matches[n - 1] += c.min(refs.get(gram).copied().unwrap_or(0));
            }
        }
    }
    if hyp_len == 0 {
        return Ok(0.0);
    }
    let mut log_sum = 0.0;
    let mut orders = 0;
    for n in 0..BLEU_MAX_ORDER {
        if totals[n] == 0 {
            continue;
        }
        let m = if matches[n] == 0 { BLEU_EPSILON } else { matches[n] as f64 };
        log_sum += (m / totals[n] as f64).ln();
        orders += 1;
    }
    let bp = if hyp_len > ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    };
    Ok(100.0 * bp * (log_sum / orders as f64).exp())
}

/// `0.5 * (inform + success) + bleu`.
pub fn combined_score(inform: f64, success: f64, bleu: f64) -> Result<f64, MetricError> {
    for (name, value) in [("inform", inform), ("success", success)] {
        if !(0.0..=100.0).contains(&value) {
            return Err(MetricError::RangeViolation { name, value });
        }
    }
    if !(0.0..=100.0).contains(&bleu) {
        return Err(MetricError::RangeViolation { name: "bleu", value: bleu });
    }
    Ok(0.5 * (inform + success) + bleu)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Acc,
    F1,
    Em,
    Jga,
    RougeL,
    Bleu4,
    Combined,
}

impl Metric {
    pub const ALL: [Metric; 7] = [
        Metric::Acc,
        Metric::F1,
        Metric::Em,
        Metric::Jga,
        Metric::RougeL,
        Metric::Bleu4,
        Metric::Combined,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Acc => "acc",
            Metric::F1 => "f1",
            Metric::Em => "em",
            Metric::Jga => "jga",
            Metric::RougeL => "rouge_l",
            Metric::Bleu4 => "bleu4",
            Metric::Combined => "combined",
        }
    }

    /// Fixed choices behind the number, reported alongside it.
    pub fn variant(self) -> BTreeMap<String, String> {
        let kv: &[(&str, String)] = match self {
            Metric::Acc | Metric::Em => &[("normalizer", "lowercase+whitespace".into())],
            Metric::F1 => &[("averaging", "micro".into()), ("pair_format", "slot = value ; ...".into())],
            Metric::Jga => &[("pair_format", "slot = value ; ...".into())],
            Metric::RougeL => &[
                ("reported", "f".into()),
                ("beta", ROUGE_BETA.to_string()),
                ("aggregation", "mean".into()),
                ("tokenizer", "lowercase+whitespace".into()),
            ],
            Metric::Bleu4 => &[
                ("smoothing", "add-epsilon".into()),
                ("epsilon", BLEU_EPSILON.to_string()),
                ("aggregation", "corpus".into()),
                ("references", "1".into()),
                ("tokenizer", "lowercase+whitespace".into()),
            ],
            Metric::Combined => &[("formula", "0.5*(inform+success)+bleu".into())],
        };
        kv.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    /// Natural range of the metric's value.
    pub fn range(self) -> (f64, f64) {
        match self {
            Metric::Bleu4 => (0.0, 100.0),
            Metric::Combined => (0.0, 200.0),
            _ => (0.0, 1.0),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown metric `{s}` (expected one of acc, f1, em, jga, rouge_l, bleu4, combined)"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub metric: Metric,
    pub value: f64,
    pub support: usize,
    pub variant: BTreeMap<String, String>,
}

impl ScoreReport {
    pub fn new(metric: Metric, value: f64, support: usize) -> Self {
        ScoreReport {
            metric,
            value,
            support,
            variant: metric.variant(),
        }
    }
}

/// Scores aligned prediction/reference strings. Slot-based metrics read both
/// sides as `slot = value ; ...`. `Combined` takes its inputs elsewhere and is
/// rejected here with `Empty`.
pub fn score_texts<S: AsRef<str>>(metric: Metric, preds: &[S], golds: &[S]) -> Result<ScoreReport, MetricError> {
    check_lengths(preds.len(), golds.len())?;
    let states = |xs: &[S]| xs.iter().map(|x| BeliefState::parse(x.as_ref())).collect::<Result<Vec<_>, _>>();
    let value = match metric {
        Metric::Acc => accuracy(preds, golds)?,
        Metric::Em => exact_match_corpus(preds, golds)?,
        Metric::F1 => {
            let sets = |v: Vec<BeliefState>| v.iter().map(BeliefState::to_slot_set).collect::<Vec<_>>();
            slot_f1(&sets(states(preds)?), &sets(states(golds)?))?
        }
        Metric::Jga => joint_goal_accuracy(&states(preds)?, &states(golds)?)?,
        Metric::RougeL => rouge_l_corpus(preds, golds)?,
        Metric::Bleu4 => bleu4(preds, golds)?,
        Metric::Combined => return Err(MetricError::Empty),
    };
    Ok(ScoreReport::new(metric, value, preds.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(pairs: &[(&str, &str)]) -> SlotSet {
        pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn accuracy_counts() {
        assert_eq!(accuracy(&["a", "b", "c", "d"], &["a", "b", "c", "x"]).unwrap(), 0.75);
        assert_eq!(accuracy(&["a"], &["b"]).unwrap(), 0.0);
        assert_eq!(accuracy(&["A "], &["a"]).unwrap(), 1.0);
        assert_eq!(accuracy::<&str>(&[], &[]), Err(MetricError::Empty));
        assert!(matches!(accuracy(&["a"], &["a", "b"]), Err(MetricError::LengthMismatch { .. })));
    }

    #[test]
    fn slot_f1_cases() {
        assert_eq!(slot_f1(&[set(&[("a", "1"), ("b", "2")])], &[set(&[("a", "1"), ("c", "3")])]).unwrap(), 0.5);
        assert_eq!(slot_f1(&[set(&[("a", "1")])], &[set(&[("a", "1")])]).unwrap(), 1.0);
        assert_eq!(slot_f1(&[set(&[("a", "1")])], &[set(&[("a", "2")])]).unwrap(), 0.0);
        // An empty-vs-empty example changes nothing.
        let base = slot_f1(&[set(&[("a", "1"), ("b", "2")])], &[set(&[("a", "1")])]).unwrap();
        let with_empty = slot_f1(&[set(&[("a", "1"), ("b", "2")]), set(&[])], &[set(&[("a", "1")]), set(&[])]).unwrap();
        assert_eq!(base, with_empty);
    }

    #[test]
    fn exact_match_normalizer() {
        assert!(exact_match("Book a  Table", "book a table"));
        assert!(!exact_match("book a table", "book the table"));
    }

    #[test]
    fn jga_cases() {
        let s = |t: &str| BeliefState::parse(t).unwrap();
        let golds = [s("a = 1"), s("none"), s("a = 1 ; b = 2"), s("b = 2")];
        let preds = [s("A = 1"), s(""), s("a = 1"), s("b = 3")];
        assert_eq!(joint_goal_accuracy(&preds, &golds).unwrap(), 0.5);
        assert_eq!(s("x = 1 ; y = 2"), s("y = 2 ; x = 1"));
        assert!(matches!(BeliefState::parse("a = 1 ; a = 2"), Err(MetricError::DuplicateSlot { .. })));
    }

    #[test]
    fn lcs_small() {
        fn t(s: &str) -> Vec<&str> {
            s.split_whitespace().collect()
        }
        assert_eq!(lcs(&t("a b c d"), &t("a c d b")), 3);
        assert_eq!(lcs(&t(""), &t("a")), 0);
        assert_eq!(lcs(&t("x y"), &t("a b")), 0);
    }

    #[test]
    fn rouge_examples() {
        assert!((rouge_l("the cat", "the cat sat").unwrap() - 0.7722).abs() < 1e-4);
        assert_eq!(rouge_l("a b c", "a b c").unwrap(), 1.0);
        assert_eq!(rouge_l("x y", "a b").unwrap(), 0.0);
        assert_eq!(rouge_l("a", " "), Err(MetricError::EmptyGold(0)));
        assert_eq!(rouge_l_corpus(&["a", "b"], &["a", ""]), Err(MetricError::EmptyGold(1)));
    }

    #[test]
    fn bleu_examples() {
        assert!((bleu4(&["a b c d"], &["a b c d e"]).unwrap() - 77.8801).abs() < 1e-4);
        assert!((bleu4(&["the cat sat on the mat", "hi"], &["the cat sat on the mat", "hi"]).unwrap() - 100.0).abs() < 1e-9);
        assert_eq!(bleu4(&["", ""], &["a b", "c"]).unwrap(), 0.0);
        assert_eq!(bleu4::<&str>(&[], &[]), Err(MetricError::Empty));
    }

    #[test]
    fn bleu_smoothing_keeps_score_positive() {
        let v = bleu4(&["a b c d e"], &["a x b y c"]).unwrap();
        assert!(v > 0.0 && v < 100.0);
    }

    #[test]
    fn bleu_degrades_under_deletion() {
        let gold = "the quick brown fox jumps over the lazy dog";
        let full = bleu4(&[gold], &[gold]).unwrap();
        let cut = bleu4(&["the quick brown fox jumps over the dog"], &[gold]).unwrap();
        assert!(cut < full);
        assert!(rouge_l("the quick brown fox jumps over the dog", gold).unwrap() < 1.0);
    }

    #[test]
    fn combined_examples() {
        assert!((combined_score(91.50, 84.70, 22.86).unwrap() - 110.96).abs() < 1e-9);
        assert!((combined_score(94.40, 85.30, 20.50).unwrap() - 110.35).abs() < 1e-9);
        assert_eq!(combined_score(0.0, 0.0, 0.0).unwrap(), 0.0);
        assert!(matches!(combined_score(101.0, 0.0, 0.0), Err(MetricError::RangeViolation { name: "inform", .. })));
    }

    #[test]
    fn report_carries_variant() {
        let r = score_texts(Metric::RougeL, &["a b"], &["a b"]).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.variant["beta"], "1.2");
        assert_eq!(r.variant["reported"], "f");
        let f = score_texts(Metric::F1, &["a = 1 ; b = 2"], &["a = 1 ; c = 3"]).unwrap();
        assert_eq!(f.value, 0.5);
    }
}
