//! Salient topics, opinion scores and per-topic sentence selection.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::SentenceId;
use crate::sentiment::{Polarity, SentimentScores};
use crate::style::StyleScore;
use crate::topics::{LdaModel, TopicAssignment};

/// Everything known about one review sentence at selection time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceArtifacts {
    pub id: SentenceId,
    pub raw_text: String,
    pub assignment: TopicAssignment,
    pub sentiment: SentimentScores,
    pub style: StyleScore,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupMember {
    pub sentence_id: SentenceId,
    /// Probability of the group's topic for this sentence.
    pub p: f64,
    pub sentiment: SentimentScores,
    pub style: StyleScore,
    /// Opinion score: `ps` in a positive topic, `ns` in a negative one.
    pub op: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicGroup {
    pub topic_id: usize,
    pub members: Vec<GroupMember>,
    pub n_pos: usize,
    pub n_neg: usize,
    pub polarity: Polarity,
}

impl TopicGroup {
    pub fn new(topic_id: usize, members: Vec<GroupMember>) -> Self {
        topic_polarity_and_op(TopicGroup {
            topic_id,
            members,
            n_pos: 0,
            n_neg: 0,
            polarity: Polarity::Positive,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryEntry {
    pub topic: usize,
    pub sentence_id: SentenceId,
    pub sentence: String,
    pub score: f64,
    pub polarity: Polarity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductSummary {
    pub product_id: String,
    /// One sentence per salient topic, most salient first.
    pub entries: Vec<SummaryEntry>,
    pub k_used: usize,
}

impl ProductSummary {
    /// One sentence per line.
    pub fn render_text(&self) -> String {
        self.entries.iter().map(|e| format!("{}\n", e.sentence)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryOptions {
    pub k: usize,
    /// Per-topic multipliers for P, e.g. from [`topic_alignment`].
    pub topic_weights: Option<Vec<f64>>,
}

impl Default for SummaryOptions {
    fn default() -> Self {
        SummaryOptions {
            k: 5,
            topic_weights: None,
        }
    }
}

/// The `k` topics with the most sentences (by argmax topic), most first;
/// equal counts go to the lower topic id. Discarded sentences do not count.
pub fn select_salient_topics<'a, I>(assignments: I, k: usize) -> Vec<usize>
where
    I: IntoIterator<Item = &'a TopicAssignment>,
{
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for a in assignments.into_iter().filter(|a| !a.discarded) {
        *counts.entry(a.top_topic).or_insert(0) += 1;
    }
    let mut ranked: Vec<(usize, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.into_iter().take(k).map(|(t, _)| t).collect()
}

/// Majority polarity of the group (ties positive), then OP for every member.
pub fn topic_polarity_and_op(mut group: TopicGroup) -> TopicGroup {
    group.n_pos = group
        .members
        .iter()
        .filter(|m| m.sentiment.polarity == Polarity::Positive)
        .count();
    group.n_neg = group.members.len() - group.n_pos;
    group.polarity = if group.n_pos >= group.n_neg {
        Polarity::Positive
    } else {
        Polarity::Negative
    };
    for m in &mut group.members {
        m.op = match group.polarity {
            Polarity::Positive => m.sentiment.ps,
            Polarity::Negative => m.sentiment.ns,
        };
    }
    group
}

/// `(p + op) * sl`, with each input required to lie in `[0, 1]`.
pub fn sentence_score(p: f64, op: f64, sl: f64) -> Result<f64> {
    for (name, v) in [("p", p), ("op", op), ("sl", sl)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::ContractViolation(format!("{name}={v} outside [0, 1]")));
        }
    }
    Ok((p + op) * sl)
}

/// Higher score, then higher P, then the smaller sentence id.
fn better(a: (f64, f64, &SentenceId), b: (f64, f64, &SentenceId)) -> bool {
    match a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => a.2 < b.2,
    }
}

pub fn generate_summary(
    product_id: &str,
    sentences: &[SentenceArtifacts],
    options: &SummaryOptions,
) -> Result<ProductSummary> {
    let live: Vec<&SentenceArtifacts> = sentences.iter().filter(|s| !s.assignment.discarded).collect();
    if live.is_empty() {
        warn!("product {product_id}: every sentence was discarded; empty summary");
        return Ok(ProductSummary {
            product_id: product_id.to_string(),
            entries: Vec::new(),
            k_used: 0,
        });
    }
    let topics = select_salient_topics(live.iter().map(|s| &s.assignment), options.k);
    let mut entries = Vec::with_capacity(topics.len());
    for topic in topics {
        let weight = match &options.topic_weights {
            Some(w) => *w.get(topic).ok_or_else(|| {
                Error::ContractViolation(format!("no weight for topic {topic}"))
            })?,
            None => 1.0,
        };
        let members: Vec<GroupMember> = live
            .iter()
            .filter(|s| s.assignment.top_topic == topic)
            .map(|s| GroupMember {
                sentence_id: s.id.clone(),
                p: s.assignment.top_prob * weight,
                sentiment: s.sentiment,
                style: s.style,
                op: 0.0,
            })
            .collect();
        let group = TopicGroup::new(topic, members);
        let mut best: Option<(f64, &GroupMember)> = None;
        for m in &group.members {
            let score = sentence_score(m.p, m.op, m.style.sl)?;
            let take = match best {
                None => true,
                Some((bs, bm)) => better((score, m.p, &m.sentence_id), (bs, bm.p, &bm.sentence_id)),
            };
            if take {
                best = Some((score, m));
            }
        }
        let (score, m) = best.expect("salient topics have members");
        let raw = live
            .iter()
            .find(|s| s.id == m.sentence_id)
            .map(|s| s.raw_text.clone())
            .unwrap_or_default();
        entries.push(SummaryEntry {
            topic,
            sentence_id: m.sentence_id.clone(),
            sentence: raw,
            score,
            polarity: group.polarity,
        });
    }
    Ok(ProductSummary {
        product_id: product_id.to_string(),
        k_used: entries.len(),
        entries,
    })
}

/// For each review topic, the largest cosine similarity between its word
/// distribution and any summary topic, over the union vocabulary.
pub fn topic_alignment(review: &LdaModel, summary: &LdaModel) -> Vec<f64> {
    let summary_rows: Vec<(Vec<(usize, f64)>, f64)> = summary
        .phi
        .iter()
        .map(|row| {
            let norm = row.iter().map(|p| p * p).sum::<f64>().sqrt();
            (row.iter().copied().enumerate().collect(), norm)
        })
        .collect();
    // review word id -> summary word id
    let shared: Vec<Option<usize>> = review.vocab.iter().map(|w| summary.word_id(w)).collect();
    review
        .phi
        .iter()
        .map(|row| {
            let norm = row.iter().map(|p| p * p).sum::<f64>().sqrt();
            summary_rows
                .iter()
                .map(|(srow, snorm)| {
                    let dot: f64 = row
                        .iter()
                        .zip(&shared)
                        .filter_map(|(p, s)| s.map(|j| p * srow[j].1))
                        .sum();
                    if norm > 0.0 && *snorm > 0.0 {
                        (dot / (norm * snorm)).clamp(0.0, 1.0)
                    } else {
                        0.0
                    }
                })
                .fold(0.0, f64::max)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::Source;
    use crate::topics::ModelTag;
    use proptest::prelude::*;

    fn sid(i: usize) -> SentenceId {
        SentenceId {
            product_id: "p".into(),
            source: Source::Review,
            doc_index: i,
            sent_index: 0,
        }
    }

    fn scores(ps: f64, ns: f64) -> SentimentScores {
        SentimentScores {
            ps,
            ns,
            polarity: crate::sentiment::polarity_label(ps, ns),
            neutral: ps == 0.0 && ns == 0.0,
        }
    }

    fn art(i: usize, k: usize, topic: usize, p: f64, ps: f64, ns: f64, sl: f64) -> SentenceArtifacts {
        let mut probs = vec![(1.0 - p) / (k - 1) as f64; k];
        probs[topic] = p;
        SentenceArtifacts {
            id: sid(i),
            raw_text: format!("sentence {i}"),
            assignment: TopicAssignment {
                sentence_id: sid(i),
                probs,
                top_topic: topic,
                top_prob: p,
                discarded: false,
            },
            sentiment: scores(ps, ns),
            style: StyleScore { sl },
        }
    }

    fn assigned(topic: usize) -> TopicAssignment {
        TopicAssignment {
            sentence_id: sid(0),
            probs: vec![],
            top_topic: topic,
            top_prob: 1.0,
            discarded: false,
        }
    }

    #[test]
    fn salient_topics_by_count() {
        let mut a = Vec::new();
        for (t, n) in [(0, 40), (1, 35), (2, 20), (3, 10), (4, 9), (5, 3)] {
            a.extend(std::iter::repeat_with(|| assigned(t)).take(n));
        }
        assert_eq!(select_salient_topics(&a, 5), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn salient_topic_shortage_and_ties() {
        let a = vec![assigned(3), assigned(1), assigned(3)];
        assert_eq!(select_salient_topics(&a, 5), vec![3, 1]);
        let mut a = Vec::new();
        for (t, n) in [(0, 30), (1, 20), (2, 10), (3, 10)] {
            a.extend(std::iter::repeat_with(|| assigned(t)).take(n));
        }
        assert_eq!(select_salient_topics(&a, 3), vec![0, 1, 2]);
        let mut d = assigned(7);
        d.discarded = true;
        assert!(select_salient_topics(&[d], 5).is_empty());
    }

    fn member(ps: f64, ns: f64) -> GroupMember {
        GroupMember {
            sentence_id: sid(0),
            p: 0.5,
            sentiment: scores(ps, ns),
            style: StyleScore { sl: 0.5 },
            op: -1.0,
        }
    }

    #[test]
    fn majority_polarity_sets_op() {
        let g = TopicGroup::new(0, vec![member(0.9, 0.1), member(0.8, 0.2), member(0.6, 0.4), member(0.1, 0.9), member(0.3, 0.7)]);
        assert_eq!((g.n_pos, g.n_neg, g.polarity), (3, 2, Polarity::Positive));
        assert!(g.members.iter().all(|m| m.op == m.sentiment.ps));

        let g = TopicGroup::new(0, vec![member(0.1, 0.9); 4]);
        assert_eq!(g.polarity, Polarity::Negative);
        assert!(g.members.iter().all(|m| m.op == m.sentiment.ns));

        let g = TopicGroup::new(0, vec![member(0.9, 0.1), member(0.9, 0.1), member(0.2, 0.8), member(0.2, 0.8)]);
        assert_eq!(g.polarity, Polarity::Positive);
    }

    #[test]
    fn score_formula() {
        assert_eq!(sentence_score(0.6, 0.4, 0.5).unwrap(), 0.5);
        assert_eq!(sentence_score(0.3, 0.9, 0.0).unwrap(), 0.0);
        assert_eq!(sentence_score(1.0, 1.0, 1.0).unwrap(), 2.0);
        assert!(sentence_score(1.1, 0.0, 0.5).is_err());
        assert!(sentence_score(0.5, -0.1, 0.5).is_err());
        assert!(sentence_score(0.5, 0.5, f64::NAN).is_err());
    }

    #[test]
    fn best_member_of_topic_is_selected() {
        // same P and SL, OP decides: 0.50, 0.72, 0.33 after scoring
        let arts = vec![
            art(0, 2, 0, 0.5, 0.5, 0.0, 1.0 / 2.0 * 1.0),
            art(1, 2, 0, 0.5, 0.94, 0.06, 0.5),
            art(2, 2, 0, 0.5, 0.16, 0.0, 0.5),
        ];
        let scored: Vec<f64> = arts
            .iter()
            .map(|a| (a.assignment.top_prob + a.sentiment.ps) * a.style.sl)
            .collect();
        assert_eq!(scored, vec![0.5, 0.72, 0.33]);
        let s = generate_summary("p", &arts, &SummaryOptions::default()).unwrap();
        assert_eq!(s.entries.len(), 1);
        assert_eq!(s.entries[0].sentence_id, sid(1));
        assert!((s.entries[0].score - 0.72).abs() < 1e-12);
    }

    #[test]
    fn all_discarded_gives_empty_summary() {
        let mut a = art(0, 2, 0, 0.5, 0.5, 0.0, 0.5);
        a.assignment.discarded = true;
        let s = generate_summary("p", &[a], &SummaryOptions::default()).unwrap();
        assert!(s.entries.is_empty());
        assert_eq!(s.k_used, 0);
        assert_eq!(s.render_text(), "");
    }

    #[test]
    fn ties_fall_back_to_p_then_id() {
        // (0.4 + 0.6) * 0.5 == (0.6 + 0.4) * 0.5
        let arts = vec![art(5, 2, 1, 0.4, 0.6, 0.0, 0.5), art(3, 2, 1, 0.6, 0.4, 0.0, 0.5)];
        let s = generate_summary("p", &arts, &SummaryOptions::default()).unwrap();
        assert_eq!(s.entries[0].sentence_id, sid(3));
        let arts = vec![art(5, 2, 1, 0.5, 0.5, 0.0, 0.5), art(3, 2, 1, 0.5, 0.5, 0.0, 0.5)];
        let s = generate_summary("p", &arts, &SummaryOptions::default()).unwrap();
        assert_eq!(s.entries[0].sentence_id, sid(3));
    }

    #[test]
    fn topic_weights_rescale_p() {
        let arts = vec![art(0, 2, 0, 0.8, 0.5, 0.0, 1.0), art(1, 2, 1, 0.8, 0.5, 0.0, 1.0)];
        let opts = SummaryOptions {
            k: 5,
            topic_weights: Some(vec![0.5, 1.0]),
        };
        let s = generate_summary("p", &arts, &opts).unwrap();
        assert!((s.entries[0].score - 0.9).abs() < 1e-12);
        let short = SummaryOptions {
            k: 5,
            topic_weights: Some(vec![1.0]),
        };
        assert!(generate_summary("p", &arts, &short).is_err());
    }

    #[test]
    fn alignment_of_identical_and_disjoint_topics() {
        let review = LdaModel::from_parts(
            ModelTag::Review,
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![0.5, 0.5, 0.0], vec![0.0, 0.0, 1.0]],
            1.0,
            0.1,
            0,
        )
        .unwrap();
        let summary = LdaModel::from_parts(
            ModelTag::Summary,
            vec!["a".into(), "b".into(), "z".into()],
            vec![vec![0.5, 0.5, 0.0], vec![0.0, 0.0, 1.0]],
            1.0,
            0.1,
            0,
        )
        .unwrap();
        let w = topic_alignment(&review, &summary);
        assert!((w[0] - 1.0).abs() < 1e-12);
        assert_eq!(w[1], 0.0);
    }

    /// Scores every (topic, sentence) pair and keeps, for each salient
    /// topic, the best pair under the documented tie order.
    fn brute_force(arts: &[SentenceArtifacts], k: usize) -> Vec<(usize, SentenceId)> {
        let n_topics = arts[0].assignment.probs.len();
        let mut counts = vec![0usize; n_topics];
        for a in arts {
            counts[a.assignment.top_topic] += 1;
        }
        let mut order: Vec<usize> = (0..n_topics).filter(|&t| counts[t] > 0).collect();
        order.sort_by_key(|&t| (std::cmp::Reverse(counts[t]), t));
        order.truncate(k);
        let mut out = Vec::new();
        for t in order {
            let members: Vec<&SentenceArtifacts> = arts.iter().filter(|a| a.assignment.top_topic == t).collect();
            let pos = members.iter().filter(|a| a.sentiment.ps >= a.sentiment.ns).count();
            let positive = 2 * pos >= members.len();
            let mut pairs: Vec<(f64, f64, SentenceId)> = members
                .iter()
                .map(|a| {
                    let op = if positive { a.sentiment.ps } else { a.sentiment.ns };
                    ((a.assignment.top_prob + op) * a.style.sl, a.assignment.top_prob, a.id.clone())
                })
                .collect();
            pairs.sort_by(|x, y| y.0.total_cmp(&x.0).then(y.1.total_cmp(&x.1)).then(x.2.cmp(&y.2)));
            out.push((t, pairs[0].2.clone()));
        }
        out
    }

    fn arb_arts() -> impl Strategy<Value = Vec<SentenceArtifacts>> {
        proptest::collection::vec(
            (0usize..4, 0.26f64..1.0, 0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0),
            1..=20,
        )
        .prop_map(|rows| {
            rows.into_iter()
                .enumerate()
                .map(|(i, (t, p, pos, neg, sl))| {
                    let total = pos + neg;
                    let (ps, ns) = if total > 0.0 { (pos / total, neg / total) } else { (0.0, 0.0) };
                    art(i, 4, t, p, ps, ns, sl)
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn matches_exhaustive_scorer(arts in arb_arts(), k in 1usize..6) {
            let s = generate_summary("p", &arts, &SummaryOptions { k, topic_weights: None }).unwrap();
            let got: Vec<(usize, SentenceId)> = s.entries.iter().map(|e| (e.topic, e.sentence_id.clone())).collect();
            prop_assert_eq!(got, brute_force(&arts, k));
            prop_assert!(s.entries.len() <= k);
        }

        #[test]
        fn selection_invariant_to_common_sl_scale(arts in arb_arts(), c in 0.05f64..1.0) {
            let base = generate_summary("p", &arts, &SummaryOptions::default()).unwrap();
            let scaled: Vec<SentenceArtifacts> = arts
                .iter()
                .cloned()
                .map(|mut a| { a.style.sl *= c; a })
                .collect();
            let again = generate_summary("p", &scaled, &SummaryOptions::default()).unwrap();
            let ids = |s: &ProductSummary| s.entries.iter().map(|e| e.sentence_id.clone()).collect::<Vec<_>>();
            prop_assert_eq!(ids(&base), ids(&again));
        }
    }
}
