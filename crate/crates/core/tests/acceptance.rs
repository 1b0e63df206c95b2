//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Criterion 10 needs the Amazon-Cnet dataset, which is not distributed.
//! Point `REVSUM_AMAZON_CNET` at its JSON Lines file to run it.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use revsum::assets::TextAssets;
use revsum::corpus::{dataset_stats, load_dataset};
use revsum::evalrouge::{rouge_n, rouge_n_tokens, RougeOptions, RougeVariant};
use revsum::pipeline::{run_pipeline, PipelineConfig};
use revsum::preprocess::{porter_stem, split_sentences, CombinedDoc};
use revsum::sentiment::{score_sentence, SentimentLexicon};
use revsum::style::{style_features, train_style_model};
use revsum::summarize::{generate_summary, sentence_score, SentenceArtifacts, SummaryOptions};
use revsum::topics::{choose_k, perplexity, select_k, train_lda, AlphaRule, KCandidate, KSweep, LdaModel, LdaParams, ModelTag};

type Criterion = (&'static str, fn() -> Outcome);

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn rouge_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let alphabet = ["a", "b", "c", "d", "e"];
    let mut mismatches = 0;
    for _ in 0..200 {
        let cand = random_tokens(&mut rng, &alphabet, 10, 0);
        let reference = random_tokens(&mut rng, &alphabet, 10, 1);
        for n in [1, 2] {
            let got = rouge_n_tokens(&cand, &reference, n).unwrap();
            let (m, c, r) = greedy_ngram_matches(&cand, &reference, n);
            if (got.precision, got.recall, got.f1) != prf(m, c, r) {
                mismatches += 1;
            }
        }
    }
    let raw = RougeOptions { stem: false, drop_stopwords: false };
    let ex = rouge_n("the cat sat down", "the cat sat up", 1, raw, &TextAssets::builtin()).unwrap();
    let example_ok = (ex.precision, ex.recall, ex.f1) == (0.75, 0.75, 0.75);
    let secs = start.elapsed().as_secs_f64();
    check(
        mismatches == 0 && example_ok && secs < 5.0,
        format!("{mismatches} mismatches over 400 comparisons, example ok={example_ok}, {secs:.2}s"),
    )
}

fn porter_reference() -> Outcome {
    let text = include_str!("data/porter_reference.tsv");
    let mut total = 0;
    let mut wrong = 0;
    for line in text.lines() {
        let (word, stem) = line.split_once('\t').unwrap();
        total += 1;
        if porter_stem(word) != stem {
            wrong += 1;
        }
    }
    check(total >= 1000 && wrong == 0, format!("{} of {total} words match", total - wrong))
}

fn lda_planted_partition() -> Outcome {
    let start = Instant::now();
    let (docs, _) = planted_corpus(2, 50, 20, 40, 11);
    let params = LdaParams { seed: 5, ..LdaParams::new(2) };
    let a = train_lda(&docs, &params, ModelTag::Review).unwrap();
    let b = train_lda(&docs, &params, ModelTag::Review).unwrap();
    let purity = matched_purity(&a, 2, 10);
    let secs = start.elapsed().as_secs_f64();
    check(
        purity >= 0.9 && a == b && secs < 30.0,
        format!("purity {purity:.3}, identical={}, {secs:.2}s", a == b),
    )
}

fn perplexity_closed_forms() -> Outcome {
    let v = 37;
    let vocab: Vec<String> = (0..v).map(|i| format!("w{i:02}")).collect();
    let uniform = LdaModel::from_parts(ModelTag::Review, vocab.clone(), vec![vec![1.0 / v as f64; v]; 3], 0.5, 0.01, 1).unwrap();
    let doc = CombinedDoc {
        noun_key: "d".into(),
        member_ids: Vec::new(),
        bag: vocab.iter().take(20).map(|w| (w.clone(), 3)).collect(),
    };
    let p_uniform = perplexity(&uniform, &[&doc]).unwrap();

    let mut row = vec![0.0; v];
    row[4] = 1.0;
    let one_hot = LdaModel::from_parts(ModelTag::Review, vocab.clone(), vec![row], 0.5, 0.01, 1).unwrap();
    let repeated = CombinedDoc {
        noun_key: "r".into(),
        member_ids: Vec::new(),
        bag: [(vocab[4].clone(), 12)].into_iter().collect(),
    };
    let p_one = perplexity(&one_hot, &[&repeated]).unwrap();
    check(
        (p_uniform - v as f64).abs() <= 1e-6 && (p_one - 1.0).abs() <= 1e-6,
        format!("uniform {p_uniform:.9} (V={v}), one-hot {p_one:.9}"),
    )
}

fn k_selection() -> Outcome {
    let cands = |xs: &[(usize, f64)]| -> Vec<KCandidate> {
        xs.iter()
            .map(|&(k, p)| KCandidate {
                k,
                train_log_likelihood: 0.0,
                heldout_perplexity: p,
            })
            .collect()
    };
    let argmin = choose_k(&cands(&[(5, 210.0), (10, 180.0), (15, 195.0)])) == Some(10);
    let tie = choose_k(&cands(&[(20, 150.0), (10, 150.0)])) == Some(10);
    let (docs, _) = planted_corpus(3, 40, 15, 40, 3);
    let sweep = KSweep {
        seed: 9,
        alpha: AlphaRule::Fixed(0.1),
        ..KSweep::range(2, 8, 1)
    };
    let chosen = select_k(&docs, &sweep).unwrap().chosen_k;
    check(
        argmin && tie && [3, 4].contains(&chosen),
        format!("argmin={argmin}, tie={tie}, planted corpus chose K={chosen}"),
    )
}

fn style_ensemble() -> Outcome {
    let summary_words = ["excellent", "solid", "overall", "design", "superb", "compact", "sharp", "reliable"];
    let review_words = ["i", "my", "me", "bought", "wife", "returned", "lol", "honestly"];
    let shared = ["the", "battery", "screen", "and", "phone"];
    let corpus = |n: usize, words: &[&str], seed: u64| -> Vec<Vec<String>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let len = rng.gen_range(4..12);
                let t: Vec<String> = (0..len)
                    .map(|_| {
                        if rng.gen_bool(0.7) {
                            words[rng.gen_range(0..words.len())].to_string()
                        } else {
                            shared[rng.gen_range(0..shared.len())].to_string()
                        }
                    })
                    .collect();
                style_features(&t)
            })
            .collect()
    };
    let mut splits_ok = true;
    for (ns, nr, expected) in [(100, 1000, 10), (100, 100, 1), (30, 31, 2), (7, 50, 8), (300, 20, 15)] {
        let m = train_style_model(&corpus(ns, &summary_words, 1), &corpus(nr, &review_words, 2), 3).unwrap();
        splits_ok &= m.n_splits == expected;
    }
    let s = corpus(120, &summary_words, 10);
    let r = corpus(900, &review_words, 11);
    let model = train_style_model(&s[..100], &r[..750], 4).unwrap();
    let mut correct = 0;
    for d in &s[100..] {
        correct += usize::from(model.score_features(d).sl >= 0.5);
    }
    for d in &r[750..] {
        correct += usize::from(model.score_features(d).sl < 0.5);
    }
    let accuracy = correct as f64 / 170.0;
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let pool: Vec<&str> = summary_words.iter().chain(&review_words).chain(&shared).copied().collect();
    let fuzz_ok = (0..1000).all(|i| {
        let len = rng.gen_range(0..40);
        let t: Vec<String> = (0..len)
            .map(|j| {
                if rng.gen_bool(0.2) {
                    format!("unseen{i}x{j}")
                } else {
                    pool[rng.gen_range(0..pool.len())].to_string()
                }
            })
            .collect();
        (0.0..=1.0).contains(&model.score_features(&style_features(&t)).sl)
    });
    check(
        splits_ok && accuracy >= 0.9 && fuzz_ok,
        format!("split counts ok={splits_ok}, held-out accuracy {accuracy:.3}, SL in [0,1] for 1000 fuzzed={fuzz_ok}"),
    )
}

fn sentiment() -> Outcome {
    let lexicon_text = include_str!("data/test_lexicon.txt");
    let lex = SentimentLexicon::parse(
        lexicon_text,
        include_str!("data/test_negators.txt"),
        include_str!("data/test_boosters.txt"),
    )
    .unwrap();
    let mirror = lex.mirrored();
    let words: Vec<&str> = lexicon_text
        .lines()
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.split('\t').next().unwrap())
        .collect();
    let toks = |s: &str| -> Vec<String> { s.split_whitespace().map(str::to_string).collect() };
    let mut swapped = true;
    for w in &words {
        for s in [w.to_string(), format!("not {w}"), format!("very {w}"), format!("it is not very {w}")] {
            let a = score_sentence(&toks(&s), &lex);
            let b = score_sentence(&toks(&s), &mirror);
            swapped &= (a.ps, a.ns) == (b.ns, b.ps);
        }
    }
    let not_good = score_sentence(&toks("not good"), &lex);
    let none = score_sentence(&toks("the phone has a screen"), &lex);
    check(
        swapped && not_good.ns > not_good.ps && (none.ps, none.ns) == (0.0, 0.0),
        format!(
            "swap over {} entries={swapped}, \"not good\" ps={:.3} ns={:.3}, no-hit ({}, {})",
            words.len(),
            not_good.ps,
            not_good.ns,
            none.ps,
            none.ns
        ),
    )
}

fn score_formula() -> Outcome {
    let example = sentence_score(0.6, 0.4, 0.5).unwrap() == 0.5;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut monotone = true;
    for _ in 0..1000 {
        let x = [rng.gen_range(0.01..0.9), rng.gen_range(0.01..0.9), rng.gen_range(0.01..0.9)];
        let base = sentence_score(x[0], x[1], x[2]).unwrap();
        for i in 0..3 {
            let mut y = x;
            y[i] += rng.gen_range(0.001..0.1);
            monotone &= sentence_score(y[0], y[1], y[2]).unwrap() > base;
        }
    }
    let options = SummaryOptions::default();
    let mut invariant = true;
    for round in 0..200 {
        let arts: Vec<SentenceArtifacts> = (0..rng.gen_range(1..15))
            .map(|i| {
                let p: f64 = rng.gen_range(0.34..1.0);
                let topic = rng.gen_range(0..3);
                let ps: f64 = rng.gen_range(0.0..1.0);
                let sl: f64 = rng.gen_range(0.05..1.0);
                let json = serde_json::json!({
                    "id": {"product_id": "p", "source": "review", "doc_index": i, "sent_index": round},
                    "raw_text": format!("s{i}"),
                    "assignment": {
                        "sentence_id": {"product_id": "p", "source": "review", "doc_index": i, "sent_index": round},
                        "probs": (0..3).map(|t| if t == topic { p } else { (1.0 - p) / 2.0 }).collect::<Vec<_>>(),
                        "top_topic": topic, "top_prob": p, "discarded": false
                    },
                    "sentiment": {"ps": ps, "ns": 1.0 - ps, "polarity": if ps >= 0.5 { "positive" } else { "negative" }, "neutral": false},
                    "style": {"sl": sl}
                });
                serde_json::from_value(json).unwrap()
            })
            .collect();
        let c = rng.gen_range(0.05..1.0);
        let scaled: Vec<SentenceArtifacts> = arts
            .iter()
            .cloned()
            .map(|mut a| {
                a.style.sl *= c;
                a
            })
            .collect();
        let pick = |xs: &[SentenceArtifacts]| {
            generate_summary("p", xs, &options)
                .unwrap()
                .entries
                .into_iter()
                .map(|e| (e.topic, e.sentence_id))
                .collect::<Vec<_>>()
        };
        invariant &= pick(&arts) == pick(&scaled);
    }
    check(
        example && monotone && invariant,
        format!("example={example}, monotone over 1000 triples={monotone}, SL-scaling invariance={invariant}"),
    )
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn summary_files(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    out.insert(PathBuf::from("summaries.jsonl"), fs::read(dir.join("summaries.jsonl")).unwrap());
    for e in fs::read_dir(dir.join("summaries")).unwrap() {
        let p = e.unwrap().path();
        out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap());
    }
    out
}

fn end_to_end_determinism() -> Outcome {
    let start = Instant::now();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let mut c = PipelineConfig::default();
        c.apply_file(&fixture("fixture.conf")).unwrap();
        c.output_dir = d.path().to_path_buf();
        run_pipeline(c).unwrap();
    }
    let a = summary_files(dirs[0].path());
    let b = summary_files(dirs[1].path());
    let secs = start.elapsed().as_secs_f64();
    check(
        a == b && a.len() == 5 && secs < 120.0,
        format!("{} summary files byte-identical={}, {secs:.2}s", a.len(), a == b),
    )
}

const TABLE1: (usize, usize, usize, usize) = (1028, 1385, 66129, 362965);

fn paper_dataset() -> Outcome {
    let Some(path) = std::env::var_os("REVSUM_AMAZON_CNET") else {
        return Outcome::Skip("REVSUM_AMAZON_CNET not set; dataset not distributed".into());
    };
    let path = PathBuf::from(path);
    let dataset = load_dataset(&path).unwrap().dataset;
    let s = dataset_stats(&dataset, split_sentences);
    let within = |got: usize, want: usize| (got as f64 - want as f64).abs() <= 0.02 * want as f64;
    let counts_ok = s.n_summaries == TABLE1.0
        && s.n_summary_sentences == TABLE1.1
        && s.n_reviews == TABLE1.2
        && within(s.n_review_sentences, TABLE1.3);
    let out = tempfile::tempdir().unwrap();
    let c = PipelineConfig {
        dataset_path: Some(path),
        output_dir: out.path().to_path_buf(),
        ..PipelineConfig::default()
    };
    let report = run_pipeline(c).unwrap().evaluation.unwrap();
    let r1 = report.macro_average.iter().find(|s| s.variant == RougeVariant::Rouge1).unwrap();
    check(
        counts_ok,
        format!(
            "summaries {} / sentences {}, reviews {} / sentences {}; ROUGE-1 P={:.2}% R={:.2}% F={:.2}% (reported 15.43%)",
            s.n_summaries,
            s.n_summary_sentences,
            s.n_reviews,
            s.n_review_sentences,
            100.0 * r1.precision,
            100.0 * r1.recall,
            100.0 * r1.f1
        ),
    )
}

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 10] = [
        ("1  ROUGE-N equals exhaustive enumeration", rouge_oracle),
        ("2  Porter stemmer reference vocabulary", porter_reference),
        ("3  LDA planted two-vocabulary partition", lda_planted_partition),
        ("4  perplexity closed forms", perplexity_closed_forms),
        ("5  K selection", k_selection),
        ("6  style ensemble", style_ensemble),
        ("7  sentiment sign symmetry", sentiment),
        ("8  score formula", score_formula),
        ("9  end-to-end determinism", end_to_end_determinism),
        ("10 Amazon-Cnet statistics and ROUGE-1", paper_dataset),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::Fail(format!("panicked: {msg}"))
        });
        match outcome {
            Outcome::Pass(d) => println!("PASS  {name}: {d}"),
            Outcome::Skip(d) => println!("SKIP  {name}: {d}"),
            Outcome::Fail(d) => {
                println!("FAIL  {name}: {d}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed: {failed:?}");
}
