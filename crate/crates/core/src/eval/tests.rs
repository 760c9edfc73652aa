use super::*;
use crate::chain::{ProbeValue, Status};
use crate::prompts::ProbeMode;
use proptest::prelude::*;

fn golds(s: &[&str]) -> Vec<String> {
    s.iter().map(|x| x.to_string()).collect()
}

#[test]
fn f1_identity_and_disjoint() {
    assert_eq!(token_f1("within 10 days", &golds(&["within 10 days"])), 1.0);
    assert_eq!(token_f1("yes", &golds(&["no"])), 0.0);
}

#[test]
fn f1_partial_overlap_is_four_ninths() {
    let f = token_f1("10 days", &golds(&["within 10 days of receiving your application"]));
    assert_eq!(f, 4.0 / 9.0);
}

#[test]
fn f1_takes_best_gold_and_ignores_articles() {
    let g = golds(&["the council", "a tax credit"]);
    assert_eq!(token_f1("Tax credit.", &g), 1.0);
    assert_eq!(token_f1("", &golds(&["the"])), 1.0);
    assert_eq!(token_f1("", &golds(&["x"])), 0.0);
    assert_eq!(token_f1("x", &[]), 0.0);
}

#[test]
fn normalization_is_stable() {
    assert_eq!(normalize_answer("  The  Council's  DECISION!  "), "council s decision");
    assert_eq!(NORMALIZATION_VERSION, "squad-v1");
}

#[test]
fn macro_f1_examples() {
    use AnswerClass::*;
    let all = [Yes, No, NotEnoughInfo];
    let p: Vec<_> = all.iter().map(|c| Some(*c)).collect();
    assert_eq!(macro_f1(&p, &all).unwrap(), 1.0);
    // [[1,1],[1,1]]: one of each gold class right, one wrong.
    let golds = [Yes, Yes, No, No];
    let preds = [Some(Yes), Some(No), Some(Yes), Some(No)];
    assert_eq!(macro_f1(&preds, &golds).unwrap(), 0.5);
    assert_eq!(macro_f1(&[], &[]), Err(EvalError::Empty));
    assert!(matches!(macro_f1(&[Some(Yes)], &[Yes, No]), Err(EvalError::LengthMismatch { .. })));
}

#[test]
fn macro_f1_unparsed_counts_as_miss() {
    use AnswerClass::*;
    let f = macro_f1(&[None, Some(No)], &[Yes, No]).unwrap();
    assert_eq!(f, 0.5);
}

#[test]
fn confusion_examples() {
    use AnswerClass::*;
    let golds: Vec<_> = [Yes, No, NotEnoughInfo].iter().flat_map(|c| [*c; 3]).collect();
    let preds: Vec<_> = golds.iter().map(|c| Some(*c)).collect();
    let m = confusion_matrix(DatasetKind::Bgqa1, &preds, &golds).unwrap();
    assert_eq!(m.counts, [[3, 0, 0, 0], [0, 3, 0, 0], [0, 0, 3, 0]]);

    let nei = vec![Some(NotEnoughInfo); 9];
    let m = confusion_matrix(DatasetKind::Sharc, &nei, &golds).unwrap();
    for row in m.counts {
        assert_eq!(row, [0, 0, 3, 0]);
    }
    assert_eq!(m.total(), 9);
    assert!(m.to_csv().starts_with("gold\\predicted,yes,no,not enough information,unparsed\n"));

    assert_eq!(
        confusion_matrix(DatasetKind::CondQa, &preds, &golds),
        Err(EvalError::SpanTask(DatasetKind::CondQa))
    );
}

#[test]
fn extraction_marker_and_fallback() {
    let p = extract_from_reply("i", "Alice is big.\nAnswer: yes", DatasetKind::Bgqa1, PromptKind::Text);
    assert_eq!(p.predicted, Predicted::Class(AnswerClass::Yes));
    assert_eq!(p.method, Extraction::Marker);

    let p = extract_from_reply("i", "x is True\n#Answer: no", DatasetKind::Bgqa2, PromptKind::CodeAnswer);
    assert_eq!(p.predicted, Predicted::Class(AnswerClass::No));

    let p = extract_from_reply(
        "i",
        "The rule needs both conditions, so the answer is no",
        DatasetKind::Bgqa3,
        PromptKind::Text,
    );
    assert_eq!(p.predicted, Predicted::Class(AnswerClass::No));
    assert_eq!(p.method, Extraction::Fallback);

    let p = extract_from_reply("i", "I cannot tell.", DatasetKind::Bgqa1, PromptKind::Text);
    assert_eq!(p.predicted, Predicted::Unknown);
    assert_eq!(p.method, Extraction::None);
}

#[test]
fn extraction_sharc() {
    for (reply, class) in [
        ("True", AnswerClass::Yes),
        ("False", AnswerClass::No),
        ("None", AnswerClass::NotEnoughInfo),
        ("can_apply_zero_VAT = True", AnswerClass::Yes),
        ("Irrelevant", AnswerClass::NotEnoughInfo),
    ] {
        let p = extract_from_reply("i", reply, DatasetKind::Sharc, PromptKind::CodeAnswer);
        assert_eq!(p.predicted, Predicted::Class(class), "{reply}");
    }
    let p = extract_from_reply("i", "Yes", DatasetKind::Sharc, PromptKind::Text);
    assert_eq!(p.predicted, Predicted::Class(AnswerClass::Yes));
}

#[test]
fn extraction_span() {
    let p = extract_from_reply(
        "i",
        "You are eligible.\nAnswer: within 10 days",
        DatasetKind::CondQa,
        PromptKind::Text,
    );
    assert_eq!(p.predicted, Predicted::Span("within 10 days".into()));
    let p = extract_from_reply("i", "reasoning\nAnswer: Yes", DatasetKind::CondQa, PromptKind::Text);
    assert_eq!(p.predicted, Predicted::Class(AnswerClass::Yes));
    let p = extract_from_reply("i", "some reasoning\n£120", DatasetKind::CondQa, PromptKind::Text);
    assert_eq!(p.predicted, Predicted::Span("£120".into()));
    assert_eq!(p.method, Extraction::WholeReply);
}

fn instance(id: &str, dataset: DatasetKind, class: AnswerClass, gold: &str) -> Instance {
    Instance {
        id: id.into(),
        dataset,
        question: "q?".into(),
        scenario: String::new(),
        document: Vec::new(),
        history: Vec::new(),
        gold_answers: vec![gold.into()],
        gold_cot: String::new(),
        answer_class: class,
        rationale_ids: Vec::new(),
        source_text: String::new(),
        facts: Vec::new(),
    }
}

fn transcript(id: &str, dataset: DatasetKind, status: Status, reply: &str) -> Transcript {
    Transcript {
        instance_id: id.into(),
        dataset,
        kind: PromptKind::Text,
        seed: 0,
        status,
        exchanges: Vec::new(),
        generated_code: None,
        code_diagnostics: Vec::new(),
        cot_text: String::new(),
        cot_steps: Vec::new(),
        raw_answer_text: reply.into(),
    }
}

fn key(dataset: DatasetKind) -> CellKey {
    CellKey {
        model: "m".into(),
        dataset,
        kind: PromptKind::Text,
        seed: 0,
    }
}

#[test]
fn evaluate_counts_failures_and_drops_skips() {
    let d = DatasetKind::Bgqa1;
    let golds: BTreeMap<String, Instance> = [
        instance("a", d, AnswerClass::Yes, "yes"),
        instance("b", d, AnswerClass::No, "no"),
        instance("c", d, AnswerClass::No, "no"),
    ]
    .into_iter()
    .map(|i| (i.id.clone(), i))
    .collect();
    let ts = vec![
        transcript("a", d, Status::Ok, "Answer: yes"),
        transcript(
            "b",
            d,
            Status::Failed {
                category: "transport".into(),
                message: "down".into(),
            },
            "",
        ),
        transcript("c", d, Status::Skipped { reason: "n/a".into() }, ""),
    ];
    let r = evaluate(&key(d), &ts, &golds, 0.5, 0.25).unwrap();
    assert_eq!((r.failed, r.skipped, r.scores.len()), (1, 1, 2));
    assert_eq!(r.confusion.as_ref().unwrap().total(), 2);
    // yes: tp 1 -> 1.0; no: fn 1 -> 0.0
    assert_eq!(r.headline, 50.0);
    assert_eq!(r.cost, 0.25);
}

#[test]
fn evaluate_span_task_is_mean_f1() {
    let d = DatasetKind::CondQa;
    let golds: BTreeMap<String, Instance> = [
        instance("a", d, AnswerClass::Span, "within 10 days of receiving your application"),
        instance("b", d, AnswerClass::Yes, "yes"),
    ]
    .into_iter()
    .map(|i| (i.id.clone(), i))
    .collect();
    let ts = vec![
        transcript("a", d, Status::Ok, "Answer: 10 days"),
        transcript("b", d, Status::Ok, "Answer: yes"),
    ];
    let r = evaluate(&key(d), &ts, &golds, 0.5, 0.0).unwrap();
    assert!(r.confusion.is_none());
    assert!((r.headline - 100.0 * (4.0 / 9.0 + 1.0) / 2.0).abs() < 1e-12);
    assert!(!r.scores[0].correct);
    assert!(r.scores[1].correct);
}

fn report(model: &str, dataset: DatasetKind, kind: PromptKind, seed: u64, headline: f64) -> EvalReport {
    EvalReport {
        schema: REPORT_SCHEMA,
        model: model.into(),
        dataset,
        kind,
        seed,
        scores: Vec::new(),
        headline,
        confusion: None,
        cost: 0.0,
        failed: 0,
        skipped: 0,
    }
}

const D: [DatasetKind; 5] = DatasetKind::ALL;

/// Per-dataset text/code test-set values for GPT 3.5, Mixtral and Mistral.
const TEST: [(&str, [f64; 5], [f64; 5], f64); 3] = [
    ("gpt", [58.70, 62.95, 51.15, 37.42, 27.77], [60.60, 54.98, 58.67, 55.56, 50.29], 8.42),
    ("mixtral", [48.17, 53.77, 56.38, 39.64, 30.15], [44.73, 59.06, 53.33, 47.39, 44.72], 4.22),
    ("mistral", [35.74, 43.60, 47.40, 48.78, 47.86], [33.28, 49.92, 53.80, 51.27, 48.79], 2.74),
];

#[test]
fn delta_cp_from_test_table() {
    let mut reports = Vec::new();
    for (m, text, code, _) in TEST {
        for i in 0..5 {
            assert_eq!(D[i], DatasetKind::ALL[i]);
            reports.push(report(m, D[i], PromptKind::Text, 0, text[i]));
            reports.push(report(m, D[i], PromptKind::CodeAnswer, 0, code[i]));
        }
    }
    let s = aggregate_runs(&reports).unwrap();
    for (m, _, _, want) in TEST {
        assert!((s.delta_cp[m] - want).abs() <= 0.01, "{m}: {}", s.delta_cp[m]);
    }
    assert!(s.cells.iter().all(|c| c.std == 0.0));
}

#[test]
fn two_seeds_give_population_std() {
    let d = DatasetKind::Bgqa1;
    let s = aggregate_runs(&[
        report("m", d, PromptKind::Text, 0, 40.0),
        report("m", d, PromptKind::Text, 1, 44.0),
    ])
    .unwrap();
    let c = s.cell("m", d, PromptKind::Text).unwrap();
    assert_eq!((c.mean, c.std, c.seeds.clone()), (42.0, 2.0, vec![0, 1]));
    assert!(s.delta_cp.is_empty());
}

#[test]
fn aggregation_errors() {
    let r = report("m", DatasetKind::Bgqa1, PromptKind::Text, 0, 1.0);
    assert!(matches!(
        aggregate_runs(&[r.clone(), r.clone()]),
        Err(EvalError::DuplicateReport(_))
    ));
    let mut old = r.clone();
    old.schema = 0;
    assert_eq!(
        aggregate_runs(&[old]),
        Err(EvalError::Schema {
            found: 0,
            expected: REPORT_SCHEMA
        })
    );
    let code_only_other = report("m", DatasetKind::Bgqa2, PromptKind::CodeAnswer, 0, 1.0);
    assert!(matches!(
        aggregate_runs(&[r, code_only_other]),
        Err(EvalError::DatasetMismatch { .. })
    ));
}

#[test]
fn ablation_deltas_are_relative_to_code() {
    let d = DatasetKind::Bgqa3;
    let s = aggregate_runs(&[
        report("m", d, PromptKind::CodeAnswer, 0, 50.0),
        report("m", d, PromptKind::AtomicStatements, 0, 30.74),
    ])
    .unwrap();
    let deltas = s.ablation_deltas();
    assert_eq!(deltas.len(), 1);
    assert!((deltas[0].3 + 19.26).abs() < 1e-9);
    let (h, rows) = ablation_grid(&s);
    assert_eq!(h, vec!["model", "ablation", "bgqa-3"]);
    assert_eq!(rows[0][2], "-19.26");
}

fn probe(correct: bool, error: bool, mode: ProbeMode) -> ProbeResult {
    ProbeResult {
        instance_id: "i".into(),
        step_index: 0,
        target: "t".into(),
        expected: ProbeValue::True,
        reply_raw: String::new(),
        reply_norm: String::new(),
        is_error: error,
        mode,
        answer_correct: correct,
    }
}

#[test]
fn memory_error_examples() {
    let mut rs: Vec<ProbeResult> = (0..8).map(|i| probe(true, i < 2, ProbeMode::Text)).collect();
    assert_eq!(memory_error_rate(&rs, Partition::Correct), Some(25.0));
    assert_eq!(memory_error_rate(&rs, Partition::Incorrect), None);
    assert_eq!(memory_error_rate(&[], Partition::Correct), None);
    rs.push(probe(false, true, ProbeMode::Text));
    assert_eq!(memory_error_rate(&rs, Partition::Incorrect), Some(100.0));
}

#[test]
fn memory_error_grid_layout() {
    let d = DatasetKind::Bgqa1;
    let text: Vec<_> = (0..4).map(|i| probe(i % 2 == 0, i == 0, ProbeMode::Text)).collect();
    let code: Vec<_> = (0..4).map(|i| probe(i % 2 == 0, false, ProbeMode::Code)).collect();
    let rows = memory_error_rows(&[(d, ProbeMode::Text, text), (d, ProbeMode::Code, code)]);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].text_correct, Some(50.0));
    assert_eq!(rows[0].text_incorrect, Some(0.0));
    assert_eq!(rows[0].code_correct, Some(0.0));
    let (h, body) = memory_error_grid(&rows);
    assert_eq!(
        h,
        vec!["dataset", "correct/text", "correct/code", "incorrect/text", "incorrect/code", "probes"]
    );
    assert_eq!(body[0], vec!["bgqa-1", "50.0", "0.0", "0.0", "0.0", "8"]);
}

#[test]
fn score_grid_and_rendering() {
    let d = DatasetKind::Bgqa2;
    let s = aggregate_runs(&[
        report("m", d, PromptKind::Text, 0, 30.0),
        report("m", d, PromptKind::Text, 1, 32.0),
        report("m", d, PromptKind::CodeAnswer, 0, 40.0),
        report("m", d, PromptKind::CodeAnswer, 1, 40.0),
    ])
    .unwrap();
    let (h, rows) = score_grid(&s);
    assert_eq!(h.last().unwrap(), "ΔCP");
    assert_eq!(rows[0], vec!["m", "text", "31.00 ± 1.00", "+9.00"]);
    assert_eq!(rows[1], vec!["m", "code", "40.00 ± 0.00", ""]);
    let t = aligned(&h, &rows);
    assert_eq!(t.lines().count(), 4);
    let c = csv(&h, &rows);
    assert!(c.starts_with("model,kind,bgqa-2,ΔCP\n"));
    assert_eq!(csv(&["a,b".into()], &[]), "\"a,b\"\n");
}

#[test]
fn cost_rows() {
    let r = CostRow {
        dataset: DatasetKind::CondQa,
        kind: PromptKind::CodeAnswer,
        questions: 4,
        total: 0.16,
    };
    assert!((r.per_question() - 0.04).abs() < 1e-12);
    let (_, body) = cost_grid(&[r]);
    assert_eq!(body[0][4], "0.0400");
}

// Independent oracles.

const PUNCT: &str = "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~";

fn oracle_tokens(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in s.chars() {
        if ch.is_whitespace() || PUNCT.contains(ch) {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
        } else {
            cur.extend(ch.to_lowercase());
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out.retain(|t| t != "a" && t != "an" && t != "the");
    out
}

fn oracle_f1(pred: &str, golds: &[String]) -> f64 {
    let p = oracle_tokens(pred);
    let mut best = 0.0f64;
    for g in golds {
        let mut pool = oracle_tokens(g);
        let glen = pool.len();
        let f = if p.is_empty() && glen == 0 {
            1.0
        } else {
            let mut common = 0;
            for t in &p {
                if let Some(pos) = pool.iter().position(|x| x == t) {
                    pool.remove(pos);
                    common += 1;
                }
            }
            if p.is_empty() || glen == 0 {
                0.0
            } else {
                let (pr, rc) = (common as f64 / p.len() as f64, common as f64 / glen as f64);
                if common == 0 { 0.0 } else { 2.0 * pr * rc / (pr + rc) }
            }
        };
        best = best.max(f);
    }
    best
}

fn oracle_macro(preds: &[Option<AnswerClass>], golds: &[AnswerClass]) -> f64 {
    let mut classes: Vec<AnswerClass> = golds.to_vec();
    classes.extend(preds.iter().flatten());
    classes.sort();
    classes.dedup();
    let mut total = 0.0;
    for c in &classes {
        let tp = preds.iter().zip(golds).filter(|(p, g)| **p == Some(*c) && *g == c).count() as f64;
        let predicted = preds.iter().filter(|p| **p == Some(*c)).count() as f64;
        let actual = golds.iter().filter(|g| *g == c).count() as f64;
        let prec = if predicted > 0.0 { tp / predicted } else { 0.0 };
        let rec = if actual > 0.0 { tp / actual } else { 0.0 };
        total += if prec + rec > 0.0 { 2.0 * prec * rec / (prec + rec) } else { 0.0 };
    }
    total / classes.len() as f64
}

fn phrase() -> impl Strategy<Value = String> {
    let word = prop::sample::select(vec![
        "the", "A", "an", "days", "Days", "10", "within", "tax", "credit.", "council's", "yes", "no", "£120", "x-y",
        "(if)", "",
    ]);
    prop::collection::vec(word, 0..9).prop_map(|w| w.join(" "))
}

fn class() -> impl Strategy<Value = AnswerClass> {
    prop::sample::select(vec![AnswerClass::Yes, AnswerClass::No, AnswerClass::NotEnoughInfo])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn token_f1_matches_oracle(p in phrase(), gs in prop::collection::vec(phrase(), 1..4)) {
        let a = token_f1(&p, &gs);
        let b = oracle_f1(&p, &gs);
        prop_assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn token_f1_ignores_order_and_case(p in phrase(), g in phrase()) {
        let mut words: Vec<&str> = p.split(' ').collect();
        words.reverse();
        let shuffled = words.join(" ").to_uppercase();
        let gs = vec![g];
        prop_assert!((token_f1(&p, &gs) - token_f1(&shuffled, &gs)).abs() <= 1e-12);
    }

    #[test]
    fn macro_f1_matches_oracle(
        pairs in prop::collection::vec((prop::option::weighted(0.85, class()), class()), 1..40)
    ) {
        let (preds, golds): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        let a = macro_f1(&preds, &golds).unwrap();
        let b = oracle_macro(&preds, &golds);
        prop_assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
    }

    #[test]
    fn confusion_sums_to_count(
        pairs in prop::collection::vec((prop::option::of(class()), class()), 0..40)
    ) {
        let (preds, golds): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        let m = confusion_matrix(DatasetKind::Bgqa2, &preds, &golds).unwrap();
        prop_assert_eq!(m.total(), preds.len() as u64);
    }
}
