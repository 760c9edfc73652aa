use std::path::PathBuf;
use std::sync::Arc;

use proptest::prelude::*;

use super::*;
use crate::corpus::{load_dataset, load_records, sample_demonstrations};
use crate::llm::{Policy, StubBackend, StubRule};
use crate::prompts::{ProbeMode, Step};
use crate::pseudocode::{parse, Statement};

fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

fn reference_instance(kind: DatasetKind, file: &str) -> Instance {
    let text = std::fs::read_to_string(fixture(&format!("reference/instances/{file}"))).unwrap();
    load_records(kind, &text).unwrap().remove(0)
}

fn reference_code(file: &str) -> PseudoProgram {
    let text = std::fs::read_to_string(fixture(&format!("reference/code/{file}"))).unwrap();
    parse(&text).program
}

fn client(rules: Vec<StubRule>) -> LlmClient {
    LlmClient::new(Policy::CacheFirst).with_backend(Arc::new(StubBackend::new().with_rules(rules)))
}

fn env<'a>(client: &'a LlmClient, templates: &'a Templates) -> ChainEnv<'a> {
    ChainEnv {
        client,
        templates,
        model_id: "stub-model".into(),
        strict: true,
    }
}

fn empty_cell(dataset: DatasetKind, kind: PromptKind) -> Cell {
    Cell {
        dataset,
        kind,
        seed: 0,
        text_demos: Vec::new(),
        translation_demos: Vec::new(),
        code_demos: Vec::new(),
        rewritten_demos: Vec::new(),
        donors: Vec::new(),
        exchanges: Vec::new(),
    }
}

#[test]
fn cot_steps_are_nonblank_lines() {
    assert_eq!(split_cot("a\n\nb\r\n  \nc"), vec!["a", "b", "c"]);
    assert!(split_cot("\n\n").is_empty());
}

#[test]
fn reply_splits_at_last_marker() {
    let (cot, ans) = split_reply("x\nAnswer: maybe\ny\n#Answer: no", DatasetKind::Bgqa1);
    assert_eq!(cot, "x\nAnswer: maybe\ny");
    assert_eq!(ans.as_deref(), Some("no"));
    assert_eq!(split_reply("only text", DatasetKind::CondQa), ("only text".into(), None));
    assert_eq!(split_reply(" True ", DatasetKind::Sharc), (String::new(), Some("True".into())));
}

#[test]
fn budgets_per_dataset() {
    let b = ProbeBudget::for_dataset(DatasetKind::Bgqa1);
    assert_eq!(b.max_instances, 50);
    assert_eq!(b.probe_count(6, 4), 24);
    assert_eq!(ProbeBudget::for_dataset(DatasetKind::Bgqa2).max_instances, 50);
    assert_eq!(ProbeBudget::for_dataset(DatasetKind::Bgqa3).max_instances, 20);
    let c = ProbeBudget::for_dataset(DatasetKind::CondQa);
    assert_eq!((c.max_instances, c.max_entities, c.max_steps), (30, Some(5), Some(3)));
    assert_eq!(c.probe_count(6, 8), 15);
    assert_eq!(c.probe_count(2, 1), 2);
}

#[test]
fn instance_selection_caps_each_partition() {
    let cands: Vec<(String, bool)> = (0..100).map(|i| (format!("i{i:03}"), i % 3 == 0)).collect();
    let b = ProbeBudget::for_dataset(DatasetKind::Bgqa3);
    let picked = select_probe_instances(&cands, &b, 7);
    let correct = picked.iter().filter(|id| cands.iter().any(|(c, ok)| c == *id && *ok)).count();
    assert_eq!((correct, picked.len() - correct), (20, 20));
    assert_eq!(picked, select_probe_instances(&cands, &b, 7));
    let mut sorted = picked.clone();
    sorted.sort();
    assert_eq!(sorted, picked);
}

#[test]
fn reply_normalization() {
    assert_eq!(normalize_reply("`True`."), "true");
    assert_eq!(normalize_reply("Yes"), "true");
    assert_eq!(normalize_reply("no"), "false");
    assert_eq!(normalize_reply("Not enough information"), "unknown");
    assert_eq!(normalize_reply("\"Red  Car\""), "red car");
    assert_eq!(ProbeValue::Text("Red car".into()).canonical(), "red car");
    assert_eq!(fact_phrase("The cat is red."), "the cat is red");
    assert_eq!(fact_phrase("UK residents apply."), "UK residents apply");
}

#[test]
fn partial_cot_is_newline_terminated() {
    let steps = vec!["a".to_string(), "b".to_string(), "c".to_string()];
    assert_eq!(partial_cot(&steps, 0), "a\n");
    assert_eq!(partial_cot(&steps, 1), "a\nb\n");
}

#[test]
fn code_entities_skip_question_variable() {
    let p = reference_code("bgqa_code_prompt.py");
    let q = p.question_variable.clone();
    let ents = key_entities_code(&p);
    assert!(!ents.is_empty());
    assert!(ents.iter().all(|e| Some(&e.target) != q.as_ref()));
    let mut names: Vec<&str> = ents.iter().map(|e| e.target.as_str()).collect();
    names.dedup();
    assert_eq!(names.len(), ents.len());
}

#[test]
fn bgqa_entities_are_facts() {
    let inst = reference_instance(DatasetKind::Bgqa1, "bgqa_amberjack.jsonl");
    let ents = key_entities_bgqa(&inst);
    assert_eq!(ents.len(), inst.facts.len());
    assert_eq!(ents[0].target, "the amberjack struggles to find food");
    assert_eq!(ents[0].expected, ProbeValue::True);
}

#[test]
fn anonymized_code_keeps_comments() {
    let code = reference_code("ablation_original.py");
    let shown = transform(&empty_cell(DatasetKind::CondQa, PromptKind::AnonymizedCode), "x", &code).unwrap();
    let rendered = pseudocode::render(&shown);
    assert!(rendered.contains("if var_1"), "{rendered}");
    assert!(rendered.contains("var_2 = True"));
    let original = pseudocode::render(&code);
    let comments = |s: &str| s.lines().filter(|l| l.trim_start().starts_with('#')).map(str::to_string).collect::<Vec<_>>();
    assert_eq!(comments(&rendered), comments(&original));
}

#[test]
fn no_comments_and_random_code_transforms() {
    let code = reference_code("ablation_original.py");
    let bare = transform(&empty_cell(DatasetKind::CondQa, PromptKind::NoComments), "x", &code).unwrap();
    assert!(!pseudocode::render(&bare).contains('#'));

    let mut cell = empty_cell(DatasetKind::CondQa, PromptKind::RandomCode);
    assert!(matches!(transform(&cell, "x", &code), Err(ChainError::NoDonor)));
    cell.donors = vec![reference_code("condqa_code_prompt.py")];
    let spliced = transform(&cell, "x", &code).unwrap();
    assert_eq!(spliced, transform(&cell, "x", &code).unwrap());
    let comments = |p: &PseudoProgram| {
        pseudocode::render(p)
            .lines()
            .filter(|l| l.trim_start().starts_with('#'))
            .map(str::to_string)
            .collect::<Vec<_>>()
    };
    assert_eq!(comments(&spliced), comments(&code));
}

#[test]
fn condqa_code_ablations_skip_span_questions() {
    let inst = reference_instance(DatasetKind::CondQa, "condqa_special_guardian.jsonl");
    assert!(!inst.is_yes_no());
    let c = client(Vec::new());
    let t = Templates::builtin();
    let tr = run_instance(&env(&c, &t), &empty_cell(DatasetKind::CondQa, PromptKind::NoComments), &inst);
    assert!(matches!(tr.status, Status::Skipped { .. }));
    assert!(tr.exchanges.is_empty());
    assert_eq!(c.counts().live_calls, 0);
    assert!(applies(PromptKind::CodeAnswer, &inst).is_ok());
}

#[test]
fn strict_mode_fails_broken_translation() {
    let inst = reference_instance(DatasetKind::Bgqa1, "bgqa_amberjack.jsonl");
    let rules = vec![StubRule {
        step: Some(Step::Translate),
        reply: "for x in items:\n    y = True".into(),
        ..Default::default()
    }];
    let c = client(rules);
    let t = Templates::builtin();
    let e = env(&c, &t);
    let cell = prepare_cell(&e, DatasetKind::Bgqa1, PromptKind::CodeAnswer, 0, Vec::new(), 1).unwrap();
    let tr = run_instance(&e, &cell, &inst);
    assert!(matches!(tr.status, Status::FailedTranslation { .. }), "{:?}", tr.status);
}

#[test]
fn backend_errors_become_failed_status() {
    let inst = reference_instance(DatasetKind::Bgqa1, "bgqa_amberjack.jsonl");
    let c = LlmClient::new(Policy::ReplayOnly);
    let t = Templates::builtin();
    let tr = run_instance(&env(&c, &t), &empty_cell(DatasetKind::Bgqa1, PromptKind::Text), &inst);
    match tr.status {
        Status::Failed { category, .. } => assert_eq!(category, "config"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn text_probe_on_special_guardian_instance() {
    let inst = reference_instance(DatasetKind::CondQa, "condqa_special_guardian.jsonl");
    let partial = std::fs::read_to_string(fixture("reference/prompts/variable_tracking.partial_cot.txt")).unwrap();
    let reply = std::fs::read_to_string(fixture("reference/prompts/variable_tracking.reply.txt")).unwrap();
    let rules = vec![
        StubRule {
            step: Some(Step::Answer),
            reply: format!("{partial}\nAnswer: within 10 days"),
            ..Default::default()
        },
        StubRule {
            step: Some(Step::Probe),
            reply: reply.clone(),
            ..Default::default()
        },
    ];
    let c = client(rules);
    let t = Templates::builtin();
    let e = env(&c, &t);
    let tr = run_instance(&e, &empty_cell(DatasetKind::CondQa, PromptKind::Text), &inst);
    assert_eq!(tr.status, Status::Ok);
    assert_eq!(tr.cot_steps.len(), 1);
    let entity = KeyEntity {
        target: "the children have been living with me for the last 4 years".into(),
        expected: ProbeValue::True,
    };
    let budget = ProbeBudget::for_dataset(DatasetKind::CondQa);
    let s = run_probe_session(&e, &tr, &[entity], ProbeMode::Text, &budget, true).unwrap();
    assert_eq!(s.results.len(), 1);
    let r = &s.results[0];
    assert_eq!((r.reply_raw.as_str(), r.reply_norm.as_str(), r.is_error), (reply.as_str(), "true", false));
    let probe = s.exchanges[0].request.bundle.last_user().unwrap();
    assert!(probe.ends_with("is it true that the children have been living with me for the last 4 years?"));
}

#[test]
fn probe_session_diagnostics() {
    let inst = reference_instance(DatasetKind::Bgqa1, "bgqa_amberjack.jsonl");
    let rules = vec![StubRule {
        step: Some(Step::Answer),
        reply: "Answer: yes".into(),
        ..Default::default()
    }];
    let c = client(rules);
    let t = Templates::builtin();
    let e = env(&c, &t);
    let tr = run_instance(&e, &empty_cell(DatasetKind::Bgqa1, PromptKind::Text), &inst);
    let budget = ProbeBudget::for_dataset(DatasetKind::Bgqa1);
    let s = run_probe_session(&e, &tr, &key_entities_bgqa(&inst), ProbeMode::Text, &budget, true).unwrap();
    assert!(s.results.is_empty());
    assert!(s.diagnostic.is_some());
}

fn bgqa_pool() -> (Vec<Instance>, Vec<Instance>) {
    let train = load_dataset(DatasetKind::Bgqa2, &fixture("datasets/bgqa-2/train.jsonl")).unwrap();
    let dev = load_dataset(DatasetKind::Bgqa2, &fixture("datasets/bgqa-2/dev.jsonl")).unwrap();
    (train, dev)
}

#[test]
fn stub_bgqa_end_to_end() {
    let (train, dev) = bgqa_pool();
    let t = Templates::builtin();
    let c = client(Vec::new());
    let e = env(&c, &t);
    for kind in [PromptKind::Text, PromptKind::CodeAnswer] {
        let demos = sample_demonstrations(&train, 0, 1).unwrap();
        let cell = prepare_cell(&e, DatasetKind::Bgqa2, kind, 0, demos, 4).unwrap();
        for inst in dev.iter().take(6) {
            let tr = run_instance(&e, &cell, inst);
            assert_eq!(tr.status, Status::Ok, "{} {kind}", inst.id);
            let calls = if kind == PromptKind::Text { 1 } else { 2 };
            assert_eq!(tr.exchanges.len(), calls);
            assert!(!tr.raw_answer_text.is_empty());
            assert_eq!(tr.cot_text, tr.cot_steps.join("\n"));
            let answer = tr.answer_bundle().unwrap();
            assert_eq!(answer.demo_count(), 3);
            if kind == PromptKind::CodeAnswer {
                let code = tr.generated_code.as_ref().unwrap();
                assert!(code.statements.iter().any(|s| matches!(s, Statement::Assign { target, .. } if target.name() == "question")));
                let ents = key_entities_code(code);
                let budget = ProbeBudget::for_dataset(DatasetKind::Bgqa2);
                let s = run_probe_session(&e, &tr, &ents, ProbeMode::Code, &budget, true).unwrap();
                assert_eq!(s.results.len(), budget.probe_count(tr.cot_steps.len(), ents.len()));
            }
        }
    }
}

#[test]
fn reruns_hit_the_cache() {
    let (train, dev) = bgqa_pool();
    let t = Templates::builtin();
    let store = Arc::new(crate::llm::FixtureStore::open(tempfile::tempdir().unwrap().keep()).unwrap());
    let c = client(Vec::new()).with_store(store);
    let e = env(&c, &t);
    let demos = sample_demonstrations(&train, 1, 1).unwrap();
    let run = || {
        let cell = prepare_cell(&e, DatasetKind::Bgqa2, PromptKind::CodeAnswer, 1, demos.clone(), 4).unwrap();
        dev.iter()
            .take(3)
            .map(|i| run_instance(&e, &cell, i).raw_answer_text)
            .collect::<Vec<_>>()
    };
    let first = run();
    let live = c.counts().live_calls;
    assert!(live > 0);
    assert_eq!(run(), first);
    assert_eq!(c.counts().live_calls, live);
}

#[test]
fn atomic_body_follows_each_fact() {
    let inst = reference_instance(DatasetKind::Bgqa1, "bgqa_amberjack.jsonl");
    let rules = vec![StubRule {
        step: Some(Step::Decompose),
        reply: "The amberjack is hungry.".into(),
        ..Default::default()
    }];
    let c = client(rules);
    let t = Templates::builtin();
    let mut log = Vec::new();
    let body = atomic_body(&env(&c, &t), &inst, &mut log).unwrap();
    assert!(body.contains("The amberjack struggles to find food The amberjack is hungry."), "{body}");
    assert_eq!(log.len(), inst.facts.len());
}

#[test]
fn back_translation_keeps_comments() {
    let code = reference_code("backtranslation_condqa.py");
    let c = client(Vec::new());
    let t = Templates::builtin();
    let mut log = Vec::new();
    let text = back_translate(&env(&c, &t), &code, DatasetKind::CondQa, &mut log).unwrap();
    for st in &code.statements {
        if let Statement::Comment { text: comment, .. } = st {
            assert!(text.contains(comment.trim_start_matches('#').trim()), "{comment}");
        }
    }
    assert!(log.iter().all(|x| x.request.bundle.step == Step::BackTranslate));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn probe_plan_size_is_capped_product(
        steps in 0usize..15,
        entities in 0usize..15,
        ds in prop::sample::select(DatasetKind::ALL.to_vec()),
        seed in any::<u64>(),
    ) {
        let b = ProbeBudget::for_dataset(ds);
        let plan = plan_probes(steps, entities, &b, seed, "inst");
        let cap_s = b.max_steps.unwrap_or(usize::MAX);
        let cap_e = b.max_entities.unwrap_or(usize::MAX);
        prop_assert_eq!(plan.len(), steps.min(cap_s) * entities.min(cap_e));
        prop_assert_eq!(plan.len(), b.probe_count(steps, entities));
        let mut uniq = plan.clone();
        uniq.sort();
        uniq.dedup();
        prop_assert_eq!(uniq.len(), plan.len());
        prop_assert!(plan.iter().all(|&(s, e)| s < steps && e < entities));
        prop_assert_eq!(plan, plan_probes(steps, entities, &b, seed, "inst"));
    }
}
