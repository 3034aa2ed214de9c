use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use stepwise_core::fixtures::{counterexample_task, example_task};
use stepwise_core::write_facts;
use tempfile::TempDir;

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "frontend", "tests", "data", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn stepwise(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_stepwise"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut pipe = child.stdin.take().unwrap();
    pipe.write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    drop(pipe);
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

struct Files(TempDir);

impl Files {
    fn new() -> Self {
        Files(tempfile::tempdir().unwrap())
    }

    fn put(&self, name: &str, text: &str) -> String {
        let p = self.0.path().join(name);
        std::fs::write(&p, text).unwrap();
        p.to_string_lossy().into_owned()
    }
}

#[test]
fn translate_pddl_example() {
    let o = stepwise(&["translate", &data("example-domain.pddl"), &data("example-problem.pddl")], None);
    assert_eq!(o.status.code(), Some(0));
    let renamed = stdout(&o).replace(",false)", ",0)").replace(",true)", ",1)");
    assert_eq!(renamed, write_facts(&example_task()));
}

#[test]
fn solve_prints_example_plan() {
    let files = Files::new();
    let facts = files.put("facts.lp", &write_facts(&example_task()));
    let o = stepwise(&["solve", "--encoding", "exists-acyc", "--algorithm", "B", "--gamma", "0.9", "--heuristic", &facts], None);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "step 1: a1 a2\nstep 2: a3 a4\n");
    let stats = String::from_utf8_lossy(&o.stderr);
    assert!(stats.contains("plan_length=2"), "{stats}");
}

#[test]
fn solve_emits_occurs_facts() {
    let files = Files::new();
    let facts = files.put("facts.lp", &write_facts(&example_task()));
    let o = stepwise(&["solve", "--output", "facts", &facts], None);
    assert_eq!(stdout(&o), "occurs(a1,1).\noccurs(a2,1).\noccurs(a3,2).\noccurs(a4,2).\n");
}

#[test]
fn validate_reports_forall_violation() {
    let files = Files::new();
    let facts = files.put("facts.lp", &write_facts(&example_task()));
    let plan = files.put("plan.txt", "step 1: a1 a2\nstep 2: a3 a4\n");
    let o = stepwise(&["validate", "--semantics", "forall", &facts, &plan], None);
    assert_eq!(o.status.code(), Some(10));
    assert!(stdout(&o).starts_with("INVALID step=1"), "{}", stdout(&o));
    let o = stepwise(&["validate", "--semantics", "exists", &facts, &plan], None);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "VALID actions=4\n");
}

#[test]
fn exhausted_search_exits_ten() {
    let files = Files::new();
    let facts = files.put("t2.lp", &write_facts(&counterexample_task()));
    let o = stepwise(&["solve", "--encoding", "relaxed", "--horizon-cap", "6", &facts], None);
    assert_eq!(o.status.code(), Some(10));
    assert!(stdout(&o).is_empty());
}

#[test]
fn exit_codes_for_usage_and_input_errors() {
    assert_eq!(stepwise(&["solve", "--algorithm", "X", "f.lp"], None).status.code(), Some(1));
    assert_eq!(stepwise(&["frobnicate"], None).status.code(), Some(1));
    assert_eq!(stepwise(&["solve", "/nonexistent/facts.lp"], None).status.code(), Some(2));
    assert_eq!(stepwise(&["solve", "--gamma", "1.5", &data("blocks-4.sas")], None).status.code(), Some(1));
    assert_eq!(stepwise(&["translate"], Some("fluent(x")).status.code(), Some(2));
    assert_eq!(stepwise(&["--help"], None).status.code(), Some(0));
}

#[test]
fn translate_pipes_into_solve() {
    let (d, p) = (data("blocks-domain.pddl"), data("blocks-4.pddl"));
    let facts = stdout(&stepwise(&["translate", &d, &p], None));
    let direct = stepwise(&["solve", "--seed", "3", &d, &p], None);
    let piped = stepwise(&["solve", "--seed", "3"], Some(&facts));
    assert_eq!(direct.status.code(), Some(0));
    assert_eq!(stdout(&piped), stdout(&direct));
    assert_eq!(stdout(&stepwise(&["solve", "--seed", "3", "-"], Some(&facts))), stdout(&direct));
}

#[test]
fn output_is_deterministic() {
    let args = ["solve", "--encoding", "seq", "--heuristic", "--seed", "7", &data("blocks-4.sas")].map(String::from);
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let first = stdout(&stepwise(&args, None));
    assert!(!first.is_empty());
    for _ in 0..2 {
        assert_eq!(stdout(&stepwise(&args, None)), first);
    }
}

#[test]
fn sas_input_is_detected() {
    let o = stepwise(&["translate", &data("blocks-4.sas")], None);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("fluent(")).count(), 9);
    assert!(text.contains("action(\"pick-up(a)\")."), "{text}");
}

#[test]
fn every_encoding_solves_blocks() {
    let files = Files::new();
    let (d, p) = (data("blocks-domain.pddl"), data("blocks-4.pddl"));
    for enc in ["seq", "forall", "exists", "exists-acyc", "exists-fixpoint", "gc", "relaxed"] {
        for alg in ["S", "A", "B"] {
            let o = stepwise(&["solve", "--encoding", enc, "--algorithm", alg, "--n", "4", &d, &p], None);
            assert_eq!(o.status.code(), Some(0), "{enc} {alg}: {}", String::from_utf8_lossy(&o.stderr));
            let semantics = match enc {
                "seq" => "sequential",
                "forall" => "forall",
                "relaxed" => "relaxed",
                _ => "exists",
            };
            let plan = files.put("plan.txt", &stdout(&o));
            let v = stepwise(&["validate", "--semantics", semantics, &d, &p, &plan], None);
            assert_eq!(v.status.code(), Some(0), "{enc} {alg}: {}", stdout(&v));
        }
    }
}

#[test]
fn check_syntax_reports_warnings_with_positions() {
    let o = stepwise(&["check-syntax", &data("blocks-domain.pddl"), &data("blocks-4.pddl")], None);
    assert_eq!((o.status.code(), stdout(&o)), (Some(0), String::new()));
    let d = data("switches-domain.pddl");
    let o = stepwise(&["check-syntax", &d, &data("switches-problem.pddl")], None);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), format!("{d}:7:26: warning: unsupported: conditional effect\n"));
    let files = Files::new();
    let bad = files.put("bad.pddl", "(define (domain x)\n  (:predicates (p))");
    let o = stepwise(&["check-syntax", &bad, &data("blocks-4.pddl")], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).starts_with(&format!("{bad}:")), "{}", stdout(&o));
}

#[test]
fn beautify_and_normalize_reparse() {
    let files = Files::new();
    for cmd in ["beautify", "normalize"] {
        let o = stepwise(&[cmd, &data("blocks-domain.pddl"), &data("blocks-4.pddl")], None);
        assert_eq!(o.status.code(), Some(0));
        let text = stdout(&o);
        let split = text.find("(define (problem").unwrap();
        let d = files.put("d.pddl", &text[..split]);
        let p = files.put("p.pddl", &text[split..]);
        let a = stdout(&stepwise(&["translate", &d, &p], None));
        let b = stdout(&stepwise(&["translate", &data("blocks-domain.pddl"), &data("blocks-4.pddl")], None));
        assert_eq!(a, b, "{cmd}");
    }
}
