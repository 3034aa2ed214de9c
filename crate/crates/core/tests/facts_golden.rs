use std::collections::BTreeSet;

use stepwise_core::fixtures::example_task;
use stepwise_core::{read_facts, write_facts};

const HANDWRITTEN: &str = include_str!("data/handwritten.lp");
const GOLDEN: &str = include_str!("data/example.facts");

fn fact_set(text: &str) -> BTreeSet<String> {
    text.split_inclusive(").")
        .map(|f| f.split_whitespace().collect::<String>())
        .filter(|f| !f.is_empty())
        .collect()
}

#[test]
fn writer_matches_golden_bytes() {
    assert_eq!(write_facts(&example_task()), GOLDEN);
}

#[test]
fn handwritten_has_same_facts_as_golden() {
    let handwritten = fact_set(HANDWRITTEN);
    assert_eq!(handwritten.len(), 38);
    assert_eq!(handwritten, fact_set(GOLDEN));
}

#[test]
fn handwritten_reads_back_to_example() {
    assert_eq!(read_facts(HANDWRITTEN).unwrap(), example_task());
}

#[test]
fn write_read_write_is_fixpoint() {
    let once = write_facts(&read_facts(HANDWRITTEN).unwrap());
    assert_eq!(write_facts(&read_facts(&once).unwrap()), once);
}

#[test]
fn empty_goal_writes_no_goal_lines() {
    let text = GOLDEN.lines().filter(|l| !l.starts_with("goal(")).collect::<Vec<_>>().join("\n");
    let t = read_facts(&text).unwrap();
    assert!(!write_facts(&t).contains("goal("));
}

#[test]
fn missing_init_is_rejected() {
    let text = GOLDEN.replace("init(x3,0).\n", "");
    assert!(read_facts(&text).is_err());
}
