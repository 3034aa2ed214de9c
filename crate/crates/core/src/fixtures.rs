//! The two small tasks used throughout the documentation and tests.

use crate::model::{Task, TaskBuilder, ValueId};

const ZERO: ValueId = ValueId(0);
const ONE: ValueId = ValueId(1);

/// Five Boolean fluents, four actions; `a1,a2` can share a step only under
/// exists-step semantics, and all four share one under the relaxed reading.
pub fn example_task() -> Task {
    let mut b = TaskBuilder::new();
    let x: Vec<_> = (1..=5)
        .map(|i| b.add_fluent(format!("x{i}"), ["0", "1"]).unwrap())
        .collect();
    for &f in &x {
        b.set_init(f, ZERO).unwrap();
    }
    b.add_goal(x[3], ONE).unwrap();
    b.add_goal(x[4], ONE).unwrap();
    b.add_action("a1", vec![(x[0], ZERO)], vec![(x[0], ONE), (x[1], ONE)]).unwrap();
    b.add_action("a2", vec![(x[2], ZERO)], vec![(x[0], ONE), (x[2], ONE)]).unwrap();
    b.add_action("a3", vec![(x[1], ONE), (x[2], ONE)], vec![(x[3], ONE)]).unwrap();
    b.add_action("a4", vec![(x[1], ONE), (x[2], ONE)], vec![(x[4], ONE)]).unwrap();
    b.build().unwrap()
}

/// Unsolvable task whose only candidate step has an acyclic invalidation
/// graph; acyclicity alone would wrongly accept it under relaxed semantics.
pub fn counterexample_task() -> Task {
    let mut b = TaskBuilder::new();
    let x: Vec<_> = (1..=3)
        .map(|i| b.add_fluent(format!("x{i}"), ["0", "1"]).unwrap())
        .collect();
    for &f in &x {
        b.set_init(f, ZERO).unwrap();
    }
    b.add_goal(x[2], ONE).unwrap();
    b.add_action("a1", vec![], vec![(x[0], ONE), (x[1], ONE)]).unwrap();
    b.add_action("a2", vec![(x[0], ONE), (x[1], ZERO)], vec![(x[2], ONE)]).unwrap();
    b.build().unwrap()
}
