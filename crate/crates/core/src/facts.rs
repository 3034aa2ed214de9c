//! Line-oriented fact format for ground tasks.
//!
//! ```text
//! fluent(x1).
//! value(x1,0).
//! init(x1,0).
//! goal(x1,1).
//! action(a1).
//! prec(a1,x1,0).
//! post(a1,x1,1).
//! mutex(g0,x1,1).
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::error::ModelError;
use crate::model::{FluentId, Task, TaskBuilder, ValueId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FactsError {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}: unknown predicate `{name}/{arity}`")]
    UnknownPredicate { line: usize, name: String, arity: usize },
    #[error("{line}: `{fact}` refers to undeclared {kind} `{name}`")]
    Dangling { line: usize, fact: String, kind: &'static str, name: String },
    #[error("no fluents declared")]
    NoFluents,
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn is_ident(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_')
}

/// Identifier, or a term `f(t1,...,tn)` over plain subterms, as the reader
/// reproduces it verbatim.
fn is_plain(s: &str) -> bool {
    let Some(open) = s.find('(') else { return is_ident(s) };
    if !is_ident(&s[..open]) || !s.ends_with(')') {
        return false;
    }
    let inner = &s[open + 1..s.len() - 1];
    let mut depth = 0usize;
    let mut start = 0;
    let mut parts = Vec::new();
    for (i, c) in inner.char_indices() {
        match c {
            '(' => depth += 1,
            ')' if depth == 0 => return false,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&inner[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&inner[start..]);
    depth == 0 && parts.into_iter().all(is_plain)
}

/// Bare when an identifier over `[a-z0-9_]` or a term built from them,
/// double-quoted otherwise.
pub fn quote_symbol(s: &str) -> String {
    if is_plain(s) {
        s.to_string()
    } else {
        format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
    }
}

pub fn write_facts(task: &Task) -> String {
    let mut out = String::new();
    let q = quote_symbol;
    let fname = |f: FluentId| q(&task.fluent(f).name);
    let vname = |f: FluentId, v: ValueId| q(task.value_name(f, v));
    for f in task.fluents() {
        let _ = writeln!(out, "fluent({}).", q(&f.name));
    }
    for f in task.fluents() {
        for v in &f.values {
            let _ = writeln!(out, "value({},{}).", q(&f.name), q(v));
        }
    }
    for f in task.fluent_ids() {
        let _ = writeln!(out, "init({},{}).", fname(f), vname(f, task.init().get(f)));
    }
    for (f, v) in task.goal().iter() {
        let _ = writeln!(out, "goal({},{}).", fname(f), vname(f, v));
    }
    for a in task.actions() {
        let _ = writeln!(out, "action({}).", q(&a.name));
    }
    for a in task.actions() {
        for (f, v) in a.pre.iter() {
            let _ = writeln!(out, "prec({},{},{}).", q(&a.name), fname(f), vname(f, v));
        }
    }
    for a in task.actions() {
        for (f, v) in a.post.iter() {
            let _ = writeln!(out, "post({},{},{}).", q(&a.name), fname(f), vname(f, v));
        }
    }
    for (g, group) in task.mutex_groups().iter().enumerate() {
        for &(f, v) in group {
            let _ = writeln!(out, "mutex(g{},{},{}).", g, fname(f), vname(f, v));
        }
    }
    out
}

struct Fact {
    line: usize,
    pred: String,
    args: Vec<String>,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn err(&self, msg: impl Into<String>) -> FactsError {
        FactsError::Syntax { line: self.line, col: self.col, msg: msg.into() }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c == b'%' {
                while self.peek().is_some_and(|c| c != b'\n') {
                    self.bump();
                }
            } else if c.is_ascii_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn expect(&mut self, want: u8) -> Result<(), FactsError> {
        self.skip_trivia();
        match self.peek() {
            Some(c) if c == want => {
                self.bump();
                Ok(())
            }
            Some(c) => Err(self.err(format!("expected `{}`, found `{}`", want as char, c as char))),
            None => Err(self.err(format!("expected `{}`, found end of input", want as char))),
        }
    }

    fn ident(&mut self) -> Result<String, FactsError> {
        self.skip_trivia();
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_' || c == b'-') {
            self.bump();
        }
        if start == self.pos {
            return Err(self.err("expected a symbol"));
        }
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn quoted(&mut self) -> Result<String, FactsError> {
        self.bump();
        let mut bytes = Vec::new();
        loop {
            match self.bump() {
                Some(b'"') => break,
                Some(b'\\') => match self.bump() {
                    Some(c) => bytes.push(c),
                    None => return Err(self.err("unterminated string")),
                },
                Some(c) => bytes.push(c),
                None => return Err(self.err("unterminated string")),
            }
        }
        String::from_utf8(bytes).map_err(|_| self.err("string is not valid UTF-8"))
    }

    // Symbol, quoted string, or a nested term kept verbatim.
    fn term(&mut self) -> Result<String, FactsError> {
        self.skip_trivia();
        if self.peek() == Some(b'"') {
            return self.quoted();
        }
        let mut s = self.ident()?;
        if self.peek() == Some(b'(') {
            s.push('(');
            self.bump();
            let mut first = true;
            loop {
                self.skip_trivia();
                if self.peek() == Some(b')') {
                    self.bump();
                    break;
                }
                if !first {
                    self.expect(b',')?;
                    s.push(',');
                }
                s.push_str(&self.term()?);
                first = false;
            }
            s.push(')');
        }
        Ok(s)
    }

    fn fact(&mut self) -> Result<Option<Fact>, FactsError> {
        self.skip_trivia();
        if self.peek().is_none() {
            return Ok(None);
        }
        let line = self.line;
        let pred = self.ident()?;
        let mut args = Vec::new();
        self.skip_trivia();
        if self.peek() == Some(b'(') {
            self.bump();
            loop {
                args.push(self.term()?);
                self.skip_trivia();
                match self.bump() {
                    Some(b',') => continue,
                    Some(b')') => break,
                    _ => return Err(self.err("expected `,` or `)`")),
                }
            }
        }
        self.expect(b'.')?;
        Ok(Some(Fact { line, pred, args }))
    }
}

fn parse(text: &str) -> Result<Vec<Fact>, FactsError> {
    let mut lx = Lexer { src: text.as_bytes(), pos: 0, line: 1, col: 1 };
    let mut facts = Vec::new();
    while let Some(f) = lx.fact()? {
        facts.push(f);
    }
    Ok(facts)
}

const ORDER: [(&str, usize); 8] = [
    ("fluent", 1),
    ("value", 2),
    ("init", 2),
    ("goal", 2),
    ("action", 1),
    ("prec", 3),
    ("post", 3),
    ("mutex", 3),
];

/// Builds a task from fact text; facts may appear in any order.
pub fn read_facts(text: &str) -> Result<Task, FactsError> {
    let facts = parse(text)?;
    for f in &facts {
        if !ORDER.contains(&(f.pred.as_str(), f.args.len())) {
            return Err(FactsError::UnknownPredicate { line: f.line, name: f.pred.clone(), arity: f.args.len() });
        }
    }
    let of = |p: &'static str| facts.iter().filter(move |f| f.pred == p);
    let render = |f: &Fact| format!("{}({})", f.pred, f.args.join(","));
    let dangling = |f: &Fact, kind: &'static str, name: &str| FactsError::Dangling {
        line: f.line,
        fact: render(f),
        kind,
        name: name.to_string(),
    };

    let mut names: Vec<String> = Vec::new();
    let mut domains: HashMap<String, Vec<String>> = HashMap::new();
    for f in of("fluent") {
        if !domains.contains_key(&f.args[0]) {
            names.push(f.args[0].clone());
            domains.insert(f.args[0].clone(), Vec::new());
        }
    }
    if names.is_empty() {
        return Err(FactsError::NoFluents);
    }
    for f in of("value") {
        let dom = domains.get_mut(&f.args[0]).ok_or_else(|| dangling(f, "fluent", &f.args[0]))?;
        if !dom.contains(&f.args[1]) {
            dom.push(f.args[1].clone());
        }
    }
    let mut b = TaskBuilder::new();
    for n in &names {
        b.add_fluent(n.clone(), domains[n].clone())?;
    }
    let bind = |b: &TaskBuilder, f: &Fact, x: &str, v: &str| -> Result<(FluentId, ValueId), FactsError> {
        let fid = b.fluent_id(x).map_err(|_| dangling(f, "fluent", x))?;
        let vid = b.value_id(fid, v).map_err(|_| dangling(f, "value", v))?;
        Ok((fid, vid))
    };
    for f in of("init") {
        let (x, v) = bind(&b, f, &f.args[0], &f.args[1])?;
        b.set_init(x, v)?;
    }
    for f in of("goal") {
        let (x, v) = bind(&b, f, &f.args[0], &f.args[1])?;
        b.add_goal(x, v)?;
    }
    let mut actions: Vec<String> = Vec::new();
    let mut conds: HashMap<String, (Vec<(FluentId, ValueId)>, Vec<(FluentId, ValueId)>)> = HashMap::new();
    for f in of("action") {
        if !conds.contains_key(&f.args[0]) {
            actions.push(f.args[0].clone());
            conds.insert(f.args[0].clone(), Default::default());
        }
    }
    for (pred, is_pre) in [("prec", true), ("post", false)] {
        for f in of(pred) {
            let pair = bind(&b, f, &f.args[1], &f.args[2])?;
            let entry = conds.get_mut(&f.args[0]).ok_or_else(|| dangling(f, "action", &f.args[0]))?;
            if is_pre {
                entry.0.push(pair);
            } else {
                entry.1.push(pair);
            }
        }
    }
    for a in actions {
        let (pre, post) = conds.remove(&a).unwrap();
        b.add_action(a, pre, post)?;
    }
    let mut groups: Vec<(String, Vec<(FluentId, ValueId)>)> = Vec::new();
    for f in of("mutex") {
        let pair = bind(&b, f, &f.args[1], &f.args[2])?;
        match groups.iter_mut().find(|(g, _)| *g == f.args[0]) {
            Some((_, members)) => members.push(pair),
            None => groups.push((f.args[0].clone(), vec![pair])),
        }
    }
    for (_, g) in groups {
        b.add_mutex_group(g)?;
    }
    Ok(b.build()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example_task;

    #[test]
    fn quoting() {
        assert_eq!(quote_symbol("x_1"), "x_1");
        assert_eq!(quote_symbol("on(a,b)"), "on(a,b)");
        assert_eq!(quote_symbol("on(a, b)"), "\"on(a, b)\"");
        assert_eq!(quote_symbol("Say \"hi\""), "\"Say \\\"hi\\\"\"");
    }

    #[test]
    fn round_trip_example() {
        let t = example_task();
        let text = write_facts(&t);
        assert_eq!(read_facts(&text).unwrap(), t);
        assert!(text.contains("prec(a1,x1,0).\n"));
    }

    #[test]
    fn several_facts_per_line_and_comments() {
        let t = read_facts("% header\nfluent(x). value(x,a). value(x,b).\ninit(x,a). % c\naction(go). post(go,x,b).").unwrap();
        assert_eq!(t.fluents()[0].values, vec!["a", "b"]);
        assert_eq!(t.actions().len(), 1);
    }

    #[test]
    fn quoted_and_nested_symbols() {
        assert_eq!(quote_symbol("on(a,f(b))"), "on(a,f(b))");
        assert_eq!(quote_symbol("on(a,)"), "\"on(a,)\"");
        assert_eq!(quote_symbol("pick-up(a)"), "\"pick-up(a)\"");
        let t = read_facts("fluent(\"on(a,b)\"). value(\"on(a,b)\",false). value(\"on(a,b)\",true). init(\"on(a,b)\",false).\naction(stack(a,b)). post(stack(a,b),\"on(a,b)\",true).").unwrap();
        assert_eq!(t.actions()[0].name, "stack(a,b)");
        assert_eq!(t.fluents()[0].name, "on(a,b)");
        let again = read_facts(&write_facts(&t)).unwrap();
        assert_eq!(again, t);
    }

    #[test]
    fn errors() {
        assert_eq!(read_facts(""), Err(FactsError::NoFluents));
        assert!(matches!(read_facts("fluent(x). value(x,0). foo(x)."), Err(FactsError::UnknownPredicate { .. })));
        assert!(matches!(
            read_facts("fluent(x). value(x,0). init(x,0). prec(a,x,0)."),
            Err(FactsError::Dangling { kind: "action", .. })
        ));
        assert!(matches!(
            read_facts("fluent(x). value(x,0). fluent(y). value(y,0). init(x,0)."),
            Err(FactsError::Model(ModelError::NonTotalInit(_)))
        ));
        assert!(matches!(read_facts("fluent(x"), Err(FactsError::Syntax { .. })));
    }

    #[test]
    fn mutex_lines() {
        let t = read_facts("fluent(x). value(x,0). value(x,1). fluent(y). value(y,0). value(y,1). init(x,1). init(y,0). mutex(g0,x,0). mutex(g0,y,1). action(a). post(a,x,0).").unwrap();
        let text = write_facts(&t);
        assert!(text.ends_with("mutex(g0,x,0).\nmutex(g0,y,1).\n"));
    }
}
