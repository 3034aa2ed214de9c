//! S-expression reader underneath the PDDL parser.

use std::fmt;

use super::ParseError;

/// Source position, 1-based.
///
/// Compares equal to every other span so that ASTs from different
/// renderings of the same input compare structurally.
#[derive(Clone, Copy, Debug, Default, Eq)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SExpr {
    /// Lower-cased symbol, `?variable`, `:keyword` or number.
    Atom(String, Span),
    List(Vec<SExpr>, Span),
}

impl SExpr {
    pub fn span(&self) -> Span {
        match self {
            SExpr::Atom(_, s) | SExpr::List(_, s) => *s,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom(a, _) => Some(a),
            SExpr::List(..) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(items, _) => Some(items),
            SExpr::Atom(..) => None,
        }
    }

    /// First element when it is a symbol, e.g. `and` in `(and ...)`.
    pub fn head(&self) -> Option<&str> {
        self.as_list()?.first()?.as_atom()
    }
}

/// Single-line rendering.
impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SExpr::Atom(a, _) => f.write_str(a),
            SExpr::List(items, _) => {
                f.write_str("(")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{it}")?;
                }
                f.write_str(")")
            }
        }
    }
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl Reader<'_> {
    fn pos(&self) -> Span {
        Span { line: self.line, col: self.col }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c == ';' {
                while self.chars.peek().is_some_and(|&c| c != '\n') {
                    self.bump();
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn expr(&mut self) -> Result<SExpr, ParseError> {
        self.skip_trivia();
        let start = self.pos();
        match self.chars.peek().copied() {
            None => Err(ParseError::new(start, "unexpected end of input")),
            Some(')') => Err(ParseError::new(start, "unbalanced `)`")),
            Some('(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    match self.chars.peek() {
                        None => return Err(ParseError::new(start, "unclosed `(`")),
                        Some(')') => {
                            self.bump();
                            return Ok(SExpr::List(items, start));
                        }
                        Some(_) => items.push(self.expr()?),
                    }
                }
            }
            Some(_) => {
                let mut s = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    s.extend(c.to_lowercase());
                    self.bump();
                }
                Ok(SExpr::Atom(s, start))
            }
        }
    }
}

/// Reads exactly one top-level expression.
pub fn read(text: &str) -> Result<SExpr, ParseError> {
    let mut r = Reader { chars: text.chars().peekable(), line: 1, col: 1 };
    let e = r.expr()?;
    r.skip_trivia();
    if r.chars.peek().is_some() {
        let at = r.pos();
        let msg = if r.chars.peek() == Some(&')') { "unbalanced `)`" } else { "trailing input after definition" };
        return Err(ParseError::new(at, msg));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_and_case() {
        let e = read("; c\n(Define\n  (Foo ?X))").unwrap();
        assert_eq!(e.to_string(), "(define (foo ?x))");
        let inner = &e.as_list().unwrap()[1];
        assert_eq!((inner.span().line, inner.span().col), (3, 3));
    }

    #[test]
    fn unbalanced() {
        let err = read("(a (b)").unwrap_err();
        assert_eq!((err.span.line, err.span.col), (1, 1));
        let err = read("(a))").unwrap_err();
        assert_eq!((err.span.line, err.span.col), (1, 4));
        assert!(err.message.contains("unbalanced"));
    }
}
