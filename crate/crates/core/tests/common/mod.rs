//! Shared test oracles.
//!
//! The PyIndex reference interpreter here is intentionally independent of
//! the crate's expression AST: it tokenizes and evaluates the rendered
//! snippet text directly, so the generator and the interpreter under test
//! can be checked against a second route.

/// Evaluates a two-line PyIndex snippet (`xs = [...]` then an expression)
/// under Python semantics. Returns the final integer or an error string.
pub fn pyindex_oracle(source_text: &str) -> Result<i64, String> {
    let mut lines = source_text.lines();
    let assign = lines.next().ok_or("missing assignment line")?;
    let expr = lines.next().ok_or("missing expression line")?;
    if lines.next().is_some() {
        return Err("more than two lines".into());
    }
    let list_src = assign
        .strip_prefix("xs = ")
        .ok_or("assignment must bind xs")?;
    let xs = match eval(list_src, &[])? {
        Val::List(v) => v,
        Val::Int(_) => return Err("xs must be a list".into()),
    };
    match eval(expr, &xs)? {
        Val::Int(v) => Ok(v),
        Val::List(_) => Err("expression produced a list".into()),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Val {
    Int(i64),
    List(Vec<i64>),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Sym(char),
}

fn lex(src: &str) -> Result<Vec<Tok>, String> {
    let mut tokens = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            tokens.push(Tok::Int(text.parse().map_err(|e| format!("{e}"))?));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            tokens.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "[]():,+-%*.".contains(c) {
            tokens.push(Tok::Sym(c));
            i += 1;
        } else {
            return Err(format!("unexpected character {c:?}"));
        }
    }
    Ok(tokens)
}

struct P<'a> {
    tokens: Vec<Tok>,
    pos: usize,
    xs: &'a [i64],
}

fn eval(src: &str, xs: &[i64]) -> Result<Val, String> {
    let mut p = P {
        tokens: lex(src)?,
        pos: 0,
        xs,
    };
    let value = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(format!("trailing tokens at {}", p.pos));
    }
    Ok(value)
}

impl P<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect_sym(&mut self, want: char) -> Result<(), String> {
        match self.bump() {
            Some(Tok::Sym(c)) if c == want => Ok(()),
            other => Err(format!("expected {want:?}, got {other:?}")),
        }
    }

    fn expr(&mut self) -> Result<Val, String> {
        let mut left = self.postfix()?;
        while let Some(Tok::Sym(op @ ('+' | '-' | '%'))) = self.peek() {
            let op = *op;
            self.pos += 1;
            let right = self.postfix()?;
            let (Val::Int(a), Val::Int(b)) = (&left, &right) else {
                return Err("arithmetic on a list".into());
            };
            left = Val::Int(match op {
                '+' => a + b,
                '-' => a - b,
                '%' => {
                    if *b == 0 {
                        return Err("modulo by zero".into());
                    }
                    // Python %: result takes the sign of the divisor.
                    ((a % b) + b) % b
                }
                _ => unreachable!(),
            });
        }
        Ok(left)
    }

    fn postfix(&mut self) -> Result<Val, String> {
        let mut value = self.primary()?;
        loop {
            match self.peek() {
                Some(Tok::Sym('[')) => {
                    self.pos += 1;
                    value = self.subscript_or_slice(value)?;
                }
                Some(Tok::Sym('.')) => {
                    self.pos += 1;
                    match self.bump() {
                        Some(Tok::Ident(name)) if name == "index" => {
                            self.expect_sym('(')?;
                            let needle = self.expr()?;
                            self.expect_sym(')')?;
                            let Val::List(list) = value else {
                                return Err(".index on a non-list".into());
                            };
                            let Val::Int(v) = needle else {
                                return Err(".index of a list".into());
                            };
                            let position = list
                                .iter()
                                .position(|x| *x == v)
                                .ok_or("value not in list")?;
                            value = Val::Int(position as i64);
                        }
                        other => return Err(format!("unknown method {other:?}")),
                    }
                }
                _ => break,
            }
        }
        Ok(value)
    }

    fn subscript_or_slice(&mut self, base: Val) -> Result<Val, String> {
        let Val::List(list) = base else {
            return Err("subscript on a non-list".into());
        };
        let lo = if matches!(self.peek(), Some(Tok::Sym(':'))) {
            None
        } else {
            Some(self.expr()?)
        };
        if matches!(self.peek(), Some(Tok::Sym(':'))) {
            self.pos += 1;
            let hi = if matches!(self.peek(), Some(Tok::Sym(']'))) {
                None
            } else {
                Some(self.expr()?)
            };
            self.expect_sym(']')?;
            let len = list.len() as i64;
            let resolve = |v: Option<Val>, default: i64| -> Result<i64, String> {
                match v {
                    None => Ok(default),
                    Some(Val::Int(raw)) => {
                        let adjusted = if raw < 0 { raw + len } else { raw };
                        Ok(adjusted.clamp(0, len))
                    }
                    Some(Val::List(_)) => Err("slice bound is a list".into()),
                }
            };
            let start = resolve(lo, 0)?;
            let stop = resolve(hi, len)?;
            let out = if start < stop {
                list[start as usize..stop as usize].to_vec()
            } else {
                Vec::new()
            };
            Ok(Val::List(out))
        } else {
            self.expect_sym(']')?;
            let Some(Val::Int(raw)) = lo else {
                return Err("subscript index must be an integer".into());
            };
            let len = list.len() as i64;
            let adjusted = if raw < 0 { raw + len } else { raw };
            if adjusted < 0 || adjusted >= len {
                return Err(format!("index {raw} out of range"));
            }
            Ok(Val::Int(list[adjusted as usize]))
        }
    }

    fn primary(&mut self) -> Result<Val, String> {
        match self.bump() {
            Some(Tok::Int(v)) => Ok(Val::Int(v)),
            Some(Tok::Sym('-')) => match self.primary()? {
                Val::Int(v) => Ok(Val::Int(-v)),
                Val::List(_) => Err("negation of a list".into()),
            },
            Some(Tok::Sym('(')) => {
                let value = self.expr()?;
                self.expect_sym(')')?;
                Ok(value)
            }
            Some(Tok::Sym('[')) => {
                let mut items = Vec::new();
                if !matches!(self.peek(), Some(Tok::Sym(']'))) {
                    loop {
                        match self.expr()? {
                            Val::Int(v) => items.push(v),
                            Val::List(_) => return Err("nested list literal".into()),
                        }
                        match self.bump() {
                            Some(Tok::Sym(',')) => continue,
                            Some(Tok::Sym(']')) => break,
                            other => return Err(format!("bad list literal at {other:?}")),
                        }
                    }
                } else {
                    self.pos += 1;
                }
                Ok(Val::List(items))
            }
            Some(Tok::Ident(name)) => match name.as_str() {
                "xs" => Ok(Val::List(self.xs.to_vec())),
                "len" => {
                    self.expect_sym('(')?;
                    let value = self.expr()?;
                    self.expect_sym(')')?;
                    match value {
                        Val::List(list) => Ok(Val::Int(list.len() as i64)),
                        Val::Int(_) => Err("len of an integer".into()),
                    }
                }
                "sorted" => {
                    self.expect_sym('(')?;
                    let value = self.expr()?;
                    self.expect_sym(')')?;
                    match value {
                        Val::List(mut list) => {
                            list.sort();
                            Ok(Val::List(list))
                        }
                        Val::Int(_) => Err("sorted of an integer".into()),
                    }
                }
                "list" => {
                    self.expect_sym('(')?;
                    match self.bump() {
                        Some(Tok::Ident(inner)) if inner == "reversed" => {
                            self.expect_sym('(')?;
                            let value = self.expr()?;
                            self.expect_sym(')')?;
                            self.expect_sym(')')?;
                            match value {
                                Val::List(mut list) => {
                                    list.reverse();
                                    Ok(Val::List(list))
                                }
                                Val::Int(_) => Err("reversed of an integer".into()),
                            }
                        }
                        other => Err(format!("list() supports only reversed, got {other:?}")),
                    }
                }
                other => Err(format!("unknown identifier {other:?}")),
            },
            other => Err(format!("unexpected token {other:?}")),
        }
    }
}

#[allow(dead_code)]
pub fn oracle_sanity() {
    assert_eq!(pyindex_oracle("xs = [3, 1, 2]\nxs[0]"), Ok(3));
    assert_eq!(pyindex_oracle("xs = [2, 9, 7]\nxs[xs[0]]"), Ok(7));
    assert_eq!(pyindex_oracle("xs = [5, 2, 9]\nsorted(xs)[1]"), Ok(5));
    assert_eq!(pyindex_oracle("xs = [4, 5, 6]\nxs[-1]"), Ok(6));
    assert_eq!(pyindex_oracle("xs = [4, 5, 6]\nlist(reversed(xs))[0]"), Ok(6));
    assert_eq!(pyindex_oracle("xs = [4, 5, 6]\nxs[1:3][1]"), Ok(6));
    assert_eq!(pyindex_oracle("xs = [4, 5, 6]\nxs[7 % len(xs)]"), Ok(5));
    assert_eq!(pyindex_oracle("xs = [4, 5, 6]\nxs.index(6)"), Ok(2));
    assert_eq!(pyindex_oracle("xs = [4, 5, 6]\nxs[len(xs) - 2]"), Ok(5));
    assert!(pyindex_oracle("xs = [4, 5, 6]\nxs[9]").is_err());
}
