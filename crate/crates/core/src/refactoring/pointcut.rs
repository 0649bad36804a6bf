//! Pointcut expressions: a small AST with a deterministic renderer and a
//! parser that accepts everything the renderer emits.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Params {
    /// `..`
    Any,
    List(Vec<String>),
}

/// `ret Type+.name(params) [throws E]`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodPattern {
    pub ret: String,
    pub ty: String,
    pub subtypes: bool,
    pub name: String,
    pub params: Params,
    pub throws: Option<String>,
}

impl MethodPattern {
    pub fn new(ret: &str, ty: &str, subtypes: bool, name: &str, params: Params) -> Self {
        MethodPattern {
            ret: ret.to_string(),
            ty: ty.to_string(),
            subtypes,
            name: name.to_string(),
            params,
            throws: None,
        }
    }
}

impl fmt::Display for MethodPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let plus = if self.subtypes { "+" } else { "" };
        let params = match &self.params {
            Params::Any => "..".to_string(),
            Params::List(ps) => ps.join(", "),
        };
        write!(f, "{} {}{plus}.{}({params})", self.ret, self.ty, self.name)?;
        if let Some(t) = &self.throws {
            write!(f, " throws {t}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PointcutExpr {
    Execution(MethodPattern),
    Call(MethodPattern),
    Withincode(MethodPattern),
    Within(String),
    This(String),
    Target(String),
    Args(Vec<String>),
    Cflow(Box<PointcutExpr>),
    /// Reference to a named pointcut.
    Named { name: String, args: Vec<String> },
    Not(Box<PointcutExpr>),
    And(Vec<PointcutExpr>),
    Or(Vec<PointcutExpr>),
}

impl PointcutExpr {
    /// Conjunction, flattening nested conjunctions; a single term stays as is.
    pub fn and(terms: Vec<PointcutExpr>) -> PointcutExpr {
        Self::join(terms, true)
    }

    pub fn or(terms: Vec<PointcutExpr>) -> PointcutExpr {
        Self::join(terms, false)
    }

    fn join(terms: Vec<PointcutExpr>, conj: bool) -> PointcutExpr {
        let mut flat = Vec::new();
        for t in terms {
            match t {
                PointcutExpr::And(inner) if conj => flat.extend(inner),
                PointcutExpr::Or(inner) if !conj => flat.extend(inner),
                other => flat.push(other),
            }
        }
        if flat.len() == 1 {
            return flat.pop().expect("one term");
        }
        if conj {
            PointcutExpr::And(flat)
        } else {
            PointcutExpr::Or(flat)
        }
    }

    pub fn not(inner: PointcutExpr) -> PointcutExpr {
        PointcutExpr::Not(Box::new(inner))
    }

    /// No terms at all, i.e. a template slot left open.
    pub fn is_empty(&self) -> bool {
        matches!(self, PointcutExpr::And(v) | PointcutExpr::Or(v) if v.is_empty())
    }

    /// Top-level operands, one per rendered line.
    pub fn render_lines(&self) -> Vec<String> {
        match self {
            PointcutExpr::And(ts) if ts.len() > 1 => ts
                .iter()
                .enumerate()
                .map(|(i, t)| if i == 0 { operand(t, true) } else { format!("&& {}", operand(t, true)) })
                .collect(),
            PointcutExpr::Or(ts) if ts.len() > 1 => ts
                .iter()
                .enumerate()
                .map(|(i, t)| if i == 0 { operand(t, false) } else { format!("|| {}", operand(t, false)) })
                .collect(),
            other => vec![other.to_string()],
        }
    }
}

fn operand(t: &PointcutExpr, in_and: bool) -> String {
    match t {
        PointcutExpr::Or(_) if in_and => format!("({t})"),
        PointcutExpr::And(_) if !in_and => format!("({t})"),
        _ => t.to_string(),
    }
}

impl fmt::Display for PointcutExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointcutExpr::Execution(p) => write!(f, "execution({p})"),
            PointcutExpr::Call(p) => write!(f, "call({p})"),
            PointcutExpr::Withincode(p) => write!(f, "withincode({p})"),
            PointcutExpr::Within(t) => write!(f, "within({t})"),
            PointcutExpr::This(v) => write!(f, "this({v})"),
            PointcutExpr::Target(v) => write!(f, "target({v})"),
            PointcutExpr::Args(a) => write!(f, "args({})", a.join(", ")),
            PointcutExpr::Cflow(e) => write!(f, "cflow({e})"),
            PointcutExpr::Named { name, args } => write!(f, "{name}({})", args.join(", ")),
            PointcutExpr::Not(e) => match **e {
                PointcutExpr::And(_) | PointcutExpr::Or(_) => write!(f, "!({e})"),
                _ => write!(f, "!{e}"),
            },
            PointcutExpr::And(ts) => {
                let parts: Vec<String> = ts.iter().map(|t| operand(t, true)).collect();
                f.write_str(&parts.join(" && "))
            }
            PointcutExpr::Or(ts) => {
                let parts: Vec<String> = ts.iter().map(|t| operand(t, false)).collect();
                f.write_str(&parts.join(" || "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    LParen,
    RParen,
    Comma,
    And,
    Or,
    Not,
}

fn tokenize(text: &str) -> Result<Vec<Tok>, String> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '(' => {
                out.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1;
            }
            ',' => {
                out.push(Tok::Comma);
                i += 1;
            }
            '!' => {
                out.push(Tok::Not);
                i += 1;
            }
            '&' | '|' => {
                if chars.get(i + 1) != Some(&c) {
                    return Err(format!("expected `{c}{c}`"));
                }
                out.push(if c == '&' { Tok::And } else { Tok::Or });
                i += 2;
            }
            _ => {
                let start = i;
                while i < chars.len() && !chars[i].is_whitespace() && !"(),!&|;:{}".contains(chars[i]) {
                    i += 1;
                }
                if start == i {
                    return Err(format!("unexpected `{c}`"));
                }
                out.push(Tok::Word(chars[start..i].iter().collect()));
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), String> {
        match self.next() {
            Some(t) if t == want => Ok(()),
            other => Err(format!("expected {want:?}, found {other:?}")),
        }
    }

    fn word(&mut self) -> Result<String, String> {
        match self.next() {
            Some(Tok::Word(w)) => Ok(w),
            other => Err(format!("expected a name, found {other:?}")),
        }
    }

    fn or_expr(&mut self) -> Result<PointcutExpr, String> {
        let mut terms = vec![self.and_expr()?];
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            terms.push(self.and_expr()?);
        }
        Ok(if terms.len() == 1 { terms.pop().expect("one") } else { PointcutExpr::Or(terms) })
    }

    fn and_expr(&mut self) -> Result<PointcutExpr, String> {
        let mut terms = vec![self.unary()?];
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            terms.push(self.unary()?);
        }
        Ok(if terms.len() == 1 { terms.pop().expect("one") } else { PointcutExpr::And(terms) })
    }

    fn unary(&mut self) -> Result<PointcutExpr, String> {
        match self.peek() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(PointcutExpr::not(self.unary()?))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.or_expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            _ => self.primitive(),
        }
    }

    fn word_list(&mut self) -> Result<Vec<String>, String> {
        let mut out = Vec::new();
        if self.peek() == Some(&Tok::RParen) {
            self.pos += 1;
            return Ok(out);
        }
        loop {
            out.push(self.word()?);
            match self.next() {
                Some(Tok::Comma) => continue,
                Some(Tok::RParen) => return Ok(out),
                other => return Err(format!("expected `,` or `)`, found {other:?}")),
            }
        }
    }

    fn primitive(&mut self) -> Result<PointcutExpr, String> {
        let head = self.word()?;
        self.expect(Tok::LParen)?;
        let e = match head.as_str() {
            "execution" => PointcutExpr::Execution(self.method_pattern()?),
            "call" => PointcutExpr::Call(self.method_pattern()?),
            "withincode" => PointcutExpr::Withincode(self.method_pattern()?),
            "within" => PointcutExpr::Within(self.word()?),
            "this" => PointcutExpr::This(self.word()?),
            "target" => PointcutExpr::Target(self.word()?),
            "cflow" => PointcutExpr::Cflow(Box::new(self.or_expr()?)),
            "args" => return Ok(PointcutExpr::Args(self.word_list()?)),
            _ => return Ok(PointcutExpr::Named { name: head, args: self.word_list()? }),
        };
        self.expect(Tok::RParen)?;
        Ok(e)
    }

    fn method_pattern(&mut self) -> Result<MethodPattern, String> {
        let ret = self.word()?;
        let qualified = self.word()?;
        let (ty, name) = qualified.rsplit_once('.').ok_or_else(|| format!("`{qualified}` lacks a type part"))?;
        let (ty, subtypes) = match ty.strip_suffix('+') {
            Some(t) => (t, true),
            None => (ty, false),
        };
        self.expect(Tok::LParen)?;
        let list = self.word_list()?;
        let params = if list.len() == 1 && list[0] == ".." { Params::Any } else { Params::List(list) };
        let throws = match self.peek() {
            Some(Tok::Word(w)) if w == "throws" => {
                self.pos += 1;
                Some(self.word()?)
            }
            _ => None,
        };
        Ok(MethodPattern { ret, ty: ty.to_string(), subtypes, name: name.to_string(), params, throws })
    }
}

pub fn parse_pointcut(text: &str) -> Result<PointcutExpr, String> {
    let mut p = Parser { toks: tokenize(text)?, pos: 0 };
    let e = p.or_expr()?;
    if p.pos != p.toks.len() {
        return Err(format!("trailing input after pointcut: {:?}", p.peek()));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_consistency_pointcut() {
        let e = PointcutExpr::and(vec![
            PointcutExpr::This("aCommand".into()),
            PointcutExpr::Execution(MethodPattern::new(
                "void",
                "AbstractCommand",
                true,
                "execute",
                Params::List(vec![]),
            )),
            PointcutExpr::not(PointcutExpr::Within("*..DrawApplication.*".into())),
        ]);
        assert_eq!(
            e.to_string(),
            "this(aCommand) && execution(void AbstractCommand+.execute()) && !within(*..DrawApplication.*)"
        );
        assert_eq!(parse_pointcut(&e.to_string()).unwrap(), e);
        assert_eq!(parse_pointcut(&e.render_lines().join("\n")).unwrap(), e);
    }

    #[test]
    fn nested_operators_and_throws() {
        let mut call = MethodPattern::new("*", "StorageFormat", false, "parse", Params::Any);
        call.throws = Some("IOErr".into());
        let e = PointcutExpr::and(vec![
            PointcutExpr::or(vec![PointcutExpr::Call(call), PointcutExpr::Target("r".into())]),
            PointcutExpr::Cflow(Box::new(PointcutExpr::Named { name: "callerSpace".into(), args: vec!["m".into()] })),
            PointcutExpr::not(PointcutExpr::and(vec![
                PointcutExpr::Args(vec!["*".into(), "m".into(), "..".into()]),
                PointcutExpr::This("x".into()),
            ])),
        ]);
        let text = e.to_string();
        assert!(text.starts_with("(call(* StorageFormat.parse(..) throws IOErr) || target(r))"));
        assert_eq!(parse_pointcut(&text).unwrap(), e);
        assert!(parse_pointcut("execution(void f()").is_err());
        assert!(parse_pointcut("a() & b()").is_err());
    }
}
