//! Aspect text: members, rendering and the line-oriented plan grammar.
//!
//! Layout is fixed: members at four spaces, bodies and pointcut operands at
//! eight. Parsing that layout back and rendering again is a fixed point.

use std::fmt::Write as _;

use super::pointcut::{parse_pointcut, PointcutExpr};
use super::PlanError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdviceKind {
    Before,
    After,
    Around,
}

impl AdviceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AdviceKind::Before => "before",
            AdviceKind::After => "after",
            AdviceKind::Around => "around",
        }
    }
}

impl std::str::FromStr for AdviceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "before" => Ok(AdviceKind::Before),
            "after" => Ok(AdviceKind::After),
            "around" => Ok(AdviceKind::Around),
            other => Err(format!("unknown advice kind `{other}` (expected before, after or around)")),
        }
    }
}

/// `Type name` pairs in a pointcut or advice parameter list.
pub type ParamList = Vec<(String, String)>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointcutDecl {
    pub name: String,
    pub params: ParamList,
    pub expr: PointcutExpr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Advice {
    pub kind: AdviceKind,
    /// Return type, only for around advice.
    pub ret: Option<String>,
    pub params: ParamList,
    pub pointcut: PointcutExpr,
    pub body: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Member {
    Comment(String),
    Pointcut(PointcutDecl),
    Advice(Advice),
    DeclareParents { ty: String, role: String },
    DeclareSoft { exception: String, pointcut: PointcutExpr },
    /// A one-line declaration kept verbatim, e.g. an inter-type field.
    Declaration(String),
    /// A braced block kept verbatim: an introduced method or a moved class.
    Block { header: String, body: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Aspect {
    pub name: String,
    pub privileged: bool,
    pub members: Vec<Member>,
}

const MEMBER: &str = "    ";
const INNER: &str = "        ";

fn params_text(ps: &ParamList) -> String {
    ps.iter().map(|(t, n)| format!("{t} {n}")).collect::<Vec<_>>().join(", ")
}

fn push_body(out: &mut String, body: &[String]) {
    for line in body {
        if line.is_empty() {
            out.push('\n');
        } else {
            let _ = writeln!(out, "{INNER}{line}");
        }
    }
}

/// Renders `aspect`. Fails when a template slot is left unfilled.
pub fn render_aspect(aspect: &Aspect) -> Result<String, PlanError> {
    if aspect.name.trim().is_empty() {
        return Err(PlanError::UnfilledSlot("aspect name".into()));
    }
    let mut out = String::new();
    let privileged = if aspect.privileged { "privileged " } else { "" };
    let _ = writeln!(out, "public {privileged}aspect {} {{", aspect.name);
    for (i, m) in aspect.members.iter().enumerate() {
        if i > 0 && !matches!(aspect.members[i - 1], Member::Comment(_)) {
            out.push('\n');
        }
        match m {
            Member::Comment(c) => {
                let _ = writeln!(out, "{MEMBER}// {c}");
            }
            Member::Pointcut(p) => {
                if p.name.is_empty() || p.expr.is_empty() {
                    return Err(PlanError::UnfilledSlot(format!("pointcut `{}`", p.name)));
                }
                let _ = writeln!(out, "{MEMBER}pointcut {}({}) :", p.name, params_text(&p.params));
                let lines = p.expr.render_lines();
                for (j, l) in lines.iter().enumerate() {
                    let end = if j + 1 == lines.len() { ";" } else { "" };
                    let _ = writeln!(out, "{INNER}{l}{end}");
                }
            }
            Member::Advice(a) => {
                if a.pointcut.is_empty() {
                    return Err(PlanError::UnfilledSlot(format!("{} advice pointcut", a.kind.as_str())));
                }
                if a.body.is_empty() {
                    return Err(PlanError::UnfilledSlot(format!("{} advice body", a.kind.as_str())));
                }
                let ret = match (&a.ret, a.kind) {
                    (Some(r), AdviceKind::Around) => format!("{r} "),
                    (None, AdviceKind::Around) => return Err(PlanError::UnfilledSlot("around return type".into())),
                    _ => String::new(),
                };
                let _ = writeln!(
                    out,
                    "{MEMBER}{ret}{}({}) : {} {{",
                    a.kind.as_str(),
                    params_text(&a.params),
                    a.pointcut
                );
                push_body(&mut out, &a.body);
                let _ = writeln!(out, "{MEMBER}}}");
            }
            Member::DeclareParents { ty, role } => {
                let _ = writeln!(out, "{MEMBER}declare parents : {ty} implements {role};");
            }
            Member::DeclareSoft { exception, pointcut } => {
                if pointcut.is_empty() {
                    return Err(PlanError::UnfilledSlot("declare soft pointcut".into()));
                }
                let _ = writeln!(out, "{MEMBER}declare soft : {exception} : {pointcut};");
            }
            Member::Declaration(d) => {
                let _ = writeln!(out, "{MEMBER}{d}");
            }
            Member::Block { header, body } => {
                if header.trim().is_empty() {
                    return Err(PlanError::UnfilledSlot("block header".into()));
                }
                let _ = writeln!(out, "{MEMBER}{header} {{");
                push_body(&mut out, body);
                let _ = writeln!(out, "{MEMBER}}}");
            }
        }
    }
    out.push_str("}\n");
    Ok(out)
}

fn perr(line: usize, message: impl Into<String>) -> PlanError {
    PlanError::Parse { line, message: message.into() }
}

/// Splits `name(T a, U b)` at its outer parentheses.
fn split_call(text: &str, line: usize) -> Result<(String, ParamList, String), PlanError> {
    let open = text.find('(').ok_or_else(|| perr(line, "expected `(`"))?;
    let mut depth = 0usize;
    let mut close = None;
    for (i, c) in text.char_indices().skip(open) {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    close = Some(i);
                    break;
                }
            }
            _ => {}
        }
    }
    let close = close.ok_or_else(|| perr(line, "unbalanced parentheses"))?;
    let mut params = Vec::new();
    for p in text[open + 1..close].split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (t, n) = p.rsplit_once(' ').ok_or_else(|| perr(line, format!("parameter `{p}` needs a type and a name")))?;
        params.push((t.trim().to_string(), n.to_string()));
    }
    Ok((text[..open].trim().to_string(), params, text[close + 1..].to_string()))
}

fn brace_delta(line: &str) -> i64 {
    let code = line.split("//").next().unwrap_or("");
    code.matches('{').count() as i64 - code.matches('}').count() as i64
}

/// Collects body lines after a `{` header up to the matching `}`.
fn take_body(lines: &[&str], i: &mut usize, start: usize) -> Result<Vec<String>, PlanError> {
    let mut depth = 1i64;
    let mut body = Vec::new();
    while *i < lines.len() {
        let l = lines[*i];
        *i += 1;
        if l.trim() == "}" && depth == 1 {
            return Ok(body);
        }
        depth += brace_delta(l);
        body.push(if l.trim().is_empty() { String::new() } else { l.strip_prefix(INNER).unwrap_or(l.trim_start()).to_string() });
    }
    Err(perr(start, "unterminated block"))
}

pub fn parse_aspect(text: &str) -> Result<Aspect, PlanError> {
    let lines: Vec<&str> = text.lines().collect();
    let mut i = 0;
    while i < lines.len() && lines[i].trim().is_empty() {
        i += 1;
    }
    let head = lines.get(i).ok_or_else(|| perr(1, "empty aspect text"))?.trim();
    let rest = head.strip_prefix("public ").unwrap_or(head);
    let (privileged, rest) = match rest.strip_prefix("privileged ") {
        Some(r) => (true, r),
        None => (false, rest),
    };
    let name = rest
        .strip_prefix("aspect ")
        .and_then(|r| r.strip_suffix('{'))
        .map(str::trim)
        .filter(|n| !n.is_empty())
        .ok_or_else(|| perr(i + 1, "expected `public aspect Name {`"))?
        .to_string();
    i += 1;
    let mut members = Vec::new();
    loop {
        let Some(raw) = lines.get(i) else { return Err(perr(i, "missing closing `}` of aspect")) };
        let lineno = i + 1;
        let l = raw.trim();
        i += 1;
        if l.is_empty() {
            continue;
        }
        if l == "}" {
            break;
        }
        if let Some(c) = l.strip_prefix("// ") {
            members.push(Member::Comment(c.to_string()));
        } else if let Some(rest) = l.strip_prefix("pointcut ") {
            let header = rest.strip_suffix(':').ok_or_else(|| perr(lineno, "expected `:` after pointcut header"))?;
            let (pname, params, tail) = split_call(header, lineno)?;
            if !tail.trim().is_empty() {
                return Err(perr(lineno, "unexpected text after pointcut parameters"));
            }
            let mut expr_text = String::new();
            loop {
                let Some(el) = lines.get(i) else { return Err(perr(lineno, "pointcut lacks `;`")) };
                i += 1;
                let el = el.trim();
                expr_text.push(' ');
                if let Some(last) = el.strip_suffix(';') {
                    expr_text.push_str(last);
                    break;
                }
                expr_text.push_str(el);
            }
            let expr = parse_pointcut(&expr_text).map_err(|m| perr(lineno, m))?;
            members.push(Member::Pointcut(PointcutDecl { name: pname, params, expr }));
        } else if let Some(rest) = l.strip_prefix("declare parents : ") {
            let body = rest.strip_suffix(';').ok_or_else(|| perr(lineno, "expected `;`"))?;
            let (ty, role) =
                body.split_once(" implements ").ok_or_else(|| perr(lineno, "expected `Type implements Role`"))?;
            members.push(Member::DeclareParents { ty: ty.trim().to_string(), role: role.trim().to_string() });
        } else if let Some(rest) = l.strip_prefix("declare soft : ") {
            let body = rest.strip_suffix(';').ok_or_else(|| perr(lineno, "expected `;`"))?;
            let (exc, pc) = body.split_once(" : ").ok_or_else(|| perr(lineno, "expected `Exception : pointcut`"))?;
            let pointcut = parse_pointcut(pc).map_err(|m| perr(lineno, m))?;
            members.push(Member::DeclareSoft { exception: exc.trim().to_string(), pointcut });
        } else if let Some(advice) = parse_advice_header(l, lineno)? {
            let (kind, ret, params, pointcut) = advice;
            let body = take_body(&lines, &mut i, lineno)?;
            members.push(Member::Advice(Advice { kind, ret, params, pointcut, body }));
        } else if let Some(header) = l.strip_suffix('{') {
            let body = take_body(&lines, &mut i, lineno)?;
            members.push(Member::Block { header: header.trim_end().to_string(), body });
        } else if l.ends_with(';') {
            members.push(Member::Declaration(l.to_string()));
        } else {
            return Err(perr(lineno, format!("unrecognized aspect member `{l}`")));
        }
    }
    if lines[i..].iter().any(|l| !l.trim().is_empty()) {
        return Err(perr(i + 1, "text after the aspect's closing `}`"));
    }
    Ok(Aspect { name, privileged, members })
}

type AdviceHeader = (AdviceKind, Option<String>, ParamList, PointcutExpr);

fn parse_advice_header(l: &str, lineno: usize) -> Result<Option<AdviceHeader>, PlanError> {
    let Some(head) = l.strip_suffix('{') else { return Ok(None) };
    let open = match head.find('(') {
        Some(o) => o,
        None => return Ok(None),
    };
    let words: Vec<&str> = head[..open].split_whitespace().collect();
    let (kind, ret) = match words.as_slice() {
        ["before"] => (AdviceKind::Before, None),
        ["after"] => (AdviceKind::After, None),
        [r, "around"] => (AdviceKind::Around, Some(r.to_string())),
        _ => return Ok(None),
    };
    let (_, params, tail) = split_call(head, lineno)?;
    let pc = tail.trim().strip_prefix(':').ok_or_else(|| perr(lineno, "expected `:` before advice pointcut"))?;
    let pointcut = parse_pointcut(pc).map_err(|m| perr(lineno, m))?;
    Ok(Some((kind, ret, params, pointcut)))
}

#[cfg(test)]
mod tests {
    use super::super::pointcut::{MethodPattern, Params};
    use super::*;

    fn sample() -> Aspect {
        let exec = PointcutExpr::Execution(MethodPattern::new("void", "PasteCommand", false, "execute", Params::List(vec![])));
        Aspect {
            name: "PasteCommandUndo".into(),
            privileged: false,
            members: vec![
                Member::Comment("moved support class".into()),
                Member::Block {
                    header: "public static class UndoActivity extends UndoableAdapter".into(),
                    body: vec!["public boolean undo() { }".into(), "".into(), "if (x) {".into(), "    y();".into(), "}".into()],
                },
                Member::DeclareParents { ty: "PasteCommand".into(), role: "Undoable".into() },
                Member::Declaration("private Object PasteCommand.selection;".into()),
                Member::Pointcut(PointcutDecl {
                    name: "executePasteCommand".into(),
                    params: vec![("PasteCommand".into(), "cmd".into())],
                    expr: PointcutExpr::and(vec![PointcutExpr::This("cmd".into()), exec.clone()]),
                }),
                Member::Advice(Advice {
                    kind: AdviceKind::After,
                    ret: None,
                    params: vec![("PasteCommand".into(), "cmd".into())],
                    pointcut: PointcutExpr::Named { name: "executePasteCommand".into(), args: vec!["cmd".into()] },
                    body: vec!["cmd.setUndoActivity(..);".into()],
                }),
                Member::Advice(Advice {
                    kind: AdviceKind::Around,
                    ret: Some("Object".into()),
                    params: vec![],
                    pointcut: exec,
                    body: vec!["return proceed();".into()],
                }),
                Member::DeclareSoft {
                    exception: "IOErr".into(),
                    pointcut: PointcutExpr::Call(MethodPattern::new("*", "S", false, "parse", Params::Any)),
                },
            ],
        }
    }

    #[test]
    fn round_trip_is_a_fixed_point() {
        let a = sample();
        let text = render_aspect(&a).unwrap();
        assert!(text.starts_with("public aspect PasteCommandUndo {\n"));
        assert!(text.contains("    after(PasteCommand cmd) : executePasteCommand(cmd) {\n"));
        let back = parse_aspect(&text).unwrap();
        assert_eq!(back, a);
        assert_eq!(render_aspect(&back).unwrap(), text);
    }

    #[test]
    fn unfilled_slots_and_bad_text() {
        let mut a = sample();
        a.members.push(Member::Advice(Advice {
            kind: AdviceKind::Before,
            ret: None,
            params: vec![],
            pointcut: PointcutExpr::And(vec![]),
            body: vec!["x();".into()],
        }));
        assert!(matches!(render_aspect(&a), Err(PlanError::UnfilledSlot(_))));
        assert!(matches!(parse_aspect("aspect X {\n"), Err(PlanError::Parse { .. })));
        assert!(matches!(parse_aspect("public aspect X {\n    what\n}\n"), Err(PlanError::Parse { .. })));
    }
}
