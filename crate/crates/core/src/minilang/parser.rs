//! Recursive descent parser for MiniLang. Stops at the first syntax error.

use super::ast::*;
use super::lexer::{lex, Tok, Token};
use super::{Diagnostic, Pos};
use crate::source_model::Visibility;

const MAX_DEPTH: usize = 64;

const KEYWORDS: &[&str] = &[
    "class",
    "interface",
    "extends",
    "implements",
    "public",
    "protected",
    "private",
    "static",
    "abstract",
    "final",
    "return",
    "throw",
    "throws",
    "if",
    "else",
    "try",
    "catch",
    "new",
    "this",
    "super",
    "null",
    "true",
    "false",
    "package",
];

/// Parses one MiniLang source text.
pub fn parse(src: &str) -> Result<CompilationUnit, Vec<Diagnostic>> {
    let tokens = lex(src).map_err(|d| vec![d])?;
    let mut p = Parser { tokens, cursor: 0, depth: 0 };
    p.unit().map_err(|d| vec![d])
}

type PResult<T> = Result<T, Diagnostic>;

struct Parser {
    tokens: Vec<Token>,
    cursor: usize,
    depth: usize,
}

#[derive(Default)]
struct Modifiers {
    visibility: Option<Visibility>,
    is_static: bool,
    is_abstract: bool,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.cursor].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.cursor + n).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn pos(&self) -> Pos {
        self.tokens[self.cursor].pos
    }

    fn advance(&mut self) -> &Token {
        let t = &self.tokens[self.cursor];
        if self.cursor < self.tokens.len() - 1 {
            self.cursor += 1;
        }
        t
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == kw)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn unexpected(&self, expected: &str) -> Diagnostic {
        Diagnostic::error(self.pos(), format!("expected {expected}, found {}", self.peek().describe()))
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{s}`")))
        }
    }


    fn ident(&mut self) -> PResult<String> {
        match self.peek() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.advance();
                Ok(s)
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    fn qualified_name(&mut self) -> PResult<String> {
        let mut name = self.ident()?;
        while self.is_sym(".") && matches!(self.peek_at(1), Tok::Ident(_)) {
            self.advance();
            name.push('.');
            name.push_str(&self.ident()?);
        }
        Ok(name)
    }

    fn type_name(&mut self) -> PResult<String> {
        let mut name = self.qualified_name()?;
        while self.is_sym("[") && matches!(self.peek_at(1), Tok::Sym("]")) {
            self.advance();
            self.advance();
            name.push_str("[]");
        }
        Ok(name)
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(Diagnostic::error(self.pos(), "nesting too deep"));
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    fn unit(&mut self) -> PResult<CompilationUnit> {
        let package = if self.eat_kw("package") {
            let name = self.qualified_name()?;
            self.expect_sym(";")?;
            Some(name)
        } else {
            None
        };
        let mut types = Vec::new();
        while *self.peek() != Tok::Eof {
            let mods = self.modifiers();
            types.push(self.type_decl(&mods)?);
        }
        Ok(CompilationUnit { package, types })
    }

    fn modifiers(&mut self) -> Modifiers {
        let mut m = Modifiers::default();
        loop {
            if self.eat_kw("public") {
                m.visibility = Some(Visibility::Public);
            } else if self.eat_kw("protected") {
                m.visibility = Some(Visibility::Protected);
            } else if self.eat_kw("private") {
                m.visibility = Some(Visibility::Private);
            } else if self.eat_kw("static") {
                m.is_static = true;
            } else if self.eat_kw("abstract") {
                m.is_abstract = true;
            } else if self.eat_kw("final") {
            } else {
                return m;
            }
        }
    }

    fn type_decl(&mut self, mods: &Modifiers) -> PResult<TypeDeclNode> {
        self.enter()?;
        let pos = self.pos();
        let kind = if self.eat_kw("class") {
            DeclKind::Class
        } else if self.eat_kw("interface") {
            DeclKind::Interface
        } else {
            return Err(self.unexpected("`class` or `interface`"));
        };
        let name = self.ident()?;
        let mut extends = Vec::new();
        let mut implements = Vec::new();
        if self.eat_kw("extends") {
            extends.push(self.qualified_name()?);
            while kind == DeclKind::Interface && self.eat_sym(",") {
                extends.push(self.qualified_name()?);
            }
        }
        if kind == DeclKind::Class && self.eat_kw("implements") {
            implements.push(self.qualified_name()?);
            while self.eat_sym(",") {
                implements.push(self.qualified_name()?);
            }
        }
        let members = self.class_body(&name, kind)?;
        self.leave();
        Ok(TypeDeclNode { pos, kind, name, is_abstract: mods.is_abstract, extends, implements, members })
    }

    fn class_body(&mut self, class_name: &str, kind: DeclKind) -> PResult<Vec<Member>> {
        let open = self.pos();
        self.expect_sym("{")?;
        let mut members = Vec::new();
        loop {
            if self.eat_sym("}") {
                return Ok(members);
            }
            if *self.peek() == Tok::Eof {
                return Err(Diagnostic::error(
                    self.pos(),
                    format!("expected `}}` to close `{{` opened at {open}, found end of input"),
                ));
            }
            members.push(self.member(class_name, kind)?);
        }
    }

    fn member(&mut self, class_name: &str, kind: DeclKind) -> PResult<Member> {
        let pos = self.pos();
        let mods = self.modifiers();
        if self.is_kw("class") || self.is_kw("interface") {
            return Ok(Member::Type(self.type_decl(&mods)?));
        }
        let in_interface = kind == DeclKind::Interface;
        let visibility = mods.visibility.unwrap_or(if in_interface { Visibility::Public } else { Visibility::Package });
        // constructor: `Name (`
        if matches!(self.peek(), Tok::Ident(n) if n == class_name) && matches!(self.peek_at(1), Tok::Sym("(")) {
            self.advance();
            let params = self.params()?;
            let throws = self.throws_clause()?;
            let body = Some(self.block()?);
            return Ok(Member::Method(MethodNode {
                pos,
                visibility,
                is_static: false,
                is_abstract: false,
                ret: None,
                name: class_name.to_string(),
                params,
                throws,
                body,
            }));
        }
        let ty = self.type_name()?;
        let name = self.ident()?;
        if self.is_sym("(") {
            let params = self.params()?;
            let throws = self.throws_clause()?;
            let body = if self.eat_sym(";") { None } else { Some(self.block()?) };
            let is_abstract = mods.is_abstract || (in_interface && body.is_none());
            if body.is_none() && !is_abstract {
                return Err(Diagnostic::error(pos, format!("method `{name}` has no body and is not abstract")));
            }
            if body.is_some() && mods.is_abstract {
                return Err(Diagnostic::error(pos, format!("abstract method `{name}` has a body")));
            }
            return Ok(Member::Method(MethodNode {
                pos,
                visibility,
                is_static: mods.is_static,
                is_abstract,
                ret: Some(ty),
                name,
                params,
                throws,
                body,
            }));
        }
        let init = if self.eat_sym("=") { Some(self.expr()?) } else { None };
        self.expect_sym(";")?;
        Ok(Member::Field(FieldNode { pos, visibility, is_static: mods.is_static, ty, name, init }))
    }

    fn params(&mut self) -> PResult<Vec<Param>> {
        self.expect_sym("(")?;
        let mut params = Vec::new();
        if self.eat_sym(")") {
            return Ok(params);
        }
        loop {
            self.eat_kw("final");
            let ty = self.type_name()?;
            let name = self.ident()?;
            params.push(Param { ty, name });
            if self.eat_sym(")") {
                return Ok(params);
            }
            self.expect_sym(",")?;
        }
    }

    fn throws_clause(&mut self) -> PResult<Vec<String>> {
        let mut out = Vec::new();
        if self.eat_kw("throws") {
            out.push(self.qualified_name()?);
            while self.eat_sym(",") {
                out.push(self.qualified_name()?);
            }
        }
        Ok(out)
    }

    fn block(&mut self) -> PResult<Block> {
        self.enter()?;
        let open = self.pos();
        self.expect_sym("{")?;
        let mut stmts = Vec::new();
        loop {
            if self.eat_sym("}") {
                break;
            }
            if *self.peek() == Tok::Eof {
                return Err(Diagnostic::error(
                    self.pos(),
                    format!("expected `}}` to close `{{` opened at {open}, found end of input"),
                ));
            }
            stmts.push(self.stmt()?);
        }
        self.leave();
        Ok(Block { stmts })
    }

    fn block_or_stmt(&mut self) -> PResult<Block> {
        if self.is_sym("{") {
            self.block()
        } else {
            Ok(Block { stmts: vec![self.stmt()?] })
        }
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        self.enter()?;
        let pos = self.pos();
        let kind = if self.eat_kw("return") {
            let value = if self.is_sym(";") { None } else { Some(self.expr()?) };
            self.expect_sym(";")?;
            StmtKind::Return(value)
        } else if self.eat_kw("throw") {
            let e = self.expr()?;
            self.expect_sym(";")?;
            StmtKind::Throw(e)
        } else if self.eat_kw("if") {
            self.expect_sym("(")?;
            let cond = self.expr()?;
            self.expect_sym(")")?;
            let then = self.block_or_stmt()?;
            let els = if self.eat_kw("else") { Some(self.block_or_stmt()?) } else { None };
            StmtKind::If { cond, then, els }
        } else if self.eat_kw("try") {
            let body = self.block()?;
            let mut catches = Vec::new();
            while self.eat_kw("catch") {
                self.expect_sym("(")?;
                let ty = self.qualified_name()?;
                let name = self.ident()?;
                self.expect_sym(")")?;
                catches.push(CatchClause { ty, name, body: self.block()? });
            }
            if catches.is_empty() {
                return Err(self.unexpected("`catch`"));
            }
            StmtKind::Try { body, catches }
        } else if let Some((ty, name)) = self.try_local_head() {
            let init = if self.eat_sym("=") { Some(self.expr()?) } else { None };
            self.expect_sym(";")?;
            StmtKind::Local { ty, name, init }
        } else {
            let e = self.expr()?;
            if self.eat_sym("=") {
                if !matches!(e.kind, ExprKind::Name(_) | ExprKind::FieldAccess { .. }) {
                    return Err(Diagnostic::error(e.pos, "invalid assignment target"));
                }
                let value = self.expr()?;
                self.expect_sym(";")?;
                StmtKind::Assign { target: e, value }
            } else {
                self.expect_sym(";")?;
                StmtKind::Expr(e)
            }
        };
        self.leave();
        Ok(Stmt { pos, kind })
    }

    /// Recognizes `Type name` followed by `=` or `;`, restoring the cursor otherwise.
    fn try_local_head(&mut self) -> Option<(String, String)> {
        let save = self.cursor;
        let result = (|| {
            let ty = self.type_name().ok()?;
            let name = self.ident().ok()?;
            if self.is_sym("=") || self.is_sym(";") {
                Some((ty, name))
            } else {
                None
            }
        })();
        if result.is_none() {
            self.cursor = save;
        }
        result
    }

    fn expr(&mut self) -> PResult<Expr> {
        self.enter()?;
        let e = self.binary(0);
        self.leave();
        e
    }

    fn binary(&mut self, level: usize) -> PResult<Expr> {
        const LEVELS: &[&[&str]] =
            &[&["||"], &["&&"], &["==", "!="], &["<", ">", "<=", ">="], &["+", "-"], &["*", "/", "%"]];
        if level == LEVELS.len() {
            return self.unary();
        }
        let mut lhs = self.binary(level + 1)?;
        loop {
            let op = match self.peek() {
                Tok::Sym(s) if LEVELS[level].contains(s) => *s,
                _ => return Ok(lhs),
            };
            let pos = self.pos();
            self.advance();
            let rhs = self.binary(level + 1)?;
            lhs = Expr { pos, kind: ExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) } };
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        for op in ["!", "-"] {
            if self.eat_sym(op) {
                self.enter()?;
                let expr = self.unary()?;
                self.leave();
                return Ok(Expr { pos, kind: ExprKind::Unary { op, expr: Box::new(expr) } });
            }
        }
        if self.is_sym("(") && self.looks_like_cast() {
            self.advance();
            let ty = self.type_name()?;
            self.expect_sym(")")?;
            self.enter()?;
            let expr = self.unary()?;
            self.leave();
            return Ok(Expr { pos, kind: ExprKind::Cast { ty, expr: Box::new(expr) } });
        }
        self.postfix()
    }

    fn looks_like_cast(&self) -> bool {
        let mut n = 1;
        loop {
            match self.peek_at(n) {
                Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => n += 1,
                _ => return false,
            }
            match self.peek_at(n) {
                Tok::Sym(".") => n += 1,
                Tok::Sym(")") => break,
                _ => return false,
            }
        }
        match self.peek_at(n + 1) {
            Tok::Ident(s) => !matches!(s.as_str(), "instanceof"),
            Tok::Str(_) | Tok::Int(_) | Tok::Sym("(") => true,
            _ => false,
        }
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        while self.is_sym(".") {
            self.advance();
            let pos = self.pos();
            let name = self.ident()?;
            if self.is_sym("(") {
                let args = self.args()?;
                e = Expr { pos, kind: ExprKind::Call { receiver: Some(Box::new(e)), name, args } };
            } else {
                e = Expr { pos, kind: ExprKind::FieldAccess { target: Box::new(e), name } };
            }
        }
        Ok(e)
    }

    fn args(&mut self) -> PResult<Vec<Expr>> {
        self.expect_sym("(")?;
        let mut args = Vec::new();
        if self.eat_sym(")") {
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if self.eat_sym(")") {
                return Ok(args);
            }
            self.expect_sym(",")?;
        }
    }

    fn primary(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        let kind = match self.peek().clone() {
            Tok::Sym("(") => {
                self.advance();
                let e = self.expr()?;
                self.expect_sym(")")?;
                return Ok(e);
            }
            Tok::Int(s) => {
                self.advance();
                ExprKind::Int(s)
            }
            Tok::Str(s) => {
                self.advance();
                ExprKind::Str(s)
            }
            Tok::Ident(kw) if kw == "new" => {
                self.advance();
                let ty = self.qualified_name()?;
                let args = self.args()?;
                let body = if self.is_sym("{") {
                    self.enter()?;
                    let simple = ty.rsplit('.').next().unwrap_or(&ty).to_string();
                    let members = self.class_body(&format!("{simple}$anon"), DeclKind::Class)?;
                    self.leave();
                    Some(members)
                } else {
                    None
                };
                ExprKind::New { ty, args, body }
            }
            Tok::Ident(kw) if kw == "this" || kw == "super" => {
                self.advance();
                let is_super = kw == "super";
                if self.is_sym("(") {
                    ExprKind::CtorCall { is_super, args: self.args()? }
                } else if is_super {
                    if !self.is_sym(".") {
                        return Err(self.unexpected("`.` after `super`"));
                    }
                    ExprKind::Super
                } else {
                    ExprKind::This
                }
            }
            Tok::Ident(kw) if kw == "null" => {
                self.advance();
                ExprKind::Null
            }
            Tok::Ident(kw) if kw == "true" || kw == "false" => {
                self.advance();
                ExprKind::Bool(kw == "true")
            }
            Tok::Ident(_) => {
                let name = self.ident()?;
                if self.is_sym("(") {
                    ExprKind::Call { receiver: None, name, args: self.args()? }
                } else {
                    ExprKind::Name(name)
                }
            }
            _ => return Err(self.unexpected("expression")),
        };
        Ok(Expr { pos, kind })
    }
}
