//! Syntax tree for MiniLang compilation units. Every node carries a position.

use super::Pos;
use crate::source_model::Visibility;

#[derive(Debug, Clone, PartialEq)]
pub struct CompilationUnit {
    pub package: Option<String>,
    pub types: Vec<TypeDeclNode>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeclKind {
    Class,
    Interface,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypeDeclNode {
    pub pos: Pos,
    pub kind: DeclKind,
    pub name: String,
    pub is_abstract: bool,
    /// `extends` list (one entry for classes, any number for interfaces).
    pub extends: Vec<String>,
    pub implements: Vec<String>,
    pub members: Vec<Member>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Member {
    Field(FieldNode),
    Method(MethodNode),
    Type(TypeDeclNode),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldNode {
    pub pos: Pos,
    pub visibility: Visibility,
    pub is_static: bool,
    pub ty: String,
    pub name: String,
    pub init: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub ty: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodNode {
    pub pos: Pos,
    pub visibility: Visibility,
    pub is_static: bool,
    pub is_abstract: bool,
    /// `None` for constructors.
    pub ret: Option<String>,
    pub name: String,
    pub params: Vec<Param>,
    pub throws: Vec<String>,
    pub body: Option<Block>,
}

impl MethodNode {
    pub fn is_constructor(&self) -> bool {
        self.ret.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Block {
    pub stmts: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub pos: Pos,
    pub kind: StmtKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatchClause {
    pub ty: String,
    pub name: String,
    pub body: Block,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Expr(Expr),
    Return(Option<Expr>),
    Throw(Expr),
    Local { ty: String, name: String, init: Option<Expr> },
    Assign { target: Expr, value: Expr },
    If { cond: Expr, then: Block, els: Option<Block> },
    Try { body: Block, catches: Vec<CatchClause> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub pos: Pos,
    pub kind: ExprKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    /// `recv.name(args)` or `name(args)` when `receiver` is `None`.
    Call { receiver: Option<Box<Expr>>, name: String, args: Vec<Expr> },
    /// `super(args)` or `this(args)` constructor chaining.
    CtorCall { is_super: bool, args: Vec<Expr> },
    New { ty: String, args: Vec<Expr>, body: Option<Vec<Member>> },
    Name(String),
    This,
    Super,
    Null,
    Bool(bool),
    Int(String),
    Str(String),
    FieldAccess { target: Box<Expr>, name: String },
    Binary { op: &'static str, lhs: Box<Expr>, rhs: Box<Expr> },
    Unary { op: &'static str, expr: Box<Expr> },
    Cast { ty: String, expr: Box<Expr> },
}
