//! Lowers parsed compilation units to fact records.
//!
//! Ids are assigned per kind (`T`, `M`, `F`, `C`) in declaration order across
//! units. Statement ordinals number the flattened statements of a body in
//! pre-order; every call inside a statement shares its ordinal and calls are
//! emitted in evaluation (post-)order. Calls that resolve to no declared
//! method are recorded against a zero-statement stub.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use super::ast::*;
use super::{Diagnostic, Pos};
use crate::ids::FieldId;
use crate::source_model::{
    type_names_match, CallRecord, FactRecord, FieldRecord, MethodRecord, Receiver, TypeKind, TypeRecord, Visibility,
};

const PRIMITIVES: &[&str] = &["void", "int", "long", "short", "byte", "char", "boolean", "float", "double"];

/// Owner name used for calls whose receiver type cannot be determined.
pub const UNRESOLVED_OWNER: &str = "<unresolved>";

struct TypeInfo<'a> {
    id: String,
    name: String,
    simple: String,
    kind: TypeKind,
    is_abstract: bool,
    anon: bool,
    ext: bool,
    encl: Option<usize>,
    package: Option<String>,
    /// Superclass first when `has_extends`, then interfaces.
    raw_supers: Vec<String>,
    has_extends: bool,
    members: &'a [Member],
    file: usize,
}

struct MethodInfo<'a> {
    id: String,
    owner: usize,
    name: String,
    param_names: Vec<String>,
    params: Vec<String>,
    ret: String,
    vis: Visibility,
    is_static: bool,
    is_abstract: bool,
    ctor: bool,
    throws: Vec<String>,
    stmts: u32,
    raises: Vec<String>,
    body: Option<&'a Block>,
}

struct FieldInfo {
    id: String,
    owner: usize,
    name: String,
    ty: String,
    vis: Visibility,
}

struct Scope {
    ty: usize,
    method: usize,
    params: Vec<(String, String)>,
    locals: Vec<(String, String)>,
}

#[derive(Default)]
struct Extractor<'a> {
    types: Vec<TypeInfo<'a>>,
    methods: Vec<MethodInfo<'a>>,
    fields: Vec<FieldInfo>,
    calls: Vec<CallRecord>,
    by_qualified: HashMap<String, usize>,
    by_simple: BTreeMap<String, Vec<usize>>,
    children: Vec<Vec<usize>>,
    ext_by_name: BTreeMap<String, usize>,
    methods_of: Vec<Vec<usize>>,
    fields_of: Vec<Vec<usize>>,
    supers: Vec<Vec<Result<usize, String>>>,
    stubs: HashMap<(usize, String, Vec<String>, bool), usize>,
    anon_counter: HashMap<usize, usize>,
    diags: Vec<Diagnostic>,
}

/// Extracts fact records from parsed units. Diagnostics are warnings about
/// unresolved references; their `file` is the index into `units`.
pub fn extract_facts(units: &[CompilationUnit]) -> (Vec<FactRecord>, Vec<Diagnostic>) {
    let mut x = Extractor::default();
    for (file, unit) in units.iter().enumerate() {
        for decl in &unit.types {
            x.collect_decl(decl, None, &unit.package, file);
        }
    }
    x.index_types();
    x.collect_members();
    let declared = x.methods.len();
    for mi in 0..declared {
        x.extract_body(mi);
    }
    let diags = std::mem::take(&mut x.diags);
    (x.into_records(), diags)
}

fn count_stmts(block: &Block) -> u32 {
    block
        .stmts
        .iter()
        .map(|s| {
            1 + match &s.kind {
                StmtKind::If { then, els, .. } => count_stmts(then) + els.as_ref().map_or(0, count_stmts),
                StmtKind::Try { body, catches } => {
                    count_stmts(body) + catches.iter().map(|c| count_stmts(&c.body)).sum::<u32>()
                }
                _ => 0,
            }
        })
        .sum()
}

fn split_array(ty: &str) -> (&str, &str) {
    match ty.find('[') {
        Some(i) => (&ty[..i], &ty[i..]),
        None => (ty, ""),
    }
}

impl<'a> Extractor<'a> {
    fn push_type(&mut self, info: TypeInfo<'a>) -> usize {
        self.types.push(info);
        self.children.push(Vec::new());
        self.methods_of.push(Vec::new());
        self.fields_of.push(Vec::new());
        self.supers.push(Vec::new());
        self.types.len() - 1
    }

    fn next_type_id(&self) -> String {
        format!("T{}", self.types.len() + 1)
    }

    // ---- pass 1: types -------------------------------------------------

    fn collect_decl(&mut self, decl: &'a TypeDeclNode, encl: Option<usize>, package: &Option<String>, file: usize) {
        let name = match (encl, package) {
            (Some(e), _) => format!("{}.{}", self.types[e].name, decl.name),
            (None, Some(p)) => format!("{p}.{}", decl.name),
            (None, None) => decl.name.clone(),
        };
        let mut raw_supers = decl.extends.clone();
        raw_supers.extend(decl.implements.iter().cloned());
        let info = TypeInfo {
            id: self.next_type_id(),
            name,
            simple: decl.name.clone(),
            kind: match decl.kind {
                DeclKind::Class => TypeKind::Class,
                DeclKind::Interface => TypeKind::Interface,
            },
            is_abstract: decl.is_abstract || decl.kind == DeclKind::Interface,
            anon: false,
            ext: false,
            encl,
            package: package.clone(),
            raw_supers,
            has_extends: decl.kind == DeclKind::Class && !decl.extends.is_empty(),
            members: &decl.members,
            file,
        };
        let idx = self.push_type(info);
        self.collect_nested(&decl.members, idx, package, file);
    }

    fn collect_nested(&mut self, members: &'a [Member], idx: usize, package: &Option<String>, file: usize) {
        for m in members {
            match m {
                Member::Field(f) => {
                    if let Some(e) = &f.init {
                        self.collect_expr(e, idx, package, file);
                    }
                }
                Member::Method(m) => {
                    if let Some(b) = &m.body {
                        self.collect_block(b, idx, package, file);
                    }
                }
                Member::Type(t) => self.collect_decl(t, Some(idx), package, file),
            }
        }
    }

    fn collect_block(&mut self, b: &'a Block, idx: usize, package: &Option<String>, file: usize) {
        for s in &b.stmts {
            match &s.kind {
                StmtKind::Expr(e) | StmtKind::Throw(e) | StmtKind::Return(Some(e)) => {
                    self.collect_expr(e, idx, package, file)
                }
                StmtKind::Return(None) | StmtKind::Local { init: None, .. } => {}
                StmtKind::Local { init: Some(e), .. } => self.collect_expr(e, idx, package, file),
                StmtKind::Assign { target, value } => {
                    self.collect_expr(target, idx, package, file);
                    self.collect_expr(value, idx, package, file);
                }
                StmtKind::If { cond, then, els } => {
                    self.collect_expr(cond, idx, package, file);
                    self.collect_block(then, idx, package, file);
                    if let Some(b) = els {
                        self.collect_block(b, idx, package, file);
                    }
                }
                StmtKind::Try { body, catches } => {
                    self.collect_block(body, idx, package, file);
                    for c in catches {
                        self.collect_block(&c.body, idx, package, file);
                    }
                }
            }
        }
    }

    fn collect_expr(&mut self, e: &'a Expr, idx: usize, package: &Option<String>, file: usize) {
        match &e.kind {
            ExprKind::Call { receiver, args, .. } => {
                if let Some(r) = receiver {
                    self.collect_expr(r, idx, package, file);
                }
                for a in args {
                    self.collect_expr(a, idx, package, file);
                }
            }
            ExprKind::CtorCall { args, .. } => {
                for a in args {
                    self.collect_expr(a, idx, package, file);
                }
            }
            ExprKind::New { ty, args, body } => {
                for a in args {
                    self.collect_expr(a, idx, package, file);
                }
                if let Some(members) = body {
                    let mut ctx = idx;
                    while self.types[ctx].anon {
                        ctx = self.types[ctx].encl.expect("anonymous types are enclosed");
                    }
                    let n = self.anon_counter.entry(ctx).or_insert(0);
                    *n += 1;
                    let name = format!("{}$anon{}", self.types[ctx].name, n);
                    let simple = name.rsplit('.').next().unwrap_or(&name).to_string();
                    let info = TypeInfo {
                        id: self.next_type_id(),
                        name,
                        simple,
                        kind: TypeKind::Class,
                        is_abstract: false,
                        anon: true,
                        ext: false,
                        encl: Some(idx),
                        package: package.clone(),
                        raw_supers: vec![ty.clone()],
                        has_extends: true,
                        members,
                        file,
                    };
                    let anon = self.push_type(info);
                    self.collect_nested(members, anon, package, file);
                }
            }
            ExprKind::FieldAccess { target, .. } => self.collect_expr(target, idx, package, file),
            ExprKind::Binary { lhs, rhs, .. } => {
                self.collect_expr(lhs, idx, package, file);
                self.collect_expr(rhs, idx, package, file);
            }
            ExprKind::Unary { expr, .. } | ExprKind::Cast { expr, .. } => self.collect_expr(expr, idx, package, file),
            _ => {}
        }
    }

    fn index_types(&mut self) {
        for (i, t) in self.types.iter().enumerate() {
            self.by_qualified.entry(t.name.clone()).or_insert(i);
            if !t.anon {
                self.by_simple.entry(t.simple.clone()).or_default().push(i);
                if let Some(e) = t.encl {
                    self.children[e].push(i);
                }
            }
        }
        for i in 0..self.types.len() {
            let resolved =
                self.types[i].raw_supers.iter().map(|s| self.resolve_name(s, i).ok_or_else(|| s.clone())).collect();
            self.supers[i] = resolved;
        }
    }

    fn resolve_name(&self, name: &str, from: usize) -> Option<usize> {
        if let Some((first, rest)) = name.split_once('.') {
            if let Some(&i) = self.by_qualified.get(name) {
                return Some(i);
            }
            if let Some(p) = &self.types[from].package {
                if let Some(&i) = self.by_qualified.get(&format!("{p}.{name}")) {
                    return Some(i);
                }
            }
            let head = self.resolve_name(first, from)?;
            return self.by_qualified.get(&format!("{}.{rest}", self.types[head].name)).copied();
        }
        let mut cur = Some(from);
        while let Some(c) = cur {
            let t = &self.types[c];
            if !t.anon && !t.ext && t.simple == name {
                return Some(c);
            }
            if let Some(&i) = self.children[c].iter().find(|&&i| self.types[i].simple == name) {
                return Some(i);
            }
            cur = t.encl;
        }
        let candidates = self.by_simple.get(name)?;
        let pkg = &self.types[from].package;
        let same_pkg: Vec<usize> = candidates
            .iter()
            .copied()
            .filter(|&i| self.types[i].encl.is_none() && &self.types[i].package == pkg)
            .collect();
        match (same_pkg.as_slice(), candidates.as_slice()) {
            ([only], _) | (_, [only]) => Some(*only),
            _ => None,
        }
    }

    /// Type name as emitted: qualified when it resolves, as written otherwise.
    fn qualify(&self, ty: &str, from: usize) -> String {
        let (base, dims) = split_array(ty);
        if PRIMITIVES.contains(&base) {
            return ty.to_string();
        }
        match self.resolve_name(base, from) {
            Some(i) => format!("{}{dims}", self.types[i].name),
            None => ty.to_string(),
        }
    }

    fn ext_type(&mut self, name: &str) -> usize {
        if let Some(&i) = self.ext_by_name.get(name) {
            return i;
        }
        let info = TypeInfo {
            id: self.next_type_id(),
            name: name.to_string(),
            simple: name.rsplit('.').next().unwrap_or(name).to_string(),
            kind: TypeKind::Class,
            is_abstract: false,
            anon: false,
            ext: true,
            encl: None,
            package: None,
            raw_supers: Vec::new(),
            has_extends: false,
            members: &[],
            file: 0,
        };
        let i = self.push_type(info);
        self.ext_by_name.insert(name.to_string(), i);
        i
    }

    /// Source or external type for an emitted type name; `None` for
    /// primitives and arrays.
    fn type_index(&mut self, name: &str) -> Option<usize> {
        let (base, dims) = split_array(name);
        if !dims.is_empty() || PRIMITIVES.contains(&base) {
            return None;
        }
        match self.by_qualified.get(name) {
            Some(&i) => Some(i),
            None => Some(self.ext_type(name)),
        }
    }

    // ---- pass 2: members -----------------------------------------------

    fn collect_members(&mut self) {
        for ti in 0..self.types.len() {
            let members = self.types[ti].members;
            for m in members {
                match m {
                    Member::Field(f) => {
                        let info = FieldInfo {
                            id: format!("F{}", self.fields.len() + 1),
                            owner: ti,
                            name: f.name.clone(),
                            ty: self.qualify(&f.ty, ti),
                            vis: f.visibility,
                        };
                        self.fields_of[ti].push(self.fields.len());
                        self.fields.push(info);
                    }
                    Member::Method(m) => {
                        let info = MethodInfo {
                            id: format!("M{}", self.methods.len() + 1),
                            owner: ti,
                            name: if m.is_constructor() { self.types[ti].simple.clone() } else { m.name.clone() },
                            param_names: m.params.iter().map(|p| p.name.clone()).collect(),
                            params: m.params.iter().map(|p| self.qualify(&p.ty, ti)).collect(),
                            ret: m.ret.as_deref().map_or_else(|| "void".to_string(), |r| self.qualify(r, ti)),
                            vis: m.visibility,
                            is_static: m.is_static,
                            is_abstract: m.is_abstract,
                            ctor: m.is_constructor(),
                            throws: m.throws.iter().map(|t| self.qualify(t, ti)).collect(),
                            stmts: m.body.as_ref().map_or(0, count_stmts),
                            raises: Vec::new(),
                            body: m.body.as_ref(),
                        };
                        self.methods_of[ti].push(self.methods.len());
                        self.methods.push(info);
                    }
                    Member::Type(_) => {}
                }
            }
        }
    }

    // ---- hierarchy lookups ---------------------------------------------

    fn direct_supers(&self, t: usize) -> Vec<usize> {
        self.supers[t]
            .iter()
            .filter_map(|s| match s {
                Ok(i) => Some(*i),
                Err(raw) => self.ext_by_name.get(raw).copied(),
            })
            .collect()
    }

    /// `t` and its ancestors, breadth first.
    fn ancestry(&self, t: usize) -> Vec<usize> {
        let mut seen = HashSet::new();
        let mut order = Vec::new();
        let mut queue = VecDeque::from([t]);
        while let Some(x) = queue.pop_front() {
            if !seen.insert(x) {
                continue;
            }
            order.push(x);
            queue.extend(self.direct_supers(x));
        }
        order
    }

    fn lookup_method(&self, t: usize, name: &str, arg_types: &[Option<String>], ctor: bool) -> Option<usize> {
        let levels = if ctor { vec![t] } else { self.ancestry(t) };
        for ty in levels {
            let candidates: Vec<usize> = self.methods_of[ty]
                .iter()
                .copied()
                .filter(|&m| {
                    let mi = &self.methods[m];
                    mi.ctor == ctor && (ctor || mi.name == name) && mi.params.len() == arg_types.len()
                })
                .collect();
            if candidates.is_empty() {
                continue;
            }
            let exact = candidates.iter().copied().find(|&m| {
                self.methods[m].params.iter().zip(arg_types).all(|(p, a)| match a {
                    Some(a) => type_names_match(p, a) || p == "Object",
                    None => true,
                })
            });
            return Some(exact.unwrap_or(candidates[0]));
        }
        None
    }

    fn lookup_field(&self, t: usize, name: &str) -> Option<usize> {
        self.ancestry(t)
            .into_iter()
            .find_map(|ty| self.fields_of[ty].iter().copied().find(|&f| self.fields[f].name == name))
    }

    /// Field visible by simple name from `t`: inherited first, then enclosing.
    fn visible_field(&self, t: usize, name: &str) -> Option<usize> {
        let mut cur = Some(t);
        while let Some(c) = cur {
            if let Some(f) = self.lookup_field(c, name) {
                return Some(f);
            }
            cur = self.types[c].encl;
        }
        None
    }

    /// Where a stub for an unresolved member of `t` is placed: the first
    /// external supertype reachable from `t`, or `t` itself.
    fn stub_owner(&mut self, t: usize) -> usize {
        for x in self.ancestry(t) {
            if let Some(raw) = self.supers[x].iter().find_map(|s| s.as_ref().err().cloned()) {
                return self.ext_type(&raw);
            }
        }
        t
    }

    fn stub(&mut self, owner: usize, name: &str, params: Vec<String>, ctor: bool, pos: Pos, file: usize) -> usize {
        let key = (owner, name.to_string(), params.clone(), ctor);
        if let Some(&m) = self.stubs.get(&key) {
            return m;
        }
        self.diags.push(Diagnostic {
            file: Some(file),
            ..Diagnostic::warning(
                pos,
                format!("unresolved call `{name}({})` on `{}`; recorded against a stub", params.join(","), self.types[owner].name),
            )
        });
        let m = self.methods.len();
        self.methods.push(MethodInfo {
            id: format!("M{}", m + 1),
            owner,
            name: name.to_string(),
            param_names: Vec::new(),
            params,
            ret: "void".to_string(),
            vis: Visibility::Public,
            is_static: false,
            is_abstract: false,
            ctor,
            throws: Vec::new(),
            stmts: 0,
            raises: Vec::new(),
            body: None,
        });
        self.methods_of[owner].push(m);
        self.stubs.insert(key, m);
        m
    }

    // ---- pass 3: bodies ------------------------------------------------

    fn extract_body(&mut self, mi: usize) {
        let Some(body) = self.methods[mi].body else { return };
        let ty = self.methods[mi].owner;
        let params = self.methods[mi]
            .param_names
            .iter()
            .cloned()
            .zip(self.methods[mi].params.iter().cloned())
            .collect();
        let mut sc = Scope { ty, method: mi, params, locals: Vec::new() };
        let mut counter = 0;
        self.visit_block(body, &mut sc, &mut counter);
    }

    fn visit_block(&mut self, b: &'a Block, sc: &mut Scope, counter: &mut u32) {
        for s in &b.stmts {
            *counter += 1;
            let ord = *counter;
            match &s.kind {
                StmtKind::Expr(e) | StmtKind::Return(Some(e)) => self.visit_expr(e, sc, ord),
                StmtKind::Return(None) => {}
                StmtKind::Throw(e) => {
                    self.visit_expr(e, sc, ord);
                    let raised = match &e.kind {
                        ExprKind::New { ty, .. } => Some(self.qualify(ty, sc.ty)),
                        _ => self.expr_type(e, sc),
                    };
                    if let Some(r) = raised {
                        let raises = &mut self.methods[sc.method].raises;
                        if !raises.contains(&r) {
                            raises.push(r);
                        }
                    }
                }
                StmtKind::Local { ty, name, init } => {
                    if let Some(e) = init {
                        self.visit_expr(e, sc, ord);
                    }
                    let ty = self.qualify(ty, sc.ty);
                    sc.locals.push((name.clone(), ty));
                }
                StmtKind::Assign { target, value } => {
                    self.visit_expr(target, sc, ord);
                    self.visit_expr(value, sc, ord);
                }
                StmtKind::If { cond, then, els } => {
                    self.visit_expr(cond, sc, ord);
                    self.visit_block(then, sc, counter);
                    if let Some(b) = els {
                        self.visit_block(b, sc, counter);
                    }
                }
                StmtKind::Try { body, catches } => {
                    self.visit_block(body, sc, counter);
                    for c in catches {
                        let ty = self.qualify(&c.ty, sc.ty);
                        sc.locals.push((c.name.clone(), ty));
                        self.visit_block(&c.body, sc, counter);
                    }
                }
            }
        }
    }

    fn visit_expr(&mut self, e: &'a Expr, sc: &mut Scope, ord: u32) {
        match &e.kind {
            ExprKind::Call { receiver, name, args } => {
                if let Some(r) = receiver {
                    self.visit_expr(r, sc, ord);
                }
                for a in args {
                    self.visit_expr(a, sc, ord);
                }
                self.emit_call(e.pos, receiver.as_deref(), name, args, sc, ord);
            }
            ExprKind::CtorCall { is_super, args } => {
                for a in args {
                    self.visit_expr(a, sc, ord);
                }
                self.emit_ctor_call(e.pos, *is_super, args, sc, ord);
            }
            ExprKind::New { args, .. } => {
                for a in args {
                    self.visit_expr(a, sc, ord);
                }
            }
            ExprKind::FieldAccess { target, .. } => self.visit_expr(target, sc, ord),
            ExprKind::Binary { lhs, rhs, .. } => {
                self.visit_expr(lhs, sc, ord);
                self.visit_expr(rhs, sc, ord);
            }
            ExprKind::Unary { expr, .. } | ExprKind::Cast { expr, .. } => self.visit_expr(expr, sc, ord),
            _ => {}
        }
    }

    fn local_type(sc: &Scope, name: &str) -> Option<String> {
        sc.locals.iter().rev().find(|(n, _)| n == name).map(|(_, t)| t.clone())
    }

    fn param_index(sc: &Scope, name: &str) -> Option<usize> {
        if sc.locals.iter().any(|(n, _)| n == name) {
            return None;
        }
        sc.params.iter().position(|(n, _)| n == name)
    }

    /// Receiver kind and the type member lookup starts from.
    fn receiver_info(&mut self, receiver: Option<&Expr>, sc: &Scope) -> (Receiver, Option<usize>) {
        let Some(r) = receiver else { return (Receiver::This, Some(sc.ty)) };
        match &r.kind {
            ExprKind::This => (Receiver::This, Some(sc.ty)),
            ExprKind::Super => {
                let sup = match self.supers[sc.ty].first() {
                    Some(Ok(i)) if self.types[sc.ty].has_extends => Some(*i),
                    Some(Err(raw)) if self.types[sc.ty].has_extends => {
                        let raw = raw.clone();
                        Some(self.ext_type(&raw))
                    }
                    _ => None,
                };
                (Receiver::Super, sup)
            }
            ExprKind::Name(n) => {
                if let Some(t) = Self::local_type(sc, n) {
                    return (Receiver::Local, self.type_index(&t));
                }
                if let Some(index) = Self::param_index(sc, n) {
                    let t = sc.params[index].1.clone();
                    return (Receiver::Param { index }, self.type_index(&t));
                }
                if let Some(f) = self.visible_field(sc.ty, n) {
                    let (id, t) = (self.fields[f].id.clone(), self.fields[f].ty.clone());
                    return (Receiver::Field { field: FieldId::new(id) }, self.type_index(&t));
                }
                if let Some(t) = self.resolve_name(n, sc.ty) {
                    return (Receiver::Other, Some(t));
                }
                if n.starts_with(|c: char| c.is_uppercase()) {
                    return (Receiver::Other, Some(self.ext_type(n)));
                }
                (Receiver::Other, None)
            }
            ExprKind::FieldAccess { target, name } if target.kind == ExprKind::This => {
                match self.lookup_field(sc.ty, name) {
                    Some(f) => {
                        let (id, t) = (self.fields[f].id.clone(), self.fields[f].ty.clone());
                        (Receiver::Field { field: FieldId::new(id) }, self.type_index(&t))
                    }
                    None => (Receiver::Other, None),
                }
            }
            _ => {
                let t = self.expr_type(r, sc);
                (Receiver::Other, t.and_then(|t| self.type_index(&t)))
            }
        }
    }

    fn expr_type(&mut self, e: &Expr, sc: &Scope) -> Option<String> {
        match &e.kind {
            ExprKind::Name(n) => {
                if let Some(t) = Self::local_type(sc, n) {
                    return Some(t);
                }
                if let Some(i) = Self::param_index(sc, n) {
                    return Some(sc.params[i].1.clone());
                }
                if let Some(f) = self.visible_field(sc.ty, n) {
                    return Some(self.fields[f].ty.clone());
                }
                self.resolve_name(n, sc.ty).map(|i| self.types[i].name.clone())
            }
            ExprKind::This => Some(self.types[sc.ty].name.clone()),
            ExprKind::Str(_) => Some("String".to_string()),
            ExprKind::Int(_) => Some("int".to_string()),
            ExprKind::Bool(_) => Some("boolean".to_string()),
            ExprKind::New { ty, .. } | ExprKind::Cast { ty, .. } => Some(self.qualify(ty, sc.ty)),
            ExprKind::FieldAccess { target, name } => {
                let t = self.expr_type(target, sc)?;
                let ti = self.type_index(&t)?;
                self.lookup_field(ti, name).map(|f| self.fields[f].ty.clone())
            }
            ExprKind::Call { receiver, name, args } => {
                let (_, t) = self.receiver_info(receiver.as_deref(), sc);
                let arg_types: Vec<Option<String>> = args.iter().map(|a| self.expr_type(a, sc)).collect();
                let m = match receiver {
                    None => self.lookup_unqualified(sc.ty, name, &arg_types),
                    Some(_) => t.and_then(|t| self.lookup_method(t, name, &arg_types, false)),
                }?;
                let ret = &self.methods[m].ret;
                (ret != "void").then(|| ret.clone())
            }
            ExprKind::Binary { op, lhs, rhs } => match *op {
                "==" | "!=" | "<" | ">" | "<=" | ">=" | "&&" | "||" => Some("boolean".to_string()),
                _ => {
                    let l = self.expr_type(lhs, sc);
                    let r = self.expr_type(rhs, sc);
                    if *op == "+" && (l.as_deref() == Some("String") || r.as_deref() == Some("String")) {
                        Some("String".to_string())
                    } else {
                        l
                    }
                }
            },
            ExprKind::Unary { op, expr } => {
                if *op == "!" {
                    Some("boolean".to_string())
                } else {
                    self.expr_type(expr, sc)
                }
            }
            _ => None,
        }
    }

    fn lookup_unqualified(&self, t: usize, name: &str, arg_types: &[Option<String>]) -> Option<usize> {
        let mut cur = Some(t);
        while let Some(c) = cur {
            if let Some(m) = self.lookup_method(c, name, arg_types, false) {
                return Some(m);
            }
            cur = self.types[c].encl;
        }
        None
    }

    fn emit_call(&mut self, pos: Pos, receiver: Option<&Expr>, name: &str, args: &[Expr], sc: &mut Scope, ord: u32) {
        let (recv, recv_ty) = self.receiver_info(receiver, sc);
        let arg_types: Vec<Option<String>> = args.iter().map(|a| self.expr_type(a, sc)).collect();
        let found = match (receiver, recv_ty) {
            (None, _) => self.lookup_unqualified(sc.ty, name, &arg_types),
            (Some(_), Some(t)) => self.lookup_method(t, name, &arg_types, false),
            (Some(_), None) => None,
        };
        let target = match found {
            Some(m) => m,
            None => {
                let owner = match (receiver.map(|r| &r.kind), recv_ty) {
                    (None | Some(ExprKind::This), _) => self.stub_owner(sc.ty),
                    (Some(ExprKind::Super), Some(t)) => self.stub_owner(t),
                    (_, Some(t)) if self.types[t].ext => t,
                    (_, Some(t)) => self.stub_owner(t),
                    (_, None) => self.ext_type(UNRESOLVED_OWNER),
                };
                let params = arg_types.into_iter().map(|t| t.unwrap_or_else(|| "Object".to_string())).collect();
                let file = self.types[sc.ty].file;
                self.stub(owner, name, params, false, pos, file)
            }
        };
        self.push_call(target, recv, args, sc, ord);
    }

    fn emit_ctor_call(&mut self, pos: Pos, is_super: bool, args: &[Expr], sc: &mut Scope, ord: u32) {
        let (recv, owner) = if is_super {
            let sup = match self.supers[sc.ty].first() {
                Some(Ok(i)) if self.types[sc.ty].has_extends => *i,
                Some(Err(raw)) if self.types[sc.ty].has_extends => {
                    let raw = raw.clone();
                    self.ext_type(&raw)
                }
                _ => self.ext_type("Object"),
            };
            (Receiver::Super, sup)
        } else {
            (Receiver::This, sc.ty)
        };
        let arg_types: Vec<Option<String>> = args.iter().map(|a| self.expr_type(a, sc)).collect();
        let target = match self.lookup_method(owner, "", &arg_types, true) {
            Some(m) => m,
            None => {
                let name = self.types[owner].simple.clone();
                let params = arg_types.into_iter().map(|t| t.unwrap_or_else(|| "Object".to_string())).collect();
                let file = self.types[sc.ty].file;
                self.stub(owner, &name, params, true, pos, file)
            }
        };
        self.push_call(target, recv, args, sc, ord);
    }

    fn push_call(&mut self, target: usize, recv: Receiver, args: &[Expr], sc: &Scope, ord: u32) {
        let pass = args
            .iter()
            .enumerate()
            .filter_map(|(i, a)| match &a.kind {
                ExprKind::Name(n) => Self::param_index(sc, n).map(|j| (i, j)),
                _ => None,
            })
            .collect();
        self.calls.push(CallRecord {
            id: format!("C{}", self.calls.len() + 1),
            caller: self.methods[sc.method].id.clone(),
            target: self.methods[target].id.clone(),
            recv,
            ord,
            pass,
        });
    }

    // ---- output --------------------------------------------------------

    fn into_records(self) -> Vec<FactRecord> {
        let mut out = Vec::new();
        for (i, t) in self.types.iter().enumerate() {
            let supertypes = self.supers[i]
                .iter()
                .map(|s| match s {
                    Ok(j) => self.types[*j].id.clone(),
                    Err(raw) => match self.ext_by_name.get(raw) {
                        Some(&j) => self.types[j].id.clone(),
                        None => raw.clone(),
                    },
                })
                .collect();
            out.push(FactRecord::Type(TypeRecord {
                id: t.id.clone(),
                name: t.name.clone(),
                kind: t.kind,
                is_abstract: t.is_abstract,
                anon: t.anon,
                encl: t.encl.map(|e| self.types[e].id.clone()),
                supertypes,
                ext: t.ext,
            }));
        }
        for f in &self.fields {
            out.push(FactRecord::Field(FieldRecord {
                id: f.id.clone(),
                owner: self.types[f.owner].id.clone(),
                name: f.name.clone(),
                declared_type: f.ty.clone(),
                vis: f.vis,
            }));
        }
        for m in &self.methods {
            out.push(FactRecord::Method(MethodRecord {
                id: m.id.clone(),
                owner: self.types[m.owner].id.clone(),
                name: m.name.clone(),
                params: m.params.clone(),
                ret: m.ret.clone(),
                vis: m.vis,
                is_static: m.is_static,
                is_abstract: m.is_abstract,
                ctor: m.ctor,
                throws: m.throws.clone(),
                stmts: m.stmts,
                raises: m.raises.clone(),
            }));
        }
        out.extend(self.calls.into_iter().map(FactRecord::Call));
        out
    }
}
