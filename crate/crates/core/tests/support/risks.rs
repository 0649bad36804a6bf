//! One triggering program and one minimally different quiet program per
//! risk code. Each case panics when the expectation fails.

use sortweaver_core::minilang::extract_sources;
use sortweaver_core::refactoring::flag_precedence;
use sortweaver_core::*;

fn model(src: &str) -> SourceModel {
    let (records, _) = extract_sources(&[("t.mlang".into(), src.into())]).expect("fixture parses");
    SourceModel::from_records(records).expect("fixture facts are consistent")
}

fn plan_for(src: &str, binding: QueryBinding) -> RefactoringPlan {
    let m = model(src);
    let r = execute(&m, &binding, DispatchPolicy::default()).expect("binding resolves");
    plan(&m, &r, "case", &PlanOptions::default()).expect("plan builds")
}

fn cb(target: &str, scope: &str) -> QueryBinding {
    QueryBinding::CB { target: target.into(), scope: scope.into() }
}

fn fires(src: &str, binding: QueryBinding, code: RiskCode) {
    let p = plan_for(src, binding);
    assert!(p.has_warning(code), "{code} expected, got {:?}\n{}", p.warnings, p.aspect_text);
}

fn quiet(src: &str, binding: QueryBinding, code: RiskCode) {
    let p = plan_for(src, binding);
    assert!(!p.has_warning(code), "{code} unexpected: {:?}\n{}", p.warnings, p.aspect_text);
}

const ANON: &str = "
package t;
public abstract class Base {
    public void refresh() { }
    public abstract void execute();
}
public class A extends Base {
    public void execute() { work(); refresh(); }
    void work() { }
}
public class Menu {
    public void build() {
        Base b = new Base() {
            public void execute() { refresh(); }
        };
    }
}";

const ANON_TWIN: &str = "
package t;
public abstract class Base {
    public void refresh() { }
    public abstract void execute();
}
public class A extends Base {
    public void execute() { work(); refresh(); }
    void work() { }
}
public class B extends Base {
    public void execute() { refresh(); }
}";

pub fn anon_callers_fires() {
    fires(ANON, cb("Base.refresh", "Base"), RiskCode::AnonCallers);
}

pub fn anon_callers_quiet_for_named_class() {
    quiet(ANON_TWIN, cb("Base.refresh", "Base"), RiskCode::AnonCallers);
}

const TANGLED: &str = "
package t;
public class Base {
    public void refresh() { }
    public void a() { }
    public void b() { }
}
public class A extends Base {
    public void execute() { a(); refresh(); b(); }
}
public class B extends Base {
    public void execute() { a(); b(); refresh(); }
}";

pub fn tangled_fires_for_mid_body_call() {
    fires(TANGLED, cb("Base.refresh", "Base"), RiskCode::Tangled);
}

pub fn tangled_quiet_when_calls_close_the_body() {
    let twin = TANGLED.replace("a(); refresh(); b();", "a(); b(); refresh();");
    quiet(&twin, cb("Base.refresh", "Base"), RiskCode::Tangled);
}

const SUPER: &str = "
package t;
public class Base {
    public void check() { }
    public void execute() { }
}
public class A extends Base {
    public void execute() { super.check(); work(); }
    void work() { }
}";

pub fn super_call_fires() {
    fires(SUPER, cb("Base.check", "Base"), RiskCode::SuperCall);
}

pub fn super_call_quiet_for_this_call() {
    quiet(&SUPER.replace("super.check();", "check();"), cb("Base.check", "Base"), RiskCode::SuperCall);
}

const ENCAPS: &str = "
package t;
public class Base {
    protected void refresh() { }
}
public class A extends Base {
    public void execute() { work(); refresh(); }
    void work() { }
}";

pub fn encapsulation_fires_for_protected_target() {
    let p = plan_for(ENCAPS, cb("Base.refresh", "Base"));
    assert!(p.has_warning(RiskCode::Encapsulation));
    assert!(p.aspect.privileged && p.aspect_text.contains("privileged aspect"));
}

pub fn encapsulation_quiet_for_public_target() {
    let p = plan_for(&ENCAPS.replace("protected void refresh", "public void refresh"), cb("Base.refresh", "Base"));
    assert!(!p.has_warning(RiskCode::Encapsulation));
    assert!(!p.aspect.privileged);
}

const OMISSION: &str = "
package t;
public abstract class Base {
    public void refresh() { }
    public abstract void execute();
}
public class A extends Base {
    public void execute() { work(); refresh(); }
    void work() { }
}
public class B extends Base {
    public void execute() { work(); refresh(); }
    void work() { }
}
public class C extends Base {
    public void execute() { work(); }
    void work() { }
}";

pub fn omission_check_fires_for_silent_sibling() {
    let p = plan_for(OMISSION, cb("Base.refresh", "Base"));
    let w = p.warnings_of(RiskCode::OmissionCheck).next().expect("OMISSION_CHECK");
    assert_eq!(w.evidence, vec!["t.C.execute()".to_string()]);
    assert!(p.aspect_text.contains("!within(*..C)"), "{}", p.aspect_text);
}

pub fn omission_check_quiet_when_every_sibling_calls() {
    let twin = OMISSION.replace("public void execute() { work(); }", "public void execute() { work(); refresh(); }");
    quiet(&twin, cb("Base.refresh", "Base"), RiskCode::OmissionCheck);
}

const REDIR: &str = "
package t;
public interface Figure {
    void draw();
    void move(int d);
}
public class Rect implements Figure {
    public void draw() { }
    public void move(int d) { }
}
public class Border implements Figure {
    private Figure inner;
    public Border(Figure f) { inner = f; }
    public void draw() { inner.draw(); }
    public void move(int d) { inner.move(d); }
}
public class Panel {
    public void paint(Border b) { b.draw(); }
}";

fn rl() -> QueryBinding {
    QueryBinding::RL { redirector: "Border".into(), receiver: "Figure".into() }
}

pub fn redir_extra_roles_fires() {
    let src = REDIR.replace("public void move(int d) { inner.move(d); }", "public void move(int d) { inner.move(d); }\n    public void highlight() { }");
    fires(&src, rl(), RiskCode::RedirExtraRoles);
}

pub fn redir_extra_roles_quiet_for_pure_redirector() {
    quiet(REDIR, rl(), RiskCode::RedirExtraRoles);
}

pub fn redir_clients_fires_for_direct_receiver_call() {
    let src = REDIR.replace("public void paint(Border b) { b.draw(); }", "public void paint(Border b, Figure f) { b.draw(); f.draw(); }");
    fires(&src, rl(), RiskCode::RedirClients);
}

pub fn redir_clients_quiet_when_all_clients_go_through_redirector() {
    quiet(REDIR, rl(), RiskCode::RedirClients);
}

pub fn redir_new_methods_fires_for_unforwarded_receiver_method() {
    let src = REDIR
        .replace("    void move(int d);\n}", "    void move(int d);\n    void resize();\n}")
        .replace("public void move(int d) { }", "public void move(int d) { }\n    public void resize() { }");
    let p = plan_for(&src, rl());
    let w = p.warnings_of(RiskCode::RedirNewMethods).next().expect("REDIR_NEW_METHODS");
    assert_eq!(w.evidence, vec!["t.Figure.resize()".to_string()]);
}

pub fn redir_new_methods_quiet_when_every_method_is_forwarded() {
    quiet(REDIR, rl(), RiskCode::RedirNewMethods);
}

const ROLE: &str = "
package t;
public class Activity { }
public interface Undoable {
    Activity create();
}
public class BaseCmd {
    public void run() { }
}
public class Cmd extends BaseCmd implements Undoable {
    protected Activity create() { return null; }
}";

fn rsi() -> QueryBinding {
    QueryBinding::RSI { role: "Undoable".into(), scope: "Cmd".into() }
}

pub fn visibility_change_fires_for_protected_member() {
    fires(ROLE, rsi(), RiskCode::VisibilityChange);
}

pub fn visibility_change_quiet_for_public_member() {
    quiet(&ROLE.replace("protected Activity create", "public Activity create"), rsi(), RiskCode::VisibilityChange);
}

pub fn intro_conflict_fires_when_member_also_overrides_class_method() {
    let src = ROLE.replace("public void run() { }", "public void run() { }\n    public Activity create() { return null; }");
    let src = src.replace("protected Activity create()", "public Activity create()");
    let p = plan_for(&src, rsi());
    let w = p.warnings_of(RiskCode::IntroConflict).next().expect("INTRO_CONFLICT");
    assert_eq!(w.severity, refactoring::RiskSeverity::Blocker);
    assert!(w.evidence.contains(&"t.BaseCmd.create()".to_string()));
}

pub fn intro_conflict_quiet_without_superclass_member() {
    quiet(&ROLE.replace("protected Activity create", "public Activity create"), rsi(), RiskCode::IntroConflict);
}

const SUPPORT: &str = "
package t;
public class Sel {
    public void clear() { }
}
public class Cmd {
    private Sel sel;
    public void execute() { sel.clear(); }
    public static class UndoActivity {
        public void undo() { sel.clear(); }
    }
}";

pub fn sc_not_introducible_fires_for_support_class_plan() {
    fires(SUPPORT, QueryBinding::SC { scope: "Cmd".into(), role: None }, RiskCode::ScNotIntroducible);
}

pub fn sc_not_introducible_quiet_for_other_sort_on_same_code() {
    quiet(SUPPORT, cb("Sel.clear", "Cmd"), RiskCode::ScNotIntroducible);
}

pub fn sc_broken_deps_fires_for_private_enclosing_field() {
    let p = plan_for(SUPPORT, QueryBinding::SC { scope: "Cmd".into(), role: None });
    let w = p.warnings_of(RiskCode::ScBrokenDeps).next().expect("SC_BROKEN_DEPS");
    assert_eq!(w.evidence, vec!["t.Cmd.sel".to_string()]);
}

pub fn sc_broken_deps_quiet_for_public_field() {
    quiet(&SUPPORT.replace("private Sel sel", "public Sel sel"), QueryBinding::SC { scope: "Cmd".into(), role: None }, RiskCode::ScBrokenDeps);
}

const STORAGE: &str = "
package t;
public class IOErr { }
public class Format {
    public void read(String n) throws IOErr { load(n); }
    public void load(String n) throws IOErr { parse(n); }
    public void parse(String n) throws IOErr {
        if (n == null) {
            throw new IOErr();
        }
    }
}
public class CachedFormat extends Format {
    public void load(String n) throws IOErr { }
}";

fn ep() -> QueryBinding {
    QueryBinding::EP { exception: "IOErr".into(), root: None }
}

pub fn ep_type_lost_fires_for_exception_plan() {
    fires(STORAGE, ep(), RiskCode::EpTypeLost);
}

pub fn ep_type_lost_quiet_for_other_sort_on_same_code() {
    quiet(STORAGE, cb("Format.parse", "Format"), RiskCode::EpTypeLost);
}

pub fn ep_overrides_fires_for_overrider_outside_chain() {
    let p = plan_for(STORAGE, ep());
    let w = p.warnings_of(RiskCode::EpOverrides).next().expect("EP_OVERRIDES");
    assert_eq!(w.evidence, vec!["t.CachedFormat.load(String)".to_string()]);
}

pub fn ep_overrides_quiet_when_overrider_declares_nothing() {
    let twin = STORAGE.replace("public void load(String n) throws IOErr { }", "public void load(String n) { }");
    quiet(&twin, ep(), RiskCode::EpOverrides);
}

const SHARED: &str = "
package t;
public class Base {
    public void refresh() { }
    public void log() { }
}
public class A extends Base {
    public void execute() { work(); refresh(); log(); }
    void work() { }
}
public class B extends Base {
    public void execute() { work(); refresh(); }
    void work() { }
}
public class C extends Base {
    public void run() { work(); log(); }
    void work() { }
}";

fn group_plan(src: &str) -> RefactoringPlan {
    let m = model(src);
    let results: Vec<(String, QueryResult)> = [("g/refresh", cb("Base.refresh", "Base")), ("g/log", cb("Base.log", "Base"))]
        .into_iter()
        .map(|(p, b)| (p.to_string(), execute(&m, &b, DispatchPolicy::default()).unwrap()))
        .collect();
    refactoring::plan_group(&m, "g", &results, &PlanOptions::default()).unwrap()
}

pub fn precedence_fires_for_advice_sharing_an_execution() {
    let p = group_plan(SHARED);
    let w = p.warnings_of(RiskCode::Precedence).next().expect("PRECEDENCE");
    assert_eq!(w.severity, refactoring::RiskSeverity::Info);
    assert!(w.evidence.iter().any(|e| e.contains("exec:")), "{:?}", w.evidence);
}

pub fn precedence_quiet_for_disjoint_advice() {
    let twin = SHARED.replace("work(); refresh(); log();", "work(); refresh();");
    let p = group_plan(&twin);
    assert!(!p.has_warning(RiskCode::Precedence), "{:?}", p.warnings);
}

pub fn precedence_across_separate_plans() {
    let m = model(SHARED);
    let mut plans: Vec<RefactoringPlan> = [cb("Base.refresh", "Base"), cb("Base.log", "Base")]
        .into_iter()
        .enumerate()
        .map(|(i, b)| {
            let r = execute(&m, &b, DispatchPolicy::default()).unwrap();
            plan(&m, &r, &format!("p{i}"), &PlanOptions::default()).unwrap()
        })
        .collect();
    flag_precedence(&mut plans);
    assert!(plans.iter().all(|p| p.has_warning(RiskCode::Precedence)));
}

pub struct Case {
    pub name: &'static str,
    pub code: RiskCode,
    /// Whether this is the triggering program rather than the quiet twin.
    pub fires: bool,
    pub run: fn(),
}

pub fn cases() -> Vec<Case> {
    vec![
        Case { name: "anon_callers_fires", code: RiskCode::AnonCallers, fires: true, run: anon_callers_fires },
        Case { name: "anon_callers_quiet_for_named_class", code: RiskCode::AnonCallers, fires: false, run: anon_callers_quiet_for_named_class },
        Case { name: "tangled_fires_for_mid_body_call", code: RiskCode::Tangled, fires: true, run: tangled_fires_for_mid_body_call },
        Case { name: "tangled_quiet_when_calls_close_the_body", code: RiskCode::Tangled, fires: false, run: tangled_quiet_when_calls_close_the_body },
        Case { name: "super_call_fires", code: RiskCode::SuperCall, fires: true, run: super_call_fires },
        Case { name: "super_call_quiet_for_this_call", code: RiskCode::SuperCall, fires: false, run: super_call_quiet_for_this_call },
        Case { name: "encapsulation_fires_for_protected_target", code: RiskCode::Encapsulation, fires: true, run: encapsulation_fires_for_protected_target },
        Case { name: "encapsulation_quiet_for_public_target", code: RiskCode::Encapsulation, fires: false, run: encapsulation_quiet_for_public_target },
        Case { name: "omission_check_fires_for_silent_sibling", code: RiskCode::OmissionCheck, fires: true, run: omission_check_fires_for_silent_sibling },
        Case { name: "omission_check_quiet_when_every_sibling_calls", code: RiskCode::OmissionCheck, fires: false, run: omission_check_quiet_when_every_sibling_calls },
        Case { name: "redir_extra_roles_fires", code: RiskCode::RedirExtraRoles, fires: true, run: redir_extra_roles_fires },
        Case { name: "redir_extra_roles_quiet_for_pure_redirector", code: RiskCode::RedirExtraRoles, fires: false, run: redir_extra_roles_quiet_for_pure_redirector },
        Case { name: "redir_clients_fires_for_direct_receiver_call", code: RiskCode::RedirClients, fires: true, run: redir_clients_fires_for_direct_receiver_call },
        Case { name: "redir_clients_quiet_when_all_clients_go_through_redirector", code: RiskCode::RedirClients, fires: false, run: redir_clients_quiet_when_all_clients_go_through_redirector },
        Case { name: "redir_new_methods_fires_for_unforwarded_receiver_method", code: RiskCode::RedirNewMethods, fires: true, run: redir_new_methods_fires_for_unforwarded_receiver_method },
        Case { name: "redir_new_methods_quiet_when_every_method_is_forwarded", code: RiskCode::RedirNewMethods, fires: false, run: redir_new_methods_quiet_when_every_method_is_forwarded },
        Case { name: "visibility_change_fires_for_protected_member", code: RiskCode::VisibilityChange, fires: true, run: visibility_change_fires_for_protected_member },
        Case { name: "visibility_change_quiet_for_public_member", code: RiskCode::VisibilityChange, fires: false, run: visibility_change_quiet_for_public_member },
        Case { name: "intro_conflict_fires_when_member_also_overrides_class_method", code: RiskCode::IntroConflict, fires: true, run: intro_conflict_fires_when_member_also_overrides_class_method },
        Case { name: "intro_conflict_quiet_without_superclass_member", code: RiskCode::IntroConflict, fires: false, run: intro_conflict_quiet_without_superclass_member },
        Case { name: "sc_not_introducible_fires_for_support_class_plan", code: RiskCode::ScNotIntroducible, fires: true, run: sc_not_introducible_fires_for_support_class_plan },
        Case { name: "sc_not_introducible_quiet_for_other_sort_on_same_code", code: RiskCode::ScNotIntroducible, fires: false, run: sc_not_introducible_quiet_for_other_sort_on_same_code },
        Case { name: "sc_broken_deps_fires_for_private_enclosing_field", code: RiskCode::ScBrokenDeps, fires: true, run: sc_broken_deps_fires_for_private_enclosing_field },
        Case { name: "sc_broken_deps_quiet_for_public_field", code: RiskCode::ScBrokenDeps, fires: false, run: sc_broken_deps_quiet_for_public_field },
        Case { name: "ep_type_lost_fires_for_exception_plan", code: RiskCode::EpTypeLost, fires: true, run: ep_type_lost_fires_for_exception_plan },
        Case { name: "ep_type_lost_quiet_for_other_sort_on_same_code", code: RiskCode::EpTypeLost, fires: false, run: ep_type_lost_quiet_for_other_sort_on_same_code },
        Case { name: "ep_overrides_fires_for_overrider_outside_chain", code: RiskCode::EpOverrides, fires: true, run: ep_overrides_fires_for_overrider_outside_chain },
        Case { name: "ep_overrides_quiet_when_overrider_declares_nothing", code: RiskCode::EpOverrides, fires: false, run: ep_overrides_quiet_when_overrider_declares_nothing },
        Case { name: "precedence_fires_for_advice_sharing_an_execution", code: RiskCode::Precedence, fires: true, run: precedence_fires_for_advice_sharing_an_execution },
        Case { name: "precedence_quiet_for_disjoint_advice", code: RiskCode::Precedence, fires: false, run: precedence_quiet_for_disjoint_advice },
    ]
}
