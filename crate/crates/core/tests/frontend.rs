//! Every fixture loads, and each call statement yields one call record.

mod support;

use sortweaver_core::minilang::extract_sources;
use sortweaver_core::source_model::{load_facts, records_to_string, FactRecord};
use sortweaver_core::*;

#[test]
fn corpus_call_records_match_call_statements() {
    for (name, src) in corpus::FILES {
        let (records, diags) = extract_sources(&[(name.to_string(), src.to_string())])
            .unwrap_or_else(|d| panic!("{name}: {d:?}"));
        assert!(diags.is_empty(), "{name}: {diags:?}");
        let calls = records.iter().filter(|r| matches!(r, FactRecord::Call(_))).count();
        assert_eq!(calls, support::count_call_statements(src), "{name}");
        let m = SourceModel::from_records(records.clone()).unwrap();
        let back = load_facts(records_to_string(&m.to_records()).as_bytes()).unwrap();
        assert_eq!(back.to_records(), m.to_records(), "{name}");
    }
}

#[test]
fn counter_agrees_on_tricky_statements() {
    let src = r#"
        package q;
        public class A {
            private B b;
            public A() { super(); }
            A(int x) { this(); }
            public void run(B other) {
                if (check()) {
                    other.go("call(in string)");
                }
                B local = new B();
                if (b.more()) { local.go(name()); } else { run(local); }
                // commented(out);
                return;
            }
            boolean check() { return true; }
            String name() { return null; }
        }
        public class B {
            public void go(String s) { }
            public boolean more() { return false; }
        }"#;
    let (records, _) = extract_sources(&[("q.mlang".into(), src.into())]).unwrap();
    let calls = records.iter().filter(|r| matches!(r, FactRecord::Call(_))).count();
    assert_eq!(support::count_call_statements(src), 8);
    assert_eq!(calls, 8);
}

#[test]
fn broken_source_reports_position() {
    let err = extract_sources(&[("bad.mlang".into(), "class A { void f() { g(; } }".into())]).unwrap_err();
    assert!(!err.is_empty());
    assert!(err[0].to_string().starts_with("1:24: error"), "{}", err[0]);
}
