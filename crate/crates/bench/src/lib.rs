//! Synthetic workloads for the criterion benches.

use std::fmt::Write;

use sortweaver_core::minilang::extract_sources;
use sortweaver_core::SourceModel;

/// A MiniLang program shaped like the command fixtures, scaled up: `commands`
/// command classes that notify a view, a tool for every fourth command, an
/// undo hook in every third, and a throws chain of depth `commands / 10`.
pub fn synthetic_source(commands: usize) -> String {
    let mut s = String::from(
        "package bench;\n\n\
         public interface Command {\n    void execute();\n}\n\n\
         public class View {\n    public void checkDamage() { }\n    public void repairDamage() { }\n}\n\n\
         public class Undo {\n    public void record() { }\n}\n\n\
         public class IOErr {\n}\n\n\
         public abstract class AbstractCommand implements Command {\n    \
         private View fView;\n    private Undo fUndo;\n\n    \
         public View view() {\n        return fView;\n    }\n\n    \
         public Undo undo() {\n        return fUndo;\n    }\n\n    \
         public void execute() { }\n}\n\n\
         public abstract class AbstractTool {\n    private View fView;\n\n    \
         public View view() {\n        return fView;\n    }\n}\n",
    );
    for i in 0..commands {
        let _ = write!(
            s,
            "\npublic class Command{i} extends AbstractCommand {{\n    \
             public void execute() {{\n        super.execute();\n        step{i}();\n"
        );
        if i % 3 == 0 {
            s.push_str("        undo().record();\n");
        }
        let _ = write!(s, "        view().checkDamage();\n    }}\n\n    protected void step{i}() {{ }}\n}}\n");
        if i % 4 == 0 {
            let _ = write!(
                s,
                "\npublic class Tool{i} extends AbstractTool {{\n    \
                 public void mouseUp() {{\n        view().checkDamage();\n        view().repairDamage();\n    }}\n}}\n"
            );
        }
    }
    let depth = (commands / 10).max(1);
    s.push_str("\npublic class Storage {\n");
    for d in 0..depth {
        let _ = write!(s, "    public void level{d}(String name) throws IOErr {{\n        level{}(name);\n    }}\n\n", d + 1);
    }
    let _ = write!(s, "    public void level{depth}(String name) throws IOErr {{\n        throw new IOErr();\n    }}\n}}\n");
    s
}

pub fn synthetic_model(commands: usize) -> SourceModel {
    let src = synthetic_source(commands);
    let (records, _) = extract_sources(&[("bench.mlang".to_string(), src)]).expect("synthetic source parses");
    SourceModel::from_records(records).expect("synthetic facts load")
}
