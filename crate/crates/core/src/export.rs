//! JSON and Graphviz output.

use serde::Serialize;

use crate::print::{print_process, Dialect, PrintAction};
use crate::semantics::{Exploration, Reduce};

pub const SCHEMA_VERSION: u32 = 1;

/// Every JSON document carries the schema version and what it holds.
#[derive(Debug, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub schema: u32,
    pub kind: &'a str,
    pub data: &'a T,
}

pub fn to_json<T: Serialize>(kind: &str, data: &T) -> String {
    let env = Envelope { schema: SCHEMA_VERSION, kind, data };
    serde_json::to_string_pretty(&env).expect("exported values serialize")
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// The explored state graph. Nodes show the state, edges the channel tag
/// and label of the step.
pub fn exploration_dot<A: Reduce + PrintAction>(ex: &Exploration<A>) -> String {
    let mut out = String::from("digraph exploration {\n  node [shape=box, fontname=monospace];\n");
    for (i, s) in ex.states.iter().enumerate() {
        let text = print_process(s, Dialect::Native);
        let style = if i == 0 { ", style=bold" } else { "" };
        out.push_str(&format!("  s{i} [label=\"{}\"{style}];\n", escape(&text)));
    }
    for e in &ex.edges {
        let label = match &e.label {
            Some(l) => format!("{} {}", e.tag, l),
            None => e.tag.clone(),
        };
        out.push_str(&format!("  s{} -> s{} [label=\"{}\"];\n", e.from, e.to, escape(&label)));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_classical;
    use crate::semantics::{explore, Mode};

    #[test]
    fn json_is_versioned() {
        let p = parse_classical("x!3").unwrap();
        let v: serde_json::Value = serde_json::from_str(&to_json("process", &p)).unwrap();
        assert_eq!(v["schema"], 1);
        assert_eq!(v["data"]["kind"], "act");
    }

    #[test]
    fn dot_has_one_edge_per_step() {
        let p = parse_classical("(new x y: lin!int.end) x!3 | lin y?z").unwrap();
        let dot = exploration_dot(&explore(&p, 3, Mode::M0));
        assert_eq!(dot.matches("->").count(), 1);
        assert!(dot.contains("label=\"xy\""));
    }
}
