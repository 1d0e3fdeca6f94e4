//! Graphviz export.

use std::collections::HashSet;
use std::fmt::Write;

use aobs_core::{Aobs, Node, NodeRef, Store};

use crate::format::Universe;

/// DOT digraph of `s`: AND nodes as boxes, OR nodes as ellipses, literals as
/// plain `var=value` text, OR edges labelled with their weights. Node names
/// come from the structural hash, so equal graphs give identical text.
pub fn to_dot(store: &Store, universe: &Universe, s: &Aobs) -> String {
    let order = store.reachable(s.root);
    let width = name_width(&order);
    let name = |n: NodeRef| format!("n{:0w$x}", n.0 >> (64 - 4 * width), w = width);

    let mut out = String::from("digraph aobs {\n    node [fontname=\"Helvetica\"];\n");
    // root first, then towards the leaves
    for &n in order.iter().rev() {
        let (shape, label) = match store.node(n) {
            Node::Lit { var, value } => ("plaintext", format!("{}={}", universe.name(*var), value)),
            Node::And(_) => ("box", "AND".to_owned()),
            Node::Or(_) => ("ellipse", "OR".to_owned()),
        };
        writeln!(out, "    {} [shape={shape}, label=\"{}\"];", name(n), escape(&label)).unwrap();
    }
    for &n in order.iter().rev() {
        match store.node(n) {
            Node::Lit { .. } => {}
            Node::And(c) => {
                for &k in c {
                    writeln!(out, "    {} -> {};", name(n), name(k)).unwrap();
                }
            }
            Node::Or(e) => {
                for &(w, k) in e {
                    writeln!(out, "    {} -> {} [label=\"{w:.3}\"];", name(n), name(k)).unwrap();
                }
            }
        }
    }
    out.push_str("}\n");
    out
}

/// Shortest hex prefix (at least 8 digits) that tells all nodes apart.
fn name_width(nodes: &[NodeRef]) -> usize {
    (8..16)
        .find(|&w| {
            let mut seen = HashSet::with_capacity(nodes.len());
            nodes.iter().all(|n| seen.insert(n.0 >> (64 - 4 * w)))
        })
        .unwrap_or(16)
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}
