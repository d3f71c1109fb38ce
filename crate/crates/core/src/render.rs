//! JSON and Graphviz renderings of clocked trees and their finite graphs.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};

use crate::rational::{Label, RationalTree};
use crate::term::Position;
use crate::tree::{bind_name, head_name, Annotation, ClockedTree};

/// `{kind, annotation, binders, head, children}`; each child also carries its
/// `position` relative to the parent.
pub fn tree_json(t: &ClockedTree) -> Value {
    tree_value(t, &mut Vec::new())
}

fn node(kind: &str, clock: Option<&Annotation>) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("kind".into(), json!(kind));
    m.insert("annotation".into(), json!(clock));
    m
}

fn tree_value(t: &ClockedTree, names: &mut Vec<String>) -> Value {
    let base = names.len();
    let mut m = match t {
        ClockedTree::Bot => node("bot", None),
        ClockedTree::Unknown => node("unknown", None),
        ClockedTree::Bt { clock, binders, .. } => {
            let mut m = node("hnf", clock.as_ref());
            let bs: Vec<String> = binders
                .iter()
                .map(|b| {
                    let n = bind_name(b, names);
                    names.push(n.clone());
                    n
                })
                .collect();
            m.insert("binders".into(), json!(bs));
            m
        }
        ClockedTree::LlAbs { clock, binder, .. } | ClockedTree::BeAbs { clock, binder, .. } => {
            let mut m = node("abs", clock.as_ref());
            let n = bind_name(binder, names);
            names.push(n.clone());
            m.insert("binders".into(), json!([n]));
            m
        }
        ClockedTree::LlHead { clock, .. } => node("head", clock.as_ref()),
        ClockedTree::BeVar { clock, .. } => node("var", clock.as_ref()),
        ClockedTree::BeApp { clock, .. } => node("app", clock.as_ref()),
    };
    match t {
        ClockedTree::Bt { head, .. } | ClockedTree::LlHead { head, .. } | ClockedTree::BeVar { head, .. } => {
            m.insert("head".into(), json!(head_name(head, names)));
        }
        _ => {}
    }
    if !matches!(t, ClockedTree::Bot | ClockedTree::Unknown | ClockedTree::BeVar { .. }) {
        let children: Vec<Value> = t
            .children()
            .into_iter()
            .map(|(p, c)| {
                let mut v = tree_value(c, names);
                v["position"] = json!(p);
                v
            })
            .collect();
        m.insert("children".into(), Value::Array(children));
    }
    names.truncate(base);
    Value::Object(m)
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn clock_label(clock: Option<&Annotation>) -> String {
    clock.map(|a| format!("[{a}] ")).unwrap_or_default()
}

/// Graphviz rendering. Unknown leaves are drawn as dashed boxes, ⊥ as plain text.
pub fn tree_dot(t: &ClockedTree) -> String {
    let mut out = String::from("digraph clocked {\n  node [shape=ellipse];\n");
    let mut next = 0usize;
    let mut names = Vec::new();
    dot_node(t, &mut names, &mut next, &mut out);
    out.push_str("}\n");
    out
}

fn dot_node(t: &ClockedTree, names: &mut Vec<String>, next: &mut usize, out: &mut String) -> usize {
    let id = *next;
    *next += 1;
    let base = names.len();
    let (label, attrs) = match t {
        ClockedTree::Bot => ("⊥".to_string(), ", shape=plaintext"),
        ClockedTree::Unknown => ("?".to_string(), ", shape=box, style=dashed"),
        ClockedTree::Bt { clock, binders, head, .. } => {
            let mut s = clock_label(clock.as_ref());
            if !binders.is_empty() {
                let bs: Vec<String> = binders
                    .iter()
                    .map(|b| {
                        let n = bind_name(b, names);
                        names.push(n.clone());
                        n
                    })
                    .collect();
                let _ = write!(s, "λ{}.", bs.join(" "));
            }
            s.push_str(&head_name(head, names));
            (s, "")
        }
        ClockedTree::LlAbs { clock, binder, .. } | ClockedTree::BeAbs { clock, binder, .. } => {
            let n = bind_name(binder, names);
            names.push(n.clone());
            (format!("{}λ{n}", clock_label(clock.as_ref())), "")
        }
        ClockedTree::LlHead { clock, head, .. } | ClockedTree::BeVar { clock, head } => {
            (format!("{}{}", clock_label(clock.as_ref()), head_name(head, names)), "")
        }
        ClockedTree::BeApp { clock, .. } => (format!("{}@", clock_label(clock.as_ref())), ""),
    };
    let _ = writeln!(out, "  n{id} [label=\"{}\"{attrs}];", escape(&label));
    if !matches!(t, ClockedTree::Bot | ClockedTree::Unknown | ClockedTree::BeVar { .. }) {
        for (p, c) in t.children() {
            let cid = dot_node(c, names, next, out);
            let _ = writeln!(out, "  n{id} -> n{cid} [label=\"{}\"];", edge_label(&p));
        }
    }
    names.truncate(base);
    id
}

fn edge_label(p: &Position) -> String {
    escape(&p.to_string())
}

fn label_text(label: &Label) -> String {
    match label {
        Label::Bot => "⊥".into(),
        Label::Hnf { clock, binders, head } => {
            let mut s = clock_label(Some(clock));
            if !binders.is_empty() {
                let bs: Vec<&str> = binders.iter().map(|b| b.as_str()).collect();
                let _ = write!(s, "λ{}.", bs.join(" "));
            }
            s.push_str(head.name.as_str());
            s
        }
    }
}

/// Graphviz rendering of the finite graph; back-edges are dashed.
pub fn rational_dot(r: &RationalTree) -> String {
    let mut out = String::from("digraph rational {\n  node [shape=ellipse];\n");
    for (i, n) in r.nodes.iter().enumerate() {
        let attrs = if matches!(n.label, Label::Bot) { ", shape=plaintext" } else { "" };
        let _ = writeln!(out, "  n{i} [label=\"{}\"{attrs}];", escape(&label_text(&n.label)));
    }
    for (from, p, to) in r.edges() {
        let style = if r.is_back_edge(from, to) { ", style=dashed" } else { "" };
        let _ = writeln!(out, "  n{from} -> n{to} [label=\"{}\"{style}];", edge_label(p));
    }
    out.push_str("}\n");
    out
}

/// `{root, nodes: [{id, kind, annotation, binders, head, children: [{position, target, back}]}]}`.
pub fn rational_json(r: &RationalTree) -> Value {
    let nodes: Vec<Value> = r
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let children: Vec<Value> = n
                .children
                .iter()
                .map(|(p, j)| json!({ "position": p, "target": j, "back": r.is_back_edge(i, *j) }))
                .collect();
            match &n.label {
                Label::Bot => json!({ "id": i, "kind": "bot", "annotation": null, "children": children }),
                Label::Hnf { clock, binders, head } => json!({
                    "id": i,
                    "kind": "hnf",
                    "annotation": clock,
                    "binders": binders.iter().map(|b| b.as_str()).collect::<Vec<_>>(),
                    "head": head.name.as_str(),
                    "children": children,
                }),
            }
        })
        .collect();
    json!({ "root": r.root(), "nodes": nodes })
}

/// One line per node: `n0 [2] λf.f -> n1`.
pub fn rational_text(r: &RationalTree) -> String {
    let mut out = String::new();
    for (i, n) in r.nodes.iter().enumerate() {
        let _ = write!(out, "n{i} {}", label_text(&n.label));
        for (p, j) in &n.children {
            let _ = write!(out, " {p}->n{j}");
        }
        out.push('\n');
    }
    out
}
