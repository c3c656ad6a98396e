use std::fmt::Write;

use super::rules::format_significant;
use crate::tree::{ModelTree, Node, NodeId};

/// Renders the tree as a Graphviz `digraph`.
///
/// Split nodes show `feature <= threshold` with their record count and mean
/// soft label; the left edge is labelled `true`. With `depth_limit = Some(d)`
/// nodes at depth `d` are drawn as summary boxes and nothing below them is
/// emitted.
pub fn export_graph(tree: &ModelTree, depth_limit: Option<usize>) -> String {
    let mut out = String::from("digraph model_tree {\n");
    out.push_str("  node [fontname=\"Helvetica\"];\n");
    let mut stack: Vec<(NodeId, usize)> = vec![(tree.root(), 0)];
    let mut edges = Vec::new();
    while let Some((id, depth)) = stack.pop() {
        let node = tree.node(id);
        let stats = format!("n = {}\\nmean = {}", node.n(), format_significant(node.mean_y(), 4));
        let truncated = depth_limit.is_some_and(|d| depth >= d);
        match node {
            Node::Split {
                feature,
                threshold,
                left,
                right,
                ..
            } if !truncated => {
                let test = format!(
                    "{} <= {}",
                    escape(tree.feature_name(*feature)),
                    format_significant(*threshold, 4)
                );
                let _ = writeln!(out, "  n{id} [shape=box, label=\"{test}\\n{stats}\"];");
                edges.push((id, *left, "true"));
                edges.push((id, *right, "false"));
                stack.push((*right, depth + 1));
                stack.push((*left, depth + 1));
            }
            Node::Split { .. } => {
                let _ = writeln!(
                    out,
                    "  n{id} [shape=box, style=dashed, label=\"subtree {id}\\n{stats}\"];"
                );
            }
            Node::Leaf { .. } => {
                let _ = writeln!(
                    out,
                    "  n{id} [shape=ellipse, label=\"leaf {id}\\n{stats}\"];"
                );
            }
        }
    }
    for (from, to, label) in edges {
        let _ = writeln!(out, "  n{from} -> n{to} [label=\"{label}\"];");
    }
    out.push_str("}\n");
    out
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(ch),
        }
    }
    out
}

#[cfg(test)]
pub(crate) mod dot {
    //! A small validator for the subset of DOT the exporter writes.

    #[derive(Debug, Default)]
    pub struct Parsed {
        pub nodes: Vec<(String, String)>,
        pub edges: Vec<(String, String, String)>,
    }

    fn quoted(s: &str) -> Option<(String, &str)> {
        let rest = s.strip_prefix('"')?;
        let mut out = String::new();
        let mut chars = rest.char_indices();
        while let Some((i, c)) = chars.next() {
            match c {
                '\\' => {
                    let (_, e) = chars.next()?;
                    out.push('\\');
                    out.push(e);
                }
                '"' => return Some((out, &rest[i + 1..])),
                _ => out.push(c),
            }
        }
        None
    }

    fn attrs(s: &str) -> Option<Vec<(String, String)>> {
        let mut s = s.trim().strip_prefix('[')?.trim_start();
        let mut out = Vec::new();
        loop {
            if let Some(rest) = s.strip_prefix(']') {
                return (rest.trim() == ";").then_some(out);
            }
            let eq = s.find('=')?;
            let key = s[..eq].trim().to_string();
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return None;
            }
            s = s[eq + 1..].trim_start();
            let (value, rest) = if s.starts_with('"') {
                quoted(s)?
            } else {
                let end = s.find([',', ']'])?;
                (s[..end].trim().to_string(), &s[end..])
            };
            out.push((key, value));
            s = rest.trim_start();
            s = s.strip_prefix(',').unwrap_or(s).trim_start();
        }
    }

    fn ident(s: &str) -> bool {
        !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
    }

    pub fn parse(text: &str) -> Result<Parsed, String> {
        let mut lines = text.lines();
        let head = lines.next().ok_or("empty document")?;
        let name = head
            .strip_prefix("digraph ")
            .and_then(|h| h.strip_suffix(" {"))
            .ok_or("missing digraph header")?;
        if !ident(name) {
            return Err(format!("bad graph name {name:?}"));
        }
        let mut parsed = Parsed::default();
        let mut closed = false;
        for line in lines {
            let l = line.trim();
            if closed {
                if !l.is_empty() {
                    return Err("content after closing brace".into());
                }
                continue;
            }
            if l == "}" {
                closed = true;
                continue;
            }
            let bracket = l.find('[').ok_or_else(|| format!("no attributes: {l}"))?;
            let head = l[..bracket].trim();
            let a = attrs(&l[bracket..]).ok_or_else(|| format!("bad attributes: {l}"))?;
            let label = a.iter().find(|(k, _)| k == "label").map(|(_, v)| v.clone());
            if let Some((from, to)) = head.split_once("->") {
                let (from, to) = (from.trim(), to.trim());
                if !ident(from) || !ident(to) {
                    return Err(format!("bad edge: {l}"));
                }
                parsed.edges.push((from.into(), to.into(), label.unwrap_or_default()));
            } else if head == "node" {
                continue;
            } else if ident(head) {
                parsed.nodes.push((head.into(), label.ok_or_else(|| format!("unlabelled node: {l}"))?));
            } else {
                return Err(format!("bad statement: {l}"));
            }
        }
        if !closed {
            return Err("missing closing brace".into());
        }
        for (f, t, _) in &parsed.edges {
            for end in [f, t] {
                if !parsed.nodes.iter().any(|(n, _)| n == end) {
                    return Err(format!("edge to undeclared node {end}"));
                }
            }
        }
        Ok(parsed)
    }
}
