use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::io::{write_atomic, IoError};
use crate::model::{EntityOrigin, PaperDatasetNetwork};

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: IoError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Graphml,
    Dot,
}

impl FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "graphml" => Ok(ExportFormat::Graphml),
            "dot" => Ok(ExportFormat::Dot),
            other => Err(format!("unknown export format {other:?} (expected graphml or dot)")),
        }
    }
}

fn origin_label(o: EntityOrigin) -> &'static str {
    match o {
        EntityOrigin::Imported => "imported",
        EntityOrigin::Discovered => "discovered",
    }
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn dot_quote(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' | '\\' => {
                out.push('\\');
                out.push(c);
            }
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

pub fn render_graphml(net: &PaperDatasetNetwork) -> String {
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    for (id, target, ty) in [
        ("kind", "node", "string"),
        ("label", "node", "string"),
        ("canonical_name", "node", "string"),
        ("origin", "node", "string"),
        ("uncertain", "node", "boolean"),
        ("description_id", "edge", "string"),
    ] {
        let _ = writeln!(s, "  <key id=\"{id}\" for=\"{target}\" attr.name=\"{id}\" attr.type=\"{ty}\"/>");
    }
    s.push_str("  <graph id=\"pdnet\" edgedefault=\"undirected\">\n");
    for p in net.papers().values() {
        let _ = writeln!(
            s,
            "    <node id=\"paper:{}\"><data key=\"kind\">paper</data><data key=\"label\">{}</data></node>",
            xml_escape(&p.paper_id),
            xml_escape(&p.title)
        );
    }
    for e in net.entities().values() {
        let _ = writeln!(
            s,
            "    <node id=\"dataset:{}\"><data key=\"kind\">dataset</data><data key=\"canonical_name\">{}</data><data key=\"origin\">{}</data><data key=\"uncertain\">{}</data></node>",
            xml_escape(&e.entity_id),
            xml_escape(&e.canonical_name),
            origin_label(e.origin),
            e.uncertain
        );
    }
    for (i, e) in net.edges().iter().enumerate() {
        let _ = writeln!(
            s,
            "    <edge id=\"e{i}\" source=\"paper:{}\" target=\"dataset:{}\"><data key=\"description_id\">{}</data></edge>",
            xml_escape(&e.paper_id),
            xml_escape(&e.entity_id),
            xml_escape(&e.description_id)
        );
    }
    s.push_str("  </graph>\n</graphml>\n");
    s
}

pub fn render_dot(net: &PaperDatasetNetwork) -> String {
    let mut s = String::from("graph pdnet {\n");
    for p in net.papers().values() {
        let _ = writeln!(
            s,
            "  {} [kind=paper, label={}];",
            dot_quote(&format!("paper:{}", p.paper_id)),
            dot_quote(&p.title)
        );
    }
    for e in net.entities().values() {
        let _ = writeln!(
            s,
            "  {} [kind=dataset, label={}, canonical_name={}, origin={}, uncertain={}];",
            dot_quote(&format!("dataset:{}", e.entity_id)),
            dot_quote(&e.canonical_name),
            dot_quote(&e.canonical_name),
            origin_label(e.origin),
            e.uncertain
        );
    }
    for e in net.edges() {
        let _ = writeln!(
            s,
            "  {} -- {} [description_id={}];",
            dot_quote(&format!("paper:{}", e.paper_id)),
            dot_quote(&format!("dataset:{}", e.entity_id)),
            dot_quote(&e.description_id)
        );
    }
    s.push_str("}\n");
    s
}

pub fn export_graph(net: &PaperDatasetNetwork, format: ExportFormat, path: &Path) -> Result<(), ExportError> {
    let text = match format {
        ExportFormat::Graphml => render_graphml(net),
        ExportFormat::Dot => render_dot(net),
    };
    write_atomic(path, text.as_bytes()).map_err(|source| ExportError::Write { path: path.to_path_buf(), source })
}
