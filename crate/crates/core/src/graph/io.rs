use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DependencyGraph, GraphBuilder, ModuleId, VersionSeries, VersionSnapshot};
use crate::error::{Error, Result};

const NODES_HEADER: &str = "#nodes:";

/// Parses the tab-separated edge-list format.
///
/// One `source<TAB>target` pair per line. Lines starting with `#` are
/// comments, except a `#nodes: a,b,c` header which pre-declares nodes
/// (needed for isolated modules). Self-loops are dropped and duplicates
/// collapse.
pub fn load_edge_list(text: &str) -> Result<DependencyGraph> {
    let mut b = GraphBuilder::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix(NODES_HEADER) {
            for name in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let id = ModuleId::new(name).map_err(|e| parse_err(line_no, e))?;
                b.add_node(id);
            }
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                line: line_no,
                message: format!(
                    "expected `source<TAB>target`, found {} field(s)",
                    fields.len()
                ),
            });
        }
        let s = ModuleId::new(fields[0].trim()).map_err(|e| parse_err(line_no, e))?;
        let t = ModuleId::new(fields[1].trim()).map_err(|e| parse_err(line_no, e))?;
        b.add_edge(s, t);
    }
    Ok(b.build())
}

fn parse_err(line: usize, e: Error) -> Error {
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

/// Canonical edge-list text: a `#nodes:` header listing every node, then the
/// edges in lexicographic order.
pub fn to_edge_list(g: &DependencyGraph) -> String {
    let mut out = String::new();
    let names: Vec<&str> = g.nodes().iter().map(ModuleId::as_str).collect();
    let _ = writeln!(out, "{NODES_HEADER} {}", names.join(","));
    for (s, t) in g.edges() {
        let _ = writeln!(out, "{s}\t{t}");
    }
    out
}

/// Package that owns a fully-qualified type name.
fn package_of(type_name: &str) -> &str {
    match type_name.rfind('.') {
        Some(pos) => &type_name[..pos],
        None => type_name,
    }
}

/// Parses an ODEM document into a package-level graph.
///
/// Nodes are the declared `namespace` names. Each `depends-on` of a type in
/// namespace `P` yields the edge `(P, package_of(target))`, whatever its
/// `classification`. Targets outside the declared namespaces (JDK and other
/// external libraries) are not part of the analysed system and are skipped.
pub fn load_odem(xml: &str) -> Result<DependencyGraph> {
    // Exported ODEM files carry a DOCTYPE line.
    let opts = roxmltree::ParsingOptions {
        allow_dtd: true,
        ..Default::default()
    };
    let doc = roxmltree::Document::parse_with_options(xml, opts).map_err(|e| {
        let pos = e.pos();
        Error::Odem {
            position: format!("line {}, column {}", pos.row, pos.col),
            message: e.to_string(),
        }
    })?;
    let position_of = |node: roxmltree::Node<'_, '_>| {
        let pos = doc.text_pos_at(node.range().start);
        format!("line {}, column {}", pos.row, pos.col)
    };

    let root = doc.root_element();
    if root.tag_name().name() != "ODEM" {
        return Err(Error::Odem {
            position: position_of(root),
            message: format!("expected <ODEM> root, found <{}>", root.tag_name().name()),
        });
    }

    let mut b = GraphBuilder::new();
    let mut raw_edges: Vec<(ModuleId, String, roxmltree::Node<'_, '_>)> = Vec::new();
    for ns in root.descendants().filter(|n| n.has_tag_name("namespace")) {
        let name = ns.attribute("name").ok_or_else(|| Error::Odem {
            position: position_of(ns),
            message: "<namespace> without a name attribute".into(),
        })?;
        let package = ModuleId::new(name).map_err(|e| Error::Odem {
            position: position_of(ns),
            message: e.to_string(),
        })?;
        b.add_node(package.clone());
        for dep in ns.descendants().filter(|n| n.has_tag_name("depends-on")) {
            let target = dep.attribute("name").ok_or_else(|| Error::Odem {
                position: position_of(dep),
                message: "<depends-on> without a name attribute".into(),
            })?;
            raw_edges.push((package.clone(), package_of(target).to_string(), dep));
        }
    }

    let declared = b.build();
    for (source, target, node) in raw_edges {
        if !declared.contains(&target) {
            continue;
        }
        let target = ModuleId::new(&target).map_err(|e| Error::Odem {
            position: position_of(node),
            message: e.to_string(),
        })?;
        b.add_edge(source, target);
    }
    Ok(b.build())
}

/// On-disk format of one snapshot in a series manifest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphFormat {
    Edgelist,
    Odem,
}

/// One element of the series manifest JSON array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub label: String,
    pub path: String,
    pub format: GraphFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_count: Option<u64>,
}

/// Loads a version series from a manifest. Relative paths are resolved
/// against the manifest's directory.
pub fn load_series(manifest_path: &Path) -> Result<VersionSeries> {
    let text =
        std::fs::read_to_string(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
    let entries: Vec<ManifestEntry> = serde_json::from_str(&text)?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let mut snapshots = Vec::with_capacity(entries.len());
    for entry in entries {
        let path = base.join(&entry.path);
        let body = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let graph = match entry.format {
            GraphFormat::Edgelist => load_edge_list(&body),
            GraphFormat::Odem => load_odem(&body),
        }
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
        snapshots.push(VersionSnapshot::new(entry.label, graph, entry.class_count)?);
    }
    VersionSeries::new(snapshots)
}
