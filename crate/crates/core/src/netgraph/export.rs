//! Graph exports: DOT and GraphML with share_pct carried as an edge
//! attribute. Output ordering is deterministic (nodes by id, edges in the
//! snapshot's canonical link order).

use super::OwnershipGraph;

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Render the graph in Graphviz DOT.
pub fn to_dot(graph: &OwnershipGraph<'_>) -> String {
    let snap = graph.snapshot();
    let mut out = String::from("digraph ownership {\n");
    for firm in snap.firms.values() {
        out.push_str(&format!(
            "  \"{}\" [name=\"{}\" country=\"{}\" city=\"{}\"];\n",
            dot_escape(&firm.firm_id),
            dot_escape(&firm.name),
            dot_escape(&firm.country),
            dot_escape(firm.city_id.as_deref().unwrap_or("")),
        ));
    }
    for link in &snap.links {
        out.push_str(&format!(
            "  \"{}\" -> \"{}\" [share_pct={}];\n",
            dot_escape(&link.owner_id),
            dot_escape(&link.owned_id),
            link.share_pct,
        ));
    }
    out.push_str("}\n");
    out
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
            _ => out.push(c),
        }
    }
    out
}

/// Render the graph in GraphML.
pub fn to_graphml(graph: &OwnershipGraph<'_>) -> String {
    let snap = graph.snapshot();
    let mut out = String::from(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n\
         \x20 <key id=\"d0\" for=\"node\" attr.name=\"name\" attr.type=\"string\"/>\n\
         \x20 <key id=\"d1\" for=\"node\" attr.name=\"country\" attr.type=\"string\"/>\n\
         \x20 <key id=\"d2\" for=\"node\" attr.name=\"city\" attr.type=\"string\"/>\n\
         \x20 <key id=\"d3\" for=\"edge\" attr.name=\"share_pct\" attr.type=\"double\"/>\n\
         \x20 <graph id=\"ownership\" edgedefault=\"directed\">\n",
    );
    for firm in snap.firms.values() {
        out.push_str(&format!(
            "    <node id=\"{}\">\n      <data key=\"d0\">{}</data>\n      <data key=\"d1\">{}</data>\n      <data key=\"d2\">{}</data>\n    </node>\n",
            xml_escape(&firm.firm_id),
            xml_escape(&firm.name),
            xml_escape(&firm.country),
            xml_escape(firm.city_id.as_deref().unwrap_or("")),
        ));
    }
    for link in &snap.links {
        out.push_str(&format!(
            "    <edge source=\"{}\" target=\"{}\">\n      <data key=\"d3\">{}</data>\n    </edge>\n",
            xml_escape(&link.owner_id),
            xml_escape(&link.owned_id),
            link.share_pct,
        ));
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}
