//! Monthly socio-technical networks and their metrics.
//!
//! For each project-month two graphs are built over contributor ids: a
//! directed social graph from mailing-list replies (edge A -> B when B
//! replied to A's message) and an undirected technical graph from
//! co-commits (edge {A, B} when both touched a common source file that
//! month). Branch path prefixes are stripped before file comparison so the
//! same file on `trunk/` and `branches/x/` collapses.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::identity::IdentityMap;
use crate::ingest::{CommitRecord, RawMessage};
use crate::types::ContributorId;

/// Simple directed graph (no self-loops, no parallel edges).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DirectedGraph {
    nodes: BTreeSet<ContributorId>,
    edges: BTreeSet<(ContributorId, ContributorId)>,
}

/// Simple undirected graph; edges stored as (min, max) pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UndirectedGraph {
    nodes: BTreeSet<ContributorId>,
    edges: BTreeSet<(ContributorId, ContributorId)>,
}

impl DirectedGraph {
    pub fn add_node(&mut self, v: ContributorId) {
        self.nodes.insert(v);
    }

    /// Self-loops are ignored.
    pub fn add_edge(&mut self, from: ContributorId, to: ContributorId) {
        if from == to {
            return;
        }
        self.nodes.insert(from);
        self.nodes.insert(to);
        self.edges.insert((from, to));
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = &(ContributorId, ContributorId)> {
        self.edges.iter()
    }

    pub fn metrics(&self, mode: ClusteringMode) -> GraphMetrics {
        // Degree = in + out; clustering on the undirected skeleton.
        let mut degrees: BTreeMap<ContributorId, usize> = BTreeMap::new();
        for &v in &self.nodes {
            degrees.insert(v, 0);
        }
        let mut skeleton: BTreeSet<(ContributorId, ContributorId)> = BTreeSet::new();
        for &(a, b) in &self.edges {
            *degrees.get_mut(&a).expect("endpoint is node") += 1;
            *degrees.get_mut(&b).expect("endpoint is node") += 1;
            skeleton.insert((a.min(b), a.max(b)));
        }
        compute_metrics(&self.nodes, &skeleton, &degrees, self.edges.len(), mode)
    }
}

impl UndirectedGraph {
    pub fn add_node(&mut self, v: ContributorId) {
        self.nodes.insert(v);
    }

    /// Self-loops are ignored.
    pub fn add_edge(&mut self, a: ContributorId, b: ContributorId) {
        if a == b {
            return;
        }
        self.nodes.insert(a);
        self.nodes.insert(b);
        self.edges.insert((a.min(b), a.max(b)));
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = &(ContributorId, ContributorId)> {
        self.edges.iter()
    }

    pub fn metrics(&self, mode: ClusteringMode) -> GraphMetrics {
        let mut degrees: BTreeMap<ContributorId, usize> = BTreeMap::new();
        for &v in &self.nodes {
            degrees.insert(v, 0);
        }
        for &(a, b) in &self.edges {
            *degrees.get_mut(&a).expect("endpoint is node") += 1;
            *degrees.get_mut(&b).expect("endpoint is node") += 1;
        }
        compute_metrics(&self.nodes, &self.edges, &degrees, self.edges.len(), mode)
    }
}

/// Which clustering coefficient to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum ClusteringMode {
    /// Global transitivity: 3 * triangles / connected triples.
    #[default]
    Transitivity,
    /// Mean of per-node local clustering (nodes of degree < 2 contribute 0).
    MeanLocal,
}

/// Size and shape summary of one monthly graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct GraphMetrics {
    pub nodes: usize,
    pub edges: usize,
    pub clustering_coef: f64,
    pub mean_degree: f64,
    /// Degree at the 75th percentile (nearest rank) of the ascending degree
    /// sequence.
    pub long_tail: usize,
}

fn compute_metrics(
    nodes: &BTreeSet<ContributorId>,
    skeleton: &BTreeSet<(ContributorId, ContributorId)>,
    degrees: &BTreeMap<ContributorId, usize>,
    edge_count: usize,
    mode: ClusteringMode,
) -> GraphMetrics {
    let n = nodes.len();
    if n == 0 {
        return GraphMetrics::default();
    }
    let mut adjacency: BTreeMap<ContributorId, BTreeSet<ContributorId>> = BTreeMap::new();
    for &v in nodes {
        adjacency.insert(v, BTreeSet::new());
    }
    for &(a, b) in skeleton {
        adjacency.get_mut(&a).expect("node").insert(b);
        adjacency.get_mut(&b).expect("node").insert(a);
    }

    let clustering_coef = match mode {
        ClusteringMode::Transitivity => {
            // Each triangle is seen once per participating edge.
            let triangle_incidences: usize = skeleton
                .iter()
                .map(|(a, b)| adjacency[a].intersection(&adjacency[b]).count())
                .sum();
            let triangles = triangle_incidences / 3;
            let triples: usize = adjacency
                .values()
                .map(|nbrs| nbrs.len() * nbrs.len().saturating_sub(1) / 2)
                .sum();
            if triples == 0 {
                0.0
            } else {
                3.0 * triangles as f64 / triples as f64
            }
        }
        ClusteringMode::MeanLocal => {
            let total: f64 = adjacency
                .values()
                .map(|nbrs| {
                    let k = nbrs.len();
                    if k < 2 {
                        return 0.0;
                    }
                    let links: usize = nbrs
                        .iter()
                        .map(|v| adjacency[v].intersection(nbrs).count())
                        .sum::<usize>()
                        / 2;
                    links as f64 / (k * (k - 1) / 2) as f64
                })
                .sum();
            total / n as f64
        }
    };

    let degree_sum: usize = degrees.values().sum();
    let mut sorted: Vec<usize> = degrees.values().copied().collect();
    sorted.sort_unstable();
    // Nearest-rank percentile, 1-based index ceil(0.75 * n).
    let rank = ((0.75 * n as f64).ceil() as usize).max(1);
    let long_tail = sorted[rank - 1];

    GraphMetrics {
        nodes: n,
        edges: edge_count,
        clustering_coef,
        mean_degree: degree_sum as f64 / n as f64,
        long_tail,
    }
}

/// Strip a leading `trunk/`, `branches/<name>/` or `tags/<name>/` component
/// so files are compared by their tree-relative path.
pub fn strip_branch_prefix(path: &str) -> &str {
    if let Some(rest) = path.strip_prefix("trunk/") {
        if !rest.is_empty() {
            return rest;
        }
    }
    for prefix in ["branches/", "tags/"] {
        if let Some(rest) = path.strip_prefix(prefix) {
            if let Some((_name, tail)) = rest.split_once('/') {
                if !tail.is_empty() {
                    return tail;
                }
            }
        }
    }
    path
}

/// One month's reply graph.
#[derive(Debug, Default)]
pub struct SocialBuild {
    pub graph: DirectedGraph,
    /// Replies to message ids that never appeared in the project archives.
    pub unknown_replies: u64,
}

/// Map every message id to its resolved author, over the whole project.
/// Replies land in the month they were sent, so edges may point at authors
/// of earlier months; this index is what resolves them.
pub fn author_index(
    messages: &[RawMessage],
    identities: &IdentityMap,
) -> HashMap<String, ContributorId> {
    let mut index = HashMap::new();
    for msg in messages {
        if let Some(id) = identities.lookup(&msg.sender_name, &msg.sender_email) {
            index.entry(msg.message_id.clone()).or_insert(id);
        }
    }
    index
}

/// Build the directed social graph for one month's messages. Every sender
/// that month is a node; an edge A -> B is added when B's message replies to
/// a message authored by A (in any month).
pub fn build_social(
    month_messages: &[&RawMessage],
    authors: &HashMap<String, ContributorId>,
    identities: &IdentityMap,
) -> SocialBuild {
    let mut out = SocialBuild::default();
    for msg in month_messages {
        let Some(replier) = identities.lookup(&msg.sender_name, &msg.sender_email) else {
            continue;
        };
        out.graph.add_node(replier);
        if let Some(parent_id) = &msg.in_reply_to {
            match authors.get(parent_id) {
                Some(&original_author) => out.graph.add_edge(original_author, replier),
                None => out.unknown_replies += 1,
            }
        }
    }
    out
}

/// Build the undirected technical graph for one month's commits: an edge
/// joins two committers who touched the same (branch-stripped) file.
pub fn build_technical(
    month_commits: &[&CommitRecord],
    identities: &IdentityMap,
) -> UndirectedGraph {
    let mut graph = UndirectedGraph::default();
    let mut by_file: BTreeMap<&str, BTreeSet<ContributorId>> = BTreeMap::new();
    for commit in month_commits {
        let Some(committer) = identities.lookup(&commit.author_name, &commit.author_email) else {
            continue;
        };
        graph.add_node(committer);
        for file in &commit.files {
            by_file
                .entry(strip_branch_prefix(file))
                .or_default()
                .insert(committer);
        }
    }
    for committers in by_file.values() {
        let list: Vec<ContributorId> = committers.iter().copied().collect();
        for i in 0..list.len() {
            for j in i + 1..list.len() {
                graph.add_edge(list[i], list[j]);
            }
        }
    }
    graph
}

/// Dump a graph as `src dst` pairs, one per line.
pub fn write_edge_list<'a>(
    edges: impl Iterator<Item = &'a (ContributorId, ContributorId)>,
    mut w: impl Write,
) -> std::io::Result<()> {
    for (a, b) in edges {
        writeln!(w, "{} {}", a.0, b.0)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identity::{resolve_identities, IdentityOverrides};
    use chrono::{TimeZone, Utc};

    fn id(v: u32) -> ContributorId {
        ContributorId(v)
    }

    fn msg(mid: &str, reply: Option<&str>, sender: &str) -> RawMessage {
        RawMessage {
            message_id: mid.into(),
            in_reply_to: reply.map(String::from),
            references: vec![],
            sender_name: format!("{} Person", sender),
            sender_email: format!("{sender}@x.org"),
            timestamp: Utc.with_ymd_and_hms(2012, 5, 3, 0, 0, 0).unwrap(),
            subject: "s".into(),
            body: String::new(),
        }
    }

    fn commit(author: &str, files: &[&str]) -> CommitRecord {
        CommitRecord {
            author_name: format!("{} Person", author),
            author_email: format!("{author}@x.org"),
            timestamp: Utc.with_ymd_and_hms(2012, 5, 3, 0, 0, 0).unwrap(),
            files: files.iter().map(|f| f.to_string()).collect(),
        }
    }

    fn identities_for(senders: &[&str]) -> IdentityMap {
        let obs: Vec<(String, String)> = senders
            .iter()
            .map(|s| (format!("{} Person", s), format!("{s}@x.org")))
            .collect();
        resolve_identities(&obs, &IdentityOverrides::default())
    }

    #[test]
    fn triangle_metrics() {
        let mut g = UndirectedGraph::default();
        g.add_edge(id(0), id(1));
        g.add_edge(id(1), id(2));
        g.add_edge(id(0), id(2));
        let m = g.metrics(ClusteringMode::Transitivity);
        assert_eq!(m.nodes, 3);
        assert_eq!(m.edges, 3);
        assert_eq!(m.clustering_coef, 1.0);
        assert_eq!(m.mean_degree, 2.0);
        assert_eq!(m.long_tail, 2);
    }

    #[test]
    fn path_has_zero_clustering() {
        let mut g = UndirectedGraph::default();
        g.add_edge(id(0), id(1));
        g.add_edge(id(1), id(2));
        let m = g.metrics(ClusteringMode::Transitivity);
        assert_eq!(m.clustering_coef, 0.0);
        assert_eq!(m.long_tail, 2);
    }

    #[test]
    fn empty_graph_is_all_zero() {
        let g = UndirectedGraph::default();
        let m = g.metrics(ClusteringMode::Transitivity);
        assert_eq!(m, GraphMetrics::default());
    }

    #[test]
    fn single_unanswered_message() {
        let identities = identities_for(&["a"]);
        let messages = vec![msg("m1", None, "a")];
        let refs: Vec<&RawMessage> = messages.iter().collect();
        let authors = author_index(&messages, &identities);
        let built = build_social(&refs, &authors, &identities);
        assert_eq!(built.graph.node_count(), 1);
        assert_eq!(built.graph.edge_count(), 0);
    }

    #[test]
    fn reply_chain_builds_directed_edges() {
        let identities = identities_for(&["a", "b", "c"]);
        let messages = vec![
            msg("m1", None, "a"),
            msg("m2", Some("m1"), "b"),
            msg("m3", Some("m2"), "c"),
        ];
        let refs: Vec<&RawMessage> = messages.iter().collect();
        let authors = author_index(&messages, &identities);
        let built = build_social(&refs, &authors, &identities);
        assert_eq!(built.graph.node_count(), 3);
        assert_eq!(built.graph.edge_count(), 2);
        let a = identities.lookup("a Person", "a@x.org").unwrap();
        let b = identities.lookup("b Person", "b@x.org").unwrap();
        let c = identities.lookup("c Person", "c@x.org").unwrap();
        let edges: Vec<_> = built.graph.edges().copied().collect();
        assert!(edges.contains(&(a, b)));
        assert!(edges.contains(&(b, c)));
    }

    // Twenty-message thread forest; expected edges drawn by hand before the
    // builder was written: 8 nodes, 10 distinct edges, 1 unknown reply.
    #[test]
    fn thread_forest_matches_hand_oracle() {
        let spec: [(&str, &str, Option<&str>); 20] = [
            ("a", "m1", None),
            ("b", "m2", Some("m1")),
            ("c", "m3", Some("m2")),
            ("a", "m4", Some("m3")),
            ("d", "m5", Some("m1")),
            ("e", "m6", None),
            ("f", "m7", Some("m6")),
            ("e", "m8", Some("m7")),
            ("f", "m9", Some("m8")),
            ("g", "m10", Some("m6")),
            ("h", "m11", None),
            ("a", "m12", None),
            ("b", "m13", Some("m12")),
            ("c", "m14", Some("m13")),
            ("d", "m15", Some("m14")),
            ("a", "m16", Some("m15")),
            ("b", "m17", Some("m16")),
            ("e", "m18", Some("m1")),
            ("f", "m19", Some("m18")),
            ("g", "m20", Some("ghost")),
        ];
        let identities = identities_for(&["a", "b", "c", "d", "e", "f", "g", "h"]);
        let messages: Vec<RawMessage> =
            spec.iter().map(|(s, m, r)| msg(m, *r, s)).collect();
        let refs: Vec<&RawMessage> = messages.iter().collect();
        let authors = author_index(&messages, &identities);
        let built = build_social(&refs, &authors, &identities);
        assert_eq!(built.graph.node_count(), 8);
        assert_eq!(built.graph.edge_count(), 10);
        assert_eq!(built.unknown_replies, 1);

        let by_name = |s: &str| identities.lookup(&format!("{s} Person"), &format!("{s}@x.org")).unwrap();
        let expected: BTreeSet<(ContributorId, ContributorId)> = [
            ("a", "b"),
            ("a", "d"),
            ("a", "e"),
            ("b", "c"),
            ("c", "a"),
            ("c", "d"),
            ("d", "a"),
            ("e", "f"),
            ("e", "g"),
            ("f", "e"),
        ]
        .iter()
        .map(|(x, y)| (by_name(x), by_name(y)))
        .collect();
        let got: BTreeSet<_> = built.graph.edges().copied().collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn lone_committer_has_no_edges() {
        let identities = identities_for(&["a"]);
        let commits = vec![commit("a", &["src/X.java", "src/Y.java", "src/Z.java"])];
        let refs: Vec<&CommitRecord> = commits.iter().collect();
        let g = build_technical(&refs, &identities);
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn shared_file_links_committers() {
        let identities = identities_for(&["a", "b", "c"]);
        let commits = vec![
            commit("a", &["f1.java"]),
            commit("b", &["f1.java"]),
            commit("c", &["f2.java"]),
        ];
        let refs: Vec<&CommitRecord> = commits.iter().collect();
        let g = build_technical(&refs, &identities);
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn branch_prefixes_collapse_for_comparison() {
        assert_eq!(strip_branch_prefix("trunk/src/X.java"), "src/X.java");
        assert_eq!(strip_branch_prefix("branches/exp/src/X.java"), "src/X.java");
        assert_eq!(strip_branch_prefix("tags/v1.0/src/X.java"), "src/X.java");
        assert_eq!(strip_branch_prefix("src/X.java"), "src/X.java");
        assert_eq!(strip_branch_prefix("branches/only"), "branches/only");

        let identities = identities_for(&["a", "b"]);
        let commits = vec![
            commit("a", &["branches/exp/src/X.java"]),
            commit("b", &["trunk/src/X.java"]),
        ];
        let refs: Vec<&CommitRecord> = commits.iter().collect();
        let g = build_technical(&refs, &identities);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn directed_degree_counts_both_directions() {
        let mut g = DirectedGraph::default();
        g.add_edge(id(0), id(1));
        g.add_edge(id(1), id(0));
        let m = g.metrics(ClusteringMode::Transitivity);
        assert_eq!(m.nodes, 2);
        assert_eq!(m.edges, 2);
        assert_eq!(m.mean_degree, 2.0);
    }

    #[test]
    fn self_loops_are_rejected() {
        let mut g = DirectedGraph::default();
        g.add_edge(id(3), id(3));
        assert_eq!(g.node_count(), 0);
        assert_eq!(g.edge_count(), 0);
    }
}
