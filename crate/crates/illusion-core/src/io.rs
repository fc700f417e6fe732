//! On-disk formats: network JSON (`{"nodes": [{"id", "label"}], "edges":
//! [[u,v]]}`), plain edge-list text with a label sidecar, edit-plan JSON,
//! and encoding JSON with role metadata.
//!
//! Labels are `"b"`/`"r"` (aliases 0/1) for the binary setting and small
//! integers otherwise; `"g"` is accepted as an alias for 2. Node ids must
//! be dense `0..n`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::elimination::EliminationEncoding;
use crate::network::{Colour, EditPlan, Labelling, LabelledNetwork, NetworkError, SocialNetwork};
use crate::plurality::{MultiLabelling, PluralityError};
use crate::verification::GadgetEncoding;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("node ids must be dense 0..{expected}; missing or duplicate id {id}")]
    NonDenseIds { id: usize, expected: usize },
    #[error("unknown label `{0}` (expected \"b\", \"r\", \"g\", or a small integer)")]
    BadLabel(String),
    #[error("line {0}: cannot parse `{1}`")]
    BadLine(usize, String),
    #[error("network carries no labels")]
    MissingLabels,
    #[error("labels use {0} colours; this operation needs a binary labelling")]
    NotBinary(u32),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Plurality(#[from] PluralityError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum LabelJson {
    Text(String),
    Number(u32),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct NodeJson {
    id: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<LabelJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct NetworkJson {
    nodes: Vec<NodeJson>,
    edges: Vec<(usize, usize)>,
}

/// A parsed network together with its (possibly multi-colour) labels.
#[derive(Debug, Clone)]
pub struct NetworkDoc {
    pub network: SocialNetwork,
    pub labels: Option<Vec<u32>>,
}

fn parse_label(l: &LabelJson) -> Result<u32, FormatError> {
    match l {
        LabelJson::Number(v) => Ok(*v),
        LabelJson::Text(s) => match s.as_str() {
            "b" | "B" => Ok(0),
            "r" | "R" => Ok(1),
            "g" | "G" => Ok(2),
            other => other.parse().map_err(|_| FormatError::BadLabel(other.to_string())),
        },
    }
}

impl NetworkDoc {
    pub fn labelled(&self) -> Result<LabelledNetwork, FormatError> {
        let labels = self.labels.as_ref().ok_or(FormatError::MissingLabels)?;
        let palette = labels.iter().max().copied().unwrap_or(0) + 1;
        if palette > 2 {
            return Err(FormatError::NotBinary(palette));
        }
        let colours =
            labels.iter().map(|&c| if c == 1 { Colour::Red } else { Colour::Blue }).collect();
        Ok(LabelledNetwork::new(self.network.clone(), Labelling::new(colours))?)
    }

    pub fn multi_labelled(&self) -> Result<(SocialNetwork, MultiLabelling), FormatError> {
        let labels = self.labels.as_ref().ok_or(FormatError::MissingLabels)?;
        let palette = (labels.iter().max().copied().unwrap_or(0) + 1).max(2);
        let ml = MultiLabelling::new(labels.clone(), palette)?;
        Ok((self.network.clone(), ml))
    }
}

pub fn parse_network_json(text: &str) -> Result<NetworkDoc, FormatError> {
    let raw: NetworkJson = serde_json::from_str(text)?;
    let n = raw.nodes.len();
    let mut labels: Vec<Option<u32>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut any_label = false;
    for node in &raw.nodes {
        if node.id >= n || seen[node.id] {
            return Err(FormatError::NonDenseIds { id: node.id, expected: n });
        }
        seen[node.id] = true;
        if let Some(l) = &node.label {
            labels[node.id] = Some(parse_label(l)?);
            any_label = true;
        }
    }
    let mut network = SocialNetwork::new(n);
    for &(u, v) in &raw.edges {
        network.add_edge(u, v)?;
    }
    let labels = if any_label {
        Some(labels.into_iter().map(|l| l.unwrap_or(0)).collect())
    } else {
        None
    };
    Ok(NetworkDoc { network, labels })
}

fn label_to_json(c: u32) -> LabelJson {
    match c {
        0 => LabelJson::Text("b".into()),
        1 => LabelJson::Text("r".into()),
        other => LabelJson::Number(other),
    }
}

pub fn network_to_json(sn: &SocialNetwork, labels: Option<&[u32]>) -> String {
    let nodes: Vec<NodeJson> = (0..sn.node_count())
        .map(|id| NodeJson { id, label: labels.map(|l| label_to_json(l[id])) })
        .collect();
    let doc = NetworkJson { nodes, edges: sn.edges() };
    serde_json::to_string_pretty(&doc).expect("document serialises")
}

pub fn labelled_to_json(ln: &LabelledNetwork) -> String {
    let labels: Vec<u32> =
        ln.labelling().colours().iter().map(|&c| if c == Colour::Red { 1 } else { 0 }).collect();
    network_to_json(ln.network(), Some(&labels))
}

pub fn labelling_to_json(lab: &Labelling) -> String {
    let labels: Vec<&str> =
        lab.colours().iter().map(|&c| if c == Colour::Red { "r" } else { "b" }).collect();
    serde_json::to_string(&json!({ "labels": labels })).expect("serialises")
}

/// Plain edge-list text: one `u v` pair per line; `#` starts a comment.
pub fn parse_edge_list(text: &str) -> Result<SocialNetwork, FormatError> {
    let mut edges = Vec::new();
    let mut max_id = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (u, v) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) => (
                a.parse::<usize>().map_err(|_| FormatError::BadLine(idx + 1, raw.to_string()))?,
                b.parse::<usize>().map_err(|_| FormatError::BadLine(idx + 1, raw.to_string()))?,
            ),
            _ => return Err(FormatError::BadLine(idx + 1, raw.to_string())),
        };
        max_id = max_id.max(u).max(v);
        edges.push((u, v));
    }
    let n = if edges.is_empty() { 0 } else { max_id + 1 };
    Ok(SocialNetwork::from_edges(n, &edges)?)
}

/// Label sidecar: one `id label` pair per line. Returns labels for
/// `0..node_count`, defaulting to blue.
pub fn parse_label_sidecar(text: &str, node_count: usize) -> Result<Vec<u32>, FormatError> {
    let mut labels = vec![0u32; node_count];
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        match (parts.next(), parts.next(), parts.next()) {
            (Some(id), Some(label), None) => {
                let id: usize =
                    id.parse().map_err(|_| FormatError::BadLine(idx + 1, raw.to_string()))?;
                if id >= node_count {
                    return Err(FormatError::NonDenseIds { id, expected: node_count });
                }
                labels[id] = parse_label(&LabelJson::Text(label.to_string()))?;
            }
            _ => return Err(FormatError::BadLine(idx + 1, raw.to_string())),
        }
    }
    Ok(labels)
}

pub fn parse_edit_plan(text: &str) -> Result<EditPlan, FormatError> {
    Ok(serde_json::from_str(text)?)
}

pub fn edit_plan_to_json(plan: &EditPlan) -> String {
    serde_json::to_string_pretty(plan).expect("plan serialises")
}

/// Verification encoding as network JSON plus a roles map and metadata.
pub fn verification_encoding_to_json(enc: &GadgetEncoding, labels: Option<&Labelling>) -> String {
    let label_vec: Option<Vec<u32>> = labels.map(|l| {
        l.colours().iter().map(|&c| if c == Colour::Red { 1 } else { 0 }).collect()
    });
    let network: serde_json::Value =
        serde_json::from_str(&network_to_json(&enc.network, label_vec.as_deref())).expect("valid");
    let roles: BTreeMap<String, &crate::verification::VerificationRole> =
        enc.roles.iter().enumerate().map(|(i, r)| (i.to_string(), r)).collect();
    serde_json::to_string_pretty(&json!({
        "network": network,
        "roles": roles,
        "variables": enc.variable_count,
        "clauses": enc.clause_count,
        "node_count": enc.network.node_count(),
        "i_phi": enc.i_phi,
        "padding_pairs": enc.padding_pairs,
    }))
    .expect("serialises")
}

/// Elimination encoding as labelled network JSON plus roles, variant,
/// budget, and requirement.
pub fn elimination_encoding_to_json(enc: &EliminationEncoding) -> String {
    let network: serde_json::Value =
        serde_json::from_str(&labelled_to_json(&enc.labelled)).expect("valid");
    let roles: BTreeMap<String, &crate::elimination::EliminationRole> =
        enc.roles.iter().enumerate().map(|(i, r)| (i.to_string(), r)).collect();
    serde_json::to_string_pretty(&json!({
        "network": network,
        "roles": roles,
        "variant": enc.variant,
        "budget": enc.budget,
        "requirement": enc.requirement,
        "eliminate_target": enc.eliminate_target,
        "variables": enc.variable_count,
        "clauses": enc.clause_count,
        "base_illuded": enc.base_illuded,
        "pump": enc.pump,
        "discrepancies": enc.discrepancies,
    }))
    .expect("serialises")
}
