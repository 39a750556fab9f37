//! Node/edge export of the AIC structure for graph views.

use serde::{Deserialize, Serialize};

use crate::model::EntityId;
use crate::session::Session;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeType {
    System,
    Aspect,
    Purpose,
    Action,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphNode {
    pub id: EntityId,
    pub node_type: NodeType,
    /// System, purpose or action kind; `factor` for aspects.
    pub kind: String,
    pub label: String,
    pub status: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeRelation {
    /// purpose -> purpose or action it serves
    Serves,
    /// action -> purpose it fulfils
    Fulfills,
    /// system -> aspect in its sphere of control
    Sphere,
    /// purpose -> owning system
    Owner,
    /// action -> acting system
    Source,
    TargetSystem,
    TargetAspect,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub from: EntityId,
    pub to: EntityId,
    pub relation: EdgeRelation,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphExport {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
}

pub fn export_graph(session: &Session) -> GraphExport {
    let mut g = GraphExport::default();
    let mut edge = |from: &EntityId, to: &EntityId, relation| {
        g.edges.push(GraphEdge {
            from: from.clone(),
            to: to.clone(),
            relation,
        })
    };
    for s in session.systems() {
        for a in &s.sphere_of_control {
            edge(&s.id, a, EdgeRelation::Sphere);
        }
    }
    for p in session.purposes() {
        edge(&p.id, &p.owner_system, EdgeRelation::Owner);
        if let Some(t) = &p.serves {
            edge(&p.id, t, EdgeRelation::Serves);
        }
    }
    for a in session.actions() {
        edge(&a.id, &a.source_system, EdgeRelation::Source);
        if let Some(t) = &a.target_system {
            edge(&a.id, t, EdgeRelation::TargetSystem);
        }
        if let Some(t) = &a.target_aspect {
            edge(&a.id, t, EdgeRelation::TargetAspect);
        }
        if let Some(t) = &a.fulfills {
            edge(&a.id, t, EdgeRelation::Fulfills);
        }
    }

    g.nodes.extend(session.systems().iter().map(|s| GraphNode {
        id: s.id.clone(),
        node_type: NodeType::System,
        kind: s.kind.to_string(),
        label: s.name.clone(),
        status: None,
    }));
    g.nodes.extend(session.aspects().iter().map(|a| GraphNode {
        id: a.id.clone(),
        node_type: NodeType::Aspect,
        kind: "factor".into(),
        label: a.token.clone(),
        status: None,
    }));
    g.nodes.extend(session.purposes().iter().map(|p| GraphNode {
        id: p.id.clone(),
        node_type: NodeType::Purpose,
        kind: p.kind.to_string(),
        label: p.verb_phrase.clone(),
        status: Some(p.status.to_string()),
    }));
    g.nodes.extend(session.actions().iter().map(|a| GraphNode {
        id: a.id.clone(),
        node_type: NodeType::Action,
        kind: a.kind.to_string(),
        label: a.description.clone(),
        status: None,
    }));
    g
}
