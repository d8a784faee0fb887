//! JSON graph documents with named nodes.
//!
//! A node's position in `nodes` is its integer label in the library. The
//! canonical form keeps that order, lists edges sorted by label pair, writes
//! undirected edges from the lower label, and orders partition blocks by
//! their smallest member.

use std::collections::HashMap;

use eqvar::{Dag, Partition, Pdag};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub from: String,
    pub to: String,
    pub directed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub nodes: Vec<String>,
    #[serde(default)]
    pub edges: Vec<EdgeDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<Vec<Vec<String>>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Graph {
    Dag(Dag),
    Pdag(Pdag),
}

impl Graph {
    pub fn to_pdag(&self) -> Pdag {
        match self {
            Graph::Dag(g) => Pdag::from_dag(g),
            Graph::Pdag(g) => g.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedGraph {
    pub names: Vec<String>,
    pub graph: Graph,
    pub partition: Option<Partition>,
}

impl ParsedGraph {
    pub fn into_dag(self) -> Result<(Vec<String>, Dag, Option<Partition>)> {
        match self.graph {
            Graph::Dag(g) => Ok((self.names, g, self.partition)),
            Graph::Pdag(_) => Err(CliError::Invalid(
                "expected a DAG: graph has undirected edges or a directed cycle".into(),
            )),
        }
    }
}

/// Map from name to label; names must be unique and nonempty.
pub fn name_index(names: &[String]) -> Result<HashMap<&str, usize>> {
    if names.is_empty() {
        return Err(CliError::Invalid("graph has no nodes".into()));
    }
    let mut index = HashMap::with_capacity(names.len());
    for (i, name) in names.iter().enumerate() {
        if index.insert(name.as_str(), i).is_some() {
            return Err(CliError::Invalid(format!("duplicate node name {name}")));
        }
    }
    Ok(index)
}

/// Partition from blocks of names. Every name must occur in exactly one block.
pub fn partition_from_names(names: &[String], blocks: &[Vec<String>]) -> Result<Partition> {
    let index = name_index(names)?;
    let mut seen = vec![false; names.len()];
    let mut out = Vec::with_capacity(blocks.len());
    for block in blocks {
        if block.is_empty() {
            return Err(CliError::Invalid("partition has an empty block".into()));
        }
        let mut ids = Vec::with_capacity(block.len());
        for name in block {
            let &v = index
                .get(name.as_str())
                .ok_or_else(|| CliError::Invalid(format!("partition names unknown node {name}")))?;
            if std::mem::replace(&mut seen[v], true) {
                return Err(CliError::Invalid(format!("node {name} appears in more than one block")));
            }
            ids.push(v);
        }
        out.push(ids);
    }
    if let Some(v) = seen.iter().position(|s| !s) {
        return Err(CliError::Invalid(format!(
            "node {} is not assigned to any block",
            names[v]
        )));
    }
    Ok(Partition::new(names.len(), out)?)
}

pub fn partition_to_names(names: &[String], pi: &Partition) -> Vec<Vec<String>> {
    pi.blocks()
        .iter()
        .map(|b| b.iter().map(|&v| names[v].clone()).collect())
        .collect()
}

impl GraphDocument {
    pub fn parse(&self) -> Result<ParsedGraph> {
        let index = name_index(&self.nodes)?;
        let lookup = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| CliError::Invalid(format!("edge references undeclared node {name}")))
        };
        let (mut directed, mut undirected) = (Vec::new(), Vec::new());
        for e in &self.edges {
            let pair = (lookup(&e.from)?, lookup(&e.to)?);
            if e.directed {
                directed.push(pair);
            } else {
                undirected.push(pair);
            }
        }
        let p = self.nodes.len();
        // Pdag::new rejects self-loops and repeated pairs for both cases
        let pdag = Pdag::new(p, &directed, &undirected)?;
        let graph = match undirected.is_empty() {
            true => match Dag::new(p, directed) {
                Ok(g) => Graph::Dag(g),
                Err(eqvar::Error::CyclicGraph) => Graph::Pdag(pdag),
                Err(e) => return Err(e.into()),
            },
            false => Graph::Pdag(pdag),
        };
        let partition = match &self.partition {
            Some(blocks) => Some(partition_from_names(&self.nodes, blocks)?),
            None => None,
        };
        Ok(ParsedGraph {
            names: self.nodes.clone(),
            graph,
            partition,
        })
    }

    pub fn from_dag(names: &[String], g: &Dag, pi: Option<&Partition>) -> Self {
        Self::from_pdag(names, &Pdag::from_dag(g), pi)
    }

    pub fn from_pdag(names: &[String], g: &Pdag, pi: Option<&Partition>) -> Self {
        let mut edges: Vec<(usize, usize, bool)> = g
            .directed_edges()
            .into_iter()
            .map(|(a, b)| (a, b, true))
            .chain(g.undirected_edges().into_iter().map(|(a, b)| (a, b, false)))
            .collect();
        edges.sort_unstable();
        Self {
            nodes: names.to_vec(),
            edges: edges
                .into_iter()
                .map(|(a, b, directed)| EdgeDoc {
                    from: names[a].clone(),
                    to: names[b].clone(),
                    directed,
                })
                .collect(),
            partition: pi.map(|pi| partition_to_names(names, pi)),
        }
    }

    pub fn from_parsed(parsed: &ParsedGraph) -> Self {
        Self::from_pdag(&parsed.names, &parsed.graph.to_pdag(), parsed.partition.as_ref())
    }

    pub fn canonical(&self) -> Result<Self> {
        Ok(Self::from_parsed(&self.parse()?))
    }
}

/// Compact one-line edge list: `A->B` for directed and `A-B` for undirected
/// edges, separated by spaces.
pub fn edge_string(names: &[String], g: &Pdag) -> String {
    GraphDocument::from_pdag(names, g, None)
        .edges
        .iter()
        .map(|e| format!("{}{}{}", e.from, if e.directed { "->" } else { "-" }, e.to))
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(p: usize) -> Vec<String> {
        (1..=p).map(|i| format!("X{i}")).collect()
    }

    fn edge(from: &str, to: &str, directed: bool) -> EdgeDoc {
        EdgeDoc {
            from: from.into(),
            to: to.into(),
            directed,
        }
    }

    #[test]
    fn all_directed_acyclic_is_dag() {
        let doc = GraphDocument {
            nodes: names(3),
            edges: vec![edge("X1", "X2", true)],
            partition: None,
        };
        assert!(matches!(doc.parse().unwrap().graph, Graph::Dag(_)));
    }

    #[test]
    fn cycle_or_undirected_is_pdag() {
        let cyc = GraphDocument {
            nodes: names(2),
            edges: vec![edge("X1", "X2", true), edge("X2", "X1", true)],
            partition: None,
        };
        assert!(cyc.parse().is_err());
        let cyc3 = GraphDocument {
            nodes: names(3),
            edges: vec![edge("X1", "X2", true), edge("X2", "X3", true), edge("X3", "X1", true)],
            partition: None,
        };
        assert!(matches!(cyc3.parse().unwrap().graph, Graph::Pdag(_)));
        let und = GraphDocument {
            nodes: names(2),
            edges: vec![edge("X2", "X1", false)],
            partition: None,
        };
        assert!(matches!(und.parse().unwrap().graph, Graph::Pdag(_)));
        assert_eq!(und.canonical().unwrap().edges, vec![edge("X1", "X2", false)]);
    }

    #[test]
    fn validation_names_the_node() {
        let doc = GraphDocument {
            nodes: names(2),
            edges: vec![edge("X1", "Y", true)],
            partition: None,
        };
        assert!(doc.parse().unwrap_err().to_string().contains("Y"));
        let dup = GraphDocument {
            nodes: vec!["A".into(), "A".into()],
            edges: vec![],
            partition: None,
        };
        assert!(dup.parse().is_err());
        let missing = partition_from_names(&names(3), &[vec!["X1".into(), "X2".into()]]).unwrap_err();
        assert_eq!(missing.to_string(), "node X3 is not assigned to any block");
        let twice = partition_from_names(&names(2), &[vec!["X1".into()], vec!["X1".into(), "X2".into()]]);
        assert!(twice.is_err());
    }

    #[test]
    fn edge_string_format() {
        let g = Pdag::new(3, &[(2, 0)], &[(1, 2)]).unwrap();
        assert_eq!(edge_string(&names(3), &g), "X2-X3 X3->X1");
    }
}
