//! JSON formats for graphs, measures and element lists, plus the command-line
//! spellings of `β` and `ε`.

use std::collections::BTreeMap;

use kmslab_core::graph::DEFAULT_PATH_CAP;
use kmslab_core::kms::ToeplitzElement;
use kmslab_core::measure::{extend_vertex_measure, CylinderMeasure, Uniform};
use kmslab_core::{DirectedMultigraph, EdgeId, PathWord, VertexId};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub range: String,
    pub source: String,
}

impl GraphFile {
    pub fn build(&self) -> Result<DirectedMultigraph, CliError> {
        let edges = self
            .edges
            .iter()
            .enumerate()
            .map(|(i, e)| (e.id.clone().unwrap_or_else(|| format!("e{i}")), e.range.clone(), e.source.clone()))
            .collect();
        Ok(DirectedMultigraph::new(self.vertices.clone(), edges)?)
    }

    pub fn from_graph(g: &DirectedMultigraph) -> Self {
        GraphFile {
            vertices: g.vertices().map(|v| g.vertex_name(v).to_string()).collect(),
            edges: g
                .edge_ids()
                .map(|e| EdgeSpec {
                    id: Some(g.edge_name(e).to_string()),
                    range: g.vertex_name(g.range(e)).to_string(),
                    source: g.vertex_name(g.source(e)).to_string(),
                })
                .collect(),
        }
    }
}

pub fn parse_graph(text: &str) -> Result<DirectedMultigraph, CliError> {
    let file: GraphFile = serde_json::from_str(text).map_err(|e| CliError::Input(format!("graph JSON: {e}")))?;
    file.build()
}

/// A path given by edge ids, or a vertex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WordSpec {
    Edges(Vec<String>),
    Vertex { vertex: String },
}

impl WordSpec {
    pub fn resolve(&self, g: &DirectedMultigraph) -> Result<PathWord, CliError> {
        match self {
            WordSpec::Vertex { vertex } => g
                .vertex_by_name(vertex)
                .map(PathWord::vertex)
                .ok_or_else(|| CliError::Input(format!("unknown vertex {vertex:?}"))),
            WordSpec::Edges(ids) if ids.is_empty() => {
                Err(CliError::Input("an empty edge list needs the {\"vertex\": …} form".into()))
            }
            WordSpec::Edges(ids) => {
                let edges = ids
                    .iter()
                    .map(|id| g.edge_by_name(id).ok_or_else(|| CliError::Input(format!("unknown edge {id:?}"))))
                    .collect::<Result<Vec<EdgeId>, _>>()?;
                Ok(g.path(&edges)?)
            }
        }
    }

    pub fn from_word(g: &DirectedMultigraph, w: &PathWord) -> Self {
        if w.is_vertex() {
            WordSpec::Vertex { vertex: g.vertex_name(w.range()).to_string() }
        } else {
            WordSpec::Edges(w.edges.iter().map(|&e| g.edge_name(e).to_string()).collect())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureFile {
    pub depth: usize,
    pub weights: Vec<WeightSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSpec {
    pub word: WordSpec,
    pub mass: f64,
}

/// Words shorter than `depth` that the file leaves out get the total mass of
/// their one-edge extensions.
pub fn parse_measure(g: &DirectedMultigraph, text: &str, tol: f64) -> Result<CylinderMeasure, CliError> {
    let file: MeasureFile = serde_json::from_str(text).map_err(|e| CliError::Input(format!("measure JSON: {e}")))?;
    let mut given = BTreeMap::new();
    for w in &file.weights {
        let word = w.word.resolve(g)?;
        if given.insert(word.clone(), w.mass).is_some() {
            return Err(CliError::Input(format!("word {} listed twice", word.display(g))));
        }
    }
    for k in (0..file.depth).rev() {
        for p in g.all_paths(k, DEFAULT_PATH_CAP)? {
            if given.contains_key(&p) {
                continue;
            }
            let s = p.source(g);
            let total: f64 = g.edges_into(s).iter().map(|&e| given.get(&p.extended(e)).copied().unwrap_or(0.0)).sum();
            given.insert(p, total);
        }
    }
    Ok(CylinderMeasure::from_weights(g, file.depth, given, tol)?)
}

pub fn measure_to_file(g: &DirectedMultigraph, m: &CylinderMeasure) -> MeasureFile {
    MeasureFile {
        depth: m.depth(),
        weights: m.iter().map(|(w, x)| WeightSpec { word: WordSpec::from_word(g, w), mass: x }).collect(),
    }
}

/// `coeff · ψ^{⊗l}(χ_{Z(μ)}) ψ^{⊗m}(χ_{Z(ν)})*`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementSpec {
    #[serde(default = "one")]
    pub coeff: f64,
    pub l: usize,
    pub mu: WordSpec,
    pub m: usize,
    pub nu: WordSpec,
}

fn one() -> f64 {
    1.0
}

impl ElementSpec {
    pub fn build(&self, g: &DirectedMultigraph) -> Result<ToeplitzElement, CliError> {
        let mu = self.mu.resolve(g)?;
        let nu = self.nu.resolve(g)?;
        Ok(ToeplitzElement::spanning(g, self.l, &mu, self.m, &nu)?.scaled(self.coeff))
    }
}

pub fn parse_elements(text: &str) -> Result<Vec<ElementSpec>, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Input(format!("element JSON: {e}")))
}

/// `REAL` or `ln:X`.
pub fn parse_beta(s: &str) -> Result<f64, CliError> {
    let bad = || CliError::Input(format!("cannot read inverse temperature {s:?}; use a number or ln:X"));
    let beta = match s.strip_prefix("ln:") {
        Some(x) => {
            let x: f64 = x.trim().parse().map_err(|_| bad())?;
            if !(x > 0.0) {
                return Err(bad());
            }
            x.ln()
        }
        None => s.trim().parse().map_err(|_| bad())?,
    };
    if !beta.is_finite() {
        return Err(bad());
    }
    Ok(beta)
}

#[derive(Clone, Debug, PartialEq)]
pub enum EpsilonSpec {
    Uniform,
    Point(String),
    File(String),
}

impl EpsilonSpec {
    pub fn parse(s: &str) -> Self {
        if s == "uniform" {
            EpsilonSpec::Uniform
        } else if let Some(v) = s.strip_prefix("point:") {
            EpsilonSpec::Point(v.to_string())
        } else {
            EpsilonSpec::File(s.to_string())
        }
    }

    /// The measure this names, at cylinder depth at least `depth`. Vertex
    /// vectors are extended with the uniform splitting rule.
    pub fn resolve(&self, g: &DirectedMultigraph, depth: usize, tol: f64) -> Result<CylinderMeasure, CliError> {
        let vertex = |eps: Vec<f64>| Ok(extend_vertex_measure(g, &eps, depth, &Uniform)?);
        match self {
            EpsilonSpec::Uniform => {
                let mut eps = vec![0.0; g.num_vertices()];
                for v in g.vertices().filter(|&v| !g.edges_into(v).is_empty()) {
                    eps[v.0] = 1.0;
                }
                vertex(eps)
            }
            EpsilonSpec::Point(name) => {
                let v: VertexId = g
                    .vertex_by_name(name)
                    .ok_or_else(|| CliError::Input(format!("unknown vertex {name:?}")))?;
                let mut eps = vec![0.0; g.num_vertices()];
                eps[v.0] = 1.0;
                vertex(eps)
            }
            EpsilonSpec::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{path}: {e}")))?;
                let m = parse_measure(g, &text, tol)?;
                if m.depth() < depth {
                    return Err(CliError::Input(format!(
                        "{path} resolves cylinders to depth {} but {depth} is needed",
                        m.depth()
                    )));
                }
                Ok(m)
            }
        }
    }
}

/// `[[a, b], [c, d]]` or a bare integer for `d = 1`.
pub fn parse_int_matrix(s: &str) -> Result<Vec<Vec<i64>>, CliError> {
    let bad = |e: String| CliError::Input(format!("matrix {s:?}: {e}"));
    if let Ok(n) = s.trim().parse::<i64>() {
        return Ok(vec![vec![n]]);
    }
    serde_json::from_str(s).map_err(|e| bad(e.to_string()))
}
