//! The invariant suite behind `kmslab verify`. Samples are drawn sequentially
//! from one seed and evaluated in parallel, so results do not depend on the
//! thread count.

use kmslab_core::fock::{FockTruncation, DEFAULT_DIM_CAP};
use kmslab_core::kms::{KmsState, ToeplitzElement};
use kmslab_core::measure::{apply_r, check_subinvariance, f_beta, resolvent_series, tail_bound};
use kmslab_core::shift::CylinderFunction;
use kmslab_core::spectral::DEFAULT_N_MAX;
use kmslab_core::{DirectedMultigraph, PathWord, VertexId};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::sampling::{self, SpanningShape, WordTable};
use crate::CliError;

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub beta: f64,
    pub seed: u64,
    /// Pairs for the KMS condition.
    pub samples: usize,
    pub fock_samples: usize,
    pub positivity_samples: usize,
    /// Cylinder depth of the state and of the Fock truncation.
    pub depth: usize,
    pub levels: usize,
    pub tol: f64,
    pub threads: Option<usize>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            beta: 0.0,
            seed: 0,
            samples: 500,
            fock_samples: 100,
            positivity_samples: 20,
            depth: 6,
            levels: 4,
            tol: 1e-9,
            threads: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    /// Largest violation seen, in the units of `tol`.
    pub worst: f64,
    pub tol: f64,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
}

impl CheckOutcome {
    fn new(name: &str, worst: f64, tol: f64, samples: usize, witness: Option<Value>) -> Self {
        let pass = worst <= tol;
        CheckOutcome {
            name: name.to_string(),
            pass,
            worst,
            tol,
            samples,
            witness: if pass { None } else { witness },
        }
    }
}

pub fn element_json(g: &DirectedMultigraph, x: &ToeplitzElement) -> Value {
    let w = |p: &PathWord| p.display(g).to_string();
    Value::Array(
        x.terms()
            .map(|(t, c)| json!({"coeff": c, "left": w(&t.left), "middle": w(&t.middle), "right": w(&t.right)}))
            .collect(),
    )
}

fn worst_of<T>(items: Vec<(f64, T)>) -> (f64, Option<T>) {
    items.into_iter().fold((0.0, None), |(best, bw), (v, w)| if v > best || v.is_nan() { (v, Some(w)) } else { (best, bw) })
}

/// Runs every check against the normalised state of `eps`.
pub fn run(
    g: &DirectedMultigraph,
    eps: &kmslab_core::measure::CylinderMeasure,
    cfg: &VerifyConfig,
) -> Result<Vec<CheckOutcome>, CliError> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Input(format!("thread pool: {e}")))?;
    pool.install(|| run_inner(g, eps, cfg))
}

fn run_inner(
    g: &DirectedMultigraph,
    eps: &kmslab_core::measure::CylinderMeasure,
    cfg: &VerifyConfig,
) -> Result<Vec<CheckOutcome>, CliError> {
    let beta = cfg.beta;
    let tol = cfg.tol;
    let depth = cfg.depth;
    let state = KmsState::normalized(g, beta, eps, depth)?;
    let eps = state.epsilon().clone();
    let mut rng = sampling::rng(cfg.seed);
    let mut out = Vec::new();

    // f_β solves y − e^{−β}Aᵀy = 1
    let y = f_beta(g, beta)?.y;
    let a = g.vertex_matrix();
    let t = (-beta).exp();
    let n = g.num_vertices();
    let resid = (0..n)
        .map(|w| (y[w] - t * (0..n).map(|v| a.get(v, w) as f64 * y[v]).sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    out.push(CheckOutcome::new("f_beta_identity", resid, tol, 1, None));

    // μ − e^{−β}Rμ recovers ε, and μ is subinvariant
    let sub = check_subinvariance(g, state.mu(), beta, tol)?;
    let rec = sub.recovered.max_abs_diff(&eps);
    out.push(CheckOutcome::new(
        "resolvent_round_trip",
        rec.max(if sub.pass { 0.0 } else { -sub.worst_slack }),
        tol,
        1,
        Some(json!({"worst_word": sub.worst_word.display(g).to_string(), "slack": sub.worst_slack})),
    ));

    // truncated Neumann series against the closed form
    let tb = tail_bound(g, beta, DEFAULT_N_MAX)?;
    let terms = tb.terms_for(1e-13).min(400);
    let series_depth = depth.min(4);
    let (series, tail) = resolvent_series(g, &eps, beta, series_depth, terms)?;
    let closed = state.mu().restricted(series_depth)?;
    out.push(CheckOutcome::new(
        "series_within_tail",
        (series.max_abs_diff(&closed) - tail).max(0.0),
        tol,
        terms,
        Some(json!({"terms": terms, "tail": tail})),
    ));

    // R is affine on measures
    let other = eps.scaled(0.5);
    let lhs = apply_r(g, &eps.combine(0.3, &other, 0.7))?;
    let rhs = apply_r(g, &eps)?.combine(0.3, &apply_r(g, &other)?, 0.7);
    out.push(CheckOutcome::new("transfer_affine", lhs.max_abs_diff(&rhs), tol, 1, None));

    // KMS condition on homogeneous pairs
    let words = WordTable::new(g, 3);
    let kms_shape = SpanningShape { max_word: 3, max_middle: depth };
    let pairs: Vec<(ToeplitzElement, ToeplitzElement)> = (0..cfg.samples)
        .map(|_| {
            let b = sampling::random_homogeneous(&mut rng, g, &words, kms_shape);
            let c = sampling::random_homogeneous(&mut rng, g, &words, kms_shape);
            (b, c)
        })
        .collect();
    let checks = pairs
        .par_iter()
        .map(|(b, c)| {
            let k = state.kms_check(b, c, tol)?;
            Ok((k.diff.max(k.vanishing), json!({"b": element_json(g, b), "c": element_json(g, c), "lhs": k.lhs, "rhs": k.rhs})))
        })
        .collect::<Result<Vec<_>, kmslab_core::Error>>()?;
    let (worst, witness) = worst_of(checks);
    out.push(CheckOutcome::new("kms_condition", worst, tol, pairs.len(), witness));

    // gaps in the Cuntz–Pimsner relation equal ε on vertices
    let gaps = state.cp_gaps()?;
    let marginal = eps.vertex_marginal(g);
    let gap_err = gaps.iter().zip(&marginal).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let max_gap = gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    out.push(CheckOutcome::new(
        "cp_gap_equals_epsilon",
        gap_err.max(if max_gap > 0.0 { 0.0 } else { f64::INFINITY }),
        tol,
        n,
        Some(json!({"gaps": gaps, "epsilon": marginal})),
    ));

    // truncated Fock representation
    if cfg.levels > 0 && depth >= cfg.levels {
        let ft = FockTruncation::build(g, &eps, beta, cfg.levels, depth, DEFAULT_DIM_CAP)?;
        let base = ft.base_depth();
        let fock_words = WordTable::new(g, cfg.levels.max(base));
        let shape = SpanningShape { max_word: cfg.levels, max_middle: base };
        let elements: Vec<ToeplitzElement> = (0..cfg.fock_samples)
            .map(|_| sampling::random_element(&mut rng, g, &fock_words, shape))
            .collect();
        let diffs = elements
            .par_iter()
            .map(|x| {
                let p = ft.state_via_partitions(x)?;
                let v = state.evaluate(x)?;
                Ok(((p.value - v).abs() - p.tail_bound, json!({"element": element_json(g, x), "closed": v, "partitions": p.value, "tail": p.tail_bound})))
            })
            .collect::<Result<Vec<_>, kmslab_core::Error>>()?;
        let (worst, witness) = worst_of(diffs);
        out.push(CheckOutcome::new("fock_partition_oracle", worst.max(0.0), tol, elements.len(), witness));

        let functions: Vec<CylinderFunction> = (0..cfg.positivity_samples)
            .map(|_| sampling::random_nonnegative_function(&mut rng, &fock_words, base))
            .collect();
        let pos = functions
            .par_iter()
            .map(|a| {
                let r = ft.verify_positivity(a)?;
                let bad = (-r.min_eigenvalue).max(r.upper_residual).max(r.level0_residual);
                let terms: Vec<Value> = a.terms().map(|(w, c)| json!([w.display(g).to_string(), c])).collect();
                Ok((bad, json!({"function": terms, "report": r})))
            })
            .collect::<Result<Vec<_>, kmslab_core::Error>>()?;
        let (worst, witness) = worst_of(pos);
        out.push(CheckOutcome::new("fock_positivity", worst.max(0.0), tol, functions.len(), witness));

        let edge_fns: Vec<CylinderFunction> =
            g.edge_ids().map(|e| CylinderFunction::indicator(PathWord::edge(g, e))).collect();
        let a = CylinderFunction::indicator(PathWord::vertex(VertexId(0)));
        let mut rel_pairs = Vec::new();
        for x in &edge_fns {
            for y in &edge_fns {
                rel_pairs.push((x, y));
            }
        }
        let rels = rel_pairs
            .par_iter()
            .map(|(x, y)| Ok((ft.check_relations(x, y, &a)?.max(), Value::Null)))
            .collect::<Result<Vec<_>, kmslab_core::Error>>()?;
        let (worst, _) = worst_of(rels);
        out.push(CheckOutcome::new("fock_relations", worst, tol, rel_pairs.len(), None));
    }
    Ok(out)
}
