//! Subcommands as library functions returning [`Report`]s.

use std::time::Instant;

use kmslab_core::graph::DEFAULT_PATH_CAP;
use kmslab_core::kms::{KmsState, ToeplitzElement};
use kmslab_core::measure::{integral_f_beta, BETA_MARGIN};
use kmslab_core::spectral::{require_supercritical, SpectralReport};
use kmslab_core::torus::{haar, FourierData, Monomial, TorusSystem};
use kmslab_core::{DirectedMultigraph, Error};
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::json;

use crate::formats::{self, EpsilonSpec, GraphFile};
use crate::report::{InputDigest, Report};
use crate::verify::{self, element_json, VerifyConfig};
use crate::CliError;

fn read(path: &str) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{path}: {e}")))
}

fn load_graph(path: &str, digest: &mut InputDigest) -> Result<DirectedMultigraph, CliError> {
    let text = read(path)?;
    let g = formats::parse_graph(&text)?;
    // digest the parsed graph so whitespace does not matter
    digest.add("graph", serde_json::to_string(&GraphFile::from_graph(&g)).unwrap().as_bytes());
    Ok(g)
}

fn names(g: &DirectedMultigraph, vs: &[kmslab_core::VertexId]) -> Vec<String> {
    vs.iter().map(|&v| g.vertex_name(v).to_string()).collect()
}

fn finish(mut report: Report, start: Instant, timing: bool) -> Report {
    if timing {
        report.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    report
}

pub struct AnalyzeArgs {
    pub graph: String,
    pub n_max: u32,
    pub tol: f64,
    pub timing: bool,
}

pub fn analyze(args: &AnalyzeArgs) -> Result<Report, CliError> {
    let start = Instant::now();
    let mut digest = InputDigest::new();
    let g = load_graph(&args.graph, &mut digest)?;
    digest.add("n_max", &args.n_max.to_le_bytes()).add("tol", &args.tol.to_le_bytes());
    let s = SpectralReport::compute(&g, args.tol, args.n_max);
    let mut warnings = Vec::new();
    if g.has_sinks() {
        warnings.push(format!(
            "vertices {:?} emit no edges; the shift is not surjective and β_l is not reported",
            names(&g, &g.sinks())
        ));
    }
    if !s.rho.has_cycle {
        warnings.push("the graph has no cycle: ρ(A) = 0 and β_c is undefined".to_string());
    }
    let results = json!({
        "vertices": g.num_vertices(),
        "edges": g.num_edges(),
        "sinks": names(&g, &g.sinks()),
        "sources": names(&g, &g.sources()),
        "rho": s.rho,
        "beta_c": s.beta_c,
        "beta_c_sequence": s.beta_c_sequence,
        "beta_l": s.beta_l.as_ref().map(|b| b.estimate),
        "beta_l_sequence": s.beta_l.as_ref().map(|b| b.sequence.clone()),
        "components": s.components,
        "achieving_components": s.achieving_components,
        "perron_vectors": s.perron_vectors,
        "perron_residuals": s.perron_residuals,
        "growth": s.growth,
        "warnings": warnings,
    });
    let mut report = Report::new("analyze", &digest, results).tolerance("rho", args.tol);
    let width = s.rho.upper - s.rho.lower;
    report.verdict("rho_enclosure", width <= args.tol * s.rho.value.max(1.0));
    if let Some(gr) = &s.growth {
        report.verdict("growth_bound", gr.pass);
    }
    let worst_residual = s.perron_residuals.iter().map(|(_, r)| *r).fold(0.0, f64::max);
    report.verdict("perron_residual", worst_residual <= 1e-9 * s.rho.value.max(1.0));
    Ok(finish(report, start, args.timing))
}

pub struct StateArgs {
    pub graph: String,
    pub beta: String,
    pub epsilon: String,
    pub elements: Option<String>,
    pub depth: usize,
    pub tol: f64,
    pub timing: bool,
}

fn add_epsilon(digest: &mut InputDigest, spec: &EpsilonSpec) -> Result<(), CliError> {
    match spec {
        EpsilonSpec::File(p) => digest.add("epsilon_file", read(p)?.as_bytes()),
        EpsilonSpec::Point(v) => digest.add("epsilon_point", v.as_bytes()),
        EpsilonSpec::Uniform => digest.add("epsilon", b"uniform"),
    };
    Ok(())
}

fn subcritical(g: &DirectedMultigraph, beta: f64) -> Result<(), CliError> {
    match require_supercritical(g, beta, BETA_MARGIN) {
        Ok(_) => Ok(()),
        Err(Error::SubcriticalTemperature { beta, beta_c }) => Err(CliError::Domain(format!(
            "β = {beta} does not exceed β_c = {beta_c}; no state of this form exists"
        ))),
        Err(e) => Err(e.into()),
    }
}

pub fn state(args: &StateArgs) -> Result<Report, CliError> {
    let start = Instant::now();
    let mut digest = InputDigest::new();
    let g = load_graph(&args.graph, &mut digest)?;
    let beta = formats::parse_beta(&args.beta)?;
    digest.add("beta", &beta.to_le_bytes()).add("depth", &args.depth.to_le_bytes());
    let spec = EpsilonSpec::parse(&args.epsilon);
    add_epsilon(&mut digest, &spec)?;
    g.require_no_sinks().map_err(|e| CliError::Domain(e.to_string()))?;
    subcritical(&g, beta)?;

    let specs = match &args.elements {
        Some(p) => {
            let text = read(p)?;
            digest.add("elements", text.as_bytes());
            formats::parse_elements(&text)?
        }
        None => Vec::new(),
    };
    let mut elements = specs.iter().map(|s| s.build(&g)).collect::<Result<Vec<_>, _>>()?;
    if elements.is_empty() {
        // φ(S_λ S_ν*) over paths of length at most one
        for k in 0..=1 {
            for lam in g.all_paths(k, DEFAULT_PATH_CAP)? {
                for nu in g.all_paths(k, DEFAULT_PATH_CAP)? {
                    elements.push(ToeplitzElement::path_pair(&g, &lam, &nu));
                }
            }
        }
    }
    let depth = elements.iter().map(ToeplitzElement::max_middle_len).max().unwrap_or(0).max(args.depth);
    let raw = spec.resolve(&g, depth, args.tol)?;
    let mass = integral_f_beta(&g, &raw, beta)?;
    let mut notes = Vec::new();
    if (mass - 1.0).abs() > args.tol {
        notes.push(format!("ε had ∫f_β dε = {mass}; it was rescaled to 1"));
    }
    let st = KmsState::normalized(&g, beta, &raw, depth)?;
    let table = elements
        .iter()
        .map(|x| Ok(json!({"element": element_json(&g, x), "degree": x.degree(), "value": st.evaluate(x)?})))
        .collect::<Result<Vec<_>, Error>>()?;
    let gaps = st.cp_gaps()?;
    let eps_vec = st.epsilon().vertex_marginal(&g);
    let normalised = integral_f_beta(&g, st.epsilon(), beta)?;
    let results = json!({
        "beta": beta,
        "depth": depth,
        "epsilon": formats::measure_to_file(&g, st.epsilon()),
        "epsilon_vertex": eps_vec,
        "f_beta": st.f_beta(),
        "mu_vertex": st.m_vec(),
        "integral_f_beta": normalised,
        "cp_gap": gaps,
        "factors_through_quotient": st.factors_through_quotient()?,
        "table": table,
        "notes": notes,
    });
    let mut report = Report::new("state", &digest, results).tolerance("normalisation", 1e-12).tolerance("cp_gap", 1e-10);
    report.verdict("normalised", (normalised - 1.0).abs() <= 1e-12);
    let gap_err = gaps.iter().zip(&eps_vec).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    report.verdict("cp_gap_equals_epsilon", gap_err <= 1e-10);
    Ok(finish(report, start, args.timing))
}

pub struct VerifyArgs {
    pub graph: String,
    pub beta: String,
    pub epsilon: String,
    pub seed: u64,
    pub samples: usize,
    pub fock_samples: usize,
    pub positivity_samples: usize,
    pub depth: usize,
    pub levels: usize,
    pub tol: f64,
    pub timing: bool,
}

pub fn verify(args: &VerifyArgs) -> Result<Report, CliError> {
    let start = Instant::now();
    let mut digest = InputDigest::new();
    let g = load_graph(&args.graph, &mut digest)?;
    let beta = formats::parse_beta(&args.beta)?;
    let spec = EpsilonSpec::parse(&args.epsilon);
    add_epsilon(&mut digest, &spec)?;
    for (label, v) in [
        ("seed", args.seed),
        ("samples", args.samples as u64),
        ("fock_samples", args.fock_samples as u64),
        ("positivity_samples", args.positivity_samples as u64),
        ("depth", args.depth as u64),
        ("levels", args.levels as u64),
    ] {
        digest.add(label, &v.to_le_bytes());
    }
    digest.add("beta", &beta.to_le_bytes()).add("tol", &args.tol.to_le_bytes());
    g.require_no_sinks().map_err(|e| CliError::Domain(e.to_string()))?;
    subcritical(&g, beta)?;
    let eps = spec.resolve(&g, args.depth, args.tol)?;
    let cfg = VerifyConfig {
        beta,
        seed: args.seed,
        samples: args.samples,
        fock_samples: args.fock_samples,
        positivity_samples: args.positivity_samples,
        depth: args.depth,
        levels: args.levels,
        tol: args.tol,
        threads: crate::thread_cap(),
    };
    let outcomes = verify::run(&g, &eps, &cfg)?;
    let mut report = Report::new("verify", &digest, json!({ "checks": outcomes })).tolerance("all", args.tol);
    for c in &outcomes {
        report.verdict(&c.name, c.pass);
    }
    Ok(finish(report, start, args.timing))
}

pub struct TorusArgs {
    pub matrix: String,
    pub beta: String,
    pub max_k: usize,
    pub radius: i64,
    pub fourier: Option<String>,
    pub tol: f64,
    pub timing: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FourierEntry {
    r: Vec<i64>,
    re: f64,
    #[serde(default)]
    im: f64,
}

fn box_points(d: usize, radius: i64) -> Vec<Vec<i64>> {
    let mut pts = vec![Vec::new()];
    for _ in 0..d {
        pts = pts
            .into_iter()
            .flat_map(|p| {
                (-radius..=radius).map(move |x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    pts
}

pub fn torus(args: &TorusArgs) -> Result<Report, CliError> {
    let start = Instant::now();
    let mut digest = InputDigest::new();
    let a = formats::parse_int_matrix(&args.matrix)?;
    let beta = formats::parse_beta(&args.beta)?;
    let sys = TorusSystem::new(a.clone()).map_err(|e| CliError::Input(e.to_string()))?;
    let d = sys.dim();
    digest
        .add("matrix", serde_json::to_string(&a).unwrap().as_bytes())
        .add("beta", &beta.to_le_bytes())
        .add("max_k", &args.max_k.to_le_bytes())
        .add("radius", &args.radius.to_le_bytes())
        .add("tol", &args.tol.to_le_bytes());
    let nu: FourierData = match &args.fourier {
        Some(p) => {
            let text = read(p)?;
            digest.add("fourier", text.as_bytes());
            let entries: Vec<FourierEntry> =
                serde_json::from_str(&text).map_err(|e| CliError::Input(format!("Fourier JSON: {e}")))?;
            let mut f = FourierData::new();
            for e in entries {
                if e.r.len() != d {
                    return Err(CliError::Input(format!("Fourier index {:?} must have length {d}", e.r)));
                }
                f.insert(e.r, Complex64::new(e.re, e.im));
            }
            f
        }
        None => haar(d),
    };
    let f = match sys.f_beta_const(beta) {
        Ok(f) => f,
        Err(Error::SubcriticalTemperature { beta, beta_c }) => {
            return Err(CliError::Domain(format!("β = {beta} does not exceed ln N = {beta_c}")))
        }
        Err(e) => return Err(e.into()),
    };
    let zero = vec![0i64; d];
    let mut rows = Vec::new();
    for m in box_points(d, args.radius) {
        for k in 0..=args.max_k {
            let el = Monomial { m: m.clone(), k, l: k, n: zero.clone() };
            let v = sys.evaluate_monomial(beta, &nu, &el, args.tol)?;
            rows.push(json!({"m": m, "n": zero, "k": k, "l": k, "re": v.value.re, "im": v.value.im, "tail_bound": v.tail_bound, "terms": v.terms}));
        }
    }
    let unit = sys.evaluate_monomial(beta, &nu, &Monomial { m: zero.clone(), k: 0, l: 0, n: zero.clone() }, args.tol)?;
    let results = json!({
        "matrix": a,
        "degree": sys.degree(),
        "beta_c": sys.beta_c(),
        "f_beta": f,
        "unit": [unit.value.re, unit.value.im],
        "table": rows,
    });
    let mut report = Report::new("example torus", &digest, results).tolerance("unit", 1e-12);
    let c0 = nu.get(&zero).copied().unwrap_or_default();
    report.verdict("unit_matches_total_mass", (unit.value - c0).norm() <= 1e-12 + unit.tail_bound);
    Ok(finish(report, start, args.timing))
}
