use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hyperlap::ingest::{build, extract_subnetwork, parse_edge_list};
use hyperlap::persist::{
    load_hyperarc_state, load_hypergraph, load_vertex_state, read_labeled_values,
    save_hyperarc_state, save_hypergraph, save_labels, save_spectrum, save_trace,
    save_vertex_state,
};
use hyperlap::{
    assemble, dense_laplacian, dirichlet_solve, eigendecomposition, neumann_flow,
    renormalized_flow, threshold, BoundaryCondition, FlowConfig, FlowResult, HyperarcMode,
    IncidenceSystem, Leader, OperatorParams, OrientedHypergraph, ParseOptions, StepSize, Variant,
    VertexState,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;

/// Operators and diffusion flows on oriented hypergraphs built from follower
/// networks.
///
/// Exit codes: 0 success, 1 usage error, 2 data error, 3 flow did not
/// converge (outputs are still written).
#[derive(Parser)]
#[command(name = "hyperlap", version, about, long_about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a hypergraph from a follower edge list ("A B" means A follows B)
    Build(BuildArgs),
    /// Apply one operator to a state
    Apply(ApplyArgs),
    /// Run the free (or renormalized) diffusion flow
    Diffuse(DiffuseArgs),
    /// Solve a Dirichlet problem with fixed boundary vertices
    Dirichlet(DirichletArgs),
    /// Threshold a state into two labels (ties at the level get +1)
    Cluster(ClusterArgs),
    /// Smallest eigenpairs of the p = 2 operator (dense; small inputs only)
    Eigen(EigenArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Star,
    Pairwise,
}

#[derive(Clone, Copy, ValueEnum)]
enum Op {
    Grad,
    Adjoint,
    Div,
    Plap,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    General,
    Simplified,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    max_lines: Option<usize>,
    /// Read each line as "B A" (B is followed by A)
    #[arg(long)]
    reverse_pairs: bool,
    #[arg(long, value_enum)]
    mode: Mode,
    /// Restrict to the connected neighborhood of a leader label, or `auto`
    /// for the most-followed user
    #[arg(long)]
    leader: Option<String>,
    #[arg(long, requires = "leader")]
    max_vertices: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct OperatorArgs {
    /// Exponents alpha,beta,gamma,epsilon,eta
    #[arg(long, value_parser = parse_params, default_value = "0,0,0,0,0", allow_hyphen_values = true)]
    params: [f64; 5],
    #[arg(long, value_enum, default_value = "general")]
    variant: VariantArg,
}

impl OperatorArgs {
    fn params(&self) -> OperatorParams {
        match self.variant {
            VariantArg::Simplified => OperatorParams::simplified(),
            VariantArg::General => {
                let [alpha, beta, gamma, epsilon, eta] = self.params;
                OperatorParams { alpha, beta, gamma, epsilon, eta, variant: Variant::General }
            }
        }
    }
}

#[derive(Args)]
struct ApplyArgs {
    #[arg(long)]
    hg: PathBuf,
    #[arg(long, value_enum)]
    op: Op,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Smoothing for p < 2 (defaults to 1e-8 below p = 2, else 0)
    #[arg(long)]
    regularization: Option<f64>,
    /// Vertex state for grad/plap, hyperarc state for adjoint/div
    #[arg(long)]
    state: PathBuf,
    #[command(flatten)]
    operator: OperatorArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FlowArgs {
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Step size, or `auto` for the stability estimate with backtracking
    #[arg(long, value_parser = parse_tau, default_value = "auto")]
    tau: StepSize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    max_iter: usize,
    #[arg(long)]
    regularization: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write a trace row every this many iterations
    #[arg(long, default_value_t = 100)]
    record_every: usize,
    #[command(flatten)]
    operator: OperatorArgs,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    trace: PathBuf,
}

impl FlowArgs {
    fn config(&self) -> FlowConfig {
        let mut cfg = FlowConfig::new(self.p);
        cfg.tau = self.tau;
        cfg.tolerance = self.tol;
        cfg.max_iterations = self.max_iter;
        if let Some(r) = self.regularization {
            cfg.regularization = r;
        }
        cfg.seed = self.seed;
        cfg.record_every = self.record_every;
        cfg
    }
}

#[derive(Args)]
struct DiffuseArgs {
    #[arg(long)]
    hg: PathBuf,
    /// zero, random:LO,HI (centered and normalized), or file:PATH
    #[arg(long, value_parser = parse_init, default_value = "random:-1,1")]
    init: Init,
    /// Track (f − mean)/norm instead of f
    #[arg(long)]
    renormalize: bool,
    #[command(flatten)]
    flow: FlowArgs,
}

#[derive(Args)]
struct DirichletArgs {
    #[arg(long)]
    hg: PathBuf,
    /// Comma-separated LABEL=VALUE pairs
    #[arg(long, value_parser = parse_boundary)]
    boundary: Boundary,
    #[command(flatten)]
    flow: FlowArgs,
}

#[derive(Args)]
struct ClusterArgs {
    #[arg(long)]
    state: PathBuf,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    level: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EigenArgs {
    #[arg(long)]
    hg: PathBuf,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[command(flatten)]
    operator: OperatorArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Debug)]
struct Boundary(Vec<(String, f64)>);

#[derive(Clone, Debug)]
enum Init {
    Zero,
    Random(f64, f64),
    File(PathBuf),
}

fn parse_params(s: &str) -> Result<[f64; 5], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<_, _>>()?;
    v.try_into().map_err(|v: Vec<f64>| format!("expected 5 exponents, got {}", v.len()))
}

fn parse_tau(s: &str) -> Result<StepSize, String> {
    if s == "auto" {
        return Ok(StepSize::Auto);
    }
    match s.parse::<f64>() {
        Ok(t) if t > 0.0 && t.is_finite() => Ok(StepSize::Fixed(t)),
        _ => Err(format!("expected a positive number or `auto`, got {s:?}")),
    }
}

fn parse_init(s: &str) -> Result<Init, String> {
    if s == "zero" {
        return Ok(Init::Zero);
    }
    if let Some(path) = s.strip_prefix("file:") {
        return Ok(Init::File(path.into()));
    }
    if let Some(range) = s.strip_prefix("random:") {
        let (a, b) = range.split_once(',').ok_or("expected random:LO,HI")?;
        let lo: f64 = a.trim().parse().map_err(|_| format!("bad bound {a:?}"))?;
        let hi: f64 = b.trim().parse().map_err(|_| format!("bad bound {b:?}"))?;
        if !(lo < hi) {
            return Err(format!("empty interval [{lo}, {hi}]"));
        }
        return Ok(Init::Random(lo, hi));
    }
    Err(format!("expected zero, random:LO,HI or file:PATH, got {s:?}"))
}

fn parse_boundary(s: &str) -> Result<Boundary, String> {
    s.split(',')
        .map(|item| {
            let (label, value) = item.rsplit_once('=').ok_or_else(|| format!("expected LABEL=VALUE, got {item:?}"))?;
            let v = value.trim().parse::<f64>().map_err(|_| format!("bad value in {item:?}"))?;
            Ok((label.trim().to_owned(), v))
        })
        .collect::<Result<_, String>>()
        .map(Boundary)
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn open(path: &Path) -> anyhow::Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?))
}

fn read_hypergraph(path: &Path) -> anyhow::Result<OrientedHypergraph> {
    load_hypergraph(open(path)?).with_context(|| format!("reading {}", path.display()))
}

fn run_build(a: &BuildArgs) -> anyhow::Result<bool> {
    let opts = ParseOptions { max_lines: a.max_lines, reverse_pairs: a.reverse_pairs };
    let mut arcs = parse_edge_list(open(&a.input)?, opts).with_context(|| format!("parsing {}", a.input.display()))?;
    eprintln!(
        "read {} lines: {} arcs, {} users, {} self-loops and {} duplicates dropped",
        arcs.lines_read,
        arcs.len(),
        arcs.n_labels(),
        arcs.self_loops_dropped,
        arcs.duplicates_dropped
    );
    if let Some(l) = &a.leader {
        let leader = if l == "auto" { Leader::Auto } else { Leader::Label(l.clone()) };
        arcs = extract_subnetwork(&arcs, &leader, a.max_vertices.unwrap_or(usize::MAX))?;
        eprintln!("sub-network around {}: {} users, {} arcs", arcs.labels()[0], arcs.n_labels(), arcs.len());
    }
    let mode = match a.mode {
        Mode::Star => HyperarcMode::FollowerStarHypergraph,
        Mode::Pairwise => HyperarcMode::PairwiseGraph,
    };
    let h = build(&arcs, mode)?;
    eprintln!("{} vertices, {} hyperarcs", h.n_vertices(), h.n_arcs());
    let mut w = create(&a.out)?;
    save_hypergraph(&h, &mut w)?;
    w.flush()?;
    Ok(true)
}

fn default_regularization(p: f64, given: Option<f64>) -> f64 {
    given.unwrap_or(if p < 2.0 { hyperlap::operators::DEFAULT_REGULARIZATION } else { 0.0 })
}

fn run_apply(a: &ApplyArgs) -> anyhow::Result<bool> {
    let h = read_hypergraph(&a.hg)?;
    let sys = assemble(&h, a.operator.params())?;
    let mut w = create(&a.out)?;
    match a.op {
        Op::Grad | Op::Plap => {
            let f = load_vertex_state(&h, open(&a.state)?)?;
            if matches!(a.op, Op::Grad) {
                save_hyperarc_state(&sys.gradient(&f)?, &mut w)?;
            } else {
                let r = default_regularization(a.p, a.regularization);
                save_vertex_state(&h, &sys.p_laplacian(&f, a.p, r)?, &mut w)?;
            }
        }
        Op::Adjoint | Op::Div => {
            let g = load_hyperarc_state(h.n_arcs(), open(&a.state)?)?;
            let out = if matches!(a.op, Op::Adjoint) { sys.adjoint(&g)? } else { sys.divergence(&g)? };
            save_vertex_state(&h, &out, &mut w)?;
        }
    }
    w.flush()?;
    Ok(true)
}

/// Uniform on `[lo, hi]`, then shifted to zero weighted mean and scaled to
/// unit weighted norm.
fn random_init(sys: &IncidenceSystem<'_>, lo: f64, hi: f64, seed: u64) -> VertexState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f: Vec<f64> = (0..sys.n_vertices()).map(|_| rng.gen_range(lo..=hi)).collect();
    let m = sys.weighted_mean(&f);
    f.iter_mut().for_each(|x| *x -= m);
    let norm = sys.vertex_dot(&f, &f).sqrt();
    if norm > 0.0 {
        f.iter_mut().for_each(|x| *x /= norm);
    }
    VertexState(f)
}

fn write_flow(h: &OrientedHypergraph, res: &FlowResult, flow: &FlowArgs) -> anyhow::Result<bool> {
    let mut w = create(&flow.out)?;
    save_vertex_state(h, &res.final_state, &mut w)?;
    w.flush()?;
    let mut t = create(&flow.trace)?;
    save_trace(&res.trace, &mut t)?;
    t.flush()?;
    eprintln!(
        "{} after {} iterations (tau {:.6e})",
        if res.converged { "converged" } else { "not converged" },
        res.iterations,
        res.tau
    );
    Ok(res.converged)
}

fn run_diffuse(a: &DiffuseArgs) -> anyhow::Result<bool> {
    let h = read_hypergraph(&a.hg)?;
    let sys = assemble(&h, a.flow.operator.params())?;
    let f0 = match &a.init {
        Init::Zero => VertexState::zeros(h.n_vertices()),
        Init::Random(lo, hi) => random_init(&sys, *lo, *hi, a.flow.seed),
        Init::File(p) => load_vertex_state(&h, open(p)?)?,
    };
    let cfg = a.flow.config();
    let res = if a.renormalize { renormalized_flow(&sys, &f0, &cfg)? } else { neumann_flow(&sys, &f0, &cfg)? };
    write_flow(&h, &res, &a.flow)
}

fn run_dirichlet(a: &DirichletArgs) -> anyhow::Result<bool> {
    let h = read_hypergraph(&a.hg)?;
    let sys = assemble(&h, a.flow.operator.params())?;
    let index = h.label_index();
    let mut pairs = Vec::new();
    for (label, value) in &a.boundary.0 {
        let v = index.get(label.as_str()).ok_or_else(|| hyperlap::Error::UnknownLabel(label.clone()))?;
        pairs.push((*v, *value));
    }
    let bc = BoundaryCondition::new(pairs)?;
    let res = dirichlet_solve(&sys, &VertexState::zeros(h.n_vertices()), &bc, &a.flow.config())?;
    write_flow(&h, &res, &a.flow)
}

fn run_cluster(a: &ClusterArgs) -> anyhow::Result<bool> {
    let (labels, values) = read_labeled_values(open(&a.state)?)?;
    let classes = threshold(&values, a.level);
    let plus = classes.iter().filter(|&&c| c > 0).count();
    eprintln!("{plus} vertices labeled +1, {} labeled -1", classes.len() - plus);
    let mut w = create(&a.out)?;
    save_labels(&labels, &classes, &mut w)?;
    w.flush()?;
    Ok(true)
}

fn run_eigen(a: &EigenArgs) -> anyhow::Result<bool> {
    let h = read_hypergraph(&a.hg)?;
    let sys = assemble(&h, a.operator.params())?;
    let eig = eigendecomposition(&dense_laplacian(&sys)?)?;
    let k = a.k.min(eig.values.len());
    if k == 0 {
        bail!(hyperlap::Error::InvalidParameter("k must be at least 1".into()));
    }
    eprintln!("nullspace dimension (|λ| ≤ 1e-10): {}", eig.nullspace_dimension(1e-10));
    let mut w = create(&a.out)?;
    save_spectrum(&h, &eig.values[..k], &eig.vectors[..k], &mut w)?;
    w.flush()?;
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Build(a) => run_build(a),
        Command::Apply(a) => run_apply(a),
        Command::Diffuse(a) => run_diffuse(a),
        Command::Dirichlet(a) => run_dirichlet(a),
        Command::Cluster(a) => run_cluster(a),
        Command::Eigen(a) => run_eigen(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_NOT_CONVERGED),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_DATA)
        }
    }
}
