//! `tamespace` — exact geometry of monomial valuations under tame
//! polynomial automorphisms, on the command line.
//!
//! Subcommands mirror the library modules: `tame` (words), `val`
//! (valuation points and the action), `adm` (admissible hyperplanes),
//! `stab` (stabilizer structure), `dist`/`angle`/`tree` (the metric),
//! `link` (ray-direction graphs), `linearize` (finite subgroups), and
//! `witness` (moved-valuation certificates).
//!
//! Exit codes: 0 on success, 2 on invalid input or a violated
//! precondition, 3 when a degree cap or search budget was exhausted.

mod config;
mod input;
mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{parse_field, SessionConfig};
use input::{load_point, load_word, load_words, parse_ray, parse_weight, render_matrix};
use report::{Item, Report};

use tamespace::admissible_geometry::{
    hyperplanes_meeting_ball, hyperplanes_through, multiplicity, simplicial_projection,
};
use tamespace::linearize::{common_fixed_region, linearize_at, GROUP_CLOSURE_LIMIT};
use tamespace::metric::{angle, chain_distance_upper, distance_lower, x2_tree_ball};
use tamespace::stabilizer::{
    decompose_stabilizer, in_l_alpha, in_m_alpha, in_n_alpha, locally_equivalent, sector,
};
use tamespace::tame_group::bruhat_permutation;
use tamespace::valuation_space::{
    act, fixes, moved_valuation_witness, point_eval, points_equal, rho, rho_plus,
};
use tamespace::{
    affine_words_f2, build_link, example_angles_cycle, Error, Field, FiniteGroup, LinkGraph,
    MetricKind, Polynomial, Result, TameWord, ValuationPoint,
};

// ---------------------------------------------------------------------------
// Command-line grammar
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "tamespace",
    version,
    about = "Exact geometry of monomial valuations under tame polynomial automorphisms",
    after_help = "Word files are line-oriented: `aff [[a,b],[c,d]] [t1,t2]`, `elem i \"P\"`, \
                  `perm [2,1,3]`; one generator per line, first line outermost; `#` starts a \
                  comment. Group files hold several words separated by blank lines. Weights are \
                  comma-separated positive rationals like `3,2,1` or `3/2,1,1`."
)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalOpts {
    /// Coefficient field: `rationals` (default) or a prime number.
    #[arg(long, global = true)]
    field: Option<String>,
    /// Number of variables when no weight argument implies it.
    #[arg(short = 'n', long = "vars", global = true)]
    vars: Option<usize>,
    /// Degree cap for exact word expansion and substitution.
    #[arg(long, global = true)]
    cap: Option<u32>,
    /// Numeric tolerance for metric reports.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Grid refinement for chain upper bounds.
    #[arg(long, global = true)]
    mesh: Option<u32>,
    /// Search depth for chains and tree balls.
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Seed for sampling-based subroutines (reserved for reproducibility).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Config file (default: the path in $TAMESPACE_CONFIG, if set).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Emit structured JSON instead of plain text.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Operations on tame automorphism words.
    Tame {
        #[command(subcommand)]
        cmd: TameCmd,
    },
    /// Valuation points: evaluation, the action, fixed tests, equality.
    Val {
        #[command(subcommand)]
        cmd: ValCmd,
    },
    /// Admissible hyperplanes: enumeration, multiplicity, projection.
    Adm {
        #[command(subcommand)]
        cmd: AdmCmd,
    },
    /// Stabilizer structure: decomposition, membership, local equivalence.
    Stab {
        #[command(subcommand)]
        cmd: StabCmd,
    },
    /// Distances: lower bounds, chain upper bounds, the rank-one tree.
    Dist {
        #[command(subcommand)]
        cmd: DistCmd,
    },
    /// Angle between two ray directions at a weight with three coordinates.
    Angle(AngleArgs),
    /// Link graphs of ray directions, gluings, and girth checks.
    Link {
        #[command(subcommand)]
        cmd: LinkCmd,
    },
    /// Explore the rank-one tree over a finite field (alias of `dist tree`).
    Tree(TreeArgs),
    /// Linearize a finite group of words by averaging at a fixed weight.
    Linearize(LinearizeArgs),
    /// Certificate that a word moves some valuation (alias of `val witness`).
    Witness(WitnessArgs),
}

#[derive(Subcommand)]
enum TameCmd {
    /// Compose word files left to right (first file outermost).
    Compose { files: Vec<PathBuf> },
    /// Invert a word.
    Invert { file: PathBuf },
    /// Expand a word into its polynomial components.
    Components { file: PathBuf },
    /// The differential at the origin, as a matrix.
    Diff { file: PathBuf },
    /// The Bruhat permutation of the differential at the origin.
    Bruhat { file: PathBuf },
}

#[derive(Subcommand)]
enum ValCmd {
    /// Evaluate the valuation at a point on a polynomial.
    Eval {
        /// Weight, comma-separated rationals.
        #[arg(short = 'w', long)]
        weight: String,
        /// Polynomial, e.g. "x1^2 + 2*x2*x3".
        #[arg(short = 'P', long)]
        poly: String,
        /// Frame word file (default: identity).
        #[arg(long)]
        frame: Option<PathBuf>,
    },
    /// Apply a word to a valuation point.
    Act {
        #[arg(short = 'w', long)]
        weight: String,
        /// The acting word.
        #[arg(long)]
        word: PathBuf,
        #[arg(long)]
        frame: Option<PathBuf>,
    },
    /// Does the word fix the identity-frame valuation at the weight?
    Fix {
        #[arg(short = 'w', long)]
        weight: String,
        #[arg(long)]
        word: PathBuf,
    },
    /// Are two valuation points equal?
    Equal {
        #[arg(long)]
        weight_a: String,
        #[arg(long)]
        weight_b: String,
        #[arg(long)]
        frame_a: Option<PathBuf>,
        #[arg(long)]
        frame_b: Option<PathBuf>,
    },
    /// Project a valuation point to its projective weight class.
    Rho {
        #[arg(short = 'w', long)]
        weight: String,
        #[arg(long)]
        frame: Option<PathBuf>,
        /// Use the sorted-chamber projection (no Bruhat correction).
        #[arg(long)]
        plus: bool,
    },
    /// Certificate that a word moves some valuation.
    Witness {
        #[arg(long)]
        word: PathBuf,
    },
}

#[derive(Subcommand)]
enum AdmCmd {
    /// Admissible hyperplanes through a weight.
    Through {
        #[arg(short = 'w', long)]
        weight: String,
    },
    /// Number of admissible hyperplanes through a weight.
    Mult {
        #[arg(short = 'w', long)]
        weight: String,
    },
    /// Admissible hyperplanes meeting the log-metric ball of a radius.
    Ball {
        #[arg(short = 'w', long)]
        weight: String,
        #[arg(short = 'r', long)]
        radius: f64,
    },
    /// The simplicial projection of a weight and its vertex types.
    Project {
        #[arg(short = 'w', long)]
        weight: String,
    },
}

#[derive(Subcommand)]
enum StabCmd {
    /// Split a stabilizer element into its shear and linear parts.
    Decompose {
        #[arg(short = 'w', long)]
        weight: String,
        #[arg(long)]
        word: PathBuf,
    },
    /// Membership of a word in the stabilizer and its subgroups.
    Member {
        #[arg(short = 'w', long)]
        weight: String,
        #[arg(long)]
        word: PathBuf,
    },
    /// Are two words locally equivalent at a valuation point?
    Equiv {
        #[arg(short = 'w', long)]
        weight: String,
        #[arg(long)]
        word_a: PathBuf,
        #[arg(long)]
        word_b: PathBuf,
        #[arg(long)]
        frame: Option<PathBuf>,
    },
    /// The common sector of two words fixing a valuation point.
    Sector {
        #[arg(short = 'w', long)]
        weight: String,
        #[arg(long)]
        word_a: PathBuf,
        #[arg(long)]
        word_b: PathBuf,
        #[arg(long)]
        frame: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum DistCmd {
    /// Lower bound on the distance between two valuation points.
    Lower {
        #[arg(long)]
        weight_a: String,
        #[arg(long)]
        weight_b: String,
        #[arg(long)]
        frame_a: Option<PathBuf>,
        #[arg(long)]
        frame_b: Option<PathBuf>,
    },
    /// Chain upper bound, hopping between apartments from a catalog.
    Upper {
        #[arg(long)]
        weight_a: String,
        #[arg(long)]
        weight_b: String,
        #[arg(long)]
        frame_a: Option<PathBuf>,
        #[arg(long)]
        frame_b: Option<PathBuf>,
        /// Group file of catalog words to hop through.
        #[arg(long)]
        catalog: Option<PathBuf>,
    },
    /// Explore the rank-one tree over a finite field.
    Tree(TreeArgs),
}

#[derive(Args)]
struct TreeArgs {
    /// Root weight with two coordinates (normalizing to integers `i,1`).
    #[arg(short = 'w', long, default_value = "1,1")]
    weight: String,
    /// Degree cap for the enumerated stabilizers.
    #[arg(long, default_value_t = 3)]
    stab_cap: u32,
}

#[derive(Args)]
struct AngleArgs {
    /// Base weight with three coordinates.
    #[arg(short = 'w', long)]
    weight: String,
    /// Ideal target of the first ray, e.g. `0,0,1` (zeros allowed).
    #[arg(long)]
    toward_a: String,
    /// Ideal target of the second ray.
    #[arg(long)]
    toward_b: String,
    /// Hyperplane trace for the first ray, as `i:m1,m2,m3`.
    #[arg(long)]
    hyperplane_a: Option<String>,
    /// Hyperplane trace for the second ray.
    #[arg(long)]
    hyperplane_b: Option<String>,
    /// Metric to measure in.
    #[arg(long, value_enum, default_value_t = MetricArg::Log)]
    metric: MetricArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Log,
    Simplex,
}

#[derive(Subcommand)]
enum LinkCmd {
    /// Build the link of a valuation point under a group file.
    Build(LinkBuildArgs),
    /// Girth (combinatorial and metric) of a link.
    Girth(LinkBuildArgs),
    /// Short-cycle curvature check of a link.
    Cat1(LinkBuildArgs),
    /// The link at weight (1,1,1) over the two-element field.
    Fano {
        /// Also print the DOT rendering.
        #[arg(long)]
        dot: bool,
    },
    /// The closed four-arc cycle at weight (pq, p, 1).
    Octangle {
        #[arg(short = 'p', long)]
        p: u32,
        #[arg(short = 'q', long)]
        q: u32,
    },
}

#[derive(Args)]
struct LinkBuildArgs {
    /// Weight with three coordinates.
    #[arg(short = 'w', long)]
    weight: String,
    /// Group file of words fixing the valuation (blank-line separated).
    #[arg(long)]
    group: PathBuf,
    /// Frame word file (default: identity).
    #[arg(long)]
    frame: Option<PathBuf>,
    /// Radius of the group ball glued into the link.
    #[arg(long, default_value_t = 1)]
    radius: usize,
    /// Also print the DOT rendering.
    #[arg(long)]
    dot: bool,
}

#[derive(Args)]
struct LinearizeArgs {
    /// Group file whose words generate the finite group.
    #[arg(long)]
    group: PathBuf,
    /// Conjugate every generator by this word before linearizing.
    #[arg(long)]
    conjugate_by: Option<PathBuf>,
    /// Weight to average at (default: a sampled common fixed weight).
    #[arg(short = 'w', long)]
    weight: Option<String>,
}

#[derive(Args)]
struct WitnessArgs {
    /// The word to certify.
    #[arg(long)]
    word: PathBuf,
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

fn main() {
    let cli = Cli::parse();
    let json = cli.global.json;
    match run(cli) {
        Ok(report) => report.print(json),
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(if err.is_budget() { 3 } else { 2 });
        }
    }
}

fn run(cli: Cli) -> Result<Report> {
    let mut cfg = SessionConfig::load(cli.global.config.as_deref())?;
    if let Some(field) = &cli.global.field {
        cfg.field = parse_field(field)?;
    }
    if let Some(vars) = cli.global.vars {
        cfg.vars = vars;
    }
    if let Some(cap) = cli.global.cap {
        cfg.cap = cap;
    }
    if let Some(tolerance) = cli.global.tolerance {
        cfg.tolerance = tolerance;
    }
    if let Some(mesh) = cli.global.mesh {
        cfg.mesh = mesh;
    }
    if let Some(depth) = cli.global.depth {
        cfg.depth = depth;
    }
    if let Some(seed) = cli.global.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;

    match cli.command {
        Command::Tame { cmd } => run_tame(&cfg, cmd),
        Command::Val { cmd } => run_val(&cfg, cmd),
        Command::Adm { cmd } => run_adm(cmd),
        Command::Stab { cmd } => run_stab(&cfg, cmd),
        Command::Dist { cmd } => run_dist(&cfg, cmd),
        Command::Angle(args) => run_angle(args),
        Command::Link { cmd } => run_link(&cfg, cmd),
        Command::Tree(args) => run_tree(&cfg, args),
        Command::Linearize(args) => run_linearize(&cfg, args),
        Command::Witness(args) => run_witness(&cfg, args),
    }
}

// ---------------------------------------------------------------------------
// tame
// ---------------------------------------------------------------------------

fn run_tame(cfg: &SessionConfig, cmd: TameCmd) -> Result<Report> {
    let n = cfg.vars;
    let field = cfg.field;
    match cmd {
        TameCmd::Compose { files } => {
            if files.is_empty() {
                return Err(Error::precondition("compose needs at least one word file"));
            }
            let mut acc = TameWord::identity(n, field);
            for file in &files {
                acc = acc.compose(&load_word(file, n, field)?)?;
            }
            Ok(Report::single(Item::Text(acc.to_string())))
        }
        TameCmd::Invert { file } => {
            let word = load_word(&file, n, field)?;
            Ok(Report::single(Item::Text(word.invert()?.to_string())))
        }
        TameCmd::Components { file } => {
            let word = load_word(&file, n, field)?;
            let comps = word.components(cfg.cap)?;
            let lines: Vec<String> = comps
                .iter()
                .enumerate()
                .map(|(i, p)| format!("f{} = {p}", i + 1))
                .collect();
            Ok(Report::single(Item::List(lines)))
        }
        TameCmd::Diff { file } => {
            let word = load_word(&file, n, field)?;
            let matrix = word.diff_at_origin(cfg.cap)?;
            Ok(Report::single(Item::Str(render_matrix(&matrix))))
        }
        TameCmd::Bruhat { file } => {
            let word = load_word(&file, n, field)?;
            let sigma = bruhat_permutation(&word.diff_at_origin(cfg.cap)?)?;
            let parts: Vec<String> = sigma.iter().map(|i| i.to_string()).collect();
            Ok(Report::single(Item::Str(format!("[{}]", parts.join(",")))))
        }
    }
}

// ---------------------------------------------------------------------------
// val
// ---------------------------------------------------------------------------

fn run_val(cfg: &SessionConfig, cmd: ValCmd) -> Result<Report> {
    let field = cfg.field;
    match cmd {
        ValCmd::Eval {
            weight,
            poly,
            frame,
        } => {
            let w = parse_weight(&weight)?;
            let point = load_point(&w, frame.as_deref(), field)?;
            let p = Polynomial::parse(&poly, w.n(), field)?;
            let value = point_eval(&point, &p, cfg.cap)?;
            Ok(Report::single(Item::Str(value.to_string())))
        }
        ValCmd::Act {
            weight,
            word,
            frame,
        } => {
            let w = parse_weight(&weight)?;
            let point = load_point(&w, frame.as_deref(), field)?;
            let g = load_word(&word, w.n(), field)?;
            let moved = act(&g, &point)?;
            let mut report = Report::new();
            report.push("weight", Item::Str(moved.weight().to_string()));
            report.push("frame", Item::Text(moved.frame().to_string()));
            Ok(report)
        }
        ValCmd::Fix { weight, word } => {
            let w = parse_weight(&weight)?;
            let f = load_word(&word, w.n(), field)?;
            Ok(Report::single(Item::Bool(fixes(&f, &w, cfg.cap)?)))
        }
        ValCmd::Equal {
            weight_a,
            weight_b,
            frame_a,
            frame_b,
        } => {
            let wa = parse_weight(&weight_a)?;
            let wb = parse_weight(&weight_b)?;
            let a = load_point(&wa, frame_a.as_deref(), field)?;
            let b = load_point(&wb, frame_b.as_deref(), field)?;
            Ok(Report::single(Item::Bool(points_equal(&a, &b, cfg.cap)?)))
        }
        ValCmd::Rho {
            weight,
            frame,
            plus,
        } => {
            let w = parse_weight(&weight)?;
            let point = load_point(&w, frame.as_deref(), field)?;
            let class = if plus {
                rho_plus(&point)
            } else {
                rho(&point, cfg.cap)?
            };
            Ok(Report::single(Item::Str(class.to_string())))
        }
        ValCmd::Witness { word } => witness_report(cfg, &word),
    }
}

fn witness_report(cfg: &SessionConfig, word: &PathBuf) -> Result<Report> {
    let f = load_word(word, cfg.vars, cfg.field)?;
    let witness = moved_valuation_witness(&f, cfg.cap)?;
    let mut report = Report::new();
    report.push("weight", Item::Str(witness.point.weight().to_string()));
    report.push("frame", Item::Text(witness.point.frame().to_string()));
    report.push("poly", Item::Str(witness.poly.to_string()));
    report.push("normalizer", Item::Str(witness.normalizer.to_string()));
    report.push("value_poly", Item::Str(witness.value_poly.to_string()));
    report.push(
        "moved_value_poly",
        Item::Str(witness.moved_value_poly.to_string()),
    );
    report.push(
        "value_normalizer",
        Item::Str(witness.value_normalizer.to_string()),
    );
    report.push(
        "moved_value_normalizer",
        Item::Str(witness.moved_value_normalizer.to_string()),
    );
    report.push("certified", Item::Bool(witness.certifies()));
    Ok(report)
}

// ---------------------------------------------------------------------------
// adm
// ---------------------------------------------------------------------------

fn run_adm(cmd: AdmCmd) -> Result<Report> {
    match cmd {
        AdmCmd::Through { weight } => {
            let w = parse_weight(&weight)?;
            let eqs: Vec<String> = hyperplanes_through(&w)?
                .iter()
                .map(|ineq| ineq.equation_string())
                .collect();
            Ok(Report::single(Item::List(eqs)))
        }
        AdmCmd::Mult { weight } => {
            let w = parse_weight(&weight)?;
            Ok(Report::single(Item::Int(multiplicity(&w)? as i64)))
        }
        AdmCmd::Ball { weight, radius } => {
            let w = parse_weight(&weight)?;
            let eqs: Vec<String> = hyperplanes_meeting_ball(&w, radius)?
                .iter()
                .map(|ineq| ineq.equation_string())
                .collect();
            Ok(Report::single(Item::List(eqs)))
        }
        AdmCmd::Project { weight } => {
            let w = parse_weight(&weight)?;
            let (projected, vertex_types) = simplicial_projection(&w);
            let mut report = Report::new();
            report.push("projection", Item::Str(projected.to_string()));
            report.push(
                "vertex_types",
                Item::Ints(vertex_types.iter().map(|&t| t as i64).collect()),
            );
            Ok(report)
        }
    }
}

// ---------------------------------------------------------------------------
// stab
// ---------------------------------------------------------------------------

fn run_stab(cfg: &SessionConfig, cmd: StabCmd) -> Result<Report> {
    let field = cfg.field;
    match cmd {
        StabCmd::Decompose { weight, word } => {
            let w = parse_weight(&weight)?;
            let f = load_word(&word, w.n(), field)?;
            let decomposition = decompose_stabilizer(&f, &w, cfg.cap)?;
            let mut report = Report::new();
            report.push("m", Item::Text(decomposition.m.to_string()));
            report.push("l", Item::Str(render_matrix(&decomposition.l)));
            Ok(report)
        }
        StabCmd::Member { weight, word } => {
            let w = parse_weight(&weight)?;
            let f = load_word(&word, w.n(), field)?;
            let mut report = Report::new();
            report.push("stabilizer", Item::Bool(fixes(&f, &w, cfg.cap)?));
            report.push("m_alpha", Item::Bool(in_m_alpha(&f, &w, cfg.cap)?));
            report.push("l_alpha", Item::Bool(in_l_alpha(&f, &w, cfg.cap)?));
            match in_n_alpha(&f, &w, cfg.cap) {
                Ok(b) => report.push("n_alpha", Item::Bool(b)),
                Err(Error::UnsupportedWeightShape(_)) => {
                    report.push("n_alpha", Item::Str("unsupported weight shape".into()))
                }
                Err(err) => return Err(err),
            }
            Ok(report)
        }
        StabCmd::Equiv {
            weight,
            word_a,
            word_b,
            frame,
        } => {
            let w = parse_weight(&weight)?;
            let nu = load_point(&w, frame.as_deref(), field)?;
            let f = load_word(&word_a, w.n(), field)?;
            let g = load_word(&word_b, w.n(), field)?;
            Ok(Report::single(Item::Bool(locally_equivalent(
                &f, &g, &nu, cfg.cap,
            )?)))
        }
        StabCmd::Sector {
            weight,
            word_a,
            word_b,
            frame,
        } => {
            let w = parse_weight(&weight)?;
            let nu = load_point(&w, frame.as_deref(), field)?;
            let f = load_word(&word_a, w.n(), field)?;
            let g = load_word(&word_b, w.n(), field)?;
            let descriptor = sector(&f, &g, &nu, cfg.cap)?;
            Ok(Report::single(Item::Str(descriptor.to_string())))
        }
    }
}

// ---------------------------------------------------------------------------
// dist / tree
// ---------------------------------------------------------------------------

fn run_dist(cfg: &SessionConfig, cmd: DistCmd) -> Result<Report> {
    let field = cfg.field;
    match cmd {
        DistCmd::Lower {
            weight_a,
            weight_b,
            frame_a,
            frame_b,
        } => {
            let a = load_point(&parse_weight(&weight_a)?, frame_a.as_deref(), field)?;
            let b = load_point(&parse_weight(&weight_b)?, frame_b.as_deref(), field)?;
            Ok(Report::single(Item::Float(distance_lower(
                &a, &b, cfg.cap,
            )?)))
        }
        DistCmd::Upper {
            weight_a,
            weight_b,
            frame_a,
            frame_b,
            catalog,
        } => {
            let a = load_point(&parse_weight(&weight_a)?, frame_a.as_deref(), field)?;
            let b = load_point(&parse_weight(&weight_b)?, frame_b.as_deref(), field)?;
            let words = match catalog {
                Some(path) => load_words(&path, a.n_vars(), field)?,
                None => Vec::new(),
            };
            let (upper, witness) =
                chain_distance_upper(&a, &b, &words, cfg.depth, cfg.mesh, cfg.cap)?;
            let mut report = Report::new();
            report.push("upper", Item::Float(upper));
            report.push("chain", Item::Text(witness.to_string()));
            Ok(report)
        }
        DistCmd::Tree(args) => run_tree(cfg, args),
    }
}

fn run_tree(cfg: &SessionConfig, args: TreeArgs) -> Result<Report> {
    let w = parse_weight(&args.weight)?;
    let root = ValuationPoint::new(TameWord::identity(w.n(), cfg.field), &w)?;
    let ball = x2_tree_ball(&root, cfg.depth, args.stab_cap, cfg.cap)?;
    let mut report = Report::new();
    report.push("vertices", Item::Int(ball.vertex_count() as i64));
    report.push("edges", Item::Int(ball.edge_count() as i64));
    report.push("acyclic", Item::Bool(ball.is_acyclic()));
    let edge_lines: Vec<String> = ball
        .edges()
        .iter()
        .map(|&(u, v, len)| {
            format!(
                "{u} -- {v}  length {len}  ({} -> {})",
                ball.vertices()[u].1,
                ball.vertices()[v].1
            )
        })
        .collect();
    report.push("edge_list", Item::List(edge_lines));
    Ok(report)
}

// ---------------------------------------------------------------------------
// angle
// ---------------------------------------------------------------------------

fn run_angle(args: AngleArgs) -> Result<Report> {
    let w = parse_weight(&args.weight)?;
    let ray_a = parse_ray(&args.toward_a, args.hyperplane_a.as_deref())?;
    let ray_b = parse_ray(&args.toward_b, args.hyperplane_b.as_deref())?;
    let metric = match args.metric {
        MetricArg::Log => MetricKind::Log,
        MetricArg::Simplex => MetricKind::Simplex,
    };
    Ok(Report::single(Item::Float(angle(
        &w, &ray_a, &ray_b, metric,
    )?)))
}

// ---------------------------------------------------------------------------
// link
// ---------------------------------------------------------------------------

fn link_report(link: &LinkGraph, tolerance: f64, dot: bool) -> Report {
    let mut report = Report::new();
    report.push("vertices", Item::Int(link.vertex_count() as i64));
    report.push("edges", Item::Int(link.edge_count() as i64));
    report.push("apartments", Item::Int(link.apartments().len() as i64));
    match link.combinatorial_girth() {
        Some(g) => report.push("combinatorial_girth", Item::Int(g as i64)),
        None => report.push("combinatorial_girth", Item::Str("acyclic".into())),
    }
    report.push("metric_girth", Item::Float(link.metric_girth()));
    match link.diameter() {
        Some(d) => report.push("diameter", Item::Int(d as i64)),
        None => report.push("diameter", Item::Str("disconnected".into())),
    }
    let cat1 = link.check_cat1(tolerance);
    report.push("short_cycle_free", Item::Bool(cat1.satisfied));
    if dot {
        report.push("dot", Item::Text(link.dot()));
    }
    report
}

fn build_from_args(cfg: &SessionConfig, args: &LinkBuildArgs) -> Result<LinkGraph> {
    let w = parse_weight(&args.weight)?;
    let nu = load_point(&w, args.frame.as_deref(), cfg.field)?;
    let group = load_words(&args.group, w.n(), cfg.field)?;
    build_link(&nu, &group, args.radius, cfg.cap)
}

fn run_link(cfg: &SessionConfig, cmd: LinkCmd) -> Result<Report> {
    match cmd {
        LinkCmd::Build(args) => {
            let link = build_from_args(cfg, &args)?;
            Ok(link_report(&link, cfg.tolerance, args.dot))
        }
        LinkCmd::Girth(args) => {
            let link = build_from_args(cfg, &args)?;
            let mut report = Report::new();
            match link.combinatorial_girth() {
                Some(g) => report.push("combinatorial_girth", Item::Int(g as i64)),
                None => report.push("combinatorial_girth", Item::Str("acyclic".into())),
            }
            report.push("metric_girth", Item::Float(link.metric_girth()));
            report.push(
                "two_pi",
                Item::Float(2.0 * std::f64::consts::PI),
            );
            Ok(report)
        }
        LinkCmd::Cat1(args) => {
            let link = build_from_args(cfg, &args)?;
            let cat1 = link.check_cat1(cfg.tolerance);
            let mut report = Report::new();
            report.push("vertices", Item::Int(cat1.vertex_count as i64));
            report.push("edges", Item::Int(cat1.edge_count as i64));
            report.push("metric_girth", Item::Float(cat1.metric_girth));
            report.push("satisfied", Item::Bool(cat1.satisfied));
            Ok(report)
        }
        LinkCmd::Fano { dot } => {
            let field = Field::prime(2)?;
            let w = parse_weight("1,1,1")?;
            let nu = ValuationPoint::new(TameWord::identity(3, field), &w)?;
            let group = affine_words_f2();
            let link = build_link(&nu, &group, 1, cfg.cap)?;
            Ok(link_report(&link, cfg.tolerance, dot))
        }
        LinkCmd::Octangle { p, q } => {
            let cycle = example_angles_cycle(p, q, cfg.cap)?;
            let mut report = Report::new();
            report.push("log_arcs", Item::Floats(cycle.log_arcs.to_vec()));
            report.push("log_total", Item::Float(cycle.log_total));
            report.push("simplex_arcs", Item::Floats(cycle.simplex_arcs.to_vec()));
            report.push("simplex_total", Item::Float(cycle.simplex_total));
            report.push("two_pi", Item::Float(2.0 * std::f64::consts::PI));
            report.push(
                "commutation_verified",
                Item::Bool(cycle.commutation_verified),
            );
            report.push("gluing_verified", Item::Bool(cycle.gluing_verified));
            report.push("corners_distinct", Item::Bool(cycle.corners_distinct));
            Ok(report)
        }
    }
}

// ---------------------------------------------------------------------------
// linearize / witness
// ---------------------------------------------------------------------------

fn run_linearize(cfg: &SessionConfig, args: LinearizeArgs) -> Result<Report> {
    let field = cfg.field;
    let mut generators = load_words(&args.group, cfg.vars, field)?;
    if let Some(path) = &args.conjugate_by {
        let c = load_word(path, cfg.vars, field)?;
        let c_inv = c.invert()?;
        for g in &mut generators {
            *g = c_inv.compose(g)?.compose(&c)?;
        }
    }
    let group = FiniteGroup::from_generators(&generators, GROUP_CLOSURE_LIMIT, cfg.cap)?;
    let alpha = match &args.weight {
        Some(src) => parse_weight(src)?,
        None => {
            let (_, sample) = common_fixed_region(&group, cfg.cap)?;
            sample
                .ok_or_else(|| {
                    Error::precondition(
                        "no common fixed weight found within the sampling bound; pass --weight",
                    )
                })?
                .weight()
                .clone()
        }
    };
    let result = linearize_at(&group, &alpha, cfg.cap)?;
    let mut report = Report::new();
    report.push("order", Item::Int(group.order() as i64));
    report.push("weight", Item::Str(alpha.to_string()));
    report.push("conjugator", Item::Text(result.conjugator().to_string()));
    let mut matrices = Vec::new();
    for lin in result.linearized() {
        matrices.push(render_matrix(&lin.diff_at_origin(cfg.cap)?));
    }
    report.push("linearized", Item::List(matrices));
    Ok(report)
}

fn run_witness(cfg: &SessionConfig, args: WitnessArgs) -> Result<Report> {
    witness_report(cfg, &args.word)
}
