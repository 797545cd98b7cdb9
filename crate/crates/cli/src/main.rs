use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ghtree::families::{comb_tree, star_tree};
use ghtree::gh::{
    eccentricity_correspondence, gh_exact_with_witness, gh_lower_bound, gh_tree_interval, gh_upper_bound,
    DEFAULT_CAP,
};
use ghtree::io::{fmt_num, matrix_from_csv, matrix_to_csv, round_json, Metadata, TreeDocument};
use ghtree::lab::{
    build_f, continuity_scan, grid_neighbors, injectivity_scan, replacement_path, scalar_fields, ConfigFile,
    EmbedConfig,
};
use ghtree::tree::wedge_sum;
use ghtree::{CombParams, Error, FiniteMetricSpace, MetricTree, ReplacementEntry, ReplacementPlan, StarParams};

#[derive(Parser)]
#[command(name = "ghtree", version, about = "Metric trees and Gromov-Hausdorff distances")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Numerical tolerance for validation.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Sampling resolution; overrides the command default.
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Recorded in emitted metadata.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Build and check trees.
    #[command(subcommand)]
    Tree(TreeCmd),
    /// Gromov-Hausdorff distances.
    #[command(subcommand)]
    Gh(GhCmd),
    /// Grid embedding experiments.
    #[command(subcommand)]
    Lab(LabCmd),
}

#[derive(Subcommand)]
enum TreeCmd {
    /// Validate a tree document (or a CSV distance matrix).
    Validate { input: PathBuf },
    /// Comb tree with parameter s.
    Comb {
        #[arg(long)]
        s: f64,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, default_value_t = 12)]
        depth: u32,
    },
    /// Star tree with branch coefficients a_1..a_N.
    Star {
        #[arg(long, value_delimiter = ',', required = true)]
        a: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        k: f64,
    },
    /// Wedge sum of trees given as PATH or PATH@ID (basepoint vertex id).
    Wedge {
        #[arg(required = true)]
        parts: Vec<String>,
    },
    /// Replace geodesics of a host tree: each entry is A,B,PATH,ALPHA,BETA
    /// (host ids, replacement tree, its glue ids).
    Replace {
        host: PathBuf,
        #[arg(long = "entry", required = true)]
        entries: Vec<String>,
    },
    /// Subdivide every edge to length at most --eps.
    Subdivide { input: PathBuf },
}

#[derive(Subcommand)]
enum GhCmd {
    /// Exact distance between two small spaces.
    Exact {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Cheap lower and upper bounds.
    Bounds { a: PathBuf, b: PathBuf },
    /// Interval for the distance between two tree continua.
    Trees {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
}

#[derive(Subcommand)]
enum LabCmd {
    /// Build F(u, k) for one grid point.
    Embed {
        #[arg(long)]
        config: PathBuf,
        /// Index of the point in the parameter space.
        #[arg(long)]
        u: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
    },
    /// Compare neighbouring grid points against the analytic bound.
    ScanContinuity {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 1)]
        k: usize,
    },
    /// Fingerprint every free grid point and branch.
    ScanInjectivity {
        #[arg(long)]
        config: PathBuf,
    },
    /// Comb-replacement path of a tree.
    Path {
        input: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        s_grid: Vec<f64>,
    },
}

enum Output {
    Text(String),
    Json(Value),
    Tree(MetricTree, Metadata),
    Table { columns: Vec<&'static str>, rows: Vec<Vec<f64>>, extra: Value },
}

enum Failure {
    Usage(String),
    Invalid(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

type CliResult<T> = Result<T, Failure>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_tree(path: &Path) -> CliResult<MetricTree> {
    Ok(TreeDocument::parse(&read(path)?)?.to_tree()?)
}

fn load_space(path: &Path) -> CliResult<FiniteMetricSpace> {
    let text = read(path)?;
    if path.extension().is_some_and(|e| e == "csv") {
        Ok(matrix_from_csv(&text)?)
    } else {
        Ok(TreeDocument::parse(&text)?.to_tree()?.metric().clone())
    }
}

fn load_config(path: &Path, g: &Global) -> CliResult<EmbedConfig> {
    let mut cfg = ConfigFile::parse(&read(path)?)?.into_config()?;
    if let Some(eps) = g.eps {
        cfg.eps = eps;
    }
    cfg.tol = g.tol;
    Ok(cfg)
}

fn meta(g: &Global, pairs: Value) -> Metadata {
    let mut m: Metadata = serde_json::from_value(pairs).expect("metadata is an object");
    if let Some(seed) = g.seed {
        m.insert("seed".into(), json!(seed));
    }
    m
}

fn parse_id(s: &str) -> CliResult<u64> {
    s.trim().parse().map_err(|_| Failure::Usage(format!("bad vertex id {s:?}")))
}

fn index(tree: &MetricTree, id: u64) -> CliResult<usize> {
    tree.index_of(id).ok_or(Failure::Invalid(Error::UnknownVertex(id).to_string()))
}

fn tree_cmd(cmd: TreeCmd, g: &Global) -> CliResult<Output> {
    Ok(match cmd {
        TreeCmd::Validate { input } => {
            let text = read(&input)?;
            let space = if input.extension().is_some_and(|e| e == "csv") {
                matrix_from_csv(&text)?
            } else {
                match TreeDocument::parse(&text)?.to_tree() {
                    Ok(t) => t.metric().clone(),
                    Err(e) => {
                        let witness = match &e {
                            Error::Cycle { a, b } => json!({"cycle_edge": [a, b]}),
                            Error::Disconnected(v) => json!({"unreachable": v}),
                            _ => Value::Null,
                        };
                        println!("{}", json!({"ok": false, "error": e.to_string(), "witness": witness}));
                        return Err(Failure::Invalid(e.to_string()));
                    }
                }
            };
            let report = space.validate(g.tol);
            let ok = report.ok;
            let value = json!({
                "ok": ok,
                "points": space.len(),
                "worst_violation": report.worst_violation,
                "kind": report.kind.map(|k| format!("{k:?}")),
                "witness": report.witness,
                "four_point_defect": space.four_point_defect(),
            });
            if !ok {
                println!("{value}");
                return Err(Failure::Invalid("not a valid metric".into()));
            }
            Output::Json(value)
        }
        TreeCmd::Comb { s, scale, depth } => {
            let p = CombParams::new(s, scale, depth)?;
            let m = meta(g, json!({
                "generator": "comb", "s": s, "scale": scale, "depth_cap": depth,
                "truncation_error": p.truncation_error(),
            }));
            Output::Tree(comb_tree(&p), m)
        }
        TreeCmd::Star { a, k } => {
            let eps = g.eps.unwrap_or(f64::INFINITY);
            let p = StarParams::new(a.clone(), k, eps)?;
            Output::Tree(star_tree(&p), meta(g, json!({"generator": "star", "a": a, "k": k, "eps": g.eps})))
        }
        TreeCmd::Wedge { parts } => {
            let mut trees = Vec::with_capacity(parts.len());
            for part in &parts {
                let (path, id) = match part.rsplit_once('@') {
                    Some((p, id)) => (p, Some(parse_id(id)?)),
                    None => (part.as_str(), None),
                };
                let t = load_tree(Path::new(path))?;
                let base = match id {
                    Some(id) => index(&t, id)?,
                    None => 0,
                };
                trees.push((t, base));
            }
            let refs: Vec<(&MetricTree, usize)> = trees.iter().map(|(t, p)| (t, *p)).collect();
            Output::Tree(wedge_sum(&refs)?, meta(g, json!({"generator": "wedge", "parts": parts})))
        }
        TreeCmd::Replace { host, entries } => {
            let host_tree = load_tree(&host)?;
            let mut plan = Vec::with_capacity(entries.len());
            for e in &entries {
                let f: Vec<&str> = e.split(',').collect();
                let [a, b, path, alpha, beta] = f[..] else {
                    return Err(Failure::Usage(format!("entry {e:?} is not A,B,PATH,ALPHA,BETA")));
                };
                let tree = load_tree(Path::new(path))?;
                plan.push(ReplacementEntry {
                    a: index(&host_tree, parse_id(a)?)?,
                    b: index(&host_tree, parse_id(b)?)?,
                    alpha: index(&tree, parse_id(alpha)?)?,
                    beta: index(&tree, parse_id(beta)?)?,
                    tree,
                });
            }
            let mut plan = ReplacementPlan::new(plan);
            plan.tol = g.tol;
            Output::Tree(host_tree.replace_edges(&plan)?, meta(g, json!({"generator": "replace"})))
        }
        TreeCmd::Subdivide { input } => {
            let eps = g.eps.ok_or_else(|| Failure::Usage("subdivide needs --eps".into()))?;
            let t = load_tree(&input)?.subdivide(eps)?;
            Output::Tree(t, meta(g, json!({"generator": "subdivide", "eps": eps})))
        }
    })
}

fn gh_cmd(cmd: GhCmd, g: &Global) -> CliResult<Output> {
    Ok(match cmd {
        GhCmd::Exact { a, b, cap } => {
            let (x, y) = (load_space(&a)?, load_space(&b)?);
            let (value, witness) = gh_exact_with_witness(&x, &y, cap)?;
            match g.format {
                Format::Json if g.out.is_some() => Output::Json(json!({"value": value, "witness": witness.pairs})),
                _ => Output::Text(fmt_num(value)),
            }
        }
        GhCmd::Bounds { a, b } => {
            let (x, y) = (load_space(&a)?, load_space(&b)?);
            let r = eccentricity_correspondence(&x, &y);
            Output::Json(json!({
                "lower": gh_lower_bound(&x, &y),
                "upper": gh_upper_bound(&x, &y, &r)?,
                "witness": r.pairs,
            }))
        }
        GhCmd::Trees { a, b, cap } => {
            let eps = g.eps.unwrap_or(0.1);
            let iv = gh_tree_interval(&load_tree(&a)?, &load_tree(&b)?, eps, cap)?;
            Output::Json(json!({
                "lo": iv.lo, "hi": iv.hi, "eps": iv.eps, "exact": iv.exact,
                "lo_witness": iv.lo_witness, "hi_witness": iv.hi_witness,
            }))
        }
    })
}

fn lab_cmd(cmd: LabCmd, g: &Global) -> CliResult<Output> {
    Ok(match cmd {
        LabCmd::Embed { config, u, k } => {
            let cfg = load_config(&config, g)?;
            let fields = scalar_fields(&cfg, u)?;
            let t = build_f(&cfg, u, k)?;
            let m = meta(g, json!({
                "generator": "embed", "u": u, "k": k, "coords": cfg.coords[u],
                "phi": fields.phi, "xi": fields.xi,
                "sigma": fields.sigma.iter().map(|s| if s.is_finite() { json!(s) } else { json!("inf") }).collect::<Vec<_>>(),
            }));
            Output::Tree(t, m)
        }
        LabCmd::ScanContinuity { config, k } => {
            let cfg = load_config(&config, g)?;
            let rows = continuity_scan(&cfg, &grid_neighbors(&cfg), k)?;
            let failures = rows.iter().filter(|r| !r.ok).count();
            Output::Table {
                columns: vec!["u1", "u2", "k", "bound", "hi", "margin"],
                rows: rows.iter().map(|r| vec![r.u1, r.u2, r.k as f64, r.bound, r.hi, r.margin]).collect(),
                extra: json!({"failures": failures, "rows": rows}),
            }
        }
        LabCmd::ScanInjectivity { config } => {
            let cfg = load_config(&config, g)?;
            let cells: Vec<(usize, usize)> =
                cfg.free_points().into_iter().flat_map(|u| (1..=cfg.m).map(move |k| (u, k))).collect();
            let rep = injectivity_scan(&cfg, &cells)?;
            Output::Table {
                columns: vec!["u1", "u2", "k", "xi", "margin", "rho_error"],
                rows: rep.rows.iter().map(|r| vec![r.u1, r.u2, r.k as f64, r.xi, r.margin, r.rho_error]).collect(),
                extra: serde_json::to_value(&rep).expect("report serializes"),
            }
        }
        LabCmd::Path { input, s_grid } => {
            let eps = g.eps.unwrap_or(0.1);
            let steps = replacement_path(&load_tree(&input)?, &s_grid, eps)?;
            let nan = f64::NAN;
            Output::Table {
                columns: vec!["s", "vertices", "hi", "bound"],
                rows: steps
                    .iter()
                    .map(|p| vec![p.s, p.tree.len() as f64, p.hi.unwrap_or(nan), p.bound.unwrap_or(nan)])
                    .collect(),
                extra: json!({
                    "steps": steps.iter().map(|p| json!({
                        "s": p.s, "vertices": p.tree.len(), "hi": p.hi, "bound": p.bound,
                    })).collect::<Vec<_>>(),
                }),
            }
        }
    })
}

fn csv_table(columns: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = columns.join(",");
    out.push('\n');
    for r in rows {
        let cells: Vec<String> = r.iter().map(|&x| if x.is_nan() { String::new() } else { fmt_num(x) }).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn render(output: Output, format: Format) -> String {
    let pretty = |mut v: Value| {
        round_json(&mut v);
        serde_json::to_string_pretty(&v).expect("json") + "\n"
    };
    match (output, format) {
        (Output::Text(s), _) => s + "\n",
        (Output::Json(v), _) => pretty(v),
        (Output::Tree(t, m), Format::Json) => TreeDocument::from_tree(&t, m).to_json() + "\n",
        (Output::Tree(t, _), Format::Csv) => matrix_to_csv(t.metric()),
        (Output::Table { extra, .. }, Format::Json) => pretty(extra),
        (Output::Table { columns, rows, .. }, Format::Csv) => csv_table(&columns, &rows),
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let g = &cli.global;
    let output = match cli.command {
        Command::Tree(c) => tree_cmd(c, g)?,
        Command::Gh(c) => gh_cmd(c, g)?,
        Command::Lab(c) => lab_cmd(c, g)?,
    };
    let text = render(output, g.format);
    match &g.out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Invalid(msg)) => {
            eprintln!("invalid: {msg}");
            ExitCode::from(2)
        }
    }
}
