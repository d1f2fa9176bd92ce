use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use graphsim::audit::{expand_requests, parse_checks, parse_measures};
use graphsim::{
    build_matrices, export_embedding, find_threshold, load_graph, named_graph, run_audit, AbsorptionRates,
    AuditOptions, Measure, Property, WeightedGraph, DEFAULT_TOL,
};

/// Similarity measures on weighted graphs and audits of their properties.
#[derive(Debug, Parser)]
#[command(name = "graphsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute measures and check their properties.
    Audit(AuditArgs),
    /// Bisect a parameter range for the onset of a property change.
    Threshold(ThresholdArgs),
    /// Export vertex coordinates whose squared distances match a kernel.
    Embed(EmbedArgs),
}

#[derive(Debug, Args)]
struct GraphArgs {
    /// Edge-list file, or `paper:path4` / `paper:path5`.
    #[arg(value_name = "GRAPH", conflicts_with = "graph")]
    graph_pos: Option<String>,
    #[arg(long, value_name = "GRAPH")]
    graph: Option<String>,
    /// Absorption rates, one per vertex (defaults to all ones).
    #[arg(long, value_name = "A1,A2,...", value_delimiter = ',')]
    rates: Option<Vec<f64>>,
}

impl GraphArgs {
    fn load(&self) -> Result<(String, WeightedGraph)> {
        let Some(source) = self.graph.as_ref().or(self.graph_pos.as_ref()) else {
            bail!("no graph given; pass a file or `paper:path4`");
        };
        if let Some(g) = named_graph(source) {
            return Ok((source.clone(), g));
        }
        let text = fs::read_to_string(source).with_context(|| format!("reading {source}"))?;
        let g = load_graph(&text).with_context(|| format!("parsing {source}"))?;
        Ok((source.clone(), g))
    }

    fn rates(&self, n: usize) -> Result<Option<AbsorptionRates>> {
        let Some(rates) = &self.rates else {
            return Ok(None);
        };
        if rates.len() != n {
            bail!("--rates has {} values for a graph with {n} vertices", rates.len());
        }
        Ok(Some(AbsorptionRates::new(rates.clone())?))
    }
}

#[derive(Debug, Args)]
struct AuditArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Measures as `name[:param]`; without a parameter the default grid is used.
    #[arg(long, value_name = "LIST", required = true)]
    measure: String,
    /// Comma-separated properties, or `all`.
    #[arg(long, value_name = "LIST", default_value = "all")]
    check: String,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Row sum required by the `sigma` check.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Write the JSON report here (`-` for standard output).
    #[arg(long, value_name = "OUT")]
    json: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ThresholdArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long)]
    measure: Measure,
    /// Property name, e.g. `proximity`, `metric@1,3,4`, `closer@1,3,4`.
    #[arg(long)]
    property: Property,
    /// Parameter interval as `lo,hi`.
    #[arg(long, value_name = "LO,HI", value_delimiter = ',', required = true)]
    range: Vec<f64>,
    #[arg(long, default_value_t = 1e-4)]
    resolution: f64,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Write the result as JSON here (`-` for standard output).
    #[arg(long, value_name = "OUT")]
    json: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EmbedArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Measure as `name:param`.
    #[arg(long, value_name = "NAME:PARAM")]
    measure: String,
    /// CSV output file; standard output when absent.
    #[arg(long, value_name = "OUT")]
    out: Option<PathBuf>,
}

fn write_output(path: &PathBuf, contents: &str) -> Result<()> {
    if path.as_os_str() == "-" {
        println!("{contents}");
        Ok(())
    } else {
        fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
    }
}

fn audit(args: &AuditArgs) -> Result<bool> {
    let (name, g) = args.graph.load()?;
    let gm = build_matrices(&g);
    let measures = expand_requests(&parse_measures(&args.measure)?, &gm)?;
    let checks = parse_checks(&args.check, g.n())?;
    if checks.is_empty() {
        bail!("no checks requested");
    }
    let opts = AuditOptions {
        tol: args.tol,
        sigma: args.sigma,
        rates: args.graph.rates(g.n())?,
    };
    let report = run_audit(&name, &g, &measures, &checks, &opts)?;
    match &args.json {
        Some(path) if path.as_os_str() == "-" => println!("{}", report.to_json()),
        Some(path) => {
            write_output(path, &report.to_json())?;
            print!("{}", report.render_table());
        }
        None => print!("{}", report.render_table()),
    }
    Ok(report.all_hold())
}

fn threshold(args: &ThresholdArgs) -> Result<bool> {
    let (_, g) = args.graph.load()?;
    let opts = AuditOptions {
        tol: args.tol,
        sigma: args.sigma,
        rates: args.graph.rates(g.n())?,
    };
    let &[lo, hi] = args.range.as_slice() else {
        bail!("--range takes exactly two values, `lo,hi`");
    };
    let range = (lo, hi);
    let r = find_threshold(&g, args.measure, args.property, range, args.resolution, &opts)?;
    if let Some(path) = &args.json {
        write_output(path, &serde_json::to_string_pretty(&r)?)?;
        if path.as_os_str() == "-" {
            return Ok(true);
        }
    }
    let side = match r.direction {
        graphsim::audit::Direction::HoldsBelow => "holds below, fails above",
        graphsim::audit::Direction::HoldsAbove => "fails below, holds above",
    };
    println!(
        "{} {}: onset in [{:.6}, {:.6}] ({side}; {} evaluations, single crossing assumed)",
        r.measure, r.property, r.bracket_low, r.bracket_high, r.evaluations
    );
    Ok(true)
}

fn embed(args: &EmbedArgs) -> Result<bool> {
    let (_, g) = args.graph.load()?;
    let requests = parse_measures(&args.measure)?;
    let [request] = requests.as_slice() else {
        bail!("embed takes exactly one measure");
    };
    let Some(param) = request.param else {
        bail!("embed needs a parameter, e.g. `{}:1.0`", request.measure);
    };
    let opts = AuditOptions {
        rates: args.graph.rates(g.n())?,
        ..AuditOptions::default()
    };
    let embedding = export_embedding(&g, request.measure, param, &opts)?;
    match &args.out {
        Some(path) => {
            fs::write(path, embedding.to_csv()).with_context(|| format!("writing {}", path.display()))?;
            eprintln!(
                "wrote {} points to {} (max squared-distance error {:.2e})",
                embedding.points.len(),
                path.display(),
                embedding.max_error
            );
        }
        None => print!("{}", embedding.to_csv()),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Audit(args) => audit(args),
        Command::Threshold(args) => threshold(args),
        Command::Embed(args) => embed(args),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("graphsim: {e:#}");
            ExitCode::from(2)
        }
    }
}
