//! `lexp`: bound tables, Lebesgue constants, single-scenario
//! diagnostics, the property-suite runner, and the leading-constant
//! experiment.
//!
//! Exit codes: 0 success, 1 scientific failure (a bound or property
//! was violated), 2 usage or configuration error.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use laplace_expansions::bounds::{
    bound_chain_m2l2l, bound_chain_s2l2l, bound_chain_s2m2l, bound_gigaqbx, lebesgue_asymptotic,
    ChainGeometry, GigaqbxBoundInput,
};
use laplace_expansions::expansion::lebesgue_constant;

use lexp::experiments::{
    bound_for, build_expansions, estimate_constant, measure_error, sample_scenario, Chain,
};
use lexp::report::{
    expansion_to_json, format_g17, write_report, ReportFormat, RunConfig,
};
use lexp::verify::{run_all, Level};

#[derive(Parser)]
#[command(
    name = "lexp",
    version,
    about = "Translation-error bounds for solid-harmonic expansions of 3D Laplace potentials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the translation-chain bounds (and the composite accuracy
    /// expression) over a range of orders
    Bounds(BoundsArgs),
    /// Print Lebesgue constants of the spherical projection next to
    /// their asymptotic
    Lebesgue(LebesgueArgs),
    /// Draw one random scenario, measure its acceleration error, and
    /// compare against the bound
    Sample(SampleArgs),
    /// Estimate the leading constants over sampled geometries and
    /// write per-chain reports
    Table(TableArgs),
    /// Run the property suites
    Verify(VerifyArgs),
}

#[derive(Args)]
struct BoundsArgs {
    /// Separation distance R
    #[arg(long = "R")]
    outer: f64,
    /// Ball radius r (must satisfy r < R)
    #[arg(long = "r")]
    inner: f64,
    /// Second-stage separation R' (needs --r2; defaults to R + r' - r)
    #[arg(long = "R2")]
    outer2: Option<f64>,
    /// Second-stage radius r', enables the three-stage chain column
    #[arg(long = "r2")]
    inner2: Option<f64>,
    /// Target confinement factor, in [0, 2*sqrt(3) - 2)
    #[arg(long = "tf", default_value_t = 0.0)]
    tf: f64,
    /// Order range `a..b` (inclusive) or a single order
    #[arg(long, default_value = "3..10", value_parser = parse_order_range)]
    p: OrderRange,
    /// Output format: table or csv
    #[arg(long, default_value = "table")]
    format: OutputFormat,
}

#[derive(Args)]
struct LebesgueArgs {
    /// Comma-separated projection orders
    #[arg(long, default_value = "0,1,2,5,10,20", value_parser = parse_order_list)]
    p: OrderList,
    /// Minimum number of quadrature panels
    #[arg(long, default_value_t = 64)]
    panels: u32,
    /// Output format: table or csv
    #[arg(long, default_value = "table")]
    format: OutputFormat,
}

#[derive(Args)]
struct SampleArgs {
    /// Translation chain: S2L2L, S2M2L, or M2L2L
    #[arg(long)]
    chain: String,
    /// Intermediate order p
    #[arg(long, default_value_t = 5)]
    p: u32,
    /// Final order q
    #[arg(long, default_value_t = 5)]
    q: u32,
    /// Scenario seed
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Geometry scale factor
    #[arg(long = "size-scale", default_value_t = 1.0)]
    size_scale: f64,
    /// Write the reference and chain expansions as JSON to this path
    #[arg(long)]
    dump: Option<PathBuf>,
    /// Output format: table or csv
    #[arg(long, default_value = "table")]
    format: OutputFormat,
}

#[derive(Args)]
struct TableArgs {
    /// JSON config file (flags below override its fields)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated chains to run
    #[arg(long, value_parser = parse_chain_list)]
    chains: Option<ChainList>,
    /// Comma-separated order set
    #[arg(long, value_parser = parse_order_list)]
    orders: Option<OrderList>,
    /// Use the full published order grid {3, 5, 10, 15, 20}
    #[arg(long = "full-grid", conflicts_with = "orders")]
    full_grid: bool,
    /// Samples per (p, q) cell
    #[arg(long)]
    samples: Option<u32>,
    /// Run seed (all randomness derives from it)
    #[arg(long)]
    seed: Option<u64>,
    /// Geometry scale factor
    #[arg(long = "size-scale")]
    size_scale: Option<f64>,
    /// Report output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format: csv or json
    #[arg(long)]
    format: Option<ReportFormat>,
}

#[derive(Args)]
struct VerifyArgs {
    /// quick or full
    #[arg(long, default_value = "quick")]
    level: Level,
    /// Suite seed
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum OutputFormat {
    Table,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "table" => Ok(OutputFormat::Table),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(anyhow!("unknown format '{other}' (expected table or csv)")),
        }
    }
}

#[derive(Clone, Debug)]
struct OrderRange(Vec<u32>);

fn parse_order_range(s: &str) -> Result<OrderRange> {
    let parse_end = |t: &str| -> Result<u32> {
        t.trim()
            .parse::<u32>()
            .map_err(|_| anyhow!("invalid order '{t}' in range '{s}'"))
    };
    if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (parse_end(a)?, parse_end(b)?);
        if a > b {
            bail!("empty order range '{s}'");
        }
        Ok(OrderRange((a..=b).collect()))
    } else {
        let v = parse_end(s)?;
        Ok(OrderRange(vec![v]))
    }
}

#[derive(Clone, Debug)]
struct OrderList(Vec<u32>);

fn parse_order_list(s: &str) -> Result<OrderList> {
    let mut orders = Vec::new();
    for part in s.split(',') {
        orders.push(
            part.trim()
                .parse::<u32>()
                .map_err(|_| anyhow!("invalid order '{part}' in list '{s}'"))?,
        );
    }
    if orders.is_empty() {
        bail!("empty order list");
    }
    Ok(OrderList(orders))
}

#[derive(Clone, Debug)]
struct ChainList(Vec<Chain>);

fn parse_chain_list(s: &str) -> Result<ChainList> {
    let mut chains = Vec::new();
    for part in s.split(',') {
        chains.push(Chain::from_str(part.trim())?);
    }
    Ok(ChainList(chains))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bounds(args) => cmd_bounds(args),
        Command::Lebesgue(args) => cmd_lebesgue(args),
        Command::Sample(args) => cmd_sample(args),
        Command::Table(args) => cmd_table(args),
        Command::Verify(args) => cmd_verify(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn cmd_bounds(args: BoundsArgs) -> Result<ExitCode> {
    let geometry = match (args.outer2, args.inner2) {
        (None, None) => ChainGeometry::single(args.outer, args.inner),
        (None, Some(r2)) => ChainGeometry::two_stage(args.outer, args.inner, r2),
        (Some(r2_outer), Some(r2_inner)) => {
            ChainGeometry::two_stage_explicit(args.outer, args.inner, r2_outer, r2_inner)
        }
        (Some(_), None) => bail!("--R2 requires --r2"),
    }
    .map_err(|e| anyhow!("invalid geometry: {e}"))?;
    let has_second = geometry.second_stage().is_some();
    // validate the confinement factor before any computation
    GigaqbxBoundInput::new(0, args.tf).map_err(|e| anyhow!("invalid --tf: {e}"))?;

    let mut header = vec!["p", "s2l2l", "s2m2l"];
    if has_second {
        header.push("m2l2l");
    }
    header.push("gigaqbx");
    emit_header(args.format, &header);
    for &p in &args.p.0 {
        let mut row = vec![p.to_string()];
        row.push(format_value(args.format, bound_chain_s2l2l(&geometry, p)));
        row.push(format_value(args.format, bound_chain_s2m2l(&geometry, p)));
        if has_second {
            row.push(format_value(
                args.format,
                bound_chain_m2l2l(&geometry, p).expect("second stage present"),
            ));
        }
        let giga = GigaqbxBoundInput::new(p, args.tf).expect("validated above");
        row.push(format_value(args.format, bound_gigaqbx(&giga)));
        emit_row(args.format, &row);
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_lebesgue(args: LebesgueArgs) -> Result<ExitCode> {
    if args.panels < 64 {
        bail!("--panels must be at least 64");
    }
    emit_header(args.format, &["p", "lambda", "asymptotic"]);
    for &p in &args.p.0 {
        let row = vec![
            p.to_string(),
            format_value(args.format, lebesgue_constant(p, args.panels)),
            format_value(args.format, lebesgue_asymptotic(p)),
        ];
        emit_row(args.format, &row);
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_sample(args: SampleArgs) -> Result<ExitCode> {
    let chain = Chain::from_str(&args.chain)?;
    if !args.size_scale.is_finite() || args.size_scale <= 0.0 {
        bail!("--size-scale must be positive and finite");
    }
    let mut sample = sample_scenario(chain, args.seed, args.size_scale)
        .map_err(|e| anyhow!("sampling failed: {e}"))?;
    sample.orders = (args.p, args.q);

    let (error, bound, ratio) = match measure_error(&sample, args.p, args.q) {
        Ok(error) => {
            let bound = bound_for(&sample, args.p);
            (error, bound, error / bound)
        }
        Err(e) => {
            eprintln!("measurement failed: {e:#}");
            return Ok(ExitCode::from(1));
        }
    };

    if let Some(path) = &args.dump {
        let (reference, chain_exp) = build_expansions(&sample, args.p, args.q)?;
        let payload = serde_json::json!({
            "chain": sample.chain.name(),
            "seed": sample.seed,
            "p": args.p,
            "q": args.q,
            "error": error,
            "bound": bound,
            "ratio": ratio,
            "reference": expansion_to_json(&reference),
            "approximation": expansion_to_json(&chain_exp),
        });
        std::fs::write(path, format!("{:#}\n", payload))
            .with_context(|| format!("cannot write {}", path.display()))?;
    }

    let (r2_outer, r2_inner) = sample
        .geometry
        .second_stage()
        .map_or((f64::NAN, f64::NAN), |(a, b)| (a, b));
    match args.format {
        OutputFormat::Csv => {
            println!("chain,seed,p,q,R,r,R2,r2,source_norm,center_norm,error,bound,ratio");
            println!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                sample.chain,
                sample.seed,
                args.p,
                args.q,
                format_g17(sample.geometry.outer()),
                format_g17(sample.geometry.inner()),
                if r2_outer.is_nan() { String::new() } else { format_g17(r2_outer) },
                if r2_inner.is_nan() { String::new() } else { format_g17(r2_inner) },
                format_g17(sample.source.norm()),
                format_g17(sample.center.norm()),
                format_g17(error),
                format_g17(bound),
                format_g17(ratio),
            );
        }
        OutputFormat::Table => {
            println!("chain       : {}", sample.chain);
            println!("seed        : {}", sample.seed);
            println!("orders      : p={}, q={}", args.p, args.q);
            println!("R, r        : {:.6}, {:.6}", sample.geometry.outer(), sample.geometry.inner());
            if let Some((a, b)) = sample.geometry.second_stage() {
                println!("R', r'      : {a:.6}, {b:.6}");
            }
            println!("|source|    : {:.6}", sample.source.norm());
            println!("|center|    : {:.6}", sample.center.norm());
            if let Some(c2) = sample.center2 {
                println!("|center2|   : {:.6}", c2.norm());
            }
            println!("targets     : {}", sample.targets.len());
            println!("error       : {}", format_g17(error));
            println!("bound       : {}", format_g17(bound));
            println!("ratio       : {}", format_g17(ratio));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_table(args: TableArgs) -> Result<ExitCode> {
    let mut config = match &args.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(chains) = args.chains {
        config.chains = chains.0;
    }
    if args.full_grid {
        config.orders = vec![3, 5, 10, 15, 20];
    }
    if let Some(orders) = args.orders {
        config.orders = orders.0;
    }
    if let Some(samples) = args.samples {
        config.samples_per_cell = samples;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(scale) = args.size_scale {
        config.size_scale = scale;
    }
    if let Some(out) = args.out {
        config.output_path = Some(out.display().to_string());
    }
    if let Some(format) = args.format {
        config.format = format;
    }
    config.validate()?;

    let mut chains = config.chains.clone();
    chains.sort_unstable();
    chains.dedup();
    let out_dir = PathBuf::from(config.output_path.clone().unwrap_or_else(|| "reports".into()));

    let mut all_ok = true;
    for chain in chains {
        let report = match estimate_constant(
            chain,
            &config.orders,
            config.samples_per_cell,
            config.seed,
            config.size_scale,
        ) {
            Ok(report) => report,
            Err(e) => {
                eprintln!("{chain}: estimation failed: {e:#}");
                return Ok(ExitCode::from(1));
            }
        };
        let discarded: u32 = report.cells.iter().map(|c| c.discarded).sum();
        println!(
            "{} max_ratio={} mean_ratio={} cells={} samples_per_cell={} discarded={} seed={}",
            chain,
            format_g17(report.max_ratio),
            format_g17(report.mean_ratio),
            report.cells.len(),
            report.samples_per_cell,
            discarded,
            report.seed
        );
        if report.max_ratio > 1.02 {
            all_ok = false;
            eprintln!(
                "{chain}: bound violated beyond slack (max_ratio {})",
                format_g17(report.max_ratio)
            );
        }
        let path = out_dir.join(format!(
            "{}.{}",
            chain.name().to_ascii_lowercase(),
            config.format.extension()
        ));
        write_report(&report, &path, config.format)?;
        println!("wrote {}", path.display());
    }
    Ok(if all_ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    let outcomes = run_all(args.level, args.seed);
    let mut failed = 0usize;
    for outcome in &outcomes {
        match &outcome.error {
            None => println!("PASS {} ({} cases)", outcome.name, outcome.cases),
            Some(detail) => {
                failed += 1;
                println!("FAIL {}: {detail}", outcome.name);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} of {} properties failed", outcomes.len());
        return Ok(ExitCode::from(1));
    }
    println!("all {} properties passed", outcomes.len());
    Ok(ExitCode::SUCCESS)
}

fn format_value(format: OutputFormat, v: f64) -> String {
    match format {
        OutputFormat::Csv => format_g17(v),
        OutputFormat::Table => format!("{v:.8e}"),
    }
}

fn emit_header(format: OutputFormat, fields: &[&str]) {
    match format {
        OutputFormat::Csv => println!("{}", fields.join(",")),
        OutputFormat::Table => {
            let row: Vec<String> = fields.iter().map(|f| format!("{f:>16}")).collect();
            println!("{}", row.join(" "));
        }
    }
}

fn emit_row(format: OutputFormat, fields: &[String]) {
    match format {
        OutputFormat::Csv => println!("{}", fields.join(",")),
        OutputFormat::Table => {
            let row: Vec<String> = fields.iter().map(|f| format!("{f:>16}")).collect();
            println!("{}", row.join(" "));
        }
    }
}
