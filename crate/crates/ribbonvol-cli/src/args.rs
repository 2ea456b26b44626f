use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ribbonvol::scalar::{parse_rational, ratio_to_f64};
use ribbonvol::Rational;

#[derive(Debug, Parser)]
#[command(name = "ribbonvol", version, about = "Volumes and integrability thresholds on combinatorial moduli spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Shorthand for `--format json`.
    #[arg(long, global = true, conflicts_with = "format")]
    pub json: bool,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub workers: Option<u16>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List ribbon graphs of a type.
    Enumerate(EnumerateArgs),
    /// Triangulated cones of multicurve vectors of a trivalent graph.
    Cones(GraphArgs),
    /// Exact unit-ball volume at an edge metric.
    Bvol(BvolArgs),
    /// Vertices of a cell at given boundary lengths.
    Cells(CellsArgs),
    /// Computed and tabulated integrability threshold.
    Thresholds(ThresholdArgs),
    /// Monte Carlo integral of a power of the volume over moduli.
    Integrate(IntegrateArgs),
    /// Sum of a power of the volume over integer metrics.
    Lattice(LatticeArgs),
    /// Grid of computed thresholds against the closed form.
    Table(TableArgs),
}

#[derive(Debug, Args)]
pub struct TypeArgs {
    /// Genus of the surface.
    #[arg(short = 'g', long)]
    pub genus: usize,
    /// Number of boundary components (faces).
    #[arg(short = 'n', long)]
    pub boundaries: usize,
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    #[command(flatten)]
    pub kind: TypeArgs,
    /// All valencies at least three instead of trivalent only.
    #[arg(long)]
    pub reduced: bool,
    /// One graph per class up to face relabelling.
    #[arg(long)]
    pub unlabelled: bool,
}

/// Selects one graph from a file or from an enumeration.
#[derive(Debug, Args)]
pub struct GraphArgs {
    /// `FILE#k`: graph `k` of a JSON file holding one graph or a list.
    #[arg(long, conflicts_with_all = ["gn", "genus"])]
    pub graph: Option<String>,
    /// Type as `g,n`.
    #[arg(long, value_parser = parse_type, conflicts_with = "genus")]
    pub gn: Option<(usize, usize)>,
    /// Genus, together with `-n`.
    #[arg(short = 'g', long, requires = "boundaries")]
    pub genus: Option<usize>,
    /// Boundary count, together with `-g`.
    #[arg(short = 'n', long, requires = "genus")]
    pub boundaries: Option<usize>,
    /// Position among the enumerated candidates.
    #[arg(long, default_value_t = 0)]
    pub index: usize,
}

#[derive(Debug, Args)]
pub struct BvolArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Edge lengths.
    #[arg(long, required = true, value_delimiter = ',', value_parser = parse_length)]
    pub lengths: Vec<Rational>,
}

#[derive(Debug, Args)]
pub struct CellsArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Boundary lengths in face-label order.
    #[arg(long, required = true, value_delimiter = ',', value_parser = parse_length)]
    pub lengths: Vec<Rational>,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[command(flatten)]
    pub kind: TypeArgs,
    /// Boundary lengths; switches to the fixed-length computation.
    #[arg(long, value_delimiter = ',', value_parser = parse_length)]
    pub lengths: Option<Vec<Rational>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SamplingArg {
    Stratified,
    Uniform,
    Box,
}

#[derive(Debug, Args)]
pub struct IntegrateArgs {
    #[command(flatten)]
    pub kind: TypeArgs,
    #[arg(long, required = true, value_delimiter = ',', value_parser = parse_length)]
    pub lengths: Vec<Rational>,
    /// Exponent `s`, decimal or `p/q`.
    #[arg(long, default_value = "1", value_parser = parse_power)]
    pub power: f64,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = SamplingArg::Stratified)]
    pub sampling: SamplingArg,
}

#[derive(Debug, Args)]
pub struct LatticeArgs {
    #[command(flatten)]
    pub kind: TypeArgs,
    /// Boundary lengths; non-integral or odd-total input gives the empty sum.
    #[arg(long, required = true, value_delimiter = ',', value_parser = parse_length)]
    pub lengths: Vec<Rational>,
    #[arg(long, default_value = "1", value_parser = parse_power)]
    pub power: f64,
    /// Require exact rational arithmetic (integral powers only).
    #[arg(long, conflicts_with = "float")]
    pub exact: bool,
    /// Force compensated double precision.
    #[arg(long)]
    pub float: bool,
    /// Drop graphs with a vertex of valency above three.
    #[arg(long)]
    pub trivalent_only: bool,
    /// Include the per-graph contributions.
    #[arg(long)]
    pub breakdown: bool,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long, default_value_t = 2)]
    pub max_genus: usize,
    #[arg(long, default_value_t = 5)]
    pub max_boundaries: usize,
    /// Types whose trivalent graphs have more edges report only the closed form.
    #[arg(long, default_value_t = 15)]
    pub max_edges: usize,
}

fn parse_length(text: &str) -> Result<Rational, String> {
    let q = parse_rational(text.trim()).map_err(|e| e.to_string())?;
    if q <= Rational::from_integer(0.into()) {
        return Err(format!("length `{text}` must be positive"));
    }
    Ok(q)
}

fn parse_power(text: &str) -> Result<f64, String> {
    let q = parse_rational(text.trim()).map_err(|e| e.to_string())?;
    Ok(ratio_to_f64(&q))
}

fn parse_type(text: &str) -> Result<(usize, usize), String> {
    let (g, n) = text.split_once(',').ok_or_else(|| format!("expected `g,n`, got `{text}`"))?;
    let g = g.trim().parse().map_err(|_| format!("bad genus `{g}`"))?;
    let n = n.trim().parse().map_err(|_| format!("bad boundary count `{n}`"))?;
    Ok((g, n))
}
