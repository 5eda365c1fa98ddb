mod cmd;
mod profiles;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "kronsynth", version, about = "Depth-2 circuits for Kronecker powers, and the solvers built on them")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a partition or circuit and write it out.
    Synth(SynthArgs),
    /// Check a .rects partition or a .krc circuit.
    Verify(VerifyArgs),
    /// Tabulate per-level log2 α-volumes and their envelope.
    Curve(CurveArgs),
    /// Build a rebalancing schedule and optionally expand it.
    Rebalance(RebalanceArgs),
    /// Random covering of one weight class of the disjointness matrix.
    Cover(CoverArgs),
    /// Row and column density polynomials of a circuit.
    Density(DensityArgs),
    /// Optimal covering exponents for OR-rank and OR-size.
    Exponents,
    /// Orthogonal vectors: count, decide, or count mod m.
    Ov(OvArgs),
    /// Apply a fast transform or a circuit to a vector.
    Apply(ApplyArgs),
    /// Recompute the exponent table.
    Repro(ReproArgs),
}

#[derive(Args)]
pub struct SynthArgs {
    #[command(subcommand)]
    pub kind: SynthKind,
    /// Output path; the extension (.rects or .krc) picks the format.
    #[arg(long, global = true)]
    pub emit: Option<PathBuf>,
    /// Semiring for .krc output.
    #[arg(long, global = true, default_value = "par")]
    pub semiring: String,
    /// Directory of A_<n>_<δ>_<w>.txt code tables overriding the bundled ones.
    #[arg(long, global = true)]
    pub codes: Option<PathBuf>,
}

#[derive(Subcommand)]
pub enum SynthKind {
    /// Row/column string partition.
    Simple {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        word: String,
    },
    /// Partition with code-backed merging, e.g. RCR+C+RCR:3,3.
    Merged {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        spec: String,
    },
    /// Yates' circuit for the k-th power of a small matrix.
    Yates {
        #[arg(long)]
        matrix: String,
    },
    /// Kronecker power of a .krc circuit.
    Power {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        k: u32,
    },
}

#[derive(Args)]
pub struct VerifyArgs {
    #[arg(long, conflicts_with = "circuit")]
    pub rects: Option<PathBuf>,
    #[arg(long, requires = "matrix")]
    pub circuit: Option<PathBuf>,
    /// Target: disj:d, hadamard:d, dft:m:d, identity:n, or orcirc:<file of f values>.
    #[arg(long)]
    pub matrix: Option<String>,
    /// For .rects: exhaustive | sample:N. For .krc: exhaustive | sample:N.
    #[arg(long, default_value = "exhaustive")]
    pub mode: String,
    /// Comparison semantics for .krc: par | or | field (the target's own field).
    #[arg(long, default_value = "field")]
    pub semantics: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Args)]
pub struct CurveArgs {
    /// Comma-separated profiles: words (RCRC...), merged:SPEC, or file.krc[@level].
    #[arg(long, required = true)]
    pub profiles: Vec<String>,
    /// Grid intervals on [0, 1].
    #[arg(long, default_value_t = 100)]
    pub grid: u32,
    /// Also include each profile's transpose.
    #[arg(long)]
    pub transposes: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct RebalanceArgs {
    #[arg(long, required = true)]
    pub profiles: Vec<String>,
    #[arg(long)]
    pub n: u32,
    #[arg(long, default_value = "1")]
    pub lambda: String,
    #[arg(long, default_value = "exact")]
    pub strategy: String,
    #[arg(long)]
    pub transposes: bool,
    /// Expand the schedule into a .krc circuit (needs .krc or small word profiles).
    #[arg(long)]
    pub emit: Option<PathBuf>,
    #[arg(long)]
    pub sched: Option<PathBuf>,
}

#[derive(Args)]
pub struct CoverArgs {
    #[arg(long)]
    pub d: u32,
    /// Row weight.
    #[arg(long)]
    pub p: u32,
    /// Column weight.
    #[arg(long)]
    pub q: u32,
    /// Weight of the random sets.
    #[arg(long)]
    pub mu: u32,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// exhaustive | sample:N | skip
    #[arg(long, default_value = "exhaustive")]
    pub verify: String,
    #[arg(long)]
    pub emit: Option<PathBuf>,
}

#[derive(Args)]
pub struct DensityArgs {
    #[arg(long)]
    pub circuit: PathBuf,
    /// Base matrix dimension per level (rows and columns).
    #[arg(long, default_value_t = 2)]
    pub base: u64,
    /// Kronecker level; defaults to log_base of the circuit's row count.
    #[arg(long)]
    pub level: Option<u32>,
    /// Orbit of each base index, e.g. 0,1 (default: one orbit per index).
    #[arg(long, value_delimiter = ',')]
    pub orbit: Option<Vec<usize>>,
    /// Use C ⊗ C^T instead of C.
    #[arg(long)]
    pub symmetrize: bool,
    /// Also maximize over the simplex.
    #[arg(long)]
    pub sup: bool,
}

#[derive(Args)]
pub struct OvArgs {
    #[arg(long, group = "task")]
    pub count: bool,
    #[arg(long, group = "task")]
    pub decide: bool,
    /// Count modulo-m orthogonal pairs over Z_m.
    #[arg(long = "mod", group = "task")]
    pub modulus: Option<u32>,
    #[arg(long)]
    pub u: PathBuf,
    #[arg(long)]
    pub v: PathBuf,
    /// Base circuit replacing the default (PAR for --count, cyclotomic for --mod).
    #[arg(long)]
    pub circuit: Option<PathBuf>,
    /// Kronecker level of --circuit.
    #[arg(long, default_value_t = 2)]
    pub d0: u32,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub stats: bool,
}

#[derive(Args)]
pub struct ApplyArgs {
    /// zeta | zeta-super | mobius | mobius-super | wht | disj | stack | mf
    #[arg(long, conflicts_with = "circuit")]
    pub transform: Option<String>,
    #[arg(long)]
    pub circuit: Option<PathBuf>,
    /// Input vector: rationals separated by whitespace.
    #[arg(long)]
    pub input: PathBuf,
    /// Stack depth for `stack` and `mf`.
    #[arg(long, default_value_t = 2)]
    pub depth: u32,
    /// Table of f for `mf`, same format as --input.
    #[arg(long)]
    pub f: Option<PathBuf>,
}

#[derive(Args)]
pub struct ReproArgs {
    #[arg(long)]
    pub codes: Option<PathBuf>,
    /// Fractional digits printed.
    #[arg(long, default_value_t = 7)]
    pub digits: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Command::Synth(a) => cmd::synth(a),
        Command::Verify(a) => cmd::verify(a),
        Command::Curve(a) => cmd::curve(a),
        Command::Rebalance(a) => cmd::rebalance(a),
        Command::Cover(a) => cmd::cover(a),
        Command::Density(a) => cmd::density(a),
        Command::Exponents => cmd::exponents(),
        Command::Ov(a) => cmd::ov(a),
        Command::Apply(a) => cmd::apply(a),
        Command::Repro(a) => cmd::repro(a),
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
