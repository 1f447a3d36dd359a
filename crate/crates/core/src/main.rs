//! Command-line frontend: noncommutative rank, shrunk subspaces, operator
//! and matrix scaling, fractional matroid matching and rank-2 BL polytope
//! tools, plus the reproduction suite.

use clap::{Args, Parser, Subcommand};
use majscale::instance::{parse_instance, Command as Cmd, GlobalFlags};

#[derive(Parser)]
#[command(
    name = "majscale",
    version,
    about = "Noncommutative rank, smallest shrunk subspaces and rank-2 Brascamp-Lieb tools via majorized operator scaling"
)]
struct Cli {
    #[command(subcommand)]
    command: TopCmd,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// instance file (JSON)
    instance: String,
    /// accuracy parameter ε of the scaling runs
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// override the iteration budget (default: the worst-case capacity budget)
    #[arg(long)]
    max_iter: Option<usize>,
    /// RNG seed for the randomized exact algorithms
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// mantissa bits of the working precision (this build supports up to
    /// hardware doubles: 53)
    #[arg(long, default_value_t = 53)]
    precision_bits: u32,
    /// denominator bound M₁ for continued-fraction rounding
    #[arg(long, default_value_t = 1_000_000)]
    denom_bound: u64,
    /// prefer the exact randomized (Wong sequence) route where applicable
    #[arg(long, default_value_t = false)]
    exact: bool,
    /// leading constant of the capacity divergence floor
    #[arg(long, default_value_t = 16.0)]
    floor_const: f64,
    /// include wall-clock timing in the envelope (breaks byte-identical output)
    #[arg(long, default_value_t = false)]
    timing: bool,
}

#[derive(Subcommand)]
enum TopCmd {
    /// Noncommutative rank with the exact dominant independent set
    Ncrank(CommonArgs),
    /// Smallest shrunk subspace (rounding pipeline or Wong sequence)
    Shrunk {
        #[command(flatten)]
        common: CommonArgs,
        /// "round" (scaling + rounding) or "wong" (randomized exact)
        #[arg(long, default_value = "round")]
        method: String,
        /// randomized trials per blow-up level
        #[arg(long, default_value_t = 64)]
        trials: usize,
    },
    /// Majorized operator scaling at size target k
    Scale {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        k: f64,
    },
    /// Decide finiteness of the (k, r) capacity
    Decide {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        r: usize,
    },
    /// Extract an ε-independent set violating (k, r)
    Witness {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        r: usize,
    },
    /// Nonnegative matrix scaling / smallest Hall blocker
    Matscale {
        #[command(flatten)]
        common: CommonArgs,
        /// size target; without it the smallest Hall blocker is computed
        #[arg(long)]
        k: Option<f64>,
    },
    /// (1−ε)-maximum fractional linear matroid matching
    Match(CommonArgs),
    /// Exact dominant 2-cover of a line set
    Cover(CommonArgs),
    /// ε-membership of a point in the rank-2 fractional matching polytope
    BlMember {
        #[command(flatten)]
        common: CommonArgs,
        /// comma-separated coordinates of the point
        #[arg(long)]
        point: String,
    },
    /// Maximize an integer-weighted functional over P(B)
    Weighted {
        #[command(flatten)]
        common: CommonArgs,
        /// comma-separated nonnegative integer weights
        #[arg(long)]
        w: String,
    },
    /// Run the reproduction (acceptance) suite
    Repro {
        /// restrict to criteria whose id contains this substring
        #[arg(long)]
        filter: Option<String>,
    },
}

fn flags_of(c: &CommonArgs) -> GlobalFlags {
    GlobalFlags {
        eps: c.eps,
        max_iter: c.max_iter,
        seed: c.seed,
        precision_bits: c.precision_bits,
        denom_bound: c.denom_bound,
        exact: c.exact,
        floor_const: c.floor_const,
    }
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("bad number '{t}': {e}")))
        .collect()
}

fn parse_u64_list(s: &str) -> Result<Vec<u64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<u64>().map_err(|e| format!("bad integer '{t}': {e}")))
        .collect()
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            1
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<i32, String> {
    let (common, cmd) = match cli.command {
        TopCmd::Ncrank(c) => (c, Cmd::Ncrank),
        TopCmd::Shrunk { common, method, trials } => (common, Cmd::Shrunk { method, trials }),
        TopCmd::Scale { common, k } => (common, Cmd::Scale { k }),
        TopCmd::Decide { common, k, r } => (common, Cmd::Decide { k, r }),
        TopCmd::Witness { common, k, r } => (common, Cmd::Witness { k, r }),
        TopCmd::Matscale { common, k } => (common, Cmd::Matscale { k }),
        TopCmd::Match(c) => (c, Cmd::Match),
        TopCmd::Cover(c) => (c, Cmd::Cover),
        TopCmd::BlMember { common, point } => {
            let p = parse_f64_list(&point)?;
            (common, Cmd::BlMember { point: p })
        }
        TopCmd::Weighted { common, w } => {
            let w = parse_u64_list(&w)?;
            (common, Cmd::Weighted { w })
        }
        TopCmd::Repro { filter } => {
            let reports = majscale::repro::run_all(filter.as_deref());
            let mut all_ok = true;
            for r in &reports {
                println!("{} {:<24} {}", if r.passed { "PASS" } else { "FAIL" }, r.id, r.detail);
                all_ok &= r.passed;
            }
            return Ok(if all_ok { 0 } else { 1 });
        }
    };
    let started = std::time::Instant::now();
    let inst = parse_instance(&common.instance).map_err(|e| e.to_string())?;
    let flags = flags_of(&common);
    let (mut env, code) =
        majscale::instance::run_command(&cmd, &inst, &flags).map_err(|e| e.to_string())?;
    if common.timing {
        env.timing_ms = Some(started.elapsed().as_millis() as u64);
    }
    println!("{}", serde_json::to_string_pretty(&env).map_err(|e| e.to_string())?);
    Ok(code)
}
