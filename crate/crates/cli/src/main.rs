use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use netgec::experiments::{
    gec_sweep, parse_grid, parse_sizes, phi_sweep, region_sweep, strategy_rows, threshold_table, tradeoff_rows,
    write_csv, CsvHeader, GecSweep,
};
use netgec::gec::PairPolicy;
use netgec::lattice::build_lattice;
use netgec::{Executor, Geometry, Network};

#[derive(Parser)]
#[command(
    name = "netgec",
    version,
    about = "Entanglement distribution with global error correction on 2D networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a lattice as JSON.
    Lattice(LatticeArgs),
    /// Pair fidelity after global error correction over a p_x grid.
    GecSweep(GecArgs),
    /// Largest-cluster fractions phi and psi over a P_c grid.
    PhiSweep(PhiArgs),
    /// Fidelity map over a (P_c, p_x') grid of binary states.
    PercSweep(PercArgs),
    /// Pure-state strategies: convert, twirl, dilute and correct.
    PureSweep(PureArgs),
    /// Critical bit-flip probability from the entropic bound.
    Threshold(ThresholdArgs),
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads; 0 uses every core, 1 runs sequentially.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn executor(&self) -> Executor {
        Executor::with_workers(self.workers)
    }
}

#[derive(Args)]
struct LatticeArgs {
    #[arg(long)]
    geometry: Geometry,
    #[arg(long = "L")]
    side: usize,
    /// Edges per bond.
    #[arg(long, default_value_t = 1)]
    multiplicity: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Networks given either as generator parameters or as a JSON file.
#[derive(Args)]
struct NetworkArgs {
    /// Comma-separated geometries.
    #[arg(long, value_delimiter = ',', default_value = "square")]
    geometry: Vec<Geometry>,
    /// Lattice sides: a value, a list or start:stop:step.
    #[arg(long = "L", value_parser = sizes, default_value = "10")]
    side: Sizes,
    /// Read the network from a lattice JSON file instead.
    #[arg(long, conflicts_with_all = ["geometry", "side"])]
    lattice: Option<PathBuf>,
}

impl NetworkArgs {
    fn networks(&self) -> Result<Vec<Network>> {
        if let Some(path) = &self.lattice {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            return Ok(vec![
                Network::from_json(&text).with_context(|| format!("parsing {}", path.display()))?
            ]);
        }
        let mut nets = Vec::new();
        for &g in &self.geometry {
            for &l in &self.side.0 {
                nets.push(build_lattice(g, l)?);
            }
        }
        Ok(nets)
    }

    fn describe(&self, header: CsvHeader) -> CsvHeader {
        match &self.lattice {
            Some(path) => header.with("lattice", path.display()),
            None => header
                .with("geometry", join(&self.geometry))
                .with("L", join(&self.side.0)),
        }
    }
}

#[derive(Args)]
struct GecArgs {
    #[command(flatten)]
    network: NetworkArgs,
    #[arg(long = "Pc", value_parser = grid, default_value = "1")]
    p_c: Grid,
    #[arg(long = "px", value_parser = grid)]
    p_x: Grid,
    #[arg(long = "pz", value_parser = grid, default_value = "0")]
    p_z: Grid,
    #[arg(long, default_value = "random")]
    pair_policy: PairPolicy,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct PhiArgs {
    #[command(flatten)]
    network: NetworkArgs,
    #[arg(long = "Pc", value_parser = grid)]
    p_c: Grid,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct PercArgs {
    #[command(flatten)]
    network: NetworkArgs,
    #[arg(long = "Pc", value_parser = grid)]
    p_c: Grid,
    #[arg(long = "pxprime", value_parser = grid)]
    p_x_prime: Grid,
    #[arg(long, default_value = "random")]
    pair_policy: PairPolicy,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct PureArgs {
    #[command(flatten)]
    network: NetworkArgs,
    #[arg(long, value_parser = grid)]
    alpha: Grid,
    /// Intervals between alpha' = 1/2 and alpha' = alpha.
    #[arg(long, default_value_t = 10)]
    steps: usize,
    /// Emit only the closed-form (P_c, p_x') curves, without simulation.
    #[arg(long)]
    strategy_only: bool,
    #[arg(long, default_value = "random")]
    pair_policy: PairPolicy,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ThresholdArgs {
    #[arg(long, value_delimiter = ',', default_value = "square,triangular")]
    geometry: Vec<Geometry>,
    #[arg(long = "Pc", value_parser = grid, default_value = "0.4:1:0.05")]
    p_c: Grid,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A whole `start:stop:step` or list argument parsed as one clap value.
#[derive(Clone, Debug)]
struct Grid(Vec<f64>);

impl std::ops::Deref for Grid {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Clone, Debug)]
struct Sizes(Vec<usize>);

fn grid(s: &str) -> Result<Grid, String> {
    parse_grid(s).map(Grid).map_err(|e| e.to_string())
}

fn sizes(s: &str) -> Result<Sizes, String> {
    parse_sizes(s).map(Sizes).map_err(|e| e.to_string())
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit<T: Serialize>(out: &Option<PathBuf>, header: &CsvHeader, rows: &[T]) -> Result<()> {
    let mut w = output(out)?;
    write_csv(&mut w, header, rows)?;
    w.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Lattice(a) => {
            let net = build_lattice(a.geometry, a.side)?.with_multiplicity(a.multiplicity)?;
            let mut w = output(&a.out)?;
            writeln!(w, "{}", net.to_json())?;
            w.flush()?;
        }
        Command::GecSweep(a) => {
            let nets = a.network.networks()?;
            let sweep = GecSweep {
                networks: &nets,
                p_c: &a.p_c,
                p_x: &a.p_x,
                p_z: &a.p_z,
                policy: a.pair_policy,
                trials: a.common.trials,
                seed: a.common.seed,
            };
            let rows = gec_sweep(&sweep, a.common.executor())?;
            let header = a
                .network
                .describe(CsvHeader::new("gec-sweep", a.common.seed))
                .with("Pc", join(&a.p_c))
                .with("px", join(&a.p_x))
                .with("pz", join(&a.p_z))
                .with("pair_policy", a.pair_policy)
                .with("trials", a.common.trials);
            emit(&a.common.out, &header, &rows)?;
        }
        Command::PhiSweep(a) => {
            let nets = a.network.networks()?;
            let rows = phi_sweep(&nets, &a.p_c, a.common.trials, a.common.seed, a.common.executor());
            let header = a
                .network
                .describe(CsvHeader::new("phi-sweep", a.common.seed))
                .with("Pc", join(&a.p_c))
                .with("trials", a.common.trials);
            emit(&a.common.out, &header, &rows)?;
        }
        Command::PercSweep(a) => {
            let mut rows = Vec::new();
            for net in a.network.networks()? {
                rows.extend(region_sweep(
                    &net,
                    &a.p_c,
                    &a.p_x_prime,
                    a.pair_policy,
                    a.common.trials,
                    a.common.seed,
                    a.common.executor(),
                )?);
            }
            let header = a
                .network
                .describe(CsvHeader::new("perc-sweep", a.common.seed))
                .with("Pc", join(&a.p_c))
                .with("pxprime", join(&a.p_x_prime))
                .with("pair_policy", a.pair_policy)
                .with("trials", a.common.trials);
            emit(&a.common.out, &header, &rows)?;
        }
        Command::PureSweep(a) => {
            let header = CsvHeader::new("pure-sweep", a.common.seed)
                .with("alpha", join(&a.alpha))
                .with("steps", a.steps);
            if a.strategy_only {
                let rows = strategy_rows(&a.alpha, a.steps)?;
                emit(&a.common.out, &header.with("strategy_only", true), &rows)?;
            } else {
                let mut rows = Vec::new();
                for net in a.network.networks()? {
                    rows.extend(tradeoff_rows(
                        &net,
                        &a.alpha,
                        a.steps,
                        a.pair_policy,
                        a.common.trials,
                        a.common.seed,
                        a.common.executor(),
                    )?);
                }
                let header = a
                    .network
                    .describe(header)
                    .with("pair_policy", a.pair_policy)
                    .with("trials", a.common.trials);
                emit(&a.common.out, &header, &rows)?;
            }
        }
        Command::Threshold(a) => {
            let rows = threshold_table(&a.geometry, &a.p_c)?;
            let header = CsvHeader::new("threshold", 0)
                .with("geometry", join(&a.geometry))
                .with("Pc", join(&a.p_c));
            emit(&a.out, &header, &rows)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
