mod commands;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Result;
use clap::{Parser, Subcommand};

use hyperdescent::descent::{DescentError, RoundtripConfig};
use hyperdescent::homotopy::HomotopyError;
use hyperdescent::hypercover::HypercoverError;
use hyperdescent::io::FormatError;
use hyperdescent::topology::TopologyError;

use report::{Format, Report, RunConfig};

#[derive(Parser)]
#[command(name = "hyperdescent", version, about = "Checks hypercovers and descent on finite spaces")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Truncation dimension.
    #[arg(long, global = true)]
    trunc: Option<usize>,
    /// Largest value size for enumerated presheaves.
    #[arg(long, global = true)]
    cap: Option<usize>,
    /// Number of sampled basis presheaves (0 enumerates all).
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Subcommand)]
enum Cmd {
    /// Validate the topology and the basis of a space file.
    CheckTopology { space: PathBuf },
    /// Print the minimal basis, optionally writing it into a space file.
    MinimalBasis {
        space: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Build the Čech hypercover of a cover, e.g. `--cover a,b,c --cover a,b,d`.
    Cech {
        space: PathBuf,
        #[arg(long, required = true)]
        cover: Vec<String>,
        /// Open to cover; the whole space by default.
        #[arg(long)]
        target: Option<String>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check the covering condition of a hypercover file.
    CheckHypercover { hypercover: PathBuf },
    /// Refine a hypercover to the basis of its space.
    Refine {
        hypercover: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Sheaf condition of a basis presheaf.
    CheckSheaf { space: PathBuf, presheaf: PathBuf },
    /// Hyperdescent of a basis presheaf along the generated suite.
    CheckHypersheaf { space: PathBuf, presheaf: PathBuf },
    /// Right Kan extension of a basis presheaf to all opens.
    KanExtend {
        space: PathBuf,
        presheaf: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Restriction and extension round trips over enumerated presheaves.
    Roundtrip {
        space: PathBuf,
        /// Presheaf asserted to be a basis hypersheaf; repeatable.
        #[arg(long)]
        presheaf: Vec<PathBuf>,
    },
    /// Coinitiality of a poset map via its comma posets.
    Coinitial {
        map: PathBuf,
        #[arg(long, default_value_t = 3)]
        degree: usize,
    },
    /// Slice verdicts for the unit of symmetrization. The complex is a file
    /// or `simplex:N` / `boundary:N`.
    SymCoinitial {
        complex: String,
        #[arg(long, default_value_t = 2)]
        levels: usize,
        #[arg(long, default_value_t = 2)]
        degree: usize,
    },
    /// Coinitial map whose induced slice map is not coinitial.
    Counterexample {
        #[arg(long)]
        fixture: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        degree: usize,
    },
}

fn path(p: &std::path::Path) -> String {
    p.display().to_string()
}

impl Cli {
    fn config(&self) -> RunConfig {
        let (command, inputs): (&str, Vec<String>) = match &self.command {
            Cmd::CheckTopology { space } => ("check-topology", vec![path(space)]),
            Cmd::MinimalBasis { space, .. } => ("minimal-basis", vec![path(space)]),
            Cmd::Cech { space, cover, target, .. } => {
                let mut inputs = vec![path(space)];
                inputs.extend(cover.iter().map(|c| format!("cover={c}")));
                inputs.extend(target.iter().map(|t| format!("target={t}")));
                ("cech", inputs)
            }
            Cmd::CheckHypercover { hypercover } => ("check-hypercover", vec![path(hypercover)]),
            Cmd::Refine { hypercover, .. } => ("refine", vec![path(hypercover)]),
            Cmd::CheckSheaf { space, presheaf } => ("check-sheaf", vec![path(space), path(presheaf)]),
            Cmd::CheckHypersheaf { space, presheaf } => ("check-hypersheaf", vec![path(space), path(presheaf)]),
            Cmd::KanExtend { space, presheaf, .. } => ("kan-extend", vec![path(space), path(presheaf)]),
            Cmd::Roundtrip { space, presheaf } => {
                ("roundtrip", std::iter::once(space).chain(presheaf).map(|p| path(p)).collect())
            }
            Cmd::Coinitial { map, degree } => ("coinitial", vec![path(map), format!("degree={degree}")]),
            Cmd::SymCoinitial { complex, levels, degree } => {
                ("sym-coinitial", vec![complex.clone(), format!("levels={levels}"), format!("degree={degree}")])
            }
            Cmd::Counterexample { fixture, degree } => (
                "counterexample",
                fixture.iter().map(|p| path(p)).chain([format!("degree={degree}")]).collect(),
            ),
        };
        let trunc = match &self.command {
            Cmd::Cech { .. } => Some(self.trunc.unwrap_or(3)),
            Cmd::Refine { .. } => Some(self.trunc.unwrap_or(2)),
            Cmd::CheckHypersheaf { .. } | Cmd::Roundtrip { .. } => Some(self.trunc.unwrap_or(1)),
            _ => self.trunc,
        };
        let (cap, samples) = match &self.command {
            Cmd::Roundtrip { .. } => (Some(self.cap.unwrap_or(2)), Some(self.samples.unwrap_or(0))),
            _ => (self.cap, self.samples),
        };
        RunConfig { command: command.into(), inputs, trunc, cap, samples, seed: self.seed }
    }

    fn run(&self, config: &RunConfig, report: &mut Report) -> Result<()> {
        let trunc = config.trunc.unwrap_or(3);
        match &self.command {
            Cmd::CheckTopology { space } => commands::check_topology(report, space),
            Cmd::MinimalBasis { space, output } => commands::minimal_basis(report, space, output.as_deref()),
            Cmd::Cech { space, cover, target, output } => {
                commands::cech(report, space, cover, target.as_deref(), trunc, output.as_deref())
            }
            Cmd::CheckHypercover { hypercover } => commands::check_hypercover(report, hypercover, config.trunc),
            Cmd::Refine { hypercover, output } => commands::refine(report, hypercover, trunc, output.as_deref()),
            Cmd::CheckSheaf { space, presheaf } => commands::check_sheaf(report, space, presheaf),
            Cmd::CheckHypersheaf { space, presheaf } => commands::check_hypersheaf(report, space, presheaf, trunc),
            Cmd::KanExtend { space, presheaf, output } => {
                commands::kan_extend(report, space, presheaf, output.as_deref())
            }
            Cmd::Roundtrip { space, presheaf } => {
                let rc = RoundtripConfig {
                    cap: config.cap.unwrap_or(2),
                    samples: config.samples.unwrap_or(0),
                    seed: config.seed,
                    truncation: trunc,
                };
                commands::roundtrip(report, space, rc, presheaf)
            }
            Cmd::Coinitial { map, degree } => commands::coinitial(report, map, *degree),
            Cmd::SymCoinitial { complex, levels, degree } => {
                commands::sym_coinitial(report, complex, *levels, *degree)
            }
            Cmd::Counterexample { fixture, degree } => commands::counterexample(report, fixture.as_deref(), *degree),
        }
    }
}

fn topology_failure(e: &TopologyError) -> bool {
    matches!(
        e,
        TopologyError::InvalidTopology(_)
            | TopologyError::NotACover { .. }
            | TopologyError::NotContained { .. }
            | TopologyError::NotABasis(_)
    )
}

fn hypercover_failure(e: &HypercoverError) -> bool {
    match e {
        HypercoverError::Topology(t) => topology_failure(t),
        HypercoverError::NotFunctorial { .. } | HypercoverError::OutsideTarget { .. } | HypercoverError::NotAHypercover(_) => {
            true
        }
        _ => false,
    }
}

fn descent_failure(e: &DescentError) -> bool {
    match e {
        DescentError::Topology(t) => topology_failure(t),
        DescentError::Hypercover(h) => hypercover_failure(h),
        DescentError::NotFunctorial { .. } => true,
        _ => false,
    }
}

fn homotopy_failure(e: &HomotopyError) -> bool {
    matches!(e, HomotopyError::NotMonotone(..))
}

/// Errors that refute a mathematical claim of the input rather than
/// reflecting a malformed file.
fn is_mathematical(err: &anyhow::Error) -> bool {
    err.chain().any(|cause| {
        if let Some(e) = cause.downcast_ref::<FormatError>() {
            return match e {
                FormatError::Topology(t) => topology_failure(t),
                FormatError::Hypercover(h) => hypercover_failure(h),
                FormatError::Descent(d) => descent_failure(d),
                FormatError::Homotopy(h) => homotopy_failure(h),
                _ => false,
            };
        }
        cause.downcast_ref::<TopologyError>().is_some_and(topology_failure)
            || cause.downcast_ref::<HypercoverError>().is_some_and(hypercover_failure)
            || cause.downcast_ref::<DescentError>().is_some_and(descent_failure)
            || cause.downcast_ref::<HomotopyError>().is_some_and(homotopy_failure)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = cli.config();
    let start = Instant::now();
    let mut report = Report::new();
    if let Err(err) = cli.run(&config, &mut report) {
        if !is_mathematical(&err) {
            eprintln!("error: {err:#}");
            return ExitCode::from(2);
        }
        report.line(format!("failure: {err:#}"));
        if report.record("failure", &serde_json::json!({ "error": format!("{err:#}") })).is_err() {
            return ExitCode::from(2);
        }
        report.fail();
    }
    let out = match report.emit(cli.format, &config, start.elapsed()) {
        Ok(out) => out,
        Err(err) => {
            eprintln!("error: {err:#}");
            return ExitCode::from(2);
        }
    };
    let mut stdout = std::io::stdout().lock();
    if stdout.write_all(out.as_bytes()).and_then(|_| stdout.flush()).is_err() {
        return ExitCode::from(2);
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
