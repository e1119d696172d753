//! `graphdiv`: divisor rank, gonality, Weierstrass points and Jacobians of
//! multigraphs and metric Q-graphs, plus seeded experiment sweeps.

mod commands;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use commands::{CmdResult, Status};

#[derive(Parser)]
#[command(name = "graphdiv", version, about = "Divisor theory on multigraphs and metric Q-graphs")]
struct Cli {
    /// Print a structured {status, payload, diagnostics} object.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for commands that sample; required by them.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Exit with status 2 when a conjecture finding is reported.
    #[arg(long, global = true)]
    strict: bool,
    /// Worker threads for parallel commands.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

/// Graphs are a file path, `-` for stdin, a family such as `banana:3`,
/// `banana_lengths:2,1,1`, `complete:4`, `cycle:5`, `path:3`, or `quartic`.
/// Divisors are inline JSON or `@file`.
#[derive(Subcommand)]
enum Command {
    /// Rank of a divisor, e.g. `rank banana:3 '{"Q1":1,"Q2":1}'`.
    Rank {
        graph: String,
        divisor: String,
        /// Also emit and verify a witness and an ordering certificate.
        #[arg(long)]
        certificate: bool,
    },
    /// Least degree of a rank-1 divisor, with a witness.
    Gonality { graph: String },
    /// Least degree d <= dmax of a divisor of rank r.
    Grd {
        graph: String,
        #[arg(long)]
        r: i64,
        #[arg(long)]
        dmax: i64,
    },
    /// Vertices P with r(g (P)) >= 1.
    Weierstrass { graph: String },
    /// Weierstrass gap sequence at a vertex.
    Gaps { graph: String, vertex: String },
    /// Invariant factors and order of the Jacobian.
    Jacobian { graph: String },
    /// Rank of a divisor on a Q-graph (edge lines `u v p/q`).
    Qrank {
        graph: String,
        /// JSON list of {"edge": i, "offset": "p/q", "coeff": n}.
        divisor: String,
        /// Skip the recomputation on a once-more subdivided model.
        #[arg(long)]
        no_audit: bool,
    },
    /// r(3(P)) as P moves along one edge of the unit metric banana graph.
    NorineScan {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 12)]
        den: i64,
    },
    /// Random shrinking perturbations probing upper semicontinuity of rank.
    Semicontinuity {
        graph: String,
        divisor: String,
        #[arg(long)]
        eps: String,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 24)]
        max_den: i64,
    },
    /// Check r(D) - r(K - D) = deg(D) + 1 - g (a JSON list divisor selects the metric version).
    Rrcheck { graph: String, divisor: String },
    /// Specialize tabulated curve divisors (`quartic` or a fixture file).
    Specialize {
        #[arg(default_value = "quartic")]
        fixture: String,
        #[arg(long)]
        divisor: Option<String>,
    },
    /// Seeded conjecture sweep appended to a JSONL file.
    Sweep {
        /// bn, gonality or subdivision
        kind: String,
        #[arg(long, default_value_t = 6)]
        gmax: usize,
        #[arg(long, default_value_t = 200)]
        seeds: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2)]
        rmax: i64,
        #[arg(long, default_value_t = 3)]
        kmax: usize,
        #[arg(long, default_value_t = 7)]
        max_vertices: usize,
    },
    /// Recompute every record of a JSONL file and compare payloads.
    Replay { file: PathBuf },
    /// Quartic fixture and graph family assertion table.
    Fixtures,
}

fn run(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Rank { graph, divisor, certificate } => commands::rank(graph, divisor, *certificate),
        Command::Gonality { graph } => commands::gonality(graph),
        Command::Grd { graph, r, dmax } => commands::grd(graph, *r, *dmax),
        Command::Weierstrass { graph } => commands::weierstrass(graph),
        Command::Gaps { graph, vertex } => commands::gaps(graph, vertex),
        Command::Jacobian { graph } => commands::jacobian(graph),
        Command::Qrank { graph, divisor, no_audit } => commands::qrank(graph, divisor, !no_audit),
        Command::NorineScan { n, den } => commands::norine(*n, *den),
        Command::Semicontinuity { graph, divisor, eps, samples, max_den } => {
            commands::semicontinuity(graph, divisor, eps, *samples, cli.seed, *max_den)
        }
        Command::Rrcheck { graph, divisor } => commands::rrcheck(graph, divisor),
        Command::Specialize { fixture, divisor } => commands::specialize_cmd(fixture, divisor.as_deref()),
        Command::Sweep { kind, gmax, seeds, out, rmax, kmax, max_vertices } => {
            commands::sweep(kind, *gmax, *seeds, out, cli.seed, *rmax, *kmax, *max_vertices)
        }
        Command::Replay { file } => commands::replay(file),
        Command::Fixtures => commands::fixtures(),
    }
}

fn print_error(json_mode: bool, message: &str) {
    if json_mode {
        println!("{}", json!({"status": "error", "payload": null, "diagnostics": [message]}));
    } else {
        eprintln!("error: {message}");
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("error")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let json_mode = std::env::args().any(|a| a == "--json");
            let text = e.to_string();
            print_error(json_mode, text.trim().trim_start_matches("error: "));
            return ExitCode::from(1);
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            log::warn!("thread pool already configured: {e}");
        }
    }
    match run(&cli) {
        Err(message) => {
            print_error(cli.json, &message);
            ExitCode::from(1)
        }
        Ok(out) => {
            if cli.json {
                println!(
                    "{}",
                    json!({"status": out.status.as_str(), "payload": out.payload, "diagnostics": out.diagnostics})
                );
            } else {
                println!("{}", out.human);
                for d in &out.diagnostics {
                    eprintln!("note: {d}");
                }
            }
            ExitCode::from(exit_code(out.status, cli.strict))
        }
    }
}

fn exit_code(status: Status, strict: bool) -> u8 {
    match status {
        Status::Ok => 0,
        Status::Error => 1,
        Status::Finding if strict => 2,
        Status::Finding => 0,
    }
}
