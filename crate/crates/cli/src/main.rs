use std::fmt::Display;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use vk_core::lattice::{
    count_points, count_points_bruteforce, enumerate_points, DEFAULT_BRUTE_LIMIT,
};
use vk_core::moduli::{complex_json, contraction_poset, enumerate_trivalent, flip_connectivity};
use vk_core::semigroup::{
    degree_one_generation_check, gorenstein_check, hilbert_cox, hilbert_projective,
};
use vk_core::verlinde::{verlinde, verlinde_closed_form, verlinde_factorization, VerlindeInstance};
use vk_core::{GraphError, LatticeError, MarkedGraph, ModuliError, SemigroupError, VerlindeError};

/// Exact sl2 Verlinde numbers, lattice counts and stable graph combinatorics.
#[derive(Debug, Parser)]
#[command(name = "vk", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Verlinde number of genus G with leg weights r at level L.
    Verlinde {
        #[arg(long)]
        genus: usize,
        #[command(flatten)]
        weights: WeightArgs,
        #[arg(long, value_enum, default_value_t = Method::Count)]
        method: Method,
        #[arg(long)]
        json: bool,
    },
    /// Number of lattice points of a trivalent graph with fixed leg weights.
    Count {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        weights: WeightArgs,
        /// Enumerate every assignment instead of contracting.
        #[arg(long)]
        brute: bool,
        #[arg(long)]
        json: bool,
    },
    /// Hilbert function up to degree N.
    Hilbert {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum)]
        grading: GradingArg,
        #[arg(long, value_parser = parse_weights)]
        base_weights: Option<WeightList>,
        #[arg(long)]
        base_level: Option<u32>,
        #[arg(long)]
        max: u32,
        #[arg(long)]
        json: bool,
    },
    /// Checks that interior points are the translates of the all-2 weighting.
    Gorenstein {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        bound: u32,
        #[arg(long)]
        json: bool,
    },
    /// Checks generation in degree one on a tree.
    Gen1 {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        bound: u32,
        #[arg(long)]
        json: bool,
    },
    /// Lists isomorphism classes of stable graphs.
    Graphs {
        #[arg(long)]
        genus: usize,
        #[arg(long)]
        legs: usize,
        /// All stable graphs (default: trivalent only).
        #[arg(long, conflicts_with = "trivalent")]
        stable: bool,
        #[arg(long)]
        trivalent: bool,
        #[arg(long, conflicts_with = "json")]
        dot: bool,
        #[arg(long)]
        json: bool,
    },
    /// Flip graph on the trivalent classes.
    Flips {
        #[arg(long)]
        genus: usize,
        #[arg(long)]
        legs: usize,
        #[arg(long, conflicts_with = "json")]
        dot: bool,
        #[arg(long)]
        json: bool,
    },
    /// Streams every lattice point as one JSON line.
    Points {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        weights: WeightArgs,
    },
}

#[derive(Debug, Args)]
struct WeightArgs {
    /// Comma-separated leg weights; "" for none.
    #[arg(long, value_parser = parse_weights, allow_hyphen_values = true)]
    weights: WeightList,
    #[arg(long)]
    level: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Count,
    Closed,
    Factor,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GradingArg {
    Cox,
    Projective,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct WeightList(Vec<u32>);

fn parse_weights(text: &str) -> Result<WeightList, String> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(WeightList(Vec::new()));
    }
    text.split(',')
        .map(|s| u32::from_str(s.trim()).map_err(|e| format!("bad weight {s:?}: {e}")))
        .collect::<Result<_, _>>()
        .map(WeightList)
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Domain(&'static str, String),
    Numerical(VerlindeError),
    Disagreement(String),
    Io(io::Error),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Disagreement(_) => 1,
            Failure::Usage(_) | Failure::Domain(..) | Failure::Io(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(msg) => write!(f, "{msg}"),
            Failure::Domain(name, msg) => write!(f, "{name}: {msg}"),
            Failure::Numerical(e) => write!(f, "VerlindeError: {e}"),
            Failure::Disagreement(msg) => write!(f, "methods disagree: {msg}"),
            Failure::Io(e) => write!(f, "{e}"),
        }
    }
}

macro_rules! domain_error {
    ($($ty:ident),+) => {
        $(impl From<$ty> for Failure {
            fn from(e: $ty) -> Self {
                Failure::Domain(stringify!($ty), e.to_string())
            }
        })+
    };
}

domain_error!(GraphError, LatticeError, ModuliError, SemigroupError);

impl From<VerlindeError> for Failure {
    fn from(e: VerlindeError) -> Self {
        Failure::Numerical(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

fn load_graph(path: &Path) -> Result<MarkedGraph, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(MarkedGraph::from_json(&text)?)
}

fn brute_limit() -> Result<u64, Failure> {
    match std::env::var("VK_BRUTE_LIMIT") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|e| Failure::Usage(format!("VK_BRUTE_LIMIT={v:?}: {e}"))),
        Err(_) => Ok(DEFAULT_BRUTE_LIMIT),
    }
}

fn run(cli: Cli, out: &mut impl Write) -> Result<(), Failure> {
    match cli.command {
        Command::Verlinde {
            genus,
            weights,
            method,
            json,
        } => {
            let inst = VerlindeInstance::new(genus, weights.weights.0.clone(), weights.level);
            let methods = match method {
                Method::All => vec![Method::Count, Method::Closed, Method::Factor],
                m => vec![m],
            };
            let mut values = Vec::new();
            for m in methods {
                let v = match m {
                    Method::Count => verlinde(&inst),
                    Method::Closed => verlinde_closed_form(&inst)?,
                    _ => verlinde_factorization(&inst),
                };
                values.push((m, v.value));
            }
            if json {
                let by_method: serde_json::Map<String, Value> = values
                    .iter()
                    .map(|(m, v)| (method_name(*m).to_string(), json!(v.to_string())))
                    .collect();
                writeln!(
                    out,
                    "{}",
                    json!({
                        "genus": genus,
                        "weights": weights.weights.0,
                        "level": weights.level,
                        "values": by_method,
                    })
                )?;
            } else {
                for (_, v) in &values {
                    writeln!(out, "{v}")?;
                }
            }
            if values.windows(2).any(|w| w[0].1 != w[1].1) {
                let summary: Vec<String> = values
                    .iter()
                    .map(|(m, v)| format!("{} {v}", method_name(*m)))
                    .collect();
                return Err(Failure::Disagreement(summary.join(", ")));
            }
        }
        Command::Count {
            graph,
            weights,
            brute,
            json,
        } => {
            let graph = load_graph(&graph)?;
            let r = &weights.weights.0;
            let value = if brute {
                count_points_bruteforce(&graph, r, weights.level, brute_limit()?)?
            } else {
                count_points(&graph, r, weights.level)?
            };
            if json {
                writeln!(
                    out,
                    "{}",
                    json!({
                        "graph": graph.canonical_form().to_hex(),
                        "weights": r,
                        "level": weights.level,
                        "method": if brute { "brute" } else { "contract" },
                        "count": value.to_string(),
                    })
                )?;
            } else {
                writeln!(out, "{value}")?;
            }
        }
        Command::Hilbert {
            graph,
            grading,
            base_weights,
            base_level,
            max,
            json,
        } => {
            let graph = load_graph(&graph)?;
            let table = match grading {
                GradingArg::Cox => {
                    if base_weights.is_some() || base_level.is_some() {
                        return Err(Failure::Usage(
                            "--base-weights and --base-level need --grading projective".into(),
                        ));
                    }
                    hilbert_cox(&graph, max)?
                }
                GradingArg::Projective => {
                    let (Some(r), Some(l)) = (base_weights, base_level) else {
                        return Err(Failure::Usage(
                            "--grading projective needs --base-weights and --base-level".into(),
                        ));
                    };
                    hilbert_projective(&graph, &r.0, l, max)?
                }
            };
            if json {
                writeln!(out, "{}", table.to_json_value())?;
            } else {
                for (k, v) in table.values.iter().enumerate() {
                    writeln!(out, "{k}\t{v}")?;
                }
            }
        }
        Command::Gorenstein { graph, bound, json } => {
            let graph = load_graph(&graph)?;
            let cert = gorenstein_check(&graph, bound)?;
            if json {
                writeln!(
                    out,
                    "{}",
                    json!({
                        "graph": graph.canonical_form().to_hex(),
                        "bound": bound,
                        "generator": cert.generator.to_json_value(),
                        "witnesses": cert.witnesses.iter()
                            .map(|(p, q)| json!([p.to_json_value(), q.to_json_value()]))
                            .collect::<Vec<_>>(),
                        "translates_checked": cert.translates_checked,
                    })
                )?;
            } else {
                writeln!(
                    out,
                    "gorenstein ok: {} interior points, {} translates checked",
                    cert.witnesses.len(),
                    cert.translates_checked
                )?;
            }
        }
        Command::Gen1 { graph, bound, json } => {
            let graph = load_graph(&graph)?;
            let cert = degree_one_generation_check(&graph, bound)?;
            if json {
                writeln!(
                    out,
                    "{}",
                    json!({
                        "graph": graph.canonical_form().to_hex(),
                        "bound": bound,
                        "decompositions": cert.decompositions.iter()
                            .map(|(p, parts)| json!({
                                "point": p.to_json_value(),
                                "parts": parts.iter().map(|q| q.to_json_value()).collect::<Vec<_>>(),
                            }))
                            .collect::<Vec<_>>(),
                    })
                )?;
            } else {
                writeln!(
                    out,
                    "generated in degree one: {} points",
                    cert.decompositions.len()
                )?;
            }
        }
        Command::Graphs {
            genus,
            legs,
            stable,
            trivalent: _,
            dot,
            json,
        } => {
            let (classes, hasse) = if stable {
                let complex = contraction_poset(genus, legs)?;
                (complex.classes.clone(), Some(complex))
            } else {
                (enumerate_trivalent(genus, legs)?, None)
            };
            if json {
                let edges = hasse.as_ref().map(|c| c.hasse.as_slice()).unwrap_or(&[]);
                writeln!(out, "{}", complex_json(&classes, edges))?;
            } else if dot {
                match &hasse {
                    Some(complex) => write!(out, "{}", complex.hasse_dot())?,
                    None => {
                        for (i, c) in classes.iter().enumerate() {
                            write!(out, "{}", c.graph.to_dot(&format!("c{i}")))?;
                        }
                    }
                }
            } else {
                for c in &classes {
                    writeln!(out, "{}\t{}", c.label, c.graph.to_json())?;
                }
            }
        }
        Command::Flips {
            genus,
            legs,
            dot,
            json,
        } => {
            let fg = flip_connectivity(genus, legs)?;
            if dot {
                write!(out, "{}", fg.flip_dot())?;
            } else if json {
                let mut value = complex_json(&fg.classes, &[]);
                value["connected"] = json!(fg.connected);
                value["diameter"] = json!(fg.diameter);
                writeln!(out, "{value}")?;
            } else {
                writeln!(out, "classes {}", fg.classes.len())?;
                writeln!(out, "flips {}", fg.flips.len())?;
                writeln!(out, "connected {}", fg.connected)?;
                match fg.diameter {
                    Some(d) => writeln!(out, "diameter {d}")?,
                    None => writeln!(out, "diameter none")?,
                }
                for (i, j, f) in &fg.flips {
                    writeln!(
                        out,
                        "{i}\t{j}\t{}\t{}\t{}",
                        f.ancestor, f.edge, f.neighbor_edge
                    )?;
                }
            }
        }
        Command::Points { graph, weights } => {
            let graph = load_graph(&graph)?;
            for p in enumerate_points(&graph, &weights.weights.0, weights.level)? {
                writeln!(out, "{}", p.to_json())?;
            }
        }
    }
    Ok(())
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Count => "count",
        Method::Closed => "closed",
        Method::Factor => "factor",
        Method::All => "all",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let result = run(cli, &mut out).and_then(|()| out.flush().map_err(Failure::from));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
