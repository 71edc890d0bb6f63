//! `cssp`: build reduction instances, solve them, and run the exact checks.
//!
//! Exit codes: 0 completed, 2 input error, 3 enumeration cap exceeded.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use cssp_core::corpus;
use cssp_core::graph::{is_three_coloring, parse_graph, three_color_backtracking, Graph};
use cssp_core::linalg::format_rational;
use cssp_core::reduction::{build_instance, read_instance, write_instance};
use cssp_core::solvers::{solve, Mode, SolveError, DEFAULT_CAP};
use cssp_core::verify::{check_lemmas, verify_theorem, VerifyError, VerifyMode};

#[derive(Parser, Debug)]
#[command(name = "cssp", version, about = "Exact column subset selection lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the reduction instance of a DIMACS graph.
    Reduce {
        #[command(flatten)]
        io: Io,
    },
    /// Solve a CSSP instance and report the decision.
    Decide {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_enum, default_value_t = SolveMode::ExactFull)]
        mode: SolveMode,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: u128,
    },
    /// Check the colorability biconditional on a graph.
    Verify {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_enum, default_value_t = CheckMode::Structured)]
        mode: CheckMode,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: u128,
    },
    /// Run every lemma check on a graph.
    CheckLemmas {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: u128,
    },
    /// Find a three-coloring by backtracking.
    Color {
        #[command(flatten)]
        io: Io,
    },
    /// Write the standard graph corpus as `.col` files.
    GenCorpus {
        /// Output directory (created if missing).
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = corpus::DEFAULT_SEED)]
        seed: u64,
        /// Number of seeded G(4, 1/2) graphs.
        #[arg(long, default_value_t = 20)]
        random: usize,
    },
}

#[derive(clap::Args, Debug)]
struct Io {
    /// Input file; standard input when omitted or `-`.
    #[arg(short, long)]
    input: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SolveMode {
    ExactFull,
    ExactStructured,
    Greedy,
}

impl From<SolveMode> for Mode {
    fn from(m: SolveMode) -> Mode {
        match m {
            SolveMode::ExactFull => Mode::ExactFull,
            SolveMode::ExactStructured => Mode::ExactStructured,
            SolveMode::Greedy => Mode::Greedy,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum CheckMode {
    Full,
    Structured,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl ToString) -> Self {
        Failure { code: 2, message: message.to_string() }
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        let code = if matches!(e, SolveError::CombinatorialBlowup { .. }) { 3 } else { 2 };
        Failure { code, message: e.to_string() }
    }
}

impl From<VerifyError> for Failure {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Solve(s) => s.into(),
            other => Failure::input(other),
        }
    }
}

fn read_input(path: &Option<PathBuf>) -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    match path {
        Some(p) if p != Path::new("-") => {
            buf = fs::read(p).map_err(|e| Failure::input(format!("{}: {e}", p.display())))?;
        }
        _ => {
            io::stdin().read_to_end(&mut buf).map_err(|e| Failure::input(format!("stdin: {e}")))?;
        }
    }
    Ok(buf)
}

fn write_output(path: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::input(format!("{}: {e}", p.display()))),
        None => io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::input(format!("stdout: {e}"))),
    }
}

fn read_graph(io: &Io) -> Result<(String, Graph), Failure> {
    let bytes = read_input(&io.input)?;
    let graph = parse_graph(&bytes).map_err(Failure::input)?;
    let name = io
        .input
        .as_ref()
        .and_then(|p| p.file_stem())
        .map(|s| s.to_string_lossy().into_owned())
        .filter(|s| s != "-")
        .unwrap_or_else(|| "stdin".into());
    Ok((name, graph))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Reduce { io } => {
            let (_, graph) = read_graph(&io)?;
            let inst = build_instance(&graph).map_err(Failure::input)?;
            let text = write_instance(&inst);
            match &io.output {
                Some(_) => {
                    write_output(&io.output, &text)?;
                    let summary = format!(
                        "n {}\nm {}\nt {}\ntau_sq {}\n",
                        inst.n(),
                        inst.m(),
                        format_rational(&inst.t),
                        format_rational(&inst.tau_sq)
                    );
                    write_output(&None, &summary)
                }
                None => write_output(&None, &text),
            }
        }
        Command::Decide { io, mode, cap } => {
            let bytes = read_input(&io.input)?;
            let text = String::from_utf8(bytes).map_err(|_| Failure::input("instance file is not UTF-8"))?;
            let inst = read_instance(&text).map_err(Failure::input)?;
            let report = solve(&inst.matrix, inst.k, &inst.tau_sq, mode.into(), cap)?;
            write_output(&io.output, &report.to_text())
        }
        Command::Verify { io, mode, cap } => {
            let (name, graph) = read_graph(&io)?;
            let mode = match mode {
                CheckMode::Full => VerifyMode::Full,
                CheckMode::Structured => VerifyMode::Structured,
            };
            let report = verify_theorem(&graph, &name, mode, cap)?;
            write_output(&io.output, &report.to_text())
        }
        Command::CheckLemmas { io, cap } => {
            let (name, graph) = read_graph(&io)?;
            let report = check_lemmas(&graph, &name, cap)?;
            write_output(&io.output, &report.to_text())
        }
        Command::Color { io } => {
            let (_, graph) = read_graph(&io)?;
            let text = match three_color_backtracking(&graph) {
                Some(phi) => {
                    debug_assert!(is_three_coloring(&graph, &phi).unwrap_or(false));
                    let colors = phi.dense(graph.vertex_count()).map_err(Failure::input)?;
                    let mut out = String::from("three-coloring\n");
                    for (v, c) in colors.iter().enumerate() {
                        out.push_str(&format!("v{} {c}\n", v + 1));
                    }
                    out
                }
                None => "no three-coloring\n".to_string(),
            };
            write_output(&io.output, &text)
        }
        Command::GenCorpus { output, seed, random } => {
            fs::create_dir_all(&output).map_err(|e| Failure::input(format!("{}: {e}", output.display())))?;
            let graphs = corpus::standard(seed, random).map_err(Failure::input)?;
            let mut listing = String::new();
            for (name, g) in graphs {
                let path = output.join(format!("{name}.col"));
                let text = g.to_dimacs(Some(&name));
                fs::write(&path, text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
                listing.push_str(&format!("{}\n", path.display()));
            }
            write_output(&None, &listing)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
