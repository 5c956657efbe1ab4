mod config;
mod report;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use nacc_core::generate::{generate, to_qasm, Family, GenOptions, DEFAULT_SEED};
use nacc_core::{compile, verify_schedule, CzCircuit, Factor, FidelityReport, GridArch, HardwareParams, Schedule};
use rayon::prelude::*;

use config::{circuit_name, load_circuit, ArchFlags, CompileFlags, ParamFlags};
use report::{CompileOutput, Row, SweepRow};

#[derive(Parser)]
#[command(name = "nacc", version, about = "Divide-and-shuttle compiler for neutral-atom CZ circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Compile circuits and report fidelity.
    Compile {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        arch: ArchFlags,
        #[command(flatten)]
        compile: CompileFlags,
        #[command(flatten)]
        params: ParamFlags,
        /// Format of standard output.
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        /// Write schedules and reports as JSON to this file.
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Re-evaluate one circuit over a list of parameter values (CSV).
    Sweep {
        input: PathBuf,
        /// One of f_cz, f_trans, T2, d, t_cz, t_trans, v, r_int, r_restr.
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        #[command(flatten)]
        arch: ArchFlags,
        #[command(flatten)]
        compile: CompileFlags,
        #[command(flatten)]
        params: ParamFlags,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Emit the CZ skeleton of a benchmark family as OpenQASM 2.
    ///
    /// Families: ghz, dj, qft, wstate, qv, twolocal, 3regular, ising. qv uses
    /// depth n by default with three CZs per random qubit pair, so 20 qubits
    /// give 600 CZs; --depth sets the qv depth, the ising Trotter step count
    /// (default 5) or the twolocal repetitions (default 3).
    Gen {
        family: String,
        n: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Check a compiled schedule against its circuit.
    Verify {
        schedule: PathBuf,
        circuit: PathBuf,
        /// Architecture flags; default to the architecture stored with the
        /// schedule, or the defaults if none is stored.
        #[command(flatten)]
        arch: ArchFlags,
        /// Ignore the stored architecture and use the flags.
        #[arg(long = "use-flags")]
        use_flags: bool,
    },
    /// Compile every .qasm file in a directory and emit one CSV.
    Bench {
        dir: PathBuf,
        #[command(flatten)]
        arch: ArchFlags,
        #[command(flatten)]
        compile: CompileFlags,
        #[command(flatten)]
        params: ParamFlags,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
}

/// Failure classes with their exit codes.
enum Failure {
    /// Unreadable or malformed input, bad flags: exit 1.
    Input(anyhow::Error),
    /// The verifier found problems: exit 2.
    Violations(Vec<String>),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Violations(v)) => {
            for line in v {
                eprintln!("{line}");
            }
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Compile {
            inputs,
            arch,
            compile,
            params,
            format,
            output,
        } => cmd_compile(&inputs, &arch, &compile, &params, format, output.as_deref()),
        Command::Sweep {
            input,
            axis,
            values,
            arch,
            compile,
            params,
            output,
        } => cmd_sweep(&input, &axis, &values, &arch, &compile, &params, output.as_deref()),
        Command::Gen {
            family,
            n,
            seed,
            depth,
            output,
        } => cmd_gen(&family, n, GenOptions { seed, depth }, output.as_deref()),
        Command::Verify {
            schedule,
            circuit,
            arch,
            use_flags,
        } => cmd_verify(&schedule, &circuit, &arch, use_flags),
        Command::Bench {
            dir,
            arch,
            compile,
            params,
            jobs,
            output,
        } => cmd_bench(&dir, &arch, &compile, &params, jobs, output.as_deref()),
    }
}

/// Compiles, verifies and evaluates one circuit. RT covers `compile` only.
fn compile_one(
    name: String,
    c: &CzCircuit,
    arch: &GridArch,
    flags: &CompileFlags,
    params: &HardwareParams,
) -> Result<CompileOutput, Failure> {
    let start = Instant::now();
    let schedule = compile(c, arch, flags.options()).map_err(|e| Failure::Input(anyhow::anyhow!("{name}: {e}")))?;
    let rt_s = start.elapsed().as_secs_f64();
    let violations = verify_schedule(&schedule, c, arch);
    if !violations.is_empty() {
        return Err(Failure::Violations(
            violations.iter().map(|v| format!("{name}: {v}")).collect(),
        ));
    }
    let report = FidelityReport::new(&schedule.counters, params).with_context(|| name.clone())?;
    Ok(CompileOutput {
        circuit: name,
        arch: arch.clone(),
        schedule,
        report,
        rt_s,
    })
}

fn write_or_print(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn cmd_compile(
    inputs: &[PathBuf],
    arch_flags: &ArchFlags,
    flags: &CompileFlags,
    params: &ParamFlags,
    format: Format,
    output: Option<&Path>,
) -> Result<(), Failure> {
    let p = params.load()?;
    let mut results = Vec::new();
    for path in inputs {
        let c = load_circuit(path)?;
        let arch = arch_flags.arch_for(c.num_qubits())?;
        results.push(compile_one(circuit_name(path), &c, &arch, flags, &p)?);
    }
    let json = || -> Result<String> {
        Ok(if results.len() == 1 {
            serde_json::to_string_pretty(&results[0])?
        } else {
            serde_json::to_string_pretty(&results)?
        } + "\n")
    };
    if let Some(path) = output {
        write_or_print(Some(path), &json()?)?;
    }
    let rows: Vec<Row> = results.iter().map(Row::from).collect();
    match format {
        Format::Table => print!("{}", report::table(&rows)),
        Format::Csv => print!("{}", report::csv_text(&rows)?),
        Format::Json => print!("{}", json()?),
    }
    Ok(())
}

const SWEEP_AXES: [&str; 9] = ["f_cz", "f_trans", "T2", "d", "t_cz", "t_trans", "v", "r_int", "r_restr"];

fn cmd_sweep(
    input: &Path,
    axis: &str,
    values: &[String],
    arch_flags: &ArchFlags,
    flags: &CompileFlags,
    params: &ParamFlags,
    output: Option<&Path>,
) -> Result<(), Failure> {
    if !SWEEP_AXES.contains(&axis) {
        return Err(Failure::Input(anyhow::anyhow!(
            "unknown sweep axis `{axis}` (expected one of {})",
            SWEEP_AXES.join(", ")
        )));
    }
    let base = params.load()?;
    let c = load_circuit(input)?;
    let name = circuit_name(input);
    let structural = matches!(axis, "d" | "r_int" | "r_restr");
    let mut fixed: Option<Schedule> = None;
    let mut rows = Vec::new();
    for raw in values {
        let raw = raw.trim();
        let mut a = arch_flags.clone();
        let mut p = base;
        match axis {
            "d" => a.d_um = parse_f64(raw)?,
            "r_int" => a.r_int = raw.parse::<Factor>().map_err(anyhow::Error::new)?,
            "r_restr" => a.r_restr = raw.parse::<Factor>().map_err(anyhow::Error::new)?,
            _ => p.set(axis, parse_f64(raw)?).map_err(anyhow::Error::msg)?,
        }
        p.validate().map_err(anyhow::Error::new)?;
        let arch = a.arch_for(c.num_qubits())?;
        let schedule = match (&fixed, structural) {
            (Some(s), false) => s.clone(),
            _ => {
                let out = compile_one(name.clone(), &c, &arch, flags, &p)?;
                if !structural {
                    fixed = Some(out.schedule.clone());
                }
                out.schedule
            }
        };
        let r = FidelityReport::new(&schedule.counters, &p).map_err(anyhow::Error::new)?;
        rows.push(SweepRow::new(raw, &r));
    }
    write_or_print(output, &report::csv_text(&rows)?)?;
    Ok(())
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse().with_context(|| format!("`{s}` is not a number"))
}

fn cmd_gen(family: &str, n: usize, opts: GenOptions, output: Option<&Path>) -> Result<(), Failure> {
    let f: Family = family.parse().map_err(anyhow::Error::new)?;
    let c = generate(f, n, opts).map_err(anyhow::Error::new)?;
    write_or_print(output, &to_qasm(&c))?;
    Ok(())
}

fn cmd_verify(schedule: &Path, circuit: &Path, arch_flags: &ArchFlags, use_flags: bool) -> Result<(), Failure> {
    let text = fs::read_to_string(schedule).with_context(|| format!("reading {}", schedule.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", schedule.display()))?;
    let (sched_value, stored_arch) = match value.get("schedule") {
        Some(s) => (s.clone(), value.get("arch").cloned()),
        None => (value, None),
    };
    let sched: Schedule =
        serde_json::from_value(sched_value).with_context(|| format!("reading schedule in {}", schedule.display()))?;
    let c = load_circuit(circuit)?;
    let arch = match stored_arch {
        Some(a) if !use_flags => {
            let a: GridArch = serde_json::from_value(a).context("reading stored architecture")?;
            GridArch::new(a.side(), a.spacing_um(), a.r_int(), a.r_restr()).map_err(anyhow::Error::new)?
        }
        _ => arch_flags.arch_for(c.num_qubits().max(sched.n))?,
    };
    let violations = verify_schedule(&sched, &c, &arch);
    if violations.is_empty() {
        println!("ok: {} stages, no violations", sched.stages.len());
        Ok(())
    } else {
        Err(Failure::Violations(violations.iter().map(|v| v.to_string()).collect()))
    }
}

fn cmd_bench(
    dir: &Path,
    arch_flags: &ArchFlags,
    flags: &CompileFlags,
    params: &ParamFlags,
    jobs: usize,
    output: Option<&Path>,
) -> Result<(), Failure> {
    let p = params.load()?;
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "qasm"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Failure::Input(anyhow::anyhow!("no .qasm files in {}", dir.display())));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .context("starting worker pool")?;
    let results: Vec<Result<CompileOutput, Failure>> = pool.install(|| {
        paths
            .par_iter()
            .map(|path| {
                let c = load_circuit(path)?;
                let arch = arch_flags.arch_for(c.num_qubits())?;
                compile_one(circuit_name(path), &c, &arch, flags, &p)
            })
            .collect()
    });
    let mut rows = Vec::new();
    for r in results {
        rows.push(Row::from(&r?));
    }
    write_or_print(output, &report::csv_text(&rows)?)?;
    if output.is_some() {
        print!("{}", report::table(&rows));
    }
    Ok(())
}
