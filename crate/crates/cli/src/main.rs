use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qpath_core::evolution::{exact_propagator, split_step_propagator, step_propagator, EvolutionSpec, SplitStepSpec};
use qpath_core::experiments::{
    amplify_demo, fermat_demo, grating_demo, phase_noise_demo, DemoReport, MediumProfile, DEFAULT_DELTA_SWEEP,
};
use qpath_core::pathsum::{sum_over_paths, PathSumResult, PruneConfig, DEFAULT_RESOURCE_LIMIT};
use qpath_core::quantization::{make_grid, quantize_separable, ClassicalHamiltonian, HamiltonianFile, PhaseSpaceGrid};
use qpath_core::{Error, Operator};

const EXIT_FAILURE: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_GUARD: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "qpath", version, about = "Path-sum quantum evolution on a finite grid")]
#[command(arg_required_else_help = true, args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Quantize a separable Hamiltonian into a dense Hermitian matrix.
    Quantize {
        #[command(flatten)]
        source: HamiltonianSource,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Build the propagator for a total time.
    Evolve {
        #[command(flatten)]
        source: HamiltonianSource,
        #[arg(long, default_value_t = 1.0)]
        time: f64,
        #[arg(long, default_value_t = 1)]
        steps: usize,
        /// Use the split-step product instead of the exact exponential.
        #[arg(long)]
        split: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Sum a transition amplitude over every discrete path.
    Pathsum {
        #[command(flatten)]
        source: HamiltonianSource,
        #[arg(long, default_value_t = 1.0)]
        time: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
        #[arg(long)]
        split: bool,
        #[arg(long, default_value_t = 0)]
        top_k: usize,
        /// Relative magnitude floor in [0, 1].
        #[arg(long, default_value_t = 0.0)]
        prune: f64,
        #[arg(long, default_value_t = DEFAULT_RESOURCE_LIMIT)]
        resource_limit: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run one of the demonstrations.
    Demo {
        #[command(subcommand)]
        demo: Demo,
    },
}

#[derive(Subcommand, Debug)]
enum Demo {
    /// Dominant path through a refracting medium.
    Fermat {
        #[arg(long, default_value_t = 8)]
        dim: usize,
        #[arg(long, default_value_t = 4)]
        steps: usize,
        #[arg(long, default_value_t = 1)]
        from: usize,
        #[arg(long, default_value_t = 6)]
        to: usize,
        #[arg(long, value_enum, default_value_t = MediumKind::Smooth)]
        medium: MediumKind,
        /// Period of a periodic medium.
        #[arg(long, default_value_t = 2)]
        period: usize,
        /// Seed of a disordered medium.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Seeds of the disordered media used for comparison.
        #[arg(long, value_delimiter = ',', default_values_t = [1u64, 2, 3, 4, 5, 6, 7, 8])]
        seeds: Vec<u64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Period recovery from a comb state.
    Grating {
        #[arg(long, default_value_t = 32)]
        dim: usize,
        #[arg(long, default_value_t = 4)]
        period: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Nonunitary amplification of a marked state.
    Amplify {
        #[arg(long, default_value_t = 16)]
        dim: usize,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 0)]
        marked: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Period recovery with a miscalibrated Fourier transform.
    Noise {
        #[arg(long, default_value_t = 32)]
        dim: usize,
        #[arg(long, default_value_t = 4)]
        period: usize,
        #[arg(long, default_value_t = 0.1 / 32.0, allow_negative_numbers = true)]
        delta: f64,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_values_t = DEFAULT_DELTA_SWEEP.to_vec())]
        sweep: Vec<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum MediumKind {
    Uniform,
    Smooth,
    Periodic,
    Disordered,
}

#[derive(Args, Debug)]
struct HamiltonianSource {
    /// JSON Hamiltonian file.
    #[arg(long, conflicts_with = "dim")]
    hamiltonian: Option<PathBuf>,
    /// Grid dimension for the harmonic oscillator `p^2 + q^2`.
    #[arg(long)]
    dim: Option<usize>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON object of default flag values; explicit flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Invalid(String),
    Core(Error),
    Io(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => EXIT_INVALID,
            CliError::Core(Error::ResourceLimit { .. }) => EXIT_GUARD,
            CliError::Core(_) => EXIT_INVALID,
            CliError::Io(_) => EXIT_FAILURE,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Invalid(m) | CliError::Io(m) => m.clone(),
            CliError::Core(e) => e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let argv = match expand_config(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {}", e.message());
            return ExitCode::from(e.code());
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

/// Splices the flags of a `--config` file in right after the subcommand words,
/// so explicit flags later on the command line override them.
fn expand_config(argv: Vec<String>) -> CliResult<Vec<String>> {
    let mut path = None;
    for (i, a) in argv.iter().enumerate() {
        if a == "--config" {
            path = argv.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else { return Ok(argv) };
    let text = fs::read_to_string(&path).map_err(|e| CliError::Invalid(format!("cannot read config {path}: {e}")))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("config {path}: {e}")))?;
    let Value::Object(map) = value else {
        return Err(CliError::Invalid(format!("config {path} must be a JSON object")));
    };
    let mut flags = Vec::new();
    for (key, v) in map {
        let flag = format!("--{}", key.replace('_', "-"));
        match v {
            Value::Bool(true) => flags.push(flag),
            Value::Bool(false) => {}
            Value::Number(n) => flags.extend([flag, n.to_string()]),
            Value::String(s) => flags.extend([flag, s]),
            Value::Array(items) => {
                let parts = items
                    .iter()
                    .map(|x| match x {
                        Value::Number(n) => Ok(n.to_string()),
                        Value::String(s) => Ok(s.clone()),
                        _ => Err(CliError::Invalid(format!("config key {key}: list entries must be scalars"))),
                    })
                    .collect::<CliResult<Vec<_>>>()?;
                flags.extend([flag, parts.join(",")]);
            }
            _ => return Err(CliError::Invalid(format!("config key {key}: unsupported value"))),
        }
    }
    let words = match argv.get(1).map(String::as_str) {
        Some("demo") => 3,
        _ => 2,
    };
    let at = words.min(argv.len());
    let mut out = argv[..at].to_vec();
    out.extend(flags);
    out.extend_from_slice(&argv[at..]);
    Ok(out)
}

fn load_hamiltonian(source: &HamiltonianSource) -> CliResult<(PhaseSpaceGrid, ClassicalHamiltonian)> {
    match (&source.hamiltonian, source.dim) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Invalid(format!("cannot read {}: {e}", path.display())))?;
            Ok(HamiltonianFile::parse(&text)?)
        }
        (None, Some(d)) => Ok((make_grid(d)?, ClassicalHamiltonian::harmonic())),
        (None, None) => Err(CliError::Invalid("either --hamiltonian or --dim is required".into())),
    }
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Quantize { source, output } => {
            let (grid, spec) = load_hamiltonian(&source)?;
            let h = quantize_separable(&spec, &grid)?;
            let text = render_operator(&h, None, output.format)?;
            emit(&output, &text)
        }
        Command::Evolve { source, time, steps, split, output } => {
            let (grid, spec) = load_hamiltonian(&source)?;
            let u: Operator = if split {
                let s = SplitStepSpec::new(grid, spec, time, steps)?;
                split_step_propagator(&s)?.pow(steps).into_inner()
            } else {
                let s = EvolutionSpec::new(quantize_separable(&spec, &grid)?, time, steps)?;
                exact_propagator(s.hamiltonian(), s.total_time())?.into_inner()
            };
            let meta = json!({ "T": time, "N": steps, "split": split });
            let text = render_operator(&u, Some(meta), output.format)?;
            emit(&output, &text)
        }
        Command::Pathsum { source, time, steps, from, to, split, top_k, prune, resource_limit, output } => {
            let (grid, spec) = load_hamiltonian(&source)?;
            let u: Operator = if split {
                split_step_propagator(&SplitStepSpec::new(grid, spec, time, steps)?)?.into_inner()
            } else {
                let h = quantize_separable(&spec, &grid)?;
                step_propagator(&EvolutionSpec::new(h, time, steps)?)?.into_inner()
            };
            let cfg = PruneConfig { magnitude_floor: prune, top_k, resource_limit };
            let result = sum_over_paths(&u, steps, from, to, &cfg)?;
            let text = render_pathsum(&result, output.format)?;
            emit(&output, &text)
        }
        Command::Demo { demo } => run_demo(demo),
    }
}

fn run_demo(demo: Demo) -> CliResult<()> {
    let (report, output) = match demo {
        Demo::Fermat { dim, steps, from, to, medium, period, seed, seeds, output } => {
            let m = match medium {
                MediumKind::Uniform => MediumProfile::uniform(dim)?,
                MediumKind::Smooth => MediumProfile::smooth(dim)?,
                MediumKind::Periodic => MediumProfile::periodic(dim, period)?,
                MediumKind::Disordered => MediumProfile::disordered(dim, seed)?,
            };
            (fermat_demo(&m, steps, from, to, &seeds)?, output)
        }
        Demo::Grating { dim, period, output } => (grating_demo(dim, period)?.1, output),
        Demo::Amplify { dim, epsilon, marked, output } => (amplify_demo(dim, epsilon, marked)?.1, output),
        Demo::Noise { dim, period, delta, sweep, output } => (phase_noise_demo(dim, period, delta, &sweep)?.1, output),
    };
    let text = render_report(&report, output.format)?;
    emit(&output, &text)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values are serializable");
    s.push('\n');
    s
}

fn csv_text(header: &[&str], rows: Vec<Vec<String>>) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(format!("csv: {e}"));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

fn render_operator(op: &Operator, metadata: Option<Value>, format: Format) -> CliResult<String> {
    match format {
        Format::Json => {
            let mut v = op.to_json_value();
            if let (Some(meta), Value::Object(map)) = (metadata, &mut v) {
                map.insert("metadata".into(), meta);
            }
            Ok(pretty(&v))
        }
        Format::Csv => {
            let d = op.dim();
            let rows = (0..d)
                .flat_map(|r| (0..d).map(move |c| (r, c)))
                .map(|(r, c)| {
                    let z = op.get(r, c);
                    vec![r.to_string(), c.to_string(), z.re.to_string(), z.im.to_string()]
                })
                .collect();
            csv_text(&["row", "col", "re", "im"], rows)
        }
    }
}

fn render_pathsum(r: &PathSumResult, format: Format) -> CliResult<String> {
    match format {
        Format::Json => Ok(pretty(&r.to_json_value())),
        Format::Csv => {
            let mut rows = vec![vec![
                "total".to_string(),
                String::new(),
                r.total.re.to_string(),
                r.total.im.to_string(),
                r.total.norm().to_string(),
                String::new(),
            ]];
            for c in &r.top {
                let path: Vec<String> = c.path.indices().iter().map(|s| s.to_string()).collect();
                rows.push(vec![
                    "path".to_string(),
                    path.join(" "),
                    c.amplitude.re.to_string(),
                    c.amplitude.im.to_string(),
                    c.magnitude.to_string(),
                    c.action_phase.to_string(),
                ]);
            }
            csv_text(&["kind", "path", "re", "im", "magnitude", "action_phase"], rows)
        }
    }
}

fn render_report(r: &DemoReport, format: Format) -> CliResult<String> {
    match format {
        Format::Json => Ok(pretty(&r.to_json_value())),
        Format::Csv => {
            let rows = r.rows().into_iter().map(|(label, x, y)| vec![label, x.to_string(), y.to_string()]).collect();
            csv_text(&["series", "x", "y"], rows)
        }
    }
}

/// Writes the fully rendered output; nothing is written unless rendering succeeded.
fn emit(output: &OutputArgs, text: &str) -> CliResult<()> {
    match &output.out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))
        }
    }
}
