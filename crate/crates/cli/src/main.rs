//! Command-line entry point: single solves, benchmark sweeps, encoding
//! verification, gap scans, depth reports, and plot emission.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use adialin::encoding::{assemble_ua, dense_unitary, extract_encoded_block};
use adialin::engine::{
    depth_report, run_segmented_solve, DeltaPolicy, EngineKind, SolveOptions,
};
use adialin::hamiltonian::{gap_scan, HamiltonianPair, Schedule};
use adialin::numerics::{ComplexMatrix, RealMatrix};
use adialin::problem::{generate_instance, InstanceFile, LinearSystemInstance};
use adialin::simulator::{NoiseConfig, NoiseModel};
use adialin::Result;
use adialin_cli::plot::emit_plots;
use adialin_cli::sweep::{run_sweep, write_csv, SweepConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "adialin",
    about = "Discrete adiabatic linear-system solver benchmark harness",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum NoiseModelArg {
    None,
    MeasurementGaussian,
    Depolarizing,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EngineArg {
    Circuit,
    Dense,
}

impl From<EngineArg> for EngineKind {
    fn from(value: EngineArg) -> Self {
        match value {
            EngineArg::Circuit => EngineKind::Circuit,
            EngineArg::Dense => EngineKind::Dense,
        }
    }
}

#[derive(Args, Debug)]
struct NoiseArgs {
    /// Noise channel applied at each mid-circuit measurement
    #[arg(long, value_enum, default_value_t = NoiseModelArg::None)]
    noise_model: NoiseModelArg,
    /// Gaussian std or depolarizing probability
    #[arg(long, default_value_t = 0.0)]
    noise_strength: f64,
}

impl NoiseArgs {
    fn to_config(&self) -> NoiseConfig {
        let model = match self.noise_model {
            NoiseModelArg::None => NoiseModel::None,
            NoiseModelArg::MeasurementGaussian => NoiseModel::MeasurementGaussian,
            NoiseModelArg::Depolarizing => NoiseModel::Depolarizing,
        };
        NoiseConfig { model, strength: self.noise_strength, shots: None }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one linear system and report fidelity, residual, and depth
    Solve {
        /// System size (power of two); ignored when --instance is given
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Target condition number; ignored when --instance is given
        #[arg(long, default_value_t = 10.0)]
        kappa: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 2000)]
        steps: usize,
        /// Fixed step duration (default: balanced 2/sqrt(steps))
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long, value_enum, default_value_t = EngineArg::Dense)]
        engine: EngineArg,
        /// JSON instance file to solve instead of generating one
        #[arg(long)]
        instance: Option<PathBuf>,
        #[command(flatten)]
        noise: NoiseArgs,
    },
    /// Run a benchmark grid from a JSON config file
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Override the output path from the config
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check block-encoding extraction and unitarity on random matrices
    VerifyEncoding {
        /// Qubits of the encoded matrix (dimension 2^n)
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Scan the spectral gap and adiabatic criterion over the schedule
    GapScan {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 10.0)]
        kappa: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 101)]
        grid: usize,
        /// Write CSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare segmented vs monolithic circuit depth
    DepthReport {
        #[arg(long, default_value_t = 4)]
        dim: usize,
        #[arg(long, default_value_t = 2000)]
        steps: usize,
    },
    /// Aggregate a results CSV into plot data plus a rendering script
    Plot {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, default_value = "plots")]
        out_dir: PathBuf,
    },
}

fn load_instance(path: &PathBuf) -> Result<LinearSystemInstance> {
    let text = std::fs::read_to_string(path)?;
    let file: InstanceFile = serde_json::from_str(&text)?;
    LinearSystemInstance::from_json(&file)
}

fn cmd_solve(
    dim: usize,
    kappa: f64,
    seed: u64,
    steps: usize,
    dt: Option<f64>,
    engine: EngineArg,
    instance_path: Option<PathBuf>,
    noise: &NoiseArgs,
) -> Result<u8> {
    let instance = match &instance_path {
        Some(path) => load_instance(path)?,
        None => generate_instance(dim, kappa, seed)?,
    };
    let schedule = match dt {
        Some(dt) => Schedule::new(steps, dt)?,
        None => Schedule::balanced(steps)?,
    };
    let opts = SolveOptions {
        engine: engine.into(),
        noise: noise.to_config(),
        delta: DeltaPolicy::Auto,
        noise_seed: seed,
        keep_records: false,
    };
    let started = Instant::now();
    let trace = run_segmented_solve(&instance, &schedule, &opts)?;
    let elapsed = started.elapsed();
    let report = depth_report(&instance, &schedule);
    println!("dim: {}", instance.dim());
    println!("kappa: {:.6}", instance.kappa());
    println!("steps: {}", schedule.steps());
    println!("dt: {:.6e}", schedule.dt());
    println!("fidelity: {:.12}", trace.fidelity);
    println!("imag_residual: {:.6e}", trace.imag_residual);
    println!("truncation_accepted: {}", trace.truncation_accepted);
    println!("segment_depth: {}", report.segment_depth);
    println!("dynamic_total: {}", report.dynamic_total);
    println!("conventional_total: {}", report.conventional_total);
    eprintln!("solved in {} ms", elapsed.as_millis());
    if !trace.truncation_accepted {
        eprintln!(
            "truncation rejected (residual {:.3e} above threshold): \
             the evolution has not converged; retry with --steps {}",
            trace.imag_residual,
            2 * schedule.steps()
        );
        return Ok(2);
    }
    Ok(0)
}

fn cmd_sweep(config_path: &PathBuf, out: Option<PathBuf>) -> Result<u8> {
    let mut config = SweepConfig::from_json_file(config_path)?;
    if let Some(out) = out {
        config.output = out;
    }
    let started = Instant::now();
    let records = run_sweep(&config)?;
    write_csv(&records, &config.output)?;
    let failures = records.iter().filter(|r| r.status != "ok").count();
    eprintln!(
        "wrote {} records to {} in {} ms ({} non-ok)",
        records.len(),
        config.output.display(),
        started.elapsed().as_millis(),
        failures
    );
    Ok(0)
}

fn cmd_verify_encoding(n: usize, trials: usize, seed: u64) -> Result<u8> {
    use rand::{Rng, SeedableRng};
    let dim = 1usize << n;
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
    let mut worst_block = 0.0f64;
    let mut worst_unitarity = 0.0f64;
    for _ in 0..trials {
        let mut m = RealMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = rng.gen_range(-1.0..1.0);
            }
        }
        let op = assemble_ua(&m)?;
        let block = extract_encoded_block(&op)?;
        for i in 0..dim {
            for j in 0..dim {
                let err = (block[(i, j)]
                    - num_complex::Complex64::new(m[(i, j)] * op.alpha(), 0.0))
                .norm();
                worst_block = worst_block.max(err);
            }
        }
        let u = dense_unitary(&op)?;
        let defect = u
            .adjoint()
            .mul(&u)
            .sub(&ComplexMatrix::identity(u.rows()))
            .max_abs();
        worst_unitarity = worst_unitarity.max(defect);
    }
    println!("trials: {trials}");
    println!("n: {n}");
    println!("max_block_error: {worst_block:.3e}");
    println!("max_unitarity_defect: {worst_unitarity:.3e}");
    if worst_block < 1e-10 && worst_unitarity < 1e-10 {
        println!("verdict: PASS");
        Ok(0)
    } else {
        println!("verdict: FAIL");
        Ok(1)
    }
}

fn cmd_gap_scan(dim: usize, kappa: f64, seed: u64, grid: usize, out: Option<PathBuf>) -> Result<u8> {
    let instance = generate_instance(dim, kappa, seed)?;
    let pair = HamiltonianPair::from_instance(&instance)?;
    let points = gap_scan(&pair, grid)?;
    let mut text = String::from("s,gap,criterion,degenerate\n");
    for p in &points {
        text.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{}\n",
            p.s, p.gap, p.criterion, p.degenerate
        ));
    }
    match out {
        Some(path) => {
            std::fs::write(&path, text)?;
            eprintln!("wrote {} points to {}", points.len(), path.display());
        }
        None => print!("{text}"),
    }
    Ok(0)
}

fn cmd_depth_report(dim: usize, steps: usize) -> Result<u8> {
    let instance = generate_instance(dim, 10.0, 1)?;
    let schedule = Schedule::balanced(steps)?;
    let report = depth_report(&instance, &schedule);
    println!("dim: {dim}");
    println!("steps: {steps}");
    println!("segment_depth: {}", report.segment_depth);
    println!("dynamic_total: {}", report.dynamic_total);
    println!("conventional_total: {}", report.conventional_total);
    println!(
        "depth_ratio: {:.1}",
        report.conventional_total as f64 / report.dynamic_total as f64
    );
    Ok(0)
}

fn cmd_plot(csv: &PathBuf, out_dir: &PathBuf) -> Result<u8> {
    let written = emit_plots(csv, out_dir)?;
    for path in &written {
        eprintln!("wrote {}", path.display());
    }
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Solve { dim, kappa, seed, steps, dt, engine, instance, noise } => {
            cmd_solve(dim, kappa, seed, steps, dt, engine, instance, &noise)
        }
        Command::Sweep { config, out } => cmd_sweep(&config, out),
        Command::VerifyEncoding { n, trials, seed } => cmd_verify_encoding(n, trials, seed),
        Command::GapScan { dim, kappa, seed, grid, out } => {
            cmd_gap_scan(dim, kappa, seed, grid, out)
        }
        Command::DepthReport { dim, steps } => cmd_depth_report(dim, steps),
        Command::Plot { csv, out_dir } => cmd_plot(&csv, &out_dir),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
