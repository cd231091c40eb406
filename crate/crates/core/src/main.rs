use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use esn_logic::experiment::{self, run_trial_detailed, write_sweep_csv, ExperimentConfig};
use esn_logic::io::NetworkDocument;
use esn_logic::tasks::{generate_streams, TaskKind, TaskSpec};
use esn_logic::teacher::{run_recovery_experiment, summarize, write_recovery_csv, RecoveryConfig};
use esn_logic::Result;

#[derive(Parser)]
#[command(name = "esn-logic", version, about = "Echo-state network logic: training, yield sweeps and fault recovery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every experiment; they override the config file.
#[derive(Args)]
struct Common {
    /// JSON experiment config
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    master_seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    task: Option<TaskKind>,
    #[arg(long)]
    k: Option<usize>,
    /// Disable temporal weight variation
    #[arg(long)]
    no_noise: bool,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.master_seed {
            cfg.master_seed = s;
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(n) = self.nodes {
            cfg.setup.network.nodes = n;
        }
        if let Some(kind) = self.task {
            cfg.setup.task.kind = kind;
            if let Some(k) = kind.fixed_inputs() {
                cfg.setup.task.k = k;
            }
        }
        if let Some(k) = self.k {
            cfg.setup.task.k = k;
        }
        if self.no_noise {
            cfg.setup.noise = None;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one trial and save the network with its readout
    Train {
        #[command(flatten)]
        common: Common,
        /// Trial seed (defaults to the master seed)
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Run the config's grid and write one CSV row per cell
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Joint 2-bit adder and multiplier yield
    AdderMult {
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        master_seed: u64,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Inject node faults and let the teacher detect and retrain
    FaultSim {
        #[command(flatten)]
        common: Common,
        /// Comma-separated fault sizes
        #[arg(long, value_delimiter = ',')]
        m: Option<Vec<usize>>,
        #[arg(long)]
        repeats: Option<usize>,
        #[arg(long)]
        t_fail: Option<usize>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Score a saved network on a fresh stream
    Eval {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        task: TaskKind,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 1000)]
        length: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = experiment::DEFAULT_WASHOUT)]
        washout: usize,
    },
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train { common, seed, out } => {
            let cfg = common.load()?;
            let outcome = run_trial_detailed(&cfg.setup, seed.unwrap_or(cfg.master_seed))?;
            eprintln!("tr = {} gr = {}", outcome.metrics.tr, outcome.metrics.gr);
            let doc = NetworkDocument::new(&outcome.network, &[outcome.readout]);
            let mut w = output(&out)?;
            writeln!(w, "{}", doc.to_json()?)?;
        }
        Command::Sweep { common, out } => {
            let cfg = common.load()?;
            let results = experiment::sweep(&cfg.setup, &cfg.grid, cfg.trials, cfg.master_seed)?;
            write_sweep_csv(&results, output(&out)?)?;
        }
        Command::AdderMult { trials, master_seed, out } => {
            let result = experiment::run_adder_multiplier(trials, master_seed)?;
            let p = result.probabilities;
            eprintln!("TP = {} GP = {} LP_joint = {} LP_product = {}", p.tp, p.gp, p.lp_joint, p.lp_product);
            write_sweep_csv(&[result], output(&out)?)?;
        }
        Command::FaultSim { common, m, repeats, t_fail, out } => {
            let mut cfg = common.load()?;
            if let Some(m) = m {
                cfg.recovery.m_values = m;
            }
            if let Some(r) = repeats {
                cfg.recovery.repeats = r;
            }
            if let Some(t) = t_fail {
                cfg.recovery.t_fail = t;
            }
            let records = run_recovery_experiment(&RecoveryConfig::from_experiment(&cfg))?;
            for s in summarize(&records) {
                eprintln!(
                    "m = {} detection = {} post-retrain LP = {} false alarms = {}",
                    s.m, s.detection_rate, s.post_retrain_lp, s.false_alarm_rate
                );
            }
            write_recovery_csv(&records, output(&out)?)?;
        }
        Command::Eval { network, task, k, length, seed, washout } => {
            let (mut net, readouts) = NetworkDocument::load(&network)?.into_parts()?;
            let k = task.fixed_inputs().or(k).unwrap_or(net.n_inputs());
            let streams = generate_streams(&TaskSpec::new(task, k, length, seed)?)?;
            let traj = net.run(&streams.inputs.to_real_rows(), washout)?;
            for (i, r) in readouts.iter().enumerate() {
                println!("readout {i}: accuracy {}", r.score(&traj, &streams.targets)?);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
