//! `gfra`: generates deployments and datasets, trains detectors, and runs
//! the evaluation studies, writing CSV artifacts to an output directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gfra_core::dataset::{read_dataset, write_dataset};
use gfra_core::detect::roc;
use gfra_core::dmlp::{load_model, save_model};
use gfra_core::experiment::{
    self, evaluation_dataset, pareto_csv, pareto_sweep, quantization_csv, score_dataset, snr_cdf,
    snr_cdf_csv, snr_target_csv, threshold_sweep, threshold_sweep_csv, train_on_dataset,
    training_dataset, ExperimentConfig, ScenarioPreset, Trained,
};
use gfra_core::io::write_text;
use gfra_core::robustness::FixedPointFormat;

#[derive(Parser)]
#[command(
    name = "gfra",
    version,
    about = "Grant-free activity detection experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Place APs and devices; writes topology.csv and large_scale.csv.
    GenTopology(Common),
    /// Generate a training or evaluation dataset file.
    GenDataset {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Split::Train)]
        split: Split,
        /// Also write the samples as CSV.
        #[arg(long)]
        csv: bool,
    },
    /// Train a detector; writes model.gfrm and loss_trace.csv.
    Train {
        #[command(flatten)]
        common: Common,
        /// Train on this dataset instead of generating one.
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Train every (Z, V) of the grid and mark the Pareto-efficient ones.
    Pareto(Common),
    /// Dominant-AP SNR distribution and coverage target.
    SnrCdf {
        #[command(flatten)]
        common: Common,
        /// Emit both presets with the same overrides instead of the configured one.
        #[arg(long)]
        both_presets: bool,
    },
    /// Error probability over the threshold grid for each activation probability.
    ThresholdSweep(ModelArgs),
    /// ROC curves, optionally swept over pilot length, user count or cluster size.
    Roc {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t = RocSweep::None)]
        sweep: RocSweep,
        /// Evaluate on this dataset file (no sweep only).
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// ROC and AUC under input perturbation for each factor.
    PerturbEval(ModelArgs),
    /// ROC and AUC with inputs quantized to each fixed-point format.
    QuantEval(ModelArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Split {
    Train,
    Eval,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RocSweep {
    None,
    PilotLength,
    Users,
    Cluster,
}

#[derive(Args)]
struct Common {
    /// JSON experiment file; absent keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// scenario-1, scenario-2-like or custom.
    #[arg(long)]
    scenario: Option<ScenarioPreset>,
    #[arg(long)]
    seed_topology: Option<u64>,
    #[arg(long)]
    seed_channel: Option<u64>,
    #[arg(long)]
    seed_pilots: Option<u64>,
    #[arg(long)]
    seed_activity: Option<u64>,
    #[arg(long)]
    seed_noise: Option<u64>,
    #[arg(long)]
    seed_init: Option<u64>,
    /// Pilot length; replaces the pilot-length sweep list.
    #[arg(long = "L")]
    pilot_length: Option<usize>,
    /// Number of devices; replaces the user-count sweep list.
    #[arg(long = "K")]
    num_users: Option<usize>,
    /// Cluster size; replaces the cluster-size sweep list.
    #[arg(long = "T")]
    cluster_size: Option<usize>,
    /// Perturbation factor; replaces the factor list.
    #[arg(long)]
    theta: Option<f64>,
    /// Fixed-point format `W_F`; replaces the format list.
    #[arg(long)]
    format: Option<FixedPointFormat>,
    #[arg(long)]
    tau_step: Option<f64>,
}

#[derive(Args)]
struct ModelArgs {
    #[command(flatten)]
    common: Common,
    /// Use this trained model instead of training one.
    #[arg(long)]
    model: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                serde_json::from_str(&text)
                    .with_context(|| format!("parsing {}", path.display()))?
            }
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.scenario {
            cfg.scenario = s;
        }
        let seeds = [
            (&mut cfg.seed_topology, self.seed_topology),
            (&mut cfg.seed_channel, self.seed_channel),
            (&mut cfg.seed_pilots, self.seed_pilots),
            (&mut cfg.seed_activity, self.seed_activity),
            (&mut cfg.seed_noise, self.seed_noise),
            (&mut cfg.seed_init, self.seed_init),
        ];
        for (dst, src) in seeds {
            if let Some(v) = src {
                *dst = v;
            }
        }
        if let Some(l) = self.pilot_length {
            cfg.pilot_length = Some(l);
            cfg.pilot_lengths = vec![l];
        }
        if let Some(k) = self.num_users {
            cfg.num_users = Some(k);
            cfg.user_counts = vec![k];
        }
        if let Some(t) = self.cluster_size {
            cfg.cluster_sizes = vec![t];
        }
        if let Some(theta) = self.theta {
            cfg.thetas = vec![theta];
        }
        if let Some(f) = self.format {
            cfg.formats = vec![f];
        }
        if let Some(step) = self.tau_step {
            cfg.tau_step = step;
        }
        cfg.validate()?;
        if let Some(l) = cfg.system_config()?.coherence_mismatch() {
            log::warn!("coherence block implies {l} pilot symbols");
        }
        Ok(cfg)
    }
}

impl ModelArgs {
    fn trained(&self, cfg: &ExperimentConfig) -> Result<Trained> {
        match &self.model {
            Some(path) => Ok(Trained::with_model(cfg, load_model(path)?)?),
            None => {
                log::info!("training detector");
                Ok(Trained::fit(cfg)?)
            }
        }
    }
}

fn out(dir: &Path, name: &str, text: &str) -> Result<()> {
    let path = dir.join(name);
    write_text(&path, text)?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn large_scale_csv(sys: &gfra_core::scenario::System) -> String {
    let mut s = String::from("ap_index,ue_index,distance_m,beta_db\n");
    let beta = &sys.beta;
    for m in 0..beta.num_aps() {
        for k in 0..beta.num_users() {
            let _ = writeln!(
                s,
                "{m},{k},{},{}",
                sys.topology.ap_ue_distance(m, k),
                beta.beta_db(m, k)
            );
        }
    }
    s
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenTopology(common) => {
            let cfg = common.load()?;
            let sys = cfg.realize()?;
            out(&common.out_dir, "topology.csv", &sys.topology.to_csv())?;
            out(&common.out_dir, "large_scale.csv", &large_scale_csv(&sys))?;
        }
        Command::GenDataset { common, split, csv } => {
            let cfg = common.load()?;
            let sys = cfg.realize()?;
            let (ds, name) = match split {
                Split::Train => (training_dataset(&sys, &cfg)?, "train"),
                Split::Eval => (evaluation_dataset(&sys, &cfg, cfg.ap_policy)?, "eval"),
            };
            let path = common.out_dir.join(format!("{name}.gfrd"));
            write_dataset(&path, &ds)?;
            log::info!("wrote {} ({} samples)", path.display(), ds.len());
            if csv {
                out(&common.out_dir, &format!("{name}.csv"), &ds.to_csv())?;
            }
        }
        Command::Train { common, dataset } => {
            let cfg = common.load()?;
            let ds = match dataset {
                Some(path) => read_dataset(&path)?,
                None => training_dataset(&cfg.realize()?, &cfg)?,
            };
            let outcome = train_on_dataset(&ds, &cfg, cfg.hidden_layers, cfg.hidden_width)?;
            log::info!(
                "best epoch {} with validation loss {:.6}",
                outcome.best_epoch,
                outcome.best_val_loss
            );
            let path = common.out_dir.join("model.gfrm");
            save_model(&path, &outcome.model)?;
            log::info!("wrote {}", path.display());
            out(&common.out_dir, "loss_trace.csv", &outcome.trace_csv())?;
        }
        Command::Pareto(common) => {
            let cfg = common.load()?;
            let rows = pareto_sweep(&cfg)?;
            out(&common.out_dir, "pareto.csv", &pareto_csv(&rows))?;
        }
        Command::SnrCdf {
            common,
            both_presets,
        } => {
            let cfg = common.load()?;
            let presets = if both_presets {
                vec![ScenarioPreset::ScenarioOne, ScenarioPreset::ScenarioTwoLike]
            } else {
                vec![cfg.scenario]
            };
            let mut curves = Vec::new();
            for preset in presets {
                let c = ExperimentConfig {
                    scenario: preset,
                    ..cfg.clone()
                };
                let label = serde_json::to_value(preset)?
                    .as_str()
                    .unwrap_or_default()
                    .to_string();
                curves.push(snr_cdf(
                    &label,
                    &c.system_config()?,
                    c.seeds(),
                    c.snr_drops,
                    c.coverage,
                )?);
            }
            out(&common.out_dir, "snr_cdf.csv", &snr_cdf_csv(&curves))?;
            out(&common.out_dir, "snr_target.csv", &snr_target_csv(&curves))?;
        }
        Command::ThresholdSweep(args) => {
            let cfg = args.common.load()?;
            let trained = args.trained(&cfg)?;
            let tables = threshold_sweep(&cfg, &trained.evaluate(&cfg)?)?;
            let mut best = String::from("epsilon,tau_star,p_e_min\n");
            for (eps, cal) in &tables {
                let _ = writeln!(best, "{eps},{},{}", cal.tau_star.value(), cal.min_error());
            }
            out(
                &args.common.out_dir,
                "threshold_sweep.csv",
                &threshold_sweep_csv(&tables),
            )?;
            out(&args.common.out_dir, "threshold_star.csv", &best)?;
        }
        Command::Roc {
            model,
            sweep,
            dataset,
        } => {
            let cfg = model.common.load()?;
            let dir = &model.common.out_dir;
            if dataset.is_some() && sweep != RocSweep::None {
                bail!("--dataset only applies without --sweep");
            }
            match sweep {
                RocSweep::None => {
                    let trained = model.trained(&cfg)?;
                    let scores = match dataset {
                        Some(path) => score_dataset(trained.model(), &read_dataset(&path)?)?,
                        None => trained.evaluate(&cfg)?,
                    };
                    let curve = roc(&scores.scores, &scores.truth, cfg.tau_step)?;
                    out(dir, "roc.csv", &curve.to_csv())?;
                    out(dir, "auc.csv", &format!("auc\n{}\n", scores.auc()?))?;
                }
                RocSweep::PilotLength | RocSweep::Users => {
                    if model.model.is_some() {
                        bail!("pilot-length and user sweeps retrain per point; drop --model");
                    }
                    let (s, name) = if sweep == RocSweep::PilotLength {
                        (experiment::sweep_pilot_length(&cfg, None)?, "pilot_length")
                    } else {
                        (experiment::sweep_user_count(&cfg, None)?, "users")
                    };
                    out(dir, &format!("roc_{name}.csv"), &s.curves_csv())?;
                    out(dir, &format!("auc_{name}.csv"), &s.summary_csv())?;
                }
                RocSweep::Cluster => {
                    let trained = model.trained(&cfg)?;
                    let s = experiment::sweep_cluster_size(&cfg, &trained)?;
                    out(dir, "roc_cluster.csv", &s.curves_csv())?;
                    out(dir, "auc_cluster.csv", &s.summary_csv())?;
                }
            }
        }
        Command::PerturbEval(args) => {
            let cfg = args.common.load()?;
            let trained = args.trained(&cfg)?;
            let s = experiment::sweep_perturbation(&cfg, &trained)?;
            out(
                &args.common.out_dir,
                "roc_perturbation.csv",
                &s.curves_csv(),
            )?;
            out(
                &args.common.out_dir,
                "auc_perturbation.csv",
                &s.summary_csv(),
            )?;
        }
        Command::QuantEval(args) => {
            let cfg = args.common.load()?;
            let trained = args.trained(&cfg)?;
            let points = experiment::sweep_quantization(&cfg, &trained)?;
            let mut curves = String::from("format,tau,fpr,tpr\n");
            for p in &points {
                for r in &p.curve.points {
                    let _ = writeln!(curves, "{},{},{},{}", p.format, r.tau, r.fpr, r.tpr);
                }
            }
            out(&args.common.out_dir, "roc_quantization.csv", &curves)?;
            out(
                &args.common.out_dir,
                "auc_quantization.csv",
                &quantization_csv(&points),
            )?;
        }
    }
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
