//! Experiment configuration and the pipelines behind each study: training,
//! architecture sweeps, SNR statistics, threshold calibration, ROC sweeps
//! over pilot length, user count and cluster size, and the robustness runs.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::airlink::{snr_per_device, snr_target};
use crate::channel::{FadingMode, PathLossModel};
use crate::dataset::{
    fit_scaler, generate_dataset, ApPolicy, Dataset, SlotRange, EVAL_SLOT_OFFSET,
};
use crate::detect::{
    calibrate_threshold, fused_scores, roc, roc_exact, select_cluster, Calibration, RocCurve,
};
use crate::dmlp::{
    init_model, train, EpochStats, MlpArchitecture, MlpModel, Reduction, TrainConfig, TrainOutcome,
    TrainingSet,
};
use crate::error::{Error, Result};
use crate::numerics::SeededRng;
use crate::robustness::{perturb_dataset, quantize_dataset, FixedPointFormat};
use crate::scenario::{Seeds, System, SystemConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScenarioPreset {
    #[serde(rename = "scenario-1")]
    ScenarioOne,
    #[serde(rename = "scenario-2-like")]
    ScenarioTwoLike,
    /// Scenario-1 values as a starting point for a fully overridden setup.
    #[serde(rename = "custom")]
    Custom,
}

impl std::str::FromStr for ScenarioPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scenario-1" => Ok(Self::ScenarioOne),
            "scenario-2-like" => Ok(Self::ScenarioTwoLike),
            "custom" => Ok(Self::Custom),
            other => Err(Error::config(
                "scenario",
                format!("unknown preset `{other}`"),
            )),
        }
    }
}

/// Flat experiment description; every key is optional in the JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioPreset,

    pub area_side_m: Option<f64>,
    pub num_aps: Option<usize>,
    pub num_users: Option<usize>,
    pub antennas: Option<usize>,
    pub pilot_length: Option<usize>,
    pub epsilon: Option<f64>,
    pub tx_power_w: Option<f64>,
    pub noise_power_dbm: Option<f64>,
    pub shadow_std_db: Option<f64>,
    pub carrier_freq_hz: Option<f64>,
    pub edge_distance_m: Option<f64>,
    pub min_ue_ap_distance_m: Option<f64>,
    pub min_ap_ap_distance_m: Option<f64>,
    pub ap_height_m: Option<f64>,
    pub ue_height_m: Option<f64>,
    pub fading: Option<FadingMode>,

    pub seed_topology: u64,
    pub seed_channel: u64,
    pub seed_pilots: u64,
    pub seed_activity: u64,
    pub seed_noise: u64,
    pub seed_init: u64,

    pub ap_policy: ApPolicy,
    pub train_samples: usize,
    pub eval_slots: usize,
    pub validation_fraction: f64,

    pub hidden_layers: usize,
    pub hidden_width: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub min_delta: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_epsilon: f64,
    pub loss_reduction: Reduction,

    pub tau: f64,
    pub tau_step: f64,
    pub coverage: f64,
    pub snr_drops: usize,

    pub pilot_lengths: Vec<usize>,
    pub user_counts: Vec<usize>,
    pub cluster_sizes: Vec<usize>,
    pub epsilons: Vec<f64>,
    pub thetas: Vec<f64>,
    pub formats: Vec<FixedPointFormat>,
    pub pareto_layers: Vec<usize>,
    pub pareto_widths: Vec<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let seeds = Seeds::default();
        let train = TrainConfig::default();
        let fmt = |w, f| FixedPointFormat::new(w, f).expect("valid format");
        Self {
            scenario: ScenarioPreset::ScenarioOne,
            area_side_m: None,
            num_aps: None,
            num_users: None,
            antennas: None,
            pilot_length: None,
            epsilon: None,
            tx_power_w: None,
            noise_power_dbm: None,
            shadow_std_db: None,
            carrier_freq_hz: None,
            edge_distance_m: None,
            min_ue_ap_distance_m: None,
            min_ap_ap_distance_m: None,
            ap_height_m: None,
            ue_height_m: None,
            fading: None,
            seed_topology: seeds.topology,
            seed_channel: seeds.channel,
            seed_pilots: seeds.pilots,
            seed_activity: seeds.activity,
            seed_noise: seeds.noise,
            seed_init: seeds.init,
            ap_policy: ApPolicy::UniformRandomAp,
            train_samples: 30_000,
            eval_slots: 3_000,
            validation_fraction: 0.1,
            hidden_layers: 2,
            hidden_width: 320,
            learning_rate: train.learning_rate,
            batch_size: train.batch_size,
            max_epochs: train.max_epochs,
            patience: train.patience,
            min_delta: train.min_delta,
            beta1: train.beta1,
            beta2: train.beta2,
            adam_epsilon: train.adam_epsilon,
            loss_reduction: train.loss_reduction,
            tau: 0.5,
            tau_step: 0.01,
            coverage: 0.95,
            snr_drops: 10,
            pilot_lengths: vec![20, 40, 60],
            user_counts: vec![50, 100, 200],
            cluster_sizes: vec![1, 2, 3, 4, 5],
            epsilons: vec![0.05, 0.1, 0.2],
            thetas: vec![0.0, 0.1, 0.2, 0.3, 0.5],
            formats: vec![fmt(16, 2), fmt(18, 4), fmt(20, 6), fmt(22, 8)],
            pareto_layers: vec![2, 3, 4],
            pareto_widths: vec![64, 128, 160, 256, 320, 512, 640, 1024, 1280, 2048],
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| Error::config("config", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.system_config()?.validate()?;
        self.train_config().validate()?;
        if self.train_samples < 2 {
            return Err(Error::config("train_samples", "need at least 2 samples"));
        }
        if self.eval_slots == 0 {
            return Err(Error::config("eval_slots", "must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return Err(Error::config("validation_fraction", "must lie in [0, 1)"));
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(Error::config("tau", "must lie in [0, 1]"));
        }
        if !(self.tau_step > 0.0 && self.tau_step <= 0.5) {
            return Err(Error::config("tau_step", "must lie in (0, 0.5]"));
        }
        if !(self.coverage > 0.0 && self.coverage < 1.0) {
            return Err(Error::config("coverage", "must lie in (0, 1)"));
        }
        if self.hidden_layers == 0 || self.hidden_width == 0 {
            return Err(Error::config(
                "hidden_layers",
                "architecture needs Z >= 1 and V >= 1",
            ));
        }
        if let Some(e) = self.epsilons.iter().find(|e| !(0.0..=1.0).contains(*e)) {
            return Err(Error::config("epsilons", format!("{e} outside [0, 1]")));
        }
        if let Some(t) = self.thetas.iter().find(|t| !(0.0..=1.0).contains(*t)) {
            return Err(Error::config("thetas", format!("{t} outside [0, 1]")));
        }
        Ok(())
    }

    pub fn seeds(&self) -> Seeds {
        Seeds {
            topology: self.seed_topology,
            channel: self.seed_channel,
            pilots: self.seed_pilots,
            activity: self.seed_activity,
            noise: self.seed_noise,
            init: self.seed_init,
        }
    }

    pub fn system_config(&self) -> Result<SystemConfig> {
        let mut sys = match self.scenario {
            ScenarioPreset::ScenarioOne | ScenarioPreset::Custom => SystemConfig::scenario_one(),
            ScenarioPreset::ScenarioTwoLike => SystemConfig::scenario_two_like(),
        };
        let topo = &mut sys.topology;
        macro_rules! set {
            ($dst:expr, $src:expr) => {
                if let Some(v) = $src {
                    $dst = v;
                }
            };
        }
        set!(topo.area_side_m, self.area_side_m);
        set!(topo.num_aps, self.num_aps);
        set!(topo.num_users, self.num_users);
        set!(topo.edge_distance_m, self.edge_distance_m);
        set!(topo.min_ue_ap_distance_m, self.min_ue_ap_distance_m);
        set!(topo.min_ap_ap_distance_m, self.min_ap_ap_distance_m);
        set!(topo.ap_height_m, self.ap_height_m);
        set!(topo.ue_height_m, self.ue_height_m);
        let (h_ap, h_ue) = (topo.ap_height_m, topo.ue_height_m);
        match &mut sys.path_loss {
            PathLossModel::UmaLos(p) => {
                set!(p.shadow_std_db, self.shadow_std_db);
                set!(p.carrier_freq_hz, self.carrier_freq_hz);
                p.ap_height_m = h_ap;
                p.ue_height_m = h_ue;
            }
            PathLossModel::LogDistance {
                shadow_std_db,
                ap_height_m,
                ue_height_m,
                ..
            } => {
                set!(*shadow_std_db, self.shadow_std_db);
                *ap_height_m = h_ap;
                *ue_height_m = h_ue;
                if self.carrier_freq_hz.is_some() {
                    return Err(Error::config(
                        "carrier_freq_hz",
                        "the log-distance model has no carrier frequency",
                    ));
                }
            }
        }
        set!(sys.antennas, self.antennas);
        set!(sys.pilot_length, self.pilot_length);
        set!(sys.epsilon, self.epsilon);
        set!(sys.tx_power_w, self.tx_power_w);
        set!(sys.noise_power_dbm, self.noise_power_dbm);
        set!(sys.fading, self.fading);
        Ok(sys)
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            max_epochs: self.max_epochs,
            patience: self.patience,
            min_delta: self.min_delta,
            beta1: self.beta1,
            beta2: self.beta2,
            adam_epsilon: self.adam_epsilon,
            init_seed: self.seed_init,
            loss_reduction: self.loss_reduction,
        }
    }

    pub fn realize(&self) -> Result<System> {
        System::realize(&self.system_config()?, self.seeds())
    }
}

fn slots_for(samples: usize, policy: ApPolicy, num_aps: usize) -> usize {
    match policy {
        ApPolicy::AllAps => samples.div_ceil(num_aps),
        _ => samples,
    }
}

/// Training set of `cfg.train_samples` samples, slots `0..`.
pub fn training_dataset(system: &System, cfg: &ExperimentConfig) -> Result<Dataset> {
    let slots = slots_for(cfg.train_samples, cfg.ap_policy, system.config.num_aps());
    generate_dataset(system, SlotRange::new(0, slots), cfg.ap_policy)
}

/// Held-out slots disjoint from every training slot.
pub fn evaluation_dataset(
    system: &System,
    cfg: &ExperimentConfig,
    policy: ApPolicy,
) -> Result<Dataset> {
    generate_dataset(
        system,
        SlotRange::new(EVAL_SLOT_OFFSET, cfg.eval_slots),
        policy,
    )
}

/// Splits by slot, fits the scaler on the training part, and trains a
/// `hidden_layers x hidden_width` detector.
pub fn train_on_dataset(
    dataset: &Dataset,
    cfg: &ExperimentConfig,
    hidden_layers: usize,
    hidden_width: usize,
) -> Result<TrainOutcome> {
    let h = &dataset.header;
    let arch = MlpArchitecture::for_system(
        h.num_users as usize,
        h.pilot_length as usize,
        h.antennas as usize,
        hidden_layers,
        hidden_width,
    );
    let (train_idx, val_idx) =
        dataset.split_by_slot(cfg.validation_fraction, &SeededRng::new(cfg.seed_init));
    let scaler = fit_scaler(
        train_idx
            .iter()
            .map(|&i| dataset.samples[i].features.as_slice()),
    )?;
    let train_set =
        TrainingSet::from_samples(train_idx.iter().map(|&i| &dataset.samples[i]), &scaler)?;
    let val_set = TrainingSet::from_samples(val_idx.iter().map(|&i| &dataset.samples[i]), &scaler)?;
    let model = init_model(arch, scaler, &SeededRng::new(cfg.seed_init))?;
    let val = (!val_set.is_empty()).then_some(&val_set);
    train(model, &train_set, val, &cfg.train_config())
}

/// Generates the training set for `system` and trains the configured detector.
pub fn train_detector(system: &System, cfg: &ExperimentConfig) -> Result<TrainOutcome> {
    train_on_dataset(
        &training_dataset(system, cfg)?,
        cfg,
        cfg.hidden_layers,
        cfg.hidden_width,
    )
}

/// Flattened `(score, label)` pairs, one per sample and device.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Scores {
    pub scores: Vec<f64>,
    pub truth: Vec<bool>,
}

impl Scores {
    pub fn auc(&self) -> Result<f64> {
        Ok(roc_exact(&self.scores, &self.truth)?.auc)
    }
}

fn raw_features(dataset: &Dataset) -> Vec<f64> {
    dataset
        .samples
        .iter()
        .flat_map(|s| s.features.iter().map(|&v| f64::from(v)))
        .collect()
}

pub fn score_dataset(model: &MlpModel, dataset: &Dataset) -> Result<Scores> {
    if dataset.feature_len() != model.arch.input_dim || dataset.num_users() != model.arch.output_dim
    {
        return Err(Error::Shape(format!(
            "dataset is {}->{}, model is {}->{}",
            dataset.feature_len(),
            dataset.num_users(),
            model.arch.input_dim,
            model.arch.output_dim
        )));
    }
    Ok(Scores {
        scores: model.predict_rows(&raw_features(dataset))?,
        truth: dataset
            .samples
            .iter()
            .flat_map(|s| s.labels.iter().copied())
            .collect(),
    })
}

/// Fused scores for a random cluster of `size` APs per slot, from an
/// `all-aps` dataset. Thresholding them equals majority fusion of the
/// per-AP hard decisions.
pub fn cluster_scores_all_aps(
    model: &MlpModel,
    all_aps: &Dataset,
    size: usize,
    rng: &SeededRng,
) -> Result<Scores> {
    let m = all_aps.header.num_aps as usize;
    if !all_aps.len().is_multiple_of(m) {
        return Err(Error::Shape(
            "dataset is not one sample per AP per slot".into(),
        ));
    }
    let per_sample = score_dataset(model, all_aps)?;
    let k = all_aps.num_users();
    let mut out = Scores::default();
    for (slot_idx, group) in all_aps.samples.chunks(m).enumerate() {
        let slot = group[0].slot;
        if group
            .iter()
            .enumerate()
            .any(|(i, s)| s.slot != slot || s.ap_index as usize != i)
        {
            return Err(Error::Shape(format!(
                "slot {slot} is not laid out AP by AP"
            )));
        }
        let cluster = select_cluster(m, size, &mut rng.split_indexed("slot", slot))?;
        let rows: Vec<Vec<f64>> = cluster
            .ap_ids()
            .iter()
            .map(|&ap| {
                let start = (slot_idx * m + ap) * k;
                per_sample.scores[start..start + k].to_vec()
            })
            .collect();
        out.scores.extend(fused_scores(&rows)?);
        out.truth.extend_from_slice(&group[0].labels);
    }
    Ok(out)
}

/// One point of a parameter sweep with its ROC.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub auc: f64,
    pub curve: RocCurve,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    /// Column name of the swept parameter, with its unit.
    pub parameter: &'static str,
    pub points: Vec<SweepPoint>,
}

impl Sweep {
    /// `<parameter>,auc`.
    pub fn summary_csv(&self) -> String {
        let mut out = format!("{},auc\n", self.parameter);
        for p in &self.points {
            let _ = writeln!(out, "{},{}", p.value, p.auc);
        }
        out
    }

    /// `<parameter>,tau,fpr,tpr`.
    pub fn curves_csv(&self) -> String {
        let mut out = format!("{},tau,fpr,tpr\n", self.parameter);
        for p in &self.points {
            for r in &p.curve.points {
                let _ = writeln!(out, "{},{},{},{}", p.value, r.tau, r.fpr, r.tpr);
            }
        }
        out
    }

    pub fn auc_at(&self, value: f64) -> Option<f64> {
        self.points.iter().find(|p| p.value == value).map(|p| p.auc)
    }
}

fn sweep_point(value: f64, scores: &Scores, step: f64) -> Result<SweepPoint> {
    Ok(SweepPoint {
        value,
        auc: scores.auc()?,
        curve: roc(&scores.scores, &scores.truth, step)?,
    })
}

/// Trained detector together with the deployment it belongs to.
pub struct Trained {
    pub system: System,
    pub model: MlpModel,
    /// Per-epoch losses; empty for a model loaded from disk.
    pub trace: Vec<EpochStats>,
}

impl Trained {
    pub fn fit(cfg: &ExperimentConfig) -> Result<Self> {
        let system = cfg.realize()?;
        let outcome = train_detector(&system, cfg)?;
        Ok(Self {
            system,
            model: outcome.model,
            trace: outcome.trace,
        })
    }

    /// Pairs a saved model with the deployment described by `cfg`.
    pub fn with_model(cfg: &ExperimentConfig, model: MlpModel) -> Result<Self> {
        let system = cfg.realize()?;
        let c = &system.config;
        if model.arch.input_dim != c.feature_len() || model.arch.output_dim != c.num_users() {
            return Err(Error::Shape(format!(
                "model is {}->{}, configured system needs {}->{}",
                model.arch.input_dim,
                model.arch.output_dim,
                c.feature_len(),
                c.num_users()
            )));
        }
        Ok(Self {
            system,
            model,
            trace: Vec::new(),
        })
    }

    pub fn model(&self) -> &MlpModel {
        &self.model
    }

    pub fn evaluate(&self, cfg: &ExperimentConfig) -> Result<Scores> {
        score_dataset(
            self.model(),
            &evaluation_dataset(&self.system, cfg, cfg.ap_policy)?,
        )
    }
}

/// Retrains per pilot length; `reuse` supplies an already trained point.
pub fn sweep_pilot_length(cfg: &ExperimentConfig, reuse: Option<&Trained>) -> Result<Sweep> {
    sweep_retrained(
        cfg,
        "pilot_length_symbols",
        &cfg.pilot_lengths,
        reuse,
        |c, v| c.pilot_length = Some(v),
    )
}

/// Retrains per user count.
pub fn sweep_user_count(cfg: &ExperimentConfig, reuse: Option<&Trained>) -> Result<Sweep> {
    sweep_retrained(cfg, "num_users_count", &cfg.user_counts, reuse, |c, v| {
        c.num_users = Some(v)
    })
}

fn sweep_retrained(
    cfg: &ExperimentConfig,
    parameter: &'static str,
    values: &[usize],
    reuse: Option<&Trained>,
    apply: impl Fn(&mut ExperimentConfig, usize),
) -> Result<Sweep> {
    let mut points = Vec::new();
    for &v in values {
        let mut c = cfg.clone();
        apply(&mut c, v);
        let target = c.system_config()?;
        let reusable = reuse.filter(|t| t.system.config == target);
        let fresh;
        let trained = match reusable {
            Some(t) => t,
            None => {
                log::info!("{parameter} = {v}: training");
                fresh = Trained::fit(&c)?;
                &fresh
            }
        };
        points.push(sweep_point(v as f64, &trained.evaluate(&c)?, cfg.tau_step)?);
    }
    Ok(Sweep { parameter, points })
}

/// One shared detector, majority fusion over random clusters of each size.
pub fn sweep_cluster_size(cfg: &ExperimentConfig, trained: &Trained) -> Result<Sweep> {
    let all = evaluation_dataset(&trained.system, cfg, ApPolicy::AllAps)?;
    let rng = SeededRng::new(cfg.seed_activity).split("cluster");
    let mut points = Vec::new();
    for &t in &cfg.cluster_sizes {
        let scores = cluster_scores_all_aps(
            trained.model(),
            &all,
            t,
            &rng.split_indexed("size", t as u64),
        )?;
        points.push(sweep_point(t as f64, &scores, cfg.tau_step)?);
    }
    Ok(Sweep {
        parameter: "cluster_size_aps",
        points,
    })
}

/// Evaluation-set features perturbed with each factor in `cfg.thetas`.
pub fn sweep_perturbation(cfg: &ExperimentConfig, trained: &Trained) -> Result<Sweep> {
    let eval = evaluation_dataset(&trained.system, cfg, cfg.ap_policy)?;
    let rng = SeededRng::new(cfg.seed_noise).split("perturbation");
    let mut points = Vec::new();
    for (i, &theta) in cfg.thetas.iter().enumerate() {
        let noisy = perturb_dataset(&eval, theta, &rng.split_indexed("theta", i as u64))?;
        points.push(sweep_point(
            theta,
            &score_dataset(trained.model(), &noisy)?,
            cfg.tau_step,
        )?);
    }
    Ok(Sweep {
        parameter: "theta",
        points,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantPoint {
    pub format: FixedPointFormat,
    pub auc: f64,
    pub curve: RocCurve,
}

/// Evaluation-set features quantized to each format in `cfg.formats`
/// before standardization.
pub fn sweep_quantization(cfg: &ExperimentConfig, trained: &Trained) -> Result<Vec<QuantPoint>> {
    let eval = evaluation_dataset(&trained.system, cfg, cfg.ap_policy)?;
    cfg.formats
        .iter()
        .map(|&format| {
            let scores = score_dataset(trained.model(), &quantize_dataset(&eval, format))?;
            Ok(QuantPoint {
                format,
                auc: scores.auc()?,
                curve: roc(&scores.scores, &scores.truth, cfg.tau_step)?,
            })
        })
        .collect()
}

/// `format,word_length_bits,fractional_bits,auc`.
pub fn quantization_csv(points: &[QuantPoint]) -> String {
    let mut out = String::from("format,word_length_bits,fractional_bits,auc\n");
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            p.format,
            p.format.word_length(),
            p.format.fractional_bits(),
            p.auc
        );
    }
    out
}

/// `P_E(tau)` tables for every activation probability in `cfg.epsilons`.
pub fn threshold_sweep(cfg: &ExperimentConfig, scores: &Scores) -> Result<Vec<(f64, Calibration)>> {
    cfg.epsilons
        .iter()
        .map(|&eps| {
            Ok((
                eps,
                calibrate_threshold(&scores.scores, &scores.truth, eps, cfg.tau_step)?,
            ))
        })
        .collect()
}

/// `epsilon,tau,p_fa,p_md,p_e`.
pub fn threshold_sweep_csv(tables: &[(f64, Calibration)]) -> String {
    let mut out = String::from("epsilon,tau,p_fa,p_md,p_e\n");
    for (eps, cal) in tables {
        for p in &cal.table {
            let _ = writeln!(out, "{eps},{},{},{},{}", p.tau, p.p_fa, p.p_md, p.p_e);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParetoRow {
    pub hidden_layers: usize,
    pub hidden_width: usize,
    pub params: usize,
    pub best_train_loss: f64,
    pub best_val_loss: f64,
    pub efficient: bool,
}

/// Marks points not dominated in `(cost, loss)`: no other point is at
/// least as good in both and strictly better in one.
pub fn pareto_front(points: &[(usize, f64)]) -> Vec<bool> {
    points
        .iter()
        .map(|&(c, l)| {
            !points
                .iter()
                .any(|&(c2, l2)| c2 <= c && l2 <= l && (c2 < c || l2 < l))
        })
        .collect()
}

/// Trains every `(Z, V)` of the grid on one dataset.
pub fn pareto_sweep(cfg: &ExperimentConfig) -> Result<Vec<ParetoRow>> {
    let system = cfg.realize()?;
    let dataset = training_dataset(&system, cfg)?;
    let mut rows = Vec::new();
    for &z in &cfg.pareto_layers {
        for &v in &cfg.pareto_widths {
            log::info!("pareto point Z={z} V={v}");
            let out = train_on_dataset(&dataset, cfg, z, v)?;
            let best_train = out
                .trace
                .iter()
                .map(|s| s.train_loss)
                .fold(f64::INFINITY, f64::min);
            rows.push(ParetoRow {
                hidden_layers: z,
                hidden_width: v,
                params: out.model.arch.parameter_count(),
                best_train_loss: best_train,
                best_val_loss: out.best_val_loss,
                efficient: false,
            });
        }
    }
    let points: Vec<(usize, f64)> = rows.iter().map(|r| (r.params, r.best_train_loss)).collect();
    for (row, eff) in rows.iter_mut().zip(pareto_front(&points)) {
        row.efficient = eff;
    }
    Ok(rows)
}

/// `hidden_layers,hidden_width,params_count,best_train_loss,best_val_loss,pareto_efficient`.
pub fn pareto_csv(rows: &[ParetoRow]) -> String {
    let mut out = String::from(
        "hidden_layers,hidden_width,params_count,best_train_loss,best_val_loss,pareto_efficient\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.hidden_layers,
            r.hidden_width,
            r.params,
            r.best_train_loss,
            r.best_val_loss,
            r.efficient as u8
        );
    }
    out
}

/// Sorted dominant-AP SNRs over `drops` independent deployments plus the
/// coverage target.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrCdf {
    pub label: String,
    pub snr_db: Vec<f64>,
    pub target_db: f64,
    pub coverage: f64,
}

/// Drop `i` realizes the deployment with every seed offset by `i`.
pub fn snr_cdf(
    label: &str,
    system: &SystemConfig,
    seeds: Seeds,
    drops: usize,
    coverage: f64,
) -> Result<SnrCdf> {
    if drops == 0 {
        return Err(Error::config("snr_drops", "must be at least 1"));
    }
    let mut snr_db = Vec::new();
    for i in 0..drops as u64 {
        let s = Seeds {
            topology: seeds.topology.wrapping_add(i),
            channel: seeds.channel.wrapping_add(i),
            ..seeds
        };
        let sys = System::realize(system, s)?;
        snr_db.extend(snr_per_device(&sys.beta, &sys.power));
    }
    snr_db.sort_by(f64::total_cmp);
    let target_db = snr_target(&snr_db, coverage)?;
    Ok(SnrCdf {
        label: label.to_string(),
        snr_db,
        target_db,
        coverage,
    })
}

/// `scenario,snr_db,cdf_prob` for every curve.
pub fn snr_cdf_csv(curves: &[SnrCdf]) -> String {
    let mut out = String::from("scenario,snr_db,cdf_prob\n");
    for c in curves {
        let n = c.snr_db.len() as f64;
        for (i, s) in c.snr_db.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", c.label, s, (i + 1) as f64 / n);
        }
    }
    out
}

/// `scenario,coverage_prob,snr_target_db`.
pub fn snr_target_csv(curves: &[SnrCdf]) -> String {
    let mut out = String::from("scenario,coverage_prob,snr_target_db\n");
    for c in curves {
        let _ = writeln!(out, "{},{},{}", c.label, c.coverage, c.target_db);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_json() {
        let cfg = ExperimentConfig::default();
        let back = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
        let sparse =
            ExperimentConfig::from_json(r#"{"pilot_length": 20, "formats": ["12_4"]}"#).unwrap();
        assert_eq!(sparse.system_config().unwrap().pilot_length, 20);
        assert_eq!(sparse.formats[0].to_string(), "12_4");
    }

    #[test]
    fn config_errors_name_the_field() {
        match ExperimentConfig::from_json(r#"{"epsilon": 1.5}"#) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "epsilon"),
            other => panic!("{other:?}"),
        }
        match ExperimentConfig::from_json(r#"{"tau_step": 0}"#) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "tau_step"),
            other => panic!("{other:?}"),
        }
        assert!(ExperimentConfig::from_json(r#"{"no_such_key": 1}"#).is_err());
        let two = ExperimentConfig {
            scenario: ScenarioPreset::ScenarioTwoLike,
            carrier_freq_hz: Some(2e9),
            ..ExperimentConfig::default()
        };
        assert!(two.validate().is_err());
    }

    #[test]
    fn overrides_reach_both_geometry_and_path_loss() {
        let cfg = ExperimentConfig {
            ap_height_m: Some(20.0),
            shadow_std_db: Some(0.0),
            num_users: Some(7),
            ..ExperimentConfig::default()
        };
        let sys = cfg.system_config().unwrap();
        assert_eq!(sys.topology.ap_height_m, 20.0);
        assert_eq!(sys.num_users(), 7);
        match sys.path_loss {
            PathLossModel::UmaLos(p) => {
                assert_eq!(p.ap_height_m, 20.0);
                assert_eq!(p.shadow_std_db, 0.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn pareto_filter() {
        let pts = [(10, 0.5), (20, 0.4), (20, 0.6), (30, 0.4), (5, 0.9)];
        assert_eq!(pareto_front(&pts), vec![true, true, false, false, true]);
        let flags = pareto_front(&pts);
        for (i, &(c, l)) in pts.iter().enumerate().filter(|(i, _)| flags[*i]) {
            for (j, &(c2, l2)) in pts.iter().enumerate() {
                assert!(i == j || !(c2 <= c && l2 <= l && (c2 < c || l2 < l)));
            }
        }
    }

    #[test]
    fn single_link_snr_cdf_matches_closed_form() {
        let cfg = ExperimentConfig {
            num_aps: Some(1),
            num_users: Some(1),
            shadow_std_db: Some(0.0),
            ..ExperimentConfig::default()
        };
        let sys_cfg = cfg.system_config().unwrap();
        let cdf = snr_cdf("one", &sys_cfg, cfg.seeds(), 1, 0.95).unwrap();
        let sys = cfg.realize().unwrap();
        let d = sys.topology.ap_ue_distance(0, 0);
        let loss = sys_cfg.path_loss.mean_loss_db(d).unwrap();
        let expect = 10.0 * 0.2f64.log10() + 30.0 - loss - sys_cfg.noise_power_dbm;
        assert_eq!(cdf.snr_db.len(), 1);
        assert!((cdf.snr_db[0] - expect).abs() < 1e-9);
        assert!((cdf.target_db - expect).abs() < 1e-9);
    }

    fn tiny() -> ExperimentConfig {
        ExperimentConfig {
            num_aps: Some(4),
            num_users: Some(6),
            pilot_length: Some(4),
            train_samples: 300,
            eval_slots: 60,
            hidden_width: 16,
            max_epochs: 3,
            cluster_sizes: vec![1, 3, 4],
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn cluster_of_one_matches_plain_scoring() {
        let cfg = tiny();
        let trained = Trained::fit(&cfg).unwrap();
        let all = evaluation_dataset(&trained.system, &cfg, ApPolicy::AllAps).unwrap();
        let fused = cluster_scores_all_aps(trained.model(), &all, 1, &SeededRng::new(1)).unwrap();
        let plain = score_dataset(trained.model(), &all).unwrap();
        let k = 6;
        let rng = SeededRng::new(1);
        for (i, group) in all.samples.chunks(4).enumerate() {
            let ap = select_cluster(4, 1, &mut rng.split_indexed("slot", group[0].slot))
                .unwrap()
                .ap_ids()[0];
            let start = (i * 4 + ap) * k;
            assert_eq!(
                &fused.scores[i * k..(i + 1) * k],
                &plain.scores[start..start + k]
            );
        }
        let sweep = sweep_cluster_size(&cfg, &trained).unwrap();
        assert_eq!(sweep.points.len(), 3);
        assert!(sweep.summary_csv().starts_with("cluster_size_aps,auc\n"));
    }

    #[test]
    fn sweeps_produce_one_point_per_value() {
        let cfg = ExperimentConfig {
            pilot_lengths: vec![4, 6],
            thetas: vec![0.0, 0.5],
            ..tiny()
        };
        let trained = Trained::fit(&cfg).unwrap();
        let l = sweep_pilot_length(&cfg, Some(&trained)).unwrap();
        assert_eq!(l.points.len(), 2);
        let base = trained.evaluate(&cfg).unwrap().auc().unwrap();
        assert_eq!(l.auc_at(4.0), Some(base));
        let p = sweep_perturbation(&cfg, &trained).unwrap();
        assert_eq!(p.auc_at(0.0), Some(base));
        let q = sweep_quantization(&cfg, &trained).unwrap();
        assert_eq!(q.len(), 4);
        assert!(quantization_csv(&q)
            .starts_with("format,word_length_bits,fractional_bits,auc\n16_2,16,2,"));
        let tables = threshold_sweep(&cfg, &trained.evaluate(&cfg).unwrap()).unwrap();
        assert_eq!(tables.len(), 3);
        assert_eq!(threshold_sweep_csv(&tables).lines().count(), 1 + 3 * 101);
    }
}
