//! Hard decisions, error statistics, ROC analysis and cluster majority fusion.
//!
//! A device is declared active when its score reaches the threshold
//! (`score >= tau`); the same inclusive convention is used for every rate.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::airlink::ReceivedSlot;
use crate::dataset::extract_features;
use crate::dmlp::MlpModel;
use crate::error::{Error, Result};
use crate::numerics::SeededRng;

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct DecisionThreshold(f64);

impl DecisionThreshold {
    pub const HALF: Self = Self(0.5);

    pub fn new(tau: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&tau) {
            Ok(Self(tau))
        } else {
            Err(Error::Domain(format!("threshold {tau} outside [0, 1]")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for DecisionThreshold {
    type Error = Error;

    fn try_from(tau: f64) -> Result<Self> {
        Self::new(tau)
    }
}

impl From<DecisionThreshold> for f64 {
    fn from(t: DecisionThreshold) -> f64 {
        t.0
    }
}

pub fn hard_decision(scores: &[f64], tau: DecisionThreshold) -> Vec<bool> {
    scores.iter().map(|&p| p >= tau.0).collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub true_pos: u64,
    pub false_pos: u64,
    pub true_neg: u64,
    pub false_neg: u64,
}

impl ConfusionCounts {
    pub fn tally(decided: &[bool], truth: &[bool]) -> Result<Self> {
        if decided.len() != truth.len() {
            return Err(Error::Shape(format!(
                "{} decisions for {} ground-truth entries",
                decided.len(),
                truth.len()
            )));
        }
        let mut c = Self::default();
        for (&d, &a) in decided.iter().zip(truth) {
            match (d, a) {
                (true, true) => c.true_pos += 1,
                (true, false) => c.false_pos += 1,
                (false, false) => c.true_neg += 1,
                (false, true) => c.false_neg += 1,
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> u64 {
        self.true_pos + self.false_pos + self.true_neg + self.false_neg
    }

    pub fn positives(&self) -> u64 {
        self.true_pos + self.false_neg
    }

    pub fn negatives(&self) -> u64 {
        self.false_pos + self.true_neg
    }

    pub fn merge(&mut self, other: &Self) {
        self.true_pos += other.true_pos;
        self.false_pos += other.false_pos;
        self.true_neg += other.true_neg;
        self.false_neg += other.false_neg;
    }
}

/// Empirical detection statistics. A rate whose conditioning class is empty
/// is `None` rather than zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub counts: ConfusionCounts,
    pub p_fa: Option<f64>,
    pub p_md: Option<f64>,
    pub p_error: Option<f64>,
    pub accuracy: f64,
    pub epsilon: f64,
}

impl DetectionReport {
    pub fn from_counts(counts: ConfusionCounts, epsilon: f64) -> Self {
        let ratio = |num: u64, den: u64| (den > 0).then(|| num as f64 / den as f64);
        let p_fa = ratio(counts.false_pos, counts.negatives());
        let p_md = ratio(counts.false_neg, counts.positives());
        let p_error = p_fa
            .zip(p_md)
            .map(|(fa, md)| error_probability(fa, md, epsilon));
        let accuracy = ratio(counts.true_pos + counts.true_neg, counts.total()).unwrap_or(f64::NAN);
        Self {
            counts,
            p_fa,
            p_md,
            p_error,
            accuracy,
            epsilon,
        }
    }

    /// `metric,value` rows; undefined rates are written as `undefined`.
    pub fn to_csv(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or_else(|| "undefined".to_string(), |v| v.to_string());
        let c = &self.counts;
        let mut out = String::from("metric,value\n");
        let _ = writeln!(out, "true_pos_count,{}", c.true_pos);
        let _ = writeln!(out, "false_pos_count,{}", c.false_pos);
        let _ = writeln!(out, "true_neg_count,{}", c.true_neg);
        let _ = writeln!(out, "false_neg_count,{}", c.false_neg);
        let _ = writeln!(out, "p_fa,{}", fmt(self.p_fa));
        let _ = writeln!(out, "p_md,{}", fmt(self.p_md));
        let _ = writeln!(out, "p_e,{}", fmt(self.p_error));
        let _ = writeln!(out, "accuracy_prob,{}", self.accuracy);
        let _ = writeln!(out, "epsilon_prob,{}", self.epsilon);
        out
    }
}

pub fn rates(decided: &[bool], truth: &[bool], epsilon: f64) -> Result<DetectionReport> {
    Ok(DetectionReport::from_counts(
        ConfusionCounts::tally(decided, truth)?,
        epsilon,
    ))
}

/// `(1 - eps) P_FA + eps P_MD`.
pub fn error_probability(p_fa: f64, p_md: f64, epsilon: f64) -> f64 {
    (1.0 - epsilon) * p_fa + epsilon * p_md
}

/// `{0, step, 2 step, ...}` capped by a final point at 1.
pub fn threshold_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 0.5) {
        return Err(Error::Domain(format!(
            "threshold grid step {step} outside (0, 0.5]"
        )));
    }
    let n = (1.0 / step).round();
    if ((n * step) - 1.0).abs() < 1e-9 {
        let n = n as usize;
        return Ok((0..=n).map(|i| i as f64 / n as f64).collect());
    }
    let mut grid: Vec<f64> = (0..)
        .map(|i| i as f64 * step)
        .take_while(|&t| t < 1.0)
        .collect();
    grid.push(1.0);
    Ok(grid)
}

/// Scores split by ground truth and sorted ascending, for counting how many
/// reach a threshold in `O(log n)`.
#[derive(Debug, Clone)]
struct ClassScores {
    active: Vec<f64>,
    inactive: Vec<f64>,
}

impl ClassScores {
    fn new(scores: &[f64], truth: &[bool]) -> Result<Self> {
        if scores.len() != truth.len() {
            return Err(Error::Shape(format!(
                "{} scores for {} labels",
                scores.len(),
                truth.len()
            )));
        }
        if let Some(bad) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(Error::Domain(format!("score {bad} outside [0, 1]")));
        }
        let mut active = Vec::new();
        let mut inactive = Vec::new();
        for (&s, &a) in scores.iter().zip(truth) {
            if a {
                active.push(s)
            } else {
                inactive.push(s)
            }
        }
        if active.is_empty() || inactive.is_empty() {
            return Err(Error::Undefined(format!(
                "ground truth has {} active and {} inactive entries; both classes are needed",
                active.len(),
                inactive.len()
            )));
        }
        active.sort_by(f64::total_cmp);
        inactive.sort_by(f64::total_cmp);
        Ok(Self { active, inactive })
    }

    fn at_least(sorted: &[f64], tau: f64) -> usize {
        sorted.len() - sorted.partition_point(|&s| s < tau)
    }

    /// `(P_FA, TPR)` at `tau`.
    fn rates_at(&self, tau: f64) -> (f64, f64) {
        (
            Self::at_least(&self.inactive, tau) as f64 / self.inactive.len() as f64,
            Self::at_least(&self.active, tau) as f64 / self.active.len() as f64,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPoint {
    pub tau: f64,
    pub p_fa: f64,
    pub p_md: f64,
    pub p_e: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub tau_star: DecisionThreshold,
    pub table: Vec<ThresholdPoint>,
}

impl Calibration {
    pub fn min_error(&self) -> f64 {
        self.table
            .iter()
            .find(|p| p.tau == self.tau_star.value())
            .map_or(f64::NAN, |p| p.p_e)
    }

    /// `tau,p_fa,p_md,p_e`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau,p_fa,p_md,p_e\n");
        for p in &self.table {
            let _ = writeln!(out, "{},{},{},{}", p.tau, p.p_fa, p.p_md, p.p_e);
        }
        out
    }
}

/// Grid search for the threshold minimizing `P_E(tau, epsilon)`; ties go to
/// the smallest threshold.
pub fn calibrate_threshold(
    scores: &[f64],
    truth: &[bool],
    epsilon: f64,
    step: f64,
) -> Result<Calibration> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::Domain(format!(
            "activation probability {epsilon} outside [0, 1]"
        )));
    }
    let classes = ClassScores::new(scores, truth)?;
    let table: Vec<ThresholdPoint> = threshold_grid(step)?
        .into_iter()
        .map(|tau| {
            let (p_fa, tpr) = classes.rates_at(tau);
            let p_md = 1.0 - tpr;
            ThresholdPoint {
                tau,
                p_fa,
                p_md,
                p_e: error_probability(p_fa, p_md, epsilon),
            }
        })
        .collect();
    let best = table
        .iter()
        .fold(&table[0], |best, p| if p.p_e < best.p_e { p } else { best });
    Ok(Calibration {
        tau_star: DecisionThreshold(best.tau),
        table,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub tau: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// Ordered by increasing threshold.
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

impl RocCurve {
    /// `tau,fpr,tpr`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau,fpr,tpr\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{},{}", p.tau, p.fpr, p.tpr);
        }
        out
    }
}

fn trapezoid_auc(points: &[RocPoint]) -> f64 {
    let mut sorted: Vec<(f64, f64)> = points.iter().map(|p| (p.fpr, p.tpr)).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    sorted
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum()
}

/// ROC sampled at the thresholds of a regular grid over `[0, 1]`.
pub fn roc(scores: &[f64], truth: &[bool], step: f64) -> Result<RocCurve> {
    let classes = ClassScores::new(scores, truth)?;
    let mut points: Vec<RocPoint> = threshold_grid(step)?
        .into_iter()
        .map(|tau| {
            let (fpr, tpr) = classes.rates_at(tau);
            RocPoint { tau, fpr, tpr }
        })
        .collect();
    let auc = {
        // Anchor the curve at the origin for scores that reach exactly 1.
        points.push(RocPoint {
            tau: f64::INFINITY,
            fpr: 0.0,
            tpr: 0.0,
        });
        let auc = trapezoid_auc(&points);
        points.pop();
        auc
    };
    Ok(RocCurve { points, auc })
}

/// ROC with a point at every distinct score, plus the origin (threshold
/// above every score). Its trapezoid area equals the probability that a
/// random active entry outscores a random inactive one, ties counting half.
pub fn roc_exact(scores: &[f64], truth: &[bool]) -> Result<RocCurve> {
    let classes = ClassScores::new(scores, truth)?;
    let mut thresholds: Vec<f64> = classes
        .active
        .iter()
        .chain(&classes.inactive)
        .copied()
        .collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();
    let mut points: Vec<RocPoint> = thresholds
        .into_iter()
        .map(|tau| {
            let (fpr, tpr) = classes.rates_at(tau);
            RocPoint { tau, fpr, tpr }
        })
        .collect();
    points.push(RocPoint {
        tau: f64::INFINITY,
        fpr: 0.0,
        tpr: 0.0,
    });
    let auc = trapezoid_auc(&points);
    Ok(RocCurve { points, auc })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterConfig {
    ap_ids: Vec<usize>,
}

impl ClusterConfig {
    pub fn new(ap_ids: Vec<usize>, num_aps: usize) -> Result<Self> {
        if ap_ids.is_empty() || ap_ids.len() > num_aps {
            return Err(Error::Domain(format!(
                "cluster size {} outside [1, {num_aps}]",
                ap_ids.len()
            )));
        }
        let mut seen = vec![false; num_aps];
        for &m in &ap_ids {
            if m >= num_aps || std::mem::replace(&mut seen[m], true) {
                return Err(Error::Domain(format!("AP {m} is out of range or repeated")));
            }
        }
        Ok(Self { ap_ids })
    }

    pub fn size(&self) -> usize {
        self.ap_ids.len()
    }

    pub fn ap_ids(&self) -> &[usize] {
        &self.ap_ids
    }
}

/// `size` distinct APs drawn uniformly without replacement.
pub fn select_cluster(num_aps: usize, size: usize, rng: &mut SeededRng) -> Result<ClusterConfig> {
    if size == 0 || size > num_aps {
        return Err(Error::Domain(format!(
            "cluster size {size} outside [1, {num_aps}]"
        )));
    }
    let mut ids: Vec<usize> = (0..num_aps).collect();
    for i in 0..size {
        let j = i + rng.below(num_aps - i);
        ids.swap(i, j);
    }
    ids.truncate(size);
    Ok(ClusterConfig { ap_ids: ids })
}

/// Votes needed for a fused "active": half of an even cluster, a strict
/// majority of an odd one. Both are `ceil(T / 2)`.
pub fn votes_needed(cluster_size: usize) -> usize {
    cluster_size.div_ceil(2)
}

/// Fuses `T` rows of per-device decisions.
pub fn majority_fuse(votes: &[Vec<bool>]) -> Result<Vec<bool>> {
    let first = votes
        .first()
        .ok_or_else(|| Error::Shape("no votes to fuse".into()))?;
    let k = first.len();
    if let Some(row) = votes.iter().find(|r| r.len() != k) {
        return Err(Error::Shape(format!(
            "vote rows of length {k} and {}",
            row.len()
        )));
    }
    let need = votes_needed(votes.len());
    Ok((0..k)
        .map(|i| votes.iter().filter(|r| r[i]).count() >= need)
        .collect())
}

/// Soft statistic whose thresholding reproduces majority fusion: the
/// `ceil(T/2)`-th largest per-AP score of each device. For any `tau`,
/// `hard_decision(fused_scores(s), tau) == majority_fuse(hard_decision(s_t, tau))`.
pub fn fused_scores(per_ap: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = per_ap
        .first()
        .ok_or_else(|| Error::Shape("no scores to fuse".into()))?;
    let k = first.len();
    if per_ap.iter().any(|r| r.len() != k) {
        return Err(Error::Shape("score rows differ in length".into()));
    }
    let need = votes_needed(per_ap.len());
    let mut column = Vec::with_capacity(per_ap.len());
    Ok((0..k)
        .map(|i| {
            column.clear();
            column.extend(per_ap.iter().map(|r| r[i]));
            column.sort_by(|a, b| b.total_cmp(a));
            column[need - 1]
        })
        .collect())
}

/// Per-AP activity probabilities for the cluster's observations; features
/// are divided by `amplitude_ref` as in the training data.
pub fn cluster_scores(
    model: &MlpModel,
    slot: &ReceivedSlot,
    cluster: &ClusterConfig,
    amplitude_ref: f64,
) -> Result<Vec<Vec<f64>>> {
    cluster
        .ap_ids()
        .iter()
        .map(|&m| {
            let y = slot
                .observation(m)
                .ok_or_else(|| Error::Shape(format!("slot has no observation from AP {m}")))?;
            let features: Vec<f64> = extract_features(y)
                .into_iter()
                .map(|v| f64::from((v / amplitude_ref) as f32))
                .collect();
            model.predict(&features)
        })
        .collect()
}

/// Per-AP detection followed by majority fusion.
pub fn cluster_detect(
    model: &MlpModel,
    slot: &ReceivedSlot,
    cluster: &ClusterConfig,
    tau: DecisionThreshold,
    amplitude_ref: f64,
) -> Result<Vec<bool>> {
    let votes: Vec<Vec<bool>> = cluster_scores(model, slot, cluster, amplitude_ref)?
        .iter()
        .map(|s| hard_decision(s, tau))
        .collect();
    majority_fuse(&votes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tau(t: f64) -> DecisionThreshold {
        DecisionThreshold::new(t).unwrap()
    }

    #[test]
    fn hard_decision_boundaries() {
        assert_eq!(hard_decision(&[0.0, 0.3, 1.0], tau(0.0)), vec![true; 3]);
        assert_eq!(
            hard_decision(&[0.49, 0.5, 0.51], tau(0.5)),
            vec![false, true, true]
        );
        assert_eq!(hard_decision(&[0.2, 0.999], tau(1.0)), vec![false; 2]);
        assert!(DecisionThreshold::new(1.5).is_err());
        assert!(DecisionThreshold::new(f64::NAN).is_err());
    }

    #[test]
    fn rate_examples() {
        let a = [true, false, false, true, false];
        let r = rates(&a, &a, 0.1).unwrap();
        assert_eq!((r.p_fa, r.p_md, r.accuracy), (Some(0.0), Some(0.0), 1.0));
        let not_a: Vec<bool> = a.iter().map(|b| !b).collect();
        let r = rates(&not_a, &a, 0.1).unwrap();
        assert_eq!((r.p_fa, r.p_md), (Some(1.0), Some(1.0)));

        let r = rates(
            &[false, true, false, false],
            &[true, false, false, false],
            0.1,
        )
        .unwrap();
        assert_eq!(r.p_md, Some(1.0));
        assert!((r.p_fa.unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.accuracy, 0.5);
        assert!(rates(&[true], &[true, false], 0.1).is_err());
    }

    #[test]
    fn undefined_rates_are_flagged() {
        let r = rates(&[false, true], &[false, false], 0.1).unwrap();
        assert_eq!(r.p_fa, Some(0.5));
        assert_eq!(r.p_md, None);
        assert_eq!(r.p_error, None);
        assert!(r.to_csv().contains("p_md,undefined"));
    }

    #[test]
    fn error_probability_examples() {
        assert_eq!(error_probability(0.02, 0.1, 0.0), 0.02);
        assert_eq!(error_probability(0.02, 0.1, 1.0), 0.1);
        assert!((error_probability(0.02, 0.1, 0.1) - 0.028).abs() < 1e-15);
    }

    #[test]
    fn grid_endpoints() {
        let g = threshold_grid(0.01).unwrap();
        assert_eq!(g.len(), 101);
        assert_eq!((g[0], g[40], g[100]), (0.0, 0.4, 1.0));
        assert_eq!(
            threshold_grid(0.3).unwrap(),
            vec![0.0, 0.3, 0.6, 0.8999999999999999, 1.0]
        );
        assert!(threshold_grid(0.0).is_err());
        assert!(threshold_grid(0.6).is_err());
    }

    #[test]
    fn calibration_degenerate_scores() {
        let truth = [true, false, false, true, false];
        let scores: Vec<f64> = truth.iter().map(|&a| a as u8 as f64).collect();
        let c = calibrate_threshold(&scores, &truth, 0.1, 0.01).unwrap();
        assert_eq!(c.tau_star.value(), 0.01);
        assert_eq!(c.min_error(), 0.0);
        assert_eq!(c.table[0].p_fa, 1.0);
    }

    #[test]
    fn calibration_separated_classes() {
        let mut rng = SeededRng::new(5);
        let mut scores = Vec::new();
        let mut truth = Vec::new();
        for _ in 0..2000 {
            let a = rng.bernoulli(0.1).unwrap();
            scores.push(if a {
                rng.uniform_range(0.6, 1.0)
            } else {
                rng.uniform_range(0.0, 0.4)
            });
            truth.push(a);
        }
        let c = calibrate_threshold(&scores, &truth, 0.1, 0.01).unwrap();
        assert_eq!(c.tau_star.value(), 0.4);
        assert_eq!(c.min_error(), 0.0);
        let at_half = c.table.iter().find(|p| p.tau == 0.5).unwrap().p_e;
        assert!(c.min_error() <= at_half);
        assert!(c.to_csv().starts_with("tau,p_fa,p_md,p_e\n"));
    }

    #[test]
    fn single_class_is_undefined() {
        assert!(matches!(
            roc(&[0.1, 0.2], &[false, false], 0.01),
            Err(Error::Undefined(_))
        ));
        assert!(matches!(
            roc_exact(&[0.1], &[true]),
            Err(Error::Undefined(_))
        ));
        assert!(calibrate_threshold(&[0.3], &[true], 0.1, 0.1).is_err());
    }

    fn pairwise_auc(scores: &[f64], truth: &[bool]) -> f64 {
        let (mut wins, mut pairs) = (0.0, 0.0);
        for (i, &si) in scores.iter().enumerate() {
            for (j, &sj) in scores.iter().enumerate() {
                if truth[i] && !truth[j] {
                    pairs += 1.0;
                    wins += if si > sj {
                        1.0
                    } else if si == sj {
                        0.5
                    } else {
                        0.0
                    };
                }
            }
        }
        wins / pairs
    }

    #[test]
    fn four_point_auc() {
        let scores = [0.1, 0.4, 0.35, 0.8];
        let truth = [false, false, true, true];
        assert_eq!(pairwise_auc(&scores, &truth), 0.75);
        assert!((roc_exact(&scores, &truth).unwrap().auc - 0.75).abs() < 1e-12);
        assert!((roc(&scores, &truth, 0.01).unwrap().auc - 0.75).abs() < 1e-12);
    }

    #[test]
    fn perfect_and_random_scores() {
        let truth = [true, false, true, false];
        assert_eq!(roc_exact(&[0.9, 0.1, 0.8, 0.2], &truth).unwrap().auc, 1.0);
        let mut rng = SeededRng::new(8);
        let n = 20_000;
        let scores: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
        let truth: Vec<bool> = (0..n).map(|_| rng.bernoulli(0.3).unwrap()).collect();
        assert!((roc_exact(&scores, &truth).unwrap().auc - 0.5).abs() < 0.01);
    }

    #[test]
    fn exact_auc_matches_pairwise_with_ties() {
        let mut rng = SeededRng::new(3);
        for _ in 0..20 {
            let n = 1 + rng.below(300);
            let scores: Vec<f64> = (0..n + 2)
                .map(|_| (rng.uniform() * 20.0).floor() / 20.0)
                .collect();
            let mut truth: Vec<bool> = (0..n + 2).map(|_| rng.bernoulli(0.4).unwrap()).collect();
            truth[0] = true;
            truth[1] = false;
            let curve = roc_exact(&scores, &truth).unwrap();
            assert!((curve.auc - pairwise_auc(&scores, &truth)).abs() < 1e-9);
            // The 0.05-lattice scores sit on the grid, so the grid curve is exact too.
            assert!((roc(&scores, &truth, 0.05).unwrap().auc - curve.auc).abs() < 1e-9);
        }
    }

    #[test]
    fn roc_is_monotone_and_anchored() {
        let mut rng = SeededRng::new(4);
        let scores: Vec<f64> = (0..500).map(|_| rng.uniform()).collect();
        let truth: Vec<bool> = scores.iter().map(|&s| rng.uniform() < s).collect();
        let c = roc(&scores, &truth, 0.01).unwrap();
        assert_eq!((c.points[0].fpr, c.points[0].tpr), (1.0, 1.0));
        for w in c.points.windows(2) {
            assert!(w[1].fpr <= w[0].fpr && w[1].tpr <= w[0].tpr);
        }
        assert!(c.to_csv().starts_with("tau,fpr,tpr\n0,1,1\n"));
    }

    #[test]
    fn cluster_selection() {
        let mut rng = SeededRng::new(1);
        let all = select_cluster(20, 20, &mut rng).unwrap();
        let mut ids = all.ap_ids().to_vec();
        ids.sort();
        assert_eq!(ids, (0..20).collect::<Vec<_>>());
        for _ in 0..100 {
            let c = select_cluster(20, 5, &mut rng).unwrap();
            assert!(ClusterConfig::new(c.ap_ids().to_vec(), 20).is_ok());
        }
        assert!(select_cluster(3, 4, &mut rng).is_err());
        assert!(select_cluster(3, 0, &mut rng).is_err());
        assert!(ClusterConfig::new(vec![1, 1], 3).is_err());
    }

    #[test]
    fn majority_rule_examples() {
        let col = |v: &[bool]| v.iter().map(|&b| vec![b]).collect::<Vec<_>>();
        assert_eq!(
            majority_fuse(&col(&[true, true, false, false])).unwrap(),
            vec![true]
        );
        assert_eq!(
            majority_fuse(&col(&[true, false, false])).unwrap(),
            vec![false]
        );
        assert_eq!(majority_fuse(&col(&[true])).unwrap(), vec![true]);
        assert!(majority_fuse(&[vec![true], vec![true, false]]).is_err());
        assert!(majority_fuse(&[]).is_err());
    }

    #[test]
    fn fused_scores_reproduce_majority_fusion() {
        let mut rng = SeededRng::new(6);
        for t in 1..=6 {
            let per_ap: Vec<Vec<f64>> = (0..t)
                .map(|_| {
                    (0..50)
                        .map(|_| (rng.uniform() * 10.0).round() / 10.0)
                        .collect()
                })
                .collect();
            let fused = fused_scores(&per_ap).unwrap();
            for step in 0..=10 {
                let th = tau(step as f64 / 10.0);
                let votes: Vec<Vec<bool>> = per_ap.iter().map(|s| hard_decision(s, th)).collect();
                assert_eq!(hard_decision(&fused, th), majority_fuse(&votes).unwrap());
            }
        }
    }
}
