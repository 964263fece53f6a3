//! Predictive-performance, group-fairness and reconstruction measurements.
//!
//! A metric whose conditioning cell is empty (no positives in a group, say)
//! comes back with `well_defined = false` and a NaN value; callers exclude
//! such values from aggregation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dataset::{GroupAssignment, LabelVector};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricName {
    Auc,
    DpDif,
    EodDif,
    PeDif,
    EopDif,
    Reconstruction,
    Accuracy,
}

impl MetricName {
    pub const ALL: [MetricName; 7] = [
        MetricName::Auc,
        MetricName::DpDif,
        MetricName::EodDif,
        MetricName::PeDif,
        MetricName::EopDif,
        MetricName::Reconstruction,
        MetricName::Accuracy,
    ];

    /// Metrics recorded for every (model, test set) evaluation.
    pub const EVALUATION: [MetricName; 6] = [
        MetricName::Auc,
        MetricName::Accuracy,
        MetricName::DpDif,
        MetricName::EodDif,
        MetricName::PeDif,
        MetricName::EopDif,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MetricName::Auc => "auc",
            MetricName::DpDif => "dp_dif",
            MetricName::EodDif => "eod_dif",
            MetricName::PeDif => "pe_dif",
            MetricName::EopDif => "eop_dif",
            MetricName::Reconstruction => "reconstruction",
            MetricName::Accuracy => "accuracy",
        }
    }
}

impl fmt::Display for MetricName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MetricName::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| {
                let valid: Vec<&str> = MetricName::ALL.iter().map(|m| m.as_str()).collect();
                Error::validation(format!(
                    "unknown metric `{s}`; valid metrics: {}",
                    valid.join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    pub name: MetricName,
    #[serde(serialize_with = "nan_as_null", deserialize_with = "null_as_nan")]
    pub value: f64,
    pub well_defined: bool,
}

impl MetricValue {
    fn defined(name: MetricName, value: f64) -> Self {
        MetricValue {
            name,
            value,
            well_defined: true,
        }
    }

    fn undefined(name: MetricName) -> Self {
        MetricValue {
            name,
            value: f64::NAN,
            well_defined: false,
        }
    }

    fn from_option(name: MetricName, value: Option<f64>) -> Self {
        value.map_or(Self::undefined(name), |v| Self::defined(name, v))
    }
}

pub(crate) fn nan_as_null<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

pub(crate) fn null_as_nan<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

/// Confusion counts for one group.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn positives(&self) -> usize {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> usize {
        self.fp + self.tn
    }

    pub fn positive_rate(&self) -> Option<f64> {
        rate(self.tp + self.fp, self.total())
    }

    pub fn tpr(&self) -> Option<f64> {
        rate(self.tp, self.positives())
    }

    pub fn fpr(&self) -> Option<f64> {
        rate(self.fp, self.negatives())
    }

    pub fn fnr(&self) -> Option<f64> {
        rate(self.fn_, self.positives())
    }
}

fn rate(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Confusion counts indexed by group flag.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupConfusion {
    pub groups: [Confusion; 2],
}

impl GroupConfusion {
    pub fn unprotected(&self) -> &Confusion {
        &self.groups[0]
    }

    pub fn protected(&self) -> &Confusion {
        &self.groups[1]
    }

    fn gap(&self, f: impl Fn(&Confusion) -> Option<f64>) -> Option<f64> {
        Some((f(&self.groups[0])? - f(&self.groups[1])?).abs())
    }

    pub fn tpr_dif(&self) -> Option<f64> {
        self.gap(Confusion::tpr)
    }

    pub fn fpr_dif(&self) -> Option<f64> {
        self.gap(Confusion::fpr)
    }
}

fn same_len(what: &str, a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::validation(format!(
            "{what}: length mismatch ({a} vs {b})"
        )));
    }
    Ok(())
}

pub fn reconstruction_score(corrected: &LabelVector, original: &LabelVector) -> Result<MetricValue> {
    same_len("reconstruction_score", corrected.len(), original.len())?;
    let n = original.len();
    if n == 0 {
        return Ok(MetricValue::undefined(MetricName::Reconstruction));
    }
    let differ = corrected
        .as_slice()
        .iter()
        .zip(original.as_slice())
        .filter(|(a, b)| a != b)
        .count();
    Ok(MetricValue::defined(
        MetricName::Reconstruction,
        1.0 - differ as f64 / n as f64,
    ))
}

/// Fraction of predictions equal to the labels.
pub fn accuracy(pred: &LabelVector, labels: &LabelVector) -> Result<MetricValue> {
    let r = reconstruction_score(pred, labels)?;
    Ok(MetricValue {
        name: MetricName::Accuracy,
        ..r
    })
}

/// Rank-based area under the ROC curve with average ranks for ties.
pub fn auc(scores: &[f64], labels: &LabelVector) -> Result<MetricValue> {
    same_len("auc", scores.len(), labels.len())?;
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::validation(format!("auc: non-finite score at index {i}")));
    }
    let n_pos = labels.count_positive();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Ok(MetricValue::undefined(MetricName::Auc));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut pos_rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // 1-based ranks start+1 ..= end share their mean.
        let avg_rank = (start + 1 + end) as f64 / 2.0;
        let pos_in_run = order[start..end]
            .iter()
            .filter(|&&i| labels.get(i) == 1)
            .count();
        pos_rank_sum += avg_rank * pos_in_run as f64;
        start = end;
    }
    let u = pos_rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(MetricValue::defined(
        MetricName::Auc,
        u / (n_pos as f64 * n_neg as f64),
    ))
}

pub fn group_confusion(
    pred: &LabelVector,
    labels: &LabelVector,
    group: &GroupAssignment,
) -> Result<GroupConfusion> {
    same_len("group_confusion", pred.len(), labels.len())?;
    same_len("group_confusion", labels.len(), group.len())?;
    let mut gc = GroupConfusion::default();
    for i in 0..pred.len() {
        let c = &mut gc.groups[group.get(i) as usize];
        match (labels.get(i), pred.get(i)) {
            (1, 1) => c.tp += 1,
            (0, 1) => c.fp += 1,
            (0, _) => c.tn += 1,
            _ => c.fn_ += 1,
        }
    }
    Ok(gc)
}

/// Demographic parity difference.
pub fn dp_dif(pred: &LabelVector, group: &GroupAssignment) -> Result<MetricValue> {
    same_len("dp_dif", pred.len(), group.len())?;
    let mut counts = [[0usize; 2]; 2]; // [group][pred]
    for i in 0..pred.len() {
        counts[group.get(i) as usize][pred.get(i) as usize] += 1;
    }
    let pr = |g: usize| rate(counts[g][1], counts[g][0] + counts[g][1]);
    let gap = pr(0).zip(pr(1)).map(|(a, b)| (a - b).abs());
    Ok(MetricValue::from_option(MetricName::DpDif, gap))
}

/// Equalized odds difference: the larger of the TPR and FPR gaps.
pub fn eod_dif(pred: &LabelVector, labels: &LabelVector, group: &GroupAssignment) -> Result<MetricValue> {
    let gc = group_confusion(pred, labels, group)?;
    let v = gc.tpr_dif().zip(gc.fpr_dif()).map(|(t, f)| t.max(f));
    Ok(MetricValue::from_option(MetricName::EodDif, v))
}

/// Predictive equality difference: the FPR gap.
pub fn pe_dif(pred: &LabelVector, labels: &LabelVector, group: &GroupAssignment) -> Result<MetricValue> {
    let gc = group_confusion(pred, labels, group)?;
    Ok(MetricValue::from_option(MetricName::PeDif, gc.fpr_dif()))
}

/// Equal opportunity difference: the FNR gap.
pub fn eop_dif(pred: &LabelVector, labels: &LabelVector, group: &GroupAssignment) -> Result<MetricValue> {
    let gc = group_confusion(pred, labels, group)?;
    Ok(MetricValue::from_option(
        MetricName::EopDif,
        gc.gap(Confusion::fnr),
    ))
}

/// Thresholds scores: prediction is 1 iff score >= threshold.
pub fn predictions(scores: &[f64], threshold: f64) -> LabelVector {
    LabelVector::from_bools(scores.iter().map(|&s| s >= threshold))
}

/// The per-evaluation metric set, in [`MetricName::EVALUATION`] order.
pub fn evaluate(
    scores: &[f64],
    threshold: f64,
    labels: &LabelVector,
    group: &GroupAssignment,
) -> Result<Vec<MetricValue>> {
    let pred = predictions(scores, threshold);
    Ok(vec![
        auc(scores, labels)?,
        accuracy(&pred, labels)?,
        dp_dif(&pred, group)?,
        eod_dif(&pred, labels, group)?,
        pe_dif(&pred, labels, group)?,
        eop_dif(&pred, labels, group)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn lv(v: &[u8]) -> LabelVector {
        LabelVector::new(v.to_vec()).unwrap()
    }

    fn ga(v: &[u8]) -> GroupAssignment {
        GroupAssignment::new(v.to_vec()).unwrap()
    }

    #[test]
    fn reconstruction_hand_counts() {
        let a = lv(&[1, 1, 0, 0]);
        assert_eq!(reconstruction_score(&a, &a).unwrap().value, 1.0);
        assert_eq!(reconstruction_score(&lv(&[0, 0, 1, 1]), &a).unwrap().value, 0.0);
        assert_eq!(reconstruction_score(&a, &lv(&[1, 0, 0, 1])).unwrap().value, 0.5);
        assert!(reconstruction_score(&a, &lv(&[1])).is_err());
    }

    #[test]
    fn auc_extremes() {
        let y = lv(&[0, 0, 1, 1]);
        assert_eq!(auc(&[0.1, 0.2, 0.8, 0.9], &y).unwrap().value, 1.0);
        assert_eq!(auc(&[0.5; 4], &y).unwrap().value, 0.5);
        assert_eq!(auc(&[0.9, 0.8, 0.2, 0.1], &y).unwrap().value, 0.0);
        assert!(!auc(&[0.1, 0.2], &lv(&[1, 1])).unwrap().well_defined);
    }

    #[test]
    fn confusion_hand_tally() {
        let labels = lv(&[1, 1, 0, 0, 1, 0, 1, 0]);
        let pred = lv(&[1, 0, 1, 0, 1, 1, 0, 0]);
        let group = ga(&[0, 0, 0, 0, 1, 1, 1, 1]);
        let gc = group_confusion(&pred, &labels, &group).unwrap();
        let c0 = Confusion { tp: 1, fp: 1, tn: 1, fn_: 1 };
        let c1 = Confusion { tp: 1, fp: 1, tn: 1, fn_: 1 };
        assert_eq!(gc.groups, [c0, c1]);
        let inv = LabelVector::from_bools(labels.as_slice().iter().map(|&v| v == 0));
        let gc = group_confusion(&inv, &labels, &group).unwrap();
        assert!(gc.groups.iter().all(|c| c.tp == 0 && c.tn == 0));
        let gc = group_confusion(&labels, &labels, &group).unwrap();
        assert!(gc.groups.iter().all(|c| c.fp == 0 && c.fn_ == 0));
    }

    #[test]
    fn dp_arithmetic() {
        // Unprotected: 3 of 5 positive; protected: 7 of 20.
        let mut pred = vec![1, 1, 1, 0, 0];
        let mut group = vec![0; 5];
        pred.extend((0..20).map(|i| u8::from(i < 7)));
        group.extend([1; 20]);
        let v = dp_dif(&lv(&pred), &ga(&group)).unwrap();
        assert_abs_diff_eq!(v.value, 0.25, epsilon = 1e-12);
        let all = dp_dif(&lv(&[1, 1, 0, 0]), &ga(&[1, 1, 0, 0])).unwrap();
        assert_eq!(all.value, 1.0);
        assert!(!dp_dif(&lv(&[1, 0]), &ga(&[1, 1])).unwrap().well_defined);
    }

    #[test]
    fn eod_takes_the_max() {
        // g=0: TPR 1.0, FPR 0.5; g=1: TPR 0.8, FPR 0.0.
        let mut labels = vec![1, 1, 0, 0];
        let mut pred = vec![1, 1, 1, 0];
        let mut group = vec![0; 4];
        labels.extend([1, 1, 1, 1, 1, 0, 0]);
        pred.extend([1, 1, 1, 1, 0, 0, 0]);
        group.extend([1; 7]);
        let (p, y, g) = (lv(&pred), lv(&labels), ga(&group));
        assert_abs_diff_eq!(eod_dif(&p, &y, &g).unwrap().value, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(pe_dif(&p, &y, &g).unwrap().value, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(eop_dif(&p, &y, &g).unwrap().value, 0.2, epsilon = 1e-12);
    }

    #[test]
    fn pe_and_eop_edge_cases() {
        let y = lv(&[0, 0, 0, 0]);
        let g = ga(&[0, 0, 1, 1]);
        assert_eq!(pe_dif(&lv(&[1, 1, 0, 0]), &y, &g).unwrap().value, 1.0);
        assert!(!eop_dif(&lv(&[1, 1, 0, 0]), &y, &g).unwrap().well_defined);
        assert!(!eod_dif(&lv(&[1, 1, 0, 0]), &y, &g).unwrap().well_defined);
        // FNR 0.4 vs 0.1.
        let mut labels = vec![1; 10];
        let mut pred: Vec<u8> = (0..10).map(|i| u8::from(i >= 4)).collect();
        let mut group = vec![0; 10];
        labels.extend([1; 10]);
        pred.extend((0..10).map(|i| u8::from(i >= 1)));
        group.extend([1; 10]);
        let v = eop_dif(&lv(&pred), &lv(&labels), &ga(&group)).unwrap();
        assert_abs_diff_eq!(v.value, 0.3, epsilon = 1e-12);
    }

    #[test]
    fn undefined_values_serialize_as_null() {
        let v = MetricValue::undefined(MetricName::PeDif);
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"{"name":"pe_dif","value":null,"well_defined":false}"#);
        let back: MetricValue = serde_json::from_str(&s).unwrap();
        assert!(back.value.is_nan());
        assert!("bogus".parse::<MetricName>().unwrap_err().to_string().contains("pe_dif"));
    }

    fn instance() -> impl Strategy<Value = (Vec<u8>, Vec<u8>, Vec<u8>)> {
        (1usize..80).prop_flat_map(|n| {
            (
                proptest::collection::vec(0u8..2, n),
                proptest::collection::vec(0u8..2, n),
                proptest::collection::vec(0u8..2, n),
            )
        })
    }

    proptest! {
        #[test]
        fn group_metrics_ignore_group_encoding((p, y, g) in instance()) {
            let (p, y, g) = (lv(&p), lv(&y), ga(&g));
            let h = g.flipped();
            let same = |a: MetricValue, b: MetricValue| {
                a.well_defined == b.well_defined && (!a.well_defined || a.value == b.value)
            };
            prop_assert!(same(dp_dif(&p, &g).unwrap(), dp_dif(&p, &h).unwrap()));
            prop_assert!(same(eod_dif(&p, &y, &g).unwrap(), eod_dif(&p, &y, &h).unwrap()));
            prop_assert!(same(pe_dif(&p, &y, &g).unwrap(), pe_dif(&p, &y, &h).unwrap()));
            prop_assert!(same(eop_dif(&p, &y, &g).unwrap(), eop_dif(&p, &y, &h).unwrap()));
        }

        #[test]
        fn eop_is_tpr_gap_and_eod_dominates((p, y, g) in instance()) {
            let (p, y, g) = (lv(&p), lv(&y), ga(&g));
            let gc = group_confusion(&p, &y, &g).unwrap();
            let eop = eop_dif(&p, &y, &g).unwrap();
            if let Some(t) = gc.tpr_dif() {
                prop_assert!((eop.value - t).abs() < 1e-12);
            }
            let eod = eod_dif(&p, &y, &g).unwrap();
            let pe = pe_dif(&p, &y, &g).unwrap();
            if eod.well_defined {
                prop_assert!(eod.value >= pe.value);
                prop_assert!(eod.value >= gc.tpr_dif().unwrap());
                prop_assert!((0.0..=1.0).contains(&eod.value));
            }
        }

        #[test]
        fn auc_is_invariant_under_monotone_maps(
            rows in proptest::collection::vec((0.0f64..1.0, 0u8..2), 2..60),
        ) {
            let scores: Vec<f64> = rows.iter().map(|r| (r.0 * 8.0).round() / 8.0).collect();
            let y = lv(&rows.iter().map(|r| r.1).collect::<Vec<_>>());
            let a = auc(&scores, &y).unwrap();
            let mapped: Vec<f64> = scores.iter().map(|s| (3.0 * s).exp() - 5.0).collect();
            let b = auc(&mapped, &y).unwrap();
            prop_assert_eq!(a.well_defined, b.well_defined);
            if a.well_defined {
                prop_assert!((a.value - b.value).abs() < 1e-12);
                prop_assert!((0.0..=1.0).contains(&a.value));
            }
        }
    }
}
