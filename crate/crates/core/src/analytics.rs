//! Survey statistics: mean depth, path length, capacity and silting.
//!
//! Depths are centimetres throughout; [`capacity_estimate`] alone works in
//! metres, so callers convert explicitly.

use thiserror::Error;

use crate::logfmt::LogRecord;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticsError {
    #[error("no records to summarize")]
    Empty,
    #[error("records mix tests {0} and {1}")]
    MixedTests(u32, u32),
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurveySummary {
    pub test_id: u32,
    pub n_points: usize,
    pub avg_depth_cm: f64,
    pub min_depth_cm: u32,
    pub max_depth_cm: u32,
    /// Cumulative distance logged at the final setpoint.
    pub path_length_m: f64,
}

pub fn summarize(records: &[LogRecord]) -> Result<SurveySummary, AnalyticsError> {
    let first = records.first().ok_or(AnalyticsError::Empty)?;
    if let Some(other) = records.iter().find(|r| r.test_id != first.test_id) {
        return Err(AnalyticsError::MixedTests(first.test_id, other.test_id));
    }
    let sum: f64 = records.iter().map(|r| f64::from(r.depth_cm)).sum();
    let last = records
        .iter()
        .max_by_key(|r| r.setpoint)
        .expect("non-empty");
    Ok(SurveySummary {
        test_id: first.test_id,
        n_points: records.len(),
        avg_depth_cm: sum / records.len() as f64,
        min_depth_cm: records.iter().map(|r| r.depth_cm).min().expect("non-empty"),
        max_depth_cm: records.iter().map(|r| r.depth_cm).max().expect("non-empty"),
        path_length_m: last.dist_m,
    })
}

/// Splits a log into per-test groups, ordered by test id.
pub fn group_by_test(records: &[LogRecord]) -> Vec<(u32, Vec<LogRecord>)> {
    let mut groups: std::collections::BTreeMap<u32, Vec<LogRecord>> = Default::default();
    for r in records {
        groups.entry(r.test_id).or_default().push(*r);
    }
    groups.into_iter().collect()
}

/// Rectangular-basin volume in cubic metres.
pub fn capacity_estimate(
    length_m: f64,
    width_m: f64,
    avg_depth_m: f64,
) -> Result<f64, AnalyticsError> {
    for (name, value) in [
        ("length_m", length_m),
        ("width_m", width_m),
        ("avg_depth_m", avg_depth_m),
    ] {
        if !(value.is_finite() && value > 0.0) {
            return Err(AnalyticsError::NonPositive { name, value });
        }
    }
    Ok(length_m * width_m * avg_depth_m)
}

/// Relative loss of mean depth from `reference` to `newer`. Positive values
/// mean the basin got shallower.
pub fn silting_ratio(
    reference: &SurveySummary,
    newer: &SurveySummary,
) -> Result<f64, AnalyticsError> {
    if reference.avg_depth_cm.is_nan() || reference.avg_depth_cm <= 0.0 {
        return Err(AnalyticsError::NonPositive {
            name: "reference average depth",
            value: reference.avg_depth_cm,
        });
    }
    if newer.avg_depth_cm.is_nan() || newer.avg_depth_cm <= 0.0 {
        return Err(AnalyticsError::NonPositive {
            name: "newer average depth",
            value: newer.avg_depth_cm,
        });
    }
    Ok((reference.avg_depth_cm - newer.avg_depth_cm) / reference.avg_depth_cm)
}

/// `(setpoint, depth_cm)` pairs in setpoint order.
pub fn depth_profile(records: &[LogRecord]) -> Result<Vec<(u32, u32)>, AnalyticsError> {
    if records.is_empty() {
        return Err(AnalyticsError::Empty);
    }
    let mut series: Vec<(u32, u32)> = records.iter().map(|r| (r.setpoint, r.depth_cm)).collect();
    series.sort_by_key(|&(sp, _)| sp);
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn records(test_id: u32, depths: &[u32], dists: &[f64]) -> Vec<LogRecord> {
        depths
            .iter()
            .zip(dists)
            .zip(1..)
            .map(|((&d, &m), sp)| LogRecord::quantized(test_id, sp, 33.97, 71.44, d, m))
            .collect()
    }

    fn summary(avg: f64) -> SurveySummary {
        SurveySummary {
            test_id: 1,
            n_points: 1,
            avg_depth_cm: avg,
            min_depth_cm: 0,
            max_depth_cm: 0,
            path_length_m: 1.0,
        }
    }

    #[test]
    fn summarize_table3_tests() {
        let s = summarize(&records(1, &[17, 17, 18], &[4.50, 9.04, 13.64])).unwrap();
        // (17 + 17 + 18) / 3 = 52 / 3
        assert!((s.avg_depth_cm - 52.0 / 3.0).abs() < 1e-12);
        assert_eq!(format!("{:.2}", s.avg_depth_cm), "17.33");
        assert_eq!(s.path_length_m, 13.64);
        assert_eq!((s.min_depth_cm, s.max_depth_cm), (17, 18));

        let s = summarize(&records(
            3,
            &[346, 345, 359, 374, 382, 380],
            &[5.01, 10.25, 15.52, 22.67, 30.01, 36.94],
        ))
        .unwrap();
        // 2186 / 6
        assert!((s.avg_depth_cm - 2186.0 / 6.0).abs() < 1e-12);
        assert_eq!(format!("{:.2}", s.avg_depth_cm), "364.33");
        assert_eq!(s.path_length_m, 36.94);
        assert_eq!(s.n_points, 6);
    }

    #[test]
    fn summarize_edge_cases() {
        let s = summarize(&records(2, &[42], &[1.0])).unwrap();
        assert_eq!(s.avg_depth_cm, 42.0);
        assert_eq!((s.min_depth_cm, s.max_depth_cm), (42, 42));
        assert_eq!(summarize(&[]), Err(AnalyticsError::Empty));
        let mut mixed = records(1, &[1, 2], &[1.0, 2.0]);
        mixed[1].test_id = 2;
        assert_eq!(summarize(&mixed), Err(AnalyticsError::MixedTests(1, 2)));
    }

    #[test]
    fn capacity_examples() {
        assert_eq!(capacity_estimate(10.0, 5.0, 2.0).unwrap(), 100.0);
        assert_eq!(capacity_estimate(1.0, 1.0, 1.0).unwrap(), 1.0);
        assert!(capacity_estimate(0.0, 1.0, 1.0).is_err());
        assert!(capacity_estimate(1.0, -1.0, 1.0).is_err());
        assert!(capacity_estimate(1.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn silting_examples() {
        assert_eq!(
            silting_ratio(&summary(400.0), &summary(400.0)).unwrap(),
            0.0
        );
        assert!((silting_ratio(&summary(400.0), &summary(360.0)).unwrap() - 0.10).abs() < 1e-12);
        let r = silting_ratio(&summary(360.0), &summary(400.0)).unwrap();
        assert!((r + 40.0 / 360.0).abs() < 1e-12);
        assert_eq!(format!("{r:.3}"), "-0.111");
        assert!(silting_ratio(&summary(0.0), &summary(400.0)).is_err());
        assert!(silting_ratio(&summary(10.0), &summary(0.0)).is_err());
    }

    #[test]
    fn profile_examples() {
        let recs = records(
            3,
            &[346, 345, 359, 374, 382, 380],
            &[5.01, 10.25, 15.52, 22.67, 30.01, 36.94],
        );
        assert_eq!(
            depth_profile(&recs).unwrap(),
            vec![(1, 346), (2, 345), (3, 359), (4, 374), (5, 382), (6, 380)]
        );
        assert_eq!(depth_profile(&recs[..1]).unwrap(), vec![(1, 346)]);
        assert_eq!(depth_profile(&[]), Err(AnalyticsError::Empty));
    }

    #[test]
    fn grouping_orders_tests() {
        let mut recs = records(3, &[1, 2], &[1.0, 2.0]);
        recs.extend(records(1, &[5], &[1.0]));
        let groups = group_by_test(&recs);
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[0].0, 1);
        assert_eq!(groups[1].1.len(), 2);
    }

    proptest! {
        #[test]
        fn mean_within_bounds_and_order_free(depths in prop::collection::vec(0u32..450, 1..30)) {
            let dists: Vec<f64> = (1..=depths.len()).map(|i| i as f64).collect();
            let recs = records(1, &depths, &dists);
            let s = summarize(&recs).unwrap();
            prop_assert!(f64::from(s.min_depth_cm) <= s.avg_depth_cm + 1e-9);
            prop_assert!(s.avg_depth_cm <= f64::from(s.max_depth_cm) + 1e-9);

            let mut rev = recs.clone();
            rev.reverse();
            let r = summarize(&rev).unwrap();
            prop_assert!((r.avg_depth_cm - s.avg_depth_cm).abs() < 1e-9);
            prop_assert_eq!(r.path_length_m, s.path_length_m);
            prop_assert_eq!(depth_profile(&recs).unwrap().len(), recs.len());
        }

        #[test]
        fn capacity_is_linear(l in 0.1..1e3f64, w in 0.1..1e3f64, d in 0.1..50.0f64) {
            let base = capacity_estimate(l, w, d).unwrap();
            for doubled in [
                capacity_estimate(2.0 * l, w, d).unwrap(),
                capacity_estimate(l, 2.0 * w, d).unwrap(),
                capacity_estimate(l, w, 2.0 * d).unwrap(),
            ] {
                prop_assert!((doubled - 2.0 * base).abs() <= 1e-9 * base);
            }
        }
    }
}
