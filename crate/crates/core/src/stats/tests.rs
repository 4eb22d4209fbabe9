use rand::Rng;

use super::*;
use crate::models::simulate::simulate;
use crate::models::{Family, Observation};
use crate::monitoring::{canonical_process, weighted_process, Scaling};
use crate::nulldist::{simulate_bridge_functional, Resolution, TableKey, WeightShape};
use crate::numerics::{Matrix, RngStream, SymMatrix};

fn table(functional: Functional, p: usize) -> NullTable {
    simulate_bridge_functional(&TableKey::new(functional, p).grid(200).reps(2000).seed(5)).unwrap()
}

fn zero_path(n: usize, p: usize) -> MonitoringPath {
    MonitoringPath::from_values(
        PathKind::Canonical,
        p,
        vec![0.0; (n + 1) * p],
        Scaling::Unrecorded,
    )
    .unwrap()
}

/// A path whose increments are centred so that it returns to zero.
fn random_bridge_path(n: usize, p: usize, rng: &mut RngStream) -> MonitoringPath {
    let mut inc: Vec<f64> = (0..n * p).map(|_| rng.random::<f64>() - 0.5).collect();
    for j in 0..p {
        let mean = (0..n).map(|i| inc[i * p + j]).sum::<f64>() / n as f64;
        (0..n).for_each(|i| inc[i * p + j] -= mean);
    }
    let mut values = vec![0.0; (n + 1) * p];
    for i in 1..=n {
        for j in 0..p {
            values[i * p + j] = values[(i - 1) * p + j] + inc[(i - 1) * p + j];
        }
    }
    values[n * p..].iter_mut().for_each(|v| *v = 0.0);
    MonitoringPath::from_values(PathKind::Canonical, p, values, Scaling::Unrecorded).unwrap()
}

#[test]
fn zero_path_statistics() {
    let path = zero_path(50, 2);
    let part = WindowPartition::equal(5).unwrap();
    let a = chi2_window_test(&path, &part).unwrap();
    assert_eq!((a.value, a.p_value), (0.0, 1.0));
    assert_eq!(a.reference, Reference::ChiSquared { df: 8 });
    let u = ks_norm_test(&path, &table(Functional::MaxSqNorm, 2)).unwrap();
    assert_eq!((u.value, u.p_value), (0.0, 1.0));
    let s = ks_sum_test(&path, &table(Functional::SumMaxAbs, 2)).unwrap();
    assert_eq!(s.value, 0.0);
    let c = cvm_test(&path, &table(Functional::Cvm, 2)).unwrap();
    assert_eq!((c.value, c.p_value), (0.0, 1.0));
    let t = ks_weighted_sd_test(
        &path,
        0.05,
        &table(Functional::MaxAbsSdWeighted { eps: 0.05 }, 1),
    )
    .unwrap();
    assert!(t.iter().all(|r| r.value == 0.0));
    let w = WeightSpec::trend(50, 2).unwrap();
    let v = weighted_process(&path, &w).unwrap();
    let q = weighted_chi2_test(&v, &w, &WindowPartition::equal(4).unwrap()).unwrap();
    assert_eq!((q.value, q.p_value), (0.0, 1.0));
    assert_eq!(q.reference, Reference::ChiSquared { df: 8 });
}

#[test]
fn window_statistic_matches_inverse_covariance_form() {
    let mut rng = RngStream::new(1, 0);
    for m in 2..=4 {
        for _ in 0..20 {
            let n = 37;
            let path = random_bridge_path(n, 1, &mut rng);
            let part = WindowPartition::equal(m).unwrap();
            let a = chi2_window_test(&path, &part).unwrap().value;
            let bounds = part.index_ranges(n).unwrap();
            let size: Vec<f64> = bounds
                .iter()
                .map(|&(lo, hi)| (hi - lo + 1) as f64 / n as f64)
                .collect();
            let x: Vec<f64> = bounds
                .iter()
                .map(|&(lo, hi)| path.value(hi, 0) - path.value(lo - 1, 0))
                .collect();
            // covariance of the first m - 1 bridge increments
            let sigma = SymMatrix::from_lower(m - 1, |k, l| {
                let base = -size[k] * size[l];
                if k == l {
                    base + size[k]
                } else {
                    base
                }
            });
            let inv = sigma.inverse(1e-14).unwrap();
            let oracle = inv.quad_form(&x[..m - 1]);
            assert!(
                (a - oracle).abs() < 1e-10 * oracle.max(1.0),
                "m={m}: {a} vs {oracle}"
            );
        }
    }
}

#[test]
fn q_display_matches_numeric_inverse() {
    let mut rng = RngStream::new(2, 0);
    for _ in 0..200 {
        let m = 2 + (rng.random::<f64>() * 5.0) as usize;
        let n = 60;
        let k: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 0.7).collect();
        let part = WindowPartition::equal(m).unwrap();
        let bounds = part.index_ranges(n).unwrap();
        let (c, d) = window_moments(&k, &bounds);
        let x: Vec<f64> = (0..m).map(|_| rng.random::<f64>() - 0.5).collect();
        let closed = sherman_morrison_form(&x, &c, &d).unwrap();
        let sigma = SymMatrix::from_lower(m, |a, b| {
            if a == b {
                d[a] - c[a] * c[a]
            } else {
                -c[a] * c[b]
            }
        });
        let oracle = sigma.inverse(1e-14).unwrap().quad_form(&x);
        assert!(
            (closed - oracle).abs() < 1e-8 * oracle.max(1.0),
            "{closed} vs {oracle}"
        );
    }
}

#[test]
fn constant_weight_is_degenerate_in_the_display() {
    let part = WindowPartition::equal(4).unwrap();
    let bounds = part.index_ranges(40).unwrap();
    let (c, d) = window_moments(&[2.0; 40], &bounds);
    assert!(matches!(
        sherman_morrison_form(&[0.1; 4], &c, &d),
        Err(Error::DegenerateWeight(_))
    ));
}

#[test]
fn constant_weight_falls_back_to_window_test() {
    let mut rng = RngStream::new(3, 0);
    let path = random_bridge_path(100, 2, &mut rng);
    let part = WindowPartition::equal(5).unwrap();
    let w = WeightSpec::from_fn(100, 2, crate::monitoring::WeightTag::Constant, |_| 3.0).unwrap();
    let q = weighted_chi2_test(&weighted_process(&path, &w).unwrap(), &w, &part).unwrap();
    let a = chi2_window_test(&path, &part).unwrap();
    assert!((q.value - a.value).abs() < 1e-12);
    assert_eq!(q.reference, Reference::ChiSquared { df: 8 });
    assert_eq!(q.components[0].df, Some(4));
}

#[test]
fn toy_cvm_value() {
    let data: Vec<_> = [-1.0, 1.0]
        .iter()
        .map(|&y| Observation::Scalar(y))
        .collect();
    let fit = Family::Normal.fit(&data).unwrap();
    let path = canonical_process(&data, &Family::Normal, &fit).unwrap();
    // n^{-2} psi(1)^T J^{-1} psi(1) with psi(1) = (-1, 0), J^{-1} = diag(1, 1/2)
    let c = cvm_test(&path, &table(Functional::Cvm, 2)).unwrap();
    assert!((c.value - 0.25).abs() < 1e-15);
}

#[test]
fn one_dimensional_reductions() {
    let mut rng = RngStream::new(4, 0);
    let path = random_bridge_path(200, 1, &mut rng);
    let grid = |f| {
        simulate_bridge_functional(
            &TableKey::new(f, 1)
                .grid(200)
                .reps(2000)
                .seed(8)
                .resolution(Resolution::Grid),
        )
        .unwrap()
    };
    let u = ks_norm_test(&path, &grid(Functional::MaxSqNorm)).unwrap();
    assert!((u.value - path.max_abs(0).powi(2)).abs() < 1e-15);
    let bridge = grid(Functional::MaxAbsBridge);
    assert!((u.p_value - bridge.p_value(path.max_abs(0))).abs() < 1e-15);
    let s = ks_sum_test(&path, &table(Functional::SumMaxAbs, 1)).unwrap();
    assert_eq!(s.value, path.max_abs(0));
    assert_eq!(s.components[0].critical, Some(1.358));
}

#[test]
fn sd_weighted_uses_both_one_sided_limits() {
    let n = 20;
    let mut values = vec![0.0; n + 1];
    values[1] = 0.3; // only visible as the left limit at t = 2/20 and right limit at 1/20
    let path =
        MonitoringPath::from_values(PathKind::Canonical, 1, values, Scaling::Unrecorded).unwrap();
    let t = ks_weighted_sd_test(
        &path,
        0.1,
        &table(Functional::MaxAbsSdWeighted { eps: 0.1 }, 1),
    )
    .unwrap();
    let expected = 0.3 / (0.1f64 * 0.9).sqrt();
    assert!((t[0].value - expected).abs() < 1e-15);
    assert!(matches!(
        ks_weighted_sd_test(
            &zero_path(3, 1),
            0.4,
            &table(Functional::MaxAbsSdWeighted { eps: 0.4 }, 1)
        ),
        Err(Error::EmptyWindow { .. })
    ));
}

#[test]
fn mismatched_table_or_path_is_rejected() {
    let path = zero_path(30, 2);
    assert!(ks_norm_test(&path, &table(Functional::MaxSqNorm, 1)).is_err());
    assert!(cvm_test(&path, &table(Functional::MaxSqNorm, 2)).is_err());
    let w = WeightSpec::trend(30, 2).unwrap();
    let v = weighted_process(&path, &w).unwrap();
    assert!(chi2_window_test(&v, &WindowPartition::equal(3).unwrap()).is_err());
    assert!(weighted_chi2_test(&path, &w, &WindowPartition::equal(3).unwrap()).is_err());
    assert!(matches!(
        chi2_window_test(&zero_path(3, 1), &WindowPartition::equal(5).unwrap()),
        Err(Error::EmptyWindow { .. })
    ));
}

/// Orthogonal matrix from the eigenvectors of a random symmetric matrix.
fn random_rotation(p: usize, rng: &mut RngStream) -> Matrix {
    let raw: Vec<f64> = (0..p * p).map(|_| rng.random::<f64>() - 0.5).collect();
    let s = SymMatrix::from_lower(p, |i, j| raw[i * p + j]);
    s.eigen().unwrap().vectors
}

#[test]
fn quadratic_statistics_ignore_the_choice_of_root() {
    let mut rng = RngStream::new(6, 0);
    let family = Family::Gamma;
    let data = simulate(
        &family,
        300,
        |i| vec![2.0 + if i > 150 { 0.5 } else { 0.0 }, 1.0],
        &mut rng,
    )
    .unwrap();
    let fit = family.fit(&data).unwrap();
    let scores = family.scores(&data, &fit.theta_hat).unwrap();
    let root = fit.expected_info.inv_sqrt(1e-12).unwrap().to_matrix();
    let rotated = random_rotation(2, &mut rng).matmul(&root);
    let a = MonitoringPath::from_scores(PathKind::Canonical, &scores, &root, Scaling::CustomRoot)
        .unwrap();
    let b =
        MonitoringPath::from_scores(PathKind::Canonical, &scores, &rotated, Scaling::CustomRoot)
            .unwrap();
    assert!(a
        .values()
        .iter()
        .zip(b.values())
        .any(|(x, y)| (x - y).abs() > 1e-3));

    let part = WindowPartition::equal(5).unwrap();
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-10 * x.abs().max(1.0);
    let (ra, rb) = (
        chi2_window_test(&a, &part).unwrap(),
        chi2_window_test(&b, &part).unwrap(),
    );
    assert!(close(ra.value, rb.value) && close(ra.p_value, rb.p_value));
    let t = table(Functional::MaxSqNorm, 2);
    assert!(close(
        ks_norm_test(&a, &t).unwrap().value,
        ks_norm_test(&b, &t).unwrap().value
    ));
    let t = table(Functional::Cvm, 2);
    assert!(close(
        cvm_test(&a, &t).unwrap().value,
        cvm_test(&b, &t).unwrap().value
    ));
    let w = WeightSpec::trend(300, 2).unwrap();
    let q4 = WindowPartition::equal(4).unwrap();
    let qa = weighted_chi2_test(&weighted_process(&a, &w).unwrap(), &w, &q4).unwrap();
    let qb = weighted_chi2_test(&weighted_process(&b, &w).unwrap(), &w, &q4).unwrap();
    assert!(close(qa.value, qb.value));

    // the documented eigen-root is reproducible bit for bit
    let again = canonical_process(&data, &family, &fit).unwrap();
    assert_eq!(again, canonical_process(&data, &family, &fit).unwrap());
}

#[test]
fn simulated_p_values_are_monotone() {
    let t = table(Functional::MaxAbsWeighted(WeightShape::Trend), 1);
    let mut prev = 1.0;
    for i in 0..100 {
        let p = t.p_value(i as f64 * 0.01);
        assert!(p <= prev && (0.0..=1.0).contains(&p));
        prev = p;
    }
}

#[test]
fn report_record_format() {
    let path = zero_path(10, 1);
    let r = chi2_window_test(&path, &WindowPartition::equal(2).unwrap()).unwrap();
    let text = r.to_string();
    assert!(text.starts_with("test A2\nvalue 0\nreference chi2 df=1\np_value 1\n"));
    assert!(text.contains("component 1 value=0 df=1 p_value=1\n"));
    assert!(text.ends_with("end\n"));
}

#[test]
fn partition_rules() {
    assert!(WindowPartition::new(vec![0.0, 0.5, 0.5, 1.0]).is_err());
    assert!(WindowPartition::new(vec![0.1, 1.0]).is_err());
    let p = WindowPartition::new(vec![0.0, 0.3, 1.0]).unwrap();
    assert_eq!(p.index_ranges(10).unwrap(), vec![(1, 3), (4, 10)]);
    assert_eq!(
        WindowPartition::equal(3).unwrap().index_ranges(9).unwrap(),
        vec![(1, 3), (4, 6), (7, 9)]
    );
}

#[test]
fn window_constant_weight_reduces_to_rescaled_window_test() {
    let mut rng = RngStream::new(9, 0);
    let path = random_bridge_path(80, 1, &mut rng);
    let part = WindowPartition::equal(4).unwrap();
    let w = WeightSpec::custom(
        80,
        1,
        (1..=80).map(|i| if i > 40 { 0.5 } else { -1.5 }).collect(),
    )
    .unwrap();
    let q = weighted_chi2_test(&weighted_process(&path, &w).unwrap(), &w, &part).unwrap();
    let a = chi2_window_test(&path, &part).unwrap();
    assert!((q.value - a.value).abs() < 1e-12 * a.value.max(1.0));
    assert_eq!(q.reference, Reference::ChiSquared { df: 3 });
}
