use rand::Rng;
use rand_distr::StandardNormal;

use super::*;
use crate::monitoring::{PathKind, Scaling};
use crate::numerics::RngStream;

fn triangle(n: usize, a: f64, amp: f64) -> Vec<f64> {
    (0..=n)
        .map(|k| {
            let t = k as f64 / n as f64;
            amp * if t <= a {
                -(1.0 - a) * t
            } else {
                a * (t - 1.0)
            }
        })
        .collect()
}

fn brute_force_sse(values: &[f64], a: f64) -> (f64, f64) {
    let n = values.len() - 1;
    let basis = triangle(n, a, 1.0);
    let amp = values.iter().zip(&basis).map(|(x, b)| x * b).sum::<f64>()
        / basis.iter().map(|b| b * b).sum::<f64>();
    let sse = values
        .iter()
        .zip(&basis)
        .map(|(x, b)| (x - amp * b).powi(2))
        .sum();
    (amp, sse)
}

#[test]
fn noiseless_triangle_is_recovered() {
    let values = triangle(50, 0.4, 2.5);
    let fit = fit_triangle(&values).unwrap();
    assert_eq!(fit.k_hat, 20);
    assert_eq!(fit.a_hat, 0.4);
    assert!((fit.amplitude - 2.5).abs() < 1e-12);
    assert!(fit.sse < 1e-12);
}

#[test]
fn prefix_sums_match_brute_force() {
    let mut rng = RngStream::new(21, 0);
    let values: Vec<f64> = std::iter::once(0.0)
        .chain((0..40).map(|_| rng.sample::<f64, _>(StandardNormal)))
        .collect();
    let fit = fit_triangle(&values).unwrap();
    let (amp, sse) = brute_force_sse(&values, fit.a_hat);
    assert!((fit.amplitude - amp).abs() < 1e-10 && (fit.sse - sse).abs() < 1e-9);
    for k in 2..=38 {
        assert!(brute_force_sse(&values, k as f64 / 40.0).1 >= fit.sse - 1e-9);
    }
}

#[test]
fn noiseless_parabola_is_recovered() {
    let values: Vec<f64> = (0..=30)
        .map(|k| -1.5 * (k as f64 / 30.0) * (1.0 - k as f64 / 30.0))
        .collect();
    let fit = fit_parabola(&values).unwrap();
    assert!((fit.amplitude + 1.5).abs() < 1e-12);
    assert!(fit.sse < 1e-12);
}

#[test]
fn zero_path_fits() {
    let values = vec![0.0; 21];
    assert_eq!(fit_parabola(&values).unwrap().amplitude, 0.0);
    let tri = fit_triangle(&values).unwrap();
    assert_eq!((tri.k_hat, tri.amplitude, tri.sse), (2, 0.0, 0.0));
}

#[test]
fn negation_flips_only_the_amplitude() {
    let mut rng = RngStream::new(22, 0);
    for _ in 0..20 {
        let values: Vec<f64> = std::iter::once(0.0)
            .chain((0..60).map(|_| rng.random::<f64>() - 0.3))
            .collect();
        let neg: Vec<f64> = values.iter().map(|v| -v).collect();
        let (a, b) = (fit_triangle(&values).unwrap(), fit_triangle(&neg).unwrap());
        assert_eq!(a.k_hat, b.k_hat);
        assert_eq!(a.amplitude, -b.amplitude);
    }
}

#[test]
fn short_paths_are_rejected() {
    assert!(fit_triangle(&[0.0; 10]).is_err());
    assert!(fit_parabola(&[0.0; 10]).is_err());
    assert!(fit_triangle(&[0.0; 11]).is_ok());
}

#[test]
fn diagnose_labels_the_better_template() {
    let n = 40;
    let mut values = Vec::with_capacity(2 * (n + 1));
    let tri = triangle(n, 0.25, 1.0);
    for k in 0..=n {
        let t = k as f64 / n as f64;
        values.push(tri[k]);
        values.push(t * (1.0 - t));
    }
    let path =
        MonitoringPath::from_values(PathKind::Canonical, 2, values, Scaling::Unrecorded).unwrap();
    let d = diagnose(&path).unwrap();
    assert_eq!(d[0].best, Shape::Triangle);
    assert_eq!(d[0].triangle.k_hat, 10);
    assert_eq!(d[1].best, Shape::Parabola);
    let total: f64 = path.component(1).iter().map(|v| v * v).sum();
    assert!(d[1].parabola.sse <= total);
    assert!(d[0]
        .to_string()
        .starts_with("diagnosis component=1 criterion=least-squares best=triangle a_hat=0.25"));
}
