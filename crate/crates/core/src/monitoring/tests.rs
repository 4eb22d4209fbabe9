use super::*;
use crate::models::simulate::simulate;
use crate::models::FamilyId;
use crate::numerics::RngStream;

fn scalars(v: &[f64]) -> Vec<Observation> {
    v.iter().copied().map(Observation::Scalar).collect()
}

fn fitted_path(family: &Family, data: &[Observation]) -> MonitoringPath {
    let fit = family.fit(data).unwrap();
    canonical_process(data, family, &fit).unwrap()
}

#[test]
fn normal_two_point_path() {
    let path = fitted_path(&Family::Normal, &scalars(&[-1.0, 1.0]));
    assert_eq!(path.row(0), &[0.0, 0.0]);
    assert!((path.value(1, 0) + 0.5f64.sqrt()).abs() < 1e-15);
    assert!(path.value(1, 1).abs() < 1e-15);
    assert!(path.endpoint_sup() < 1e-15);
}

#[test]
fn poisson_two_point_path() {
    let path = fitted_path(&Family::Poisson, &scalars(&[1.0, 3.0]));
    assert!((path.value(1, 0) + 0.5).abs() < 1e-15);
    assert!(path.value(2, 0).abs() < 1e-15);
}

#[test]
fn two_point_robust_path_is_singular() {
    let data = scalars(&[-1.0, 1.0]);
    let fit = Family::Normal.fit(&data).unwrap();
    assert!(matches!(
        robust_process(&data, &Family::Normal, &fit),
        Err(Error::SingularInformation { .. })
    ));
}

#[test]
fn endpoint_vanishes_for_every_family() {
    let mut rng = RngStream::new(3, 0);
    let setups: Vec<(Family, Vec<f64>)> = vec![
        (Family::Normal, vec![1.0, 2.0]),
        (Family::Gamma, vec![2.0, 3.0]),
        (Family::Poisson, vec![4.0]),
        (Family::Multinomial6, vec![0.1, 0.15, 0.2, 0.2, 0.15]),
        (Family::Binormal, vec![0.0, 1.0, 1.0, 2.0, 0.4]),
        (
            Family::NormalRegression { covariates: 2 },
            vec![1.11, 2.22, 1.0],
        ),
        (Family::PoissonRegression { covariates: 2 }, vec![0.5, 1.0]),
        (Family::MarkovTwoState, vec![0.3, 0.4]),
    ];
    for (fam, theta) in setups {
        let data = simulate(&fam, 300, |_| theta.clone(), &mut rng).unwrap();
        let fit = fam.fit(&data).unwrap();
        for which in [
            Standardizer::Expected,
            Standardizer::Observed,
            Standardizer::Robust,
        ] {
            let path = standardized_process(&data, &fam, &fit, which).unwrap();
            assert!(
                path.endpoint_sup() <= 1e-6,
                "{} {which}: {}",
                fam.id(),
                path.endpoint_sup()
            );
            assert_eq!(path.n(), 300);
        }
    }
}

#[test]
fn intercept_only_regression_matches_normal_path() {
    let y = [0.3, -1.2, 2.5, 0.7, 1.9, -0.4, 0.0, 1.1];
    let plain = fitted_path(&Family::Normal, &scalars(&y));
    let fam = Family::NormalRegression { covariates: 1 };
    let data: Vec<_> = y
        .iter()
        .map(|&y| Observation::Regression { y, x: vec![1.0] })
        .collect();
    let fit = fam.fit(&data).unwrap();
    let reg = regression_process(&data, &fam, &fit).unwrap();
    for k in 0..=y.len() {
        for j in 0..2 {
            assert!((plain.value(k, j) - reg.value(k, j)).abs() < 1e-12);
        }
    }
    assert!(regression_process(
        &scalars(&y),
        &Family::Normal,
        &Family::Normal.fit(&scalars(&y)).unwrap()
    )
    .is_err());
}

#[test]
fn normal_regression_path_components() {
    let mut rng = RngStream::new(4, 0);
    let fam = Family::NormalRegression { covariates: 2 };
    let data = simulate(&fam, 50, |_| vec![1.11, 2.22, 1.0], &mut rng).unwrap();
    let fit = fam.fit(&data).unwrap();
    let path = regression_process(&data, &fam, &fit).unwrap();
    let th = fit.theta_hat.values();
    let n = data.len() as f64;
    let mut gram = SymMatrix::zeros(2);
    let mut zx = vec![0.0; 2];
    let mut zsq = 0.0;
    for (k, obs) in data.iter().enumerate() {
        let Observation::Regression { y, x } = obs else {
            unreachable!()
        };
        let z = (y - th[0] * x[0] - th[1] * x[1]) / th[2];
        gram.add_outer(x, 1.0 / n);
        zx[0] += z * x[0];
        zx[1] += z * x[1];
        zsq += z * z - 1.0;
        if k == 24 {
            break;
        }
    }
    let mut full_gram = SymMatrix::zeros(2);
    for obs in &data {
        let Observation::Regression { x, .. } = obs else {
            unreachable!()
        };
        full_gram.add_outer(x, 1.0 / n);
    }
    let beta_part = full_gram.inv_sqrt(1e-12).unwrap().mul_vec(&zx);
    assert!((path.value(25, 0) - beta_part[0] / n.sqrt()).abs() < 1e-12);
    assert!((path.value(25, 1) - beta_part[1] / n.sqrt()).abs() < 1e-12);
    assert!((path.value(25, 2) - zsq / (2.0 * n).sqrt()).abs() < 1e-12);
}

#[test]
fn normal_path_is_location_scale_equivariant() {
    let mut rng = RngStream::new(5, 0);
    let data = simulate(&Family::Normal, 100, |_| vec![0.0, 1.0], &mut rng).unwrap();
    let moved: Vec<_> = data
        .iter()
        .map(|o| match o {
            Observation::Scalar(y) => Observation::Scalar(3.5 * y - 7.0),
            _ => unreachable!(),
        })
        .collect();
    let a = fitted_path(&Family::Normal, &data);
    let b = fitted_path(&Family::Normal, &moved);
    for (x, y) in a.values().iter().zip(b.values()) {
        assert!((x - y).abs() < 1e-10);
    }
}

#[test]
fn constant_weight_is_identity() {
    let mut rng = RngStream::new(6, 0);
    let data = simulate(&Family::Gamma, 80, |_| vec![2.0, 1.0], &mut rng).unwrap();
    let path = fitted_path(&Family::Gamma, &data);
    let w = WeightSpec::constant(80, 2).unwrap();
    let v = weighted_process(&path, &w).unwrap();
    assert_eq!(v.kind(), PathKind::Weighted);
    for (x, y) in path.values().iter().zip(v.values()) {
        assert!((x - y).abs() < 1e-14);
    }
    assert!(matches!(
        weighted_process(&path, &WeightSpec::constant(81, 2).unwrap()),
        Err(Error::GridMismatch(_))
    ));
}

#[test]
fn trend_weight_on_two_point_path() {
    let path = fitted_path(&Family::Normal, &scalars(&[-1.0, 1.0]));
    let v = weighted_process(&path, &WeightSpec::trend(2, 2).unwrap()).unwrap();
    // K(1/2) = 0 kills the first increment
    assert_eq!(v.row(1), &[0.0, 0.0]);
    // second increment +1/sqrt(2) times K(1) = 1/2
    assert!((v.value(2, 0) - 0.5 * 0.5f64.sqrt()).abs() < 1e-15);
}

#[test]
fn constant_weight_covariance_is_bridge() {
    let w = WeightSpec::constant(1000, 1).unwrap();
    for (t1, t2) in [(0.2, 0.5), (0.5, 0.8), (0.3, 0.3), (0.9, 0.1)] {
        let c = weighted_covariance(&w, t1, t2).unwrap()[0];
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        assert!((c - lo * (1.0 - hi)).abs() < 1e-12, "{t1},{t2}: {c}");
    }
    assert_eq!(weighted_covariance(&w, 0.0, 0.7).unwrap()[0], 0.0);
    assert!(weighted_covariance(&w, 1.2, 0.5).is_err());
}

#[test]
fn trend_weight_variance_matches_closed_form() {
    let n = 1000;
    let w = WeightSpec::trend(n, 1).unwrap();
    let tau2 = |t: f64| {
        let d = t - 0.5;
        d.powi(3) / 3.0 + 1.0 / 24.0 - 0.25 * (d * d - 0.25).powi(2)
    };
    for t in [0.1, 0.25, 0.5, 0.75, 1.0] {
        let c = weighted_covariance(&w, t, t).unwrap()[0];
        assert!(
            (c - tau2(t)).abs() < 2.0 / n as f64,
            "t={t}: {c} vs {}",
            tau2(t)
        );
    }
}

#[test]
fn jump_weight_is_centred() {
    let w = WeightSpec::jump(100, 1, 0.3).unwrap();
    let total: f64 = w.component(0).iter().sum();
    assert!(total.abs() < 1e-12);
    assert!((w.weight(31, 0) - w.weight(30, 0) - 1.0).abs() < 1e-15);
    assert!(matches!(
        WeightSpec::custom(3, 1, vec![0.0; 3]),
        Err(Error::DegenerateWeight(_))
    ));
    assert!(WeightSpec::jump(10, 1, 1.0).is_err());
}

#[test]
fn plugin_mean_matches_normal_location_component() {
    let mut rng = RngStream::new(8, 0);
    let data = simulate(&Family::Normal, 200, |_| vec![1.0, 1.0], &mut rng).unwrap();
    let canonical = fitted_path(&Family::Normal, &data);
    let plug = plugin_process(&data, &SampleMean).unwrap();
    for k in 0..=200 {
        assert!((plug.value(k, 0) - canonical.value(k, 0)).abs() < 1e-12);
    }
}

#[test]
fn plugin_correlation_pins_short_prefixes() {
    let mut rng = RngStream::new(9, 0);
    let data = simulate(
        &Family::Binormal,
        50,
        |_| vec![0.0, 1.0, 0.0, 1.0, 0.5],
        &mut rng,
    )
    .unwrap();
    let path = plugin_process(&data, &SampleCorrelation).unwrap();
    assert!((0..10).all(|k| path.value(k, 0) == 0.0));
    assert!(path.value(10, 0) != 0.0);
    assert!(path.value(50, 0).abs() < 1e-14);
    assert!(plugin_process(&data[..5], &SampleCorrelation).is_err());
    assert!(plugin_process(&data, &SampleMean).is_err());
}

#[test]
fn csv_round_trip_is_bit_exact() {
    let mut rng = RngStream::new(10, 0);
    let fam = Family::from_id(FamilyId::Binormal, 0).unwrap();
    let data = simulate(&fam, 40, |_| vec![0.0, 1.0, 0.0, 1.0, 0.2], &mut rng).unwrap();
    let path = fitted_path(&fam, &data);
    let text = path.to_csv_string();
    assert!(text.starts_with("# band=1.358\n"));
    assert!(text.contains("t,component_1,component_2,component_3,component_4,component_5,kind,n\n"));
    let back = MonitoringPath::read_csv(text.as_bytes()).unwrap();
    assert_eq!(back, path);

    let weighted = weighted_process(&path, &WeightSpec::jump(40, 5, 0.25).unwrap()).unwrap();
    let back = MonitoringPath::read_csv(weighted.to_csv_string().as_bytes()).unwrap();
    assert_eq!(back, weighted);
}

#[test]
fn csv_reader_reports_bad_cells() {
    let text = "t,component_1,kind,n\n0,0,canonical,1\n1,abc,canonical,1\n";
    let err = MonitoringPath::read_csv(text.as_bytes()).unwrap_err();
    assert!(err.to_string().contains("line 3"), "{err}");
    let text = "t,component_1,kind,n\n0,0,canonical,2\n1,0.5,canonical,2\n";
    assert!(MonitoringPath::read_csv(text.as_bytes()).is_err());
}
