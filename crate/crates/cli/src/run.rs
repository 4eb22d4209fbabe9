use std::fmt::Write as _;
use std::path::Path;

use constancy::changepoint::diagnose;
use constancy::models::{Family, FitResult};
use constancy::monitoring::{
    plugin_process, standardized_process, weighted_process, MonitoringPath, SampleCorrelation,
    SampleMean, WeightSpec, WeightTag,
};
use constancy::nulldist::{
    simulate_bridge_functional, Functional, NullTable, Resolution, TableCache, TableKey,
    WeightShape,
};
use constancy::power::optimal_weight;
use constancy::power::{
    power_report_csv, Calibration, Departure, DepartureSpec, PowerSetup, PowerTest, WeightChoice,
};
use constancy::stats::{
    chi2_window_test, cvm_test, ks_norm_test, ks_sum_test, ks_weighted_sd_test, weighted_chi2_test,
    weighted_sup_test, TestReport, WindowPartition,
};

use crate::args::{Cli, Command, DataArgs, GlobalOpts, WeightArgs};
use crate::error::{CliError, Result};
use crate::illustrate::illustration;
use crate::ingest::{ingest, ColumnMap, Dataset};

/// What a command produced: text for standard output and named files for
/// `--output`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outputs {
    pub stdout: String,
    pub files: Vec<(String, String)>,
}

impl Outputs {
    fn single(name: &str, content: String) -> Self {
        Outputs {
            stdout: content.clone(),
            files: vec![(name.to_string(), content)],
        }
    }
}

pub fn write_outputs(dir: &Path, outputs: &Outputs) -> Result<()> {
    let io = |e| CliError::Io {
        path: dir.to_path_buf(),
        source: e,
    };
    std::fs::create_dir_all(dir).map_err(io)?;
    for (name, content) in &outputs.files {
        let path = dir.join(name);
        std::fs::write(&path, content).map_err(|e| CliError::Io { path, source: e })?;
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Result<Outputs> {
    let g = &cli.global;
    match &cli.command {
        Command::Fit(d) => {
            let ds = load(d)?;
            let fit = ds.family.fit(&ds.observations)?;
            Ok(Outputs::single("fit.txt", fit_text(&ds, &fit)))
        }
        Command::Monitor {
            data,
            weight,
            plugin,
        } => {
            let ds = load(data)?;
            let path = match plugin.as_deref() {
                Some("mean") => plugin_process(&ds.observations, &SampleMean)?,
                Some("correlation") => plugin_process(&ds.observations, &SampleCorrelation)?,
                Some(other) => {
                    return Err(CliError::Usage(format!(
                        "unknown plug-in functional `{other}`; use mean or correlation"
                    )))
                }
                None => {
                    let (fit, path) = score_path(&ds, g)?;
                    match resolve_weight(weight, path.n(), path.p(), &fit)? {
                        Some(w) => weighted_process(&path, &w)?,
                        None => path,
                    }
                }
            };
            Ok(Outputs::single("path.csv", path.to_csv_string()))
        }
        Command::Test {
            data,
            tests,
            weight,
            diagnose: with_diagnosis,
        } => {
            let ds = load(data)?;
            let (fit, path) = score_path(&ds, g)?;
            let reports = run_tests(g, tests, weight, &fit, &path)?;
            let mut text: String = reports.iter().map(|r| r.to_string()).collect();
            if *with_diagnosis {
                for d in diagnose(&path)? {
                    let _ = writeln!(text, "{d}");
                }
            }
            Ok(Outputs {
                stdout: text.clone(),
                files: vec![
                    ("report.txt".into(), text),
                    ("path.csv".into(), path.to_csv_string()),
                ],
            })
        }
        Command::Nulltable {
            functional,
            p,
            resolution,
        } => {
            let table = null_table(g, *functional, *p, *resolution)?;
            Ok(Outputs::single("nulltable.txt", table_text(&table)))
        }
        Command::Power {
            family,
            covariates,
            theta0,
            n,
            delta,
            shape,
            tests,
            weight,
            component,
            level,
            replications,
        } => {
            let family = Family::from_id(
                *family,
                if family.is_regression() {
                    *covariates
                } else {
                    0
                },
            )?;
            let p = family.dim();
            let shapes = parse_shapes(shape, p, *n)?;
            let grid = delta
                .iter()
                .map(|d| parse_values(d, p))
                .collect::<Result<Vec<_>>>()?;
            let direction = grid
                .iter()
                .find(|d| d.iter().any(|v| *v != 0.0))
                .cloned()
                .unwrap_or_else(|| vec![1.0; p]);
            let weight = parse_weight_choice(weight)?;
            let tests = tests
                .iter()
                .map(|t| parse_power_test(t, weight, g.windows, *component))
                .collect::<Result<Vec<_>>>()?;
            let setup = PowerSetup {
                family,
                theta0: theta0.clone(),
                n: *n,
                replications: *replications,
                seed: g.seed,
                level: *level,
            };
            let cal = Calibration::new(
                &setup,
                &DepartureSpec::new(*n, direction, shapes.clone())?,
                &tests,
            )?;
            let mut rows = Vec::new();
            for d in grid {
                rows.extend(cal.power(&DepartureSpec::new(*n, d, shapes.clone())?)?);
            }
            Ok(Outputs::single("power.csv", power_report_csv(&rows)))
        }
        Command::Diagnose(d) => {
            let ds = load(d)?;
            let (_, path) = score_path(&ds, g)?;
            let text: String = diagnose(&path)?.iter().map(|d| format!("{d}\n")).collect();
            Ok(Outputs::single("diagnosis.txt", text))
        }
        Command::Illustrate { which, gamma_shape } => {
            let run = illustration(*which, g.seed, *gamma_shape, g.standardizer)?;
            let report = run.report();
            Ok(Outputs {
                stdout: report.clone(),
                files: vec![
                    ("data.csv".into(), run.data_csv()),
                    ("path.csv".into(), run.path.to_csv_string()),
                    ("report.txt".into(), report),
                ],
            })
        }
    }
}

fn load(d: &DataArgs) -> Result<Dataset> {
    let map = ColumnMap {
        response: d.response.clone(),
        second: d.second.clone(),
        covariates: d.covariates.clone(),
        intercept: !d.no_intercept,
    };
    ingest(&d.data, &map, d.family)
}

fn score_path(ds: &Dataset, g: &GlobalOpts) -> Result<(FitResult, MonitoringPath)> {
    let fit = ds.family.fit(&ds.observations)?;
    let path = standardized_process(&ds.observations, &ds.family, &fit, g.standardizer)?;
    Ok((fit, path))
}

fn fit_text(ds: &Dataset, fit: &FitResult) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "fit family={} n={} source={}",
        ds.family.id(),
        ds.observations.len(),
        ds.source
    );
    for (name, value) in ds.family.param_names().iter().zip(fit.theta_hat.values()) {
        let _ = writeln!(out, "param {name} {value}");
    }
    let _ = writeln!(out, "log_likelihood {}", fit.log_likelihood);
    let _ = writeln!(out, "iterations {}", fit.iterations);
    for (label, m) in [
        ("expected_info", &fit.expected_info),
        ("observed_info", &fit.observed_info),
        ("score_variance", &fit.score_variance),
    ] {
        for i in 0..m.dim() {
            let row: Vec<String> = m.row(i).iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{label} {} {}", i + 1, row.join(" "));
        }
    }
    out
}

fn table_text(t: &NullTable) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "table {}", t.key());
    let _ = writeln!(out, "reps {}", t.len());
    let _ = writeln!(out, "mean {}", t.mean());
    let _ = writeln!(out, "mean_se {}", t.mean_std_error());
    for q in [0.5, 0.9, 0.95, 0.99] {
        let _ = writeln!(out, "quantile {q} {}", t.quantile(q));
    }
    out
}

fn null_table(g: &GlobalOpts, f: Functional, p: usize, res: Resolution) -> Result<NullTable> {
    let key = TableKey::new(f, p)
        .grid(g.grid)
        .reps(g.reps)
        .seed(g.seed)
        .resolution(res);
    Ok(match (&g.cache_dir, g.no_cache) {
        (Some(dir), false) => TableCache::new(dir).get_or_build(&key)?,
        _ => simulate_bridge_functional(&key)?,
    })
}

fn run_tests(
    g: &GlobalOpts,
    tests: &[String],
    weight: &WeightArgs,
    fit: &FitResult,
    path: &MonitoringPath,
) -> Result<Vec<TestReport>> {
    if tests.iter().all(|t| t.trim().is_empty()) {
        return Err(CliError::Usage("no tests requested".into()));
    }
    let p = path.p();
    let part = WindowPartition::equal(g.windows)?;
    let needs_weight = tests.iter().any(|t| t == "q" || t == "vmax");
    let weighted = if needs_weight {
        let w = match resolve_weight(weight, path.n(), p, fit)? {
            Some(w) => w,
            None => WeightSpec::trend(path.n(), p)?,
        };
        let v = weighted_process(path, &w)?;
        Some((w, v))
    } else {
        None
    };
    let mut reports = Vec::new();
    for t in tests {
        match t.trim() {
            "a2" => reports.push(chi2_window_test(path, &part)?),
            "u" => reports.push(ks_norm_test(
                path,
                &null_table(g, Functional::MaxSqNorm, p, Resolution::default())?,
            )?),
            "usum" => reports.push(ks_sum_test(
                path,
                &null_table(g, Functional::SumMaxAbs, p, Resolution::default())?,
            )?),
            "t" => {
                let f = Functional::MaxAbsSdWeighted { eps: g.epsilon };
                reports.extend(ks_weighted_sd_test(
                    path,
                    g.epsilon,
                    &null_table(g, f, 1, Resolution::default())?,
                )?);
            }
            "c2" => reports.push(cvm_test(
                path,
                &null_table(g, Functional::Cvm, p, Resolution::default())?,
            )?),
            "q" => {
                let (w, v) = weighted.as_ref().expect("weighted path prepared");
                reports.push(weighted_chi2_test(v, w, &part)?);
            }
            "vmax" => {
                let (w, v) = weighted.as_ref().expect("weighted path prepared");
                let shape = match w.tag() {
                    WeightTag::Constant => WeightShape::Constant,
                    WeightTag::Trend => WeightShape::Trend,
                    WeightTag::Jump(a) => WeightShape::Jump(*a),
                    WeightTag::Custom => {
                        return Err(CliError::Usage(
                            "vmax needs a constant, trend or jump weight; custom weights have no null table".into(),
                        ))
                    }
                };
                let table = null_table(
                    g,
                    Functional::MaxAbsWeighted(shape),
                    1,
                    Resolution::default(),
                )?;
                reports.extend(weighted_sup_test(v, &table)?);
            }
            other => {
                return Err(CliError::Usage(format!(
                    "unknown test `{other}`; use a2, u, usum, t, c2, q or vmax"
                )))
            }
        }
    }
    Ok(reports)
}

fn resolve_weight(
    w: &WeightArgs,
    n: usize,
    p: usize,
    fit: &FitResult,
) -> Result<Option<WeightSpec>> {
    let Some(spec) = w.weight.as_deref() else {
        return Ok(None);
    };
    let weight = match spec {
        "constant" => WeightSpec::constant(n, p)?,
        "trend" => WeightSpec::trend(n, p)?,
        "optimal" => {
            let shapes = w
                .departure
                .as_deref()
                .ok_or_else(|| CliError::Usage("--weight optimal needs --departure".into()))?;
            let dep =
                DepartureSpec::new(n, parse_values(&w.delta, p)?, parse_shapes(shapes, p, n)?)?;
            optimal_weight(&dep, &fit.expected_info)?
        }
        _ => {
            if let Some(a) = spec.strip_prefix("jump:") {
                WeightSpec::jump(n, p, parse_number(a)?)?
            } else if let Some(file) = spec.strip_prefix("file:") {
                read_weight_file(file, n, p)?
            } else {
                return Err(CliError::Usage(format!(
                    "unknown weight `{spec}`; use constant, trend, jump:A, optimal or file:PATH"
                )));
            }
        }
    };
    Ok(Some(weight))
}

/// One row per observation; one column for all components or one per component.
fn read_weight_file(file: &str, n: usize, p: usize) -> Result<WeightSpec> {
    let io = |e| CliError::Io {
        path: file.into(),
        source: e,
    };
    let text = std::fs::read_to_string(file).map_err(io)?;
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| CliError::Data(format!("{file}: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut values = Vec::with_capacity(n * p);
    let mut rows = 0;
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Data(format!("{file}: row {}: {e}", r + 1)))?;
        let cells: Vec<f64> = rec
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                cell.trim().parse::<f64>().map_err(|_| CliError::Cell {
                    row: r + 1,
                    column: c + 1,
                    name: headers.get(c).cloned().unwrap_or_default(),
                    message: format!("`{cell}` is not a number"),
                })
            })
            .collect::<Result<_>>()?;
        match cells.len() {
            1 => values.extend(std::iter::repeat_n(cells[0], p)),
            len if len == p => values.extend(cells),
            len => {
                return Err(CliError::Data(format!(
                    "{file}: row {} has {len} weights, expected 1 or {p}",
                    r + 1
                )))
            }
        }
        rows += 1;
    }
    if rows != n {
        return Err(CliError::Data(format!(
            "{file}: {rows} weight rows for {n} observations"
        )));
    }
    Ok(WeightSpec::custom(n, p, values)?)
}

fn parse_number(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::Usage(format!("`{s}` is not a finite number")))
}

/// A comma list with one value per component, or a single value for all.
pub fn parse_values(s: &str, p: usize) -> Result<Vec<f64>> {
    let values = s.split(',').map(parse_number).collect::<Result<Vec<_>>>()?;
    match values.len() {
        1 => Ok(vec![values[0]; p]),
        len if len == p => Ok(values),
        len => Err(CliError::Usage(format!(
            "{len} values given for {p} components"
        ))),
    }
}

/// `jump:A[:B]`, `trend[:C]` or `none`, comma separated per component or one for all.
pub fn parse_shapes(s: &str, p: usize, n: usize) -> Result<Vec<Departure>> {
    let one = |item: &str| -> Result<Departure> {
        let parts: Vec<&str> = item.trim().split(':').collect();
        Ok(match parts.as_slice() {
            ["none"] => Departure::Custom(vec![0.0; n]),
            ["trend"] => Departure::Trend { c: 1.0 },
            ["trend", c] => Departure::Trend {
                c: parse_number(c)?,
            },
            ["jump", a] => Departure::Jump {
                a: parse_number(a)?,
                b: 1.0,
            },
            ["jump", a, b] => Departure::Jump {
                a: parse_number(a)?,
                b: parse_number(b)?,
            },
            _ => {
                return Err(CliError::Usage(format!(
                    "unknown departure `{item}`; use jump:A[:B], trend[:C] or none"
                )))
            }
        })
    };
    let shapes = s.split(',').map(one).collect::<Result<Vec<_>>>()?;
    match shapes.len() {
        1 => Ok(vec![shapes[0].clone(); p]),
        len if len == p => Ok(shapes),
        len => Err(CliError::Usage(format!(
            "{len} departures given for {p} components"
        ))),
    }
}

fn parse_weight_choice(s: &str) -> Result<WeightChoice> {
    Ok(match s {
        "constant" => WeightChoice::Constant,
        "trend" => WeightChoice::Trend,
        "optimal" => WeightChoice::Optimal,
        _ => match s.strip_prefix("jump:") {
            Some(a) => WeightChoice::Jump(parse_number(a)?),
            None => {
                return Err(CliError::Usage(format!(
                    "unknown weight `{s}`; use constant, trend, jump:A or optimal"
                )))
            }
        },
    })
}

fn parse_power_test(
    s: &str,
    weight: WeightChoice,
    windows: usize,
    component: Option<usize>,
) -> Result<PowerTest> {
    Ok(match s.trim() {
        "a2" => PowerTest::A2 { windows, component },
        "q" => PowerTest::Q {
            weight,
            windows,
            component,
        },
        "maxm" => PowerTest::MaxM { component },
        "maxv" => PowerTest::MaxV { weight, component },
        "c2" => PowerTest::Cvm { component },
        other => {
            return Err(CliError::Usage(format!(
                "unknown power test `{other}`; use a2, q, maxm, maxv or c2"
            )))
        }
    })
}
