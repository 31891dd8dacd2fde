//! Report files: `report.json`, `timings.json`, `report.csv`, and one CSV per
//! plotted series (x = study axis, one column per FACTS set).

use std::path::{Path, PathBuf};

use crate::io::{self, FileError};
use crate::study::{facts_label, CellMetrics, CellReport, Study, StudyReport, StudyRun};

fn csv_text(header: &[String], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv");
    for r in rows {
        w.write_record(r).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
}

fn num(x: Option<f64>) -> String {
    x.map_or(String::new(), |v| format!("{v}"))
}

fn metric(c: &CellReport, f: impl Fn(&CellMetrics) -> f64) -> Option<f64> {
    c.metrics.as_ref().map(f)
}

/// One row per cell. Money in $, emissions in Mlb, energy in MWh. Failed
/// cells leave every numeric field empty.
pub fn report_csv(report: &StudyReport) -> String {
    let header: Vec<String> = [
        "id",
        "facts_set",
        "pair",
        "kind",
        "step",
        "renewable_mw_per_bus",
        "curve",
        "mix",
        "status",
        "cost",
        "rent",
        "emission",
        "curtailment",
        "available_renewable",
        "load_payment",
        "mip_gap",
        "audit_max_violation",
        "directions_consistent",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let rows: Vec<Vec<String>> = report
        .cells
        .iter()
        .map(|c| {
            let a = &c.axis;
            vec![
                c.id.clone(),
                facts_label(&c.facts_set),
                a.pair.map_or(String::new(), |[x, y]| format!("{x}-{y}")),
                a.kind.map_or(String::new(), |k| k.as_str().to_string()),
                a.step.map_or(String::new(), |s| s.to_string()),
                num(a.renewable_mw_per_bus),
                a.curve.clone().unwrap_or_default(),
                a.mix.clone().unwrap_or_default(),
                serde_json::to_value(c.status).unwrap().as_str().unwrap().to_string(),
                num(metric(c, |m| m.total_cost)),
                num(metric(c, |m| m.congestion_rent)),
                num(metric(c, |m| m.emissions_mlb)),
                num(metric(c, |m| m.curtailment_mwh)),
                num(metric(c, |m| m.available_renewable_mwh)),
                num(metric(c, |m| m.load_payment)),
                num(c.metrics.as_ref().and_then(|m| m.mip_gap)),
                num(metric(c, |m| m.audit_max_violation)),
                c.metrics
                    .as_ref()
                    .map_or(String::new(), |m| m.directions_consistent().to_string()),
            ]
        })
        .collect();
    csv_text(&header, &rows)
}

/// A figure series: rows keyed by the study axis, one column per FACTS set.
pub struct Figure {
    pub name: &'static str,
    pub x_columns: Vec<String>,
    pub series: Vec<String>,
    pub rows: Vec<(Vec<String>, Vec<Option<f64>>)>,
}

impl Figure {
    pub fn to_csv(&self) -> String {
        let mut header = self.x_columns.clone();
        header.extend(self.series.iter().cloned());
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|(x, ys)| {
                let mut r = x.clone();
                r.extend(ys.iter().map(|y| num(*y)));
                r
            })
            .collect();
        csv_text(&header, &rows)
    }
}

fn series_labels(cells: &[&CellReport]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for c in cells {
        let l = facts_label(&c.facts_set);
        if !out.contains(&l) {
            out.push(l);
        }
    }
    out
}

/// Pivots `cells` into rows by `row_key` and columns by FACTS set.
fn pivot(
    name: &'static str,
    cells: &[&CellReport],
    x_columns: &[&str],
    row_key: impl Fn(&CellReport) -> Vec<String>,
    value: impl Fn(&CellReport) -> Option<f64>,
) -> Figure {
    let series = series_labels(cells);
    let mut rows: Vec<(Vec<String>, Vec<Option<f64>>)> = Vec::new();
    for c in cells {
        let key = row_key(c);
        let col = series.iter().position(|s| *s == facts_label(&c.facts_set)).unwrap();
        let idx = match rows.iter().position(|(k, _)| *k == key) {
            Some(i) => i,
            None => {
                rows.push((key, vec![None; series.len()]));
                rows.len() - 1
            }
        };
        rows[idx].1[col] = value(c);
    }
    Figure {
        name,
        x_columns: x_columns.iter().map(|s| s.to_string()).collect(),
        series,
        rows,
    }
}

fn pct_below(base: Option<f64>, x: Option<f64>) -> Option<f64> {
    match (base, x) {
        (Some(b), Some(x)) if b != 0.0 => Some(100.0 * (b - x) / b),
        _ => None,
    }
}

pub fn figures(report: &StudyReport) -> Vec<Figure> {
    let cells: Vec<&CellReport> = report.cells.iter().collect();
    let cost = |c: &CellReport| metric(c, |m| m.total_cost);
    let emission = |c: &CellReport| metric(c, |m| m.emissions_mlb);
    let curtail = |c: &CellReport| metric(c, |m| m.curtailment_mwh);
    match report.study {
        Study::Base => Vec::new(),
        Study::Siting => {
            let key = |c: &CellReport| {
                let [a, b] = c.axis.pair.unwrap_or_default();
                vec![format!("{a}-{b}"), c.axis.kind.map_or(String::new(), |k| k.as_str().into())]
            };
            vec![
                pivot("siting_cost", &cells, &["pair", "kind"], key, cost),
                pivot("siting_emission", &cells, &["pair", "kind"], key, emission),
                pivot("siting_curtailment", &cells, &["pair", "kind"], key, curtail),
            ]
        }
        Study::Penetration => {
            let base = cells
                .iter()
                .find(|c| c.axis.step == Some(0) && c.facts_set.is_empty())
                .and_then(|c| c.metrics.as_ref());
            let base_cost = base.map(|m| m.total_cost);
            let base_emission = base.map(|m| m.emissions_mlb);
            // Energy share is read off the device-free cell of each step.
            let share = |c: &CellReport| {
                cells
                    .iter()
                    .find(|o| o.axis.step == c.axis.step && o.facts_set.is_empty())
                    .and_then(|o| o.metrics.as_ref())
                    .map_or(String::new(), |m| format!("{}", 100.0 * m.available_renewable_mwh / m.demand_mwh))
            };
            let key = |c: &CellReport| {
                vec![
                    c.axis.step.map_or(String::new(), |s| s.to_string()),
                    num(c.axis.renewable_mw_per_bus),
                    share(c),
                ]
            };
            let x = ["step", "renewable_mw_per_bus", "energy_share_pct"];
            vec![
                pivot("penetration_cost_saving", &cells, &x, key, |c| pct_below(base_cost, cost(c))),
                pivot("penetration_emission_reduction", &cells, &x, key, |c| {
                    pct_below(base_emission, emission(c))
                }),
                pivot("penetration_curtailment", &cells, &x, key, curtail),
            ]
        }
        Study::LoadCurves => {
            let key = |c: &CellReport| vec![c.axis.curve.clone().unwrap_or_default()];
            vec![
                pivot("load_curve_cost", &cells, &["curve"], key, cost),
                pivot("load_curve_emission", &cells, &["curve"], key, emission),
                pivot("load_curve_curtailment", &cells, &["curve"], key, curtail),
            ]
        }
        Study::GenerationMix => mix_figures(&cells),
    }
}

fn mix_figures(cells: &[&CellReport]) -> Vec<Figure> {
    let mut mixes: Vec<String> = Vec::new();
    for c in cells {
        if let Some(m) = &c.axis.mix {
            if !mixes.contains(m) {
                mixes.push(m.clone());
            }
        }
    }
    let find = |mix: &str, renewables: bool, devices: bool| -> Option<&CellMetrics> {
        cells
            .iter()
            .find(|c| {
                c.axis.mix.as_deref() == Some(mix)
                    && (c.axis.renewable_mw_per_bus.unwrap_or(0.0) > 0.0) == renewables
                    && c.facts_set.is_empty() != devices
            })
            .and_then(|c| c.metrics.as_ref())
    };
    let series = |names: &[&str]| names.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let saving = |name: &'static str, f: fn(&CellMetrics) -> f64| Figure {
        name,
        x_columns: vec!["mix".into()],
        series: series(&["renewables", "renewables_and_facts", "facts_given_renewables"]),
        rows: mixes
            .iter()
            .map(|m| {
                let bare = find(m, false, false).map(f);
                let ren = find(m, true, false).map(f);
                let both = find(m, true, true).map(f);
                (vec![m.clone()], vec![pct_below(bare, ren), pct_below(bare, both), pct_below(ren, both)])
            })
            .collect(),
    };
    let fuels = ["coal", "oil", "gas", "nuclear", "hydro"];
    let capacity = Figure {
        name: "mix_capacity",
        x_columns: vec!["mix".into()],
        series: fuels.iter().map(|f| format!("{f}_pct")).collect(),
        rows: mixes
            .iter()
            .map(|m| {
                let cap = find(m, false, false).map(|x| x.capacity_by_fuel_mw.clone());
                let total: f64 = cap.as_ref().map_or(0.0, |c| c.values().sum());
                let ys = fuels
                    .iter()
                    .map(|f| cap.as_ref().map(|c| 100.0 * c.get(*f).copied().unwrap_or(0.0) / total))
                    .collect();
                (vec![m.clone()], ys)
            })
            .collect(),
    };
    let curtailment = Figure {
        name: "mix_curtailment",
        x_columns: vec!["mix".into()],
        series: series(&["none", "facts"]),
        rows: mixes
            .iter()
            .map(|m| {
                let ys = vec![
                    find(m, true, false).map(|x| x.curtailment_mwh),
                    find(m, true, true).map(|x| x.curtailment_mwh),
                ];
                (vec![m.clone()], ys)
            })
            .collect(),
    };
    vec![
        capacity,
        saving("mix_cost_saving", |x| x.total_cost),
        saving("mix_emission_reduction", |x| x.emissions_mlb),
        curtailment,
    ]
}

pub fn report_json(report: &StudyReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
    s.push('\n');
    s
}

/// Writes every report file for `run` under `dir` and returns their paths.
pub fn emit_reports(run: &StudyRun, dir: &Path) -> Result<Vec<PathBuf>, FileError> {
    let mut written = Vec::new();
    let mut put = |name: String, text: String| -> Result<(), FileError> {
        let path = dir.join(name);
        io::write_text(&path, &text)?;
        written.push(path);
        Ok(())
    };
    put("report.json".into(), report_json(&run.report))?;
    let mut timings = serde_json::to_string_pretty(&run.timings).expect("timings serialize");
    timings.push('\n');
    put("timings.json".into(), timings)?;
    put("report.csv".into(), report_csv(&run.report))?;
    for fig in figures(&run.report) {
        put(format!("{}.csv", fig.name), fig.to_csv())?;
    }
    Ok(written)
}
