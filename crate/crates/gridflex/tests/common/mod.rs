#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use gridflex::study::{Engine, RunOptions, StudyConfig};
use gridflex_core::grid::{template_unit, Bus, FactsConfig, Fuel, GridCase, Line, HOURS};

fn line(id: &str, from: u32, to: u32, b: f64, rating: f64) -> Line {
    Line {
        id: id.into(),
        from_bus: from,
        to_bus: to,
        susceptance_nominal: b,
        rating,
        facts_candidate: true,
    }
}

/// Four-bus ring with a cheap coal unit far from the load, oil near it,
/// and renewable sites on buses 2 and 4.
pub fn small_case() -> GridCase {
    let mut coal = template_unit("coal".into(), 1, Fuel::Coal, 300.0);
    coal.ramp_up = 10.0;
    coal.ramp_down = 10.0;
    let mut nuke = template_unit("nuke".into(), 2, Fuel::Nuclear, 60.0);
    nuke.min_up = 8;
    let oil = template_unit("oil".into(), 3, Fuel::Oil, 150.0);
    let gas = template_unit("gas".into(), 4, Fuel::Gas, 80.0);
    GridCase {
        buses: vec![
            Bus { id: 1, load_share: 0.1 },
            Bus { id: 2, load_share: 0.2 },
            Bus { id: 3, load_share: 0.5 },
            Bus { id: 4, load_share: 0.2 },
        ],
        lines: vec![
            line("L12", 1, 2, 20.0, 200.0),
            line("L23", 2, 3, 15.0, 90.0),
            line("L34", 3, 4, 20.0, 200.0),
            line("L41", 4, 1, 10.0, 100.0),
        ],
        generators: vec![coal, nuke, oil, gas],
        renewables: Vec::new(),
        s_base: 100.0,
        load_curve: (0..HOURS)
            .map(|t| 220.0 + 90.0 * (std::f64::consts::PI * (t as f64 - 6.0) / 12.0).sin().max(0.0))
            .collect(),
        facts: FactsConfig {
            n_max: 2,
            ..FactsConfig::default()
        },
        renewable_sites: vec![[2, 4]],
    }
}

fn weather_csv(header: &str, value: impl Fn(usize, usize) -> f64) -> String {
    let mut s = format!("day,hour,{header}\n");
    for d in 0..4 {
        for h in 0..HOURS {
            let _ = writeln!(s, "{d},{h},{:.3}", value(d, h));
        }
    }
    s
}

/// Writes the small case, its weather and a config exercising every study
/// into `dir`; returns the config path.
pub fn write_study(dir: &Path) -> PathBuf {
    gridflex::io::save_case(&small_case(), &dir.join("case.json")).unwrap();
    for bus in [2, 4] {
        let wind = weather_csv("wind_speed_m_s", |d, h| 5.0 + d as f64 + 3.0 * ((h + bus) as f64 / 4.0).sin().abs());
        std::fs::write(dir.join(format!("wind-{bus}.csv")), wind).unwrap();
        let sun = weather_csv("irradiance_w_m2", |d, h| {
            let x = (std::f64::consts::PI * (h as f64 - 6.0) / 12.0).sin();
            (900.0 - 100.0 * d as f64) * x.max(0.0)
        });
        std::fs::write(dir.join(format!("solar-{bus}.csv")), sun).unwrap();
    }
    let config = serde_json::json!({
        "case": {"path": "case.json"},
        "facts_sets": [["L23"], ["L23", "L41"]],
        "scenarios": 2,
        "weather": {
            "wind-2": "wind-2.csv", "wind-4": "wind-4.csv",
            "solar-2": "solar-2.csv", "solar-4": "solar-4.csv"
        },
        "placements": [
            {"buses": [2, 4], "kind": "wind", "capacity_mw": 60.0, "target_energy_mwh": 600.0},
            {"buses": [2, 4], "kind": "solar", "capacity_mw": 60.0}
        ],
        "penetration": {"increment_mw": 30.0, "steps": 2},
        "load_curves": {
            "flat": [90.0, 90.0, 90.0, 90.0, 90.0, 90.0, 90.0, 90.0, 90.0, 90.0, 90.0, 90.0,
                     90.0, 90.0, 90.0, 90.0, 90.0, 90.0, 90.0, 90.0, 90.0, 90.0, 90.0, 90.0],
            "light": {"path": "light.csv"}
        },
        "study_renewables_mw": 40.0,
        "generation_mixes": {
            "native": {},
            "gas-heavy": {"gas": 0.6, "coal": 0.2, "oil": 0.1, "nuclear": 0.1}
        },
        "solve": {"mip_gap": 1e-6}
    });
    let mut light = String::from("hour,percent_of_peak\n");
    for h in 0..HOURS {
        let _ = writeln!(light, "{h},{}", 55.0 + h as f64);
    }
    std::fs::write(dir.join("light.csv"), light).unwrap();
    let path = dir.join("study.json");
    std::fs::write(&path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
    path
}

pub fn load(path: &Path) -> StudyConfig {
    StudyConfig::from_file(path).unwrap()
}

pub fn options(out: &Path) -> RunOptions {
    RunOptions {
        out_dir: out.to_path_buf(),
        engine: Engine::Embedded,
        progress: false,
    }
}
