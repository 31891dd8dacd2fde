//! Bundled defaults: RTS-96 source data, six day-type load curves, synthetic
//! weather for the six candidate buses, and ISO generation mixes.

use std::collections::BTreeMap;
use std::path::Path;

use gridflex_core::grid::GridCase;
use gridflex_core::renewables::WeatherTrace;
use gridflex_core::rts96::{self, Rts96Source};

use crate::io;

pub const RTS96_JSON: &str = include_str!("../data/rts96.json");
pub const GENERATION_MIXES_JSON: &str = include_str!("../data/generation_mixes.json");

pub const LOAD_CURVES: [(&str, &str); 6] = [
    ("hot_weekday", include_str!("../data/load_curves/hot_weekday.csv")),
    ("hot_weekend", include_str!("../data/load_curves/hot_weekend.csv")),
    ("cold_weekday", include_str!("../data/load_curves/cold_weekday.csv")),
    ("cold_weekend", include_str!("../data/load_curves/cold_weekend.csv")),
    ("mild_weekday", include_str!("../data/load_curves/mild_weekday.csv")),
    ("mild_weekend", include_str!("../data/load_curves/mild_weekend.csv")),
];

pub const WEATHER: [(&str, &str); 12] = [
    ("wind-3", include_str!("../data/weather/wind-3.csv")),
    ("wind-24", include_str!("../data/weather/wind-24.csv")),
    ("wind-4", include_str!("../data/weather/wind-4.csv")),
    ("wind-5", include_str!("../data/weather/wind-5.csv")),
    ("wind-17", include_str!("../data/weather/wind-17.csv")),
    ("wind-18", include_str!("../data/weather/wind-18.csv")),
    ("solar-3", include_str!("../data/weather/solar-3.csv")),
    ("solar-24", include_str!("../data/weather/solar-24.csv")),
    ("solar-4", include_str!("../data/weather/solar-4.csv")),
    ("solar-5", include_str!("../data/weather/solar-5.csv")),
    ("solar-17", include_str!("../data/weather/solar-17.csv")),
    ("solar-18", include_str!("../data/weather/solar-18.csv")),
];

pub fn rts96_source() -> Rts96Source {
    serde_json::from_str(RTS96_JSON).expect("bundled RTS-96 data parses")
}

pub fn build_rts96_modified() -> GridCase {
    rts96::modified_case(&rts96_source()).expect("bundled RTS-96 data is consistent")
}

/// Annual peak of the modified system, MW: source bus loads after growth.
pub fn rts96_peak_mw() -> f64 {
    let src = rts96_source();
    src.buses.iter().map(|b| b.load_mw).sum::<f64>() * rts96::LOAD_GROWTH
}

/// Named load curves in percent of annual peak.
pub fn default_load_curves() -> BTreeMap<String, Vec<f64>> {
    LOAD_CURVES
        .iter()
        .map(|(name, text)| {
            let path = format!("<bundled>/load_curves/{name}.csv");
            let curve = io::parse_load_curve_csv(Path::new(&path), text).expect("bundled load curve parses");
            (name.to_string(), curve)
        })
        .collect()
}

pub fn default_weather() -> Vec<WeatherTrace> {
    WEATHER
        .iter()
        .map(|(id, text)| {
            let path = format!("<bundled>/weather/{id}.csv");
            io::parse_weather_csv(Path::new(&path), text, id).expect("bundled weather parses")
        })
        .collect()
}

/// Fuel-fraction maps by ISO. `RTS` is empty and keeps the native fleet.
pub fn default_generation_mixes() -> BTreeMap<String, BTreeMap<String, f64>> {
    serde_json::from_str(GENERATION_MIXES_JSON).expect("bundled mixes parse")
}

#[cfg(test)]
mod tests {
    use super::*;
    use gridflex_core::grid::RenewableKind;

    #[test]
    fn daily_energy_matches_the_stated_demand() {
        let case = build_rts96_modified();
        let e = case.daily_energy();
        assert!((e / 59_660.0 - 1.0).abs() < 0.005, "{e}");
        assert_eq!(case.buses.len(), 24);
        assert_eq!(case.lines.len(), 38);
        assert_eq!(case.generators.len(), 32);
        assert!((rts96_peak_mw() - 2992.5).abs() < 1e-9);
    }

    #[test]
    fn bundled_load_curves_keep_the_day_type_ordering() {
        let curves = default_load_curves();
        assert_eq!(curves.len(), 6);
        let avg = |n: &str| curves[n].iter().sum::<f64>() / 24.0;
        let peak = |n: &str| curves[n].iter().cloned().fold(0.0, f64::max);
        for (name, _) in LOAD_CURVES {
            assert!(avg("hot_weekday") >= avg(name));
            assert!(avg(name) >= avg("mild_weekend"));
        }
        let ratio = avg("cold_weekday") / avg("hot_weekday");
        assert!((ratio - 0.95).abs() < 0.005, "{ratio}");
        let spread = peak("mild_weekday") / curves["mild_weekday"].iter().cloned().fold(100.0, f64::min);
        assert!((spread - 1.1).abs() < 0.01, "{spread}");
    }

    #[test]
    fn bundled_weather_covers_candidate_buses() {
        let traces = default_weather();
        let case = build_rts96_modified();
        for pair in &case.renewable_sites {
            for bus in pair {
                for kind in [RenewableKind::Wind, RenewableKind::Solar] {
                    let id = format!("{}-{bus}", kind.as_str());
                    let t = traces.iter().find(|t| t.resource_id == id).expect("trace present");
                    assert_eq!(t.kind, kind);
                    t.validate().unwrap();
                }
            }
        }
    }

    #[test]
    fn bundled_mixes_sum_to_one() {
        for (name, mix) in default_generation_mixes() {
            let s: f64 = mix.values().sum();
            assert!(mix.is_empty() || (s - 1.0).abs() < 1e-9, "{name}: {s}");
        }
    }
}
