//! Case, weather and load-curve files.

use std::fs;
use std::path::{Path, PathBuf};

use gridflex_core::grid::{GridCase, RenewableKind, HOURS};
use gridflex_core::renewables::WeatherTrace;

#[derive(Debug, thiserror::Error)]
pub enum FileError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Json {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: line {line}: {message}")]
    Csv { path: PathBuf, line: u64, message: String },
    #[error("{path}: invalid case: {message}")]
    Case { path: PathBuf, message: String },
}

impl FileError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        FileError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn json(path: &Path, err: serde_json::Error) -> Self {
        FileError::Json {
            path: path.to_path_buf(),
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }

    fn csv(path: &Path, line: u64, message: impl Into<String>) -> Self {
        FileError::Csv {
            path: path.to_path_buf(),
            line,
            message: message.into(),
        }
    }
}

pub fn read_text(path: &Path) -> Result<String, FileError> {
    fs::read_to_string(path).map_err(|e| FileError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), FileError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| FileError::io(dir, e))?;
        }
    }
    fs::write(path, text).map_err(|e| FileError::io(path, e))
}

/// Parses JSON text, reporting the path and the line/column of any error.
pub fn parse_json<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T, FileError> {
    serde_json::from_str(text).map_err(|e| FileError::json(path, e))
}

pub fn load_case(path: &Path) -> Result<GridCase, FileError> {
    let case: GridCase = parse_json(path, &read_text(path)?)?;
    case.validate().map_err(|e| FileError::Case {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    Ok(case)
}

pub fn save_case(case: &GridCase, path: &Path) -> Result<(), FileError> {
    let text = serde_json::to_string_pretty(case).expect("cases serialize");
    write_text(path, &text)
}

/// Value column headers accepted in weather files, with the kind they imply.
pub const WEATHER_COLUMNS: [(&str, RenewableKind); 2] = [
    ("wind_speed_m_s", RenewableKind::Wind),
    ("irradiance_w_m2", RenewableKind::Solar),
];

/// Reads a weather trace: header `day,hour,<value column>` where the value
/// column names its unit (see [`WEATHER_COLUMNS`]), then one row per day and
/// hour. Every day must cover hours 0-23.
pub fn parse_weather_csv(path: &Path, text: &str, resource_id: &str) -> Result<WeatherTrace, FileError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| FileError::csv(path, 1, e.to_string()))?.clone();
    if headers.len() != 3 || &headers[0] != "day" || &headers[1] != "hour" {
        return Err(FileError::csv(path, 1, "header must be `day,hour,<value column>`"));
    }
    let kind = WEATHER_COLUMNS
        .iter()
        .find(|(name, _)| *name == &headers[2])
        .map(|&(_, k)| k)
        .ok_or_else(|| {
            FileError::csv(
                path,
                1,
                format!(
                    "unknown value column `{}`; expected wind_speed_m_s or irradiance_w_m2",
                    &headers[2]
                ),
            )
        })?;
    let mut days: Vec<Vec<Option<f64>>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            FileError::csv(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize, name: &str| -> Result<f64, FileError> {
            record[i]
                .parse::<f64>()
                .map_err(|_| FileError::csv(path, line, format!("field `{name}` is not a number: `{}`", &record[i])))
        };
        let day = field(0, "day")?;
        let hour = field(1, "hour")?;
        let value = field(2, &headers[2])?;
        if day < 0.0 || day.fract() != 0.0 {
            return Err(FileError::csv(path, line, "field `day` must be a nonnegative integer"));
        }
        if !(0.0..HOURS as f64).contains(&hour) || hour.fract() != 0.0 {
            return Err(FileError::csv(path, line, "field `hour` must be an integer in 0..=23"));
        }
        if !value.is_finite() || value < 0.0 {
            return Err(FileError::csv(
                path,
                line,
                format!("field `{}` must be finite and nonnegative", &headers[2]),
            ));
        }
        let (d, h) = (day as usize, hour as usize);
        if days.len() <= d {
            days.resize(d + 1, vec![None; HOURS]);
        }
        if days[d][h].replace(value).is_some() {
            return Err(FileError::csv(path, line, format!("day {d} hour {h} given twice")));
        }
    }
    if days.is_empty() {
        return Err(FileError::csv(path, 1, "no data rows"));
    }
    let mut values = Vec::with_capacity(days.len());
    for (d, day) in days.into_iter().enumerate() {
        let row: Option<Vec<f64>> = day.into_iter().collect();
        values.push(row.ok_or_else(|| FileError::csv(path, 0, format!("day {d} does not cover all 24 hours")))?);
    }
    Ok(WeatherTrace {
        resource_id: resource_id.to_string(),
        kind,
        values,
    })
}

pub fn read_weather_csv(path: &Path, resource_id: &str) -> Result<WeatherTrace, FileError> {
    parse_weather_csv(path, &read_text(path)?, resource_id)
}

/// Reads a load curve: header `hour,percent_of_peak`, one row per hour 0-23.
pub fn parse_load_curve_csv(path: &Path, text: &str) -> Result<Vec<f64>, FileError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| FileError::csv(path, 1, e.to_string()))?.clone();
    if headers.len() != 2 || &headers[0] != "hour" || &headers[1] != "percent_of_peak" {
        return Err(FileError::csv(path, 1, "header must be `hour,percent_of_peak`"));
    }
    let mut curve = vec![None; HOURS];
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            FileError::csv(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let hour: usize = record[0]
            .parse()
            .map_err(|_| FileError::csv(path, line, format!("field `hour` is not an integer: `{}`", &record[0])))?;
        let pct: f64 = record[1].parse().map_err(|_| {
            FileError::csv(path, line, format!("field `percent_of_peak` is not a number: `{}`", &record[1]))
        })?;
        if hour >= HOURS {
            return Err(FileError::csv(path, line, "field `hour` must be in 0..=23"));
        }
        if !(pct > 0.0 && pct <= 100.0) {
            return Err(FileError::csv(path, line, "field `percent_of_peak` must be in (0, 100]"));
        }
        if curve[hour].replace(pct).is_some() {
            return Err(FileError::csv(path, line, format!("hour {hour} given twice")));
        }
    }
    curve
        .into_iter()
        .enumerate()
        .map(|(h, v)| v.ok_or_else(|| FileError::csv(path, 0, format!("hour {h} missing"))))
        .collect()
}

pub fn read_load_curve_csv(path: &Path) -> Result<Vec<f64>, FileError> {
    parse_load_curve_csv(path, &read_text(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("mem.csv")
    }

    fn weather_text(days: usize) -> String {
        let mut s = String::from("day,hour,wind_speed_m_s\n");
        for d in 0..days {
            for h in 0..24 {
                s.push_str(&format!("{d},{h},{}\n", 5.0 + h as f64 * 0.1));
            }
        }
        s
    }

    #[test]
    fn weather_rows_become_day_by_hour_grid() {
        let tr = parse_weather_csv(p(), &weather_text(3), "wind-3").unwrap();
        assert_eq!(tr.kind, RenewableKind::Wind);
        assert_eq!(tr.values.len(), 3);
        assert!((tr.values[2][10] - 6.0).abs() < 1e-12);
        tr.validate().unwrap();
    }

    #[test]
    fn weather_errors_name_the_line() {
        let text = weather_text(1).replace("0,5,5.5", "0,5,abc");
        let err = parse_weather_csv(p(), &text, "w").unwrap_err().to_string();
        assert!(err.contains("mem.csv: line 7"), "{err}");
        assert!(err.contains("wind_speed_m_s"), "{err}");

        let text = weather_text(1).replace("wind_speed_m_s", "speed");
        let err = parse_weather_csv(p(), &text, "w").unwrap_err().to_string();
        assert!(err.contains("unknown value column `speed`"), "{err}");

        let text: String = weather_text(1).lines().take(20).map(|l| format!("{l}\n")).collect();
        let err = parse_weather_csv(p(), &text, "w").unwrap_err().to_string();
        assert!(err.contains("day 0 does not cover"), "{err}");
    }

    #[test]
    fn load_curve_roundtrip_and_errors() {
        let mut s = String::from("hour,percent_of_peak\n");
        for h in (0..24).rev() {
            s.push_str(&format!("{h},{}\n", 50 + h));
        }
        let c = parse_load_curve_csv(p(), &s).unwrap();
        assert_eq!(c[0], 50.0);
        assert_eq!(c[23], 73.0);
        let err = parse_load_curve_csv(p(), &s.replace("3,53", "3,153")).unwrap_err().to_string();
        assert!(err.contains("percent_of_peak") && err.contains("line"), "{err}");
        let err = parse_load_curve_csv(p(), &s.replace("3,53\n", "")).unwrap_err().to_string();
        assert!(err.contains("hour 3 missing"), "{err}");
    }

    #[test]
    fn case_json_errors_carry_position() {
        let err = parse_json::<GridCase>(Path::new("c.json"), "{\n  \"buses\": 3\n}").unwrap_err();
        match err {
            FileError::Json { line, .. } => assert_eq!(line, 2),
            other => panic!("{other}"),
        }
    }
}
