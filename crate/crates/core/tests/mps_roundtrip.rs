mod fixtures;

use std::collections::HashMap;

use fixtures::*;
use gridflex_core::facts::FlowDirection;
use gridflex_core::milp::mps::{export_mps, import_solution, MpsError};
use gridflex_core::milp::{solve_mip, MilpInstance, RowSense, SolveOptions, VarKind};
use gridflex_core::renewables::ScenarioSet;
use gridflex_core::suc::{self, BuildOptions};

/// Free-form reader for the subset of MPS the exporter writes.
struct Parsed {
    senses: HashMap<String, char>,
    cost: HashMap<String, f64>,
    coeffs: HashMap<(String, String), f64>,
    rhs: HashMap<String, f64>,
    lower: HashMap<String, f64>,
    upper: HashMap<String, f64>,
    integer: Vec<String>,
    columns: Vec<String>,
}

fn parse(text: &str) -> Parsed {
    let mut p = Parsed {
        senses: HashMap::new(),
        cost: HashMap::new(),
        coeffs: HashMap::new(),
        rhs: HashMap::new(),
        lower: HashMap::new(),
        upper: HashMap::new(),
        integer: Vec::new(),
        columns: Vec::new(),
    };
    let mut section = "";
    let mut in_int = false;
    for line in text.lines() {
        if !line.starts_with(' ') {
            section = line.split_whitespace().next().unwrap();
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        match section {
            "ROWS" => {
                p.senses.insert(f[1].to_string(), f[0].chars().next().unwrap());
            }
            "COLUMNS" => {
                if f[1] == "'MARKER'" {
                    in_int = f[2] == "'INTORG'";
                    continue;
                }
                let col = f[0].to_string();
                if p.columns.last() != Some(&col) {
                    p.columns.push(col.clone());
                    if in_int {
                        p.integer.push(col.clone());
                    }
                }
                for pair in f[1..].chunks(2) {
                    let v: f64 = pair[1].parse().unwrap();
                    if pair[0] == "OBJ" {
                        p.cost.insert(col.clone(), v);
                    } else {
                        p.coeffs.insert((pair[0].to_string(), col.clone()), v);
                    }
                }
            }
            "RHS" => {
                for pair in f[1..].chunks(2) {
                    p.rhs.insert(pair[0].to_string(), pair[1].parse().unwrap());
                }
            }
            "BOUNDS" => {
                let col = f[2].to_string();
                let v = || f[3].parse::<f64>().unwrap();
                match f[0] {
                    "BV" => {
                        p.lower.insert(col.clone(), 0.0);
                        p.upper.insert(col, 1.0);
                    }
                    "FX" => {
                        p.lower.insert(col.clone(), v());
                        p.upper.insert(col, v());
                    }
                    "FR" => {
                        p.lower.insert(col.clone(), f64::NEG_INFINITY);
                        p.upper.insert(col, f64::INFINITY);
                    }
                    "MI" => {
                        p.lower.insert(col, f64::NEG_INFINITY);
                    }
                    "LO" => {
                        p.lower.insert(col, v());
                    }
                    "UP" => {
                        p.upper.insert(col, v());
                    }
                    other => panic!("unexpected bound type {other}"),
                }
            }
            _ => panic!("data in section {section}"),
        }
    }
    p
}

fn rel_eq(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-11 * a.abs().max(b.abs())
}

fn check_faithful(m: &MilpInstance) {
    let (text, map) = export_mps(m, "uc").unwrap();
    for line in text.lines().filter(|l| l.starts_with(' ')) {
        for field in line.split_whitespace() {
            assert!(field.len() <= 12, "field `{field}` too wide");
        }
    }
    let p = parse(&text);
    assert_eq!(p.columns.len(), m.variables.len());
    assert_eq!(p.senses.len(), m.rows.len() + 1);
    for (j, v) in m.variables.iter().enumerate() {
        let code = &map.columns[j].0;
        assert_eq!(map.columns[j].1, v.name);
        assert!(rel_eq(p.cost.get(code).copied().unwrap_or(0.0), v.cost));
        assert_eq!(p.integer.contains(code), v.kind == VarKind::Binary);
        assert!(rel_eq(p.lower.get(code).copied().unwrap_or(0.0), v.lower), "{}", v.name);
        assert!(rel_eq(p.upper.get(code).copied().unwrap_or(f64::INFINITY), v.upper), "{}", v.name);
    }
    let mut nonzeros = 0;
    for (i, r) in m.rows.iter().enumerate() {
        let code = &map.rows[i].0;
        let sense = match r.sense {
            RowSense::Le => 'L',
            RowSense::Ge => 'G',
            RowSense::Eq => 'E',
        };
        assert_eq!(p.senses[code], sense);
        assert!(rel_eq(p.rhs.get(code).copied().unwrap_or(0.0), r.rhs));
        for &(j, a) in r.coeffs.iter().filter(|(_, a)| *a != 0.0) {
            let got = p.coeffs[&(code.clone(), map.columns[j].0.clone())];
            assert!(rel_eq(got, a), "{} {}: {got} vs {a}", r.name, m.variables[j].name);
            nonzeros += 1;
        }
    }
    assert_eq!(p.coeffs.len(), nonzeros);
}

fn triangle_model(facts: bool) -> (gridflex_core::grid::GridCase, ScenarioSet, FlowDirection, suc::SucModel) {
    let mut c = triangle();
    c.renewables = vec![solar("pv", 2, 40.0)];
    let dirs = if facts { forward(&["L13"]) } else { FlowDirection::default() };
    if facts {
        c = c.with_facts(&["L13".into()]).unwrap();
    }
    let scen = scenarios(&["pv"], |t, s| vec![if (6..18).contains(&t) { 20.0 + 10.0 * s as f64 } else { 0.0 }], 2);
    let model = suc::build(&c, &scen, &dirs, &BuildOptions::default()).unwrap();
    (c, scen, dirs, model)
}

#[test]
fn export_is_faithful_to_the_instance() {
    for facts in [false, true] {
        let (_, _, _, model) = triangle_model(facts);
        check_faithful(&model.instance);
    }
}

#[test]
fn embedded_solution_survives_the_file_round_trip() {
    let (c, scen, _, model) = triangle_model(true);
    let opts = SolveOptions {
        mip_gap: 1e-6,
        ..SolveOptions::default()
    };
    let raw = solve_mip(&model.instance, &opts).unwrap();
    let (_, map) = export_mps(&model.instance, "uc").unwrap();
    let mut file = String::from("# status optimal\n");
    for (j, v) in raw.values.iter().enumerate() {
        file.push_str(&format!("{} {v:e}\n", map.columns[j].0));
    }
    let back = import_solution(&file, &model.instance, &map).unwrap();
    assert_eq!(back.values, raw.values);
    assert_eq!(back.objective, raw.objective);
    let decoded = suc::decode(&model, &back, &c, &scen, &opts).unwrap();
    assert!(close(decoded.objective, raw.objective, 1e-12));
}

#[test]
fn alien_names_are_all_reported() {
    let (_, _, _, model) = triangle_model(false);
    let (_, map) = export_mps(&model.instance, "uc").unwrap();
    let text = format!("{} 1\nghost 2\n# note\nspook 3\n", map.columns[0].0);
    match import_solution(&text, &model.instance, &map) {
        Err(MpsError::UnknownNames(names)) => assert_eq!(names, vec!["ghost", "spook"]),
        other => panic!("{other:?}"),
    }
}
