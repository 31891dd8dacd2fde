//! Transmission system data: buses, lines, dispatchable units, renewables.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

/// Hours in the scheduling horizon.
pub const HOURS: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fuel {
    Coal,
    Oil,
    Gas,
    Nuclear,
    Hydro,
}

impl Fuel {
    pub const ALL: [Fuel; 5] = [Fuel::Coal, Fuel::Oil, Fuel::Gas, Fuel::Nuclear, Fuel::Hydro];

    /// Average CO2 emission rate, lb/MWh.
    pub fn emission_rate(self) -> f64 {
        match self {
            Fuel::Coal => 2027.0,
            Fuel::Oil => 1671.0,
            Fuel::Gas => 1169.0,
            Fuel::Nuclear | Fuel::Hydro => 0.0,
        }
    }

    /// Average generation cost, $/MWh.
    pub fn generation_cost(self) -> f64 {
        match self {
            Fuel::Coal => 22.0,
            Fuel::Oil => 121.0,
            Fuel::Gas => 14.0,
            Fuel::Nuclear => 2.0,
            Fuel::Hydro => 0.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Fuel::Coal => "coal",
            Fuel::Oil => "oil",
            Fuel::Gas => "gas",
            Fuel::Nuclear => "nuclear",
            Fuel::Hydro => "hydro",
        }
    }
}

impl fmt::Display for Fuel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Fuel {
    type Err = CaseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Fuel::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| CaseError::UnknownFuel(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum CaseError {
    #[error("unknown fuel `{0}` (expected coal, oil, gas, nuclear or hydro)")]
    UnknownFuel(String),
    #[error("bus load shares sum to {0}, expected 1")]
    LoadShares(f64),
    #[error("{what} `{id}` refers to unknown bus {bus}")]
    UnknownBus { what: &'static str, id: String, bus: u32 },
    #[error("duplicate {what} id `{id}`")]
    Duplicate { what: &'static str, id: String },
    #[error("line `{0}` connects a bus to itself")]
    SelfLoop(String),
    #[error("{what} `{id}`: {reason}")]
    Invalid { what: &'static str, id: String, reason: String },
    #[error("load curve must have {HOURS} positive values")]
    LoadCurve,
    #[error("FACTS line `{0}` is not a candidate line")]
    NotCandidate(String),
    #[error("{count} FACTS devices enabled but at most {max} allowed")]
    TooManyFacts { count: usize, max: usize },
    #[error("generation mix fractions sum to {0}, expected 1")]
    MixSum(f64),
    #[error("generation mix fraction for {fuel} is {value}")]
    MixFraction { fuel: String, value: f64 },
    #[error("case has no dispatchable capacity")]
    NoCapacity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bus {
    pub id: u32,
    /// Fraction of system load served here.
    pub load_share: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Line {
    pub id: String,
    pub from_bus: u32,
    pub to_bus: u32,
    /// Per-unit on the case MVA base.
    pub susceptance_nominal: f64,
    /// Thermal limit, MW.
    pub rating: f64,
    #[serde(default)]
    pub facts_candidate: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    /// MW.
    pub width: f64,
    /// $/MWh.
    pub marginal_cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Generator {
    pub id: String,
    pub bus: u32,
    pub fuel: Fuel,
    pub p_min: f64,
    pub p_max: f64,
    /// Hours.
    pub min_up: u32,
    pub min_down: u32,
    /// MW per minute.
    pub ramp_up: f64,
    pub ramp_down: f64,
    /// $/h while committed.
    pub no_load_cost: f64,
    pub startup_cost: f64,
    pub shutdown_cost: f64,
    /// Cost curve above `p_min`; widths span `p_max - p_min`.
    pub segments: Vec<Segment>,
    /// $/MWh charged on recourse deployment in either direction.
    pub deploy_cost: f64,
    /// lb CO2 per MWh.
    pub emission_rate: f64,
}

impl Generator {
    pub fn highest_marginal_cost(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| s.marginal_cost)
            .fold(0.0, f64::max)
    }

    /// Scales capacity, cost-curve widths and ramp rates by `factor`.
    pub fn scale(&mut self, factor: f64) {
        self.p_min *= factor;
        self.p_max *= factor;
        self.ramp_up *= factor;
        self.ramp_down *= factor;
        self.no_load_cost *= factor;
        self.startup_cost *= factor;
        self.shutdown_cost *= factor;
        for s in &mut self.segments {
            s.width *= factor;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RenewableKind {
    Wind,
    Solar,
}

impl RenewableKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RenewableKind::Wind => "wind",
            RenewableKind::Solar => "solar",
        }
    }
}

/// Cut-in, rated and cut-out wind speeds, m/s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindParams {
    pub v_ci: f64,
    pub v_rated: f64,
    pub v_co: f64,
}

impl Default for WindParams {
    fn default() -> Self {
        Self {
            v_ci: 4.0,
            v_rated: 14.0,
            v_co: 25.0,
        }
    }
}

/// PV array nameplate data. Only `g_stc` enters the power model; the
/// electrical ratings are carried for reporting.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PvArraySpec {
    /// A.
    #[serde(default)]
    pub i_sc: f64,
    /// V.
    #[serde(default)]
    pub v_oc: f64,
    /// W/m².
    #[serde(default = "default_g_stc")]
    pub g_stc: f64,
}

fn default_g_stc() -> f64 {
    1000.0
}

impl Default for PvArraySpec {
    fn default() -> Self {
        Self {
            i_sc: 0.0,
            v_oc: 0.0,
            g_stc: 1000.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenewableUnit {
    pub id: String,
    pub bus: u32,
    pub kind: RenewableKind,
    pub rated_power: f64,
    #[serde(default)]
    pub curtail_cost: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wind_params: Option<WindParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pv_params: Option<PvArraySpec>,
}

/// FACTS placement and device economics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactsConfig {
    /// Device budget.
    pub n_max: usize,
    /// Lines equipped with a device.
    #[serde(default)]
    pub enabled_lines: Vec<String>,
    /// Fractional reactance adjustment range.
    pub delta_min: f64,
    pub delta_max: f64,
    pub discount_rate: f64,
    pub lifespan_years: u32,
}

impl Default for FactsConfig {
    fn default() -> Self {
        Self {
            n_max: 3,
            enabled_lines: Vec::new(),
            delta_min: -0.8,
            delta_max: 0.4,
            discount_rate: 0.05,
            lifespan_years: 15,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridCase {
    pub buses: Vec<Bus>,
    pub lines: Vec<Line>,
    pub generators: Vec<Generator>,
    #[serde(default)]
    pub renewables: Vec<RenewableUnit>,
    /// MVA.
    pub s_base: f64,
    /// System load per hour, MW.
    pub load_curve: Vec<f64>,
    #[serde(default)]
    pub facts: FactsConfig,
    /// Bus pairs offered to renewable siting studies.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub renewable_sites: Vec<[u32; 2]>,
}

impl GridCase {
    pub fn bus_index(&self, id: u32) -> Option<usize> {
        self.buses.iter().position(|b| b.id == id)
    }

    pub fn line(&self, id: &str) -> Option<&Line> {
        self.lines.iter().find(|l| l.id == id)
    }

    /// Bus demand in MW at hour `t`.
    pub fn demand(&self, bus: usize, t: usize) -> f64 {
        self.buses[bus].load_share * self.load_curve[t]
    }

    pub fn daily_energy(&self) -> f64 {
        self.load_curve.iter().sum()
    }

    pub fn total_capacity(&self) -> f64 {
        self.generators.iter().map(|g| g.p_max).sum()
    }

    pub fn capacity_by_fuel(&self) -> BTreeMap<Fuel, f64> {
        let mut out = BTreeMap::new();
        for g in &self.generators {
            *out.entry(g.fuel).or_insert(0.0) += g.p_max;
        }
        out
    }

    /// Reference bus: lowest id.
    pub fn reference_bus(&self) -> usize {
        (0..self.buses.len())
            .min_by_key(|&b| self.buses[b].id)
            .unwrap_or(0)
    }

    pub fn is_facts_enabled(&self, line: &str) -> bool {
        self.facts.enabled_lines.iter().any(|l| l == line)
    }

    /// Returns a copy with the given FACTS set enabled.
    pub fn with_facts(&self, lines: &[String]) -> Result<GridCase, CaseError> {
        let mut case = self.clone();
        case.facts.enabled_lines = lines.to_vec();
        case.validate()?;
        Ok(case)
    }

    pub fn validate(&self) -> Result<(), CaseError> {
        let share: f64 = self.buses.iter().map(|b| b.load_share).sum();
        if (share - 1.0).abs() > 1e-9 || self.buses.iter().any(|b| !(b.load_share >= 0.0)) {
            return Err(CaseError::LoadShares(share));
        }
        let mut ids: Vec<u32> = self.buses.iter().map(|b| b.id).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(CaseError::Duplicate {
                what: "bus",
                id: w[0].to_string(),
            });
        }
        let has_bus = |b: u32| ids.binary_search(&b).is_ok();
        if !(self.s_base > 0.0) {
            return Err(CaseError::Invalid {
                what: "case",
                id: String::from("s_base"),
                reason: String::from("must be positive"),
            });
        }
        if self.load_curve.len() != HOURS || self.load_curve.iter().any(|&d| !(d > 0.0)) {
            return Err(CaseError::LoadCurve);
        }

        check_unique("line", self.lines.iter().map(|l| l.id.as_str()))?;
        for l in &self.lines {
            for bus in [l.from_bus, l.to_bus] {
                if !has_bus(bus) {
                    return Err(CaseError::UnknownBus { what: "line", id: l.id.clone(), bus });
                }
            }
            if l.from_bus == l.to_bus {
                return Err(CaseError::SelfLoop(l.id.clone()));
            }
            if !(l.rating > 0.0) || !(l.susceptance_nominal > 0.0) {
                return Err(invalid("line", &l.id, "rating and susceptance must be positive"));
            }
        }

        check_unique("generator", self.generators.iter().map(|g| g.id.as_str()))?;
        for g in &self.generators {
            if !has_bus(g.bus) {
                return Err(CaseError::UnknownBus { what: "generator", id: g.id.clone(), bus: g.bus });
            }
            validate_generator(g)?;
        }

        check_unique("renewable", self.renewables.iter().map(|r| r.id.as_str()))?;
        for r in &self.renewables {
            if !has_bus(r.bus) {
                return Err(CaseError::UnknownBus { what: "renewable", id: r.id.clone(), bus: r.bus });
            }
            if !(r.rated_power > 0.0) {
                return Err(invalid("renewable", &r.id, "rated power must be positive"));
            }
            if !(r.curtail_cost >= 0.0) {
                return Err(invalid("renewable", &r.id, "curtailment cost must be nonnegative"));
            }
            match r.kind {
                RenewableKind::Wind => {
                    let w = r.wind_params.unwrap_or_default();
                    if !(0.0 < w.v_ci && w.v_ci < w.v_rated && w.v_rated < w.v_co) {
                        return Err(invalid("renewable", &r.id, "need 0 < v_ci < v_rated < v_co"));
                    }
                }
                RenewableKind::Solar => {
                    if !(r.pv_params.unwrap_or_default().g_stc > 0.0) {
                        return Err(invalid("renewable", &r.id, "g_stc must be positive"));
                    }
                }
            }
        }

        for id in &self.facts.enabled_lines {
            match self.line(id) {
                Some(l) if l.facts_candidate => {}
                _ => return Err(CaseError::NotCandidate(id.clone())),
            }
        }
        check_unique("FACTS line", self.facts.enabled_lines.iter().map(|s| s.as_str()))?;
        if self.facts.enabled_lines.len() > self.facts.n_max {
            return Err(CaseError::TooManyFacts {
                count: self.facts.enabled_lines.len(),
                max: self.facts.n_max,
            });
        }
        if !(self.facts.delta_min > -1.0
            && self.facts.delta_min <= 0.0
            && self.facts.delta_max >= 0.0)
        {
            return Err(invalid("facts", "delta", "need -1 < delta_min <= 0 <= delta_max"));
        }
        for pair in &self.renewable_sites {
            for &bus in pair {
                if !has_bus(bus) {
                    return Err(CaseError::UnknownBus { what: "renewable site", id: format!("{pair:?}"), bus });
                }
            }
        }
        Ok(())
    }
}

fn invalid(what: &'static str, id: &str, reason: &str) -> CaseError {
    CaseError::Invalid {
        what,
        id: id.to_string(),
        reason: reason.to_string(),
    }
}

fn check_unique<'a>(what: &'static str, ids: impl Iterator<Item = &'a str>) -> Result<(), CaseError> {
    let mut seen: Vec<&str> = ids.collect();
    seen.sort_unstable();
    match seen.windows(2).find(|w| w[0] == w[1]) {
        Some(w) => Err(CaseError::Duplicate {
            what,
            id: w[0].to_string(),
        }),
        None => Ok(()),
    }
}

fn validate_generator(g: &Generator) -> Result<(), CaseError> {
    let bad = |reason: &str| Err(invalid("generator", &g.id, reason));
    if !(0.0 <= g.p_min && g.p_min <= g.p_max) {
        return bad("need 0 <= p_min <= p_max");
    }
    if g.segments.is_empty() {
        return bad("cost curve has no segments");
    }
    let width: f64 = g.segments.iter().map(|s| s.width).sum();
    if (width - (g.p_max - g.p_min)).abs() > 1e-6 || g.segments.iter().any(|s| !(s.width >= 0.0)) {
        return bad("segment widths must sum to p_max - p_min");
    }
    if g.segments.windows(2).any(|w| w[1].marginal_cost < w[0].marginal_cost) {
        return bad("segment marginal costs must be nondecreasing");
    }
    if !(g.ramp_up > 0.0 && g.ramp_down > 0.0) {
        return bad("ramp rates must be positive");
    }
    if !(g.emission_rate >= 0.0) {
        return bad("emission rate must be nonnegative");
    }
    let costs = [g.no_load_cost, g.startup_cost, g.shutdown_cost, g.deploy_cost];
    if costs.iter().any(|c| !c.is_finite()) {
        return bad("costs must be finite");
    }
    Ok(())
}

/// Generic unit for a fuel the case does not contain. Its ten-minute ramp
/// equals its minimum output, so it can start and stop in any hour.
pub fn template_unit(id: String, bus: u32, fuel: Fuel, p_max: f64) -> Generator {
    let cost = fuel.generation_cost();
    let p_min = 0.3 * p_max;
    Generator {
        id,
        bus,
        fuel,
        p_min,
        p_max,
        min_up: 4,
        min_down: 4,
        ramp_up: 0.03 * p_max,
        ramp_down: 0.03 * p_max,
        no_load_cost: p_min * cost,
        startup_cost: 2.0 * p_max * cost,
        shutdown_cost: 0.0,
        segments: alloc::vec![Segment {
            width: p_max - p_min,
            marginal_cost: cost,
        }],
        deploy_cost: 1.5 * cost,
        emission_rate: fuel.emission_rate(),
    }
}

/// Capacity of generic units created for fuels absent from a case, MW.
pub const TEMPLATE_UNIT_MW: f64 = 200.0;

/// Redistributes dispatchable capacity across fuels to match `mix`.
///
/// Total capacity is preserved. Units of a fuel are removed or cloned whole,
/// largest first, until the fuel is within half its smallest unit of the
/// target; the last unit added (or the smallest kept) is then resized to
/// close the remainder exactly. Added units are sited where capacity was
/// removed, largest freed bus first, so load pockets keep local supply.
pub fn apply_generation_mix(case: &GridCase, mix: &BTreeMap<String, f64>) -> Result<GridCase, CaseError> {
    let mut target: BTreeMap<Fuel, f64> = BTreeMap::new();
    for (name, &value) in mix {
        let fuel: Fuel = name.parse()?;
        if !(value >= 0.0) {
            return Err(CaseError::MixFraction { fuel: name.clone(), value });
        }
        target.insert(fuel, value);
    }
    let sum: f64 = target.values().sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(CaseError::MixSum(sum));
    }
    let total = case.total_capacity();
    if !(total > 0.0) {
        return Err(CaseError::NoCapacity);
    }
    let goal = |fuel: Fuel| target.get(&fuel).copied().unwrap_or(0.0) / sum * total;

    let mut gen_buses: Vec<u32> = case.generators.iter().map(|g| g.bus).collect();
    gen_buses.sort_unstable();
    gen_buses.dedup();

    let mut kept: BTreeMap<Fuel, Vec<Generator>> = BTreeMap::new();
    let mut ladders: BTreeMap<Fuel, Vec<Generator>> = BTreeMap::new();
    let mut freed: BTreeMap<u32, f64> = BTreeMap::new();
    for fuel in Fuel::ALL {
        let mut units: Vec<Generator> = case.generators.iter().filter(|g| g.fuel == fuel).cloned().collect();
        let mut ladder = units.clone();
        ladder.sort_by(|a, b| b.p_max.total_cmp(&a.p_max));
        let removed = if goal(fuel) > 0.0 {
            shrink(&mut units, goal(fuel))
        } else {
            core::mem::take(&mut units)
        };
        for g in removed {
            *freed.entry(g.bus).or_default() += g.p_max;
        }
        kept.insert(fuel, units);
        ladders.insert(fuel, ladder);
    }

    let mut sites = Sites {
        freed,
        fallback: gen_buses,
        next: 0,
    };
    let mut out = case.clone();
    out.generators.clear();
    for fuel in Fuel::ALL {
        let goal = goal(fuel);
        if goal <= 0.0 {
            continue;
        }
        let mut ladder = ladders.remove(&fuel).unwrap_or_default();
        if ladder.is_empty() {
            let home = sites.fallback[0];
            ladder.push(template_unit(
                format!("{}-T", fuel.as_str()),
                home,
                fuel,
                TEMPLATE_UNIT_MW.min(goal),
            ));
        }
        let units = kept.remove(&fuel).unwrap_or_default();
        out.generators.extend(grow(units, &ladder, goal, &mut sites));
    }
    out.validate()?;
    Ok(out)
}

struct Sites {
    freed: BTreeMap<u32, f64>,
    fallback: Vec<u32>,
    next: usize,
}

impl Sites {
    /// Bus with the most capacity still unreplaced; round robin over the
    /// generator buses once every freed megawatt is taken.
    fn place(&mut self, p_max: f64) -> u32 {
        let best = self
            .freed
            .iter()
            .filter(|(_, &mw)| mw > 1e-9)
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(a.0)))
            .map(|(&bus, _)| bus);
        match best {
            Some(bus) => {
                *self.freed.get_mut(&bus).unwrap() -= p_max;
                bus
            }
            None => {
                let bus = self.fallback[self.next % self.fallback.len()];
                self.next += 1;
                bus
            }
        }
    }
}

/// Removes whole units, largest fitting first, until capacity is within half
/// the smallest unit above `goal`. Returns the removed units.
fn shrink(units: &mut Vec<Generator>, goal: f64) -> Vec<Generator> {
    let slack = units.iter().map(|g| g.p_max).fold(f64::INFINITY, f64::min) / 2.0;
    let mut capacity: f64 = units.iter().map(|g| g.p_max).sum();
    let mut removed = Vec::new();
    while !units.is_empty() && capacity - goal > slack {
        let excess = capacity - goal;
        let pick = (0..units.len())
            .filter(|&i| units[i].p_max <= excess + slack)
            .max_by(|&a, &b| units[a].p_max.total_cmp(&units[b].p_max).then(b.cmp(&a)))
            .unwrap_or_else(|| {
                (0..units.len())
                    .min_by(|&a, &b| units[a].p_max.total_cmp(&units[b].p_max))
                    .unwrap()
            });
        capacity -= units[pick].p_max;
        removed.push(units.remove(pick));
    }
    removed
}

/// Clones ladder units until within half the smallest rung of `goal`, then
/// resizes one unit to hit `goal` exactly.
fn grow(mut units: Vec<Generator>, ladder: &[Generator], goal: f64, sites: &mut Sites) -> Vec<Generator> {
    let slack = ladder.last().map_or(0.0, |g| g.p_max) / 2.0;
    let mut capacity: f64 = units.iter().map(|g| g.p_max).sum();
    let mut last_added = None;
    let mut clones = 0usize;
    while goal - capacity > slack || units.is_empty() {
        let gap = goal - capacity;
        let template = ladder
            .iter()
            .find(|g| g.p_max <= gap + slack)
            .unwrap_or_else(|| ladder.last().unwrap());
        clones += 1;
        let mut unit = template.clone();
        unit.id = format!("{}-c{}", template.id, clones);
        unit.bus = sites.place(unit.p_max);
        capacity += unit.p_max;
        units.push(unit);
        last_added = Some(units.len() - 1);
    }
    let adjust = last_added.unwrap_or_else(|| {
        (0..units.len())
            .min_by(|&a, &b| units[a].p_max.total_cmp(&units[b].p_max).then(b.cmp(&a)))
            .unwrap()
    });
    let unit = &mut units[adjust];
    let factor = (unit.p_max + goal - capacity) / unit.p_max;
    unit.scale(factor);
    units
}
