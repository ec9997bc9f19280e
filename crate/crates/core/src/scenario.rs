//! Scenario configuration, figure presets, concurrence trajectories and the
//! oracle validation report. This is the layer the command-line tool drives.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::entanglement::{concurrence, STEADY_THRESHOLD_R};
use crate::error::{DjcmError, Result};
use crate::evolution::{propagate_pair, DjcmState};
use crate::linalg::ComplexMatrix;
use crate::oracle::{
    integrate_pair, integrate_single, rate_from_spectral_density, IntegratorConfig,
};
use crate::propagator::{
    accumulated_i_plus, decay_rate_minus, decay_rate_plus, propagate_single, DressedState3,
    JcmParams,
};
use crate::states::{initial_state, reduce_all, ReductionTarget};

/// Samples used by every figure preset.
pub const PRESET_SAMPLES: usize = 1501;

/// Purities swept by the purity-dependence presets.
pub const PURITY_SWEEP: [f64; 6] = [0.0, 0.2, 0.38, 0.5703, 0.8, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = DjcmError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(DjcmError::InvalidParams(format!(
                "unknown output format {other:?}"
            ))),
        }
    }
}

fn default_targets() -> Vec<ReductionTarget> {
    ReductionTarget::ALL.to_vec()
}

/// Everything needed to produce one trajectory. Times are in units of
/// `1/γ0` of partition A.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub params_a: JcmParams,
    pub params_b: JcmParams,
    pub r: f64,
    pub t_max: f64,
    pub samples: usize,
    #[serde(default = "default_targets")]
    pub targets: Vec<ReductionTarget>,
    #[serde(default)]
    pub format: OutputFormat,
}

impl ScenarioConfig {
    /// Identical partitions with γ0 = 1 and ω0 = 0.
    pub fn symmetric(omega: f64, lambda: f64, r: f64, t_max: f64, samples: usize) -> Result<Self> {
        let p = JcmParams::scaled(omega, lambda)?;
        let cfg = Self {
            params_a: p,
            params_b: p,
            r,
            t_max,
            samples,
            targets: default_targets(),
            format: OutputFormat::Csv,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.params_a.validate()?;
        self.params_b.validate()?;
        if !(0.0..=1.0).contains(&self.r) {
            return Err(DjcmError::PurityOutOfRange(self.r));
        }
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(DjcmError::InvalidParams(format!(
                "t_max must be > 0, got {}",
                self.t_max
            )));
        }
        if self.samples < 2 {
            return Err(DjcmError::InvalidParams(format!(
                "samples must be >= 2, got {}",
                self.samples
            )));
        }
        if self.targets.is_empty() {
            return Err(DjcmError::InvalidParams(
                "at least one target pair is required".into(),
            ));
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        let n = self.samples;
        (0..n)
            .map(|k| {
                if k + 1 == n {
                    self.t_max
                } else {
                    self.t_max * k as f64 / (n - 1) as f64
                }
            })
            .collect()
    }

    pub fn with_r(&self, r: f64) -> Self {
        Self { r, ..self.clone() }
    }
}

/// Named parameter sets reproducing the published figures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig2a,
    Fig2b,
    Fig2c,
    Fig3a,
    Fig3b,
    Fig3c,
    Fig4,
    Fig5,
}

impl Preset {
    pub const ALL: [Preset; 8] = [
        Preset::Fig2a,
        Preset::Fig2b,
        Preset::Fig2c,
        Preset::Fig3a,
        Preset::Fig3b,
        Preset::Fig3c,
        Preset::Fig4,
        Preset::Fig5,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig2a => "fig2a",
            Preset::Fig2b => "fig2b",
            Preset::Fig2c => "fig2c",
            Preset::Fig3a => "fig3a",
            Preset::Fig3b => "fig3b",
            Preset::Fig3c => "fig3c",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
        }
    }

    /// `(Ω/γ0, λ/γ0, γ0 t_max)`.
    fn parameters(self) -> (f64, f64, f64) {
        match self {
            Preset::Fig2a => (1.0, 5.0, 15.0),
            Preset::Fig2b => (3.0, 5.0, 15.0),
            Preset::Fig2c => (50.0, 5.0, 30.0),
            // The |E1+> branch decays at γ0/5 here; the grid runs until
            // every concurrence has died out.
            Preset::Fig3a => (1.0, 1.0, 60.0),
            Preset::Fig3b => (1.0, 0.5, 15.0),
            // λ = 0.05γ0 stretches the |E1-> decay; the plateau needs γ0 t ≳ 60.
            Preset::Fig3c => (1.0, 0.05, 400.0),
            Preset::Fig4 => (50.0, 5.0, 30.0),
            Preset::Fig5 => (1.0, 0.05, 400.0),
        }
    }

    /// Purities plotted; single-trajectory presets use `r = 1`.
    pub fn purities(self) -> &'static [f64] {
        match self {
            Preset::Fig4 | Preset::Fig5 => &PURITY_SWEEP,
            _ => &[1.0],
        }
    }

    pub fn is_sweep(self) -> bool {
        self.purities().len() > 1
    }

    /// Base configuration (at the first purity of the sweep for sweeps, `r = 1` otherwise).
    pub fn config(self) -> ScenarioConfig {
        let (omega, lambda, t_max) = self.parameters();
        let r = if self.is_sweep() {
            1.0
        } else {
            self.purities()[0]
        };
        ScenarioConfig::symmetric(omega, lambda, r, t_max, PRESET_SAMPLES)
            .expect("preset parameters are valid")
    }

    pub fn names() -> Vec<&'static str> {
        Self::ALL.iter().map(|p| p.name()).collect()
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = DjcmError;
    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                DjcmError::InvalidParams(format!(
                    "unknown preset {s:?}; valid presets: {}",
                    Preset::names().join(", ")
                ))
            })
    }
}

/// Concurrence of every requested pair on the time grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcurrenceTable {
    pub targets: Vec<ReductionTarget>,
    pub times: Vec<f64>,
    /// `rows[k][j]` is the concurrence of `targets[j]` at `times[k]`.
    pub rows: Vec<Vec<f64>>,
}

impl ConcurrenceTable {
    pub fn column(&self, target: ReductionTarget) -> Option<Vec<f64>> {
        let j = self.targets.iter().position(|&t| t == target)?;
        Some(self.rows.iter().map(|row| row[j]).collect())
    }

    pub fn max_of(&self, target: ReductionTarget) -> Option<f64> {
        self.column(target)
            .map(|c| c.into_iter().fold(f64::NEG_INFINITY, f64::max))
    }

    pub fn header(&self) -> Vec<String> {
        std::iter::once("gamma0_t".to_string())
            .chain(self.targets.iter().map(|t| format!("C_{}", t.name())))
            .collect()
    }

    /// CSV with a header row, LF line endings and 12 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", self.header().join(","))?;
        for (t, row) in self.times.iter().zip(&self.rows) {
            let mut line = format_sig(*t, 12);
            for v in row {
                line.push(',');
                line.push_str(&format_sig(*v, 12));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// Concurrences of `targets` in the state at time `t`.
pub fn concurrences_at(
    initial: &DjcmState,
    pa: &JcmParams,
    pb: &JcmParams,
    t: f64,
    targets: &[ReductionTarget],
) -> Result<Vec<f64>> {
    let state = propagate_pair(initial, pa, pb, t)?;
    let pairs = reduce_all(&state)?;
    targets
        .iter()
        .map(|&target| {
            let k = ReductionTarget::ALL
                .iter()
                .position(|&x| x == target)
                .expect("known target");
            concurrence(&pairs[k])
        })
        .collect()
}

/// Closed-form concurrence trajectory for a scenario.
pub fn evolve(cfg: &ScenarioConfig) -> Result<ConcurrenceTable> {
    cfg.validate()?;
    let initial = initial_state(cfg.r)?;
    let times = cfg.times();
    let rows = times
        .iter()
        .map(|&t| concurrences_at(&initial, &cfg.params_a, &cfg.params_b, t, &cfg.targets))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConcurrenceTable {
        targets: cfg.targets.clone(),
        times,
        rows,
    })
}

/// First time the concurrence of `target` drops below `level`, located on
/// the scenario grid and refined by bisection to `1e-9`.
pub fn first_time_below(
    cfg: &ScenarioConfig,
    target: ReductionTarget,
    level: f64,
) -> Result<Option<f64>> {
    cfg.validate()?;
    let initial = initial_state(cfg.r)?;
    let value = |t: f64| -> Result<f64> {
        Ok(concurrences_at(&initial, &cfg.params_a, &cfg.params_b, t, &[target])?[0])
    };
    let times = cfg.times();
    if value(times[0])? < level {
        return Ok(Some(times[0]));
    }
    for w in times.windows(2) {
        if value(w[1])? < level {
            let (mut lo, mut hi) = (w[0], w[1]);
            while hi - lo > 1e-9 {
                let mid = 0.5 * (lo + hi);
                if value(mid)? < level {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(Some(hi));
        }
    }
    Ok(None)
}

/// Smallest purity on the grid `{0, Δr, 2Δr, …, 1}` whose trajectory ever
/// shows concurrence of `target` above `floor`. `None` if none does.
pub fn transient_threshold(
    cfg: &ScenarioConfig,
    target: ReductionTarget,
    dr: f64,
    floor: f64,
) -> Result<Option<f64>> {
    let steps = (1.0 / dr).round() as usize;
    for k in 0..=steps {
        let r = (k as f64 * dr).min(1.0);
        let run = ScenarioConfig {
            targets: vec![target],
            ..cfg.with_r(r)
        };
        let table = evolve(&run)?;
        if table.max_of(target).unwrap_or(0.0) > floor {
            return Ok(Some(r));
        }
    }
    Ok(None)
}

/// Thresholds applied by [`validate_scenario`].
pub const PROPAGATOR_DEVIATION_LIMIT: f64 = 1e-6;
pub const RATE_DEVIATION_LIMIT: f64 = 1e-8;
pub const NEGATIVITY_LIMIT: f64 = -1e-8;

/// Oracle comparison results for one scenario.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub params_a: JcmParams,
    pub params_b: JcmParams,
    pub r: f64,
    pub t_max: f64,
    pub integrator_step: f64,
    pub max_deviation_single: f64,
    pub max_deviation_pair: f64,
    pub max_rate_deviation_minus: f64,
    pub max_rate_deviation_plus: f64,
    pub min_eigenvalue: f64,
    pub min_i_plus: f64,
    pub max_trace_drift: f64,
    pub steady_threshold_r: f64,
    pub pass_single: bool,
    pub pass_pair: bool,
    pub pass_rates: bool,
    pub pass_positivity: bool,
    pub pass_i_plus: bool,
    pub pass: bool,
}

/// Partition-A marginal of a two-partition dressed state.
pub fn marginal_a(s: &DjcmState) -> Result<DressedState3> {
    let m = s.matrix();
    let reduced = ComplexMatrix::from_fn(3, |i, j| (0..3).map(|b| m[(3 * i + b, 3 * j + b)]).sum());
    DressedState3::new(reduced)
}

/// Integrator settings whose recorded times coincide with the scenario grid.
pub fn grid_aligned_integrator(cfg: &ScenarioConfig) -> IntegratorConfig {
    let dt = cfg.t_max / (cfg.samples - 1) as f64;
    let bound = IntegratorConfig::max_step(&[cfg.params_a, cfg.params_b]);
    let sub = (dt / bound).ceil().max(1.0) as usize;
    IntegratorConfig {
        step: dt / sub as f64,
        t_end: cfg.t_max,
        record_every: sub,
    }
}

/// Grid used for the rate-reconstruction check: `[0, min(t_max, 10)]`.
fn rate_grid(cfg: &ScenarioConfig) -> Vec<f64> {
    let end = cfg.t_max.min(10.0);
    (0..=200).map(|k| end * k as f64 / 200.0).collect()
}

/// Runs every oracle against the closed-form solution for `cfg`.
pub fn validate_scenario(cfg: &ScenarioConfig) -> Result<ValidationReport> {
    cfg.validate()?;
    let (pa, pb) = (cfg.params_a, cfg.params_b);
    let initial = initial_state(cfg.r)?;
    let icfg = grid_aligned_integrator(cfg);

    let pair = integrate_pair(&initial, &pa, &pb, &icfg)?;
    let mut max_dev_pair = 0.0_f64;
    let mut min_eig = f64::INFINITY;
    for (t, numeric) in pair.times.iter().zip(&pair.states) {
        let exact = propagate_pair(&initial, &pa, &pb, *t)?;
        max_dev_pair = max_dev_pair.max(exact.matrix().max_abs_diff(numeric));
        min_eig = min_eig.min(exact.min_eigenvalue()?);
    }

    let single0 = marginal_a(&initial)?;
    let single = integrate_single(&single0, &pa, &icfg)?;
    let mut max_dev_single = 0.0_f64;
    for (t, numeric) in single.times.iter().zip(&single.states) {
        let exact = propagate_single(&single0, &pa, *t)?;
        max_dev_single = max_dev_single.max(exact.matrix().max_abs_diff(numeric));
    }

    let mut dev_minus = 0.0_f64;
    let mut dev_plus = 0.0_f64;
    let mut min_i_plus = f64::INFINITY;
    for p in [pa, pb] {
        for t in rate_grid(cfg) {
            let minus = rate_from_spectral_density(&p, p.omega0 - p.omega, t)?;
            let plus = rate_from_spectral_density(&p, p.omega0 + p.omega, t)?;
            dev_minus = dev_minus.max((minus - decay_rate_minus(&p, t)?).abs());
            dev_plus = dev_plus.max((plus - decay_rate_plus(&p, t)?).abs());
        }
        for t in cfg.times() {
            min_i_plus = min_i_plus.min(accumulated_i_plus(&p, t)?);
        }
    }

    let pass_single = max_dev_single <= PROPAGATOR_DEVIATION_LIMIT;
    let pass_pair = max_dev_pair <= PROPAGATOR_DEVIATION_LIMIT;
    let pass_rates = dev_minus.max(dev_plus) <= RATE_DEVIATION_LIMIT;
    let pass_positivity = min_eig >= NEGATIVITY_LIMIT;
    let pass_i_plus = min_i_plus >= NEGATIVITY_LIMIT;
    Ok(ValidationReport {
        params_a: pa,
        params_b: pb,
        r: cfg.r,
        t_max: cfg.t_max,
        integrator_step: icfg.step,
        max_deviation_single: max_dev_single,
        max_deviation_pair: max_dev_pair,
        max_rate_deviation_minus: dev_minus,
        max_rate_deviation_plus: dev_plus,
        min_eigenvalue: min_eig,
        min_i_plus,
        max_trace_drift: pair.max_trace_drift.max(single.max_trace_drift),
        steady_threshold_r: STEADY_THRESHOLD_R,
        pass_single,
        pass_pair,
        pass_rates,
        pass_positivity,
        pass_i_plus,
        pass: pass_single && pass_pair && pass_rates && pass_positivity && pass_i_plus,
    })
}

/// Formats `x` with `digits` significant digits, in the style of `%.{digits}g`.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        return format!("{mantissa}e{exp}");
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
