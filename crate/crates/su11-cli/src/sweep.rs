//! Parameter sweeps over the closed-form pipeline, with the figure presets
//! that reproduce the reference curves as data tables.
//!
//! Every sweep is a cartesian product of (grid point × detection mode × m).
//! Points are independent and may be evaluated in parallel; rows are always
//! emitted in deterministic sweep-major, mode-minor order regardless of
//! scheduling. Divergent sensitivities surface as `inf` values, never as
//! dropped rows.

use anyhow::{bail, Context, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use su11_core::{
    observables, optimizer, qfi, DpsoObjective, InterferometerParams,
};

use crate::oracle::{
    self, converged_scalar, default_cutoff, oracle_qfi_pure, oracle_sensitivity,
};
use crate::output::{Table, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepVar {
    Phi,
    Alpha,
    G,
    Transmissivity,
    Eta,
    Split,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            SweepVar::Phi => "phi",
            SweepVar::Alpha => "alpha",
            SweepVar::G => "g",
            SweepVar::Transmissivity => "T",
            SweepVar::Eta => "eta",
            SweepVar::Split => "t",
        }
    }
}

impl std::str::FromStr for SweepVar {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "phi" => Ok(SweepVar::Phi),
            "alpha" => Ok(SweepVar::Alpha),
            "g" => Ok(SweepVar::G),
            "T" => Ok(SweepVar::Transmissivity),
            "eta" => Ok(SweepVar::Eta),
            "t" => Ok(SweepVar::Split),
            other => Err(format!("unknown sweep variable '{other}' (phi|alpha|g|T|eta|t)")),
        }
    }
}

/// Where the m photons are taken from: none, one of the localized ports, or
/// the delocalized superposition with optimized (or pinned) coefficient t.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DetectionMode {
    Standard,
    ModeA,
    ModeB,
    Dpso,
}

impl DetectionMode {
    pub fn name(self) -> &'static str {
        match self {
            DetectionMode::Standard => "standard",
            DetectionMode::ModeA => "mode_a",
            DetectionMode::ModeB => "mode_b",
            DetectionMode::Dpso => "dpso",
        }
    }
}

impl std::str::FromStr for DetectionMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "standard" => Ok(DetectionMode::Standard),
            "mode_a" => Ok(DetectionMode::ModeA),
            "mode_b" => Ok(DetectionMode::ModeB),
            "dpso" => Ok(DetectionMode::Dpso),
            other => Err(format!(
                "unknown mode '{other}' (standard|mode_a|mode_b|dpso)"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    Sensitivity,
    Qfi,
    QfiLossy,
    Limits,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::Sensitivity => "sensitivity",
            Quantity::Qfi => "qfi",
            Quantity::QfiLossy => "qfi_lossy",
            Quantity::Limits => "limits",
        }
    }
}

impl std::str::FromStr for Quantity {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "sensitivity" => Ok(Quantity::Sensitivity),
            "qfi" => Ok(Quantity::Qfi),
            "qfi-lossy" | "qfi_lossy" => Ok(Quantity::QfiLossy),
            "limits" => Ok(Quantity::Limits),
            other => Err(format!(
                "unknown quantity '{other}' (sensitivity|qfi|qfi-lossy|limits)"
            )),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub var: SweepVar,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    /// Fixed parameter record; the swept variable's slot is overwritten per
    /// grid point.
    pub base: InterferometerParams,
    pub modes: Vec<DetectionMode>,
    pub ms: Vec<u32>,
    pub quantity: Quantity,
    /// Pin the delocalization coefficient globally instead of re-optimizing
    /// it at every sweep point.
    pub pin_t: Option<f64>,
    /// Measurement repetitions entering the Cramér-Rao bound.
    pub v: u64,
    /// Append a relative-delta column comparing each row's headline quantity
    /// against the cutoff-converged brute-force referee.
    pub check_oracle: bool,
    pub jobs: Option<usize>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.lo < self.hi) {
            bail!("sweep range requires lo < hi (got {} .. {})", self.lo, self.hi);
        }
        if self.n < 2 {
            bail!("sweep requires at least 2 points");
        }
        if self.modes.is_empty() {
            bail!("at least one mode is required");
        }
        if self.ms.is_empty() && self.modes.iter().any(|m| *m != DetectionMode::Standard) {
            bail!("subtraction modes require a nonempty m list");
        }
        if self.ms.iter().any(|&m| m == 0) {
            bail!("use mode 'standard' for m = 0 instead of listing it");
        }
        if self.var == SweepVar::Split
            && self.modes.iter().any(|m| *m != DetectionMode::Dpso)
        {
            bail!("sweeping t only makes sense for the dpso mode (t is fixed elsewhere)");
        }
        if self.var == SweepVar::Split && self.pin_t.is_some() {
            bail!("cannot both sweep and pin t");
        }
        if let Some(t) = self.pin_t {
            if !(0.0..=1.0).contains(&t) {
                bail!("--pin-t must lie in [0, 1]");
            }
        }
        if self.v == 0 {
            bail!("measurement count v must be positive");
        }
        Ok(())
    }

    fn grid(&self) -> Vec<f64> {
        let step = (self.hi - self.lo) / (self.n - 1) as f64;
        (0..self.n).map(|i| self.lo + step * i as f64).collect()
    }

    /// Row tasks in emission order: sweep-major, then mode, then m.
    fn tasks(&self) -> Vec<RowTask> {
        let mut tasks = Vec::new();
        for &x in &self.grid() {
            for &mode in &self.modes {
                match mode {
                    DetectionMode::Standard => {
                        tasks.push(RowTask { value: x, mode, m: 0 });
                    }
                    _ => {
                        for &m in &self.ms {
                            tasks.push(RowTask { value: x, mode, m });
                        }
                    }
                }
            }
        }
        tasks
    }

    pub fn columns(&self) -> Vec<&'static str> {
        let mut cols = vec!["phi", "alpha", "g", "T", "eta", "mode", "m", "s", "t"];
        match self.quantity {
            Quantity::Sensitivity => cols.push("dphi"),
            Quantity::Qfi => cols.push("f"),
            Quantity::QfiLossy => cols.push("f_lossy"),
            Quantity::Limits => {
                cols.extend(["dphi", "f", "f_lossy", "n", "qcrb", "sql", "hl", "v"]);
            }
        }
        if self.check_oracle {
            cols.push("oracle_delta");
        }
        cols
    }
}

#[derive(Clone, Copy, Debug)]
struct RowTask {
    value: f64,
    mode: DetectionMode,
    m: u32,
}

/// The parameter point of one row, after applying the swept value and the
/// mode's split (for dpso the split is resolved separately).
fn task_params(spec: &SweepSpec, task: &RowTask) -> Result<InterferometerParams> {
    let mut p = spec.base.with_order(task.m);
    match spec.var {
        SweepVar::Phi => p = p.with_phi(task.value),
        SweepVar::Alpha => p = p.with_alpha(Complex64::new(task.value, 0.0)),
        SweepVar::G => p = p.with_gain(task.value)?,
        SweepVar::Transmissivity => p = p.with_transmissivity(task.value)?,
        SweepVar::Eta => p = p.with_eta(task.value)?,
        SweepVar::Split => p = p.with_split(task.value)?,
    }
    let p = match task.mode {
        DetectionMode::Standard => p.with_order(0),
        DetectionMode::ModeA => p.with_split(0.0)?,
        DetectionMode::ModeB => p.with_split(1.0)?,
        DetectionMode::Dpso => match (spec.var, spec.pin_t) {
            (SweepVar::Split, _) => p,
            (_, Some(t)) => p.with_split(t)?,
            (_, None) => p, // resolved by the optimizer per point
        },
    };
    Ok(p)
}

fn dpso_objective(q: Quantity) -> DpsoObjective {
    match q {
        Quantity::Sensitivity | Quantity::Limits => DpsoObjective::Sensitivity,
        Quantity::Qfi => DpsoObjective::Qfi,
        Quantity::QfiLossy => DpsoObjective::QfiLossy,
    }
}

/// Relative delta of the row's headline quantity against the converged
/// brute-force referee; `NaN` when the referee cannot reach the point.
fn oracle_delta(q: Quantity, p: &InterferometerParams, closed: f64) -> f64 {
    let start = default_cutoff(p);
    let reference: oracle::Result<(f64, usize)> = match q {
        Quantity::Sensitivity | Quantity::Limits => {
            converged_scalar(|c| oracle_sensitivity(p, c), start)
        }
        Quantity::Qfi => {
            converged_scalar(|c| oracle_qfi_pure(p, c).map(|r| r.variance_route), start)
        }
        Quantity::QfiLossy => converged_scalar(
            |c| {
                let pm = oracle::oracle_photon_moments(&p.lossless(), c)?;
                Ok(qfi::lossy_bound(p.eta, pm.mean, pm.variance))
            },
            start,
        ),
    };
    match reference {
        Ok((r, _)) => {
            if closed.is_infinite() && r.is_infinite() {
                0.0
            } else {
                (closed - r).abs() / r.abs().max(1e-12)
            }
        }
        Err(_) => f64::NAN,
    }
}

fn evaluate(spec: &SweepSpec, task: &RowTask) -> Result<Vec<Value>> {
    let mut p = task_params(spec, task)?;
    if task.mode == DetectionMode::Dpso && spec.var != SweepVar::Split && spec.pin_t.is_none()
    {
        let r = optimizer::optimize_dpso_t(&p, dpso_objective(spec.quantity))
            .with_context(|| format!("t optimization failed at {} = {}", spec.var.name(), task.value))?;
        p = p.with_split(r.argmin).expect("optimizer stays within [0, 1]");
    }
    let mut row: Vec<Value> = vec![
        p.phi.into(),
        p.alpha.re.into(),
        p.g.into(),
        p.transmissivity.into(),
        p.eta.into(),
        task.mode.name().into(),
        Value::Int(task.m as i64),
        p.s.into(),
        p.t.into(),
    ];
    let headline;
    match spec.quantity {
        Quantity::Sensitivity => {
            headline = observables::phase_sensitivity(&p)?;
            row.push(headline.into());
        }
        Quantity::Qfi => {
            headline = qfi::qfi_ideal(&p)?;
            row.push(headline.into());
        }
        Quantity::QfiLossy => {
            headline = qfi::qfi_lossy(&p)?;
            row.push(headline.into());
        }
        Quantity::Limits => {
            headline = observables::phase_sensitivity(&p)?;
            let r = qfi::limits(&p, spec.v)?;
            row.push(headline.into());
            row.extend([
                r.f_ideal.into(),
                r.f_lossy.into(),
                r.n_total.into(),
                r.qcrb.into(),
                r.sql.into(),
                r.hl.into(),
                Value::Int(r.v as i64),
            ]);
        }
    }
    if spec.check_oracle {
        row.push(oracle_delta(spec.quantity, &p, headline).into());
    }
    Ok(row)
}

/// Run the sweep; rows come back in deterministic order whatever the level
/// of parallelism.
pub fn run_sweep(spec: &SweepSpec) -> Result<Table> {
    spec.validate()?;
    let tasks = spec.tasks();
    let compute = || -> Result<Vec<Vec<Value>>> {
        tasks
            .par_iter()
            .map(|task| evaluate(spec, task))
            .collect::<Result<Vec<_>>>()
    };
    let rows = match spec.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .context("failed to build worker pool")?
            .install(compute)?,
        None => compute()?,
    };
    let mut table = Table::new(&spec.columns());
    for row in rows {
        table.push(row);
    }
    Ok(table)
}

/// The hard-coded parameter grids of the reference figures (the captions
/// fully specify the fixed parameters; grid densities are chosen for smooth
/// curves). Returns `None` for unknown names.
pub fn figure_preset(name: &str) -> Option<SweepSpec> {
    let base = |alpha: f64, phi: f64| {
        InterferometerParams::new(1.0, Complex64::new(alpha, 0.0), 0.5, 1)
            .expect("preset parameters are valid")
            .with_phi(phi)
    };
    let all_modes = vec![
        DetectionMode::Standard,
        DetectionMode::ModeA,
        DetectionMode::ModeB,
        DetectionMode::Dpso,
    ];
    let ms = vec![1, 2, 3];
    let spec = |var, lo, hi, n, base, modes, quantity| SweepSpec {
        var,
        lo,
        hi,
        n,
        base,
        modes,
        ms: ms.clone(),
        quantity,
        pin_t: None,
        v: 1,
        check_oracle: false,
        jobs: None,
    };
    Some(match name {
        // Δφ(φ) at α = 1, g = 1, T = 1.
        "fig2" => spec(
            SweepVar::Phi,
            -1.5,
            1.5,
            301,
            base(1.0, 0.0),
            all_modes,
            Quantity::Sensitivity,
        ),
        // Δφ(α) at φ = 1, g = 1, T = 1.
        "fig3" => spec(
            SweepVar::Alpha,
            0.01,
            3.0,
            300,
            base(1.0, 1.0),
            all_modes,
            Quantity::Sensitivity,
        ),
        // Δφ(g) at φ = 1, α = 1, T = 1.
        "fig4" => spec(
            SweepVar::G,
            0.01,
            1.5,
            300,
            base(1.0, 1.0),
            all_modes,
            Quantity::Sensitivity,
        ),
        // Δφ(T) at φ = 1, g = 1, α = 3.
        "fig5" => spec(
            SweepVar::Transmissivity,
            0.01,
            1.0,
            100,
            base(3.0, 1.0),
            all_modes,
            Quantity::Sensitivity,
        ),
        // F(α) at g = 1.
        "fig6" => spec(
            SweepVar::Alpha,
            0.01,
            3.0,
            300,
            base(1.0, 1.0),
            all_modes,
            Quantity::Qfi,
        ),
        // F(g) at α = 1.
        "fig7" => spec(
            SweepVar::G,
            0.01,
            1.5,
            300,
            base(1.0, 1.0),
            all_modes,
            Quantity::Qfi,
        ),
        // F_L(η) at g = 1, α = 3.
        "fig9" => spec(
            SweepVar::Eta,
            0.0,
            1.0,
            101,
            base(3.0, 1.0),
            all_modes,
            Quantity::QfiLossy,
        ),
        // F_L(α) at g = 1, loss 0.7.
        "fig10" => spec(
            SweepVar::Alpha,
            0.01,
            3.0,
            300,
            base(1.0, 1.0).with_eta(0.7).expect("valid eta"),
            all_modes,
            Quantity::QfiLossy,
        ),
        // F_L(g) at α = 1, loss 0.7.
        "fig11" => spec(
            SweepVar::G,
            0.01,
            1.5,
            300,
            base(1.0, 1.0).with_eta(0.7).expect("valid eta"),
            all_modes,
            Quantity::QfiLossy,
        ),
        // Δφ(α) with the SQL/HL/QCRB benchmark columns, T = 1.
        "fig12" => spec(
            SweepVar::Alpha,
            0.01,
            3.0,
            300,
            base(1.0, 1.0),
            vec![DetectionMode::Dpso],
            Quantity::Limits,
        ),
        // Same as fig12 at T = 0.7.
        "fig13" => spec(
            SweepVar::Alpha,
            0.01,
            3.0,
            300,
            base(1.0, 1.0).with_transmissivity(0.7).expect("valid T"),
            vec![DetectionMode::Dpso],
            Quantity::Limits,
        ),
        _ => return None,
    })
}

pub const FIGURE_NAMES: &[&str] = &[
    "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig9", "fig10", "fig11", "fig12", "fig13",
];

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> SweepSpec {
        SweepSpec {
            var: SweepVar::Phi,
            lo: 0.5,
            hi: 1.0,
            n: 3,
            base: InterferometerParams::new(1.0, Complex64::new(1.0, 0.0), 0.5, 1)
                .unwrap(),
            modes: vec![DetectionMode::Standard, DetectionMode::ModeB, DetectionMode::Dpso],
            ms: vec![1, 2],
            quantity: Quantity::Sensitivity,
            pin_t: None,
            v: 1,
            check_oracle: false,
            jobs: None,
        }
    }

    #[test]
    fn deterministic_row_order_and_parallel_equivalence() {
        let spec = small_spec();
        let serial = run_sweep(&SweepSpec { jobs: Some(1), ..spec.clone() }).unwrap();
        let parallel = run_sweep(&SweepSpec { jobs: Some(4), ..spec }).unwrap();
        assert_eq!(serial.rows, parallel.rows);
        // 3 points × (standard + 2·mode_b + 2·dpso) = 15 rows.
        assert_eq!(serial.rows.len(), 15);
        // Sweep-major: first five rows share phi = 0.5.
        for row in &serial.rows[0..5] {
            assert_eq!(row[0], Value::Float(0.5));
        }
    }

    #[test]
    fn dpso_rows_carry_optimized_split() {
        let spec = SweepSpec { modes: vec![DetectionMode::Dpso], ms: vec![1], ..small_spec() };
        let table = run_sweep(&spec).unwrap();
        let t_col = table.columns.iter().position(|c| c == "t").unwrap();
        let d_col = table.columns.iter().position(|c| c == "dphi").unwrap();
        for row in &table.rows {
            let (Value::Float(t), Value::Float(d)) = (&row[t_col], &row[d_col]) else {
                panic!("schema mismatch");
            };
            assert!((0.0..=1.0).contains(t));
            assert!(*d > 0.0 && d.is_finite());
        }
        // Pinning t reproduces the plain closed form.
        let pinned = run_sweep(&SweepSpec { pin_t: Some(1.0), ..spec }).unwrap();
        let p = InterferometerParams::new(1.0, Complex64::new(1.0, 0.0), 1.0, 1)
            .unwrap()
            .with_phi(0.75);
        let expect = observables::phase_sensitivity(&p).unwrap();
        let Value::Float(d) = &pinned.rows[1][d_col] else { panic!() };
        assert!((d - expect).abs() < 1e-12);
    }

    #[test]
    fn figure_presets_resolve() {
        for name in FIGURE_NAMES {
            let spec = figure_preset(name).unwrap();
            spec.validate().unwrap();
        }
        assert!(figure_preset("fig8").is_none());
    }

    #[test]
    fn rejects_bad_ranges() {
        let mut spec = small_spec();
        spec.lo = 2.0;
        assert!(run_sweep(&spec).is_err());
        let mut spec = small_spec();
        spec.n = 1;
        assert!(run_sweep(&spec).is_err());
        let mut spec = small_spec();
        spec.var = SweepVar::Split;
        assert!(spec.validate().is_err());
    }
}
