//! Scenario execution: builds states, evolves them and samples observables.

use rayon::prelude::*;
use spincat_core::boson::{coherent_state, default_cutoff, embedded_overlap};
use spincat_core::dynamics::{build_hamiltonian, HamiltonianSpec, Propagator};
use spincat_core::observables::{
    fidelity, mean_spin, q_function, reduced_purity, squeezing_kitagawa_ueda, subsystem_operator, variance, QGrid,
    Subsystem,
};
use spincat_core::operator::JointOperator;
use spincat_core::spin::{product_state, spin_coherent_state, CollectiveSpinParams, DickeVector, JointState, OperatorKind};
use spincat_core::{SpinError, C64};

use crate::config::{fmt_f64, Axis, ObservableName, ScenarioConfig, ScenarioKind, Side};
use crate::output::OutputRecord;

/// Output table plus human-readable summary lines.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub record: OutputRecord,
    pub summary: Vec<String>,
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunOutcome, SpinError> {
    let mut outcome = match cfg.scenario {
        ScenarioKind::Fig1Fidelity => fig1(cfg)?,
        ScenarioKind::Fig2Squeezing => fig2(cfg)?,
        ScenarioKind::Fig3QFunctions => fig3(cfg)?,
        ScenarioKind::Fig4ExpVar | ScenarioKind::Custom => time_series(cfg)?,
    };
    let mut header = cfg.echo();
    header.append(&mut outcome.record.header);
    outcome.record.header = header;
    Ok(outcome)
}

fn linspace(start: f64, stop: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![start];
    }
    (0..steps).map(|k| start + (stop - start) * k as f64 / (steps - 1) as f64).collect()
}

fn zeta(cfg: &ScenarioConfig) -> C64 {
    C64::from_polar(cfg.zeta_modulus, cfg.zeta_phase)
}

fn fig1(cfg: &ScenarioConfig) -> Result<RunOutcome, SpinError> {
    let moduli = linspace(0.0, cfg.zeta_stop, cfg.zeta_steps);
    let ancilla = DickeVector::basis(CollectiveSpinParams::new(1)?, 0)?;
    let mut record = OutputRecord::default();
    let mut summary = Vec::new();
    record.push_column("zeta", moduli.clone());
    for &n_a in &cfg.n_a_values {
        let pa = CollectiveSpinParams::new(n_a)?;
        let column = moduli
            .par_iter()
            .map(|&r| {
                let z = C64::from_polar(r, cfg.zeta_phase);
                let boson = coherent_state(z, default_cutoff(z))?.with_ancilla(&ancilla);
                let spin = product_state(&spin_coherent_state(pa, z / (n_a as f64).sqrt())?, &ancilla);
                Ok(embedded_overlap(&spin, &boson)?.norm())
            })
            .collect::<Result<Vec<f64>, SpinError>>()?;
        let worst = column.iter().cloned().fold(f64::INFINITY, f64::min);
        summary.push(format!("N_A = {n_a}: minimum fidelity {worst:.6} over |zeta| <= {}", cfg.zeta_stop));
        record.push_column(format!("fidelity_na{n_a}"), column);
    }
    Ok(RunOutcome { record, summary })
}

/// Pre-built operators for the requested observables.
struct Sampler {
    observables: Vec<ObservableName>,
    variances: Vec<Option<JointOperator>>,
}

fn subsystem(side: Side) -> Subsystem {
    match side {
        Side::A => Subsystem::A,
        Side::B => Subsystem::B,
    }
}

fn axis_index(axis: Axis) -> usize {
    match axis {
        Axis::X => 0,
        Axis::Y => 1,
        Axis::Z => 2,
    }
}

impl Sampler {
    fn new(pa: CollectiveSpinParams, pb: CollectiveSpinParams, observables: &[ObservableName]) -> Self {
        let variances = observables
            .iter()
            .map(|o| match *o {
                ObservableName::Var(axis, side) => {
                    let kind = match axis {
                        Axis::X => OperatorKind::Jx,
                        Axis::Y => OperatorKind::Jy,
                        Axis::Z => OperatorKind::Jz,
                    };
                    Some(subsystem_operator(pa, pb, subsystem(side), kind))
                }
                _ => None,
            })
            .collect();
        Sampler { observables: observables.to_vec(), variances }
    }

    fn sample(&self, psi0: &JointState, psi: &JointState) -> Result<Vec<f64>, SpinError> {
        self.observables
            .iter()
            .zip(&self.variances)
            .map(|(o, op)| match *o {
                ObservableName::Fidelity => fidelity(psi0, psi),
                ObservableName::Mean(axis, side) => Ok(mean_spin(psi, subsystem(side))?[axis_index(axis)]),
                ObservableName::Var(..) => variance(op.as_ref().expect("built for every variance"), psi),
                ObservableName::Chi2A => match squeezing_kitagawa_ueda(psi, Subsystem::A) {
                    Ok(s) => Ok(s.chi_squared),
                    Err(SpinError::UndefinedDirection) => {
                        log::warn!("mean spin of A vanishes; chi2_a recorded as NaN");
                        Ok(f64::NAN)
                    }
                    Err(e) => Err(e),
                },
                ObservableName::Purity(side) => Ok(reduced_purity(psi, subsystem(side))),
            })
            .collect()
    }
}

struct Evolution {
    psi0: JointState,
    states: Vec<JointState>,
}

fn evolve(cfg: &ScenarioConfig, n_b: usize, zeta_b: C64, lambda_times: &[f64]) -> Result<Evolution, SpinError> {
    let pa = CollectiveSpinParams::new(cfg.n_a)?;
    let pb = CollectiveSpinParams::new(n_b)?;
    let psi0 = product_state(&spin_coherent_state(pa, zeta(cfg))?, &spin_coherent_state(pb, zeta_b)?);
    let spec = HamiltonianSpec {
        omega_a: cfg.omega_a,
        omega_b: cfg.omega_b,
        coupling: cfg.coupling,
        renormalized: false,
        picture: cfg.picture,
    };
    let prop = Propagator::new(&build_hamiltonian(pa, pb, &spec)?)?;
    let states = lambda_times
        .par_iter()
        .map(|lt| prop.propagate(&psi0, lt / cfg.coupling))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Evolution { psi0, states })
}

fn sample_all(sampler: &Sampler, ev: &Evolution) -> Result<Vec<Vec<f64>>, SpinError> {
    ev.states.par_iter().map(|psi| sampler.sample(&ev.psi0, psi)).collect()
}

/// Transposes per-time rows into per-observable columns.
fn columns(rows: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|k| rows.iter().map(|r| r[k]).collect()).collect()
}

fn extremes(times: &[f64], values: &[f64]) -> ((f64, f64), (f64, f64)) {
    let mut lo = (f64::INFINITY, 0.0);
    let mut hi = (f64::NEG_INFINITY, 0.0);
    for (&t, &v) in times.iter().zip(values) {
        if v < lo.0 {
            lo = (v, t);
        }
        if v > hi.0 {
            hi = (v, t);
        }
    }
    (lo, hi)
}

fn fig2(cfg: &ScenarioConfig) -> Result<RunOutcome, SpinError> {
    let times = cfg.lambda_times();
    let mut record = OutputRecord::default();
    let mut summary = Vec::new();
    record.push_column("lambda_t", times.clone());
    let pa = CollectiveSpinParams::new(cfg.n_a)?;
    for &n_b in &cfg.n_b_values {
        let pb = CollectiveSpinParams::new(n_b)?;
        let sampler = Sampler::new(pa, pb, &cfg.observables);
        let ev = evolve(cfg, n_b, zeta(cfg), &times)?;
        let cols = columns(&sample_all(&sampler, &ev)?, cfg.observables.len());
        for (o, col) in cfg.observables.iter().zip(cols) {
            if *o == ObservableName::Chi2A {
                let ((v, t), _) = extremes(&times, &col);
                summary.push(format!("N_B = {n_b}: minimum chi2_a {v:.6} at lambda t = {t:.4}"));
            }
            record.push_column(format!("{}_nb{n_b}", o.label()), col);
        }
    }
    Ok(RunOutcome { record, summary })
}

fn fig3(cfg: &ScenarioConfig) -> Result<RunOutcome, SpinError> {
    let times = cfg.lambda_times();
    let grid = QGrid::new(cfg.q_theta, cfg.q_phi)?;
    let ev = evolve(cfg, cfg.n_b, zeta(cfg), &times)?;
    let mut record = OutputRecord::default();
    let mut summary = Vec::new();
    let (thetas, phis): (Vec<f64>, Vec<f64>) =
        (0..cfg.q_theta).flat_map(|i| (0..cfg.q_phi).map(move |k| (grid.theta(i), grid.phi(k)))).unzip();
    record.push_column("theta", thetas);
    record.push_column("phi", phis);
    for (k, (lt, psi)) in times.iter().zip(&ev.states).enumerate() {
        let field = q_function(psi, grid);
        let f = fidelity(&ev.psi0, psi)?;
        let peaks = field.peaks(0.5).len();
        let values = if cfg.q_squared { field.values.iter().map(|v| v * v).collect() } else { field.values.clone() };
        record.header.push((format!("q_t{k}.lambda_t"), fmt_f64(*lt)));
        record.header.push((format!("q_t{k}.fidelity"), fmt_f64(f)));
        record.header.push((format!("q_t{k}.peaks"), peaks.to_string()));
        summary.push(format!(
            "lambda t = {lt:.4}: fidelity with initial {f:.6}, Q max {:.4}, {peaks} peak(s)",
            field.max()
        ));
        record.push_column(format!("q_t{k}"), values);
    }
    Ok(RunOutcome { record, summary })
}

fn time_series(cfg: &ScenarioConfig) -> Result<RunOutcome, SpinError> {
    let times = cfg.lambda_times();
    let pa = CollectiveSpinParams::new(cfg.n_a)?;
    let pb = CollectiveSpinParams::new(cfg.n_b)?;
    let zeta_b = match cfg.scenario {
        ScenarioKind::Custom => C64::from_polar(cfg.zeta_b_modulus, cfg.zeta_b_phase),
        _ => zeta(cfg),
    };
    let sampler = Sampler::new(pa, pb, &cfg.observables);
    let ev = evolve(cfg, cfg.n_b, zeta_b, &times)?;
    let cols = columns(&sample_all(&sampler, &ev)?, cfg.observables.len());
    let mut record = OutputRecord::default();
    let mut summary = Vec::new();
    record.push_column("lambda_t", times.clone());
    for (o, col) in cfg.observables.iter().zip(cols) {
        let ((lo, t_lo), (hi, t_hi)) = extremes(&times, &col);
        summary.push(format!(
            "{}: min {lo:.6} at lambda t = {t_lo:.4}, max {hi:.6} at lambda t = {t_hi:.4}",
            o.label()
        ));
        record.push_column(o.label(), col);
    }
    Ok(RunOutcome { record, summary })
}
