use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pulse::PulseSequence;
use super::system::{control_operators, drift_hamiltonian, NmrSystemSpec};
use crate::error::{Error, Result};
use crate::linalg::{c, cis, hermitian_eigen, inner, CMatrix, ZERO};

/// `|Tr(U† V)| / 2^n`.
pub fn fidelity_hs(u: &CMatrix, v: &CMatrix) -> Result<f64> {
    if u.shape() != v.shape() || u.nrows() != u.ncols() {
        return Err(Error::Dimension(format!("{:?} vs {:?}", u.shape(), v.shape())));
    }
    Ok(inner(u, v).norm() / u.nrows() as f64)
}

struct StepExp {
    /// `−dt·λ_j`, so that `e^{i·angles[j]}` are the step's eigenphases.
    angles: Vec<f64>,
    phases: Vec<Complex64>,
    vectors: CMatrix,
    u: CMatrix,
}

struct Model {
    drift: CMatrix,
    controls: Vec<[CMatrix; 2]>,
}

impl Model {
    fn new(spec: &NmrSystemSpec, pulse: &PulseSequence) -> Result<Model> {
        if pulse.steps() > 0 && pulse.channels() != spec.n_channels() {
            return Err(Error::Dimension(format!(
                "pulse drives {} channels, system has {}",
                pulse.channels(),
                spec.n_channels()
            )));
        }
        Ok(Model { drift: drift_hamiltonian(spec), controls: control_operators(spec)? })
    }

    fn step(&self, row: &[[f64; 2]], scale: f64, dt: f64) -> StepExp {
        let mut h = self.drift.clone();
        for (ops, [x, y]) in self.controls.iter().zip(row) {
            h += &ops[0] * c(scale * x, 0.0);
            h += &ops[1] * c(scale * y, 0.0);
        }
        let eig = hermitian_eigen(&h);
        let angles: Vec<f64> = eig.values.iter().map(|l| -dt * l).collect();
        let phases: Vec<Complex64> = angles.iter().map(|a| cis(*a)).collect();
        let mut scaled = eig.vectors.clone();
        for (j, p) in phases.iter().enumerate() {
            for i in 0..scaled.nrows() {
                scaled[(i, j)] *= p;
            }
        }
        let u = &scaled * eig.vectors.adjoint();
        StepExp { angles, phases, vectors: eig.vectors, u }
    }

    fn propagate(&self, pulse: &PulseSequence, scale: f64) -> CMatrix {
        let d = self.drift.nrows();
        let mut u = CMatrix::identity(d, d);
        for row in &pulse.amplitudes {
            u = &self.step(row, scale, pulse.dt).u * u;
        }
        u
    }

    /// `|Tr(T†U)|/d` and its gradient for one RF scale.
    fn value_and_gradient(&self, target: &CMatrix, pulse: &PulseSequence, scale: f64) -> (f64, Vec<f64>) {
        let d = self.drift.nrows();
        let dt = pulse.dt;
        let steps: Vec<StepExp> = pulse.amplitudes.iter().map(|row| self.step(row, scale, dt)).collect();
        // forward[k] = U_k ⋯ U_1 (forward[0] = 1)
        let mut forward = vec![CMatrix::identity(d, d)];
        for s in &steps {
            let next = &s.u * forward.last().expect("non-empty");
            forward.push(next);
        }
        let t_dag = target.adjoint();
        let g = (&t_dag * forward.last().expect("non-empty")).trace();
        let value = g.norm() / d as f64;
        // d|g| = Re(conj(g)/|g| · dg); at g = 0 follow Re(dg)
        let unit = if g.norm() > 1e-14 { g.conj() / g.norm() } else { c(1.0, 0.0) };
        let m = steps.len();
        let mut grad = vec![0.0; 2 * m * self.controls.len()];
        let mut back = t_dag; // T† U_M ⋯ U_{k+1}
        for k in (0..m).rev() {
            let s = &steps[k];
            let v = &s.vectors;
            let vd = v.adjoint();
            let mk = &vd * &forward[k] * &back * v;
            for (ch, ops) in self.controls.iter().enumerate() {
                for (comp, op) in ops.iter().enumerate() {
                    let kp = &vd * op * v * c(0.0, -dt * scale);
                    let mut dg = ZERO;
                    for j in 0..d {
                        for l in 0..d {
                            dg += mk[(l, j)] * gamma(s, j, l) * kp[(j, l)];
                        }
                    }
                    grad[2 * (k * self.controls.len() + ch) + comp] = (unit * dg).re / d as f64;
                }
            }
            back *= &s.u;
        }
        (value, grad)
    }
}

/// Divided difference `(e^{a_j} − e^{a_l})/(a_j − a_l)` at `a = −i dt λ`.
fn gamma(s: &StepExp, j: usize, l: usize) -> Complex64 {
    let (ej, el) = (s.phases[j], s.phases[l]);
    let diff = c(0.0, s.angles[j] - s.angles[l]);
    if diff.norm() < 1e-8 {
        // e^{a_l}·(e^{δ} − 1)/δ ≈ e^{a_l}(1 + δ/2)
        el * (c(1.0, 0.0) + diff * 0.5)
    } else {
        (ej - el) / diff
    }
}

/// `U = U_M ⋯ U_1` for the pulse at unit RF scale.
pub fn propagate(spec: &NmrSystemSpec, pulse: &PulseSequence) -> Result<CMatrix> {
    propagate_scaled(spec, pulse, 1.0)
}

/// Propagator with every control amplitude multiplied by `scale`.
pub fn propagate_scaled(spec: &NmrSystemSpec, pulse: &PulseSequence, scale: f64) -> Result<CMatrix> {
    Ok(Model::new(spec, pulse)?.propagate(pulse, scale))
}

fn check_target(spec: &NmrSystemSpec, target: &CMatrix) -> Result<()> {
    if target.nrows() != spec.dim() || target.ncols() != spec.dim() {
        return Err(Error::Dimension(format!(
            "{}x{} target for a {}-spin system",
            target.nrows(),
            target.ncols(),
            spec.n
        )));
    }
    Ok(())
}

/// Mean fidelity over `scales` and its exact gradient with respect to the
/// flattened amplitudes (`[step][channel][x|y]`).
pub fn objective_and_gradient(
    spec: &NmrSystemSpec,
    target: &CMatrix,
    pulse: &PulseSequence,
    scales: &[f64],
) -> Result<(f64, Vec<f64>)> {
    check_target(spec, target)?;
    if scales.is_empty() {
        return Err(Error::Validation("empty RF-scale set".into()));
    }
    let model = Model::new(spec, pulse)?;
    let parts: Vec<(f64, Vec<f64>)> =
        scales.par_iter().map(|&s| model.value_and_gradient(target, pulse, s)).collect();
    // fixed accumulation order keeps results independent of scheduling
    let w = 1.0 / scales.len() as f64;
    let mut value = 0.0;
    let mut grad = vec![0.0; parts[0].1.len()];
    for (v, g) in parts {
        value += w * v;
        for (a, b) in grad.iter_mut().zip(g) {
            *a += w * b;
        }
    }
    Ok((value, grad))
}

fn objective(model: &Model, target: &CMatrix, pulse: &PulseSequence, scales: &[f64]) -> f64 {
    let d = target.nrows() as f64;
    let values: Vec<f64> = scales
        .par_iter()
        .map(|&s| inner(target, &model.propagate(pulse, s)).norm() / d)
        .collect();
    values.iter().sum::<f64>() / scales.len() as f64
}

/// Central finite differences of the objective, for checking the gradient.
pub fn finite_difference_gradient(
    spec: &NmrSystemSpec,
    target: &CMatrix,
    pulse: &PulseSequence,
    scales: &[f64],
    h: f64,
) -> Result<Vec<f64>> {
    check_target(spec, target)?;
    let model = Model::new(spec, pulse)?;
    let x = pulse.flat();
    Ok((0..x.len())
        .map(|i| {
            let mut plus = x.clone();
            let mut minus = x.clone();
            plus[i] += h;
            minus[i] -= h;
            let fp = objective(&model, target, &pulse.from_flat(&plus), scales);
            let fm = objective(&model, target, &pulse.from_flat(&minus), scales);
            (fp - fm) / (2.0 * h)
        })
        .collect())
}

/// Starting point of the optimisation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialPulse {
    Zero,
    /// Seeded uniform amplitudes in `±fraction · A`, where `A` is the
    /// smaller of the cap and `1/(2T)`, the constant amplitude that turns a
    /// unit-weight spin by `π/2` over the whole pulse duration `T`.
    Random { seed: u64, fraction: f64 },
    Given(PulseSequence),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GrapeConfig {
    pub steps: usize,
    /// Seconds per step.
    pub dt: f64,
    /// Cap on `√(x² + y²)` per channel, Hz.
    pub amp_cap_hz: f64,
    pub max_iterations: usize,
    /// Control-amplitude multipliers averaged in the objective.
    pub rf_scales: Vec<f64>,
    /// Stop once the objective reaches this.
    pub target_fidelity: f64,
    pub initial: InitialPulse,
    /// First trial step along the max-normalised gradient, Hz; `None` means `amp_cap_hz / 10`.
    pub initial_step_hz: Option<f64>,
}

impl Default for GrapeConfig {
    fn default() -> Self {
        GrapeConfig {
            steps: 20,
            dt: 1e-4,
            amp_cap_hz: 5_000.0,
            max_iterations: 200,
            rf_scales: vec![0.95, 1.0, 1.05],
            target_fidelity: 1.0 - 1e-6,
            initial: InitialPulse::Random { seed: 1, fraction: 0.5 },
            initial_step_hz: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GrapeResult {
    pub pulse: PulseSequence,
    pub fidelity: f64,
    pub per_scale_fidelity: Vec<f64>,
    pub rf_scales: Vec<f64>,
    pub iterations: usize,
    /// Objective after each accepted step, starting with the initial pulse.
    pub trajectory: Vec<f64>,
    pub converged: bool,
}

fn initial_pulse(spec: &NmrSystemSpec, config: &GrapeConfig) -> Result<PulseSequence> {
    let channels = spec.n_channels();
    let mut pulse = match &config.initial {
        InitialPulse::Zero => PulseSequence::zeros(config.steps, channels, config.dt)?,
        InitialPulse::Random { seed, fraction } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let natural = 1.0 / (2.0 * config.dt * config.steps.max(1) as f64);
            let span = fraction * config.amp_cap_hz.min(natural);
            let amplitudes = (0..config.steps)
                .map(|_| {
                    (0..channels)
                        .map(|_| [rng.random_range(-span..=span), rng.random_range(-span..=span)])
                        .collect()
                })
                .collect();
            PulseSequence::new(config.dt, amplitudes)?
        }
        InitialPulse::Given(p) => {
            if p.channels() != channels && p.steps() > 0 {
                return Err(Error::Dimension("initial pulse channel count mismatch".into()));
            }
            p.clone()
        }
    };
    pulse.clip(config.amp_cap_hz);
    Ok(pulse)
}

/// Limited-memory quasi-Newton direction (two-loop recursion) for ascent.
fn lbfgs_direction(grad: &[f64], history: &[(Vec<f64>, Vec<f64>)]) -> Vec<f64> {
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    // work on the minimisation problem −Φ
    let mut q: Vec<f64> = grad.iter().map(|g| -g).collect();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y) in history.iter().rev() {
        let rho = 1.0 / dot(y, s);
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push((rho, a));
    }
    if let Some((s, y)) = history.last() {
        let gamma = dot(s, y) / dot(y, y);
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
    }
    for ((s, y), (rho, a)) in history.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q.iter().map(|v| -v).collect()
}

/// Number of curvature pairs kept by the quasi-Newton direction.
const LBFGS_MEMORY: usize = 10;

/// Gradient ascent with a backtracking line search on the RF-averaged
/// Hilbert–Schmidt fidelity. Directions come from a limited-memory
/// quasi-Newton model of the exact gradients; only steps that raise the
/// objective are accepted. Returns the best pulse found.
pub fn grape_optimize(
    spec: &NmrSystemSpec,
    target: &CMatrix,
    config: &GrapeConfig,
) -> Result<GrapeResult> {
    check_target(spec, target)?;
    if config.rf_scales.is_empty() {
        return Err(Error::Validation("empty RF-scale set".into()));
    }
    if !(config.amp_cap_hz > 0.0) {
        return Err(Error::Domain("amplitude cap must be positive".into()));
    }
    let mut pulse = initial_pulse(spec, config)?;
    let model = Model::new(spec, &pulse)?;
    let (mut value, mut grad) = objective_and_gradient(spec, target, &pulse, &config.rf_scales)?;
    let mut trajectory = vec![value];
    let mut history: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    let first_step = config.initial_step_hz.unwrap_or(config.amp_cap_hz / 10.0);
    let mut iterations = 0;
    while iterations < config.max_iterations && value < config.target_fidelity {
        let gmax = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if gmax <= 1e-300 {
            break;
        }
        let mut direction = lbfgs_direction(&grad, &history);
        let slope: f64 = direction.iter().zip(&grad).map(|(d, g)| d * g).sum();
        if history.is_empty() || slope <= 0.0 {
            history.clear();
            direction = grad.iter().map(|g| g * first_step / gmax).collect();
        }
        let x = pulse.flat();
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<f64> = x.iter().zip(&direction).map(|(a, d)| a + alpha * d).collect();
            let mut candidate = pulse.from_flat(&trial);
            candidate.clip(config.amp_cap_hz);
            let v = objective(&model, target, &candidate, &config.rf_scales);
            if v > value {
                accepted = Some(candidate);
                break;
            }
            alpha *= 0.5;
        }
        let Some(next) = accepted else {
            if history.is_empty() {
                break;
            }
            // the quasi-Newton model failed; retry from a plain gradient step
            history.clear();
            continue;
        };
        iterations += 1;
        let (next_value, next_grad) =
            objective_and_gradient(spec, target, &next, &config.rf_scales)?;
        let s_vec: Vec<f64> = next.flat().iter().zip(&x).map(|(a, b)| a - b).collect();
        // curvature pair for the minimisation of −Φ
        let y_vec: Vec<f64> = grad.iter().zip(&next_grad).map(|(g0, g1)| g0 - g1).collect();
        let sy: f64 = s_vec.iter().zip(&y_vec).map(|(a, b)| a * b).sum();
        if sy > 1e-300 {
            history.push((s_vec, y_vec));
            if history.len() > LBFGS_MEMORY {
                history.remove(0);
            }
        }
        pulse = next;
        value = next_value;
        grad = next_grad;
        trajectory.push(value);
    }
    let per_scale_fidelity = config
        .rf_scales
        .iter()
        .map(|&s| fidelity_hs(target, &model.propagate(&pulse, s)))
        .collect::<Result<Vec<_>>>()?;
    Ok(GrapeResult {
        pulse,
        fidelity: value,
        per_scale_fidelity,
        rf_scales: config.rf_scales.clone(),
        iterations,
        trajectory,
        converged: value >= config.target_fidelity,
    })
}
