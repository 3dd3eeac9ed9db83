//! Sweeping synthesis.
//!
//! The circuit is kept as a list of primitive operations `O_0 .. O_{m-1}` in
//! time order (one per slot, one per CNOT). While visiting operation `j` the
//! sweep holds its environment `E_j = Post_j^dag U_goal Pre_j^dag`, so that
//! `Tr(U_goal U_circ^dag) = Tr(O_j^dag E_j)`. Moving right uses
//! `E_{j+1} = O_{j+1} E_j O_j^dag`, moving left `E_{j-1} = O_j^dag E_j O_{j-1}`;
//! each step touches only two local factors.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{evaluate_gates, ParamAssignment, Skeleton, Stage};
use crate::error::{Error, Result};
use crate::exec::{derive_seed, Execution};
use crate::linalg::{
    apply_1q_left, apply_1q_right, apply_cnot_left, apply_cnot_right, closest_unitary_2x2, euler_to_su2, project_to_su2,
    ptrace_qubit, qubit_mask, rz, ry, su2_to_euler_unchecked, trace_of_adjoint_product, ComplexMatrix, EulerTriple,
    Mat2, C64,
};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    #[default]
    SvdSweep,
    EulerGradient,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub convergence_threshold: f64,
    pub plateau_window: usize,
    pub plateau_rel_improvement: f64,
    pub max_sweeps: usize,
    pub variant: Variant,
    /// Step size of the Euler-gradient variant, radians per unit gradient.
    pub learning_rate: f64,
    pub rng_seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            convergence_threshold: 1e-8,
            plateau_window: 200,
            plateau_rel_improvement: 1e-4,
            max_sweeps: 50_000,
            variant: Variant::SvdSweep,
            learning_rate: 0.05,
            rng_seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.convergence_threshold > 0.0) {
            return Err(Error::InvalidArgument("convergence_threshold must be positive".into()));
        }
        if self.max_sweeps == 0 {
            return Err(Error::InvalidArgument("max_sweeps must be at least 1".into()));
        }
        if self.plateau_window == 0 {
            return Err(Error::InvalidArgument("plateau_window must be at least 1".into()));
        }
        if self.variant == Variant::EulerGradient && !(self.learning_rate > 0.0) {
            return Err(Error::InvalidArgument("learning_rate must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Converged,
    Plateaued,
    SweepBudgetExhausted,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub sweep: usize,
    pub cost: f64,
    pub wall_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthesisResult {
    pub status: Status,
    pub final_cost: f64,
    pub params: ParamAssignment,
    /// Exact cost at every sweep boundary, starting with the initial point.
    pub trace: Vec<TracePoint>,
    pub sweeps_used: usize,
    pub seed: u64,
}

impl SynthesisResult {
    /// `(sweep, cost)` pairs; the reproducible part of the trace.
    pub fn cost_trace(&self) -> Vec<(usize, f64)> {
        self.trace.iter().map(|p| (p.sweep, p.cost)).collect()
    }

    /// CSV with columns `sweep,cost,wall_seconds`.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("sweep,cost,wall_seconds\n");
        for p in &self.trace {
            out.push_str(&format!("{},{:e},{:.6}\n", p.sweep, p.cost, p.wall_seconds));
        }
        out
    }
}

/// `N - |Tr(u_goal u_circ^dag)|`.
pub fn cost(u_goal: &ComplexMatrix, u_circ: &ComplexMatrix) -> Result<f64> {
    if u_goal.dim() != u_circ.dim() {
        return Err(Error::DimensionMismatch { expected: u_goal.dim(), found: u_circ.dim() });
    }
    Ok(u_goal.dim() as f64 - trace_of_adjoint_product(u_circ, u_goal).norm())
}

#[derive(Clone, Copy, Debug)]
enum Op {
    Slot { slot: usize, mask: usize },
    Cnot { cmask: usize, tmask: usize },
}

/// Reported after every slot update of a sweep.
#[derive(Clone, Copy, Debug)]
pub struct SlotUpdate {
    pub slot: usize,
    /// Environment `A` of the slot: the overlap is `Tr(G^dag A)`.
    pub environment: Mat2,
    pub gate: Mat2,
    /// Cost with the new gate, from the caches.
    pub cost: f64,
}

/// Circuit state plus the environment of the operation being visited.
#[derive(Clone, Debug)]
pub struct SweepState<'a> {
    skeleton: &'a Skeleton,
    target: &'a ComplexMatrix,
    ops: Vec<Op>,
    angles: Vec<EulerTriple>,
    gates: Vec<Mat2>,
    env: ComplexMatrix,
}

impl<'a> SweepState<'a> {
    pub fn new(skeleton: &'a Skeleton, target: &'a ComplexMatrix, params: &ParamAssignment) -> Result<Self> {
        if target.dim() != skeleton.dim() {
            return Err(Error::DimensionMismatch { expected: skeleton.dim(), found: target.dim() });
        }
        if params.len() != skeleton.slot_count() {
            return Err(Error::ParamCountMismatch { expected: skeleton.slot_count(), found: params.len() });
        }
        let n = skeleton.n_qubits();
        let mut ops = Vec::new();
        for stage in skeleton.stages() {
            match stage {
                Stage::Slots { first_slot, qubits } => {
                    for (k, q) in qubits.into_iter().enumerate() {
                        ops.push(Op::Slot { slot: first_slot + k, mask: qubit_mask(q, n) });
                    }
                }
                Stage::Cnots(layer) => {
                    for &(c, t) in &layer.pairs {
                        ops.push(Op::Cnot { cmask: qubit_mask(c, n), tmask: qubit_mask(t, n) });
                    }
                }
            }
        }
        let mut state = Self {
            skeleton,
            target,
            ops,
            angles: params.angles.clone(),
            gates: params.gates(),
            env: target.clone(),
        };
        state.rebuild();
        Ok(state)
    }

    /// Recomputes `E_0 = O_1^dag ... O_{m-1}^dag U_goal` from scratch.
    pub fn rebuild(&mut self) {
        let dim = self.env.dim();
        self.env = self.target.clone();
        for j in (1..self.ops.len()).rev() {
            self.apply_left(j, true);
        }
        debug_assert_eq!(self.env.dim(), dim);
    }

    pub fn params(&self) -> ParamAssignment {
        ParamAssignment::new(self.angles.clone())
    }

    /// Exact cost from a fresh evaluation of the circuit.
    pub fn fresh_cost(&self) -> f64 {
        let u = evaluate_gates(self.skeleton, &self.gates);
        self.target.dim() as f64 - trace_of_adjoint_product(&u, self.target).norm()
    }

    fn dim(&self) -> usize {
        self.env.dim()
    }

    /// `env <- O_j env` or `O_j^dag env`.
    fn apply_left(&mut self, j: usize, adjoint: bool) {
        let dim = self.dim();
        match self.ops[j] {
            Op::Slot { slot, mask } => {
                let g = if adjoint { self.gates[slot].adjoint() } else { self.gates[slot] };
                apply_1q_left(self.env.as_mut_slice(), dim, mask, &g);
            }
            Op::Cnot { cmask, tmask } => apply_cnot_left(self.env.as_mut_slice(), dim, cmask, tmask),
        }
    }

    /// `env <- env O_j` or `env O_j^dag`.
    fn apply_right(&mut self, j: usize, adjoint: bool) {
        let dim = self.dim();
        match self.ops[j] {
            Op::Slot { slot, mask } => {
                let g = if adjoint { self.gates[slot].adjoint() } else { self.gates[slot] };
                apply_1q_right(self.env.as_mut_slice(), dim, mask, &g);
            }
            Op::Cnot { cmask, tmask } => apply_cnot_right(self.env.as_mut_slice(), dim, cmask, tmask),
        }
    }

    /// Environment of operation `j`, assuming the state currently visits `j`.
    fn local_environment(&self, j: usize) -> Option<(usize, Mat2)> {
        match self.ops[j] {
            Op::Slot { slot, mask } => Some((slot, ptrace_qubit(self.env.as_slice(), self.dim(), mask))),
            Op::Cnot { .. } => None,
        }
    }

    /// Visits every operation left to right, then right to left, calling
    /// `update` on each slot; the state ends at operation 0.
    fn sweep_with<F>(&mut self, mut update: F) -> Result<()>
    where
        F: FnMut(&mut Self, usize, Mat2) -> Result<()>,
    {
        let m = self.ops.len();
        for j in 0..m {
            if let Some((slot, a)) = self.local_environment(j) {
                update(self, slot, a)?;
            }
            if j + 1 < m {
                self.apply_right(j, true);
                self.apply_left(j + 1, false);
            }
        }
        for j in (0..m.saturating_sub(1)).rev() {
            self.apply_left(j + 1, true);
            self.apply_right(j, false);
            if let Some((slot, a)) = self.local_environment(j) {
                update(self, slot, a)?;
            }
        }
        Ok(())
    }

    /// One bidirectional pass replacing each gate by the polar factor of its
    /// environment. Returns the cost from the caches at the end of the pass.
    pub fn sweep_svd(&mut self, mut hook: Option<&mut dyn FnMut(&SlotUpdate)>) -> Result<f64> {
        let n = self.dim() as f64;
        let mut last = self.local_cost_at_start();
        self.sweep_with(|state, slot, a| {
            let old = state.gates[slot].inner(&a).norm();
            let polar = closest_unitary_2x2(&a)?;
            let angles = su2_to_euler_unchecked(&project_to_su2(&polar));
            let g = euler_to_su2(angles);
            let new = g.inner(&a).norm();
            if new >= old {
                state.gates[slot] = g;
                state.angles[slot] = angles;
            }
            let gate = state.gates[slot];
            last = n - new.max(old);
            if let Some(h) = hook.as_mut() {
                h(&SlotUpdate { slot, environment: a, gate, cost: last });
            }
            Ok(())
        })?;
        Ok(last)
    }

    /// One bidirectional pass of per-angle gradient steps
    /// `theta <- theta - lr dC/dtheta`, each angle using the updated others.
    pub fn sweep_euler_gradient(&mut self, learning_rate: f64, mut hook: Option<&mut dyn FnMut(&SlotUpdate)>) -> f64 {
        let n = self.dim() as f64;
        let mut last = self.local_cost_at_start();
        let _ = self.sweep_with(|state, slot, a| {
            let mut t = state.angles[slot].as_array();
            for k in 0..3 {
                let grad = local_gradient(EulerTriple::from_array(t), &a)[k];
                t[k] -= learning_rate * grad;
            }
            let angles = EulerTriple::from_array(t);
            let g = euler_to_su2(angles);
            state.angles[slot] = angles;
            state.gates[slot] = g;
            last = n - g.inner(&a).norm();
            if let Some(h) = hook.as_mut() {
                h(&SlotUpdate { slot, environment: a, gate: g, cost: last });
            }
            Ok(())
        });
        last
    }

    fn local_cost_at_start(&self) -> f64 {
        match self.local_environment(0) {
            Some((slot, a)) => self.dim() as f64 - self.gates[slot].inner(&a).norm(),
            None => self.fresh_cost(),
        }
    }

    /// Environments of all slots at the current parameters.
    pub fn environments(&mut self) -> Vec<Mat2> {
        let mut out = vec![Mat2::IDENTITY; self.gates.len()];
        let m = self.ops.len();
        for j in 0..m {
            if let Some((slot, a)) = self.local_environment(j) {
                out[slot] = a;
            }
            if j + 1 < m {
                self.apply_right(j, true);
                self.apply_left(j + 1, false);
            }
        }
        self.rebuild();
        out
    }
}

/// `d/dtheta [ -|Tr(G(theta)^dag A)| ]` for the three Euler angles.
pub fn local_gradient(t: EulerTriple, a: &Mat2) -> [f64; 3] {
    let g = euler_to_su2(t);
    let overlap = g.inner(a);
    let abs = overlap.norm();
    if abs == 0.0 {
        return [0.0; 3];
    }
    let half_i = C64::new(0.0, -0.5);
    let z = Mat2::new(half_i, C64::new(0.0, 0.0), C64::new(0.0, 0.0), -half_i);
    let y = Mat2::new(C64::new(0.0, 0.0), C64::new(-0.5, 0.0), C64::new(0.5, 0.0), C64::new(0.0, 0.0));
    let d1 = rz(t.theta2) * y * ry(t.theta1) * rz(t.theta3);
    let d2 = z * g;
    let d3 = g * z;
    let directional = |d: Mat2| -(overlap.conj() * d.inner(a)).re / abs;
    [directional(d1), directional(d2), directional(d3)]
}

/// Environment `A` of one slot: `|Tr(U_goal U_circ^dag)| = |Tr(G^dag A)|` as a
/// function of that slot's gate `G`.
pub fn environment(skeleton: &Skeleton, params: &ParamAssignment, target: &ComplexMatrix, slot: usize) -> Result<Mat2> {
    if slot >= skeleton.slot_count() {
        return Err(Error::InvalidArgument(format!("slot {slot} out of range ({} slots)", skeleton.slot_count())));
    }
    let mut state = SweepState::new(skeleton, target, params)?;
    Ok(state.environments()[slot])
}

/// Gradient of the cost with respect to the flat angle vector.
pub fn gradient(skeleton: &Skeleton, params: &ParamAssignment, target: &ComplexMatrix) -> Result<Vec<f64>> {
    let mut state = SweepState::new(skeleton, target, params)?;
    let envs = state.environments();
    Ok(params.angles.iter().zip(&envs).flat_map(|(&t, a)| local_gradient(t, a)).collect())
}

/// Synthesizes `u_goal` from uniformly random initial angles drawn from
/// `config.rng_seed`.
pub fn synthesize(u_goal: &ComplexMatrix, skeleton: &Skeleton, config: &OptimizerConfig) -> Result<SynthesisResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let init = ParamAssignment::random(skeleton, &mut rng);
    synthesize_from(u_goal, skeleton, config, init)
}

/// Synthesizes `u_goal` starting from the given angles.
pub fn synthesize_from(
    u_goal: &ComplexMatrix,
    skeleton: &Skeleton,
    config: &OptimizerConfig,
    init: ParamAssignment,
) -> Result<SynthesisResult> {
    config.validate()?;
    let start = Instant::now();
    let mut state = SweepState::new(skeleton, u_goal, &init)?;
    let mut trace = vec![TracePoint { sweep: 0, cost: state.fresh_cost(), wall_seconds: 0.0 }];
    let mut status = Status::SweepBudgetExhausted;
    let mut sweeps = 0;
    loop {
        let current = trace[trace.len() - 1].cost;
        if current <= config.convergence_threshold {
            status = Status::Converged;
            break;
        }
        if sweeps >= config.plateau_window {
            let before = trace[sweeps - config.plateau_window].cost;
            if before - current < config.plateau_rel_improvement * before {
                status = Status::Plateaued;
                break;
            }
        }
        if sweeps >= config.max_sweeps {
            break;
        }
        match config.variant {
            Variant::SvdSweep => {
                state.sweep_svd(None)?;
            }
            Variant::EulerGradient => {
                state.sweep_euler_gradient(config.learning_rate, None);
            }
        }
        sweeps += 1;
        state.rebuild();
        trace.push(TracePoint { sweep: sweeps, cost: state.fresh_cost(), wall_seconds: start.elapsed().as_secs_f64() });
    }
    Ok(SynthesisResult {
        status,
        final_cost: trace[trace.len() - 1].cost,
        params: state.params(),
        trace,
        sweeps_used: sweeps,
        seed: config.rng_seed,
    })
}

/// Independent runs from `starts` random initializations; run `i` uses seed
/// `derive_seed(config.rng_seed, i)`. Results are in run order.
pub fn multi_start(
    u_goal: &ComplexMatrix,
    skeleton: &Skeleton,
    config: &OptimizerConfig,
    starts: usize,
    execution: Execution,
) -> Vec<Result<SynthesisResult>> {
    execution.map_indexed(starts, |i| {
        let cfg = OptimizerConfig { rng_seed: derive_seed(config.rng_seed, i as u64), ..*config };
        synthesize(u_goal, skeleton, &cfg)
    })
}
