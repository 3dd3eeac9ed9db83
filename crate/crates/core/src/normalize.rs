//! Canonical normalization of fully dressed circuits.
//!
//! A CNOT commutes with Z rotations on its control and X rotations on its
//! target. Each non-final slot is rewritten so that its last-acting rotation
//! is about that commuting axis, and the rotation is pushed into the next
//! layer. What remains per non-final slot is two free angles.

use crate::circuit::{evaluate_gates, ParamAssignment, QubitRole, Skeleton};
use crate::error::{Error, Result};
use crate::linalg::{euler_to_su2, hadamard, rx, ry, rz, su2_to_euler_unchecked, ComplexMatrix, EulerTriple, Mat2};
use crate::Dressing;

/// Axis sequence of an Euler triple.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EulerBasis {
    /// `Rz(theta2) Ry(theta1) Rz(theta3)`, the storage convention.
    Zyz,
    /// `Rx(theta1)`, then `Ry(theta2)`, then `Rz(theta3)` in time order.
    Xyz,
    /// `Rx(theta1)`, then `Ry(theta2)`, then `Rx(theta3)` in time order.
    Xyx,
}

impl EulerBasis {
    pub fn to_su2(self, t: EulerTriple) -> Mat2 {
        match self {
            EulerBasis::Zyz => euler_to_su2(t),
            EulerBasis::Xyz => rz(t.theta3) * ry(t.theta2) * rx(t.theta1),
            EulerBasis::Xyx => rx(t.theta3) * ry(t.theta2) * rx(t.theta1),
        }
    }
}

/// Angles in mixed Euler bases, as produced by [`normalize`].
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedAssignment {
    pub bases: Vec<EulerBasis>,
    pub params: ParamAssignment,
}

impl NormalizedAssignment {
    pub fn gates(&self) -> Vec<Mat2> {
        self.bases.iter().zip(&self.params.angles).map(|(b, &t)| b.to_su2(t)).collect()
    }

    pub fn evaluate(&self, skeleton: &Skeleton) -> ComplexMatrix {
        evaluate_gates(skeleton, &self.gates())
    }

    /// Angles fixed to zero by normalization (the trailing angle of every
    /// non-final slot).
    pub fn zeroed_angles(&self) -> usize {
        self.bases
            .iter()
            .zip(&self.params.angles)
            .filter(|(b, t)| **b != EulerBasis::Zyz && t.theta3 == 0.0)
            .count()
    }

    /// Angles not fixed by normalization.
    pub fn free_angles(&self) -> usize {
        3 * self.params.len() - self.zeroed_angles()
    }
}

/// Pushes the CNOT-commuting rotation of every non-final slot into the next
/// layer. The returned circuit equals the input up to a global phase.
pub fn normalize(skeleton: &Skeleton, params: &ParamAssignment) -> Result<NormalizedAssignment> {
    if skeleton.dressing() != Dressing::Full {
        return Err(Error::NormalizeSupportOnly);
    }
    if params.len() != skeleton.slot_count() {
        return Err(Error::ParamCountMismatch { expected: skeleton.slot_count(), found: params.len() });
    }
    let n = skeleton.n_qubits();
    let mut gates = params.gates();
    let mut bases = vec![EulerBasis::Zyz; gates.len()];
    let mut angles = vec![EulerTriple::ZERO; gates.len()];

    for (k, layer) in skeleton.cnot_layers().iter().enumerate() {
        for q in 0..n {
            let slot = k * n + q;
            let (basis, t, push) = match layer.role(q) {
                QubitRole::Control | QubitRole::Idle => {
                    let t = decompose_xyz(&gates[slot]);
                    (EulerBasis::Xyz, t, rz(t.theta3))
                }
                QubitRole::Target => {
                    let t = decompose_xyx(&gates[slot]);
                    (EulerBasis::Xyx, t, rx(t.theta3))
                }
            };
            bases[slot] = basis;
            angles[slot] = EulerTriple::new(t.theta1, t.theta2, 0.0);
            let next = slot + n;
            gates[next] = gates[next] * push;
        }
    }
    let last = skeleton.cnot_layers().len() * n;
    for slot in last..last + n {
        angles[slot] = su2_to_euler_unchecked(&gates[slot]);
    }
    Ok(NormalizedAssignment { bases, params: ParamAssignment::new(angles) })
}

/// Quaternion `(w, x, y, z)` with `g = w I - i (x X + y Y + z Z)`.
fn quaternion(g: &Mat2) -> [f64; 4] {
    let [g00, g01, _, _] = g.0;
    [g00.re, -g01.im, -g01.re, -g00.im]
}

/// Solves `g = Rz(t3) Ry(t2) Rx(t1)` for an SU(2) matrix `g`.
fn decompose_xyz(g: &Mat2) -> EulerTriple {
    let [w, x, y, z] = quaternion(g);
    // Rz(-phi) g lies in the Ry Rx family iff its quaternion has w z + x y = 0
    let a = w * z + x * y;
    let b = y * y + z * z - w * w - x * x;
    let phi = (2.0 * a).atan2(-b);
    let (s, c) = (phi / 2.0).sin_cos();
    let (w2, x2, y2, z2) = (c * w + s * z, c * x + s * y, c * y - s * x, c * z - s * w);
    let alpha = if w2 * w2 + x2 * x2 >= y2 * y2 + z2 * z2 { x2.atan2(w2) } else { (-z2).atan2(y2) };
    let (sa, ca) = alpha.sin_cos();
    let beta = (y2 * ca - z2 * sa).atan2(w2 * ca + x2 * sa);
    EulerTriple::new(2.0 * alpha, 2.0 * beta, phi)
}

/// Solves `g = Rx(t3) Ry(t2) Rx(t1)` via `H g H = Rz(t3) Ry(-t2) Rz(t1)`.
fn decompose_xyx(g: &Mat2) -> EulerTriple {
    let h = hadamard();
    let k = h * *g * h;
    let zyz = su2_to_euler_unchecked(&k);
    EulerTriple::new(zyz.theta3, -zyz.theta1, zyz.theta2)
}
