//! Circuit skeletons, parameter assignments, evaluation and serialization.
//!
//! A circuit alternates single-qubit layers `S_i` and CNOT layers `T_i`,
//! `U = S_l T_{l-1} ... S_2 T_1 S_1`, with `S_1` acting first. Slots are
//! numbered layer-major, then by ascending qubit.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::{
    apply_1q_left, apply_cnot_left, euler_to_su2, qubit_mask, ComplexMatrix, EulerTriple, Mat2,
};

/// Simultaneous CNOTs, `(control, target)` pairs on disjoint qubits.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CnotLayer {
    pub pairs: Vec<(usize, usize)>,
}

impl CnotLayer {
    pub fn new(pairs: Vec<(usize, usize)>) -> Self {
        Self { pairs }
    }

    pub fn single(control: usize, target: usize) -> Self {
        Self { pairs: vec![(control, target)] }
    }

    /// Qubits touched by this layer, ascending.
    pub fn support(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.pairs.iter().flat_map(|&(c, t)| [c, t]).collect();
        s.sort_unstable();
        s
    }

    /// Role of `qubit` in this layer.
    pub fn role(&self, qubit: usize) -> QubitRole {
        for &(c, t) in &self.pairs {
            if c == qubit {
                return QubitRole::Control;
            }
            if t == qubit {
                return QubitRole::Target;
            }
        }
        QubitRole::Idle
    }

    pub fn flipped(&self) -> Self {
        Self { pairs: self.pairs.iter().map(|&(c, t)| (t, c)).collect() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QubitRole {
    Control,
    Target,
    Idle,
}

/// Where single-qubit slots sit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dressing {
    /// A slot on every qubit in every single-qubit layer.
    #[serde(rename = "full")]
    Full,
    /// An all-qubit first layer, slots on the support of each CNOT layer
    /// right after it, and an all-qubit final layer.
    #[serde(rename = "support")]
    SupportOnly,
}

impl Dressing {
    pub fn as_str(&self) -> &'static str {
        match self {
            Dressing::Full => "full",
            Dressing::SupportOnly => "support",
        }
    }
}

/// Discrete circuit topology held fixed during optimization.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Skeleton {
    n_qubits: usize,
    cnot_layers: Vec<CnotLayer>,
    dressing: Dressing,
}

/// One step of a circuit in time order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stage<'a> {
    /// Single-qubit gates: `qubits[k]` carries slot `first_slot + k`.
    Slots { first_slot: usize, qubits: Vec<usize> },
    Cnots(&'a CnotLayer),
}

impl Skeleton {
    pub fn new(n_qubits: usize, cnot_layers: Vec<CnotLayer>, dressing: Dressing) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidSkeleton("n_qubits must be at least 1".into()));
        }
        for (k, layer) in cnot_layers.iter().enumerate() {
            let mut seen = vec![false; n_qubits];
            for &(c, t) in &layer.pairs {
                if c >= n_qubits || t >= n_qubits {
                    return Err(Error::InvalidSkeleton(format!(
                        "layer {k}: pair ({c},{t}) out of range for {n_qubits} qubits"
                    )));
                }
                if c == t {
                    return Err(Error::InvalidSkeleton(format!("layer {k}: control equals target ({c})")));
                }
                for q in [c, t] {
                    if seen[q] {
                        return Err(Error::InvalidSkeleton(format!("layer {k}: qubit {q} used twice")));
                    }
                    seen[q] = true;
                }
            }
        }
        Ok(Self { n_qubits, cnot_layers, dressing })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn cnot_layers(&self) -> &[CnotLayer] {
        &self.cnot_layers
    }

    pub fn dressing(&self) -> Dressing {
        self.dressing
    }

    pub fn cnot_count(&self) -> usize {
        self.cnot_layers.iter().map(|l| l.pairs.len()).sum()
    }

    /// Number of single-qubit layers (the circuit's `l`).
    pub fn s_layer_count(&self) -> usize {
        self.slot_layers().len()
    }

    /// Qubits carrying a slot in each single-qubit layer, in time order.
    pub fn slot_layers(&self) -> Vec<Vec<usize>> {
        let all: Vec<usize> = (0..self.n_qubits).collect();
        let mut layers = vec![all.clone()];
        match self.dressing {
            Dressing::Full => layers.extend(self.cnot_layers.iter().map(|_| all.clone())),
            Dressing::SupportOnly => {
                layers.extend(self.cnot_layers.iter().map(CnotLayer::support));
                layers.push(all);
            }
        }
        layers
    }

    pub fn slot_count(&self) -> usize {
        self.slot_layers().iter().map(Vec::len).sum()
    }

    /// `(s_layer, qubit)` for each slot index.
    pub fn slot_positions(&self) -> Vec<(usize, usize)> {
        self.slot_layers().iter().enumerate().flat_map(|(k, qs)| qs.iter().map(move |&q| (k, q))).collect()
    }

    /// The circuit as an ordered list of stages, first-acting first.
    pub fn stages(&self) -> Vec<Stage<'_>> {
        let layers = self.slot_layers();
        let mut stages = Vec::with_capacity(layers.len() + self.cnot_layers.len());
        let mut next_slot = 0;
        for (k, qubits) in layers.into_iter().enumerate() {
            if k > 0 {
                if let Some(layer) = self.cnot_layers.get(k - 1) {
                    stages.push(Stage::Cnots(layer));
                }
            }
            let len = qubits.len();
            stages.push(Stage::Slots { first_slot: next_slot, qubits });
            next_slot += len;
        }
        stages
    }

    /// Same skeleton with every CNOT's control and target exchanged.
    pub fn flipped(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            cnot_layers: self.cnot_layers.iter().map(CnotLayer::flipped).collect(),
            dressing: self.dressing,
        }
    }
}

/// Euler-angle triples, one per slot in canonical slot order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamAssignment {
    pub angles: Vec<EulerTriple>,
}

impl ParamAssignment {
    pub fn new(angles: Vec<EulerTriple>) -> Self {
        Self { angles }
    }

    pub fn zeros(skeleton: &Skeleton) -> Self {
        Self { angles: vec![EulerTriple::ZERO; skeleton.slot_count()] }
    }

    /// Every angle uniform in `[0, 2pi)`.
    pub fn random<R: Rng + ?Sized>(skeleton: &Skeleton, rng: &mut R) -> Self {
        let tau = std::f64::consts::TAU;
        let angles = (0..skeleton.slot_count())
            .map(|_| EulerTriple::new(rng.random_range(0.0..tau), rng.random_range(0.0..tau), rng.random_range(0.0..tau)))
            .collect();
        Self { angles }
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// Flat view `[t1, t2, t3, t1, ...]`.
    pub fn to_flat(&self) -> Vec<f64> {
        self.angles.iter().flat_map(EulerTriple::as_array).collect()
    }

    pub fn from_flat(flat: &[f64]) -> Self {
        assert_eq!(flat.len() % 3, 0, "flat angle list must have a multiple of 3 entries");
        Self { angles: flat.chunks_exact(3).map(|c| EulerTriple::new(c[0], c[1], c[2])).collect() }
    }

    pub fn gates(&self) -> Vec<Mat2> {
        self.angles.iter().map(|&t| euler_to_su2(t)).collect()
    }

    fn check(&self, skeleton: &Skeleton) -> Result<()> {
        let expected = skeleton.slot_count();
        if self.angles.len() != expected {
            return Err(Error::ParamCountMismatch { expected, found: self.angles.len() });
        }
        Ok(())
    }
}

/// `U_circ` for the given angles.
pub fn evaluate(skeleton: &Skeleton, params: &ParamAssignment) -> Result<ComplexMatrix> {
    params.check(skeleton)?;
    Ok(evaluate_gates(skeleton, &params.gates()))
}

/// `U_circ` from per-slot gate matrices.
pub fn evaluate_gates(skeleton: &Skeleton, gates: &[Mat2]) -> ComplexMatrix {
    let n = skeleton.n_qubits();
    let dim = skeleton.dim();
    let mut u = ComplexMatrix::identity(dim);
    let m = u.as_mut_slice();
    for stage in skeleton.stages() {
        match stage {
            Stage::Slots { first_slot, qubits } => {
                for (k, q) in qubits.into_iter().enumerate() {
                    apply_1q_left(m, dim, qubit_mask(q, n), &gates[first_slot + k]);
                }
            }
            Stage::Cnots(layer) => {
                for &(c, t) in &layer.pairs {
                    apply_cnot_left(m, dim, qubit_mask(c, n), qubit_mask(t, n));
                }
            }
        }
    }
    u
}

/// OpenQASM 2.0 program. Each slot becomes `rz(theta3); ry(theta1); rz(theta2)`
/// in time order; `q[i]` is this crate's qubit `i`.
pub fn export_qasm(skeleton: &Skeleton, params: &ParamAssignment) -> Result<String> {
    params.check(skeleton)?;
    let mut out = String::new();
    out.push_str("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    let _ = writeln!(out, "qreg q[{}];", skeleton.n_qubits());
    for stage in skeleton.stages() {
        match stage {
            Stage::Slots { first_slot, qubits } => {
                for (k, q) in qubits.into_iter().enumerate() {
                    let t = params.angles[first_slot + k];
                    let _ = writeln!(out, "rz({:.16e}) q[{q}];", t.theta3);
                    let _ = writeln!(out, "ry({:.16e}) q[{q}];", t.theta1);
                    let _ = writeln!(out, "rz({:.16e}) q[{q}];", t.theta2);
                }
            }
            Stage::Cnots(layer) => {
                for &(c, t) in &layer.pairs {
                    let _ = writeln!(out, "cx q[{c}],q[{t}];");
                }
            }
        }
    }
    Ok(out)
}

/// A skeleton together with its angles; the unit of the circuit JSON format.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub skeleton: Skeleton,
    pub params: ParamAssignment,
}

pub const CIRCUIT_FORMAT_VERSION: u64 = 1;

impl Circuit {
    pub fn new(skeleton: Skeleton, params: ParamAssignment) -> Result<Self> {
        params.check(&skeleton)?;
        Ok(Self { skeleton, params })
    }

    pub fn to_json_value(&self) -> Value {
        let layers: Vec<Vec<[usize; 2]>> =
            self.skeleton.cnot_layers.iter().map(|l| l.pairs.iter().map(|&(c, t)| [c, t]).collect()).collect();
        let angles: Vec<[f64; 3]> = self.params.angles.iter().map(EulerTriple::as_array).collect();
        json!({
            "version": CIRCUIT_FORMAT_VERSION,
            "n_qubits": self.skeleton.n_qubits,
            "dressing": self.skeleton.dressing.as_str(),
            "cnot_layers": layers,
            "angles": angles,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("circuit JSON is always serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text)?;
        Self::from_json_value(&v)
    }

    pub fn from_json_value(v: &Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| malformed("<root>", "expected an object"))?;
        let field = |name: &str| obj.get(name).ok_or_else(|| malformed(name, "missing"));

        let version = field("version")?.as_u64().ok_or_else(|| malformed("version", "expected an unsigned integer"))?;
        if version != CIRCUIT_FORMAT_VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let n_qubits = field("n_qubits")?.as_u64().ok_or_else(|| malformed("n_qubits", "expected an unsigned integer"))?
            as usize;
        let dressing = match field("dressing")?.as_str() {
            Some("full") => Dressing::Full,
            Some("support") => Dressing::SupportOnly,
            _ => return Err(malformed("dressing", "expected \"full\" or \"support\"")),
        };
        let layers_v = field("cnot_layers")?.as_array().ok_or_else(|| malformed("cnot_layers", "expected an array"))?;
        let mut layers = Vec::with_capacity(layers_v.len());
        for (k, layer) in layers_v.iter().enumerate() {
            let name = format!("cnot_layers[{k}]");
            let pairs_v = layer.as_array().ok_or_else(|| malformed(&name, "expected an array of pairs"))?;
            let mut pairs = Vec::with_capacity(pairs_v.len());
            for (j, pair) in pairs_v.iter().enumerate() {
                let pname = format!("cnot_layers[{k}][{j}]");
                let arr = pair.as_array().filter(|a| a.len() == 2).ok_or_else(|| malformed(&pname, "expected [control, target]"))?;
                let idx = |x: &Value| x.as_u64().map(|u| u as usize).ok_or_else(|| malformed(&pname, "expected qubit indices"));
                pairs.push((idx(&arr[0])?, idx(&arr[1])?));
            }
            layers.push(CnotLayer::new(pairs));
        }
        let angles_v = field("angles")?.as_array().ok_or_else(|| malformed("angles", "expected an array"))?;
        let mut angles = Vec::with_capacity(angles_v.len());
        for (k, a) in angles_v.iter().enumerate() {
            let name = format!("angles[{k}]");
            let arr = a.as_array().filter(|a| a.len() == 3).ok_or_else(|| malformed(&name, "expected [t1, t2, t3]"))?;
            let mut t = [0.0; 3];
            for (slot, x) in t.iter_mut().zip(arr) {
                *slot = x.as_f64().ok_or_else(|| malformed(&name, "expected numbers"))?;
            }
            angles.push(EulerTriple::from_array(t));
        }
        let skeleton = Skeleton::new(n_qubits, layers, dressing)?;
        let params = ParamAssignment::new(angles);
        if params.len() != skeleton.slot_count() {
            return Err(malformed(
                "angles",
                &format!("{} triples given, skeleton has {} slots", params.len(), skeleton.slot_count()),
            ));
        }
        Ok(Self { skeleton, params })
    }
}

fn malformed(field: &str, reason: &str) -> Error {
    Error::Malformed { field: field.to_string(), reason: reason.to_string() }
}
