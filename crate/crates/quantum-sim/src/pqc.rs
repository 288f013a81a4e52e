//! Angle encoding, the layered RX/CNOT circuit, and Z-readout.

use crate::state::StateVector;
use crate::{QsimError, Result, MAX_QUBITS};

/// Layered circuit: per layer, an RX rotation on every qubit followed by
/// the CNOT chain (i, i+1) for i = 0..d-2. No wraparound CNOT.
#[derive(Debug, Clone, PartialEq)]
pub struct PqcConfig {
    qubits: usize,
    layers: usize,
    /// Row-major angles: angles[l * qubits + i] drives layer l, wire i.
    angles: Vec<f64>,
}

impl PqcConfig {
    pub fn new(qubits: usize, layers: usize, angles: Vec<f64>) -> Result<Self> {
        if qubits == 0 || qubits > MAX_QUBITS {
            return Err(QsimError::TooManyQubits {
                got: qubits,
                max: MAX_QUBITS,
            });
        }
        if angles.len() != layers * qubits {
            return Err(QsimError::AngleShape {
                got: angles.len(),
                expected: layers * qubits,
            });
        }
        Ok(Self {
            qubits,
            layers,
            angles,
        })
    }

    pub fn zeroed(qubits: usize, layers: usize) -> Result<Self> {
        Self::new(qubits, layers, vec![0.0; layers * qubits])
    }

    #[inline]
    pub fn qubits(&self) -> usize {
        self.qubits
    }

    #[inline]
    pub fn layers(&self) -> usize {
        self.layers
    }

    #[inline]
    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    #[inline]
    pub fn angle(&self, layer: usize, wire: usize) -> f64 {
        self.angles[layer * self.qubits + wire]
    }

    pub fn with_shifted_angle(&self, flat_index: usize, delta: f64) -> Self {
        let mut angles = self.angles.clone();
        angles[flat_index] += delta;
        Self {
            qubits: self.qubits,
            layers: self.layers,
            angles,
        }
    }
}

/// Pauli-Z readout wires.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observable {
    wires: Vec<usize>,
}

impl Observable {
    pub fn new(wires: Vec<usize>, qubits: usize) -> Result<Self> {
        if let Some(&w) = wires.iter().find(|&&w| w >= qubits) {
            return Err(QsimError::WireOutOfRange { wire: w, qubits });
        }
        Ok(Self { wires })
    }

    pub fn all_wires(qubits: usize) -> Self {
        Self {
            wires: (0..qubits).collect(),
        }
    }

    pub fn expvals(&self, state: &StateVector) -> Result<Vec<f64>> {
        self.wires.iter().map(|&w| state.expval_z(w)).collect()
    }
}

/// Loads features into rotations: |x⟩ = ⊗_j RX(x_j)† |0⟩ = ⊗_j RX(-x_j)|0⟩.
pub fn angle_encode(x: &[f64]) -> Result<StateVector> {
    let d = x.len();
    let mut state = StateVector::zero_state(d)?;
    for (wire, &xi) in x.iter().enumerate() {
        state.apply_rx(wire, -xi)?;
    }
    Ok(state)
}

/// Applies the layered circuit in place.
pub fn run_pqc(state: &mut StateVector, config: &PqcConfig) -> Result<()> {
    if state.qubits() != config.qubits() {
        return Err(QsimError::InputLength {
            got: state.qubits(),
            expected: config.qubits(),
        });
    }
    let d = config.qubits();
    for layer in 0..config.layers() {
        for wire in 0..d {
            state.apply_rx(wire, config.angle(layer, wire))?;
        }
        for wire in 0..d.saturating_sub(1) {
            state.apply_cnot(wire, wire + 1)?;
        }
    }
    Ok(())
}

/// encode -> circuit -> per-wire ⟨Z⟩, the full quantum layer.
pub fn quantum_layer_forward(x: &[f64], config: &PqcConfig) -> Result<Vec<f64>> {
    if x.len() != config.qubits() {
        return Err(QsimError::InputLength {
            got: x.len(),
            expected: config.qubits(),
        });
    }
    let mut state = angle_encode(x)?;
    run_pqc(&mut state, config)?;
    Observable::all_wires(config.qubits()).expvals(&state)
}
