//! Statevector storage and single/two-qubit gate kernels.

use num_complex::Complex64;

use crate::{QsimError, Result, MAX_QUBITS};

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// |0...0⟩ on `qubits` wires.
    pub fn zero_state(qubits: usize) -> Result<Self> {
        if qubits == 0 || qubits > MAX_QUBITS {
            return Err(QsimError::TooManyQubits {
                got: qubits,
                max: MAX_QUBITS,
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { qubits, amps })
    }

    pub fn from_amplitudes(qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        if qubits == 0 || qubits > MAX_QUBITS {
            return Err(QsimError::TooManyQubits {
                got: qubits,
                max: MAX_QUBITS,
            });
        }
        assert_eq!(amps.len(), 1 << qubits, "amplitude count mismatch");
        Ok(Self { qubits, amps })
    }

    #[inline]
    pub fn qubits(&self) -> usize {
        self.qubits
    }

    #[inline]
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn check_wire(&self, wire: usize) -> Result<()> {
        if wire >= self.qubits {
            return Err(QsimError::WireOutOfRange {
                wire,
                qubits: self.qubits,
            });
        }
        Ok(())
    }

    /// Bit mask selecting `wire` inside an amplitude index (wire 0 = MSB).
    #[inline]
    fn wire_mask(&self, wire: usize) -> usize {
        1 << (self.qubits - 1 - wire)
    }

    /// X-rotation by `theta` on one wire.
    pub fn apply_rx(&mut self, wire: usize, theta: f64) -> Result<()> {
        self.check_wire(wire)?;
        let mask = self.wire_mask(wire);
        let c = (theta / 2.0).cos();
        let s = (theta / 2.0).sin();
        let minus_is = Complex64::new(0.0, -s);
        for idx in 0..self.amps.len() {
            if idx & mask == 0 {
                let a = self.amps[idx];
                let b = self.amps[idx | mask];
                self.amps[idx] = c * a + minus_is * b;
                self.amps[idx | mask] = minus_is * a + c * b;
            }
        }
        Ok(())
    }

    /// Controlled-NOT with the given control and target wires.
    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_wire(control)?;
        self.check_wire(target)?;
        if control == target {
            return Err(QsimError::ControlEqualsTarget(control));
        }
        let cmask = self.wire_mask(control);
        let tmask = self.wire_mask(target);
        for idx in 0..self.amps.len() {
            if idx & cmask != 0 && idx & tmask == 0 {
                self.amps.swap(idx, idx | tmask);
            }
        }
        Ok(())
    }

    /// ⟨Z⟩ on one wire.
    pub fn expval_z(&self, wire: usize) -> Result<f64> {
        self.check_wire(wire)?;
        let mask = self.wire_mask(wire);
        let mut acc = 0.0;
        for (idx, amp) in self.amps.iter().enumerate() {
            let sign = if idx & mask == 0 { 1.0 } else { -1.0 };
            acc += sign * amp.norm_sqr();
        }
        Ok(acc)
    }
}
