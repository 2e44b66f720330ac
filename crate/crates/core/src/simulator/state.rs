use num_complex::Complex64;

use crate::error::{Error, Result};

use super::gate::Gate;

/// Dense amplitudes of a `q`-qubit register.
///
/// Qubit 0 is the most significant bit of the basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    qubits: usize,
    amplitudes: Vec<Complex64>,
}

const NORM_TOL: f64 = 1e-10;

fn qubits_for_len(len: usize) -> Result<usize> {
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::input(format!(
            "amplitude count {len} is not a power of two >= 2"
        )));
    }
    Ok(len.trailing_zeros() as usize)
}

impl StateVector {
    /// `|0…0>`
    pub fn zero(qubits: usize) -> Result<Self> {
        Self::basis(qubits, 0)
    }

    pub fn basis(qubits: usize, index: usize) -> Result<Self> {
        if qubits == 0 || qubits >= usize::BITS as usize - 1 {
            return Err(Error::input(format!("unsupported qubit count {qubits}")));
        }
        let n = 1usize << qubits;
        if index >= n {
            return Err(Error::input(format!("basis index {index} out of range for {qubits} qubits")));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { qubits, amplitudes })
    }

    /// Unit-norm state from amplitudes; fails if the norm is off by more
    /// than `1e-10`.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let s = Self::from_amplitudes_unnormalized(amplitudes)?;
        let n2 = s.norm_sqr();
        if (n2 - 1.0).abs() > NORM_TOL {
            return Err(Error::input(format!("state has squared norm {n2}, expected 1")));
        }
        Ok(s)
    }

    /// Any vector of power-of-two length, e.g. the output of an operator.
    pub fn from_amplitudes_unnormalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let qubits = qubits_for_len(amplitudes.len())?;
        Ok(Self { qubits, amplitudes })
    }

    /// Rescales to unit norm.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let mut s = Self::from_amplitudes_unnormalized(amplitudes)?;
        let norm = s.norm_sqr().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::input("cannot normalize a zero or non-finite vector"));
        }
        s.amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(s)
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::from_amplitudes(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::input("inner product of states with different sizes"));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `self ⊗ other`; `self` takes the most significant qubits.
    pub fn kron(&self, other: &StateVector) -> StateVector {
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        StateVector {
            qubits: self.qubits + other.qubits,
            amplitudes,
        }
    }

    /// Bit of `qubit` in basis index `index`.
    #[inline]
    pub fn bit(&self, index: usize, qubit: usize) -> bool {
        (index >> (self.qubits - 1 - qubit)) & 1 == 1
    }

    #[inline]
    pub(crate) fn mask(&self, qubit: usize) -> usize {
        1usize << (self.qubits - 1 - qubit)
    }

    pub(crate) fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.qubits {
            return Err(Error::input(format!(
                "qubit index {qubit} out of range for {} qubits",
                self.qubits
            )));
        }
        Ok(())
    }

    /// Applies a 2×2 matrix to `qubit`.
    pub(crate) fn apply_1q(&mut self, qubit: usize, m: [[Complex64; 2]; 2]) {
        let mask = self.mask(qubit);
        for i in 0..self.amplitudes.len() {
            if i & mask == 0 {
                let j = i | mask;
                let (a0, a1) = (self.amplitudes[i], self.amplitudes[j]);
                self.amplitudes[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amplitudes[j] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    /// Applies a 4×4 matrix in the local basis `|bit_a bit_b>`.
    pub(crate) fn apply_2q(&mut self, a: usize, b: usize, m: &[[Complex64; 4]; 4]) {
        let (ma, mb) = (self.mask(a), self.mask(b));
        for i in 0..self.amplitudes.len() {
            if i & ma == 0 && i & mb == 0 {
                let idx = [i, i | mb, i | ma, i | ma | mb];
                let v = idx.map(|k| self.amplitudes[k]);
                for (r, &k) in idx.iter().enumerate() {
                    self.amplitudes[k] = (0..4).map(|c| m[r][c] * v[c]).sum();
                }
            }
        }
    }

    /// In-place gate application.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.qubits)?;
        gate.apply_unchecked(self);
        Ok(())
    }

    /// In-place application of a gate list, left to right.
    pub fn apply_all<'a, I: IntoIterator<Item = &'a Gate>>(&mut self, gates: I) -> Result<()> {
        for g in gates {
            self.apply(g)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructors_validate() {
        assert!(StateVector::from_amplitudes(vec![Complex64::new(1.0, 0.0); 3]).is_err());
        assert!(StateVector::from_real(&[1.0, 1.0]).is_err());
        assert!(StateVector::normalized(vec![Complex64::new(0.0, 0.0); 2]).is_err());
        assert!(StateVector::basis(2, 4).is_err());
        let s = StateVector::normalized(vec![Complex64::new(3.0, 0.0), Complex64::new(0.0, 4.0)]).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
        assert_eq!(s.qubits(), 1);
    }

    #[test]
    fn kron_and_bits() {
        let a = StateVector::basis(1, 1).unwrap();
        let b = StateVector::basis(2, 0b01).unwrap();
        let ab = a.kron(&b);
        assert_eq!(ab.qubits(), 3);
        assert_eq!(ab.amplitudes()[0b101], Complex64::new(1.0, 0.0));
        assert!(ab.bit(0b101, 0));
        assert!(!ab.bit(0b101, 1));
        assert!(ab.bit(0b101, 2));
    }
}
