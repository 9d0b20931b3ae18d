//! Brute-force density-matrix reference for chains of a few qubits.
//!
//! Qubit 0 is the most significant bit of a basis index.

use num_complex::Complex;
use thiserror::Error;

use crate::scalar::{lit, Scalar};

pub const MAX_QUBITS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("at most {MAX_QUBITS} qubits are supported, got {0}")]
    TooManyQubits(usize),
    #[error("invalid qubit subset {0:?} for a {1}-qubit state")]
    InvalidSubsystem(Vec<usize>, usize),
    #[error("expected a {expected}-qubit state, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("projection has zero probability")]
    ZeroProbability,
}

pub type Result<T> = std::result::Result<T, OracleError>;

/// The four Bell states, indexed by the Pauli `X^x Z^z` relating them to `|φ+⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BellState {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellState {
    pub const ALL: [BellState; 4] = [Self::PhiPlus, Self::PhiMinus, Self::PsiPlus, Self::PsiMinus];

    fn vector<T: Scalar>(self) -> [Complex<T>; 4] {
        let h = Complex::new(T::FRAC_1_SQRT_2(), T::zero());
        let z = Complex::new(T::zero(), T::zero());
        match self {
            Self::PhiPlus => [h, z, z, h],
            Self::PhiMinus => [h, z, z, -h],
            Self::PsiPlus => [z, h, h, z],
            Self::PsiMinus => [z, h, -h, z],
        }
    }

    fn correction(self) -> &'static [Pauli] {
        match self {
            Self::PhiPlus => &[],
            Self::PhiMinus => &[Pauli::Z],
            Self::PsiPlus => &[Pauli::X],
            Self::PsiMinus => &[Pauli::X, Pauli::Z],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// Dense density matrix on `k ≤ 8` qubits, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T> {
    qubits: usize,
    data: Vec<Complex<T>>,
}

impl<T: Scalar> DensityMatrix<T> {
    pub fn zeros(qubits: usize) -> Result<Self> {
        if qubits > MAX_QUBITS {
            return Err(OracleError::TooManyQubits(qubits));
        }
        let dim = 1usize << qubits;
        Ok(Self {
            qubits,
            data: vec![Complex::new(T::zero(), T::zero()); dim * dim],
        })
    }

    pub fn maximally_mixed(qubits: usize) -> Result<Self> {
        let mut m = Self::zeros(qubits)?;
        let v = T::one() / lit::<T>(m.dim() as f64);
        for i in 0..m.dim() {
            m.set(i, i, Complex::new(v, T::zero()));
        }
        Ok(m)
    }

    /// `|ψ⟩⟨ψ|` for a state vector of length `2^k`.
    pub fn pure(state: &[Complex<T>]) -> Result<Self> {
        let qubits = state.len().trailing_zeros() as usize;
        if 1usize << qubits != state.len() {
            return Err(OracleError::DimensionMismatch { expected: 1 << qubits, found: state.len() });
        }
        let mut m = Self::zeros(qubits)?;
        for (i, a) in state.iter().enumerate() {
            for (j, b) in state.iter().enumerate() {
                m.set(i, j, a * b.conj());
            }
        }
        Ok(m)
    }

    pub fn bell(state: BellState) -> Self {
        Self::pure(&state.vector::<T>()).expect("two-qubit vector")
    }

    pub fn num_qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.data[i * self.dim() + j]
    }

    fn set(&mut self, i: usize, j: usize, v: Complex<T>) {
        let d = self.dim();
        self.data[i * d + j] = v;
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim()).map(|i| self.get(i, i)).fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
    }

    pub fn scale(&self, factor: T) -> Self {
        Self {
            qubits: self.qubits,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.expect_qubits(other.qubits)?;
        Ok(Self {
            qubits: self.qubits,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim();
        let mut out = self.clone();
        for i in 0..d {
            for j in 0..d {
                out.set(i, j, self.get(j, i).conj());
            }
        }
        out
    }

    fn expect_qubits(&self, expected: usize) -> Result<()> {
        if self.qubits == expected {
            Ok(())
        } else {
            Err(OracleError::DimensionMismatch { expected, found: self.qubits })
        }
    }

    fn check_subset(&self, targets: &[usize]) -> Result<()> {
        let mut seen = 0u32;
        for &q in targets {
            if q >= self.qubits || seen & (1 << q) != 0 {
                return Err(OracleError::InvalidSubsystem(targets.to_vec(), self.qubits));
            }
            seen |= 1 << q;
        }
        Ok(())
    }

    fn bit(&self, qubit: usize) -> usize {
        1 << (self.qubits - 1 - qubit)
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let mut out = Self::zeros(self.qubits + other.qubits)?;
        let od = other.dim();
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let a = self.get(i, j);
                for k in 0..od {
                    for l in 0..od {
                        out.set(i * od + k, j * od + l, a * other.get(k, l));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Traces out every qubit not listed in `keep`; the kept qubits retain their relative order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        self.check_subset(keep)?;
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        let traced: Vec<usize> = (0..self.qubits).filter(|q| !keep.contains(q)).collect();
        let mut out = Self::zeros(keep.len())?;
        let embed = |kept_index: usize, traced_index: usize| -> usize {
            let mut full = 0;
            for (pos, &q) in keep.iter().enumerate() {
                if kept_index & (1 << (keep.len() - 1 - pos)) != 0 {
                    full |= self.bit(q);
                }
            }
            for (pos, &q) in traced.iter().enumerate() {
                if traced_index & (1 << (traced.len() - 1 - pos)) != 0 {
                    full |= self.bit(q);
                }
            }
            full
        };
        for i in 0..out.dim() {
            for j in 0..out.dim() {
                let mut acc = Complex::new(T::zero(), T::zero());
                for s in 0..(1usize << traced.len()) {
                    acc = acc + self.get(embed(i, s), embed(j, s));
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    /// `p ρ + (1 − p) 𝟙_t / d_t ⊗ Tr_t ρ` on the target qubits.
    pub fn depolarize(&self, p: T, targets: &[usize]) -> Result<Self> {
        self.check_subset(targets)?;
        let mask: usize = targets.iter().map(|&q| self.bit(q)).sum();
        let sub: Vec<usize> = targets.iter().map(|&q| self.bit(q)).collect();
        let d_t = lit::<T>((1usize << targets.len()) as f64);
        let mut out = self.clone();
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let mut mixed = Complex::new(T::zero(), T::zero());
                if i & mask == j & mask {
                    for s in 0..(1usize << targets.len()) {
                        let bits: usize = sub
                            .iter()
                            .enumerate()
                            .filter(|(pos, _)| s & (1 << pos) != 0)
                            .map(|(_, b)| b)
                            .sum();
                        mixed = mixed + self.get((i & !mask) | bits, (j & !mask) | bits);
                    }
                    mixed = mixed / d_t;
                }
                out.set(i, j, self.get(i, j) * p + mixed * (T::one() - p));
            }
        }
        Ok(out)
    }

    /// `O ρ` for a two-qubit operator acting on `(q1, q2)`.
    fn left_two_qubit(&self, op: &[[Complex<T>; 4]; 4], q1: usize, q2: usize) -> Self {
        let (b1, b2) = (self.bit(q1), self.bit(q2));
        let d = self.dim();
        let mut out = Self::zeros(self.qubits).expect("same size");
        for row in 0..d {
            let r = ((row & b1 != 0) as usize) << 1 | (row & b2 != 0) as usize;
            let base = row & !(b1 | b2);
            for (c, coeff) in op[r].iter().enumerate() {
                if coeff.norm_sqr() == T::zero() {
                    continue;
                }
                let src = base | if c & 2 != 0 { b1 } else { 0 } | if c & 1 != 0 { b2 } else { 0 };
                for col in 0..d {
                    let v = out.get(row, col) + coeff * self.get(src, col);
                    out.set(row, col, v);
                }
            }
        }
        out
    }

    /// `O ρ O†` for a two-qubit operator on `(q1, q2)`.
    pub fn conjugate_two_qubit(&self, op: &[[Complex<T>; 4]; 4], q1: usize, q2: usize) -> Result<Self> {
        self.check_subset(&[q1, q2])?;
        // ρ O† = (O ρ†)†
        let right = self.adjoint().left_two_qubit(op, q1, q2).adjoint();
        Ok(right.left_two_qubit(op, q1, q2))
    }

    pub fn apply_pauli(&self, pauli: Pauli, qubit: usize) -> Result<Self> {
        self.check_subset(&[qubit])?;
        let b = self.bit(qubit);
        let one = Complex::new(T::one(), T::zero());
        let phase = |index: usize| -> Complex<T> {
            let set = index & b != 0;
            match pauli {
                Pauli::X => one,
                Pauli::Z if set => -one,
                Pauli::Z => one,
                // Y|0⟩ = i|1⟩, Y|1⟩ = −i|0⟩; indexed by the source bit
                Pauli::Y if set => Complex::new(T::zero(), -T::one()),
                Pauli::Y => Complex::new(T::zero(), T::one()),
            }
        };
        let flips = !matches!(pauli, Pauli::Z);
        let mut out = self.clone();
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let (si, sj) = if flips { (i ^ b, j ^ b) } else { (i, j) };
                out.set(i, j, phase(si) * self.get(si, sj) * phase(sj).conj());
            }
        }
        Ok(out)
    }

    /// Projects qubits `(q1, q2)` onto a Bell state without renormalizing.
    pub fn project_bell(&self, bell: BellState, q1: usize, q2: usize) -> Result<Self> {
        let v = bell.vector::<T>();
        let mut op = [[Complex::new(T::zero(), T::zero()); 4]; 4];
        for (r, row) in op.iter_mut().enumerate() {
            for (c, entry) in row.iter_mut().enumerate() {
                *entry = v[r] * v[c].conj();
            }
        }
        self.conjugate_two_qubit(&op, q1, q2)
    }

    /// Fidelity of a two-qubit state with `|φ+⟩`.
    pub fn fidelity_phi_plus(&self) -> Result<T> {
        self.expect_qubits(2)?;
        Ok((self.get(0, 0) + self.get(0, 3) + self.get(3, 0) + self.get(3, 3)).re / lit(2.0))
    }

    pub fn bell_weights(&self) -> Result<[T; 4]> {
        self.expect_qubits(2)?;
        let mut out = [T::zero(); 4];
        for (slot, bell) in out.iter_mut().zip(BellState::ALL) {
            let v = bell.vector::<T>();
            let mut acc = Complex::new(T::zero(), T::zero());
            for i in 0..4 {
                for j in 0..4 {
                    acc = acc + v[i].conj() * self.get(i, j) * v[j];
                }
            }
            *slot = acc.re;
        }
        Ok(out)
    }

    /// Werner parameter if the state is Werner within `tol`, else `None`.
    pub fn as_werner(&self, tol: T) -> Option<T> {
        let f = self.fidelity_phi_plus().ok()?;
        let w = (lit::<T>(4.0) * f - T::one()) / lit(3.0);
        let reference = werner_state(w).ok()?;
        let close = self.data.iter().zip(&reference.data).all(|(a, b)| (a - b).norm() <= tol);
        close.then_some(w)
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        let d = self.dim();
        (0..d).all(|i| (i..d).all(|j| (self.get(i, j) - self.get(j, i).conj()).norm() <= tol))
    }

    /// Positive semidefinite within `tol`: `ρ + tol·𝟙` admits a Cholesky factorization.
    pub fn is_positive_semidefinite(&self, tol: T) -> bool {
        let d = self.dim();
        let mut l = vec![Complex::new(T::zero(), T::zero()); d * d];
        for j in 0..d {
            let mut diag = self.get(j, j).re + tol;
            for k in 0..j {
                diag = diag - l[j * d + k].norm_sqr();
            }
            if diag < T::zero() {
                return false;
            }
            let ljj = diag.sqrt();
            l[j * d + j] = Complex::new(ljj, T::zero());
            for i in (j + 1)..d {
                let mut v = self.get(i, j);
                for k in 0..j {
                    v = v - l[i * d + k] * l[j * d + k].conj();
                }
                l[i * d + j] = if ljj > T::zero() { v / ljj } else { Complex::new(T::zero(), T::zero()) };
            }
        }
        true
    }
}

/// `w |φ+⟩⟨φ+| + (1 − w) 𝟙/4`.
pub fn werner_state<T: Scalar>(w: T) -> Result<DensityMatrix<T>> {
    DensityMatrix::bell(BellState::PhiPlus)
        .scale(w)
        .add(&DensityMatrix::maximally_mixed(2)?.scale(T::one() - w))
}

/// Single-outcome swap: depolarizes `b, c` with `s_q`, projects them on `outcome`,
/// corrects `d` and returns the normalized state of `a, d` with the outcome probability.
pub fn bell_swap_branch<T: Scalar>(
    rho_ab: &DensityMatrix<T>,
    rho_cd: &DensityMatrix<T>,
    swap_quality: T,
    outcome: BellState,
) -> Result<(DensityMatrix<T>, T)> {
    let unnormalized = swap_unnormalized(&swap_input(rho_ab, rho_cd, swap_quality)?, outcome)?;
    let prob = unnormalized.trace().re;
    if !(prob > T::zero()) {
        return Err(OracleError::ZeroProbability);
    }
    Ok((unnormalized.scale(T::one() / prob), prob))
}

/// Outcome-averaged swap of `ρ_ab ⊗ ρ_cd` returning the corrected state on `a, d`.
pub fn bell_swap<T: Scalar>(
    rho_ab: &DensityMatrix<T>,
    rho_cd: &DensityMatrix<T>,
    swap_quality: T,
) -> Result<DensityMatrix<T>> {
    let joint = swap_input(rho_ab, rho_cd, swap_quality)?;
    let mut acc = DensityMatrix::zeros(2)?;
    for outcome in BellState::ALL {
        acc = acc.add(&swap_unnormalized(&joint, outcome)?)?;
    }
    Ok(acc)
}

fn swap_input<T: Scalar>(rho_ab: &DensityMatrix<T>, rho_cd: &DensityMatrix<T>, sq: T) -> Result<DensityMatrix<T>> {
    rho_ab.expect_qubits(2)?;
    rho_cd.expect_qubits(2)?;
    rho_ab.tensor(rho_cd)?.depolarize(sq, &[1, 2])
}

fn swap_unnormalized<T: Scalar>(joint: &DensityMatrix<T>, outcome: BellState) -> Result<DensityMatrix<T>> {
    let mut projected = joint.project_bell(outcome, 1, 2)?;
    for &p in outcome.correction() {
        projected = projected.apply_pauli(p, 3)?;
    }
    projected.partial_trace(&[0, 3])
}

/// Werner parameter of a linear chain: link states `w_i`, each link qubit held
/// at a repeater decohered for the given time, swapped left to right.
///
/// `storage[i] = (left_qubit_time, right_qubit_time)` for link `i`.
pub fn chain_werner<T: Scalar>(werners: &[T], storage: &[(T, T)], swap_quality: T, coherence_time: T) -> Result<T> {
    let n = werners.len();
    let mut states = Vec::with_capacity(n);
    for (i, (&w, &(tl, tr))) in werners.iter().zip(storage).enumerate() {
        let mut rho = werner_state(w)?;
        if i > 0 {
            rho = rho.depolarize((-tl / coherence_time).exp(), &[0])?;
        }
        if i + 1 < n {
            rho = rho.depolarize((-tr / coherence_time).exp(), &[1])?;
        }
        states.push(rho);
    }
    let mut acc = states[0].clone();
    for next in &states[1..] {
        acc = bell_swap(&acc, next, swap_quality)?;
    }
    let f = acc.fidelity_phi_plus()?;
    Ok((lit::<T>(4.0) * f - T::one()) / lit(3.0))
}
