//! Dense single-site Pauli operators on `N` qubits.
//!
//! Site 0 is the leftmost tensor factor (most significant bit of the basis
//! index); bit value 0 is spin up, `σ^Z = +1`.

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    X,
    Y,
    Z,
    /// `σ^+ = (σ^X + iσ^Y)/2 = |↑⟩⟨↓|`.
    Raise,
    /// `σ^- = (σ^X - iσ^Y)/2 = |↓⟩⟨↑|`.
    Lower,
}

impl Pauli {
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let o = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::i();
        match self {
            Pauli::X => [[o, one], [one, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[one, o], [o, -one]],
            Pauli::Raise => [[o, one], [o, o]],
            Pauli::Lower => [[o, o], [one, o]],
        }
    }
}

/// Row-major dense square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    pub dim: usize,
    pub data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.data[i * values.len() + i] = Complex64::new(v, 0.0);
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    pub fn kron(&self, other: &DenseMatrix) -> DenseMatrix {
        let d = self.dim * other.dim;
        let mut out = DenseMatrix::zeros(d);
        for a in 0..self.dim {
            for b in 0..self.dim {
                let s = self.get(a, b);
                if s == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..other.dim {
                    for e in 0..other.dim {
                        out.data[(a * other.dim + c) * d + b * other.dim + e] = s * other.get(c, e);
                    }
                }
            }
        }
        out
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        let n = self.dim;
        let mut out = DenseMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> DenseMatrix {
        let n = self.dim;
        let mut out = DenseMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> DenseMatrix {
        DenseMatrix { dim: self.dim, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn add(&self, other: &DenseMatrix) -> DenseMatrix {
        DenseMatrix { dim: self.dim, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        DenseMatrix { dim: self.dim, data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect() }
    }
}

/// `I ⊗ … ⊗ P ⊗ … ⊗ I` with `P` at `site`.
pub fn site_operator(n_spins: usize, site: usize, op: Pauli) -> DenseMatrix {
    let m = op.matrix();
    let single = DenseMatrix { dim: 2, data: vec![m[0][0], m[0][1], m[1][0], m[1][1]] };
    let mut out = DenseMatrix::identity(1);
    for k in 0..n_spins {
        out = if k == site { out.kron(&single) } else { out.kron(&DenseMatrix::identity(2)) };
    }
    out
}
