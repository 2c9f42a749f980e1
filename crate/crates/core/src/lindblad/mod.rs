//! Exact dense master-equation dynamics for a few spins.
//!
//! ```text
//! dρ/dt = -i[H, ρ] + Σ_{k,τ=±} (L_kτ ρ L_kτ† - ½{L_kτ† L_kτ, ρ})
//! H     = Ω Σ_i σ_i^X
//! L_k±  = exp(±β ΔE_k / 2) / sqrt(2 cosh(β ΔE_k)) · σ_k^±
//! ```
//!
//! Every jump operator is a diagonal matrix times a single-site ladder
//! operator, so the dissipator and the commutator are applied by index
//! arithmetic on basis states instead of dense products. [`pauli`] has the
//! dense tensor-product operators for cross-checking.

pub mod pauli;

use std::io::{Read, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::classical::{PatternSet, SpinConfig};
use crate::rk4::{step_count, Rk4};
use crate::{Error, Exponent, Result};

pub use pauli::{DenseMatrix, Pauli};

pub const DEFAULT_N_MAX: usize = 10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn site_mask(n: usize, k: usize) -> usize {
    1 << (n - 1 - k)
}

/// `σ^Z` eigenvalue of site `k` in basis state `a`.
pub fn spin_z(n: usize, k: usize, a: usize) -> i8 {
    if a & site_mask(n, k) == 0 {
        1
    } else {
        -1
    }
}

/// Basis index of a classical configuration.
pub fn basis_index(s: &SpinConfig) -> usize {
    let n = s.len();
    (0..n).filter(|&k| s.get(k) == -1).map(|k| site_mask(n, k)).sum()
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one spin".into()));
    }
    if n > DEFAULT_N_MAX {
        return Err(Error::TooManySpins { n, max: DEFAULT_N_MAX });
    }
    Ok(())
}

/// Density matrix on `N` qubits, row-major `2^N × 2^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_spins: usize,
    dim: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn from_data(n_spins: usize, data: Vec<Complex64>) -> Result<Self> {
        check_n(n_spins)?;
        let dim = 1 << n_spins;
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: data.len() });
        }
        Ok(Self { n_spins, dim, data })
    }

    /// `|ψ⟩⟨ψ|` for a normalized amplitude vector.
    pub fn from_pure(n_spins: usize, psi: &[Complex64]) -> Result<Self> {
        check_n(n_spins)?;
        let dim = 1 << n_spins;
        if psi.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: psi.len() });
        }
        let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
        let mut data = vec![ZERO; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                data[i * dim + j] = psi[i] * psi[j].conj() / norm;
            }
        }
        Ok(Self { n_spins, dim, data })
    }

    /// Computational-basis projector onto a classical configuration.
    pub fn basis_state(s: &SpinConfig) -> Result<Self> {
        let n = s.len();
        check_n(n)?;
        let dim = 1 << n;
        let mut data = vec![ZERO; dim * dim];
        let a = basis_index(s);
        data[a * dim + a] = Complex64::new(1.0, 0.0);
        Ok(Self { n_spins: n, dim, data })
    }

    pub fn maximally_mixed(n_spins: usize) -> Result<Self> {
        check_n(n_spins)?;
        let dim = 1 << n_spins;
        let mut data = vec![ZERO; dim * dim];
        for a in 0..dim {
            data[a * dim + a] = Complex64::new(1.0 / dim as f64, 0.0);
        }
        Ok(Self { n_spins, dim, data })
    }

    /// `|+⟩^{⊗N}`, the `σ^X = +1` product state.
    pub fn x_plus(n_spins: usize) -> Result<Self> {
        check_n(n_spins)?;
        let dim = 1 << n_spins;
        let psi = vec![Complex64::new(1.0, 0.0); dim];
        Self::from_pure(n_spins, &psi)
    }

    /// `A A† / tr(A A†)` with Gaussian-ish random complex `A`.
    pub fn random_mixed<R: Rng + ?Sized>(n_spins: usize, rng: &mut R) -> Result<Self> {
        check_n(n_spins)?;
        let dim = 1 << n_spins;
        let a: Vec<Complex64> = (0..dim * dim)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let mut data = vec![ZERO; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                let mut acc = ZERO;
                for k in 0..dim {
                    acc += a[i * dim + k] * a[j * dim + k].conj();
                }
                data[i * dim + j] = acc;
            }
        }
        let tr: f64 = (0..dim).map(|i| data[i * dim + i].re).sum();
        data.iter_mut().for_each(|v| *v /= tr);
        Ok(Self { n_spins, dim, data })
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i).re).collect()
    }

    /// `max |ρ - ρ†|` entrywise.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let d = self.dim;
        let m = DMatrix::from_fn(d, d, |i, j| 0.5 * (self.get(i, j) + self.get(j, i).conj()));
        m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix { dim: self.dim, data: self.data.clone() }
    }
}

/// Diagonal `ΔE_k` operators, one length-`2^N` vector per site:
/// `ΔE_k(z) = N^{1-x} Σ_μ ξ_k^μ (Σ_j ξ_j^μ z_j)^{x-1}`, with `j = k` included.
pub fn build_delta_e_ops(patterns: &PatternSet, x: Exponent) -> Result<Vec<Vec<f64>>> {
    let n = patterns.n_spins();
    check_n(n)?;
    let dim = 1usize << n;
    let norm = (n as f64).powi(x.field_power());
    let mut ops = vec![vec![0.0; dim]; n];
    let mut overlaps = vec![0.0; patterns.n_patterns()];
    for a in 0..dim {
        for (mu, m) in overlaps.iter_mut().enumerate() {
            *m = (0..n).map(|j| (patterns.get(mu, j) * spin_z(n, j, a)) as f64).sum();
        }
        for (k, op) in ops.iter_mut().enumerate() {
            op[a] = overlaps
                .iter()
                .enumerate()
                .map(|(mu, m)| patterns.get(mu, k) as f64 * m.powi(x.field_power()))
                .sum::<f64>()
                / norm;
        }
    }
    Ok(ops)
}

/// Direction of a jump operator's ladder factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum JumpKind {
    Raise,
    Lower,
}

/// `L = diag(amplitude) · σ_site^±`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpOperator {
    pub site: usize,
    pub kind: JumpKind,
    pub amplitude: Vec<f64>,
}

impl JumpOperator {
    pub fn to_dense(&self, n_spins: usize) -> DenseMatrix {
        let ladder = match self.kind {
            JumpKind::Raise => Pauli::Raise,
            JumpKind::Lower => Pauli::Lower,
        };
        DenseMatrix::diagonal(&self.amplitude).matmul(&pauli::site_operator(n_spins, self.site, ladder))
    }
}

/// `e^{±βd/2} / sqrt(2 cosh βd)`, written as a square-rooted logistic so it
/// stays finite for large `β d`.
pub fn jump_amplitude(kind: JumpKind, beta: f64, d: f64) -> f64 {
    let s = match kind {
        JumpKind::Raise => 1.0,
        JumpKind::Lower => -1.0,
    };
    (1.0 / (1.0 + (-2.0 * s * beta * d).exp())).sqrt()
}

/// `L_{k±}` for every site, raising operators first.
pub fn build_lindblads(delta_e_ops: &[Vec<f64>], beta: f64) -> Vec<JumpOperator> {
    let mut out = Vec::with_capacity(2 * delta_e_ops.len());
    for kind in [JumpKind::Raise, JumpKind::Lower] {
        for (site, op) in delta_e_ops.iter().enumerate() {
            out.push(JumpOperator {
                site,
                kind,
                amplitude: op.iter().map(|&d| jump_amplitude(kind, beta, d)).collect(),
            });
        }
    }
    out
}

/// Everything needed to evaluate the master-equation generator.
#[derive(Debug, Clone)]
pub struct OperatorSet {
    n_spins: usize,
    dim: usize,
    omega: f64,
    beta: f64,
    delta_e: Vec<Vec<f64>>,
    lindblads: Vec<JumpOperator>,
    // target_amp[k][c]: amplitude of the jump on site k that lands in c
    // (raising if site k of c is up, lowering otherwise).
    target_amp: Vec<Vec<f64>>,
    // Σ_{k,τ} (L_kτ† L_kτ)_cc
    decay: Vec<f64>,
}

impl OperatorSet {
    pub fn new(patterns: &PatternSet, x: Exponent, beta: f64, omega: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
        }
        let delta_e = build_delta_e_ops(patterns, x)?;
        Ok(Self::from_delta_e(delta_e, beta, omega))
    }

    pub fn from_delta_e(delta_e: Vec<Vec<f64>>, beta: f64, omega: f64) -> Self {
        let n = delta_e.len();
        let dim = 1usize << n;
        let lindblads = build_lindblads(&delta_e, beta);
        let mut target_amp = vec![vec![0.0; dim]; n];
        let mut decay = vec![0.0; dim];
        for (k, amps) in target_amp.iter_mut().enumerate() {
            let m = site_mask(n, k);
            let raise = &lindblads[k].amplitude;
            let lower = &lindblads[n + k].amplitude;
            for c in 0..dim {
                amps[c] = if c & m == 0 { raise[c] } else { lower[c] };
            }
            for c in 0..dim {
                // L† L at c is the squared amplitude of the jump leaving c.
                let a = amps[c ^ m];
                decay[c] += a * a;
            }
        }
        Self { n_spins: n, dim, omega, beta, delta_e, lindblads, target_amp, decay }
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn delta_e_ops(&self) -> &[Vec<f64>] {
        &self.delta_e
    }

    pub fn lindblads(&self) -> &[JumpOperator] {
        &self.lindblads
    }

    pub fn hamiltonian_dense(&self) -> DenseMatrix {
        let mut h = DenseMatrix::zeros(self.dim);
        for k in 0..self.n_spins {
            h = h.add(&pauli::site_operator(self.n_spins, k, Pauli::X));
        }
        h.scale(Complex64::new(self.omega, 0.0))
    }

    fn apply(&self, rho: &[Complex64], out: &mut [Complex64]) {
        let (n, dim) = (self.n_spins, self.dim);
        let mi_omega = Complex64::new(0.0, -self.omega);
        for c in 0..dim {
            let row = &mut out[c * dim..(c + 1) * dim];
            let gc = self.decay[c];
            for d in 0..dim {
                let mut comm = ZERO;
                let mut jumps = ZERO;
                for k in 0..n {
                    let m = site_mask(n, k);
                    comm += rho[(c ^ m) * dim + d] - rho[c * dim + (d ^ m)];
                    if (c ^ d) & m == 0 {
                        let amp = &self.target_amp[k];
                        jumps += rho[(c ^ m) * dim + (d ^ m)] * (amp[c] * amp[d]);
                    }
                }
                row[d] = mi_omega * comm + jumps - rho[c * dim + d] * (0.5 * (gc + self.decay[d]));
            }
        }
    }
}

/// `dρ/dt` for the full generator.
pub fn master_rhs(rho: &DensityMatrix, ops: &OperatorSet) -> Result<DensityMatrix> {
    if rho.n_spins != ops.n_spins {
        return Err(Error::DimensionMismatch { expected: ops.n_spins, got: rho.n_spins });
    }
    let mut out = vec![ZERO; rho.data.len()];
    ops.apply(&rho.data, &mut out);
    Ok(DensityMatrix { n_spins: rho.n_spins, dim: rho.dim, data: out })
}

/// Overlap expectations `tr(ρ M_a^μ)` for a ∈ {X, Y, Z}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Overlaps {
    pub m_x: Vec<f64>,
    pub m_y: Vec<f64>,
    pub m_z: Vec<f64>,
}

pub fn overlap_expectation(rho: &DensityMatrix, patterns: &PatternSet) -> Result<Overlaps> {
    let n = rho.n_spins;
    if patterns.n_spins() != n {
        return Err(Error::DimensionMismatch { expected: n, got: patterns.n_spins() });
    }
    let dim = rho.dim;
    let mut sx = vec![0.0; n];
    let mut sy = vec![0.0; n];
    let mut sz = vec![0.0; n];
    for a in 0..dim {
        let pop = rho.get(a, a).re;
        for k in 0..n {
            let m = site_mask(n, k);
            sz[k] += pop * spin_z(n, k, a) as f64;
            let coh = rho.get(a, a ^ m);
            sx[k] += coh.re;
            // Y_{a^m, a} = -i if a^m is up (a down), +i otherwise.
            let y = if a & m != 0 { -Complex64::i() } else { Complex64::i() };
            sy[k] += (coh * y).re;
        }
    }
    let project = |s: &[f64]| -> Vec<f64> {
        (0..patterns.n_patterns())
            .map(|mu| (0..n).map(|k| patterns.get(mu, k) as f64 * s[k]).sum::<f64>() / n as f64)
            .collect()
    };
    Ok(Overlaps { m_x: project(&sx), m_y: project(&sy), m_z: project(&sz) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveSettings {
    pub dt: f64,
    pub t_max: f64,
    pub record_stride: usize,
    /// Keep a copy of ρ at every recorded step.
    pub snapshots: bool,
    /// Check the smallest eigenvalue at every n-th record (0 disables).
    pub positivity_every: usize,
    pub trace_tol: f64,
    pub hermiticity_tol: f64,
    pub positivity_tol: f64,
}

impl Default for EvolveSettings {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_max: 5.0,
            record_stride: 10,
            snapshots: false,
            positivity_every: 0,
            trace_tol: 1e-8,
            hermiticity_tol: 1e-10,
            positivity_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapRecord {
    pub t: f64,
    pub overlaps: Overlaps,
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub records: Vec<OverlapRecord>,
    pub snapshots: Vec<DensityMatrix>,
    pub final_state: DensityMatrix,
    pub max_trace_error: f64,
    pub max_hermiticity_error: f64,
    /// Smallest eigenvalue seen at checked records (`None` if never checked).
    pub min_eigenvalue: Option<f64>,
}

impl Evolution {
    /// CSV `t,m_x_1..,m_y_1..,m_z_1..`.
    pub fn write_overlaps_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let p = self.records.first().map_or(0, |r| r.overlaps.m_z.len());
        let mut header = vec!["t".to_string()];
        for axis in ["x", "y", "z"] {
            header.extend((1..=p).map(|mu| format!("m_{axis}_{mu}")));
        }
        writeln!(w, "{}", header.join(","))?;
        for r in &self.records {
            write!(w, "{}", r.t)?;
            let o = &r.overlaps;
            for v in o.m_x.iter().chain(&o.m_y).chain(&o.m_z) {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Fixed-step RK4 on the master equation, checking trace and Hermiticity
/// at every record and aborting when either drifts past tolerance.
pub fn evolve(rho0: &DensityMatrix, ops: &OperatorSet, patterns: &PatternSet, settings: &EvolveSettings) -> Result<Evolution> {
    if rho0.n_spins != ops.n_spins {
        return Err(Error::DimensionMismatch { expected: ops.n_spins, got: rho0.n_spins });
    }
    if !(settings.dt > 0.0 && settings.t_max > settings.dt) || settings.record_stride == 0 {
        return Err(Error::InvalidParameter("need dt > 0, t_max > dt and record_stride >= 1".into()));
    }
    let steps = step_count(settings.dt, settings.t_max);
    let mut rho = rho0.clone();
    let mut rk = Rk4::<Complex64>::new(rho.data.len());
    let mut evo = Evolution {
        records: Vec::new(),
        snapshots: Vec::new(),
        final_state: rho0.clone(),
        max_trace_error: 0.0,
        max_hermiticity_error: 0.0,
        min_eigenvalue: None,
    };
    let mut n_records = 0usize;
    let mut record = |rho: &DensityMatrix, t: f64, evo: &mut Evolution| -> Result<()> {
        let tr_err = (rho.trace() - Complex64::new(1.0, 0.0)).norm();
        let herm = rho.hermiticity_error();
        evo.max_trace_error = evo.max_trace_error.max(tr_err);
        evo.max_hermiticity_error = evo.max_hermiticity_error.max(herm);
        let fail = |what, value| Error::InvariantViolation { t, what, value, dt: settings.dt };
        if tr_err > settings.trace_tol {
            return Err(fail("trace error", tr_err));
        }
        if herm > settings.hermiticity_tol {
            return Err(fail("hermiticity error", herm));
        }
        if settings.positivity_every > 0 && n_records.is_multiple_of(settings.positivity_every) {
            let lam = rho.min_eigenvalue();
            evo.min_eigenvalue = Some(evo.min_eigenvalue.map_or(lam, |m| m.min(lam)));
            if lam < -settings.positivity_tol {
                return Err(fail("minimum eigenvalue", lam));
            }
        }
        n_records += 1;
        evo.records.push(OverlapRecord { t, overlaps: overlap_expectation(rho, patterns)? });
        if settings.snapshots {
            evo.snapshots.push(rho.clone());
        }
        Ok(())
    };
    record(&rho, 0.0, &mut evo)?;
    for k in 1..=steps {
        rk.step(&mut rho.data, settings.dt, |y, dy| ops.apply(y, dy));
        if k % settings.record_stride == 0 || k == steps {
            record(&rho, k as f64 * settings.dt, &mut evo)?;
        }
    }
    evo.final_state = rho;
    Ok(evo)
}

const SNAPSHOT_MAGIC: [u8; 4] = *b"QHDM";

/// Binary snapshot dump: 16-byte header (magic `QHDM`, N as u32, record
/// count as u64, all little-endian) followed by each ρ as row-major
/// `(re, im)` f64 pairs.
pub fn write_snapshots<W: Write>(snapshots: &[DensityMatrix], mut w: W) -> Result<()> {
    let n = snapshots.first().map_or(0, |s| s.n_spins);
    if snapshots.iter().any(|s| s.n_spins != n) {
        return Err(Error::InvalidParameter("snapshots must share one system size".into()));
    }
    w.write_all(&SNAPSHOT_MAGIC)?;
    w.write_all(&(n as u32).to_le_bytes())?;
    w.write_all(&(snapshots.len() as u64).to_le_bytes())?;
    for s in snapshots {
        for v in &s.data {
            w.write_all(&v.re.to_le_bytes())?;
            w.write_all(&v.im.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_snapshots<R: Read>(mut r: R) -> Result<Vec<DensityMatrix>> {
    let mut header = [0u8; 16];
    r.read_exact(&mut header)?;
    if header[..4] != SNAPSHOT_MAGIC {
        return Err(Error::InvalidParameter("not a density-matrix snapshot file".into()));
    }
    let n = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    let count = u64::from_le_bytes(header[8..16].try_into().unwrap()) as usize;
    check_n(n)?;
    let dim = 1usize << n;
    let mut out = Vec::with_capacity(count);
    let mut buf = [0u8; 16];
    for _ in 0..count {
        let mut data = Vec::with_capacity(dim * dim);
        for _ in 0..dim * dim {
            r.read_exact(&mut buf)?;
            let re = f64::from_le_bytes(buf[..8].try_into().unwrap());
            let im = f64::from_le_bytes(buf[8..].try_into().unwrap());
            data.push(Complex64::new(re, im));
        }
        out.push(DensityMatrix { n_spins: n, dim, data });
    }
    Ok(out)
}
