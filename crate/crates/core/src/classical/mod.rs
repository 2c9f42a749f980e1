//! Classical discrete Hopfield and dense (modern) Hopfield networks.
//!
//! Spins and pattern entries are stored as `i8` values restricted to ±1.
//! Energies follow `E = -1/(2 N^{x-1}) Σ_μ (ξ^μ · σ)^x`; for `x = 2` this is
//! the Hebbian energy `-½ Σ_ij J_ij σ_i σ_j`.

mod capacity;

pub use capacity::{capacity_experiment, CapacityConfig, CapacityReport, LoadPoint};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Exponent, Result};

fn check_spin(v: i8) -> Result<i8> {
    match v {
        1 | -1 => Ok(v),
        other => Err(Error::InvalidSpin(other as i64)),
    }
}

/// A configuration of `N` classical ±1 spins.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinConfig(Vec<i8>);

impl SpinConfig {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if spins.is_empty() {
            return Err(Error::InvalidParameter("spin configuration must be non-empty".into()));
        }
        for &s in &spins {
            check_spin(s)?;
        }
        Ok(Self(spins))
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self((0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn spins(&self) -> &[i8] {
        &self.0
    }

    pub fn get(&self, i: usize) -> i8 {
        self.0[i]
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] = -self.0[i];
    }

    /// Global spin inversion.
    pub fn inverted(&self) -> Self {
        Self(self.0.iter().map(|&s| -s).collect())
    }

    pub fn hamming(&self, other: &SpinConfig) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }

    /// Copy with `count` distinct, uniformly chosen sites flipped.
    pub fn with_flips<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Self {
        let mut out = self.clone();
        let sites = rand::seq::index::sample(rng, self.len(), count.min(self.len()));
        for i in sites {
            out.flip(i);
        }
        out
    }
}

/// `p` stored binary patterns over `N` spins, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternSet {
    n_patterns: usize,
    n_spins: usize,
    data: Vec<i8>,
}

impl PatternSet {
    pub fn new(rows: Vec<Vec<i8>>) -> Result<Self> {
        let n_patterns = rows.len();
        if n_patterns == 0 {
            return Err(Error::InvalidParameter("at least one pattern is required".into()));
        }
        let n_spins = rows[0].len();
        if n_spins == 0 {
            return Err(Error::InvalidParameter("patterns must have at least one spin".into()));
        }
        let mut data = Vec::with_capacity(n_patterns * n_spins);
        for row in rows {
            if row.len() != n_spins {
                return Err(Error::DimensionMismatch { expected: n_spins, got: row.len() });
            }
            for v in row {
                data.push(check_spin(v)?);
            }
        }
        Ok(Self { n_patterns, n_spins, data })
    }

    /// Independent unbiased random patterns.
    pub fn random<R: Rng + ?Sized>(p: usize, n: usize, rng: &mut R) -> Result<Self> {
        if p == 0 || n == 0 {
            return Err(Error::InvalidParameter(format!("need p >= 1 and N >= 1, got p={p}, N={n}")));
        }
        let data = (0..p * n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
        Ok(Self { n_patterns: p, n_spins: n, data })
    }

    pub fn n_patterns(&self) -> usize {
        self.n_patterns
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn pattern(&self, mu: usize) -> &[i8] {
        &self.data[mu * self.n_spins..(mu + 1) * self.n_spins]
    }

    pub fn get(&self, mu: usize, i: usize) -> i8 {
        self.data[mu * self.n_spins + i]
    }

    pub fn config(&self, mu: usize) -> SpinConfig {
        SpinConfig(self.pattern(mu).to_vec())
    }

    /// Overlap sums `Σ_j ξ_j^μ σ_j` for every pattern.
    pub fn overlaps(&self, s: &SpinConfig) -> Vec<i64> {
        (0..self.n_patterns)
            .map(|mu| self.pattern(mu).iter().zip(s.spins()).map(|(&a, &b)| (a * b) as i64).sum())
            .collect()
    }

    fn check_config(&self, s: &SpinConfig) -> Result<()> {
        if s.len() != self.n_spins {
            return Err(Error::DimensionMismatch { expected: self.n_spins, got: s.len() });
        }
        Ok(())
    }
}

/// Hebbian coupling matrix `J_ij = (1/N) Σ_μ ξ_i^μ ξ_j^μ`, diagonal included.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    n: usize,
    data: Vec<f64>,
}

impl CouplingMatrix {
    pub fn n_spins(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Local field `Σ_{j≠i} J_ij σ_j`.
    pub fn local_field(&self, s: &SpinConfig, i: usize) -> f64 {
        let row = &self.data[i * self.n..(i + 1) * self.n];
        row.iter()
            .zip(s.spins())
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, (&jij, &sj))| jij * sj as f64)
            .sum()
    }
}

pub fn hebbian_couplings(patterns: &PatternSet) -> CouplingMatrix {
    let n = patterns.n_spins();
    let mut data = vec![0.0; n * n];
    for mu in 0..patterns.n_patterns() {
        let xi = patterns.pattern(mu);
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] += (xi[i] * xi[j]) as f64;
            }
        }
    }
    let inv_n = 1.0 / n as f64;
    data.iter_mut().for_each(|v| *v *= inv_n);
    CouplingMatrix { n, data }
}

/// `-½ Σ_{i,j} J_ij σ_i σ_j` over the full double sum.
pub fn hopfield_energy(couplings: &CouplingMatrix, s: &SpinConfig) -> Result<f64> {
    let n = couplings.n_spins();
    if s.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: s.len() });
    }
    let mut acc = 0.0;
    for i in 0..n {
        let si = s.get(i) as f64;
        for j in 0..n {
            acc += couplings.get(i, j) * si * s.get(j) as f64;
        }
    }
    Ok(-0.5 * acc)
}

/// Dense energy `-1/(2 N^{x-1}) Σ_μ (Σ_j ξ_j^μ σ_j)^x`.
pub fn modern_energy(patterns: &PatternSet, s: &SpinConfig, x: Exponent) -> Result<f64> {
    patterns.check_config(s)?;
    let n = patterns.n_spins() as f64;
    let sum: f64 = patterns
        .overlaps(s)
        .into_iter()
        .map(|m| (m as f64).powi(x.get() as i32))
        .sum();
    Ok(-sum / (2.0 * n.powi(x.field_power())))
}

/// Leading-order local drive at site `i`:
/// `(1/N^{x-1}) Σ_μ ξ_i^μ (Σ_{j≠i} ξ_j^μ σ_j)^{x-1}`.
///
/// For `x = 2` this is the Hebbian field `Σ_{j≠i} J_ij σ_j`.
pub fn delta_e(patterns: &PatternSet, s: &SpinConfig, i: usize, x: Exponent) -> Result<f64> {
    patterns.check_config(s)?;
    let n = patterns.n_spins();
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, n });
    }
    let overlaps = patterns.overlaps(s);
    let drive = leading_order_drive(patterns, &overlaps, s.get(i), i, x);
    Ok(drive as f64 / (n as f64).powi(x.field_power()))
}

/// Energy released by setting `σ_i = +1` rather than `-1`:
/// `E(σ_i = -1) - E(σ_i = +1)`.
///
/// For `x = 2` this equals `2 · delta_e`; for a single pattern it has the
/// sign of `delta_e` at every `x`.
pub fn flip_gain(patterns: &PatternSet, s: &SpinConfig, i: usize, x: Exponent) -> Result<f64> {
    patterns.check_config(s)?;
    let n = patterns.n_spins();
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, n });
    }
    let overlaps = patterns.overlaps(s);
    let gain = exact_gain(patterns, &overlaps, s.get(i), i, x);
    Ok(gain as f64 / (2.0 * (n as f64).powi(x.field_power())))
}

fn ipow(b: i128, e: u32) -> i128 {
    b.pow(e)
}

// b_μ = ξ_i^μ Σ_{j≠i} ξ_j^μ σ_j; even x makes ξ_i^μ (ξ_i^μ b_μ)^{x-1} = b_μ^{x-1}.
fn excluded_fields<'a>(
    patterns: &'a PatternSet,
    overlaps: &'a [i64],
    si: i8,
    i: usize,
) -> impl Iterator<Item = i128> + 'a {
    overlaps.iter().enumerate().map(move |(mu, &m)| {
        let xi = patterns.get(mu, i) as i64;
        (xi * (m - xi * si as i64)) as i128
    })
}

fn leading_order_drive(patterns: &PatternSet, overlaps: &[i64], si: i8, i: usize, x: Exponent) -> i128 {
    let e = x.get() - 1;
    excluded_fields(patterns, overlaps, si, i).map(|b| ipow(b, e)).sum()
}

fn exact_gain(patterns: &PatternSet, overlaps: &[i64], si: i8, i: usize, x: Exponent) -> i128 {
    let e = x.get();
    excluded_fields(patterns, overlaps, si, i)
        .map(|b| ipow(b + 1, e) - ipow(b - 1, e))
        .sum()
}

/// Which quantity's sign drives the asynchronous update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateRule {
    /// Sign of the exact single-flip energy difference ([`flip_gain`]);
    /// energy never increases.
    #[default]
    EnergyDifference,
    /// Sign of the leading-order drive ([`delta_e`]).
    LeadingOrder,
}

/// Order in which one sweep visits the sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SiteOrder {
    #[default]
    Sequential,
    /// Fresh uniformly random permutation each sweep.
    RandomPermutation,
}

/// Incremental single-spin dynamics with cached overlap sums.
struct Sweeper<'a> {
    patterns: &'a PatternSet,
    x: Exponent,
    rule: UpdateRule,
    state: SpinConfig,
    overlaps: Vec<i64>,
    order: Vec<usize>,
}

impl<'a> Sweeper<'a> {
    fn new(patterns: &'a PatternSet, s: SpinConfig, x: Exponent, rule: UpdateRule) -> Self {
        let overlaps = patterns.overlaps(&s);
        let order = (0..s.len()).collect();
        Self { patterns, x, rule, state: s, overlaps, order }
    }

    fn drive(&self, i: usize) -> i128 {
        let si = self.state.get(i);
        match self.rule {
            UpdateRule::EnergyDifference => exact_gain(self.patterns, &self.overlaps, si, i, self.x),
            UpdateRule::LeadingOrder => leading_order_drive(self.patterns, &self.overlaps, si, i, self.x),
        }
    }

    /// Applies `σ_i ← sgn(drive)`; a zero drive keeps the spin. Returns
    /// whether the spin flipped.
    fn update_site(&mut self, i: usize) -> bool {
        let d = self.drive(i);
        let target = match d.signum() {
            1 => 1,
            -1 => -1,
            _ => return false,
        };
        if target == self.state.get(i) {
            return false;
        }
        for (mu, m) in self.overlaps.iter_mut().enumerate() {
            *m += 2 * (self.patterns.get(mu, i) * target) as i64;
        }
        self.state.flip(i);
        true
    }

    fn sweep<R: Rng + ?Sized>(&mut self, order: SiteOrder, rng: &mut R) -> usize {
        if order == SiteOrder::RandomPermutation {
            self.order.shuffle(rng);
        }
        let mut flips = 0;
        for k in 0..self.order.len() {
            let i = self.order[k];
            if self.update_site(i) {
                flips += 1;
            }
        }
        flips
    }
}

/// One asynchronous sweep over all sites.
pub fn update_async<R: Rng + ?Sized>(
    patterns: &PatternSet,
    s: &SpinConfig,
    x: Exponent,
    order: SiteOrder,
    rng: &mut R,
) -> Result<SpinConfig> {
    update_async_with(patterns, s, x, order, UpdateRule::default(), rng)
}

pub fn update_async_with<R: Rng + ?Sized>(
    patterns: &PatternSet,
    s: &SpinConfig,
    x: Exponent,
    order: SiteOrder,
    rule: UpdateRule,
    rng: &mut R,
) -> Result<SpinConfig> {
    patterns.check_config(s)?;
    let mut sweeper = Sweeper::new(patterns, s.clone(), x, rule);
    sweeper.sweep(order, rng);
    Ok(sweeper.state)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Retrieval {
    pub state: SpinConfig,
    pub sweeps: usize,
    pub converged: bool,
}

/// Sequential sweeps until no spin changes or `max_sweeps` is reached.
pub fn retrieve(patterns: &PatternSet, s0: &SpinConfig, x: Exponent, max_sweeps: usize) -> Result<Retrieval> {
    retrieve_with(
        patterns,
        s0,
        x,
        max_sweeps,
        SiteOrder::Sequential,
        UpdateRule::default(),
        &mut rand::rngs::mock::StepRng::new(0, 0),
    )
}

pub fn retrieve_with<R: Rng + ?Sized>(
    patterns: &PatternSet,
    s0: &SpinConfig,
    x: Exponent,
    max_sweeps: usize,
    order: SiteOrder,
    rule: UpdateRule,
    rng: &mut R,
) -> Result<Retrieval> {
    if max_sweeps == 0 {
        return Err(Error::InvalidParameter("max_sweeps must be at least 1".into()));
    }
    patterns.check_config(s0)?;
    let mut sweeper = Sweeper::new(patterns, s0.clone(), x, rule);
    for sweep in 1..=max_sweeps {
        if sweeper.sweep(order, rng) == 0 {
            return Ok(Retrieval { state: sweeper.state, sweeps: sweep, converged: true });
        }
    }
    Ok(Retrieval { state: sweeper.state, sweeps: max_sweeps, converged: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn x(v: u32) -> Exponent {
        Exponent::new(v).unwrap()
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn couplings_small_cases() {
        let p = PatternSet::new(vec![vec![1, 1]]).unwrap();
        assert_eq!(hebbian_couplings(&p).get(0, 1), 0.5);
        let p = PatternSet::new(vec![vec![1, 1], vec![1, -1]]).unwrap();
        assert_eq!(hebbian_couplings(&p).get(0, 1), 0.0);
    }

    #[test]
    fn couplings_match_triple_loop() {
        let p = PatternSet::random(3, 10, &mut rng(1)).unwrap();
        let j = hebbian_couplings(&p);
        for a in 0..10 {
            for b in 0..10 {
                let mut acc = 0.0;
                for mu in 0..3 {
                    acc += (p.get(mu, a) * p.get(mu, b)) as f64;
                }
                assert!((j.get(a, b) - acc / 10.0).abs() < 1e-15);
                assert_eq!(j.get(a, b), j.get(b, a));
            }
        }
    }

    #[test]
    fn rejects_bad_entries() {
        assert!(matches!(PatternSet::new(vec![vec![1, 0]]), Err(Error::InvalidSpin(0))));
        assert!(SpinConfig::new(vec![2]).is_err());
        assert!(PatternSet::new(vec![vec![1, 1], vec![1]]).is_err());
        assert!(PatternSet::new(vec![]).is_err());
    }

    #[test]
    fn hopfield_energy_examples() {
        let p = PatternSet::random(1, 12, &mut rng(2)).unwrap();
        let j = hebbian_couplings(&p);
        assert!((hopfield_energy(&j, &p.config(0)).unwrap() + 6.0).abs() < 1e-12);

        let p = PatternSet::new(vec![vec![1, 1]]).unwrap();
        let j = hebbian_couplings(&p);
        let s = SpinConfig::new(vec![1, -1]).unwrap();
        assert_eq!(hopfield_energy(&j, &s).unwrap(), 0.0);
        assert!(hopfield_energy(&j, &SpinConfig::new(vec![1]).unwrap()).is_err());
    }

    #[test]
    fn modern_energy_pattern_and_x2_identity() {
        let p1 = PatternSet::random(1, 9, &mut rng(3)).unwrap();
        for xv in [2, 4, 6, 8] {
            let e = modern_energy(&p1, &p1.config(0), x(xv)).unwrap();
            assert!((e + 4.5).abs() < 1e-12, "x={xv} e={e}");
        }
        let p = PatternSet::random(4, 11, &mut rng(4)).unwrap();
        let j = hebbian_couplings(&p);
        let mut r = rng(5);
        for _ in 0..50 {
            let s = SpinConfig::random(11, &mut r);
            let a = modern_energy(&p, &s, x(2)).unwrap();
            let b = hopfield_energy(&j, &s).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn modern_energy_x4_direct_sum() {
        let p = PatternSet::random(3, 7, &mut rng(6)).unwrap();
        let s = SpinConfig::random(7, &mut rng(7));
        let mut acc = 0.0;
        for mu in 0..3 {
            let mut m = 0.0;
            for j in 0..7 {
                m += (p.get(mu, j) * s.get(j)) as f64;
            }
            acc += m * m * m * m;
        }
        let expected = -acc / (2.0 * 7.0_f64.powi(3));
        assert!((modern_energy(&p, &s, x(4)).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn delta_e_recall_and_index_errors() {
        let p = PatternSet::random(1, 10, &mut rng(8)).unwrap();
        let s = p.config(0);
        for xv in [2, 4] {
            let expected = 9.0_f64.powi(xv as i32 - 1) / 10.0_f64.powi(xv as i32 - 1);
            for i in 0..10 {
                let d = delta_e(&p, &s, i, x(xv)).unwrap();
                let xi = p.get(0, i) as f64;
                assert!(d * xi > 0.0);
                assert!((d - xi * expected).abs() < 1e-12);
            }
        }
        assert!(matches!(delta_e(&p, &s, 10, x(2)), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn delta_e_x2_is_hebbian_field() {
        let mut r = rng(9);
        for _ in 0..20 {
            let p = PatternSet::random(5, 13, &mut r).unwrap();
            let j = hebbian_couplings(&p);
            let s = SpinConfig::random(13, &mut r);
            for i in 0..13 {
                let d = delta_e(&p, &s, i, x(2)).unwrap();
                assert!((d - j.local_field(&s, i)).abs() < 1e-12);
                let g = flip_gain(&p, &s, i, x(2)).unwrap();
                assert!((g - 2.0 * d).abs() < 1e-12);
            }
        }
    }

    // ΔE_i = Σ_{j1..j3 ≠ i} W_{i j1 j2 j3} σ_j1 σ_j2 σ_j3 with the W tensor
    // built explicitly.
    #[test]
    fn delta_e_x4_matches_w_tensor() {
        let n = 8;
        let p = PatternSet::random(3, n, &mut rng(10)).unwrap();
        let s = SpinConfig::random(n, &mut rng(11));
        let norm = (n as f64).powi(3);
        for i in 0..n {
            let mut acc = 0.0;
            for j1 in (0..n).filter(|&j| j != i) {
                for j2 in (0..n).filter(|&j| j != i) {
                    for j3 in (0..n).filter(|&j| j != i) {
                        let w: f64 = (0..3)
                            .map(|mu| (p.get(mu, i) * p.get(mu, j1) * p.get(mu, j2) * p.get(mu, j3)) as f64)
                            .sum::<f64>()
                            / norm;
                        acc += w * (s.get(j1) * s.get(j2) * s.get(j3)) as f64;
                    }
                }
            }
            assert!((delta_e(&p, &s, i, x(4)).unwrap() - acc).abs() < 1e-12);
        }
    }

    #[test]
    fn flip_gain_is_energy_difference() {
        let n = 8;
        let p = PatternSet::random(3, n, &mut rng(12)).unwrap();
        let s = SpinConfig::random(n, &mut rng(13));
        for i in 0..n {
            let mut up = s.clone();
            let mut down = s.clone();
            if up.get(i) == -1 {
                up.flip(i);
            } else {
                down.flip(i);
            }
            let expected = modern_energy(&p, &down, x(4)).unwrap() - modern_energy(&p, &up, x(4)).unwrap();
            assert!((flip_gain(&p, &s, i, x(4)).unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn stored_pattern_and_inverse_are_fixed() {
        let p = PatternSet::random(1, 40, &mut rng(14)).unwrap();
        let xi = p.config(0);
        for xv in [2, 4, 6] {
            for start in [xi.clone(), xi.inverted()] {
                let out = update_async(&p, &start, x(xv), SiteOrder::Sequential, &mut rng(0)).unwrap();
                assert_eq!(out, start);
                let r = retrieve(&p, &start, x(xv), 10).unwrap();
                assert_eq!(r, Retrieval { state: start.clone(), sweeps: 1, converged: true });
            }
        }
    }

    #[test]
    fn retrieval_from_corrupted_probe() {
        let mut r = rng(20241014);
        let mut ok = 0;
        for _ in 0..100 {
            let p = PatternSet::random(5, 100, &mut r).unwrap();
            let probe = p.config(0).with_flips(10, &mut r);
            let out = retrieve(&p, &probe, x(4), 5).unwrap();
            if out.state == p.config(0) {
                ok += 1;
            }
        }
        assert!(ok >= 95, "{ok}/100 recovered");
    }

    #[test]
    fn zero_drive_keeps_spin() {
        // Two orthogonal patterns at N=2: the field on either site cancels.
        let p = PatternSet::new(vec![vec![1, 1], vec![1, -1]]).unwrap();
        for s in [vec![1, 1], vec![-1, 1], vec![1, -1], vec![-1, -1]] {
            let s = SpinConfig::new(s).unwrap();
            assert_eq!(flip_gain(&p, &s, 0, x(2)).unwrap(), 0.0);
            let out = update_async(&p, &s, x(2), SiteOrder::Sequential, &mut rng(0)).unwrap();
            assert_eq!(out, s);
        }
    }

    #[test]
    fn max_sweeps_zero_rejected() {
        let p = PatternSet::random(1, 10, &mut rng(0)).unwrap();
        assert!(retrieve(&p, &p.config(0), x(2), 0).is_err());
    }
}
