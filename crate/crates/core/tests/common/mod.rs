//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use qhop_core::classical::PatternSet;
use qhop_core::lindblad::spin_z;

/// ΔE_k(z) by contracting W_{k j1..j(x-1)} = N^{1-x} Σ_μ ξ_k ξ_j1 .. ξ_j(x-1)
/// against z_j1 .. z_j(x-1), all indices free.
pub fn delta_e_tensor(p: &PatternSet, xv: u32, k: usize, z: &[i8]) -> f64 {
    let n = p.n_spins();
    let order = xv as usize - 1;
    let mut total = 0.0;
    let mut idx = vec![0usize; order];
    loop {
        let mut w = 0.0;
        for mu in 0..p.n_patterns() {
            let mut prod = p.get(mu, k) as f64;
            for &j in &idx {
                prod *= p.get(mu, j) as f64;
            }
            w += prod;
        }
        let zprod: f64 = idx.iter().map(|&j| z[j] as f64).product();
        total += w * zprod;
        let mut d = 0;
        loop {
            if d == order {
                return total / (n as f64).powi(order as i32);
            }
            idx[d] += 1;
            if idx[d] < n {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

pub fn basis_spins(n: usize, a: usize) -> Vec<i8> {
    (0..n).map(|k| spin_z(n, k, a)).collect()
}

/// Classical continuous-time Markov chain over the 2^N configurations:
/// a flip of site k that lands in b happens at rate
/// e^{τβΔE_k(b)} / (2 cosh βΔE_k(b)), τ = +1 if site k of b is up.
pub fn rate_matrix(p: &PatternSet, xv: u32, beta: f64) -> DMatrix<f64> {
    let n = p.n_spins();
    let dim = 1 << n;
    let mut w = DMatrix::<f64>::zeros(dim, dim);
    for a in 0..dim {
        for k in 0..n {
            let b = a ^ (1 << (n - 1 - k));
            let zb = basis_spins(n, b);
            let d = delta_e_tensor(p, xv, k, &zb);
            let tau = zb[k] as f64;
            let rate = (tau * beta * d).exp() / (2.0 * (beta * d).cosh());
            w[(b, a)] += rate;
            w[(a, a)] -= rate;
        }
    }
    w
}

