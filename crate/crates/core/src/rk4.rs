//! Classic fixed-step fourth-order Runge–Kutta on flat state vectors.

use std::ops::{Add, Mul};

/// Scratch buffers for [`Rk4::step`], reused across steps.
#[derive(Debug, Clone)]
pub struct Rk4<E> {
    k1: Vec<E>,
    k2: Vec<E>,
    k3: Vec<E>,
    k4: Vec<E>,
    tmp: Vec<E>,
}

impl<E> Rk4<E>
where
    E: Copy + Default + Add<Output = E> + Mul<f64, Output = E>,
{
    pub fn new(dim: usize) -> Self {
        Self {
            k1: vec![E::default(); dim],
            k2: vec![E::default(); dim],
            k3: vec![E::default(); dim],
            k4: vec![E::default(); dim],
            tmp: vec![E::default(); dim],
        }
    }

    /// Advances `y` by one step of size `dt`. `f(y, out)` writes dy/dt into
    /// `out`; the system is autonomous.
    pub fn step<F>(&mut self, y: &mut [E], dt: f64, mut f: F)
    where
        F: FnMut(&[E], &mut [E]),
    {
        let n = y.len();
        debug_assert_eq!(n, self.k1.len());

        f(y, &mut self.k1);
        for i in 0..n {
            self.tmp[i] = y[i] + self.k1[i] * (0.5 * dt);
        }
        f(&self.tmp, &mut self.k2);
        for i in 0..n {
            self.tmp[i] = y[i] + self.k2[i] * (0.5 * dt);
        }
        f(&self.tmp, &mut self.k3);
        for i in 0..n {
            self.tmp[i] = y[i] + self.k3[i] * dt;
        }
        f(&self.tmp, &mut self.k4);

        let w = dt / 6.0;
        for i in 0..n {
            let incr = self.k1[i] + self.k2[i] * 2.0 + self.k3[i] * 2.0 + self.k4[i];
            y[i] = y[i] + incr * w;
        }
    }
}

/// Number of whole steps of size `dt` needed to reach `t_max`.
pub(crate) fn step_count(dt: f64, t_max: f64) -> usize {
    (t_max / dt).round() as usize
}
