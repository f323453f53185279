use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::C64;

/// Uniform momentum grid `p_k = −p_max + k·Δp`, `k = 0..len`, `Δp = 2 p_max / len`.
///
/// The dual position grid used by the position pipeline is
/// `x_j = (j − len/2)·Δx` with `Δx = π / p_max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentumGrid {
    p_max: f64,
    len: usize,
}

impl MomentumGrid {
    pub const DEFAULT_LEN: usize = 4096;

    pub fn new(p_max: f64, len: usize) -> Result<Self> {
        if !(p_max.is_finite() && p_max > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "p_max must be positive, got {p_max}"
            )));
        }
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "grid length must be a power of two >= 2, got {len}"
            )));
        }
        Ok(Self { p_max, len })
    }

    /// `p_max = max(8 s, 4)`, 4096 points.
    pub fn for_width(s: f64) -> Result<Self> {
        Self::new((8.0 * s).max(4.0), Self::DEFAULT_LEN)
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.p_max / self.len as f64
    }

    pub fn point(&self, k: usize) -> f64 {
        -self.p_max + k as f64 * self.spacing()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|k| self.point(k))
    }

    pub fn position_spacing(&self) -> f64 {
        std::f64::consts::PI / self.p_max
    }

    pub fn position(&self, j: usize) -> f64 {
        (j as f64 - (self.len / 2) as f64) * self.position_spacing()
    }
}

/// Battery state in the momentum representation.
#[derive(Clone, Debug, PartialEq)]
pub struct BatteryWavefunction {
    pub(crate) grid: MomentumGrid,
    pub(crate) amplitudes: Vec<C64>,
    pub(crate) gamma: f64,
    pub(crate) s: f64,
}

impl BatteryWavefunction {
    pub fn grid(&self) -> &MomentumGrid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn width(&self) -> f64 {
        self.s
    }

    /// `μ(p_k) = |ψ(p_k)|²`.
    pub fn momentum_density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Quadrature weights `μ(p_k)·Δp`.
    pub fn weights(&self) -> Vec<f64> {
        let dp = self.grid.spacing();
        self.amplitudes.iter().map(|a| a.norm_sqr() * dp).collect()
    }

    pub fn momentum_moment(&self, power: i32) -> f64 {
        self.weights()
            .iter()
            .zip(self.grid.points())
            .map(|(w, p)| w * p.powi(power))
            .sum()
    }

    /// The same battery translated in position by `a`: each amplitude picks
    /// up the phase `e^{−i a p_k}`.
    pub fn translated(&self, a: f64) -> Self {
        let amplitudes = self
            .amplitudes
            .iter()
            .zip(self.grid.points())
            .map(|(psi, p)| psi * C64::from_polar(1.0, -a * p))
            .collect();
        Self {
            amplitudes,
            ..self.clone()
        }
    }
}

/// `ψ(p) ∝ exp(−p²/(4 s²))`, normalized on the grid, so `|ψ|²` has standard
/// deviation `s`.
pub fn gaussian_battery(grid: MomentumGrid, s: f64, gamma: f64) -> Result<BatteryWavefunction> {
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "battery width must be positive, got {s}"
        )));
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    if s >= grid.p_max() / 6.0 {
        return Err(Error::Containment(format!(
            "width {s} does not fit in a momentum grid with p_max {}",
            grid.p_max()
        )));
    }
    let raw: Vec<f64> = grid
        .points()
        .map(|p| (-p * p / (4.0 * s * s)).exp())
        .collect();
    let norm = (raw.iter().map(|a| a * a).sum::<f64>() * grid.spacing()).sqrt();
    let amplitudes: Vec<C64> = raw.iter().map(|a| C64::new(a / norm, 0.0)).collect();
    let boundary = amplitudes[0].norm_sqr() * grid.spacing();
    if boundary >= 1e-12 {
        return Err(Error::Containment(format!("boundary mass {boundary:.3e}")));
    }
    Ok(BatteryWavefunction {
        grid,
        amplitudes,
        gamma,
        s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(MomentumGrid::new(1.0, 1000).is_err());
        assert!(MomentumGrid::new(0.0, 1024).is_err());
        assert!(MomentumGrid::new(1.0, 1).is_err());
        let g = MomentumGrid::new(2.0, 8).unwrap();
        assert_eq!(g.point(0), -2.0);
        assert_eq!(g.point(4), 0.0);
        assert_eq!(
            g.spacing() * g.position_spacing() * g.len() as f64,
            2.0 * std::f64::consts::PI
        );
    }

    #[test]
    fn default_grid_rule() {
        assert_eq!(MomentumGrid::for_width(0.01).unwrap().p_max(), 4.0);
        assert_eq!(MomentumGrid::for_width(1.0).unwrap().p_max(), 8.0);
        assert_eq!(MomentumGrid::for_width(0.01).unwrap().len(), 4096);
    }

    #[test]
    fn gaussian_moments() {
        let grid = MomentumGrid::new(2.0, 1024).unwrap();
        let b = gaussian_battery(grid, 0.05, 1.0).unwrap();
        assert!((b.momentum_moment(0) - 1.0).abs() < 1e-10);
        assert!(b.momentum_moment(1).abs() < 1e-10);
        let second = b.momentum_moment(2);
        assert!((second / 0.0025 - 1.0).abs() < 0.02);
    }

    #[test]
    fn containment_is_enforced() {
        let grid = MomentumGrid::new(2.0, 1024).unwrap();
        assert!(matches!(
            gaussian_battery(grid, 0.4, 1.0),
            Err(Error::Containment(_))
        ));
        assert!(gaussian_battery(grid, -1.0, 1.0).is_err());
        assert!(gaussian_battery(grid, 0.1, 0.0).is_err());
    }

    #[test]
    fn translation_keeps_density() {
        let grid = MomentumGrid::new(2.0, 256).unwrap();
        let b = gaussian_battery(grid, 0.1, 1.0).unwrap();
        let t = b.translated(3.7);
        for (x, y) in b.momentum_density().iter().zip(t.momentum_density()) {
            assert!((x - y).abs() < 1e-14);
        }
    }
}
