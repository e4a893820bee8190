use crate::error::{Error, Result};

/// Uniform structured grid with spacing and extent metadata.
///
/// Cell values live at the nodes `x_i = i*dx` (i = 0..nx-1); on periodic axes
/// the node set tiles the torus, on non-periodic axes it spans `[0, (nx-1)*dx]`
/// but the quadrature extent is still `nx*dx` (midpoint rule, cell value times
/// cell volume). 2D grids carry `nz = 1`, `dz = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    ndim: usize,
    shape: [usize; 3],
    spacing: [f64; 3],
    periodic: [bool; 3],
}

impl Grid {
    pub fn new_2d(nx: usize, ny: usize, dx: f64, dy: f64, periodic: [bool; 2]) -> Result<Self> {
        Self::new(2, [nx, ny, 1], [dx, dy, 1.0], [periodic[0], periodic[1], false])
    }

    pub fn new_3d(
        shape: [usize; 3],
        spacing: [f64; 3],
        periodic: [bool; 3],
    ) -> Result<Self> {
        Self::new(3, shape, spacing, periodic)
    }

    fn new(ndim: usize, shape: [usize; 3], spacing: [f64; 3], periodic: [bool; 3]) -> Result<Self> {
        if ndim != 2 && ndim != 3 {
            return Err(Error::validation(format!("ndim must be 2 or 3, got {ndim}")));
        }
        if ndim == 2 && shape[2] != 1 {
            return Err(Error::validation(format!(
                "2D grid requires nz = 1, got nz = {}",
                shape[2]
            )));
        }
        for ax in 0..ndim {
            if shape[ax] < 4 {
                return Err(Error::validation(format!(
                    "grid shape entries must be >= 4, got {} on axis {ax}",
                    shape[ax]
                )));
            }
        }
        for ax in 0..3 {
            if !(spacing[ax] > 0.0) || !spacing[ax].is_finite() {
                return Err(Error::validation(format!(
                    "grid spacing must be positive and finite, got {} on axis {ax}",
                    spacing[ax]
                )));
            }
        }
        Ok(Grid { ndim, shape, spacing, periodic })
    }

    /// Periodic square grid on `[0, extent)^2`.
    pub fn periodic_square(n: usize, extent: f64) -> Result<Self> {
        let d = extent / n as f64;
        Self::new_2d(n, n, d, d, [true, true])
    }

    pub fn ndim(&self) -> usize {
        self.ndim
    }

    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn periodic(&self) -> [bool; 3] {
        self.periodic
    }

    pub fn ncells(&self) -> usize {
        self.shape[0] * self.shape[1] * self.shape[2]
    }

    /// |Ω| = nx·dx · ny·dy · [nz·dz]
    pub fn volume(&self) -> f64 {
        let mut v = self.shape[0] as f64 * self.spacing[0] * self.shape[1] as f64 * self.spacing[1];
        if self.ndim == 3 {
            v *= self.shape[2] as f64 * self.spacing[2];
        }
        v
    }

    pub fn cell_volume(&self) -> f64 {
        let mut v = self.spacing[0] * self.spacing[1];
        if self.ndim == 3 {
            v *= self.spacing[2];
        }
        v
    }

    /// Mesh width h = max over active axes of the spacing.
    pub fn meshwidth(&self) -> f64 {
        let mut h = self.spacing[0].max(self.spacing[1]);
        if self.ndim == 3 {
            h = h.max(self.spacing[2]);
        }
        h
    }

    /// Flat index, row-major with x fastest-varying.
    #[inline]
    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.shape[1] + j) * self.shape[0] + i
    }

    /// Node coordinate on one axis.
    #[inline]
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        i as f64 * self.spacing[axis]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(Grid::new_2d(3, 8, 0.1, 0.1, [true, true]).is_err());
        assert!(Grid::new_2d(8, 8, 0.0, 0.1, [true, true]).is_err());
        assert!(Grid::new_3d([8, 8, 8], [0.1, 0.1, -0.1], [true; 3]).is_err());
    }

    #[test]
    fn volume_and_meshwidth() {
        let g = Grid::periodic_square(64, 2.0 * std::f64::consts::PI).unwrap();
        assert!((g.volume() - 4.0 * std::f64::consts::PI.powi(2)).abs() < 1e-12);
        assert!((g.meshwidth() - 2.0 * std::f64::consts::PI / 64.0).abs() < 1e-15);
        let g3 = Grid::new_3d([8, 16, 4], [0.5, 0.25, 1.0], [true; 3]).unwrap();
        assert!((g3.volume() - 4.0 * 4.0 * 4.0).abs() < 1e-12);
        assert!((g3.meshwidth() - 1.0).abs() < 1e-15);
    }
}
