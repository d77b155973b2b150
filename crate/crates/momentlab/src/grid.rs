use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Uniform periodic grid on the flat torus T^{2n} = (ℝ/ℤ)^{2n}, n ∈ {1, 2}.
///
/// Coordinates run over x_i ∈ [0, 1) with `resolution` points per axis;
/// storage is row-major with the last axis fastest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    half_dim: usize,
    resolution: usize,
}

impl Grid {
    pub fn new(half_dim: usize, resolution: usize) -> Result<Self> {
        if !(1..=2).contains(&half_dim) {
            return Err(Error::InvalidConfig(format!(
                "half_dim must be 1 or 2, got {half_dim}"
            )));
        }
        if resolution < 8 || resolution % 2 != 0 {
            return Err(Error::InvalidConfig(format!(
                "resolution must be even and ≥ 8, got {resolution}"
            )));
        }
        Ok(Grid {
            half_dim,
            resolution,
        })
    }

    /// T² at the default desk-scale resolution N = 64.
    pub fn torus2() -> Self {
        Grid {
            half_dim: 1,
            resolution: 64,
        }
    }

    /// T⁴ at the default desk-scale resolution N = 16.
    pub fn torus4() -> Self {
        Grid {
            half_dim: 2,
            resolution: 16,
        }
    }

    pub fn half_dim(&self) -> usize {
        self.half_dim
    }

    /// Real dimension 2n of the torus.
    pub fn dims(&self) -> usize {
        2 * self.half_dim
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Total number of grid points N^{2n}.
    pub fn points(&self) -> usize {
        self.resolution.pow(self.dims() as u32)
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.resolution as f64
    }

    /// Grid coordinates of the flat index, last axis fastest.
    pub fn coords_of(&self, mut idx: usize) -> Vec<usize> {
        let d = self.dims();
        let n = self.resolution;
        let mut c = vec![0usize; d];
        for axis in (0..d).rev() {
            c[axis] = idx % n;
            idx /= n;
        }
        c
    }

    /// Position x ∈ [0,1)^{2n} of the flat index.
    pub fn point_of(&self, idx: usize) -> Vec<f64> {
        self.coords_of(idx)
            .into_iter()
            .map(|c| c as f64 * self.spacing())
            .collect()
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(
                format!("{self:?}"),
                format!("{other:?}"),
            ));
        }
        Ok(())
    }
}

/// Real scalar field sampled on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    data: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: Grid) -> Self {
        Field {
            grid,
            data: vec![0.0; grid.points()],
        }
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Field {
            grid,
            data: vec![value; grid.points()],
        }
    }

    pub fn from_data(grid: Grid, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.points() {
            return Err(Error::InvalidConfig(format!(
                "field data has {} samples, grid needs {}",
                data.len(),
                grid.points()
            )));
        }
        Ok(Field { grid, data })
    }

    /// Sample `f` at every grid point, x ∈ [0,1)^{2n}.
    pub fn from_fn(grid: Grid, mut f: impl FnMut(&[f64]) -> f64) -> Self {
        let d = grid.dims();
        let n = grid.resolution();
        let h = grid.spacing();
        let mut data = Vec::with_capacity(grid.points());
        let mut coords = vec![0usize; d];
        loop {
            let x: Vec<f64> = coords.iter().map(|&c| c as f64 * h).collect();
            data.push(f(&x));
            let mut axis = d;
            loop {
                if axis == 0 {
                    return Field { grid, data };
                }
                axis -= 1;
                coords[axis] += 1;
                if coords[axis] < n {
                    break;
                }
                coords[axis] = 0;
            }
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Compensated (Kahan) mean; bitwise reproducible and accurate to a few ulps.
    pub fn mean(&self) -> f64 {
        kahan_sum(&self.data) / self.data.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn linf(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, s: f64) -> Field {
        Field {
            grid: self.grid,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.grid.check_same(&other.grid)?;
        Ok(Field {
            grid: self.grid,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.grid.check_same(&other.grid)?;
        Ok(Field {
            grid: self.grid,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn mul(&self, other: &Field) -> Result<Field> {
        self.grid.check_same(&other.grid)?;
        Ok(Field {
            grid: self.grid,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    pub fn div(&self, other: &Field) -> Result<Field> {
        self.grid.check_same(&other.grid)?;
        Ok(Field {
            grid: self.grid,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a / b)
                .collect(),
        })
    }

    pub fn add_scalar(&self, s: f64) -> Field {
        Field {
            grid: self.grid,
            data: self.data.iter().map(|v| v + s).collect(),
        }
    }

    /// a += s·b in place.
    pub fn axpy(&mut self, s: f64, other: &Field) -> Result<()> {
        self.grid.check_same(&other.grid)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
        Ok(())
    }

    /// Shift to zero arithmetic mean.
    pub fn project_mean_zero(&mut self) {
        let m = self.mean();
        for v in &mut self.data {
            *v -= m;
        }
    }
}

pub(crate) fn kahan_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &v in values {
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_bad_parameters() {
        assert!(Grid::new(3, 16).is_err());
        assert!(Grid::new(1, 7).is_err());
        assert!(Grid::new(1, 6).is_err());
        assert!(Grid::new(2, 16).is_ok());
    }

    #[test]
    fn point_count_and_coords_roundtrip() {
        let g = Grid::new(2, 8).unwrap();
        assert_eq!(g.points(), 8usize.pow(4));
        let idx = 1234;
        let c = g.coords_of(idx);
        let back = c.iter().fold(0usize, |acc, &ci| acc * 8 + ci);
        assert_eq!(back, idx);
    }

    #[test]
    fn from_fn_walks_row_major_last_axis_fastest() {
        let g = Grid::new(1, 8).unwrap();
        let f = Field::from_fn(g, |x| x[0] * 100.0 + x[1]);
        // idx = 1 advances the last axis.
        assert_eq!(f.data()[1], 0.125);
        assert_eq!(f.data()[8], 12.5);
    }

    #[test]
    fn kahan_mean_of_ones_is_exact() {
        let g = Grid::torus2();
        let f = Field::constant(g, 1.0);
        assert_eq!(f.mean(), 1.0);
    }
}
