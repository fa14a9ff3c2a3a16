//! Uniform-grid samples of a function of `(x₁, x₂)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::quad::pairwise_sum;
use crate::{Error, Result};

/// Grid metadata carried into reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridInfo {
    pub nx1: usize,
    pub nx2: usize,
    pub h1: f64,
    pub h2: f64,
    pub pad: usize,
}

/// Values on `x₁ = o₁ + i₁h₁`, `x₂ = o₂ + i₂h₂`, stored with `x₁` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField2D {
    pub nx1: usize,
    pub nx2: usize,
    pub h1: f64,
    pub h2: f64,
    pub origin: [f64; 2],
    /// Zero-padding factor applied before spectral transforms.
    pub pad: usize,
    pub values: Vec<f64>,
}

impl SampledField2D {
    pub fn from_fn<F>(nx1: usize, nx2: usize, h: [f64; 2], origin: [f64; 2], pad: usize, f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        let mut values = vec![0.0; nx1 * nx2];
        values.par_chunks_mut(nx1).enumerate().for_each(|(i2, row)| {
            let x2 = origin[1] + i2 as f64 * h[1];
            for (i1, v) in row.iter_mut().enumerate() {
                *v = f(origin[0] + i1 as f64 * h[0], x2);
            }
        });
        SampledField2D { nx1, nx2, h1: h[0], h2: h[1], origin, pad, values }
    }

    /// Grid of `n1 × n2` points centred on `center`.
    pub fn centered<F>(n: [usize; 2], h: [f64; 2], center: [f64; 2], pad: usize, f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        let origin = [
            center[0] - 0.5 * (n[0] - 1) as f64 * h[0],
            center[1] - 0.5 * (n[1] - 1) as f64 * h[1],
        ];
        Self::from_fn(n[0], n[1], h, origin, pad, f)
    }

    pub fn zeros_like(&self) -> Self {
        SampledField2D { values: vec![0.0; self.values.len()], ..self.clone() }
    }

    pub fn info(&self) -> GridInfo {
        GridInfo { nx1: self.nx1, nx2: self.nx2, h1: self.h1, h2: self.h2, pad: self.pad }
    }

    pub fn x1(&self, i1: usize) -> f64 {
        self.origin[0] + i1 as f64 * self.h1
    }

    pub fn x2(&self, i2: usize) -> f64 {
        self.origin[1] + i2 as f64 * self.h2
    }

    pub fn at(&self, i1: usize, i2: usize) -> f64 {
        self.values[i2 * self.nx1 + i1]
    }

    pub fn row(&self, i2: usize) -> &[f64] {
        &self.values[i2 * self.nx1..(i2 + 1) * self.nx1]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.nx1)
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.nx1 == other.nx1
            && self.nx2 == other.nx2
            && self.h1 == other.h1
            && self.h2 == other.h2
            && self.origin == other.origin
    }

    /// `a·self + b·other` on the same grid.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if !self.same_grid(other) {
            return Err(Error::pre("fields live on different grids"));
        }
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        Ok(SampledField2D { values, ..self.clone() })
    }

    pub fn scaled(&self, a: f64) -> Self {
        SampledField2D { values: self.values.iter().map(|x| a * x).collect(), ..self.clone() }
    }

    /// Every other node in both directions, spacing doubled.
    pub fn coarsened(&self) -> Self {
        let nx1 = self.nx1.div_ceil(2);
        let nx2 = self.nx2.div_ceil(2);
        let mut values = Vec::with_capacity(nx1 * nx2);
        for i2 in (0..self.nx2).step_by(2) {
            for i1 in (0..self.nx1).step_by(2) {
                values.push(self.at(i1, i2));
            }
        }
        SampledField2D { nx1, nx2, h1: 2.0 * self.h1, h2: 2.0 * self.h2, origin: self.origin, pad: self.pad, values }
    }

    /// Every other node in `x₁` only.
    pub fn coarsened_x1(&self) -> Self {
        let nx1 = self.nx1.div_ceil(2);
        let mut values = Vec::with_capacity(nx1 * self.nx2);
        for row in self.rows() {
            values.extend(row.iter().step_by(2));
        }
        SampledField2D { nx1, h1: 2.0 * self.h1, values, ..self.clone() }
    }

    /// Spectral transforms need a zero boundary ring and padding of at least 4.
    pub fn check_spectral(&self) -> Result<()> {
        if self.pad < 4 {
            return Err(Error::pre(format!("padding factor {} is below 4", self.pad)));
        }
        self.check_compact()
    }

    pub fn check_compact(&self) -> Result<()> {
        if self.nx1 < 3 || self.nx2 < 3 || self.values.len() != self.nx1 * self.nx2 {
            return Err(Error::pre("grid must be at least 3 x 3 and match its value count"));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::pre("field contains non-finite values"));
        }
        let ring_nonzero = (0..self.nx1).any(|i| self.at(i, 0) != 0.0 || self.at(i, self.nx2 - 1) != 0.0)
            || (0..self.nx2).any(|j| self.at(0, j) != 0.0 || self.at(self.nx1 - 1, j) != 0.0);
        if ring_nonzero {
            return Err(Error::pre("field is not compactly supported inside the grid (boundary ring nonzero)"));
        }
        Ok(())
    }

    pub fn l1_norm(&self) -> f64 {
        let a: Vec<f64> = self.values.iter().map(|v| v.abs()).collect();
        pairwise_sum(&a) * self.h1 * self.h2
    }

    pub fn l2_norm(&self) -> f64 {
        let a: Vec<f64> = self.values.iter().map(|v| v * v).collect();
        (pairwise_sum(&a) * self.h1 * self.h2).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_and_compactness() {
        let f = SampledField2D::centered([9, 7], [0.5, 0.5], [0.0, 0.0], 4, |x, y| {
            if x.abs() < 1.0 && y.abs() < 1.0 { 1.0 } else { 0.0 }
        });
        assert_eq!(f.x1(4), 0.0);
        assert_eq!(f.x2(3), 0.0);
        assert_eq!(f.at(4, 3), 1.0);
        assert!(f.check_spectral().is_ok());
        let g = SampledField2D { pad: 2, ..f.clone() };
        assert!(g.check_spectral().is_err());
        let h = SampledField2D::centered([5, 5], [1.0, 1.0], [0.0, 0.0], 4, |_, _| 1.0);
        assert!(h.check_compact().is_err());
        let c = f.coarsened();
        assert_eq!((c.nx1, c.nx2), (5, 4));
        assert_eq!(c.at(2, 1), f.at(4, 2));
    }
}
