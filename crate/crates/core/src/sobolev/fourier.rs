use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use super::{NormReport, NormSpec};
use crate::field::SampledField2D;
use crate::quad::pairwise_sum;
use crate::Result;

/// `|f̂|²` on the padded frequency lattice, in continuum normalization.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub n1: usize,
    pub n2: usize,
    pub dxi1: f64,
    pub dxi2: f64,
    /// Indexed `k1 * n2 + k2`.
    pub power: Vec<f64>,
}

fn freq(k: usize, n: usize, d: f64) -> f64 {
    if k <= n / 2 {
        k as f64 * d
    } else {
        (k as f64 - n as f64) * d
    }
}

impl Spectrum {
    pub fn of(f: &SampledField2D) -> Result<Self> {
        f.check_spectral()?;
        Ok(Self::unchecked(f))
    }

    pub(crate) fn unchecked(f: &SampledField2D) -> Self {
        let n1 = f.pad * f.nx1;
        let n2 = f.pad * f.nx2;
        let mut planner = FftPlanner::<f64>::new();
        let fft1 = planner.plan_fft_forward(n1);
        let fft2 = planner.plan_fft_forward(n2);

        // transform the occupied rows along x1
        let mut rows = vec![Complex64::new(0.0, 0.0); n1 * f.nx2];
        rows.par_chunks_mut(n1).enumerate().for_each(|(i2, row)| {
            for (c, &v) in row.iter_mut().zip(f.row(i2)) {
                *c = Complex64::new(v, 0.0);
            }
            fft1.process(row);
        });

        // columns along x2, stored transposed
        let scale = (f.h1 * f.h2).powi(2);
        let mut power = vec![0.0; n1 * n2];
        power.par_chunks_mut(n2).enumerate().for_each_init(
            || vec![Complex64::new(0.0, 0.0); n2],
            |col, (k1, out)| {
                col.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
                for i2 in 0..f.nx2 {
                    col[i2] = rows[i2 * n1 + k1];
                }
                fft2.process(col);
                for (o, c) in out.iter_mut().zip(col.iter()) {
                    *o = c.norm_sqr() * scale;
                }
            },
        );
        Spectrum { n1, n2, dxi1: 1.0 / (n1 as f64 * f.h1), dxi2: 1.0 / (n2 as f64 * f.h2), power }
    }

    pub fn xi(&self, k1: usize, k2: usize) -> (f64, f64) {
        (freq(k1, self.n1, self.dxi1), freq(k2, self.n2, self.dxi2))
    }

    /// `∫ w(ξ)² |f̂(ξ)|² dξ` as a lattice sum with fixed summation order.
    pub fn weighted_square<W>(&self, w2: W) -> f64
    where
        W: Fn(f64, f64) -> f64 + Sync,
    {
        let row_sums: Vec<f64> = self
            .power
            .par_chunks(self.n2)
            .enumerate()
            .map(|(k1, row)| {
                let xi1 = freq(k1, self.n1, self.dxi1);
                let terms: Vec<f64> = row
                    .iter()
                    .enumerate()
                    .map(|(k2, &p)| if p == 0.0 { 0.0 } else { w2(xi1, freq(k2, self.n2, self.dxi2)) * p })
                    .collect();
                pairwise_sum(&terms)
            })
            .collect();
        pairwise_sum(&row_sums) * self.dxi1 * self.dxi2
    }

    pub fn norm_squared(&self, spec: &NormSpec) -> f64 {
        self.weighted_square(|a, b| {
            let w = spec.weight(a, b);
            w * w
        })
    }

    pub fn sup(&self) -> f64 {
        self.power.iter().fold(0.0f64, |m, &p| m.max(p)).sqrt()
    }
}

/// Norm of `f` for the given weight, by the discrete Fourier transform.
pub fn fourier_norm(f: &SampledField2D, spec: &NormSpec) -> Result<f64> {
    spec.validate()?;
    Ok(Spectrum::of(f)?.norm_squared(spec).sqrt())
}

/// Norm together with the change observed on the grid with doubled spacing.
pub fn fourier_norm_report(f: &SampledField2D, spec: &NormSpec) -> Result<NormReport> {
    let value = fourier_norm(f, spec)?;
    let coarse = Spectrum::unchecked(&f.coarsened()).norm_squared(spec).sqrt();
    Ok(NormReport {
        norm_kind: spec.kind(),
        s: spec.s,
        beta: spec.beta,
        lambda: None,
        value,
        error_estimate: (value - coarse).abs(),
        grid: f.info(),
        method: "fourier",
    })
}
