#![allow(dead_code)]

use qlwave::field::SampledField2D;
use qlwave::smooth::plateau;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

pub fn truncate(v: f64) -> f64 {
    if v.abs() < 1e-16 {
        0.0
    } else {
        v
    }
}

/// `e^{−π|x|²}` on `[-4, 4]²` with `n + 1` nodes per side.
pub fn gaussian(n: usize, pad: usize) -> SampledField2D {
    let h = 8.0 / n as f64;
    SampledField2D::centered([n + 1, n + 1], [h, h], [0.0, 0.0], pad, |x, y| truncate((-PI * (x * x + y * y)).exp()))
}

pub type Smooth = Box<dyn Fn(f64, f64) -> f64 + Sync>;

/// Five smooth, effectively compact test fields.
pub fn smooth_fields() -> Vec<(&'static str, Smooth)> {
    vec![
        ("gaussian", Box::new(|x: f64, y: f64| (-PI * (x * x + y * y)).exp())),
        ("plateau", Box::new(|x: f64, y: f64| plateau(x, 0.5, 1.5).v * plateau(y, 0.5, 1.5).v)),
        ("modulated", Box::new(|x: f64, y: f64| (2.0 * PI * x).cos() * (-2.0 * PI * (x * x + y * y)).exp())),
        ("anisotropic", Box::new(|x: f64, y: f64| (-PI * (4.0 * (x - 0.3).powi(2) + y * y)).exp())),
        ("polynomial", Box::new(|x: f64, y: f64| (1.0 + x - x * x) * (-PI * (x * x + y * y)).exp())),
    ]
}

/// `n + 1` nodes across `[-4, 4]` in x₁, 65 in x₂.
pub fn sample(f: &Smooth, n: usize) -> SampledField2D {
    let h = 8.0 / n as f64;
    SampledField2D::centered([n + 1, 65], [h, 0.125], [0.0, 0.0], 4, |x, y| truncate(f(x, y)))
}

/// Sum of one to four compactly supported bumps with random placement.
pub fn random_field(seed: u64) -> SampledField2D {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.gen_range(1..=4);
    let bumps: Vec<[f64; 5]> = (0..k)
        .map(|_| {
            [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.3..0.8),
                rng.gen_range(0.3..0.8),
            ]
        })
        .collect();
    SampledField2D::centered([65, 65], [0.125, 0.125], [0.0, 0.0], 4, move |x, y| {
        bumps
            .iter()
            .map(|b| b[0] * plateau((x - b[1]) / b[3], 0.3, 1.0).v * plateau((y - b[2]) / b[4], 0.3, 1.0).v)
            .sum()
    })
}
