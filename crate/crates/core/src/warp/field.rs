use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::seed::rng;
use crate::Scalar;

pub const MAX_WAVES: usize = 4;
pub const AMPLITUDE_RANGE_M: (f64, f64) = (0.001, 0.004);
pub const WAVELENGTH_RANGE_M: (f64, f64) = (0.060, 0.250);

/// One sinusoidal component `a · sin(2π(x·u + y·v) + φ)`; `(u, v)` is the
/// spatial frequency in cycles per meter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Wave<T> {
    pub amplitude: T,
    pub u: T,
    pub v: T,
    pub phase: T,
}

/// Smooth height field lifting the sheet off the desk plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WarpField<T> {
    pub flat_mode: bool,
    pub waves: Vec<Wave<T>>,
}

impl<T: Scalar> WarpField<T> {
    pub fn flat() -> Self {
        WarpField { flat_mode: true, waves: Vec::new() }
    }

    fn arg(w: &Wave<T>, x: T, y: T) -> T {
        T::TAU() * (x * w.u + y * w.v) + w.phase
    }

    /// Height in meters at sheet point (x, y).
    pub fn z(&self, x: T, y: T) -> T {
        if self.flat_mode {
            return T::zero();
        }
        self.waves.iter().fold(T::zero(), |acc, w| acc + w.amplitude * Self::arg(w, x, y).sin())
    }

    /// (∂z/∂x, ∂z/∂y).
    pub fn gradient(&self, x: T, y: T) -> [T; 2] {
        if self.flat_mode {
            return [T::zero(); 2];
        }
        self.waves.iter().fold([T::zero(); 2], |acc, w| {
            let k = w.amplitude * T::TAU() * Self::arg(w, x, y).cos();
            [acc[0] + k * w.u, acc[1] + k * w.v]
        })
    }

    /// Upper bound on |z|: the sum of amplitudes.
    pub fn max_abs_z(&self) -> T {
        if self.flat_mode {
            return T::zero();
        }
        self.waves.iter().fold(T::zero(), |acc, w| acc + w.amplitude.abs())
    }

    /// Largest gradient magnitude over a `step`-spaced grid on the sheet.
    pub fn max_slope(&self, width: T, height: T, step: T) -> T {
        if self.flat_mode {
            return T::zero();
        }
        let nx = (width / step).ceil().to_usize().unwrap_or(0);
        let ny = (height / step).ceil().to_usize().unwrap_or(0);
        let mut best = T::zero();
        for j in 0..=ny {
            let y = (step * T::lit(j as f64)).min(height);
            for i in 0..=nx {
                let x = (step * T::lit(i as f64)).min(width);
                let [gx, gy] = self.gradient(x, y);
                best = best.max((gx * gx + gy * gy).sqrt());
            }
        }
        best
    }
}

/// Random field: flat when `cloth` is false, otherwise 1-4 waves with
/// amplitude 1-4 mm, wavelength 60-250 mm, random direction and phase.
pub fn sample_field(seed: u64, cloth: bool) -> WarpField<f64> {
    if !cloth {
        return WarpField::flat();
    }
    let mut r = rng(seed);
    let k = r.gen_range(1..=MAX_WAVES);
    let waves = (0..k)
        .map(|_| {
            let sign = if r.gen_bool(0.5) { 1.0 } else { -1.0 };
            let amplitude = sign * r.gen_range(AMPLITUDE_RANGE_M.0..=AMPLITUDE_RANGE_M.1);
            let wavelength = r.gen_range(WAVELENGTH_RANGE_M.0..=WAVELENGTH_RANGE_M.1);
            let theta = r.gen_range(0.0..std::f64::consts::TAU);
            Wave {
                amplitude,
                u: theta.cos() / wavelength,
                v: theta.sin() / wavelength,
                phase: r.gen_range(0.0..std::f64::consts::TAU),
            }
        })
        .collect();
    WarpField { flat_mode: false, waves }
}
