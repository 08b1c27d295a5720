//! Tensor rectangle-rule quadrature on power-of-two grids.
//!
//! All integrals are over the torus with normalized measure, so the
//! rectangle rule is the plain arithmetic mean over an equispaced tensor
//! grid. A grid is exact for any trigonometric polynomial whose bandwidth
//! stays below the grid size per axis; integrands of the form `|f|^p` with
//! non-even `p` are merely well resolved, which is why grids carry an
//! oversampling factor.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Default oversampling factor for general `L_p` quadrature.
pub const DEFAULT_RHO_OS: usize = 8;

/// Hard guard on dense grid allocations (number of complex samples).
pub const MAX_GRID_POINTS: usize = 1 << 26;

/// Equispaced tensor grid `x_m = 2 pi m / M_j` with power-of-two sizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadratureGrid {
    sizes: Vec<usize>,
    rho_os: usize,
}

impl QuadratureGrid {
    /// Builds a grid from explicit sizes. Every size must be a power of two.
    pub fn new(sizes: Vec<usize>, rho_os: usize) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidArgument("grid needs dimension >= 1".into()));
        }
        if rho_os == 0 {
            return Err(Error::InvalidArgument("oversampling factor must be >= 1".into()));
        }
        for (axis, &m) in sizes.iter().enumerate() {
            if m == 0 || !m.is_power_of_two() {
                return Err(Error::InvalidArgument(format!(
                    "grid size {m} on axis {axis} is not a power of two"
                )));
            }
        }
        let total: usize = sizes.iter().try_fold(1usize, |acc, &m| acc.checked_mul(m)).unwrap_or(usize::MAX);
        if total > MAX_GRID_POINTS {
            return Err(Error::GridTooLarge { points: total, limit: MAX_GRID_POINTS });
        }
        Ok(QuadratureGrid { sizes, rho_os })
    }

    /// Smallest valid grid for the given per-axis maximal frequencies:
    /// `M_j` is the least power of two `>= rho_os * (2 maxfreq_j + 1)`.
    pub fn for_bandwidth(maxfreq: &[i64], rho_os: usize) -> Result<Self> {
        let sizes = maxfreq
            .iter()
            .map(|&m| {
                let m = m.max(0) as usize;
                let need = rho_os
                    .checked_mul(2 * m + 1)
                    .ok_or_else(|| Error::InvalidArgument("bandwidth overflow".into()))?;
                Ok(need.next_power_of_two())
            })
            .collect::<Result<Vec<usize>>>()?;
        QuadratureGrid::new(sizes, rho_os)
    }

    /// Per-axis sizes.
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Oversampling factor recorded at construction.
    pub fn rho_os(&self) -> usize {
        self.rho_os
    }

    /// Dimension.
    pub fn dim(&self) -> usize {
        self.sizes.len()
    }

    /// Total number of sample points.
    pub fn total_points(&self) -> usize {
        self.sizes.iter().product()
    }

    /// Verifies the grid resolves the given per-axis maximal frequencies
    /// without aliasing (`M_j >= 2 maxfreq_j + 1`).
    pub fn check_covers(&self, maxfreq: &[i64]) -> Result<()> {
        if maxfreq.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: maxfreq.len() });
        }
        for (axis, (&m, &f)) in self.sizes.iter().zip(maxfreq).enumerate() {
            let need = 2 * f.max(0) as usize + 1;
            if m < need {
                return Err(Error::GridTooSmall { axis, size: m, need });
            }
        }
        Ok(())
    }
}

/// Evaluates `sum_k c_k e^{i(k, x)}` on the grid by a zero-padded inverse
/// FFT. Samples are returned in row-major order (last axis fastest).
///
/// The caller is responsible for aliasing guards: frequencies are folded
/// modulo the grid size, which is exact evaluation whenever the grid covers
/// the bandwidth.
pub fn synthesize_on_grid(
    coeffs: impl Iterator<Item = (Vec<i32>, Complex64)>,
    grid: &QuadratureGrid,
) -> Vec<Complex64> {
    let sizes = grid.sizes();
    let d = sizes.len();
    let total = grid.total_points();
    let mut strides = vec![1usize; d];
    for j in (0..d.saturating_sub(1)).rev() {
        strides[j] = strides[j + 1] * sizes[j + 1];
    }
    let mut data = vec![Complex64::new(0.0, 0.0); total];
    for (k, c) in coeffs {
        debug_assert_eq!(k.len(), d);
        let mut idx = 0usize;
        for j in 0..d {
            let m = sizes[j] as i64;
            let kj = ((k[j] as i64 % m) + m) % m;
            idx += kj as usize * strides[j];
        }
        data[idx] += c;
    }
    fft_inverse_nd(&mut data, sizes);
    data
}

/// In-place unnormalized inverse FFT along every axis of a row-major array.
pub fn fft_inverse_nd(data: &mut [Complex64], sizes: &[usize]) {
    let d = sizes.len();
    let mut planner = FftPlanner::new();
    let mut stride = 1usize; // stride of the current axis, walking from last to first
    for j in (0..d).rev() {
        let m = sizes[j];
        if m > 1 {
            let fft = planner.plan_fft_inverse(m);
            if stride == 1 {
                data.par_chunks_exact_mut(m).for_each(|line| fft.process(line));
            } else {
                let span = m * stride;
                data.par_chunks_exact_mut(span).for_each(|chunk| {
                    let mut scratch = vec![Complex64::new(0.0, 0.0); m];
                    for inner in 0..stride {
                        for (t, v) in scratch.iter_mut().enumerate() {
                            *v = chunk[inner + t * stride];
                        }
                        fft.process(&mut scratch);
                        for (t, v) in scratch.iter().enumerate() {
                            chunk[inner + t * stride] = *v;
                        }
                    }
                });
            }
        }
        stride *= m;
    }
}

/// One-dimensional synthesis of `(frequency, coefficient)` pairs on `m`
/// equispaced points; `m` must be a power of two covering the bandwidth.
pub fn synthesize_1d(coeffs: &[(i32, Complex64)], m: usize) -> Vec<Complex64> {
    debug_assert!(m.is_power_of_two());
    let mut data = vec![Complex64::new(0.0, 0.0); m];
    for &(k, c) in coeffs {
        let mm = m as i64;
        let idx = (((k as i64) % mm + mm) % mm) as usize;
        data[idx] += c;
    }
    if m > 1 {
        FftPlanner::new().plan_fft_inverse(m).process(&mut data);
    }
    data
}

/// `(mean |v|^p)^(1/p)` over the samples: the rectangle rule for the
/// normalized `L_p` norm. Accumulation is chunked and summed in fixed order
/// so results are reproducible across runs.
pub fn mean_power_norm(samples: &[Complex64], p: f64) -> f64 {
    debug_assert!(p >= 1.0);
    let n = samples.len() as f64;
    let sum = if p == 2.0 {
        chunked_sum(samples, |z| z.norm_sqr())
    } else if p == 1.0 {
        chunked_sum(samples, |z| z.norm())
    } else if p == 4.0 {
        chunked_sum(samples, |z| {
            let q = z.norm_sqr();
            q * q
        })
    } else {
        chunked_sum(samples, |z| z.norm().powf(p))
    };
    (sum / n).powf(1.0 / p)
}

/// Chunked parallel sum with deterministic association: chunk subtotals are
/// produced in order and added sequentially.
pub fn chunked_sum(samples: &[Complex64], f: impl Fn(&Complex64) -> f64 + Sync) -> f64 {
    const CHUNK: usize = 1 << 14;
    if samples.len() <= CHUNK {
        return samples.iter().map(&f).sum();
    }
    let partials: Vec<f64> = samples
        .par_chunks(CHUNK)
        .map(|c| c.iter().map(&f).sum::<f64>())
        .collect();
    partials.iter().sum()
}
