//! Fourier multipliers and extremal generators.
//!
//! The smoothing calculus is built from the de la Vallee Poussin weight
//!
//! ```text
//! v_l(k) = 1                 for |k| <= l,
//!        = 1 - (|k|-l)/l     for l < |k| < 2l,
//!        = 0                 for |k| >= 2l,
//! ```
//!
//! and the dyadic band weights `a_s(k) = v_{2^s}(k) - v_{2^(s-1)}(k)` for
//! `s >= 2`. At `s = 1` the lower term is replaced by the projector onto the
//! constant, so that the bands add up to exactly 1 at every nonzero integer:
//! `sum_{s>=1} a_s(k) = v_{2^S}(k) - [k = 0] = 1` once `2^S >= |k|`. All
//! weight values are dyadic rationals, so the partition identity holds in
//! floating point without rounding.
//!
//! The generators section produces the polynomials the rate experiments
//! probe: truncated Bernoulli kernels, the shell Dirichlet sum `d_n`, its
//! smoothness-normalized scaling `g_1`, an L2 tail-extremal packing, seeded
//! random polynomials, and a tensor Fejer-Bernoulli representative with unit
//! L1 pre-image. A tiny `name(key=value,...)` grammar exposes them to the
//! command line.

use std::fs::File;
use std::io::BufReader;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::index::{
    block_freqs_1d, cross_blocks, Block, CrossSpec, CrossVariant, SmoothnessProfile,
};
use crate::norms;
use crate::trigpoly::{PolyExpr, SparseTrigPoly, TensorBlockPoly, TensorTerm, MAX_SPARSE_EXPANSION};

// ---------------------------------------------------------------------------
// multiplier weights

/// De la Vallee Poussin weight `v_l(k)`.
pub fn vp_weight(l: u32, k: i32) -> f64 {
    debug_assert!(l >= 1);
    let a = k.unsigned_abs() as u64;
    let l = l as u64;
    if a <= l {
        1.0
    } else if a < 2 * l {
        1.0 - (a - l) as f64 / l as f64
    } else {
        0.0
    }
}

/// One-dimensional band weight: `v_{2^s} - v_{2^(s-1)}` for `s >= 2`, and
/// `v_2 - [k = 0]` for `s = 1`.
pub fn as_weight_1d(s: u32, k: i32) -> f64 {
    debug_assert!(s >= 1);
    let upper = vp_weight(1 << s, k);
    let lower = if s == 1 {
        if k == 0 {
            1.0
        } else {
            0.0
        }
    } else {
        vp_weight(1 << (s - 1), k)
    };
    upper - lower
}

/// Product band weight `a_s(k) = prod_j a_{s_j}(k_j)`.
pub fn as_weight(s: &Block, k: &[i32]) -> f64 {
    debug_assert_eq!(s.dim(), k.len());
    s.components()
        .iter()
        .zip(k)
        .map(|(&sj, &kj)| as_weight_1d(sj, kj))
        .product()
}

/// The de la Vallee Poussin kernel `V_l` as an explicit one-dimensional
/// polynomial (bandwidth `2l - 1`).
pub fn vp_poly_1d(l: u32) -> SparseTrigPoly {
    let mut f = SparseTrigPoly::new(1).expect("dim 1");
    let hi = 2 * l as i32 - 1;
    for k in -hi..=hi {
        let w = vp_weight(l, k);
        if w != 0.0 {
            f.set(vec![k], Complex64::new(w, 0.0)).expect("dim 1");
        }
    }
    f
}

/// A Fourier multiplier usable with [`apply_multiplier`].
#[derive(Debug, Clone, PartialEq)]
pub enum MultiplierSpec {
    /// Tensor de la Vallee Poussin weight with per-axis parameter `l_j`.
    ValleePoussin(Vec<u32>),
    /// Dyadic band weight `a_s`.
    ABlock(Block),
    /// Bernoulli smoothing `prod_j |k_j|^{-r_j} e^{-i sign(k_j) alpha_j pi/2}`;
    /// defined only off the coordinate hyperplanes.
    Bernoulli {
        /// Smoothness orders.
        r: Vec<f64>,
        /// Phase vector.
        alpha: Vec<f64>,
    },
}

impl MultiplierSpec {
    fn dim(&self) -> usize {
        match self {
            MultiplierSpec::ValleePoussin(l) => l.len(),
            MultiplierSpec::ABlock(s) => s.dim(),
            MultiplierSpec::Bernoulli { r, .. } => r.len(),
        }
    }

    /// The multiplier value at frequency `k`.
    pub fn weight(&self, k: &[i32]) -> Result<Complex64> {
        match self {
            MultiplierSpec::ValleePoussin(l) => {
                let w: f64 = l.iter().zip(k).map(|(&lj, &kj)| vp_weight(lj, kj)).product();
                Ok(Complex64::new(w, 0.0))
            }
            MultiplierSpec::ABlock(s) => Ok(Complex64::new(as_weight(s, k), 0.0)),
            MultiplierSpec::Bernoulli { r, alpha } => {
                if k.iter().any(|&kj| kj == 0) {
                    return Err(Error::ZeroFrequency(k.to_vec()));
                }
                Ok(bernoulli_weight(k, r, alpha))
            }
        }
    }
}

/// The Bernoulli multiplier at one fully nonzero frequency; inverse of the
/// Weyl multiplier of the same `(r, alpha)`.
pub fn bernoulli_weight(k: &[i32], r: &[f64], alpha: &[f64]) -> Complex64 {
    let mut w = Complex64::new(1.0, 0.0);
    for ((&kj, &rj), &aj) in k.iter().zip(r).zip(alpha) {
        debug_assert!(kj != 0);
        let modulus = (kj.unsigned_abs() as f64).powf(-rj);
        let phase = -(kj.signum() as f64) * aj * std::f64::consts::FRAC_PI_2;
        w *= Complex64::from_polar(modulus, phase);
    }
    w
}

/// Applies a multiplier coefficientwise. Zero weights evict coefficients.
pub fn apply_multiplier(f: &SparseTrigPoly, spec: &MultiplierSpec) -> Result<SparseTrigPoly> {
    if spec.dim() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: spec.dim() });
    }
    let mut out = SparseTrigPoly::new(f.dim())?;
    for (k, c) in f.iter() {
        let w = spec.weight(k)?;
        out.set(k.clone(), c * w)?;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// generators

/// Truncated Bernoulli kernel: coefficients
/// `prod_j |k_j|^{-r_j} e^{-i sign(k_j) alpha_j pi/2}` on the union of the
/// given blocks.
pub fn bernoulli_coeffs(r: &[f64], alpha: &[f64], region: &[Block]) -> Result<SparseTrigPoly> {
    if alpha.len() != r.len() {
        return Err(Error::DimensionMismatch { expected: r.len(), got: alpha.len() });
    }
    let total: u128 = region.iter().map(Block::cardinality).sum();
    if total > MAX_SPARSE_EXPANSION as u128 {
        return Err(Error::GridTooLarge {
            points: total.min(usize::MAX as u128) as usize,
            limit: MAX_SPARSE_EXPANSION,
        });
    }
    let mut f = SparseTrigPoly::new(r.len())?;
    for s in region {
        if s.dim() != r.len() {
            return Err(Error::DimensionMismatch { expected: r.len(), got: s.dim() });
        }
        for k in crate::index::rho_block(s) {
            let w = bernoulli_weight(&k, r, alpha);
            f.set(k, w)?;
        }
    }
    Ok(f)
}

/// The shell Dirichlet sum `d_n`: one all-ones rank-1 term per block with
/// `|s|_1 = n`. Empty when `n < d`.
pub fn dn_poly(n: u32, d: usize) -> Result<TensorBlockPoly> {
    let mut f = TensorBlockPoly::new(d)?;
    let mut s = vec![1u32; d];
    fn shells(j: usize, left: u32, s: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        let d = s.len();
        if j == d - 1 {
            if left >= 1 {
                s[j] = left;
                out.push(s.clone());
            }
            return;
        }
        let reserve = (d - 1 - j) as u32; // remaining axes need >= 1 each
        let mut sj = 1u32;
        while sj + reserve <= left {
            s[j] = sj;
            shells(j + 1, left - sj, s, out);
            sj += 1;
        }
    }
    let mut blocks = Vec::new();
    if n >= d as u32 {
        shells(0, n, &mut s, &mut blocks);
    }
    for b in blocks {
        f.push(TensorTerm::dirichlet(Block::new(b)?))?;
    }
    Ok(f)
}

/// The normalized shell function
/// `g_1 = C_5 2^{-n(r_1 + 1 - 1/p)} n^{-(d-1)/p} d_n` with `C_5` chosen so
/// that the Weyl derivative of order `(r_1,...,r_1)` (phase 0) has unit
/// `L_p` norm. Returns the polynomial and `C_5`.
pub fn g1_poly(n: u32, d: usize, p: f64, r1: f64) -> Result<(TensorBlockPoly, f64)> {
    if !(1.0..f64::INFINITY).contains(&p) {
        return Err(Error::InvalidArgument(format!("g1 needs 1 <= p < inf, got p = {p}")));
    }
    if r1 <= 0.0 {
        return Err(Error::InvalidArgument(format!("g1 needs r_1 > 0, got {r1}")));
    }
    let dn = dn_poly(n, d)?;
    if dn.terms().is_empty() {
        return Err(Error::InvalidArgument(format!("shell |s|_1 = {n} is empty in dimension {d}")));
    }
    let nf = n as f64;
    let scale = (2f64).powf(-nf * (r1 + 1.0 - 1.0 / p)) * nf.powf(-((d - 1) as f64) / p);
    let r = vec![r1; d];
    let zero = vec![0.0; d];
    let deriv = dn.weyl_derivative(&r, &zero)?;
    let deriv_norm = norms::lp_norm_auto(&PolyExpr::Tensor(deriv), p, crate::quad::DEFAULT_RHO_OS)?;
    if !(deriv_norm.is_finite() && deriv_norm > 0.0) {
        return Err(Error::InvalidArgument("degenerate shell derivative norm".into()));
    }
    let c5 = 1.0 / (scale * deriv_norm);
    Ok((dn.scale(Complex64::new(c5 * scale, 0.0)), c5))
}

/// Number of points placed per tail block by [`tail_extremal_l2`].
pub const TAIL_POINTS_PER_BLOCK: usize = 64;

/// Blocks of the tail window `n <= (s, gamma') < n + depth`.
pub fn tail_window_blocks(n: u32, profile: &SmoothnessProfile, depth: u32) -> Result<Vec<Block>> {
    if depth == 0 {
        return Err(Error::InvalidArgument("tail window depth must be >= 1".into()));
    }
    let big = CrossSpec::new(n + depth, profile.gamma_prime().to_vec())?;
    let small = CrossSpec::new(n, profile.gamma_prime().to_vec())?;
    Ok(cross_blocks(&big)
        .into_iter()
        .filter(|s| !small.contains(s))
        .collect())
}

/// Closed form of the truncated tail value
/// `(sum over the window of 2^{-2(s,r)})^{1/2}`, realized exactly by
/// [`tail_extremal_l2`] in the blockwise `L_2` metric.
pub fn tail_extremal_value(n: u32, profile: &SmoothnessProfile, depth: u32) -> Result<f64> {
    let sum: f64 = tail_window_blocks(n, profile, depth)?
        .iter()
        .map(|s| (2f64).powf(-2.0 * profile.block_weight(s)))
        .sum();
    Ok(sum.sqrt())
}

/// An L2 tail-extremal packing for the window `n <= (s, gamma') < n + depth`.
///
/// The pre-image `phi` carries constant-modulus coefficients on a bounded
/// point set inside each window block, with block `L_2` weights proportional
/// to `2^{-(s,r)}` and `|phi|_2 = 1`; the function itself is `phi` damped by
/// the blockwise-constant factor `2^{-(s,r)}`. Since `prod_j |k_j|^{r_j} <
/// 2^{(s,r)}` strictly inside block `s`, the Weyl derivative of the result
/// has `L_2` norm at most 1, so the function sits inside the unit
/// `(r, 0)`-smoothness ball while its blockwise tail norm attains
/// [`tail_extremal_value`] exactly.
pub fn tail_extremal_l2(
    n: u32,
    profile: &SmoothnessProfile,
    depth: u32,
    points_per_block: usize,
) -> Result<SparseTrigPoly> {
    if points_per_block == 0 {
        return Err(Error::InvalidArgument("points_per_block must be >= 1".into()));
    }
    let blocks = tail_window_blocks(n, profile, depth)?;
    if blocks.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "empty tail window at n = {n}, depth = {depth}"
        )));
    }
    let d = profile.dim();
    let mass: f64 = blocks
        .iter()
        .map(|s| (2f64).powf(-2.0 * profile.block_weight(s)))
        .sum();
    let c = mass.sqrt().recip();
    let mut f = SparseTrigPoly::new(d)?;
    for s in &blocks {
        let sr = profile.block_weight(s);
        let w_s = c * (2f64).powf(-sr); // block L2 weight of phi
        // Deterministic in-block point set: walk the first axis from the
        // block corner, other axes pinned at their corners.
        let comps = s.components();
        let m = points_per_block.min(1usize << (comps[0] - 1).min(30));
        let amplitude = w_s / (m as f64).sqrt() * (2f64).powf(-sr);
        let corner: Vec<i32> = comps.iter().map(|&sj| 1i32 << (sj - 1)).collect();
        for i in 0..m {
            let mut k = corner.clone();
            k[0] += i as i32;
            f.set(k, Complex64::new(amplitude, 0.0))?;
        }
    }
    Ok(f)
}

// ---------------------------------------------------------------------------
// seeded randomness

/// Multiplier of the fixed 64-bit linear congruential generator.
pub const LCG_MULT: u64 = 6364136223846793005;
/// Increment of the fixed 64-bit linear congruential generator.
pub const LCG_INC: u64 = 1442695040888963407;

/// The crate's reproducible random source. The exact generator is part of
/// the output contract: identical seeds give identical polynomials on every
/// platform.
#[derive(Debug, Clone)]
pub struct Lcg(u64);

impl Lcg {
    /// Starts a stream from a seed.
    pub fn new(seed: u64) -> Self {
        Lcg(seed)
    }

    /// Next raw state.
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_mul(LCG_MULT).wrapping_add(LCG_INC);
        self.0
    }

    /// Uniform in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// A Rademacher sign.
    pub fn next_sign(&mut self) -> f64 {
        if self.next_u64() >> 63 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Coefficient law for [`random_poly`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmplitudeLaw {
    /// `e^{2 pi i u} sigma`: a random phase times a Rademacher sign.
    UnitModulus,
    /// `sigma`: a real Rademacher sign.
    Rademacher,
}

impl AmplitudeLaw {
    /// Parses `unit` or `rademacher`.
    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "unit" => Ok(AmplitudeLaw::UnitModulus),
            "rademacher" => Ok(AmplitudeLaw::Rademacher),
            other => Err(Error::Parse(format!("unknown amplitude law `{other}`"))),
        }
    }
}

/// Seeded random polynomial over a block region. Blocks are visited in
/// sorted order and points in the canonical block order, so the output is a
/// pure function of `(seed, region, law)`.
pub fn random_poly(seed: u64, region: &[Block], law: AmplitudeLaw) -> Result<SparseTrigPoly> {
    let d = match region.first() {
        Some(b) => b.dim(),
        None => return Err(Error::InvalidArgument("random_poly needs a nonempty region".into())),
    };
    let total: u128 = region.iter().map(Block::cardinality).sum();
    if total > MAX_SPARSE_EXPANSION as u128 {
        return Err(Error::GridTooLarge {
            points: total.min(usize::MAX as u128) as usize,
            limit: MAX_SPARSE_EXPANSION,
        });
    }
    let mut sorted: Vec<&Block> = region.iter().collect();
    sorted.sort();
    sorted.dedup();
    let mut rng = Lcg::new(seed);
    let mut f = SparseTrigPoly::new(d)?;
    for s in sorted {
        if s.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: s.dim() });
        }
        for k in crate::index::rho_block(s) {
            let c = match law {
                AmplitudeLaw::UnitModulus => {
                    let phase = std::f64::consts::TAU * rng.next_f64();
                    let sign = rng.next_sign();
                    Complex64::from_polar(sign, phase)
                }
                AmplitudeLaw::Rademacher => Complex64::new(rng.next_sign(), 0.0),
            };
            f.set(k, c)?;
        }
    }
    Ok(f)
}

/// Tensor product of one-dimensional `Fejer * Bernoulli` factors: axis `j`
/// carries coefficients `(1 - |k|/2^bandwidth_log2) |k|^{-r_j}` for
/// `0 < |k| < 2^bandwidth_log2`.
///
/// The pre-image under the Bernoulli smoothing is the tensor Fejer kernel,
/// which is nonnegative with exact unit `L_1` norm, so the result is a
/// canonical representative of the unit `(r, 0)`-smoothness `L_1` ball. One
/// rank-1 term per block.
pub fn bernoulli_fejer_tensor(bandwidth_log2: u32, r: &[f64]) -> Result<TensorBlockPoly> {
    if bandwidth_log2 == 0 {
        return Err(Error::InvalidArgument("bandwidth_log2 must be >= 1".into()));
    }
    let d = r.len();
    let m = 1i64 << bandwidth_log2;
    let mut f = TensorBlockPoly::new(d)?;
    // Blocks cover 1 <= |k| < 2^bandwidth_log2 exactly: s_j in [1, bandwidth_log2].
    let mut s = vec![1u32; d];
    loop {
        let block = Block::new(s.clone())?;
        let factors: Vec<Vec<Complex64>> = s
            .iter()
            .zip(r)
            .map(|(&sj, &rj)| {
                block_freqs_1d(sj)
                    .map(|k| {
                        let a = k.unsigned_abs() as i64;
                        let fejer = 1.0 - a as f64 / m as f64;
                        Complex64::new(fejer * (a as f64).powf(-rj), 0.0)
                    })
                    .collect()
            })
            .collect();
        f.push(TensorTerm { block, weight: Complex64::new(1.0, 0.0), factors })?;
        // odometer over [1, bandwidth_log2]^d
        let mut j = d;
        loop {
            if j == 0 {
                return Ok(f);
            }
            j -= 1;
            if s[j] < bandwidth_log2 {
                s[j] += 1;
                for sk in &mut s[j + 1..] {
                    *sk = 1;
                }
                break;
            }
        }
    }
}

/// Discrete autocorrelation `(T_m * T_m)(k)` of the triangle weight
/// `T_m(i) = max(0, m - |i|)`: a piecewise cubic in `|k|`, positive for
/// `|k| <= 2m - 2` and zero beyond. Exact in integers (both numerators are
/// divisible by 6 for every integer input).
fn triangle_autocorr(m: i64, k: i64) -> i128 {
    let k = (k as i128).abs();
    let m = m as i128;
    if k <= m {
        (4 * m * m * m + 2 * m - 6 * k * k * m + 3 * k * k * k - 3 * k) / 6
    } else if k <= 2 * m {
        let u = 2 * m - k;
        u * (u * u - 1) / 6
    } else {
        0
    }
}

/// One axis of a squared-Fejer representative: coefficients
/// `j_m(k) |k|^{-r}` over `0 < |k| <= 2m - 2` with `m = 2^half_log2`, where
/// `j_m(k) = (T_m * T_m)(k) / (T_m * T_m)(0)` is the normalized triangle
/// autocorrelation.
///
/// `j_m` is the spectrum of the square of the Fejer-normalized triangle
/// polynomial, hence of a nonnegative kernel with unit mean, so a tensor
/// product of such axes is the Bernoulli image of a unit-mass nonnegative
/// kernel: a canonical representative of the unit smoothness ball, like
/// [`bernoulli_fejer_tensor`] but with `O((k/m)^2)` attenuation at fixed
/// frequency instead of `O(k/m)`. The `k = 0` weight is omitted, matching
/// the Bernoulli image which has none.
pub fn jackson_bernoulli_axis(half_log2: u32, r: f64) -> Result<Vec<(i32, Complex64)>> {
    if half_log2 == 0 || half_log2 > 24 {
        return Err(Error::InvalidArgument("half_log2 must be in [1, 24]".into()));
    }
    let m = 1i64 << half_log2;
    let s0 = triangle_autocorr(m, 0) as f64;
    let hi = (2 * m - 2) as i32;
    let mut out = Vec::with_capacity(2 * hi as usize);
    for k in -hi..=hi {
        if k == 0 {
            continue;
        }
        let w = triangle_autocorr(m, k as i64) as f64 / s0;
        out.push((k, Complex64::new(w * (k.unsigned_abs() as f64).powf(-r), 0.0)));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// generator mini-language

/// A parsed generator expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    /// `bernoulli(r=..,alpha=..,N=..)`: truncated Bernoulli kernel on the
    /// gamma-cross of level `N`.
    Bernoulli {
        /// Smoothness orders.
        r: Vec<f64>,
        /// Phase vector.
        alpha: Vec<f64>,
        /// Truncation cross level.
        level: Option<u32>,
    },
    /// `dn(n=..,d=..)`: shell Dirichlet sum.
    Dn {
        /// Shell level (bound per sweep row when absent).
        n: Option<u32>,
        /// Dimension.
        d: usize,
    },
    /// `g1(n=..,d=..,p=..,r1=..)`: normalized shell function.
    G1 {
        /// Shell level (bound per sweep row when absent).
        n: Option<u32>,
        /// Dimension.
        d: usize,
        /// Normalization exponent.
        p: f64,
        /// Smoothness order.
        r1: f64,
    },
    /// `tail2(n=..,r=..,depth=..,cap=..)`: L2 tail-extremal packing.
    Tail2 {
        /// Window start (bound per sweep row when absent).
        n: Option<u32>,
        /// Smoothness vector.
        r: Vec<f64>,
        /// Window depth.
        depth: u32,
        /// Points per block.
        cap: usize,
    },
    /// `fejer(r=..,m=..)`: Bernoulli pre-image of the tensor Fejer kernel,
    /// bandwidth `2^m` per axis.
    Fejer {
        /// Smoothness orders.
        r: Vec<f64>,
        /// Log2 of the per-axis bandwidth.
        m: u32,
    },
    /// `rand(seed=..,n=..,d=..,law=..)`: seeded random polynomial on the
    /// unit-weight cross of level `n`.
    Rand {
        /// Stream seed.
        seed: u64,
        /// Cross level (bound per sweep row when absent).
        n: Option<u32>,
        /// Dimension.
        d: usize,
        /// Coefficient law.
        law: AmplitudeLaw,
    },
    /// `file(path)`: coefficients read from the text format.
    File {
        /// Path to the coefficient file.
        path: String,
    },
}

impl Generator {
    /// Parses the `name(key=value,...)` grammar. Vector values use `:` as
    /// the separator, e.g. `bernoulli(r=1:2,alpha=0:0,N=8)`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let open = text
            .find('(')
            .ok_or_else(|| Error::Parse(format!("generator `{text}` lacks an argument list")))?;
        if !text.ends_with(')') {
            return Err(Error::Parse(format!("generator `{text}` lacks a closing parenthesis")));
        }
        let name = &text[..open];
        let body = &text[open + 1..text.len() - 1];
        if name == "file" {
            if body.is_empty() {
                return Err(Error::Parse("file() needs a path".into()));
            }
            return Ok(Generator::File { path: body.to_string() });
        }
        let mut args = Args::parse(body)?;
        let gen = match name {
            "bernoulli" => {
                let r = args.take_vec("r")?;
                let alpha = match args.take_opt_vec("alpha")? {
                    Some(a) => a,
                    None => vec![0.0; r.len()],
                };
                if alpha.len() != r.len() {
                    return Err(Error::Parse("bernoulli: alpha and r lengths differ".into()));
                }
                Generator::Bernoulli { r, alpha, level: args.take_opt_u32("N")? }
            }
            "dn" => Generator::Dn { n: args.take_opt_u32("n")?, d: args.take_usize("d")? },
            "g1" => Generator::G1 {
                n: args.take_opt_u32("n")?,
                d: args.take_usize("d")?,
                p: args.take_f64("p")?,
                r1: args.take_f64("r1")?,
            },
            "tail2" => Generator::Tail2 {
                n: args.take_opt_u32("n")?,
                r: args.take_vec("r")?,
                depth: args.take_opt_u32("depth")?.unwrap_or(6),
                cap: args.take_opt_u32("cap")?.unwrap_or(TAIL_POINTS_PER_BLOCK as u32) as usize,
            },
            "fejer" => Generator::Fejer {
                r: args.take_vec("r")?,
                m: args
                    .take_opt_u32("m")?
                    .ok_or_else(|| Error::Parse("missing argument `m`".into()))?,
            },
            "rand" => Generator::Rand {
                seed: args.take_u64("seed")?,
                n: args.take_opt_u32("n")?,
                d: args.take_usize("d")?,
                law: match args.take_opt_str("law") {
                    Some(s) => AmplitudeLaw::parse(&s)?,
                    None => AmplitudeLaw::UnitModulus,
                },
            },
            other => return Err(Error::Parse(format!("unknown generator `{other}`"))),
        };
        args.finish()?;
        Ok(gen)
    }

    /// The smoothness profile implied by the generator, when it has one.
    pub fn profile(&self) -> Result<Option<SmoothnessProfile>> {
        Ok(match self {
            Generator::Bernoulli { r, .. } => Some(SmoothnessProfile::new(r)?),
            Generator::G1 { d, r1, .. } => Some(SmoothnessProfile::new(&vec![*r1; *d])?),
            Generator::Tail2 { r, .. } => Some(SmoothnessProfile::new(r)?),
            Generator::Fejer { r, .. } => Some(SmoothnessProfile::new(r)?),
            Generator::Dn { .. } | Generator::Rand { .. } | Generator::File { .. } => None,
        })
    }

    /// Builds the polynomial; `level` fills the unbound `n` of level-aware
    /// generators (a sweep passes its row level here).
    pub fn build(&self, level: Option<u32>) -> Result<PolyExpr> {
        let need_n = |n: &Option<u32>| -> Result<u32> {
            n.or(level)
                .ok_or_else(|| Error::InvalidArgument("generator needs an `n` (give n=... or use it in a sweep)".into()))
        };
        Ok(match self {
            Generator::Bernoulli { r, alpha, level: lvl } => {
                let n = need_n(lvl)?;
                let profile = SmoothnessProfile::new(r)?;
                let cross = CrossSpec::new(n, profile.gamma().to_vec())?;
                PolyExpr::Sparse(bernoulli_coeffs(r, alpha, &cross_blocks(&cross))?)
            }
            Generator::Dn { n, d } => PolyExpr::Tensor(dn_poly(need_n(n)?, *d)?),
            Generator::G1 { n, d, p, r1 } => PolyExpr::Tensor(g1_poly(need_n(n)?, *d, *p, *r1)?.0),
            Generator::Tail2 { n, r, depth, cap } => {
                let profile = SmoothnessProfile::new(r)?;
                PolyExpr::Sparse(tail_extremal_l2(need_n(n)?, &profile, *depth, *cap)?)
            }
            Generator::Fejer { r, m } => PolyExpr::Tensor(bernoulli_fejer_tensor(*m, r)?),
            Generator::Rand { seed, n, d, law } => {
                let cross = CrossSpec::new(need_n(n)?, vec![1.0; *d])?;
                PolyExpr::Sparse(random_poly(*seed, &cross_blocks(&cross), *law)?)
            }
            Generator::File { path } => {
                let f = File::open(path)?;
                PolyExpr::Sparse(SparseTrigPoly::read_coeffs(BufReader::new(f))?)
            }
        })
    }

    /// Default cross variant semantics: generators with anisotropic profiles
    /// sweep gamma-prime crosses unless overridden.
    pub fn default_variant(&self) -> CrossVariant {
        match self {
            Generator::Tail2 { .. } | Generator::Bernoulli { .. } | Generator::Fejer { .. } => {
                CrossVariant::GammaPrime
            }
            _ => CrossVariant::Ones,
        }
    }
}

struct Args(Vec<(String, String)>);

impl Args {
    fn parse(body: &str) -> Result<Self> {
        let mut out = Vec::new();
        for part in body.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("argument `{part}` is not key=value")))?;
            out.push((k.trim().to_string(), v.trim().to_string()));
        }
        Ok(Args(out))
    }

    fn take(&mut self, key: &str) -> Option<String> {
        let pos = self.0.iter().position(|(k, _)| k == key)?;
        Some(self.0.remove(pos).1)
    }

    fn take_opt_str(&mut self, key: &str) -> Option<String> {
        self.take(key)
    }

    fn take_f64(&mut self, key: &str) -> Result<f64> {
        self.take(key)
            .ok_or_else(|| Error::Parse(format!("missing argument `{key}`")))?
            .parse()
            .map_err(|_| Error::Parse(format!("argument `{key}` is not a number")))
    }

    fn take_u64(&mut self, key: &str) -> Result<u64> {
        self.take(key)
            .ok_or_else(|| Error::Parse(format!("missing argument `{key}`")))?
            .parse()
            .map_err(|_| Error::Parse(format!("argument `{key}` is not an integer")))
    }

    fn take_usize(&mut self, key: &str) -> Result<usize> {
        Ok(self.take_u64(key)? as usize)
    }

    fn take_opt_u32(&mut self, key: &str) -> Result<Option<u32>> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Parse(format!("argument `{key}` is not an integer"))),
        }
    }

    fn take_vec(&mut self, key: &str) -> Result<Vec<f64>> {
        self.take_opt_vec(key)?
            .ok_or_else(|| Error::Parse(format!("missing argument `{key}`")))
    }

    fn take_opt_vec(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => v
                .split(':')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map(Some)
                .map_err(|_| Error::Parse(format!("argument `{key}` is not a `:`-separated vector"))),
        }
    }

    fn finish(self) -> Result<()> {
        if let Some((k, _)) = self.0.first() {
            return Err(Error::Parse(format!("unknown argument `{k}`")));
        }
        Ok(())
    }
}
