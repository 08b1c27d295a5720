//! Norms on the torus with normalized measure.
//!
//! Every `L_p` norm here is `(mean |f|^p)^(1/p)` over an equispaced tensor
//! grid. For even `p` the rectangle rule is exact once the grid covers the
//! bandwidth of `|f|^p`; for other `p` the value is an oversampled estimate
//! and the oversampling factor is part of the call.
//!
//! Block norms come in two modes. `Delta` measures the raw frequency
//! restriction `delta_s f` to the dyadic block `s`; it represents the
//! Besov-type quantities for exponents strictly between 1 and infinity.
//! `AKernel` measures the smoothed band `A_s f` built from de la Vallee
//! Poussin weights; the bands overlap adjacent blocks, form an exact
//! partition of unity off the coordinate hyperplanes, and stay meaningful at
//! the endpoint exponents.
//!
//! Structured inputs keep structured fast paths: at `p = 2` everything is a
//! Parseval sum, rank-1 tensor terms factor into one-dimensional norms, sums
//! of a few rank-1 terms are integrated by the fourth-moment identity at
//! `p = 4` and by streamed row evaluation in the kernel mode.

use std::collections::BTreeSet;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::index::Block;
use crate::kernels::{as_weight, as_weight_1d};
use crate::quad::{synthesize_1d, QuadratureGrid, MAX_GRID_POINTS};
use crate::trigpoly::{PolyExpr, SparseTrigPoly, TensorBlockPoly, TensorTerm};

/// Guard on the number of rank-1 terms the fourth-moment path will couple.
const MAX_MOMENT4_TERMS: usize = 24;

/// How blockwise components are extracted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockMode {
    /// Raw frequency restriction `delta_s f`. Needs exponents strictly
    /// inside `(1, inf)`.
    Delta,
    /// Smoothed band `A_s f` from the de la Vallee Poussin partition; valid
    /// down to exponent 1.
    AKernel,
}

impl BlockMode {
    /// Short display form used in norm names.
    pub fn suffix(self) -> &'static str {
        match self {
            BlockMode::Delta => "",
            BlockMode::AKernel => "a",
        }
    }
}

/// A norm selector: what to measure and how blocks are formed.
#[derive(Debug, Clone, PartialEq)]
pub struct NormSpec {
    /// The measured quantity.
    pub kind: NormKind,
    /// Block extraction mode for the block-sum kinds.
    pub mode: BlockMode,
}

/// The measured quantity of a [`NormSpec`].
#[derive(Debug, Clone, PartialEq)]
pub enum NormKind {
    /// Plain `L_p`.
    Lp {
        /// Integrability exponent, `1 <= p < inf`.
        p: f64,
    },
    /// Block-sum norm `sum_s |block_s f|_q`.
    Bq1 {
        /// Integrability exponent of each block.
        q: f64,
    },
    /// Weighted block sum `(sum_s (2^{(s,r)} |block_s f|_p)^theta)^(1/theta)`.
    Besov {
        /// Integrability exponent of each block.
        p: f64,
        /// Summation exponent, `1 <= theta <= inf`.
        theta: f64,
        /// Smoothness weights.
        r: Vec<f64>,
    },
    /// Weighted block sup `max_s 2^{(s,r)} |block_s f|_p`.
    HSup {
        /// Integrability exponent of each block.
        p: f64,
        /// Smoothness weights.
        r: Vec<f64>,
    },
}

impl NormSpec {
    /// Plain `L_p`.
    pub fn lp(p: f64) -> Self {
        NormSpec { kind: NormKind::Lp { p }, mode: BlockMode::Delta }
    }

    /// Block-sum norm over raw restrictions.
    pub fn bq1(q: f64) -> Self {
        NormSpec { kind: NormKind::Bq1 { q }, mode: BlockMode::Delta }
    }

    /// Block-sum norm over smoothed bands.
    pub fn bq1_kernel(q: f64) -> Self {
        NormSpec { kind: NormKind::Bq1 { q }, mode: BlockMode::AKernel }
    }

    /// Parses the command-line form: `lq:P`, `bq1:Q`, or `bq1a:Q`.
    pub fn parse(text: &str) -> Result<Self> {
        let (name, arg) = text
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("norm `{text}` is not name:exponent")))?;
        let exponent: f64 = arg
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("norm exponent `{arg}` is not a number")))?;
        let spec = match name.trim() {
            "lq" | "lp" => NormSpec::lp(exponent),
            "bq1" => NormSpec::bq1(exponent),
            "bq1a" => NormSpec::bq1_kernel(exponent),
            other => return Err(Error::Parse(format!("unknown norm family `{other}`"))),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Canonical display form; inverse of [`NormSpec::parse`] for the
    /// command-line kinds.
    pub fn name(&self) -> String {
        fn num(x: f64) -> String {
            if x.fract() == 0.0 && x.abs() < 1e15 {
                format!("{}", x as i64)
            } else {
                format!("{x}")
            }
        }
        match &self.kind {
            NormKind::Lp { p } => format!("lq:{}", num(*p)),
            NormKind::Bq1 { q } => format!("bq1{}:{}", self.mode.suffix(), num(*q)),
            NormKind::Besov { p, theta, r } => {
                let r: Vec<String> = r.iter().map(|&x| num(x)).collect();
                format!(
                    "besov{}:p={},theta={},r={}",
                    self.mode.suffix(),
                    num(*p),
                    num(*theta),
                    r.join(":")
                )
            }
            NormKind::HSup { p, r } => {
                let r: Vec<String> = r.iter().map(|&x| num(x)).collect();
                format!("h{}:p={},r={}", self.mode.suffix(), num(*p), r.join(":"))
            }
        }
    }

    /// Checks exponent ranges, including the endpoint rule for raw blocks.
    pub fn validate(&self) -> Result<()> {
        let check_p = |p: f64, blockwise: bool| -> Result<()> {
            if !(p >= 1.0 && p.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "exponent must satisfy 1 <= p < inf, got {p}"
                )));
            }
            if blockwise && self.mode == BlockMode::Delta && p <= 1.0 {
                return Err(Error::InvalidArgument(
                    "raw block restrictions need an exponent in (1, inf); use the kernel mode at the endpoint".into(),
                ));
            }
            Ok(())
        };
        match &self.kind {
            NormKind::Lp { p } => check_p(*p, false),
            NormKind::Bq1 { q } => check_p(*q, true),
            NormKind::Besov { p, theta, .. } => {
                check_p(*p, true)?;
                if !(*theta >= 1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "summation exponent must satisfy theta >= 1, got {theta}"
                    )));
                }
                Ok(())
            }
            NormKind::HSup { p, .. } => check_p(*p, true),
        }
    }

    /// Evaluates the norm with the given oversampling factor.
    pub fn evaluate(&self, f: &PolyExpr, rho_os: usize) -> Result<f64> {
        self.validate()?;
        match &self.kind {
            NormKind::Lp { p } => lp_norm_auto(f, *p, rho_os),
            NormKind::Bq1 { q } => bq1_norm(f, *q, self.mode, rho_os),
            NormKind::Besov { p, theta, r } => besov_norm(f, r, *p, *theta, self.mode, rho_os),
            NormKind::HSup { p, r } => h_norm(f, r, *p, self.mode, rho_os),
        }
    }
}

// ---------------------------------------------------------------------------
// plain Lp

/// Dense-grid `L_p` norm of a sparse polynomial.
pub fn lp_norm_dense(f: &SparseTrigPoly, p: f64, rho_os: usize) -> Result<f64> {
    check_exponent(p)?;
    if f.is_empty() {
        return Ok(0.0);
    }
    let rho = rho_os.max(even_oversample(p));
    let grid = QuadratureGrid::for_bandwidth(&f.max_freq(), rho)?;
    let samples = f.synthesize(&grid)?;
    Ok(crate::quad::mean_power_norm(&samples, p))
}

/// `L_p` norm of one rank-1 term: the tensor-grid mean factorizes, so this
/// is `|w|` times the product of one-dimensional factor norms.
pub fn lp_norm_term(term: &TensorTerm, p: f64, rho_os: usize) -> Result<f64> {
    check_exponent(p)?;
    let mut out = term.weight.norm();
    for j in 0..term.block.dim() {
        out *= factor_norm_1d(&term.factor_coeffs(j), p, rho_os)?;
    }
    Ok(out)
}

/// `L_p` norm of a block tensor polynomial, routed by structure.
pub fn lp_norm_tensor(f: &TensorBlockPoly, p: f64, rho_os: usize) -> Result<f64> {
    check_exponent(p)?;
    if p == 2.0 {
        return Ok(f.l2_norm());
    }
    match f.terms() {
        [] => Ok(0.0),
        [term] => lp_norm_term(term, p, rho_os),
        _ if p == 4.0 => moment4_tensor(f),
        _ => {
            // No factorized route: expand if the size guards allow it.
            let sparse = f.to_sparse()?;
            lp_norm_dense(&sparse, p, rho_os)
        }
    }
}

/// `L_p` norm of any polynomial expression. Exact at `p = 2` (Parseval) and
/// at even `p` when the grids fit; otherwise an oversampled estimate.
pub fn lp_norm_auto(f: &PolyExpr, p: f64, rho_os: usize) -> Result<f64> {
    check_exponent(p)?;
    match f {
        PolyExpr::Sparse(s) => {
            if p == 2.0 {
                Ok(s.l2_norm())
            } else {
                lp_norm_dense(s, p, rho_os)
            }
        }
        PolyExpr::Tensor(t) => lp_norm_tensor(t, p, rho_os),
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("exponent must satisfy 1 <= p < inf, got {p}")))
    }
}

/// Minimal oversampling that keeps the rectangle rule exact for `|f|^p`
/// at even integer `p` (the integrand has bandwidth `p * maxfreq`).
fn even_oversample(p: f64) -> usize {
    if p.fract() == 0.0 && (p as u64) % 2 == 0 {
        ((p / 2.0).ceil() as usize).max(1)
    } else {
        1
    }
}

/// One-dimensional `L_p` norm of `(frequency, coefficient)` data.
pub fn factor_norm_1d(coeffs: &[(i32, Complex64)], p: f64, rho_os: usize) -> Result<f64> {
    check_exponent(p)?;
    if coeffs.is_empty() {
        return Ok(0.0);
    }
    let maxfreq = coeffs.iter().map(|&(k, _)| k.unsigned_abs() as usize).max().unwrap_or(0);
    let rho = rho_os.max(even_oversample(p));
    let m = rho
        .checked_mul(2 * maxfreq + 1)
        .ok_or_else(|| Error::InvalidArgument("bandwidth overflow".into()))?
        .next_power_of_two();
    if m > MAX_GRID_POINTS {
        return Err(Error::GridTooLarge { points: m, limit: MAX_GRID_POINTS });
    }
    let samples = synthesize_1d(coeffs, m);
    Ok(crate::quad::mean_power_norm(&samples, p))
}

/// Exact `L_4` norm of a sum of rank-1 terms on disjoint blocks via the
/// moment identity: `|f|_4^4` expands over term quadruples into products of
/// one-dimensional fourth-order means, each integrated exactly on its own
/// grid.
pub fn moment4_tensor(f: &TensorBlockPoly) -> Result<f64> {
    let terms = f.terms();
    let t = terms.len();
    if t == 0 {
        return Ok(0.0);
    }
    if t > MAX_MOMENT4_TERMS {
        return Err(Error::Unsupported(format!(
            "fourth-moment path couples {t} terms; limit is {MAX_MOMENT4_TERMS}"
        )));
    }
    let d = f.dim();
    let pairs: Vec<(usize, usize)> =
        (0..t).flat_map(|a| (a..t).map(move |b| (a, b))).collect();
    let pair_idx = |a: usize, b: usize| -> usize {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        // index into the (a <= b) enumeration above
        a * t - a * (a + 1) / 2 + b
    };
    // gram[j][x * pairs + y] = mean over the axis-j grid of P_x conj(P_y)
    let mut gram: Vec<Vec<Complex64>> = Vec::with_capacity(d);
    for j in 0..d {
        let maxfreq = terms
            .iter()
            .map(|term| (1i64 << term.block.components()[j]) - 1)
            .max()
            .unwrap_or(0) as usize;
        let m = (4 * maxfreq + 1).next_power_of_two();
        if pairs.len().saturating_mul(m) > MAX_GRID_POINTS {
            return Err(Error::GridTooLarge { points: pairs.len() * m, limit: MAX_GRID_POINTS });
        }
        let grids: Vec<Vec<Complex64>> =
            terms.iter().map(|term| synthesize_1d(&term.factor_coeffs(j), m)).collect();
        let prods: Vec<Vec<Complex64>> = pairs
            .par_iter()
            .map(|&(a, b)| {
                grids[a]
                    .iter()
                    .zip(&grids[b])
                    .map(|(u, v)| u * v)
                    .collect()
            })
            .collect();
        let g: Vec<Complex64> = (0..pairs.len() * pairs.len())
            .into_par_iter()
            .map(|idx| {
                let (x, y) = (idx / pairs.len(), idx % pairs.len());
                let dot: Complex64 = prods[x]
                    .iter()
                    .zip(&prods[y])
                    .map(|(u, v)| u * v.conj())
                    .sum();
                dot / m as f64
            })
            .collect();
        gram.push(g);
    }
    let np = pairs.len();
    let mut total = Complex64::new(0.0, 0.0);
    for t1 in 0..t {
        for t2 in 0..t {
            let w12 = terms[t1].weight * terms[t2].weight;
            let x = pair_idx(t1, t2);
            for t3 in 0..t {
                for t4 in 0..t {
                    let y = pair_idx(t3, t4);
                    let w = w12 * (terms[t3].weight * terms[t4].weight).conj();
                    let mut prod = Complex64::new(1.0, 0.0);
                    for g in &gram {
                        prod *= g[x * np + y];
                    }
                    total += w * prod;
                }
            }
        }
    }
    Ok(total.re.max(0.0).powf(0.25))
}

// ---------------------------------------------------------------------------
// rank-1 sums

/// One rank-1 summand of a structured band: a scalar weight and per-axis
/// `(frequency, coefficient)` factors.
#[derive(Debug, Clone)]
pub struct Rank1Piece {
    /// Scalar weight.
    pub weight: Complex64,
    /// Per-axis factors; every list is nonempty.
    pub factors: Vec<Vec<(i32, Complex64)>>,
}

/// `L_p` norm of `sum_t w_t prod_j u_{t,j}(x_j)` by streamed row evaluation:
/// one-dimensional factor tables are synthesized once, rows along the last
/// axis are combined per outer grid point, and the power mean is accumulated
/// in a fixed order.
pub fn lp_norm_rank_sum(pieces: &[Rank1Piece], p: f64, rho_os: usize) -> Result<f64> {
    check_exponent(p)?;
    if pieces.is_empty() {
        return Ok(0.0);
    }
    let d = pieces[0].factors.len();
    if d == 0 || pieces.iter().any(|t| t.factors.len() != d) {
        return Err(Error::InvalidArgument("rank-1 pieces must share a dimension >= 1".into()));
    }
    let rho = rho_os.max(even_oversample(p));
    let mut sizes = vec![0usize; d];
    for (j, size) in sizes.iter_mut().enumerate() {
        let maxfreq = pieces
            .iter()
            .flat_map(|t| t.factors[j].iter().map(|&(k, _)| k.unsigned_abs() as usize))
            .max()
            .unwrap_or(0);
        *size = rho
            .checked_mul(2 * maxfreq + 1)
            .ok_or_else(|| Error::InvalidArgument("bandwidth overflow".into()))?
            .next_power_of_two();
    }
    let total: u128 = sizes.iter().map(|&m| m as u128).product();
    if total > MAX_GRID_POINTS as u128 {
        return Err(Error::GridTooLarge {
            points: total.min(usize::MAX as u128) as usize,
            limit: MAX_GRID_POINTS,
        });
    }
    // grids[j][t]: samples of piece t's axis-j factor
    let grids: Vec<Vec<Vec<Complex64>>> = (0..d)
        .map(|j| pieces.iter().map(|t| synthesize_1d(&t.factors[j], sizes[j])).collect())
        .collect();
    let m_last = sizes[d - 1];
    let outer: usize = sizes[..d - 1].iter().product();
    let nt = pieces.len();
    let partials: Vec<f64> = (0..outer)
        .into_par_iter()
        .map_init(
            || vec![Complex64::new(0.0, 0.0); nt],
            |scales, outer_idx| {
                let mut idx = outer_idx;
                for (t, sc) in scales.iter_mut().enumerate() {
                    *sc = pieces[t].weight;
                }
                for j in (0..d - 1).rev() {
                    let coord = idx % sizes[j];
                    idx /= sizes[j];
                    for (t, sc) in scales.iter_mut().enumerate() {
                        *sc *= grids[j][t][coord];
                    }
                }
                let row = &grids[d - 1];
                let mut acc = 0.0f64;
                for x in 0..m_last {
                    let mut z = Complex64::new(0.0, 0.0);
                    for (t, sc) in scales.iter().enumerate() {
                        z += sc * row[t][x];
                    }
                    acc += pow_p(z, p);
                }
                acc
            },
        )
        .collect();
    let sum: f64 = partials.iter().sum();
    Ok((sum / total as f64).powf(1.0 / p))
}

fn pow_p(z: Complex64, p: f64) -> f64 {
    if p == 1.0 {
        z.norm()
    } else if p == 2.0 {
        z.norm_sqr()
    } else if p == 4.0 {
        let q = z.norm_sqr();
        q * q
    } else {
        z.norm().powf(p)
    }
}

// ---------------------------------------------------------------------------
// block components

/// Per-block norms of the raw restrictions `delta_s f`, in block order.
pub fn delta_block_norms(f: &PolyExpr, p: f64, rho_os: usize) -> Result<Vec<(Block, f64)>> {
    match f {
        PolyExpr::Sparse(s) => s
            .group_by_block()?
            .into_iter()
            .map(|(b, part)| Ok((b, block_lp_norm(&part, p, rho_os)?)))
            .collect(),
        PolyExpr::Tensor(t) => t
            .terms()
            .iter()
            .map(|term| Ok((term.block.clone(), lp_norm_term(term, p, rho_os)?)))
            .collect(),
    }
}

/// Per-block norms of the smoothed bands `A_s f` over every block whose band
/// can see the support, in block order. Vanishing bands are kept.
///
/// Sparse input is grouped by block once; each band then assembles only its
/// adjacent blocks, so the total work is linear in the support size times
/// `3^d` rather than quadratic in the number of blocks.
pub fn a_block_norms(f: &PolyExpr, p: f64, rho_os: usize) -> Result<Vec<(Block, f64)>> {
    match f {
        PolyExpr::Sparse(s) => {
            let groups = s.group_by_block()?;
            let support: BTreeSet<Block> = groups.keys().cloned().collect();
            let candidates: Vec<Block> = band_neighborhood(&support).into_iter().collect();
            let rows: Vec<Result<(Block, f64)>> = candidates
                .into_par_iter()
                .map(|b| {
                    let mut band = SparseTrigPoly::new(s.dim())?;
                    for nb in band_neighborhood(&BTreeSet::from([b.clone()])) {
                        if let Some(part) = groups.get(&nb) {
                            for (k, c) in part.iter() {
                                let w = as_weight(&b, k);
                                if w != 0.0 {
                                    band.add_to(k.clone(), c * w)?;
                                }
                            }
                        }
                    }
                    let value = if band.is_empty() {
                        0.0
                    } else if p == 2.0 {
                        band.l2_norm()
                    } else {
                        lp_norm_dense(&band, p, rho_os)?
                    };
                    Ok((b, value))
                })
                .collect();
            rows.into_iter().collect()
        }
        PolyExpr::Tensor(t) => {
            let support = support_blocks(f)?;
            band_neighborhood(&support)
                .into_iter()
                .map(|b| {
                    let pieces = band_pieces(t, &b);
                    let value = lp_norm_rank_sum(&pieces, p, rho_os)?;
                    Ok((b, value))
                })
                .collect()
        }
    }
}

/// The blocks that carry the support of `f`. For sparse input this requires
/// the support to avoid the coordinate hyperplanes.
pub fn support_blocks(f: &PolyExpr) -> Result<BTreeSet<Block>> {
    match f {
        PolyExpr::Sparse(s) => {
            let mut out = BTreeSet::new();
            for (k, _) in s.iter() {
                out.insert(crate::index::block_of(k)?);
            }
            Ok(out)
        }
        PolyExpr::Tensor(t) => Ok(t.terms().iter().map(|term| term.block.clone()).collect()),
    }
}

/// All blocks within sup-distance 1 of the given set; the bands of exactly
/// these blocks can overlap the set's frequencies.
pub fn band_neighborhood(support: &BTreeSet<Block>) -> BTreeSet<Block> {
    let mut out = BTreeSet::new();
    for b in support {
        let comps = b.components();
        let d = comps.len();
        let mut offsets = vec![-1i64; d];
        loop {
            let cand: Vec<u32> = comps
                .iter()
                .zip(&offsets)
                .map(|(&c, &o)| (c as i64 + o).max(0) as u32)
                .collect();
            if cand.iter().all(|&c| c >= 1) {
                out.insert(Block::new(cand).expect("components >= 1"));
            }
            let mut j = d;
            let mut done = true;
            while j > 0 {
                j -= 1;
                if offsets[j] < 1 {
                    offsets[j] += 1;
                    for o in &mut offsets[j + 1..] {
                        *o = -1;
                    }
                    done = false;
                    break;
                }
            }
            if done {
                break;
            }
        }
    }
    out
}

/// Rank-1 pieces of the band `A_s f` of a block tensor polynomial: each
/// nearby term contributes its factors reweighted per axis by the band
/// weights. Terms that the band annihilates are dropped.
pub fn band_pieces(f: &TensorBlockPoly, s: &Block) -> Vec<Rank1Piece> {
    let d = f.dim();
    f.terms()
        .iter()
        .filter(|term| term.block.linf_distance(s) <= 1)
        .filter_map(|term| {
            let mut factors = Vec::with_capacity(d);
            for j in 0..d {
                let sj = s.components()[j];
                let fc: Vec<(i32, Complex64)> = term
                    .factor_coeffs(j)
                    .into_iter()
                    .map(|(k, c)| (k, c * as_weight_1d(sj, k)))
                    .filter(|(_, c)| c.norm() > 0.0)
                    .collect();
                if fc.is_empty() {
                    return None;
                }
                factors.push(fc);
            }
            Some(Rank1Piece { weight: term.weight, factors })
        })
        .collect()
}

fn block_lp_norm(part: &SparseTrigPoly, p: f64, rho_os: usize) -> Result<f64> {
    if p == 2.0 {
        Ok(part.l2_norm())
    } else {
        lp_norm_dense(part, p, rho_os)
    }
}

// ---------------------------------------------------------------------------
// block-sum norms

/// Block-sum norm `sum_s |block_s f|_q`.
pub fn bq1_norm(f: &PolyExpr, q: f64, mode: BlockMode, rho_os: usize) -> Result<f64> {
    besov_norm(f, &vec![0.0; f.dim()], q, 1.0, mode, rho_os)
}

/// Weighted block-sum norm
/// `(sum_s (2^{(s,r)} |block_s f|_p)^theta)^(1/theta)`; pass
/// `theta = f64::INFINITY` for the sup form.
pub fn besov_norm(
    f: &PolyExpr,
    r: &[f64],
    p: f64,
    theta: f64,
    mode: BlockMode,
    rho_os: usize,
) -> Result<f64> {
    if r.len() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: r.len() });
    }
    check_exponent(p)?;
    if mode == BlockMode::Delta && p <= 1.0 {
        return Err(Error::InvalidArgument(
            "raw block restrictions need an exponent in (1, inf); use the kernel mode at the endpoint".into(),
        ));
    }
    if !(theta >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "summation exponent must satisfy theta >= 1, got {theta}"
        )));
    }
    let pairs = match mode {
        BlockMode::Delta => delta_block_norms(f, p, rho_os)?,
        BlockMode::AKernel => a_block_norms(f, p, rho_os)?,
    };
    let weighted = pairs.iter().map(|(s, v)| {
        let w: f64 = s.components().iter().zip(r).map(|(&sj, &rj)| sj as f64 * rj).sum();
        (2f64).powf(w) * v
    });
    if theta.is_infinite() {
        Ok(weighted.fold(0.0, f64::max))
    } else if theta == 1.0 {
        // Empty sums are -0.0; adding +0.0 keeps the zero polynomial at +0.0.
        Ok(weighted.sum::<f64>() + 0.0)
    } else {
        let sum: f64 = weighted.map(|x| x.powf(theta)).sum();
        Ok(sum.powf(1.0 / theta))
    }
}

/// Weighted block sup `max_s 2^{(s,r)} |block_s f|_p`.
pub fn h_norm(f: &PolyExpr, r: &[f64], p: f64, mode: BlockMode, rho_os: usize) -> Result<f64> {
    besov_norm(f, r, p, f64::INFINITY, mode, rho_os)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::block_of;
    use crate::kernels::{apply_multiplier, dn_poly, random_poly, AmplitudeLaw, MultiplierSpec};

    fn sample_sparse() -> SparseTrigPoly {
        SparseTrigPoly::from_coeffs(
            2,
            [
                (vec![1, 1], Complex64::new(1.0, 0.0)),
                (vec![-2, 3], Complex64::new(0.5, -0.5)),
                (vec![5, -1], Complex64::new(0.0, 2.0)),
                (vec![-6, -6], Complex64::new(-0.75, 0.25)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn lp_agrees_with_parseval_at_two() {
        let f = sample_sparse();
        let dense = lp_norm_dense(&f, 2.0, 4).unwrap();
        assert!((dense - f.l2_norm()).abs() < 1e-12);
        let auto = lp_norm_auto(&PolyExpr::Sparse(f.clone()), 2.0, 4).unwrap();
        assert_eq!(auto, f.l2_norm());
    }

    #[test]
    fn single_term_product_path_matches_dense() {
        let f = dn_poly(4, 2).unwrap();
        let one = TensorBlockPoly::from_terms(2, vec![f.terms()[1].clone()]).unwrap();
        for p in [1.0, 2.0, 3.0, 4.0] {
            let fast = lp_norm_tensor(&one, p, 8).unwrap();
            let dense = lp_norm_dense(&one.to_sparse().unwrap(), p, 8).unwrap();
            let tol = if p == 2.0 || p == 4.0 { 1e-12 } else { 2e-3 * dense };
            assert!((fast - dense).abs() <= tol, "p = {p}: {fast} vs {dense}");
        }
    }

    #[test]
    fn fourth_moment_identity_matches_dense() {
        for n in [4u32, 5] {
            let f = dn_poly(n, 2).unwrap();
            let fast = moment4_tensor(&f).unwrap();
            let dense = lp_norm_dense(&f.to_sparse().unwrap(), 4.0, 2).unwrap();
            assert!(
                (fast - dense).abs() <= 1e-10 * dense,
                "n = {n}: {fast} vs {dense}"
            );
        }
    }

    #[test]
    fn rank_sum_matches_dense_band_evaluation() {
        // The band A_s of a tensor polynomial, evaluated once through the
        // rank-1 row path and once through the dense multiplier path.
        let f = dn_poly(5, 2).unwrap();
        let sparse = f.to_sparse().unwrap();
        for s in [Block::new(vec![2, 3]).unwrap(), Block::new(vec![1, 4]).unwrap()] {
            let pieces = band_pieces(&f, &s);
            assert!(!pieces.is_empty());
            for p in [1.0, 2.0] {
                let fast = lp_norm_rank_sum(&pieces, p, 8).unwrap();
                let band = apply_multiplier(&sparse, &MultiplierSpec::ABlock(s.clone())).unwrap();
                let dense = if p == 2.0 {
                    band.l2_norm()
                } else {
                    lp_norm_dense(&band, p, 8).unwrap()
                };
                assert!(
                    (fast - dense).abs() <= 1e-10 * dense.max(1.0),
                    "s = {s:?}, p = {p}: {fast} vs {dense}"
                );
            }
        }
    }

    #[test]
    fn block_sums_agree_between_representations() {
        let tensor = dn_poly(5, 2).unwrap();
        let sparse = PolyExpr::Sparse(tensor.to_sparse().unwrap());
        let tensor = PolyExpr::Tensor(tensor);
        for q in [2.0, 4.0] {
            let a = bq1_norm(&tensor, q, BlockMode::Delta, 8).unwrap();
            let b = bq1_norm(&sparse, q, BlockMode::Delta, 8).unwrap();
            assert!((a - b).abs() < 1e-10 * a, "q = {q}: {a} vs {b}");
        }
        let a = bq1_norm(&tensor, 1.0, BlockMode::AKernel, 8).unwrap();
        let b = bq1_norm(&sparse, 1.0, BlockMode::AKernel, 8).unwrap();
        assert!((a - b).abs() < 1e-9 * a, "kernel mode: {a} vs {b}");
    }

    #[test]
    fn kernel_mode_reconstructs_single_block_mass() {
        // For f supported on one block, the bands with nonzero overlap are
        // the neighbors. Per axis each frequency splits its unit weight over
        // two adjacent bands, so the squared band masses recombine to
        // between 1/4 and 1 of the block mass in dimension 2.
        let f = random_poly(5, &[Block::new(vec![3, 2]).unwrap()], AmplitudeLaw::UnitModulus).unwrap();
        let pairs = a_block_norms(&PolyExpr::Sparse(f.clone()), 2.0, 2).unwrap();
        let total_sq: f64 = pairs.iter().map(|(_, v)| v * v).sum();
        let mass = f.l2_norm();
        assert!(total_sq >= mass * mass * 0.25 * 0.999);
        assert!(total_sq <= mass * mass * (1.0 + 1e-12));
        // every contributing band is within distance 1 of the support block
        let b0 = Block::new(vec![3, 2]).unwrap();
        for (s, v) in &pairs {
            if *v > 0.0 {
                assert!(s.linf_distance(&b0) <= 1);
            }
        }
    }

    #[test]
    fn besov_weights_single_block() {
        let f = SparseTrigPoly::from_coeffs(2, [(vec![2, -5], Complex64::new(3.0, 4.0))]).unwrap();
        let s = block_of(&[2, -5]).unwrap();
        let r = [1.0, 2.0];
        let w: f64 = s.components().iter().zip(&r).map(|(&sj, &rj)| sj as f64 * rj).sum();
        let expect = (2f64).powf(w) * 5.0;
        let f = PolyExpr::Sparse(f);
        for theta in [1.0, 2.0, f64::INFINITY] {
            let got = besov_norm(&f, &r, 2.0, theta, BlockMode::Delta, 2).unwrap();
            assert!((got - expect).abs() < 1e-12, "theta = {theta}");
        }
        let h = h_norm(&f, &r, 2.0, BlockMode::Delta, 2).unwrap();
        assert!((h - expect).abs() < 1e-12);
    }

    #[test]
    fn endpoint_rules() {
        let f = PolyExpr::Sparse(sample_sparse());
        assert!(bq1_norm(&f, 1.0, BlockMode::Delta, 2).is_err());
        assert!(bq1_norm(&f, 1.0, BlockMode::AKernel, 2).is_ok());
        assert!(lp_norm_auto(&f, 0.5, 2).is_err());
        assert!(besov_norm(&f, &[0.0, 0.0], 2.0, 0.5, BlockMode::Delta, 2).is_err());
    }

    #[test]
    fn norm_spec_grammar() {
        let s = NormSpec::parse("lq:2").unwrap();
        assert_eq!(s, NormSpec::lp(2.0));
        assert_eq!(s.name(), "lq:2");
        let s = NormSpec::parse("bq1:4").unwrap();
        assert_eq!(s, NormSpec::bq1(4.0));
        assert_eq!(s.name(), "bq1:4");
        let s = NormSpec::parse("bq1a:1").unwrap();
        assert_eq!(s, NormSpec::bq1_kernel(1.0));
        assert_eq!(s.name(), "bq1a:1");
        assert!(NormSpec::parse("bq1:1").is_err(), "endpoint needs kernel mode");
        assert!(NormSpec::parse("zz:2").is_err());
        assert!(NormSpec::parse("lq").is_err());
        assert!(NormSpec::parse("lq:x").is_err());
    }

    #[test]
    fn dirichlet_l2_closed_form() {
        // |D_m|_2 = sqrt(2m + 1).
        let m = 37i32;
        let mut f = SparseTrigPoly::new(1).unwrap();
        for k in -m..=m {
            f.set(vec![k], Complex64::new(1.0, 0.0)).unwrap();
        }
        let got = lp_norm_dense(&f, 2.0, 2).unwrap();
        let expect = (2.0 * m as f64 + 1.0).sqrt();
        assert!((got - expect).abs() < 1e-12);
    }

    #[test]
    fn zero_polynomial_norms_are_positive_zero() {
        // Parseval and theta = 1 block sums run through empty f64 sums, which
        // start at -0.0; every reported norm must carry a positive sign bit.
        let z = PolyExpr::Sparse(SparseTrigPoly::new(2).unwrap());
        let values = [
            z.l2_norm(),
            lp_norm_auto(&z, 2.0, 2).unwrap(),
            lp_norm_auto(&z, 3.0, 2).unwrap(),
            bq1_norm(&z, 2.0, BlockMode::Delta, 2).unwrap(),
            bq1_norm(&z, 1.0, BlockMode::AKernel, 2).unwrap(),
            besov_norm(&z, &[0.5, 1.0], 2.0, f64::INFINITY, BlockMode::Delta, 2).unwrap(),
        ];
        for v in values {
            assert_eq!(v, 0.0);
            assert!(v.is_sign_positive(), "got -0.0");
        }
    }
}
