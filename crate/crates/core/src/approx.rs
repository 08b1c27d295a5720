//! Cross truncation operators and approximation errors.
//!
//! The linear approximant under study is the hyperbolic Fourier partial sum
//! `S_Q f` (restriction of the spectrum to a step-hyperbolic cross). Three
//! error functionals are measured against it:
//!
//! * the blockwise tail `sum_{s outside} |delta_s f|_q`, which is exactly
//!   both the projection error and the best approximation error in the
//!   block-sum norm, because disjoint blocks can be matched independently;
//! * the plain `L_q` distance `|f - S_Q f|_q`;
//! * in the kernel block norm at exponent 1, a certified bracket around the
//!   best error: a Fourier-coefficient lower bound and the de la Vallee
//!   Poussin approximant `t_n = sum_{(s,gamma') < n - gamma'(d)} A_s f` as
//!   the constructive upper bound. `t_n` keeps its spectrum inside the
//!   gamma'-cross of level `n` because every band reaches at most one block
//!   beyond its index.
//!
//! Sweeps evaluate one report per level and serialize to a fixed CSV schema;
//! reruns with the same configuration are byte-identical.

use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, Write};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::index::{block_of, cross_cardinality, Block, CrossSpec, CrossVariant, SmoothnessProfile};
use crate::kernels::{as_weight, as_weight_1d, Generator};
use crate::norms::{
    a_block_norms, bq1_norm, factor_norm_1d, lp_norm_auto, lp_norm_rank_sum, BlockMode, NormKind,
    NormSpec, Rank1Piece,
};
use crate::trigpoly::{PolyExpr, SparseTrigPoly, MAX_SPARSE_EXPANSION};

/// Blockwise tail `sum_{s outside the cross} |delta_s f|_q`: the error of
/// the hyperbolic partial sum in the block-sum norm, computed directly from
/// the tail spectrum. Needs `q > 1`.
pub fn fourier_tail_error(f: &PolyExpr, cross: &CrossSpec, q: f64, rho_os: usize) -> Result<f64> {
    let tail = f.tail_of_cross(cross)?;
    bq1_norm(&tail, q, BlockMode::Delta, rho_os)
}

/// Best approximation error from spectra inside the cross, in the block-sum
/// norm: materializes the optimal candidate `t = S_Q f` and measures
/// `|f - t|`. Disjoint blocks split the norm, blocks inside the cross are
/// matched exactly and blocks outside cannot be touched, so the minimum is
/// attained at the restriction; the value equals [`fourier_tail_error`].
pub fn best_error_block(f: &PolyExpr, cross: &CrossSpec, q: f64, rho_os: usize) -> Result<f64> {
    let diff = match f {
        PolyExpr::Sparse(s) => {
            let t = s.restrict_to_cross(cross)?;
            PolyExpr::Sparse(s.sub(&t)?)
        }
        PolyExpr::Tensor(t) => {
            if t.support_points() <= MAX_SPARSE_EXPANSION as u128 {
                let dense = t.to_sparse()?;
                let inside = dense.restrict_to_cross(cross)?;
                PolyExpr::Sparse(dense.sub(&inside)?)
            } else {
                PolyExpr::Tensor(t.tail_of_cross(cross)?)
            }
        }
    };
    bq1_norm(&diff, q, BlockMode::Delta, rho_os)
}

/// `L_q` distance `|f - S_Q f|_q`. Exact at `q = 2` (Parseval) and at even
/// `q` when grids fit; otherwise an oversampled estimate.
pub fn lq_error(f: &PolyExpr, cross: &CrossSpec, q: f64, rho_os: usize) -> Result<f64> {
    let tail = f.tail_of_cross(cross)?;
    lp_norm_auto(&tail, q, rho_os)
}

/// Sum of the band weights `a_s(k)` over `(s, gamma') < level`; the Fourier
/// multiplier of the de la Vallee Poussin approximant. Only the `3^d` bands
/// adjacent to the block of `k` can contribute.
fn vp_weight_at(k: &[i32], level: f64, profile: &SmoothnessProfile) -> Result<f64> {
    let b = block_of(k)?;
    let comps = b.components();
    let d = comps.len();
    let gp = profile.gamma_prime();
    let mut total = 0.0;
    let mut offsets = vec![-1i64; d];
    loop {
        let mut ok = true;
        let mut dot = 0.0;
        let mut s = Vec::with_capacity(d);
        for j in 0..d {
            let sj = comps[j] as i64 + offsets[j];
            if sj < 1 {
                ok = false;
                break;
            }
            dot += sj as f64 * gp[j];
            s.push(sj as u32);
        }
        if ok && dot < level {
            total += as_weight(&Block::new(s)?, k);
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
            return Ok(total);
        }
    }
}

fn vp_level(n: u32, profile: &SmoothnessProfile) -> Result<f64> {
    let gp_sum: f64 = profile.gamma_prime().iter().sum();
    if (n as f64) <= 3.0 * gp_sum {
        return Err(Error::InvalidArgument(format!(
            "smoothing approximant needs n > 3 * sum(gamma') = {}, got n = {n}",
            3.0 * gp_sum
        )));
    }
    Ok(n as f64 - gp_sum)
}

/// The de la Vallee Poussin approximant
/// `t_n = sum_{(s, gamma') < n - gamma'(d)} A_s f` with
/// `gamma'(d) = sum_j gamma'_j`. Requires `n > 3 gamma'(d)`; the spectrum of
/// the result is verified to lie inside the gamma'-cross of level `n`.
pub fn vp_approximant(f: &SparseTrigPoly, n: u32, profile: &SmoothnessProfile) -> Result<SparseTrigPoly> {
    if profile.dim() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: profile.dim() });
    }
    let level = vp_level(n, profile)?;
    let mut t = SparseTrigPoly::new(f.dim())?;
    for (k, c) in f.iter() {
        let w = vp_weight_at(k, level, profile)?;
        if w != 0.0 {
            t.set(k.clone(), c * w)?;
        }
    }
    let cross = profile.cross(n, CrossVariant::GammaPrime)?;
    for (k, _) in t.iter() {
        let b = block_of(k)?;
        if !cross.contains(&b) {
            return Err(Error::Hypothesis {
                case: "smoothing approximant support".into(),
                detail: format!("block {:?} escaped the level-{n} cross", b.components()),
            });
        }
    }
    Ok(t)
}

/// The residual `f - t_n`, built directly from the complementary multiplier
/// `1 - W_n(k)` so frequencies fully inside the kept region drop exactly.
pub fn vp_residual(f: &SparseTrigPoly, n: u32, profile: &SmoothnessProfile) -> Result<SparseTrigPoly> {
    if profile.dim() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: profile.dim() });
    }
    let level = vp_level(n, profile)?;
    let mut g = SparseTrigPoly::new(f.dim())?;
    for (k, c) in f.iter() {
        let w = vp_weight_at(k, level, profile)?;
        if w != 1.0 {
            g.set(k.clone(), c * (1.0 - w))?;
        }
    }
    Ok(g)
}

/// `sum_{(s, gamma') >= level} |A_s f|_1`: the band tail that dominates the
/// smoothing residual (each residual band is a sum of at most `3^d` nearby
/// `A_s A_{s'}` products, and the band system is uniformly `L_1`-bounded).
pub fn band_l1_above(f: &PolyExpr, profile: &SmoothnessProfile, level: f64, rho_os: usize) -> Result<f64> {
    let gp = profile.gamma_prime();
    Ok(a_block_norms(f, 1.0, rho_os)?
        .into_iter()
        .filter(|(s, _)| {
            let dot: f64 =
                s.components().iter().zip(gp).map(|(&sj, &gj)| sj as f64 * gj).sum();
            dot >= level
        })
        .map(|(_, v)| v)
        .sum())
}

// ---------------------------------------------------------------------------
// separable residuals at large bandwidth

/// Kernel block-sum error `sum_s |A_s (f - t_n)|_1` of the smoothing
/// approximant for a separable input `f(x) = prod_j u_j(x_j)`, evaluated at
/// every requested `n` from the per-axis coefficient lists alone.
///
/// Linearity keeps each band separable: only the `3^d` neighbors of `s` can
/// meet `A_s`, so
/// `A_s (f - t_n) = A_s f - sum { A_s A_s' f : |s' - s| <= 1, (s', gamma') < n - gamma'(d) }`,
/// a sum of at most `1 + 3^d` rank-1 pieces. The partition of unity cancels
/// the band exactly when every neighbor qualifies; with no qualifying
/// neighbor the band is the pure product `A_s f` whose `L_1` norm factors
/// into one-dimensional norms, cached across bands and levels. Only the
/// transition bands near the cut stream through [`lp_norm_rank_sum`], so the
/// support may exceed the sparse expansion limit by orders of magnitude.
///
/// Entries at `k = 0` are ignored: every band weight vanishes on the
/// coordinate hyperplanes, so they are invisible to the block-sum norm.
pub fn separable_residual_band_l1(
    axes: &[Vec<(i32, Complex64)>],
    ns: &[u32],
    profile: &SmoothnessProfile,
    rho_os: usize,
) -> Result<Vec<f64>> {
    let d = axes.len();
    if d == 0 {
        return Err(Error::InvalidArgument("separable input needs dimension >= 1".into()));
    }
    if profile.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: profile.dim() });
    }
    let levels: Vec<f64> = ns.iter().map(|&n| vp_level(n, profile)).collect::<Result<_>>()?;
    let zero = Complex64::new(0.0, 0.0);
    let axes: Vec<Vec<(i32, Complex64)>> = axes
        .iter()
        .map(|u| u.iter().copied().filter(|&(k, c)| k != 0 && c != zero).collect())
        .collect();
    if axes.iter().any(Vec::is_empty) {
        return Ok(vec![0.0; ns.len()]);
    }
    // A band overlaps blocks s and s + 1 only, so bands s in {b - 1, b} over
    // the support blocks b exhaust the nonzero ones per axis.
    let cands: Vec<Vec<u32>> = axes
        .iter()
        .map(|u| {
            let mut set = BTreeSet::new();
            for &(k, _) in u {
                let b = 32 - k.unsigned_abs().leading_zeros();
                set.insert(b);
                if b > 1 {
                    set.insert(b - 1);
                }
            }
            set.into_iter().collect()
        })
        .collect();
    // Banded axis lists and their one-dimensional L_1 norms, keyed (axis, band).
    let mut banded: HashMap<(usize, u32), Vec<(i32, Complex64)>> = HashMap::new();
    let mut norm1: HashMap<(usize, u32), f64> = HashMap::new();
    for (j, u) in axes.iter().enumerate() {
        for &s in &cands[j] {
            let list: Vec<(i32, Complex64)> = u
                .iter()
                .filter_map(|&(k, c)| {
                    let w = as_weight_1d(s, k);
                    (w != 0.0).then(|| (k, c * w))
                })
                .collect();
            if !list.is_empty() {
                norm1.insert((j, s), factor_norm_1d(&list, 1.0, rho_os)?);
            }
            banded.insert((j, s), list);
        }
    }
    // Candidate bands with every axis factor alive; an annihilated axis kills
    // A_s f and every A_s A_s' f with it.
    let mut bands: Vec<Vec<u32>> = vec![Vec::new()];
    for cand in &cands {
        bands = bands
            .into_iter()
            .flat_map(|s| {
                cand.iter().map(move |&sj| {
                    let mut t = s.clone();
                    t.push(sj);
                    t
                })
            })
            .collect();
    }
    bands.retain(|s| s.iter().enumerate().all(|(j, &sj)| !banded[&(j, sj)].is_empty()));
    let gp = profile.gamma_prime().to_vec();
    let weighted = |s: &[u32]| -> f64 { s.iter().zip(&gp).map(|(&sj, gj)| sj as f64 * gj).sum() };

    let mut out = Vec::with_capacity(ns.len());
    for &level in &levels {
        let per_band: Vec<f64> = bands
            .par_iter()
            .map(|s| -> Result<f64> {
                // clipped 3^d neighborhood, split by the qualification cut
                let mut qualifying = Vec::new();
                let mut neighbors = 0usize;
                let mut offsets = vec![-1i64; d];
                'cube: loop {
                    let sp: Option<Vec<u32>> = s
                        .iter()
                        .zip(&offsets)
                        .map(|(&sj, &o)| {
                            let v = sj as i64 + o;
                            (v >= 1).then_some(v as u32)
                        })
                        .collect();
                    if let Some(sp) = sp {
                        neighbors += 1;
                        if weighted(&sp) < level {
                            qualifying.push(sp);
                        }
                    }
                    let mut j = d;
                    loop {
                        if j == 0 {
                            break 'cube;
                        }
                        j -= 1;
                        if offsets[j] < 1 {
                            offsets[j] += 1;
                            for o in &mut offsets[j + 1..] {
                                *o = -1;
                            }
                            break;
                        }
                        offsets[j] = -1;
                    }
                }
                if qualifying.len() == neighbors {
                    return Ok(0.0);
                }
                if qualifying.is_empty() {
                    return Ok(s.iter().enumerate().map(|(j, &sj)| norm1[&(j, sj)]).product());
                }
                let mut pieces = vec![Rank1Piece {
                    weight: Complex64::new(1.0, 0.0),
                    factors: s.iter().enumerate().map(|(j, &sj)| banded[&(j, sj)].clone()).collect(),
                }];
                'neighbor: for sp in &qualifying {
                    let mut factors = Vec::with_capacity(d);
                    for (j, (&sj, &spj)) in s.iter().zip(sp).enumerate() {
                        let list: Vec<(i32, Complex64)> = banded[&(j, sj)]
                            .iter()
                            .filter_map(|&(k, c)| {
                                let w = as_weight_1d(spj, k);
                                (w != 0.0).then(|| (k, c * w))
                            })
                            .collect();
                        if list.is_empty() {
                            continue 'neighbor;
                        }
                        factors.push(list);
                    }
                    pieces.push(Rank1Piece { weight: Complex64::new(-1.0, 0.0), factors });
                }
                lp_norm_rank_sum(&pieces, 1.0, rho_os)
            })
            .collect::<Result<Vec<f64>>>()?;
        out.push(per_band.iter().sum());
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// sweep reports

/// One row of an error sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    /// Cross level.
    pub n: u32,
    /// Number of frequencies in the cross.
    pub cardinality: u128,
    /// Error of the hyperbolic partial sum in the chosen norm.
    pub value_ee: f64,
    /// Upper bound on the best approximation error.
    pub value_e_upper: f64,
    /// Certified lower bound on the best approximation error.
    pub value_e_lower: f64,
    /// Canonical norm name.
    pub space: String,
    /// Cross variant name.
    pub cross_variant: String,
    /// Seed recorded with the run.
    pub seed: u64,
}

/// Configuration of an error sweep over a level range.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    /// Input family; level-aware generators bind their `n` per row.
    pub generator: Generator,
    /// First level, inclusive.
    pub n_start: u32,
    /// Last level, inclusive.
    pub n_end: u32,
    /// Which weights derive the crosses from the generator's profile.
    pub variant: CrossVariant,
    /// The measured norm.
    pub space: NormSpec,
    /// Seed recorded in every row.
    pub seed: u64,
    /// Oversampling factor for quadrature-based norms.
    pub rho_os: usize,
}

/// Builds the error report of one function against one cross.
pub fn error_report(
    f: &PolyExpr,
    cross: &CrossSpec,
    space: &NormSpec,
    rho_os: usize,
    profile: Option<&SmoothnessProfile>,
    n: u32,
    variant: CrossVariant,
    seed: u64,
) -> Result<ErrorReport> {
    space.validate()?;
    // The kernel-mode block paths and the smoothing approximant operate on
    // explicit coefficients; expand structured input once when it fits.
    let expanded;
    let f = if space.mode == BlockMode::AKernel
        && matches!(f, PolyExpr::Tensor(_))
        && f.support_points() <= MAX_SPARSE_EXPANSION as u128
    {
        expanded = PolyExpr::Sparse(f.to_sparse()?);
        &expanded
    } else {
        f
    };
    let tail = f.tail_of_cross(cross)?;
    let (value_ee, value_e_upper, value_e_lower) = match (&space.kind, space.mode) {
        (NormKind::Lp { p }, _) => {
            let ee = lp_norm_auto(&tail, *p, rho_os)?;
            let mut lower = tail.max_coeff_modulus();
            if *p >= 2.0 {
                lower = lower.max(tail.l2_norm());
            }
            (ee, ee, lower.min(ee))
        }
        (_, BlockMode::Delta) => {
            // The restriction is exactly best in delta-block norms.
            let ee = space.evaluate(&tail, rho_os)?;
            (ee, ee, ee)
        }
        (_, BlockMode::AKernel) => {
            let ee = space.evaluate(&tail, rho_os)?;
            let mut upper = ee;
            if let (Some(profile), PolyExpr::Sparse(s)) = (profile, f) {
                let gp_sum: f64 = profile.gamma_prime().iter().sum();
                if (n as f64) > 3.0 * gp_sum {
                    let residual = vp_residual(s, n, profile)?;
                    let tn_err = space.evaluate(&PolyExpr::Sparse(residual), rho_os)?;
                    upper = upper.min(tn_err);
                }
            }
            let lower = tail.max_coeff_modulus().min(upper);
            (ee, upper, lower)
        }
    };
    Ok(ErrorReport {
        n,
        cardinality: cross_cardinality(cross),
        value_ee,
        value_e_upper,
        value_e_lower,
        space: space.name(),
        cross_variant: variant.name().to_string(),
        seed,
    })
}

/// Runs a sweep: one report per level, computed in parallel, ordered by `n`.
pub fn error_sweep(config: &SweepConfig) -> Result<Vec<ErrorReport>> {
    if config.n_end < config.n_start {
        return Ok(Vec::new());
    }
    let profile = config.generator.profile()?;
    (config.n_start..=config.n_end)
        .into_par_iter()
        .map(|n| {
            let f = config.generator.build(Some(n))?;
            let weights = match &profile {
                Some(p) => p.weights(config.variant),
                None => {
                    if config.variant != CrossVariant::Ones {
                        return Err(Error::InvalidArgument(
                            "generator has no smoothness profile; only the unit-weight cross applies".into(),
                        ));
                    }
                    vec![1.0; f.dim()]
                }
            };
            let cross = CrossSpec::new(n, weights)?;
            error_report(
                &f,
                &cross,
                &config.space,
                config.rho_os,
                profile.as_ref(),
                n,
                config.variant,
                config.seed,
            )
        })
        .collect()
}

// ---------------------------------------------------------------------------
// CSV interchange

/// Header of the sweep CSV schema.
pub const CSV_HEADER: &str = "n,cardinality,value_EE,value_E_upper,value_E_lower,space,cross_variant,seed";

/// Writes reports in the fixed CSV schema with 12-digit scientific values.
pub fn write_csv(reports: &[ErrorReport], w: &mut impl Write) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in reports {
        writeln!(
            w,
            "{},{},{:.12e},{:.12e},{:.12e},{},{},{}",
            r.n,
            r.cardinality,
            r.value_ee,
            r.value_e_upper,
            r.value_e_lower,
            r.space,
            r.cross_variant,
            r.seed
        )?;
    }
    Ok(())
}

/// Reads reports back from the CSV schema, verifying the header.
pub fn read_csv(r: impl BufRead) -> Result<Vec<ErrorReport>> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty CSV".into()))??;
    if header.trim() != CSV_HEADER {
        return Err(Error::Parse(format!("unexpected CSV header `{}`", header.trim())));
    }
    let mut out = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(Error::Parse(format!("row {}: expected 8 fields, got {}", idx + 2, fields.len())));
        }
        let bad = |what: &str| Error::Parse(format!("row {}: bad {what}", idx + 2));
        out.push(ErrorReport {
            n: fields[0].parse().map_err(|_| bad("level"))?,
            cardinality: fields[1].parse().map_err(|_| bad("cardinality"))?,
            value_ee: fields[2].parse().map_err(|_| bad("value_EE"))?,
            value_e_upper: fields[3].parse().map_err(|_| bad("value_E_upper"))?,
            value_e_lower: fields[4].parse().map_err(|_| bad("value_E_lower"))?,
            space: fields[5].to_string(),
            cross_variant: fields[6].to_string(),
            seed: fields[7].parse().map_err(|_| bad("seed"))?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::cross_blocks;
    use crate::kernels::{g1_poly, random_poly, AmplitudeLaw};
    use crate::norms::delta_block_norms;

    fn unit_cross(n: u32, d: usize) -> CrossSpec {
        CrossSpec::new(n, vec![1.0; d]).unwrap()
    }

    #[test]
    fn tail_error_examples() {
        let cross = unit_cross(4, 2);
        // f inside the cross
        let inside = random_poly(1, &cross_blocks(&cross), AmplitudeLaw::UnitModulus).unwrap();
        let f = PolyExpr::Sparse(inside);
        assert_eq!(fourier_tail_error(&f, &cross, 2.0, 2).unwrap(), 0.0);
        assert_eq!(lq_error(&f, &cross, 2.0, 2).unwrap(), 0.0);
        assert_eq!(best_error_block(&f, &cross, 2.0, 2).unwrap(), 0.0);
        // single far block
        let far = Block::new(vec![5, 2]).unwrap();
        let g = random_poly(2, &[far], AmplitudeLaw::UnitModulus).unwrap();
        let expect = g.l2_norm();
        let g = PolyExpr::Sparse(g);
        assert!((fourier_tail_error(&g, &cross, 2.0, 2).unwrap() - expect).abs() < 1e-12);
        // restriction idempotence: the tail of S(f) is 0
        let mixed = {
            let mut blocks = cross_blocks(&cross);
            blocks.push(Block::new(vec![5, 2]).unwrap());
            random_poly(3, &blocks, AmplitudeLaw::UnitModulus).unwrap()
        };
        let s_f = mixed.restrict_to_cross(&cross).unwrap();
        assert_eq!(
            fourier_tail_error(&PolyExpr::Sparse(s_f), &cross, 2.0, 2).unwrap(),
            0.0
        );
    }

    #[test]
    fn projection_is_exactly_best_in_block_norm() {
        // mixed support straddling the cross, several q
        let cross = unit_cross(5, 2);
        let mut blocks = cross_blocks(&cross);
        blocks.push(Block::new(vec![4, 3]).unwrap());
        blocks.push(Block::new(vec![1, 6]).unwrap());
        for seed in 0..10u64 {
            let f = PolyExpr::Sparse(
                random_poly(seed, &blocks, AmplitudeLaw::UnitModulus).unwrap(),
            );
            for q in [1.5, 2.0, 4.0] {
                let tail = fourier_tail_error(&f, &cross, q, 8).unwrap();
                let best = best_error_block(&f, &cross, q, 8).unwrap();
                assert!((tail - best).abs() <= 1e-12 * tail.max(1.0), "seed {seed}, q {q}");
            }
        }
    }

    #[test]
    fn near_best_sandwich_on_random_candidates() {
        // fourier_tail_error <= |f - t| for arbitrary t inside the cross
        let cross = unit_cross(5, 2);
        let f = {
            let mut blocks = cross_blocks(&cross);
            blocks.push(Block::new(vec![5, 1]).unwrap());
            PolyExpr::Sparse(random_poly(7, &blocks, AmplitudeLaw::UnitModulus).unwrap())
        };
        let tail = fourier_tail_error(&f, &cross, 2.0, 2).unwrap();
        for seed in 20..30u64 {
            let t = random_poly(seed, &cross_blocks(&cross), AmplitudeLaw::UnitModulus).unwrap();
            let diff = PolyExpr::Sparse(f.to_sparse().unwrap().sub(&t).unwrap());
            let dist = bq1_norm(&diff, 2.0, BlockMode::Delta, 2).unwrap();
            assert!(tail <= dist + 1e-12);
        }
    }

    #[test]
    fn tail_error_monotone_in_level() {
        let blocks: Vec<Block> = (1..=6)
            .flat_map(|a| (1..=6).map(move |b| Block::new(vec![a, b]).unwrap()))
            .collect();
        let f = PolyExpr::Sparse(random_poly(11, &blocks, AmplitudeLaw::UnitModulus).unwrap());
        let mut prev = f64::INFINITY;
        for n in 3..=12 {
            let v = fourier_tail_error(&f, &unit_cross(n, 2), 2.0, 2).unwrap();
            assert!(v <= prev + 1e-12, "n = {n}");
            prev = v;
        }
    }

    #[test]
    fn smoothing_approximant_identity_in_the_interior() {
        // Support deep inside the kept region: every band weight sums to 1.
        let profile = SmoothnessProfile::new(&[1.0, 1.0]).unwrap();
        let f = random_poly(
            4,
            &[Block::new(vec![1, 1]).unwrap(), Block::new(vec![2, 1]).unwrap()],
            AmplitudeLaw::UnitModulus,
        )
        .unwrap();
        let t = vp_approximant(&f, 12, &profile).unwrap();
        assert_eq!(t, f);
        let g = vp_residual(&f, 12, &profile).unwrap();
        assert!(g.is_empty());
    }

    #[test]
    fn smoothing_approximant_support_and_precondition() {
        let profile = SmoothnessProfile::new(&[1.0, 1.0]).unwrap();
        let blocks: Vec<Block> = (1..=7)
            .flat_map(|a| (1..=7).map(move |b| Block::new(vec![a, b]).unwrap()))
            .collect();
        let f = random_poly(9, &blocks, AmplitudeLaw::UnitModulus).unwrap();
        let t = vp_approximant(&f, 12, &profile).unwrap();
        let cross = profile.cross(12, CrossVariant::GammaPrime).unwrap();
        for (k, _) in t.iter() {
            assert!(cross.contains(&block_of(k).unwrap()));
        }
        // t + residual reconstructs f
        let g = vp_residual(&f, 12, &profile).unwrap();
        let sum = t.add(&g).unwrap();
        for (k, c) in f.iter() {
            assert!((sum.get(k) - c).norm() < 1e-12);
        }
        // n <= 3 gamma'(d) rejected
        assert!(vp_approximant(&f, 6, &profile).is_err());
    }

    #[test]
    fn residual_band_tail_domination() {
        // |f - t_n| in the kernel block norm is controlled by the band tail
        // above level n - 3 gamma'(d), up to a modest constant.
        let profile = SmoothnessProfile::new(&[1.0, 1.0]).unwrap();
        let f = crate::kernels::bernoulli_fejer_tensor(6, &[1.0, 1.0])
            .unwrap()
            .to_sparse()
            .unwrap();
        let n = 9u32;
        let g = vp_residual(&f, n, &profile).unwrap();
        let lhs = bq1_norm(&PolyExpr::Sparse(g), 1.0, BlockMode::AKernel, 4).unwrap();
        let gp_sum: f64 = profile.gamma_prime().iter().sum();
        let rhs = band_l1_above(
            &PolyExpr::Sparse(f),
            &profile,
            n as f64 - 3.0 * gp_sum,
            4,
        )
        .unwrap();
        assert!(lhs <= 3.0 * rhs, "lhs = {lhs}, rhs = {rhs}");
        assert!(rhs > 0.0);
    }

    #[test]
    fn lq_error_parseval_and_triangle() {
        let cross = unit_cross(4, 2);
        let blocks: Vec<Block> = (1..=5)
            .flat_map(|a| (1..=5).map(move |b| Block::new(vec![a, b]).unwrap()))
            .collect();
        let f = PolyExpr::Sparse(random_poly(13, &blocks, AmplitudeLaw::UnitModulus).unwrap());
        let tail = f.tail_of_cross(&cross).unwrap();
        let lq = lq_error(&f, &cross, 2.0, 2).unwrap();
        assert!((lq - tail.l2_norm()).abs() < 1e-12, "Parseval tail");
        for q in [2.0, 4.0] {
            let l = lq_error(&f, &cross, q, 8).unwrap();
            let b = fourier_tail_error(&f, &cross, q, 8).unwrap();
            assert!(l <= b * (1.0 + 1e-9), "q = {q}: {l} vs {b}");
        }
    }

    #[test]
    fn sweeps_and_csv_roundtrip() {
        let config = SweepConfig {
            generator: Generator::parse("g1(d=2,p=2,r1=1)").unwrap(),
            n_start: 4,
            n_end: 8,
            variant: CrossVariant::Ones,
            space: NormSpec::bq1(4.0),
            seed: 0,
            rho_os: 2,
        };
        let reports = error_sweep(&config).unwrap();
        assert_eq!(reports.len(), 5);
        // shell input: the partial sum vanishes, EE is the full block norm
        let (g, _) = g1_poly(4, 2, 2.0, 1.0).unwrap();
        let direct: f64 = delta_block_norms(&PolyExpr::Tensor(g), 4.0, 2)
            .unwrap()
            .iter()
            .map(|(_, v)| v)
            .sum();
        assert!((reports[0].value_ee - direct).abs() < 1e-10 * direct);
        // monotone decreasing EE
        for w in reports.windows(2) {
            assert!(w[1].value_ee < w[0].value_ee);
        }
        // delta mode: EE = E exactly
        for r in &reports {
            assert_eq!(r.value_ee, r.value_e_upper);
            assert_eq!(r.value_ee, r.value_e_lower);
            assert_eq!(r.space, "bq1:4");
            assert_eq!(r.cross_variant, "ones");
        }
        // byte-identical rerun
        let mut a = Vec::new();
        write_csv(&reports, &mut a).unwrap();
        let reports2 = error_sweep(&config).unwrap();
        let mut b = Vec::new();
        write_csv(&reports2, &mut b).unwrap();
        assert_eq!(a, b);
        // roundtrip: values carry 12 fractional digits, metadata is exact
        let back = read_csv(std::io::BufReader::new(&a[..])).unwrap();
        assert_eq!(back.len(), reports.len());
        for (x, y) in back.iter().zip(&reports) {
            assert_eq!((x.n, x.cardinality, x.seed), (y.n, y.cardinality, y.seed));
            assert_eq!((&x.space, &x.cross_variant), (&y.space, &y.cross_variant));
            for (a, b) in [
                (x.value_ee, y.value_ee),
                (x.value_e_upper, y.value_e_upper),
                (x.value_e_lower, y.value_e_lower),
            ] {
                assert!((a - b).abs() <= 1e-11 * b.abs().max(1e-300));
            }
        }
        // empty range
        let empty = SweepConfig { n_start: 5, n_end: 4, ..config };
        assert!(error_sweep(&empty).unwrap().is_empty());
    }

    #[test]
    fn csv_rejects_malformed_input() {
        assert!(read_csv(std::io::BufReader::new("".as_bytes())).is_err());
        assert!(read_csv(std::io::BufReader::new("a,b\n".as_bytes())).is_err());
        let good_header = format!("{CSV_HEADER}\n1,2,not_a_number,0,0,lq:2,ones,0\n");
        assert!(read_csv(std::io::BufReader::new(good_header.as_bytes())).is_err());
        let short = format!("{CSV_HEADER}\n1,2,3\n");
        assert!(read_csv(std::io::BufReader::new(short.as_bytes())).is_err());
    }

    #[test]
    fn separable_residual_matches_sparse_path() {
        // Small enough to expand: the rank-1 evaluation must agree with
        // the dense chain residual -> band -> L_1 to roundoff, across levels
        // that exercise all three band classes (cancelled, transition, pure
        // tail) and a level high enough that the residual vanishes.
        let axis_a = crate::kernels::jackson_bernoulli_axis(3, 1.0).unwrap();
        let axis_b: Vec<(i32, Complex64)> = (-9..=9)
            .filter(|&k| k != 0)
            .map(|k: i32| {
                let a = k.unsigned_abs() as f64;
                (k, Complex64::new(a.powf(-2.0), 0.3 / a))
            })
            .collect();
        let axes = vec![axis_a.clone(), axis_b.clone()];
        let profile = SmoothnessProfile::new(&[1.0, 2.0]).unwrap();
        let mut dense = SparseTrigPoly::new(2).unwrap();
        for &(ka, ca) in &axis_a {
            for &(kb, cb) in &axis_b {
                dense.set(vec![ka, kb], ca * cb).unwrap();
            }
        }
        let ns: Vec<u32> = (8..=12).chain([30]).collect();
        let got = separable_residual_band_l1(&axes, &ns, &profile, 2).unwrap();
        for (&n, &g) in ns.iter().zip(&got) {
            let r = vp_residual(&dense, n, &profile).unwrap();
            let want = bq1_norm(&PolyExpr::Sparse(r), 1.0, BlockMode::AKernel, 2).unwrap();
            assert!(
                (g - want).abs() <= 1e-11 * want.abs().max(1e-12),
                "n = {n}: {g} vs {want}"
            );
        }
        assert_eq!(got[ns.len() - 1], 0.0, "residual above the support is empty");

        // One-dimensional case and k = 0 invisibility.
        let mut axis_c = axis_a.clone();
        axis_c.push((0, Complex64::new(5.0, 0.0)));
        let profile1 = SmoothnessProfile::new(&[1.0]).unwrap();
        let got1 = separable_residual_band_l1(&[axis_c], &[4, 5], &profile1, 2).unwrap();
        let mut dense1 = SparseTrigPoly::new(1).unwrap();
        for &(k, c) in &axis_a {
            dense1.set(vec![k], c).unwrap();
        }
        for (&n, &g) in [4u32, 5].iter().zip(&got1) {
            let r = vp_residual(&dense1, n, &profile1).unwrap();
            let want = bq1_norm(&PolyExpr::Sparse(r), 1.0, BlockMode::AKernel, 2).unwrap();
            assert!((g - want).abs() <= 1e-11 * want.abs().max(1e-12), "n = {n}");
        }
    }

    #[test]
    fn kernel_mode_report_brackets() {
        let config = SweepConfig {
            generator: Generator::parse("fejer(r=1:1,m=6)").unwrap(),
            n_start: 8,
            n_end: 10,
            variant: CrossVariant::GammaPrime,
            space: NormSpec::bq1_kernel(1.0),
            seed: 0,
            rho_os: 2,
        };
        let reports = error_sweep(&config).unwrap();
        assert_eq!(reports.len(), 3);
        for r in &reports {
            assert!(r.value_e_lower <= r.value_e_upper + 1e-15);
            assert!(r.value_e_upper <= r.value_ee + 1e-12);
            assert!(r.value_ee > 0.0);
        }
    }
}
