//! Seeded verification suites shared by the CLI and the acceptance tests.
//!
//! Each suite evaluates one family of identities or sharp inequalities on a
//! deterministic corpus derived from a single seed, and reports records of
//! the form `{check, params, lhs, rhs, ratio, pass}`. Two-sided order
//! relations appear as bounded-ratio band checks; identities carry explicit
//! tolerances; inequalities with unspecified constants are tested against a
//! fixed generous surrogate constant recorded in the output.

use serde::Serialize;

use crate::analysis::{
    bernstein_ratio, lemma_a_reference, lemma_a_sum, lemma_b_check, nikolskii_check, power_fit,
    dirichlet_norm_1d,
};
use crate::approx::{best_error_block, fourier_tail_error};
use crate::error::{Error, Result};
use crate::index::{block_of, cross_blocks, Block, CrossSpec, SmoothnessProfile};
use crate::kernels::{as_weight, as_weight_1d, dn_poly, random_poly, AmplitudeLaw};
use crate::norms::{bq1_norm, lp_norm_dense, BlockMode};
use crate::trigpoly::{PolyExpr, SparseTrigPoly};
use num_complex::Complex64;
use rayon::prelude::*;

/// One verification record; the JSON report is an array of these.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    /// Name of the individual check.
    pub check: String,
    /// Parameters of the instance.
    pub params: serde_json::Value,
    /// Left-hand side (measured value).
    pub lhs: f64,
    /// Right-hand side (bound or expected value).
    pub rhs: f64,
    /// `lhs / rhs`, guarded against a zero bound.
    pub ratio: f64,
    /// Whether the check passed.
    pub pass: bool,
}

impl CheckRecord {
    fn new(check: &str, params: serde_json::Value, lhs: f64, rhs: f64, pass: bool) -> Self {
        let ratio = if rhs != 0.0 {
            lhs / rhs
        } else if lhs == 0.0 {
            0.0
        } else {
            f64::MAX
        };
        CheckRecord { check: check.to_string(), params, lhs, rhs, ratio, pass }
    }
}

/// The known suites, in canonical run order.
pub const SUITE_NAMES: &[&str] = &[
    "parseval",
    "partition",
    "nikolskii",
    "bernstein",
    "lemma_a",
    "lemma_b",
    "dirichlet",
    "nearbest",
];

/// Derives a per-case seed from the suite seed and a case index.
fn case_seed(seed: u64, idx: u64) -> u64 {
    seed.wrapping_mul(1_000_003).wrapping_add(idx)
}

/// Runs one named suite; unknown names are a usage error.
pub fn run_suite(name: &str, seed: u64) -> Result<Vec<CheckRecord>> {
    match name {
        "parseval" => suite_parseval(seed),
        "partition" => suite_partition(),
        "nikolskii" => suite_nikolskii(seed),
        "bernstein" => suite_bernstein(seed),
        "lemma_a" => suite_lemma_a(),
        "lemma_b" => suite_lemma_b(seed),
        "dirichlet" => suite_dirichlet(),
        "nearbest" => suite_nearbest(seed),
        other => Err(Error::InvalidArgument(format!(
            "unknown suite `{other}`; known suites: {}",
            SUITE_NAMES.join(", ")
        ))),
    }
}

/// Runs every suite in canonical order with the same seed.
pub fn all_suites(seed: u64) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    for name in SUITE_NAMES {
        out.extend(run_suite(name, seed)?);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// parseval: quadrature L2 equals coefficient l2

/// Corpus shape: dimension and unit-cross level per case index. The levels
/// keep every support below 10^4 frequencies.
fn parseval_case(idx: usize) -> (usize, u32) {
    match idx {
        0..=33 => (1, 13),
        34..=66 => (2, 9),
        _ => (3, 8),
    }
}

fn suite_parseval(seed: u64) -> Result<Vec<CheckRecord>> {
    (0..100usize)
        .into_par_iter()
        .map(|idx| {
            let (d, n) = parseval_case(idx);
            let s = case_seed(seed, idx as u64);
            let cross = CrossSpec::new(n, vec![1.0; d])?;
            let f = random_poly(s, &cross_blocks(&cross), AmplitudeLaw::UnitModulus)?;
            let lhs = lp_norm_dense(&f, 2.0, 2)?;
            let rhs = f.l2_norm();
            let pass = (lhs - rhs).abs() <= 1e-10 * rhs;
            Ok(CheckRecord::new(
                "parseval",
                serde_json::json!({"seed": s, "d": d, "n": n, "support": f.support_len()}),
                lhs,
                rhs,
                pass,
            ))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// partition: the band system sums to 1 and has 1-step adjacency

fn suite_partition() -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    let axis: Vec<i32> = (1..128).flat_map(|k| [k, -k]).collect();
    // candidate band indices never reach past one step from the home block
    let sum_at = |k: &[i32]| -> Result<f64> {
        let home = block_of(k)?;
        let comps = home.components();
        let d = comps.len();
        let mut total = 0.0;
        let mut offsets = vec![-1i64; d];
        'outer: loop {
            let mut s = Vec::with_capacity(d);
            let mut ok = true;
            for j in 0..d {
                let sj = comps[j] as i64 + offsets[j];
                if sj < 1 {
                    ok = false;
                    break;
                }
                s.push(sj as u32);
            }
            if ok {
                total += as_weight(&Block::new(s)?, k);
            }
            let mut j = d;
            loop {
                if j == 0 {
                    break 'outer;
                }
                j -= 1;
                if offsets[j] < 1 {
                    offsets[j] += 1;
                    for o in &mut offsets[j + 1..] {
                        *o = -1;
                    }
                    break;
                }
            }
        }
        Ok(total)
    };
    // d = 1
    let mut dev1 = 0.0f64;
    for &k in &axis {
        dev1 = dev1.max((sum_at(&[k])? - 1.0).abs());
    }
    out.push(CheckRecord::new(
        "partition_sum",
        serde_json::json!({"d": 1, "k_range": "1 <= |k| < 128"}),
        dev1,
        1e-12,
        dev1 <= 1e-12,
    ));
    // d = 2
    let dev2 = axis
        .par_iter()
        .map(|&k1| {
            let mut dev = 0.0f64;
            for &k2 in &axis {
                dev = dev.max((sum_at(&[k1, k2]).unwrap() - 1.0).abs());
            }
            dev
        })
        .reduce(|| 0.0, f64::max);
    out.push(CheckRecord::new(
        "partition_sum",
        serde_json::json!({"d": 2, "k_range": "1 <= |k_j| < 128"}),
        dev2,
        1e-12,
        dev2 <= 1e-12,
    ));
    // d = 3
    let dev3 = axis
        .par_iter()
        .map(|&k1| {
            let mut dev = 0.0f64;
            for &k2 in &axis {
                for &k3 in &axis {
                    dev = dev.max((sum_at(&[k1, k2, k3]).unwrap() - 1.0).abs());
                }
            }
            dev
        })
        .reduce(|| 0.0, f64::max);
    out.push(CheckRecord::new(
        "partition_sum",
        serde_json::json!({"d": 3, "k_range": "1 <= |k_j| < 128"}),
        dev3,
        1e-12,
        dev3 <= 1e-12,
    ));
    // adjacency: bands two or more steps apart have disjoint supports, so
    // the multiplier product (the convolution's coefficient map) vanishes
    let mut worst = 0.0f64;
    for s in 1u32..=8 {
        for s2 in s + 2..=10 {
            for k in 1..(1i32 << 11) {
                worst = worst.max((as_weight_1d(s, k) * as_weight_1d(s2, k)).abs());
            }
        }
    }
    out.push(CheckRecord::new(
        "partition_adjacency",
        serde_json::json!({"pairs": "|s - s'| >= 2, s <= 8", "k_range": "1 <= k < 2048"}),
        worst,
        0.0,
        worst == 0.0,
    ));
    Ok(out)
}

// ---------------------------------------------------------------------------
// nikolskii: different-metric comparison with the explicit box constant

fn suite_nikolskii(seed: u64) -> Result<Vec<CheckRecord>> {
    let pairs = [(1.0f64, 2.0f64), (2.0, 4.0)];
    let mut out = Vec::new();
    for (pair_idx, &(q, p)) in pairs.iter().enumerate() {
        let records: Vec<CheckRecord> = (0..200usize)
            .into_par_iter()
            .map(|i| {
                let s = case_seed(seed, (pair_idx * 200 + i) as u64);
                let n = 4 + (i % 3) as u32;
                let cross = CrossSpec::new(n, vec![1.0, 1.0])?;
                let t = random_poly(s, &cross_blocks(&cross), AmplitudeLaw::UnitModulus)?;
                let degrees: Vec<u32> =
                    t.max_freq().iter().map(|&m| m.max(1) as u32).collect();
                let (lhs, rhs, pass) = nikolskii_check(&t, p, q, &degrees, 4)?;
                Ok(CheckRecord::new(
                    "nikolskii",
                    serde_json::json!({"p": p, "q": q, "seed": s, "n": n}),
                    lhs,
                    rhs,
                    pass,
                ))
            })
            .collect::<Result<_>>()?;
        out.extend(records);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// bernstein: derivative growth on shell probes and random polynomials

fn suite_bernstein(seed: u64) -> Result<Vec<CheckRecord>> {
    let (p, r1) = (2.0, 1.0);
    let levels: Vec<u32> = (4..=12).collect();
    let mut out = Vec::new();
    let mut constants = Vec::new();
    for &n in &levels {
        let probe = dn_poly(n, 2)?.to_sparse()?;
        let c = bernstein_ratio(&probe, p, r1, 2)? / (n as f64 * r1).exp2();
        constants.push(c);
        out.push(CheckRecord::new(
            "bernstein_probe",
            serde_json::json!({"n": n, "p": p, "r1": r1}),
            c,
            1.0,
            c <= 1.0,
        ));
    }
    let top = constants.iter().cloned().fold(0.0, f64::max);
    let bot = constants.iter().cloned().fold(f64::INFINITY, f64::min);
    out.push(CheckRecord::new(
        "bernstein_band",
        serde_json::json!({"n_range": [4, 12], "p": p, "r1": r1}),
        top / bot,
        3.0,
        top / bot <= 3.0,
    ));
    // random polynomials never exceed the probe family's upper constant
    let randoms: Vec<CheckRecord> = levels
        .par_iter()
        .map(|&n| {
            let cross = CrossSpec::new(n, vec![1.0, 1.0])?;
            let blocks = cross_blocks(&cross);
            let mut worst = 0.0f64;
            for i in 0..100u64 {
                let s = case_seed(seed, n as u64 * 1000 + i);
                let t = random_poly(s, &blocks, AmplitudeLaw::UnitModulus)?;
                let c = bernstein_ratio(&t, p, r1, 2)? / (n as f64 * r1).exp2();
                worst = worst.max(c);
            }
            Ok(CheckRecord::new(
                "bernstein_random_max",
                serde_json::json!({"n": n, "cases": 100, "p": p, "r1": r1}),
                worst,
                top,
                worst <= top,
            ))
        })
        .collect::<Result<_>>()?;
    out.extend(randoms);
    Ok(out)
}

// ---------------------------------------------------------------------------
// lemma_a: layer weight sums against the predicted band

fn suite_lemma_a() -> Result<Vec<CheckRecord>> {
    let configs: [(f64, Vec<f64>); 2] = [(1.0, vec![1.0, 1.0]), (1.0, vec![1.0, 2.0])];
    let mut out = Vec::new();
    for (beta, r) in configs {
        let profile = SmoothnessProfile::new(&r)?;
        let mut ratios = Vec::new();
        for l in 5..=24u32 {
            let v = lemma_a_sum(beta, &profile, l as f64, 1e-12)?;
            ratios.push(v / lemma_a_reference(beta, &profile, l as f64));
        }
        let top = ratios.iter().cloned().fold(0.0, f64::max);
        let bot = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        out.push(CheckRecord::new(
            "lemma_a_band",
            serde_json::json!({
                "beta": beta,
                "r": r,
                "gamma_prime": profile.gamma_prime(),
                "l_range": [5, 24],
                "ratio_min": bot,
                "ratio_max": top,
            }),
            top / bot,
            2.5,
            top / bot <= 2.5,
        ));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// lemma_b: blockwise summation bound with a recorded surrogate constant

/// Surrogate constant for the blockwise summation bound (the sharp constant
/// is not specified; the corpus band is the testable claim).
const LEMMA_B_SURROGATE: f64 = 16.0;

fn suite_lemma_b(seed: u64) -> Result<Vec<CheckRecord>> {
    let (p, q) = (2.0, 4.0);
    let blocks: Vec<Block> = (1..=4)
        .flat_map(|a| (1..=4).map(move |b| Block::new(vec![a, b]).unwrap()))
        .collect();
    let mut out: Vec<CheckRecord> = (0..100usize)
        .into_par_iter()
        .map(|i| {
            let s = case_seed(seed, i as u64);
            let f = random_poly(s, &blocks, AmplitudeLaw::UnitModulus)?;
            let (lhs, rhs, ratio) = lemma_b_check(&PolyExpr::Sparse(f), p, q, 2)?;
            Ok(CheckRecord::new(
                "lemma_b",
                serde_json::json!({"p": p, "q": q, "seed": s}),
                lhs,
                rhs * LEMMA_B_SURROGATE,
                ratio <= LEMMA_B_SURROGATE,
            ))
        })
        .collect::<Result<_>>()?;
    // sharpness probe: the all-ones (Dirichlet-type) spectrum
    let mut dirichlet = SparseTrigPoly::new(2)?;
    for b in &blocks {
        for k in crate::index::rho_block(b) {
            dirichlet.set(k, Complex64::new(1.0, 0.0))?;
        }
    }
    let (lhs, rhs, ratio) = lemma_b_check(&PolyExpr::Sparse(dirichlet), p, q, 2)?;
    out.push(CheckRecord::new(
        "lemma_b_dirichlet",
        serde_json::json!({"p": p, "q": q}),
        lhs,
        rhs * LEMMA_B_SURROGATE,
        ratio <= LEMMA_B_SURROGATE,
    ));
    Ok(out)
}

// ---------------------------------------------------------------------------
// dirichlet: kernel norm scaling in m

fn suite_dirichlet() -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    for q in [4.0 / 3.0, 2.0, 4.0] {
        let pts: Vec<(f64, f64)> = (4..=14u32)
            .map(|e| {
                let m = 1u32 << e;
                Ok((m as f64, dirichlet_norm_1d(m, q, 8)?))
            })
            .collect::<Result<_>>()?;
        let fit = power_fit(&pts)?;
        let predicted = 1.0 - 1.0 / q;
        out.push(CheckRecord::new(
            "dirichlet_exponent",
            serde_json::json!({"q": q, "m_range": ["2^4", "2^14"], "fitted": fit.exponent}),
            (fit.exponent - predicted).abs(),
            0.03,
            (fit.exponent - predicted).abs() <= 0.03,
        ));
    }
    let mut dev = 0.0f64;
    for e in 4..=14u32 {
        let m = 1u32 << e;
        let v = dirichlet_norm_1d(m, 2.0, 8)?;
        let exact = (2.0 * m as f64 + 1.0).sqrt();
        dev = dev.max((v - exact).abs() / exact);
    }
    out.push(CheckRecord::new(
        "dirichlet_parseval",
        serde_json::json!({"q": 2.0, "m_range": ["2^4", "2^14"]}),
        dev,
        1e-10,
        dev <= 1e-10,
    ));
    Ok(out)
}

// ---------------------------------------------------------------------------
// nearbest: projection optimality in the block-sum norm

/// Brute-force minimizer of `|f - t|` in the delta block-sum norm over
/// polynomials `t` supported inside the cross, by cyclic golden-section
/// descent on the real coordinates of `t`. The objective is convex, so the
/// attained value converges to the true minimum.
fn brute_force_best_block(
    f: &SparseTrigPoly,
    cross: &CrossSpec,
    q: f64,
    rho_os: usize,
) -> Result<f64> {
    let freqs: Vec<Vec<i32>> = cross_blocks(cross)
        .iter()
        .flat_map(crate::index::rho_block)
        .collect();
    // coordinates: (re, im) per kept frequency
    let mut coords = vec![0.0f64; 2 * freqs.len()];
    let objective = |coords: &[f64]| -> Result<f64> {
        let mut diff = f.clone();
        for (i, k) in freqs.iter().enumerate() {
            diff.add_to(k.clone(), -Complex64::new(coords[2 * i], coords[2 * i + 1]))?;
        }
        bq1_norm(&PolyExpr::Sparse(diff), q, BlockMode::Delta, rho_os)
    };
    let scale = f.max_coeff_modulus().max(1.0) * 2.0;
    let golden = 0.5 * (5.0f64.sqrt() - 1.0);
    let mut best = objective(&coords)?;
    for _sweep in 0..60 {
        let before = best;
        for i in 0..coords.len() {
            // golden-section line search on one coordinate
            let (mut lo, mut hi) = (coords[i] - scale, coords[i] + scale);
            let mut x1 = hi - golden * (hi - lo);
            let mut x2 = lo + golden * (hi - lo);
            let eval = |x: f64, coords: &mut Vec<f64>| -> Result<f64> {
                coords[i] = x;
                objective(coords)
            };
            let mut f1 = eval(x1, &mut coords)?;
            let mut f2 = eval(x2, &mut coords)?;
            while hi - lo > 1e-9 * scale {
                if f1 <= f2 {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - golden * (hi - lo);
                    f1 = eval(x1, &mut coords)?;
                } else {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + golden * (hi - lo);
                    f2 = eval(x2, &mut coords)?;
                }
            }
            let x = 0.5 * (lo + hi);
            let v = eval(x, &mut coords)?;
            if v < best {
                best = v;
            } else {
                // keep the best endpoint instead
                let (xb, vb) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
                if vb < best {
                    coords[i] = xb;
                    best = vb;
                } else {
                    coords[i] = x;
                }
            }
        }
        if before - best <= 1e-12 * best.max(1e-12) {
            break;
        }
    }
    Ok(best)
}

fn suite_nearbest(seed: u64) -> Result<Vec<CheckRecord>> {
    let qs = [1.5, 2.0, 4.0];
    let mut out: Vec<CheckRecord> = (0..100usize)
        .into_par_iter()
        .map(|i| {
            let s = case_seed(seed, i as u64);
            let q = qs[i % 3];
            let n = 4 + (i % 2) as u32;
            let cross = CrossSpec::new(n, vec![1.0, 1.0])?;
            let wide = CrossSpec::new(n + 2, vec![1.0, 1.0])?;
            let f =
                PolyExpr::Sparse(random_poly(s, &cross_blocks(&wide), AmplitudeLaw::UnitModulus)?);
            let tail = fourier_tail_error(&f, &cross, q, 4)?;
            let best = best_error_block(&f, &cross, q, 4)?;
            let pass = (tail - best).abs() <= 1e-12 * tail.max(1.0);
            Ok(CheckRecord::new(
                "nearbest_projection",
                serde_json::json!({"seed": s, "q": q, "n": n}),
                best,
                tail,
                pass,
            ))
        })
        .collect::<Result<_>>()?;
    // one-dimensional instances against the brute-force minimizer
    for (idx, q) in [1.5, 2.0, 3.0].into_iter().enumerate() {
        let s = case_seed(seed, 1000 + idx as u64);
        let blocks = [Block::new(vec![1]).unwrap(), Block::new(vec![2]).unwrap()];
        let f = random_poly(s, &blocks, AmplitudeLaw::UnitModulus)?;
        let cross = CrossSpec::new(2, vec![1.0])?;
        let library = best_error_block(&PolyExpr::Sparse(f.clone()), &cross, q, 8)?;
        let brute = brute_force_best_block(&f, &cross, q, 8)?;
        out.push(CheckRecord::new(
            "nearbest_brute_force",
            serde_json::json!({"seed": s, "q": q, "d": 1, "coeffs": f.support_len()}),
            library,
            brute,
            (library - brute).abs() <= 1e-6 * brute.max(1.0),
        ));
    }
    Ok(out)
}
