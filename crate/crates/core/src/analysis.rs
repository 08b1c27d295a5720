//! Predicted decay rates, least-squares rate fitting, and inequality probes.
//!
//! Every asymptotic claim under test has the shape
//! `value(n) ~ C * 2^{-a n} * n^b`, so the whole verification surface reduces
//! to fitting `(a, b)` from sweep data and comparing against the predicted
//! exponent pair of the matching theorem. Two conventions apply throughout:
//!
//! * two-sided order relations are always tested as bounded-ratio bands
//!   (above and below), never as equalities;
//! * fits exclude the two smallest levels of a sweep (preasymptotic
//!   transient) via [`rate_fit_skip_transient`].
//!
//! The inequality probes (Nikolskii, Bernstein, blockwise summation, weight
//! sums over hyperbolic layers, Dirichlet-kernel scaling) evaluate both sides
//! of the corresponding sharp inequality on concrete polynomials.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::index::SmoothnessProfile;
use crate::norms::{delta_block_norms, factor_norm_1d, lp_norm_auto, lp_norm_dense};
use crate::trigpoly::{PolyExpr, SparseTrigPoly};

/// Fitted parameters of the model `value = C * 2^{-a n} * n^b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    /// Dyadic exponent (decay per level).
    pub a: f64,
    /// Logarithmic exponent.
    pub b: f64,
    /// Base-2 logarithm of the constant.
    pub log2_c: f64,
    /// RMS misfit of `log2 value`.
    pub residual: f64,
    /// Number of points the fit used.
    pub n_used: usize,
}

/// Fitted parameters of the pure power model `value = C * m^e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFit {
    /// The exponent `e`.
    pub exponent: f64,
    /// Base-2 logarithm of the constant.
    pub log2_c: f64,
    /// RMS misfit of `log2 value`.
    pub residual: f64,
}

/// Solves a small symmetric linear system by Gaussian elimination with
/// partial pivoting; the pivot threshold rejects collinear designs.
fn solve_dense(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Result<Vec<f64>> {
    let k = rhs.len();
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        if m[pivot][col].abs() < 1e-12 {
            return Err(Error::InvalidArgument(
                "degenerate design matrix: levels do not separate the model terms".into(),
            ));
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..k {
            let f = m[row][col] / m[col][col];
            for c in col..k {
                m[row][c] -= f * m[col][c];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; k];
    for row in (0..k).rev() {
        let mut v = rhs[row];
        for c in row + 1..k {
            v -= m[row][c] * x[c];
        }
        x[row] = v / m[row][row];
    }
    Ok(x)
}

fn least_squares(rows: &[Vec<f64>], ys: &[f64]) -> Result<(Vec<f64>, f64)> {
    let k = rows[0].len();
    let mut normal = vec![vec![0.0; k]; k];
    let mut rhs = vec![0.0; k];
    for (row, &y) in rows.iter().zip(ys) {
        for i in 0..k {
            for j in 0..k {
                normal[i][j] += row[i] * row[j];
            }
            rhs[i] += row[i] * y;
        }
    }
    let x = solve_dense(normal, rhs)?;
    let mut sq = 0.0;
    for (row, &y) in rows.iter().zip(ys) {
        let fit: f64 = row.iter().zip(&x).map(|(r, c)| r * c).sum();
        sq += (y - fit) * (y - fit);
    }
    Ok((x, (sq / ys.len() as f64).sqrt()))
}

/// Least-squares fit of `log2 value = log2C - a*n + b*log2 n`.
///
/// Needs at least 4 points with positive values; collinear designs (fewer
/// than three distinct levels) are rejected.
pub fn rate_fit(points: &[(u32, f64)]) -> Result<RateFit> {
    if points.len() < 4 {
        return Err(Error::InvalidArgument(format!(
            "rate fit needs at least 4 points, got {}",
            points.len()
        )));
    }
    let mut rows = Vec::with_capacity(points.len());
    let mut ys = Vec::with_capacity(points.len());
    for &(n, v) in points {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidArgument(format!("nonpositive value {v} at level {n}")));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("level 0 has no log factor".into()));
        }
        rows.push(vec![1.0, -(n as f64), (n as f64).log2()]);
        ys.push(v.log2());
    }
    let (x, residual) = least_squares(&rows, &ys)?;
    Ok(RateFit { a: x[1], b: x[2], log2_c: x[0], residual, n_used: points.len() })
}

/// [`rate_fit`] after dropping the two smallest levels (the preasymptotic
/// transient of a sweep).
pub fn rate_fit_skip_transient(points: &[(u32, f64)]) -> Result<RateFit> {
    let mut sorted = points.to_vec();
    sorted.sort_by_key(|&(n, _)| n);
    if sorted.len() < 6 {
        return Err(Error::InvalidArgument(format!(
            "transient-skipping fit needs at least 6 points, got {}",
            sorted.len()
        )));
    }
    rate_fit(&sorted[2..])
}

/// Least-squares fit of `log2 value = log2C + e*log2 m`.
pub fn power_fit(points: &[(f64, f64)]) -> Result<PowerFit> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument("power fit needs at least 2 points".into()));
    }
    let mut rows = Vec::with_capacity(points.len());
    let mut ys = Vec::with_capacity(points.len());
    for &(m, v) in points {
        if !(m > 0.0 && v > 0.0) || !m.is_finite() || !v.is_finite() {
            return Err(Error::InvalidArgument(format!("power fit needs positive data, got ({m}, {v})")));
        }
        rows.push(vec![1.0, m.log2()]);
        ys.push(v.log2());
    }
    let (x, residual) = least_squares(&rows, &ys)?;
    Ok(PowerFit { exponent: x[1], log2_c: x[0], residual })
}

// ---------------------------------------------------------------------------
// predicted rates

/// Identifies which asymptotic statement predicts the exponent pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TheoremId {
    /// Block-sum space at the source exponent, gamma'-cross, `d >= 2`.
    T1,
    /// One-dimensional counterpart of [`TheoremId::T1`].
    T1d1,
    /// Source exponent 1, block-sum space at 1, gamma'-cross, `d >= 2`.
    T2,
    /// `2 <= p < q`, block-sum space, gamma-cross.
    T3,
    /// `q <= 2 < p` side, block-sum space, gamma'-cross.
    T4,
    /// Gamma-cross variant of [`TheoremId::T1`]: the log power uses `d`.
    Remark1,
    /// Gamma-cross variant of [`TheoremId::T2`]: the log power uses `d`.
    Remark2,
    /// Same-exponent approximation in `L_p`: pure dyadic decay.
    G,
    /// `p < q` approximation in `L_q`: shifted pure dyadic decay.
    D,
    /// `q < p` approximation in `L_q`: pure dyadic decay.
    E1dim,
}

impl TheoremId {
    /// Parses the identifier used by the CLI (`T1`, `T1d1`, ..., case-insensitive).
    pub fn parse(text: &str) -> Result<Self> {
        Ok(match text.to_ascii_lowercase().as_str() {
            "t1" => TheoremId::T1,
            "t1d1" => TheoremId::T1d1,
            "t2" => TheoremId::T2,
            "t3" => TheoremId::T3,
            "t4" => TheoremId::T4,
            "remark1" => TheoremId::Remark1,
            "remark2" => TheoremId::Remark2,
            "g" => TheoremId::G,
            "d" => TheoremId::D,
            "e1dim" => TheoremId::E1dim,
            other => return Err(Error::Parse(format!("unknown theorem id `{other}`"))),
        })
    }

    /// Canonical identifier.
    pub fn name(&self) -> &'static str {
        match self {
            TheoremId::T1 => "T1",
            TheoremId::T1d1 => "T1d1",
            TheoremId::T2 => "T2",
            TheoremId::T3 => "T3",
            TheoremId::T4 => "T4",
            TheoremId::Remark1 => "Remark1",
            TheoremId::Remark2 => "Remark2",
            TheoremId::G => "G",
            TheoremId::D => "D",
            TheoremId::E1dim => "E1dim",
        }
    }
}

/// One rate prediction: statement id plus the parameters it reads.
#[derive(Debug, Clone)]
pub struct RateCase {
    /// Which statement supplies the exponents.
    pub id: TheoremId,
    /// Source integrability exponent.
    pub p: f64,
    /// Target integrability exponent.
    pub q: f64,
    /// Smoothness profile; its dimension, minimal order, and multiplicity
    /// feed the exponent formulas.
    pub profile: SmoothnessProfile,
}

fn hypothesis(case: &RateCase, detail: String) -> Error {
    Error::Hypothesis { case: case.id.name().to_string(), detail }
}

/// The predicted `(a, b)` of `value ~ C * 2^{-a n} * n^b` for the case, or a
/// hypothesis error naming the violated constraint.
pub fn theory_rate(case: &RateCase) -> Result<(f64, f64)> {
    let d = case.profile.dim();
    let r1 = case.profile.r1();
    let nu = case.profile.nu() as f64;
    let (p, q) = (case.p, case.q);
    if !p.is_finite() || !q.is_finite() {
        return Err(hypothesis(case, "exponents must be finite".into()));
    }
    if r1 <= 0.0 {
        return Err(hypothesis(case, format!("needs r_1 > 0, got {r1}")));
    }
    let xi = 0.5f64.max(1.0 - 1.0 / p);
    let need = |ok: bool, what: &str| -> Result<()> {
        if ok {
            Ok(())
        } else {
            Err(hypothesis(case, what.to_string()))
        }
    };
    match case.id {
        TheoremId::T1 | TheoremId::Remark1 => {
            need(d >= 2, "needs d >= 2")?;
            need(p > 1.0, "needs p > 1")?;
            need(q == p, "measures the block-sum space at the source exponent (q = p)")?;
            let count = if case.id == TheoremId::T1 { nu - 1.0 } else { d as f64 - 1.0 };
            Ok((r1, count * xi))
        }
        TheoremId::T1d1 => {
            need(d == 1, "is the one-dimensional statement (d = 1)")?;
            need(p > 1.0, "needs p > 1")?;
            need(q == p, "measures the block-sum space at the source exponent (q = p)")?;
            Ok((r1, 0.0))
        }
        TheoremId::T2 | TheoremId::Remark2 => {
            need(d >= 2, "needs d >= 2")?;
            need(p == 1.0, "is the p = 1 statement")?;
            need(q == 1.0, "measures the block-sum space at exponent 1")?;
            let count = if case.id == TheoremId::T2 { nu - 1.0 } else { d as f64 - 1.0 };
            Ok((r1, count))
        }
        TheoremId::T3 => {
            need(d >= 2, "needs d >= 2")?;
            need(p >= 2.0, "needs p >= 2")?;
            need(p < q, "needs p < q")?;
            need(r1 > 1.0 / p - 1.0 / q, "needs r_1 > 1/p - 1/q")?;
            Ok((r1 - 1.0 / p + 1.0 / q, (nu - 1.0) * (1.0 - 1.0 / p)))
        }
        TheoremId::T4 => {
            need(d >= 2, "needs d >= 2")?;
            need((1.0..=2.0).contains(&q), "needs 1 <= q <= 2")?;
            need(q < p, "needs q < p")?;
            Ok((r1, (nu - 1.0) / 2.0))
        }
        TheoremId::G => {
            need(d >= 2, "needs d >= 2")?;
            need(p > 1.0, "needs p > 1")?;
            need(q == p, "measures L_p itself (q = p)")?;
            Ok((r1, 0.0))
        }
        TheoremId::D => {
            need(d >= 2, "needs d >= 2")?;
            need(p > 1.0, "needs p > 1")?;
            need(p < q, "needs p < q")?;
            need(r1 > 1.0 / p - 1.0 / q, "needs r_1 > 1/p - 1/q")?;
            Ok((r1 - 1.0 / p + 1.0 / q, 0.0))
        }
        TheoremId::E1dim => {
            need(q > 1.0, "needs q > 1")?;
            need(q < p, "needs q < p")?;
            Ok((r1, 0.0))
        }
    }
}

// ---------------------------------------------------------------------------
// weight sums over hyperbolic layers

fn for_each_composition(total: u32, buf: &mut Vec<u32>, d: usize, f: &mut impl FnMut(&[u32])) {
    if d == 1 {
        buf.push(total);
        f(buf);
        buf.pop();
        return;
    }
    for first in 1..=total - (d as u32 - 1) {
        buf.push(first);
        for_each_composition(total - first, buf, d - 1, f);
        buf.pop();
    }
}

/// Truncated value of `sum 2^{-beta (s, gamma)}` over indices `s` in `N^d`
/// with `(s, gamma') >= l`. Shells of constant `|s|_1` are added until a
/// shell contributes less than `eps` times the running total; the qualifying
/// set is upward closed, so no later shell can revive the sum.
pub fn lemma_a_sum(beta: f64, profile: &SmoothnessProfile, l: f64, eps: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::InvalidArgument(format!("needs beta > 0, got {beta}")));
    }
    if !(l >= 1.0) {
        return Err(Error::InvalidArgument(format!("needs l >= 1, got {l}")));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("needs eps > 0, got {eps}")));
    }
    let d = profile.dim();
    let gamma = profile.gamma().to_vec();
    let gp = profile.gamma_prime().to_vec();
    let mut total = 0.0f64;
    let mut buf = Vec::with_capacity(d);
    for t in d as u32.. {
        let mut shell = 0.0f64;
        for_each_composition(t, &mut buf, d, &mut |s| {
            let dot_gp: f64 = s.iter().zip(&gp).map(|(&sj, g)| sj as f64 * g).sum();
            if dot_gp >= l {
                let dot_g: f64 = s.iter().zip(&gamma).map(|(&sj, g)| sj as f64 * g).sum();
                shell += (-beta * dot_g).exp2();
            }
        });
        total += shell;
        if total > 0.0 && shell < eps * total {
            break;
        }
    }
    Ok(total)
}

/// The comparison value `2^{-beta l} l^{nu - 1}` of the layer-sum estimate.
pub fn lemma_a_reference(beta: f64, profile: &SmoothnessProfile, l: f64) -> f64 {
    (-beta * l).exp2() * l.powi(profile.nu() as i32 - 1)
}

// ---------------------------------------------------------------------------
// inequality probes

/// `L_p` norm of a sparse polynomial: Parseval at `p = 2`, quadrature else.
fn sparse_lp(t: &SparseTrigPoly, p: f64, rho_os: usize) -> Result<f64> {
    if p == 2.0 {
        Ok(t.l2_norm())
    } else {
        lp_norm_dense(t, p, rho_os)
    }
}

/// Evaluates both sides of the box Nikolskii inequality
/// `|t|_p <= 2^d * prod n_j^{1/q - 1/p} * |t|_q` for `1 <= q < p < infinity`
/// and a polynomial supported in `|k_j| <= n_j`.
pub fn nikolskii_check(
    t: &SparseTrigPoly,
    p: f64,
    q: f64,
    degrees: &[u32],
    rho_os: usize,
) -> Result<(f64, f64, bool)> {
    if !(1.0 <= q && q < p && p.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "needs 1 <= q < p < infinity, got q = {q}, p = {p}"
        )));
    }
    if degrees.len() != t.dim() {
        return Err(Error::DimensionMismatch { expected: t.dim(), got: degrees.len() });
    }
    if degrees.iter().any(|&n| n == 0) {
        return Err(Error::InvalidArgument("box degrees must be at least 1".into()));
    }
    for (k, _) in t.iter() {
        for (kj, &nj) in k.iter().zip(degrees) {
            if kj.unsigned_abs() > nj {
                return Err(Error::Hypothesis {
                    case: "support inside the degree box".into(),
                    detail: format!("frequency {k:?} exceeds the box {degrees:?}"),
                });
            }
        }
    }
    let lhs = sparse_lp(t, p, rho_os)?;
    let factor: f64 = degrees.iter().map(|&n| (n as f64).powf(1.0 / q - 1.0 / p)).product();
    let rhs = (t.dim() as f64).exp2() * factor * sparse_lp(t, q, rho_os)?;
    Ok((lhs, rhs, lhs <= rhs))
}

/// The ratio `|t^(r)|_p / |t|_p` for the isotropic derivative of order
/// `r = (r_1, ..., r_1)` with classical phases `alpha = r`.
pub fn bernstein_ratio(t: &SparseTrigPoly, p: f64, r1: f64, rho_os: usize) -> Result<f64> {
    if t.is_empty() {
        return Err(Error::InvalidArgument("the zero polynomial has no derivative ratio".into()));
    }
    if !(r1 >= 0.0) {
        return Err(Error::InvalidArgument(format!("needs r_1 >= 0, got {r1}")));
    }
    let order = vec![r1; t.dim()];
    let deriv = t.weyl_derivative(&order, &order)?;
    let denom = sparse_lp(t, p, rho_os)?;
    Ok(sparse_lp(&deriv, p, rho_os)? / denom)
}

/// Evaluates both sides of the blockwise summation inequality
/// `|f|_q^q <= C * sum_s |delta_s f|_p^q * 2^{|s|_1 (1/p - 1/q) q}` for
/// `1 <= p < q < infinity`; returns `(lhs, rhs_sum, lhs/rhs_sum)`.
pub fn lemma_b_check(f: &PolyExpr, p: f64, q: f64, rho_os: usize) -> Result<(f64, f64, f64)> {
    if !(1.0 <= p && p < q && q.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "needs 1 <= p < q < infinity, got p = {p}, q = {q}"
        )));
    }
    let lhs = lp_norm_auto(f, q, rho_os)?.powf(q);
    let rhs: f64 = delta_block_norms(f, p, rho_os)?
        .into_iter()
        .map(|(s, v)| v.powf(q) * (s.level() as f64 * (1.0 / p - 1.0 / q) * q).exp2())
        .sum();
    let ratio = if rhs == 0.0 { 0.0 } else { lhs / rhs };
    Ok((lhs, rhs, ratio))
}

/// Norm of the one-dimensional Dirichlet kernel `sum_{|k| <= m} e^{ikx}`.
pub fn dirichlet_norm_1d(m: u32, q: f64, rho_os: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidArgument("needs m >= 1".into()));
    }
    if !(q > 1.0) {
        return Err(Error::InvalidArgument(format!("needs q > 1, got {q}")));
    }
    let coeffs: Vec<(i32, Complex64)> = (-(m as i32)..=m as i32)
        .map(|k| (k, Complex64::new(1.0, 0.0)))
        .collect();
    factor_norm_1d(&coeffs, q, rho_os)
}
