//! Dyadic block and step-hyperbolic cross indexing.
//!
//! The frequency lattice (minus the coordinate hyperplanes) is tiled by
//! dyadic blocks `rho(s)`, one per index vector `s` with every component at
//! least 1:
//!
//! ```text
//! rho(s) = { k : 2^(s_j - 1) <= |k_j| < 2^(s_j)  for every j },   |rho(s)| = 2^(s_1+...+s_d).
//! ```
//!
//! A step-hyperbolic cross at level `n` with weight vector `w` (each
//! `w_j >= 1`, the smallest equal to 1) collects every block with
//! `(s, w) < n`. Weights come from a [`SmoothnessProfile`]: the normalized
//! vector `gamma = r / r_1` of a smoothness vector `r` sorted ascending, or
//! the interpolated `gamma'` lying strictly between 1 and `gamma` on the
//! coordinates where `r_j > r_1`.

use serde::Serialize;

use crate::error::{Error, Result};

/// Index of a dyadic block. Each component is at least 1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Block(Vec<u32>);

impl Block {
    /// Builds a block index, rejecting zero components.
    pub fn new(s: Vec<u32>) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::InvalidArgument("block index must have dimension >= 1".into()));
        }
        if s.iter().any(|&c| c == 0) {
            return Err(Error::InvalidArgument(format!("block index {s:?} has a zero component")));
        }
        Ok(Block(s))
    }

    /// Block components `s_1..s_d`.
    pub fn components(&self) -> &[u32] {
        &self.0
    }

    /// Dimension.
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|s|_1 = s_1 + ... + s_d`.
    pub fn level(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Weighted level `(s, w)`.
    pub fn dot(&self, weights: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(weights)
            .map(|(&s, &w)| s as f64 * w)
            .sum()
    }

    /// Number of lattice points in `rho(s)`, i.e. `2^(s_1+...+s_d)`.
    pub fn cardinality(&self) -> u128 {
        1u128 << self.level()
    }

    /// Chebyshev distance to another block of the same dimension.
    pub fn linf_distance(&self, other: &Block) -> u32 {
        self.0
            .iter()
            .zip(other.components())
            .map(|(&a, &b)| a.abs_diff(b))
            .max()
            .unwrap_or(0)
    }
}

/// The dyadic block containing `k`, i.e. the unique `s` with
/// `2^(s_j-1) <= |k_j| < 2^(s_j)` for every coordinate.
///
/// Errors when any `k_j = 0`: points on the coordinate hyperplanes belong to
/// no block.
pub fn block_of(k: &[i32]) -> Result<Block> {
    if k.is_empty() {
        return Err(Error::InvalidArgument("frequency must have dimension >= 1".into()));
    }
    let mut s = Vec::with_capacity(k.len());
    for &kj in k {
        if kj == 0 {
            return Err(Error::ZeroFrequency(k.to_vec()));
        }
        // |k| in [2^(s-1), 2^s)  <=>  s = bit length of |k|.
        s.push(32 - (kj.unsigned_abs()).leading_zeros());
    }
    Block::new(s)
}

/// The frequencies of the 1-D block `s`, in increasing order:
/// `-(2^s - 1), ..., -2^(s-1), 2^(s-1), ..., 2^s - 1`.
///
/// This ordering is the indexing convention shared by every factored
/// (tensor) representation in the crate.
pub fn block_freqs_1d(s: u32) -> impl Iterator<Item = i32> + Clone {
    let lo = 1i64 << (s - 1);
    let hi = (1i64 << s) - 1;
    (-hi..=-lo).chain(lo..=hi).map(|k| k as i32)
}

/// All lattice points of `rho(s)`, ordered lexicographically in the per-axis
/// order of [`block_freqs_1d`] (last axis fastest).
pub fn rho_block(s: &Block) -> Vec<Vec<i32>> {
    let axes: Vec<Vec<i32>> = s.components().iter().map(|&sj| block_freqs_1d(sj).collect()).collect();
    let mut out = Vec::with_capacity(s.cardinality() as usize);
    let mut k = vec![0i32; axes.len()];
    cartesian(&axes, 0, &mut k, &mut out);
    out
}

fn cartesian(axes: &[Vec<i32>], j: usize, k: &mut Vec<i32>, out: &mut Vec<Vec<i32>>) {
    if j == axes.len() {
        out.push(k.clone());
        return;
    }
    for &v in &axes[j] {
        k[j] = v;
        cartesian(axes, j + 1, k, out);
    }
}

/// A step-hyperbolic cross: block set `{ s : (s, weights) < n }`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossSpec {
    n: u32,
    weights: Vec<f64>,
}

impl CrossSpec {
    /// Builds a cross specification.
    ///
    /// Requires a positive level, every weight `>= 1`, and at least one
    /// weight equal to 1 (the normalization that makes levels comparable
    /// across weight choices).
    pub fn new(n: u32, weights: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("cross level n must be positive".into()));
        }
        if weights.is_empty() {
            return Err(Error::InvalidArgument("cross needs dimension >= 1".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 1.0) {
            return Err(Error::InvalidArgument(format!("cross weights {weights:?} must all be >= 1")));
        }
        if !weights.iter().any(|w| *w == 1.0) {
            return Err(Error::InvalidArgument(format!(
                "cross weights {weights:?} must contain a 1 (minimal coordinate is normalized)"
            )));
        }
        Ok(CrossSpec { n, weights })
    }

    /// Cross level.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Weight vector.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Dimension.
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Whether block `s` belongs to the cross, i.e. `(s, weights) < n`.
    pub fn contains(&self, s: &Block) -> bool {
        s.dim() == self.dim() && s.dot(&self.weights) < self.n as f64
    }
}

/// Every block of the cross, in lexicographic order of the index vector.
///
/// Empty when `n <= w_1 + ... + w_d` (even the corner block `(1,..,1)` is
/// excluded).
pub fn cross_blocks(cross: &CrossSpec) -> Vec<Block> {
    let d = cross.dim();
    let n = cross.n() as f64;
    let w = cross.weights();
    let min_rest: Vec<f64> = (0..=d)
        .map(|j| w[j..].iter().sum::<f64>())
        .collect();
    let mut out = Vec::new();
    let mut s = vec![1u32; d];
    fn rec(
        j: usize,
        used: f64,
        n: f64,
        w: &[f64],
        min_rest: &[f64],
        s: &mut Vec<u32>,
        out: &mut Vec<Block>,
    ) {
        if j == w.len() {
            out.push(Block::new(s.clone()).expect("components start at 1"));
            return;
        }
        let mut sj = 1u32;
        // Remaining axes each need at least their own weight.
        while used + sj as f64 * w[j] + min_rest[j + 1] < n {
            s[j] = sj;
            rec(j + 1, used + sj as f64 * w[j], n, w, min_rest, s, out);
            sj += 1;
        }
    }
    rec(0, 0.0, n, w, &min_rest, &mut s, &mut out);
    out
}

/// Number of lattice points covered by the cross: the sum of `2^|s|_1` over
/// its blocks.
pub fn cross_cardinality(cross: &CrossSpec) -> u128 {
    cross_blocks(cross).iter().map(Block::cardinality).sum()
}

/// How cross weights are derived from a smoothness profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CrossVariant {
    /// Weights `gamma = r / r_1`.
    Gamma,
    /// Weights `gamma'` (strictly inside `(1, gamma)` past the first group).
    GammaPrime,
    /// Unit weights regardless of the profile.
    Ones,
}

impl CrossVariant {
    /// Parses `gamma`, `gamma_prime` or `ones`.
    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "gamma" => Ok(CrossVariant::Gamma),
            "gamma_prime" => Ok(CrossVariant::GammaPrime),
            "ones" => Ok(CrossVariant::Ones),
            other => Err(Error::Parse(format!("unknown cross variant `{other}`"))),
        }
    }

    /// Canonical name used in CSV output.
    pub fn name(self) -> &'static str {
        match self {
            CrossVariant::Gamma => "gamma",
            CrossVariant::GammaPrime => "gamma_prime",
            CrossVariant::Ones => "ones",
        }
    }
}

/// Rule producing the auxiliary vector `gamma'` from `gamma`.
#[derive(Debug, Clone, PartialEq)]
pub enum GammaPrimeRule {
    /// `gamma'_j = (1 + gamma_j) / 2` wherever `gamma_j > 1`.
    Midpoint,
    /// Caller-supplied vector, validated against `1 < gamma'_j < gamma_j`
    /// past the first group and `gamma'_j = 1` inside it.
    Explicit(Vec<f64>),
}

/// A mixed-smoothness vector together with its derived cross weights.
///
/// The vector is stored sorted ascending: `0 < r_1 = ... = r_nu < r_(nu+1)
/// <= ... <= r_d`. `nu` counts the coordinates attaining the minimum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothnessProfile {
    r: Vec<f64>,
    nu: usize,
    gamma: Vec<f64>,
    gamma_prime: Vec<f64>,
}

impl SmoothnessProfile {
    /// Builds a profile with the midpoint `gamma'` rule.
    pub fn new(r: &[f64]) -> Result<Self> {
        Self::with_rule(r, GammaPrimeRule::Midpoint)
    }

    /// Builds a profile with an explicit `gamma'` rule.
    pub fn with_rule(r: &[f64], rule: GammaPrimeRule) -> Result<Self> {
        if r.is_empty() {
            return Err(Error::InvalidArgument("smoothness vector must have dimension >= 1".into()));
        }
        if r.iter().any(|x| !x.is_finite() || *x <= 0.0) {
            return Err(Error::InvalidArgument(format!("smoothness vector {r:?} must be positive")));
        }
        let mut r = r.to_vec();
        r.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        let r1 = r[0];
        let nu = r.iter().take_while(|&&x| x == r1).count();
        let gamma: Vec<f64> = r.iter().map(|&x| x / r1).collect();
        let gamma_prime: Vec<f64> = match rule {
            GammaPrimeRule::Midpoint => gamma
                .iter()
                .map(|&g| if g > 1.0 { (1.0 + g) / 2.0 } else { 1.0 })
                .collect(),
            GammaPrimeRule::Explicit(gp) => {
                if gp.len() != r.len() {
                    return Err(Error::DimensionMismatch { expected: r.len(), got: gp.len() });
                }
                for (j, (&g, &gpj)) in gamma.iter().zip(&gp).enumerate() {
                    let ok = if g == 1.0 { gpj == 1.0 } else { 1.0 < gpj && gpj < g };
                    if !ok {
                        return Err(Error::InvalidArgument(format!(
                            "gamma'[{j}] = {gpj} must satisfy 1 < gamma' < gamma = {g} (or equal 1 when gamma = 1)"
                        )));
                    }
                }
                gp
            }
        };
        Ok(SmoothnessProfile { r, nu, gamma, gamma_prime })
    }

    /// Smoothness vector, sorted ascending.
    pub fn r(&self) -> &[f64] {
        &self.r
    }

    /// Smallest smoothness `r_1`.
    pub fn r1(&self) -> f64 {
        self.r[0]
    }

    /// Number of coordinates attaining `r_1`.
    pub fn nu(&self) -> usize {
        self.nu
    }

    /// Normalized weights `gamma = r / r_1`.
    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    /// Interpolated weights `gamma'`.
    pub fn gamma_prime(&self) -> &[f64] {
        &self.gamma_prime
    }

    /// Dimension.
    pub fn dim(&self) -> usize {
        self.r.len()
    }

    /// Cross weights for a variant.
    pub fn weights(&self, variant: CrossVariant) -> Vec<f64> {
        match variant {
            CrossVariant::Gamma => self.gamma.clone(),
            CrossVariant::GammaPrime => self.gamma_prime.clone(),
            CrossVariant::Ones => vec![1.0; self.dim()],
        }
    }

    /// Cross at level `n` for a variant.
    pub fn cross(&self, n: u32, variant: CrossVariant) -> Result<CrossSpec> {
        CrossSpec::new(n, self.weights(variant))
    }

    /// `(s, r)` for a block of matching dimension.
    pub fn block_weight(&self, s: &Block) -> f64 {
        s.dot(&self.r)
    }
}
