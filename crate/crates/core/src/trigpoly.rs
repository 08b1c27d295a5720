//! Trigonometric polynomials in sparse and tensor-factored form.
//!
//! [`SparseTrigPoly`] stores an explicit map from frequency vectors to
//! complex coefficients under the normalized convention
//! `f(x) = sum_k c(k) e^{i(k,x)}`, `c(k) = (2pi)^-d Int f e^{-i(k,x)}`.
//!
//! [`TensorBlockPoly`] stores a sum of rank-1 terms, one per dyadic block:
//! each term is a product of one-dimensional coefficient vectors supported
//! inside the tagged block. The extremal generators of this crate (shell
//! Dirichlet sums, Bernoulli-smoothed tensor kernels) all have this shape,
//! and their block norms factor into one-dimensional quadratures, which is
//! what makes sweeps feasible at bandwidths far beyond any dense grid.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::index::{block_freqs_1d, block_of, cross_blocks, Block, CrossSpec};
use crate::quad::{synthesize_on_grid, QuadratureGrid};

/// Coefficients with modulus below this are dropped on insertion; the cutoff
/// only exists to keep denormals and exact cancellations out of the support.
pub const COEFF_DROP: f64 = 1e-300;

/// Guard on expanding factored polynomials into explicit coefficient maps.
pub const MAX_SPARSE_EXPANSION: usize = 1 << 22;

/// Explicit sparse trigonometric polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseTrigPoly {
    d: usize,
    coeffs: BTreeMap<Vec<i32>, Complex64>,
}

impl SparseTrigPoly {
    /// The zero polynomial in dimension `d`.
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("dimension must be >= 1".into()));
        }
        Ok(SparseTrigPoly { d, coeffs: BTreeMap::new() })
    }

    /// Builds a polynomial by accumulating `(frequency, coefficient)` pairs.
    pub fn from_coeffs(
        d: usize,
        coeffs: impl IntoIterator<Item = (Vec<i32>, Complex64)>,
    ) -> Result<Self> {
        let mut f = SparseTrigPoly::new(d)?;
        for (k, c) in coeffs {
            f.add_to(k, c)?;
        }
        Ok(f)
    }

    /// Dimension.
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Number of stored coefficients.
    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    /// Whether the polynomial is identically zero.
    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Iterates over stored `(frequency, coefficient)` pairs in
    /// lexicographic frequency order.
    pub fn iter(&self) -> impl Iterator<Item = (&Vec<i32>, &Complex64)> {
        self.coeffs.iter()
    }

    /// The coefficient at `k` (zero when absent).
    pub fn get(&self, k: &[i32]) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Overwrites the coefficient at `k`.
    pub fn set(&mut self, k: Vec<i32>, c: Complex64) -> Result<()> {
        self.check_key(&k)?;
        if c.norm() < COEFF_DROP {
            self.coeffs.remove(&k);
        } else {
            self.coeffs.insert(k, c);
        }
        Ok(())
    }

    /// Adds `c` to the coefficient at `k`.
    pub fn add_to(&mut self, k: Vec<i32>, c: Complex64) -> Result<()> {
        self.check_key(&k)?;
        let cur = self.coeffs.get(&k).copied().unwrap_or(Complex64::new(0.0, 0.0));
        self.set(k, cur + c)
    }

    fn check_key(&self, k: &[i32]) -> Result<()> {
        if k.len() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: k.len() });
        }
        Ok(())
    }

    /// Largest `|k_j|` per axis over the support (zeros for the zero
    /// polynomial).
    pub fn max_freq(&self) -> Vec<i64> {
        let mut m = vec![0i64; self.d];
        for k in self.coeffs.keys() {
            for (j, &kj) in k.iter().enumerate() {
                m[j] = m[j].max(kj.unsigned_abs() as i64);
            }
        }
        m
    }

    /// True when no supported frequency touches a coordinate hyperplane.
    pub fn is_zero_mean(&self) -> bool {
        self.coeffs.keys().all(|k| k.iter().all(|&kj| kj != 0))
    }

    fn require_zero_mean(&self) -> Result<()> {
        match self.coeffs.keys().find(|k| k.iter().any(|&kj| kj == 0)) {
            Some(k) => Err(Error::ZeroFrequency(k.clone())),
            None => Ok(()),
        }
    }

    /// `sqrt(sum |c(k)|^2)`: the `L_2` norm by Parseval.
    pub fn l2_norm(&self) -> f64 {
        // Empty sums are -0.0; adding +0.0 keeps the zero polynomial at +0.0.
        (self.coeffs.values().map(|c| c.norm_sqr()).sum::<f64>() + 0.0).sqrt()
    }

    /// Largest coefficient modulus (zero for the zero polynomial).
    pub fn max_coeff_modulus(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Pointwise scaling by a complex constant.
    pub fn scale(&self, a: Complex64) -> Self {
        let mut out = SparseTrigPoly::new(self.d).expect("valid dim");
        for (k, c) in &self.coeffs {
            out.set(k.clone(), a * c).expect("same dim");
        }
        out
    }

    /// Coefficientwise sum.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if other.d != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: other.d });
        }
        let mut out = self.clone();
        for (k, c) in &other.coeffs {
            out.add_to(k.clone(), *c)?;
        }
        Ok(out)
    }

    /// Coefficientwise difference `self - other`.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// The block projection `delta_s(f)`: coefficients with `block_of(k) = s`.
    /// Frequencies on coordinate hyperplanes belong to no block and are
    /// never selected.
    pub fn delta_block(&self, s: &Block) -> Result<Self> {
        if s.dim() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: s.dim() });
        }
        let mut out = SparseTrigPoly::new(self.d)?;
        for (k, c) in &self.coeffs {
            if let Ok(b) = block_of(k) {
                if &b == s {
                    out.set(k.clone(), *c)?;
                }
            }
        }
        Ok(out)
    }

    /// Splits the support into per-block polynomials. Requires a fully
    /// off-axis support.
    pub fn group_by_block(&self) -> Result<BTreeMap<Block, SparseTrigPoly>> {
        self.require_zero_mean()?;
        let mut groups: BTreeMap<Block, SparseTrigPoly> = BTreeMap::new();
        for (k, c) in &self.coeffs {
            let b = block_of(k)?;
            groups
                .entry(b)
                .or_insert_with(|| SparseTrigPoly::new(self.d).expect("valid dim"))
                .set(k.clone(), *c)?;
        }
        Ok(groups)
    }

    /// Keeps the coefficients whose block lies inside the cross. Requires a
    /// fully off-axis support.
    pub fn restrict_to_cross(&self, cross: &CrossSpec) -> Result<Self> {
        self.split_by_cross(cross).map(|(inside, _)| inside)
    }

    /// Complement of [`Self::restrict_to_cross`]: the coefficients whose
    /// block lies outside the cross.
    pub fn tail_of_cross(&self, cross: &CrossSpec) -> Result<Self> {
        self.split_by_cross(cross).map(|(_, outside)| outside)
    }

    /// Splits into (inside, outside) parts relative to a cross.
    pub fn split_by_cross(&self, cross: &CrossSpec) -> Result<(Self, Self)> {
        if cross.dim() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: cross.dim() });
        }
        self.require_zero_mean()?;
        let mut inside = SparseTrigPoly::new(self.d)?;
        let mut outside = SparseTrigPoly::new(self.d)?;
        for (k, c) in &self.coeffs {
            let b = block_of(k)?;
            if cross.contains(&b) {
                inside.set(k.clone(), *c)?;
            } else {
                outside.set(k.clone(), *c)?;
            }
        }
        Ok((inside, outside))
    }

    /// Weyl fractional derivative of order `r` and phase vector `alpha`:
    /// the Fourier multiplier `prod_j |k_j|^{r_j} e^{i sign(k_j) alpha_j pi/2}`.
    ///
    /// Defined only for fully off-axis supports (the multiplier vanishes
    /// nowhere there and composition with the matching Bernoulli multiplier
    /// is the identity).
    pub fn weyl_derivative(&self, r: &[f64], alpha: &[f64]) -> Result<Self> {
        if r.len() != self.d || alpha.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: if r.len() != self.d { r.len() } else { alpha.len() },
            });
        }
        self.require_zero_mean()?;
        let mut out = SparseTrigPoly::new(self.d)?;
        for (k, c) in &self.coeffs {
            out.set(k.clone(), c * weyl_weight(k, r, alpha))?;
        }
        Ok(out)
    }

    /// Convolution under the normalized measure: coefficientwise product.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        if other.d != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: other.d });
        }
        let (small, big) = if self.support_len() <= other.support_len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = SparseTrigPoly::new(self.d)?;
        for (k, c) in &small.coeffs {
            if let Some(c2) = big.coeffs.get(k) {
                out.set(k.clone(), c * c2)?;
            }
        }
        Ok(out)
    }

    /// Evaluates the polynomial on a quadrature grid (row-major samples,
    /// last axis fastest). The grid must resolve the bandwidth.
    pub fn synthesize(&self, grid: &QuadratureGrid) -> Result<Vec<Complex64>> {
        if grid.dim() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: grid.dim() });
        }
        grid.check_covers(&self.max_freq())?;
        Ok(synthesize_on_grid(
            self.coeffs.iter().map(|(k, c)| (k.clone(), *c)),
            grid,
        ))
    }

    /// Writes the coefficient text format: a `d=<dim>` header, then one
    /// `k_1 ... k_d re im` line per coefficient in lexicographic order.
    pub fn write_coeffs(&self, w: &mut impl Write) -> Result<()> {
        writeln!(w, "d={}", self.d)?;
        for (k, c) in &self.coeffs {
            for kj in k {
                write!(w, "{kj} ")?;
            }
            writeln!(w, "{} {}", c.re, c.im)?;
        }
        Ok(())
    }

    /// Reads the coefficient text format. Duplicate frequencies, malformed
    /// lines, and non-finite values are rejected.
    pub fn read_coeffs(r: impl BufRead) -> Result<Self> {
        let mut lines = r.lines();
        let header = loop {
            match lines.next() {
                Some(line) => {
                    let line = line?;
                    if !line.trim().is_empty() {
                        break line;
                    }
                }
                None => return Err(Error::Parse("empty coefficient file".into())),
            }
        };
        let header = header.trim();
        let d: usize = header
            .strip_prefix("d=")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::Parse(format!("expected `d=<dim>` header, got `{header}`")))?;
        let mut f = SparseTrigPoly::new(d)?;
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != d + 2 {
                return Err(Error::Parse(format!(
                    "line {}: expected {} tokens (k_1..k_{d} re im), got {}",
                    lineno + 2,
                    d + 2,
                    toks.len()
                )));
            }
            let mut k = Vec::with_capacity(d);
            for t in &toks[..d] {
                k.push(t.parse::<i32>().map_err(|_| {
                    Error::Parse(format!("line {}: bad frequency `{t}`", lineno + 2))
                })?);
            }
            let re: f64 = toks[d]
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad real part `{}`", lineno + 2, toks[d])))?;
            let im: f64 = toks[d + 1]
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad imaginary part `{}`", lineno + 2, toks[d + 1])))?;
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::Parse(format!("line {}: non-finite coefficient", lineno + 2)));
            }
            if f.coeffs.contains_key(&k) {
                return Err(Error::Parse(format!("line {}: duplicate frequency {k:?}", lineno + 2)));
            }
            f.set(k, Complex64::new(re, im))?;
        }
        Ok(f)
    }
}

/// The Weyl multiplier `prod_j |k_j|^{r_j} e^{i sign(k_j) alpha_j pi/2}` at a
/// single fully nonzero frequency.
pub fn weyl_weight(k: &[i32], r: &[f64], alpha: &[f64]) -> Complex64 {
    let mut w = Complex64::new(1.0, 0.0);
    for ((&kj, &rj), &aj) in k.iter().zip(r).zip(alpha) {
        debug_assert!(kj != 0);
        let modulus = (kj.unsigned_abs() as f64).powf(rj);
        let phase = (kj.signum() as f64) * aj * std::f64::consts::FRAC_PI_2;
        w *= Complex64::from_polar(modulus, phase);
    }
    w
}

/// One rank-1 term of a [`TensorBlockPoly`].
///
/// `factors[j][i]` is the coefficient at the `i`-th frequency of
/// [`block_freqs_1d`]`(s_j)`; the term contributes
/// `weight * prod_j factors[j]` restricted to its block.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorTerm {
    /// Tagged dyadic block.
    pub block: Block,
    /// Global scalar weight.
    pub weight: Complex64,
    /// Per-axis coefficient vectors, each of length `2^{s_j}`.
    pub factors: Vec<Vec<Complex64>>,
}

impl TensorTerm {
    /// A term with all-ones factors over its block (a block Dirichlet
    /// product).
    pub fn dirichlet(block: Block) -> Self {
        let factors = block
            .components()
            .iter()
            .map(|&sj| vec![Complex64::new(1.0, 0.0); 1usize << sj])
            .collect();
        TensorTerm { block, weight: Complex64::new(1.0, 0.0), factors }
    }

    fn validate(&self, d: usize) -> Result<()> {
        if self.block.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: self.block.dim() });
        }
        if self.factors.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: self.factors.len() });
        }
        for (j, (&sj, fac)) in self.block.components().iter().zip(&self.factors).enumerate() {
            let want = 1usize << sj;
            if fac.len() != want {
                return Err(Error::InvalidArgument(format!(
                    "factor {j} has length {}, block component {sj} needs {want}",
                    fac.len()
                )));
            }
        }
        Ok(())
    }

    /// `sqrt(sum |c|^2)` of the full product term.
    pub fn l2_norm(&self) -> f64 {
        // An empty factor sums to -0.0; adding +0.0 keeps the result at +0.0.
        let prod: f64 = self
            .factors
            .iter()
            .map(|fac| fac.iter().map(|c| c.norm_sqr()).sum::<f64>())
            .product();
        self.weight.norm() * (prod + 0.0).sqrt()
    }

    /// The factor of axis `j` as explicit `(frequency, coefficient)` pairs.
    pub fn factor_coeffs(&self, j: usize) -> Vec<(i32, Complex64)> {
        let sj = self.block.components()[j];
        block_freqs_1d(sj).zip(self.factors[j].iter().copied()).collect()
    }
}

/// Sum of rank-1 terms tagged by pairwise distinct dyadic blocks, kept
/// sorted by block index.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorBlockPoly {
    d: usize,
    terms: Vec<TensorTerm>,
}

impl TensorBlockPoly {
    /// The zero polynomial in dimension `d`.
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("dimension must be >= 1".into()));
        }
        Ok(TensorBlockPoly { d, terms: Vec::new() })
    }

    /// Dimension.
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Builds a polynomial from terms in any order.
    pub fn from_terms(d: usize, terms: impl IntoIterator<Item = TensorTerm>) -> Result<Self> {
        let mut f = Self::new(d)?;
        for term in terms {
            f.push(term)?;
        }
        Ok(f)
    }

    /// The terms, sorted by block index.
    pub fn terms(&self) -> &[TensorTerm] {
        &self.terms
    }

    /// Inserts a term; its block must not already be present.
    pub fn push(&mut self, term: TensorTerm) -> Result<()> {
        term.validate(self.d)?;
        match self.terms.binary_search_by(|t| t.block.cmp(&term.block)) {
            Ok(_) => Err(Error::InvalidArgument(format!(
                "duplicate block {:?} in tensor polynomial",
                term.block.components()
            ))),
            Err(pos) => {
                self.terms.insert(pos, term);
                Ok(())
            }
        }
    }

    /// The term tagged by `s`, if present.
    pub fn term_for_block(&self, s: &Block) -> Option<&TensorTerm> {
        self.terms
            .binary_search_by(|t| t.block.cmp(s))
            .ok()
            .map(|i| &self.terms[i])
    }

    /// Total number of lattice points covered by the terms.
    pub fn support_points(&self) -> u128 {
        self.terms.iter().map(|t| t.block.cardinality()).sum()
    }

    /// Largest `|k_j|` per axis.
    pub fn max_freq(&self) -> Vec<i64> {
        let mut m = vec![0i64; self.d];
        for t in &self.terms {
            for (j, &sj) in t.block.components().iter().enumerate() {
                m[j] = m[j].max((1i64 << sj) - 1);
            }
        }
        m
    }

    /// `sqrt(sum |c|^2)`; blocks are disjoint so terms add in square.
    pub fn l2_norm(&self) -> f64 {
        let sq: f64 = self
            .terms
            .iter()
            .map(|t| {
                let n = t.l2_norm();
                n * n
            })
            .sum();
        // Empty sums are -0.0; adding +0.0 keeps the zero polynomial at +0.0.
        (sq + 0.0).sqrt()
    }

    /// Largest coefficient modulus: blocks are disjoint and coefficients
    /// factor, so this is the maximum over terms of the factor-max product.
    pub fn max_coeff_modulus(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.weight.norm()
                    * t.factors
                        .iter()
                        .map(|f| f.iter().map(|c| c.norm()).fold(0.0, f64::max))
                        .product::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Pointwise scaling by a complex constant (applied to term weights).
    pub fn scale(&self, a: Complex64) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.weight *= a;
        }
        out
    }

    /// Keeps the terms whose block lies inside the cross.
    pub fn restrict_to_cross(&self, cross: &CrossSpec) -> Result<Self> {
        self.filter_terms(cross, true)
    }

    /// Keeps the terms whose block lies outside the cross.
    pub fn tail_of_cross(&self, cross: &CrossSpec) -> Result<Self> {
        self.filter_terms(cross, false)
    }

    fn filter_terms(&self, cross: &CrossSpec, keep_inside: bool) -> Result<Self> {
        if cross.dim() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: cross.dim() });
        }
        let mut out = TensorBlockPoly::new(self.d)?;
        for t in &self.terms {
            if cross.contains(&t.block) == keep_inside {
                out.terms.push(t.clone());
            }
        }
        Ok(out)
    }

    /// Weyl derivative: the per-axis multiplier acts on each factor, so
    /// terms stay rank-1.
    pub fn weyl_derivative(&self, r: &[f64], alpha: &[f64]) -> Result<Self> {
        if r.len() != self.d || alpha.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: if r.len() != self.d { r.len() } else { alpha.len() },
            });
        }
        let mut out = self.clone();
        for t in &mut out.terms {
            for (j, fac) in t.factors.iter_mut().enumerate() {
                let sj = t.block.components()[j];
                for (i, k) in block_freqs_1d(sj).enumerate() {
                    let modulus = (k.unsigned_abs() as f64).powf(r[j]);
                    let phase = (k.signum() as f64) * alpha[j] * std::f64::consts::FRAC_PI_2;
                    fac[i] *= Complex64::from_polar(modulus, phase);
                }
            }
        }
        Ok(out)
    }

    /// Expands into an explicit sparse polynomial; guarded by
    /// [`MAX_SPARSE_EXPANSION`].
    pub fn to_sparse(&self) -> Result<SparseTrigPoly> {
        let pts = self.support_points();
        if pts > MAX_SPARSE_EXPANSION as u128 {
            return Err(Error::GridTooLarge {
                points: pts.min(usize::MAX as u128) as usize,
                limit: MAX_SPARSE_EXPANSION,
            });
        }
        let mut f = SparseTrigPoly::new(self.d)?;
        for t in &self.terms {
            let axes: Vec<Vec<(i32, Complex64)>> =
                (0..self.d).map(|j| t.factor_coeffs(j)).collect();
            let mut k = vec![0i32; self.d];
            let mut c = vec![Complex64::new(1.0, 0.0); self.d + 1];
            c[0] = t.weight;
            expand_term(&axes, 0, &mut k, &mut c, &mut f)?;
        }
        Ok(f)
    }
}

fn expand_term(
    axes: &[Vec<(i32, Complex64)>],
    j: usize,
    k: &mut Vec<i32>,
    partial: &mut Vec<Complex64>,
    out: &mut SparseTrigPoly,
) -> Result<()> {
    if j == axes.len() {
        out.add_to(k.clone(), partial[j])?;
        return Ok(());
    }
    for &(kj, c) in &axes[j] {
        k[j] = kj;
        partial[j + 1] = partial[j] * c;
        expand_term(axes, j + 1, k, partial, out)?;
    }
    Ok(())
}

/// A polynomial in either representation; the norm and error routines
/// dispatch on this.
#[derive(Debug, Clone, PartialEq)]
pub enum PolyExpr {
    /// Explicit coefficient map.
    Sparse(SparseTrigPoly),
    /// Blockwise rank-1 sum.
    Tensor(TensorBlockPoly),
}

impl PolyExpr {
    /// Dimension.
    pub fn dim(&self) -> usize {
        match self {
            PolyExpr::Sparse(f) => f.dim(),
            PolyExpr::Tensor(f) => f.dim(),
        }
    }

    /// `L_2` norm by Parseval.
    pub fn l2_norm(&self) -> f64 {
        match self {
            PolyExpr::Sparse(f) => f.l2_norm(),
            PolyExpr::Tensor(f) => f.l2_norm(),
        }
    }

    /// Largest `|k_j|` per axis.
    pub fn max_freq(&self) -> Vec<i64> {
        match self {
            PolyExpr::Sparse(f) => f.max_freq(),
            PolyExpr::Tensor(f) => f.max_freq(),
        }
    }

    /// Largest coefficient modulus.
    pub fn max_coeff_modulus(&self) -> f64 {
        match self {
            PolyExpr::Sparse(f) => f.max_coeff_modulus(),
            PolyExpr::Tensor(f) => f.max_coeff_modulus(),
        }
    }

    /// Number of explicitly representable support points.
    pub fn support_points(&self) -> u128 {
        match self {
            PolyExpr::Sparse(f) => f.support_len() as u128,
            PolyExpr::Tensor(f) => f.support_points(),
        }
    }

    /// Tail of a cross (the part `f - S_Q f`).
    pub fn tail_of_cross(&self, cross: &CrossSpec) -> Result<PolyExpr> {
        match self {
            PolyExpr::Sparse(f) => Ok(PolyExpr::Sparse(f.tail_of_cross(cross)?)),
            PolyExpr::Tensor(f) => Ok(PolyExpr::Tensor(f.tail_of_cross(cross)?)),
        }
    }

    /// Restriction to a cross.
    pub fn restrict_to_cross(&self, cross: &CrossSpec) -> Result<PolyExpr> {
        match self {
            PolyExpr::Sparse(f) => Ok(PolyExpr::Sparse(f.restrict_to_cross(cross)?)),
            PolyExpr::Tensor(f) => Ok(PolyExpr::Tensor(f.restrict_to_cross(cross)?)),
        }
    }

    /// Expands to a sparse polynomial when feasible.
    pub fn to_sparse(&self) -> Result<SparseTrigPoly> {
        match self {
            PolyExpr::Sparse(f) => Ok(f.clone()),
            PolyExpr::Tensor(f) => f.to_sparse(),
        }
    }
}

impl From<SparseTrigPoly> for PolyExpr {
    fn from(f: SparseTrigPoly) -> Self {
        PolyExpr::Sparse(f)
    }
}

impl From<TensorBlockPoly> for PolyExpr {
    fn from(f: TensorBlockPoly) -> Self {
        PolyExpr::Tensor(f)
    }
}

/// Restriction of a sparse polynomial to the blocks of a cross, exposed as a
/// free function mirroring [`SparseTrigPoly::restrict_to_cross`]; the listed
/// blocks are exactly [`cross_blocks`].
pub fn cross_support(cross: &CrossSpec) -> Vec<Block> {
    cross_blocks(cross)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::mean_power_norm;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn insertion_rules() {
        let mut f = SparseTrigPoly::new(2).unwrap();
        f.set(vec![1, -1], c(1.0, 0.0)).unwrap();
        assert_eq!(f.support_len(), 1);
        f.set(vec![1, -1], c(0.0, 0.0)).unwrap();
        assert_eq!(f.support_len(), 0, "zero coefficient evicts");
        f.set(vec![1, -1], c(1e-301, 0.0)).unwrap();
        assert_eq!(f.support_len(), 0, "sub-threshold coefficient dropped");
        assert!(f.set(vec![1], c(1.0, 0.0)).is_err(), "dimension checked");
        f.add_to(vec![2, 3], c(0.5, 0.0)).unwrap();
        f.add_to(vec![2, 3], c(-0.5, 0.0)).unwrap();
        assert!(f.is_empty(), "exact cancellation evicts");
    }

    #[test]
    fn zero_mean_and_preconditions() {
        let f = SparseTrigPoly::from_coeffs(2, [(vec![1, 0], c(1.0, 0.0))]).unwrap();
        assert!(!f.is_zero_mean());
        assert!(matches!(f.weyl_derivative(&[1.0, 1.0], &[0.0, 0.0]), Err(Error::ZeroFrequency(_))));
        let cross = CrossSpec::new(4, vec![1.0, 1.0]).unwrap();
        assert!(f.restrict_to_cross(&cross).is_err());
        let g = SparseTrigPoly::from_coeffs(2, [(vec![1, 2], c(1.0, 0.0))]).unwrap();
        assert!(g.is_zero_mean());
        assert!(g.restrict_to_cross(&cross).is_ok());
    }

    #[test]
    fn delta_block_selects_exactly_one_block() {
        let f = SparseTrigPoly::from_coeffs(
            2,
            [
                (vec![1, 1], c(1.0, 0.0)),
                (vec![1, -1], c(2.0, 0.0)),
                (vec![2, 1], c(3.0, 0.0)),
                (vec![0, 5], c(4.0, 0.0)), // on an axis: in no block
            ],
        )
        .unwrap();
        let d11 = f.delta_block(&Block::new(vec![1, 1]).unwrap()).unwrap();
        assert_eq!(d11.support_len(), 2);
        let d21 = f.delta_block(&Block::new(vec![2, 1]).unwrap()).unwrap();
        assert_eq!(d21.support_len(), 1);
        assert_eq!(d21.get(&[2, 1]), c(3.0, 0.0));
        let d31 = f.delta_block(&Block::new(vec![3, 1]).unwrap()).unwrap();
        assert!(d31.is_empty());
    }

    #[test]
    fn restriction_example() {
        // support on rho((1,1)) and rho((2,2)); cross (1,1)-weights, n = 4
        // keeps only the (1,1) block: (2,2).(1,1) = 4 is not < 4.
        let f = SparseTrigPoly::from_coeffs(
            2,
            [
                (vec![1, -1], c(1.0, 0.0)),
                (vec![2, 3], c(1.0, 0.0)),
                (vec![-3, 2], c(1.0, 0.0)),
            ],
        )
        .unwrap();
        let cross = CrossSpec::new(4, vec![1.0, 1.0]).unwrap();
        let inside = f.restrict_to_cross(&cross).unwrap();
        assert_eq!(inside.support_len(), 1);
        assert_eq!(inside.get(&[1, -1]), c(1.0, 0.0));
        let outside = f.tail_of_cross(&cross).unwrap();
        assert_eq!(outside.support_len(), 2);
        // restriction is idempotent
        let again = inside.restrict_to_cross(&cross).unwrap();
        assert_eq!(again, inside);
    }

    #[test]
    fn weyl_classical_derivative_of_cosine() {
        // cos x = (e^{ix} + e^{-ix})/2; order 1, alpha = 1 gives -sin x,
        // whose coefficients are -+ i/2... namely (e^{ix} i - e^{-ix} i)/2 * (-1):
        // -sin x = (i e^{ix} - i e^{-ix})/2.
        let f = SparseTrigPoly::from_coeffs(1, [(vec![1], c(0.5, 0.0)), (vec![-1], c(0.5, 0.0))]).unwrap();
        let df = f.weyl_derivative(&[1.0], &[1.0]).unwrap();
        assert!((df.get(&[1]) - c(0.0, 0.5)).norm() < 1e-15);
        assert!((df.get(&[-1]) - c(0.0, -0.5)).norm() < 1e-15);
        // order 1/2, alpha = 0 leaves |k| = 1 coefficients untouched.
        let hf = f.weyl_derivative(&[0.5], &[0.0]).unwrap();
        assert_eq!(hf, f);
    }

    #[test]
    fn weyl_composes_additively() {
        let f = SparseTrigPoly::from_coeffs(
            2,
            [(vec![3, -2], c(1.0, -0.5)), (vec![-1, 5], c(0.25, 2.0))],
        )
        .unwrap();
        let a = f
            .weyl_derivative(&[0.75, 1.0], &[1.0, 0.5])
            .unwrap()
            .weyl_derivative(&[0.25, 1.0], &[0.5, 0.25])
            .unwrap();
        let b = f.weyl_derivative(&[1.0, 2.0], &[1.5, 0.75]).unwrap();
        for (k, cv) in a.iter() {
            assert!((cv - b.get(k)).norm() < 1e-12);
        }
    }

    #[test]
    fn convolution_is_coefficientwise() {
        let e1 = SparseTrigPoly::from_coeffs(1, [(vec![1], c(1.0, 0.0))]).unwrap();
        let conv = e1.convolve(&e1).unwrap();
        assert_eq!(conv, e1, "e^{{ix}} * e^{{ix}} = e^{{ix}} under the normalized measure");
        let e2 = SparseTrigPoly::from_coeffs(1, [(vec![2], c(1.0, 0.0))]).unwrap();
        assert!(e1.convolve(&e2).unwrap().is_empty(), "disjoint supports annihilate");
    }

    #[test]
    fn parseval_on_grid() {
        let f = SparseTrigPoly::from_coeffs(
            2,
            [
                (vec![1, 2], c(0.5, -1.0)),
                (vec![-3, 1], c(1.5, 0.25)),
                (vec![2, -2], c(0.0, 0.7)),
            ],
        )
        .unwrap();
        let grid = QuadratureGrid::for_bandwidth(&f.max_freq(), 2).unwrap();
        let samples = f.synthesize(&grid).unwrap();
        let quad_l2 = mean_power_norm(&samples, 2.0);
        assert!((quad_l2 - f.l2_norm()).abs() < 1e-12 * f.l2_norm());
    }

    #[test]
    fn synthesize_checks_coverage() {
        let f = SparseTrigPoly::from_coeffs(1, [(vec![9], c(1.0, 0.0))]).unwrap();
        let grid = QuadratureGrid::new(vec![16], 1).unwrap();
        assert!(matches!(f.synthesize(&grid), Err(Error::GridTooSmall { .. })));
        let grid = QuadratureGrid::new(vec![32], 1).unwrap();
        assert!(f.synthesize(&grid).is_ok());
    }

    #[test]
    fn coefficient_file_roundtrip() {
        let f = SparseTrigPoly::from_coeffs(
            2,
            [
                (vec![-3, 2], c(0.125, -7.5e-3)),
                (vec![1, 1], c(1.0, 0.0)),
                (vec![5, -1], c(-0.3333333333333333, 2.0)),
            ],
        )
        .unwrap();
        let mut buf = Vec::new();
        f.write_coeffs(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("d=2\n"));
        let g = SparseTrigPoly::read_coeffs(buf.as_slice()).unwrap();
        assert_eq!(f, g, "exact roundtrip through shortest decimal form");
    }

    #[test]
    fn coefficient_file_rejections() {
        let dup = "d=1\n1 1.0 0.0\n1 2.0 0.0\n";
        assert!(matches!(SparseTrigPoly::read_coeffs(dup.as_bytes()), Err(Error::Parse(_))));
        let short = "d=2\n1 1.0 0.0\n";
        assert!(matches!(SparseTrigPoly::read_coeffs(short.as_bytes()), Err(Error::Parse(_))));
        let bad_header = "dim 2\n";
        assert!(matches!(SparseTrigPoly::read_coeffs(bad_header.as_bytes()), Err(Error::Parse(_))));
        let nan = "d=1\n1 nan 0.0\n";
        assert!(SparseTrigPoly::read_coeffs(nan.as_bytes()).is_err());
        let empty = "";
        assert!(SparseTrigPoly::read_coeffs(empty.as_bytes()).is_err());
    }

    #[test]
    fn tensor_term_validation() {
        let mut f = TensorBlockPoly::new(2).unwrap();
        let good = TensorTerm::dirichlet(Block::new(vec![2, 1]).unwrap());
        assert_eq!(good.factors[0].len(), 4);
        assert_eq!(good.factors[1].len(), 2);
        f.push(good.clone()).unwrap();
        assert!(f.push(good).is_err(), "duplicate block rejected");
        let mut bad = TensorTerm::dirichlet(Block::new(vec![2, 1]).unwrap());
        bad.factors[0].pop();
        bad.block = Block::new(vec![2, 2]).unwrap();
        assert!(f.push(bad).is_err(), "factor length must be 2^s_j");
    }

    #[test]
    fn tensor_expansion_matches_manual_product() {
        let mut f = TensorBlockPoly::new(2).unwrap();
        let mut t = TensorTerm::dirichlet(Block::new(vec![1, 2]).unwrap());
        t.weight = c(2.0, 0.0);
        // factors over freqs [-1, 1] and [-3, -2, 2, 3]
        t.factors[0] = vec![c(1.0, 0.0), c(0.0, 1.0)];
        t.factors[1] = vec![c(1.0, 0.0), c(0.5, 0.0), c(0.0, 0.0), c(-1.0, 0.0)];
        f.push(t).unwrap();
        let s = f.to_sparse().unwrap();
        assert_eq!(s.get(&[-1, -3]), c(2.0, 0.0));
        assert_eq!(s.get(&[-1, -2]), c(1.0, 0.0));
        assert_eq!(s.get(&[1, 3]), c(0.0, -2.0));
        assert_eq!(s.get(&[1, 2]), c(0.0, 0.0));
        assert_eq!(s.support_len(), 6, "zero factor entries drop out");
        assert!((f.l2_norm() - s.l2_norm()).abs() < 1e-12);
    }

    #[test]
    fn tensor_weyl_agrees_with_sparse_weyl() {
        let mut f = TensorBlockPoly::new(2).unwrap();
        let mut t = TensorTerm::dirichlet(Block::new(vec![2, 1]).unwrap());
        t.factors[0][1] = c(0.5, -0.5);
        t.factors[1][0] = c(0.0, 2.0);
        f.push(t).unwrap();
        f.push(TensorTerm::dirichlet(Block::new(vec![1, 2]).unwrap())).unwrap();
        let r = [0.5, 1.5];
        let alpha = [1.0, 0.25];
        let a = f.weyl_derivative(&r, &alpha).unwrap().to_sparse().unwrap();
        let b = f.to_sparse().unwrap().weyl_derivative(&r, &alpha).unwrap();
        for (k, cv) in a.iter() {
            assert!((cv - b.get(k)).norm() < 1e-12, "k = {k:?}");
        }
        assert_eq!(a.support_len(), b.support_len());
    }

    #[test]
    fn tensor_cross_filters_by_block() {
        let mut f = TensorBlockPoly::new(2).unwrap();
        for s in [[1u32, 1], [1, 2], [2, 1], [2, 2]] {
            f.push(TensorTerm::dirichlet(Block::new(s.to_vec()).unwrap())).unwrap();
        }
        let cross = CrossSpec::new(4, vec![1.0, 1.0]).unwrap();
        let inside = f.restrict_to_cross(&cross).unwrap();
        let outside = f.tail_of_cross(&cross).unwrap();
        assert_eq!(inside.terms().len(), 3);
        assert_eq!(outside.terms().len(), 1);
        assert_eq!(outside.terms()[0].block.components(), &[2, 2]);
    }
}
