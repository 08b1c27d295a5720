//! Python bindings for the hypercross library.
//!
//! The module mirrors the Rust surface in a flat namespace: sparse
//! polynomials, smoothness profiles with their step-hyperbolic crosses,
//! quadrature norms (`L_p`, block-sum `B_{q,1}` in both block modes), the
//! smoothing approximant and its residual, error sweeps with the CSV row
//! schema, and the two-exponent rate fits. Frequencies are plain tuples of
//! ints, coefficients are Python complex numbers.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use hypercross::analysis;
use hypercross::approx;
use hypercross::kernels::{self, Generator};
use hypercross::norms::{self, BlockMode, NormSpec};
use hypercross::trigpoly::PolyExpr;
use hypercross::{CrossSpec, CrossVariant, SmoothnessProfile, SparseTrigPoly};

fn pyerr(e: hypercross::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_mode(mode: &str) -> PyResult<BlockMode> {
    match mode {
        "delta" => Ok(BlockMode::Delta),
        "akernel" => Ok(BlockMode::AKernel),
        other => Err(PyValueError::new_err(format!(
            "unknown block mode `{other}` (expected `delta` or `akernel`)"
        ))),
    }
}

/// Mixed-smoothness profile: the vector `r` with its derived cross weights.
#[pyclass(frozen)]
struct Profile {
    inner: SmoothnessProfile,
}

#[pymethods]
impl Profile {
    #[new]
    fn new(r: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: SmoothnessProfile::new(&r).map_err(pyerr)? })
    }

    #[getter]
    fn gamma(&self) -> Vec<f64> {
        self.inner.gamma().to_vec()
    }

    #[getter]
    fn gamma_prime(&self) -> Vec<f64> {
        self.inner.gamma_prime().to_vec()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// Step-hyperbolic cross of level `n` under `gamma`, `gamma_prime` or
    /// `ones` weights.
    fn cross(&self, n: u32, variant: &str) -> PyResult<Cross> {
        let v = CrossVariant::parse(variant).map_err(pyerr)?;
        Ok(Cross { inner: self.inner.cross(n, v).map_err(pyerr)? })
    }

    fn __repr__(&self) -> String {
        format!("Profile(r={:?})", self.inner.gamma())
    }
}

/// A step-hyperbolic cross: the block set `{ s : (s, weights) < n }`.
#[pyclass(frozen)]
struct Cross {
    inner: CrossSpec,
}

#[pymethods]
impl Cross {
    #[getter]
    fn n(&self) -> u32 {
        self.inner.n()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.weights().to_vec()
    }

    /// Number of lattice points covered by the cross.
    fn cardinality(&self) -> u128 {
        hypercross::index::cross_cardinality(&self.inner)
    }

    /// Whether the block `s` belongs to the cross.
    fn contains(&self, s: Vec<u32>) -> PyResult<bool> {
        let b = hypercross::Block::new(s).map_err(pyerr)?;
        Ok(self.inner.contains(&b))
    }

    /// The block indices of the cross, lexicographically ordered.
    fn blocks(&self) -> Vec<Vec<u32>> {
        hypercross::index::cross_blocks(&self.inner)
            .into_iter()
            .map(|b| b.components().to_vec())
            .collect()
    }

    fn __repr__(&self) -> String {
        format!("Cross(n={}, weights={:?})", self.inner.n(), self.inner.weights())
    }
}

/// Sparse multivariate trigonometric polynomial: a frequency-to-coefficient
/// map.
#[pyclass]
struct Poly {
    inner: SparseTrigPoly,
}

#[pymethods]
impl Poly {
    #[new]
    fn new(dim: usize) -> PyResult<Self> {
        Ok(Self { inner: SparseTrigPoly::new(dim).map_err(pyerr)? })
    }

    /// Reads the text coefficient format (`dim` header plus one
    /// `k_1 ... k_d re im` row per frequency).
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let file = std::fs::File::open(path)
            .map_err(|e| PyValueError::new_err(format!("{path}: {e}")))?;
        let inner =
            SparseTrigPoly::read_coeffs(std::io::BufReader::new(file)).map_err(pyerr)?;
        Ok(Self { inner })
    }

    /// Writes the text coefficient format.
    fn save(&self, path: &str) -> PyResult<()> {
        let mut file = std::fs::File::create(path)
            .map_err(|e| PyValueError::new_err(format!("{path}: {e}")))?;
        self.inner.write_coeffs(&mut file).map_err(pyerr)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn __len__(&self) -> usize {
        self.inner.support_len()
    }

    fn get(&self, k: Vec<i32>) -> Complex64 {
        self.inner.get(&k)
    }

    fn set(&mut self, k: Vec<i32>, c: Complex64) -> PyResult<()> {
        self.inner.set(k, c).map_err(pyerr)
    }

    /// `(frequency, coefficient)` pairs in lexicographic frequency order.
    fn items(&self) -> Vec<(Vec<i32>, Complex64)> {
        self.inner.iter().map(|(k, c)| (k.clone(), *c)).collect()
    }

    /// Coefficient `l_2` norm; equals the `L_2` norm by Parseval.
    fn l2_norm(&self) -> f64 {
        self.inner.l2_norm()
    }

    fn scale(&self, c: Complex64) -> Self {
        Self { inner: self.inner.scale(c) }
    }

    fn add(&self, other: &Self) -> PyResult<Self> {
        Ok(Self { inner: self.inner.add(&other.inner).map_err(pyerr)? })
    }

    fn sub(&self, other: &Self) -> PyResult<Self> {
        Ok(Self { inner: self.inner.sub(&other.inner).map_err(pyerr)? })
    }

    /// Weyl `(r, alpha)`-derivative (the dominating-mixed-derivative
    /// multiplier `prod_j |k_j|^{r_j} e^{i sign(k_j) alpha_j pi / 2}`).
    fn weyl(&self, r: Vec<f64>, alpha: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: self.inner.weyl_derivative(&r, &alpha).map_err(pyerr)? })
    }

    /// Restriction of the spectrum to the cross (the hyperbolic partial sum).
    fn restrict(&self, cross: &Cross) -> PyResult<Self> {
        Ok(Self { inner: self.inner.restrict_to_cross(&cross.inner).map_err(pyerr)? })
    }

    /// The complementary tail of [`restrict`].
    fn tail(&self, cross: &Cross) -> PyResult<Self> {
        Ok(Self { inner: self.inner.tail_of_cross(&cross.inner).map_err(pyerr)? })
    }

    fn __repr__(&self) -> String {
        format!("Poly(dim={}, support={})", self.inner.dim(), self.inner.support_len())
    }
}

/// One row of an error sweep, mirroring the CSV schema.
#[pyclass(frozen)]
struct Report {
    #[pyo3(get)]
    n: u32,
    #[pyo3(get)]
    cardinality: u128,
    #[pyo3(get)]
    value_ee: f64,
    #[pyo3(get)]
    value_e_upper: f64,
    #[pyo3(get)]
    value_e_lower: f64,
    #[pyo3(get)]
    space: String,
    #[pyo3(get)]
    cross_variant: String,
    #[pyo3(get)]
    seed: u64,
}

#[pymethods]
impl Report {
    fn __repr__(&self) -> String {
        format!(
            "Report(n={}, cardinality={}, value_ee={:.6e}, space={})",
            self.n, self.cardinality, self.value_ee, self.space
        )
    }
}

/// Two-exponent rate fit `log2 v = log2_c - a n + b log2 n`.
#[pyclass(frozen)]
struct Fit {
    #[pyo3(get)]
    a: f64,
    #[pyo3(get)]
    b: f64,
    #[pyo3(get)]
    log2_c: f64,
    #[pyo3(get)]
    residual: f64,
}

#[pymethods]
impl Fit {
    fn __repr__(&self) -> String {
        format!("Fit(a={:.4}, b={:.4}, log2_c={:.4}, residual={:.2e})", self.a, self.b, self.log2_c, self.residual)
    }
}

impl From<analysis::RateFit> for Fit {
    fn from(f: analysis::RateFit) -> Self {
        Self { a: f.a, b: f.b, log2_c: f.log2_c, residual: f.residual }
    }
}

/// Builds a generator expression, e.g. `g1(d=2,p=2,r1=1)` or
/// `bernoulli(r=1:2,N=6)`, expanding tensor forms to a sparse polynomial.
/// Level-aware generators bind `n`.
#[pyfunction]
#[pyo3(signature = (expr, n=None))]
fn generator(expr: &str, n: Option<u32>) -> PyResult<Poly> {
    let built = Generator::parse(expr).map_err(pyerr)?.build(n).map_err(pyerr)?;
    let inner = match built {
        PolyExpr::Sparse(f) => f,
        PolyExpr::Tensor(t) => t.to_sparse().map_err(pyerr)?,
    };
    Ok(Poly { inner })
}

/// `L_p` norm by oversampled quadrature (exact for even integer `p` when
/// the grid resolves the power).
#[pyfunction]
#[pyo3(signature = (f, p, rho_os=8))]
fn lp_norm(f: &Poly, p: f64, rho_os: usize) -> PyResult<f64> {
    norms::lp_norm_auto(&PolyExpr::Sparse(f.inner.clone()), p, rho_os).map_err(pyerr)
}

/// Block-sum norm: `sum_s |delta_s f|_q` in `delta` mode (needs `q > 1`),
/// `sum_s |A_s f|_q` in `akernel` mode.
#[pyfunction]
#[pyo3(signature = (f, q, mode="delta", rho_os=8))]
fn bq1_norm(f: &Poly, q: f64, mode: &str, rho_os: usize) -> PyResult<f64> {
    let m = parse_mode(mode)?;
    norms::bq1_norm(&PolyExpr::Sparse(f.inner.clone()), q, m, rho_os).map_err(pyerr)
}

/// Per-band norms `(s, |A_s f|_p)` over the band neighborhood of the
/// support.
#[pyfunction]
#[pyo3(signature = (f, p, rho_os=8))]
fn block_norms(f: &Poly, p: f64, rho_os: usize) -> PyResult<Vec<(Vec<u32>, f64)>> {
    Ok(norms::a_block_norms(&PolyExpr::Sparse(f.inner.clone()), p, rho_os)
        .map_err(pyerr)?
        .into_iter()
        .map(|(s, v)| (s.components().to_vec(), v))
        .collect())
}

/// The smoothing approximant `t_n = sum_{(s, gamma') < n - gamma'(d)} A_s f`.
#[pyfunction]
fn vp_approximant(f: &Poly, n: u32, profile: &Profile) -> PyResult<Poly> {
    Ok(Poly { inner: approx::vp_approximant(&f.inner, n, &profile.inner).map_err(pyerr)? })
}

/// The residual `f - t_n` of [`vp_approximant`].
#[pyfunction]
fn vp_residual(f: &Poly, n: u32, profile: &Profile) -> PyResult<Poly> {
    Ok(Poly { inner: approx::vp_residual(&f.inner, n, &profile.inner).map_err(pyerr)? })
}

/// Blockwise tail error of the hyperbolic partial sum in the block-sum
/// norm; equals the best approximation error from the cross.
#[pyfunction]
#[pyo3(signature = (f, cross, q, rho_os=8))]
fn tail_error(f: &Poly, cross: &Cross, q: f64, rho_os: usize) -> PyResult<f64> {
    approx::fourier_tail_error(&PolyExpr::Sparse(f.inner.clone()), &cross.inner, q, rho_os)
        .map_err(pyerr)
}

/// Best block-norm approximation error from spectra inside the cross.
#[pyfunction]
#[pyo3(signature = (f, cross, q, rho_os=8))]
fn best_error_block(f: &Poly, cross: &Cross, q: f64, rho_os: usize) -> PyResult<f64> {
    approx::best_error_block(&PolyExpr::Sparse(f.inner.clone()), &cross.inner, q, rho_os)
        .map_err(pyerr)
}

/// `L_q` error of the hyperbolic partial sum.
#[pyfunction]
#[pyo3(signature = (f, cross, q, rho_os=8))]
fn lq_error(f: &Poly, cross: &Cross, q: f64, rho_os: usize) -> PyResult<f64> {
    approx::lq_error(&PolyExpr::Sparse(f.inner.clone()), &cross.inner, q, rho_os).map_err(pyerr)
}

/// Error sweep over a level range; deterministic for a fixed configuration.
#[pyfunction]
#[pyo3(signature = (generator, n_start, n_end, variant, space, seed=0, rho_os=8))]
fn sweep(
    generator: &str,
    n_start: u32,
    n_end: u32,
    variant: &str,
    space: &str,
    seed: u64,
    rho_os: usize,
) -> PyResult<Vec<Report>> {
    let config = approx::SweepConfig {
        generator: Generator::parse(generator).map_err(pyerr)?,
        n_start,
        n_end,
        variant: CrossVariant::parse(variant).map_err(pyerr)?,
        space: NormSpec::parse(space).map_err(pyerr)?,
        seed,
        rho_os,
    };
    Ok(approx::error_sweep(&config)
        .map_err(pyerr)?
        .into_iter()
        .map(|r| Report {
            n: r.n,
            cardinality: r.cardinality,
            value_ee: r.value_ee,
            value_e_upper: r.value_e_upper,
            value_e_lower: r.value_e_lower,
            space: r.space,
            cross_variant: r.cross_variant,
            seed: r.seed,
        })
        .collect())
}

/// Least-squares fit of `log2 v = log2_c - a n + b log2 n` over
/// `(n, v)` points.
#[pyfunction]
fn rate_fit(points: Vec<(u32, f64)>) -> PyResult<Fit> {
    Ok(analysis::rate_fit(&points).map_err(pyerr)?.into())
}

/// [`rate_fit`] after dropping the two smallest levels (preasymptotic
/// transients) - the window every report documents.
#[pyfunction]
fn rate_fit_skip_transient(points: Vec<(u32, f64)>) -> PyResult<Fit> {
    Ok(analysis::rate_fit_skip_transient(&points).map_err(pyerr)?.into())
}

/// One axis of a squared-Fejer representative: `j_m(k) |k|^{-r}` for
/// `0 < |k| <= 2m - 2`, `m = 2^half_log2`, where `j_m` is the normalized
/// triangle autocorrelation (a nonnegative unit-mean kernel spectrum with
/// quadratic rolloff).
#[pyfunction]
fn jackson_axis(half_log2: u32, r: f64) -> PyResult<Vec<(i32, Complex64)>> {
    kernels::jackson_bernoulli_axis(half_log2, r).map_err(pyerr)
}

/// Block-sum `L_1` error of the smoothing approximant for a separable
/// input given by per-axis coefficients, at each requested `n`; supports
/// bandwidths far beyond the sparse expansion limit.
#[pyfunction]
#[pyo3(signature = (axes, ns, profile, rho_os=8))]
fn separable_residual_band_l1(
    axes: Vec<Vec<(i32, Complex64)>>,
    ns: Vec<u32>,
    profile: &Profile,
    rho_os: usize,
) -> PyResult<Vec<f64>> {
    approx::separable_residual_band_l1(&axes, &ns, &profile.inner, rho_os).map_err(pyerr)
}

#[pymodule]
fn hypercross_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Profile>()?;
    m.add_class::<Cross>()?;
    m.add_class::<Poly>()?;
    m.add_class::<Report>()?;
    m.add_class::<Fit>()?;
    m.add_function(wrap_pyfunction!(generator, m)?)?;
    m.add_function(wrap_pyfunction!(lp_norm, m)?)?;
    m.add_function(wrap_pyfunction!(bq1_norm, m)?)?;
    m.add_function(wrap_pyfunction!(block_norms, m)?)?;
    m.add_function(wrap_pyfunction!(vp_approximant, m)?)?;
    m.add_function(wrap_pyfunction!(vp_residual, m)?)?;
    m.add_function(wrap_pyfunction!(tail_error, m)?)?;
    m.add_function(wrap_pyfunction!(best_error_block, m)?)?;
    m.add_function(wrap_pyfunction!(lq_error, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(rate_fit, m)?)?;
    m.add_function(wrap_pyfunction!(rate_fit_skip_transient, m)?)?;
    m.add_function(wrap_pyfunction!(jackson_axis, m)?)?;
    m.add_function(wrap_pyfunction!(separable_residual_band_l1, m)?)?;
    Ok(())
}
