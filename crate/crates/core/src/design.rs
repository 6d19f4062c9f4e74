//! Thin SVD of a standardized design and the canonical OLS quantities derived from it.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::data::{standardize, Dataset, ScaleMode, Standardization};
use crate::error::{Error, Result};

pub const DEFAULT_RANK_TOL: f64 = 1e-12;

/// Thin singular value decomposition `X = U diag(d) Wᵀ`.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    pub u: DMatrix<f64>,
    pub d: Vec<f64>,
    pub w: DMatrix<f64>,
}

impl ThinSvd {
    pub fn q(&self) -> usize {
        self.d.len()
    }
}

/// Computes the thin SVD, keeping singular values above `rank_tol · d₁`,
/// sorted in decreasing order.
pub fn decompose(x: &DMatrix<f64>, rank_tol: f64) -> Result<ThinSvd> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure("matrix has non-finite entries".into()));
    }
    if x.is_empty() {
        return Err(Error::SingularDesign);
    }
    let svd = x
        .clone()
        .try_svd(true, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::NumericalFailure("SVD did not converge".into()))?;
    let u_full = svd.u.ok_or_else(|| Error::NumericalFailure("missing left vectors".into()))?;
    let vt_full = svd.v_t.ok_or_else(|| Error::NumericalFailure("missing right vectors".into()))?;
    let sv = svd.singular_values;

    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
    let d1 = sv[order[0]];
    if !(d1 > 0.0) {
        return Err(Error::SingularDesign);
    }
    let kept: Vec<usize> = order.into_iter().filter(|&k| sv[k] > rank_tol * d1).collect();
    let q = kept.len();

    let mut u = DMatrix::zeros(x.nrows(), q);
    let mut w = DMatrix::zeros(x.ncols(), q);
    let mut d = Vec::with_capacity(q);
    for (col, &k) in kept.iter().enumerate() {
        // Fix the sign so the decomposition is reproducible across platforms.
        let wk = vt_full.row(k);
        let pivot = wk.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        u.set_column(col, &(u_full.column(k) * sign));
        w.set_column(col, &(wk.transpose() * sign));
        d.push(sv[k]);
    }
    Ok(ThinSvd { u, d, w })
}

/// Canonical OLS coefficients `α̂ = diag(d)⁻¹ Uᵀ y`.
pub fn canonical_ols(u: &DMatrix<f64>, d: &[f64], y: &DVector<f64>) -> Result<Vec<f64>> {
    if u.ncols() != d.len() {
        return Err(Error::DimensionMismatch { expected: u.ncols(), found: d.len() });
    }
    if u.nrows() != y.len() {
        return Err(Error::DimensionMismatch { expected: u.nrows(), found: y.len() });
    }
    let uty = u.tr_mul(y);
    d.iter()
        .enumerate()
        .map(|(k, &dk)| if dk > 0.0 { Ok(uty[k] / dk) } else { Err(Error::ZeroSingularValue(k)) })
        .collect()
}

/// The scalar summaries of a design that every marginal-likelihood computation needs.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    n: usize,
    d: Vec<f64>,
    d_sq: Vec<f64>,
    alpha_hat: Vec<f64>,
    yty: f64,
    ortho_ss: f64,
}

impl Spectrum {
    /// Builds a spectrum from singular values, canonical OLS coefficients and `yᵀy`.
    pub fn new(n: usize, d: Vec<f64>, alpha_hat: Vec<f64>, yty: f64) -> Result<Self> {
        let fitted: f64 = d.iter().zip(&alpha_hat).map(|(dk, ak)| (dk * ak).powi(2)).sum();
        Spectrum::with_residual(n, d, alpha_hat, yty, (yty - fitted).max(0.0))
    }

    /// Like [`Spectrum::new`] but with the OLS residual sum of squares supplied,
    /// which is more accurate than `yty − Σ c_k²` for near-interpolating fits.
    pub fn with_residual(
        n: usize,
        d: Vec<f64>,
        alpha_hat: Vec<f64>,
        yty: f64,
        ortho_ss: f64,
    ) -> Result<Self> {
        if d.is_empty() {
            return Err(Error::SingularDesign);
        }
        if d.len() != alpha_hat.len() {
            return Err(Error::DimensionMismatch { expected: d.len(), found: alpha_hat.len() });
        }
        if n == 0 {
            return Err(Error::TooFewRows { needed: 1, found: 0 });
        }
        if let Some(k) = d.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::ZeroSingularValue(k));
        }
        if !(yty >= 0.0 && yty.is_finite()) || alpha_hat.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidArgument("non-finite response summary".into()));
        }
        let d_sq = d.iter().map(|v| v * v).collect();
        Ok(Spectrum { n, d, d_sq, alpha_hat, yty, ortho_ss: ortho_ss.max(0.0) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.d.len()
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    pub fn d_sq(&self) -> &[f64] {
        &self.d_sq
    }

    pub fn alpha_hat(&self) -> &[f64] {
        &self.alpha_hat
    }

    pub fn yty(&self) -> f64 {
        self.yty
    }

    /// `‖y − U Uᵀ y‖²`, the OLS residual sum of squares.
    pub fn ortho_ss(&self) -> f64 {
        self.ortho_ss
    }

    /// `(Uᵀy)_k = d_k α̂_k`.
    pub fn uty(&self, k: usize) -> f64 {
        self.d[k] * self.alpha_hat[k]
    }

    /// `yty − Σ α̂_k² d_k⁴/(λ_k + d_k²)`, i.e. twice the data part of b̄.
    ///
    /// Evaluated as `ortho_ss + Σ c_k² λ_k/(λ_k + d_k²)` which never cancels.
    pub fn residual_term(&self, lambdas: &[f64]) -> f64 {
        let shrunk: f64 = (0..self.q())
            .map(|k| {
                let c2 = self.uty(k).powi(2);
                let lam = lambdas[k];
                if lam.is_infinite() {
                    c2
                } else {
                    c2 * lam / (lam + self.d_sq[k])
                }
            })
            .sum();
        self.ortho_ss + shrunk
    }

    /// Ridge residual sum of squares `‖y − X β̄_λ‖²`.
    pub fn rss(&self, lambdas: &[f64]) -> f64 {
        let shrunk: f64 = (0..self.q())
            .map(|k| {
                let c2 = self.uty(k).powi(2);
                let lam = lambdas[k];
                let shrink = if lam.is_infinite() { 1.0 } else { lam / (lam + self.d_sq[k]) };
                c2 * shrink * shrink
            })
            .sum();
        self.ortho_ss + shrunk
    }

    /// Effective degrees of freedom `Σ d_k²/(d_k² + λ_k)`.
    pub fn df(&self, lambdas: &[f64]) -> f64 {
        self.d_sq.iter().zip(lambdas).map(|(d2, l)| d2 / (d2 + l)).sum()
    }

    /// Degrees of freedom for variance `Σ d_k⁴/(d_k² + λ_k)²`.
    pub fn df_variance(&self, lambdas: &[f64]) -> f64 {
        self.d_sq.iter().zip(lambdas).map(|(d2, l)| (d2 / (d2 + l)).powi(2)).sum()
    }

    /// Multiplies every column of the design by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Spectrum::with_residual(
            self.n,
            self.d.iter().map(|v| v * c).collect(),
            self.alpha_hat.iter().map(|v| v / c).collect(),
            self.yty,
            self.ortho_ss,
        )
    }
}

/// Anything that can supply a [`Spectrum`].
pub trait AsSpectrum {
    fn as_spectrum(&self) -> &Spectrum;
}

impl AsSpectrum for Spectrum {
    fn as_spectrum(&self) -> &Spectrum {
        self
    }
}

impl AsSpectrum for StandardizedDesign {
    fn as_spectrum(&self) -> &Spectrum {
        &self.spectrum
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DesignOptions {
    pub mode: ScaleMode,
    pub scale_y: bool,
    pub rank_tol: f64,
}

impl Default for DesignOptions {
    fn default() -> Self {
        DesignOptions { mode: ScaleMode::UnitVariance, scale_y: true, rank_tol: DEFAULT_RANK_TOL }
    }
}

/// A centered and scaled design together with its thin SVD.
#[derive(Debug, Clone)]
pub struct StandardizedDesign {
    x: DMatrix<f64>,
    y: DVector<f64>,
    u: DMatrix<f64>,
    w: DMatrix<f64>,
    spectrum: Spectrum,
    standardization: Standardization,
    names: Vec<String>,
}

impl StandardizedDesign {
    pub fn from_dataset(dataset: &Dataset, opts: &DesignOptions) -> Result<Self> {
        let (x, y, s) = standardize(dataset, opts.mode, opts.scale_y)?;
        let mut design = StandardizedDesign::from_standardized(x, y, s, opts.rank_tol)?;
        design.names = dataset.covariate_names().to_vec();
        Ok(design)
    }

    /// Wraps data that is already on the model scale.
    pub fn from_standardized(
        x: DMatrix<f64>,
        y: DVector<f64>,
        standardization: Standardization,
        rank_tol: f64,
    ) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::DimensionMismatch { expected: x.nrows(), found: y.len() });
        }
        if standardization.p() != x.ncols() {
            return Err(Error::DimensionMismatch { expected: x.ncols(), found: standardization.p() });
        }
        let svd = decompose(&x, rank_tol)?;
        let alpha_hat = canonical_ols(&svd.u, &svd.d, &y)?;
        let uty = svd.u.tr_mul(&y);
        let ortho_ss = (&y - &svd.u * uty).norm_squared();
        let spectrum =
            Spectrum::with_residual(x.nrows(), svd.d, alpha_hat, y.norm_squared(), ortho_ss)?;
        let names = (1..=x.ncols()).map(|j| format!("x{j}")).collect();
        Ok(StandardizedDesign { x, y, u: svd.u, w: svd.w, spectrum, standardization, names })
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn u(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn w(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn standardization(&self) -> &Standardization {
        &self.standardization
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.names
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn q(&self) -> usize {
        self.spectrum.q()
    }

    pub fn d(&self) -> &[f64] {
        self.spectrum.d()
    }

    pub fn alpha_hat(&self) -> &[f64] {
        self.spectrum.alpha_hat()
    }

    pub fn yty(&self) -> f64 {
        self.spectrum.yty()
    }

    /// Writes the design to a versioned little-endian binary cache.
    pub fn write_cache<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(CACHE_MAGIC)?;
        put_u64(&mut out, CACHE_VERSION)?;
        let (n, p, q) = (self.n(), self.p(), self.q());
        for v in [n, p, q] {
            put_u64(&mut out, v as u64)?;
        }
        let s = &self.standardization;
        put_u64(&mut out, matches!(s.mode, ScaleMode::UnitSumOfSquares) as u64)?;
        put_u64(&mut out, s.y_scaled as u64)?;
        put_f64s(&mut out, &[s.y_mean, s.y_scale])?;
        put_f64s(&mut out, &s.x_means)?;
        put_f64s(&mut out, &s.x_scales)?;
        put_f64s(&mut out, self.x.as_slice())?;
        put_f64s(&mut out, self.y.as_slice())?;
        put_f64s(&mut out, self.u.as_slice())?;
        put_f64s(&mut out, self.w.as_slice())?;
        put_f64s(&mut out, self.spectrum.d())?;
        put_f64s(&mut out, self.spectrum.alpha_hat())?;
        put_f64s(&mut out, &[self.spectrum.yty(), self.spectrum.ortho_ss()])?;
        for name in &self.names {
            put_u64(&mut out, name.len() as u64)?;
            out.write_all(name.as_bytes())?;
        }
        Ok(())
    }

    pub fn read_cache<R: Read>(mut input: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic).map_err(|_| Error::CacheFormat("truncated header".into()))?;
        if &magic != CACHE_MAGIC {
            return Err(Error::CacheFormat("not a design cache".into()));
        }
        let version = get_u64(&mut input)?;
        if version != CACHE_VERSION {
            return Err(Error::CacheFormat(format!("unsupported cache version {version}")));
        }
        let n = get_len(&mut input)?;
        let p = get_len(&mut input)?;
        let q = get_len(&mut input)?;
        let mode = match get_u64(&mut input)? {
            0 => ScaleMode::UnitVariance,
            1 => ScaleMode::UnitSumOfSquares,
            m => return Err(Error::CacheFormat(format!("bad scale mode {m}"))),
        };
        let y_scaled = get_u64(&mut input)? != 0;
        let ys = get_f64s(&mut input, 2)?;
        let x_means = get_f64s(&mut input, p)?;
        let x_scales = get_f64s(&mut input, p)?;
        let x = DMatrix::from_vec(n, p, get_f64s(&mut input, n * p)?);
        let y = DVector::from_vec(get_f64s(&mut input, n)?);
        let u = DMatrix::from_vec(n, q, get_f64s(&mut input, n * q)?);
        let w = DMatrix::from_vec(p, q, get_f64s(&mut input, p * q)?);
        let d = get_f64s(&mut input, q)?;
        let alpha_hat = get_f64s(&mut input, q)?;
        let tail = get_f64s(&mut input, 2)?;
        let mut names = Vec::with_capacity(p);
        for _ in 0..p {
            let len = get_len(&mut input)?;
            let mut buf = vec![0u8; len];
            input.read_exact(&mut buf).map_err(|_| Error::CacheFormat("truncated names".into()))?;
            names.push(String::from_utf8(buf).map_err(|_| Error::CacheFormat("bad name".into()))?);
        }
        let standardization =
            Standardization { y_mean: ys[0], y_scale: ys[1], x_means, x_scales, mode, y_scaled };
        let spectrum = Spectrum::with_residual(n, d, alpha_hat, tail[0], tail[1])?;
        Ok(StandardizedDesign { x, y, u, w, spectrum, standardization, names })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_cache(&mut out)?;
        out.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        StandardizedDesign::read_cache(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

const CACHE_MAGIC: &[u8; 8] = b"RMMLSVD\0";
const CACHE_VERSION: u64 = 1;

fn put_u64<W: Write>(out: &mut W, v: u64) -> Result<()> {
    out.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn put_f64s<W: Write>(out: &mut W, values: &[f64]) -> Result<()> {
    for v in values {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn get_u64<R: Read>(input: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    input.read_exact(&mut buf).map_err(|_| Error::CacheFormat("truncated cache".into()))?;
    Ok(u64::from_le_bytes(buf))
}

fn get_len<R: Read>(input: &mut R) -> Result<usize> {
    let v = get_u64(input)?;
    if v > (1 << 40) {
        return Err(Error::CacheFormat(format!("implausible length {v}")));
    }
    Ok(v as usize)
}

fn get_f64s<R: Read>(input: &mut R, count: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    let mut buf = [0u8; 8];
    for _ in 0..count {
        input.read_exact(&mut buf).map_err(|_| Error::CacheFormat("truncated cache".into()))?;
        out.push(f64::from_le_bytes(buf));
    }
    Ok(out)
}
