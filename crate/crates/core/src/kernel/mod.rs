//! The real unitary `N² × N²` rotation kernel of a square screen.
//!
//! Rows and columns are indexed by the flattened pixel `ix * N + iy`
//! (`ix` major). A kernel row `r` holds the weights of every input pixel in
//! output pixel `r`: `F'[r] = Σ_c R[r, c] F[c]`.
//!
//! Positive angles turn the image clockwise in the `(qx, qy)` plane with
//! `qy` pointing up. On a raster with row index `iy` growing downward this
//! shows as a counter-clockwise turn.

mod cache;

use std::borrow::Cow;

use ndarray::{linalg::general_mat_mul, Array1, Array2, ArrayView2, ArrayViewMut2, Zip};
use num_complex::Complex64;
use rayon::prelude::*;

pub use cache::{
    load_kernel, load_kernel_with_checksum, payload_checksum, save_kernel, CacheOutcome, DiskCache,
    CACHE_MAGIC,
};

use crate::error::{domain, Error, Result};
use crate::image_model::{MonoImage, PixelState};
use crate::oscillator::{OscillatorRep, WavefunctionTable, WignerMatrix};
use crate::polar::{shells, PolarBasis};

/// Imaginary residue of a polar-built kernel above which the build is refused.
pub const IMAG_RESIDUE_LIMIT: f64 = 1e-6;
/// Imaginary residue above which a polar build is reported as suspicious.
pub const IMAG_RESIDUE_WARN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct RotationKernel {
    rep: OscillatorRep,
    theta: f64,
    matrix: Array2<f64>,
}

impl RotationKernel {
    /// Wraps a prebuilt matrix. The shape must be `N² × N²` for `rep`.
    pub fn from_matrix(rep: OscillatorRep, theta: f64, matrix: Array2<f64>) -> Result<Self> {
        let dim = rep.side() * rep.side();
        if matrix.dim() != (dim, dim) {
            return Err(domain(format!(
                "kernel matrix is {:?}, expected {dim}x{dim}",
                matrix.dim()
            )));
        }
        let matrix = if matrix.is_standard_layout() {
            matrix
        } else {
            matrix.as_standard_layout().into_owned()
        };
        Ok(Self { rep, theta, matrix })
    }

    pub fn rep(&self) -> OscillatorRep {
        self.rep
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn side(&self) -> usize {
        self.rep.side()
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    /// Mutable access for test hooks that perturb a built kernel.
    pub fn matrix_mut(&mut self) -> &mut Array2<f64> {
        &mut self.matrix
    }

    pub fn into_matrix(self) -> Array2<f64> {
        self.matrix
    }

    /// Kernel for `-θ`, i.e. the transpose.
    pub fn inverse(&self) -> Self {
        Self {
            rep: self.rep,
            theta: -self.theta,
            matrix: self.matrix.t().as_standard_layout().into_owned(),
        }
    }

    fn matches(&self, rep: OscillatorRep, theta: f64) -> bool {
        self.rep == rep && self.theta.to_bits() == theta.to_bits()
    }
}

fn check_angle(theta: f64) -> Result<()> {
    if theta.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("rotation angle must be finite, got {theta}")))
    }
}

/// Builds the kernel from the Cartesian modes and per-shell little-d matrices
/// at twice the angle. Real arithmetic throughout, about `3 N⁵` flops, rows in
/// parallel on the current rayon pool.
pub fn build_kernel_cartesian(
    rep: OscillatorRep,
    theta: f64,
    table: &WavefunctionTable,
) -> Result<RotationKernel> {
    check_angle(theta)?;
    if table.rep() != rep {
        return Err(domain("wavefunction table built for a different screen size"));
    }
    let side = rep.side();
    let dim = side * side;
    let shells = shells(rep);
    // Lower shells turn with d(-2θ), their upper reflections with d(+2θ).
    let dmats: Vec<WignerMatrix> = shells
        .iter()
        .map(|sh| {
            let sign = if sh.upper { 1.0 } else { -1.0 };
            WignerMatrix::new(sh.two_spin, sign * 2.0 * theta)
        })
        .collect();
    let psi = table.values();

    let mut matrix = Array2::<f64>::zeros((dim, dim));
    let data = matrix
        .as_slice_mut()
        .expect("freshly allocated kernel is contiguous");
    data.par_chunks_mut(dim).enumerate().for_each_init(
        || (Array2::<f64>::zeros((side, side)), Array2::<f64>::zeros((side, side))),
        |(modes, tmp), (r, row)| {
            let (ix, iy) = (r / side, r % side);
            for (sh, d) in shells.iter().zip(&dmats) {
                let dv = d.values();
                let len = sh.len();
                let x0 = sh.nx_min as usize;
                let n = sh.n as usize;
                for b in 0..len {
                    let mut acc = 0.0;
                    for a in 0..len {
                        let nx = x0 + a;
                        acc += dv[[a, b]] * psi[[nx, ix]] * psi[[n - nx, iy]];
                    }
                    let nx = x0 + b;
                    modes[[nx, n - nx]] = acc;
                }
            }
            general_mat_mul(1.0, &psi.t(), modes, 0.0, tmp);
            let mut out = ArrayViewMut2::from_shape((side, side), row).expect("row has N² entries");
            general_mat_mul(1.0, tmp, psi, 0.0, &mut out);
        },
    );
    RotationKernel::from_matrix(rep, theta, matrix)
}

/// Result of the polar construction: the real kernel and the largest
/// imaginary part that was discarded.
#[derive(Debug, Clone)]
pub struct PolarBuild {
    pub kernel: RotationKernel,
    pub max_imag: f64,
}

impl PolarBuild {
    /// True when the discarded imaginary part exceeds the soft threshold.
    pub fn suspicious(&self) -> bool {
        self.max_imag > IMAG_RESIDUE_WARN
    }
}

/// Splits the basis into real and imaginary `N² × N²` matrices with pixels
/// (x-major) as rows and modes as columns.
fn basis_matrices(basis: &PolarBasis) -> (Array2<f64>, Array2<f64>) {
    let side = basis.rep().side();
    let dim = side * side;
    let mut re = Array2::<f64>::zeros((dim, dim));
    let mut im = Array2::<f64>::zeros((dim, dim));
    for (k, mode) in basis.modes().iter().enumerate() {
        for iy in 0..side {
            for ix in 0..side {
                let v = mode.values[[iy, ix]];
                re[[ix * side + iy, k]] = v.re;
                im[[ix * side + iy, k]] = v.im;
            }
        }
    }
    (re, im)
}

/// `R = Σ Λ e^{-imθ} Λ*` over the whole polar basis, as four real products.
pub fn build_kernel_polar(
    rep: OscillatorRep,
    theta: f64,
    basis: &PolarBasis,
) -> Result<PolarBuild> {
    check_angle(theta)?;
    if basis.rep() != rep {
        return Err(domain("polar basis built for a different screen size"));
    }
    let (ar, ai) = basis_matrices(basis);
    let dim = ar.nrows();
    let (cos, sin): (Vec<f64>, Vec<f64>) = basis
        .modes()
        .iter()
        .map(|m| (f64::from(m.index.m()) * theta).sin_cos())
        .map(|(s, c)| (c, s))
        .unzip();
    let cos = Array1::from(cos);
    let sin = Array1::from(sin);
    // X = A · diag(e^{-imθ})
    let xr = &ar * &cos + &ai * &sin;
    let xi = &ai * &cos - &ar * &sin;

    let mut re = Array2::<f64>::zeros((dim, dim));
    general_mat_mul(1.0, &xr, &ar.t(), 0.0, &mut re);
    general_mat_mul(1.0, &xi, &ai.t(), 1.0, &mut re);
    let mut im = Array2::<f64>::zeros((dim, dim));
    general_mat_mul(1.0, &xi, &ar.t(), 0.0, &mut im);
    general_mat_mul(-1.0, &xr, &ai.t(), 1.0, &mut im);

    let max_imag = im.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if max_imag > IMAG_RESIDUE_LIMIT {
        return Err(Error::Consistency(format!(
            "polar kernel has imaginary residue {max_imag:e}"
        )));
    }
    Ok(PolarBuild {
        kernel: RotationKernel::from_matrix(rep, theta, re)?,
        max_imag,
    })
}

/// Pixel vector of an image in kernel order.
pub(crate) fn to_vector(pixels: ArrayView2<'_, f64>) -> Array1<f64> {
    pixels.t().iter().copied().collect()
}

pub(crate) fn from_vector(side: usize, v: &[f64]) -> Array2<f64> {
    Array2::from_shape_fn((side, side), |(iy, ix)| v[ix * side + iy])
}

/// Matrix-vector product over the kernel rows, in parallel.
pub(crate) fn apply_matrix(matrix: &Array2<f64>, v: &Array1<f64>) -> Vec<f64> {
    let dim = v.len();
    let v = v.as_slice().expect("vector is contiguous");
    let data = matrix.as_slice().expect("kernel is contiguous");
    data.par_chunks(dim)
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// `F' = R F`. The result is a data-image.
pub fn apply_kernel(kernel: &RotationKernel, image: &MonoImage) -> Result<MonoImage> {
    if image.side() != kernel.side() {
        return Err(domain(format!(
            "image is {0}x{0} but the kernel is for {1}x{1}",
            image.side(),
            kernel.side()
        )));
    }
    let v = to_vector(image.pixels().view());
    let out = apply_matrix(kernel.matrix(), &v);
    MonoImage::new(from_vector(kernel.side(), &out), PixelState::Data)
}

/// Rotation through the polar coefficients, `Σ Λ e^{-imθ} ⟨Λ, F⟩`, without
/// forming the kernel. Returns the real part and the largest imaginary part.
pub fn apply_polar(basis: &PolarBasis, image: &MonoImage, theta: f64) -> Result<(MonoImage, f64)> {
    check_angle(theta)?;
    let side = basis.rep().side();
    if image.side() != side {
        return Err(domain(format!(
            "image is {0}x{0} but the basis is for {1}x{1}",
            image.side(),
            side
        )));
    }
    let f = image.pixels();
    let out = basis
        .modes()
        .par_iter()
        .map(|mode| {
            let coeff: Complex64 = Zip::from(&mode.values)
                .and(f)
                .fold(Complex64::new(0.0, 0.0), |acc, l, &v| acc + l.conj() * v);
            let phase = Complex64::from_polar(1.0, -f64::from(mode.index.m()) * theta);
            mode.values.mapv(|l| l * phase * coeff)
        })
        .reduce(
            || Array2::<Complex64>::zeros((side, side)),
            |a, b| a + b,
        );
    let max_imag = out.iter().fold(0.0f64, |acc, v| acc.max(v.im.abs()));
    let img = MonoImage::new(out.mapv(|v| v.re), PixelState::Data)?;
    Ok((img, max_imag))
}

/// `max |a - b|` elementwise.
pub fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    Zip::from(a)
        .and(b)
        .fold(0.0f64, |acc, x, y| acc.max((x - y).abs()))
}

/// `max |R Rᵀ - I|`
pub fn unitarity_residual(kernel: &RotationKernel) -> f64 {
    let m = kernel.matrix();
    let dim = m.nrows();
    let mut prod = Array2::<f64>::eye(dim);
    general_mat_mul(1.0, m, &m.t(), -1.0, &mut prod);
    prod.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// `max |R - I|`
pub fn identity_residual(kernel: &RotationKernel) -> f64 {
    max_abs_diff(kernel.matrix(), &Array2::eye(kernel.matrix().nrows()))
}

/// `max |R(θ₁) R(θ₂) - R(θ₁ + θ₂)|`, with the reference kernel built fresh by
/// the Cartesian route. `O(N⁶)`; meant for small screens.
pub fn compose_check(k1: &RotationKernel, k2: &RotationKernel) -> Result<f64> {
    if k1.rep() != k2.rep() {
        return Err(domain(format!(
            "cannot compose kernels for N = {} and N = {}",
            k1.side(),
            k2.side()
        )));
    }
    let rep = k1.rep();
    let reference =
        build_kernel_cartesian(rep, k1.theta() + k2.theta(), &WavefunctionTable::new(rep))?;
    let dim = reference.matrix().nrows();
    let mut prod = Array2::<f64>::zeros((dim, dim));
    general_mat_mul(1.0, k1.matrix(), k2.matrix(), 0.0, &mut prod);
    Ok(max_abs_diff(&prod, reference.matrix()))
}

/// Anything that can hand out the kernel for a given screen and angle.
pub trait KernelSource {
    fn kernel(&self, rep: OscillatorRep, theta: f64) -> Result<Cow<'_, RotationKernel>>;
}

/// A built kernel serves only its own screen size and (bit-identical) angle.
impl KernelSource for RotationKernel {
    fn kernel(&self, rep: OscillatorRep, theta: f64) -> Result<Cow<'_, RotationKernel>> {
        if self.matches(rep, theta) {
            Ok(Cow::Borrowed(self))
        } else {
            Err(domain(format!(
                "kernel is for N = {}, θ = {}; requested N = {}, θ = {}",
                self.side(),
                self.theta,
                rep.side(),
                theta
            )))
        }
    }
}

/// Builds a fresh Cartesian kernel on every request.
#[derive(Debug, Clone, Copy, Default)]
pub struct CartesianBuilder;

impl KernelSource for CartesianBuilder {
    fn kernel(&self, rep: OscillatorRep, theta: f64) -> Result<Cow<'_, RotationKernel>> {
        let table = WavefunctionTable::new(rep);
        build_kernel_cartesian(rep, theta, &table).map(Cow::Owned)
    }
}
