//! Unitary rotation of square pixellated images on the finite oscillator model.
//!
//! Pixel positions of an `N × N` screen are the eigenvalues of the su(2)
//! generator `Q = J1` in the representation `N = 2j + 1`. Rotations act on the
//! image through a real orthogonal `N² × N²` kernel built from the Kravchuk
//! wavefunctions and Wigner little-d functions, so they conserve the image's
//! norm, compose exactly and can be inverted.
//!
//! The crate is organised bottom-up:
//!
//! - [`oscillator`]: su(2) generators, little-d functions, Kravchuk wavefunctions.
//! - [`polar`]: the `(n, m)` polar labels and the polar wavefunctions.
//! - [`kernel`]: kernel construction (two independent routes), application and
//!   the on-disk kernel cache.
//! - [`image_model`]: mono/RGB images, normalization, clipping, test patterns
//!   and file formats.
//! - [`analysis`]: over/undershoot statistics of rotated images.

pub mod analysis;
pub mod error;
pub mod image_model;
pub mod kernel;
pub mod oscillator;
pub mod polar;

pub use error::{Error, Result};
pub use image_model::{MonoImage, PixelState, RgbImage};
pub use kernel::{KernelSource, RotationKernel};
pub use oscillator::{OscillatorRep, WavefunctionTable};
