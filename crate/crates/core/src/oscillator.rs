//! su(2) machinery of the one-dimensional finite oscillator.
//!
//! Spins and projections are passed around doubled (`two_j = 2j`,
//! `two_m = 2m`) so half-integer labels stay exact. Pixel and mode labels are
//! stored as non-negative offsets: pixel `i = q + j`, mode `n = κ + j`.

use std::f64::consts::FRAC_1_SQRT_2;

use ndarray::Array2;
use num_complex::Complex64;
use statrs::function::factorial::{ln_binomial, ln_factorial};

use crate::error::{domain, Result};

/// Representation of a line screen with `N = 2j + 1` pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OscillatorRep {
    two_j: u32,
}

impl OscillatorRep {
    pub fn from_two_j(two_j: u32) -> Self {
        Self { two_j }
    }

    /// Representation for a screen side of `n` pixels.
    pub fn from_side(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(domain("screen side must be at least 1 pixel"));
        }
        let two_j = u32::try_from(n - 1).map_err(|_| domain("screen side too large"))?;
        Ok(Self { two_j })
    }

    pub fn two_j(self) -> u32 {
        self.two_j
    }

    pub fn j(self) -> f64 {
        f64::from(self.two_j) / 2.0
    }

    /// Screen side `N = 2j + 1`.
    pub fn side(self) -> usize {
        self.two_j as usize + 1
    }

    /// True when `j` is an integer, i.e. when `N` is odd.
    pub fn is_integer_spin(self) -> bool {
        self.two_j.is_multiple_of(2)
    }

    /// Position eigenvalue `q = i - j` of pixel `i`.
    pub fn position(self, i: usize) -> f64 {
        i as f64 - self.j()
    }
}

/// The three generator matrices of the `N`-dimensional su(2) representation,
/// indexed by pixel offsets `(i, i')`.
#[derive(Debug, Clone)]
pub struct Su2Matrices {
    pub rep: OscillatorRep,
    /// Position `Q = J1`, real diagonal.
    pub q: Array2<f64>,
    /// Momentum `P = J2`, imaginary tridiagonal.
    pub p: Array2<Complex64>,
    /// Mode operator `K = J3` in the position basis, real tridiagonal.
    pub k: Array2<f64>,
}

pub fn su2_generators(rep: OscillatorRep) -> Su2Matrices {
    let n = rep.side();
    let two_j = rep.two_j as usize;
    let mut q = Array2::zeros((n, n));
    let mut p = Array2::zeros((n, n));
    let mut k = Array2::zeros((n, n));
    for i in 0..n {
        q[[i, i]] = rep.position(i);
        if i + 1 < n {
            // (j - q)(j + q + 1) with q = i - j
            let off = 0.5 * (((two_j - i) * (i + 1)) as f64).sqrt();
            k[[i, i + 1]] = off;
            k[[i + 1, i]] = off;
            p[[i, i + 1]] = Complex64::new(0.0, -off);
            p[[i + 1, i]] = Complex64::new(0.0, off);
        }
    }
    Su2Matrices { rep, q, p, k }
}

fn check_projection(two_j: u32, two_m: i32, what: &str) -> Result<()> {
    let two_j = two_j as i32;
    if two_m.abs() > two_j || (two_j - two_m) % 2 != 0 {
        return Err(domain(format!(
            "{what} projection {two_m}/2 is not in {{-j, ..., j}} for j = {two_j}/2"
        )));
    }
    Ok(())
}

/// Wigner little-d function `d^j_{m',m}(β)`.
///
/// Computed from the three-term recurrence in `m'`, seeded at both ends of the
/// column by closed forms evaluated in log space. Accurate to a few ulps times
/// `j` for the spins used on screens up to `N = 64` and beyond.
pub fn wigner_little_d(two_j: u32, two_mp: i32, two_m: i32, beta: f64) -> Result<f64> {
    check_projection(two_j, two_mp, "row")?;
    check_projection(two_j, two_m, "column")?;
    let col = ((two_j as i32 + two_m) / 2) as usize;
    let row = ((two_j as i32 + two_mp) / 2) as usize;
    let (s, c) = (0.5 * beta).sin_cos();
    Ok(little_d_column(two_j, col, s, c)[row])
}

/// `d^j_{m',m}(β)` from the explicit alternating factorial sum.
///
/// Kept as a reference evaluation for small spins (`j ≲ 15`); the alternating
/// terms cancel catastrophically as `j` grows.
pub fn wigner_little_d_sum(two_j: u32, two_mp: i32, two_m: i32, beta: f64) -> Result<f64> {
    check_projection(two_j, two_mp, "row")?;
    check_projection(two_j, two_m, "column")?;
    let tj = two_j as i64;
    let jpm = (tj + two_m as i64) / 2;
    let jmm = (tj - two_m as i64) / 2;
    let jpmp = (tj + two_mp as i64) / 2;
    let jmmp = (tj - two_mp as i64) / 2;
    let diff = jpmp - jpm; // m' - m
    let (s, c) = (0.5 * beta).sin_cos();
    let ln_pre = 0.5
        * (ln_factorial(jpm as u64)
            + ln_factorial(jmm as u64)
            + ln_factorial(jpmp as u64)
            + ln_factorial(jmmp as u64));
    let k_lo = 0.max(-diff);
    let k_hi = jpm.min(jmmp);
    let mut sum = 0.0;
    for k in k_lo..=k_hi {
        let ln_den = ln_factorial(k as u64)
            + ln_factorial((jpm - k) as u64)
            + ln_factorial((diff + k) as u64)
            + ln_factorial((jmmp - k) as u64);
        let sign = if (diff + k).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let pow_c = c.powi((jpm + jmmp - 2 * k) as i32);
        let pow_s = s.powi((diff + 2 * k) as i32);
        sum += sign * (ln_pre - ln_den).exp() * pow_c * pow_s;
    }
    Ok(sum)
}

/// `(-1)^k`
fn parity(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Log-magnitude and sign of `±|c|^pc |s|^ps` times a square-rooted binomial.
fn log_seed(ln_binom: f64, c: f64, pc: i64, s: f64, ps: i64, sign: f64) -> (f64, f64) {
    let sign = sign * if c < 0.0 { parity(pc) } else { 1.0 } * if s < 0.0 { parity(ps) } else { 1.0 };
    let ln_mag = 0.5 * ln_binom + pc as f64 * c.abs().ln() + ps as f64 * s.abs().ln();
    (ln_mag, sign)
}

/// Mantissa/log-scale pair used while running the recurrence so the tails of
/// a column may sit far below the double range without losing the seed.
struct ScaledRun {
    ln_scale: f64,
    prev: f64,
    cur: f64,
}

impl ScaledRun {
    const RESCALE_ABOVE: f64 = 1e150;

    fn new(ln_mag: f64, sign: f64) -> Self {
        Self { ln_scale: ln_mag, prev: 0.0, cur: sign }
    }

    fn push(&mut self, next: f64) {
        self.prev = self.cur;
        self.cur = next;
        let mag = self.cur.abs();
        if mag > Self::RESCALE_ABOVE {
            self.ln_scale += mag.ln();
            self.cur /= mag;
            self.prev /= mag;
        }
    }

    fn value(&self) -> f64 {
        if self.cur == 0.0 {
            0.0
        } else {
            self.cur.signum() * (self.cur.abs().ln() + self.ln_scale).exp()
        }
    }
}

/// Column `m = col - j` of `d^j(β)`, given `s = sin(β/2)` and `c = cos(β/2)`.
/// Entry `a` of the result is `d^j_{a-j, m}(β)`.
///
/// Uses `(m - m' cos β) d_{m'} = ½ sin β [A₊(m') d_{m'+1} + A₋(m') d_{m'-1}]`
/// with `A±(m') = √((j ∓ m')(j ± m' + 1))`. The column is computed downward
/// from `m' = j` and upward from `m' = -j`; the two runs meet at the centre
/// `m' ≈ m cos β` of the oscillatory region, so each of them only ever
/// integrates in the growing direction through its evanescent tail.
pub(crate) fn little_d_column(two_j: u32, col: usize, s: f64, c: f64) -> Vec<f64> {
    let dim = two_j as usize + 1;
    let tj = two_j as i64;
    let mut out = vec![0.0; dim];
    // j + m and j - m as integers
    let jpm = col as i64;
    let jmm = tj - jpm;

    if s == 0.0 {
        out[col] = c.powi(two_j as i32);
        return out;
    }
    if c == 0.0 {
        out[jmm as usize] = parity(jmm) * s.powi(two_j as i32);
        return out;
    }

    let sin_b = 2.0 * s * c;
    let cos_b = (c - s) * (c + s);
    let j = tj as f64 / 2.0;
    let m = jpm as f64 - j;
    let ln_binom = ln_binomial(tj as u64, jpm as u64);

    let ratio = |a: usize| 2.0 * (m - (a as f64 - j) * cos_b) / sin_b;
    let a_plus = |a: usize| (((tj as usize - a) * (a + 1)) as f64).sqrt();
    let a_minus = |a: usize| ((a * (tj as usize - a + 1)) as f64).sqrt();

    let centre = (j + m * cos_b).round().clamp(0.0, tj as f64) as usize;

    // Downward from m' = j.
    let (ln_top, sign_top) = log_seed(ln_binom, c, jpm, s, jmm, parity(jmm));
    let mut run = ScaledRun::new(ln_top, sign_top);
    out[dim - 1] = run.value();
    for a in (centre + 1..dim).rev() {
        let next = (ratio(a) * run.cur - a_plus(a) * run.prev) / a_minus(a);
        run.push(next);
        out[a - 1] = run.value();
    }

    // Upward from m' = -j, stopping just below the meeting point.
    if centre > 0 {
        let (ln_bot, sign_bot) = log_seed(ln_binom, c, jmm, s, jpm, 1.0);
        let mut run = ScaledRun::new(ln_bot, sign_bot);
        out[0] = run.value();
        for a in 0..centre.saturating_sub(1) {
            let next = (ratio(a) * run.cur - a_minus(a) * run.prev) / a_plus(a);
            run.push(next);
            out[a + 1] = run.value();
        }
    }
    out
}

/// The full `(2j+1) × (2j+1)` little-d matrix at one angle, indexed by
/// `(j + m', j + m)`.
#[derive(Debug, Clone)]
pub struct WignerMatrix {
    two_j: u32,
    values: Array2<f64>,
}

impl WignerMatrix {
    pub fn new(two_j: u32, beta: f64) -> Self {
        let (s, c) = (0.5 * beta).sin_cos();
        Self::from_half_angle(two_j, s, c)
    }

    /// `d^j(π/2)` with `sin(π/4) = cos(π/4)` taken exactly equal.
    pub fn right_angle(two_j: u32) -> Self {
        Self::from_half_angle(two_j, FRAC_1_SQRT_2, FRAC_1_SQRT_2)
    }

    fn from_half_angle(two_j: u32, s: f64, c: f64) -> Self {
        let dim = two_j as usize + 1;
        let mut values = Array2::zeros((dim, dim));
        for col in 0..dim {
            let column = little_d_column(two_j, col, s, c);
            for (row, v) in column.into_iter().enumerate() {
                values[[row, col]] = v;
            }
        }
        Self { two_j, values }
    }

    pub fn two_j(&self) -> u32 {
        self.two_j
    }

    /// Entry by offsets `(j + m', j + m)`.
    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.values[[row, col]]
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }
}

/// Kravchuk wavefunction `Ψ_n(q) = d^j_{n-j, q}(π/2)` for mode `n` and pixel
/// offset `i = q + j`.
pub fn kravchuk_psi(rep: OscillatorRep, n: usize, i: usize) -> Result<f64> {
    let side = rep.side();
    if n >= side || i >= side {
        return Err(domain(format!(
            "mode {n} or pixel {i} outside 0..{side} for N = {side}"
        )));
    }
    Ok(little_d_column(rep.two_j, i, FRAC_1_SQRT_2, FRAC_1_SQRT_2)[n])
}

/// All Kravchuk wavefunctions of one representation, `values[[n, i]] = Ψ_n(i - j)`.
///
/// Rows and columns are both orthonormal. The table is stored so that the
/// reflection `Ψ_{q+j}(n-j) = (-1)^{n+q+j} Ψ_n(q)` holds bit for bit.
#[derive(Debug, Clone)]
pub struct WavefunctionTable {
    rep: OscillatorRep,
    values: Array2<f64>,
}

impl WavefunctionTable {
    pub fn new(rep: OscillatorRep) -> Self {
        let mut values = WignerMatrix::right_angle(rep.two_j).values;
        let side = rep.side();
        for n in 0..side {
            for i in 0..n {
                // n + q + j = n + i
                let sign = parity((n + i) as i64);
                values[[n, i]] = sign * values[[i, n]];
            }
        }
        Self { rep, values }
    }

    pub fn rep(&self) -> OscillatorRep {
        self.rep
    }

    #[inline]
    pub fn psi(&self, n: usize, i: usize) -> f64 {
        self.values[[n, i]]
    }

    /// The `(n, i)`-indexed table.
    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }
}

/// Convenience alias matching the operation name used by callers that build
/// the table for a representation in one shot.
pub fn wavefunction_table(rep: OscillatorRep) -> WavefunctionTable {
    WavefunctionTable::new(rep)
}
