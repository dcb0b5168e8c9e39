//! Polar labels `(n, m)` of the square screen and the polar wavefunctions
//! `Λ_{n,m}`, on which screen rotations act as the phase `e^{-imθ}`.
//!
//! The Cartesian modes `Ψ_{nx}(qx) Ψ_{ny}(qy)` split into shells of fixed
//! total mode `n = nx + ny`, `0 ≤ n ≤ 4j`. Shell `n` holds
//! `min(n, 4j - n) + 1` modes and carries the spin `J_n = min(n, 4j - n) / 2`
//! representation of the rotation group; `m/2` runs over its projections.
//!
//! Shells above the diagonal (`n > 2j`) are the checkerboard reflection
//! `(nx, ny) ↦ (2j - nx, 2j - ny)` of the shells below it. Their polar modes
//! are the complex conjugates of the lower-shell construction, which keeps
//! every shell rotating coherently with the one it reflects.

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::oscillator::{OscillatorRep, WavefunctionTable, WignerMatrix};

/// One shell of constant total mode `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shell {
    pub n: u32,
    /// `2 J_n = min(n, 4j - n)`.
    pub two_spin: u32,
    /// Smallest `nx` in the shell; `nx - nx_min` indexes the shell's little-d
    /// matrix.
    pub nx_min: u32,
    /// True for `n > 2j`.
    pub upper: bool,
}

impl Shell {
    pub fn new(rep: OscillatorRep, n: u32) -> Self {
        let two_j = rep.two_j();
        let two_spin = n.min(2 * two_j - n);
        Self {
            n,
            two_spin,
            nx_min: n.saturating_sub(two_j),
            upper: n > two_j,
        }
    }

    pub fn len(&self) -> usize {
        self.two_spin as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Cartesian mode numbers `(nx, ny)` in little-d index order.
    pub fn modes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.len()).map(move |a| {
            let nx = (self.nx_min as usize) + a;
            (nx, self.n as usize - nx)
        })
    }
}

/// All `4j + 1` shells of a screen, in increasing `n`.
pub fn shells(rep: OscillatorRep) -> Vec<Shell> {
    (0..=2 * rep.two_j()).map(|n| Shell::new(rep, n)).collect()
}

/// A valid polar label: `0 ≤ n ≤ 4j`, `|m| ≤ min(n, 4j - n)`, `m ≡ n (mod 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PolarIndex {
    n: u32,
    m: i32,
}

impl PolarIndex {
    pub fn new(rep: OscillatorRep, n: u32, m: i32) -> Result<Self> {
        let top = 2 * rep.two_j();
        if n > top {
            return Err(domain(format!("total mode {n} exceeds 4j = {top}")));
        }
        let bound = n.min(top - n) as i32;
        if m.abs() > bound || (m - n as i32) % 2 != 0 {
            return Err(domain(format!(
                "angular label {m} incompatible with total mode {n} (|m| ≤ {bound}, m ≡ n mod 2)"
            )));
        }
        Ok(Self { n, m })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> i32 {
        self.m
    }
}

/// Polar labels ordered by `n`, then `m`, ascending. There are exactly `N²`.
pub fn enumerate_polar_indices(rep: OscillatorRep) -> Vec<PolarIndex> {
    let top = 2 * rep.two_j();
    let mut out = Vec::with_capacity(rep.side() * rep.side());
    for n in 0..=top {
        let bound = n.min(top - n) as i32;
        for m in (-bound..=bound).step_by(2) {
            out.push(PolarIndex { n, m });
        }
    }
    out
}

/// Separable Cartesian mode `Ψ_{nx}(qx) Ψ_{ny}(qy)`, stored like an image:
/// `values[[iy, ix]]`.
#[derive(Debug, Clone)]
pub struct CartesianMode {
    pub nx: usize,
    pub ny: usize,
    pub values: Array2<f64>,
}

pub fn cartesian_mode(table: &WavefunctionTable, nx: usize, ny: usize) -> Result<CartesianMode> {
    let side = table.rep().side();
    if nx >= side || ny >= side {
        return Err(domain(format!("mode ({nx}, {ny}) outside 0..{side}")));
    }
    let values = Array2::from_shape_fn((side, side), |(iy, ix)| table.psi(nx, ix) * table.psi(ny, iy));
    Ok(CartesianMode { nx, ny, values })
}

/// Polar wavefunction `Λ_{n,m}` sampled on the screen, `values[[iy, ix]]`.
#[derive(Debug, Clone)]
pub struct PolarMode {
    pub index: PolarIndex,
    pub values: Array2<Complex64>,
}

/// `(-i)^k` for lower shells, `i^k` for upper ones.
fn shell_phase(upper: bool, k: usize) -> Complex64 {
    let r = match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    };
    if upper {
        r.conj()
    } else {
        r
    }
}

fn polar_mode_with(
    idx: PolarIndex,
    table: &WavefunctionTable,
    shell: &Shell,
    d: &WignerMatrix,
) -> PolarMode {
    let side = table.rep().side();
    let col = ((shell.two_spin as i32 + idx.m) / 2) as usize;
    let sign = if (idx.m.abs() - idx.m) / 2 % 2 == 0 { 1.0 } else { -1.0 };
    let psi = table.values();
    let mut values = Array2::<Complex64>::zeros((side, side));
    for (a, (nx, ny)) in shell.modes().enumerate() {
        let coeff = shell_phase(shell.upper, ny) * (sign * d.at(a, col));
        let row_x = psi.row(nx);
        let row_y = psi.row(ny);
        for iy in 0..side {
            let wy = coeff * row_y[iy];
            for ix in 0..side {
                values[[iy, ix]] += wy * row_x[ix];
            }
        }
    }
    PolarMode { index: idx, values }
}

/// `Λ_{n,m} = (-1)^{(|m|-m)/2} Σ_{nx+ny=n} (∓i)^{ny} d^{J_n}_{(nx-ny)/2, m/2}(π/2) Ψ_{nx,ny}`.
pub fn polar_wavefunction(
    rep: OscillatorRep,
    idx: PolarIndex,
    table: &WavefunctionTable,
) -> Result<PolarMode> {
    if table.rep() != rep {
        return Err(domain("wavefunction table built for a different screen size"));
    }
    PolarIndex::new(rep, idx.n, idx.m)?;
    let shell = Shell::new(rep, idx.n);
    let d = WignerMatrix::right_angle(shell.two_spin);
    Ok(polar_mode_with(idx, table, &shell, &d))
}

/// The complete polar basis of one screen, in [`enumerate_polar_indices`]
/// order. Memory is `N⁴` complex values.
#[derive(Debug, Clone)]
pub struct PolarBasis {
    rep: OscillatorRep,
    modes: Vec<PolarMode>,
}

impl PolarBasis {
    pub fn new(table: &WavefunctionTable) -> Self {
        let rep = table.rep();
        let shells = shells(rep);
        let dmats: Vec<WignerMatrix> =
            shells.iter().map(|s| WignerMatrix::right_angle(s.two_spin)).collect();
        let modes = enumerate_polar_indices(rep)
            .into_par_iter()
            .map(|idx| {
                let k = idx.n as usize;
                polar_mode_with(idx, table, &shells[k], &dmats[k])
            })
            .collect();
        Self { rep, modes }
    }

    pub fn rep(&self) -> OscillatorRep {
        self.rep
    }

    pub fn modes(&self) -> &[PolarMode] {
        &self.modes
    }
}

/// `Σ_pixels a · conj(b)`
pub fn inner_product(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y.conj()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rep(two_j: u32) -> OscillatorRep {
        OscillatorRep::from_two_j(two_j)
    }

    #[test]
    fn spin_half_labels() {
        let got: Vec<(u32, i32)> =
            enumerate_polar_indices(rep(1)).iter().map(|p| (p.n(), p.m())).collect();
        assert_eq!(got, vec![(0, 0), (1, -1), (1, 1), (2, 0)]);
    }

    #[test]
    fn label_count_is_n_squared() {
        for two_j in 0..20 {
            let r = rep(two_j);
            let idx = enumerate_polar_indices(r);
            assert_eq!(idx.len(), r.side() * r.side());
            for p in &idx {
                assert_eq!((p.m() - p.n() as i32).rem_euclid(2), 0);
                assert!(PolarIndex::new(r, p.n(), p.m()).is_ok());
            }
        }
    }

    #[test]
    fn invalid_labels_rejected() {
        assert!(PolarIndex::new(rep(2), 5, 1).is_err());
        assert!(PolarIndex::new(rep(2), 2, 1).is_err());
        assert!(PolarIndex::new(rep(2), 3, 3).is_err());
        assert!(PolarIndex::new(rep(2), 3, 1).is_ok());
    }

    #[test]
    fn shells_partition_the_modes() {
        for two_j in 0..9 {
            let r = rep(two_j);
            let mut seen = vec![false; r.side() * r.side()];
            for sh in shells(r) {
                for (nx, ny) in sh.modes() {
                    assert!(nx < r.side() && ny < r.side());
                    let k = nx * r.side() + ny;
                    assert!(!seen[k]);
                    seen[k] = true;
                }
            }
            assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn ground_mode_is_positive_product() {
        let r = rep(6);
        let t = WavefunctionTable::new(r);
        let idx = PolarIndex::new(r, 0, 0).unwrap();
        let mode = polar_wavefunction(r, idx, &t).unwrap();
        for iy in 0..r.side() {
            for ix in 0..r.side() {
                let v = mode.values[[iy, ix]];
                assert_eq!(v.im, 0.0);
                assert!(v.re > 0.0);
                assert!((v.re - t.psi(0, ix) * t.psi(0, iy)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn spin_half_first_shell_has_unit_norm() {
        let r = rep(1);
        let t = WavefunctionTable::new(r);
        for m in [-1, 1] {
            let mode = polar_wavefunction(r, PolarIndex::new(r, 1, m).unwrap(), &t).unwrap();
            let norm: f64 = mode.values.iter().map(|v| v.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn mismatched_table_rejected() {
        let t = WavefunctionTable::new(rep(3));
        let idx = PolarIndex::new(rep(2), 0, 0).unwrap();
        assert!(polar_wavefunction(rep(2), idx, &t).is_err());
    }

    #[test]
    fn gram_matrix_is_identity() {
        for two_j in [2u32, 5, 6] {
            let r = rep(two_j);
            let basis = PolarBasis::new(&WavefunctionTable::new(r));
            let modes = basis.modes();
            assert_eq!(modes.len(), r.side() * r.side());
            let mut worst: f64 = 0.0;
            for (a, ma) in modes.iter().enumerate() {
                for (b, mb) in modes.iter().enumerate() {
                    let g = inner_product(&ma.values, &mb.values);
                    let want = if a == b { 1.0 } else { 0.0 };
                    worst = worst.max((g - want).norm());
                }
            }
            assert!(worst < 1e-10, "2j={two_j}: {worst}");
        }
    }
}
