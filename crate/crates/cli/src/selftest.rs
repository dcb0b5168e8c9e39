//! Invariant suites run from the command line.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};

use finrot::kernel::{
    build_kernel_cartesian, build_kernel_polar, compose_check, max_abs_diff, unitarity_residual,
};
use finrot::polar::{inner_product, PolarBasis};
use finrot::{OscillatorRep, WavefunctionTable};
use ndarray::Array2;

use crate::{exit, Failure, SelftestArgs};

const ANGLES: [f64; 5] = [0.3, FRAC_PI_8, FRAC_PI_4, -1.1, 2.7];
const GRAM_TOL: f64 = 1e-10;
const KERNEL_TOL: f64 = 1e-9;

fn parse_two_j(text: &str) -> Result<u32, Failure> {
    let bad = || Failure::usage(format!("--j expects a non-negative integer or half-integer, got {text:?}"));
    let j = match text.split_once('/') {
        Some((num, "2")) => num.trim().parse::<f64>().map_err(|_| bad())? / 2.0,
        Some(_) => return Err(bad()),
        None => text.trim().parse::<f64>().map_err(|_| bad())?,
    };
    let two_j = 2.0 * j;
    if !(0.0..=64.0).contains(&two_j) || two_j.fract() != 0.0 {
        return Err(bad());
    }
    Ok(two_j as u32)
}

struct Suite {
    name: &'static str,
    worst: f64,
    tol: f64,
}

impl Suite {
    fn new(name: &'static str, tol: f64) -> Self {
        Self { name, worst: 0.0, tol }
    }

    fn record(&mut self, v: f64) {
        // NaN must fail
        if v.is_nan() || v > self.worst {
            self.worst = v;
        }
    }

    fn pass(&self) -> bool {
        self.worst < self.tol
    }
}

pub fn run(args: &SelftestArgs) -> Result<(), Failure> {
    let max_two_j = parse_two_j(&args.j)?;
    let mut orth = Suite::new("orthonormality", GRAM_TOL);
    let mut unit = Suite::new("unitarity", KERNEL_TOL);
    let mut comp = Suite::new("composition", KERNEL_TOL);
    let mut dual = Suite::new("dual-formula agreement", KERNEL_TOL);

    for two_j in 0..=max_two_j {
        let rep = OscillatorRep::from_two_j(two_j);
        let table = WavefunctionTable::new(rep);
        let psi = table.values();
        let eye = Array2::<f64>::eye(rep.side());
        orth.record(max_abs_diff(&psi.dot(&psi.t()), &eye));

        let basis = PolarBasis::new(&table);
        for (a, ma) in basis.modes().iter().enumerate() {
            for (b, mb) in basis.modes().iter().enumerate().skip(a) {
                let want = if a == b { 1.0 } else { 0.0 };
                orth.record((inner_product(&ma.values, &mb.values) - want).norm());
            }
        }

        for &theta in &ANGLES {
            let mut k = build_kernel_cartesian(rep, theta, &table)?;
            if let Some(eps) = args.perturb {
                k.matrix_mut()[[0, 0]] += eps;
            }
            unit.record(unitarity_residual(&k));

            let cart = build_kernel_cartesian(rep, theta, &table)?;
            let polar = build_kernel_polar(rep, theta, &basis)?;
            dual.record(max_abs_diff(cart.matrix(), polar.kernel.matrix()));
            dual.record(polar.max_imag);

            let back = build_kernel_cartesian(rep, -theta, &table)?;
            comp.record(max_abs_diff(back.matrix(), cart.inverse().matrix()));
        }
        let eighth = build_kernel_cartesian(rep, FRAC_PI_8, &table)?;
        comp.record(compose_check(&eighth, &eighth)?);
    }

    let suites = [orth, unit, comp, dual];
    for s in &suites {
        println!(
            "{} {}: max residual {:.2e} (tolerance {:.0e}, 2j = 0..={max_two_j})",
            if s.pass() { "PASS" } else { "FAIL" },
            s.name,
            s.worst,
            s.tol
        );
    }
    let failed = suites.iter().filter(|s| !s.pass()).count();
    if failed == 0 {
        println!("selftest: all {} suites passed", suites.len());
        Ok(())
    } else {
        Err(Failure {
            code: exit::NUMERIC,
            message: format!("selftest: {failed} of {} suites failed", suites.len()),
        })
    }
}
