//! Adaptive Gauss–Kronrod (7/15) quadrature for complex integrands.

use num_complex::Complex64;

use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).norm())
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: Complex64,
    pub error: f64,
}

/// Integrates `f` over `[a, b]` split at `breaks`, bisecting intervals until
/// the summed Kronrod–Gauss error estimate is below `abs_tol`.
pub fn integrate<F>(f: F, a: f64, b: f64, breaks: &[f64], abs_tol: f64) -> Result<Integral>
where
    F: Fn(f64) -> Complex64,
{
    const MAX_INTERVALS: usize = 4096;
    let mut points = vec![a];
    points.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    points.push(b);
    points.sort_by(f64::total_cmp);
    points.dedup();

    let mut pieces: Vec<(f64, f64, Complex64, f64)> = points
        .windows(2)
        .map(|w| {
            let (v, e) = gk15(&f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();

    loop {
        let total_err: f64 = pieces.iter().map(|p| p.3).sum();
        if total_err <= abs_tol {
            break;
        }
        if pieces.len() >= MAX_INTERVALS {
            return Err(Error::Quadrature {
                estimate: total_err,
                tolerance: abs_tol,
            });
        }
        let worst = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap();
        let (lo, hi, _, _) = pieces.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        for (l, h) in [(lo, mid), (mid, hi)] {
            let (v, e) = gk15(&f, l, h);
            pieces.push((l, h, v, e));
        }
    }
    // Fixed summation order regardless of refinement history.
    pieces.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(Integral {
        value: pieces.iter().map(|p| p.2).sum(),
        error: pieces.iter().map(|p| p.3).sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| Complex64::new(x.powi(5), 0.0), 0.0, 2.0, &[], 1e-14).unwrap();
        assert!((r.value.re - 64.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn oscillatory_complex() {
        // ∫₀^{2π} e^{i 7 x} dx = 0, ∫₀^{π} e^{ix} dx = 2i
        let r = integrate(
            |x| Complex64::new(0.0, 7.0 * x).exp(),
            0.0,
            2.0 * std::f64::consts::PI,
            &[],
            1e-13,
        )
        .unwrap();
        assert!(r.value.norm() < 1e-12);
        let r = integrate(|x| Complex64::new(0.0, x).exp(), 0.0, std::f64::consts::PI, &[], 1e-13).unwrap();
        assert!((r.value - Complex64::new(0.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn step_function_with_breakpoint() {
        let f = |x: f64| Complex64::new(if x < 0.3 { 1.0 } else { -1.0 }, 0.0);
        let r = integrate(f, 0.0, 1.0, &[0.3], 1e-13).unwrap();
        assert!((r.value.re - (0.3 - 0.7)).abs() < 1e-13);
    }
}
