//! Composite Simpson weights for sampled functions and adaptive
//! Gauss–Kronrod for closed-form integrands.

use crate::error::{invalid, Error, Result};
use crate::real::{KahanSum, Real};

/// Composite Simpson weights on `points` equally spaced nodes with step `h`.
///
/// `points` must be odd and at least 3.
pub fn simpson_weights<T: Real>(points: usize, h: T) -> Result<Vec<T>> {
    if points < 3 || points % 2 == 0 {
        return invalid(format!("Simpson rule needs an odd number (>= 3) of nodes, got {points}"));
    }
    let third = h / T::lit(3.0);
    Ok((0..points)
        .map(|i| {
            if i == 0 || i == points - 1 {
                third
            } else if i % 2 == 1 {
                third * T::lit(4.0)
            } else {
                third * T::lit(2.0)
            }
        })
        .collect())
}

/// Simpson integral of equally spaced samples.
pub fn simpson<T: Real>(values: &[T], h: T) -> Result<T> {
    let w = simpson_weights(values.len(), h)?;
    Ok(w.iter().zip(values).map(|(&w, &v)| w * v).collect::<KahanSum<T>>().value())
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn kronrod15<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> (T, T) {
    let half = (b - a) / T::lit(2.0);
    let mid = (a + b) / T::lit(2.0);
    let fc = f(mid);
    let mut kron = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let pair = f(mid - dx) + f(mid + dx);
        kron = kron + pair * T::lit(WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + pair * T::lit(WG[j / 2]);
        }
    }
    (kron * half, ((kron - gauss) * half).abs())
}

/// Globally adaptive G7–K15 quadrature. Returns `(value, error_estimate)`.
///
/// Bisects the interval with the largest error estimate until the summed
/// estimate falls below `abs_tol`, or fails after `max_intervals` pieces.
pub fn integrate_adaptive<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, abs_tol: T, max_intervals: usize) -> Result<(T, T)> {
    let (v, e) = kronrod15(&f, a, b);
    let mut pieces = vec![(a, b, v, e)];
    loop {
        let total_err = pieces.iter().map(|p| p.3).fold(T::zero(), |x, y| x + y);
        if total_err <= abs_tol {
            break;
        }
        if pieces.len() >= max_intervals {
            return Err(Error::SelfCheck(format!(
                "adaptive quadrature reached {max_intervals} intervals with error estimate {total_err:e}"
            )));
        }
        let worst = (0..pieces.len())
            .max_by(|&i, &j| pieces[i].3.partial_cmp(&pieces[j].3).unwrap())
            .unwrap();
        let (lo, hi, _, _) = pieces.swap_remove(worst);
        let m = (lo + hi) / T::lit(2.0);
        let (v1, e1) = kronrod15(&f, lo, m);
        let (v2, e2) = kronrod15(&f, m, hi);
        pieces.push((lo, m, v1, e1));
        pieces.push((m, hi, v2, e2));
    }
    // Sum in position order so the result does not depend on refinement history.
    pieces.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let value = pieces.iter().map(|p| p.2).collect::<KahanSum<T>>().value();
    let err = pieces.iter().map(|p| p.3).fold(T::zero(), |x, y| x + y);
    Ok((value, err))
}
