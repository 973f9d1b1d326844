//! Adaptive Gauss–Kronrod (7/15) integration on finite intervals.

#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};
use crate::scalar::Real;

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

const MAX_SEGMENTS: usize = 4000;

#[derive(Debug, Clone, Copy)]
struct Segment<R> {
    lo: R,
    hi: R,
    value: R,
    error: R,
}

fn kronrod<R: Real, F: FnMut(R) -> R>(f: &mut F, lo: R, hi: R) -> Segment<R> {
    let half = R::lit(0.5);
    let center = half * (lo + hi);
    let radius = half * (hi - lo);
    let fc = f(center);
    let mut gauss = fc * R::lit(WG[3]);
    let mut kron = fc * R::lit(WGK[7]);
    for j in 0..7 {
        let dx = radius * R::lit(XGK[j]);
        let pair = f(center - dx) + f(center + dx);
        kron += R::lit(WGK[j]) * pair;
        if j % 2 == 1 {
            gauss += R::lit(WG[j / 2]) * pair;
        }
    }
    Segment {
        lo,
        hi,
        value: kron * radius,
        error: ((kron - gauss) * radius).abs(),
    }
}

/// Integrates `f` over the union of the consecutive intervals defined by
/// `breaks` (sorted ascending, at least two points) to absolute tolerance
/// `abs_tol`. The worst segment is bisected until the summed error
/// estimate meets the tolerance.
pub fn integrate<R, F>(mut f: F, breaks: &[R], abs_tol: R) -> Result<R>
where
    R: Real,
    F: FnMut(R) -> R,
{
    if breaks.len() < 2 {
        return Err(Error::Numerical {
            context: "quadrature",
            detail: "need at least one interval".into(),
        });
    }
    let mut segments: Vec<Segment<R>> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| kronrod(&mut f, w[0], w[1]))
        .collect();
    let tol = abs_tol.max(R::tolerance_floor());
    loop {
        let (total, err): (R, R) = segments.iter().fold((R::zero(), R::zero()), |(v, e), s| {
            (v + s.value, e + s.error)
        });
        if !total.is_finite() {
            return Err(Error::Numerical {
                context: "quadrature",
                detail: format!("non-finite integrand over {} segments", segments.len()),
            });
        }
        if err <= tol {
            return Ok(total);
        }
        if segments.len() >= MAX_SEGMENTS {
            return Err(Error::Numerical {
                context: "quadrature",
                detail: format!(
                    "no convergence after {} segments: estimate {}, error {} > tolerance {}",
                    segments.len(),
                    total,
                    err,
                    tol
                ),
            });
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.error.partial_cmp(&b.1.error).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let s = segments.swap_remove(worst);
        let mid = R::lit(0.5) * (s.lo + s.hi);
        if !(mid > s.lo && mid < s.hi) {
            return Err(Error::Numerical {
                context: "quadrature",
                detail: format!("segment [{}, {}] cannot be bisected further", s.lo, s.hi),
            });
        }
        segments.push(kronrod(&mut f, s.lo, mid));
        segments.push(kronrod(&mut f, mid, s.hi));
    }
}
