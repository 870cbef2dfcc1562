//! Globally adaptive Gauss–Kronrod (7, 15) quadrature.
//!
//! Infinite limits are handled by mapping onto a finite interval; the
//! 15-point rule never evaluates interval endpoints, so the mapped
//! singularities at ±1 are never touched.

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

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_SEGMENTS: usize = 5_000;

#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let sum = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Integrates `f` over the finite interval `[a, b]` to absolute tolerance
/// `tol` (or relative `tol` when the integral is large).
pub fn integrate_finite<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Quadrature {
    if a == b {
        return Quadrature {
            value: 0.0,
            error: 0.0,
            converged: true,
        };
    }
    let mut segments = vec![kronrod(&f, a, b)];
    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        if error <= tol.max(tol * value.abs()) {
            return Quadrature {
                value,
                error,
                converged: true,
            };
        }
        if segments.len() >= MAX_SEGMENTS {
            return Quadrature {
                value,
                error,
                converged: false,
            };
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("nonempty");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // Interval can no longer be split in floating point.
            segments.push(Segment { error: 0.0, ..seg });
            continue;
        }
        segments.push(kronrod(&f, seg.a, mid));
        segments.push(kronrod(&f, mid, seg.b));
    }
}

/// Integrates `f` over `[a, b]` where either limit may be infinite.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Quadrature {
    match (a.is_finite(), b.is_finite()) {
        (true, true) => integrate_finite(f, a, b, tol),
        (true, false) => {
            // x = a + t / (1 − t)
            integrate_finite(
                |t| {
                    let s = 1.0 - t;
                    f(a + t / s) / (s * s)
                },
                0.0,
                1.0,
                tol,
            )
        }
        (false, true) => {
            // x = b − (1 − t) / t
            integrate_finite(|t| f(b - (1.0 - t) / t) / (t * t), 0.0, 1.0, tol)
        }
        (false, false) => {
            let left = integrate_finite(|t| f(-(1.0 - t) / t) / (t * t), 0.0, 1.0, 0.5 * tol);
            let right = integrate_finite(
                |t| {
                    let s = 1.0 - t;
                    f(t / s) / (s * s)
                },
                0.0,
                1.0,
                0.5 * tol,
            );
            Quadrature {
                value: left.value + right.value,
                error: left.error + right.error,
                converged: left.converged && right.converged,
            }
        }
    }
}

/// Integrates over `[a, b]` split at the interior `breaks` (points where
/// the integrand has kinks or jumps).
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], tol: f64) -> Quadrature {
    let mut points: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    points.sort_by(|x, y| x.total_cmp(y));
    points.dedup();
    let mut edges = Vec::with_capacity(points.len() + 2);
    edges.push(a);
    edges.extend(points);
    edges.push(b);
    let pieces = (edges.len() - 1) as f64;
    let mut total = Quadrature {
        value: 0.0,
        error: 0.0,
        converged: true,
    };
    for w in edges.windows(2) {
        let q = integrate(&f, w[0], w[1], tol / pieces);
        total.value += q.value;
        total.error += q.error;
        total.converged &= q.converged;
    }
    total
}
