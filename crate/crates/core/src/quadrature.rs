//! Adaptive Gauss–Kronrod quadrature on [a, b] and [a, ∞), plus a
//! Richardson-extrapolated central-difference derivative.
//!
//! Semi-infinite ranges are folded onto [0, 1) with x = a + t/(1−t). An
//! algebraic endpoint singularity (x−a)^p is removed beforehand by
//! x = a + u^{1/(1+p)}, which turns (x−a)^p dx into a smooth measure.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Exponent p of an (x−lower)^p endpoint behaviour. `None` means regular,
    /// or for partition functions, "take it from the density of states".
    #[serde(skip_serializing_if = "Option::is_none")]
    pub endpoint_singularity_exponent: Option<f64>,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_subdivisions: 200,
            endpoint_singularity_exponent: None,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<Self> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1e-2) {
            return Err(config(
                "rel_tol",
                format!("must lie in (0, 1e-2), got {}", self.rel_tol),
            ));
        }
        if self.max_subdivisions == 0 {
            return Err(config("max_subdivisions", "must be positive"));
        }
        Ok(*self)
    }

    pub fn with_singularity(mut self, p: f64) -> Self {
        self.endpoint_singularity_exponent = Some(p);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult {
    pub value: f64,
    pub est_abs_error: f64,
    pub subdivisions_used: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Upper {
    Infinite,
    Finite(f64),
}

// 15-point Kronrod abscissae on [0, 1] (symmetric), with the embedded
// 7-point Gauss rule on the odd entries.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
#[allow(clippy::excessive_precision)]
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
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);
    let mut kronrod = WGK[7] * f_center;
    let mut gauss = WG[3] * f_center;
    let mut abs_sum = kronrod.abs();
    let mut fv = [(0.0, 0.0); 7];
    for (j, x) in XGK.iter().take(7).enumerate() {
        let dx = half * x;
        let (f1, f2) = (f(center - dx), f(center + dx));
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
        fv[j] = (f1, f2);
    }
    if !kronrod.is_finite() {
        return Err(Error::Evaluation(format!(
            "non-finite integrand on [{a}, {b}]"
        )));
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (f_center - mean).abs();
    for (j, (f1, f2)) in fv.iter().enumerate() {
        asc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let value = kronrod * half;
    let res_abs = abs_sum * half.abs();
    let res_asc = asc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    // QUADPACK error rescaling
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (1.0f64).min((200.0 * error / res_asc).powf(1.5));
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Panel { a, b, value, error })
}

/// Globally adaptive bisection on [a, b] until the summed error estimate is
/// below `rel_tol·|I|`.
fn adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult> {
    let mut heap = BinaryHeap::new();
    let first = gk15(&f, a, b)?;
    let (mut total, mut total_err) = (first.value, first.error);
    heap.push(first);
    let mut subdivisions = 1;
    loop {
        if total_err <= cfg.rel_tol * total.abs() || total_err <= f64::MIN_POSITIVE {
            return Ok(IntegralResult {
                value: total,
                est_abs_error: total_err,
                subdivisions_used: subdivisions,
            });
        }
        if subdivisions >= cfg.max_subdivisions {
            return Err(Error::ToleranceNotMet {
                best: IntegralResult {
                    value: total,
                    est_abs_error: total_err,
                    subdivisions_used: subdivisions,
                },
            });
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        let left = gk15(&f, worst.a, mid)?;
        let right = gk15(&f, mid, worst.b)?;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
        if subdivisions % 32 == 0 {
            // refresh the running sums against drift
            total = heap.iter().map(|p| p.value).sum();
            total_err = heap.iter().map(|p| p.error).sum();
        }
    }
}

/// ∫_lower^upper f(x) dx for an integrand that may carry an integrable
/// (x−lower)^p endpoint singularity, declared through
/// `cfg.endpoint_singularity_exponent`.
pub fn integrate_semi_infinite<F>(
    f: F,
    lower: f64,
    upper: Upper,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult>
where
    F: Fn(f64) -> f64,
{
    cfg.validate()?;
    if !lower.is_finite() {
        return Err(config("lower", "must be finite"));
    }
    let p = cfg.endpoint_singularity_exponent.unwrap_or(0.0);
    if p.is_nan() || p <= -1.0 {
        return Err(Error::SingularityTooStrong(p));
    }
    // x = lower + u^q, dx = q u^{q−1} du
    let q = 1.0 / (1.0 + p);
    let regular = q == 1.0;
    let mapped = move |u: f64| -> f64 {
        if regular {
            f(lower + u)
        } else {
            let x = lower + u.powf(q);
            if !x.is_finite() {
                return 0.0;
            }
            f(x) * q * u.powf(q - 1.0)
        }
    };
    match upper {
        Upper::Finite(b) => {
            if !(b.is_finite() && b >= lower) {
                return Err(config(
                    "upper",
                    format!("finite bound {b} must be >= lower {lower}"),
                ));
            }
            if b == lower {
                return Ok(IntegralResult {
                    value: 0.0,
                    est_abs_error: 0.0,
                    subdivisions_used: 0,
                });
            }
            let u_max = if regular {
                b - lower
            } else {
                (b - lower).powf(1.0 / q)
            };
            adaptive(mapped, 0.0, u_max, cfg)
        }
        Upper::Infinite => {
            let folded = |t: f64| {
                let one_minus = 1.0 - t;
                let u = t / one_minus;
                let jac = 1.0 / (one_minus * one_minus);
                if !u.is_finite() || !jac.is_finite() {
                    return 0.0;
                }
                let g = mapped(u);
                if g == 0.0 {
                    0.0
                } else {
                    g * jac
                }
            };
            adaptive(folded, 0.0, 1.0, cfg)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeOrder {
    First,
    Second,
}

/// Central difference at `t` with step h = t·1e-4 and two Richardson levels.
pub fn derivative<F>(f: F, t: f64, order: DerivativeOrder) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let h = if t != 0.0 { t.abs() * 1e-4 } else { 1e-4 };
    derivative_with_step(f, t, order, h)
}

/// Same as [`derivative`] with an explicit base step `h`; samples lie in
/// [t−4h, t+4h].
pub fn derivative_with_step<F>(mut f: F, t: f64, order: DerivativeOrder, h: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(h.is_finite() && h > 0.0) {
        return Err(config("h", format!("step must be positive, got {h}")));
    }
    let center = match order {
        DerivativeOrder::First => 0.0,
        DerivativeOrder::Second => f(t)?,
    };
    let mut diff = |step: f64| -> Result<f64> {
        let (up, down) = (f(t + step)?, f(t - step)?);
        Ok(match order {
            DerivativeOrder::First => (up - down) / (2.0 * step),
            DerivativeOrder::Second => (up - 2.0 * center + down) / (step * step),
        })
    };
    let d1 = diff(h)?;
    let d2 = diff(2.0 * h)?;
    let d4 = diff(4.0 * h)?;
    // both stencils have even error expansions: kill h² then h⁴
    let r1 = (4.0 * d1 - d2) / 3.0;
    let r2 = (4.0 * d2 - d4) / 3.0;
    Ok((16.0 * r1 - r2) / 15.0)
}
