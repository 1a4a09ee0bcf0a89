//! Scalar autonomous Dormand–Prince 5(4) integrator with exact landing on
//! requested stopping points and threshold-crossing detection.

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth minus embedded fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Tolerances {
    pub rel: f64,
    pub abs: f64,
    pub max_steps: usize,
    pub min_step: f64,
}

/// Integration state; `dy` is the FSAL derivative at (t, y).
#[derive(Debug, Clone, Copy)]
pub(crate) struct Cursor {
    pub t: f64,
    pub y: f64,
    dy: f64,
    h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Advance {
    Reached,
    /// y rose above the ceiling at (interpolated) time `t`.
    Crossed {
        t: f64,
    },
    StepCollapsed,
    StepLimit,
}

pub(crate) struct Dopri5<F> {
    rhs: F,
    tol: Tolerances,
}

impl<F: Fn(f64) -> f64> Dopri5<F> {
    pub fn new(rhs: F, tol: Tolerances) -> Self {
        Self { rhs, tol }
    }

    pub fn start(&self, t0: f64, y0: f64) -> Cursor {
        let dy = (self.rhs)(y0);
        let scale = self.tol.abs + self.tol.rel * y0.abs();
        let (d0, d1) = (y0.abs() / scale, dy.abs() / scale);
        let h = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            (0.01 * d0 / d1).min(1.0)
        };
        Cursor {
            t: t0,
            y: y0,
            dy,
            h,
        }
    }

    fn trial(&self, y: f64, k1: f64, h: f64) -> (f64, f64, f64) {
        let f = &self.rhs;
        let k2 = f(y + h * A21 * k1);
        let k3 = f(y + h * (A31 * k1 + A32 * k2));
        let k4 = f(y + h * (A41 * k1 + A42 * k2 + A43 * k3));
        let k5 = f(y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
        let k6 = f(y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
        let y_new = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
        let k7 = f(y_new);
        let err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
        (y_new, k7, err)
    }

    /// Advances `cur` to exactly `target`, stopping early if y exceeds
    /// `ceiling` or the step size collapses.
    pub fn advance_to(&self, cur: &mut Cursor, target: f64, ceiling: f64) -> Advance {
        let mut steps = 0;
        while cur.t < target {
            if steps >= self.tol.max_steps {
                return Advance::StepLimit;
            }
            steps += 1;
            let remaining = target - cur.t;
            let landing = cur.h >= remaining;
            let h = if landing { remaining } else { cur.h };
            let (y_new, dy_new, err) = self.trial(cur.y, cur.dy, h);
            let scale = self.tol.abs + self.tol.rel * cur.y.abs().max(y_new.abs());
            let ratio = (err / scale).abs();
            if !(y_new.is_finite() && ratio.is_finite()) {
                cur.h = 0.25 * h;
            } else if ratio <= 1.0 {
                let t_new = if landing { target } else { cur.t + h };
                if y_new > ceiling {
                    let t = crossing(cur.t, cur.y, cur.dy, t_new, y_new, dy_new, ceiling);
                    cur.t = t_new;
                    cur.y = y_new;
                    cur.dy = dy_new;
                    return Advance::Crossed { t };
                }
                cur.t = t_new;
                cur.y = y_new;
                cur.dy = dy_new;
                let grow = if ratio == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * ratio.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
                };
                // a short landing step says nothing about the natural step size
                cur.h = if landing {
                    cur.h.max(h * grow)
                } else {
                    h * grow
                };
            } else {
                cur.h = h * (SAFETY * ratio.powf(-0.2)).max(MIN_FACTOR);
            }
            if cur.h < self.tol.min_step {
                return Advance::StepCollapsed;
            }
        }
        Advance::Reached
    }
}

/// Root of the cubic Hermite interpolant through (t0, y0, d0), (t1, y1, d1)
/// at y = level, assuming y0 ≤ level < y1.
fn crossing(t0: f64, y0: f64, d0: f64, t1: f64, y1: f64, d1: f64, level: f64) -> f64 {
    let h = t1 - t0;
    let interp = |theta: f64| {
        let t2 = theta * theta;
        let t3 = t2 * theta;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + theta) * h * d0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * h * d1
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if interp(mid) < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    t0 + 0.5 * (lo + hi) * h
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances {
            rel: 1e-11,
            abs: 1e-13,
            max_steps: 100_000,
            min_step: 1e-12,
        }
    }

    #[test]
    fn exponential_growth() {
        let ode = Dopri5::new(|y| 0.3 * y, tol());
        let mut cur = ode.start(0.0, 1.0);
        for n in 1..=20 {
            assert_eq!(
                ode.advance_to(&mut cur, n as f64, f64::INFINITY),
                Advance::Reached
            );
            assert_eq!(cur.t, n as f64);
            let exact = (0.3 * n as f64).exp();
            assert!(((cur.y - exact) / exact).abs() < 1e-9);
        }
    }

    #[test]
    fn blow_up_crossing_is_located() {
        // y' = 1 + y², y(0) = 0 → y = tan t, pole at π/2
        let ode = Dopri5::new(|y| 1.0 + y * y, tol());
        let mut cur = ode.start(0.0, 0.0);
        match ode.advance_to(&mut cur, 3.0, 1e6) {
            Advance::Crossed { t } => {
                let expected = (1e6f64).atan();
                assert!((t - expected).abs() < 1e-8, "t={t} expected={expected}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn collapse_without_ceiling() {
        let ode = Dopri5::new(|y| 1.0 + y * y, tol());
        let mut cur = ode.start(0.0, 0.0);
        let out = ode.advance_to(&mut cur, 3.0, f64::INFINITY);
        assert!(matches!(out, Advance::StepCollapsed | Advance::StepLimit));
        assert!(cur.t < std::f64::consts::FRAC_PI_2);
    }
}
