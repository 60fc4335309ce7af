//! Scalar control trajectories on the rescaled time interval τ ∈ [0, 1].
//!
//! Every schedule has closed-form first and second derivatives. The
//! minimal-degree smoothstep polynomials are the workhorse: order 3 is the
//! septic ramp 35τ⁴ − 84τ⁵ + 70τ⁶ − 20τ⁷ whose first three derivatives vanish at
//! both ends.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// A parameter trajectory θ(τ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Schedule {
    /// `start + (end − start)·(35τ⁴ − 84τ⁵ + 70τ⁶ − 20τ⁷)`.
    SmoothRamp { start: f64, end: f64 },
    Linear { start: f64, end: f64 },
    /// `A·exp(−(τ − τ₀)²/2σ²)`, truncated by the unit window.
    GaussianPulse { amplitude: f64, center: f64, width: f64 },
    /// `A·sin²(π(τ − a)/(b − a))` on `[a, b]`, zero elsewhere.
    SineSquared { amplitude: f64, window_start: f64, window_end: f64 },
    /// Minimal-degree ramp whose derivatives up to `order` vanish at τ ∈ {0, 1}.
    Smoothstep { order: u8, start: f64, end: f64 },
    Constant { value: f64 },
    /// Smooth ramp driven through a reparameterized clock that halts on
    /// `[pause_start, pause_end]`. The clock slows down over tapers of the
    /// same length as the pause on either side, so a zero-length pause is
    /// exactly the plain smooth ramp.
    PiecewiseWithPause { start: f64, end: f64, pause_start: f64, pause_end: f64 },
}

/// Smoothstep of order `k` and its first two derivatives at `x ∈ [0, 1]`.
pub fn smoothstep(order: u8, x: f64) -> (f64, f64, f64) {
    let y = 1.0 - x;
    match order {
        0 => (x, 1.0, 0.0),
        1 => (x * x * (3.0 - 2.0 * x), 6.0 * x * y, 6.0 - 12.0 * x),
        2 => (
            x * x * x * (10.0 + x * (-15.0 + 6.0 * x)),
            30.0 * x * x * y * y,
            60.0 * x * y * (1.0 - 2.0 * x),
        ),
        _ => (
            x.powi(4) * (35.0 + x * (-84.0 + x * (70.0 - 20.0 * x))),
            140.0 * (x * y).powi(3),
            420.0 * (x * y).powi(2) * (1.0 - 2.0 * x),
        ),
    }
}

/// ∫₀ˣ of the order-3 smoothstep.
fn smoothstep3_integral(x: f64) -> f64 {
    x.powi(5) * (7.0 + x * (-14.0 + x * (10.0 - 2.5 * x)))
}

pub const MAX_SMOOTHSTEP_ORDER: u8 = 3;

impl Schedule {
    /// The ramp from 0 to π used for the spin-sweep model.
    pub fn default_ramp() -> Self {
        Schedule::SmoothRamp { start: 0.0, end: PI }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Schedule::SmoothRamp { .. } => "smooth_ramp",
            Schedule::Linear { .. } => "linear",
            Schedule::GaussianPulse { .. } => "gaussian_pulse",
            Schedule::SineSquared { .. } => "sine_squared",
            Schedule::Smoothstep { .. } => "smoothstep",
            Schedule::Constant { .. } => "constant",
            Schedule::PiecewiseWithPause { .. } => "piecewise_with_pause",
        }
    }

    /// (start, end) of ramp-type schedules.
    pub fn ramp_endpoints(&self) -> Option<(f64, f64)> {
        match *self {
            Schedule::SmoothRamp { start, end }
            | Schedule::Linear { start, end }
            | Schedule::Smoothstep { start, end, .. }
            | Schedule::PiecewiseWithPause { start, end, .. } => Some((start, end)),
            _ => None,
        }
    }

    /// Checks parameter ranges.
    pub fn validate(&self) -> Result<()> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match *self {
            Schedule::SmoothRamp { start, end } | Schedule::Linear { start, end } => {
                if !finite(&[start, end]) {
                    return Err(Error::invalid("ramp endpoints must be finite"));
                }
            }
            Schedule::GaussianPulse { amplitude, center, width } => {
                if !finite(&[amplitude, center, width]) || width <= 0.0 {
                    return Err(Error::invalid("gaussian_pulse width must be > 0"));
                }
            }
            Schedule::SineSquared { amplitude, window_start, window_end } => {
                if !finite(&[amplitude, window_start, window_end]) || window_end <= window_start {
                    return Err(Error::invalid("sine_squared window must satisfy start < end"));
                }
            }
            Schedule::Smoothstep { order, start, end } => {
                if order > MAX_SMOOTHSTEP_ORDER {
                    return Err(Error::invalid(format!(
                        "smoothstep order must be in 0..={MAX_SMOOTHSTEP_ORDER}, got {order}"
                    )));
                }
                if !finite(&[start, end]) {
                    return Err(Error::invalid("ramp endpoints must be finite"));
                }
            }
            Schedule::Constant { value } => {
                if !value.is_finite() {
                    return Err(Error::invalid("constant value must be finite"));
                }
            }
            Schedule::PiecewiseWithPause { start, end, pause_start, pause_end } => {
                if !finite(&[start, end, pause_start, pause_end]) || pause_end < pause_start {
                    return Err(Error::invalid("pause window must satisfy pause_start <= pause_end"));
                }
                let taper = pause_end - pause_start;
                if pause_start - taper <= 0.0 || pause_end + taper >= 1.0 {
                    return Err(Error::invalid(format!(
                        "pause window [{pause_start}, {pause_end}] with its tapers must lie strictly inside (0, 1)"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Value and first derivative at τ.
    pub fn evaluate(&self, tau: f64) -> Result<(f64, f64)> {
        let (v, d, _) = self.jet(tau)?;
        Ok((v, d))
    }

    pub fn value(&self, tau: f64) -> Result<f64> {
        Ok(self.jet(tau)?.0)
    }

    pub fn derivative(&self, tau: f64) -> Result<f64> {
        Ok(self.jet(tau)?.1)
    }

    pub fn second_derivative(&self, tau: f64) -> Result<f64> {
        Ok(self.jet(tau)?.2)
    }

    /// Value, first and second derivative at τ.
    pub fn jet(&self, tau: f64) -> Result<(f64, f64, f64)> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::TauOutOfRange { tau });
        }
        Ok(self.jet_unchecked(tau))
    }

    fn jet_unchecked(&self, tau: f64) -> (f64, f64, f64) {
        match *self {
            Schedule::SmoothRamp { start, end } => ramp_jet(3, start, end, tau),
            Schedule::Smoothstep { order, start, end } => ramp_jet(order, start, end, tau),
            Schedule::Linear { start, end } => (start + (end - start) * tau, end - start, 0.0),
            Schedule::GaussianPulse { amplitude, center, width } => {
                let x = tau - center;
                let s2 = width * width;
                let g = amplitude * (-x * x / (2.0 * s2)).exp();
                (g, -g * x / s2, g * (x * x / (s2 * s2) - 1.0 / s2))
            }
            Schedule::SineSquared { amplitude, window_start, window_end } => {
                if tau < window_start || tau > window_end {
                    return (0.0, 0.0, 0.0);
                }
                let k = PI / (window_end - window_start);
                let phi = k * (tau - window_start);
                let s = phi.sin();
                (amplitude * s * s, amplitude * k * (2.0 * phi).sin(), 2.0 * amplitude * k * k * (2.0 * phi).cos())
            }
            Schedule::Constant { value } => (value, 0.0, 0.0),
            Schedule::PiecewiseWithPause { start, end, pause_start, pause_end } => {
                let (sigma, dsigma, ddsigma) = paused_clock(pause_start, pause_end, tau);
                let (p, dp, ddp) = smoothstep(3, sigma);
                let span = end - start;
                (
                    start + span * p,
                    span * dp * dsigma,
                    span * (ddp * dsigma * dsigma + dp * ddsigma),
                )
            }
        }
    }
}

fn ramp_jet(order: u8, start: f64, end: f64, tau: f64) -> (f64, f64, f64) {
    let (p, dp, ddp) = smoothstep(order, tau);
    let span = end - start;
    (start + span * p, span * dp, span * ddp)
}

/// Reparameterized clock σ(τ) with σ' = 0 on `[a, b]`, and its derivatives.
fn paused_clock(a: f64, b: f64, tau: f64) -> (f64, f64, f64) {
    let d = b - a;
    if d == 0.0 {
        return (tau, 1.0, 0.0);
    }
    // Taper width equals the pause length; ∫χ = 2d.
    let w = d;
    let (chi, dchi, integral) = if tau < a - w {
        (0.0, 0.0, 0.0)
    } else if tau < a {
        let x = (tau - (a - w)) / w;
        let (p, dp, _) = smoothstep(3, x);
        (p, dp / w, w * smoothstep3_integral(x))
    } else if tau <= b {
        (1.0, 0.0, 0.5 * w + (tau - a))
    } else if tau < b + w {
        let x = (b + w - tau) / w;
        let (p, dp, _) = smoothstep(3, x);
        (p, -dp / w, 0.5 * w + d + w * (0.5 - smoothstep3_integral(x)))
    } else {
        (0.0, 0.0, d + w)
    };
    let c = 1.0 / (1.0 - (d + w));
    let sigma = (c * (tau - integral)).clamp(0.0, 1.0);
    (sigma, c * (1.0 - chi), -c * dchi)
}

/// Finite-difference estimate of dθ/dτ: central in the interior, second-order
/// one-sided within `h` of either boundary.
pub fn finite_difference_derivative(s: &Schedule, tau: f64, h: f64) -> Result<f64> {
    if h <= 0.0 || !h.is_finite() {
        return Err(Error::invalid(format!("step h must be > 0, got {h}")));
    }
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::TauOutOfRange { tau });
    }
    if tau - h >= 0.0 && tau + h <= 1.0 {
        Ok((s.value(tau + h)? - s.value(tau - h)?) / (2.0 * h))
    } else if tau - h < 0.0 {
        let (f0, f1, f2) = (s.value(tau)?, s.value(tau + h)?, s.value(tau + 2.0 * h)?);
        Ok((-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h))
    } else {
        let (f0, f1, f2) = (s.value(tau)?, s.value(tau - h)?, s.value(tau - 2.0 * h)?);
        Ok((3.0 * f0 - 4.0 * f1 + f2) / (2.0 * h))
    }
}
