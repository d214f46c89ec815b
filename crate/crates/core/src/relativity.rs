//! One-dimensional Lorentz boosts of event pairs along the boost axis.

#[allow(unused_imports)]
use num_traits::Float;

use crate::physconst::SPEED_OF_LIGHT as C;
use crate::{Error, Result};

/// Events whose boosted separation is below this many seconds count as
/// simultaneous.
pub const SIMULTANEITY_TOL: f64 = 1e-30;

/// A spacetime point: position along the boost axis (m) and time (s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub x: f64,
    pub t: f64,
}

impl Event {
    pub fn new(x: f64, t: f64) -> Result<Self> {
        if !(x.is_finite() && t.is_finite()) {
            return Err(Error::invalid("event coordinates must be finite"));
        }
        Ok(Self { x, t })
    }

    /// `c²t² - x²`.
    pub fn interval(&self) -> f64 {
        C * C * self.t * self.t - self.x * self.x
    }
}

/// A boost with signed velocity `v`, |v| < c.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Boost {
    v: f64,
    gamma: f64,
}

impl Boost {
    pub fn new(v: f64) -> Result<Self> {
        if !v.is_finite() || v.abs() >= C {
            return Err(Error::InvalidBoost { v });
        }
        let beta = v / C;
        Ok(Self { v, gamma: 1.0 / (1.0 - beta * beta).sqrt() })
    }

    pub fn identity() -> Self {
        Self { v: 0.0, gamma: 1.0 }
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn inverse(&self) -> Self {
        Self { v: -self.v, gamma: self.gamma }
    }
}

/// `(γ(x - vt), γ(t - vx/c²))`.
pub fn transform(event: Event, boost: Boost) -> Event {
    let (v, g) = (boost.v, boost.gamma);
    Event { x: g * (event.x - v * event.t), t: g * (event.t - v * event.x / (C * C)) }
}

/// `(x_B - x_A)/(t_B - t_A)`, which may exceed c.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EffectiveVelocity {
    Finite(f64),
    /// The events are simultaneous in the rest frame.
    Infinite,
}

impl EffectiveVelocity {
    pub fn value(&self) -> f64 {
        match self {
            EffectiveVelocity::Finite(v) => *v,
            EffectiveVelocity::Infinite => f64::INFINITY,
        }
    }

    pub fn exceeds_light(&self) -> bool {
        match self {
            EffectiveVelocity::Finite(v) => v.abs() > C,
            EffectiveVelocity::Infinite => true,
        }
    }
}

pub fn effective_velocity(a: Event, b: Event) -> EffectiveVelocity {
    let dt = b.t - a.t;
    if dt == 0.0 {
        EffectiveVelocity::Infinite
    } else {
        EffectiveVelocity::Finite((b.x - a.x) / dt)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ordering {
    Same,
    Inverted,
    Simultaneous,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeOrder {
    /// `t'_B - t'_A` in the boosted frame, s.
    pub delta_t_boosted: f64,
    pub ordering: Ordering,
}

/// Temporal order of `a` and `b` seen from the boosted frame.
///
/// Uses `t'_B - t'_A = γ((t_B - t_A) - v(x_B - x_A)/c²)`, the expanded form of
/// `(t_B - t_A)·γ(1 - v·v_AB/c²)`, which stays finite for simultaneous pairs.
/// When the rest-frame times coincide, a positive boosted separation is
/// reported as `Same`.
pub fn time_order(a: Event, b: Event, boost: Boost) -> TimeOrder {
    let dt = b.t - a.t;
    let dx = b.x - a.x;
    let delta_t_boosted = boost.gamma * (dt - boost.v * dx / (C * C));
    let ordering = if delta_t_boosted.abs() < SIMULTANEITY_TOL {
        Ordering::Simultaneous
    } else {
        let rest_sign = if dt < 0.0 { -1.0 } else { 1.0 };
        if delta_t_boosted.signum() == rest_sign {
            Ordering::Same
        } else {
            Ordering::Inverted
        }
    };
    TimeOrder { delta_t_boosted, ordering }
}

/// Smallest boost speed (signed like `v_AB`) that reverses the order of the
/// pair: `c²/v_AB`. Any boost beyond it in the same direction inverts.
pub fn min_inversion_boost(a: Event, b: Event) -> Result<f64> {
    match effective_velocity(a, b) {
        EffectiveVelocity::Infinite => Ok(0.0),
        EffectiveVelocity::Finite(v_ab) => {
            if v_ab.abs() <= C {
                Err(Error::NoInversionPossible { v_ab: v_ab.abs() })
            } else {
                Ok(C * C * (b.t - a.t) / (b.x - a.x))
            }
        }
    }
}
