//! Scattering amplitudes of the detector constriction.
//!
//! A single detector electron either transmits or reflects off the
//! constriction. The pair of outcomes is parametrized by a mixing angle and
//! a common phase,
//!
//! ```text
//! t = cos(theta) e^{i eta},    r = i sin(theta) e^{i eta},
//! ```
//!
//! which keeps the one-channel scattering matrix unitary for every (theta,
//! eta). The transmission probability is T_d = cos^2(theta). When the
//! interfering electron sits on the left or right path of the ring the
//! constriction sees two slightly different potentials, hence two pairs; the
//! overlap of the corresponding outgoing detector states is what survives of
//! the fringe.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Transmitted/reflected amplitude pair of the detector constriction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringPair {
    theta: f64,
    eta: f64,
}

impl ScatteringPair {
    /// Builds a pair from the mixing angle `theta` in [0, pi/2] and the
    /// common phase `eta` in [-pi, pi].
    pub fn new(theta: f64, eta: f64) -> Result<Self> {
        if !theta.is_finite() || !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta) {
            return Err(Error::Domain {
                what: "theta",
                value: theta,
                expected: "in [0, pi/2]",
            });
        }
        if !eta.is_finite() || !(-std::f64::consts::PI..=std::f64::consts::PI).contains(&eta) {
            return Err(Error::Domain {
                what: "eta",
                value: eta,
                expected: "in [-pi, pi]",
            });
        }
        Ok(Self { theta, eta })
    }

    /// Builds the pair whose transmission probability is `t_d`, i.e.
    /// theta = arccos(sqrt(t_d)).
    pub fn from_transmission(t_d: f64, eta: f64) -> Result<Self> {
        if !t_d.is_finite() || !(0.0..=1.0).contains(&t_d) {
            return Err(Error::Domain {
                what: "t_d",
                value: t_d,
                expected: "in [0, 1]",
            });
        }
        Self::new(t_d.sqrt().acos(), eta)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Transmitted amplitude t = cos(theta) e^{i eta}.
    pub fn transmitted(&self) -> C64 {
        C64::from_polar(self.theta.cos(), self.eta)
    }

    /// Reflected amplitude r = i sin(theta) e^{i eta}.
    pub fn reflected(&self) -> C64 {
        C64::i() * C64::from_polar(self.theta.sin(), self.eta)
    }

    /// Transmission probability |t|^2 = cos^2(theta).
    pub fn transmission(&self) -> f64 {
        let c = self.theta.cos();
        c * c
    }
}

/// Outgoing detector state conditioned on one interferometer path.
///
/// Thin semantic wrapper: the state is fully described by its amplitude pair,
/// but pipelines read better when the conditioning is explicit in the type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpOutgoingState {
    pub pair: ScatteringPair,
}

impl SpOutgoingState {
    pub fn new(pair: ScatteringPair) -> Self {
        Self { pair }
    }

    /// Norm |t|^2 + |r|^2, identically 1 up to rounding.
    pub fn norm(&self) -> f64 {
        self.pair.transmitted().norm_sqr() + self.pair.reflected().norm_sqr()
    }

    /// Overlap of this conditioned state with another, `<self|other>` with
    /// `self` playing the right-path role.
    pub fn overlap(&self, other: &SpOutgoingState) -> C64 {
        sp_overlap(&self.pair, &other.pair)
    }
}

/// Single-probe overlap of the right- and left-conditioned detector states,
///
/// ```text
/// <chi_r|chi_l> = conj(t_r) t_l + conj(r_r) r_l
///               = cos(theta_r - theta_l) e^{i (eta_l - eta_r)}.
/// ```
///
/// The modulus is the per-electron fringe attenuation, the phase is the
/// per-electron fringe shift.
pub fn sp_overlap(right: &ScatteringPair, left: &ScatteringPair) -> C64 {
    right.transmitted().conj() * left.transmitted() + right.reflected().conj() * left.reflected()
}
