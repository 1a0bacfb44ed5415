//! On-shell kinematics for the Dirac problem: energy, on-shell momentum,
//! incident direction and channel bookkeeping.

use crate::algebra::FreeEigensystem;
use crate::error::{Error, Result};
use crate::Vec4;

/// One of the four free spinor branches. Channels 1 and 2 are the
/// negative-energy branch, 3 and 4 the positive-energy branch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Channel {
    C1,
    C2,
    C3,
    C4,
}

impl Channel {
    pub fn index(self) -> usize {
        match self {
            Channel::C1 => 1,
            Channel::C2 => 2,
            Channel::C3 => 3,
            Channel::C4 => 4,
        }
    }

    pub fn from_index(n: usize) -> Result<Self> {
        match n {
            1 => Ok(Channel::C1),
            2 => Ok(Channel::C2),
            3 => Ok(Channel::C3),
            4 => Ok(Channel::C4),
            _ => Err(Error::Config(format!("channel index {n} out of range 1..4"))),
        }
    }

    /// True for the branch that is open at positive energies.
    pub fn positive(self) -> bool {
        matches!(self, Channel::C3 | Channel::C4)
    }

    /// The two channels open at energies of the given sign.
    pub fn open_pair(lambda: f64) -> [Channel; 2] {
        if lambda > 0.0 {
            [Channel::C3, Channel::C4]
        } else {
            [Channel::C1, Channel::C2]
        }
    }
}

/// Kinematic context of an on-shell Dirac computation: mass, energy with
/// `|λ| > m`, on-shell momentum `κ = √(λ²-m²) ≥ 0`, incident direction and
/// channel. Construction enforces the channel/energy-sign pairing.
#[derive(Clone, Debug)]
pub struct EnergyShell {
    m: f64,
    lambda: f64,
    kappa: f64,
    incident: [f64; 3],
    channel: Channel,
}

impl EnergyShell {
    pub fn new(m: f64, lambda: f64, incident: [f64; 3], channel: Channel) -> Result<Self> {
        if m <= 0.0 {
            return Err(Error::Config(format!("mass must be positive, got {m}")));
        }
        if lambda.abs() <= m {
            return Err(Error::GapEnergy { lambda, m });
        }
        if channel.positive() != (lambda > 0.0) {
            return Err(Error::ChannelMismatch {
                channel: channel.index(),
                lambda,
            });
        }
        let n = (incident[0] * incident[0] + incident[1] * incident[1] + incident[2] * incident[2])
            .sqrt();
        if n == 0.0 {
            return Err(Error::Config("incident direction must be nonzero".into()));
        }
        Ok(EnergyShell {
            m,
            lambda,
            kappa: (lambda * lambda - m * m).sqrt(),
            incident: [incident[0] / n, incident[1] / n, incident[2] / n],
            channel,
        })
    }

    pub fn mass(&self) -> f64 {
        self.m
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// On-shell momentum magnitude `κ ≥ 0`.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Signed momentum carried by the kernels: `+κ` for `λ > m`, `-κ` for
    /// `λ < -m` (the boundary value of the branch from the upper half-plane).
    pub fn kappa_signed(&self) -> f64 {
        if self.lambda > 0.0 {
            self.kappa
        } else {
            -self.kappa
        }
    }

    pub fn incident(&self) -> [f64; 3] {
        self.incident
    }

    pub fn channel(&self) -> Channel {
        self.channel
    }

    /// Incident momentum vector `k = κ·ω'`.
    pub fn incident_momentum(&self) -> [f64; 3] {
        [
            self.kappa * self.incident[0],
            self.kappa * self.incident[1],
            self.kappa * self.incident[2],
        ]
    }

    /// Normalised incident spinor `ĝ_n(k)`.
    pub fn incident_spinor(&self) -> Vec4 {
        let sys = FreeEigensystem::new(self.incident_momentum(), self.m);
        sys.channel_vector(self.channel.index())
    }

    /// Shell for the same energy but a different incident direction.
    pub fn with_incident(&self, incident: [f64; 3]) -> Result<Self> {
        EnergyShell::new(self.m, self.lambda, incident, self.channel)
    }

    /// Shell for the same energy and direction but another open channel.
    pub fn with_channel(&self, channel: Channel) -> Result<Self> {
        EnergyShell::new(self.m, self.lambda, self.incident, channel)
    }
}
