use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Particle species chosen for a deposition attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Species {
    A,
    B,
}

impl Species {
    pub fn opposite(self) -> Self {
        match self {
            Species::A => Species::B,
            Species::B => Species::A,
        }
    }
}

/// Occupation of one lattice site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[repr(u8)]
pub enum SiteState {
    #[default]
    X = 0,
    A = 1,
    B = 2,
}

impl SiteState {
    pub fn occupied_by(species: Species) -> Self {
        match species {
            Species::A => SiteState::A,
            Species::B => SiteState::B,
        }
    }

    pub fn from_u8(v: u8) -> Self {
        match v {
            1 => SiteState::A,
            2 => SiteState::B,
            _ => SiteState::X,
        }
    }

    pub fn is_occupied(self) -> bool {
        self != SiteState::X
    }

    /// A next to B (in either order).
    pub fn conflicts_with(self, other: SiteState) -> bool {
        matches!(
            (self, other),
            (SiteState::A, SiteState::B) | (SiteState::B, SiteState::A)
        )
    }
}

impl fmt::Display for SiteState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SiteState::X => "X",
            SiteState::A => "A",
            SiteState::B => "B",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Boundary {
    /// Ring: site `n - 1` neighbours site `0`.
    #[default]
    Periodic,
    /// Open path: the end sites have a single neighbour.
    Free,
}

impl Boundary {
    /// Left and right neighbours of `site` on a lattice of `n` sites.
    pub fn neighbors(self, site: usize, n: usize) -> [Option<usize>; 2] {
        match self {
            Boundary::Periodic => [
                Some(if site == 0 { n - 1 } else { site - 1 }),
                Some(if site + 1 == n { 0 } else { site + 1 }),
            ],
            Boundary::Free => [
                site.checked_sub(1),
                if site + 1 < n { Some(site + 1) } else { None },
            ],
        }
    }
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Periodic => "periodic",
            Boundary::Free => "free",
        })
    }
}

impl FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "periodic" => Ok(Boundary::Periodic),
            "free" => Ok(Boundary::Free),
            other => Err(Error::InvalidConfig(format!("unknown boundary '{other}'"))),
        }
    }
}
