//! User indexing shared by every module.
//!
//! Uplink users take ids `0..M`, downlink users take ids `M..M+N`.

use serde::{Deserialize, Serialize};
use std::ops::Range;

use crate::error::{Error, Result};

/// Plain user id. Uplink ids come first, then downlink ids.
pub type UserId = usize;

/// Transmission direction of a user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Uplink,
    Downlink,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::Uplink, Direction::Downlink];

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Uplink => "uplink",
            Direction::Downlink => "downlink",
        }
    }
}

/// The disjoint uplink and downlink id sets of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserSet {
    pub num_uplink: usize,
    pub num_downlink: usize,
}

impl UserSet {
    pub fn new(num_uplink: usize, num_downlink: usize) -> Result<Self> {
        if num_uplink == 0 || num_downlink == 0 {
            return Err(Error::InvalidScenario(format!(
                "need at least one uplink and one downlink user (got M={num_uplink}, N={num_downlink})"
            )));
        }
        Ok(Self {
            num_uplink,
            num_downlink,
        })
    }

    pub fn len(&self) -> usize {
        self.num_uplink + self.num_downlink
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn uplink(&self) -> Range<UserId> {
        0..self.num_uplink
    }

    pub fn downlink(&self) -> Range<UserId> {
        self.num_uplink..self.len()
    }

    pub fn all(&self) -> Range<UserId> {
        0..self.len()
    }

    pub fn of(&self, dir: Direction) -> Range<UserId> {
        match dir {
            Direction::Uplink => self.uplink(),
            Direction::Downlink => self.downlink(),
        }
    }

    pub fn contains(&self, id: UserId) -> bool {
        id < self.len()
    }

    pub fn is_uplink(&self, id: UserId) -> bool {
        id < self.num_uplink
    }

    pub fn is_downlink(&self, id: UserId) -> bool {
        id >= self.num_uplink && id < self.len()
    }

    pub fn direction(&self, id: UserId) -> Result<Direction> {
        if self.is_uplink(id) {
            Ok(Direction::Uplink)
        } else if self.is_downlink(id) {
            Ok(Direction::Downlink)
        } else {
            Err(Error::UnknownUser(id))
        }
    }

    /// Position of a downlink id within the downlink block.
    pub fn downlink_index(&self, id: UserId) -> usize {
        id - self.num_uplink
    }
}
