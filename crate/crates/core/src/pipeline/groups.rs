//! Feature-group combinations.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::features::Domain;

/// A non-empty subset of the three feature domains, stored as a bitmask
/// with bit 0 = RQA, bit 1 = ENT, bit 2 = NL.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeatureGroup(u8);

const ORDER: [u8; 7] = [0b001, 0b010, 0b100, 0b011, 0b101, 0b110, 0b111];

fn bit(d: Domain) -> u8 {
    match d {
        Domain::Rqa => 1,
        Domain::Ent => 2,
        Domain::Nl => 4,
    }
}

impl FeatureGroup {
    pub fn new(domains: &[Domain]) -> Option<Self> {
        let mask = domains.iter().fold(0u8, |m, &d| m | bit(d));
        (mask != 0).then_some(FeatureGroup(mask))
    }

    pub fn domains(self) -> Vec<Domain> {
        Domain::ALL.into_iter().filter(|&d| self.0 & bit(d) != 0).collect()
    }

    pub fn contains(self, d: Domain) -> bool {
        self.0 & bit(d) != 0
    }

    /// Feature-matrix columns, ascending.
    pub fn columns(self) -> Vec<usize> {
        let mut c: Vec<usize> = self.domains().into_iter().flat_map(Domain::columns).collect();
        c.sort_unstable();
        c
    }

    /// Position in the canonical order.
    pub fn rank(self) -> usize {
        ORDER.iter().position(|&m| m == self.0).expect("non-empty mask")
    }

    pub fn name(self) -> String {
        self.domains().iter().map(|d| d.short()).collect::<Vec<_>>().join("+")
    }
}

/// The seven combinations: R, E, N, R+E, R+N, E+N, R+E+N.
pub fn enumerate_feature_groups() -> Vec<FeatureGroup> {
    ORDER.iter().map(|&m| FeatureGroup(m)).collect()
}

impl fmt::Display for FeatureGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for FeatureGroup {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let domains = s.split('+').map(str::parse).collect::<Result<Vec<Domain>, _>>()?;
        FeatureGroup::new(&domains).ok_or_else(|| format!("empty feature group {s:?}"))
    }
}

impl Serialize for FeatureGroup {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}

impl<'de> Deserialize<'de> for FeatureGroup {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}
