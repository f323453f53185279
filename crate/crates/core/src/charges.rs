//! The `d² − 1` non-local charge observables on the system–apparatus space.
//!
//! Every charge acts only on the "diagonal" subspace spanned by `|m⟩_S|m⟩_A`
//! (composite index `m·d + m`). On that subspace the set is the generalized
//! Gell-Mann basis of dimension `d`:
//!
//! * `x:m:n` is `|mm⟩⟨nn| + |nn⟩⟨mm|` for `0 ≤ m < n < d`
//! * `y:m:n` is `−i|mm⟩⟨nn| + i|nn⟩⟨mm|` for `0 ≤ m < n < d`
//! * `z:m:m` is `√(2/(m(m+1))) (Σ_{k<m} |kk⟩⟨kk| − m|mm⟩⟨mm|)` for `1 ≤ m < d`
//!
//! The matrices are kept exactly as written, so `Tr[Q_a Q_b] = 2δ_ab`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::quantum::{ComplexMatrix, HermitianObservable, C64, ONE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChargeAxis {
    X,
    Y,
    Z,
}

impl ChargeAxis {
    fn as_char(self) -> char {
        match self {
            ChargeAxis::X => 'x',
            ChargeAxis::Y => 'y',
            ChargeAxis::Z => 'z',
        }
    }
}

/// Identifies one charge, serialized as `"z:1:1"`, `"x:0:1"`, ...
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ChargeLabel {
    pub axis: ChargeAxis,
    pub m: usize,
    pub n: usize,
}

impl ChargeLabel {
    pub fn x(m: usize, n: usize) -> Self {
        Self {
            axis: ChargeAxis::X,
            m,
            n,
        }
    }

    pub fn y(m: usize, n: usize) -> Self {
        Self {
            axis: ChargeAxis::Y,
            m,
            n,
        }
    }

    pub fn z(m: usize) -> Self {
        Self {
            axis: ChargeAxis::Z,
            m,
            n: m,
        }
    }

    /// Checks the index ranges for system dimension `d`.
    pub fn validate(&self, d: usize) -> Result<()> {
        let ok = match self.axis {
            ChargeAxis::X | ChargeAxis::Y => self.m < self.n && self.n < d,
            ChargeAxis::Z => self.m == self.n && self.m >= 1 && self.m < d,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidLabel(format!(
                "{self} is out of range for d = {d}"
            )))
        }
    }
}

impl fmt::Display for ChargeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.axis.as_char(), self.m, self.n)
    }
}

impl FromStr for ChargeLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidLabel(format!("cannot parse {s:?}"));
        let mut parts = s.split(':');
        let axis = match parts.next() {
            Some("x") => ChargeAxis::X,
            Some("y") => ChargeAxis::Y,
            Some("z") => ChargeAxis::Z,
            _ => return Err(bad()),
        };
        let m = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
        let n = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
        if parts.next().is_some() || (axis == ChargeAxis::Z && m != n) {
            return Err(bad());
        }
        Ok(Self { axis, m, n })
    }
}

impl Serialize for ChargeLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ChargeLabel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Labels in canonical order: all `z` ascending in `m`, then `x`, then `y`,
/// each in lexicographic `(m, n)`.
pub fn canonical_labels(d: usize) -> Vec<ChargeLabel> {
    let mut labels: Vec<ChargeLabel> = (1..d).map(ChargeLabel::z).collect();
    let pairs: Vec<(usize, usize)> = (0..d)
        .flat_map(|m| (m + 1..d).map(move |n| (m, n)))
        .collect();
    labels.extend(pairs.iter().map(|&(m, n)| ChargeLabel::x(m, n)));
    labels.extend(pairs.iter().map(|&(m, n)| ChargeLabel::y(m, n)));
    labels
}

/// `√(2/(m(m+1)))`.
pub fn z_prefactor(m: usize) -> f64 {
    let m = m as f64;
    (2.0 / (m * (m + 1.0))).sqrt()
}

/// Builds the single `d² × d²` observable for `label`.
pub fn charge_observable(d: usize, label: ChargeLabel) -> Result<HermitianObservable> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "charge set needs d >= 2, got {d}"
        )));
    }
    label.validate(d)?;
    let diag = |k: usize| k * d + k;
    let mut q = ComplexMatrix::zeros(d * d, d * d);
    let (m, n) = (label.m, label.n);
    match label.axis {
        ChargeAxis::X => {
            q[(diag(m), diag(n))] = ONE;
            q[(diag(n), diag(m))] = ONE;
        }
        ChargeAxis::Y => {
            q[(diag(m), diag(n))] = C64::new(0.0, -1.0);
            q[(diag(n), diag(m))] = C64::new(0.0, 1.0);
        }
        ChargeAxis::Z => {
            let c = z_prefactor(m);
            for k in 0..m {
                q[(diag(k), diag(k))] = C64::new(c, 0.0);
            }
            q[(diag(m), diag(m))] = C64::new(-c * m as f64, 0.0);
        }
    }
    HermitianObservable::new(q)
}

/// All charges for system dimension `d`, in canonical order.
#[derive(Clone, Debug)]
pub struct ChargeSet {
    d: usize,
    charges: Vec<(ChargeLabel, HermitianObservable)>,
}

impl ChargeSet {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.charges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.charges.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(ChargeLabel, HermitianObservable)> {
        self.charges.iter()
    }

    pub fn labels(&self) -> Vec<ChargeLabel> {
        self.charges.iter().map(|(l, _)| *l).collect()
    }

    pub fn observables(&self) -> Vec<HermitianObservable> {
        self.charges.iter().map(|(_, q)| q.clone()).collect()
    }

    pub fn get(&self, label: &ChargeLabel) -> Result<&HermitianObservable> {
        label.validate(self.d)?;
        self.charges
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, q)| q)
            .ok_or_else(|| Error::InvalidLabel(label.to_string()))
    }
}

pub fn build_charge_set(d: usize) -> Result<ChargeSet> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "charge set needs d >= 2, got {d}"
        )));
    }
    let charges = canonical_labels(d)
        .into_iter()
        .map(|label| charge_observable(d, label).map(|q| (label, q)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ChargeSet { d, charges })
}

pub fn charge_by_label(set: &ChargeSet, label: &ChargeLabel) -> Result<HermitianObservable> {
    set.get(label).cloned()
}
