use std::collections::BTreeSet;
use std::fmt;

use num_integer::Integer;

use crate::cyclotomic::Scalar;

/// A conjunction of conditions `a^e = 1` on the unit parameter, kept as the
/// exponent set. Resolves to the single group of n-th roots of unity with
/// n the gcd of the set; n = 0 encodes "all of k*".
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UnitConstraint {
    exponents: BTreeSet<u64>,
}

impl UnitConstraint {
    pub fn empty() -> Self {
        UnitConstraint::default()
    }

    pub fn from_exponents(exps: impl IntoIterator<Item = u64>) -> Self {
        UnitConstraint {
            exponents: exps.into_iter().collect(),
        }
    }

    pub fn insert(&mut self, e: u64) {
        self.exponents.insert(e);
    }

    pub fn merge(&mut self, other: &UnitConstraint) {
        self.exponents.extend(other.exponents.iter().copied());
    }

    pub fn exponents(&self) -> &BTreeSet<u64> {
        &self.exponents
    }

    /// The order n of the resolved root-of-unity group, gcd over the set
    /// with gcd of the empty set equal to 0 ("all units").
    pub fn resolved_order(&self) -> u64 {
        self.exponents.iter().fold(0u64, |g, &e| g.gcd(&e))
    }

    /// Whether a concrete unit satisfies every condition in the set.
    pub fn admits(&self, a: &Scalar) -> bool {
        let n = self.resolved_order();
        if n == 0 {
            return true;
        }
        match a.mul_order() {
            Some(m) => n.is_multiple_of(m),
            None => false,
        }
    }
}

impl fmt::Display for UnitConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.resolved_order();
        if n == 0 {
            write!(f, "k*")
        } else if n == 1 {
            write!(f, "trivial")
        } else {
            write!(f, "G_{n} (a^{n} = 1)")
        }
    }
}

/// gcd over the exponent set, 0 for the empty set.
pub fn resolve_constraint(e: &UnitConstraint) -> u64 {
    e.resolved_order()
}
