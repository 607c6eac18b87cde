use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::numeric::gcd;

/// Free homotopy class of loops. Catalog models use the trivial class or an
/// integer winding vector; `Torsion` lets external data describe an element
/// of a finite cyclic group.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HomotopyClass {
    Trivial,
    Winding(Vec<i64>),
    Torsion { order: u64, residue: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassOrder {
    Finite(u64),
    Infinite,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed homotopy class `{input}`: {reason}")]
pub struct ClassParseError {
    pub input: String,
    pub reason: String,
}

impl HomotopyClass {
    /// Winding vector, collapsed to `Trivial` when every entry is zero.
    pub fn winding(v: Vec<i64>) -> Self {
        if v.iter().all(|&c| c == 0) {
            HomotopyClass::Trivial
        } else {
            HomotopyClass::Winding(v)
        }
    }

    pub fn torsion(order: u64, residue: u64) -> Self {
        assert!(order > 0);
        let r = residue % order;
        if r == 0 {
            HomotopyClass::Trivial
        } else {
            HomotopyClass::Torsion { order, residue: r }
        }
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self, HomotopyClass::Trivial)
    }

    /// k-th power in the group (k may be negative).
    pub fn pow(&self, k: i64) -> Self {
        match self {
            HomotopyClass::Trivial => HomotopyClass::Trivial,
            HomotopyClass::Winding(v) => HomotopyClass::winding(v.iter().map(|c| c * k).collect()),
            HomotopyClass::Torsion { order, residue } => {
                let o = *order as i128;
                let r = ((*residue as i128) * (k as i128)).rem_euclid(o);
                HomotopyClass::torsion(*order, r as u64)
            }
        }
    }

    pub fn order(&self) -> ClassOrder {
        match self {
            HomotopyClass::Trivial => ClassOrder::Finite(1),
            HomotopyClass::Winding(_) => ClassOrder::Infinite,
            HomotopyClass::Torsion { order, residue } => {
                let g = gcd(*order as i64, *residue as i64) as u64;
                ClassOrder::Finite(order / g)
            }
        }
    }

    /// A class is primitive when it is not a proper power β^k, k ≥ 2. For
    /// winding vectors this is gcd = 1. The trivial class and torsion
    /// elements are treated as non-primitive, which only ever makes the
    /// distinctness verdict more conservative.
    pub fn is_primitive(&self) -> bool {
        match self {
            HomotopyClass::Winding(v) => v.iter().fold(0, |g, &c| gcd(g, c)) == 1,
            _ => false,
        }
    }

    /// Divide by k when the class is a k-th power of a winding vector.
    pub fn root(&self, k: i64) -> Option<Self> {
        match self {
            HomotopyClass::Trivial => Some(HomotopyClass::Trivial),
            HomotopyClass::Winding(v) => {
                if k != 0 && v.iter().all(|c| c % k == 0) {
                    Some(HomotopyClass::winding(v.iter().map(|c| c / k).collect()))
                } else {
                    None
                }
            }
            HomotopyClass::Torsion { .. } => None,
        }
    }

    pub fn winding_vector(&self, len: usize) -> Option<Vec<i64>> {
        match self {
            HomotopyClass::Trivial => Some(vec![0; len]),
            HomotopyClass::Winding(v) if v.len() == len => Some(v.clone()),
            _ => None,
        }
    }
}

impl fmt::Display for HomotopyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HomotopyClass::Trivial => write!(f, "e"),
            HomotopyClass::Winding(v) => {
                let parts: Vec<String> = v.iter().map(|c| c.to_string()).collect();
                write!(f, "({})", parts.join(","))
            }
            HomotopyClass::Torsion { order, residue } => write!(f, "{residue} mod {order}"),
        }
    }
}

impl FromStr for HomotopyClass {
    type Err = ClassParseError;

    /// Accepts `e`, an integer tuple such as `(1,0,0)` or `[1, 0, 0]`, a
    /// bare integer `m`, or `r mod n`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let fail = |reason: &str| ClassParseError { input: s.to_string(), reason: reason.to_string() };
        let t = s.trim();
        if t.is_empty() {
            return Err(fail("empty class"));
        }
        if t == "e" {
            return Ok(HomotopyClass::Trivial);
        }
        if let Some((r, n)) = t.split_once("mod") {
            let r: u64 = r.trim().parse().map_err(|_| fail("residue is not a nonnegative integer"))?;
            let n: u64 = n.trim().parse().map_err(|_| fail("modulus is not a positive integer"))?;
            if n == 0 {
                return Err(fail("modulus must be positive"));
            }
            return Ok(HomotopyClass::torsion(n, r));
        }
        let inner = if (t.starts_with('(') && t.ends_with(')')) || (t.starts_with('[') && t.ends_with(']')) {
            &t[1..t.len() - 1]
        } else if t.starts_with('(') || t.starts_with('[') || t.ends_with(')') || t.ends_with(']') {
            return Err(fail("unbalanced brackets"));
        } else {
            t
        };
        let mut v = Vec::new();
        for part in inner.split(',') {
            let p = part.trim();
            if p.is_empty() {
                return Err(fail("empty tuple entry"));
            }
            v.push(p.parse::<i64>().map_err(|_| fail(&format!("`{p}` is not an integer")))?);
        }
        Ok(HomotopyClass::winding(v))
    }
}
