//! Canonical equations, systems, evaluation and the text/JSON formats.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::algebra::poly::{MonomialOrder, QPoly};
use crate::error::{CanonError, Result};
use crate::value::QuadExt;

/// 1-based variable index.
pub type VarIndex = usize;

/// One of `x_i = 1`, `x_i + x_j = x_k`, `x_i * x_j = x_k`.
///
/// Construct through [`CanonicalEquation::add`] / [`CanonicalEquation::mul`]
/// (or call [`normalize`]) so that `i <= j` holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CanonicalEquation {
    Unit(VarIndex),
    Add(VarIndex, VarIndex, VarIndex),
    Mul(VarIndex, VarIndex, VarIndex),
}

pub use CanonicalEquation::{Add, Mul, Unit};

pub fn normalize(eq: CanonicalEquation) -> CanonicalEquation {
    match eq {
        Add(i, j, k) if i > j => Add(j, i, k),
        Mul(i, j, k) if i > j => Mul(j, i, k),
        e => e,
    }
}

impl CanonicalEquation {
    pub fn add(i: VarIndex, j: VarIndex, k: VarIndex) -> Self {
        normalize(Add(i, j, k))
    }

    pub fn mul(i: VarIndex, j: VarIndex, k: VarIndex) -> Self {
        normalize(Mul(i, j, k))
    }

    pub fn indices(&self) -> Vec<VarIndex> {
        match *self {
            Unit(i) => vec![i],
            Add(i, j, k) | Mul(i, j, k) => vec![i, j, k],
        }
    }

    pub fn max_index(&self) -> VarIndex {
        self.indices().into_iter().max().unwrap_or(0)
    }

    pub fn is_mul(&self) -> bool {
        matches!(self, Mul(..))
    }

    /// `lhs - rhs` as a polynomial in `n` variables.
    pub fn to_poly(&self, n: usize, order: MonomialOrder) -> QPoly {
        let one = BigRational::one();
        match *self {
            Unit(i) => QPoly::var(n, i - 1, order) - QPoly::constant(n, one, order),
            Add(i, j, k) => {
                QPoly::var(n, i - 1, order) + QPoly::var(n, j - 1, order)
                    - QPoly::var(n, k - 1, order)
            }
            Mul(i, j, k) => {
                QPoly::var(n, i - 1, order) * QPoly::var(n, j - 1, order)
                    - QPoly::var(n, k - 1, order)
            }
        }
    }

    /// Checks the equation exactly; indices must lie within `a`.
    pub fn holds(&self, a: &[QuadExt]) -> Result<bool> {
        let get = |i: VarIndex| -> Result<&QuadExt> {
            a.get(i.wrapping_sub(1)).ok_or_else(|| {
                CanonError::InvalidArgument(format!(
                    "index x{i} outside assignment of length {}",
                    a.len()
                ))
            })
        };
        Ok(match *self {
            Unit(i) => *get(i)? == QuadExt::one(),
            Add(i, j, k) => get(i)?.add(get(j)?)? == *get(k)?,
            Mul(i, j, k) => get(i)?.mul(get(j)?)? == *get(k)?,
        })
    }

    /// Exact check over rationals.
    pub fn holds_rational(&self, a: &[BigRational]) -> bool {
        match *self {
            Unit(i) => a[i - 1].is_one(),
            Add(i, j, k) => &a[i - 1] + &a[j - 1] == a[k - 1],
            Mul(i, j, k) => &a[i - 1] * &a[j - 1] == a[k - 1],
        }
    }
}

impl fmt::Display for CanonicalEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Unit(i) => write!(f, "x{i} = 1"),
            Add(i, j, k) => write!(f, "x{i} + x{j} = x{k}"),
            Mul(i, j, k) => write!(f, "x{i} * x{j} = x{k}"),
        }
    }
}

pub fn evaluate(eq: CanonicalEquation, a: &[QuadExt]) -> Result<bool> {
    eq.holds(a)
}

/// The two equation universes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Universe {
    /// All canonical equations (`E_n`).
    E,
    /// Units and additions only (`W_n`).
    W,
}

/// Every equation of the universe over `n` variables, in sorted order.
pub fn universe(n: usize, u: Universe) -> Vec<CanonicalEquation> {
    let mut out: Vec<CanonicalEquation> = (1..=n).map(Unit).collect();
    for i in 1..=n {
        for j in i..=n {
            for k in 1..=n {
                out.push(Add(i, j, k));
            }
        }
    }
    if u == Universe::E {
        for i in 1..=n {
            for j in i..=n {
                for k in 1..=n {
                    out.push(Mul(i, j, k));
                }
            }
        }
    }
    out
}

/// Finite set of canonical equations over `arity` variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalSystem {
    arity: usize,
    equations: BTreeSet<CanonicalEquation>,
}

impl CanonicalSystem {
    pub fn new(arity: usize) -> Self {
        CanonicalSystem {
            arity,
            equations: BTreeSet::new(),
        }
    }

    /// Normalizes and deduplicates; fails when an index is outside `1..=arity`.
    pub fn from_equations<I>(arity: usize, eqs: I) -> Result<Self>
    where
        I: IntoIterator<Item = CanonicalEquation>,
    {
        let mut s = CanonicalSystem::new(arity);
        for e in eqs {
            s.insert(e)?;
        }
        Ok(s)
    }

    pub fn insert(&mut self, eq: CanonicalEquation) -> Result<bool> {
        for i in eq.indices() {
            if i == 0 || i > self.arity {
                return Err(CanonError::IndexOutOfRange {
                    line: 0,
                    index: i,
                    arity: self.arity,
                });
            }
        }
        Ok(self.equations.insert(normalize(eq)))
    }

    pub fn remove(&mut self, eq: &CanonicalEquation) -> bool {
        self.equations.remove(&normalize(*eq))
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    pub fn contains(&self, eq: &CanonicalEquation) -> bool {
        self.equations.contains(&normalize(*eq))
    }

    pub fn equations(&self) -> impl Iterator<Item = &CanonicalEquation> {
        self.equations.iter()
    }

    pub fn is_subset(&self, other: &CanonicalSystem) -> bool {
        self.equations.is_subset(&other.equations)
    }

    /// No multiplication equations: the system lies in `W_n`.
    pub fn is_additive(&self) -> bool {
        !self.equations.iter().any(|e| e.is_mul())
    }

    /// `true` when every equation holds under `a`.
    pub fn is_solved_by(&self, a: &[QuadExt]) -> Result<bool> {
        for e in &self.equations {
            if !e.holds(a)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn to_polys(&self, order: MonomialOrder) -> Vec<QPoly> {
        self.equations
            .iter()
            .map(|e| e.to_poly(self.arity, order))
            .collect()
    }

    pub fn to_text(&self) -> String {
        serialize_system(self)
    }

    pub fn to_json(&self) -> Value {
        let eqs: Vec<Value> = self
            .equations
            .iter()
            .map(|e| match *e {
                Unit(i) => json!(["U", i]),
                Add(i, j, k) => json!(["A", i, j, k]),
                Mul(i, j, k) => json!(["M", i, j, k]),
            })
            .collect();
        json!({"vars": self.arity, "equations": eqs})
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| CanonError::Parse {
            line: 0,
            message: m.to_string(),
        };
        let arity = v
            .get("vars")
            .and_then(Value::as_u64)
            .ok_or_else(|| bad("missing \"vars\""))? as usize;
        let eqs = v
            .get("equations")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing \"equations\""))?;
        let mut s = CanonicalSystem::new(arity);
        for (n, e) in eqs.iter().enumerate() {
            let arr = e.as_array().ok_or_else(|| bad("equation is not an array"))?;
            let tag = arr.first().and_then(Value::as_str).unwrap_or("");
            let idx: Option<Vec<usize>> =
                arr[1..].iter().map(|x| x.as_u64().map(|v| v as usize)).collect();
            let idx = idx.ok_or_else(|| bad("non-integer index"))?;
            let eq = match (tag, idx.as_slice()) {
                ("U", [i]) => Unit(*i),
                ("A", [i, j, k]) => Add(*i, *j, *k),
                ("M", [i, j, k]) => Mul(*i, *j, *k),
                _ => return Err(bad(&format!("malformed equation #{}", n + 1))),
            };
            s.insert(eq)?;
        }
        Ok(s)
    }
}

impl fmt::Display for CanonicalSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.equations.iter().map(|e| e.to_string()).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

impl Serialize for CanonicalSystem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

/// All equations of the universe that hold under `a`.
pub fn satisfied_subset(a: &[QuadExt], u: Universe) -> Result<CanonicalSystem> {
    let n = a.len();
    let mut s = CanonicalSystem::new(n);
    for e in universe(n, u) {
        if e.holds(a)? {
            s.equations.insert(e);
        }
    }
    Ok(s)
}

/// Rational specialization of [`satisfied_subset`].
pub fn satisfied_subset_rational(a: &[BigRational], u: Universe) -> CanonicalSystem {
    let n = a.len();
    let mut s = CanonicalSystem::new(n);
    for e in universe(n, u) {
        if e.holds_rational(a) {
            s.equations.insert(e);
        }
    }
    s
}

pub fn serialize_system(sys: &CanonicalSystem) -> String {
    let mut out = format!("vars {}\n", sys.arity);
    for e in &sys.equations {
        out.push_str(&e.to_string());
        out.push('\n');
    }
    out
}

fn parse_var(tok: &str, line: usize, arity: usize) -> Result<VarIndex> {
    let digits = tok.strip_prefix('x').ok_or_else(|| CanonError::Parse {
        line,
        message: format!("expected a variable like x1, found {tok:?}"),
    })?;
    let idx: usize = digits.parse().map_err(|_| CanonError::Parse {
        line,
        message: format!("bad variable {tok:?}"),
    })?;
    if idx == 0 || idx > arity {
        return Err(CanonError::IndexOutOfRange {
            line,
            index: idx,
            arity,
        });
    }
    Ok(idx)
}

/// Parses the text format: `vars <n>` followed by one equation per line.
pub fn parse_system(text: &str) -> Result<CanonicalSystem> {
    let mut sys: Option<CanonicalSystem> = None;
    for (no, raw) in text.lines().enumerate() {
        let line = no + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = t.split_whitespace().collect();
        let Some(s) = sys.as_mut() else {
            match toks.as_slice() {
                ["vars", n] => {
                    let n: usize = n.parse().map_err(|_| CanonError::Parse {
                        line,
                        message: format!("bad variable count {n:?}"),
                    })?;
                    if n == 0 {
                        return Err(CanonError::Parse {
                            line,
                            message: "variable count must be positive".into(),
                        });
                    }
                    sys = Some(CanonicalSystem::new(n));
                    continue;
                }
                _ => {
                    return Err(CanonError::Parse {
                        line,
                        message: "expected header `vars <n>`".into(),
                    })
                }
            }
        };
        let n = s.arity;
        let eq = match toks.as_slice() {
            [a, "=", "1"] => Unit(parse_var(a, line, n)?),
            [a, "+", b, "=", c] => CanonicalEquation::add(
                parse_var(a, line, n)?,
                parse_var(b, line, n)?,
                parse_var(c, line, n)?,
            ),
            [a, "*", b, "=", c] => CanonicalEquation::mul(
                parse_var(a, line, n)?,
                parse_var(b, line, n)?,
                parse_var(c, line, n)?,
            ),
            _ => {
                return Err(CanonError::Parse {
                    line,
                    message: format!("malformed equation {t:?}"),
                })
            }
        };
        s.equations.insert(eq);
    }
    sys.ok_or(CanonError::Parse {
        line: 0,
        message: "empty input: missing `vars <n>` header".into(),
    })
}

/// Converts a rational vector into exact values.
pub fn to_quad(v: &[BigRational]) -> Vec<QuadExt> {
    v.iter().cloned().map(QuadExt::rational).collect()
}

pub fn zero_vec(n: usize) -> Vec<BigRational> {
    vec![BigRational::zero(); n]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn normalization() {
        assert_eq!(normalize(Add(3, 2, 1)), Add(2, 3, 1));
        assert_eq!(normalize(Unit(4)), Unit(4));
        assert_eq!(normalize(Mul(5, 5, 2)), Mul(5, 5, 2));
        assert_eq!(normalize(Mul(6, 2, 2)), Mul(2, 6, 2));
    }

    #[test]
    fn universe_sizes() {
        assert_eq!(universe(3, Universe::E).len(), 39);
        assert_eq!(universe(2, Universe::E).len(), 14);
        assert_eq!(universe(4, Universe::W).len(), 44);
        assert_eq!(universe(1, Universe::E).len(), 3);
    }

    #[test]
    fn evaluation() {
        let a: Vec<QuadExt> = [1, 2, 4].iter().map(|&v| QuadExt::from_int(v)).collect();
        assert!(evaluate(Mul(2, 2, 3), &a).unwrap());
        assert!(!evaluate(Unit(1), &vec![QuadExt::zero(); 3]).unwrap());
        let phi = QuadExt::new(rat(1, 2), rat(1, 2), 5);
        let psi = QuadExt::new(rat(-1, 2), rat(1, 2), 5);
        let w = vec![QuadExt::one(), psi, phi];
        assert!(!evaluate(Add(2, 3, 1), &w).unwrap());
        assert!(evaluate(Mul(2, 3, 1), &w).unwrap());
        let mixed = vec![QuadExt::sqrt(2), QuadExt::sqrt(3), QuadExt::one()];
        assert!(evaluate(Add(1, 2, 3), &mixed).is_err());
    }

    #[test]
    fn satisfied_subsets() {
        let z = vec![QuadExt::zero(); 3];
        let s = satisfied_subset(&z, Universe::E).unwrap();
        assert_eq!(s.len(), 36);
        assert!(!s.equations().any(|e| matches!(e, Unit(_))));
        let a: Vec<QuadExt> = [1, 2, 4].iter().map(|&v| QuadExt::from_int(v)).collect();
        let s = satisfied_subset(&a, Universe::E).unwrap();
        for e in [Unit(1), Add(1, 1, 2), Mul(2, 2, 3), Add(2, 2, 3)] {
            assert!(s.contains(&e));
        }
        assert!(s.is_solved_by(&a).unwrap());
        let ones = vec![QuadExt::one(); 3];
        let s = satisfied_subset(&ones, Universe::W).unwrap();
        assert_eq!(s.len(), 3);
    }

    #[test]
    fn parse_and_serialize() {
        let s = parse_system("vars 3\nx1 = 1\nx1 + x1 = x2\nx2 * x2 = x3").unwrap();
        let expected =
            CanonicalSystem::from_equations(3, [Unit(1), Add(1, 1, 2), Mul(2, 2, 3)]).unwrap();
        assert_eq!(s, expected);
        assert_eq!(parse_system(&serialize_system(&s)).unwrap(), s);
        let s = parse_system("vars 2\nx2 + x1 = x1").unwrap();
        assert!(s.contains(&Add(1, 2, 1)));
        let e = parse_system("vars 1\nx2 = 1").unwrap_err();
        assert!(e.to_string().contains("index out of range"));
        let e = parse_system("vars 2\n# c\nx1 - x2 = x1").unwrap_err();
        assert!(e.to_string().starts_with("line 3"));
        let dup = parse_system("vars 2\nx1 + x2 = x1\nx2 + x1 = x1").unwrap();
        assert_eq!(dup.len(), 1);
    }

    #[test]
    fn json_round_trip() {
        let s = CanonicalSystem::from_equations(3, [Unit(1), Add(1, 1, 2), Mul(2, 2, 3)]).unwrap();
        let j = s.to_json();
        assert_eq!(j["equations"][0], json!(["U", 1]));
        assert_eq!(CanonicalSystem::from_json(&j).unwrap(), s);
    }
}
