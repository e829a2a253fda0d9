//! The `.eig` v1 text format: one newform class per file.
//!
//! ```text
//! EIGENFORM v1 level=11 index=1 degree=1
//! minpoly 0 1
//! ap 2 -2/1
//! ap 3 -1/1
//! ```
//!
//! Each `ap` line carries the coordinates of a_q in the power basis of the
//! eigenvalue field over one common positive denominator, kept in lowest
//! terms so that save, load and save again reproduce the same bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::arith::primes_up_to;
use crate::error::{Error, Result};
use crate::modsym::Eigenform;
use crate::numfield::{make_field, FieldElement, NumberField};
use crate::poly::PolyQ;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Computed,
    /// Read from an external file; `cross_checked` is false when the level
    /// was too large to compare against a local computation.
    Imported { cross_checked: bool },
}

/// Eigenvalue coordinates over a common denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coords {
    pub nums: Vec<BigInt>,
    pub den: BigInt,
}

impl Coords {
    fn from_element(a: &FieldElement) -> Self {
        let den = a.coords().iter().fold(BigInt::one(), |d, c| d.lcm(c.denom()));
        let nums = a.coords().iter().map(|c| c.numer() * (&den / c.denom())).collect();
        Coords { nums, den }
    }

    /// Divides out the common content and makes the denominator positive.
    fn normalized(mut self) -> Self {
        if self.den.is_negative() {
            self.den = -self.den;
            self.nums.iter_mut().for_each(|n| *n = -&*n);
        }
        let g = self.nums.iter().fold(self.den.clone(), |g, n| g.gcd(n));
        if !g.is_one() {
            self.den /= &g;
            self.nums.iter_mut().for_each(|n| *n /= &g);
        }
        self
    }

    pub fn to_element(&self, field: &Arc<NumberField>) -> FieldElement {
        let c = self.nums.iter().map(|n| BigRational::new(n.clone(), self.den.clone())).collect();
        FieldElement::new(field, c)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EigenformRecord {
    pub level: u64,
    pub index: usize,
    /// Ascending integer coefficients of the eigenvalue field's defining
    /// polynomial.
    pub min_poly: Vec<BigInt>,
    /// Stored eigenvalues by prime.
    pub eigenvalues: BTreeMap<u64, Coords>,
    pub provenance: Provenance,
}

impl EigenformRecord {
    /// Records a_q for every prime q ≤ `bound`.
    pub fn from_form(f: &dyn Eigenform, bound: u64) -> Result<Self> {
        let min_poly = f.field().min_poly().to_integer_coeffs().ok_or_else(|| {
            Error::Precondition(format!("field of {}.{} has a non-integral defining polynomial", f.level(), f.index()))
        })?;
        let mut eigenvalues = BTreeMap::new();
        for q in primes_up_to(bound) {
            eigenvalues.insert(q, Coords::from_element(&f.eigenvalue(q)?));
        }
        Ok(EigenformRecord { level: f.level(), index: f.index(), min_poly, eigenvalues, provenance: Provenance::Computed })
    }

    pub fn degree(&self) -> usize {
        self.min_poly.len().saturating_sub(1)
    }

    /// Largest stored prime (0 when nothing is stored).
    pub fn bound(&self) -> u64 {
        self.eigenvalues.keys().next_back().copied().unwrap_or(0)
    }

    pub fn version(&self) -> u32 {
        FORMAT_VERSION
    }

    pub fn field(&self) -> Result<Arc<NumberField>> {
        make_field(&PolyQ::from_bigints(&self.min_poly))
    }

    pub fn insert(&mut self, q: u64, a: &FieldElement) {
        self.eigenvalues.insert(q, Coords::from_element(a));
    }

    fn validate(&self) -> Result<()> {
        let d = self.degree();
        if self.level == 0 || self.index == 0 {
            return Err(Error::Precondition("level and index must be positive".into()));
        }
        if d == 0 || !self.min_poly.last().is_some_and(|c| c.is_one()) {
            return Err(Error::Precondition("defining polynomial must be monic of positive degree".into()));
        }
        for (q, c) in &self.eigenvalues {
            if c.nums.len() != d {
                return Err(Error::Precondition(format!("a_{q} has {} coordinates, expected {d}", c.nums.len())));
            }
            if !c.den.is_positive() {
                return Err(Error::Precondition(format!("a_{q} has a non-positive denominator")));
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "EIGENFORM v{FORMAT_VERSION} level={} index={} degree={}", self.level, self.index, self.degree());
        s.push_str("minpoly");
        for c in &self.min_poly {
            let _ = write!(s, " {c}");
        }
        s.push('\n');
        for (q, c) in &self.eigenvalues {
            let _ = write!(s, "ap {q}");
            for n in &c.nums {
                let _ = write!(s, " {n}/{}", c.den);
            }
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        parse_lines(text.lines())
    }
}

pub fn save_record(r: &EigenformRecord, w: &mut dyn Write) -> Result<()> {
    r.validate()?;
    w.write_all(r.to_text().as_bytes())?;
    Ok(())
}

pub fn load_record(r: &mut dyn BufRead) -> Result<EigenformRecord> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    EigenformRecord::parse(&text)
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn int<T: std::str::FromStr>(line: usize, s: &str, what: &str) -> Result<T> {
    s.parse().map_err(|_| perr(line, format!("bad {what} {s:?}")))
}

fn keyed<'a>(line: usize, tok: Option<&'a str>, key: &str) -> Result<&'a str> {
    tok.and_then(|t| t.strip_prefix(key)).and_then(|t| t.strip_prefix('='))
        .ok_or_else(|| perr(line, format!("expected {key}=<value>")))
}

fn parse_lines<'a>(lines: impl Iterator<Item = &'a str>) -> Result<EigenformRecord> {
    let mut lines = lines.enumerate().map(|(i, l)| (i + 1, l));
    let (ln, header) = lines.next().ok_or_else(|| perr(1, "empty file: missing header"))?;
    let mut toks = header.split_whitespace();
    if toks.next() != Some("EIGENFORM") {
        return Err(perr(ln, "header must start with EIGENFORM"));
    }
    match toks.next() {
        Some("v1") => {}
        Some(v) => return Err(Error::Version(v.to_string())),
        None => return Err(perr(ln, "missing format version")),
    }
    let level: u64 = int(ln, keyed(ln, toks.next(), "level")?, "level")?;
    let index: usize = int(ln, keyed(ln, toks.next(), "index")?, "index")?;
    let degree: usize = int(ln, keyed(ln, toks.next(), "degree")?, "degree")?;
    if toks.next().is_some() {
        return Err(perr(ln, "trailing tokens in header"));
    }

    let (ln, mp) = lines.next().ok_or_else(|| perr(2, "truncated: missing minpoly line"))?;
    let mut toks = mp.split_whitespace();
    if toks.next() != Some("minpoly") {
        return Err(perr(ln, "expected minpoly line"));
    }
    let min_poly = toks.map(|t| int::<BigInt>(ln, t, "coefficient")).collect::<Result<Vec<_>>>()?;
    if min_poly.len() != degree + 1 {
        return Err(perr(ln, format!("minpoly has {} coefficients, header says degree {degree}", min_poly.len())));
    }

    let mut eigenvalues = BTreeMap::new();
    let mut last = 0u64;
    for (ln, l) in lines {
        if l.trim().is_empty() {
            continue;
        }
        let mut toks = l.split_whitespace();
        if toks.next() != Some("ap") {
            return Err(perr(ln, "expected an ap line"));
        }
        let q: u64 = int(ln, toks.next().ok_or_else(|| perr(ln, "missing prime"))?, "prime")?;
        if q <= last {
            return Err(perr(ln, format!("primes must be strictly increasing ({q} after {last})")));
        }
        last = q;
        let mut nums = Vec::with_capacity(degree);
        let mut den: Option<BigInt> = None;
        for t in toks {
            let (n, d) = t.split_once('/').ok_or_else(|| perr(ln, format!("expected num/den, got {t:?}")))?;
            let d: BigInt = int(ln, d, "denominator")?;
            if d.is_zero() {
                return Err(perr(ln, "zero denominator"));
            }
            match &den {
                Some(d0) if *d0 != d => return Err(perr(ln, "coordinates must share one denominator")),
                _ => den = Some(d),
            }
            nums.push(int(ln, n, "numerator")?);
        }
        if nums.len() != degree {
            return Err(perr(ln, format!("a_{q} has {} coordinates, expected {degree}", nums.len())));
        }
        eigenvalues.insert(q, Coords { nums, den: den.unwrap() }.normalized());
    }
    let r = EigenformRecord { level, index, min_poly, eigenvalues, provenance: Provenance::Computed };
    r.validate()?;
    Ok(r)
}

/// An eigenform backed by a record; eigenvalues past the stored primes are
/// unavailable.
pub struct StoredEigenform {
    level: u64,
    index: usize,
    field: Arc<NumberField>,
    eigenvalues: BTreeMap<u64, FieldElement>,
}

impl StoredEigenform {
    pub fn new(r: &EigenformRecord) -> Result<Self> {
        let field = r.field()?;
        let eigenvalues = r.eigenvalues.iter().map(|(q, c)| (*q, c.to_element(&field))).collect();
        Ok(StoredEigenform { level: r.level, index: r.index, field, eigenvalues })
    }

    pub fn bound(&self) -> u64 {
        self.eigenvalues.keys().next_back().copied().unwrap_or(0)
    }
}

impl Eigenform for StoredEigenform {
    fn level(&self) -> u64 {
        self.level
    }
    fn index(&self) -> usize {
        self.index
    }
    fn field(&self) -> &Arc<NumberField> {
        &self.field
    }
    fn eigenvalue(&self, q: u64) -> Result<FieldElement> {
        self.eigenvalues.get(&q).cloned().ok_or_else(|| {
            Error::Precondition(format!("a_{q} not stored for {}.{} (stored up to {})", self.level, self.index, self.bound()))
        })
    }
}
