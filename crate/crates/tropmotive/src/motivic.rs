//! The coefficient ring: finite L-Laurent combinations of stratum symbols,
//! truncated series over cone lattice points, and rational generating
//! functions given as products of geometric-series factors.

use std::collections::BTreeMap;
use std::ops::{Add, AddAssign, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::cone::Cone;
use crate::error::TropError;
use crate::lattice::{dot, scale_vec, Int, LatticeVector};

pub const UNIT_SYMBOL: &str = "1";

/// Dimensions and optional rewrite rules for stratum symbols. Rules may only
/// rewrite a symbol into a combination of unit-symbol terms and are applied
/// eagerly at term creation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymbolTable {
    dims: BTreeMap<String, i64>,
    rules: BTreeMap<String, MotivicElement>,
}

impl SymbolTable {
    pub fn new() -> SymbolTable {
        SymbolTable::default()
    }

    pub fn set_dim(&mut self, symbol: &str, dim: i64) {
        self.dims.insert(symbol.to_string(), dim);
    }

    pub fn dim(&self, symbol: &str) -> i64 {
        self.dims.get(symbol).copied().unwrap_or(0)
    }

    /// Declare `symbol` equal to `value`; the value must be supported on the
    /// unit symbol only.
    pub fn set_rule(&mut self, symbol: &str, value: MotivicElement) -> Result<(), TropError> {
        if value.terms.keys().any(|(s, _)| s != UNIT_SYMBOL) {
            return Err(TropError::Malformed(
                "rewrite rules must reduce to unit-symbol combinations".into(),
            ));
        }
        self.rules.insert(symbol.to_string(), value);
        Ok(())
    }

    pub fn rule(&self, symbol: &str) -> Option<&MotivicElement> {
        self.rules.get(symbol)
    }

    /// A single term, with rewrite rules applied.
    pub fn term(&self, coeff: Int, symbol: &str, lpow: i64) -> MotivicElement {
        if let Some(r) = self.rules.get(symbol) {
            return r.scale(&coeff).shift_l(lpow);
        }
        MotivicElement::term(coeff, symbol, lpow)
    }
}

/// An element of the coefficient ring: an integer combination of
/// symbol · L^k terms, symbols never multiplied against each other.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct MotivicElement {
    terms: BTreeMap<(String, i64), Int>,
}

impl MotivicElement {
    pub fn zero() -> MotivicElement {
        MotivicElement::default()
    }

    pub fn one() -> MotivicElement {
        MotivicElement::term(Int::one(), UNIT_SYMBOL, 0)
    }

    pub fn term(coeff: Int, symbol: &str, lpow: i64) -> MotivicElement {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert((symbol.to_string(), lpow), coeff);
        }
        MotivicElement { terms }
    }

    pub fn from_int(n: i64) -> MotivicElement {
        MotivicElement::term(Int::from(n), UNIT_SYMBOL, 0)
    }

    /// L^k.
    pub fn lpow(k: i64) -> MotivicElement {
        MotivicElement::term(Int::one(), UNIT_SYMBOL, k)
    }

    /// L - 1.
    pub fn l_minus_one() -> MotivicElement {
        MotivicElement::lpow(1) - MotivicElement::one()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&str, i64, &Int)> {
        self.terms.iter().map(|((s, k), c)| (s.as_str(), *k, c))
    }

    pub fn scale(&self, c: &Int) -> MotivicElement {
        if c.is_zero() {
            return MotivicElement::zero();
        }
        MotivicElement {
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.clone(), v * c))
                .collect(),
        }
    }

    /// Multiply by L^k.
    pub fn shift_l(&self, k: i64) -> MotivicElement {
        MotivicElement {
            terms: self
                .terms
                .iter()
                .map(|((s, e), c)| ((s.clone(), e + k), c.clone()))
                .collect(),
        }
    }

    /// Ring product; symbols may only multiply against unit-symbol terms.
    pub fn try_mul(&self, other: &MotivicElement) -> Result<MotivicElement, TropError> {
        let mut out = MotivicElement::zero();
        for ((s1, k1), c1) in &self.terms {
            for ((s2, k2), c2) in &other.terms {
                let symbol = if s1 == UNIT_SYMBOL {
                    s2
                } else if s2 == UNIT_SYMBOL {
                    s1
                } else {
                    return Err(TropError::SymbolProduct);
                };
                out.add_term(symbol, k1 + k2, c1 * c2);
            }
        }
        Ok(out)
    }

    fn add_term(&mut self, symbol: &str, lpow: i64, coeff: Int) {
        if coeff.is_zero() {
            return;
        }
        let key = (symbol.to_string(), lpow);
        let entry = self.terms.entry(key.clone()).or_insert_with(Int::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    /// max over terms of dim(symbol) + L-exponent; None for 0.
    pub fn degree(&self, table: &SymbolTable) -> Option<i64> {
        self.terms
            .keys()
            .map(|(s, k)| table.dim(s) + k)
            .max()
    }

    /// (L - 1)^n.
    pub fn l_minus_one_pow(n: usize) -> MotivicElement {
        let mut out = MotivicElement::one();
        for _ in 0..n {
            out = out.try_mul(&MotivicElement::l_minus_one()).expect("unit terms");
        }
        out
    }
}

impl Add for MotivicElement {
    type Output = MotivicElement;
    fn add(mut self, rhs: MotivicElement) -> MotivicElement {
        for ((s, k), c) in rhs.terms {
            self.add_term(&s, k, c);
        }
        self
    }
}

impl AddAssign for MotivicElement {
    fn add_assign(&mut self, rhs: MotivicElement) {
        for ((s, k), c) in rhs.terms {
            self.add_term(&s, k, c);
        }
    }
}

impl Neg for MotivicElement {
    type Output = MotivicElement;
    fn neg(self) -> MotivicElement {
        MotivicElement {
            terms: self.terms.into_iter().map(|(k, c)| (k, -c)).collect(),
        }
    }
}

impl Sub for MotivicElement {
    type Output = MotivicElement;
    fn sub(self, rhs: MotivicElement) -> MotivicElement {
        self + (-rhs)
    }
}

/// A truncated series over the lattice points of a pointed cone, graded by a
/// vector that is >= 1 on every nonzero generator direction used.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeSeries {
    pub cone: Cone,
    pub grading: LatticeVector,
    pub bound: i64,
    coeffs: BTreeMap<LatticeVector, MotivicElement>,
}

impl ConeSeries {
    pub fn new(cone: Cone, grading: LatticeVector, bound: i64) -> ConeSeries {
        ConeSeries { cone, grading, bound, coeffs: BTreeMap::new() }
    }

    pub fn add_coeff(&mut self, w: LatticeVector, value: MotivicElement) {
        assert!(self.cone.contains_point(&w), "key outside the cone");
        assert!(dot(&self.grading, &w) <= Int::from(self.bound), "key beyond bound");
        if value.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(w.clone()).or_insert_with(MotivicElement::zero);
        *entry += value;
        if entry.is_zero() {
            self.coeffs.remove(&w);
        }
    }

    pub fn coeff(&self, w: &[Int]) -> MotivicElement {
        self.coeffs.get(w).cloned().unwrap_or_else(MotivicElement::zero)
    }

    pub fn coeffs(&self) -> &BTreeMap<LatticeVector, MotivicElement> {
        &self.coeffs
    }

    /// Truncated sum; gradings and bounds must match.
    pub fn try_add(&self, other: &ConeSeries) -> Result<ConeSeries, TropError> {
        if self.grading != other.grading || self.bound != other.bound {
            return Err(TropError::GradingMismatch);
        }
        let mut gens = self.cone.generators();
        gens.extend(other.cone.generators());
        let cone = Cone::from_generators(self.cone.ambient_rank(), &gens, &[]);
        let mut out = ConeSeries::new(cone, self.grading.clone(), self.bound);
        for (w, v) in &self.coeffs {
            out.add_coeff(w.clone(), v.clone());
        }
        for (w, v) in &other.coeffs {
            out.add_coeff(w.clone(), v.clone());
        }
        Ok(out)
    }
}

/// prefactor · Π_j L^{-(m_j+1)} x^{v_j} / (1 - L^{-(m_j+1)} x^{v_j}).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalGenFun {
    pub prefactor: MotivicElement,
    pub factors: Vec<(LatticeVector, u32)>,
    ambient: usize,
}

impl RationalGenFun {
    pub fn new(
        ambient: usize,
        prefactor: MotivicElement,
        factors: Vec<(LatticeVector, u32)>,
    ) -> Result<RationalGenFun, TropError> {
        let gens: Vec<LatticeVector> = factors.iter().map(|(v, _)| v.clone()).collect();
        let cone = Cone::from_generators(ambient, &gens, &[]);
        if !cone.is_pointed() {
            return Err(TropError::NotPointed);
        }
        Ok(RationalGenFun { prefactor, factors, ambient })
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient
    }

    pub fn support_cone(&self) -> Cone {
        let gens: Vec<LatticeVector> = self.factors.iter().map(|(v, _)| v.clone()).collect();
        Cone::from_generators(self.ambient, &gens, &[])
    }
}

/// Truncated power-series expansion by iterated convolution of truncated
/// geometric series. The grading must be >= 1 on every factor vector.
pub fn expand(
    g: &RationalGenFun,
    grading: &LatticeVector,
    bound: i64,
) -> Result<ConeSeries, TropError> {
    for (v, _) in &g.factors {
        if dot(grading, v) < Int::one() {
            return Err(TropError::GradingMismatch);
        }
    }
    let cone = g.support_cone();
    let mut series: BTreeMap<LatticeVector, MotivicElement> = BTreeMap::new();
    series.insert(vec![Int::zero(); g.ambient], g.prefactor.clone());
    let b = Int::from(bound);
    for (v, m) in &g.factors {
        let step = dot(grading, v);
        let mut next: BTreeMap<LatticeVector, MotivicElement> = BTreeMap::new();
        for (w, c) in &series {
            let base = dot(grading, w);
            let mut n: i64 = 1;
            loop {
                let grade = &base + &step * Int::from(n);
                if grade > b {
                    break;
                }
                let key: LatticeVector = w
                    .iter()
                    .zip(scale_vec(&Int::from(n), v))
                    .map(|(a, b)| a + b)
                    .collect();
                let term = c.shift_l(-n * (*m as i64 + 1));
                let entry = next.entry(key).or_insert_with(MotivicElement::zero);
                *entry += term;
                n += 1;
            }
        }
        next.retain(|_, v| !v.is_zero());
        series = next;
    }
    let mut out = ConeSeries::new(cone, grading.clone(), bound);
    for (w, c) in series {
        out.add_coeff(w, c);
    }
    Ok(out)
}

/// Truncation-level decay check: degrees must fall at least linearly in the
/// grade, with slope 1/c for the supplied per-step grade constant c and
/// baseline `degree_max` (the degree of the generating data at grade 0).
pub fn coefficient_decay_check(
    s: &ConeSeries,
    table: &SymbolTable,
    degree_max: i64,
    c: i64,
) -> bool {
    assert!(c >= 1);
    for (w, coeff) in s.coeffs() {
        let grade = dot(&s.grading, w);
        let steps = (&grade / Int::from(c))
            .try_into()
            .unwrap_or(i64::MAX);
        if let Some(d) = coeff.degree(table) {
            if d > degree_max - steps {
                return false;
            }
        }
    }
    true
}

/// Coefficients of the one-variable zeta series, by s-exponent.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ZetaSeries {
    pub coeffs: Vec<MotivicElement>,
}

impl ZetaSeries {
    pub fn coeff(&self, l: usize) -> MotivicElement {
        self.coeffs.get(l).cloned().unwrap_or_else(MotivicElement::zero)
    }
}

/// Regroup a cone series by the chosen coordinate: coeffs[l] sums the
/// coefficients of all keys with w[axis] = l.
pub fn specialize_zeta(s: &ConeSeries, axis: usize) -> Result<ZetaSeries, TropError> {
    let mut buckets: BTreeMap<i64, MotivicElement> = BTreeMap::new();
    let mut lmax: i64 = 0;
    for (w, c) in s.coeffs() {
        let a = &w[axis];
        if a.is_negative() {
            return Err(TropError::NegativeAxisExponent);
        }
        let l: i64 = a.try_into().map_err(|_| TropError::NegativeAxisExponent)?;
        lmax = lmax.max(l);
        let entry = buckets.entry(l).or_insert_with(MotivicElement::zero);
        *entry += c.clone();
    }
    let coeffs = (0..=lmax)
        .map(|l| buckets.remove(&l).unwrap_or_else(MotivicElement::zero))
        .collect();
    Ok(ZetaSeries { coeffs })
}

/// Candidate poles read off the specialized denominators: (b, a) stands for
/// 1 - L^{-a} s^b for each factor with v[axis] = b > 0.
pub fn candidate_poles(g: &RationalGenFun, axis: usize) -> Vec<(i64, i64)> {
    let mut out: Vec<(i64, i64)> = Vec::new();
    for (v, m) in &g.factors {
        let b: i64 = match (&v[axis]).try_into() {
            Ok(b) => b,
            Err(_) => continue,
        };
        if b <= 0 {
            continue;
        }
        let pair = (b, *m as i64 + 1);
        if !out.contains(&pair) {
            out.push(pair);
        }
    }
    out.sort();
    out
}
