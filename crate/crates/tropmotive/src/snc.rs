//! Combinatorial records of SNC compactifications: divisor data, nerve,
//! stratum classes, the per-face orthant maps, properness, and the
//! unimodular-envelope decomposition.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};

use crate::cone::Cone;
use crate::error::TropError;
use crate::fan::Fan;
use crate::lattice::{
    complete_to_basis, dot, is_zero_vec, primitive, rank, saturate_image, solve_integral, Int,
    LatticeMap, LatticeVector,
};
use crate::motivic::MotivicElement;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Divisor {
    pub name: String,
    pub val: LatticeVector,
    pub m: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stratum {
    pub class: MotivicElement,
    pub dim: i64,
    /// Overrides the S ⊆ c_delta test for whether the stratum meets the
    /// selected open part; None means "decide from the divisor vals".
    pub meets_xdelta: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SncModel {
    pub target_rank: usize,
    pub x_dim: i64,
    pub divisors: Vec<Divisor>,
    /// Closed under subsets, contains the empty face.
    pub nerve: BTreeSet<BTreeSet<String>>,
    pub strata: BTreeMap<BTreeSet<String>, Stratum>,
    pub ambient_fan: Fan,
}

/// The orthant map of a nerve face: column D is val_D, in the order of `s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhiS {
    pub s: Vec<String>,
    pub map: LatticeMap,
    pub m_vector: Vec<u32>,
}

impl SncModel {
    pub fn divisor(&self, name: &str) -> Option<&Divisor> {
        self.divisors.iter().find(|d| d.name == name)
    }

    /// Close a set of maximal nerve faces under subsets.
    pub fn close_nerve(maximal: &[BTreeSet<String>]) -> BTreeSet<BTreeSet<String>> {
        let mut out: BTreeSet<BTreeSet<String>> = BTreeSet::new();
        out.insert(BTreeSet::new());
        for face in maximal {
            let names: Vec<&String> = face.iter().collect();
            for mask in 0..(1u32 << names.len()) {
                let sub: BTreeSet<String> = names
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, n)| (*n).clone())
                    .collect();
                out.insert(sub);
            }
        }
        out
    }

    pub fn phi_s(&self, s: &BTreeSet<String>) -> PhiS {
        let names: Vec<String> = s.iter().cloned().collect();
        let cols: Vec<LatticeVector> = names
            .iter()
            .map(|n| self.divisor(n).expect("divisor named in nerve").val.clone())
            .collect();
        let ms = names
            .iter()
            .map(|n| self.divisor(n).expect("divisor named in nerve").m)
            .collect();
        PhiS {
            s: names,
            map: LatticeMap::from_cols(self.target_rank, cols),
            m_vector: ms,
        }
    }

    /// Diagnostics for every violated model invariant; empty means valid.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.nerve.contains(&BTreeSet::new()) {
            out.push("nerve does not contain the empty face".to_string());
        }
        for face in &self.nerve {
            for name in face {
                let mut sub = face.clone();
                sub.remove(name);
                if !self.nerve.contains(&sub) {
                    out.push(format!(
                        "nerve is not closed under subsets: missing a subset of {{{}}}",
                        face.iter().cloned().collect::<Vec<_>>().join(",")
                    ));
                }
                if self.divisor(name).is_none() {
                    out.push(format!("nerve names unknown divisor {name}"));
                }
            }
        }
        let mut seen = BTreeSet::new();
        for d in &self.divisors {
            if !seen.insert(&d.name) {
                out.push(format!("duplicate divisor name {}", d.name));
            }
            if d.val.len() != self.target_rank {
                out.push(format!("divisor {} has val of wrong rank", d.name));
            }
        }
        for face in &self.nerve {
            if face.iter().any(|n| self.divisor(n).is_none()) {
                continue;
            }
            let phi = self.phi_s(face);
            if !is_proper_orthant_map(&phi.map) {
                out.push(format!(
                    "orthant map of face {{{}}} is not proper",
                    face.iter().cloned().collect::<Vec<_>>().join(",")
                ));
            }
        }
        for d in &self.divisors {
            if d.val.len() == self.target_rank
                && !self.ambient_fan.contains_point(&d.val)
                && d.m != 0
            {
                out.push(format!(
                    "divisor {} lies outside the fan support but has m = {}",
                    d.name, d.m
                ));
            }
        }
        out
    }

    /// Divisors whose val vector lies in the support of the ambient fan.
    pub fn c_delta(&self) -> BTreeSet<String> {
        self.divisors
            .iter()
            .filter(|d| self.ambient_fan.contains_point(&d.val))
            .map(|d| d.name.clone())
            .collect()
    }

    /// Does the stratum of this nerve face meet the selected open part?
    pub fn face_meets_xdelta(&self, face: &BTreeSet<String>) -> bool {
        if let Some(st) = self.strata.get(face) {
            if let Some(flag) = st.meets_xdelta {
                return flag;
            }
        }
        let cd = self.c_delta();
        face.iter().all(|n| cd.contains(n))
    }
}

/// Properness of the restriction of φ_ℝ to the nonnegative orthant,
/// computed by two independent routes that must agree: the kernel cone
/// {n ≥ 0, φn = 0} is trivial, and the image cone is pointed with no zero
/// column.
pub fn is_proper_orthant_map(phi: &LatticeMap) -> bool {
    let m = phi.ncols();
    // route 1: extreme rays of the kernel cone
    let mut ineqs = Vec::new();
    for i in 0..m {
        let mut e = vec![Int::zero(); m];
        e[i] = Int::one();
        ineqs.push(e);
    }
    let eqs: Vec<LatticeVector> = (0..phi.nrows()).map(|i| phi.row(i)).collect();
    let kernel_cone = Cone::from_halfspaces(m, &ineqs, &eqs);
    let by_kernel = kernel_cone.dim() == 0;

    // route 2: pointed image, no zero column
    let cols = phi.columns();
    let by_image = cols.iter().all(|c| !is_zero_vec(c))
        && Cone::from_generators(phi.nrows(), &cols, &[]).is_pointed();

    assert_eq!(by_kernel, by_image, "properness routes disagree");
    by_kernel
}

/// An integer functional u with ⟨u, φ(e_j)⟩ ≥ 1 for every column, from an
/// interior point of the dual of the image cone.
pub fn strictly_positive_grading(phi: &LatticeMap) -> Result<LatticeVector, TropError> {
    if !is_proper_orthant_map(phi) {
        return Err(TropError::NotProper);
    }
    let n = phi.nrows();
    if phi.ncols() == 0 {
        return Ok(vec![Int::zero(); n]);
    }
    let image = Cone::from_generators(n, &phi.columns(), &[]);
    let u = image.dual().relint_point();
    for c in phi.columns() {
        debug_assert!(dot(&u, &c) >= Int::one());
    }
    Ok(u)
}

/// Basis v of the saturated image lattice spanning a unimodular cone that
/// contains every column, the extension of v to a basis of the codomain, and
/// the nonnegative coordinate matrix a with φ(e_j) = Σ a_ij v_i.
pub fn unimodular_envelope(
    phi: &LatticeMap,
) -> Result<(Vec<LatticeVector>, Vec<LatticeVector>, LatticeMap), TropError> {
    if !is_proper_orthant_map(phi) {
        return Err(TropError::NotProper);
    }
    let n = phi.nrows();
    let span = saturate_image(phi);
    let k = span.len();
    if k == 0 {
        let ext = complete_to_basis(&[], n)?;
        return Ok((Vec::new(), ext, LatticeMap::zero(0, phi.ncols())));
    }
    let b = LatticeMap::from_cols(n, span.clone());
    // columns in span coordinates; the image cone there is pointed and
    // full-dimensional
    let ys: Vec<LatticeVector> = phi
        .columns()
        .iter()
        .map(|c| solve_integral(&b, c).expect("column lies in its own span"))
        .collect();
    // a unimodular basis of the dual lattice inside the dual cone: start
    // from an interior point, complete to a basis, and shear everything
    // into the interior along that point
    let kd = Cone::from_generators(k, &ys, &[]).dual();
    let u1 = primitive(&kd.relint_point());
    let gs = complete_to_basis(std::slice::from_ref(&u1), k)?;
    let mut us = vec![u1.clone()];
    for g in gs.iter().skip(1) {
        let deficit = ys
            .iter()
            .map(|y| -dot(g, y))
            .max()
            .unwrap_or_else(Int::zero);
        let t = if deficit.is_negative() {
            Int::zero()
        } else {
            deficit + Int::one()
        };
        us.push(
            g.iter()
                .zip(&u1)
                .map(|(gi, ui)| gi + &t * ui)
                .collect(),
        );
    }
    // w = dual basis of us; its cone contains the image cone
    let umat = LatticeMap::from_rows(us.clone());
    let ws: Vec<LatticeVector> = (0..k)
        .map(|i| {
            let mut e = vec![Int::zero(); k];
            e[i] = Int::one();
            solve_integral(&umat, &e).expect("unimodular matrix is invertible over the integers")
        })
        .collect();
    let basis_v: Vec<LatticeVector> = ws.iter().map(|w| b.apply(w)).collect();
    let full = complete_to_basis(&basis_v, n)?;
    let basis_ext = full[k..].to_vec();
    let mut a = LatticeMap::zero(k, phi.ncols());
    for (j, y) in ys.iter().enumerate() {
        for (i, u) in us.iter().enumerate() {
            let v = dot(u, y);
            debug_assert!(!v.is_negative());
            a.set(i, j, v);
        }
    }
    debug_assert_eq!(rank(&a), k);
    Ok((basis_v, basis_ext, a))
}
