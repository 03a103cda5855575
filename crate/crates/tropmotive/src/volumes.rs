//! Fiber enumeration over the orthant maps, assembly of the per-point
//! volume formula, the full generating function, and the zeta pipeline.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::TropError;
use crate::lattice::{dot, is_zero_vec, Int, LatticeMap, LatticeVector};
use crate::motivic::{
    candidate_poles, expand, specialize_zeta, MotivicElement, RationalGenFun, ZetaSeries,
};
use crate::snc::{is_proper_orthant_map, strictly_positive_grading, PhiS, SncModel};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VolumeReport {
    pub w: LatticeVector,
    pub value: MotivicElement,
    /// (nerve face, F_S(w), stratum class used).
    pub contributions: Vec<(BTreeSet<String>, MotivicElement, MotivicElement)>,
}

/// All strictly positive integer vectors n with φ(n) = w, complete and
/// duplicate-free. Per-coordinate bounds come from a strictly positive
/// grading; partial sums prune the recursion.
pub fn fiber_points(phi: &PhiS, w: &[Int]) -> Result<Vec<LatticeVector>, TropError> {
    if !is_proper_orthant_map(&phi.map) {
        return Err(TropError::NotProper);
    }
    let m = phi.map.ncols();
    if m == 0 {
        return Ok(if is_zero_vec(w) { vec![Vec::new()] } else { Vec::new() });
    }
    let u = strictly_positive_grading(&phi.map)?;
    let total = dot(&u, w);
    if total < Int::from(m) {
        return Ok(Vec::new()); // each coordinate contributes grade >= 1
    }
    let cols: Vec<LatticeVector> = phi.map.columns();
    let grades: Vec<Int> = cols.iter().map(|c| dot(&u, c)).collect();
    let mut out = Vec::new();
    let mut n = vec![Int::one(); m];
    fn rec(
        j: usize,
        rem: &LatticeVector,
        rem_grade: &Int,
        cols: &[LatticeVector],
        grades: &[Int],
        n: &mut Vec<Int>,
        out: &mut Vec<LatticeVector>,
    ) {
        if j == cols.len() {
            if is_zero_vec(rem) {
                out.push(n.clone());
            }
            return;
        }
        // grade still needed by the remaining coordinates, one unit each
        let tail: Int = grades[j + 1..].iter().sum();
        let mut k = Int::one();
        loop {
            let used = &k * &grades[j];
            if &used + &tail > *rem_grade {
                break;
            }
            let next_rem: LatticeVector = rem
                .iter()
                .zip(&cols[j])
                .map(|(r, c)| r - &k * c)
                .collect();
            let next_grade = rem_grade - &used;
            n[j] = k.clone();
            rec(j + 1, &next_rem, &next_grade, cols, grades, n, out);
            k += Int::one();
        }
    }
    rec(0, &w.to_vec(), &total, &cols, &grades, &mut n, &mut out);
    out.sort();
    out.dedup();
    Ok(out)
}

/// F_S(w): the finite fiber sum of L^{-Σ n_D (m_D + 1)}.
pub fn f_coefficient(phi: &PhiS, w: &[Int]) -> Result<MotivicElement, TropError> {
    let fibers = fiber_points(phi, w)?;
    let mut out = MotivicElement::zero();
    for n in fibers {
        let mut e: Int = Int::zero();
        for (nd, m) in n.iter().zip(&phi.m_vector) {
            e += nd * Int::from(*m as i64 + 1);
        }
        let e: i64 = (&e).try_into().expect("truncated exponent fits i64");
        out += MotivicElement::lpow(-e);
    }
    Ok(out)
}

fn model_checked(model: &SncModel) -> Result<(), TropError> {
    let diags = model.validate();
    if !diags.is_empty() {
        return Err(TropError::ValidationFailed(diags.join("; ")));
    }
    Ok(())
}

/// Nerve faces contributing to the formula, with their strata present.
fn contributing_faces(
    model: &SncModel,
) -> Result<Vec<BTreeSet<String>>, TropError> {
    let mut faces = Vec::new();
    let mut missing = Vec::new();
    for s in &model.nerve {
        if !model.face_meets_xdelta(s) {
            continue;
        }
        if !model.strata.contains_key(s) {
            missing.push(format!(
                "{{{}}}",
                s.iter().cloned().collect::<Vec<_>>().join(",")
            ));
            continue;
        }
        faces.push(s.clone());
    }
    if !missing.is_empty() {
        return Err(TropError::MissingStratumClass(missing));
    }
    faces.sort_by_key(|s| (s.len(), s.iter().cloned().collect::<Vec<_>>()));
    Ok(faces)
}

/// The volume formula at one lattice point:
/// L^{-dim X} Σ_S (L-1)^{|S|} [Y_S] F_S(w).
pub fn volume(model: &SncModel, w: &[Int]) -> Result<VolumeReport, TropError> {
    model_checked(model)?;
    if !model.ambient_fan.contains_point(w) {
        return Ok(VolumeReport {
            w: w.to_vec(),
            value: MotivicElement::zero(),
            contributions: Vec::new(),
        });
    }
    let faces = contributing_faces(model)?;
    let mut value = MotivicElement::zero();
    let mut contributions = Vec::new();
    for s in faces {
        let phi = model.phi_s(&s);
        let f = f_coefficient(&phi, w)?;
        let class = model.strata[&s].class.clone();
        if !f.is_zero() {
            let term = MotivicElement::l_minus_one_pow(s.len())
                .try_mul(&class)?
                .try_mul(&f)?;
            value += term;
        }
        contributions.push((s, f, class));
    }
    let xd: i64 = model.x_dim;
    Ok(VolumeReport { w: w.to_vec(), value: value.shift_l(-xd), contributions })
}

/// One rational generating function per contributing nerve face, with
/// prefactor L^{-dim X} (L-1)^{|S|} [Y_S].
pub fn generating_function(
    model: &SncModel,
) -> Result<Vec<(BTreeSet<String>, RationalGenFun)>, TropError> {
    model_checked(model)?;
    let faces = contributing_faces(model)?;
    let mut out = Vec::new();
    for s in faces {
        let phi = model.phi_s(&s);
        let prefactor = MotivicElement::l_minus_one_pow(s.len())
            .try_mul(&model.strata[&s].class)?
            .shift_l(-model.x_dim);
        let factors: Vec<(LatticeVector, u32)> = phi
            .map
            .columns()
            .into_iter()
            .zip(phi.m_vector.iter().copied())
            .collect();
        out.push((s.clone(), RationalGenFun::new(model.target_rank, prefactor, factors)?));
    }
    Ok(out)
}

/// A common strictly positive grading for every factor vector appearing in
/// the contributing faces.
pub fn common_grading(
    model: &SncModel,
    gf: &[(BTreeSet<String>, RationalGenFun)],
) -> Result<LatticeVector, TropError> {
    let mut vecs: Vec<LatticeVector> = Vec::new();
    for (_, g) in gf {
        for (v, _) in &g.factors {
            if !vecs.contains(v) {
                vecs.push(v.clone());
            }
        }
    }
    vecs.sort();
    strictly_positive_grading(&LatticeMap::from_cols(model.target_rank, vecs))
}

/// Highest s-exponent whose coefficient is fully represented at grade bound
/// B: every monomial with axis exponent l has grade at least l * min(g/b).
fn complete_axis_bound(
    gf: &[(BTreeSet<String>, RationalGenFun)],
    grading: &LatticeVector,
    axis: usize,
    bound: i64,
) -> i64 {
    let mut best: Option<(Int, Int)> = None; // (g, b) minimizing g/b
    for (_, g) in gf {
        for (v, _) in &g.factors {
            let b = v[axis].clone();
            if !b.is_positive() {
                continue;
            }
            let gr = dot(grading, v);
            let smaller = match &best {
                None => true,
                Some((bg, bb)) => &gr * bb < bg * &b,
            };
            if smaller {
                best = Some((gr, b));
            }
        }
    }
    match best {
        None => bound,
        Some((g, b)) => {
            let l = (Int::from(bound) * b).div_floor(&g);
            (&l).try_into().unwrap_or(i64::MAX)
        }
    }
}

/// Expand the generating function, sum, specialize to one variable, and
/// report the candidate poles. The returned series is truncated to the
/// axis bound that the grade truncation fully covers.
pub fn zeta_pipeline(
    model: &SncModel,
    axis: usize,
    bound: i64,
) -> Result<(ZetaSeries, Vec<(i64, i64)>), TropError> {
    let gf = generating_function(model)?;
    let grading = common_grading(model, &gf)?;
    let mut total: Option<crate::motivic::ConeSeries> = None;
    for (_, g) in &gf {
        let s = expand(g, &grading, bound)?;
        total = Some(match total {
            None => s,
            Some(t) => t.try_add(&s)?,
        });
    }
    let Some(total) = total else {
        return Ok((ZetaSeries::default(), Vec::new()));
    };
    let mut zeta = specialize_zeta(&total, axis)?;
    let lmax = complete_axis_bound(&gf, &grading, axis, bound);
    let keep = usize::try_from(lmax).unwrap_or(usize::MAX).saturating_add(1);
    zeta.coeffs.truncate(keep);
    while (zeta.coeffs.len() as i64) < lmax + 1 {
        zeta.coeffs.push(MotivicElement::zero());
    }
    let mut poles: Vec<(i64, i64)> = Vec::new();
    for (_, g) in &gf {
        for p in candidate_poles(g, axis) {
            if !poles.contains(&p) {
                poles.push(p);
            }
        }
    }
    poles.sort();
    Ok((zeta, poles))
}

/// Brute-force fiber oracle over the full grid [1, cap]^S; used to validate
/// the pruned enumeration in tests.
pub fn fiber_points_grid(phi: &PhiS, w: &[Int], cap: i64) -> Vec<LatticeVector> {
    let m = phi.map.ncols();
    if m == 0 {
        return if is_zero_vec(w) { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    let mut n = vec![1i64; m];
    loop {
        let nv: LatticeVector = n.iter().map(|&x| Int::from(x)).collect();
        if phi.map.apply(&nv) == w {
            out.push(nv);
        }
        let mut j = 0;
        loop {
            n[j] += 1;
            if n[j] <= cap {
                break;
            }
            n[j] = 1;
            j += 1;
            if j == m {
                return out;
            }
        }
    }
}

pub fn int_vec(w: &[i64]) -> LatticeVector {
    w.iter().map(|&x| BigInt::from(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::vec_from_i64;
    use crate::snc::tests::fx_model;

    fn phi_two_ones() -> PhiS {
        PhiS {
            s: vec!["A".into(), "B".into()],
            map: LatticeMap::from_cols(2, vec![vec_from_i64(&[1, 1]), vec_from_i64(&[1, 1])]),
            m_vector: vec![0, 0],
        }
    }

    #[test]
    fn fiber_both_ones() {
        let phi = phi_two_ones();
        let pts = fiber_points(&phi, &vec_from_i64(&[3, 3])).unwrap();
        assert_eq!(pts, vec![vec_from_i64(&[1, 2]), vec_from_i64(&[2, 1])]);
        assert!(fiber_points(&phi, &vec_from_i64(&[1, 1])).unwrap().is_empty());
    }

    #[test]
    fn fiber_identity() {
        let phi = PhiS {
            s: vec!["A".into(), "B".into()],
            map: LatticeMap::identity(2),
            m_vector: vec![0, 0],
        };
        let pts = fiber_points(&phi, &vec_from_i64(&[2, 5])).unwrap();
        assert_eq!(pts, vec![vec_from_i64(&[2, 5])]);
    }

    #[test]
    fn fiber_matches_grid() {
        let phi = PhiS {
            s: vec!["A".into(), "B".into()],
            map: LatticeMap::from_cols(2, vec![vec_from_i64(&[1, 0]), vec_from_i64(&[1, 2])]),
            m_vector: vec![1, 0],
        };
        for w in [[4, 2], [5, 4], [3, 3], [0, 0], [7, 0]] {
            let wv = vec_from_i64(&w);
            let fast = fiber_points(&phi, &wv).unwrap();
            let slow = fiber_points_grid(&phi, &wv, 12);
            assert_eq!(fast, slow, "w = {w:?}");
        }
    }

    #[test]
    fn f_coefficient_cases() {
        let empty = PhiS { s: vec![], map: LatticeMap::zero(2, 0), m_vector: vec![] };
        assert_eq!(
            f_coefficient(&empty, &vec_from_i64(&[0, 0])).unwrap(),
            MotivicElement::one()
        );
        assert!(f_coefficient(&empty, &vec_from_i64(&[1, 0])).unwrap().is_zero());

        let single = PhiS {
            s: vec!["D0".into()],
            map: LatticeMap::from_cols(2, vec![vec_from_i64(&[1, 1])]),
            m_vector: vec![0],
        };
        for k in 1..6i64 {
            assert_eq!(
                f_coefficient(&single, &vec_from_i64(&[k, k])).unwrap(),
                MotivicElement::lpow(-k)
            );
        }
        assert_eq!(
            f_coefficient(&phi_two_ones(), &vec_from_i64(&[3, 3])).unwrap(),
            MotivicElement::lpow(-3).scale(&Int::from(2))
        );
    }

    #[test]
    fn volume_fx() {
        let model = fx_model();
        let one_minus = MotivicElement::one() - MotivicElement::lpow(-1);
        assert_eq!(volume(&model, &vec_from_i64(&[0, 0])).unwrap().value, one_minus);
        for k in 1..6i64 {
            let expect = MotivicElement::l_minus_one()
                .try_mul(&MotivicElement::lpow(-1 - k))
                .unwrap();
            assert_eq!(
                volume(&model, &vec_from_i64(&[k, k])).unwrap().value,
                expect,
                "k = {k}"
            );
        }
        assert!(volume(&model, &vec_from_i64(&[1, 2])).unwrap().value.is_zero());
        assert!(volume(&model, &vec_from_i64(&[-1, 3])).unwrap().value.is_zero());
    }

    #[test]
    fn genfun_fx() {
        let model = fx_model();
        let gf = generating_function(&model).unwrap();
        assert_eq!(gf.len(), 2);
        assert!(gf[0].0.is_empty());
        assert_eq!(gf[1].1.factors, vec![(vec_from_i64(&[1, 1]), 0)]);
    }

    #[test]
    fn zeta_fx() {
        let model = fx_model();
        let (z, poles) = zeta_pipeline(&model, 1, 20).unwrap();
        assert_eq!(poles, vec![(1, 1)]);
        let one_minus = MotivicElement::one() - MotivicElement::lpow(-1);
        for l in 0..=10i64 {
            let expect = one_minus.try_mul(&MotivicElement::lpow(-l)).unwrap();
            assert_eq!(z.coeff(l as usize), expect, "l = {l}");
        }
    }

    #[test]
    fn model_without_dinf_matches() {
        let mut model = fx_model();
        model.divisors.retain(|d| d.name != "Dinf");
        model.nerve.retain(|s| !s.contains("Dinf"));
        model.strata.retain(|s, _| !s.contains("Dinf"));
        let full = fx_model();
        for w in [[0, 0], [1, 1], [3, 3], [2, 5], [-1, -1]] {
            let wv = vec_from_i64(&w);
            assert_eq!(
                volume(&model, &wv).unwrap().value,
                volume(&full, &wv).unwrap().value,
                "w = {w:?}"
            );
        }
    }
}
