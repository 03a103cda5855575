//! Property tests for the exact linear algebra, cone duality, the guarded
//! coefficient ring, and series expansion.

use std::collections::BTreeMap;

use num_bigint::BigInt as Int;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use tropmotive::cone::Cone;
use tropmotive::lattice::{
    dot, hermite_normal_form, is_column_hnf, kernel_basis, rank, saturate_image, solve_integral,
    spans_saturated, vec_from_i64, LatticeMap, LatticeVector,
};
use tropmotive::motivic::{expand, specialize_zeta, MotivicElement, RationalGenFun};
use tropmotive::snc::is_proper_orthant_map;

fn small_vec(rank: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-4i64..=4, rank)
}

fn small_matrix() -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1usize..=4, 1usize..=4)
        .prop_flat_map(|(r, c)| prop::collection::vec(small_vec(c), r))
}

fn to_map(rows: &[Vec<i64>]) -> LatticeMap {
    LatticeMap::from_rows(rows.iter().map(|r| vec_from_i64(r)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dual_is_an_involution(rank in 1usize..=5, gens in prop::collection::vec(small_vec(5), 0..5)) {
        let gens: Vec<LatticeVector> =
            gens.iter().map(|g| vec_from_i64(&g[..rank])).collect();
        let cone = Cone::from_generators(rank, &gens, &[]);
        prop_assert!(cone.dual().dual().same_set(&cone));
    }

    #[test]
    fn double_description_round_trip(rank in 1usize..=5, gens in prop::collection::vec(small_vec(5), 0..5)) {
        let gens: Vec<LatticeVector> =
            gens.iter().map(|g| vec_from_i64(&g[..rank])).collect();
        let cone = Cone::from_generators(rank, &gens, &[]);
        // rays satisfy every facet and equation
        for r in cone.rays() {
            for f in cone.facets() {
                prop_assert!(dot(f, r) >= Int::zero());
            }
            for e in cone.equations() {
                prop_assert!(dot(e, r).is_zero());
            }
        }
        // the facet description regenerates the same set
        let back = Cone::from_halfspaces(rank, cone.facets(), cone.equations());
        prop_assert!(back.same_set(&cone));
        // every generator lies in the cone
        for g in &gens {
            prop_assert!(cone.contains_point(g));
        }
    }

    #[test]
    fn hnf_shape_and_factorization(rows in small_matrix()) {
        let m = to_map(&rows);
        let (h, u) = hermite_normal_form(&m);
        prop_assert!(is_column_hnf(&h));
        prop_assert_eq!(tropmotive::lattice::det(&u).abs(), Int::one());
        prop_assert_eq!(m.compose(&u), h);
    }

    #[test]
    fn saturation_spans_and_contains(rows in small_matrix()) {
        let m = to_map(&rows);
        let sat = saturate_image(&m);
        prop_assert_eq!(sat.len(), rank(&m));
        prop_assert!(spans_saturated(&sat, m.nrows()));
        // every original column is an integer combination of the basis
        let b = LatticeMap::from_cols(m.nrows(), sat);
        for j in 0..m.ncols() {
            prop_assert!(solve_integral(&b, &m.col(j)).is_some());
        }
    }

    #[test]
    fn kernel_annihilates(rows in small_matrix()) {
        let m = to_map(&rows);
        let ker = kernel_basis(&m);
        prop_assert_eq!(ker.len(), m.ncols() - rank(&m));
        for k in &ker {
            prop_assert!(m.apply(k).iter().all(|x| x.is_zero()));
        }
        prop_assert!(spans_saturated(&ker, m.ncols()) || ker.is_empty() || m.ncols() == 0);
    }

    #[test]
    fn snf_factorization(rows in (1usize..=5, 1usize..=5)
        .prop_flat_map(|(r, c)| prop::collection::vec(prop::collection::vec(-200i64..=200, c), r)))
    {
        let m = to_map(&rows);
        let snf = tropmotive::lattice::smith_normal_form(&m);
        // s = u m v with unimodular transforms and their stored inverses
        prop_assert_eq!(snf.u.compose(&m).compose(&snf.v), snf.s.clone());
        prop_assert_eq!(snf.u.compose(&snf.u_inv), LatticeMap::identity(m.nrows()));
        prop_assert_eq!(snf.v.compose(&snf.v_inv), LatticeMap::identity(m.ncols()));
        // diagonal with a divisibility chain
        for i in 0..snf.s.nrows() {
            for j in 0..snf.s.ncols() {
                if i != j {
                    prop_assert!(snf.s.get(i, j).is_zero());
                }
            }
        }
        let f = snf.invariant_factors();
        for w in f.windows(2) {
            prop_assert!((&w[1] % &w[0]).is_zero());
        }
        prop_assert_eq!(f.len(), rank(&m));
    }

    #[test]
    fn properness_dual_routes_agree(rows in small_matrix()) {
        // the function asserts internally that both mandated routes agree
        let _ = is_proper_orthant_map(&to_map(&rows));
    }
}

fn lpoly(terms: &[(i64, i64)]) -> MotivicElement {
    let mut out = MotivicElement::zero();
    for (c, k) in terms {
        out += MotivicElement::lpow(*k).scale(&Int::from(*c));
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ring_axioms_on_l_polynomials(
        a in prop::collection::vec((-3i64..=3, -3i64..=3), 0..4),
        b in prop::collection::vec((-3i64..=3, -3i64..=3), 0..4),
        c in prop::collection::vec((-3i64..=3, -3i64..=3), 0..4),
    ) {
        let (a, b, c) = (lpoly(&a), lpoly(&b), lpoly(&c));
        prop_assert_eq!(a.try_mul(&b).unwrap(), b.try_mul(&a).unwrap());
        prop_assert_eq!(
            a.try_mul(&b).unwrap().try_mul(&c).unwrap(),
            a.try_mul(&b.try_mul(&c).unwrap()).unwrap()
        );
        let lhs = a.try_mul(&(b.clone() + c.clone())).unwrap();
        let rhs = a.try_mul(&b).unwrap() + a.try_mul(&c).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(a.clone() + MotivicElement::zero(), a.clone());
        prop_assert_eq!(a.try_mul(&MotivicElement::one()).unwrap(), a);
    }
}

#[test]
fn l_times_l_inverse_is_one() {
    let p = MotivicElement::lpow(1).try_mul(&MotivicElement::lpow(-1)).unwrap();
    assert_eq!(p, MotivicElement::one());
}

/// Brute-force oracle: the coefficient of x^w in
/// prefactor * prod_j sum_{n_j >= 1} L^{-n_j (m_j + 1)} x^{n_j v_j}.
fn expand_oracle(
    g: &RationalGenFun,
    grading: &LatticeVector,
    bound: i64,
) -> BTreeMap<LatticeVector, MotivicElement> {
    let mut acc: BTreeMap<LatticeVector, MotivicElement> = BTreeMap::new();
    let zero = vec![Int::zero(); g.ambient_rank()];
    acc.insert(zero, g.prefactor.clone());
    let b = Int::from(bound);
    for (v, m) in &g.factors {
        let mut next: BTreeMap<LatticeVector, MotivicElement> = BTreeMap::new();
        for (w, c) in &acc {
            let mut n = 1i64;
            loop {
                let key: LatticeVector = w
                    .iter()
                    .zip(v.iter())
                    .map(|(a, x)| a + x * Int::from(n))
                    .collect();
                if dot(grading, &key) > b {
                    break;
                }
                let term = c.shift_l(-n * (*m as i64 + 1));
                *next.entry(key).or_insert_with(MotivicElement::zero) += term;
                n += 1;
            }
        }
        next.retain(|_, val| !val.is_zero());
        acc = next;
    }
    acc
}

fn genfun_inputs() -> impl Strategy<Value = (usize, Vec<(Vec<i64>, u32)>, i64)> {
    (1usize..=3, 1i64..=12).prop_flat_map(|(rank, bound)| {
        let factor = (
            prop::collection::vec(0i64..=3, rank)
                .prop_filter("nonzero", |v| v.iter().any(|&x| x != 0)),
            0u32..=2,
        );
        (Just(rank), prop::collection::vec(factor, 1..=3), Just(bound))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn expand_matches_brute_force((rank, factors, bound) in genfun_inputs()) {
        let factors: Vec<(LatticeVector, u32)> =
            factors.iter().map(|(v, m)| (vec_from_i64(v), *m)).collect();
        let g = RationalGenFun::new(rank, MotivicElement::one(), factors).unwrap();
        let grading = vec_from_i64(&vec![1; rank]);
        let series = expand(&g, &grading, bound).unwrap();
        let oracle = expand_oracle(&g, &grading, bound);
        prop_assert_eq!(series.coeffs(), &oracle);
    }

    #[test]
    fn single_factor_closed_form(v in prop::collection::vec(0i64..=3, 2).prop_filter("nonzero", |v| v.iter().any(|&x| x != 0)), m in 0u32..=2) {
        let g = RationalGenFun::new(2, MotivicElement::one(), vec![(vec_from_i64(&v), m)]).unwrap();
        let grading = vec_from_i64(&[1, 1]);
        let bound = 12;
        let series = expand(&g, &grading, bound).unwrap();
        let step: i64 = v.iter().sum();
        let nmax = bound / step;
        prop_assert_eq!(series.coeffs().len() as i64, nmax);
        for n in 1..=nmax {
            let w = vec_from_i64(&[v[0] * n, v[1] * n]);
            prop_assert_eq!(series.coeff(&w), MotivicElement::lpow(-n * (m as i64 + 1)));
        }
    }

    #[test]
    fn specialize_commutes_with_add((rank, factors, bound) in genfun_inputs(), axis in 0usize..3) {
        prop_assume!(axis < rank);
        let factors: Vec<(LatticeVector, u32)> =
            factors.iter().map(|(v, m)| (vec_from_i64(v), *m)).collect();
        prop_assume!(factors.iter().all(|(v, _)| v[axis] >= Int::zero()));
        let g1 = RationalGenFun::new(rank, MotivicElement::one(), factors.clone()).unwrap();
        let g2 = RationalGenFun::new(rank, MotivicElement::l_minus_one(), factors).unwrap();
        let grading = vec_from_i64(&vec![1; rank]);
        let s1 = expand(&g1, &grading, bound).unwrap();
        let s2 = expand(&g2, &grading, bound).unwrap();
        let sum = s1.try_add(&s2).unwrap();
        let z_sum = specialize_zeta(&sum, axis).unwrap();
        let (z1, z2) = (specialize_zeta(&s1, axis).unwrap(), specialize_zeta(&s2, axis).unwrap());
        let len = z_sum.coeffs.len().max(z1.coeffs.len()).max(z2.coeffs.len());
        for l in 0..len {
            prop_assert_eq!(z_sum.coeff(l), z1.coeff(l) + z2.coeff(l));
        }
    }
}
