//! Rational polyhedral cones with exact V- and H-descriptions.
//!
//! Conversion between descriptions is the incremental double description
//! method over arbitrary-precision integers; adjacency of rays is decided by
//! the algebraic rank test, so no floating point or heuristics anywhere.

use std::collections::BTreeSet;

use crate::error::TropError;
use crate::lattice::{
    comb_vec, dot, hermite_normal_form, is_zero_vec, neg_vec, primitive, rank_bareiss, vec_from_i64,
    Int, LatticeMap, LatticeVector,
};
use num_traits::{Signed, Zero};

#[derive(Clone, Copy, PartialEq, Eq)]
enum ConstraintKind {
    Inequality,
    Equality,
}

struct DdRay {
    vec: LatticeVector,
    tight: BTreeSet<usize>,
}

/// Extreme rays and lineality of {x : a.x >= 0 for a in ineqs, b.x = 0 for b in eqs}.
fn double_description(
    ambient: usize,
    ineqs: &[LatticeVector],
    eqs: &[LatticeVector],
) -> (Vec<LatticeVector>, Vec<LatticeVector>) {
    let mut constraints: Vec<(LatticeVector, ConstraintKind)> = Vec::new();
    for e in eqs {
        if !is_zero_vec(e) {
            constraints.push((e.clone(), ConstraintKind::Equality));
        }
    }
    for a in ineqs {
        if !is_zero_vec(a) {
            constraints.push((a.clone(), ConstraintKind::Inequality));
        }
    }

    let mut lineality: Vec<LatticeVector> = (0..ambient)
        .map(|i| {
            let mut v = vec![Int::zero(); ambient];
            v[i] = Int::from(1);
            v
        })
        .collect();
    let mut rays: Vec<DdRay> = Vec::new();

    for (idx, (a, kind)) in constraints.iter().enumerate() {
        // If the lineality space is not contained in the hyperplane, shrink it.
        let hit = lineality.iter().position(|l| !dot(a, l).is_zero());
        if let Some(pos) = hit {
            let mut l = lineality.remove(pos);
            if dot(a, &l).is_negative() {
                l = neg_vec(&l);
            }
            let al = dot(a, &l);
            for other in lineality.iter_mut() {
                let ao = dot(a, other);
                if !ao.is_zero() {
                    *other = primitive(&comb_vec(&al, other, &-ao, &l));
                }
            }
            for r in rays.iter_mut() {
                let ar = dot(a, &r.vec);
                if !ar.is_zero() {
                    r.vec = primitive(&comb_vec(&al, &r.vec, &-ar, &l));
                }
                // every surviving ray now lies on the hyperplane
                r.tight.insert(idx);
            }
            if *kind == ConstraintKind::Inequality {
                let tight: BTreeSet<usize> = (0..idx).collect();
                rays.push(DdRay { vec: primitive(&l), tight });
            }
            continue;
        }

        let mut pos: Vec<DdRay> = Vec::new();
        let mut zero: Vec<DdRay> = Vec::new();
        let mut neg: Vec<DdRay> = Vec::new();
        for r in rays.drain(..) {
            let ar = dot(a, &r.vec);
            if ar.is_zero() {
                let mut r = r;
                r.tight.insert(idx);
                zero.push(r);
            } else if ar.is_positive() {
                pos.push(r);
            } else {
                neg.push(r);
            }
        }
        let lin_dim = lineality.len();
        let mut new_rays: Vec<DdRay> = Vec::new();
        for p in &pos {
            for n in &neg {
                if !dd_adjacent(ambient, lin_dim, &constraints, p, n) {
                    continue;
                }
                let ap = dot(a, &p.vec);
                let an = dot(a, &n.vec);
                let v = primitive(&comb_vec(&ap, &n.vec, &-an.clone(), &p.vec));
                let mut tight: BTreeSet<usize> =
                    p.tight.intersection(&n.tight).cloned().collect();
                tight.insert(idx);
                new_rays.push(DdRay { vec: v, tight });
            }
        }
        rays = zero;
        if *kind == ConstraintKind::Inequality {
            rays.extend(pos);
        }
        rays.extend(new_rays);
        // deduplicate
        rays.sort_by(|x, y| x.vec.cmp(&y.vec));
        rays.dedup_by(|x, y| {
            if x.vec == y.vec {
                let merged: BTreeSet<usize> = y.tight.union(&x.tight).cloned().collect();
                y.tight = merged;
                true
            } else {
                false
            }
        });
    }

    let ray_vecs = rays.into_iter().map(|r| r.vec).filter(|v| !is_zero_vec(v)).collect();
    (ray_vecs, lineality)
}

/// Rank test: the minimal face containing both rays has dimension lin_dim + 2.
fn dd_adjacent(
    ambient: usize,
    lin_dim: usize,
    constraints: &[(LatticeVector, ConstraintKind)],
    p: &DdRay,
    n: &DdRay,
) -> bool {
    let common: Vec<LatticeVector> = p
        .tight
        .intersection(&n.tight)
        .map(|&i| constraints[i].0.clone())
        .collect();
    if common.is_empty() {
        return ambient == lin_dim + 2;
    }
    let rank = rank_bareiss(&LatticeMap::from_rows(common));
    ambient == rank + lin_dim + 2
}

/// A rational polyhedral cone in a fixed lattice, stored with both
/// descriptions. Rays and facet normals are primitive; the lineality and
/// equation bases are in a canonical Hermite form, so structural equality of
/// two `Cone`s is equality of the point sets.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Cone {
    ambient: usize,
    rays: Vec<LatticeVector>,
    lineality: Vec<LatticeVector>,
    facets: Vec<LatticeVector>,
    equations: Vec<LatticeVector>,
    dim: usize,
}

impl std::fmt::Debug for Cone {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Cone(rank {}, rays {:?}", self.ambient, self.rays)?;
        if !self.lineality.is_empty() {
            write!(f, ", lineality {:?}", self.lineality)?;
        }
        write!(f, ")")
    }
}

fn canonical_basis(vecs: &[LatticeVector], ambient: usize) -> Vec<LatticeVector> {
    if vecs.is_empty() {
        return Vec::new();
    }
    let m = LatticeMap::from_cols(ambient, vecs.to_vec());
    let (h, _) = hermite_normal_form(&m);
    let mut out = Vec::new();
    for j in 0..h.ncols() {
        let c = h.col(j);
        if !is_zero_vec(&c) {
            out.push(primitive(&c));
        }
    }
    out.sort();
    out
}

impl Cone {
    fn assemble(
        ambient: usize,
        rays: Vec<LatticeVector>,
        lineality: Vec<LatticeVector>,
        facets: Vec<LatticeVector>,
        equations: Vec<LatticeVector>,
    ) -> Cone {
        let mut rays: Vec<LatticeVector> = rays.into_iter().map(|r| primitive(&r)).collect();
        rays.sort();
        rays.dedup();
        let lineality = canonical_basis(&lineality, ambient);
        let mut facets: Vec<LatticeVector> = facets.into_iter().map(|r| primitive(&r)).collect();
        facets.sort();
        facets.dedup();
        let equations = canonical_basis(&equations, ambient);
        let dim = if rays.is_empty() && lineality.is_empty() {
            0
        } else {
            let mut gens = rays.clone();
            gens.extend(lineality.iter().cloned());
            for l in &lineality {
                gens.push(neg_vec(l));
            }
            rank_bareiss(&LatticeMap::from_cols(ambient, gens))
        };
        Cone { ambient, rays, lineality, facets, equations, dim }
    }

    /// Cone generated by `gens` (nonnegative span) plus `lin` (linear span).
    /// Generators may be redundant; the stored rays are the extreme ones.
    pub fn from_generators(ambient: usize, gens: &[LatticeVector], lin: &[LatticeVector]) -> Cone {
        for g in gens.iter().chain(lin) {
            assert_eq!(g.len(), ambient, "generator rank mismatch");
        }
        // H-description of the dual: dual extreme rays are our facet normals.
        let (facets, dual_lin) = double_description(ambient, gens, lin);
        // equations of the cone = lineality of the dual's dual side:
        // u orthogonal to the span of the cone.
        let equations = orthogonal_complement_basis(ambient, gens, lin);
        let _ = dual_lin;
        // canonical extreme rays from the H-description
        let (rays, lineality) = double_description(ambient, &facets, &equations);
        Cone::assemble(ambient, rays, lineality, facets, equations)
    }

    pub fn from_rays_i64(ambient: usize, gens: &[&[i64]]) -> Cone {
        let g: Vec<LatticeVector> = gens.iter().map(|r| vec_from_i64(r)).collect();
        Cone::from_generators(ambient, &g, &[])
    }

    /// Cone {x : a.x >= 0 for all a in ineqs, b.x = 0 for all b in eqs}.
    pub fn from_halfspaces(
        ambient: usize,
        ineqs: &[LatticeVector],
        eqs: &[LatticeVector],
    ) -> Cone {
        let (rays, lineality) = double_description(ambient, ineqs, eqs);
        Cone::from_generators(
            ambient,
            &rays,
            &lineality,
        )
    }

    pub fn zero(ambient: usize) -> Cone {
        Cone::from_generators(ambient, &[], &[])
    }

    pub fn full_space(ambient: usize) -> Cone {
        let lin: Vec<LatticeVector> = LatticeMap::identity(ambient).columns();
        Cone::from_generators(ambient, &[], &lin)
    }

    pub fn orthant(ambient: usize) -> Cone {
        let gens: Vec<LatticeVector> = LatticeMap::identity(ambient).columns();
        Cone::from_generators(ambient, &gens, &[])
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient
    }

    pub fn rays(&self) -> &[LatticeVector] {
        &self.rays
    }

    pub fn lineality(&self) -> &[LatticeVector] {
        &self.lineality
    }

    pub fn facets(&self) -> &[LatticeVector] {
        &self.facets
    }

    pub fn equations(&self) -> &[LatticeVector] {
        &self.equations
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_pointed(&self) -> bool {
        self.lineality.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.dim == 0
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.dim == self.ambient
    }

    /// All generators: rays plus +/- lineality basis.
    pub fn generators(&self) -> Vec<LatticeVector> {
        let mut g = self.rays.clone();
        for l in &self.lineality {
            g.push(l.clone());
            g.push(neg_vec(l));
        }
        g
    }

    pub fn contains_point(&self, v: &[Int]) -> bool {
        self.equations.iter().all(|e| dot(e, v).is_zero())
            && self.facets.iter().all(|f| !dot(f, v).is_negative())
    }

    pub fn contains(&self, other: &Cone) -> bool {
        other.generators().iter().all(|g| self.contains_point(g))
    }

    pub fn same_set(&self, other: &Cone) -> bool {
        self.contains(other) && other.contains(self)
    }

    /// An integer point in the relative interior (0 for the zero cone).
    pub fn relint_point(&self) -> LatticeVector {
        let mut p = vec![Int::zero(); self.ambient];
        for r in &self.rays {
            p = comb_vec(&Int::from(1), &p, &Int::from(1), r);
        }
        p
    }

    pub fn dual(&self) -> Cone {
        Cone {
            ambient: self.ambient,
            rays: self.facets.clone(),
            lineality: self.equations.clone(),
            facets: self.rays.clone(),
            equations: self.lineality.clone(),
            dim: 0,
        }
        .recompute_dim()
    }

    fn recompute_dim(mut self) -> Cone {
        self.dim = if self.rays.is_empty() && self.lineality.is_empty() {
            0
        } else {
            rank_bareiss(&LatticeMap::from_cols(self.ambient, self.generators()))
        };
        self
    }

    pub fn intersect(&self, other: &Cone) -> Cone {
        assert_eq!(self.ambient, other.ambient);
        let mut ineqs = self.facets.clone();
        ineqs.extend(other.facets.iter().cloned());
        let mut eqs = self.equations.clone();
        eqs.extend(other.equations.iter().cloned());
        Cone::from_halfspaces(self.ambient, &ineqs, &eqs)
    }

    /// The face of this cone cut out by turning `normals` into equations.
    /// The normals must be valid on the cone.
    pub fn face_by(&self, normals: &[LatticeVector]) -> Cone {
        let mut eqs = self.equations.clone();
        eqs.extend(normals.iter().cloned());
        Cone::from_halfspaces(self.ambient, &self.facets, &eqs)
    }

    /// All faces, including the cone itself and its minimal face.
    pub fn faces(&self) -> Vec<Cone> {
        let mut out: Vec<Cone> = vec![self.clone()];
        let mut frontier: Vec<Cone> = vec![self.clone()];
        while let Some(c) = frontier.pop() {
            for f in &self.facets {
                if c.generators().iter().all(|g| dot(f, g).is_zero()) {
                    continue; // already tight on this face
                }
                let sub = c.face_by(std::slice::from_ref(f));
                if !out.iter().any(|x| x.same_set(&sub)) {
                    out.push(sub.clone());
                    frontier.push(sub);
                }
            }
        }
        out
    }

    /// The smallest face of this cone containing `other` (other must be inside).
    pub fn minimal_face_containing(&self, other: &Cone) -> Cone {
        let tight: Vec<LatticeVector> = self
            .facets
            .iter()
            .filter(|f| other.generators().iter().all(|g| dot(f, g).is_zero()))
            .cloned()
            .collect();
        self.face_by(&tight)
    }
}

/// Basis of the orthogonal complement of the span of the given generators.
fn orthogonal_complement_basis(
    ambient: usize,
    gens: &[LatticeVector],
    lin: &[LatticeVector],
) -> Vec<LatticeVector> {
    let mut all: Vec<LatticeVector> = gens.to_vec();
    all.extend(lin.iter().cloned());
    if all.is_empty() {
        return LatticeMap::identity(ambient).columns();
    }
    let m = LatticeMap::from_rows(all);
    crate::lattice::kernel_basis(&m)
}

/// true iff nu = gamma ∩ u^⊥ for some u valid on gamma; checked by
/// intersecting gamma with the facets containing nu.
pub fn is_face(nu: &Cone, gamma: &Cone) -> Result<bool, TropError> {
    if !gamma.contains(nu) {
        return Err(TropError::NotContained);
    }
    let minimal = gamma.minimal_face_containing(nu);
    Ok(minimal.same_set(nu))
}

/// true iff p equals the coordinate face R^J_{>=0} for some subset J.
pub fn is_face_of_orthant(p: &Cone) -> Result<bool, TropError> {
    let n = p.ambient_rank();
    let orthant = Cone::orthant(n);
    if !orthant.contains(p) {
        return Err(TropError::NotInOrthant);
    }
    let mut support: BTreeSet<usize> = BTreeSet::new();
    for r in p.rays() {
        for (i, x) in r.iter().enumerate() {
            if !x.is_zero() {
                support.insert(i);
            }
        }
    }
    for &i in &support {
        let mut e = vec![Int::zero(); n];
        e[i] = Int::from(1);
        if !p.contains_point(&e) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// {n >= 0 : phi(n) in sigma} as a cone in the domain of phi.
pub fn preimage_cone(phi: &LatticeMap, sigma: &Cone) -> Cone {
    assert_eq!(
        phi.codomain_rank(),
        sigma.ambient_rank(),
        "codomain/ambient rank mismatch"
    );
    let m = phi.domain_rank();
    let mut ineqs: Vec<LatticeVector> = LatticeMap::identity(m).columns();
    for f in sigma.facets() {
        // (f^T phi) n >= 0
        ineqs.push(phi.transpose().apply(f));
    }
    let eqs: Vec<LatticeVector> = sigma
        .equations()
        .iter()
        .map(|e| phi.transpose().apply(e))
        .collect();
    Cone::from_halfspaces(m, &ineqs, &eqs)
}

/// Full linear preimage {x : phi(x) in sigma}, possibly non-pointed.
pub fn linear_preimage_cone(phi: &LatticeMap, sigma: &Cone) -> Cone {
    assert_eq!(phi.codomain_rank(), sigma.ambient_rank());
    let m = phi.domain_rank();
    let ineqs: Vec<LatticeVector> = sigma
        .facets()
        .iter()
        .map(|f| phi.transpose().apply(f))
        .collect();
    let eqs: Vec<LatticeVector> = sigma
        .equations()
        .iter()
        .map(|e| phi.transpose().apply(e))
        .collect();
    Cone::from_halfspaces(m, &ineqs, &eqs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthant_self_dual() {
        let c = Cone::orthant(2);
        assert!(c.dual().same_set(&c));
    }

    #[test]
    fn zero_cone_dual_is_everything() {
        let c = Cone::zero(2);
        let d = c.dual();
        assert_eq!(d.dim(), 2);
        assert_eq!(d.lineality().len(), 2);
    }

    #[test]
    fn dual_by_fourier_motzkin_oracle() {
        // pos((1,0),(1,2)) has dual pos((0,1),(2,-1))
        let c = Cone::from_rays_i64(2, &[&[1, 0], &[1, 2]]);
        let d = c.dual();
        let expect = Cone::from_rays_i64(2, &[&[0, 1], &[2, -1]]);
        assert!(d.same_set(&expect));
    }

    #[test]
    fn double_dual_is_identity() {
        let c = Cone::from_rays_i64(3, &[&[1, 0, 0], &[1, 2, 0], &[0, 0, 1]]);
        assert!(c.dual().dual().same_set(&c));
    }

    #[test]
    fn non_extreme_generators_are_dropped() {
        let c = Cone::from_rays_i64(2, &[&[1, 0], &[1, 1], &[0, 1]]);
        assert_eq!(c.rays().len(), 2);
        assert!(c.contains_point(&vec_from_i64(&[1, 1])));
    }

    #[test]
    fn face_tests() {
        let orthant = Cone::orthant(2);
        let e1 = Cone::from_rays_i64(2, &[&[1, 0]]);
        let diag = Cone::from_rays_i64(2, &[&[1, 1]]);
        assert!(is_face(&e1, &orthant).unwrap());
        assert!(!is_face(&diag, &orthant).unwrap());
        let outside = Cone::from_rays_i64(2, &[&[-1, 0]]);
        assert!(matches!(
            is_face(&outside, &orthant),
            Err(TropError::NotContained)
        ));
    }

    #[test]
    fn face_in_rank_three() {
        let gamma = Cone::from_rays_i64(3, &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        let nu = Cone::from_rays_i64(3, &[&[1, 0, 0], &[0, 1, 0]]);
        assert!(is_face(&nu, &gamma).unwrap());
    }

    #[test]
    fn zero_is_face_of_pointed() {
        let gamma = Cone::from_rays_i64(2, &[&[1, 0], &[1, 2]]);
        let nu = Cone::zero(2);
        assert!(is_face(&nu, &gamma).unwrap());
    }

    #[test]
    fn faces_of_orthant_count() {
        let c = Cone::orthant(3);
        assert_eq!(c.faces().len(), 8);
    }

    #[test]
    fn orthant_face_predicate() {
        assert!(is_face_of_orthant(&Cone::orthant(2)).unwrap());
        assert!(is_face_of_orthant(&Cone::zero(2)).unwrap());
        let diag = Cone::from_rays_i64(2, &[&[1, 1]]);
        assert!(!is_face_of_orthant(&diag).unwrap());
        let neg = Cone::from_rays_i64(2, &[&[-1, 0]]);
        assert!(matches!(
            is_face_of_orthant(&neg),
            Err(TropError::NotInOrthant)
        ));
    }

    #[test]
    fn preimage_examples() {
        let id = LatticeMap::identity(2);
        let orthant = Cone::orthant(2);
        assert!(preimage_cone(&id, &orthant).same_set(&orthant));

        // both basis vectors to 1, sigma = {0}: strict positivity forces 0
        let phi = LatticeMap::from_i64(&[&[1, 1]]);
        let zero = Cone::zero(1);
        assert!(preimage_cone(&phi, &zero).same_set(&Cone::zero(2)));

        // e1 -> (1,0), e2 -> (1,2), sigma = pos((1,1)): preimage is pos((1,1))
        let phi = LatticeMap::from_i64(&[&[1, 1], &[0, 2]]);
        let sigma = Cone::from_rays_i64(2, &[&[1, 1]]);
        let pre = preimage_cone(&phi, &sigma);
        assert!(pre.same_set(&Cone::from_rays_i64(2, &[&[1, 1]])));
    }

    #[test]
    fn intersection_and_lineality() {
        let line = Cone::from_generators(
            2,
            &[],
            &[vec_from_i64(&[1, 1])],
        );
        assert!(!line.is_pointed());
        let orthant = Cone::orthant(2);
        let c = line.intersect(&orthant);
        assert!(c.same_set(&Cone::from_rays_i64(2, &[&[1, 1]])));
    }

    #[test]
    fn minimal_face() {
        let gamma = Cone::orthant(3);
        let inner = Cone::from_rays_i64(3, &[&[1, 1, 0]]);
        let mf = gamma.minimal_face_containing(&inner);
        assert!(mf.same_set(&Cone::from_rays_i64(3, &[&[1, 0, 0], &[0, 1, 0]])));
    }
}
