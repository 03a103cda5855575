//! Fans of pointed cones in a fixed lattice: common refinement, support
//! tests, completeness, completion, and unimodular subdivision.

use std::collections::HashSet;

use num_traits::{One, Signed, Zero};

use crate::cone::Cone;
use crate::error::TropError;
use crate::lattice::{
    complete_to_basis, det, dot, is_zero_vec, neg_vec, primitive, saturate_image,
    smith_normal_form, Int, LatticeMap, LatticeVector,
};

/// A finite collection of pointed cones closed under faces, pairwise
/// intersecting in common faces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fan {
    ambient: usize,
    cones: Vec<Cone>,
}

impl Fan {
    /// Build a fan from the given cones, adding all faces and deduplicating.
    /// The fan axioms are checked exactly; invalid input is an error.
    pub fn from_cones(ambient: usize, cones: Vec<Cone>) -> Result<Fan, TropError> {
        let fan = Fan::from_cones_unchecked(ambient, cones);
        fan.check_valid()?;
        Ok(fan)
    }

    /// Face closure and deduplication without the pairwise-intersection check.
    pub fn from_cones_unchecked(ambient: usize, cones: Vec<Cone>) -> Fan {
        let mut seen: HashSet<Vec<LatticeVector>> = HashSet::new();
        let mut out: Vec<Cone> = Vec::new();
        for c in cones {
            assert_eq!(c.ambient_rank(), ambient, "ambient rank mismatch");
            assert!(c.is_pointed(), "fans consist of pointed cones");
            for f in c.faces() {
                if seen.insert(f.rays().to_vec()) {
                    out.push(f);
                }
            }
        }
        out.sort_by(|a, b| (a.dim(), a.rays()).cmp(&(b.dim(), b.rays())));
        Fan { ambient, cones: out }
    }

    pub fn empty(ambient: usize) -> Fan {
        Fan { ambient, cones: Vec::new() }
    }

    /// The fan of faces of a single cone.
    pub fn face_fan(c: &Cone) -> Fan {
        Fan::from_cones_unchecked(c.ambient_rank(), vec![c.clone()])
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient
    }

    pub fn cones(&self) -> &[Cone] {
        &self.cones
    }

    pub fn is_empty(&self) -> bool {
        self.cones.is_empty()
    }

    pub fn maximal_cones(&self) -> Vec<&Cone> {
        self.cones
            .iter()
            .filter(|c| {
                !self
                    .cones
                    .iter()
                    .any(|d| d.dim() > c.dim() && d.contains(c))
            })
            .collect()
    }

    pub fn contains_cone(&self, c: &Cone) -> bool {
        self.cones.iter().any(|d| d == c || d.same_set(c))
    }

    pub fn contains_point(&self, v: &[Int]) -> bool {
        self.cones.iter().any(|c| c.contains_point(v))
    }

    /// Exact fan axiom check: every pair of maximal cones meets in a common face.
    pub fn check_valid(&self) -> Result<(), TropError> {
        let maximal = self.maximal_cones();
        for (i, a) in maximal.iter().enumerate() {
            for b in maximal.iter().skip(i + 1) {
                let inter = a.intersect(b);
                let fa = a.minimal_face_containing(&inter);
                let fb = b.minimal_face_containing(&inter);
                if !fa.same_set(&inter) || !fb.same_set(&inter) {
                    return Err(TropError::PreconditionViolated(format!(
                        "cones {:?} and {:?} do not meet in a common face",
                        a, b
                    )));
                }
            }
        }
        Ok(())
    }

    /// Common refinement: the fan of all pairwise intersections.
    pub fn common_refinement(&self, other: &Fan) -> Fan {
        assert_eq!(self.ambient, other.ambient);
        refine_collections(self.ambient, &self.maximal_owned(), &other.maximal_owned())
    }

    fn maximal_owned(&self) -> Vec<Cone> {
        self.maximal_cones().into_iter().cloned().collect()
    }
}

/// Common refinement of two collections of (possibly non-pointed) cones;
/// the result is assembled as a fan, so all pairwise intersections must be
/// pointed.
pub fn refine_collections(ambient: usize, a: &[Cone], b: &[Cone]) -> Fan {
    let mut pieces = Vec::new();
    for x in a {
        for y in b {
            pieces.push(x.intersect(y));
        }
    }
    Fan::from_cones_unchecked(ambient, pieces)
}

/// Faces of a not-necessarily-pointed cone, as a plain collection.
pub fn faces_collection(c: &Cone) -> Vec<Cone> {
    c.faces()
}

/// Decompose `c` into full-dimensional (relative to `c`) cells after cutting
/// with the boundary data of `cutter`: the cells are `c ∩ cutter` and the
/// halfspace-sequence pieces of `c \ cutter`, keeping only pieces of the same
/// dimension as `c`.
fn split_cell(c: &Cone, cutter: &Cone) -> Vec<Cone> {
    let inter = c.intersect(cutter);
    if inter.dim() < c.dim() {
        return vec![c.clone()];
    }
    if inter.same_set(c) {
        return vec![c.clone()];
    }
    let mut walls: Vec<LatticeVector> = cutter.facets().to_vec();
    for e in cutter.equations() {
        walls.push(e.clone());
        walls.push(neg_vec(e));
    }
    let mut out = vec![inter];
    let mut kept: Vec<LatticeVector> = Vec::new();
    for w in walls {
        // piece on the far side of this wall, inside all previous walls
        let ineqs: Vec<LatticeVector> = std::iter::once(neg_vec(&w))
            .chain(kept.iter().cloned())
            .chain(c.facets().iter().cloned())
            .collect();
        let piece = Cone::from_halfspaces(c.ambient_rank(), &ineqs, c.equations());
        if piece.dim() == c.dim() {
            out.push(piece);
        }
        kept.push(w);
    }
    out
}

/// Cells of `c` refined against every cone in `cutters`; the cells have the
/// same dimension as `c` and cover `c`.
pub fn refine_cells(c: &Cone, cutters: &[Cone]) -> Vec<Cone> {
    let mut cells = vec![c.clone()];
    for cut in cutters {
        let mut next = Vec::new();
        for cell in &cells {
            next.extend(split_cell(cell, cut));
        }
        cells = next;
    }
    cells
}

/// Exact covering test: is every point of `c` contained in the union of
/// `cover`?
pub fn cone_covered_by(c: &Cone, cover: &[Cone]) -> bool {
    if c.dim() == 0 {
        return cover.iter().any(|l| l.contains(c));
    }
    let cells = refine_cells(c, cover);
    cells
        .iter()
        .all(|cell| cover.iter().any(|l| l.contains(cell)))
}

/// Exact test for |fan| = target (target a cone, possibly non-pointed).
pub fn support_equals_cone(fan: &Fan, target: &Cone) -> bool {
    let maximal = fan.maximal_owned_for_support();
    for c in &maximal {
        if !target.contains(c) {
            return false;
        }
    }
    cone_covered_by(target, &maximal)
}

impl Fan {
    fn maximal_owned_for_support(&self) -> Vec<Cone> {
        self.maximal_cones().into_iter().cloned().collect()
    }

    /// Support membership of every generator of `c` plus covering: |self| ⊇ c.
    pub fn supports_cone(&self, c: &Cone) -> bool {
        cone_covered_by(c, &self.maximal_owned_for_support())
    }
}

/// Completeness by the facet-pairing criterion: the fan is nonempty, all
/// maximal cones are full-dimensional, and every facet of a maximal cone is
/// a facet of exactly one other maximal cone.
pub fn is_complete(fan: &Fan) -> bool {
    if fan.is_empty() {
        return false;
    }
    let maximal = fan.maximal_cones();
    if maximal.iter().any(|c| !c.is_full_dimensional()) {
        return false;
    }
    if fan.ambient_rank() == 0 {
        return true;
    }
    let mut facet_counts: std::collections::HashMap<Vec<LatticeVector>, usize> =
        std::collections::HashMap::new();
    for c in &maximal {
        for normal in c.facets() {
            let facet = c.face_by(std::slice::from_ref(normal));
            *facet_counts.entry(facet.rays().to_vec()).or_insert(0) += 1;
        }
    }
    facet_counts.values().all(|&n| n == 2)
}

/// The complete fan of all closed sign orthants.
pub fn sign_orthant_fan(ambient: usize) -> Fan {
    let mut cones = Vec::new();
    for mask in 0..(1u32 << ambient) {
        let gens: Vec<LatticeVector> = (0..ambient)
            .map(|i| {
                let mut v = vec![Int::zero(); ambient];
                v[i] = if mask & (1 << i) != 0 {
                    Int::from(-1)
                } else {
                    Int::from(1)
                };
                v
            })
            .collect();
        cones.push(Cone::from_generators(ambient, &gens, &[]));
    }
    Fan::from_cones_unchecked(ambient, cones)
}

fn hull_cone(fan: &Fan) -> Cone {
    let mut gens = Vec::new();
    for c in fan.cones() {
        gens.extend(c.generators());
    }
    Cone::from_generators(fan.ambient_rank(), &gens, &[])
}

/// Faces of the fan lying in the boundary of the convex cone `c`.
fn boundary_faces(fan: &Fan, c: &Cone) -> Vec<Cone> {
    fan.cones()
        .iter()
        .filter(|f| {
            c.facets().iter().any(|u| {
                f.generators().iter().all(|g| dot(u, g).is_zero())
            }) || f.dim() == 0
        })
        .cloned()
        .collect()
}

fn verify_completion(fan: &Fan, original: &Fan) -> bool {
    if fan.check_valid().is_err() {
        return false;
    }
    if !is_complete(fan) {
        return false;
    }
    original.cones().iter().all(|c| fan.contains_cone(c))
}

/// Star construction over a collection of faces from an apex ray.
fn star_over(ambient: usize, faces: &[Cone], apex: &LatticeVector) -> Vec<Cone> {
    faces
        .iter()
        .map(|f| {
            let mut gens = f.generators();
            gens.push(apex.clone());
            Cone::from_generators(ambient, &gens, &[])
        })
        .collect()
}

/// Extend a complete-in-subspace construction transversally: each maximal
/// cell is summed with each sign orthant of a complementary sublattice.
fn transversal_extend(
    ambient: usize,
    cells: Vec<Cone>,
    span_basis: &[LatticeVector],
) -> Option<Vec<Cone>> {
    let k = span_basis.len();
    if k == ambient {
        return Some(cells);
    }
    let full = complete_to_basis(span_basis, ambient).ok()?;
    let complement: Vec<LatticeVector> = full[k..].to_vec();
    let mut out = Vec::new();
    let base_cells: Vec<Cone> = if cells.is_empty() {
        vec![Cone::zero(ambient)]
    } else {
        cells
    };
    let extra = complement.len();
    for mask in 0..(1u32 << extra) {
        let signs: Vec<LatticeVector> = complement
            .iter()
            .enumerate()
            .map(|(i, w)| {
                if mask & (1 << i) != 0 {
                    neg_vec(w)
                } else {
                    w.clone()
                }
            })
            .collect();
        for cell in &base_cells {
            let mut gens = cell.generators();
            gens.extend(signs.iter().cloned());
            out.push(Cone::from_generators(ambient, &gens, &[]));
        }
    }
    Some(out)
}

/// Completion for a fan whose support equals its convex hull cone: cone off
/// the boundary faces from the negative of an interior point.
fn complete_convex_support(fan: &Fan, hull: &Cone) -> Option<Fan> {
    if !hull.is_pointed() {
        return None;
    }
    let ambient = fan.ambient_rank();
    if hull.dim() == 0 {
        // support is the origin: the sign-orthant fan completes it
        return Some(sign_orthant_fan(ambient));
    }
    let z = hull.relint_point();
    if is_zero_vec(&z) {
        return None;
    }
    let anti = primitive(&neg_vec(&z));
    let bfaces = boundary_faces(fan, hull);
    let mut cells: Vec<Cone> = fan.maximal_cones().into_iter().cloned().collect();
    cells.extend(star_over(ambient, &bfaces, &anti));
    if hull.dim() < ambient {
        // complete within the span first, then extend transversally
        let span_basis = saturate_image(&LatticeMap::from_cols(
            ambient,
            hull.generators(),
        ));
        cells = transversal_extend(ambient, cells, &span_basis)?;
    }
    let candidate = Fan::from_cones_unchecked(ambient, cells);
    if verify_completion(&candidate, fan) {
        Some(candidate)
    } else {
        None
    }
}

/// Completion for a fan supported on the full boundary of its hull cone:
/// star inward and outward from an interior point.
fn complete_boundary_support(fan: &Fan, hull: &Cone) -> Option<Fan> {
    if !hull.is_full_dimensional() || !hull.is_pointed() {
        return None;
    }
    let ambient = fan.ambient_rank();
    let z = primitive(&hull.relint_point());
    if is_zero_vec(&z) {
        return None;
    }
    let anti = neg_vec(&z);
    let faces: Vec<Cone> = fan.cones().to_vec();
    let mut cells = star_over(ambient, &faces, &z);
    cells.extend(star_over(ambient, &faces, &anti));
    let candidate = Fan::from_cones_unchecked(ambient, cells);
    if verify_completion(&candidate, fan) {
        Some(candidate)
    } else {
        None
    }
}

/// Full-dimensional cells of the central hyperplane arrangement given by
/// `normals`, enumerated by recursive splitting (output-sensitive).
pub(crate) fn arrangement_cells(ambient: usize, normals: &[LatticeVector]) -> Vec<Cone> {
    fn split(cells: Vec<Cone>, h: &LatticeVector, ambient: usize) -> Vec<Cone> {
        let mut out = Vec::new();
        for c in cells {
            let plus = Cone::from_halfspaces(
                ambient,
                &c.facets()
                    .iter()
                    .cloned()
                    .chain(std::iter::once(h.clone()))
                    .collect::<Vec<_>>(),
                c.equations(),
            );
            let minus = Cone::from_halfspaces(
                ambient,
                &c.facets()
                    .iter()
                    .cloned()
                    .chain(std::iter::once(neg_vec(h)))
                    .collect::<Vec<_>>(),
                c.equations(),
            );
            if plus.is_full_dimensional() {
                out.push(plus);
            }
            if minus.is_full_dimensional() {
                out.push(minus);
            }
        }
        out
    }
    let mut cells = vec![Cone::full_space(ambient)];
    for h in normals {
        cells = split(cells, h, ambient);
    }
    cells
}

fn arrangement_normals(fan: &Fan) -> Vec<LatticeVector> {
    let ambient = fan.ambient_rank();
    let mut normals: Vec<LatticeVector> = Vec::new();
    let push = |v: &LatticeVector, normals: &mut Vec<LatticeVector>| {
        if is_zero_vec(v) {
            return;
        }
        let p = primitive(v);
        let n = neg_vec(&p);
        if !normals.contains(&p) && !normals.contains(&n) {
            normals.push(p);
        }
    };
    for c in fan.maximal_cones() {
        for f in c.facets() {
            push(f, &mut normals);
        }
        for e in c.equations() {
            push(e, &mut normals);
        }
    }
    // make sure the arrangement cells are pointed: the normals must span
    let mut rank = if normals.is_empty() {
        0
    } else {
        crate::lattice::rank_bareiss(&LatticeMap::from_rows(normals.clone()))
    };
    for i in 0..ambient {
        if rank == ambient {
            break;
        }
        let mut e = vec![Int::zero(); ambient];
        e[i] = Int::one();
        let mut trial = normals.clone();
        trial.push(e.clone());
        let r = crate::lattice::rank_bareiss(&LatticeMap::from_rows(trial));
        if r > rank {
            normals.push(e);
            rank = r;
        }
    }
    normals
}

/// Arrangement-based completion: keep f's cones verbatim, tile the outside
/// with arrangement cells, and repair face mismatches by greedily merging
/// outside cells whose union is convex.
fn complete_by_arrangement(fan: &Fan) -> Option<Fan> {
    let ambient = fan.ambient_rank();
    let normals = arrangement_normals(fan);
    let cells = arrangement_cells(ambient, &normals);
    let maximal: Vec<Cone> = fan.maximal_cones().into_iter().cloned().collect();
    let mut outside: Vec<Cone> = cells
        .into_iter()
        .filter(|cell| {
            let p = cell.relint_point();
            !maximal.iter().any(|c| c.contains_point(&p))
        })
        .collect();
    outside.sort_by(|a, b| a.rays().cmp(b.rays()));

    for _round in 0..64 {
        let mut all = maximal.clone();
        all.extend(outside.iter().cloned());
        let candidate = Fan::from_cones_unchecked(ambient, all);
        if verify_completion(&candidate, fan) {
            return Some(candidate);
        }
        // find a violating pair involving an outside cell and try to merge
        // that cell with a neighbor into a convex union
        let mut merged = false;
        'search: for i in 0..outside.len() {
            for j in (i + 1)..outside.len() {
                let inter = outside[i].intersect(&outside[j]);
                if inter.dim() + 1 != ambient {
                    continue; // not facet-adjacent
                }
                let mut gens = outside[i].generators();
                gens.extend(outside[j].generators());
                let union = Cone::from_generators(ambient, &gens, &[]);
                if !union.is_pointed() {
                    continue;
                }
                if !cone_covered_by(&union, &[outside[i].clone(), outside[j].clone()]) {
                    continue; // union not convex
                }
                // only merge when it removes a face violation against f
                let bad_i = violates_against(&outside[i], &maximal);
                let bad_j = violates_against(&outside[j], &maximal);
                if !(bad_i || bad_j) {
                    continue;
                }
                if violates_against(&union, &maximal) {
                    continue;
                }
                let b = outside.remove(j);
                let a = outside.remove(i);
                let _ = (a, b);
                outside.push(union);
                outside.sort_by(|x, y| x.rays().cmp(y.rays()));
                merged = true;
                break 'search;
            }
        }
        if !merged {
            return None;
        }
    }
    None
}

fn violates_against(cell: &Cone, cones: &[Cone]) -> bool {
    for c in cones {
        let inter = cell.intersect(c);
        if !c.minimal_face_containing(&inter).same_set(&inter)
            || !cell.minimal_face_containing(&inter).same_set(&inter)
        {
            return true;
        }
    }
    false
}

/// A complete fan containing every cone of `fan` verbatim.
pub fn complete_fan(fan: &Fan) -> Result<Fan, TropError> {
    let ambient = fan.ambient_rank();
    if fan.is_empty() {
        return Ok(sign_orthant_fan(ambient));
    }
    if is_complete(fan) {
        return Ok(fan.clone());
    }
    let hull = hull_cone(fan);
    if hull.is_pointed() && support_equals_cone(fan, &hull) {
        if let Some(done) = complete_convex_support(fan, &hull) {
            return Ok(done);
        }
    }
    if hull.is_full_dimensional() && hull.is_pointed() {
        let boundary: Vec<Cone> = hull
            .facets()
            .iter()
            .map(|u| hull.face_by(std::slice::from_ref(u)))
            .collect();
        let on_boundary = fan
            .maximal_cones()
            .iter()
            .all(|c| boundary.iter().any(|b| b.contains(c)));
        let covers_boundary = boundary
            .iter()
            .all(|b| fan.supports_cone(b));
        if on_boundary && covers_boundary {
            if let Some(done) = complete_boundary_support(fan, &hull) {
                return Ok(done);
            }
        }
    }
    if let Some(done) = complete_by_arrangement(fan) {
        return Ok(done);
    }
    Err(TropError::CompletionFailed)
}

/// Index of the sublattice generated by the rays of a simplicial cone in the
/// saturation of their span.
pub fn cone_multiplicity(c: &Cone) -> Option<Int> {
    if !c.is_pointed() || c.rays().len() != c.dim() {
        return None; // not simplicial
    }
    if c.dim() == 0 {
        return Some(Int::one());
    }
    let m = LatticeMap::from_cols(c.ambient_rank(), c.rays().to_vec());
    let snf = smith_normal_form(&m);
    Some(snf.invariant_factors().iter().product())
}

/// Simplicial with all Smith invariants 1.
pub fn is_unimodular_cone(c: &Cone) -> bool {
    cone_multiplicity(c).is_some_and(|m| m.is_one())
}

/// Stellar subdivision of a fan at the ray through `w`.
pub fn stellar_subdivide(fan: &Fan, w: &LatticeVector) -> Fan {
    let ambient = fan.ambient_rank();
    let ray = primitive(w);
    let mut cones = Vec::new();
    for c in fan.maximal_cones() {
        if !c.contains_point(&ray) {
            cones.push(c.clone());
            continue;
        }
        // replace by joins of the ray with the faces not containing it
        for f in c.faces() {
            if f.contains_point(&ray) {
                continue;
            }
            let mut gens = f.generators();
            gens.push(ray.clone());
            cones.push(Cone::from_generators(ambient, &gens, &[]));
        }
    }
    Fan::from_cones_unchecked(ambient, cones)
}

/// Lattice points in the half-open parallelepiped of a simplicial cone,
/// excluding the origin, each tagged with its barycentric coordinate sum
/// (numerator over |det|).
fn parallelepiped_points(c: &Cone) -> Vec<(LatticeVector, Int)> {
    let ambient = c.ambient_rank();
    let k = c.rays().len();
    if k == 0 {
        return Vec::new();
    }
    let span_basis = saturate_image(&LatticeMap::from_cols(ambient, c.rays().to_vec()));
    let b = LatticeMap::from_cols(ambient, span_basis.clone());
    // coordinates of the rays in the span basis
    let mut a_cols = Vec::new();
    for r in c.rays() {
        let coords = crate::lattice::solve_integral(&b, r).expect("ray in its own span");
        a_cols.push(coords);
    }
    let a = LatticeMap::from_cols(k, a_cols);
    let d = det(&a);
    let dabs = d.abs();
    if dabs.is_one() {
        return Vec::new();
    }
    // bounding box of A * [0,1)^k in y-space
    let mut lo = vec![Int::zero(); k];
    let mut hi = vec![Int::zero(); k];
    for i in 0..k {
        for j in 0..k {
            let e = a.get(i, j);
            if e.is_negative() {
                lo[i] += e;
            } else {
                hi[i] += e;
            }
        }
    }
    let mut out = Vec::new();
    let mut y = lo.clone();
    'outer: loop {
        // lambda = A^{-1} y = adj(A) y / det(A); require 0 <= lambda_i < 1
        let adj_y = adjugate_apply(&a, &d, &y);
        let mut ok = true;
        let mut lam_sum = Int::zero();
        for l in &adj_y {
            // l / dabs in [0,1)
            if l.is_negative() || l >= &dabs {
                ok = false;
                break;
            }
            lam_sum += l;
        }
        if ok && !lam_sum.is_zero() {
            let w = b.apply(&y);
            out.push((w, lam_sum));
        }
        // increment y
        for i in 0..k {
            y[i] += Int::one();
            if y[i] <= hi[i] {
                continue 'outer;
            }
            y[i] = lo[i].clone();
        }
        break;
    }
    out
}

/// adj(A) * y normalized so that (adj(A) y) / |det| are the barycentric
/// coordinates: returns the vector det_sign * adj(A) * y.
fn adjugate_apply(a: &LatticeMap, d: &Int, y: &[Int]) -> Vec<Int> {
    let k = a.nrows();
    // solve A * lambda = y over the rationals by Cramer's rule, scaled by |d|
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        let mut m = a.clone();
        for r in 0..k {
            m.set(r, i, y[r].clone());
        }
        let di = det(&m);
        // lambda_i = di / d; scaled by |d|: di * sign(d)
        let scaled = if d.is_negative() { -di } else { di };
        out.push(scaled);
    }
    out
}

/// The nonzero parallelepiped lattice point of minimal barycentric
/// coordinate sum (ties broken lexicographically), if the cone is not
/// unimodular.
pub fn minimal_parallelepiped_point(c: &Cone) -> Option<LatticeVector> {
    let mut pts = parallelepiped_points(c);
    pts.sort_by(|a, b| (a.1.clone(), a.0.clone()).cmp(&(b.1.clone(), b.0.clone())));
    pts.into_iter().next().map(|(w, _)| w)
}

/// Subdivision of `fan` in which every cone is unimodular: first make every
/// cone simplicial by stellar subdivision at its own rays, then resolve by
/// stellar subdivision at parallelepiped points of minimal coordinate sum.
pub fn unimodular_subdivide(fan: &Fan) -> Fan {
    let mut current = fan.clone();
    if current.is_empty() {
        return current;
    }
    if current
        .maximal_cones()
        .iter()
        .all(|c| is_unimodular_cone(c))
    {
        return current;
    }
    // simplicialize
    let mut rays: Vec<LatticeVector> = Vec::new();
    for c in current.cones() {
        for r in c.rays() {
            if !rays.contains(r) {
                rays.push(r.clone());
            }
        }
    }
    rays.sort();
    for r in rays {
        current = stellar_subdivide(&current, &r);
    }
    debug_assert!(current
        .maximal_cones()
        .iter()
        .all(|c| c.rays().len() == c.dim()));
    // resolve
    loop {
        // pick the worst simplicial cone deterministically
        let mut worst: Option<(Int, Vec<LatticeVector>, Cone)> = None;
        for c in current.maximal_cones() {
            let m = cone_multiplicity(c).expect("simplicial after stellar pass");
            if m.is_one() {
                continue;
            }
            let key = c.rays().to_vec();
            let better = match &worst {
                None => true,
                Some((wm, wk, _)) => m > *wm || (m == *wm && key < *wk),
            };
            if better {
                worst = Some((m, key, c.clone()));
            }
        }
        let Some((_, _, cone)) = worst else { break };
        let w = minimal_parallelepiped_point(&cone)
            .expect("non-unimodular cone has parallelepiped points");
        current = stellar_subdivide(&current, &w);
    }
    current
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::vec_from_i64;

    fn cone2(rays: &[&[i64]]) -> Cone {
        Cone::from_rays_i64(2, rays)
    }

    #[test]
    fn refinement_idempotent() {
        let f = Fan::from_cones(2, vec![cone2(&[&[1, 0], &[0, 1]])]).unwrap();
        let r = f.common_refinement(&f);
        assert_eq!(r.cones().len(), f.cones().len());
        for c in f.cones() {
            assert!(r.contains_cone(c));
        }
    }

    #[test]
    fn refinement_overlap() {
        let f1 = Fan::face_fan(&cone2(&[&[1, 0], &[1, 2]]));
        let f2 = Fan::face_fan(&cone2(&[&[1, 1], &[0, 1]]));
        let r = f1.common_refinement(&f2);
        assert!(r.contains_cone(&cone2(&[&[1, 1], &[1, 2]])));
    }

    #[test]
    fn refinement_with_line_fan() {
        // complete orthant fan against the face fan of a ray through (1,1)
        let complete = sign_orthant_fan(2);
        let diag = Fan::face_fan(&cone2(&[&[1, 1]]));
        let r = complete.common_refinement(&diag);
        assert!(r.contains_cone(&cone2(&[&[1, 1]])));
        assert!(support_equals_cone(&r, &Cone::from_rays_i64(2, &[&[1, 1]])));
    }

    #[test]
    fn completeness_tests() {
        assert!(is_complete(&sign_orthant_fan(2)));
        assert!(is_complete(&sign_orthant_fan(3)));
        let partial = Fan::face_fan(&Cone::orthant(2));
        assert!(!is_complete(&partial));
        assert!(!is_complete(&Fan::empty(2)));
    }

    #[test]
    fn hexagon_normal_fan_is_complete() {
        let rays: Vec<Vec<i64>> = vec![
            vec![1, 0],
            vec![1, 1],
            vec![0, 1],
            vec![-1, 0],
            vec![-1, -1],
            vec![0, -1],
        ];
        let mut cones = Vec::new();
        for i in 0..6 {
            let a = &rays[i];
            let b = &rays[(i + 1) % 6];
            cones.push(Cone::from_generators(
                2,
                &[vec_from_i64(a), vec_from_i64(b)],
                &[],
            ));
        }
        let fan = Fan::from_cones(2, cones).unwrap();
        assert!(is_complete(&fan));
    }

    #[test]
    fn complete_fan_empty_rank1() {
        let f = complete_fan(&Fan::empty(1)).unwrap();
        assert!(is_complete(&f));
        assert!(f.contains_cone(&Cone::from_rays_i64(1, &[&[1]])));
        assert!(f.contains_cone(&Cone::from_rays_i64(1, &[&[-1]])));
        assert!(f.contains_cone(&Cone::zero(1)));
    }

    #[test]
    fn complete_fan_already_complete() {
        let f = sign_orthant_fan(2);
        let done = complete_fan(&f).unwrap();
        assert_eq!(done, f);
    }

    #[test]
    fn complete_fan_single_ray_rank2() {
        let f = Fan::face_fan(&cone2(&[&[1, 0]]));
        let done = complete_fan(&f).unwrap();
        assert!(is_complete(&done));
        assert!(done.contains_cone(&cone2(&[&[1, 0]])));
    }

    #[test]
    fn complete_fan_single_cone_rank3() {
        let f = Fan::face_fan(&Cone::from_rays_i64(3, &[&[1, 0, 0], &[1, 2, 0], &[0, 0, 1]]));
        let done = complete_fan(&f).unwrap();
        assert!(is_complete(&done));
        for c in f.cones() {
            assert!(done.contains_cone(c));
        }
    }

    #[test]
    fn complete_fan_two_opposite_quadrants() {
        let f = Fan::from_cones(
            2,
            vec![cone2(&[&[1, 0], &[0, 1]]), cone2(&[&[-1, 0], &[0, -1]])],
        )
        .unwrap();
        let done = complete_fan(&f).unwrap();
        assert!(is_complete(&done));
        for c in f.cones() {
            assert!(done.contains_cone(c));
        }
    }

    #[test]
    fn unimodular_subdivide_12() {
        let f = Fan::face_fan(&cone2(&[&[1, 0], &[1, 2]]));
        let out = unimodular_subdivide(&f);
        assert!(out.contains_cone(&cone2(&[&[1, 1]])));
        for c in out.maximal_cones() {
            assert!(is_unimodular_cone(c));
        }
        assert!(support_equals_cone(&out, &cone2(&[&[1, 0], &[1, 2]])));
    }

    #[test]
    fn unimodular_subdivide_15() {
        let f = Fan::face_fan(&cone2(&[&[1, 0], &[1, 5]]));
        let out = unimodular_subdivide(&f);
        for c in out.maximal_cones() {
            assert!(is_unimodular_cone(c));
        }
        assert!(support_equals_cone(&out, &cone2(&[&[1, 0], &[1, 5]])));
    }

    #[test]
    fn unimodular_input_unchanged() {
        let f = Fan::face_fan(&Cone::orthant(2));
        let out = unimodular_subdivide(&f);
        assert_eq!(out, f);
    }

    #[test]
    fn covering_tests() {
        let orthant = Cone::orthant(2);
        let left = cone2(&[&[1, 0], &[1, 1]]);
        let right = cone2(&[&[1, 1], &[0, 1]]);
        assert!(cone_covered_by(&orthant, &[left.clone(), right.clone()]));
        assert!(!cone_covered_by(&orthant, &[left]));
    }
}
