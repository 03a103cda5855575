//! Cone complexes with integral structure: each cell carries its own
//! lattice, glued along faces, with a piecewise-linear map to a common
//! target lattice. Compatibility predicates against a target fan, the
//! extension construction, and the compatible unimodular subdivision.

use std::collections::BTreeMap;

use num_traits::One;

use crate::cone::{is_face, linear_preimage_cone, Cone};
use crate::error::TropError;
use crate::fan::{
    arrangement_cells, complete_fan, cone_covered_by, cone_multiplicity, is_complete,
    refine_collections, stellar_subdivide, support_equals_cone, Fan,
};
use crate::lattice::{
    is_zero_vec, primitive, rank, saturate_image, solve_integral, Int, LatticeMap,
    LatticeVector,
};
use crate::snc::SncModel;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub id: String,
    pub rank: usize,
    /// Pointed and full-dimensional in the cell's own lattice.
    pub cone: Cone,
    /// The cell's lattice to the common target lattice.
    pub gtrop: LatticeMap,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaceRel {
    pub cell: usize,
    pub face: usize,
    /// Injective; identifies the face's lattice with a saturated sublattice.
    pub map: LatticeMap,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegralConeComplex {
    pub target_rank: usize,
    pub cells: Vec<Cell>,
    pub faces: Vec<FaceRel>,
}

/// A cone pushed through a lattice map.
pub fn map_cone(m: &LatticeMap, c: &Cone) -> Cone {
    let rays: Vec<LatticeVector> = c.rays().iter().map(|r| m.apply(r)).collect();
    let lin: Vec<LatticeVector> = c.lineality().iter().map(|r| m.apply(r)).collect();
    Cone::from_generators(m.nrows(), &rays, &lin)
}

impl IntegralConeComplex {
    pub fn empty(target_rank: usize) -> IntegralConeComplex {
        IntegralConeComplex { target_rank, cells: Vec::new(), faces: Vec::new() }
    }

    pub fn cell_index(&self, id: &str) -> Option<usize> {
        self.cells.iter().position(|c| c.id == id)
    }

    fn rels_of(&self, cell: usize) -> Vec<&FaceRel> {
        self.faces.iter().filter(|r| r.cell == cell).collect()
    }

    fn parents_of(&self, face: usize) -> Vec<&FaceRel> {
        self.faces.iter().filter(|r| r.face == face).collect()
    }

    /// Structural invariants, as diagnostics.
    pub fn check_valid(&self) -> Result<(), TropError> {
        for cell in &self.cells {
            if cell.cone.ambient_rank() != cell.rank
                || !cell.cone.is_pointed()
                || !cell.cone.is_full_dimensional()
            {
                return Err(TropError::PreconditionViolated(format!(
                    "cell {} cone is not pointed full-dimensional in its lattice",
                    cell.id
                )));
            }
            if cell.gtrop.nrows() != self.target_rank || cell.gtrop.ncols() != cell.rank {
                return Err(TropError::PreconditionViolated(format!(
                    "cell {} gtrop map has wrong shape",
                    cell.id
                )));
            }
        }
        for rel in &self.faces {
            let cell = &self.cells[rel.cell];
            let face = &self.cells[rel.face];
            if rel.map.nrows() != cell.rank
                || rel.map.ncols() != face.rank
                || rank(&rel.map) != face.rank
            {
                return Err(TropError::PreconditionViolated(format!(
                    "face map {} -> {} is not injective",
                    face.id, cell.id
                )));
            }
            let image = map_cone(&rel.map, &face.cone);
            if !cell.cone.contains(&image) || !is_face(&image, &cell.cone).unwrap_or(false) {
                return Err(TropError::PreconditionViolated(format!(
                    "face {} does not embed as a face of cell {}",
                    face.id, cell.id
                )));
            }
            if cell.gtrop.compose(&rel.map) != face.gtrop {
                return Err(TropError::PreconditionViolated(format!(
                    "gtrop maps of {} and {} disagree",
                    face.id, cell.id
                )));
            }
        }
        // composition consistency
        for r1 in &self.faces {
            for r2 in &self.faces {
                if r2.cell != r1.face {
                    continue;
                }
                let composed = r1.map.compose(&r2.map);
                let found = self
                    .faces
                    .iter()
                    .any(|r3| r3.cell == r1.cell && r3.face == r2.face && r3.map == composed);
                if !found {
                    return Err(TropError::PreconditionViolated(format!(
                        "missing or inconsistent composed face relation {} -> {}",
                        self.cells[r2.face].id, self.cells[r1.cell].id
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One orthant cell per nerve face, with coordinate-inclusion face maps and
/// the divisor vals as gtrop columns.
pub fn complex_from_snc(model: &SncModel) -> Result<IntegralConeComplex, TropError> {
    // closure check
    let mut missing = Vec::new();
    for face in &model.nerve {
        for name in face {
            let mut sub = face.clone();
            sub.remove(name);
            if !model.nerve.contains(&sub) {
                missing.push(format!(
                    "{{{}}}",
                    sub.iter().cloned().collect::<Vec<_>>().join(",")
                ));
            }
        }
    }
    if !model.nerve.contains(&std::collections::BTreeSet::new()) {
        missing.push("{}".to_string());
    }
    if !missing.is_empty() {
        missing.sort();
        missing.dedup();
        return Err(TropError::NerveNotClosed(missing));
    }
    let mut faces_sorted: Vec<_> = model.nerve.iter().cloned().collect();
    faces_sorted.sort_by_key(|s| (s.len(), s.iter().cloned().collect::<Vec<_>>()));
    let mut cells = Vec::new();
    let mut index = BTreeMap::new();
    for s in &faces_sorted {
        let phi = model.phi_s(s);
        let id = format!("{{{}}}", phi.s.join(","));
        index.insert(s.clone(), cells.len());
        cells.push(Cell {
            id,
            rank: s.len(),
            cone: Cone::orthant(s.len()),
            gtrop: phi.map,
        });
    }
    let mut rels = Vec::new();
    for s in &faces_sorted {
        let big: Vec<&String> = s.iter().collect();
        for sub in faces_sorted.iter().filter(|t| t.len() < s.len() && t.is_subset(s)) {
            let mut map = LatticeMap::zero(s.len(), sub.len());
            for (j, name) in sub.iter().enumerate() {
                let i = big.iter().position(|n| *n == name).unwrap();
                map.set(i, j, Int::one());
            }
            rels.push(FaceRel { cell: index[s], face: index[sub], map });
        }
    }
    let out = IntegralConeComplex { target_rank: model.target_rank, cells, faces: rels };
    out.check_valid()?;
    Ok(out)
}

/// Injectivity of the map on every cell.
pub fn is_immersive(c: &IntegralConeComplex) -> bool {
    c.cells.iter().all(|cell| rank(&cell.gtrop) == cell.rank)
}

/// The preimage of every target cone in every cell must be a face of the
/// cell's cone.
pub fn is_delta_compatible(c: &IntegralConeComplex, delta: &Fan) -> bool {
    assert_eq!(delta.ambient_rank(), c.target_rank);
    for cell in &c.cells {
        for sigma in delta.cones() {
            let pre = linear_preimage_cone(&cell.gtrop, sigma).intersect(&cell.cone);
            if !is_face(&pre, &cell.cone).unwrap_or(false) {
                return false;
            }
        }
    }
    true
}

/// Sign-normalized primitive representative of a hyperplane normal, or None
/// for the zero functional.
fn wall_normal(v: &LatticeVector) -> Option<LatticeVector> {
    if is_zero_vec(v) {
        return None;
    }
    let p = primitive(v);
    match p.iter().find(|x| !num_traits::Zero::is_zero(*x)) {
        Some(x) if x < &Int::from(0) => Some(crate::lattice::neg_vec(&p)),
        _ => Some(p),
    }
}

fn push_wall(v: &LatticeVector, walls: &mut Vec<LatticeVector>) {
    if let Some(p) = wall_normal(v) {
        if !walls.contains(&p) {
            walls.push(p);
        }
    }
}

/// Refinement of a complete fan by the cells of the wall arrangement. Only
/// accepted if it is still complete, keeps every cone of `delta` verbatim,
/// and meets `tau` in a face of every cone; each refined cone lies on one
/// closed side of every wall, so when `tau` is carved out by the walls the
/// face condition follows from the sign pattern.
fn wall_completion(
    complete_max: &[Cone],
    delta: &Fan,
    tau: &Cone,
    walls: &[LatticeVector],
) -> Option<Fan> {
    let n = tau.ambient_rank();
    let cells = arrangement_cells(n, walls);
    let fan = refine_collections(n, complete_max, &cells);
    if !is_complete(&fan) {
        return None;
    }
    if !delta.cones().iter().all(|c| fan.contains_cone(c)) {
        return None;
    }
    for c in fan.cones() {
        if !is_face(&c.intersect(tau), c).unwrap_or(false) {
            return None;
        }
    }
    Some(fan)
}

/// A fan with support exactly `sigma`, containing every cone of `delta`
/// verbatim, in which every cone meets `tau` in a face of itself. `tau` may
/// be non-pointed. All three postconditions are re-verified on every call.
pub fn technical_extension(sigma: &Cone, tau: &Cone, delta: &Fan) -> Result<Fan, TropError> {
    let mut walls = Vec::new();
    for u in tau.facets().iter().chain(tau.equations()) {
        push_wall(u, &mut walls);
    }
    technical_extension_with_walls(sigma, tau, delta, &walls)
}

/// The extension construction, with an explicit set of hyperplane normals
/// that carve `tau` out of the ambient space. When every cone of `delta`
/// lies on one closed side of each wall, the completed boundary star refined
/// by the wall arrangement is itself a valid completion and every refined
/// cone meets `tau` in a face by a sign argument; otherwise the generic fan
/// completion is used.
pub(crate) fn technical_extension_with_walls(
    sigma: &Cone,
    tau: &Cone,
    delta: &Fan,
    walls: &[LatticeVector],
) -> Result<Fan, TropError> {
    let n = sigma.ambient_rank();
    assert_eq!(tau.ambient_rank(), n);
    assert_eq!(delta.ambient_rank(), n);
    for eta in delta.cones() {
        if !sigma.contains(eta) {
            return Err(TropError::PreconditionViolated(format!(
                "cone {:?} of delta is not contained in sigma",
                eta.rays()
            )));
        }
        let i = eta.intersect(tau);
        if !is_face(&i, eta)? {
            return Err(TropError::PreconditionViolated(format!(
                "cone {:?} of delta does not meet tau in a face",
                eta.rays()
            )));
        }
    }
    let dbar = complete_fan(delta)?;
    let dbar_max: Vec<Cone> = dbar.maximal_cones().into_iter().cloned().collect();
    let theta = refine_collections(n, &dbar_max, std::slice::from_ref(tau));
    let mut union_cones: Vec<Cone> = theta.cones().to_vec();
    union_cones.extend(delta.cones().iter().cloned());
    let theta_union = Fan::from_cones(n, union_cones)?;
    let thetabar = match wall_completion(&dbar_max, delta, tau, walls) {
        Some(fan) => fan,
        None => complete_fan(&theta_union)?,
    };
    let dtilde = refine_collections(n, &dbar_max, std::slice::from_ref(sigma));
    let out = thetabar.common_refinement(&dtilde);

    // postconditions, each verified independently of the construction
    if !support_equals_cone(&out, sigma) {
        return Err(TropError::PreconditionViolated(
            "extension postcondition failed: support differs from sigma".into(),
        ));
    }
    for eta in delta.cones() {
        if !out.contains_cone(eta) {
            return Err(TropError::PreconditionViolated(
                "extension postcondition failed: delta cone lost".into(),
            ));
        }
    }
    for c in out.cones() {
        let i = c.intersect(tau);
        if !is_face(&i, c)? {
            return Err(TropError::PreconditionViolated(
                "extension postcondition failed: tau is not met in a face".into(),
            ));
        }
    }
    Ok(out)
}

/// Per-cell fans produced while subdividing a complex, plus the bookkeeping
/// to mirror subdivisions across shared faces.
struct Subdivision<'a> {
    complex: &'a IntegralConeComplex,
    /// Cell indices in increasing rank order.
    order: Vec<usize>,
    fans: Vec<Fan>,
}

impl<'a> Subdivision<'a> {
    fn new(complex: &'a IntegralConeComplex) -> Subdivision<'a> {
        let mut order: Vec<usize> = (0..complex.cells.len()).collect();
        order.sort_by_key(|&i| (complex.cells[i].rank, complex.cells[i].id.clone()));
        let fans = complex
            .cells
            .iter()
            .map(|c| Fan::face_fan(&c.cone))
            .collect();
        Subdivision { complex, order, fans }
    }

    /// The subdivided boundary of a cell: its faces' fans pushed forward.
    fn boundary_fan(&self, cell: usize) -> Fan {
        let rank = self.complex.cells[cell].rank;
        let mut cones = Vec::new();
        for rel in self.complex.rels_of(cell) {
            for c in self.fans[rel.face].cones() {
                cones.push(map_cone(&rel.map, c));
            }
        }
        Fan::from_cones_unchecked(rank, cones)
    }

    /// Stellar subdivision at a point of one cell, mirrored into every cell
    /// sharing the point's carrier face.
    fn stellar_everywhere(&mut self, cell: usize, w: &LatticeVector) {
        // carrier: the face cell of minimal rank whose image contains w
        let mut carrier = cell;
        let mut w_carrier = w.clone();
        for rel in self.complex.rels_of(cell) {
            if self.complex.cells[rel.face].rank >= self.complex.cells[carrier].rank {
                continue;
            }
            if let Some(x) = solve_integral(&rel.map, w) {
                if self.complex.cells[rel.face].cone.contains_point(&x) {
                    carrier = rel.face;
                    w_carrier = x;
                }
            }
        }
        self.fans[carrier] = stellar_subdivide(&self.fans[carrier], &w_carrier);
        for rel in self.complex.parents_of(carrier) {
            let wp = rel.map.apply(&w_carrier);
            self.fans[rel.cell] = stellar_subdivide(&self.fans[rel.cell], &wp);
        }
    }

    /// Make every cone of every fan simplicial by stellar subdivision at
    /// existing rays, deterministically, until stable.
    fn simplicialize(&mut self) {
        loop {
            let mut changed = false;
            for &i in &self.order.clone() {
                let mut rays: Vec<LatticeVector> = Vec::new();
                for c in self.fans[i].cones() {
                    for r in c.rays() {
                        if !rays.contains(r) {
                            rays.push(r.clone());
                        }
                    }
                }
                rays.sort();
                for r in rays {
                    let before = self.fans[i].clone();
                    self.stellar_everywhere(i, &r);
                    if self.fans[i] != before {
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
    }

    /// Resolve all multiplicities by stellar subdivision at parallelepiped
    /// points, mirrored across faces.
    fn resolve(&mut self) {
        loop {
            let mut target: Option<(usize, Int, Vec<LatticeVector>, Cone)> = None;
            for &i in &self.order {
                for c in self.fans[i].maximal_cones() {
                    let Some(m) = cone_multiplicity(c) else { continue };
                    if m.is_one() {
                        continue;
                    }
                    let key = c.rays().to_vec();
                    let better = match &target {
                        None => true,
                        Some((_, tm, tk, _)) => m > *tm || (m == *tm && key < *tk),
                    };
                    if better {
                        target = Some((i, m, key, c.clone()));
                    }
                }
                if target.is_some() {
                    break; // lowest-rank cell first, keeps face mirroring simple
                }
            }
            let Some((i, _, _, cone)) = target else { break };
            let w = crate::fan::minimal_parallelepiped_point(&cone)
                .expect("non-unimodular cone has interior lattice points");
            self.stellar_everywhere(i, &w);
        }
    }
}

/// A subdivision of the complex that is compatible with `delta` and has
/// every cell unimodular. Built per cell in rank order: the boundary is
/// inherited from the faces, the extension construction handles one target
/// cone at a time, and the results are intersected; then all cells are made
/// unimodular by mirrored stellar subdivisions.
pub fn delta_compatible_subdivision(
    c: &IntegralConeComplex,
    delta: &Fan,
) -> Result<IntegralConeComplex, TropError> {
    c.check_valid()?;
    assert_eq!(delta.ambient_rank(), c.target_rank);
    // facet data of the target cones; pulled back through each cell's map it
    // carves every preimage cone, and because the cell maps commute with the
    // face maps the pulled-back walls agree across shared faces
    let mut target_walls: Vec<LatticeVector> = Vec::new();
    for s in delta.maximal_cones() {
        for u in s.facets().iter().chain(s.equations()) {
            push_wall(u, &mut target_walls);
        }
    }
    let mut sub = Subdivision::new(c);
    for &i in &sub.order.clone() {
        let cell = &c.cells[i];
        if cell.rank == 0 {
            continue;
        }
        let base = sub.boundary_fan(i);
        let taus: Vec<Cone> = {
            let maximal = delta.maximal_cones();
            if maximal.is_empty() {
                vec![Cone::zero(cell.rank)]
            } else {
                maximal
                    .iter()
                    .map(|s| linear_preimage_cone(&cell.gtrop, s))
                    .collect()
            }
        };
        let gt = cell.gtrop.transpose();
        let mut walls: Vec<LatticeVector> = Vec::new();
        for u in &target_walls {
            push_wall(&gt.apply(u), &mut walls);
        }
        let mut fan: Option<Fan> = None;
        for tau in &taus {
            let ext = technical_extension_with_walls(&cell.cone, tau, &base, &walls)?;
            fan = Some(match fan {
                None => ext,
                Some(f) => f.common_refinement(&ext),
            });
        }
        let fan = fan.expect("at least one tau");
        // the boundary must survive verbatim for the next ranks
        for b in base.cones() {
            if !fan.contains_cone(b) {
                return Err(TropError::PreconditionViolated(
                    "subdivision lost a boundary cone".into(),
                ));
            }
        }
        if !support_equals_cone(&fan, &cell.cone) {
            return Err(TropError::PreconditionViolated(
                "subdivision changed a cell's support".into(),
            ));
        }
        sub.fans[i] = fan;
    }
    sub.simplicialize();
    sub.resolve();
    let out = assemble(c, &sub)?;
    out.check_valid()?;
    if !is_delta_compatible(&out, delta) {
        return Err(TropError::PreconditionViolated(
            "subdivision postcondition failed: output is not compatible".into(),
        ));
    }
    Ok(out)
}

/// Build the output complex from per-cell fans: one new cell per cone,
/// deduplicated through the original face relations, with base-change
/// face maps.
fn assemble(
    c: &IntegralConeComplex,
    sub: &Subdivision<'_>,
) -> Result<IntegralConeComplex, TropError> {
    // global registry: (original cell, canonical rays there) -> new cell
    let mut registry: BTreeMap<(usize, Vec<LatticeVector>), usize> = BTreeMap::new();
    let mut cells: Vec<Cell> = Vec::new();
    let mut bases: Vec<LatticeMap> = Vec::new(); // new-cell lattice -> original cell lattice
    let mut owners: Vec<usize> = Vec::new();
    let mut rels: Vec<FaceRel> = Vec::new();

    for &i in &sub.order {
        let orig = &c.cells[i];
        let mut local: BTreeMap<Vec<LatticeVector>, usize> = BTreeMap::new();
        for (k, cone) in sub.fans[i].cones().iter().enumerate() {
            // carrier: a proper face whose image holds the cone, if any
            let mut carried: Option<usize> = None;
            for rel in c.rels_of(i) {
                let pulled: Option<Vec<LatticeVector>> = cone
                    .rays()
                    .iter()
                    .map(|r| {
                        solve_integral(&rel.map, r).filter(|x| {
                            c.cells[rel.face].cone.contains_point(x)
                        })
                    })
                    .collect();
                if let Some(rays) = pulled {
                    let mut rays = rays;
                    rays.sort();
                    if let Some(&idx) = registry.get(&(rel.face, rays)) {
                        carried = Some(idx);
                        break;
                    }
                }
            }
            let idx = match carried {
                Some(idx) => idx,
                None => {
                    let span = saturate_image(&LatticeMap::from_cols(
                        orig.rank,
                        cone.generators(),
                    ));
                    let b = LatticeMap::from_cols(orig.rank, span.clone());
                    let own_rays: Vec<LatticeVector> = cone
                        .rays()
                        .iter()
                        .map(|r| solve_integral(&b, r).expect("ray in its span"))
                        .collect();
                    let own = Cone::from_generators(span.len(), &own_rays, &[]);
                    let idx = cells.len();
                    cells.push(Cell {
                        id: format!("{}/{}", orig.id, k),
                        rank: span.len(),
                        cone: own,
                        gtrop: orig.gtrop.compose(&b),
                    });
                    bases.push(b);
                    owners.push(i);
                    idx
                }
            };
            let mut key = cone.rays().to_vec();
            key.sort();
            registry.insert((i, key.clone()), idx);
            local.insert(key, idx);
        }
        // face relations among the new cells seen in this original cell
        let entries: Vec<(Vec<LatticeVector>, usize)> =
            local.iter().map(|(k, v)| (k.clone(), *v)).collect();
        for (key_a, idx_a) in &entries {
            let cone_a = Cone::from_generators(orig.rank, key_a, &[]);
            for (key_b, idx_b) in &entries {
                if idx_a == idx_b {
                    continue;
                }
                let cone_b = Cone::from_generators(orig.rank, key_b, &[]);
                if !cone_a.contains(&cone_b) || !is_face(&cone_b, &cone_a).unwrap_or(false) {
                    continue;
                }
                if rels.iter().any(|r| r.cell == *idx_a && r.face == *idx_b) {
                    continue;
                }
                // base change: express cone_b's basis in cone_a's basis,
                // both measured inside the original cell's lattice
                let ba = if owners[*idx_a] == i {
                    bases[*idx_a].clone()
                } else {
                    // idx_a was created in a face cell; compose with the rel map
                    let rel = c
                        .rels_of(i)
                        .into_iter()
                        .find(|r| r.face == owners[*idx_a])
                        .expect("carrier is a face of this cell");
                    rel.map.compose(&bases[*idx_a])
                };
                let bb = if owners[*idx_b] == i {
                    bases[*idx_b].clone()
                } else {
                    let rel = c
                        .rels_of(i)
                        .into_iter()
                        .find(|r| r.face == owners[*idx_b])
                        .expect("carrier is a face of this cell");
                    rel.map.compose(&bases[*idx_b])
                };
                let cols: Option<Vec<LatticeVector>> = (0..bb.ncols())
                    .map(|j| solve_integral(&ba, &bb.col(j)))
                    .collect();
                let Some(cols) = cols else {
                    return Err(TropError::PreconditionViolated(
                        "face lattice does not embed integrally".into(),
                    ));
                };
                let map = LatticeMap::from_cols(cells[*idx_a].rank, cols);
                rels.push(FaceRel { cell: *idx_a, face: *idx_b, map });
            }
        }
    }
    Ok(IntegralConeComplex { target_rank: c.target_rank, cells, faces: rels })
}

/// Are all cells unimodular, as cones in their own lattices?
pub fn is_unimodular_complex(c: &IntegralConeComplex) -> bool {
    c.cells
        .iter()
        .all(|cell| cone_multiplicity(&cell.cone).is_some_and(|m| m.is_one()))
}

/// The subcomplex of cells whose image lies inside a single cone of delta,
/// and whether its support is exactly the preimage of |delta| in every cell.
pub fn subcomplex_sigma_delta(
    c: &IntegralConeComplex,
    delta: &Fan,
) -> (IntegralConeComplex, bool) {
    let selected: Vec<usize> = (0..c.cells.len())
        .filter(|&i| {
            let image = map_cone(&c.cells[i].gtrop, &c.cells[i].cone);
            delta.cones().iter().any(|s| s.contains(&image))
        })
        .collect();
    let reindex: BTreeMap<usize, usize> = selected
        .iter()
        .enumerate()
        .map(|(new, &old)| (old, new))
        .collect();
    let sub = IntegralConeComplex {
        target_rank: c.target_rank,
        cells: selected.iter().map(|&i| c.cells[i].clone()).collect(),
        faces: c
            .faces
            .iter()
            .filter(|r| reindex.contains_key(&r.cell) && reindex.contains_key(&r.face))
            .map(|r| FaceRel { cell: reindex[&r.cell], face: reindex[&r.face], map: r.map.clone() })
            .collect(),
    };
    // properness: within every cell, the union of selected faces equals the
    // preimage of |delta|
    let delta_max: Vec<&Cone> = delta.maximal_cones();
    let mut proper = true;
    'cells: for (i, cell) in c.cells.iter().enumerate() {
        let mut included: Vec<Cone> = Vec::new();
        if reindex.contains_key(&i) {
            included.push(cell.cone.clone());
        }
        for rel in c.rels_of(i) {
            if reindex.contains_key(&rel.face) {
                included.push(map_cone(&rel.map, &c.cells[rel.face].cone));
            }
        }
        let preimage: Vec<Cone> = delta_max
            .iter()
            .map(|s| linear_preimage_cone(&cell.gtrop, s).intersect(&cell.cone))
            .collect();
        // mutual covering
        for p in &preimage {
            if !cone_covered_by(p, &included) {
                proper = false;
                break 'cells;
            }
        }
        for inc in &included {
            if !cone_covered_by(inc, &preimage) {
                proper = false;
                break 'cells;
            }
        }
    }
    (sub, proper)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::vec_from_i64;

    fn fx_complex() -> IntegralConeComplex {
        let model = crate::snc::tests::fx_model();
        complex_from_snc(&model).unwrap()
    }

    fn two_cell(cols: &[&[i64]]) -> IntegralConeComplex {
        // single 2-cell complex with its two rays and the origin
        let gtrop = LatticeMap::from_cols(
            cols[0].len(),
            cols.iter().map(|c| vec_from_i64(c)).collect(),
        );
        let target = cols[0].len();
        let e1 = LatticeMap::from_i64(&[&[1], &[0]]);
        let e2 = LatticeMap::from_i64(&[&[0], &[1]]);
        IntegralConeComplex {
            target_rank: target,
            cells: vec![
                Cell {
                    id: "o".into(),
                    rank: 0,
                    cone: Cone::zero(0),
                    gtrop: LatticeMap::zero(target, 0),
                },
                Cell {
                    id: "r1".into(),
                    rank: 1,
                    cone: Cone::orthant(1),
                    gtrop: LatticeMap::from_cols(target, vec![vec_from_i64(cols[0])]),
                },
                Cell {
                    id: "r2".into(),
                    rank: 1,
                    cone: Cone::orthant(1),
                    gtrop: LatticeMap::from_cols(target, vec![vec_from_i64(cols[1])]),
                },
                Cell { id: "c".into(), rank: 2, cone: Cone::orthant(2), gtrop },
            ],
            faces: vec![
                FaceRel { cell: 1, face: 0, map: LatticeMap::zero(1, 0) },
                FaceRel { cell: 2, face: 0, map: LatticeMap::zero(1, 0) },
                FaceRel { cell: 3, face: 0, map: LatticeMap::zero(2, 0) },
                FaceRel { cell: 3, face: 1, map: e1 },
                FaceRel { cell: 3, face: 2, map: e2 },
            ],
        }
    }

    #[test]
    fn snc_complex_fx() {
        let c = fx_complex();
        assert_eq!(c.cells.len(), 3);
        c.check_valid().unwrap();
        let d0 = c.cell_index("{D0}").unwrap();
        assert_eq!(c.cells[d0].gtrop.col(0), vec_from_i64(&[1, 1]));
        let dinf = c.cell_index("{Dinf}").unwrap();
        assert_eq!(c.cells[dinf].gtrop.col(0), vec_from_i64(&[-1, -1]));
    }

    #[test]
    fn snc_complex_pair() {
        let model = {
            let mut m = crate::snc::tests::fx_model();
            m.target_rank = 3;
            m.divisors = vec![
                crate::snc::Divisor { name: "D1".into(), val: vec_from_i64(&[1, 0, 1]), m: 0 },
                crate::snc::Divisor { name: "D2".into(), val: vec_from_i64(&[0, 1, 1]), m: 0 },
            ];
            m.nerve = SncModel::close_nerve(&[["D1".to_string(), "D2".to_string()]
                .into_iter()
                .collect()]);
            m.strata.clear();
            m.ambient_fan = Fan::face_fan(&Cone::orthant(3));
            m
        };
        let c = complex_from_snc(&model).unwrap();
        let pair = c.cell_index("{D1,D2}").unwrap();
        assert_eq!(c.cells[pair].gtrop, LatticeMap::from_i64(&[&[1, 0], &[0, 1], &[1, 1]]));
    }

    #[test]
    fn nerve_not_closed() {
        let mut model = crate::snc::tests::fx_model();
        model.nerve.remove(&std::collections::BTreeSet::new());
        assert!(matches!(
            complex_from_snc(&model),
            Err(TropError::NerveNotClosed(_))
        ));
    }

    #[test]
    fn immersive_cases() {
        assert!(is_immersive(&fx_complex()));
        let degenerate = two_cell(&[&[1, 1], &[1, 1]]);
        assert!(!is_immersive(&degenerate));
        assert!(is_immersive(&IntegralConeComplex::empty(2)));
    }

    #[test]
    fn compatibility_cases() {
        let zero_fan = Fan::face_fan(&Cone::zero(2));
        assert!(is_delta_compatible(&fx_complex(), &zero_fan));

        let cplx = two_cell(&[&[1, 0], &[1, 2]]);
        let diag = Fan::face_fan(&Cone::from_rays_i64(2, &[&[1, 1]]));
        assert!(!is_delta_compatible(&cplx, &diag));
        let orthant = Fan::face_fan(&Cone::orthant(2));
        assert!(is_delta_compatible(&cplx, &orthant));
    }

    #[test]
    fn technical_extension_identity_case() {
        let sigma = Cone::orthant(2);
        let delta = Fan::face_fan(&sigma);
        let tau = Cone::from_rays_i64(2, &[&[1, 0]]);
        let out = technical_extension(&sigma, &tau, &delta).unwrap();
        assert!(support_equals_cone(&out, &sigma));
        assert!(out.contains_cone(&sigma));
    }

    #[test]
    fn technical_extension_diagonal_line() {
        let sigma = Cone::orthant(2);
        let tau = Cone::from_generators(
            2,
            &[],
            &[vec_from_i64(&[1, 1])],
        );
        let delta = Fan::face_fan(&Cone::zero(2));
        let out = technical_extension(&sigma, &tau, &delta).unwrap();
        assert!(out.contains_cone(&Cone::from_rays_i64(2, &[&[1, 1]])));
        assert!(support_equals_cone(&out, &sigma));
    }

    #[test]
    fn technical_extension_keeps_delta() {
        let sigma = Cone::orthant(2);
        let tau = Cone::from_rays_i64(2, &[&[1, 1]]);
        let delta = Fan::from_cones(
            2,
            vec![Cone::from_rays_i64(2, &[&[1, 0]])],
        )
        .unwrap();
        let out = technical_extension(&sigma, &tau, &delta).unwrap();
        assert!(out.contains_cone(&Cone::from_rays_i64(2, &[&[1, 0]])));
        assert!(out.contains_cone(&Cone::from_rays_i64(2, &[&[1, 1]])));
    }

    #[test]
    fn technical_extension_precondition() {
        let sigma = Cone::orthant(2);
        let tau = Cone::from_rays_i64(2, &[&[1, 1]]);
        // delta cone pierced by tau in its interior
        let delta = Fan::from_cones(2, vec![Cone::orthant(2)]).unwrap();
        // orthant ∩ pos((1,1)) = the ray, which is not a face of the orthant
        assert!(matches!(
            technical_extension(&sigma, &tau, &delta),
            Err(TropError::PreconditionViolated(_))
        ));
    }

    #[test]
    fn subdivision_splits_diagonal() {
        let cplx = two_cell(&[&[1, 0], &[1, 2]]);
        let diag = Fan::face_fan(&Cone::from_rays_i64(2, &[&[1, 1]]));
        let out = delta_compatible_subdivision(&cplx, &diag).unwrap();
        assert!(is_delta_compatible(&out, &diag));
        assert!(is_unimodular_complex(&out));
        // the image fan contains the ray (1,1) through some new cell
        assert!(out.cells.iter().any(|cell| {
            cell.rank == 1 && map_cone(&cell.gtrop, &cell.cone).same_set(
                &Cone::from_rays_i64(2, &[&[1, 1]]),
            )
        }));
    }

    #[test]
    fn subdivision_of_compatible_complex() {
        let cplx = fx_complex();
        let delta = Fan::face_fan(&Cone::orthant(2));
        let out = delta_compatible_subdivision(&cplx, &delta).unwrap();
        assert!(is_delta_compatible(&out, &delta));
        assert!(is_unimodular_complex(&out));
        assert_eq!(out.cells.len(), 3);
    }

    #[test]
    fn subcomplex_fx() {
        let cplx = fx_complex();
        let delta = Fan::face_fan(&Cone::orthant(2));
        let (sub, proper) = subcomplex_sigma_delta(&cplx, &delta);
        assert!(proper);
        assert_eq!(sub.cells.len(), 2); // the origin and the D0 ray
    }

    #[test]
    fn subcomplex_halfplane_not_proper() {
        let cplx = two_cell(&[&[1, 0], &[1, 2]]);
        let delta = Fan::face_fan(&Cone::from_rays_i64(2, &[&[1, 1], &[0, 1]]));
        let (sub, proper) = subcomplex_sigma_delta(&cplx, &delta);
        assert!(!proper);
        // only the origin and the e2 ray (image (1,2)) lie inside delta
        assert_eq!(sub.cells.len(), 2);
    }

    #[test]
    fn subcomplex_complete_delta() {
        let cplx = two_cell(&[&[1, 0], &[1, 2]]);
        let delta = crate::fan::sign_orthant_fan(2);
        let (sub, proper) = subcomplex_sigma_delta(&cplx, &delta);
        assert!(proper);
        assert_eq!(sub.cells.len(), cplx.cells.len());
    }
}
