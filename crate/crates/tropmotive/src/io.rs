//! JSON schemas for fans, complexes, models, and coefficient expressions,
//! with conversions to and from the in-memory types.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::complex::{Cell, FaceRel, IntegralConeComplex};
use crate::cone::Cone;
use crate::error::TropError;
use crate::fan::Fan;
use crate::lattice::{Int, LatticeMap, LatticeVector};
use crate::motivic::{MotivicElement, SymbolTable};
use crate::snc::{Divisor, SncModel, Stratum};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct FanDoc {
    pub rank: usize,
    pub rays: Vec<Vec<i64>>,
    /// Maximal cones, as ray index lists.
    pub cones: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct CellDoc {
    pub id: String,
    pub rank: usize,
    pub cone_rays: Vec<Vec<i64>>,
    pub gtrop: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct FaceDoc {
    pub cell: String,
    pub face: String,
    pub map: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ComplexDoc {
    pub target_rank: usize,
    pub cells: Vec<CellDoc>,
    pub faces: Vec<FaceDoc>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct TermDoc {
    pub coeff: i64,
    pub symbol: String,
    #[serde(rename = "Lpow")]
    pub lpow: i64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct DivisorDoc {
    pub name: String,
    pub val: Vec<i64>,
    pub m: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct StratumDoc {
    #[serde(rename = "S")]
    pub s: Vec<String>,
    pub dim: i64,
    pub class: Vec<TermDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub meets_xdelta: Option<bool>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct SymbolDoc {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<i64>,
    /// Optional rewrite rule, as a unit-symbol expression.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<Vec<TermDoc>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ModelDoc {
    pub target_rank: usize,
    pub x_dim: i64,
    pub fan: FanDoc,
    pub divisors: Vec<DivisorDoc>,
    pub nerve_maximal: Vec<Vec<String>>,
    pub strata: Vec<StratumDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub symbols: Vec<SymbolDoc>,
}

fn malformed(msg: impl Into<String>) -> TropError {
    TropError::Malformed(msg.into())
}

pub fn vec_to_i64(v: &[Int]) -> Result<Vec<i64>, TropError> {
    v.iter()
        .map(|x| x.try_into().map_err(|_| malformed("integer too large for output")))
        .collect()
}

pub fn vec_from_doc(v: &[i64]) -> LatticeVector {
    v.iter().map(|&x| Int::from(x)).collect()
}

pub fn matrix_to_doc(m: &LatticeMap) -> Result<Vec<Vec<i64>>, TropError> {
    (0..m.nrows()).map(|i| vec_to_i64(&m.row(i))).collect()
}

pub fn matrix_from_doc(rows: &[Vec<i64>], ncols_hint: usize) -> Result<LatticeMap, TropError> {
    if rows.is_empty() {
        return Ok(LatticeMap::zero(0, ncols_hint));
    }
    let ncols = rows[0].len();
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(malformed("ragged matrix"));
    }
    Ok(LatticeMap::from_rows(rows.iter().map(|r| vec_from_doc(r)).collect()))
}

pub fn fan_to_doc(fan: &Fan) -> Result<FanDoc, TropError> {
    let maximal = fan.maximal_cones();
    let mut rays: Vec<LatticeVector> = Vec::new();
    for c in &maximal {
        for r in c.rays() {
            if !rays.contains(r) {
                rays.push(r.clone());
            }
        }
    }
    rays.sort();
    let mut cones: Vec<Vec<usize>> = maximal
        .iter()
        .map(|c| {
            let mut idx: Vec<usize> = c
                .rays()
                .iter()
                .map(|r| rays.iter().position(|x| x == r).unwrap())
                .collect();
            idx.sort_unstable();
            idx
        })
        .collect();
    cones.sort();
    Ok(FanDoc {
        rank: fan.ambient_rank(),
        rays: rays.iter().map(|r| vec_to_i64(r)).collect::<Result<_, _>>()?,
        cones,
    })
}

pub fn fan_from_doc(doc: &FanDoc) -> Result<Fan, TropError> {
    let rays: Vec<LatticeVector> = doc.rays.iter().map(|r| vec_from_doc(r)).collect();
    if rays.iter().any(|r| r.len() != doc.rank) {
        return Err(malformed("ray of wrong rank"));
    }
    let mut cones = Vec::new();
    if doc.cones.is_empty() && !rays.is_empty() {
        return Err(malformed("rays listed but no cones"));
    }
    for idxs in &doc.cones {
        let gens: Vec<LatticeVector> = idxs
            .iter()
            .map(|&i| rays.get(i).cloned().ok_or_else(|| malformed("ray index out of range")))
            .collect::<Result<_, _>>()?;
        cones.push(Cone::from_generators(doc.rank, &gens, &[]));
    }
    if cones.is_empty() {
        cones.push(Cone::zero(doc.rank));
    }
    Fan::from_cones(doc.rank, cones)
}

pub fn motivic_to_doc(e: &MotivicElement) -> Result<Vec<TermDoc>, TropError> {
    e.terms()
        .map(|(s, k, c)| {
            Ok(TermDoc {
                coeff: c.try_into().map_err(|_| malformed("coefficient too large"))?,
                symbol: s.to_string(),
                lpow: k,
            })
        })
        .collect()
}

pub fn motivic_from_doc(doc: &[TermDoc], table: &SymbolTable) -> MotivicElement {
    let mut out = MotivicElement::zero();
    for t in doc {
        out += table.term(Int::from(t.coeff), &t.symbol, t.lpow);
    }
    out
}

pub fn complex_to_doc(c: &IntegralConeComplex) -> Result<ComplexDoc, TropError> {
    Ok(ComplexDoc {
        target_rank: c.target_rank,
        cells: c
            .cells
            .iter()
            .map(|cell| {
                Ok(CellDoc {
                    id: cell.id.clone(),
                    rank: cell.rank,
                    cone_rays: cell
                        .cone
                        .rays()
                        .iter()
                        .map(|r| vec_to_i64(r))
                        .collect::<Result<_, _>>()?,
                    gtrop: matrix_to_doc(&cell.gtrop)?,
                })
            })
            .collect::<Result<_, TropError>>()?,
        faces: c
            .faces
            .iter()
            .map(|r| {
                Ok(FaceDoc {
                    cell: c.cells[r.cell].id.clone(),
                    face: c.cells[r.face].id.clone(),
                    map: matrix_to_doc(&r.map)?,
                })
            })
            .collect::<Result<_, TropError>>()?,
    })
}

pub fn complex_from_doc(doc: &ComplexDoc) -> Result<IntegralConeComplex, TropError> {
    let mut cells = Vec::new();
    for cd in &doc.cells {
        let rays: Vec<LatticeVector> = cd.cone_rays.iter().map(|r| vec_from_doc(r)).collect();
        if rays.iter().any(|r| r.len() != cd.rank) {
            return Err(malformed(format!("cell {} has rays of wrong rank", cd.id)));
        }
        let gtrop = matrix_from_doc(&cd.gtrop, cd.rank)?;
        if gtrop.nrows() != doc.target_rank || gtrop.ncols() != cd.rank {
            return Err(malformed(format!("cell {} gtrop has wrong shape", cd.id)));
        }
        cells.push(Cell {
            id: cd.id.clone(),
            rank: cd.rank,
            cone: Cone::from_generators(cd.rank, &rays, &[]),
            gtrop,
        });
    }
    let index: BTreeMap<&str, usize> = cells
        .iter()
        .enumerate()
        .map(|(i, c)| (c.id.as_str(), i))
        .collect();
    if index.len() != cells.len() {
        return Err(malformed("duplicate cell ids"));
    }
    let mut faces = Vec::new();
    for fd in &doc.faces {
        let cell = *index
            .get(fd.cell.as_str())
            .ok_or_else(|| malformed(format!("unknown cell id {}", fd.cell)))?;
        let face = *index
            .get(fd.face.as_str())
            .ok_or_else(|| malformed(format!("unknown cell id {}", fd.face)))?;
        faces.push(FaceRel {
            cell,
            face,
            map: matrix_from_doc(&fd.map, cells[face].rank)?,
        });
    }
    let out = IntegralConeComplex { target_rank: doc.target_rank, cells, faces };
    out.check_valid()?;
    Ok(out)
}

pub fn symbol_table_from_doc(doc: &ModelDoc) -> Result<SymbolTable, TropError> {
    let mut table = SymbolTable::new();
    for s in &doc.symbols {
        if let Some(d) = s.dim {
            table.set_dim(&s.name, d);
        }
        if let Some(v) = &s.value {
            let plain = SymbolTable::new();
            table.set_rule(&s.name, motivic_from_doc(v, &plain))?;
        }
    }
    Ok(table)
}

pub fn model_from_doc(doc: &ModelDoc) -> Result<SncModel, TropError> {
    let table = symbol_table_from_doc(doc)?;
    let fan = fan_from_doc(&doc.fan)?;
    if doc.fan.rank != doc.target_rank {
        return Err(malformed("fan rank differs from target rank"));
    }
    let nerve_maximal: Vec<BTreeSet<String>> = doc
        .nerve_maximal
        .iter()
        .map(|f| f.iter().cloned().collect())
        .collect();
    let nerve = SncModel::close_nerve(&nerve_maximal);
    let mut strata = BTreeMap::new();
    for sd in &doc.strata {
        let key: BTreeSet<String> = sd.s.iter().cloned().collect();
        strata.insert(
            key,
            Stratum {
                class: motivic_from_doc(&sd.class, &table),
                dim: sd.dim,
                meets_xdelta: sd.meets_xdelta,
            },
        );
    }
    Ok(SncModel {
        target_rank: doc.target_rank,
        x_dim: doc.x_dim,
        divisors: doc
            .divisors
            .iter()
            .map(|d| Divisor { name: d.name.clone(), val: vec_from_doc(&d.val), m: d.m })
            .collect(),
        nerve,
        strata,
        ambient_fan: fan,
    })
}
