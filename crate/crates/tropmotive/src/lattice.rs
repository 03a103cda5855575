//! Exact integer linear algebra over free lattices: normal forms, kernels,
//! saturation, basis completion.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::TropError;

pub type Int = BigInt;
/// A lattice element, always paired with an ambient rank by context.
pub type LatticeVector = Vec<Int>;

pub fn vec_from_i64(v: &[i64]) -> LatticeVector {
    v.iter().map(|&x| Int::from(x)).collect()
}

pub fn dot(a: &[Int], b: &[Int]) -> Int {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn is_zero_vec(v: &[Int]) -> bool {
    v.iter().all(|x| x.is_zero())
}

pub fn neg_vec(v: &[Int]) -> LatticeVector {
    v.iter().map(|x| -x).collect()
}

pub fn add_vec(a: &[Int], b: &[Int]) -> LatticeVector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale_vec(c: &Int, v: &[Int]) -> LatticeVector {
    v.iter().map(|x| c * x).collect()
}

/// a*x + b*y componentwise.
pub fn comb_vec(a: &Int, x: &[Int], b: &Int, y: &[Int]) -> LatticeVector {
    x.iter().zip(y).map(|(p, q)| a * p + b * q).collect()
}

/// Divide by the gcd of the entries, keeping the direction. Zero stays zero.
pub fn primitive(v: &[Int]) -> LatticeVector {
    let mut g = Int::zero();
    for x in v {
        g = g.gcd(x);
    }
    if g.is_zero() || g.is_one() {
        return v.to_vec();
    }
    v.iter().map(|x| x / &g).collect()
}

/// An integer matrix regarded as a map of lattices Z^cols -> Z^rows.
/// Column j is the image of the j-th standard basis vector.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LatticeMap {
    rows: usize,
    cols: usize,
    entries: Vec<Int>, // row-major
}

impl std::fmt::Debug for LatticeMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "LatticeMap{}x{}[", self.rows, self.cols)?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
        }
        write!(f, "]")
    }
}

impl LatticeMap {
    pub fn zero(rows: usize, cols: usize) -> Self {
        LatticeMap {
            rows,
            cols,
            entries: vec![Int::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, Int::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<LatticeVector>) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        for r in &rows {
            assert_eq!(r.len(), ncols, "ragged rows");
        }
        LatticeMap {
            rows: nrows,
            cols: ncols,
            entries: rows.into_iter().flatten().collect(),
        }
    }

    /// Build the map whose j-th column is `cols[j]`; `rows` is the codomain rank.
    pub fn from_cols(rows: usize, cols: Vec<LatticeVector>) -> Self {
        let mut m = Self::zero(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows, "column length mismatch");
            for i in 0..rows {
                m.set(i, j, c[i].clone());
            }
        }
        m
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(rows.iter().map(|r| vec_from_i64(r)).collect())
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn domain_rank(&self) -> usize {
        self.cols
    }

    pub fn codomain_rank(&self) -> usize {
        self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> &Int {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Int) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn col(&self, j: usize) -> LatticeVector {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn row(&self, i: usize) -> LatticeVector {
        (0..self.cols).map(|j| self.get(i, j).clone()).collect()
    }

    pub fn columns(&self) -> Vec<LatticeVector> {
        (0..self.cols).map(|j| self.col(j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn apply(&self, v: &[Int]) -> LatticeVector {
        assert_eq!(v.len(), self.cols, "dimension mismatch in apply");
        (0..self.rows).map(|i| dot(&self.row(i), v)).collect()
    }

    pub fn compose(&self, other: &LatticeMap) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in compose");
        let mut m = Self::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut s = Int::zero();
                for k in 0..self.cols {
                    s += self.get(i, k) * other.get(k, j);
                }
                m.set(i, j, s);
            }
        }
        m
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        for i in 0..self.rows {
            self.entries.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    fn negate_col(&mut self, a: usize) {
        for i in 0..self.rows {
            let v = -self.get(i, a).clone();
            self.set(i, a, v);
        }
    }

    /// col_b += c * col_a
    fn add_col(&mut self, a: usize, b: usize, c: &Int) {
        for i in 0..self.rows {
            let v = self.get(i, b) + c * self.get(i, a);
            self.set(i, b, v);
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn negate_row(&mut self, a: usize) {
        for j in 0..self.cols {
            let v = -self.get(a, j).clone();
            self.set(a, j, v);
        }
    }

    /// row_b += c * row_a
    fn add_row(&mut self, a: usize, b: usize, c: &Int) {
        for j in 0..self.cols {
            let v = self.get(b, j) + c * self.get(a, j);
            self.set(b, j, v);
        }
    }

    /// (row_a, row_b) <- (p row_a + q row_b, r row_a + s row_b)
    fn combine_rows(&mut self, a: usize, b: usize, p: &Int, q: &Int, r: &Int, s: &Int) {
        for j in 0..self.cols {
            let va = self.get(a, j).clone();
            let vb = self.get(b, j).clone();
            self.set(a, j, p * &va + q * &vb);
            self.set(b, j, r * &va + s * &vb);
        }
    }

    /// (col_a, col_b) <- (p col_a + q col_b, r col_a + s col_b)
    fn combine_cols(&mut self, a: usize, b: usize, p: &Int, q: &Int, r: &Int, s: &Int) {
        for i in 0..self.rows {
            let va = self.get(i, a).clone();
            let vb = self.get(i, b).clone();
            self.set(i, a, p * &va + q * &vb);
            self.set(i, b, r * &va + s * &vb);
        }
    }
}

/// Column Hermite normal form: h = m * u with u unimodular. Pivots are
/// positive and sit in strictly increasing rows as the column index grows;
/// entries left of a pivot in its row are reduced into [0, pivot).
pub fn hermite_normal_form(m: &LatticeMap) -> (LatticeMap, LatticeMap) {
    let mut h = m.clone();
    let mut u = LatticeMap::identity(m.ncols());
    let (rows, cols) = (m.nrows(), m.ncols());
    let mut pivot_col = 0usize;
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    for r in 0..rows {
        if pivot_col >= cols {
            break;
        }
        // gcd-out row r over columns pivot_col..cols
        loop {
            // find column with minimal nonzero |entry| in row r
            let mut best: Option<usize> = None;
            for j in pivot_col..cols {
                if !h.get(r, j).is_zero() {
                    match best {
                        None => best = Some(j),
                        Some(b) => {
                            if h.get(r, j).abs() < h.get(r, b).abs() {
                                best = Some(j)
                            }
                        }
                    }
                }
            }
            let Some(b) = best else { break };
            if b != pivot_col {
                h.swap_cols(b, pivot_col);
                u.swap_cols(b, pivot_col);
            }
            let mut done = true;
            for j in (pivot_col + 1)..cols {
                if !h.get(r, j).is_zero() {
                    let q = div_floor_int(h.get(r, j), h.get(r, pivot_col));
                    let c = -q;
                    h.add_col(pivot_col, j, &c);
                    u.add_col(pivot_col, j, &c);
                    if !h.get(r, j).is_zero() {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if h.get(r, pivot_col).is_zero() {
            continue;
        }
        if h.get(r, pivot_col).is_negative() {
            h.negate_col(pivot_col);
            u.negate_col(pivot_col);
        }
        // reduce earlier columns in this pivot row into [0, pivot)
        for j in 0..pivot_col {
            let q = div_floor_int(h.get(r, j), h.get(r, pivot_col));
            if !q.is_zero() {
                let c = -q;
                h.add_col(pivot_col, j, &c);
                u.add_col(pivot_col, j, &c);
            }
        }
        pivots.push((r, pivot_col));
        pivot_col += 1;
    }
    (h, u)
}

fn div_floor_int(a: &Int, b: &Int) -> Int {
    a.div_floor(b)
}

/// True iff `h` satisfies the column Hermite normal form shape produced by
/// [`hermite_normal_form`].
pub fn is_column_hnf(h: &LatticeMap) -> bool {
    let mut prev_row: Option<usize> = None;
    let mut rank = 0usize;
    for j in 0..h.ncols() {
        let lead = (0..h.nrows()).find(|&i| !h.get(i, j).is_zero());
        match lead {
            None => {
                // all later columns must also be zero
                for j2 in j..h.ncols() {
                    if (0..h.nrows()).any(|i| !h.get(i, j2).is_zero()) {
                        return false;
                    }
                }
                break;
            }
            Some(r) => {
                if let Some(p) = prev_row {
                    if r <= p {
                        return false;
                    }
                }
                if h.get(r, j).is_negative() {
                    return false;
                }
                for j2 in 0..j {
                    let e = h.get(r, j2);
                    if e.is_negative() || e >= h.get(r, j) {
                        return false;
                    }
                }
                prev_row = Some(r);
                rank += 1;
            }
        }
    }
    let _ = rank;
    true
}

/// Smith normal form data: s = u * m * v with u, v unimodular.
pub struct Snf {
    pub s: LatticeMap,
    pub u: LatticeMap,
    pub u_inv: LatticeMap,
    pub v: LatticeMap,
    pub v_inv: LatticeMap,
}

impl Snf {
    pub fn rank(&self) -> usize {
        let n = self.s.nrows().min(self.s.ncols());
        (0..n).filter(|&i| !self.s.get(i, i).is_zero()).count()
    }

    pub fn invariant_factors(&self) -> Vec<Int> {
        let n = self.s.nrows().min(self.s.ncols());
        (0..n)
            .map(|i| self.s.get(i, i).clone())
            .filter(|x| !x.is_zero())
            .collect()
    }
}

pub fn smith_normal_form(m: &LatticeMap) -> Snf {
    let mut s = m.clone();
    let mut u = LatticeMap::identity(m.nrows());
    let mut u_inv = LatticeMap::identity(m.nrows());
    let mut v = LatticeMap::identity(m.ncols());
    let mut v_inv = LatticeMap::identity(m.ncols());
    let (rows, cols) = (m.nrows(), m.ncols());
    let n = rows.min(cols);
    for t in 0..n {
        // find a nonzero pivot in the submatrix
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !s.get(i, j).is_zero() {
                    match pivot {
                        None => pivot = Some((i, j)),
                        Some((pi, pj)) => {
                            if s.get(i, j).abs() < s.get(pi, pj).abs() {
                                pivot = Some((i, j))
                            }
                        }
                    }
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        if pi != t {
            s.swap_rows(pi, t);
            u.swap_rows(pi, t);
            u_inv.swap_cols(pi, t);
        }
        if pj != t {
            s.swap_cols(pj, t);
            v.swap_cols(pj, t);
            v_inv.swap_rows(pj, t);
        }
        clear_cross(&mut s, &mut u, &mut u_inv, &mut v, &mut v_inv, t);
    }
    // enforce divisibility chain
    loop {
        let mut fixed = true;
        for t in 0..n.saturating_sub(1) {
            let a = s.get(t, t).clone();
            let b = s.get(t + 1, t + 1).clone();
            if b.is_zero() || a.is_zero() {
                continue;
            }
            if !(&b % &a).is_zero() {
                // standard trick: add column t+1 to column t, then re-reduce the 2x2 block
                let one = Int::one();
                s.add_col(t + 1, t, &one);
                v.add_col(t + 1, t, &one);
                let minus_one = -Int::one();
                v_inv.add_row(t, t + 1, &minus_one);
                // re-run reduction on the block starting at t by local elimination
                clear_cross(&mut s, &mut u, &mut u_inv, &mut v, &mut v_inv, t);
                fixed = false;
            }
        }
        if fixed {
            break;
        }
    }
    Snf { s, u, u_inv, v, v_inv }
}

/// Zero out column t below the pivot and row t right of it with 2x2
/// unimodular gcd transforms; the pivot becomes the gcd of the cross in
/// one step per entry, so entry growth stays tame. Row ops can dirty row
/// t again, so alternate until clean; the pivot strictly divides its
/// predecessor on every dirty pass, bounding the pass count.
fn clear_cross(
    s: &mut LatticeMap,
    u: &mut LatticeMap,
    u_inv: &mut LatticeMap,
    v: &mut LatticeMap,
    v_inv: &mut LatticeMap,
    t: usize,
) {
    let rows = s.nrows();
    let cols = s.ncols();
    loop {
        let mut clean = true;
        for i in (t + 1)..rows {
            if !s.get(i, t).is_zero() {
                let a = s.get(t, t).clone();
                let b = s.get(i, t).clone();
                if (&b % &a).is_zero() {
                    // plain shear leaves row t alone, so nothing gets dirty
                    let c = -(&b / &a);
                    s.add_row(t, i, &c);
                    u.add_row(t, i, &c);
                    u_inv.add_col(i, t, &-&c);
                } else {
                    // [[x, y], [-b/g, a/g]] is unimodular and sends (a, b) to (g, 0)
                    let eg = a.extended_gcd(&b);
                    let (ap, bp) = (&a / &eg.gcd, &b / &eg.gcd);
                    s.combine_rows(t, i, &eg.x, &eg.y, &-&bp, &ap);
                    u.combine_rows(t, i, &eg.x, &eg.y, &-&bp, &ap);
                    u_inv.combine_cols(t, i, &ap, &bp, &-&eg.y, &eg.x);
                    clean = false;
                }
            }
        }
        for j in (t + 1)..cols {
            if !s.get(t, j).is_zero() {
                let a = s.get(t, t).clone();
                let b = s.get(t, j).clone();
                if (&b % &a).is_zero() {
                    let c = -(&b / &a);
                    s.add_col(t, j, &c);
                    v.add_col(t, j, &c);
                    v_inv.add_row(j, t, &-&c);
                } else {
                    let eg = a.extended_gcd(&b);
                    let (ap, bp) = (&a / &eg.gcd, &b / &eg.gcd);
                    s.combine_cols(t, j, &eg.x, &eg.y, &-&bp, &ap);
                    v.combine_cols(t, j, &eg.x, &eg.y, &-&bp, &ap);
                    v_inv.combine_rows(t, j, &ap, &bp, &-&eg.y, &eg.x);
                    clean = false;
                }
            }
        }
        if clean {
            break;
        }
    }
    if s.get(t, t).is_negative() {
        s.negate_row(t);
        u.negate_row(t);
        u_inv.negate_col(t);
    }
}

/// Rank over the rationals by fraction-free (Bareiss) elimination.
pub fn rank_bareiss(m: &LatticeMap) -> usize {
    let mut a: Vec<Vec<Int>> = (0..m.nrows()).map(|i| m.row(i)).collect();
    let rows = m.nrows();
    let cols = m.ncols();
    let mut rank = 0usize;
    let mut prev = Int::one();
    let mut row = 0usize;
    for col in 0..cols {
        if row >= rows {
            break;
        }
        let piv = (row..rows).find(|&i| !a[i][col].is_zero());
        let Some(p) = piv else { continue };
        a.swap(row, p);
        for i in (row + 1)..rows {
            for j in (col + 1)..cols {
                let num = &a[row][col] * &a[i][j] - &a[i][col] * &a[row][j];
                a[i][j] = &num / &prev;
            }
            a[i][col] = Int::zero();
        }
        prev = a[row][col].clone();
        row += 1;
        rank += 1;
    }
    rank
}

/// Rank computed by two independent routes which must agree.
pub fn rank(m: &LatticeMap) -> usize {
    let r1 = rank_bareiss(m);
    let r2 = smith_normal_form(m).rank();
    assert_eq!(r1, r2, "rank disagreement between elimination and SNF");
    r1
}

/// Basis of the saturation of the column lattice of `m`:
/// the lattice of integer points in the real span of the columns.
pub fn saturate_image(m: &LatticeMap) -> Vec<LatticeVector> {
    let snf = smith_normal_form(m);
    let r = snf.rank();
    (0..r).map(|j| snf.u_inv.col(j)).collect()
}

/// Basis of the integer kernel of `m` (a saturated sublattice of the domain).
pub fn kernel_basis(m: &LatticeMap) -> Vec<LatticeVector> {
    let snf = smith_normal_form(m);
    let r = snf.rank();
    (r..m.ncols()).map(|j| snf.v.col(j)).collect()
}

/// True iff the sublattice spanned by `vs` is saturated in Z^ambient.
pub fn spans_saturated(vs: &[LatticeVector], ambient: usize) -> bool {
    if vs.is_empty() {
        return true;
    }
    let m = LatticeMap::from_cols(ambient, vs.to_vec());
    let snf = smith_normal_form(&m);
    if snf.rank() != vs.len() {
        return false; // linearly dependent input does not span a rank-|vs| lattice
    }
    snf.invariant_factors().iter().all(|f| f.is_one())
}

/// Extend `vs` (spanning a saturated sublattice) to a basis of Z^ambient.
/// Returns the full basis, beginning with `vs` itself.
pub fn complete_to_basis(
    vs: &[LatticeVector],
    ambient: usize,
) -> Result<Vec<LatticeVector>, TropError> {
    for v in vs {
        assert_eq!(v.len(), ambient, "vector/ambient rank mismatch");
    }
    if !spans_saturated(vs, ambient) {
        return Err(TropError::NotSaturated);
    }
    if vs.is_empty() {
        return Ok(LatticeMap::identity(ambient).columns());
    }
    let m = LatticeMap::from_cols(ambient, vs.to_vec());
    let snf = smith_normal_form(&m);
    let mut basis: Vec<LatticeVector> = vs.to_vec();
    for j in vs.len()..ambient {
        basis.push(snf.u_inv.col(j));
    }
    Ok(basis)
}

/// Signed determinant of a square map.
pub fn det(m: &LatticeMap) -> Int {
    assert_eq!(m.nrows(), m.ncols(), "det of non-square map");
    let n = m.nrows();
    if n == 0 {
        return Int::one();
    }
    // Bareiss with sign tracking
    let mut a: Vec<Vec<Int>> = (0..n).map(|i| m.row(i)).collect();
    let mut sign = Int::one();
    let mut prev = Int::one();
    for k in 0..n {
        let piv = (k..n).find(|&i| !a[i][k].is_zero());
        let Some(p) = piv else { return Int::zero() };
        if p != k {
            a.swap(p, k);
            sign = -sign;
        }
        for i in (k + 1)..n {
            for j in (k + 1)..n {
                let num = &a[k][k] * &a[i][j] - &a[i][k] * &a[k][j];
                a[i][j] = &num / &prev;
            }
            a[i][k] = Int::zero();
        }
        prev = a[k][k].clone();
    }
    sign * a[n - 1][n - 1].clone()
}

/// Solve m * x = b over the integers; None when no integral solution exists.
pub fn solve_integral(m: &LatticeMap, b: &[Int]) -> Option<LatticeVector> {
    assert_eq!(b.len(), m.nrows());
    let snf = smith_normal_form(m);
    let ub = snf.u.apply(b);
    let n = m.nrows().min(m.ncols());
    let mut y = vec![Int::zero(); m.ncols()];
    for (i, ubi) in ub.iter().enumerate() {
        if i < n && !snf.s.get(i, i).is_zero() {
            let d = snf.s.get(i, i);
            if !(ubi % d).is_zero() {
                return None;
            }
            y[i] = ubi / d;
        } else if !ubi.is_zero() {
            return None;
        }
    }
    Some(snf.v.apply(&y))
}
