//! Exact integer matrices, Smith normal form, and finitely generated
//! abelian groups presented as cokernels.
//!
//! Everything here is arbitrary-precision: intermediate entries of a Smith
//! reduction can grow far past machine words, and every downstream claim
//! (homology groups, signatures, certificates) is an exact equality.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::fmt;

use crate::error::LinalgError;

/// Dense integer matrix, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zero(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> BigInt) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        IntMatrix { rows, cols, data }
    }

    /// Build from row slices of machine integers. Panics on ragged input.
    pub fn from_rows_i64(rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        IntMatrix::from_fn(r, c, |i, j| BigInt::from(rows[i][j]))
    }

    pub fn from_columns(rows: usize, columns: &[Vec<BigInt>]) -> Self {
        assert!(
            columns.iter().all(|c| c.len() == rows),
            "column length mismatch"
        );
        IntMatrix::from_fn(rows, columns.len(), |i, j| columns[j][i].clone())
    }

    pub fn diagonal(rows: usize, cols: usize, diag: &[BigInt]) -> Self {
        let mut m = IntMatrix::zero(rows, cols);
        for (i, d) in diag.iter().enumerate().take(rows.min(cols)) {
            m.set(i, i, d.clone());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> IntMatrix {
        IntMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|e| e.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    if i == j {
                        self.get(i, j).is_one()
                    } else {
                        self.get(i, j).is_zero()
                    }
                })
            })
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self.get(i, j).is_zero()))
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(
            self.cols, other.rows,
            "dimension mismatch in matrix product"
        );
        let mut out = IntMatrix::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let cur = out.get(i, j) + a * b;
                    out.set(i, j, cur);
                }
            }
        }
        out
    }

    pub fn add(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        IntMatrix::from_fn(self.rows, self.cols, |i, j| {
            self.get(i, j) + other.get(i, j)
        })
    }

    pub fn sub(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        IntMatrix::from_fn(self.rows, self.cols, |i, j| {
            self.get(i, j) - other.get(i, j)
        })
    }

    pub fn neg(&self) -> IntMatrix {
        IntMatrix::from_fn(self.rows, self.cols, |i, j| -self.get(i, j))
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(
            self.cols,
            v.len(),
            "dimension mismatch in matrix-vector product"
        );
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * &v[j]).sum())
            .collect()
    }

    /// Horizontal concatenation [self | other].
    pub fn hstack(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.rows, other.rows);
        IntMatrix::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self.get(i, j).clone()
            } else {
                other.get(i, j - self.cols).clone()
            }
        })
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a.get(k, k).is_zero() {
                match (k + 1..n).find(|&i| !a.get(i, k).is_zero()) {
                    Some(i) => {
                        for j in 0..n {
                            let tmp = a.get(k, j).clone();
                            a.set(k, j, a.get(i, j).clone());
                            a.set(i, j, tmp);
                        }
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = a.get(i, j) * a.get(k, k) - a.get(i, k) * a.get(k, j);
                    a.set(i, j, &num / &prev);
                }
                a.set(i, k, BigInt::zero());
            }
            prev = a.get(k, k).clone();
        }
        sign * a.get(n - 1, n - 1).clone()
    }

    /// Rank over the rationals, via a fraction-free elimination.
    pub fn rank(&self) -> usize {
        smith_normal_form(self).rank()
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{} ", self.get(i, j))?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Result of a Smith reduction `U * M * V = D`.
///
/// `U` and `V` are unimodular; `D` is diagonal with non-negative entries
/// satisfying the divisibility chain d_1 | d_2 | ... . `u_inv` is kept so
/// that callers can read off preimages of the diagonal coordinates.
#[derive(Clone, Debug)]
pub struct SmithNormalForm {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
    pub u_inv: IntMatrix,
}

impl SmithNormalForm {
    /// Number of nonzero diagonal entries.
    pub fn rank(&self) -> usize {
        let n = self.d.rows().min(self.d.cols());
        (0..n).take_while(|&i| !self.d.get(i, i).is_zero()).count()
    }

    pub fn diagonal(&self) -> Vec<BigInt> {
        let n = self.d.rows().min(self.d.cols());
        (0..n).map(|i| self.d.get(i, i).clone()).collect()
    }

    /// Nonzero diagonal entries d_1, ..., d_r.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        self.diagonal()
            .into_iter()
            .filter(|d| !d.is_zero())
            .collect()
    }

    /// Integral kernel basis of M: the columns of V past the rank.
    pub fn kernel_basis(&self) -> Vec<Vec<BigInt>> {
        let r = self.rank();
        (r..self.v.cols()).map(|j| self.v.column(j)).collect()
    }
}

struct SmithCalc {
    a: IntMatrix,
    u: IntMatrix,
    u_inv: IntMatrix,
    v: IntMatrix,
}

impl SmithCalc {
    fn new(m: &IntMatrix) -> Self {
        SmithCalc {
            a: m.clone(),
            u: IntMatrix::identity(m.rows()),
            u_inv: IntMatrix::identity(m.rows()),
            v: IntMatrix::identity(m.cols()),
        }
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for m in [&mut self.a, &mut self.u] {
            for c in 0..m.cols() {
                let tmp = m.get(i, c).clone();
                m.set(i, c, m.get(j, c).clone());
                m.set(j, c, tmp);
            }
        }
        // row swap on the left is a column swap on the inverse
        for r in 0..self.u_inv.rows() {
            let tmp = self.u_inv.get(r, i).clone();
            self.u_inv.set(r, i, self.u_inv.get(r, j).clone());
            self.u_inv.set(r, j, tmp);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for m in [&mut self.a, &mut self.v] {
            for r in 0..m.rows() {
                let tmp = m.get(r, i).clone();
                m.set(r, i, m.get(r, j).clone());
                m.set(r, j, tmp);
            }
        }
    }

    /// R_i += c * R_j
    fn add_row_multiple(&mut self, i: usize, j: usize, c: &BigInt) {
        if c.is_zero() {
            return;
        }
        for m in [&mut self.a, &mut self.u] {
            for k in 0..m.cols() {
                let val = m.get(i, k) + c * m.get(j, k);
                m.set(i, k, val);
            }
        }
        // (E A) with E = I + c e_i e_j^T  =>  u_inv <- u_inv E^{-1}, i.e. C_j -= c * C_i
        for r in 0..self.u_inv.rows() {
            let val = self.u_inv.get(r, j) - c * self.u_inv.get(r, i);
            self.u_inv.set(r, j, val);
        }
    }

    /// C_i += c * C_j
    fn add_col_multiple(&mut self, i: usize, j: usize, c: &BigInt) {
        if c.is_zero() {
            return;
        }
        for m in [&mut self.a, &mut self.v] {
            for r in 0..m.rows() {
                let val = m.get(r, i) + c * m.get(r, j);
                m.set(r, i, val);
            }
        }
    }

    fn negate_row(&mut self, i: usize) {
        for m in [&mut self.a, &mut self.u] {
            for k in 0..m.cols() {
                let val = -m.get(i, k);
                m.set(i, k, val);
            }
        }
        for r in 0..self.u_inv.rows() {
            let val = -self.u_inv.get(r, i);
            self.u_inv.set(r, i, val);
        }
    }

    /// Smallest-absolute-value nonzero entry of the trailing submatrix,
    /// ties broken by lowest (row, col). Deterministic by construction.
    fn select_pivot(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for i in t..self.a.rows() {
            for j in t..self.a.cols() {
                let e = self.a.get(i, j);
                if e.is_zero() {
                    continue;
                }
                match best {
                    None => best = Some((i, j)),
                    Some((bi, bj)) => {
                        if e.abs() < self.a.get(bi, bj).abs() {
                            best = Some((i, j));
                        }
                    }
                }
            }
        }
        best
    }

    fn diagonalize(&mut self) -> usize {
        let mut t = 0;
        let max_t = self.a.rows().min(self.a.cols());
        while t < max_t {
            let Some((pi, pj)) = self.select_pivot(t) else {
                break;
            };
            self.swap_rows(t, pi);
            self.swap_cols(t, pj);
            loop {
                let mut clean = true;
                for i in t + 1..self.a.rows() {
                    if self.a.get(i, t).is_zero() {
                        continue;
                    }
                    let q = div_round(self.a.get(i, t), self.a.get(t, t));
                    self.add_row_multiple(i, t, &-q);
                    if !self.a.get(i, t).is_zero() {
                        clean = false;
                    }
                }
                for j in t + 1..self.a.cols() {
                    if self.a.get(t, j).is_zero() {
                        continue;
                    }
                    let q = div_round(self.a.get(t, j), self.a.get(t, t));
                    self.add_col_multiple(j, t, &-q);
                    if !self.a.get(t, j).is_zero() {
                        clean = false;
                    }
                }
                if clean {
                    break;
                }
                // a remainder strictly smaller than the pivot survives; re-pivot
                let (pi, pj) = self.select_pivot(t).expect("nonzero remainder");
                self.swap_rows(t, pi);
                self.swap_cols(t, pj);
            }
            t += 1;
        }
        t
    }

    fn normalize_signs(&mut self) {
        let n = self.a.rows().min(self.a.cols());
        for i in 0..n {
            if self.a.get(i, i).is_negative() {
                self.negate_row(i);
            }
        }
    }

    /// Column transform sending row i = (x, y) at columns (i, j) to (g, 0),
    /// where g = gcd(x, y), by a determinant-one 2x2 block.
    fn gcd_cols(&mut self, i: usize, j: usize) {
        let x = self.a.get(i, i).clone();
        let y = self.a.get(i, j).clone();
        if y.is_zero() {
            return;
        }
        let ext = x.extended_gcd(&y);
        let (g, s, t) = (ext.gcd, ext.x, ext.y);
        let a = &x / &g;
        let b = &y / &g;
        // columns (i, j): C_i' = s C_i + t C_j ; C_j' = -b C_i + a C_j
        // det = s*a + t*b = (s*x + t*y)/g = 1
        for m in [&mut self.a, &mut self.v] {
            for r in 0..m.rows() {
                let ci = m.get(r, i).clone();
                let cj = m.get(r, j).clone();
                m.set(r, i, &s * &ci + &t * &cj);
                m.set(r, j, -&b * &ci + &a * &cj);
            }
        }
    }
}

/// Round-to-nearest integer division (minimizes |a - q*b|).
fn div_round(a: &BigInt, b: &BigInt) -> BigInt {
    let (mut q, r) = a.div_rem(b);
    let two_r = BigInt::from(2) * r.abs();
    if two_r > b.abs() {
        if (a.is_negative()) ^ (b.is_negative()) {
            q -= 1;
        } else {
            q += 1;
        }
    }
    q
}

/// Smith normal form: returns (U, D, V) with U*M*V = D, U and V unimodular,
/// D diagonal, non-negative, with d_1 | d_2 | ... .
///
/// Pivoting rule: smallest absolute value, ties by lowest (row, col) index,
/// so the output is deterministic.
pub fn smith_normal_form(m: &IntMatrix) -> SmithNormalForm {
    let mut calc = SmithCalc::new(m);
    let rank = calc.diagonalize();
    // chain normalization (gcd/lcm bubbling)
    if rank > 0 {
        loop {
            let mut done = true;
            for i in 0..rank - 1 {
                let x = calc.a.get(i, i).clone();
                let y = calc.a.get(i + 1, i + 1).clone();
                if x.is_zero() || y.is_zero() || (&y % &x).is_zero() {
                    continue;
                }
                done = false;
                calc.add_row_multiple(i, i + 1, &BigInt::one());
                calc.gcd_cols(i, i + 1);
                let below = calc.a.get(i + 1, i).clone();
                if !below.is_zero() {
                    let g = calc.a.get(i, i).clone();
                    let q = &below / &g;
                    calc.add_row_multiple(i + 1, i, &-q);
                }
            }
            if done {
                break;
            }
        }
    }
    calc.normalize_signs();
    debug_assert!(calc.a.is_diagonal());
    SmithNormalForm {
        u: calc.u,
        d: calc.a,
        v: calc.v,
        u_inv: calc.u_inv,
    }
}

/// A finitely generated abelian group in normal form: free rank plus a
/// torsion chain d_1 | d_2 | ... with every d_i >= 2.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AbelianGroup {
    rank: usize,
    torsion: Vec<BigInt>,
}

impl AbelianGroup {
    pub fn free(rank: usize) -> Self {
        AbelianGroup {
            rank,
            torsion: Vec::new(),
        }
    }

    pub fn trivial() -> Self {
        AbelianGroup::free(0)
    }

    /// Normalize an arbitrary list of torsion coefficients into a divisor
    /// chain by running SNF on the diagonal presentation.
    pub fn from_invariants(rank: usize, torsion: &[BigInt]) -> Self {
        let nontrivial: Vec<BigInt> = torsion
            .iter()
            .map(|d| d.abs())
            .filter(|d| !d.is_zero() && !d.is_one())
            .collect();
        if nontrivial.is_empty() {
            return AbelianGroup::free(rank);
        }
        let n = nontrivial.len();
        let presentation = IntMatrix::diagonal(n, n, &nontrivial);
        let snf = smith_normal_form(&presentation);
        let chain: Vec<BigInt> = snf
            .invariant_factors()
            .into_iter()
            .filter(|d| !d.is_one())
            .collect();
        AbelianGroup {
            rank,
            torsion: chain,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn torsion(&self) -> &[BigInt] {
        &self.torsion
    }

    pub fn is_trivial(&self) -> bool {
        self.rank == 0 && self.torsion.is_empty()
    }

    pub fn direct_sum(&self, other: &AbelianGroup) -> AbelianGroup {
        let mut torsion = self.torsion.clone();
        torsion.extend_from_slice(&other.torsion);
        AbelianGroup::from_invariants(self.rank + other.rank, &torsion)
    }

    /// True when some torsion coefficient is divisible by `m`.
    pub fn has_torsion_divisible_by(&self, m: &BigInt) -> bool {
        if m.is_one() {
            return true;
        }
        self.torsion.iter().any(|d| (d % m).is_zero())
    }
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        match self.rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{}", r)),
        }
        for d in &self.torsion {
            parts.push(format!("Z/{}", d));
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// The cokernel of M viewed as a map into Z^rows (columns are relators).
pub fn cokernel_group(m: &IntMatrix) -> AbelianGroup {
    let snf = smith_normal_form(m);
    let rank = m.rows() - snf.rank();
    AbelianGroup::from_invariants(rank, &snf.invariant_factors())
}

/// gcd of the entries equals 1. The zero vector is rejected.
pub fn is_primitive_vector(v: &[BigInt]) -> Result<bool, LinalgError> {
    let mut g = BigInt::zero();
    for e in v {
        g = g.gcd(e);
    }
    if g.is_zero() {
        return Err(LinalgError::ZeroVector);
    }
    Ok(g.is_one())
}

/// Syntactic equality of normalized groups.
pub fn abelian_group_equal(a: &AbelianGroup, b: &AbelianGroup) -> bool {
    a == b
}
