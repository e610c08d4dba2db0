//! Square matrices over `ℚ(i)[z]` and their normal forms.

use std::fmt;

use serde::Serialize;

use super::HeckeError;
use crate::exact::{ExactScalar, Poly};

/// An `n×n` polynomial matrix whose columns span a full-rank lattice in `O^n`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PolyMatrix {
    rows: Vec<Vec<Poly>>,
}

impl PolyMatrix {
    /// Builds a matrix from rows, rejecting ragged input and zero determinants.
    pub fn from_rows(rows: Vec<Vec<Poly>>) -> Result<Self, HeckeError> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(HeckeError::DimensionMismatch { expected: n, found: rows.first().map_or(0, Vec::len) });
        }
        let m = Self { rows };
        if m.det().is_zero() {
            return Err(HeckeError::SingularMatrix);
        }
        Ok(m)
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal((0..n).map(|_| Poly::one()).collect())
    }

    pub fn diagonal(entries: Vec<Poly>) -> Self {
        let n = entries.len();
        let mut rows = vec![vec![Poly::zero(); n]; n];
        for (i, p) in entries.into_iter().enumerate() {
            rows[i][i] = p;
        }
        Self { rows }
    }

    /// Constant matrix.
    pub fn constant(entries: &[Vec<ExactScalar>]) -> Self {
        Self {
            rows: entries
                .iter()
                .map(|r| r.iter().map(|c| Poly::constant(c.clone())).collect())
                .collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> &Poly {
        &self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<Poly>] {
        &self.rows
    }

    pub fn mul(&self, other: &PolyMatrix) -> PolyMatrix {
        let n = self.size();
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        (0..n).fold(Poly::zero(), |acc, k| &acc + &(&self.rows[i][k] * &other.rows[k][j]))
                    })
                    .collect()
            })
            .collect();
        Self { rows }
    }

    pub fn eval(&self, x: &ExactScalar) -> Vec<Vec<ExactScalar>> {
        self.rows.iter().map(|r| r.iter().map(|p| p.eval(x)).collect()).collect()
    }

    /// Maximum entry degree, `None` for the zero matrix.
    pub fn max_degree(&self) -> Option<usize> {
        self.rows.iter().flatten().filter_map(Poly::degree).max()
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> Poly {
        let n = self.size();
        let mut a = self.rows.clone();
        let mut sign = false;
        let mut prev = Poly::one();
        for k in 0..n {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                    Some(r) => {
                        a.swap(k, r);
                        sign = !sign;
                    }
                    None => return Poly::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &(&a[i][j] * &a[k][k]) - &(&a[i][k] * &a[k][j]);
                    let (q, r) = num.div_rem(&prev);
                    debug_assert!(r.is_zero(), "Bareiss division must be exact");
                    a[i][j] = q;
                }
            }
            prev = a[k][k].clone();
        }
        let d = a[n - 1][n - 1].clone();
        if sign {
            -&d
        } else {
            d
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        for row in &mut self.rows {
            row.swap(a, b);
        }
    }

    /// `col[target] -= factor * col[source]`.
    fn col_axpy(&mut self, target: usize, source: usize, factor: &Poly) {
        for row in &mut self.rows {
            let delta = &row[source] * factor;
            row[target] = &row[target] - &delta;
        }
    }

    fn scale_col(&mut self, col: usize, c: &ExactScalar) {
        for row in &mut self.rows {
            row[col] = row[col].scale(c);
        }
    }

    fn row_axpy(&mut self, target: usize, source: usize, factor: &Poly) {
        let delta: Vec<Poly> = self.rows[source].iter().map(|p| p * factor).collect();
        for (t, d) in self.rows[target].iter_mut().zip(&delta) {
            *t = &*t - d;
        }
    }

    /// Column-style Hermite normal form: lower triangular, monic diagonal,
    /// and each entry left of the diagonal reduced modulo the diagonal entry of
    /// its row. Two matrices have the same column lattice iff their forms agree.
    pub fn hermite_normal_form(&self) -> PolyMatrix {
        Self::lattice_spanned_by(self.rows.clone())
    }

    /// Hermite normal form of the lattice spanned by the columns of an
    /// `n×k` generator matrix, `k ≥ n`, of full rank `n`.
    pub(crate) fn lattice_spanned_by(rows: Vec<Vec<Poly>>) -> PolyMatrix {
        let n = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self { rows };
        for r in 0..n {
            loop {
                let pivot = (r..cols)
                    .filter(|&c| !m.rows[r][c].is_zero())
                    .min_by_key(|&c| m.rows[r][c].degree());
                let Some(pivot) = pivot else {
                    panic!("hermite normal form requires generators of full rank");
                };
                m.swap_cols(r, pivot);
                let mut done = true;
                for c in r + 1..cols {
                    if m.rows[r][c].is_zero() {
                        continue;
                    }
                    let (q, rem) = m.rows[r][c].div_rem(&m.rows[r][r]);
                    m.col_axpy(c, r, &q);
                    if !rem.is_zero() {
                        done = false;
                    }
                }
                if done {
                    break;
                }
            }
            let lead = m.rows[r][r].leading().unwrap().inv();
            m.scale_col(r, &lead);
            for c in 0..r {
                let (q, _) = m.rows[r][c].div_rem(&m.rows[r][r]);
                if !q.is_zero() {
                    m.col_axpy(c, r, &q);
                }
            }
        }
        for row in &mut m.rows {
            row.truncate(n);
        }
        m
    }

    /// Monic invariant factors `d₁ | d₂ | … | dₙ` of the Smith normal form.
    pub fn smith_invariants(&self) -> Vec<Poly> {
        let n = self.size();
        let mut m = self.clone();
        for t in 0..n {
            loop {
                let pivot = (t..n)
                    .flat_map(|i| (t..n).map(move |j| (i, j)))
                    .filter(|&(i, j)| !m.rows[i][j].is_zero())
                    .min_by_key(|&(i, j)| m.rows[i][j].degree());
                let Some((pi, pj)) = pivot else {
                    // Remaining block is zero: the remaining invariants vanish.
                    break;
                };
                m.rows.swap(t, pi);
                m.swap_cols(t, pj);
                let mut clean = true;
                for i in t + 1..n {
                    if m.rows[i][t].is_zero() {
                        continue;
                    }
                    let (q, rem) = m.rows[i][t].div_rem(&m.rows[t][t]);
                    m.row_axpy(i, t, &q);
                    clean &= rem.is_zero();
                }
                for j in t + 1..n {
                    if m.rows[t][j].is_zero() {
                        continue;
                    }
                    let (q, rem) = m.rows[t][j].div_rem(&m.rows[t][t]);
                    m.col_axpy(j, t, &q);
                    clean &= rem.is_zero();
                }
                if !clean {
                    continue;
                }
                // The pivot must divide the whole remaining block.
                let offender = (t + 1..n)
                    .flat_map(|i| (t + 1..n).map(move |j| (i, j)))
                    .find(|&(i, j)| !m.rows[i][j].div_rem(&m.rows[t][t]).1.is_zero());
                match offender {
                    Some((i, _)) => m.row_axpy(t, i, &(-&Poly::one())),
                    None => break,
                }
            }
        }
        (0..n).map(|i| m.rows[i][i].monic()).collect()
    }

    /// Exponents of `(z − x)` in the invariant factors, ascending.
    pub fn local_exponents(&self, x: &ExactScalar) -> Vec<usize> {
        let mut exps: Vec<usize> = self
            .smith_invariants()
            .iter()
            .map(|p| p.order_at(x).unwrap_or(usize::MAX))
            .collect();
        exps.sort_unstable();
        exps
    }

    /// Invariant factors as ratios of determinantal divisors, the monic gcds
    /// of all `k×k` minors. Exponential in `n`; a cross-check for
    /// [`Self::smith_invariants`] on small matrices.
    pub fn invariant_factors_from_minors(&self) -> Vec<Poly> {
        let n = self.size();
        let mut prev = Poly::one();
        let mut factors = Vec::with_capacity(n);
        for k in 1..=n {
            let subsets = subsets(n, k);
            let mut g = Poly::zero();
            for rows in &subsets {
                for cols in &subsets {
                    let minor = PolyMatrix {
                        rows: rows.iter().map(|&r| cols.iter().map(|&c| self.rows[r][c].clone()).collect()).collect(),
                    };
                    g = Poly::gcd(&g, &minor.det());
                }
            }
            factors.push(g.div_rem(&prev).0.monic());
            prev = g;
        }
        factors
    }
}

impl fmt::Display for PolyMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

impl Serialize for PolyMatrix {
    /// Rows of entries, each entry a coefficient list lowest degree first.
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.rows.serialize(serializer)
    }
}

/// Gaussian elimination over `ℚ(i)`: returns the row-reduced echelon form and pivot columns.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    (k - 1..n)
        .flat_map(|last| {
            subsets(last, k - 1).into_iter().map(move |mut s| {
                s.push(last);
                s
            })
        })
        .collect()
}

pub(crate) fn row_echelon(rows: &[Vec<ExactScalar>]) -> (Vec<Vec<ExactScalar>>, Vec<usize>) {
    let mut a = rows.to_vec();
    let n_rows = a.len();
    let n_cols = a.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n_cols {
        let Some(p) = (r..n_rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].inv();
        for v in &mut a[r] {
            *v = &*v * &inv;
        }
        for i in 0..n_rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..n_cols {
                    let delta = &f * &a[r][j];
                    a[i][j] = &a[i][j] - &delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == n_rows {
            break;
        }
    }
    (a, pivots)
}

/// Basis of `{v : A v = 0}`.
pub(crate) fn nullspace(rows: &[Vec<ExactScalar>]) -> Vec<Vec<ExactScalar>> {
    let n_cols = rows.first().map_or(0, Vec::len);
    let (rref, pivots) = row_echelon(rows);
    (0..n_cols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![ExactScalar::zero(); n_cols];
            v[free] = ExactScalar::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -&rref[r][free];
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(rows: Vec<Vec<Poly>>) -> PolyMatrix {
        PolyMatrix { rows }
    }

    fn p(coeffs: &[i64]) -> Poly {
        Poly::new(coeffs.iter().map(|&c| ExactScalar::from_int(c)).collect())
    }

    #[test]
    fn determinant_of_small_matrices() {
        let m = raw(vec![vec![p(&[0, 1]), p(&[1])], vec![p(&[2]), p(&[0, 0, 1])]]);
        // z·z² − 2
        assert_eq!(m.det(), p(&[-2, 0, 0, 1]));
        let swap = raw(vec![vec![p(&[]), p(&[1])], vec![p(&[1]), p(&[])]]);
        assert_eq!(swap.det(), p(&[-1]));
        assert!(PolyMatrix::from_rows(vec![vec![p(&[1]), p(&[1])], vec![p(&[1]), p(&[1])]]).is_err());
    }

    #[test]
    fn hermite_form_is_a_lattice_invariant() {
        let m = raw(vec![
            vec![p(&[0, 1]), p(&[1, 1]), p(&[])],
            vec![p(&[]), p(&[2]), p(&[0, 0, 1])],
            vec![p(&[1]), p(&[]), p(&[3])],
        ]);
        let u = raw(vec![
            vec![p(&[1]), p(&[0, 5]), p(&[1, 1])],
            vec![p(&[]), p(&[1]), p(&[0, 0, 2])],
            vec![p(&[]), p(&[]), p(&[-1])],
        ]);
        let h = m.hermite_normal_form();
        assert_eq!(m.mul(&u).hermite_normal_form(), h);
        for i in 0..3 {
            assert!(h.entry(i, i).leading().unwrap().is_one());
            for j in i + 1..3 {
                assert!(h.entry(i, j).is_zero());
            }
        }
        assert_eq!(h.det(), m.det().monic());
    }

    #[test]
    fn smith_of_twisted_identity() {
        let z = p(&[0, 1]);
        let m = raw(vec![vec![p(&[]), z.clone()], vec![z.clone(), p(&[])]]);
        assert_eq!(m.smith_invariants(), vec![z.clone(), z.clone()]);
        let n = raw(vec![vec![z.clone(), p(&[1])], vec![p(&[]), z.clone()]]);
        assert_eq!(n.smith_invariants(), vec![p(&[1]), &z * &z]);
        assert_eq!(n.local_exponents(&ExactScalar::zero()), vec![0, 2]);
    }

    #[test]
    fn minors_agree_with_elimination() {
        let m = raw(vec![vec![p(&[0, 1]), p(&[1])], vec![p(&[0]), p(&[0, 0, 1])]]);
        assert_eq!(m.invariant_factors_from_minors(), m.smith_invariants());
    }

    #[test]
    fn nullspace_basis() {
        let s = |v: i64| ExactScalar::from_int(v);
        let rows = vec![vec![s(1), s(2), s(3)], vec![s(2), s(4), s(6)]];
        let ns = nullspace(&rows);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            let dot = rows[0].iter().zip(v).fold(ExactScalar::zero(), |acc, (a, b)| &acc + &(a * b));
            assert!(dot.is_zero());
        }
    }
}
