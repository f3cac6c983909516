//! Exact dense linear algebra over [`CRat`].

use super::crat::CRat;

/// Row-reduces `a` in place; returns the pivot columns.
fn row_reduce(a: &mut [Vec<CRat>], ncols: usize) -> Vec<usize> {
    let nrows = a.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].inv().expect("pivot is nonzero");
        for x in a[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, p) in row.iter_mut().zip(pivot_row.iter()) {
                if !p.is_zero() {
                    *x -= &(p * &f);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Exact inverse of a square matrix, `None` when singular.
pub fn invert_dense(m: &[Vec<CRat>]) -> Option<Vec<Vec<CRat>>> {
    let n = m.len();
    let mut aug: Vec<Vec<CRat>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            assert_eq!(row.len(), n, "matrix is not square");
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { CRat::one() } else { CRat::zero() }));
            r
        })
        .collect();
    let pivots = row_reduce(&mut aug, n);
    if pivots.len() < n || pivots.iter().enumerate().any(|(i, &p)| i != p) {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn rank(m: &[Vec<CRat>]) -> usize {
    if m.is_empty() {
        return 0;
    }
    let ncols = m[0].len();
    let mut a = m.to_vec();
    row_reduce(&mut a, ncols).len()
}

pub fn determinant(m: &[Vec<CRat>]) -> CRat {
    let n = m.len();
    let mut a = m.to_vec();
    let mut det = CRat::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return CRat::zero();
        };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= &a[c][c];
        let inv = a[c][c].inv().expect("pivot is nonzero");
        for i in c + 1..n {
            if a[i][c].is_zero() {
                continue;
            }
            let f = &a[i][c] * &inv;
            for j in c..n {
                let d = &a[c][j] * &f;
                a[i][j] -= &d;
            }
        }
    }
    det
}

/// Solves `m x = b` for square nonsingular `m`.
pub fn solve(m: &[Vec<CRat>], b: &[CRat]) -> Option<Vec<CRat>> {
    let n = m.len();
    let mut aug: Vec<Vec<CRat>> = m
        .iter()
        .zip(b.iter())
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = row_reduce(&mut aug, n);
    if pivots.len() < n {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n].clone()).collect())
}

pub fn matmul(a: &[Vec<CRat>], b: &[Vec<CRat>]) -> Vec<Vec<CRat>> {
    let k = b.len();
    let p = if k == 0 { 0 } else { b[0].len() };
    a.iter()
        .map(|row| {
            (0..p)
                .map(|j| {
                    let mut acc = CRat::zero();
                    for l in 0..k {
                        if !row[l].is_zero() && !b[l][j].is_zero() {
                            acc += &(&row[l] * &b[l][j]);
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// A sparse row: column index to nonzero entry.
pub type SparseRow = std::collections::BTreeMap<usize, CRat>;

fn axpy(dst: &mut SparseRow, src: &SparseRow, f: &CRat) {
    for (j, v) in src {
        let e = dst.entry(*j).or_default();
        *e -= &(v * f);
        if e.is_zero() {
            dst.remove(j);
        }
    }
}

/// Gauss–Jordan inverse of a sparse square matrix given by rows; the
/// result is returned row by row. `None` when singular.
pub fn sparse_inverse(rows: &[SparseRow], n: usize) -> Option<Vec<SparseRow>> {
    let mut work: Vec<(SparseRow, SparseRow)> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| (r.clone(), SparseRow::from([(i, CRat::one())])))
        .collect();
    let mut used = vec![false; work.len()];
    let mut pivot_of = vec![usize::MAX; n];
    for col in 0..n {
        let p = (0..work.len())
            .filter(|&i| !used[i] && work[i].0.contains_key(&col))
            .min_by_key(|&i| work[i].0.len() + work[i].1.len())?;
        used[p] = true;
        pivot_of[col] = p;
        let inv = work[p].0[&col].inv().expect("pivot is nonzero");
        let (l, r) = &mut work[p];
        for v in l.values_mut().chain(r.values_mut()) {
            *v *= &inv;
        }
        let (pl, pr) = work[p].clone();
        for (i, (l, r)) in work.iter_mut().enumerate() {
            if i == p {
                continue;
            }
            let Some(f) = l.get(&col).cloned() else { continue };
            axpy(l, &pl, &f);
            axpy(r, &pr, &f);
        }
    }
    Some(pivot_of.into_iter().map(|p| work[p].1.clone()).collect())
}
