//! Compressed sparse row storage for complex matrices, with the block
//! operations the assembly and boundary-condition machinery needs:
//! pattern-based accumulation, saddle-point composition, per-node rotation
//! and Dirichlet elimination.

use num_complex::Complex64;

use crate::error::Error;
use crate::{Result, C64};

/// Complex CSR matrix. Column indices are sorted within each row; the
/// pattern holds no entries beyond the declared symbolic pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrComplex {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<u32>,
    pub vals: Vec<C64>,
}

impl CsrComplex {
    /// Builds a zero matrix from per-row column lists (sorted, unique).
    pub fn from_pattern(nrows: usize, ncols: usize, pattern: Vec<Vec<u32>>) -> CsrComplex {
        assert_eq!(pattern.len(), nrows);
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        row_ptr.push(0usize);
        let mut cols = Vec::new();
        for row in &pattern {
            debug_assert!(row.windows(2).all(|w| w[0] < w[1]));
            cols.extend_from_slice(row);
            row_ptr.push(cols.len());
        }
        let nnz = cols.len();
        CsrComplex {
            nrows,
            ncols,
            row_ptr,
            cols,
            vals: vec![Complex64::new(0.0, 0.0); nnz],
        }
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    fn find(&self, r: usize, c: u32) -> Option<usize> {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        self.cols[lo..hi].binary_search(&c).ok().map(|k| lo + k)
    }

    /// Adds v to entry (r, c); the entry must exist in the pattern.
    #[inline]
    pub fn add(&mut self, r: usize, c: u32, v: C64) {
        let k = self
            .find(r, c)
            .unwrap_or_else(|| panic!("entry ({r}, {c}) not in sparsity pattern"));
        self.vals[k] += v;
    }

    pub fn get(&self, r: usize, c: u32) -> C64 {
        self.find(r, c)
            .map_or(Complex64::new(0.0, 0.0), |k| self.vals[k])
    }

    /// y = A x.
    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.ncols);
        let mut y = vec![Complex64::new(0.0, 0.0); self.nrows];
        for r in 0..self.nrows {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k] as usize];
            }
            y[r] = acc;
        }
        y
    }

    /// Residual b − A x and its relative 2-norm ‖b − Ax‖/‖b‖.
    pub fn residual(&self, x: &[C64], b: &[C64]) -> (Vec<C64>, f64) {
        let ax = self.matvec(x);
        let mut r = b.to_vec();
        let mut rn = 0.0;
        let mut bn = 0.0;
        for i in 0..b.len() {
            r[i] -= ax[i];
            rn += r[i].norm_sqr();
            bn += b[i].norm_sqr();
        }
        let rel = if bn > 0.0 {
            (rn / bn).sqrt()
        } else {
            rn.sqrt()
        };
        (r, rel)
    }

    /// Transposed copy (no conjugation).
    pub fn transpose(&self) -> CsrComplex {
        let mut counts = vec![0usize; self.ncols];
        for &c in &self.cols {
            counts[c as usize] += 1;
        }
        let mut row_ptr = Vec::with_capacity(self.ncols + 1);
        row_ptr.push(0);
        for c in 0..self.ncols {
            row_ptr.push(row_ptr[c] + counts[c]);
        }
        let mut cols = vec![0u32; self.nnz()];
        let mut vals = vec![Complex64::new(0.0, 0.0); self.nnz()];
        let mut cursor = row_ptr.clone();
        for r in 0..self.nrows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.cols[k] as usize;
                let slot = cursor[c];
                cols[slot] = r as u32;
                vals[slot] = self.vals[k];
                cursor[c] += 1;
            }
        }
        CsrComplex {
            nrows: self.ncols,
            ncols: self.nrows,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn conjugate(&mut self) {
        for v in &mut self.vals {
            *v = v.conj();
        }
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<C64> {
        let mut m = nalgebra::DMatrix::from_element(
            self.nrows,
            self.ncols,
            Complex64::new(0.0, 0.0),
        );
        for r in 0..self.nrows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.cols[k] as usize)] = self.vals[k];
            }
        }
        m
    }

    /// Applies the block-diagonal orthogonal transform T·A·Tᵀ, where T
    /// rotates the 3-component block of every framed node (dofs 3n..3n+2
    /// within the leading `3·frames.len()` rows/columns). Rows of one node
    /// must share a column pattern, and node columns must be present as
    /// complete triples — both hold for patterns built from node adjacency.
    pub fn rotate_node_blocks(&mut self, frames: &[Option<nalgebra::Matrix3<f64>>]) {
        let nfr = frames.len();
        // row combine
        for (node, fr) in frames.iter().enumerate() {
            let Some(r) = fr else { continue };
            let rows = [3 * node, 3 * node + 1, 3 * node + 2];
            if rows[2] >= self.nrows {
                break;
            }
            let w = self.row_ptr[rows[0] + 1] - self.row_ptr[rows[0]];
            debug_assert_eq!(self.row_ptr[rows[1] + 1] - self.row_ptr[rows[1]], w);
            debug_assert_eq!(self.row_ptr[rows[2] + 1] - self.row_ptr[rows[2]], w);
            let base = [
                self.row_ptr[rows[0]],
                self.row_ptr[rows[1]],
                self.row_ptr[rows[2]],
            ];
            for k in 0..w {
                debug_assert_eq!(self.cols[base[0] + k], self.cols[base[1] + k]);
                debug_assert_eq!(self.cols[base[0] + k], self.cols[base[2] + k]);
                let old = [
                    self.vals[base[0] + k],
                    self.vals[base[1] + k],
                    self.vals[base[2] + k],
                ];
                for i in 0..3 {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (j, o) in old.iter().enumerate() {
                        acc += r[(i, j)] * o;
                    }
                    self.vals[base[i] + k] = acc;
                }
            }
        }
        // column combine: A ← A Tᵀ
        for row in 0..self.nrows {
            let lo = self.row_ptr[row];
            let hi = self.row_ptr[row + 1];
            let mut k = lo;
            while k < hi {
                let c = self.cols[k] as usize;
                let node = c / 3;
                if node >= nfr || c % 3 != 0 {
                    k += 1;
                    continue;
                }
                let Some(r) = &frames[node] else {
                    k += 1;
                    continue;
                };
                debug_assert!(k + 2 < hi && self.cols[k + 2] == (c + 2) as u32);
                let old = [self.vals[k], self.vals[k + 1], self.vals[k + 2]];
                for i in 0..3 {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (j, o) in old.iter().enumerate() {
                        acc += o * r[(i, j)];
                    }
                    self.vals[k + i] = acc;
                }
                k += 3;
            }
        }
    }

    /// Eliminates constrained dofs: moves couplings to the right-hand side,
    /// replaces constrained rows by identity rows with the constrained
    /// value in the rhs. The pattern must contain the diagonal of every
    /// constrained dof.
    pub fn eliminate_dirichlet(&mut self, rhs: &mut [C64], constrained: &[(usize, C64)]) {
        assert_eq!(self.nrows, self.ncols);
        let mut is_fixed = vec![false; self.nrows];
        let mut value = vec![Complex64::new(0.0, 0.0); self.nrows];
        for &(d, v) in constrained {
            is_fixed[d] = true;
            value[d] = v;
        }
        for r in 0..self.nrows {
            if is_fixed[r] {
                for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                    self.vals[k] = if self.cols[k] as usize == r {
                        Complex64::new(1.0, 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    };
                }
                rhs[r] = value[r];
            } else {
                for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                    let c = self.cols[k] as usize;
                    if is_fixed[c] {
                        rhs[r] -= self.vals[k] * value[c];
                        self.vals[k] = Complex64::new(0.0, 0.0);
                    }
                }
            }
        }
    }

    /// Matrix Market "coordinate complex general" serialization (1-based).
    pub fn write_matrix_market(&self, out: &mut dyn std::io::Write) -> Result<()> {
        writeln!(out, "%%MatrixMarket matrix coordinate complex general")?;
        writeln!(out, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        for r in 0..self.nrows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                writeln!(
                    out,
                    "{} {} {:e} {:e}",
                    r + 1,
                    self.cols[k] + 1,
                    self.vals[k].re,
                    self.vals[k].im
                )?;
            }
        }
        Ok(())
    }

    /// All finite?
    pub fn is_finite(&self) -> bool {
        self.vals.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

/// Builds the saddle matrix
/// ```text
/// [ A   Bᴴ ]
/// [ B   0  ]
/// ```
/// from A (n×n) and B (m×n). The zero block carries an explicit diagonal
/// so direct solvers see a complete pivot structure.
pub fn saddle(a: &CsrComplex, b: &CsrComplex) -> Result<CsrComplex> {
    if a.nrows != a.ncols || b.ncols != a.ncols {
        return Err(Error::InvalidData(format!(
            "saddle block shapes incompatible: A {}×{}, B {}×{}",
            a.nrows, a.ncols, b.nrows, b.ncols
        )));
    }
    let n = a.nrows;
    let m = b.nrows;
    let mut bh = b.transpose();
    bh.conjugate();

    let mut row_ptr = Vec::with_capacity(n + m + 1);
    row_ptr.push(0usize);
    let mut cols = Vec::with_capacity(a.nnz() + 2 * b.nnz() + m);
    let mut vals = Vec::with_capacity(a.nnz() + 2 * b.nnz() + m);
    for r in 0..n {
        for k in a.row_ptr[r]..a.row_ptr[r + 1] {
            cols.push(a.cols[k]);
            vals.push(a.vals[k]);
        }
        for k in bh.row_ptr[r]..bh.row_ptr[r + 1] {
            cols.push(bh.cols[k] + n as u32);
            vals.push(bh.vals[k]);
        }
        row_ptr.push(cols.len());
    }
    for r in 0..m {
        for k in b.row_ptr[r]..b.row_ptr[r + 1] {
            cols.push(b.cols[k]);
            vals.push(b.vals[k]);
        }
        cols.push((n + r) as u32);
        vals.push(Complex64::new(0.0, 0.0));
        row_ptr.push(cols.len());
    }
    Ok(CsrComplex {
        nrows: n + m,
        ncols: n + m,
        row_ptr,
        cols,
        vals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> CsrComplex {
        let mut m = CsrComplex::from_pattern(3, 3, vec![vec![0, 1], vec![0, 1, 2], vec![1, 2]]);
        m.add(0, 0, Complex64::new(2.0, 0.0));
        m.add(0, 1, Complex64::new(-1.0, 0.5));
        m.add(1, 0, Complex64::new(1.0, 0.0));
        m.add(1, 1, Complex64::new(3.0, -1.0));
        m.add(1, 2, Complex64::new(0.0, 1.0));
        m.add(2, 1, Complex64::new(-2.0, 0.0));
        m.add(2, 2, Complex64::new(1.0, 1.0));
        m
    }

    #[test]
    fn matvec_and_transpose() {
        let m = small();
        let x = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
        ];
        let y = m.matvec(&x);
        let d = m.to_dense();
        let xd = nalgebra::DVector::from_vec(x.clone());
        let yd = &d * &xd;
        for i in 0..3 {
            assert!((y[i] - yd[i]).norm() < 1e-15);
        }
        let t = m.transpose().to_dense();
        assert_eq!(t, d.transpose());
    }

    #[test]
    fn dirichlet_elimination() {
        let mut m = small();
        let mut rhs = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(3.0, 0.0),
        ];
        let v = Complex64::new(0.5, -0.5);
        m.eliminate_dirichlet(&mut rhs, &[(1, v)]);
        // row 1 is the identity row carrying the value
        assert_eq!(m.get(1, 0), Complex64::new(0.0, 0.0));
        assert_eq!(m.get(1, 1), Complex64::new(1.0, 0.0));
        assert_eq!(rhs[1], v);
        // couplings moved to rhs
        assert_eq!(rhs[0], Complex64::new(1.0, 0.0) - Complex64::new(-1.0, 0.5) * v);
        assert_eq!(m.get(0, 1), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn saddle_structure() {
        let a = small();
        let mut b = CsrComplex::from_pattern(2, 3, vec![vec![0, 2], vec![1]]);
        b.add(0, 0, Complex64::new(1.0, 2.0));
        b.add(0, 2, Complex64::new(0.0, -1.0));
        b.add(1, 1, Complex64::new(4.0, 0.0));
        let s = saddle(&a, &b).unwrap();
        assert_eq!(s.nrows, 5);
        let d = s.to_dense();
        // B block
        assert_eq!(d[(3, 0)], Complex64::new(1.0, 2.0));
        assert_eq!(d[(4, 1)], Complex64::new(4.0, 0.0));
        // Bᴴ block
        assert_eq!(d[(0, 3)], Complex64::new(1.0, -2.0));
        assert_eq!(d[(1, 4)], Complex64::new(4.0, 0.0));
        assert_eq!(d[(2, 3)], Complex64::new(0.0, 1.0));
    }

    #[test]
    fn rotation_matches_dense() {
        // 2 nodes → 6 dofs, full pattern
        let n = 6usize;
        let pattern: Vec<Vec<u32>> = (0..n).map(|_| (0..n as u32).collect()).collect();
        let mut m = CsrComplex::from_pattern(n, n, pattern);
        for r in 0..n {
            for c in 0..n {
                m.add(
                    r,
                    c as u32,
                    Complex64::new((r * n + c) as f64, ((r + c) % 3) as f64),
                );
            }
        }
        let rot = nalgebra::Rotation3::from_euler_angles(0.3, -0.2, 1.1);
        let frames = vec![None, Some(*rot.matrix())];
        let dense_before = m.to_dense();
        m.rotate_node_blocks(&frames);
        // dense comparison
        let mut t = nalgebra::DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        for i in 0..3 {
            t[(i, i)] = Complex64::new(1.0, 0.0);
            for j in 0..3 {
                t[(3 + i, 3 + j)] = Complex64::new(rot.matrix()[(i, j)], 0.0);
            }
        }
        let expect = &t * dense_before * t.transpose();
        assert!((m.to_dense() - expect).norm() < 1e-12);
    }
}
