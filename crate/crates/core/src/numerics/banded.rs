use crate::error::{Error, Result};

/// Square band matrix in column-ordered band storage.
///
/// Entry `(i, j)` with `j - ku <= i <= j + kl` lives at
/// `j * ldab + (kl + ku + i - j)`; the extra `kl` rows above the band hold
/// the fill produced by partial pivoting.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    ab: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        assert!(n > 0 && kl < n.max(1) && ku < n.max(1), "bandwidths must be < n");
        let ldab = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            ldab,
            ab: vec![0.0; ldab * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lower_bandwidth(&self) -> usize {
        self.kl
    }

    pub fn upper_bandwidth(&self) -> usize {
        self.ku
    }

    #[inline]
    fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && i + self.ku >= j && j + self.kl >= i
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        j * self.ldab + self.kl + self.ku + i - j
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.ab[self.idx(i, j)]
        } else {
            0.0
        }
    }

    /// Sets entry `(i, j)`; panics outside the band.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.ab[k] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.ab[k] += v;
    }

    /// Nonzero band entries of row `i` as `(column, value)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = i.saturating_sub(self.kl);
        let hi = (i + self.ku).min(self.n - 1);
        (lo..=hi).map(move |j| (j, self.ab[self.idx(i, j)]))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| self.row(i).map(|(j, a)| a * x[j]).sum())
            .collect()
    }

    /// LU factorization with partial pivoting restricted to the band.
    pub fn factor(mut self) -> Result<BandLu> {
        let n = self.n;
        let kl = self.kl;
        let kv = self.kl + self.ku;
        let ldab = self.ldab;
        let mut ipiv = vec![0usize; n];
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let col = j * ldab;
            // Pivot: largest magnitude, lowest index on ties.
            let mut jp = 0usize;
            let mut best = self.ab[col + kv].abs();
            for p in 1..=km {
                let v = self.ab[col + kv + p].abs();
                if v > best {
                    best = v;
                    jp = p;
                }
            }
            ipiv[j] = j + jp;
            let pivot = self.ab[col + kv + jp];
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::SingularPivot { column: j });
            }
            ju = ju.max((j + self.ku + jp).min(n - 1));
            if jp != 0 {
                for c in j..=ju {
                    let base = c * ldab + kv;
                    self.ab.swap(base + j - c, base + j + jp - c);
                }
            }
            if km > 0 {
                let inv = 1.0 / self.ab[col + kv];
                for p in 1..=km {
                    self.ab[col + kv + p] *= inv;
                }
                let (head, tail) = self.ab.split_at_mut((j + 1) * ldab);
                let mult = &head[col + kv + 1..col + kv + 1 + km];
                for c in j + 1..=ju {
                    let off = (c - j - 1) * ldab;
                    let r = off + kv + j - c; // row j of column c
                    let a_jc = tail[r];
                    if a_jc != 0.0 {
                        let target = &mut tail[r + 1..r + 1 + km];
                        for (t, &l) in target.iter_mut().zip(mult) {
                            *t -= l * a_jc;
                        }
                    }
                }
            }
        }
        Ok(BandLu { lu: self, ipiv })
    }
}

/// Factors produced by [`BandMatrix::factor`].
#[derive(Debug, Clone)]
pub struct BandLu {
    lu: BandMatrix,
    ipiv: Vec<usize>,
}

impl BandLu {
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let m = &self.lu;
        let n = m.n;
        assert_eq!(b.len(), n);
        let kv = m.kl + m.ku;
        for j in 0..n {
            let l = self.ipiv[j];
            if l != j {
                b.swap(l, j);
            }
            let km = m.kl.min(n - 1 - j);
            let bj = b[j];
            if bj != 0.0 {
                let col = j * m.ldab + kv;
                for p in 1..=km {
                    b[j + p] -= m.ab[col + p] * bj;
                }
            }
        }
        for j in (0..n).rev() {
            let col = j * m.ldab;
            b[j] /= m.ab[col + kv];
            let bj = b[j];
            if bj != 0.0 {
                let top = j.saturating_sub(kv);
                for i in top..j {
                    b[i] -= m.ab[col + kv + i - j] * bj;
                }
            }
        }
    }
}

/// A band matrix with its right-hand side.
#[derive(Debug, Clone)]
pub struct BandedSystem {
    pub matrix: BandMatrix,
    pub rhs: Vec<f64>,
}

/// Solves `A x = b`.
pub fn solve_banded(sys: BandedSystem) -> Result<Vec<f64>> {
    let BandedSystem { matrix, mut rhs } = sys;
    assert_eq!(rhs.len(), matrix.n());
    let lu = matrix.factor()?;
    lu.solve_in_place(&mut rhs);
    Ok(rhs)
}
