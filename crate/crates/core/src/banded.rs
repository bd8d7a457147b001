//! Symmetric positive-definite banded matrices and their Cholesky factorization.

/// Lower band of a symmetric `n × n` matrix with half-bandwidth `w`.
///
/// Row `i` stores columns `i - w ..= i` contiguously, so entry `(i, j)` with
/// `0 <= i - j <= w` lives at `data[i * (w + 1) + w - (i - j)]`. Positions
/// left of column 0 in the first rows are unused zeros.
#[derive(Clone, Debug)]
pub struct SymBand {
    n: usize,
    w: usize,
    data: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NotPositiveDefinite {
    pub pivot: usize,
}

/// Dot product with four independent accumulators (fixed order, so results
/// are reproducible).
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

impl SymBand {
    pub fn zeros(n: usize, w: usize) -> Self {
        Self { n, w, data: vec![0.0; n * (w + 1)] }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.w
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.w);
        i * (self.w + 1) + self.w - (i - j)
    }

    /// Reads `(i, j)` in either triangle; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.w {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    /// Adds `v` to `(i, j)` (and by symmetry `(j, i)`).
    ///
    /// # Panics
    /// If the entry lies outside the band.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        assert!(i - j <= self.w, "entry ({i}, {j}) outside half-bandwidth {}", self.w);
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn diag(&self, i: usize) -> f64 {
        self.data[self.idx(i, i)]
    }

    pub fn add_diag(&mut self, v: f64) {
        for i in 0..self.n {
            let k = self.idx(i, i);
            self.data[k] += v;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            for j in i.saturating_sub(self.w)..=i {
                let a = self.data[self.idx(i, j)];
                y[i] += a * x[j];
                if j != i {
                    y[j] += a * x[i];
                }
            }
        }
        y
    }

    /// In-place `L Lᵀ` factorization; the band then holds `L`.
    pub fn cholesky(mut self) -> Result<BandCholesky, NotPositiveDefinite> {
        let (n, w) = (self.n, self.w);
        let s = w + 1;
        for j in 0..n {
            let lo = j.saturating_sub(w);
            // Row j covers columns j-w..=j; column k sits at offset k + w - j.
            let (head, tail) = self.data.split_at_mut((j + 1) * s);
            let row_j = &mut head[j * s..];
            let d = row_j[w] - dot(&row_j[lo + w - j..w], &row_j[lo + w - j..w]);
            if !(d > 0.0) || !d.is_finite() {
                return Err(NotPositiveDefinite { pivot: j });
            }
            let d = d.sqrt();
            row_j[w] = d;
            let row_j = &*row_j;
            let hi = (j + w).min(n - 1);
            for i in j + 1..=hi {
                let row_i = &mut tail[(i - j - 1) * s..(i - j) * s];
                let klo = i.saturating_sub(w);
                let v = row_i[j + w - i] - dot(&row_i[klo + w - i..j + w - i], &row_j[klo + w - j..w]);
                row_i[j + w - i] = v / d;
            }
        }
        Ok(BandCholesky { l: self })
    }
}

#[derive(Clone, Debug)]
pub struct BandCholesky {
    l: SymBand,
}

impl BandCholesky {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, w) = (self.l.n, self.l.w);
        let s = w + 1;
        let d = &self.l.data;
        let mut y = b.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(w);
            let row = &d[i * s..(i + 1) * s];
            let v = y[i] - dot(&row[lo + w - i..w], &y[lo..i]);
            y[i] = v / row[w];
        }
        for i in (0..n).rev() {
            let mut v = y[i];
            for k in i + 1..=(i + w).min(n - 1) {
                v -= d[k * s + w - (k - i)] * y[k];
            }
            y[i] = v / d[i * s + w];
        }
        y
    }
}
