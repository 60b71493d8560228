//! Banded matrices for the linearly implicit integrator.

/// Square matrix with `b` sub- and super-diagonals, row-major band storage.
#[derive(Debug, Clone)]
pub(crate) struct Banded {
    n: usize,
    b: usize,
    data: Vec<f64>,
}

impl Banded {
    pub fn zeros(n: usize, b: usize) -> Self {
        Self { n, b, data: vec![0.0; n * (2 * b + 1)] }
    }

    pub fn bandwidth(&self) -> usize {
        self.b
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.b >= i && j <= i + self.b);
        i * (2 * self.b + 1) + (j + self.b - i)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.b < i || j > i + self.b || j >= self.n {
            0.0
        } else {
            self.data[self.slot(i, j)]
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: f64) {
        let s = self.slot(i, j);
        self.data[s] = x;
    }

    /// `I − c A` into `out`.
    pub fn shifted_identity_into(&self, c: f64, out: &mut Banded) {
        out.n = self.n;
        out.b = self.b;
        out.data.resize(self.data.len(), 0.0);
        for (o, a) in out.data.iter_mut().zip(&self.data) {
            *o = -c * a;
        }
        for i in 0..self.n {
            let s = out.slot(i, i);
            out.data[s] += 1.0;
        }
    }

    /// In-place LU factorization without pivoting. Returns `false` on a zero
    /// pivot.
    pub fn factor(&mut self) -> bool {
        let (n, b) = (self.n, self.b);
        for k in 0..n {
            let pivot = self.get(k, k);
            if pivot == 0.0 || !pivot.is_finite() {
                return false;
            }
            for i in k + 1..(k + b + 1).min(n) {
                let s = self.slot(i, k);
                let l = self.data[s] / pivot;
                self.data[s] = l;
                for j in k + 1..(k + b + 1).min(n) {
                    let t = self.slot(i, j);
                    self.data[t] -= l * self.get(k, j);
                }
            }
        }
        true
    }

    /// Solves `LU x = rhs` in place after [`Banded::factor`].
    pub fn solve(&self, x: &mut [f64]) {
        let (n, b) = (self.n, self.b);
        for i in 0..n {
            let lo = i.saturating_sub(b);
            let mut s = x[i];
            for j in lo..i {
                s -= self.get(i, j) * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let hi = (i + b + 1).min(n);
            let mut s = x[i];
            for j in i + 1..hi {
                s -= self.get(i, j) * x[j];
            }
            x[i] = s / self.get(i, i);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_pentadiagonal_system() {
        let n = 9;
        let mut a = Banded::zeros(n, 2);
        for i in 0..n {
            for j in i.saturating_sub(2)..(i + 3).min(n) {
                let v = if i == j { 6.0 } else { 1.0 / (1.0 + (i + 2 * j) as f64) };
                a.set(i, j, v);
            }
        }
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut rhs: Vec<f64> = (0..n).map(|i| (0..n).map(|j| a.get(i, j) * x_true[j]).sum()).collect();
        let mut lu = a.clone();
        assert!(lu.factor());
        lu.solve(&mut rhs);
        for (x, y) in rhs.iter().zip(&x_true) {
            assert!((x - y).abs() < 1e-13);
        }
    }
}
