//! Elementary symmetric functions of principal curvatures.
//!
//! Everything here works on a [`CurvatureVector`], the `n` principal
//! curvatures of a hypersurface at one point. The curvature function driving
//! the flow is `F = H_k^{1/k}` with `H_k = σ_k / C(n, k)`, which is elliptic
//! and concave on the Gårding cone `Γ_k`.

use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Inline capacity for per-point curvature storage. Larger dimensions spill
/// to the heap.
pub const INLINE_DIM: usize = 4;

pub(crate) type Scalars = SmallVec<[f64; INLINE_DIM]>;

/// The principal curvatures `κ_1, …, κ_n` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureVector {
    kappa: Scalars,
}

impl CurvatureVector {
    /// Builds a curvature vector, rejecting `n < 2` and non-finite entries.
    pub fn new(kappa: &[f64]) -> Result<Self> {
        if kappa.len() < 2 {
            return Err(Error::Domain(format!(
                "curvature vector needs n >= 2 entries, got {}",
                kappa.len()
            )));
        }
        if let Some(bad) = kappa.iter().find(|x| !x.is_finite()) {
            return Err(Error::Domain(format!("non-finite principal curvature {bad}")));
        }
        Ok(Self { kappa: kappa.iter().copied().collect() })
    }

    /// `n` copies of `c`: the curvatures of a sphere of radius `1/c`.
    pub fn umbilic(n: usize, c: f64) -> Result<Self> {
        Self::new(&vec![c; n])
    }

    pub(crate) fn from_scalars(kappa: Scalars) -> Self {
        debug_assert!(kappa.len() >= 2);
        Self { kappa }
    }

    pub fn n(&self) -> usize {
        self.kappa.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.kappa
    }

    pub fn min(&self) -> f64 {
        self.kappa.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.kappa.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Harmonic curvature `Σ 1/κ_i`. Only meaningful on `Γ_n`.
    pub fn harmonic(&self) -> f64 {
        self.kappa.iter().map(|k| 1.0 / k).sum()
    }

    /// Shifts every curvature by `t`, i.e. `κ + t·(1, …, 1)`.
    pub fn shifted(&self, t: f64) -> Self {
        Self { kappa: self.kappa.iter().map(|k| k + t).collect() }
    }
}

/// Largest `k` with `κ ∈ Γ_k`; `0` when even `H_1 ≤ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct ConeClass {
    pub max_k: usize,
}

impl ConeClass {
    pub fn contains(self, k: usize) -> bool {
        k <= self.max_k
    }
}

/// Value and diagonal derivatives of `F = H_k^{1/k}` at a diagonal
/// Weingarten matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmDerivatives {
    pub f_value: f64,
    pub f_diag: Vec<f64>,
}

/// Binomial coefficient as a float. Exact for the small arguments used here.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c.round()
}

/// Writes `σ_0, …, σ_k` of `values` (skipping index `skip`, if any) into
/// `out[0..=k]`, absorbing one variable at a time.
fn elementary_into(values: &[f64], skip: Option<usize>, k: usize, out: &mut [f64]) {
    out[..=k].iter_mut().for_each(|e| *e = 0.0);
    out[0] = 1.0;
    let mut absorbed = 0usize;
    for (i, &x) in values.iter().enumerate() {
        if Some(i) == skip {
            continue;
        }
        absorbed += 1;
        for j in (1..=absorbed.min(k)).rev() {
            out[j] += x * out[j - 1];
        }
    }
}

/// `σ_0, …, σ_k` in one pass.
pub fn sigma_all(kappa: &CurvatureVector, k: usize) -> Result<Vec<f64>> {
    check_index(kappa, k)?;
    let mut out = vec![0.0; k + 1];
    elementary_into(kappa.as_slice(), None, k, &mut out);
    Ok(out)
}

fn check_index(kappa: &CurvatureVector, k: usize) -> Result<()> {
    if k > kappa.n() {
        return Err(Error::Domain(format!(
            "index k = {k} out of range 0..={}",
            kappa.n()
        )));
    }
    Ok(())
}

/// The `k`-th elementary symmetric polynomial `σ_k(κ)`, with `σ_0 = 1`.
pub fn sigma_k(kappa: &CurvatureVector, k: usize) -> Result<f64> {
    check_index(kappa, k)?;
    let mut buf: Scalars = smallvec::smallvec![0.0; k + 1];
    elementary_into(kappa.as_slice(), None, k, &mut buf);
    Ok(buf[k])
}

/// `σ_k(κ|i)`: `σ_k` with `κ_i` removed. Recomputed from scratch, never by
/// dividing out `κ_i` (which may vanish).
pub fn sigma_k_without(kappa: &CurvatureVector, k: usize, i: usize) -> Result<f64> {
    if i >= kappa.n() {
        return Err(Error::Domain(format!("index i = {i} out of range 0..{}", kappa.n())));
    }
    if k > kappa.n() - 1 {
        return Ok(0.0);
    }
    let mut buf: Scalars = smallvec::smallvec![0.0; k + 1];
    elementary_into(kappa.as_slice(), Some(i), k, &mut buf);
    Ok(buf[k])
}

/// Normalized `H_k = σ_k / C(n, k)`.
pub fn normalized_hk(kappa: &CurvatureVector, k: usize) -> Result<f64> {
    Ok(sigma_k(kappa, k)? / binomial(kappa.n(), k))
}

/// All normalized `H_0, …, H_n`.
pub fn normalized_all(kappa: &CurvatureVector) -> Vec<f64> {
    let n = kappa.n();
    let mut out = vec![0.0; n + 1];
    elementary_into(kappa.as_slice(), None, n, &mut out);
    for (j, h) in out.iter_mut().enumerate() {
        *h /= binomial(n, j);
    }
    out
}

/// Cone membership with strict `H_j > 0` and no tolerance.
pub fn cone_class(kappa: &CurvatureVector) -> ConeClass {
    let h = normalized_all(kappa);
    let max_k = h[1..].iter().take_while(|&&x| x > 0.0).count();
    ConeClass { max_k }
}

/// `F = H_k^{1/k}`, failing outside `Γ_k`.
pub fn curvature_function(kappa: &CurvatureVector, k: usize) -> Result<f64> {
    check_f_index(kappa, k)?;
    let class = cone_class(kappa);
    if !class.contains(k) {
        return Err(Error::ConeViolation { required: k, class, node: None });
    }
    Ok(hk_root(normalized_hk(kappa, k)?, k))
}

fn check_f_index(kappa: &CurvatureVector, k: usize) -> Result<()> {
    if k == 0 || k > kappa.n() {
        return Err(Error::Domain(format!(
            "curvature index k = {k} out of range 1..={}",
            kappa.n()
        )));
    }
    Ok(())
}

#[inline]
pub(crate) fn hk_root(hk: f64, k: usize) -> f64 {
    match k {
        1 => hk,
        2 => hk.sqrt(),
        3 => hk.cbrt(),
        _ => hk.powf(1.0 / k as f64),
    }
}

/// `F` and its diagonal derivatives `F^{ii} = ∂F/∂κ_i`.
///
/// `F^{ii} = (1/k) H_k^{1/k - 1} σ_{k-1}(κ|i) / C(n, k)`.
pub fn f_and_derivatives(kappa: &CurvatureVector, k: usize) -> Result<SymmDerivatives> {
    let f_value = curvature_function(kappa, k)?;
    let n = kappa.n();
    let c = binomial(n, k);
    let hk = normalized_hk(kappa, k)?;
    let scale = hk.powf(1.0 / k as f64 - 1.0) / (k as f64 * c);
    let f_diag = (0..n)
        .map(|i| sigma_k_without(kappa, k - 1, i).map(|s| scale * s))
        .collect::<Result<Vec<_>>>()?;
    Ok(SymmDerivatives { f_value, f_diag })
}

/// Signed residuals of the structural identities and inequalities for one
/// curvature vector.
///
/// Identities are reported relative to the magnitude of their terms and
/// should vanish to rounding. Inequality gaps are signed so that a
/// non-negative value means the inequality holds. Gaps whose cone
/// precondition fails are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaReport {
    /// Relative residuals of the four σ-identities.
    pub identities: [f64; 4],
    /// Smallest gap over all admissible Newton–MacLaurin quotient pairs.
    pub newton_maclaurin: Option<f64>,
    /// `Σ F^{ii} κ_i² − F²`.
    pub f_square: Option<f64>,
    /// `−max_{a,b} (κ_a − κ_b)(F^{bb}/κ_a² − F^{aa}/κ_b²)`.
    pub pair_ordering: Option<f64>,
}

impl LemmaReport {
    pub fn identities_hold(&self, tol: f64) -> bool {
        self.identities.iter().all(|r| r.abs() <= tol)
    }

    pub fn inequalities_hold(&self, slack: f64) -> bool {
        [self.newton_maclaurin, self.f_square, self.pair_ordering]
            .iter()
            .flatten()
            .all(|g| *g >= -slack)
    }
}

fn relative(residual: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        residual
    } else {
        residual / scale
    }
}

/// Evaluates the σ-identities for `1 ≤ k ≤ n` and the cone-conditional
/// inequalities for `F = H_k^{1/k}`.
pub fn lemma_checks(kappa: &CurvatureVector, k: usize) -> Result<LemmaReport> {
    check_f_index(kappa, k)?;
    let n = kappa.n();
    let x = kappa.as_slice();
    let sig = sigma_all(kappa, n)?;
    let sk = sig[k];
    let sk1 = if k < n { sig[k + 1] } else { 0.0 };
    let without = |j: usize, i: usize| sigma_k_without(kappa, j, i);

    // (1) σ_k = σ_k(κ|i) + κ_i σ_{k-1}(κ|i), worst over i.
    let mut id1: f64 = 0.0;
    let mut sum2 = 0.0;
    let mut scale2 = 0.0;
    let mut sum3 = 0.0;
    let mut scale3 = 0.0;
    let mut sum4 = 0.0;
    let mut scale4 = 0.0;
    for i in 0..n {
        let a = without(k, i)?;
        let b = without(k - 1, i)?;
        let r = sk - a - x[i] * b;
        let s = sk.abs() + a.abs() + (x[i] * b).abs();
        if relative(r, s).abs() > id1.abs() {
            id1 = relative(r, s);
        }
        sum2 += a;
        scale2 += a.abs();
        sum3 += x[i] * b;
        scale3 += (x[i] * b).abs();
        sum4 += x[i] * x[i] * b;
        scale4 += (x[i] * x[i] * b).abs();
    }
    let id2 = relative(sum2 - (n - k) as f64 * sk, scale2 + ((n - k) as f64 * sk).abs());
    let id3 = relative(sum3 - k as f64 * sk, scale3 + (k as f64 * sk).abs());
    let rhs4 = sig[1] * sk - (k + 1) as f64 * sk1;
    let id4 = relative(
        sum4 - rhs4,
        scale4 + (sig[1] * sk).abs() + ((k + 1) as f64 * sk1).abs(),
    );

    let class = cone_class(kappa);
    let newton_maclaurin = class.contains(k).then(|| newton_maclaurin_gap(kappa, k));
    let (f_square, pair_ordering) = if class.contains(n) && x.iter().all(|&v| v > 0.0) {
        let d = f_and_derivatives(kappa, k)?;
        let lhs: f64 = d.f_diag.iter().zip(x).map(|(fi, ki)| fi * ki * ki).sum();
        let f2 = d.f_value * d.f_value;
        let mut worst = f64::NEG_INFINITY;
        for a in 0..n {
            for b in 0..n {
                let v = (x[a] - x[b]) * (d.f_diag[b] / (x[a] * x[a]) - d.f_diag[a] / (x[b] * x[b]));
                worst = worst.max(v);
            }
        }
        (Some(lhs - f2), Some(-worst))
    } else {
        (None, None)
    };

    Ok(LemmaReport {
        identities: [id1, id2, id3, id4],
        newton_maclaurin,
        f_square,
        pair_ordering,
    })
}

/// Smallest `(H_r/H_s)^{1/(r-s)} − (H_a/H_b)^{1/(a-b)}` over all
/// `a > b ≥ 0`, `r > s ≥ 0`, `a ≥ r`, `b ≥ s`, `a ≤ k`.
fn newton_maclaurin_gap(kappa: &CurvatureVector, k: usize) -> f64 {
    let h = normalized_all(kappa);
    let q = |top: usize, bottom: usize| (h[top] / h[bottom]).powf(1.0 / (top - bottom) as f64);
    let mut gap = f64::INFINITY;
    for a in 1..=k {
        for b in 0..a {
            let lhs = q(a, b);
            for r in 1..=a {
                for s in 0..=b.min(r - 1) {
                    let rhs = q(r, s);
                    let scale = lhs.abs().max(rhs.abs()).max(1.0);
                    gap = gap.min((rhs - lhs) / scale);
                }
            }
        }
    }
    gap
}
