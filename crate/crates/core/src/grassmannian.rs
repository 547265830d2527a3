//! Finite-rank graphs `W_T = {v : v_- = T v_+}` built from a univalent map.
//!
//! Multiplication by `f'` on the momentum coefficients `ψ = (ψ_1, ψ_2, ...)`
//! is the upper-triangular Toeplitz block `C11`; the rows that feed the
//! first `n` negative powers are the corrected coefficients `G_0, G_{-1},
//! G_{-2}`. Composing the latter with `C11⁻¹` gives `T_n: H_+ → H_-`.
//!
//! Positive powers `z^0..z^N` index the columns; row `r` of `T_n` is the
//! coefficient of `z^{-r-1}`.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::observables::{corrected_g, BracketWindow, ObservablesError, PhasePoly};
use crate::series::{TruncatedLaurent, TruncatedSeries};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GrassmannianError {
    #[error("graphs are built for n in 1..=3, got {0}")]
    UnsupportedOrder(usize),
    #[error("truncation N = {order} is smaller than n = {n}")]
    WindowTooSmall { n: usize, order: usize },
    #[error(transparent)]
    Observables(#[from] ObservablesError),
    #[error("vector window [{low}, {high}] does not cover the graph window")]
    WindowMismatch { low: i64, high: i64 },
}

/// Minimal ring interface shared by numeric and exact row evaluation.
trait Ring: Clone {
    fn zero() -> Self;
    fn int(n: i64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
}

impl Ring for Complex64 {
    fn zero() -> Self {
        Complex64::default()
    }
    fn int(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
}

impl Ring for PhasePoly {
    fn zero() -> Self {
        PhasePoly::zero()
    }
    fn int(n: i64) -> Self {
        PhasePoly::int(n)
    }
    fn add(&self, o: &Self) -> Self {
        PhasePoly::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        PhasePoly::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        PhasePoly::mul(self, o)
    }
}

/// Coefficients `c_0 = 1, c_1, ...` and the reciprocal recurrence `a_n`.
struct Coeffs<R> {
    c: Vec<R>,
    a: Vec<R>,
}

impl<R: Ring> Coeffs<R> {
    fn new(c_tail: Vec<R>, a_len: usize) -> Self {
        let mut c = vec![R::int(1)];
        c.extend(c_tail);
        let mut a = vec![R::int(1)];
        for n in 1..a_len {
            let mut s = R::zero();
            for k in 1..=n.min(c.len() - 1) {
                s = s.add(&c[k].mul(&a[n - k]));
            }
            a.push(R::zero().sub(&s));
        }
        Self { c, a }
    }

    fn c(&self, n: usize) -> R {
        self.c.get(n).cloned().unwrap_or_else(R::zero)
    }

    fn a(&self, n: usize) -> R {
        self.a.get(n).cloned().unwrap_or_else(R::zero)
    }

    /// Coefficient of `ψ_m` in `G_{-r}`, `r ∈ {0, 1, 2}`.
    fn row(&self, r: usize, m: usize) -> R {
        let mi = m as i64;
        match r {
            0 => self.c(m).mul(&R::int(mi)),
            1 => self
                .c(m + 1)
                .mul(&R::int(mi + 2))
                .sub(&self.c(1).mul(&self.c(m)).mul(&R::int(2))),
            _ => {
                let shape = self.c(1).mul(&self.c(1)).sub(&self.c(2).mul(&R::int(4)));
                self.c(m + 2)
                    .mul(&R::int(mi + 3))
                    .add(&shape.mul(&self.c(m)))
                    .sub(&self.a(m + 2))
            }
        }
    }
}

/// Blocks of the multiplication-by-`f'` matrix at truncation `N`.
#[derive(Clone, Debug, PartialEq)]
pub struct CBlocks {
    /// `(N+1) × (N+1)`, entry `(j, j+l) = (l+1) c_l`.
    pub c11: DMatrix<Complex64>,
    /// `n × (N+1)`, entry `(r, j) = (j+r+2) c_{j+r+1}`.
    pub c12: DMatrix<Complex64>,
    /// Toeplitz matrix of `1/f'`.
    pub c11_inv: DMatrix<Complex64>,
}

fn c_of(c: &[Complex64], n: usize) -> Complex64 {
    match n {
        0 => Complex64::new(1.0, 0.0),
        n => c.get(n - 1).copied().unwrap_or_default(),
    }
}

/// `f'` band `1, 2c_1, 3c_2, ...` up to `z^N`.
fn fprime_band(c: &[Complex64], order: usize) -> TruncatedSeries {
    TruncatedSeries::from_fn(order, |l| c_of(c, l) * (l as f64 + 1.0))
}

fn upper_toeplitz(band: &[Complex64]) -> DMatrix<Complex64> {
    let n = band.len();
    DMatrix::from_fn(n, n, |i, j| if j >= i { band[j - i] } else { Complex64::default() })
}

pub fn c_blocks(c: &[Complex64], n: usize, order: usize) -> Result<CBlocks, GrassmannianError> {
    if order < n {
        return Err(GrassmannianError::WindowTooSmall { n, order });
    }
    let band = fprime_band(c, order);
    let inv = band.reciprocal().expect("f' has constant term 1");
    Ok(CBlocks {
        c11: upper_toeplitz(band.coeffs()),
        c12: DMatrix::from_fn(n, order + 1, |r, j| {
            c_of(c, j + r + 1) * (j + r + 2) as f64
        }),
        c11_inv: upper_toeplitz(inv.coeffs()),
    })
}

/// `T̃_n = C12⁽ⁿ⁾ C11⁻¹`, the image of `Ḡ_+ ↦ (G̃_0, G̃_{-1}, ...)`.
pub fn step1_ttilde(
    c: &[Complex64],
    n: usize,
    order: usize,
) -> Result<DMatrix<Complex64>, GrassmannianError> {
    let b = c_blocks(c, n, order)?;
    Ok(&b.c12 * &b.c11_inv)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphOperator {
    pub n: usize,
    pub order: usize,
    /// The supplied coefficients `c_1..c_N` (unconjugated).
    pub c: Vec<Complex64>,
    /// `n × (N+1)`.
    pub t: DMatrix<Complex64>,
    /// First row of `C̄11` and of its inverse.
    pub c11_band: Vec<Complex64>,
    pub c11_inv_band: Vec<Complex64>,
    /// `e_0..e_N`, each on the window `[-n, N]`.
    pub basis: Vec<TruncatedLaurent>,
}

/// Corrected rows `(G_0, ..., G_{-n+1})` evaluated on `ψ_m`, `m = 1..=N+1`,
/// at the conjugated coefficients.
fn correction_rows(cbar: &[Complex64], n: usize, order: usize) -> DMatrix<Complex64> {
    let co = Coeffs::new(cbar.to_vec(), order + 4);
    DMatrix::from_fn(n, order + 1, |r, j| co.row(r, j + 1))
}

/// Builds `T_n = (B̃ + C-cut) C̄11⁻¹` and its basis `e_k = (id + T_n) C̄11 z^k`.
pub fn step2_graph(c: &[Complex64], n: usize, order: usize) -> Result<GraphOperator, GrassmannianError> {
    if !(1..=3).contains(&n) {
        return Err(GrassmannianError::UnsupportedOrder(n));
    }
    let mut c = c.to_vec();
    c.resize(order, Complex64::default());
    let cbar: Vec<Complex64> = c.iter().map(|z| z.conj()).collect();
    let blocks = c_blocks(&cbar, n, order)?;
    let rows = correction_rows(&cbar, n, order);
    let t = &rows * &blocks.c11_inv;
    let basis = (0..=order)
        .map(|k| {
            let pos = blocks.c11.column(k).into_owned();
            let neg = &t * &pos;
            TruncatedLaurent::from_fn(n, order, |p| {
                if p >= 0 {
                    pos[p as usize]
                } else {
                    neg[(-p - 1) as usize]
                }
            })
        })
        .collect();
    Ok(GraphOperator {
        n,
        order,
        c,
        c11_band: blocks.c11.row(0).iter().copied().collect(),
        c11_inv_band: blocks.c11_inv.row(0).iter().copied().collect(),
        t,
        basis,
    })
}

/// Exact `e_k` for symbolic `c` (unbarred symbols), as `(power, coefficient)`
/// pairs for powers `k` down to `-n`.
pub fn basis_vector_symbolic(k: usize, n: usize) -> Vec<(i64, PhasePoly)> {
    let c_tail = (1..=k + n + 2).map(|i| PhasePoly::c(i as u32)).collect();
    let co = Coeffs::new(c_tail, k + n + 4);
    let mut out: Vec<(i64, PhasePoly)> = (0..=k)
        .rev()
        .map(|j| (j as i64, co.c(k - j).mul(&PhasePoly::int((k - j) as i64 + 1))))
        .collect();
    for r in 0..n.min(3) {
        out.push((-(r as i64) - 1, co.row(r, k + 1)));
    }
    out
}

impl GraphOperator {
    /// `C̄11⁻¹ v`: the `ψ` coordinates of a vector with positive part `v`.
    pub fn coordinates(&self, positive: &[Complex64]) -> Vec<Complex64> {
        let n = self.order + 1;
        (0..n)
            .map(|j| {
                (j..n)
                    .map(|l| self.c11_inv_band[l - j] * positive.get(l).copied().unwrap_or_default())
                    .sum()
            })
            .collect()
    }

    /// `Σ_k ψ_{k+1} e_k`.
    pub fn combine(&self, psi: &[Complex64]) -> TruncatedLaurent {
        let mut out = TruncatedLaurent::zero(self.n, self.order);
        for (e, &p) in self.basis.iter().zip(psi) {
            out = &out + &e.scale(p);
        }
        out
    }

    /// Index set read off the top powers of the basis, completed by all
    /// powers above the truncation.
    pub fn index_set(&self) -> IndexSet {
        let top: BTreeSet<i64> = self
            .basis
            .iter()
            .filter_map(|e| e.powers().filter(|&p| e.coeff(p).norm() > 0.0).max())
            .collect();
        IndexSet::from_finite_part(&top, self.order as i64)
    }

    pub fn dump(&self) -> GraphDump {
        GraphDump {
            n: self.n,
            order: self.order,
            c: self.c.clone(),
            t: (0..self.n).map(|r| self.t.row(r).iter().copied().collect()).collect(),
            c11_band: self.c11_band.clone(),
            c11_inv_band: self.c11_inv_band.clone(),
            basis: self
                .basis
                .iter()
                .map(|e| BasisDump {
                    min_power: e.min_power(),
                    coeffs: e.coeffs().to_vec(),
                })
                .collect(),
        }
    }
}

/// Serializable snapshot of a [`GraphOperator`].
#[derive(Clone, Debug, Serialize)]
pub struct GraphDump {
    pub n: usize,
    pub order: usize,
    pub c: Vec<Complex64>,
    pub t: Vec<Vec<Complex64>>,
    pub c11_band: Vec<Complex64>,
    pub c11_inv_band: Vec<Complex64>,
    pub basis: Vec<BasisDump>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BasisDump {
    pub min_power: i64,
    pub coeffs: Vec<Complex64>,
}

/// `‖G - Σ ψ_{k+1} e_k‖∞` over the window `[-n, N]`.
pub fn graph_membership(
    g: &TruncatedLaurent,
    op: &GraphOperator,
    psi: &[Complex64],
) -> Result<f64, GrassmannianError> {
    if g.min_power() > -(op.n as i64) || g.max_power() < op.order as i64 {
        return Err(GrassmannianError::WindowMismatch {
            low: g.min_power(),
            high: g.max_power(),
        });
    }
    let comb = op.combine(psi);
    Ok((-(op.n as i64)..=op.order as i64)
        .map(|p| (g.coeff(p) - comb.coeff(p)).norm())
        .fold(0.0, f64::max))
}

/// The polynomials `G_0, ..., G_{-n+1}` on a window matching a graph of
/// truncation `N`, for building graph vectors independently of the matrices.
#[derive(Clone, Debug)]
pub struct CorrectedRows {
    n: usize,
    order: usize,
    polys: Vec<PhasePoly>,
}

impl CorrectedRows {
    pub fn new(n: usize, order: usize) -> Result<Self, GrassmannianError> {
        if !(1..=3).contains(&n) {
            return Err(GrassmannianError::UnsupportedOrder(n));
        }
        let window = BracketWindow::new(order.max(1) as u32, 0, order as i32 + 1)?;
        let polys = (0..n)
            .map(|r| corrected_g(-(r as i32), &window))
            .collect::<Result<_, _>>()?;
        Ok(Self { n, order, polys })
    }

    /// `G(z) = Σ_k Ḡ_{k+1} z^k + Σ_r G_{-r} z^{-r-1}` from `f` and
    /// `ψ_1..ψ_{N+1}`, with `Ḡ_+ = C̄11 ψ`.
    pub fn graph_vector(&self, c: &[Complex64], psi: &[Complex64]) -> TruncatedLaurent {
        let cbar: Vec<Complex64> = c.iter().map(|z| z.conj()).collect();
        let psi_at = |m: i32| {
            if m >= 1 {
                psi.get(m as usize - 1).copied().unwrap_or_default()
            } else {
                Complex64::default()
            }
        };
        let c_at = |n: u32| c_of(&cbar, n as usize);
        TruncatedLaurent::from_fn(self.n, self.order, |p| {
            if p >= 0 {
                let k = p as usize;
                (k..=self.order)
                    .map(|j| c_of(&cbar, j - k) * (j - k + 1) as f64 * psi_at(j as i32 + 1))
                    .sum()
            } else {
                self.polys[(-p - 1) as usize].eval(&c_at, &psi_at)
            }
        })
    }
}

/// A subset `S ⊂ ℤ` differing from `ℤ_+ = {0, 1, 2, ...}` in finitely many
/// places.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IndexSet {
    /// Negative elements of `S`.
    pub extra: BTreeSet<i64>,
    /// Nonnegative integers missing from `S`.
    pub missing: BTreeSet<i64>,
}

impl IndexSet {
    pub fn positive() -> Self {
        Self::default()
    }

    pub fn new(extra: impl IntoIterator<Item = i64>, missing: impl IntoIterator<Item = i64>) -> Self {
        Self {
            extra: extra.into_iter().filter(|&i| i < 0).collect(),
            missing: missing.into_iter().filter(|&i| i >= 0).collect(),
        }
    }

    /// `S = finite ∪ {above + 1, above + 2, ...}`.
    pub fn from_finite_part(finite: &BTreeSet<i64>, above: i64) -> Self {
        Self {
            extra: finite.iter().copied().filter(|&i| i < 0).collect(),
            missing: (0..=above).filter(|i| !finite.contains(i)).collect(),
        }
    }

    pub fn contains(&self, i: i64) -> bool {
        if i < 0 {
            self.extra.contains(&i)
        } else {
            !self.missing.contains(&i)
        }
    }
}

/// Fredholm index of the projection `H_S → H_+`: `|S \ ℤ_+| - |ℤ_+ \ S|`.
pub fn virtual_dimension(s: &IndexSet) -> i64 {
    s.extra.len() as i64 - s.missing.len() as i64
}
