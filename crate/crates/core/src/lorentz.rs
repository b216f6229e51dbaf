//! Pseudo-Euclidean vectors, orthonormal frames, the Lie algebra of the
//! frame group and the null-direction fibre.
//!
//! Coordinates are ordered with the timelike ones first, so Minkowski space
//! is `(-,+,+,+)` and the two flat ambients of the curved models are
//! `(-,+,+,+,+)` and `(-,-,+,+,+)`. Frame indices are zero-based: `e[0]` is
//! the timelike vector usually written e₁.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Index, Mul, Neg, Sub, SubAssign};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 5;

/// Tolerance used when comparing null directions.
pub const NULL_DIR_TOL: f64 = 1e-10;

/// A diagonal metric signature with at most [`MAX_DIM`] entries.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct Signature {
    dims: usize,
    eps: [i8; MAX_DIM],
}

impl Signature {
    /// Minkowski space ℝ⁴₁.
    pub const R41: Signature = Signature { dims: 4, eps: [-1, 1, 1, 1, 0] };
    /// Flat ambient of de Sitter space, ℝ⁵₁.
    pub const R51: Signature = Signature { dims: 5, eps: [-1, 1, 1, 1, 1] };
    /// Flat ambient of anti-de Sitter space, ℝ⁵₂.
    pub const R52: Signature = Signature { dims: 5, eps: [-1, -1, 1, 1, 1] };

    pub fn new(eps: &[i8]) -> Result<Self> {
        if eps.is_empty() || eps.len() > MAX_DIM {
            return Err(Error::Dimension { expected: MAX_DIM, got: eps.len() });
        }
        if eps.iter().any(|&e| e != 1 && e != -1) {
            return Err(Error::Domain("signature entries must be +1 or -1".into()));
        }
        let mut out = [0i8; MAX_DIM];
        out[..eps.len()].copy_from_slice(eps);
        Ok(Signature { dims: eps.len(), eps: out })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// The sign `⟨u_i, u_i⟩` of the i-th coordinate vector.
    pub fn eps(&self, i: usize) -> f64 {
        debug_assert!(i < self.dims);
        f64::from(self.eps[i])
    }

    pub fn signs(&self) -> &[i8] {
        &self.eps[..self.dims]
    }

    /// Number of negative entries.
    pub fn index(&self) -> usize {
        self.signs().iter().filter(|&&e| e < 0).count()
    }
}

impl fmt::Debug for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, e) in self.signs().iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(if *e < 0 { "-" } else { "+" })?;
        }
        f.write_str(")")
    }
}

impl TryFrom<Vec<i8>> for Signature {
    type Error = Error;
    fn try_from(v: Vec<i8>) -> Result<Self> {
        Signature::new(&v)
    }
}

impl From<Signature> for Vec<i8> {
    fn from(s: Signature) -> Self {
        s.signs().to_vec()
    }
}

/// A vector of a flat pseudo-Euclidean space.
#[derive(Clone, Copy, PartialEq)]
pub struct MVec {
    c: [f64; MAX_DIM],
    sig: Signature,
}

impl MVec {
    pub fn new(sig: Signature, comps: &[f64]) -> Result<Self> {
        if comps.len() != sig.dims() {
            return Err(Error::Dimension { expected: sig.dims(), got: comps.len() });
        }
        let mut c = [0.0; MAX_DIM];
        c[..comps.len()].copy_from_slice(comps);
        Ok(MVec { c, sig })
    }

    pub fn zero(sig: Signature) -> Self {
        MVec { c: [0.0; MAX_DIM], sig }
    }

    /// The i-th coordinate vector.
    pub fn basis(sig: Signature, i: usize) -> Self {
        let mut v = MVec::zero(sig);
        v.c[i] = 1.0;
        v
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn dims(&self) -> usize {
        self.sig.dims()
    }

    pub fn comps(&self) -> &[f64] {
        &self.c[..self.sig.dims()]
    }

    /// The metric pairing. Both vectors must share a signature.
    pub fn dot(&self, other: &MVec) -> f64 {
        debug_assert_eq!(self.sig, other.sig);
        let mut s = 0.0;
        for i in 0..self.sig.dims() {
            s += self.sig.eps(i) * self.c[i] * other.c[i];
        }
        s
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    /// `sqrt(|⟨v,v⟩|)`.
    pub fn norm(&self) -> f64 {
        self.norm_sq().abs().sqrt()
    }

    /// Euclidean length of the component vector, for error measurements.
    pub fn euclid(&self) -> f64 {
        self.comps().iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn is_null(&self, tol: f64) -> bool {
        self.norm_sq().abs() <= tol
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.comps().to_vec()
    }
}

impl fmt::Debug for MVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MVec{:?}{:?}", self.sig, self.comps())
    }
}

impl Index<usize> for MVec {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.comps()[i]
    }
}

impl Add for MVec {
    type Output = MVec;
    fn add(mut self, rhs: MVec) -> MVec {
        self += rhs;
        self
    }
}

impl AddAssign for MVec {
    fn add_assign(&mut self, rhs: MVec) {
        debug_assert_eq!(self.sig, rhs.sig);
        for i in 0..MAX_DIM {
            self.c[i] += rhs.c[i];
        }
    }
}

impl Sub for MVec {
    type Output = MVec;
    fn sub(mut self, rhs: MVec) -> MVec {
        self -= rhs;
        self
    }
}

impl SubAssign for MVec {
    fn sub_assign(&mut self, rhs: MVec) {
        debug_assert_eq!(self.sig, rhs.sig);
        for i in 0..MAX_DIM {
            self.c[i] -= rhs.c[i];
        }
    }
}

impl Neg for MVec {
    type Output = MVec;
    fn neg(mut self) -> MVec {
        for x in &mut self.c {
            *x = -*x;
        }
        self
    }
}

impl Mul<f64> for MVec {
    type Output = MVec;
    fn mul(mut self, s: f64) -> MVec {
        for x in &mut self.c {
            *x *= s;
        }
        self
    }
}

impl Mul<MVec> for f64 {
    type Output = MVec;
    fn mul(self, v: MVec) -> MVec {
        v * self
    }
}

impl Div<f64> for MVec {
    type Output = MVec;
    fn div(self, s: f64) -> MVec {
        self * (1.0 / s)
    }
}

/// Checked metric pairing.
pub fn inner(u: &MVec, v: &MVec) -> Result<f64> {
    if u.dims() != v.dims() {
        return Err(Error::Dimension { expected: u.dims(), got: v.dims() });
    }
    if u.signature() != v.signature() {
        return Err(Error::SignatureMismatch);
    }
    Ok(u.dot(v))
}

/// Determinant of the matrix whose columns are the given vectors.
pub fn det(cols: &[MVec]) -> f64 {
    let n = cols.len();
    let m = DMatrix::from_fn(n, n, |i, j| cols[j].comps()[i]);
    m.determinant()
}

/// An orthonormal frame `(e₁,e₂,e₃,e₄)` with `e₁` timelike.
///
/// The vectors may live in a five-dimensional ambient when the frame is
/// tangent to one of the curved models.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame {
    pub e: [MVec; 4],
}

/// Signs `⟨e_i,e_i⟩` of a frame.
pub const FRAME_EPS: [f64; 4] = [-1.0, 1.0, 1.0, 1.0];

impl Frame {
    /// Validates orthonormality (and positive orientation when the vectors
    /// span the whole ambient).
    pub fn new(e: [MVec; 4]) -> Result<Self> {
        let f = Frame { e };
        let r = f.gram_residual();
        if !(r <= 1e-9) {
            return Err(Error::NotOrthonormal { residual: r });
        }
        if e[0].dims() == 4 && det(&e) <= 0.0 {
            return Err(Error::Orientation);
        }
        Ok(f)
    }

    /// The coordinate frame of ℝ⁴₁.
    pub fn standard() -> Self {
        let s = Signature::R41;
        Frame { e: [0, 1, 2, 3].map(|i| MVec::basis(s, i)) }
    }

    pub fn gram_residual(&self) -> f64 {
        let mut r: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { FRAME_EPS[i] } else { 0.0 };
                r = r.max((self.e[i].dot(&self.e[j]) - want).abs());
            }
        }
        r
    }

    /// Right action of a frame-group element: `e'_j = Σ_i e_i A_ij`.
    pub fn transform(&self, a: &DMatrix<f64>) -> Frame {
        let z = MVec::zero(self.e[0].signature());
        let mut out = [z; 4];
        for (j, o) in out.iter_mut().enumerate() {
            for i in 0..4 {
                *o += self.e[i] * a[(i, j)];
            }
        }
        Frame { e: out }
    }

    /// Component `(⟨v,e_i⟩ ε_i)` of a vector in this frame.
    pub fn coords(&self, v: &MVec) -> [f64; 4] {
        [0, 1, 2, 3].map(|i| FRAME_EPS[i] * self.e[i].dot(v))
    }
}

/// A null line, stored through any nonzero representative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NullDir {
    rep: MVec,
}

impl NullDir {
    pub fn new(k: MVec) -> Result<Self> {
        let scale = k.euclid();
        if scale == 0.0 {
            return Err(Error::ZeroVector);
        }
        let q = k.norm_sq() / (scale * scale);
        if q.abs() > 1e-9 {
            return Err(Error::NotNull { value: k.norm_sq() });
        }
        Ok(NullDir { rep: k })
    }

    pub fn rep(&self) -> &MVec {
        &self.rep
    }

    /// The representative `k` with `-⟨k,t⟩ = 1` for the timelike reference
    /// `t`, which is the `t + s` form when `t` is a unit vector.
    pub fn normalized(&self, t: &MVec) -> Result<MVec> {
        let c = -self.rep.dot(t);
        if c.abs() < 1e-14 * self.rep.euclid() * t.euclid() {
            return Err(Error::Domain("null direction is orthogonal to the reference".into()));
        }
        Ok(self.rep / c)
    }

    pub fn approx_eq(&self, other: &NullDir, t: &MVec) -> bool {
        match (self.normalized(t), other.normalized(t)) {
            (Ok(a), Ok(b)) => (a - b).euclid() <= NULL_DIR_TOL,
            _ => false,
        }
    }
}

/// The positive and negative null directions `ℝ(e₁+e₂)` and `ℝ(e₁-e₂)` of the
/// normal plane spanned by the first two frame vectors.
pub fn null_split(frame: &Frame) -> (NullDir, NullDir) {
    let [e1, e2, ..] = frame.e;
    (NullDir { rep: e1 + e2 }, NullDir { rep: e1 - e2 })
}

/// Identifies a unit spacelike `s` orthogonal to the unit future timelike `t`
/// with the null line `ℝ(t+s)`.
pub fn fibre_ident(s: &MVec, t: &MVec) -> Result<NullDir> {
    let r = (s.norm_sq() - 1.0).abs().max((t.norm_sq() + 1.0).abs()).max(s.dot(t).abs());
    if r > 1e-10 {
        return Err(Error::Domain(format!(
            "fibre identification needs a unit spacelike vector orthogonal to a unit timelike one (residual {r:.2e})"
        )));
    }
    NullDir::new(*t + *s)
}

/// Inverse of [`fibre_ident`].
pub fn fibre_point(k: &NullDir, t: &MVec) -> Result<MVec> {
    Ok(k.normalized(t)? - *t)
}

/// An element of the Lie algebra of the isometry group of a flat
/// pseudo-Euclidean space, as a matrix acting on column vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct LieElem {
    pub m: DMatrix<f64>,
    pub sig: Signature,
}

/// The generator `E_ij` (`i < j`): entry `(i,j)` is `-ε_j`, entry `(j,i)` is `ε_i`.
pub fn lie_basis(i: usize, j: usize, sig: Signature) -> Result<LieElem> {
    let n = sig.dims();
    if i >= j || j >= n {
        return Err(Error::Domain(format!("generator E_{i}{j} needs i < j < {n}")));
    }
    let mut m = DMatrix::zeros(n, n);
    m[(i, j)] = -sig.eps(j);
    m[(j, i)] = sig.eps(i);
    Ok(LieElem { m, sig })
}

impl LieElem {
    pub fn zero(sig: Signature) -> Self {
        let n = sig.dims();
        LieElem { m: DMatrix::zeros(n, n), sig }
    }

    pub fn bracket(&self, other: &LieElem) -> LieElem {
        LieElem { m: &self.m * &other.m - &other.m * &self.m, sig: self.sig }
    }

    pub fn apply(&self, v: &MVec) -> MVec {
        let n = self.sig.dims();
        let mut out = [0.0; MAX_DIM];
        for (i, o) in out.iter_mut().enumerate().take(n) {
            for j in 0..n {
                *o += self.m[(i, j)] * v[j];
            }
        }
        MVec::new(self.sig, &out[..n]).expect("same dimension")
    }

    /// `ηX + Xᵀη`, zero exactly for elements of the algebra.
    pub fn skew_residual(&self) -> f64 {
        let n = self.sig.dims();
        let mut r: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let v = self.sig.eps(i) * self.m[(i, j)] + self.sig.eps(j) * self.m[(j, i)];
                r = r.max(v.abs());
            }
        }
        r
    }

    /// Coordinates in the basis `E_ij`, `i < j`, listed row by row.
    pub fn coefficients(&self) -> Vec<f64> {
        let n = self.sig.dims();
        let mut out = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                out.push(self.m[(i, j)] / -self.sig.eps(j));
            }
        }
        out
    }

    pub fn exp(&self) -> DMatrix<f64> {
        self.m.clone().exp()
    }

    pub fn scale(&self, s: f64) -> LieElem {
        LieElem { m: &self.m * s, sig: self.sig }
    }
}

impl Add for LieElem {
    type Output = LieElem;
    fn add(self, rhs: LieElem) -> LieElem {
        LieElem { m: self.m + rhs.m, sig: self.sig }
    }
}

impl Sub for LieElem {
    type Output = LieElem;
    fn sub(self, rhs: LieElem) -> LieElem {
        LieElem { m: self.m - rhs.m, sig: self.sig }
    }
}

/// Which null line of the normal plane a fibre belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NullSign {
    Plus,
    Minus,
}

impl NullSign {
    pub fn as_f64(self) -> f64 {
        match self {
            NullSign::Plus => 1.0,
            NullSign::Minus => -1.0,
        }
    }
}

/// Basis `(E₁₃ ∓ E₂₃, E₁₄ ∓ E₂₄)` of the tangent space at the identity coset of
/// the null-direction fibre, in Minkowski signature.
pub fn fibre_tangent_basis(sign: NullSign) -> [LieElem; 2] {
    let s = Signature::R41;
    let b = |i, j| lie_basis(i, j, s).expect("valid generator");
    match sign {
        NullSign::Plus => [b(0, 2) - b(1, 2), b(0, 3) - b(1, 3)],
        NullSign::Minus => [b(0, 2) + b(1, 2), b(0, 3) + b(1, 3)],
    }
}

/// Coordinates of a fibre tangent vector in [`fibre_tangent_basis`].
pub fn fibre_coords(x: &LieElem, sign: NullSign) -> Result<[f64; 2]> {
    if x.sig != Signature::R41 {
        return Err(Error::SignatureMismatch);
    }
    // both basis elements have entry -1 in the first row
    let a = -x.m[(0, 2)];
    let b = -x.m[(0, 3)];
    let [m1, m2] = fibre_tangent_basis(sign);
    let rebuilt = m1.scale(a) + m2.scale(b);
    let r = (&x.m - &rebuilt.m).amax();
    if r > 1e-12 * (1.0 + x.m.amax()) {
        return Err(Error::Domain(format!("element is not tangent to the fibre (residual {r:.2e})")));
    }
    Ok([a, b])
}

/// The complex structure on the fibre tangent space: the first basis vector
/// goes to minus the second and the second to the first.
pub fn fibre_j(c: [f64; 2]) -> [f64; 2] {
    [c[1], -c[0]]
}

/// [`fibre_j`] acting on a Lie algebra element tangent to the plus fibre.
pub fn fibre_complex_structure(x: &LieElem) -> Result<LieElem> {
    let c = fibre_j(fibre_coords(x, NullSign::Plus)?);
    let [m1, m2] = fibre_tangent_basis(NullSign::Plus);
    Ok(m1.scale(c[0]) + m2.scale(c[1]))
}
