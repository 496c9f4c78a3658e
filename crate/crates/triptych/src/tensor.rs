//! Complex four-leg tensors, their three matrix foldings, operator norms,
//! and unitarity residuals.
//!
//! A tensor `t[i][s1][s2][s3]` carries the coefficients of a code-space
//! basis. Folding along party leg `a` produces the linear map from the
//! reference-plus-ancilla pair onto the two remaining parties; the scheme
//! is perfect exactly when all three foldings are unitary.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Matrices are dense complex throughout; sizes stay below 256x256.
pub type ComplexMatrix = DMatrix<Complex64>;

/// One of the three share-holding parties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Party {
    P1,
    P2,
    P3,
}

impl Party {
    pub const ALL: [Party; 3] = [Party::P1, Party::P2, Party::P3];

    /// Zero-based leg index of this party within (s1, s2, s3).
    pub fn leg_index(self) -> usize {
        match self {
            Party::P1 => 0,
            Party::P2 => 1,
            Party::P3 => 2,
        }
    }

    /// The two parties other than `self`, in increasing order.
    pub fn others(self) -> (Party, Party) {
        match self {
            Party::P1 => (Party::P2, Party::P3),
            Party::P2 => (Party::P1, Party::P3),
            Party::P3 => (Party::P1, Party::P2),
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Party::P1 => write!(f, "P1"),
            Party::P2 => write!(f, "P2"),
            Party::P3 => write!(f, "P3"),
        }
    }
}

impl FromStr for Party {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "P1" | "1" => Ok(Party::P1),
            "P2" | "2" => Ok(Party::P2),
            "P3" | "3" => Ok(Party::P3),
            other => Err(Error::Validation(format!("unknown party '{other}'"))),
        }
    }
}

/// Default absolute tolerance (operator norm) for calling a folding unitary.
pub const UNITARITY_TOL: f64 = 1e-9;

/// Operator-norm deviation of `m†m` from the identity.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct UnitarityResidual {
    pub deviation: f64,
    pub is_unitary: bool,
}

/// Complex 4-leg tensor `t[i][s1][s2][s3]` in row-major composite order
/// `((i*d1 + s1)*d2 + s2)*d3 + s3`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    dims: [usize; 4],
    coeffs: Vec<Complex64>,
}

impl Tensor4 {
    pub fn new(dims: [usize; 4], coeffs: Vec<Complex64>) -> Result<Self> {
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::Dimension(format!("all dims must be positive, got {dims:?}")));
        }
        let len: usize = dims.iter().product();
        if coeffs.len() != len {
            return Err(Error::Dimension(format!(
                "expected {len} coefficients for dims {dims:?}, got {}",
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Validation("tensor entries must be finite".into()));
        }
        Ok(Self { dims, coeffs })
    }

    pub fn zeros(dims: [usize; 4]) -> Result<Self> {
        let len: usize = dims.iter().product();
        Self::new(dims, vec![Complex64::default(); len])
    }

    /// Dimensions (r, d1, d2, d3).
    pub fn dims(&self) -> [usize; 4] {
        self.dims
    }

    pub fn is_uniform(&self) -> bool {
        self.dims.iter().all(|&d| d == self.dims[0])
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[inline]
    pub fn get(&self, i: usize, s1: usize, s2: usize, s3: usize) -> Complex64 {
        let [_, d1, d2, d3] = self.dims;
        self.coeffs[((i * d1 + s1) * d2 + s2) * d3 + s3]
    }

    #[inline]
    pub fn set(&mut self, i: usize, s1: usize, s2: usize, s3: usize, v: Complex64) {
        let [_, d1, d2, d3] = self.dims;
        self.coeffs[((i * d1 + s1) * d2 + s2) * d3 + s3] = v;
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Matrix folding along party leg `a`: the map |i s_a⟩ ↦ Σ t |s_b s_c⟩
    /// with b < c the remaining legs. Entry at row (s_b, s_c), column
    /// (i, s_a). A pure index permutation, no arithmetic.
    pub fn fold(&self, leg: Party) -> ComplexMatrix {
        let [r, d1, d2, d3] = self.dims;
        let ds = [d1, d2, d3];
        let a = leg.leg_index();
        let (pb, pc) = leg.others();
        let (b, c) = (pb.leg_index(), pc.leg_index());
        let (da, db, dc) = (ds[a], ds[b], ds[c]);
        let mut m = ComplexMatrix::zeros(db * dc, r * da);
        for i in 0..r {
            for s1 in 0..d1 {
                for s2 in 0..d2 {
                    for s3 in 0..d3 {
                        let s = [s1, s2, s3];
                        m[(s[b] * dc + s[c], i * da + s[a])] = self.get(i, s1, s2, s3);
                    }
                }
            }
        }
        m
    }

    /// Inverse of `fold`: rebuild a tensor from a folding and its dims.
    pub fn unfold(m: &ComplexMatrix, leg: Party, dims: [usize; 4]) -> Result<Self> {
        let [r, d1, d2, d3] = dims;
        let ds = [d1, d2, d3];
        let a = leg.leg_index();
        let (pb, pc) = leg.others();
        let (b, c) = (pb.leg_index(), pc.leg_index());
        let (da, db, dc) = (ds[a], ds[b], ds[c]);
        if m.nrows() != db * dc || m.ncols() != r * da {
            return Err(Error::Dimension(format!(
                "folding shape {}x{} does not match dims {dims:?} at leg {leg}",
                m.nrows(),
                m.ncols()
            )));
        }
        let mut t = Self::zeros(dims)?;
        for i in 0..r {
            for s1 in 0..d1 {
                for s2 in 0..d2 {
                    for s3 in 0..d3 {
                        let s = [s1, s2, s3];
                        t.set(i, s1, s2, s3, m[(s[b] * dc + s[c], i * da + s[a])]);
                    }
                }
            }
        }
        Ok(t)
    }

    /// Unitarity residuals of the three foldings (t, tᴿ, tᴳ), in leg order.
    /// Foldings of a non-uniform tensor are rectangular; only norms are
    /// reported then.
    pub fn multiunitarity_report(&self, tol: f64) -> Result<MultiUnitarityReport> {
        let mut norms = [0.0; 3];
        let mut residuals = [None; 3];
        let square = self.dims[0] == self.dims[1]
            && self.dims[0] == self.dims[2]
            && self.dims[0] == self.dims[3];
        for (k, leg) in Party::ALL.into_iter().enumerate() {
            let m = self.fold(leg);
            norms[k] = operator_norm(&m)?;
            if square {
                residuals[k] = Some(unitarity(&m, tol)?);
            }
        }
        Ok(MultiUnitarityReport {
            norms,
            residuals: if square {
                Some(residuals.map(|r| r.unwrap()))
            } else {
                None
            },
            square,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultiUnitarityReport {
    /// Operator norms of (t, tᴿ, tᴳ).
    pub norms: [f64; 3],
    /// Residuals for the three foldings; `None` when they are not square.
    pub residuals: Option<[UnitarityResidual; 3]>,
    pub square: bool,
}

impl MultiUnitarityReport {
    pub fn all_unitary(&self) -> bool {
        self.residuals
            .map(|rs| rs.iter().all(|r| r.is_unitary))
            .unwrap_or(false)
    }

    pub fn max_deviation(&self) -> f64 {
        self.residuals
            .map(|rs| rs.iter().fold(0.0f64, |m, r| m.max(r.deviation)))
            .unwrap_or(f64::INFINITY)
    }
}

/// Largest singular value, computed as √λ_max(m†m) via Hermitian
/// eigendecomposition.
pub fn operator_norm(m: &ComplexMatrix) -> Result<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::Dimension("operator norm of an empty matrix".into()));
    }
    // m†m is the smaller Gram when m is wide; mm† when it is tall.
    let gram = if m.ncols() <= m.nrows() {
        m.adjoint() * m
    } else {
        m * m.adjoint()
    };
    let top = hermitian_eigenvalues(&gram)
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(top.max(0.0).sqrt())
}

/// Unitarity residual ‖m†m − 1‖ in operator norm.
pub fn unitarity(m: &ComplexMatrix, tol: f64) -> Result<UnitarityResidual> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "unitarity requires a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let mut g = m.adjoint() * m;
    for k in 0..g.nrows() {
        g[(k, k)] -= Complex64::new(1.0, 0.0);
    }
    let deviation = operator_norm(&g)?;
    Ok(UnitarityResidual {
        deviation,
        is_unitary: deviation <= tol,
    })
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let mut vals: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vals
}

/// Hermitian eigendecomposition: (ascending eigenvalues, matching columns).
pub fn hermitian_eigen(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let eig = m.clone().symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vecs = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// Hermitian matrix function: f applied to the spectrum.
pub fn hermitian_map(m: &ComplexMatrix, f: impl Fn(f64) -> f64) -> ComplexMatrix {
    let (vals, vecs) = hermitian_eigen(m);
    let diag = DVector::from_iterator(vals.len(), vals.iter().map(|&v| Complex64::new(f(v), 0.0)));
    &vecs * ComplexMatrix::from_diagonal(&diag) * vecs.adjoint()
}

// JSON wire format: {"dims":[r,d1,d2,d3], "re":[...], "im":[...]} in the
// fixed composite order.
#[derive(Serialize, Deserialize)]
struct Tensor4Wire {
    dims: [usize; 4],
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Serialize for Tensor4 {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        Tensor4Wire {
            dims: self.dims,
            re: self.coeffs.iter().map(|c| c.re).collect(),
            im: self.coeffs.iter().map(|c| c.im).collect(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Tensor4 {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let wire = Tensor4Wire::deserialize(de)?;
        if wire.re.len() != wire.im.len() {
            return Err(serde::de::Error::custom("re/im length mismatch"));
        }
        let coeffs = wire
            .re
            .iter()
            .zip(&wire.im)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        Tensor4::new(wire.dims, coeffs).map_err(serde::de::Error::custom)
    }
}
