//! Density-matrix calculus: partial traces over labeled parties, von
//! Neumann entropy, mutual information, relative entropies, and the
//! tripartite information I₃.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::codespace::PureState;
use crate::error::{Error, Result};
use crate::tensor::{hermitian_eigen, hermitian_eigenvalues, ComplexMatrix, Party};

/// Eigenvalues below this are treated as exact zeros in 0·log 0 terms.
pub const EIG_CLIP: f64 = 1e-12;
/// Eigenvalues below this are an invalid density, not rounding noise.
pub const NEG_EIG_TOL: f64 = -1e-9;

/// A labeled tensor factor of the global system R ⊗ P1 ⊗ P2 ⊗ P3, with
/// primed copies appearing as recovery ancillas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    R,
    P(Party),
    /// Ancillary copy P_a' used by the recovery maps.
    PPrime(Party),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::R => write!(f, "R"),
            Label::P(p) => write!(f, "{p}"),
            Label::PPrime(p) => write!(f, "{p}'"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    Bits,
    Nats,
}

impl LogBase {
    /// Convert an entropy-like quantity from nats into this base.
    pub fn from_nats(self, nats: f64) -> f64 {
        match self {
            LogBase::Nats => nats,
            LogBase::Bits => nats / std::f64::consts::LN_2,
        }
    }

    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Nats => x.ln(),
            LogBase::Bits => x.log2(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EntropyValue {
    pub value: f64,
    pub base: LogBase,
}

impl EntropyValue {
    pub fn new(value: f64, base: LogBase) -> Self {
        Self { value, base }
    }

    pub fn in_nats(&self) -> f64 {
        match self.base {
            LogBase::Nats => self.value,
            LogBase::Bits => self.value * std::f64::consts::LN_2,
        }
    }

    pub fn in_bits(&self) -> f64 {
        match self.base {
            LogBase::Bits => self.value,
            LogBase::Nats => self.value / std::f64::consts::LN_2,
        }
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix on labeled factors.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    labels: Vec<(Label, usize)>,
    mat: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(labels: Vec<(Label, usize)>, mat: ComplexMatrix) -> Result<Self> {
        let dim: usize = labels.iter().map(|&(_, d)| d).product();
        if dim == 0 || mat.nrows() != dim || mat.ncols() != dim {
            return Err(Error::Dimension(format!(
                "density matrix is {}x{}, labels give dimension {dim}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let herm_dev = (&mat - mat.adjoint()).norm();
        if herm_dev >= 1e-10 {
            return Err(Error::InvalidDensity(format!(
                "Hermiticity deviation {herm_dev:.3e}"
            )));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() >= 1e-9 || tr.im.abs() >= 1e-9 {
            return Err(Error::InvalidDensity(format!("trace {tr} is not 1")));
        }
        let min_eig = hermitian_eigenvalues(&mat)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min_eig <= NEG_EIG_TOL {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self { labels, mat })
    }

    /// Construction without the PSD check, for outputs of operations that
    /// preserve validity (partial traces, unitary conjugation).
    pub(crate) fn trusted(labels: Vec<(Label, usize)>, mat: ComplexMatrix) -> Self {
        debug_assert_eq!(
            mat.nrows(),
            labels.iter().map(|&(_, d)| d).product::<usize>()
        );
        Self { labels, mat }
    }

    pub fn labels(&self) -> &[(Label, usize)] {
        &self.labels
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn dim_of(&self, subset: &[Label]) -> Result<usize> {
        subset
            .iter()
            .map(|l| {
                self.labels
                    .iter()
                    .find(|&&(lab, _)| lab == *l)
                    .map(|&(_, d)| d)
                    .ok_or_else(|| Error::Validation(format!("unknown label {l}")))
            })
            .product()
    }

    /// Maximally mixed state 1/d on a single labeled factor.
    pub fn maximally_mixed(label: Label, d: usize) -> Self {
        let mat = ComplexMatrix::identity(d, d) / Complex64::new(d as f64, 0.0);
        Self::trusted(vec![(label, d)], mat)
    }

    /// Spectrum, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.mat)
    }

    /// Reduced density on `keep`, in the state's own factor ordering.
    pub fn partial_trace(&self, keep: &[Label]) -> Result<DensityMatrix> {
        let (kept, ko, eo) = index_split(&self.labels, keep)?;
        let dk = ko.len();
        let de = eo.len();
        let mut out = ComplexMatrix::zeros(dk, dk);
        for k in 0..dk {
            for kp in 0..dk {
                let mut acc = Complex64::default();
                for e in 0..de {
                    acc += self.mat[(ko[k] + eo[e], ko[kp] + eo[e])];
                }
                out[(k, kp)] = acc;
            }
        }
        Ok(DensityMatrix::trusted(kept, out))
    }

    /// The same state with its factors listed in a new order.
    pub fn reordered(&self, order: &[Label]) -> Result<DensityMatrix> {
        if order.len() != self.labels.len() {
            return Err(Error::Validation("reorder must list every factor".into()));
        }
        let map = index_map(&self.labels, order)?;
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = self.mat[(map[i], map[j])];
            }
        }
        let labels = order
            .iter()
            .map(|l| {
                self.labels
                    .iter()
                    .find(|&&(lab, _)| lab == *l)
                    .copied()
                    .unwrap()
            })
            .collect();
        Ok(DensityMatrix::trusted(labels, out))
    }
}

// JSON wire format mirrors Tensor4: labeled dims plus flat re/im arrays in
// row-major order.
#[derive(Serialize, Deserialize)]
struct DensityWire {
    labels: Vec<(Label, usize)>,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Serialize for DensityMatrix {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        DensityWire {
            labels: self.labels.clone(),
            re: self.mat.transpose().iter().map(|c| c.re).collect(),
            im: self.mat.transpose().iter().map(|c| c.im).collect(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let wire = DensityWire::deserialize(de)?;
        let dim: usize = wire.labels.iter().map(|&(_, d)| d).product();
        if wire.re.len() != dim * dim || wire.im.len() != dim * dim {
            return Err(serde::de::Error::custom("matrix size mismatch"));
        }
        let mat = ComplexMatrix::from_fn(dim, dim, |i, j| {
            Complex64::new(wire.re[i * dim + j], wire.im[i * dim + j])
        });
        DensityMatrix::new(wire.labels, mat).map_err(serde::de::Error::custom)
    }
}

/// Offsets for splitting a composite index into kept and traced parts.
///
/// Returns (kept labels, kept offsets, env offsets): the global row index of
/// kept-index k with environment-index e is `ko[k] + eo[e]`.
pub(crate) fn index_split(
    labels: &[(Label, usize)],
    keep: &[Label],
) -> Result<(Vec<(Label, usize)>, Vec<usize>, Vec<usize>)> {
    if keep.is_empty() {
        return Err(Error::Validation("keep set must be non-empty".into()));
    }
    for l in keep {
        if !labels.iter().any(|&(lab, _)| lab == *l) {
            return Err(Error::Validation(format!("unknown label {l}")));
        }
    }
    let n = labels.len();
    let dims: Vec<usize> = labels.iter().map(|&(_, d)| d).collect();
    let mut strides = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let keep_pos: Vec<usize> = (0..n)
        .filter(|&i| keep.contains(&labels[i].0))
        .collect();
    let env_pos: Vec<usize> = (0..n)
        .filter(|&i| !keep.contains(&labels[i].0))
        .collect();
    let offsets = |pos: &[usize]| -> Vec<usize> {
        let total: usize = pos.iter().map(|&i| dims[i]).product();
        let mut out = vec![0usize; total];
        for (idx, slot) in out.iter_mut().enumerate() {
            let mut rem = idx;
            let mut g = 0usize;
            for &i in pos.iter().rev() {
                g += (rem % dims[i]) * strides[i];
                rem /= dims[i];
            }
            // digits were consumed least-significant first over reversed
            // positions, which matches row-major order over `pos`.
            *slot = g;
        }
        out
    };
    let kept = keep_pos.iter().map(|&i| labels[i]).collect();
    Ok((kept, offsets(&keep_pos), offsets(&env_pos)))
}

/// Global index of each row when the factors are listed in `order` instead.
fn index_map(labels: &[(Label, usize)], order: &[Label]) -> Result<Vec<usize>> {
    let n = labels.len();
    let dims: Vec<usize> = labels.iter().map(|&(_, d)| d).collect();
    let mut strides = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let mut pos = Vec::with_capacity(n);
    for l in order {
        let p = labels
            .iter()
            .position(|&(lab, _)| lab == *l)
            .ok_or_else(|| Error::Validation(format!("unknown label {l}")))?;
        if pos.contains(&p) {
            return Err(Error::Validation(format!("label {l} listed twice")));
        }
        pos.push(p);
    }
    let total: usize = dims.iter().product();
    let mut map = vec![0usize; total];
    for (idx, slot) in map.iter_mut().enumerate() {
        let mut rem = idx;
        let mut g = 0usize;
        for &p in pos.iter().rev() {
            g += (rem % dims[p]) * strides[p];
            rem /= dims[p];
        }
        *slot = g;
    }
    Ok(map)
}

/// Shannon entropy of a spectrum, in nats. Small negatives are clipped;
/// anything below the tolerance is an invalid density.
pub(crate) fn spectrum_entropy_nats(spectrum: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for &p in spectrum {
        if p <= NEG_EIG_TOL {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {p:.3e}"
            )));
        }
        if p > EIG_CLIP {
            s -= p * p.ln();
        }
    }
    Ok(s.max(0.0))
}

pub fn von_neumann_entropy(rho: &DensityMatrix, base: LogBase) -> Result<EntropyValue> {
    let nats = spectrum_entropy_nats(&rho.eigenvalues())?;
    Ok(EntropyValue::new(base.from_nats(nats), base))
}

/// I(A,B) = S(A) + S(B) − S(AB). Small negatives are clipped to 0.
pub fn mutual_information(
    rho: &DensityMatrix,
    a: &[Label],
    b: &[Label],
    base: LogBase,
) -> Result<EntropyValue> {
    if a.iter().any(|l| b.contains(l)) {
        return Err(Error::Validation("A and B must be disjoint".into()));
    }
    let mut ab: Vec<Label> = a.to_vec();
    ab.extend_from_slice(b);
    let rho_ab = rho.partial_trace(&ab)?;
    let s_a = spectrum_entropy_nats(&rho_ab.partial_trace(a)?.eigenvalues())?;
    let s_b = spectrum_entropy_nats(&rho_ab.partial_trace(b)?.eigenvalues())?;
    let s_ab = spectrum_entropy_nats(&rho_ab.eigenvalues())?;
    let mut v = s_a + s_b - s_ab;
    if v < 0.0 {
        if v < -1e-9 {
            return Err(Error::Inconsistency(format!(
                "mutual information {v:.3e} below tolerance"
            )));
        }
        v = 0.0;
    }
    Ok(EntropyValue::new(base.from_nats(v), base))
}

/// I₃ together with the cross-check decomposition available on
/// purifications.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TripartiteInfo {
    pub value: EntropyValue,
    /// Seven-entropy form ΣS(P_a) − ΣS(P_aP_b) + S(P1P2P3), nats.
    pub from_entropies_nats: f64,
    /// −2S(R) + Σ I(R,P_a), nats; only for purifications.
    pub from_mutual_nats: Option<f64>,
    /// S(R) of the same state, nats; the minimal I₃ is −2S(R).
    pub reference_entropy_nats: Option<f64>,
}

/// I₃ of a density on P1 P2 P3, from its seven reduced entropies.
pub fn tripartite_information(rho: &DensityMatrix, base: LogBase) -> Result<TripartiteInfo> {
    let p = [Label::P(Party::P1), Label::P(Party::P2), Label::P(Party::P3)];
    let s = |keep: &[Label]| -> Result<f64> {
        spectrum_entropy_nats(&rho.partial_trace(keep)?.eigenvalues())
    };
    let singles = s(&[p[0]])? + s(&[p[1]])? + s(&[p[2]])?;
    let pairs = s(&[p[0], p[1]])? + s(&[p[0], p[2]])? + s(&[p[1], p[2]])?;
    let triple = s(&p)?;
    let i3 = singles - pairs + triple;
    Ok(TripartiteInfo {
        value: EntropyValue::new(base.from_nats(i3), base),
        from_entropies_nats: i3,
        from_mutual_nats: None,
        reference_entropy_nats: None,
    })
}

/// I₃ of the three parties of a purification on R P1 P2 P3. Both the
/// seven-entropy form and the mutual-information decomposition are
/// computed and must agree to 1e-8 nats.
pub fn tripartite_information_purified(
    phi: &PureState,
    base: LogBase,
) -> Result<TripartiteInfo> {
    let p = [Label::P(Party::P1), Label::P(Party::P2), Label::P(Party::P3)];
    let s = |keep: &[Label]| -> Result<f64> { phi.entropy_across_nats(keep) };

    let s_single: Vec<f64> = p.iter().map(|&l| s(&[l])).collect::<Result<_>>()?;
    let s_pairs = s(&[p[0], p[1]])? + s(&[p[0], p[2]])? + s(&[p[1], p[2]])?;
    let s_triple = s(&p)?;
    let from_entropies = s_single.iter().sum::<f64>() - s_pairs + s_triple;

    let s_r = s(&[Label::R])?;
    let mut from_mutual = -2.0 * s_r;
    for (k, &l) in p.iter().enumerate() {
        let s_rp = s(&[Label::R, l])?;
        from_mutual += s_r + s_single[k] - s_rp;
    }

    if (from_entropies - from_mutual).abs() > 1e-8 {
        return Err(Error::Inconsistency(format!(
            "I3 forms disagree: {from_entropies:.12e} vs {from_mutual:.12e}"
        )));
    }
    Ok(TripartiteInfo {
        value: EntropyValue::new(base.from_nats(from_entropies), base),
        from_entropies_nats: from_entropies,
        from_mutual_nats: Some(from_mutual),
        reference_entropy_nats: Some(s_r),
    })
}

/// Umegaki relative entropy D(ρ‖σ) = Tr ρ(log ρ − log σ). Support
/// violations yield +∞, not an error.
pub fn relative_entropy(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    base: LogBase,
) -> Result<EntropyValue> {
    check_same_shape(rho, sigma)?;
    let (svals, svecs) = hermitian_eigen(sigma.matrix());
    // weight of rho outside supp(sigma)
    let mut outside = 0.0;
    for (k, &mu) in svals.iter().enumerate() {
        if mu <= EIG_CLIP {
            let v = svecs.column(k);
            outside += (v.adjoint() * rho.matrix() * v)[(0, 0)].re;
        }
    }
    if outside >= 1e-9 {
        return Ok(EntropyValue::new(f64::INFINITY, base));
    }
    let rvals = hermitian_eigenvalues(rho.matrix());
    let mut tr_rho_log_rho = 0.0;
    for &l in &rvals {
        if l > EIG_CLIP {
            tr_rho_log_rho += l * l.ln();
        }
    }
    let mut tr_rho_log_sigma = 0.0;
    for (k, &mu) in svals.iter().enumerate() {
        if mu > EIG_CLIP {
            let v = svecs.column(k);
            let w = (v.adjoint() * rho.matrix() * v)[(0, 0)].re;
            tr_rho_log_sigma += w * mu.ln();
        }
    }
    let nats = (tr_rho_log_rho - tr_rho_log_sigma).max(0.0);
    Ok(EntropyValue::new(base.from_nats(nats), base))
}

/// Max relative entropy D∞(ρ‖σ) = inf {λ : ρ ≤ 2^λ σ}, in bits, via the
/// largest eigenvalue of σ^{−1/2} ρ σ^{−1/2} on supp(σ).
pub fn max_relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<EntropyValue> {
    check_same_shape(rho, sigma)?;
    let (svals, svecs) = hermitian_eigen(sigma.matrix());
    let mut outside = 0.0;
    let mut inv_sqrt = DVector::from_element(svals.len(), Complex64::default());
    for (k, &mu) in svals.iter().enumerate() {
        if mu <= EIG_CLIP {
            let v = svecs.column(k);
            outside += (v.adjoint() * rho.matrix() * v)[(0, 0)].re;
        } else {
            inv_sqrt[k] = Complex64::new(1.0 / mu.sqrt(), 0.0);
        }
    }
    if outside >= 1e-9 {
        return Ok(EntropyValue::new(f64::INFINITY, LogBase::Bits));
    }
    let proj = &svecs * ComplexMatrix::from_diagonal(&inv_sqrt) * svecs.adjoint();
    let m = &proj * rho.matrix() * &proj;
    let top = hermitian_eigenvalues(&m)
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
        .max(EIG_CLIP);
    Ok(EntropyValue::new(top.log2(), LogBase::Bits))
}

fn check_same_shape(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Dimension(format!(
            "density dimensions differ: {} vs {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    Ok(())
}
