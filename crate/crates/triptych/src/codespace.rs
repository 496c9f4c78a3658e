//! Code-space construction (generic, permutation, shift, VIP), secret
//! purification, and the erasure-recovery channel.

use nalgebra::DVector;
use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infotheory::{index_split, DensityMatrix, Label};
use crate::tensor::{
    hermitian_eigen, operator_norm, unitarity, ComplexMatrix, Party, Tensor4, UNITARITY_TOL,
};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// A bijection on {0..d−1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let d = images.len();
        let mut seen = vec![false; d];
        for &x in &images {
            if x >= d || seen[x] {
                return Err(Error::Validation(format!(
                    "not a bijection on 0..{d}: images {images:?}"
                )));
            }
            seen[x] = true;
        }
        Ok(Self(images))
    }

    pub fn identity(d: usize) -> Self {
        Self((0..d).collect())
    }

    /// Cyclic shift s ↦ s + k (mod d).
    pub fn shift(d: usize, k: usize) -> Self {
        Self((0..d).map(|s| (s + k) % d).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, s: usize) -> usize {
        self.0[s]
    }

    /// σ^i, the i-fold composition.
    pub fn power(&self, i: usize) -> Permutation {
        let mut out = Permutation::identity(self.len());
        for _ in 0..i {
            out = Permutation(out.0.iter().map(|&s| self.apply(s)).collect());
        }
        out
    }
}

/// A pure state on an ordered list of labeled factors.
#[derive(Debug, Clone)]
pub struct PureState {
    labels: Vec<(Label, usize)>,
    amp: DVector<Complex64>,
}

impl PureState {
    pub fn new(labels: Vec<(Label, usize)>, amp: DVector<Complex64>) -> Result<Self> {
        let dim: usize = labels.iter().map(|&(_, d)| d).product();
        if amp.len() != dim {
            return Err(Error::Dimension(format!(
                "amplitude vector has length {}, labels give {dim}",
                amp.len()
            )));
        }
        let norm = amp.norm();
        if (norm - 1.0).abs() >= 1e-12 {
            return Err(Error::Validation(format!(
                "state norm {norm} differs from 1 beyond 1e-12"
            )));
        }
        Ok(Self { labels, amp })
    }

    pub fn labels(&self) -> &[(Label, usize)] {
        &self.labels
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amp
    }

    /// Reduced density on `keep` (ordering inherited from the state).
    pub fn partial_trace(&self, keep: &[Label]) -> Result<DensityMatrix> {
        let (kept, a) = self.cut_matrix(keep)?;
        let rho = &a * a.adjoint();
        Ok(DensityMatrix::trusted(kept, rho))
    }

    /// Entanglement entropy across the cut (keep | rest), in nats.
    ///
    /// Uses the Gram matrix of the smaller side of the cut; both sides of a
    /// pure-state cut share the same nonzero spectrum.
    pub fn entropy_across_nats(&self, keep: &[Label]) -> Result<f64> {
        let (_, a) = self.cut_matrix(keep)?;
        let gram = if a.nrows() <= a.ncols() {
            &a * a.adjoint()
        } else {
            a.adjoint() * &a
        };
        crate::infotheory::spectrum_entropy_nats(&crate::tensor::hermitian_eigenvalues(&gram))
    }

    /// Amplitudes reshaped into a (keep × rest) matrix.
    fn cut_matrix(&self, keep: &[Label]) -> Result<(Vec<(Label, usize)>, ComplexMatrix)> {
        let (kept, ko, eo) = index_split(&self.labels, keep)?;
        let mut a = ComplexMatrix::zeros(ko.len(), eo.len());
        for (k, &off_k) in ko.iter().enumerate() {
            for (e, &off_e) in eo.iter().enumerate() {
                a[(k, e)] = self.amp[off_k + off_e];
            }
        }
        Ok((kept, a))
    }
}

/// Recovery of a secret by the two surviving parties.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecoveryResult {
    pub recovered_secret: DensityMatrix,
    pub ancilla_state: DensityMatrix,
    pub fidelity: f64,
}

/// Orthonormal basis of a secret subspace of P1 ⊗ P2 ⊗ P3, carried by a
/// four-leg tensor.
#[derive(Debug, Clone)]
pub struct CodeSpace {
    tensor: Tensor4,
    basis: Vec<DVector<Complex64>>,
}

impl CodeSpace {
    /// Build the basis |ĩ⟩ = (1/√d) Σ t[i][s1][s2][s3] |s1 s2 s3⟩ and
    /// verify orthonormality. Non-uniform tensors get per-vector
    /// normalization instead of the global 1/√d.
    pub fn from_tensor(tensor: Tensor4) -> Result<Self> {
        let [r, d1, d2, d3] = tensor.dims();
        let n = d1 * d2 * d3;
        let mut basis = Vec::with_capacity(r);
        let uniform_scale = if tensor.is_uniform() {
            Some(1.0 / (d1 as f64).sqrt())
        } else {
            None
        };
        for i in 0..r {
            let mut v = DVector::from_element(n, Complex64::default());
            for s1 in 0..d1 {
                for s2 in 0..d2 {
                    for s3 in 0..d3 {
                        v[(s1 * d2 + s2) * d3 + s3] = tensor.get(i, s1, s2, s3);
                    }
                }
            }
            match uniform_scale {
                Some(s) => v *= c(s),
                None => {
                    let norm = v.norm();
                    if norm <= 1e-300 {
                        return Err(Error::NotOrthonormal { deviation: 1.0 });
                    }
                    v /= c(norm);
                }
            }
            basis.push(v);
        }
        // Gram deviation in operator norm
        let mut gram = ComplexMatrix::zeros(r, r);
        for i in 0..r {
            for j in 0..r {
                gram[(i, j)] = basis[i].dotc(&basis[j]);
                if i == j {
                    gram[(i, j)] -= c(1.0);
                }
            }
        }
        let deviation = operator_norm(&gram)?;
        if deviation > 1e-9 {
            return Err(Error::NotOrthonormal { deviation });
        }
        Ok(Self { tensor, basis })
    }

    pub fn tensor(&self) -> &Tensor4 {
        &self.tensor
    }

    /// Dimensions (|R|, |P1|, |P2|, |P3|) with |R| = r.
    pub fn party_dims(&self) -> [usize; 4] {
        self.tensor.dims()
    }

    pub fn rank(&self) -> usize {
        self.tensor.dims()[0]
    }

    pub fn is_uniform(&self) -> bool {
        self.tensor.is_uniform()
    }

    pub fn basis(&self) -> &[DVector<Complex64>] {
        &self.basis
    }

    fn party_labels(&self) -> Vec<(Label, usize)> {
        let [_, d1, d2, d3] = self.tensor.dims();
        vec![
            (Label::P(Party::P1), d1),
            (Label::P(Party::P2), d2),
            (Label::P(Party::P3), d3),
        ]
    }

    /// ρ̃ = Σ ρ_ij |ĩ⟩⟨j̃| on P1 P2 P3.
    pub fn encode(&self, secret: &DensityMatrix) -> Result<DensityMatrix> {
        let r = self.rank();
        validate_secret(secret, r)?;
        let n = self.basis[0].len();
        let mut b = ComplexMatrix::zeros(n, r);
        for (i, v) in self.basis.iter().enumerate() {
            b.set_column(i, v);
        }
        let rho = &b * secret.matrix() * b.adjoint();
        Ok(DensityMatrix::trusted(self.party_labels(), rho))
    }

    /// Purification |φ⟩ = Σ √λ_k |ψ_k⟩^R |ψ̃_k⟩ of a secret on R ⊗ P1P2P3.
    ///
    /// The spectral decomposition is made deterministic: ascending
    /// eigenvalues, first nonzero eigenvector component rotated to the
    /// positive real axis.
    pub fn purify(&self, secret: &DensityMatrix) -> Result<PureState> {
        let r = self.rank();
        validate_secret(secret, r)?;
        let (vals, vecs) = deterministic_eigen(secret.matrix());
        let [_, d1, d2, d3] = self.tensor.dims();
        let n = d1 * d2 * d3;
        let mut amp = DVector::from_element(r * n, Complex64::default());
        for (k, &lambda) in vals.iter().enumerate() {
            if lambda <= 0.0 {
                continue;
            }
            let w = lambda.max(0.0).sqrt();
            let psi = vecs.column(k);
            // |ψ_k⟩^R ⊗ Σ_i ψ_{k,i} |ĩ⟩
            let mut tilde = DVector::from_element(n, Complex64::default());
            for i in 0..r {
                tilde += &self.basis[i] * psi[i];
            }
            for a in 0..r {
                let head = psi[a] * c(w);
                for x in 0..n {
                    amp[a * n + x] += head * tilde[x];
                }
            }
        }
        let mut labels = vec![(Label::R, r)];
        labels.extend(self.party_labels());
        // renormalize rounding noise, then enforce the contract
        let norm = amp.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Inconsistency(format!(
                "purification norm {norm} drifted from 1"
            )));
        }
        amp /= c(norm);
        PureState::new(labels, amp)
    }

    /// Purification of the maximally mixed secret 1/r.
    pub fn uniform_purification(&self) -> Result<PureState> {
        let r = self.rank();
        self.purify(&DensityMatrix::maximally_mixed(Label::R, r))
    }

    /// The three candidate recovery maps U_a = fold(t, a). No unitarity is
    /// imposed here; imperfect schemes return non-unitary candidates.
    pub fn recovery_unitaries(&self) -> [ComplexMatrix; 3] {
        [
            self.tensor.fold(Party::P1),
            self.tensor.fold(Party::P2),
            self.tensor.fold(Party::P3),
        ]
    }

    /// Simulate the full erasure channel: encode the secret, erase party
    /// `erased`, let the survivors apply U_a†, and compare what lands in R
    /// against the sent secret.
    pub fn recover(
        &self,
        secret: &DensityMatrix,
        erased: Party,
    ) -> Result<RecoveryResult> {
        if !self.is_uniform() {
            return Err(Error::Validation(
                "recovery is defined for uniform party dimensions only".into(),
            ));
        }
        let d = self.party_dims()[0];
        let u = self.tensor.fold(erased);
        let res = unitarity(&u, UNITARITY_TOL)?;
        if !res.is_unitary {
            return Err(Error::RecoveryImpossible {
                party: erased,
                residual: res.deviation,
            });
        }
        let rho = self.encode(secret)?;
        let (pb, pc) = erased.others();
        // survivors first, erased party last
        let rho = rho.reordered(&[Label::P(pb), Label::P(pc), Label::P(erased)])?;
        let w = u.adjoint().kronecker(&ComplexMatrix::identity(d, d));
        let out = &w * rho.matrix() * w.adjoint();
        let sigma = DensityMatrix::trusted(
            vec![
                (Label::R, d),
                (Label::PPrime(erased), d),
                (Label::P(erased), d),
            ],
            out,
        );
        let recovered_secret = sigma.partial_trace(&[Label::R])?;
        let ancilla_state = sigma.partial_trace(&[Label::PPrime(erased), Label::P(erased)])?;
        let fidelity = uhlmann_fidelity(&recovered_secret, secret)?;
        Ok(RecoveryResult {
            recovered_secret,
            ancilla_state,
            fidelity,
        })
    }
}

fn validate_secret(secret: &DensityMatrix, r: usize) -> Result<()> {
    if secret.dim() != r {
        return Err(Error::Dimension(format!(
            "secret has dimension {}, code space has rank {r}",
            secret.dim()
        )));
    }
    Ok(())
}

/// Uhlmann fidelity F(ρ,σ) = (Tr √(√ρ σ √ρ))², clamped to [0,1].
pub fn uhlmann_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Dimension("fidelity of unequal dimensions".into()));
    }
    let sqrt_rho = crate::tensor::hermitian_map(rho.matrix(), |x| x.max(0.0).sqrt());
    let m = &sqrt_rho * sigma.matrix() * &sqrt_rho;
    let tr: f64 = crate::tensor::hermitian_eigenvalues(&m)
        .into_iter()
        .map(|x| x.max(0.0).sqrt())
        .sum();
    Ok((tr * tr).clamp(0.0, 1.0))
}

/// Eigendecomposition with deterministic ordering and phases: ascending
/// eigenvalues, first component of magnitude above 1e-12 made real
/// positive.
fn deterministic_eigen(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let (vals, mut vecs) = hermitian_eigen(m);
    for k in 0..vecs.ncols() {
        let col = vecs.column(k);
        if let Some(lead) = col.iter().find(|x| x.norm() > 1e-12) {
            let phase = lead / lead.norm();
            let fix = phase.conj();
            let fixed = col * fix;
            vecs.set_column(k, &fixed);
        }
    }
    (vals, vecs)
}

/// Permutation code basis |ĩ⟩ = (1/√d) Σ_s |σ1^i(s) σ2^i(s) σ3^i(s)⟩ with
/// exponents i = 1..d (external basis index i−1).
pub fn permutation_code(
    d: usize,
    sigma1: &Permutation,
    sigma2: &Permutation,
    sigma3: &Permutation,
) -> Result<Tensor4> {
    for (k, s) in [sigma1, sigma2, sigma3].iter().enumerate() {
        if s.len() != d {
            return Err(Error::Validation(format!(
                "sigma{} acts on {} points, expected {d}",
                k + 1,
                s.len()
            )));
        }
    }
    let mut t = Tensor4::zeros([d, d, d, d])?;
    for j in 0..d {
        let i = j + 1;
        let p1 = sigma1.power(i);
        let p2 = sigma2.power(i);
        let p3 = sigma3.power(i);
        for s in 0..d {
            let (a, b, cc) = (p1.apply(s), p2.apply(s), p3.apply(s));
            t.set(j, a, b, cc, t.get(j, a, b, cc) + c(1.0));
        }
    }
    Ok(t)
}

/// First witness of a pairwise-collision violation, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ortho2Violation {
    /// Legs a < b (1-based).
    pub legs: (usize, usize),
    /// Permutation power i ∈ 1..d−1 and point s.
    pub power: usize,
    pub point: usize,
}

/// Check σ_a^i(s) ≠ σ_b^i(s) for all leg pairs a ≠ b, all powers
/// i ∈ {1..d−1}, and all points s.
pub fn check_ortho2(
    d: usize,
    sigma1: &Permutation,
    sigma2: &Permutation,
    sigma3: &Permutation,
) -> Result<Option<Ortho2Violation>> {
    let sigmas = [sigma1, sigma2, sigma3];
    for s in &sigmas {
        if s.len() != d {
            return Err(Error::Validation("permutation size mismatch".into()));
        }
    }
    for a in 0..3 {
        for b in (a + 1)..3 {
            for i in 1..d {
                let pa = sigmas[a].power(i);
                let pb = sigmas[b].power(i);
                for s in 0..d {
                    if pa.apply(s) == pb.apply(s) {
                        return Ok(Some(Ortho2Violation {
                            legs: (a + 1, b + 1),
                            power: i,
                            point: s,
                        }));
                    }
                }
            }
        }
    }
    Ok(None)
}

/// Shift code |ĩ⟩ = (1/√d) Σ_s |s, s+k1·i, s+k2·i⟩ (mod d), exponents
/// i = 1..d.
pub fn shift_code(d: usize, k1: usize, k2: usize) -> Result<Tensor4> {
    if d < 2 {
        return Err(Error::Validation(format!("dimension d={d} must be >= 2")));
    }
    if k1.gcd(&d) != 1 {
        return Err(Error::Validation(format!("k1={k1} not coprime with d={d}")));
    }
    if k2.gcd(&d) != 1 {
        return Err(Error::Validation(format!("k2={k2} not coprime with d={d}")));
    }
    if k1 % d == k2 % d {
        return Err(Error::Validation(format!(
            "k1={k1} and k2={k2} coincide mod d={d}"
        )));
    }
    permutation_code(
        d,
        &Permutation::identity(d),
        &Permutation::shift(d, k1 % d),
        &Permutation::shift(d, k2 % d),
    )
}

/// VIP code t[i][j][k][l] = (1/√d) ω^{il} δ_{j,i+k} with ω = e^{2πi/d}:
/// a shift times a phase shift, read out on leg P1.
pub fn vip_code(d: usize) -> Result<Tensor4> {
    if d < 2 {
        return Err(Error::Validation(format!("dimension d={d} must be >= 2")));
    }
    let scale = 1.0 / (d as f64).sqrt();
    let omega = 2.0 * std::f64::consts::PI / d as f64;
    let mut t = Tensor4::zeros([d, d, d, d])?;
    for i in 0..d {
        for k in 0..d {
            let j = (i + k) % d;
            for l in 0..d {
                let phase = omega * (i * l) as f64;
                t.set(i, j, k, l, Complex64::from_polar(scale, phase));
            }
        }
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infotheory::{
        tripartite_information_purified, von_neumann_entropy, LogBase,
    };
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_secret(r: usize, seed: u64) -> DensityMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = ComplexMatrix::from_fn(r, r, |_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let m = &g * g.adjoint();
        let tr = m.trace().re;
        DensityMatrix::new(vec![(Label::R, r)], m / c(tr)).unwrap()
    }

    #[test]
    fn shift_code_3_1_2_is_the_textbook_scheme() {
        let t = shift_code(3, 1, 2).unwrap();
        let cs = CodeSpace::from_tensor(t.clone()).unwrap();
        assert_eq!(cs.rank(), 3);
        // exponent 3 = identity power: |s,s,s⟩ appears at external index 2
        let ghz = &cs.basis()[2];
        for s in 0..3 {
            let idx = (s * 3 + s) * 3 + s;
            assert!((ghz[idx] - c(1.0 / 3f64.sqrt())).norm() < 1e-12);
        }
        // the corrected third term of the i=2 basis vector is |210⟩
        let b2 = &cs.basis()[1]; // exponent 2: |s, s+2, s+4=s+1⟩
        let idx_210 = (2 * 3 + 1) * 3 + 0;
        assert!((b2[idx_210] - c(1.0 / 3f64.sqrt())).norm() < 1e-12);
        // fold P1 is a 9x9 permutation matrix
        let m = t.fold(Party::P1);
        for col in 0..9 {
            let ones = (0..9).filter(|&r| (m[(r, col)] - c(1.0)).norm() < 1e-15).count();
            let zeros = (0..9).filter(|&r| m[(r, col)].norm() < 1e-15).count();
            assert_eq!((ones, zeros), (1, 8));
        }
    }

    #[test]
    fn textbook_d3_tensor_constructs() {
        // |0~⟩ = (|000⟩+|111⟩+|222⟩)/√3, |1~⟩ = (|012⟩+|120⟩+|201⟩)/√3,
        // |2~⟩ = (|021⟩+|102⟩+|210⟩)/√3 (third term corrected to |210⟩).
        let kets: [[(usize, usize, usize); 3]; 3] = [
            [(0, 0, 0), (1, 1, 1), (2, 2, 2)],
            [(0, 1, 2), (1, 2, 0), (2, 0, 1)],
            [(0, 2, 1), (1, 0, 2), (2, 1, 0)],
        ];
        let mut t = Tensor4::zeros([3, 3, 3, 3]).unwrap();
        for (i, terms) in kets.iter().enumerate() {
            for &(s1, s2, s3) in terms {
                t.set(i, s1, s2, s3, c(1.0));
            }
        }
        let cs = CodeSpace::from_tensor(t).unwrap();
        // brute-force Gram as the oracle
        for i in 0..3 {
            for j in 0..3 {
                let g = cs.basis()[i].dotc(&cs.basis()[j]);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((g - c(expect)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn uncorrected_textbook_tensor_is_rejected() {
        // with the repeated |201⟩ term, ⟨1~|2~⟩ = 1/3 ≠ 0
        let kets: [[(usize, usize, usize); 3]; 3] = [
            [(0, 0, 0), (1, 1, 1), (2, 2, 2)],
            [(0, 1, 2), (1, 2, 0), (2, 0, 1)],
            [(0, 2, 1), (1, 0, 2), (2, 0, 1)],
        ];
        let mut t = Tensor4::zeros([3, 3, 3, 3]).unwrap();
        for (i, terms) in kets.iter().enumerate() {
            for &(s1, s2, s3) in terms {
                t.set(i, s1, s2, s3, c(1.0));
            }
        }
        assert!(matches!(
            CodeSpace::from_tensor(t),
            Err(Error::NotOrthonormal { .. })
        ));
    }

    #[test]
    fn constant_tensor_is_rank_one() {
        let d = 2usize;
        let v = 1.0 / (d as f64).powf(1.5);
        let t = Tensor4::new([d, d, d, d], vec![c(v); d * d * d * d]).unwrap();
        assert!(matches!(
            CodeSpace::from_tensor(t),
            Err(Error::NotOrthonormal { .. })
        ));
    }

    #[test]
    fn permutation_code_with_shifts_matches_shift_code() {
        let d = 3;
        let a = permutation_code(
            d,
            &Permutation::identity(d),
            &Permutation::shift(d, 1),
            &Permutation::shift(d, 2),
        )
        .unwrap();
        let b = shift_code(3, 1, 2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn identity_permutation_code_fails_orthonormality() {
        let d = 3;
        let id = Permutation::identity(d);
        let t = permutation_code(d, &id, &id, &id).unwrap();
        assert!(CodeSpace::from_tensor(t).is_err());
    }

    #[test]
    fn ortho2_examples() {
        let d = 3;
        assert_eq!(
            check_ortho2(
                d,
                &Permutation::identity(d),
                &Permutation::shift(d, 1),
                &Permutation::shift(d, 2)
            )
            .unwrap(),
            None
        );
        // equal pair violates immediately at i=1, s=0
        let v = check_ortho2(
            d,
            &Permutation::shift(d, 1),
            &Permutation::shift(d, 1),
            &Permutation::shift(d, 2),
        )
        .unwrap()
        .unwrap();
        assert_eq!((v.legs, v.power, v.point), ((1, 2), 1, 0));
        // d=4, shifts 1 and 2: k2 not coprime; exhaustive-scan oracle agrees
        let d = 4;
        let sig = [
            Permutation::identity(d),
            Permutation::shift(d, 1),
            Permutation::shift(d, 2),
        ];
        let got = check_ortho2(d, &sig[0], &sig[1], &sig[2]).unwrap();
        let mut oracle = None;
        'outer: for a in 0..3 {
            for b in (a + 1)..3 {
                for i in 1..d {
                    for s in 0..d {
                        if sig[a].power(i).apply(s) == sig[b].power(i).apply(s) {
                            oracle = Some(Ortho2Violation {
                                legs: (a + 1, b + 1),
                                power: i,
                                point: s,
                            });
                            break 'outer;
                        }
                    }
                }
            }
        }
        assert!(oracle.is_some());
        assert_eq!(got, oracle);
    }

    #[test]
    fn shift_code_validation() {
        assert!(matches!(shift_code(4, 2, 3), Err(Error::Validation(_))));
        // d=2: the only unit is 1, so no k2 ≠ k1 exists
        assert!(shift_code(2, 1, 3).is_err());
        assert!(shift_code(5, 2, 3).is_ok());
    }

    #[test]
    fn shift_code_5_is_multiunitary() {
        let t = shift_code(5, 2, 3).unwrap();
        let rep = t.multiunitarity_report(UNITARITY_TOL).unwrap();
        assert!(rep.all_unitary());
        assert!(rep.max_deviation() < 1e-12);
    }

    #[test]
    fn shift_code_even_d_loses_the_p1_folding() {
        // with both k coprime to an even d, k2−k1 is even, and the map
        // (i, s) ↦ (s+k1·i, s+k2·i) cannot be injective: the leg-P1
        // folding is not a permutation matrix.
        let t = shift_code(4, 1, 3).unwrap();
        let rep = t.multiunitarity_report(UNITARITY_TOL).unwrap();
        let rs = rep.residuals.unwrap();
        assert!(!rs[0].is_unitary);
        assert!(rs[1].is_unitary && rs[2].is_unitary);
        // the code space itself is still orthonormal
        assert!(CodeSpace::from_tensor(t).is_ok());
    }

    #[test]
    fn vip_entries_at_d2() {
        let t = vip_code(2).unwrap();
        let s = 1.0 / 2f64.sqrt();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let expect = if j == (i + k) % 2 {
                            c(s * if i * l % 2 == 1 { -1.0 } else { 1.0 })
                        } else {
                            c(0.0)
                        };
                        assert!((t.get(i, j, k, l) - expect).norm() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn vip_foldings() {
        for d in 2..=5usize {
            let t = vip_code(d).unwrap();
            let rep = t.multiunitarity_report(UNITARITY_TOL).unwrap();
            let rs = rep.residuals.unwrap();
            assert!(rs[0].is_unitary && rs[1].is_unitary);
            assert!(!rs[2].is_unitary);
            // explicit diagonalization of tᴳ(tᴳ)† gives eigenvalues {0, d},
            // so ‖tᴳ‖² = d and the residual is d−1.
            assert!((rep.norms[2] * rep.norms[2] - d as f64).abs() < 1e-9);
            assert!(rs[2].deviation >= d as f64 - 1.0 - 1e-9);
        }
    }

    #[test]
    fn purify_pure_secret_is_product() {
        let cs = CodeSpace::from_tensor(shift_code(3, 1, 2).unwrap()).unwrap();
        let mut m = ComplexMatrix::zeros(3, 3);
        m[(0, 0)] = c(1.0);
        let secret = DensityMatrix::new(vec![(Label::R, 3)], m).unwrap();
        let phi = cs.purify(&secret).unwrap();
        // product across R | P1P2P3: entanglement entropy of the cut is 0
        assert!(phi.entropy_across_nats(&[Label::R]).unwrap() < 1e-10);
        // and the P-side is exactly |0~⟩
        let rho_p = phi
            .partial_trace(&[
                Label::P(Party::P1),
                Label::P(Party::P2),
                Label::P(Party::P3),
            ])
            .unwrap();
        let b0 = &cs.basis()[0];
        let overlap = (b0.adjoint() * rho_p.matrix() * b0)[(0, 0)].re;
        assert!((overlap - 1.0).abs() < 1e-10);
    }

    #[test]
    fn purify_uniform_secret() {
        let cs = CodeSpace::from_tensor(shift_code(3, 1, 2).unwrap()).unwrap();
        let phi = cs.uniform_purification().unwrap();
        // (1/√r) Σ |i⟩|ĩ⟩: overlap with each |i⟩⊗|ĩ⟩ is 1/√r
        let n = 27;
        for i in 0..3 {
            let mut probe = DVector::from_element(3 * n, Complex64::default());
            for x in 0..n {
                probe[i * n + x] = cs.basis()[i][x];
            }
            let ov = probe.dotc(phi.amplitudes());
            assert!((ov - c(1.0 / 3f64.sqrt())).norm() < 1e-10);
        }
    }

    #[test]
    fn purify_matches_direct_assembly() {
        let cs = CodeSpace::from_tensor(shift_code(3, 1, 2).unwrap()).unwrap();
        let secret = random_secret(3, 7);
        let phi = cs.purify(&secret).unwrap();
        let rho_p = phi
            .partial_trace(&[
                Label::P(Party::P1),
                Label::P(Party::P2),
                Label::P(Party::P3),
            ])
            .unwrap();
        // direct matrix assembly oracle: Σ ρ_ij |ĩ⟩⟨j̃|
        let direct = cs.encode(&secret).unwrap();
        assert!((rho_p.matrix() - direct.matrix()).norm() < 1e-10);
        // spectrum of the R marginal matches the secret's spectrum
        let rho_r = phi.partial_trace(&[Label::R]).unwrap();
        let a = rho_r.eigenvalues();
        let b = secret.eigenvalues();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn purify_rejects_bad_secrets() {
        let cs = CodeSpace::from_tensor(shift_code(3, 1, 2).unwrap()).unwrap();
        let m = ComplexMatrix::identity(3, 3) * c(0.9 / 3.0);
        assert!(DensityMatrix::new(vec![(Label::R, 3)], m).is_err());
        let secret2 = random_secret(2, 1);
        assert!(cs.purify(&secret2).is_err());
    }

    #[test]
    fn recover_shift_code_any_party() {
        let cs = CodeSpace::from_tensor(shift_code(3, 1, 2).unwrap()).unwrap();
        for seed in [1u64, 2, 3] {
            let secret = random_secret(3, seed);
            for erased in Party::ALL {
                let out = cs.recover(&secret, erased).unwrap();
                assert!(out.fidelity >= 1.0 - 1e-10, "fidelity {}", out.fidelity);
                // ancilla is maximally entangled: both marginals are 1/d
                let anc = out
                    .ancilla_state
                    .partial_trace(&[Label::P(erased)])
                    .unwrap();
                let dev = (anc.matrix() - ComplexMatrix::identity(3, 3) / c(3.0)).norm();
                assert!(dev < 1e-9);
            }
        }
    }

    #[test]
    fn recover_vip_p3_fails_with_residual() {
        let cs = CodeSpace::from_tensor(vip_code(3).unwrap()).unwrap();
        let secret = random_secret(3, 11);
        for erased in [Party::P1, Party::P2] {
            let out = cs.recover(&secret, erased).unwrap();
            assert!(out.fidelity >= 1.0 - 1e-10);
        }
        match cs.recover(&secret, Party::P3) {
            Err(Error::RecoveryImpossible { party, residual }) => {
                assert_eq!(party, Party::P3);
                assert!(residual >= 2.0 - 1e-9); // d − 1
            }
            other => panic!("expected recovery failure, got {other:?}"),
        }
    }

    #[test]
    fn ancilla_independent_of_secret() {
        let cs = CodeSpace::from_tensor(shift_code(3, 1, 2).unwrap()).unwrap();
        let mut reference: Option<DensityMatrix> = None;
        for seed in 0..10u64 {
            let out = cs.recover(&random_secret(3, 100 + seed), Party::P2).unwrap();
            if let Some(prev) = &reference {
                let dist = operator_norm(&(out.ancilla_state.matrix() - prev.matrix())).unwrap();
                assert!(dist < 1e-9);
            } else {
                reference = Some(out.ancilla_state);
            }
        }
    }

    #[test]
    fn single_party_marginals_maximally_mixed() {
        let cs = CodeSpace::from_tensor(shift_code(5, 1, 2).unwrap()).unwrap();
        let secret = random_secret(5, 3);
        let rho = cs.encode(&secret).unwrap();
        for p in Party::ALL {
            let marginal = rho.partial_trace(&[Label::P(p)]).unwrap();
            let dev =
                operator_norm(&(marginal.matrix() - ComplexMatrix::identity(5, 5) / c(5.0)))
                    .unwrap();
            assert!(dev < 1e-9);
        }
    }

    #[test]
    fn uniform_purification_has_minimal_i3() {
        let cs = CodeSpace::from_tensor(shift_code(3, 1, 2).unwrap()).unwrap();
        let phi = cs.uniform_purification().unwrap();
        let info = tripartite_information_purified(&phi, LogBase::Bits).unwrap();
        let expect = -2.0 * 3f64.log2();
        assert!((info.value.value - expect).abs() < 1e-9);
    }

    #[test]
    fn ortho2_violation_raises_i3() {
        // d=2, σ1 = id, σ2 = σ3 = transposition: valid code space but the
        // (2,3) pair collides, so I₃ sits strictly above −2 log 2.
        let d = 2;
        let swap = Permutation::new(vec![1, 0]).unwrap();
        let t = permutation_code(d, &Permutation::identity(d), &swap, &swap).unwrap();
        let cs = CodeSpace::from_tensor(t).unwrap();
        let phi = cs.uniform_purification().unwrap();
        let info = tripartite_information_purified(&phi, LogBase::Bits).unwrap();
        let s_r = von_neumann_entropy(&phi.partial_trace(&[Label::R]).unwrap(), LogBase::Bits)
            .unwrap()
            .value;
        assert!(info.value.value + 2.0 * s_r > 0.1);
    }
}
