//! Certification of the ((2,3)) threshold property through its three
//! equivalent characterizations, sandwich-bound checks, and audits of
//! imperfect schemes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::codespace::CodeSpace;
use crate::error::{Error, Result};
use crate::infotheory::{
    mutual_information, tripartite_information_purified, DensityMatrix, Label, LogBase,
};
use crate::random_lab::{hs_random_density, rng_from_seed, sample_secrets, trial_seed};
use crate::tensor::{operator_norm, ComplexMatrix, MultiUnitarityReport, Party};

/// Entropy identities carry one more eigendecomposition of error than the
/// linear-algebra residuals.
pub const ENTROPY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Perfect,
    Imperfect,
    Invalid,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecoveryCheck {
    pub erased: Party,
    /// Whether the candidate recovery map is unitary at the certification
    /// tolerance.
    pub feasible: bool,
    pub unitarity_residual: f64,
    /// Worst Uhlmann fidelity over the sampled secrets; None when
    /// infeasible.
    pub worst_fidelity: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchemeReport {
    pub verdict: Verdict,
    /// I₃ = −2S(R) on the uniform purification, within ENTROPY_TOL.
    pub i3_minimal: bool,
    pub i3_residual_bits: f64,
    pub multiunitary: MultiUnitarityReport,
    pub recovery: [RecoveryCheck; 3],
    /// ‖ρ̃^{P_a} − 1/d‖ maximized over sampled secrets, per party.
    pub marginal_residuals: [f64; 3],
    /// Max pairwise distance of single-party marginals across secrets.
    pub marginal_independence_residual: f64,
    /// Max over sampled secrets of |I₃ + 2S(ρ)| in bits.
    pub per_secret_i3_residual_bits: f64,
    /// The three certification routes must agree; disagreement is a bug
    /// signal, not a property of the scheme.
    pub route_agreement: bool,
    pub n_secrets: usize,
    pub seed: u64,
    pub tol: f64,
    pub notes: Vec<String>,
}

impl SchemeReport {
    pub fn is_perfect(&self) -> bool {
        self.verdict == Verdict::Perfect
    }
}

/// Certify or refute the threshold property by running all equivalent
/// checks: I₃ minimality, multi-unitarity, erasure recovery, marginal
/// structure, and per-secret I₃.
pub fn certify(cs: &CodeSpace, n_secrets: usize, seed: u64, tol: f64) -> Result<SchemeReport> {
    if !cs.is_uniform() {
        return Err(Error::Validation(
            "certification is defined for uniform party dimensions".into(),
        ));
    }
    let d = cs.party_dims()[0];
    let mut notes = Vec::new();

    let mut rng = rng_from_seed(trial_seed(seed, 0));
    let secrets = sample_secrets(d, n_secrets.max(3), &mut rng);

    // (i) I3 on the uniform purification
    let phi = cs.uniform_purification()?;
    let info = tripartite_information_purified(&phi, LogBase::Bits)?;
    let s_r_bits = LogBase::Bits.from_nats(info.reference_entropy_nats.unwrap());
    let i3_residual_bits = (info.value.value + 2.0 * s_r_bits).abs();
    let i3_minimal = i3_residual_bits <= ENTROPY_TOL;

    // (ii) multi-unitarity
    let multiunitary = cs.tensor().multiunitarity_report(tol)?;
    let residuals = multiunitary
        .residuals
        .ok_or_else(|| Error::Inconsistency("uniform tensor with rectangular foldings".into()))?;

    // (iii) recovery per erased party
    let mut recovery = Vec::with_capacity(3);
    for (k, erased) in Party::ALL.into_iter().enumerate() {
        if residuals[k].is_unitary {
            let mut worst = f64::INFINITY;
            for secret in &secrets {
                let out = cs.recover(secret, erased)?;
                worst = worst.min(out.fidelity);
            }
            recovery.push(RecoveryCheck {
                erased,
                feasible: true,
                unitarity_residual: residuals[k].deviation,
                worst_fidelity: Some(worst),
            });
        } else {
            recovery.push(RecoveryCheck {
                erased,
                feasible: false,
                unitarity_residual: residuals[k].deviation,
                worst_fidelity: None,
            });
        }
    }
    let recovery: [RecoveryCheck; 3] = recovery.try_into().unwrap();

    // (iv) marginal structure across secrets
    let mixed = ComplexMatrix::identity(d, d) / Complex64::new(d as f64, 0.0);
    let mut marginal_residuals = [0.0f64; 3];
    let mut marginal_independence_residual = 0.0f64;
    let mut reference_marginals: Option<Vec<ComplexMatrix>> = None;
    for secret in &secrets {
        let rho = cs.encode(secret)?;
        let marginals: Vec<ComplexMatrix> = Party::ALL
            .iter()
            .map(|&p| Ok(rho.partial_trace(&[Label::P(p)])?.matrix().clone()))
            .collect::<Result<_>>()?;
        for (k, m) in marginals.iter().enumerate() {
            marginal_residuals[k] = marginal_residuals[k].max(operator_norm(&(m - &mixed))?);
        }
        if let Some(reference) = &reference_marginals {
            for (m, r) in marginals.iter().zip(reference) {
                marginal_independence_residual =
                    marginal_independence_residual.max(operator_norm(&(m - r))?);
            }
        } else {
            reference_marginals = Some(marginals);
        }
    }

    // (v) I3 = −2S(ρ) for every sampled secret
    let mut per_secret_i3_residual_bits = 0.0f64;
    for secret in &secrets {
        let phi = cs.purify(secret)?;
        let info = tripartite_information_purified(&phi, LogBase::Bits)?;
        let s_bits = LogBase::Bits.from_nats(info.reference_entropy_nats.unwrap());
        per_secret_i3_residual_bits =
            per_secret_i3_residual_bits.max((info.value.value + 2.0 * s_bits).abs());
    }

    // route verdicts
    let route_mu = multiunitary.all_unitary();
    let route_i3 = i3_minimal;
    let route_recovery = recovery
        .iter()
        .all(|r| r.feasible && r.worst_fidelity.unwrap_or(0.0) >= 1.0 - ENTROPY_TOL);
    let route_agreement = route_mu == route_i3 && route_i3 == route_recovery;
    if !route_agreement {
        notes.push(format!(
            "internal-inconsistency: certification routes disagree \
             (multiunitary={route_mu}, i3={route_i3}, recovery={route_recovery}); \
             the routes are provably equivalent, so this indicates a bug"
        ));
    }
    if route_mu && per_secret_i3_residual_bits > ENTROPY_TOL {
        notes.push(format!(
            "internal-inconsistency: multi-unitary scheme with per-secret I3 residual {per_secret_i3_residual_bits:.3e} bits"
        ));
    }

    let all_pass = route_mu
        && route_i3
        && route_recovery
        && marginal_residuals.iter().all(|&r| r <= tol)
        && marginal_independence_residual <= tol
        && per_secret_i3_residual_bits <= ENTROPY_TOL;
    let feasible_count = recovery.iter().filter(|r| r.feasible).count();
    let verdict = if all_pass {
        Verdict::Perfect
    } else if feasible_count >= 1 {
        Verdict::Imperfect
    } else {
        Verdict::Invalid
    };

    Ok(SchemeReport {
        verdict,
        i3_minimal,
        i3_residual_bits,
        multiunitary,
        recovery,
        marginal_residuals,
        marginal_independence_residual,
        per_secret_i3_residual_bits,
        route_agreement,
        n_secrets: secrets.len(),
        seed,
        tol,
        notes,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartyMiBound {
    pub party: Party,
    /// I(R, P_a) in the report base.
    pub mutual_information: f64,
    /// 2 log ‖fold(t, a)‖ in the report base.
    pub bound: f64,
    pub slack: f64,
}

/// The sandwich −2S(R) ≤ I₃ ≤ −2S(R) + 2Σ log‖fold(t,a)‖ evaluated on one
/// secret, with the per-party mutual-information bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundCheck {
    pub base: LogBase,
    pub lower: f64,
    pub value: f64,
    pub upper: f64,
    pub slack_low: f64,
    pub slack_high: f64,
    pub per_party: [PartyMiBound; 3],
}

pub fn bound_check(cs: &CodeSpace, secret: &DensityMatrix, base: LogBase) -> Result<BoundCheck> {
    if !cs.is_uniform() {
        return Err(Error::Validation(
            "bound check is defined for uniform party dimensions".into(),
        ));
    }
    let phi = cs.purify(secret)?;
    let info = tripartite_information_purified(&phi, base)?;
    let s_r = base.from_nats(info.reference_entropy_nats.unwrap());
    let value = info.value.value;
    let lower = -2.0 * s_r;

    let mut norm_sum = 0.0;
    let mut per_party = Vec::with_capacity(3);
    let full = phi.partial_trace(&[
        Label::R,
        Label::P(Party::P1),
        Label::P(Party::P2),
        Label::P(Party::P3),
    ])?;
    for leg in Party::ALL {
        let norm = operator_norm(&cs.tensor().fold(leg))?;
        let bound = 2.0 * base.log(norm.max(1e-300));
        norm_sum += bound;
        let mi = mutual_information(&full, &[Label::R], &[Label::P(leg)], base)?.value;
        per_party.push(PartyMiBound {
            party: leg,
            mutual_information: mi,
            bound,
            slack: bound - mi,
        });
    }
    let upper = lower + norm_sum;
    Ok(BoundCheck {
        base,
        lower,
        value,
        upper,
        slack_low: value - lower,
        slack_high: upper - value,
        per_party: per_party.try_into().unwrap(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairFeasibility {
    /// The surviving coalition.
    pub pair: (Party, Party),
    pub erased: Party,
    pub feasible: bool,
    pub unitarity_residual: f64,
    pub worst_fidelity: Option<f64>,
}

/// Coalition table for VIP-style imperfect schemes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VipAudit {
    pub pairs: [PairFeasibility; 3],
    /// I(R, P_a) on the uniform purification, bits.
    pub singleton_mi_bits: [f64; 3],
    /// I(R, P1P2P3) on the uniform purification, bits (2 log d).
    pub full_mi_bits: f64,
    /// I(R,P3) < I(R,P1P2P3): the VIP cannot recover alone.
    pub p3_cannot_recover_alone: bool,
    pub n_secrets: usize,
    pub seed: u64,
}

pub fn vip_audit(cs: &CodeSpace, n_secrets: usize, seed: u64) -> Result<VipAudit> {
    if !cs.is_uniform() {
        return Err(Error::Validation(
            "audit is defined for uniform party dimensions".into(),
        ));
    }
    let d = cs.party_dims()[0];
    let mut rng = rng_from_seed(trial_seed(seed, 0));
    let secrets = sample_secrets(d, n_secrets.max(3), &mut rng);

    let mut pairs = Vec::with_capacity(3);
    for erased in Party::ALL {
        let (pb, pc) = erased.others();
        let res = crate::tensor::unitarity(&cs.tensor().fold(erased), 1e-9)?;
        let worst_fidelity = if res.is_unitary {
            let mut worst = f64::INFINITY;
            for secret in &secrets {
                worst = worst.min(cs.recover(secret, erased)?.fidelity);
            }
            Some(worst)
        } else {
            None
        };
        pairs.push(PairFeasibility {
            pair: (pb, pc),
            erased,
            feasible: res.is_unitary,
            unitarity_residual: res.deviation,
            worst_fidelity,
        });
    }

    let phi = cs.uniform_purification()?;
    let full = phi.partial_trace(&[
        Label::R,
        Label::P(Party::P1),
        Label::P(Party::P2),
        Label::P(Party::P3),
    ])?;
    let mut singleton_mi_bits = [0.0f64; 3];
    for (k, p) in Party::ALL.into_iter().enumerate() {
        singleton_mi_bits[k] =
            mutual_information(&full, &[Label::R], &[Label::P(p)], LogBase::Bits)?.value;
    }
    let full_mi_bits = mutual_information(
        &full,
        &[Label::R],
        &[
            Label::P(Party::P1),
            Label::P(Party::P2),
            Label::P(Party::P3),
        ],
        LogBase::Bits,
    )?
    .value;
    Ok(VipAudit {
        pairs: pairs.try_into().unwrap(),
        singleton_mi_bits,
        full_mi_bits,
        p3_cannot_recover_alone: singleton_mi_bits[2] < full_mi_bits - ENTROPY_TOL,
        n_secrets: secrets.len(),
        seed,
    })
}

/// Monte-Carlo search for the largest I₃ over sampled secrets: evidence
/// for or against monogamy (I₃ ≤ 0), never a proof.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonogamyProbe {
    pub base: LogBase,
    pub max_i3: f64,
    pub argmax_description: String,
    pub argmax_secret: DensityMatrix,
    pub n_secrets: usize,
    pub seed: u64,
}

pub fn monogamy_probe(cs: &CodeSpace, n_secrets: usize, seed: u64) -> Result<MonogamyProbe> {
    if !cs.is_uniform() {
        return Err(Error::Validation(
            "probe is defined for uniform party dimensions".into(),
        ));
    }
    let d = cs.party_dims()[0];
    let mut rng = rng_from_seed(trial_seed(seed, 0));
    // fixed extremes first: uniform and every pure basis secret
    let mut secrets: Vec<(String, DensityMatrix)> =
        vec![("uniform".into(), DensityMatrix::maximally_mixed(Label::R, d))];
    for i in 0..d {
        let mut m = ComplexMatrix::zeros(d, d);
        m[(i, i)] = Complex64::new(1.0, 0.0);
        secrets.push((format!("pure[{i}]"), DensityMatrix::trusted(vec![(Label::R, d)], m)));
    }
    let mut k = 0usize;
    while secrets.len() < n_secrets.max(d + 1) {
        secrets.push((format!("hs[{k}]"), hs_random_density(Label::R, d, &mut rng)));
        k += 1;
    }

    let mut best: Option<(f64, usize)> = None;
    for (idx, (_, secret)) in secrets.iter().enumerate() {
        let phi = cs.purify(secret)?;
        let info = tripartite_information_purified(&phi, LogBase::Bits)?;
        if best.map(|(v, _)| info.value.value > v).unwrap_or(true) {
            best = Some((info.value.value, idx));
        }
    }
    let (max_i3, idx) = best.unwrap();
    let (desc, secret) = secrets.swap_remove(idx);
    Ok(MonogamyProbe {
        base: LogBase::Bits,
        max_i3,
        argmax_description: desc,
        argmax_secret: secret,
        n_secrets: secrets.len() + 1,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codespace::{permutation_code, shift_code, vip_code, Permutation};

    fn space(t: crate::tensor::Tensor4) -> CodeSpace {
        CodeSpace::from_tensor(t).unwrap()
    }

    #[test]
    fn certify_shift_7_2_5_perfect() {
        let report = certify(&space(shift_code(7, 2, 5).unwrap()), 5, 1, 1e-9).unwrap();
        assert_eq!(report.verdict, Verdict::Perfect);
        assert!(report.route_agreement);
        assert!(report.i3_residual_bits < 1e-9);
        assert!(report.per_secret_i3_residual_bits < 1e-8);
        assert!(report.marginal_residuals.iter().all(|&r| r < 1e-9));
        assert!(report.marginal_independence_residual < 1e-9);
        assert!(report.notes.is_empty());
    }

    #[test]
    fn certify_vip_imperfect_only_p3() {
        let report = certify(&space(vip_code(4).unwrap()), 4, 2, 1e-9).unwrap();
        assert_eq!(report.verdict, Verdict::Imperfect);
        assert!(report.route_agreement);
        for check in &report.recovery {
            match check.erased {
                Party::P3 => {
                    assert!(!check.feasible);
                    assert!(check.unitarity_residual >= 3.0 - 1e-9);
                }
                _ => {
                    assert!(check.feasible);
                    assert!(check.worst_fidelity.unwrap() >= 1.0 - 1e-10);
                }
            }
        }
    }

    #[test]
    fn certify_ortho2_violation_not_minimal() {
        let swap = Permutation::new(vec![1, 0]).unwrap();
        let t = permutation_code(2, &Permutation::identity(2), &swap, &swap).unwrap();
        let report = certify(&space(t), 3, 3, 1e-9).unwrap();
        assert!(!report.i3_minimal);
        assert!(report.i3_residual_bits > 0.1);
        assert!(report.route_agreement);
        assert_ne!(report.verdict, Verdict::Perfect);
    }

    #[test]
    fn certify_is_deterministic() {
        let cs = space(shift_code(5, 1, 3).unwrap());
        let a = certify(&cs, 6, 9, 1e-9).unwrap();
        let b = certify(&cs, 6, 9, 1e-9).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn bound_check_perfect_scheme_collapses() {
        let cs = space(shift_code(3, 1, 2).unwrap());
        let mut rng = rng_from_seed(4);
        let secret = hs_random_density(Label::R, 3, &mut rng);
        let b = bound_check(&cs, &secret, LogBase::Bits).unwrap();
        // all three folding norms are 1, so the sandwich closes
        assert!((b.upper - b.lower).abs() < 1e-9);
        assert!(b.slack_low >= -1e-8 && b.slack_high >= -1e-8);
        for p in &b.per_party {
            assert!(p.slack >= -1e-8);
        }
    }

    #[test]
    fn bound_check_vip() {
        for d in 2..=4usize {
            let cs = space(vip_code(d).unwrap());
            let uniform = DensityMatrix::maximally_mixed(Label::R, d);
            let b = bound_check(&cs, &uniform, LogBase::Bits).unwrap();
            let log_d = (d as f64).log2();
            // I(R,P3) ≤ log d
            assert!(b.per_party[2].mutual_information <= log_d + 1e-9);
            assert!((b.per_party[2].bound - log_d).abs() < 1e-9);
            // I3 = −log d for the maximally mixed secret
            assert!((b.value + log_d).abs() < 1e-8);
            assert!(b.slack_low >= -1e-8 && b.slack_high >= -1e-8);
        }
    }

    #[test]
    fn vip_audit_coalitions() {
        let audit = vip_audit(&space(vip_code(3).unwrap()), 4, 5).unwrap();
        assert!(audit.pairs[0].feasible); // {P2,P3}
        assert!(audit.pairs[1].feasible); // {P1,P3}
        assert!(!audit.pairs[2].feasible); // {P1,P2}
        assert_eq!(audit.pairs[2].erased, Party::P3);
        assert!(audit.p3_cannot_recover_alone);
        assert!((audit.full_mi_bits - 2.0 * 3f64.log2()).abs() < 1e-8);
        assert!(audit.singleton_mi_bits[2] <= 3f64.log2() + 1e-9);
    }

    #[test]
    fn shift_audit_all_pairs_feasible() {
        let audit = vip_audit(&space(shift_code(3, 1, 2).unwrap()), 4, 5).unwrap();
        assert!(audit.pairs.iter().all(|p| p.feasible));
        for mi in audit.singleton_mi_bits {
            assert!(mi.abs() < 1e-8);
        }
    }

    #[test]
    fn monogamy_probe_vip() {
        let probe = monogamy_probe(&space(vip_code(2).unwrap()), 50, 6).unwrap();
        // pure secrets reach I3 = 0; nothing sampled should exceed it
        assert!(probe.max_i3 <= 1e-8, "max I3 {}", probe.max_i3);
        assert!(probe.max_i3 > -0.5);
        assert!(probe.argmax_description.starts_with("pure") || probe.max_i3.abs() < 1e-8);
    }
}
