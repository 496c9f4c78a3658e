use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use triptych::codespace::CodeSpace;
use triptych::infotheory::{DensityMatrix, Label, LogBase};
use triptych::random_lab::{
    self, gaussian_unitary_comparison, hs_random_density, i3_sweep, norm_bound, rng_from_seed,
    write_trials_csv, Seminorm, SweepSummary, TrialRecord,
};
use triptych::scheme::SchemeSpec;
use triptych::verifier::{certify, monogamy_probe, vip_audit, Verdict};
use triptych::{ComplexMatrix, Error, Party};

/// Construct, certify, and stress-test ((2,3)) quantum secret-sharing
/// schemes.
#[derive(Parser)]
#[command(name = "triptych", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a scheme from constructor parameters and write it as JSON.
    Build(BuildArgs),
    /// Run the full threshold-property certification on a scheme file.
    Certify(CertifyArgs),
    /// Simulate erasure of one party and recovery by the survivors.
    Recover(RecoverArgs),
    /// Coalition audit and monogamy probe for (possibly imperfect) schemes.
    Audit(AuditArgs),
    /// Random-unitary norm and tripartite-information sweep (CSV + summary).
    Sweep(SweepArgs),
    /// Compare Gaussian and Haar-unitary expected seminorms.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Shift,
    Permutation,
    Vip,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaseArg {
    Bits,
    Nats,
}

impl From<BaseArg> for LogBase {
    fn from(b: BaseArg) -> Self {
        match b {
            BaseArg::Bits => LogBase::Bits,
            BaseArg::Nats => LogBase::Nats,
        }
    }
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    k1: Option<usize>,
    #[arg(long)]
    k2: Option<usize>,
    /// Comma-separated images, e.g. "1,2,0" (permutation kind only).
    #[arg(long)]
    sigma1: Option<String>,
    #[arg(long)]
    sigma2: Option<String>,
    #[arg(long)]
    sigma3: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    #[arg(long)]
    scheme: PathBuf,
    #[arg(long, default_value_t = 10)]
    secrets: usize,
    #[arg(long, env = "TRIPTYCH_SEED", default_value_t = random_lab::DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Residuals in the report are labeled in this base.
    #[arg(long, value_enum, default_value = "bits")]
    base: BaseArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RecoverArgs {
    #[arg(long)]
    scheme: PathBuf,
    /// Erased party: p1, p2 or p3.
    #[arg(long)]
    erased: String,
    /// "uniform", "pure:K" (basis state K), or "random" (seeded).
    #[arg(long, default_value = "random")]
    secret: String,
    #[arg(long, env = "TRIPTYCH_SEED", default_value_t = random_lab::DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long)]
    scheme: PathBuf,
    #[arg(long, default_value_t = 50)]
    secrets: usize,
    #[arg(long, env = "TRIPTYCH_SEED", default_value_t = random_lab::DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value = "bits")]
    base: BaseArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Single dimension "4" or inclusive range "2..6".
    #[arg(long)]
    d: String,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Secrets sampled per trial for the worst-case I₃ statistic.
    #[arg(long, default_value_t = 20)]
    secrets: usize,
    /// Confidence parameter: the slack bound holds with prob. 1 − e^{−μ}.
    #[arg(long, default_value_t = 3.0)]
    mu: f64,
    /// Overrides the norm-bound confidence (defaults to e^{−μ}).
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, env = "TRIPTYCH_SEED", default_value_t = random_lab::DEFAULT_SEED)]
    seed: u64,
    /// CSV destination for the per-trial records.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    /// Matrix size n.
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 300)]
    trials: usize,
    #[arg(long, value_enum, default_value = "operator")]
    seminorm: SeminormArg,
    #[arg(long, env = "TRIPTYCH_SEED", default_value_t = random_lab::DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SeminormArg {
    Operator,
    TripleMax,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = match cli.command {
        Command::Build(a) => cmd_build(a),
        Command::Certify(a) => cmd_certify(a),
        Command::Recover(a) => cmd_recover(a),
        Command::Audit(a) => cmd_audit(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Compare(a) => cmd_compare(a),
    };
    match run {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn emit<T: Serialize>(out: Option<&Path>, value: &T) -> triptych::Result<()> {
    let mut json = serde_json::to_string_pretty(value)?;
    json.push('\n');
    match out {
        Some(path) => fs::write(path, json)?,
        None => print!("{json}"),
    }
    Ok(())
}

fn parse_sigma(name: &str, raw: &Option<String>) -> triptych::Result<Vec<usize>> {
    let raw = raw
        .as_ref()
        .ok_or_else(|| Error::Validation(format!("--{name} is required for --kind permutation")))?;
    raw.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| Error::Validation(format!("--{name}: '{tok}' is not an index")))
        })
        .collect()
}

fn print_basis(cs: &CodeSpace) {
    let [r, d1, d2, d3] = cs.party_dims();
    if d1 * d2 * d3 > 216 || d1 > 10 || d2 > 10 || d3 > 10 {
        return;
    }
    for (i, v) in cs.basis().iter().enumerate().take(r) {
        let mut terms = Vec::new();
        for (k, amp) in v.iter().enumerate() {
            if amp.norm() < 1e-12 {
                continue;
            }
            let s3 = k % d3;
            let s2 = (k / d3) % d2;
            let s1 = k / (d2 * d3);
            let coeff = if amp.im.abs() < 1e-12 {
                format!("{:+.4}", amp.re)
            } else {
                format!("({:+.4}{:+.4}i)", amp.re, amp.im)
            };
            terms.push(format!("{coeff}|{s1}{s2}{s3}>"));
        }
        eprintln!("|{i}~> = {}", terms.join(" "));
    }
}

fn cmd_build(a: BuildArgs) -> triptych::Result<ExitCode> {
    let spec = match a.kind {
        KindArg::Shift => SchemeSpec::Shift {
            d: a.d,
            k1: a
                .k1
                .ok_or_else(|| Error::Validation("--k1 is required for --kind shift".into()))?,
            k2: a
                .k2
                .ok_or_else(|| Error::Validation("--k2 is required for --kind shift".into()))?,
            tensor: None,
        },
        KindArg::Permutation => SchemeSpec::Permutation {
            d: a.d,
            sigma1: parse_sigma("sigma1", &a.sigma1)?,
            sigma2: parse_sigma("sigma2", &a.sigma2)?,
            sigma3: parse_sigma("sigma3", &a.sigma3)?,
            tensor: None,
        },
        KindArg::Vip => SchemeSpec::Vip { d: a.d, tensor: None },
    };
    // validate before writing anything
    let cs = spec.codespace()?;
    print_basis(&cs);
    match &a.out {
        Some(path) => spec.save(path)?,
        None => emit(None, &spec)?,
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct CertifyOutput<'a> {
    base: LogBase,
    scheme_kind: &'a str,
    report: triptych::verifier::SchemeReport,
}

fn cmd_certify(a: CertifyArgs) -> triptych::Result<ExitCode> {
    if matches!(a.base, BaseArg::Nats) {
        return Err(Error::Validation(
            "certification reports are computed in bits; use --base bits".into(),
        ));
    }
    let spec = SchemeSpec::load(&a.scheme)?;
    let cs = spec.codespace()?;
    let report = certify(&cs, a.secrets, a.seed, a.tol)?;
    let verdict = report.verdict;
    eprintln!(
        "verdict: {} (i3 residual {:.3e} bits, max folding deviation {:.3e})",
        match verdict {
            Verdict::Perfect => "perfect",
            Verdict::Imperfect => "imperfect",
            Verdict::Invalid => "invalid",
        },
        report.i3_residual_bits,
        report.multiunitary.max_deviation(),
    );
    for check in &report.recovery {
        match (check.feasible, check.worst_fidelity) {
            (true, Some(f)) => eprintln!(
                "  erase {}: recoverable, worst fidelity {:.12}",
                check.erased, f
            ),
            _ => eprintln!(
                "  erase {}: NOT recoverable, unitarity residual {:.3e}",
                check.erased, check.unitarity_residual
            ),
        }
    }
    emit(
        a.out.as_deref(),
        &CertifyOutput {
            base: LogBase::Bits,
            scheme_kind: spec.kind_name(),
            report,
        },
    )?;
    Ok(if verdict == Verdict::Perfect {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn make_secret(spec: &str, r: usize, seed: u64) -> triptych::Result<DensityMatrix> {
    if spec == "uniform" {
        return Ok(DensityMatrix::maximally_mixed(Label::R, r));
    }
    if spec == "random" {
        let mut rng = rng_from_seed(seed);
        return Ok(hs_random_density(Label::R, r, &mut rng));
    }
    if let Some(k) = spec.strip_prefix("pure:") {
        let k: usize = k
            .parse()
            .map_err(|_| Error::Validation(format!("bad basis index in '{spec}'")))?;
        if k >= r {
            return Err(Error::Validation(format!(
                "basis index {k} out of range for rank {r}"
            )));
        }
        let mut m = ComplexMatrix::zeros(r, r);
        m[(k, k)] = Complex64::new(1.0, 0.0);
        return DensityMatrix::new(vec![(Label::R, r)], m);
    }
    Err(Error::Validation(format!(
        "unknown secret spec '{spec}' (use uniform, pure:K, or random)"
    )))
}

#[derive(Serialize)]
struct RecoveryFailure {
    recovery_impossible: bool,
    erased: Party,
    unitarity_residual: f64,
}

fn cmd_recover(a: RecoverArgs) -> triptych::Result<ExitCode> {
    let spec = SchemeSpec::load(&a.scheme)?;
    let cs = spec.codespace()?;
    let erased: Party = a.erased.parse()?;
    let secret = make_secret(&a.secret, cs.rank(), a.seed)?;
    match cs.recover(&secret, erased) {
        Ok(result) => {
            eprintln!("fidelity: {:.12}", result.fidelity);
            emit(a.out.as_deref(), &result)?;
            Ok(ExitCode::SUCCESS)
        }
        Err(Error::RecoveryImpossible { party, residual }) => {
            emit(
                a.out.as_deref(),
                &RecoveryFailure {
                    recovery_impossible: true,
                    erased: party,
                    unitarity_residual: residual,
                },
            )?;
            Ok(ExitCode::from(1))
        }
        Err(e) => Err(e),
    }
}

#[derive(Serialize)]
struct AuditOutput<'a> {
    base: LogBase,
    scheme_kind: &'a str,
    audit: triptych::verifier::VipAudit,
    monogamy: triptych::verifier::MonogamyProbe,
}

fn cmd_audit(a: AuditArgs) -> triptych::Result<ExitCode> {
    if matches!(a.base, BaseArg::Nats) {
        return Err(Error::Validation(
            "audits are computed in bits; use --base bits".into(),
        ));
    }
    let spec = SchemeSpec::load(&a.scheme)?;
    let cs = spec.codespace()?;
    let audit = vip_audit(&cs, a.secrets, a.seed)?;
    let monogamy = monogamy_probe(&cs, a.secrets, a.seed)?;
    let ok = monogamy.max_i3 <= 1e-8;
    eprintln!(
        "feasible pairs: {}; max sampled I3 = {:.6} bits ({})",
        audit.pairs.iter().filter(|p| p.feasible).count(),
        monogamy.max_i3,
        monogamy.argmax_description,
    );
    emit(
        a.out.as_deref(),
        &AuditOutput {
            base: LogBase::Bits,
            scheme_kind: spec.kind_name(),
            audit,
            monogamy,
        },
    )?;
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn parse_d_range(raw: &str) -> triptych::Result<Vec<usize>> {
    let bad = || Error::Validation(format!("bad dimension spec '{raw}' (use \"4\" or \"2..6\")"));
    if let Some((lo, hi)) = raw.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().parse().map_err(|_| bad())?;
        if lo < 2 || hi < lo {
            return Err(bad());
        }
        Ok((lo..=hi).collect())
    } else {
        let d: usize = raw.trim().parse().map_err(|_| bad())?;
        if d < 2 {
            return Err(bad());
        }
        Ok(vec![d])
    }
}

#[derive(Serialize)]
struct SweepOutput {
    base: LogBase,
    summaries: Vec<SweepSummary>,
}

fn cmd_sweep(a: SweepArgs) -> triptych::Result<ExitCode> {
    let dims = parse_d_range(&a.d)?;
    let mut all_records: Vec<TrialRecord> = Vec::new();
    let mut summaries = Vec::new();
    for d in dims {
        let (records, mut summary) = i3_sweep(d, a.trials, a.secrets, a.seed, a.mu)?;
        if let Some(delta) = a.delta {
            if !(0.0..1.0).contains(&delta) || delta <= 0.0 {
                return Err(Error::Validation("--delta must lie in (0,1)".into()));
            }
            summary.delta = delta;
            summary.norm_bound = norm_bound(delta);
            summary.norm_violation_count = records
                .iter()
                .filter(|r| r.norm_t.max(r.norm_r).max(r.norm_g) > summary.norm_bound)
                .count();
        }
        eprintln!(
            "d={d}: worst I3+2S(R) = {:.4} nats (bound {:.4}), max folded norm = {:.4} (bound {:.4})",
            summary.i3_worst.max,
            summary.bound_nats,
            summary.norm_t.max.max(summary.norm_r.max).max(summary.norm_g.max),
            summary.norm_bound,
        );
        all_records.extend(records);
        summaries.push(summary);
    }
    let file = fs::File::create(&a.out)?;
    write_trials_csv(file, &all_records)?;
    let violations = summaries
        .iter()
        .map(|s| s.violation_count + s.norm_violation_count + s.deterministic_violation_count)
        .sum::<usize>();
    emit(
        None,
        &SweepOutput {
            base: LogBase::Nats,
            summaries,
        },
    )?;
    Ok(if violations == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_compare(a: CompareArgs) -> triptych::Result<ExitCode> {
    let seminorm = match a.seminorm {
        SeminormArg::Operator => Seminorm::Operator,
        SeminormArg::TripleMax => Seminorm::TripleMax,
    };
    let stats = gaussian_unitary_comparison(a.d, a.trials, seminorm, a.seed)?;
    eprintln!(
        "E|g|/E|u| = {:.4} (CI {:.4}..{:.4}), bracket [{:.4}, {:.4}]",
        stats.ratio, stats.ratio_ci.0, stats.ratio_ci.1, stats.lower_bound, stats.upper_bound,
    );
    let ok = stats.within_bounds;
    emit(a.out.as_deref(), &stats)?;
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
