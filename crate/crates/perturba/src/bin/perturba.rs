//! Batch front-end: ingest JSON problem bundles, run the verification and
//! trivialization pipelines, and emit structured reports.
//!
//! Exit codes: 0 when every check passes, 2 on mathematical failure (with a
//! machine-readable report), 1 on I/O or schema errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use perturba::constructions::{contract_rows, kill_contractible};
use perturba::error::{Error, Result};
use perturba::graded::GradedMap;
use perturba::hochschild_deform::{
    build_degree2_splitting, check_formal_order, hochschild_d_block, trivialize_formal,
    trivialize_product_family, SplittingOutcome, TransgressionMethod,
};
use perturba::io::{
    self, algebra_from_json, bracket_family_from_json, deformation_from_json, double_from_json,
    graded_map_from_json, he_from_json, he_to_json, lie_from_json, metric_from_json,
    product_family_from_json, split_from_json, JsonScalar,
};
use perturba::lie_deform::{
    ce_complex, h2_vanishes, trivialize, BracketFamily, TrivializationResult, TAU_TRIV,
};
use perturba::metric_hochschild::{verify_contraction, HomotopyReading};
use perturba::perturbation::{certify, perturb, verify_lemma_relations, HEData, Perturbation};
use perturba::report::{Check, Report};
use perturba::scalar::{Rat, Scalar, Tol};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScalarMode {
    Rational,
    F64,
}

#[derive(Debug, Parser)]
#[command(
    name = "perturba",
    version,
    about = "Homological perturbation pipelines: verify, transfer, contract, trivialize"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// Scalar field used for parsing and computation.
    #[arg(long, global = true, value_enum, default_value = "rational")]
    scalar: ScalarMode,

    /// Comparison tolerance (exact scalars ignore it).
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Also write the JSON report to this path.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Verify a homotopy-equivalence bundle: differentials, chain maps,
    /// homotopy identity, quasi-isomorphism certificates.
    VerifyHe {
        /// HE bundle: {"L": complex, "M": complex, "i": map, "p": map, "h": map}.
        he: PathBuf,
    },
    /// Transfer a homotopy equivalence along a perturbation of d_M.
    Perturb {
        he: PathBuf,
        /// Perturbation as a graded-map JSON with the differential's shift.
        delta: PathBuf,
        /// Also perturb back by −delta and require exact recovery.
        #[arg(long)]
        roundtrip: bool,
        /// Write the perturbed bundle here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Contract the rows of a double complex onto a deformation retract of
    /// its total complex.
    ContractRows {
        /// Double complex with row contraction data.
        double: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Split off a contractible summand A′ of a complex C = A ⊕ A′.
    KillContractible {
        /// Bundle: {"complex": ..., "a_dims": {...}, "h": map on A′}.
        split: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certify H²(g;g) = 0 and trivialize a bracket family by integrating
    /// the transgressed cocycle.
    LieRigidity {
        /// Lie algebra structure constants: {"dim": n, "c": [[[...]]]}.
        lie: PathBuf,
        /// Bracket family {"coeffs": [tensor, ...], "t_max": x}; defaults to
        /// the scaling family (1 + t)·[·,·].
        family: Option<PathBuf>,
        #[arg(long, default_value_t = 0.5)]
        t_max: f64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
    },
    /// Hochschild pipeline: boundary checks, degree-2 splitting, and formal
    /// or ODE trivialization of deformations.
    HochschildRigidity {
        /// Associative algebra {"dim": n, "m": [[[...]]], "unit": [...]}.
        algebra: PathBuf,
        /// Formal deformation {"order": N, "coeffs": [tensor, ...]}.
        #[arg(long)]
        deformation: Option<PathBuf>,
        /// Product family {"coeffs": [tensor, ...], "t_max": x} with the base
        /// product as coeffs[0].
        #[arg(long)]
        family: Option<PathBuf>,
        #[arg(long, default_value_t = 0.4)]
        t_max: f64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
    },
    /// Verify b′h + hb′ = 1 on the normalized complex of a finite metric
    /// space, degree by degree.
    MetricContraction {
        /// Metric space {"n": k, "rho": [[...]]}.
        metric: PathBuf,
        #[arg(long, default_value_t = 4)]
        max_arity: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let tol = cli.tol.map(Tol::new).unwrap_or_default();
    let seed = std::env::var("PERTURBA_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(0);
    let outcome = match cli.scalar {
        ScalarMode::Rational => run::<Rat>(&cli.cmd, &tol, seed),
        ScalarMode::F64 => run::<f64>(&cli.cmd, &tol, seed),
    };
    let report = match outcome {
        Ok(report) => report,
        Err(e) => {
            if e.exit_code() == 1 {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            // mathematical failure: still emit a machine-readable report
            let mut report = new_report(&cli.cmd, &cli.scalar, seed);
            report.push(Check::fail(command_name(&cli.cmd)).with_detail(e.to_string()));
            report
        }
    };
    for check in &report.checks {
        println!("{}", check.human_line());
    }
    println!("status: {}", report.status);
    if let Some(path) = &cli.report {
        if let Err(e) = std::fs::write(path, report.to_json()) {
            eprintln!("error: cannot write report: {e}");
            return ExitCode::from(1);
        }
    }
    ExitCode::from(if report.ok() { 0 } else { 2 })
}

fn command_name(cmd: &Cmd) -> &'static str {
    match cmd {
        Cmd::VerifyHe { .. } => "verify-he",
        Cmd::Perturb { .. } => "perturb",
        Cmd::ContractRows { .. } => "contract-rows",
        Cmd::KillContractible { .. } => "kill-contractible",
        Cmd::LieRigidity { .. } => "lie-rigidity",
        Cmd::HochschildRigidity { .. } => "hochschild-rigidity",
        Cmd::MetricContraction { .. } => "metric-contraction",
    }
}

fn new_report(cmd: &Cmd, scalar: &ScalarMode, seed: u64) -> Report {
    let mode = match scalar {
        ScalarMode::Rational => "rational",
        ScalarMode::F64 => "f64",
    };
    Report::new(command_name(cmd), mode, seed)
}

fn run<S: JsonScalar>(cmd: &Cmd, tol: &Tol, seed: u64) -> Result<Report> {
    let mut report = Report::new(command_name(cmd), S::MODE, seed);
    match cmd {
        Cmd::VerifyHe { he } => {
            let he: HEData<S> = he_from_json(&io::read_json(he)?, "he")?;
            report.extend(he.checks(tol)?);
        }
        Cmd::Perturb { he, delta, roundtrip, out } => {
            let he: HEData<S> = he_from_json(&io::read_json(he)?, "he")?;
            he.verify(tol)?;
            let dj = io::read_json(delta)?;
            let delta: GradedMap<S> =
                graded_map_from_json(&dj, he.m.module(), he.m.module(), "delta")?;
            let pert = Perturbation::new(&he.m, delta, tol)?;
            report.push(Check::pass("perturbation squares with d_M to zero"));
            let cert = certify(&he.m, &he.h, &pert, tol)?;
            report.push(Check::pass("smallness certificate found"));
            for item in verify_lemma_relations(&he, &pert, &cert, tol)?.items {
                let mut c = Check::residual(format!("relation {}", item.relation), item.residual, item.ok);
                if let Some(k) = item.degree {
                    c = c.with_detail(format!("worst degree {k}"));
                }
                report.push(c);
            }
            let perturbed = perturb(&he, &pert, &cert, tol)?;
            report.push(Check::pass("perturbed data verifies"));
            if *roundtrip {
                let back = Perturbation::new(&perturbed.m, pert.delta().neg(), tol)?;
                let back_cert = certify(&perturbed.m, &perturbed.h, &back, tol)?;
                let restored = perturb(&perturbed, &back, &back_cert, tol)?;
                let same = he_equal(&restored, &he, tol)?;
                report.push(if same {
                    Check::pass("round-trip by −delta restores the data exactly")
                } else {
                    Check::fail("round-trip by −delta restores the data exactly")
                });
            }
            if let Some(path) = out {
                io::write_json(path, &he_to_json(&perturbed))?;
            }
        }
        Cmd::ContractRows { double, out } => {
            let (dc, rc) = double_from_json::<S>(&io::read_json(double)?, tol, "double")?;
            let (tot, he) = contract_rows(&dc, &rc, tol)?;
            report.push(
                Check::pass("total complex assembled").with_detail(format!(
                    "{} bidegrees, total module {:?}",
                    dc.dims().len(),
                    tot.module().dims()
                )),
            );
            report.extend(he.checks(tol)?);
            if let Some(path) = out {
                io::write_json(path, &he_to_json(&he))?;
            }
        }
        Cmd::KillContractible { split, out } => {
            let (c, a_dims, h) = split_from_json::<S>(&io::read_json(split)?, "split")?;
            let he = kill_contractible(&c, &a_dims, &h, tol)?;
            report.extend(he.checks(tol)?);
            if let Some(path) = out {
                io::write_json(path, &he_to_json(&he))?;
            }
        }
        Cmd::LieRigidity { lie, family, t_max, steps } => {
            let g = lie_from_json::<S>(&io::read_json(lie)?, tol, "lie")?;
            report.push(Check::pass("Jacobi identity holds"));
            let rigid = h2_vanishes(&g, tol)?;
            report.push(if rigid {
                Check::pass("H²(g;g) = 0")
            } else {
                let ce = ce_complex(&g)?;
                let dim = ce.cohomology_dim(2, tol)?;
                Check::fail("H²(g;g) = 0").with_detail(format!("dim H² = {dim}"))
            });
            let fam: BracketFamily<S> = match family {
                Some(path) => bracket_family_from_json(&io::read_json(path)?, g.dim(), tol, "family")?,
                None => BracketFamily::new(
                    vec![g.bracket().clone(), g.bracket().clone()],
                    t_max.max(1.0),
                    tol,
                )?,
            };
            report.push(Check::pass("family brackets satisfy Jacobi on the domain"));
            let result = trivialize(&fam, *t_max, *steps, tol)?;
            push_trivialization(&mut report, &result);
        }
        Cmd::HochschildRigidity { algebra, deformation, family, t_max, steps } => {
            let a = algebra_from_json::<S>(&io::read_json(algebra)?, tol, "algebra")?;
            report.push(Check::pass("structure constants are associative"));
            let mut worst = 0.0_f64;
            for k in 0..=2usize {
                let d1 = hochschild_d_block(&a, k)?;
                let d2 = hochschild_d_block(&a, k + 1)?;
                worst = worst.max(d2.mul(&d1)?.max_magnitude());
            }
            report.push(Check::residual("d² = 0 through arity 4", worst, worst <= tol.tau));
            let splitting = build_degree2_splitting(&a, tol)?;
            let method = match &splitting {
                SplittingOutcome::Found { h, g } => {
                    report.push(Check::pass("degree-2 splitting found (H² = 0)"));
                    Some((h.clone(), g.clone()))
                }
                SplittingOutcome::Failed { h2_dim } => {
                    report.push(
                        Check::fail("degree-2 splitting found (H² = 0)")
                            .with_detail(format!("dim H² = {h2_dim}")),
                    );
                    None
                }
            };
            if let Some(path) = deformation {
                let def = deformation_from_json::<S>(&io::read_json(path)?, a.dim(), "deformation")?;
                for k in 1..=def.order() {
                    let r = check_formal_order(&def, &a, k)?;
                    report.push(Check::residual(
                        format!("order-{k} associativity"),
                        r.norm_inf(),
                        r.is_zero_within(tol),
                    ));
                }
                let method = match &method {
                    Some((h, g)) => TransgressionMethod::Splitting { h: h.clone(), g: g.clone() },
                    None => TransgressionMethod::LinearSolve,
                };
                let phi = trivialize_formal(&def, &a, &method, tol)?;
                report.push(
                    Check::pass("formal trivialization reproduces the base product")
                        .with_detail(format!("order {}", phi.len())),
                );
            }
            if let Some(path) = family {
                let fam = product_family_from_json::<S>(&io::read_json(path)?, a.dim(), tol, "family")?;
                let Some((h, g)) = &method else {
                    return Err(Error::SplittingInvalid(
                        "ODE trivialization needs the degree-2 splitting, which does not exist"
                            .into(),
                    ));
                };
                let result = trivialize_product_family(&fam, h, g, *t_max, *steps, tol)?;
                push_trivialization(&mut report, &result);
            }
        }
        Cmd::MetricContraction { metric, max_arity } => {
            let ms = metric_from_json::<S>(&io::read_json(metric)?, tol, "metric")?;
            report.push(Check::pass("metric axioms hold").with_detail(format!("{} points", ms.n())));
            let out = verify_contraction(&ms, *max_arity, HomotopyReading::default(), tol)?;
            for check in &out.per_arity {
                let ok = check.exact || check.max_residual <= tol.tau;
                report.push(
                    Check::residual(
                        format!("b′h + hb′ = 1 at arity {}", check.arity),
                        check.max_residual,
                        ok,
                    )
                    .with_detail(format!("{} basis elements", check.basis_checked)),
                );
            }
        }
    }
    Ok(report)
}

fn push_trivialization(report: &mut Report, result: &TrivializationResult) {
    let worst = result.defects.iter().cloned().fold(0.0_f64, f64::max);
    let last = result.defects.last().copied().unwrap_or(0.0);
    report.push(
        Check::residual("isomorphism defect within budget on the grid", worst, worst <= TAU_TRIV)
            .with_detail(format!(
                "{} grid points, final defect {last:.3e}, orientation {}",
                result.grid.len(),
                result.sign
            )),
    );
    let cond_ok = result.conds.iter().all(|c| c.is_finite());
    report.push(if cond_ok {
        Check::pass("stage systems stayed well-conditioned")
    } else {
        Check::fail("stage systems stayed well-conditioned")
    });
}

fn he_equal<S: Scalar>(a: &HEData<S>, b: &HEData<S>, tol: &Tol) -> Result<bool> {
    let maps = [
        (a.l.d(), b.l.d()),
        (a.m.d(), b.m.d()),
        (&a.i, &b.i),
        (&a.p, &b.p),
        (&a.h, &b.h),
    ];
    for (x, y) in maps {
        if !x.sub(y)?.is_zero_within(tol) {
            return Ok(false);
        }
    }
    Ok(true)
}
