use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rug::Rational;

use apery_core::casebook::{resolve_case, verify_all, AperyReport, CaseSpec, CheckStatus, VerifyOptions};
use apery_core::casebook::{registered_case, registered_ids};
use apery_core::lattice::{is_reflexive, is_tempered_2d, newton_polytope, normalized_volume};
use apery_core::laurent::{constant_term_sequence, RationalSequence};
use apery_core::numerics::real::{bits_for_digits, digits_for_bits, parse_float};
use apery_core::numerics::thnf_coefficient;
use apery_core::opfit::{fit_operator, DEFAULT_GUARD};
use apery_core::poly::QPoly;
use apery_core::recognize::{recognize_constant, ConstantBasis, Recognition, DEFAULT_MAX_HEIGHT};
use apery_core::sequences::{apery_limit, solve_homogeneous, solve_inhomogeneous};
use apery_core::Error;

#[derive(Parser)]
#[command(name = "apery", version, about = "Apéry limits, periods and normal functions of Landau-Ginzburg models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Constant terms of φ^k for k = 0 .. K-1.
    Periods {
        case: String,
        #[arg(long, default_value_t = 10)]
        terms: usize,
        /// Skip Newton-polytope pruning.
        #[arg(long)]
        no_prune: bool,
    },
    /// Fit a differential operator of order ≤ r and degree ≤ d.
    Fit {
        /// Case id or file; omit with --stdin.
        case: Option<String>,
        /// Read whitespace-separated rationals from standard input.
        #[arg(long)]
        stdin: bool,
        #[arg(long)]
        order: usize,
        #[arg(long)]
        degree: usize,
        #[arg(long, default_value_t = DEFAULT_GUARD)]
        guard: usize,
    },
    /// Apéry limit lim b_K / a_K.
    Limit {
        case: String,
        #[arg(long, default_value_t = 500)]
        terms: usize,
        #[arg(long, default_value_t = 256)]
        precision: u32,
    },
    /// Taylor coefficient v_k of the normal function (or V(0)).
    Thnf {
        case: String,
        #[arg(long, default_value_t = 0)]
        coeff: u32,
        #[arg(long, default_value_t = 25)]
        digits: u32,
    },
    /// Express a decimal as a rational combination of named constants.
    Recognize {
        /// Decimal literal or a file holding one.
        #[arg(long)]
        value: String,
        #[arg(long, default_value = "one,zeta2,zeta3,pi3_sqrt3,log2")]
        basis: String,
        /// Largest coefficient; defaults to what the given digits support, at most 10000.
        #[arg(long)]
        height: Option<u64>,
    },
    /// Lattice checks on the Newton polytope of φ.
    Polytope {
        case: String,
        #[arg(long, value_enum)]
        check: PolytopeCheck,
    },
    /// Run the full verification pipeline.
    Verify {
        /// Case id, case file, or `all`.
        case: String,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value_t = 256)]
        precision: u32,
        #[arg(long, default_value_t = 500)]
        terms: usize,
        #[arg(long, default_value_t = 25)]
        thnf_digits: u32,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PolytopeCheck {
    Reflexive,
    Tempered,
    Volume,
}

/// Exit status with a message: 1 for failed checks, 2 for usage errors.
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Failure { code: 2, msg: msg.into() }
    }

    fn check(msg: impl Into<String>) -> Self {
        Failure { code: 1, msg: msg.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } => Failure::usage(e.to_string()),
            _ => Failure::check(e.to_string()),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn case(name: &str) -> std::result::Result<CaseSpec, Failure> {
    resolve_case(name).map_err(|e| Failure::usage(e.to_string()))
}

fn periods_of(spec: &CaseSpec, terms: usize, prune: bool) -> std::result::Result<RationalSequence, Failure> {
    let phi = spec
        .phi
        .as_ref()
        .ok_or_else(|| Failure::usage(format!("case {} has no Laurent polynomial", spec.id)))?;
    if terms == 0 {
        return Err(Failure::usage("--terms must be positive"));
    }
    let hull = newton_polytope(phi)?;
    let prune = (prune && hull.is_full_dimensional()).then_some(&hull);
    Ok(constant_term_sequence(phi, terms as i64 - 1, prune)?)
}

fn cmd_periods(name: &str, terms: usize, no_prune: bool) -> Outcome {
    let a = periods_of(&case(name)?, terms, !no_prune)?;
    println!("{}", a.to_strings().join(" "));
    Ok(())
}

fn read_stdin_sequence() -> std::result::Result<RationalSequence, Failure> {
    let mut text = String::new();
    std::io::stdin()
        .read_to_string(&mut text)
        .map_err(|e| Failure::usage(format!("cannot read standard input: {e}")))?;
    let terms = text
        .split_whitespace()
        .map(|s| s.parse::<Rational>().map_err(|_| Failure::usage(format!("bad rational '{s}'"))))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(RationalSequence::new(terms))
}

fn cmd_fit(name: Option<&str>, stdin: bool, r: usize, d: usize, guard: usize) -> Outcome {
    let needed = (d + 1) * (r + 1) + guard;
    let (u, stated) = match (name, stdin) {
        (None, true) => (read_stdin_sequence()?, None),
        (Some(n), false) => {
            let spec = case(n)?;
            let u = match &spec.phi {
                Some(_) => periods_of(&spec, needed, true)?,
                None => {
                    let l = spec.operator.as_ref().ok_or_else(|| Failure::usage("case has no sequence"))?;
                    solve_homogeneous(l, needed - 1)?
                }
            };
            (u, spec.operator.clone())
        }
        _ => return Err(Failure::usage("give exactly one of a case or --stdin")),
    };
    let l = match fit_operator(&u, r, d, guard) {
        Ok(l) => l,
        Err(Error::NotFound) => return Err(Failure::check("check operator_fit failed: no operator of this shape")),
        Err(Error::AmbiguousFit(k, basis)) => {
            for b in &basis {
                println!("{b}");
            }
            return Err(Failure::check(format!("check operator_fit failed: nullspace of dimension {k}")));
        }
        Err(e) => return Err(e.into()),
    };
    println!("{}", l.to_text());
    if let Some(s) = stated {
        if s.normalized() != l && s.order() <= r && s.degree() <= d {
            return Err(Failure::check(format!("check operator_matches_stated failed: stated {}", s.to_text())));
        }
    }
    Ok(())
}

fn cmd_limit(name: &str, terms: usize, precision: u32) -> Outcome {
    let spec = case(name)?;
    let l = spec
        .operator
        .as_ref()
        .ok_or_else(|| Failure::usage(format!("case {} has no operator", spec.id)))?;
    if terms < 2 {
        return Err(Failure::usage("--terms must be at least 2"));
    }
    let a = solve_homogeneous(l, terms - 1)?;
    let b = solve_inhomogeneous(l, &QPoly::new(vec![Rational::new(), Rational::from(1)]), terms - 1)?;
    let lim = apery_limit(&a, &b, precision)?;
    let digits = digits_for_bits(precision) as usize;
    println!("limit {}", lim.value.to_fixed(digits));
    println!("error_estimate {:.3e}", lim.error_estimate.to_f64());
    println!("convergence_ratio {:.12}", lim.convergence_ratio.to_f64());
    println!("terms_used {}", lim.terms_used);
    println!("accelerated {}", lim.accelerated);
    Ok(())
}

fn cmd_thnf(name: &str, k: u32, digits: u32) -> Outcome {
    let spec = case(name)?;
    let method = spec
        .thnf
        .as_ref()
        .ok_or_else(|| Failure::usage(format!("case {} has no normal-function method", spec.id)))?;
    let v = thnf_coefficient(method, spec.phi.as_ref(), k, digits)?;
    let (re, im) = v.value.to_fixed(digits as usize);
    println!("re {re}");
    println!("im {im}");
    println!("error {:.3e}", v.error.to_f64());
    Ok(())
}

fn cmd_recognize(value: &str, basis: &str, height: Option<u64>) -> Outcome {
    let text = match std::fs::read_to_string(value) {
        Ok(t) => t,
        Err(_) => value.to_string(),
    };
    let text = text.trim().trim_end_matches('…').trim_end_matches("...");
    let digits = text.chars().filter(|c| c.is_ascii_digit()).count() as u32;
    if digits == 0 {
        return Err(Failure::usage(format!("bad decimal '{text}'")));
    }
    let prec = bits_for_digits(digits);
    let x = parse_float(text, prec).map_err(|e| Failure::usage(e.to_string()))?;
    let basis = ConstantBasis::parse_list(basis).map_err(|e| Failure::usage(e.to_string()))?;
    // digits ≥ (n − 1)·log10(H) + 20 for n numbers
    let n = basis.constants().len() as f64;
    let supported = 10f64.powf((f64::from(digits) - 20.0) / n).floor();
    let height = height.unwrap_or_else(|| (supported as u64).min(DEFAULT_MAX_HEIGHT));
    if height < 2 {
        return Err(Failure::usage(format!("{digits} digits are too few to recognize anything in this basis")));
    }
    match recognize_constant(&x, None, &basis, height)? {
        Recognition::Found(c) => {
            println!("{c}");
            Ok(())
        }
        Recognition::Ambiguous(cs) => {
            for c in &cs {
                println!("{c}");
            }
            Err(Failure::check("check recognition failed: ambiguous relations"))
        }
        Recognition::NotFound => Err(Failure::check("check recognition failed: no relation")),
    }
}

fn cmd_polytope(name: &str, check: PolytopeCheck) -> Outcome {
    let spec = case(name)?;
    let phi = spec
        .phi
        .as_ref()
        .ok_or_else(|| Failure::usage(format!("case {} has no Laurent polynomial", spec.id)))?;
    let p = newton_polytope(phi)?;
    match check {
        PolytopeCheck::Reflexive => {
            let r = p.is_full_dimensional() && is_reflexive(&p)?;
            println!("reflexive {r}");
            if !r {
                return Err(Failure::check("check reflexive failed"));
            }
        }
        PolytopeCheck::Tempered => {
            let t = is_tempered_2d(phi)?;
            for e in &t.edges {
                println!("edge {:?} {} {}", e.normal, e.polynomial, if e.cyclotomic { "cyclotomic" } else { "not-cyclotomic" });
            }
            println!("tempered {}", t.tempered);
            if !t.tempered {
                return Err(Failure::check("check tempered failed"));
            }
        }
        PolytopeCheck::Volume => {
            let v = normalized_volume(&p)?;
            println!("volume {v}");
            if let Some(want) = spec.expect.volume {
                if want != v {
                    return Err(Failure::check(format!("check normalized_volume failed: expected {want}")));
                }
            }
        }
    }
    Ok(())
}

fn cmd_verify(name: &str, report: Option<&PathBuf>, precision: u32, terms: usize, thnf_digits: u32) -> Outcome {
    let specs: Vec<CaseSpec> = if name == "all" {
        registered_ids()
            .into_iter()
            .map(registered_case)
            .collect::<Result<_, _>>()?
    } else {
        vec![case(name)?]
    };
    let options = VerifyOptions { precision, terms, thnf_digits, ..VerifyOptions::default() };
    let results: Vec<_> = verify_all(&specs, &options);
    let mut reports: Vec<AperyReport> = Vec::new();
    for r in results {
        reports.push(r.map_err(|e| Failure::usage(e.to_string()))?);
    }
    let mut failing = Vec::new();
    for r in &reports {
        println!("{} {}", r.case, if r.passed { "pass" } else { "FAIL" });
        for c in r.checks.iter().filter(|c| c.status == CheckStatus::Fail) {
            println!("  {} failed: {}", c.name, c.detail);
            failing.push(format!("{}:{}", r.case, c.name));
        }
    }
    let passed = failing.is_empty();
    if let Some(path) = report {
        let doc = serde_json::json!({ "passed": passed, "reports": reports });
        let text = serde_json::to_string_pretty(&doc).expect("report serializes");
        std::fs::write(path, text + "\n")
            .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))?;
    }
    if passed {
        Ok(())
    } else {
        Err(Failure::check(format!("failing checks: {}", failing.join(", "))))
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Periods { case, terms, no_prune } => cmd_periods(&case, terms, no_prune),
        Command::Fit { case, stdin, order, degree, guard } => cmd_fit(case.as_deref(), stdin, order, degree, guard),
        Command::Limit { case, terms, precision } => cmd_limit(&case, terms, precision),
        Command::Thnf { case, coeff, digits } => cmd_thnf(&case, coeff, digits),
        Command::Recognize { value, basis, height } => cmd_recognize(&value, &basis, height),
        Command::Polytope { case, check } => cmd_polytope(&case, check),
        Command::Verify { case, report, precision, terms, thnf_digits } => {
            cmd_verify(&case, report.as_ref(), precision, terms, thnf_digits)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("apery: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
