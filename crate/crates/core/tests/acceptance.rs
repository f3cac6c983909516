//! One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

use std::process::{Command, ExitCode, Stdio};
use std::time::{Duration, Instant};

use sepvar::cli::{cmd_verify, Ctx, Mutation, PotentialSource, Report, Residual, RunConfig, Suite};
use sepvar::star::Builtin;

fn ctx(potential: Builtin, m: usize, nu_max: i32, l: Option<usize>, suites: &[Suite]) -> Ctx {
    RunConfig {
        potential: PotentialSource::Named(potential),
        m: Some(m),
        l,
        nu_max,
        deg_max: 8,
        suites: suites.to_vec(),
        ..RunConfig::default()
    }
    .resolve()
    .expect("valid configuration")
}

fn run(c: &Ctx) -> (Report, Duration) {
    let t = Instant::now();
    let r = cmd_verify(c);
    (r, t.elapsed())
}

/// All records whose name starts with one of `prefixes` are zero, and
/// there is at least one.
fn all_zero(r: &Report, prefixes: &[&str]) -> Result<usize, String> {
    let picked: Vec<_> = r
        .checks
        .iter()
        .filter(|c| prefixes.iter().any(|p| c.name.starts_with(p)))
        .collect();
    if picked.is_empty() {
        return Err(format!("no checks matching {prefixes:?}"));
    }
    match picked.iter().find(|c| c.residual != Residual::Zero) {
        Some(c) => Err(format!("{}: {}", c.name, c.detail)),
        None => Ok(picked.len()),
    }
}

fn main_identity() -> Result<String, String> {
    let mut total = 0;
    let mut secs = 0.0;
    for m in [1, 2] {
        let (r, t) = run(&ctx(Builtin::Flat, m, 4, None, &[Suite::MainTheorem]));
        total += all_zero(&r, &["main-theorem/"])?;
        secs += t.as_secs_f64();
        let golden = r
            .checks
            .iter()
            .find(|c| c.name == "main-theorem/golden")
            .ok_or("golden case missing")?;
        if golden.residual != Residual::Zero || golden.detail != "lhs nu^2 rhs nu^2" {
            return Err(format!("golden case: {}", golden.detail));
        }
    }
    if secs >= 60.0 {
        return Err(format!("took {secs:.1}s"));
    }
    Ok(format!("{total} cases on flat C^1 and C^2, l = 1..3, golden nu^2, {secs:.1}s"))
}

fn curved_identity() -> Result<String, String> {
    let (r, t) = run(&ctx(Builtin::Hyperbolic, 1, 3, Some(2), &[Suite::MainTheorem]));
    let n = all_zero(&r, &["main-theorem/l2/"])?;
    let order = r.checks[0].window.as_ref().and_then(|w| w.certified_order);
    if t.as_secs() >= 300 {
        return Err(format!("took {:.1}s", t.as_secs_f64()));
    }
    Ok(format!("{n} hyperbolic cases through nu^{}, {:.1}s", order.unwrap_or(-1), t.as_secs_f64()))
}

fn annihilators() -> Result<String, String> {
    let mut n = 0;
    for m in [1, 2] {
        let (r, _) = run(&ctx(Builtin::Flat, m, 4, None, &[Suite::Annihilators]));
        n += all_zero(&r, &["annihilators/"])?;
    }
    Ok(format!("{n} tuples, every direction"))
}

fn cross_oracle() -> Result<String, String> {
    let mut out = Vec::new();
    for m in [1, 2] {
        let (r, _) = run(&ctx(Builtin::Flat, m, 4, None, &[Suite::Star]));
        all_zero(&r, &["star/cross-oracle/"])?;
        out.push(r.checks.iter().find(|c| c.name.starts_with("star/cross-oracle")).unwrap().detail.clone());
    }
    Ok(out.join("; "))
}

fn associativity() -> Result<String, String> {
    let mut n = 0;
    for b in [Builtin::Flat, Builtin::Hyperbolic] {
        let (r, _) = run(&ctx(b, 1, 4, None, &[Suite::Star]));
        n += all_zero(&r, &["star/associativity/"])?;
    }
    Ok(format!("{n} triples on flat and hyperbolic"))
}

fn berezin() -> Result<String, String> {
    let (r, _) = run(&ctx(Builtin::Flat, 1, 4, None, &[Suite::Berezin]));
    all_zero(&r, &["berezin/golden"])?;
    let mut n = 0;
    for b in [Builtin::Flat, Builtin::Hyperbolic] {
        let (r, _) = run(&ctx(b, 1, 4, None, &[Suite::Berezin]));
        n += all_zero(&r, &["berezin/conjugation/", "berezin/oscillatory", "berezin/wick/"])?;
    }
    Ok(format!("B(z1*zb1) = z1*zb1 + nu; {n} conjugation, oscillatory and Wick checks"))
}

fn distribution_algebra() -> Result<String, String> {
    let mut n = 0;
    for (b, m) in [(Builtin::Flat, 1), (Builtin::Flat, 2), (Builtin::Hyperbolic, 1)] {
        let (r, _) = run(&ctx(b, m, 4, None, &[Suite::Distalg]));
        n += all_zero(
            &r,
            &[
                "distalg/ideal/",
                "distalg/kernel/",
                "distalg/closure/",
                "distalg/trace/",
                "distalg/injective",
                "distalg/gamma/",
            ],
        )?;
    }
    Ok(format!("{n} checks"))
}

fn oscillatory_action() -> Result<String, String> {
    let mut n = 0;
    for m in [1, 2] {
        let (r, _) = run(&ctx(Builtin::Flat, m, 4, None, &[Suite::Oscact]));
        n += all_zero(&r, &["oscact/compose/", "oscact/representative/", "oscact/transpose/"])?;
    }
    Ok(format!("{n} cases"))
}

fn foi() -> Result<String, String> {
    let (r, _) = run(&ctx(Builtin::Flat, 1, 4, None, &[Suite::Oscact]));
    all_zero(&r, &["oscact/foi/", "oscact/gram/"])?;
    let v: Vec<String> = r
        .checks
        .iter()
        .filter(|c| c.name.starts_with("oscact/gram"))
        .map(|c| c.detail.clone())
        .collect();
    Ok(format!("Gaussian is an FOI; Gram verdicts {}", v.join(", ")))
}

fn structural() -> Result<String, String> {
    let mut n = 0;
    for b in Builtin::ALL {
        let (r, _) = run(&ctx(b, 1, 4, None, &[Suite::Structural]));
        n += all_zero(&r, &["structural/"])?;
    }
    Ok(format!("{n} checks"))
}

fn negative_controls() -> Result<String, String> {
    let mut out = Vec::new();
    for mu in [Mutation::OrientationFlip, Mutation::PerturbPotential, Mutation::PerturbPhase] {
        let mut c = ctx(Builtin::Flat, 1, 4, None, &Suite::ALL);
        c.mutate = Some(mu);
        let (r, _) = run(&c);
        if r.failed == 0 {
            return Err(format!("{} passed every check", mu.name()));
        }
        let mut suites: Vec<&str> = r.failures().map(|f| f.name.split('/').next().unwrap()).collect();
        suites.dedup();
        out.push(format!("{} fails {}", mu.name(), suites.join("+")));
    }
    let status = Command::new(env!("CARGO_BIN_EXE_sepvar"))
        .args(["verify", "--m", "1", "--suite", "star", "--mutate", "orientation-flip", "--out"])
        .arg(std::env::temp_dir().join("sepvar-negative-control.json"))
        .stderr(Stdio::null())
        .status()
        .map_err(|e| e.to_string())?;
    if status.code() != Some(1) {
        return Err(format!("binary exit code {:?}", status.code()));
    }
    Ok(format!("{}; binary exits 1", out.join("; ")))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<String, String>); 11] = [
        ("main identity on flat space", main_identity),
        ("main identity on the hyperbolic disc", curved_identity),
        ("annihilator identities", annihilators),
        ("recursive engine matches the anti-Wick closed form", cross_oracle),
        ("associativity", associativity),
        ("Berezin block", berezin),
        ("distribution algebra", distribution_algebra),
        ("oscillatory action", oscillatory_action),
        ("formal oscillatory integrals and Gram verdicts", foi),
        ("structural properties of the Calabi function", structural),
        ("negative controls", negative_controls),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(d) => println!("PASS criterion {}: {name} ({d})", i + 1),
            Err(e) => {
                failed += 1;
                println!("FAIL criterion {}: {name} ({e})", i + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
