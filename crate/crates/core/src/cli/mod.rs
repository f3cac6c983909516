//! Command-line harness: configuration, expression evaluation and the
//! verification suites behind `sepvar verify`.

pub mod gen;
pub mod report;
pub mod suites;

use std::cell::RefCell;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;

use crate::berezin::Berezin;
use crate::calabi::{calabi_g, CalabiError};
use crate::kernel::{parse_expr, render_jet, CRat, Jet, KernelError, Mono, TruncationSpec, VarSpace};
use crate::oscact::PhaseJet;
use crate::star::{Builtin, Orientation, PotentialJet, StarEngine, StarError};

pub use report::{CheckRecord, Report, Residual, Window};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("unknown potential '{0}' (not a built-in name or readable file)")]
    UnknownPotential(String),
    #[error("named potentials require --m")]
    MissingM,
    #[error("--m {given} does not match the potential file (m = {file})")]
    DimensionMismatch { given: usize, file: usize },
    #[error("{0} must be positive")]
    Bound(&'static str),
    #[error("unknown suite '{0}'")]
    UnknownSuite(String),
    #[error("unknown mutation '{0}'")]
    UnknownMutation(String),
    #[error(transparent)]
    Potential(#[from] StarError),
}

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error(transparent)]
    Parse(#[from] KernelError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PotentialSource {
    Named(Builtin),
    File(PathBuf),
}

impl PotentialSource {
    pub fn parse(s: &str) -> PotentialSource {
        match Builtin::from_name(s) {
            Some(b) => PotentialSource::Named(b),
            None => PotentialSource::File(PathBuf::from(s)),
        }
    }

    pub fn label(&self) -> String {
        match self {
            PotentialSource::Named(b) => b.name().to_string(),
            PotentialSource::File(p) => p.display().to_string(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suite {
    Star,
    Berezin,
    Distalg,
    Oscact,
    MainTheorem,
    Annihilators,
    Structural,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Star,
        Suite::Berezin,
        Suite::Distalg,
        Suite::Oscact,
        Suite::MainTheorem,
        Suite::Annihilators,
        Suite::Structural,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Star => "star",
            Suite::Berezin => "berezin",
            Suite::Distalg => "distalg",
            Suite::Oscact => "oscact",
            Suite::MainTheorem => "main-theorem",
            Suite::Annihilators => "annihilators",
            Suite::Structural => "structural",
        }
    }

    /// A suite name or one of the groups `lemmas` and `all`.
    pub fn expand(s: &str) -> Result<Vec<Suite>, ConfigError> {
        match s {
            "all" => Ok(Suite::ALL.to_vec()),
            "lemmas" => Ok(vec![Suite::Distalg, Suite::Oscact]),
            _ => Suite::ALL
                .into_iter()
                .find(|x| x.name() == s)
                .map(|x| vec![x])
                .ok_or_else(|| ConfigError::UnknownSuite(s.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mutation {
    /// Replace the product by its opposite.
    OrientationFlip,
    /// Build engines from a perturbed potential while phases keep the original.
    PerturbPotential,
    /// Add a term to every Calabi function.
    PerturbPhase,
}

impl Mutation {
    pub const ALL: [Mutation; 3] = [Mutation::OrientationFlip, Mutation::PerturbPotential, Mutation::PerturbPhase];

    pub fn name(self) -> &'static str {
        match self {
            Mutation::OrientationFlip => "orientation-flip",
            Mutation::PerturbPotential => "perturb-potential",
            Mutation::PerturbPhase => "perturb-phase",
        }
    }

    pub fn parse(s: &str) -> Result<Mutation, ConfigError> {
        Mutation::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| ConfigError::UnknownMutation(s.to_string()))
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub potential: PotentialSource,
    pub m: Option<usize>,
    pub l: Option<usize>,
    pub nu_max: i32,
    pub deg_max: u32,
    pub suites: Vec<Suite>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub mutate: Option<Mutation>,
    pub timings: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            potential: PotentialSource::Named(Builtin::Flat),
            m: Some(1),
            l: None,
            nu_max: 4,
            deg_max: 8,
            suites: Suite::ALL.to_vec(),
            seed: 0,
            out: None,
            mutate: None,
            timings: false,
        }
    }
}

impl RunConfig {
    /// Checks the bounds and loads the potential.
    pub fn resolve(&self) -> Result<Ctx, ConfigError> {
        if self.nu_max <= 0 {
            return Err(ConfigError::Bound("--nu-max"));
        }
        if self.deg_max == 0 {
            return Err(ConfigError::Bound("--deg-max"));
        }
        if self.m == Some(0) {
            return Err(ConfigError::Bound("--m"));
        }
        if self.l == Some(0) {
            return Err(ConfigError::Bound("--l"));
        }
        let potential = match &self.potential {
            PotentialSource::Named(b) => b.potential(self.m.ok_or(ConfigError::MissingM)?, self.deg_max),
            PotentialSource::File(path) => {
                if !path.exists() {
                    return Err(ConfigError::UnknownPotential(path.display().to_string()));
                }
                let p = PotentialJet::load(path)?;
                if let Some(m) = self.m {
                    if m != p.cdim() {
                        return Err(ConfigError::DimensionMismatch { given: m, file: p.cdim() });
                    }
                }
                p
            }
        };
        let mut suites = self.suites.clone();
        suites.sort();
        suites.dedup();
        Ok(Ctx {
            m: potential.cdim(),
            deg_max: self.deg_max.min(potential.deg_max()),
            potential,
            label: self.potential.label(),
            l: self.l,
            nu_max: self.nu_max,
            suites,
            seed: self.seed,
            mutate: self.mutate,
            timings: self.timings,
        })
    }
}

/// A resolved configuration shared by all checks of a run.
#[derive(Clone, Debug)]
pub struct Ctx {
    pub potential: PotentialJet,
    pub label: String,
    pub m: usize,
    pub l: Option<usize>,
    pub nu_max: i32,
    pub deg_max: u32,
    pub suites: Vec<Suite>,
    pub seed: u64,
    pub mutate: Option<Mutation>,
    pub timings: bool,
}

impl Ctx {
    pub fn space(&self) -> VarSpace {
        VarSpace::single(self.m)
    }

    /// An engine for `p` as the run's mutation sees it.
    pub fn engine_for(&self, p: &PotentialJet, nu_max: i32, deg_max: u32) -> StarEngine {
        let p = match self.mutate {
            Some(Mutation::PerturbPotential) => p.perturbed(CRat::from_ratio(1, 2)),
            _ => p.clone(),
        };
        let e = StarEngine::new(p, TruncationSpec::new(0, nu_max, deg_max));
        match self.mutate {
            Some(Mutation::OrientationFlip) => e.with_orientation(Orientation::Flipped),
            _ => e,
        }
    }

    pub fn engine(&self, nu_max: i32, deg_max: u32) -> StarEngine {
        self.engine_for(&self.potential, nu_max, deg_max)
    }

    /// `G^(l)` of the configured potential, perturbed under `perturb-phase`.
    pub fn phase(&self, l: usize) -> Result<PhaseJet, CalabiError> {
        let g = calabi_g(&self.potential, l)?;
        if self.mutate != Some(Mutation::PerturbPhase) {
            return Ok(g);
        }
        let sp = g.space();
        let mut mono = Mono::zero(sp.nvars());
        mono.0[sp.idx(crate::kernel::Var::new(0, crate::kernel::Kind::Holo, 0))] += 1;
        mono.0[sp.idx(crate::kernel::Var::new(l - 1, crate::kernel::Kind::Anti, 0))] += 1;
        let mut body = g.body().clone();
        body.add_term(-1, mono, CRat::from_ratio(1, 2));
        let weight = g.certified_weight();
        Ok(PhaseJet::new(body)?.with_weight(weight))
    }

    pub fn window(&self, nu_max: i32, deg_max: u32, certified_order: Option<i32>) -> Window {
        Window {
            nu_max,
            deg_max,
            certified_order,
        }
    }
}

/// Evaluates `expr` in the jet text format with the functions `star`,
/// `wick`, `berezin`, `inv-berezin` and `trace` on the configured engine.
/// On a curved engine every function value is cut at the certified
/// filtration weight, so only exact terms are printed.
pub fn cmd_eval(expr: &str, ctx: &Ctx) -> Result<String, EvalError> {
    let engine = ctx.engine(ctx.nu_max, ctx.deg_max);
    let cut = |j: Jet, w: Option<i64>| match w {
        Some(w) => j.truncate_filtration(w),
        None => j,
    };
    let space = engine.space();
    let trunc = engine.trunc();
    let bz: RefCell<Option<Berezin>> = RefCell::new(None);
    let with_b = |f: &dyn Fn(&Berezin) -> Result<Jet, String>| -> Result<Jet, String> {
        if bz.borrow().is_none() {
            *bz.borrow_mut() = Some(Berezin::new(&engine).map_err(|e| e.to_string())?);
        }
        f(bz.borrow().as_ref().expect("initialised above"))
    };
    let arity = |name: &str, args: &[Jet], n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(format!("{name} takes {n} argument(s), got {}", args.len()))
        }
    };
    let resolver = |name: &str, args: Vec<Jet>| -> Result<Jet, String> {
        let w = engine.certified_weight();
        match name {
            "star" => {
                arity(name, &args, 2)?;
                let p = engine.star(&args[0], &args[1]).map_err(|e| e.to_string())?;
                Ok(cut(p, engine.certified_weight_for(&args[0], &args[1])))
            }
            "wick" => {
                arity(name, &args, 2)?;
                with_b(&|b| crate::berezin::wick_star(&engine, b, &args[0], &args[1]).map_err(|e| e.to_string()))
                    .map(|j| cut(j, w))
            }
            "berezin" => {
                arity(name, &args, 1)?;
                with_b(&|b| Ok(cut(b.apply(&args[0]), w)))
            }
            "inv-berezin" => {
                arity(name, &args, 1)?;
                with_b(&|b| Ok(cut(b.apply_inverse(&args[0]), w)))
            }
            "trace" => {
                arity(name, &args, 1)?;
                with_b(&|b| {
                    let v = cut(b.apply(&args[0]), w).eval_origin();
                    let mut j = Jet::zero(space, trunc);
                    for (k, c) in v.terms() {
                        j.add_term(k, space.zero_mono(), c.clone());
                    }
                    Ok(j)
                })
            }
            _ => Err(format!("unknown function '{name}'")),
        }
    };
    let j = parse_expr(expr, space, trunc, Some(&resolver))?;
    Ok(render_jet(&j))
}

/// Runs the selected suites and assembles a report sorted by check name.
pub fn cmd_verify(ctx: &Ctx) -> Report {
    let jobs = suites::jobs(ctx);
    let mut checks: Vec<CheckRecord> = jobs.into_par_iter().flat_map(|job| job(ctx)).collect();
    checks.sort_by(|a, b| a.name.cmp(&b.name));
    Report::new(ctx, checks)
}

/// Times `f`, turning its outcome into a check record.
pub(crate) fn record(
    ctx: &Ctx,
    name: String,
    anchor: &str,
    f: impl FnOnce() -> Result<(bool, Window, String), String>,
) -> CheckRecord {
    let t = Instant::now();
    let (residual, window, detail) = match f() {
        Ok((true, w, d)) => (Residual::Zero, Some(w), d),
        Ok((false, w, d)) => (Residual::Nonzero, Some(w), d),
        Err(e) => (Residual::Error, None, e),
    };
    CheckRecord {
        name,
        anchor: anchor.to_string(),
        window,
        residual,
        detail,
        runtime_ms: ctx.timings.then(|| t.elapsed().as_millis() as u64),
    }
}
