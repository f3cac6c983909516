//! The checks behind each suite. Every job owns its engines so caches are
//! shared between the cases of one job only.

use crate::berezin::{conjugation_check, oscillatory_check, wick_star, Berezin};
use crate::calabi::{
    annihilator_residual_with, calabi_g_body, critical_check, critical_check_jet, product_formula, trace_identity,
    Direction,
};
use crate::diffop::{DiffOperator, PointDistribution};
use crate::distalg::{
    bispace, conjugated_multiplication, g_project, gamma_map, h_part, n_trace, tensor, DistAlgebra,
};
use crate::kernel::{parse_jet, CRat, Jet, Kind, Mono, NuSeries, TruncationSpec, Var, VarSpace};
use crate::oscact::{
    act_exp, act_exp_value, act_exp_with, foi_residual, gaussian, pairing_gram, transpose_field, DensityJet, FieldJet,
    GramVerdict, PhaseJet,
};
use crate::star::{antiwick_star, check_associativity, Builtin, StarEngine};

use super::gen;
use super::{record, CheckRecord, Ctx, Suite};

pub type Job = Box<dyn FnOnce(&Ctx) -> Vec<CheckRecord> + Send>;

/// Random cases per randomised check family.
pub const MAIN_CASES: usize = 25;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn nu_order(w: Option<i64>) -> Option<i32> {
    w.map(|w| (w.div_euclid(2)) as i32)
}

fn same(a: &PointDistribution, b: &PointDistribution) -> bool {
    a.add(&b.scale(&-CRat::one())).is_ok_and(|d| d.is_zero())
}

fn cut(j: &Jet, w: Option<i64>) -> Jet {
    match w {
        Some(w) => j.truncate_filtration(w),
        None => j.clone(),
    }
}

pub fn jobs(ctx: &Ctx) -> Vec<Job> {
    let mut out: Vec<Job> = Vec::new();
    for s in &ctx.suites {
        match s {
            Suite::Star => {
                out.push(Box::new(cross_oracle));
                out.push(Box::new(star_laws));
            }
            Suite::Berezin => out.push(Box::new(berezin_block)),
            Suite::Distalg => out.push(Box::new(distalg_block)),
            Suite::Oscact => {
                out.push(Box::new(oscact_block));
                out.push(Box::new(foi_block));
            }
            Suite::Structural => out.push(Box::new(structural_block)),
            Suite::MainTheorem | Suite::Annihilators => {}
        }
    }
    let main = ctx.suites.contains(&Suite::MainTheorem);
    let annih = ctx.suites.contains(&Suite::Annihilators);
    if main || annih {
        let ls: Vec<usize> = match ctx.l {
            Some(l) => vec![l],
            None => vec![1, 2, 3],
        };
        for l in ls {
            out.push(Box::new(move |c: &Ctx| trace_block(c, l, main, annih)));
        }
    }
    out
}

// ---------------------------------------------------------------- star

fn cross_oracle(ctx: &Ctx) -> Vec<CheckRecord> {
    let m = ctx.m;
    let deg = ctx.deg_max.max(8);
    let flat = Builtin::Flat.potential(m, deg);
    let e = ctx.engine_for(&flat, ctx.nu_max, deg);
    let sp = e.space();
    let tr = e.trunc();
    let name = format!("star/cross-oracle/flat-m{m}");
    vec![record(ctx, name, "anti-Wick star product on flat space", || {
        let monos = Mono::all_up_to(sp.nvars(), 4);
        let mut bad = Vec::new();
        for a in &monos {
            let f = Jet::monomial(sp, tr, 0, a.clone(), CRat::one());
            for b in &monos {
                let g = Jet::monomial(sp, tr, 0, b.clone(), CRat::one());
                let lhs = e.star(&f, &g).map_err(err)?;
                let rhs = antiwick_star(&f, &g).map_err(err)?;
                if lhs != rhs {
                    bad.push(format!("{a:?}*{b:?}"));
                }
            }
        }
        let n = monos.len() * monos.len();
        Ok((
            bad.is_empty(),
            ctx.window(ctx.nu_max, deg, Some(ctx.nu_max)),
            if bad.is_empty() {
                format!("{n} monomial pairs agree exactly")
            } else {
                format!("{} of {n} pairs differ, first {}", bad.len(), bad[0])
            },
        ))
    })]
}

fn star_laws(ctx: &Ctx) -> Vec<CheckRecord> {
    let e = ctx.engine(ctx.nu_max, ctx.deg_max);
    let sp = e.space();
    let tr = e.trunc();
    let w = e.certified_weight();
    let win = ctx.window(ctx.nu_max, ctx.deg_max, nu_order(w).map(|o| o.min(ctx.nu_max)).or(Some(ctx.nu_max)));
    let all = gen::all_vars(sp);
    let mut out = Vec::new();
    for k in 0..20 {
        let mut r = gen::rng(ctx.seed, "star/associativity", k);
        let [f, g, h] = [0, 1, 2].map(|_| gen::poly(&mut r, sp, tr, &all, 3, 2, 1));
        out.push(record(ctx, format!("star/associativity/{k:02}"), "associativity of the star product", || {
            let res = check_associativity(&e, &f, &g, &h).map_err(err)?;
            Ok((res.is_zero(), win.clone(), format!("residual {}", crate::kernel::render_jet(&res))))
        }));
    }
    let holo = gen::kind_vars(sp, Kind::Holo);
    let anti = gen::kind_vars(sp, Kind::Anti);
    for k in 0..10 {
        let mut r = gen::rng(ctx.seed, "star/separation", k);
        let a = gen::poly(&mut r, sp, tr, &holo, 2, 2, 0);
        let b = gen::poly(&mut r, sp, tr, &anti, 2, 2, 0);
        let f = gen::poly(&mut r, sp, tr, &all, 3, 2, 1);
        out.push(record(ctx, format!("star/separation/{k:02}"), "separation of variables", || {
            let left = &e.star(&a, &f).map_err(err)? - &(&a * &f);
            let right = &e.star(&f, &b).map_err(err)? - &(&f * &b);
            let ok = cut(&left, w).is_zero() && cut(&right, w).is_zero();
            Ok((ok, win.clone(), if ok { "a*f = af and f*b = fb".into() } else { "pointwise rule violated".into() }))
        }));
    }
    out
}

// ---------------------------------------------------------------- berezin

fn berezin_block(ctx: &Ctx) -> Vec<CheckRecord> {
    let e = ctx.engine(ctx.nu_max, ctx.deg_max);
    let sp = e.space();
    let tr = e.trunc();
    let w = e.certified_weight();
    let win = ctx.window(ctx.nu_max, ctx.deg_max, nu_order(w).map(|o| o.min(ctx.nu_max)).or(Some(ctx.nu_max)));
    let bz = match Berezin::new(&e) {
        Ok(b) => b,
        Err(x) => {
            let msg = x.to_string();
            return vec![record(ctx, "berezin/construction".into(), "Berezin transform B(ab) = b*a", || Err(msg))];
        }
    };
    let mut out = Vec::new();
    if ctx.potential.name() == "flat" {
        out.push(record(ctx, "berezin/golden".into(), "Berezin transform B(ab) = b*a", || {
            let x = parse_jet("z1*zb1", sp, tr).map_err(err)?;
            let expect = parse_jet("z1*zb1 + nu", sp, tr).map_err(err)?;
            let got = bz.apply(&x);
            Ok((
                got == expect,
                win.clone(),
                format!("B(z1*zb1) = {}", crate::kernel::render_jet(&got)),
            ))
        }));
    }
    // a = z^α, b = z̄^α for 1 ≤ |α| ≤ 2
    let holo = gen::kind_vars(sp, Kind::Holo);
    for alpha in Mono::all_up_to(ctx.m, 2).into_iter().filter(|a| a.degree() > 0) {
        let mut ma = sp.zero_mono();
        let mut mb = sp.zero_mono();
        for (i, &idx) in holo.iter().enumerate() {
            ma.0[idx] = alpha.0[i];
            mb.0[sp.idx(Var::zb(i))] = alpha.0[i];
        }
        let a = Jet::monomial(sp, tr, 0, ma, CRat::one());
        let b = Jet::monomial(sp, tr, 0, mb, CRat::one());
        let label = crate::kernel::render_jet(&a);
        out.push(record(ctx, format!("berezin/conjugation/{label}"), "conjugation of generator operators by B", || {
            let (l, r) = conjugation_check(&e, &bz, &a, &b).map_err(err)?;
            let ok = l.is_zero() && r.is_zero();
            Ok((
                ok,
                win.clone(),
                format!(
                    "L_b - B b B^-1 {}, R_a - B a B^-1 {}",
                    if l.is_zero() { "zero" } else { "nonzero" },
                    if r.is_zero() { "zero" } else { "nonzero" }
                ),
            ))
        }));
    }
    out.push(record(ctx, "berezin/oscillatory".into(), "oscillatory form of B", || {
        match oscillatory_check(&e, &bz).map_err(err)? {
            Ok(()) => Ok((true, win.clone(), "nu log B is natural without nu^0, nu^1 parts".into())),
            Err(wit) => Ok((false, win.clone(), format!("witness {:?}", wit))),
        }
    }));
    let all = gen::all_vars(sp);
    let anti = gen::kind_vars(sp, Kind::Anti);
    for k in 0..20 {
        let mut rg = gen::rng(ctx.seed, "berezin/wick", k);
        let f = gen::poly(&mut rg, sp, tr, &all, 3, 2, 1);
        let g = gen::poly(&mut rg, sp, tr, &all, 3, 2, 1);
        let a = gen::poly(&mut rg, sp, tr, &holo, 2, 2, 0);
        let b = gen::poly(&mut rg, sp, tr, &anti, 2, 2, 0);
        out.push(record(ctx, format!("berezin/wick/{k:02}"), "Wick-type product B^-1(Bf*Bg)", || {
            let fg = wick_star(&e, &bz, &f, &g).map_err(err)?;
            let lhs = bz.apply(&fg);
            let rhs = e.star(&bz.apply(&f), &bz.apply(&g)).map_err(err)?;
            let transport = cut(&(&lhs - &rhs), w).is_zero();
            let left = &wick_star(&e, &bz, &b, &f).map_err(err)? - &(&b * &f);
            let right = &wick_star(&e, &bz, &f, &a).map_err(err)? - &(&f * &a);
            let sep = cut(&left, w).is_zero() && cut(&right, w).is_zero();
            Ok((
                transport && sep,
                win.clone(),
                format!(
                    "B(f*'g) = Bf*Bg {}, b*'f = bf and f*'a = fa {}",
                    if transport { "holds" } else { "fails" },
                    if sep { "hold" } else { "fail" }
                ),
            ))
        }));
    }
    out
}

// ---------------------------------------------------------------- distalg

fn distalg_block(ctx: &Ctx) -> Vec<CheckRecord> {
    let nu = ctx.nu_max.max(3);
    let e = ctx.engine(nu, ctx.deg_max);
    let alg = DistAlgebra::new(&e);
    let w = alg.certified_weight();
    let order = (w / 2) as i32;
    let win = ctx.window(nu, ctx.deg_max, Some(order));
    let bsp = bispace(ctx.m);
    let btr = alg.trunc();
    let bvars = gen::all_vars(bsp);
    // slot-1 holomorphic and slot-2 antiholomorphic variables span 𝒢
    let gset: Vec<usize> = (0..ctx.m).chain(3 * ctx.m..4 * ctx.m).collect();
    let mut out = Vec::new();
    let zero_h = |x: &Jet| x.truncate_filtration(w).is_zero();
    for k in 0..30 {
        let mut r = gen::rng(ctx.seed, "distalg/random", k);
        let f = gen::poly(&mut r, bsp, btr, &bvars, 3, 2, 1);
        let mut hsrc = gen::poly(&mut r, bsp, btr, &bvars, 3, 2, 1);
        // keep at least one ℋ term
        let mut mono = bsp.zero_mono();
        mono.0[ctx.m + (k % ctx.m)] = 1;
        hsrc.add_term(0, mono, gen::coeff(&mut r));
        let h = h_part(&hsrc);
        out.push(record(ctx, format!("distalg/ideal/{k:02}"), "ideal H in the algebra C", || {
            let left = g_project(&alg.c_mul(&f, &h).map_err(err)?);
            let right = g_project(&alg.c_mul(&h, &f).map_err(err)?);
            let ok = zero_h(&left) && zero_h(&right);
            Ok((ok, win.clone(), if ok { "F*H and H*F lie in H".into() } else { "product leaves H".into() }))
        }));
        out.push(record(ctx, format!("distalg/kernel/{k:02}"), "H in ker lambda", || {
            let lh = alg.lambda_of(&h).map_err(err)?.truncate_weight(w);
            let lf = alg.lambda_of(&f).map_err(err)?.truncate_weight(w);
            let lg = alg.lambda_of(&g_project(&f)).map_err(err)?.truncate_weight(w);
            let ok = lh.is_zero() && lf == lg;
            Ok((ok, win.clone(), format!("lambda(H) {}", if lh.is_zero() { "zero" } else { "nonzero" })))
        }));
    }
    for k in 0..20 {
        let mut r = gen::rng(ctx.seed, "distalg/g", k);
        let f = gen::poly(&mut r, bsp, btr, &gset, 3, 2, 1);
        let g = gen::poly(&mut r, bsp, btr, &gset, 3, 2, 1);
        let fb = gen::poly(&mut r, bsp, btr, &bvars, 3, 2, 1);
        out.push(record(ctx, format!("distalg/closure/{k:02}"), "subalgebra G", || {
            let p = alg.c_mul(&f, &g).map_err(err)?;
            let ok = zero_h(&(&p - &g_project(&p)));
            Ok((ok, win.clone(), if ok { "G*G lies in G".into() } else { "G*G leaves G".into() }))
        }));
        out.push(record(ctx, format!("distalg/trace/{k:02}"), "trace on C", || {
            let a = alg.c_trace(&alg.c_mul(&f, &fb).map_err(err)?).map_err(err)?.truncate(order);
            let b = alg.c_trace(&alg.c_mul(&fb, &f).map_err(err)?).map_err(err)?.truncate(order);
            let t = alg.c_trace(&fb).map_err(err)?.truncate(order);
            let n = n_trace(&alg.lambda_of(&fb).map_err(err)?).truncate(order);
            let ok = a.sub(&b).is_zero() && t.sub(&n).is_zero();
            Ok((ok, win.clone(), format!("tr(F*G) = {a}, tr(G*F) = {b}")))
        }));
        out.push(record(ctx, format!("distalg/morphism/{k:02}"), "lambda is an algebra isomorphism", || {
            let lf = alg.lambda_of(&f).map_err(err)?;
            let lg = alg.lambda_of(&g).map_err(err)?;
            let lhs = alg.lambda_of(&alg.c_mul(&f, &g).map_err(err)?).map_err(err)?.truncate_weight(w);
            let rhs = alg.bullet(&lf.truncate_weight(w), &lg.truncate_weight(w), w).map_err(err)?.truncate_weight(w);
            let back = alg.lambda_of(&alg.lambda_g_inverse(&lf.truncate_weight(w), w).map_err(err)?).map_err(err)?;
            let ok = same(&lhs, &rhs) && same(&back.truncate_weight(w), &lf.truncate_weight(w));
            Ok((ok, win.clone(), "lambda(F*G) = lambda(F).lambda(G), lambda(lambda^-1 u) = u".into()))
        }));
    }
    out.push(record(ctx, "distalg/injective".into(), "injectivity of lambda on G", || {
        let (rank, n) = alg.lambda_rank(3, 3).map_err(err)?;
        Ok((rank == n, win.clone(), format!("rank {rank} of {n}")))
    }));
    for k in 0..20 {
        let mut r = gen::rng(ctx.seed, "distalg/surjective", k);
        let u = gen::natural_distribution(&mut r, e.space(), nu, 3, 3).truncate_weight(w);
        out.push(record(ctx, format!("distalg/surjective/{k:02}"), "lambda maps G onto natural distributions", || {
            let g = alg.lambda_g_inverse(&u, w).map_err(err)?;
            let ok = g_project(&g) == g && same(&alg.lambda_of(&g).map_err(err)?.truncate_weight(w), &u);
            Ok((ok, win.clone(), format!("preimage with {} terms", g.len())))
        }));
    }
    let sp = e.space();
    let tr = e.trunc();
    let bz = Berezin::new(&e);
    let wg = w.min(ctx.nu_max as i64);
    // values at the origin are exact through ν^{W/2} for a curved engine
    let rg = e.certified_weight().map_or(wg as i32, |c| (c / 2) as i32).min(wg as i32);
    for k in 0..10 {
        let mut r = gen::rng(ctx.seed, "distalg/lgamma", k);
        let g = gen::poly(&mut r, sp, tr, &gen::all_vars(sp), 3, 3, 1);
        let bz = bz.as_ref();
        out.push(record(ctx, format!("distalg/gamma/{k:02}"), "lambda of gamma(g) is B-conjugated multiplication", || {
            let bz = bz.map_err(err)?;
            let lhs = alg.lambda_of(&gamma_map(&g).map_err(err)?).map_err(err)?.truncate_weight(wg).with_nu_max(rg);
            let rhs = conjugated_multiplication(bz, &g, wg as i32, wg as u32)
                .map_err(err)?
                .truncate_weight(wg)
                .with_nu_max(rg);
            let ok = same(&lhs, &rhs);
            Ok((ok, ctx.window(nu, ctx.deg_max, Some(rg)), if ok { "agree".into() } else { "differ".into() }))
        }));
    }
    out
}

// ---------------------------------------------------------------- oscact

fn osc_trunc(ctx: &Ctx) -> TruncationSpec {
    TruncationSpec::new(-1, 2 * ctx.nu_max, ctx.deg_max)
}

fn random_phase(r: &mut rand_chacha::ChaCha8Rng, sp: VarSpace, tr: TruncationSpec) -> Result<PhaseJet, String> {
    PhaseJet::new(gen::phase_body(r, sp, tr)).map_err(err)
}

fn oscact_block(ctx: &Ctx) -> Vec<CheckRecord> {
    let sp = ctx.space();
    let tr = osc_trunc(ctx);
    let nu = 2 * ctx.nu_max;
    let vars = gen::all_vars(sp);
    let mut out = Vec::new();
    for k in 0..20 {
        let mut r = gen::rng(ctx.seed, "oscact/compose", k);
        let u = gen::natural_distribution(&mut r, sp, nu, 3, 3);
        let phi = random_phase(&mut r, sp, tr);
        let psi = random_phase(&mut r, sp, tr);
        out.push(record(ctx, format!("oscact/compose/{k:02}"), "composition law for u exp(phi)", || {
            let (phi, psi) = (phi?, psi?);
            let both = phi.add(&psi).map_err(err)?;
            let lhs = act_exp(&act_exp(&u, &phi).map_err(err)?, &psi).map_err(err)?;
            let rhs = act_exp(&u, &both).map_err(err)?;
            let wt = [phi.certified_weight(), psi.certified_weight(), Some(nu as i64)].into_iter().flatten().min().expect("nonempty");
            let ok = same(&lhs.truncate_weight(wt), &rhs.truncate_weight(wt));
            Ok((ok, ctx.window(nu, ctx.deg_max, Some((wt / 2) as i32)), format!("weight {wt}")))
        }));
    }
    for k in 0..20 {
        let mut r = gen::rng(ctx.seed, "oscact/representative", k);
        let n = gen::natural_operator(&mut r, sp, tr.with_nu_max(nu), 3, 3);
        let a = gen::natural_operator(&mut r, sp, tr.with_nu_max(nu), 2, 2);
        let x = Jet::var(sp, tr.with_nu_max(nu), sp.var(vars[k % vars.len()]));
        let phi = random_phase(&mut r, sp, tr);
        out.push(record(ctx, format!("oscact/representative/{k:02}"), "representative independence", || {
            let phi = phi?;
            let other = n.add(&DiffOperator::mult(&x).compose(&a).map_err(err)?).map_err(err)?;
            let lhs = act_exp_with(&n, &phi).map_err(err)?;
            let rhs = act_exp_with(&other, &phi).map_err(err)?;
            let ok = same(&lhs, &rhs);
            Ok((ok, ctx.window(nu, ctx.deg_max, nu_order(phi.certified_weight())), "N and N + xA".into()))
        }));
    }
    for k in 0..20 {
        let mut r = gen::rng(ctx.seed, "oscact/transpose", k);
        let u = gen::natural_distribution(&mut r, sp, nu, 3, 3);
        let comps: Vec<Jet> = (0..sp.nvars()).map(|_| gen::poly(&mut r, sp, tr.with_nu_max(nu), &vars, 2, 2, 0)).collect();
        let phi = random_phase(&mut r, sp, tr);
        out.push(record(ctx, format!("oscact/transpose/{k:02}"), "transpose field corollary", || {
            let phi = phi?;
            let v = FieldJet::new(comps).map_err(err)?;
            let img = transpose_field(&u, &v, &phi).map_err(err)?;
            let val = act_exp_value(&img, &phi).map_err(err)?;
            Ok((val.is_zero(), ctx.window(nu, ctx.deg_max, nu_order(phi.certified_weight())), format!("value {val}")))
        }));
    }
    out
}

fn foi_block(ctx: &Ctx) -> Vec<CheckRecord> {
    let sp = VarSpace::single(1);
    let t = TruncationSpec::new(-1, 6, 8);
    let mut out = Vec::new();
    out.push(record(ctx, "oscact/foi/gaussian".into(), "formal oscillatory integral", || {
        let lam = gaussian(sp, 6);
        let phi = PhaseJet::new(parse_jet("-nu^-1*z1*zb1", sp, t).map_err(err)?).map_err(err)?;
        let rho = DensityJet::one(sp, t);
        let fields = [
            FieldJet::partial(sp, t, 0),
            FieldJet::partial(sp, t, 1),
            FieldJet::scaled_partial(parse_jet("z1", sp, t).map_err(err)?, 0),
        ];
        let mut n = 0;
        for v in &fields {
            for mono in Mono::all_up_to(2, 4) {
                let f = Jet::monomial(sp, t, 0, mono.clone(), CRat::one());
                let res = foi_residual(&lam, &phi, &rho, v, &f).map_err(err)?;
                if !res.is_zero() {
                    return Ok((false, ctx.window(6, 8, Some(6)), format!("residual {res} at {mono:?}")));
                }
                n += 1;
            }
        }
        Ok((true, ctx.window(6, 8, Some(6)), format!("{n} field/monomial pairs")))
    }));
    out.push(record(ctx, "oscact/gram/gaussian".into(), "pairing Gram matrix", || {
        let g = pairing_gram(&gaussian(sp, 8), 2).map_err(err)?;
        let ok = matches!(g.verdict, GramVerdict::Nondegenerate { .. });
        Ok((ok, ctx.window(8, 4, Some(8)), format!("{:?}", g.verdict)))
    }));
    out.push(record(ctx, "oscact/gram/delta".into(), "pairing Gram matrix", || {
        let g = pairing_gram(&PointDistribution::delta(sp, 4), 1).map_err(err)?;
        let ok = matches!(g.verdict, GramVerdict::Degenerate { .. });
        Ok((ok, ctx.window(4, 2, Some(4)), format!("{:?}", g.verdict)))
    }));
    out
}

// ---------------------------------------------------------------- structural

fn structural_block(ctx: &Ctx) -> Vec<CheckRecord> {
    let mut out = Vec::new();
    for b in Builtin::ALL {
        let p = b.potential(ctx.m, ctx.deg_max);
        for l in 1..=4 {
            let here = b.name() == ctx.potential.name();
            out.push(record(ctx, format!("structural/critical/{}/l{l}", b.name()), "critical points of the Calabi function", || {
                let rep = if here {
                    let g = ctx.phase(l).map_err(err)?;
                    critical_check_jet(g.body(), p.body())
                } else {
                    critical_check(p.body(), l)
                };
                match rep {
                    Ok(r) => Ok((true, ctx.window(0, ctx.deg_max, None), format!("{} gradients", r.gradients_checked))),
                    Err(e) => Ok((false, ctx.window(0, ctx.deg_max, None), e.to_string())),
                }
            }));
        }
    }
    let phi = ctx.potential.body().clone();
    let sp = phi.space();
    let tr = phi.trunc();
    let holo = gen::kind_vars(sp, Kind::Holo);
    let anti = gen::kind_vars(sp, Kind::Anti);
    for k in 0..10 {
        let mut r = gen::rng(ctx.seed, "structural/gauge", k);
        let a = gen::poly(&mut r, sp, tr.with_nu_max(1), &holo, 3, 3, 1).shift_nu(-1);
        let b = gen::poly(&mut r, sp, tr.with_nu_max(1), &anti, 3, 3, 1).shift_nu(-1);
        let shifted = &phi + &(&a + &b).retruncate(tr);
        out.push(record(ctx, format!("structural/gauge/{k:02}"), "gauge invariance of the Calabi function", || {
            for l in 1..=3 {
                if calabi_g_body(&shifted, l).map_err(err)? != calabi_g_body(&phi, l).map_err(err)? {
                    return Ok((false, ctx.window(0, ctx.deg_max, None), format!("G({l}) changed")));
                }
            }
            Ok((true, ctx.window(0, ctx.deg_max, None), "G(1..3) unchanged".into()))
        }));
    }
    let e = ctx.engine(ctx.nu_max, ctx.deg_max);
    let esp = e.space();
    let etr = e.trunc();
    let vars = gen::all_vars(esp);
    for k in 0..50 {
        let mut r = gen::rng(ctx.seed, "structural/filtered", k);
        let f = gen::poly(&mut r, esp, etr, &vars, 3, 3, 1);
        let g = gen::poly(&mut r, esp, etr, &vars, 3, 3, 1);
        out.push(record(ctx, format!("structural/filtered/{k:02}"), "filtered product", || {
            let p = e.star(&f, &g).map_err(err)?;
            let lo = f.filtration_degree().unwrap_or(0) + g.filtration_degree().unwrap_or(0);
            let ok = p.filtration_degree().is_none_or(|d| d >= lo);
            Ok((ok, ctx.window(ctx.nu_max, ctx.deg_max, None), format!("deg(f*g) {:?} >= {lo}", p.filtration_degree())))
        }));
    }
    out
}

// ---------------------------------------------------------------- trace identity

/// Random factorizable tuple `(f_i, g_i)` with `c·monomial` entries of
/// degree ≤ 2. Consecutive `g_i`, `f_{i+1}` usually share their exponent
/// so that most products `(g_i⋆f_{i+1})(0)` are nonzero.
pub fn random_pairs(seed: u64, l: usize, case: usize, e: &StarEngine) -> Vec<(Jet, Jet)> {
    use rand::Rng;
    let mut r = gen::rng(seed, &format!("main/l{l}"), case);
    let sp = e.space();
    let tr = e.trunc();
    let m = sp.cdim();
    let holo = gen::kind_vars(sp, Kind::Holo);
    let anti = gen::kind_vars(sp, Kind::Anti);
    // shared exponent between g_{i-1} and f_i
    let links: Vec<Mono> = (0..l).map(|_| gen::mono_in(&mut r, sp.nvars(), &holo, 2)).collect();
    let mirror = |a: &Mono| {
        let mut b = sp.zero_mono();
        for k in 0..m {
            b.0[m + k] = a.0[k];
        }
        b
    };
    let mut out = Vec::new();
    for i in 0..l {
        let fm = if r.gen_bool(0.8) { links[i].clone() } else { gen::mono_in(&mut r, sp.nvars(), &gen::all_vars(sp), 2) };
        let next = &links[(i + 1) % l];
        let gm = if r.gen_bool(0.8) { mirror(next) } else { gen::mono_in(&mut r, sp.nvars(), &anti, 2) };
        let f = Jet::monomial(sp, tr, 0, fm, gen::coeff(&mut r));
        let g = Jet::monomial(sp, tr, 0, gm, gen::coeff(&mut r));
        out.push((f, g));
    }
    out
}

fn trace_block(ctx: &Ctx, l: usize, main: bool, annih: bool) -> Vec<CheckRecord> {
    // inputs live in a window of twice the reported ν-order
    let e = ctx.engine(2 * ctx.nu_max, ctx.deg_max);
    let alg = DistAlgebra::new(&e);
    let m = ctx.m;
    let mut out = Vec::new();
    let phase = ctx.phase(l);
    let anchor = "trace identity for the bullet product";
    let lift = |pairs: &[(Jet, Jet)]| -> Result<Vec<PointDistribution>, String> {
        pairs
            .iter()
            .map(|(f, g)| alg.lambda_of(&tensor(f, g).map_err(err)?).map_err(err))
            .collect()
    };
    if main && l == 2 && ctx.potential.name() == "flat" {
        out.push(record(ctx, "main-theorem/golden".into(), anchor, || {
            let phase = phase.clone().map_err(err)?;
            let z = parse_jet("z1", e.space(), e.trunc()).map_err(err)?;
            let zb = parse_jet("zb1", e.space(), e.trunc()).map_err(err)?;
            let us = lift(&[(z.clone(), zb.clone()), (z, zb)])?;
            let t = trace_identity(&alg, &phase, &us).map_err(err)?;
            let nu2 = |s: &NuSeries| s.coeff(2) == CRat::one() && s.terms().count() == 1;
            let ok = nu2(&t.lhs) && nu2(&t.rhs);
            Ok((
                ok,
                ctx.window(2 * ctx.nu_max, ctx.deg_max, Some(t.certified_order)),
                format!("lhs {} rhs {}", t.lhs, t.rhs),
            ))
        }));
    }
    for case in 0..MAIN_CASES {
        let pairs = random_pairs(ctx.seed, l, case, &e);
        let us = match lift(&pairs) {
            Ok(us) => us,
            Err(x) => {
                out.push(record(ctx, format!("main-theorem/l{l}/{case:02}"), anchor, || Err(x)));
                continue;
            }
        };
        if main {
            out.push(record(ctx, format!("main-theorem/l{l}/{case:02}"), anchor, || {
                let phase = phase.clone().map_err(err)?;
                let t = trace_identity(&alg, &phase, &us).map_err(err)?;
                let pf = product_formula(&alg, &pairs).map_err(err)?.truncate(t.certified_order);
                let agrees = t.lhs.sub(&pf).is_zero();
                let mut cyclic = true;
                if l > 1 && case < 3 {
                    let mut rot = us.clone();
                    rot.rotate_left(1);
                    let tr = trace_identity(&alg, &phase, &rot).map_err(err)?;
                    cyclic = tr.lhs.sub(&t.lhs).is_zero() && tr.residual.is_zero();
                }
                Ok((
                    t.residual.is_zero() && agrees && cyclic,
                    ctx.window(2 * ctx.nu_max, ctx.deg_max, Some(t.certified_order)),
                    format!(
                        "lhs {} rhs {} residual {}{}{}",
                        t.lhs,
                        t.rhs,
                        t.residual,
                        if agrees { "" } else { "; product formula differs" },
                        if cyclic { "" } else { "; not cyclic" }
                    ),
                ))
            }));
        }
        if annih {
            out.push(record(ctx, format!("annihilators/l{l}/{case:02}"), "annihilators of the trace identity", || {
                let phase = phase.clone().map_err(err)?;
                let mut bad = Vec::new();
                let mut order = 0;
                for d in Direction::all(l, m) {
                    let (res, o) = annihilator_residual_with(&alg, &phase, &us, d).map_err(err)?;
                    order = o;
                    if !res.is_zero() {
                        let kind = if d.kind == Kind::Holo { "z" } else { "zb" };
                        bad.push(format!("d/d{kind}{}_c{}: {res}", d.axis + 1, d.copy + 1));
                    }
                }
                let n = Direction::all(l, m).len();
                Ok((
                    bad.is_empty(),
                    ctx.window(2 * ctx.nu_max, ctx.deg_max, Some(order)),
                    if bad.is_empty() { format!("{n} directions vanish") } else { bad.join("; ") },
                ))
            }));
        }
    }
    out
}
