//! Seeded random inputs for the verification suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diffop::{DiffOperator, PointDistribution};
use crate::kernel::{CRat, Jet, Kind, Mono, TruncationSpec, Var, VarSpace};

/// A stream keyed by the run seed, a tag and a case index, so that cases
/// are reproducible independently of the order they run in.
pub fn rng(seed: u64, tag: &str, case: usize) -> ChaCha8Rng {
    // FNV-1a over the tag
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mixed = seed ^ h ^ (case as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    ChaCha8Rng::seed_from_u64(mixed)
}

/// Nonzero integer in `[-3, 3]`.
pub fn coeff(r: &mut ChaCha8Rng) -> CRat {
    let v = r.gen_range(1..=3i64);
    CRat::from_int(if r.gen_bool(0.5) { v } else { -v })
}

/// A monomial of degree ≤ `max_deg` in the variables `vars`.
pub fn mono_in(r: &mut ChaCha8Rng, n: usize, vars: &[usize], max_deg: u32) -> Mono {
    let mut mono = Mono::zero(n);
    let d = r.gen_range(0..=max_deg);
    for _ in 0..d {
        let i = vars[r.gen_range(0..vars.len())];
        mono.0[i] += 1;
    }
    mono
}

pub fn all_vars(space: VarSpace) -> Vec<usize> {
    (0..space.nvars()).collect()
}

pub fn kind_vars(space: VarSpace, kind: Kind) -> Vec<usize> {
    (0..space.cdim()).map(|k| space.idx(Var::new(0, kind, k))).collect()
}

/// `c·x^μ` with `|μ| ≤ max_deg` over all variables.
pub fn monomial_jet(r: &mut ChaCha8Rng, space: VarSpace, trunc: TruncationSpec, max_deg: u32) -> Jet {
    let mono = mono_in(r, space.nvars(), &all_vars(space), max_deg);
    Jet::monomial(space, trunc, 0, mono, coeff(r))
}

/// A sum of up to `terms` monomials in `vars` with ν-powers in `0..=nu_top`.
pub fn poly(
    r: &mut ChaCha8Rng,
    space: VarSpace,
    trunc: TruncationSpec,
    vars: &[usize],
    terms: usize,
    max_deg: u32,
    nu_top: i32,
) -> Jet {
    let mut j = Jet::zero(space, trunc);
    for _ in 0..r.gen_range(1..=terms) {
        let mono = mono_in(r, space.nvars(), vars, max_deg);
        let nu = r.gen_range(0..=nu_top);
        j.add_term(nu, mono, coeff(r));
    }
    j
}

/// A natural distribution `Σ a ν^r δ∘∂^γ` with `|γ| ≤ r ≤ r_max`.
pub fn natural_distribution(r: &mut ChaCha8Rng, space: VarSpace, nu_max: i32, r_max: i32, terms: usize) -> PointDistribution {
    let mut u = PointDistribution::zero(space, nu_max);
    for _ in 0..r.gen_range(1..=terms) {
        let k = r.gen_range(0..=r_max);
        let gamma = mono_in(r, space.nvars(), &all_vars(space), k as u32);
        u.add_term(k, gamma, coeff(r));
    }
    u
}

/// A natural operator `Σ ν^r c(x) ∂^γ` with `|γ| ≤ r ≤ r_max`.
pub fn natural_operator(r: &mut ChaCha8Rng, space: VarSpace, trunc: TruncationSpec, r_max: i32, terms: usize) -> DiffOperator {
    let mut n = DiffOperator::zero(space, trunc);
    for _ in 0..r.gen_range(1..=terms) {
        let k = r.gen_range(0..=r_max);
        let gamma = mono_in(r, space.nvars(), &all_vars(space), k as u32);
        let c = poly(r, space, trunc, &all_vars(space), 2, 2, 0).shift_nu(k);
        n.add_term(gamma, c);
    }
    n
}

/// A phase `ν^{-1}X_{-1} + X_0` with `X_{-1}` of degree 2..=3 and no
/// constant term in `X_0`.
pub fn phase_body(r: &mut ChaCha8Rng, space: VarSpace, trunc: TruncationSpec) -> Jet {
    let vars = all_vars(space);
    let mut j = Jet::zero(space, trunc);
    for _ in 0..r.gen_range(1..=3) {
        let mut mono = Mono::zero(space.nvars());
        for _ in 0..r.gen_range(2..=3) {
            mono.0[vars[r.gen_range(0..vars.len())]] += 1;
        }
        j.add_term(-1, mono, coeff(r));
    }
    for _ in 0..r.gen_range(0..=2) {
        let mut mono = Mono::zero(space.nvars());
        for _ in 0..r.gen_range(1..=2) {
            mono.0[vars[r.gen_range(0..vars.len())]] += 1;
        }
        j.add_term(0, mono, coeff(r));
    }
    j
}
