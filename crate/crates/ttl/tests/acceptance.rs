//! One PASS/FAIL line per acceptance criterion. Every comparison is exact.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ttl::chi::verify_theorem;
use ttl::cyclo::{gauss_norm_base, jacobi_cyclic, minus_one_class, mult_order, sgn_mult, CyclicGrp, GaussConvention};
use ttl::galois::{coset, count_formula, enumerate_double_cosets, sym_unram_parity, CosetKind};
use ttl::norm::{case_field, verify_identity, CaseTag, FirstJump, TableRow};
use ttl::rectifier::chain_field;
use ttl::symplectic::occupancy;
use ttl::transfer::{delta_i_ii_iii, delta_on_base, restriction_delta, transition, unramified_delta, TameElement};
use ttl::{ExtShape, JumpDatum, Rot, Subfield};

use common::{gauss_sum, permutation_sign, quarter_turn, Gf, TameGroup, ZZeta};

/// What a criterion found: `Err` carries the first counterexample.
type Outcome = Result<String, String>;

type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

/// Shapes for the sweeps: every `ζ_{E/F}` class below `z_max`, and with
/// `shifts` every valid alternative Frobenius root.
fn shapes(primes: &[u64], e_max: u64, f_max: u64, qf_max: u64, z_max: u64, shifts: bool) -> Vec<ExtShape> {
    let mut out = Vec::new();
    for &p in primes {
        for e in (1..=e_max).filter(|e| e % p != 0) {
            for f in 1..=f_max {
                let mut seen = BTreeSet::new();
                for z in 0..=z_max {
                    let Ok(s) = ExtShape::new(p, 1, e, f, z) else { continue };
                    if s.qf() > qf_max || !seen.insert(s.zeta_ef()) {
                        continue;
                    }
                    if shifts {
                        out.extend((0..s.zeta_phi_choices()).filter_map(|t| s.with_zeta_phi_shift(t).ok()));
                    } else {
                        out.push(s);
                    }
                }
            }
        }
    }
    out
}

fn double_coset_count() -> Outcome {
    let qs = [2u64, 3, 4, 5, 7, 8, 9, 11, 13, 16, 25];
    let mut pairs = 0;
    for q in qs {
        let (p, m) = common::prime_power(q).unwrap();
        for e in (1..=60).filter(|&e| common::gcd(e, q) == 1) {
            let brute = TameGroup::new(e, 1, q).double_cosets().len() as u64;
            let formula = count_formula(e, q).map_err(|err| err.to_string())?;
            let listed = enumerate_double_cosets(&ExtShape::new(p, m as u64, e, 1, 0).unwrap()).len() as u64;
            check(formula == brute && listed == brute, || format!("e={e} q={q}: {formula} {listed} vs {brute}"))?;
            pairs += 1;
        }
    }
    Ok(format!("{pairs} (e, q) pairs"))
}

fn evenness_clause() -> Outcome {
    let mut n = 0;
    for q in [4u64, 9, 16, 25, 49, 64, 81, 121, 169] {
        for d in (3..=200).filter(|&d| common::gcd(d, q) == 1) {
            let count = common::phi(d) / common::order(q, d);
            check(count % 2 == 0, || format!("q={q} d={d}: {count}"))?;
            check(mult_order(q % d, d) == Ok(common::order(q, d)), || format!("ord({q}, {d})"))?;
            n += 1;
        }
    }
    Ok(format!("{n} (q, d) pairs"))
}

fn sym_unram_parity_check() -> Outcome {
    let mut n = 0;
    for q in [2u64, 3, 5, 7, 9] {
        let (p, m) = common::prime_power(q).unwrap();
        for e in (1..=12).filter(|&e| common::gcd(e, q) == 1) {
            for f in 1..=12 {
                let s = ExtShape::new(p, m as u64, e, f, 0).map_err(|err| err.to_string())?;
                let par = sym_unram_parity(&s);
                let brute = TameGroup::new(e, f, q).symmetric_unramified() as u64;
                check(par.holds() && par.count == brute && brute % 2 == e * (f - 1) % 2, || {
                    format!("q={q} e={e} f={f}: {par:?}, brute force {brute}")
                })?;
                n += 1;
            }
        }
    }
    Ok(format!("{n} (q, e, f) triples"))
}

fn t_factor_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let fields: Vec<u64> = (2..=4096).filter(|&q| common::prime_power(q).is_some()).collect();
    let mut cache: BTreeMap<u64, (Gf, u64)> = BTreeMap::new();
    let mut n_sgn = 0;
    while n_sgn < 1000 {
        let q = fields[rng.gen_range(0..fields.len())];
        let (field, g) = cache.entry(q).or_insert_with(|| {
            let f = Gf::new(q);
            let g = f.generator();
            (f, g)
        });
        let x = rng.gen_range(0..q - 1);
        let a = field.pow(*g, x);
        let images: Vec<u64> = (0..q).map(|y| field.mul(a, y)).collect();
        let want = permutation_sign(&images);
        let got = sgn_mult(x as i128, q).map_err(|err| err.to_string())?.as_i8();
        check(got == want, || format!("q={q} x={x}: {got} vs {want}"))?;
        n_sgn += 1;
    }
    let mut n_jac = 0;
    while n_jac < 1000 {
        let order = rng.gen_range(1..=4096u64);
        let x = rng.gen_range(0..order);
        let squares: BTreeSet<u64> = (0..order).map(|y| 2 * y % order).collect();
        let got = jacobi_cyclic(x as i128, CyclicGrp { order }).as_i8();
        check((got == 1) == squares.contains(&x), || format!("|H|={order} x={x}: {got}"))?;
        n_jac += 1;
    }
    Ok(format!("{n_sgn} permutation signs over {} fields, {n_jac} square tests", cache.len()))
}

fn gauss_sum_law() -> Outcome {
    for q in [3u64, 5, 7, 9, 11, 13, 25, 27] {
        let (p, m) = common::prime_power(q).unwrap();
        let field = Gf::new(q);
        let g = gauss_sum(&field);
        let minus_one_square = field.is_square(p - 1);
        let chi = if minus_one_square { 1 } else { -1 };
        check(g.mul(&g).same(&ZZeta::int(p as usize, chi * q as i64)), || format!("q={q}: g² ≠ {chi}·q"))?;
        let n = gauss_norm_base(p, m as u64).map_err(|err| err.to_string())?;
        check(n + n == minus_one_class(p, m as u64).rot(), || format!("q={q}: 𝔫² = {}", n + n))?;
        check(n == Rot::new(quarter_turn(&g, q) as i128, 4), || format!("q={q}: 𝔫 = {n}, summation disagrees"))?;
        check((minus_one_class(p, m as u64).as_i8() == 1) == minus_one_square, || format!("q={q}: (-1/q)"))?;
    }
    Ok("q ∈ {3,5,7,9,11,13,25,27}".into())
}

fn theorem_sweep(conv: GaussConvention, shifts: bool, seeds: u64) -> Outcome {
    let mut data = 0;
    let mut fields = 0;
    for s in shapes(&[2, 3, 5, 7], 12, 12, 1 << 24, 2, shifts) {
        for seed in 0..seeds {
            let jd = JumpDatum::random_valid(&s, seed);
            let r = verify_theorem(&jd, conv).map_err(|err| format!("{jd}: {err}"))?;
            check(r.holds(), || format!("{r:?}"))?;
            data += 1;
            fields += r.fields.len();
        }
    }
    check(data >= 500, || format!("only {data} data"))?;
    Ok(format!("{data} data, {fields} field comparisons"))
}

fn delta_at_prime(shifts: bool) -> Outcome {
    let mut n = 0;
    for s in shapes(&[2, 3, 5, 7, 11, 13], 16, 1, u64::MAX, 4, shifts) {
        let mut fields: BTreeSet<Subfield> = (0..=s.e().trailing_zeros()).map(|j| chain_field(&s, j)).collect();
        fields.insert(Subfield::base(&s));
        for k in fields {
            let d = delta_i_ii_iii(&TameElement::VARPI, &s, k).map_err(|err| format!("{s}: {err}"))?;
            check(d.is_one(), || format!("{s} over {k:?}: {d}"))?;
            n += 1;
        }
    }
    Ok(format!("{n} (shape, field) pairs"))
}

/// Data realizing every case in range, for the identity.
fn identity_instances() -> Vec<(CaseTag, JumpDatum)> {
    let mut out = Vec::new();
    for e in (1..=15).step_by(2) {
        for d in ttl::cyclo::divisors(e) {
            // Two primes with d | p - 1 and p ∤ e.
            let primes: Vec<u64> =
                (2..200).filter(|&p| ttl::cyclo::is_prime(p) && (p - 1) % d == 0 && e % p != 0).take(2).collect();
            for p in primes {
                let s = ExtShape::new(p, 1, e, 1, 0).unwrap();
                out.extend((0..6).map(|seed| (CaseTag::I { d }, JumpDatum::random_valid(&s, seed))));
            }
        }
    }
    for e in (2..=16).step_by(2) {
        for p in [3u64, 5, 7, 11, 13] {
            for z in 0..3 {
                let Ok(s) = ExtShape::new(p, 1, e, 1, z) else { continue };
                if z > 0 && s.zeta_ef() == 0 {
                    continue;
                }
                out.extend((0..24).map(|seed| (CaseTag::II, JumpDatum::random_valid(&s, seed))));
            }
        }
    }
    for p in [2u64, 3, 5, 7] {
        for e in (1..=8).filter(|e| e % p != 0) {
            for f in 2..=6 {
                for z in 0..3 {
                    let Ok(s) = ExtShape::new(p, 1, e, f, z) else { continue };
                    if s.qf() > 1 << 20 || (z > 0 && s.zeta_ef() == 0) {
                        continue;
                    }
                    out.extend((0..8).map(|seed| (CaseTag::III, JumpDatum::random_valid(&s, seed))));
                }
            }
        }
    }
    out
}

fn identity(conv: GaussConvention, shifts: bool) -> Outcome {
    let mut by_case: BTreeMap<&str, usize> = BTreeMap::new();
    let mut rows = BTreeSet::new();
    let mut subcases = BTreeSet::new();
    let mut halves = BTreeSet::new();
    let mut odd_e = BTreeSet::new();
    for (case, jd) in identity_instances() {
        let variants: Vec<ExtShape> = if shifts {
            (0..jd.shape.zeta_phi_choices()).filter_map(|t| jd.shape.with_zeta_phi_shift(t).ok()).collect()
        } else {
            vec![jd.shape]
        };
        for s in variants {
            let jd = JumpDatum::new(s, jd.layers.clone());
            if !jd.is_valid() || case_field(case, &s).is_err() {
                continue;
            }
            let r = verify_identity(case, &jd, conv).map_err(|err| format!("{case} {jd}: {err}"))?;
            check(r.holds(), || format!("{r:?}"))?;
            match case {
                CaseTag::I { .. } => {
                    odd_e.insert(s.e());
                    *by_case.entry("I").or_default() += 1;
                }
                CaseTag::II => {
                    check(r.lhs == conv.norm_base(s.p(), s.m()).unwrap().pow(-(s.e() as i128 / 2)), || {
                        format!("{r:?}: not 𝔫^(-m)")
                    })?;
                    halves.insert(s.e() / 2 % 2);
                    subcases.extend(r.first_jump.filter(|&f| f != FirstJump::Above1));
                    *by_case.entry("II").or_default() += 1;
                }
                CaseTag::III => {
                    if s.f() % 2 == 0 {
                        let want = ttl::Sign::parity(s.f_varpi() as i128 + 1).rot();
                        check(r.lhs == want, || format!("{r:?}: not (-1)^(f_ϖ+1)"))?;
                    }
                    rows.extend(r.row);
                    *by_case.entry("III").or_default() += 1;
                }
            }
        }
    }
    check(odd_e == (1..=15).step_by(2).collect(), || format!("odd e realized: {odd_e:?}"))?;
    check(halves.len() == 2, || format!("e/2 parities realized: {halves:?}"))?;
    check(subcases.len() == 3, || format!("subcases realized: {subcases:?}"))?;
    check(rows.len() == TableRow::ALL.len(), || format!("table rows realized: {rows:?}"))?;
    Ok(format!("{by_case:?}, {} table rows, {} subcases", rows.len(), subcases.len()))
}

fn half_turn_unoccupied() -> Outcome {
    let mut n = 0u64;
    let mut seed = 0;
    let shapes = shapes(&[3, 5, 7, 11], 16, 3, 1 << 24, 2, false);
    let even: Vec<_> = shapes.into_iter().filter(|s| s.e() % 2 == 0).collect();
    while n < 10_000 {
        for s in &even {
            let jd = JumpDatum::random_valid(s, seed);
            let half = coset(s, s.e() / 2, 0);
            check(half.kind == CosetKind::SymRam, || format!("{s}: [σ^(e/2)] is {:?}", half.kind))?;
            check(!occupancy(&jd).get(&half), || format!("{jd}: V[σ^(e/2)] occupied"))?;
            n += 1;
        }
        seed += 1;
    }
    Ok(format!("{n} data with even e"))
}

fn restriction_independence() -> Outcome {
    let conv = GaussConvention::Standard;
    let mut n_shapes = 0;
    let mut transitions = 0;
    let mut unramified = 0;
    for s in shapes(&[2, 3, 5, 7], 8, 3, 1 << 16, 2, false) {
        let first = delta_on_base(&JumpDatum::random_valid(&s, 0), conv).map_err(|err| err.to_string())?;
        for seed in 0..50 {
            let jd = JumpDatum::random_valid(&s, seed);
            let here = delta_on_base(&jd, conv).map_err(|err| format!("{jd}: {err}"))?;
            check(here == first, || format!("{jd}: {here} vs {first}"))?;
            for j in 0..=s.e().trailing_zeros() {
                let k = chain_field(&s, j);
                if k != Subfield::base(&s) && k != Subfield::top(&s) {
                    let t = transition(&jd, k, seed, conv).map_err(|err| format!("{jd}: {err}"))?;
                    check(t.holds(), || format!("{t:?}"))?;
                    transitions += 1;
                }
            }
            if s.f() > 1 {
                let k = chain_field(&s, 0);
                let (got, want) = restriction_delta(&jd, k, conv).map_err(|err| format!("{jd}: {err}"))?;
                let d = k.residue_degree(&s) as i128;
                let closed = unramified_delta(&s, k).map_err(|err| err.to_string())?;
                check(got == want && want == closed && closed == Rot::new((d - 1) * k.codegree() as i128, 2), || {
                    format!("{jd}: {got} vs {want}")
                })?;
                unramified += 1;
            }
        }
        n_shapes += 1;
    }
    Ok(format!("{n_shapes} shapes × 50 data, {transitions} transitions, {unramified} unramified values"))
}

fn robustness() -> Outcome {
    let conj = GaussConvention::Conjugate;
    let mut parts = Vec::new();
    for (conv, shifts, label) in [(conj, false, "conjugate"), (GaussConvention::Standard, true, "ζ_φ"), (conj, true, "both")] {
        theorem_sweep(conv, shifts, 2).map_err(|e| format!("{label}: theorem: {e}"))?;
        delta_at_prime(shifts).map_err(|e| format!("{label}: Δ(ϖ_E): {e}"))?;
        identity(conv, shifts).map_err(|e| format!("{label}: identity: {e}"))?;
        parts.push(label);
    }
    Ok(format!("criteria 6-8 under {}", parts.join(", ")))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("double-coset count", double_coset_count),
        ("evenness clause", evenness_clause),
        ("symmetric-unramified parity", sym_unram_parity_check),
        ("t-factor oracle equivalence", t_factor_oracles),
        ("Gauss-sum law", gauss_sum_law),
        ("rectifier = χ-data product", || theorem_sweep(GaussConvention::Standard, false, 8)),
        ("Δ(ϖ_E) = 1 when totally ramified", || delta_at_prime(false)),
        ("normalization identity", || identity(GaussConvention::Standard, false)),
        ("V[σ^(e/2)] never occupied", half_turn_unoccupied),
        ("restriction independence", restriction_independence),
        ("convention robustness", robustness),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(summary) => println!("PASS {:>2} {name}: {summary} ({secs:.1}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} ({secs:.1}s)", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
