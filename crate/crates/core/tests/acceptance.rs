//! Acceptance criteria 1 to 8, one line each.
//!
//! Run with `cargo test -p graded-torsion --test acceptance`.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use graded_torsion::cohomology::{GradedInnerProduct, WeightedCohomology};
use graded_torsion::graded_lie::{BracketSpec, GradedLieAlgebra};
use graded_torsion::nilgroup::{bch_multiply, commutator, in_gamma0, power_word, power_word_iterated, GroupElement};
use graded_torsion::rational::{frac, q};
use graded_torsion::rumin::{rumin_complex, rumin_d};
use graded_torsion::sieve::{family_scan, is_known_family, poincare_polynomial, radical_root_count, sieve_range, DimensionVector, Shape};
use graded_torsion::torsion::{close, FiniteComplex, SpectralParams};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CRIT1_BUDGET: Duration = Duration::from_secs(1);
const CRIT2_BUDGET: Duration = Duration::from_secs(300);
const CRIT3_BUDGET: Duration = Duration::from_secs(1800);
const CRIT4_BUDGET_PER_PRESET: Duration = Duration::from_secs(30);
const CRIT6_BUDGET: Duration = Duration::from_secs(120);
const CRIT7_BUDGET: Duration = Duration::from_secs(10);
const RANDOM_COMPLEXES: usize = 100;
const RANDOM_WORDS: usize = 10_000;
const RANDOM_ALGEBRAS: usize = 20;
/// Passing vectors in the two search boxes of criterion 3.
const BOX_A_PASSING: usize = 187;
const BOX_B_PASSING: usize = 390;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(start: Instant, budget: Duration) -> Result<Duration, String> {
    let t = start.elapsed();
    ensure(t <= budget, format!("took {t:.2?}, budget {budget:?}"))?;
    Ok(t)
}

fn random_inner(alg: &GradedLieAlgebra, rng: &mut ChaCha8Rng) -> GradedInnerProduct {
    GradedInnerProduct::from_integer_stream(alg, || rng.gen_range(-3..=3))
}

fn criterion1() -> Outcome {
    let start = Instant::now();
    let g = GradedLieAlgebra::two_three_five();
    let c = WeightedCohomology::compute(&g, &GradedInnerProduct::identity(&g));
    ensure(c.betti == vec![1, 2, 3, 3, 2, 1], format!("b = {:?}", c.betti))?;
    ensure(c.pure, "not pure")?;
    ensure(c.p == Some(vec![0, 1, 4, 6, 9, 10]), format!("p = {:?}", c.p))?;
    ensure(c.k == Some(vec![1, 3, 2, 3, 1]), format!("k = {:?}", c.k))?;
    ensure(c.homogeneous_dimension == 10, format!("n = {}", c.homogeneous_dimension))?;
    let t = within(start, CRIT1_BUDGET)?;
    Ok(format!("b=(1,2,3,3,2,1) p=(0,1,4,6,9,10) k=(1,3,2,3,1) n=10 in {t:.2?}"))
}

fn passing_ns(tail: &[u64], n_max: u64) -> Result<Vec<u64>, String> {
    let rows = family_scan(tail, 0..=n_max).map_err(|e| e.to_string())?;
    Ok(rows.into_iter().filter(|r| r.pass).map(|r| r.n).collect())
}

fn criterion2() -> Outcome {
    let start = Instant::now();
    let n_max = 10_000;
    let is_sq = |n: u64| graded_torsion::sieve::is_square(n);
    for (tail, expect) in [
        (vec![2u64], Box::new(move |n: u64| is_sq(n)) as Box<dyn Fn(u64) -> bool>),
        (vec![3], Box::new(move |n: u64| n.is_multiple_of(2) && is_sq(3 * n - 2))),
    ] {
        let rows = family_scan(&tail, 0..=n_max).map_err(|e| e.to_string())?;
        for r in rows {
            ensure(r.pass == expect(r.n), format!("n2={} n={} pass={}", tail[0], r.n, r.pass))?;
        }
    }
    ensure(passing_ns(&[4], n_max)? == vec![8], "n2=4 family")?;
    ensure(passing_ns(&[5], n_max)? == vec![10], "n2=5 family")?;
    ensure(passing_ns(&[1, 2], n_max)? == vec![10], "(n1,1,2) family")?;
    for (tail, n, roots) in [(4u64, 17u64, 2usize), (4, 66, 2), (4, 1521, 2), (5, 17, 2), (5, 36, 2), (5, 289, 2), (5, 67, 4)] {
        let got = radical_root_count(&[tail], n).map_err(|e| e.to_string())?;
        ensure(got == roots, format!("n2={tail} n={n}: {got} roots, expected {roots}"))?;
    }
    let t = within(start, CRIT2_BUDGET)?;
    Ok(format!("n2=2,3 characterised; n2=4 -> n=8, n2=5 -> n=10, (n1,1,2) -> n=10; partial roots match; {t:.2?}"))
}

fn box_check(ranges: Vec<std::ops::RangeInclusive<u64>>, expected_count: usize) -> Result<usize, String> {
    let shape = Shape::new(ranges.clone());
    let found: BTreeSet<Vec<u64>> = sieve_range(&shape).map_err(|e| e.to_string())?.iter().map(|d| d.entries().to_vec()).collect();
    let mut pinned = BTreeSet::new();
    let mut stack = vec![Vec::new()];
    while let Some(prefix) = stack.pop() {
        if prefix.len() == ranges.len() {
            if let Some(dv) = DimensionVector::trimmed(prefix) {
                if is_known_family(&dv) {
                    pinned.insert(dv.entries().to_vec());
                }
            }
            continue;
        }
        for v in ranges[prefix.len()].clone() {
            let mut p = prefix.clone();
            p.push(v);
            stack.push(p);
        }
    }
    if found != pinned {
        let extra: Vec<_> = found.difference(&pinned).take(5).collect();
        let missing: Vec<_> = pinned.difference(&found).take(5).collect();
        return Err(format!("unexpected passes {extra:?}, missing {missing:?}"));
    }
    ensure(found.len() == expected_count, format!("{} passing vectors, expected {expected_count}", found.len()))?;
    Ok(found.len())
}

fn criterion3() -> Outcome {
    let start = Instant::now();
    let a = box_check(vec![0..=100, 0..=5, 0..=5, 0..=5, 0..=5], BOX_A_PASSING)?;
    let b = box_check(vec![0..=200, 0..=50, 0..=20], BOX_B_PASSING)?;
    let t = within(start, CRIT3_BUDGET)?;
    Ok(format!("box A {a} and box B {b} passing vectors, all in the known families; {t:.2?}"))
}

fn criterion4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let presets = [
        ("235", GradedLieAlgebra::two_three_five(), vec![1, 3, 2, 3, 1]),
        ("heisenberg3", GradedLieAlgebra::heisenberg(1), vec![1, 2, 1]),
        ("abelian:3:-1", GradedLieAlgebra::abelian(3, -1).unwrap(), vec![1, 1, 1]),
    ];
    let mut times = Vec::new();
    for (name, alg, orders) in presets {
        let start = Instant::now();
        let rc = rumin_complex(&alg, &GradedInnerProduct::identity(&alg)).map_err(|e| format!("{name}: {e}"))?;
        ensure(rc.d_squared_zero(), format!("{name}: D^2 != 0"))?;
        let got: Vec<u64> = rc.orders().into_iter().map(|o| o.unwrap_or(0)).collect();
        ensure(got == orders, format!("{name}: orders {got:?}"))?;
        ensure(rc.orders_certified(), format!("{name}: orders not homogeneous"))?;
        for i in 0..5 {
            let inner = random_inner(&alg, &mut rng);
            let d = rumin_d(&alg, &inner).map_err(|e| format!("{name}: {e}"))?;
            ensure(d == rc.d, format!("{name}: D differs for random inner product {i}"))?;
        }
        times.push(format!("{name} {:.2?}", within(start, CRIT4_BUDGET_PER_PRESET)?));
    }
    Ok(format!("D^2=0, orders match k, D identical across 5 inner products ({})", times.join(", ")))
}

fn criterion5() -> Outcome {
    for (name, alg) in [("235", GradedLieAlgebra::two_three_five()), ("heisenberg3", GradedLieAlgebra::heisenberg(1))] {
        let rc = rumin_complex(&alg, &GradedInnerProduct::identity(&alg)).map_err(|e| e.to_string())?;
        let report = rc.star_duality_check();
        ensure(report.all_hold(), format!("{name}: {report:?}"))?;
    }
    Ok("adjoint-via-star identity holds for every q on 235 and heisenberg3".into())
}

fn random_complex(rng: &mut ChaCha8Rng, index: usize) -> FiniteComplex {
    let k: Vec<u64> = match index % 4 {
        0 => vec![1, 3, 2, 3, 1],
        1 => vec![1, 2, 1],
        _ => {
            let len = rng.gen_range(1..=4);
            (0..len).map(|_| rng.gen_range(1..=3)).collect()
        }
    };
    let len = k.len() + 1;
    let acyclic = index.is_multiple_of(2);
    loop {
        let ranks: Vec<usize> = (0..k.len()).map(|_| rng.gen_range(0..=2)).collect();
        let betti: Vec<usize> = (0..len).map(|_| if acyclic { 0 } else { rng.gen_range(0..=2) }).collect();
        let dims_ok = (0..len).all(|q| {
            let prev = if q > 0 { ranks[q - 1] } else { 0 };
            let next = ranks.get(q).copied().unwrap_or(0);
            prev + betti[q] + next <= 6
        });
        if dims_ok {
            let lo = rng.gen_range(-2..=2);
            return FiniteComplex::from_integer_stream(lo, &ranks, &betti, k.clone(), || rng.gen()).expect("valid random complex");
        }
    }
}

fn criterion6() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut telescoped = 0;
    for i in 0..RANDOM_COMPLEXES {
        let c = random_complex(&mut rng, i);
        let tag = |what: &str| format!("complex {i}: {what}");
        let reference = c.canonical_reference();
        let p = c.default_params();
        let report = c.invariance_report(&reference, &p).map_err(|e| tag(&e.to_string()))?;
        ensure(report.lambda_invariant, tag("λ-dependence"))?;
        ensure(report.n_invariant, tag("N-shift dependence"))?;
        ensure(report.a_invariant, tag("a-scaling dependence"))?;
        if c.is_acyclic() {
            ensure(c.telescoping_check(&p.n, &p.a).map_err(|e| tag(&e.to_string()))?, tag("telescoping"))?;
            telescoped += 1;
        }
        let chi: i64 = c.betti().iter().enumerate().map(|(s, &b)| if (c.lowest_degree() + s as i32) % 2 == 0 { b as i64 } else { -(b as i64) }).sum();
        for t in [0.1, 1.0, 10.0] {
            let h = c.euler_heat_trace(&p.a, t).map_err(|e| tag(&e.to_string()))?;
            ensure(close(h, chi as f64), tag(&format!("heat trace {h} at t={t}, χ={chi}")))?;
        }
        let dual = c.dual_complex();
        let dual_ref = c.dual_reference(&reference).map_err(|e| tag(&e.to_string()))?;
        let td = dual.torsion_norm(&dual_ref, &dual.default_params()).map_err(|e| tag(&e.to_string()))?;
        ensure(close(td.total * report.base.total, 1.0), tag("duality inversion"))?;
        let other = FiniteComplex::from_integer_stream(c.lowest_degree(), &c.ranks(), &c.betti(), c.k().to_vec(), || rng.gen())
            .map_err(|e| tag(&e.to_string()))?;
        let sum = c.direct_sum(&other).map_err(|e| tag(&e.to_string()))?;
        let sum_ref: Vec<_> = reference
            .iter()
            .zip(other.canonical_reference())
            .map(|(x, y)| {
                let z = graded_torsion::linalg::QMatrix::zeros;
                x.hstack(&z(x.nrows(), y.ncols())).vstack(&z(y.nrows(), x.ncols()).hstack(&y))
            })
            .collect();
        let ts = sum.torsion_norm(&sum_ref, &sum.default_params()).map_err(|e| tag(&e.to_string()))?;
        let to = other.torsion_norm(&other.canonical_reference(), &other.default_params()).map_err(|e| tag(&e.to_string()))?;
        ensure(close(ts.total, report.base.total * to.total), tag("direct sum"))?;
        for lambda in std::iter::once(0.0).chain(c.midgap_cutoffs(&p.a).map_err(|e| tag(&e.to_string()))?) {
            let z2 = c.z2_check(&SpectralParams { lambda, ..p.clone() }).map_err(|e| tag(&e.to_string()))?;
            ensure(z2.holds, tag(&format!("Z2 form at λ={lambda}: {z2:?}")))?;
        }
        let exact = c.zeta_prime_zero_exact(&p.n, &p.a).map_err(|e| tag(&e.to_string()))?;
        ensure(close(exact, report.base.zeta_prime), tag("exact ζ' oracle"))?;
    }
    let t = within(start, CRIT6_BUDGET)?;
    Ok(format!("{RANDOM_COMPLEXES} complexes ({telescoped} acyclic) pass the full battery in {t:.2?}"))
}

fn criterion7() -> Outcome {
    let start = Instant::now();
    let (g1, g2) = (GroupElement::gamma1(), GroupElement::gamma2());
    let c = commutator(&g1, &g2);
    ensure(bch_multiply(&g1, &g2) == GroupElement([q(1), q(1), frac(1, 2), frac(1, 12), frac(-1, 12)]), "γ1γ2")?;
    ensure(c == GroupElement([q(0), q(0), q(1), frac(1, 2), frac(1, 2)]), "[γ1,γ2]")?;
    ensure(commutator(&g1, &c) == GroupElement::from_i64([0, 0, 0, 1, 0]), "[γ1,[γ1,γ2]]")?;
    ensure(commutator(&g2, &c) == GroupElement::from_i64([0, 0, 0, 0, 1]), "[γ2,[γ1,γ2]]")?;
    for k in -20..=20 {
        for l in -20..=20 {
            let expect = GroupElement([q(k), q(l), frac(k * l, 2), frac(k * k * l, 12), frac(-k * l * l, 12)]);
            ensure(power_word(k, l) == expect && power_word_iterated(k, l) == expect, format!("log(γ1^{k} γ2^{l})"))?;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let gens = [g1.clone(), g2.clone(), g1.inverse(), g2.inverse()];
    let mut x = GroupElement::identity();
    for i in 0..RANDOM_WORDS {
        if i % 100 == 0 {
            x = GroupElement::identity();
        }
        x = bch_multiply(&x, &gens[rng.gen_range(0..4)]);
        ensure(in_gamma0(&x), format!("word {i} left Γ0: {x}"))?;
        ensure(in_gamma0(&x.inverse()), format!("inverse of word {i} left Γ0"))?;
    }
    let t = within(start, CRIT7_BUDGET)?;
    Ok(format!("displayed coordinates reproduced; {RANDOM_WORDS} random words stay in Γ0; {t:.2?}"))
}

fn random_two_step(rng: &mut ChaCha8Rng) -> GradedLieAlgebra {
    let n1 = rng.gen_range(2..=4);
    let n2 = rng.gen_range(1..=2);
    let mut degrees = vec![-1; n1];
    degrees.extend(vec![-2; n2]);
    let mut spec = Vec::new();
    for i in 0..n1 {
        for j in i + 1..n1 {
            let terms: Vec<(usize, _)> =
                (0..n2).map(|k| (n1 + k, q(rng.gen_range(-2..=2)))).filter(|(_, c)| *c != q(0)).collect();
            if !terms.is_empty() {
                spec.push(BracketSpec::new(i, j, terms));
            }
        }
    }
    GradedLieAlgebra::build(degrees, &spec).expect("two-step tables satisfy Jacobi")
}

fn criterion8() -> Outcome {
    let mut algebras: Vec<(String, GradedLieAlgebra)> = vec![
        ("235".into(), GradedLieAlgebra::two_three_five()),
        ("heisenberg3".into(), GradedLieAlgebra::heisenberg(1)),
        ("heisenberg5".into(), GradedLieAlgebra::heisenberg(2)),
        ("abelian:3:-1".into(), GradedLieAlgebra::abelian(3, -1).unwrap()),
        ("abelian:2:-2".into(), GradedLieAlgebra::abelian(2, -2).unwrap()),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..RANDOM_ALGEBRAS {
        let a = random_two_step(&mut rng);
        let a = match i % 3 {
            0 => a,
            1 => a.direct_sum(&GradedLieAlgebra::heisenberg(1)),
            _ => a.direct_sum(&GradedLieAlgebra::abelian(1, -3).unwrap()),
        };
        algebras.push((format!("random {i}"), a));
    }
    for (name, alg) in &algebras {
        let c = WeightedCohomology::compute(alg, &GradedInnerProduct::identity(alg));
        let dv = DimensionVector::new(alg.dimension_vector()).map_err(|e| format!("{name}: {e}"))?;
        let p = poincare_polynomial(&dv);
        let mut w = vec![BigInt::from(0); p.len()];
        for (qd, ws) in c.weights.iter().enumerate() {
            for &wt in ws {
                let wt = wt as usize;
                if wt >= w.len() {
                    return Err(format!("{name}: weight {wt} beyond degree {}", p.len() - 1));
                }
                if qd % 2 == 0 {
                    w[wt] += 1;
                } else {
                    w[wt] -= 1;
                }
            }
        }
        ensure(w == p, format!("{name}: {w:?} vs {p:?}"))?;
    }
    Ok(format!("Poincaré polynomial equals the weighted Euler characteristic for {} algebras", algebras.len()))
}

fn main() {
    let criteria: [(u32, fn() -> Outcome); 8] = [
        (1, criterion1),
        (2, criterion2),
        (3, criterion3),
        (4, criterion4),
        (5, criterion5),
        (6, criterion6),
        (7, criterion7),
        (8, criterion8),
    ];
    let mut failed = 0;
    for (n, f) in criteria {
        match f() {
            Ok(detail) => println!("criterion {n}: PASS ({detail})"),
            Err(why) => {
                failed += 1;
                println!("criterion {n}: FAIL ({why})");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
