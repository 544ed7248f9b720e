//! Acceptance suite: one test per criterion, each printing a PASS line
//! with the checked quantities. Everything is exact; there are no
//! tolerances anywhere.

use std::collections::HashMap;
use std::process::Command;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fibercalc_core::certify::{generate_family, reverify_noncomplex, FamilyMode, FamilySpec};
use fibercalc_core::construct::{
    build_block, fiber_sum, horizontal_stabilize, section_sum, BlockFamily, BlockSpec, RouteCheck,
};
use fibercalc_core::fibration::{
    Asserted, Body, DeclaredInvariants, Fibration, FibrationKind, Section,
};
use fibercalc_core::invariants::{betti_and_b2, euler_characteristic, h1_group, signature};
use fibercalc_core::linalg::{smith_normal_form, AbelianGroup, IntMatrix};
use fibercalc_core::meyer::{elliptic_word, meyer_tau};
use fibercalc_core::monodromy::{
    transvection_matrix, CurveClass, MonodromyFactorization, SpElement, TwistLetter,
};

use fibercalc::catalog::{Catalog, Provenance};
use fibercalc::format::{emit_fibration, parse_fibration, Meta};

fn q(g: usize, h: usize, m: i64) -> Fibration {
    build_block(&BlockSpec::new(BlockFamily::Q, g, h, m)).unwrap()
}

fn p(g: usize, h: usize) -> Fibration {
    build_block(&BlockSpec::new(BlockFamily::P, g, h, 1)).unwrap()
}

fn r(g: usize, h: usize, m: i64) -> Fibration {
    // h = 1 uses the disjoint standard classes a_1, a_2 (the defaults)
    build_block(&BlockSpec::new(BlockFamily::R, g, h, m)).unwrap()
}

fn elliptic(n: usize) -> Fibration {
    Fibration::new(
        FibrationKind::Lefschetz,
        1,
        0,
        Body::Explicit(MonodromyFactorization {
            fiber_genus: 1,
            base_genus: 0,
            handles: vec![],
            vanishing_cycles: elliptic_word(n),
        }),
        vec![Section {
            self_intersection: -(n as i64),
            splits_base: true,
        }],
        Asserted {
            relatively_minimal: true,
            mcg_valid: true,
            ..Asserted::default()
        },
    )
    .unwrap()
}

#[test]
fn criterion_01_block_homology() {
    let mut checked = 0;
    for g in [2usize, 3, 4] {
        for h in [1usize, 2, 9] {
            let h1 = h1_group(&p(g, h)).unwrap();
            assert_eq!(h1, AbelianGroup::free(2 * g + 2 * h), "P({},{})", g, h);
            checked += 1;
            for m in 2..=12i64 {
                let h1 = h1_group(&q(g, h, m)).unwrap();
                assert_eq!(h1.rank(), 2 * g + 2 * h - 1, "Q_{}({},{})", m, g, h);
                assert_eq!(h1.torsion(), &[BigInt::from(m)], "Q_{}({},{})", m, g, h);
                let h1 = h1_group(&r(g, h, m)).unwrap();
                assert_eq!(h1.rank(), 2 * g + 2 * h - 2, "R_{}({},{})", m, g, h);
                assert_eq!(h1.torsion(), &[BigInt::from(m)], "R_{}({},{})", m, g, h);
                checked += 2;
            }
        }
    }
    println!(
        "[PASS] criterion 1: block homology matches the closed forms on {} blocks (exact)",
        checked
    );
}

#[test]
fn criterion_02_block_signatures() {
    let mut checked = 0;
    for g in [2usize, 3, 4] {
        for h in [1usize, 2, 9] {
            assert_eq!(signature(&p(g, h)).unwrap(), 0, "sigma P({},{})", g, h);
            checked += 1;
            for m in 2..=12i64 {
                assert_eq!(
                    signature(&q(g, h, m)).unwrap(),
                    0,
                    "sigma Q_{}({},{})",
                    m,
                    g,
                    h
                );
                assert_eq!(
                    signature(&r(g, h, m)).unwrap(),
                    0,
                    "sigma R_{}({},{})",
                    m,
                    g,
                    h
                );
                checked += 2;
            }
        }
    }
    println!(
        "[PASS] criterion 2: Meyer-route signature vanishes on all {} elementary blocks (exact)",
        checked
    );
}

#[test]
fn criterion_03_elliptic_oracle() {
    for n in 1..=3usize {
        let e = elliptic(n);
        assert_eq!(signature(&e).unwrap(), -8 * n as i64, "sigma E({})", n);
        assert_eq!(euler_characteristic(&e), 12 * n as i64, "e E({})", n);
    }
    assert!(h1_group(&elliptic(1)).unwrap().is_trivial(), "H_1 E(1)");
    println!(
        "[PASS] criterion 3: sigma(E(n)) = -8n and e = 12n for n = 1..3, H_1(E(1)) = 0 (exact)"
    );
}

fn random_primitive(rng: &mut ChaCha8Rng, genus: usize) -> CurveClass {
    loop {
        let v: Vec<BigInt> = (0..2 * genus)
            .map(|_| BigInt::from(rng.gen_range(-5i64..=5)))
            .collect();
        let mut g = BigInt::zero();
        for e in &v {
            g = g.gcd(e);
        }
        if g.is_zero() {
            continue;
        }
        let reduced: Vec<BigInt> = v.iter().map(|e| e / &g).collect();
        return CurveClass::new(genus, reduced, false).unwrap();
    }
}

fn random_transvection_product(rng: &mut ChaCha8Rng, genus: usize) -> SpElement {
    let letters = rng.gen_range(1..=3);
    let mut acc = SpElement::identity(genus);
    for _ in 0..letters {
        let c = random_primitive(rng, genus);
        let p = rng.gen_range(-2i64..=2);
        acc = acc.compose(&transvection_matrix(&c, p));
    }
    acc
}

#[test]
fn criterion_04_cocycle_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4d657965);
    let mut triples = 0;
    for (genus, cases) in [(2usize, 600usize), (3, 420)] {
        let id = SpElement::identity(genus);
        for _ in 0..cases {
            let a = random_transvection_product(&mut rng, genus);
            let b = random_transvection_product(&mut rng, genus);
            let c = random_transvection_product(&mut rng, genus);
            let lhs = meyer_tau(&a, &b) + meyer_tau(&a.compose(&b), &c);
            let rhs = meyer_tau(&a, &b.compose(&c)) + meyer_tau(&b, &c);
            assert_eq!(lhs, rhs, "cocycle identity, genus {}", genus);
            for t in [meyer_tau(&a, &b), meyer_tau(&b, &c)] {
                assert!(t.abs() <= 2 * genus as i64, "|tau| <= 2g");
            }
            assert_eq!(meyer_tau(&id, &a), 0);
            assert_eq!(meyer_tau(&a, &id), 0);
            triples += 1;
        }
    }
    assert!(triples >= 1000);
    println!(
        "[PASS] criterion 4: cocycle identity, |tau| <= 2g and tau(I,.) = tau(.,I) = 0 on {} \
         random triples in Sp(4,Z) and Sp(6,Z) (exact)",
        triples
    );
}

/// gcd of all k x k minors by direct Laplace expansion: the independent
/// oracle for the invariant factors.
fn minor_gcds(m: &IntMatrix) -> Vec<BigInt> {
    let (rows, cols) = (m.rows(), m.cols());
    let kmax = rows.min(cols);
    let mut out = Vec::with_capacity(kmax);
    let mut prev: HashMap<(u32, u32), BigInt> = HashMap::new();
    prev.insert((0, 0), BigInt::one());
    for k in 1..=kmax {
        let mut cur: HashMap<(u32, u32), BigInt> = HashMap::new();
        let rsubs: Vec<u32> = (0u32..1 << rows)
            .filter(|m| m.count_ones() as usize == k)
            .collect();
        let csubs: Vec<u32> = (0u32..1 << cols)
            .filter(|m| m.count_ones() as usize == k)
            .collect();
        let mut gcd_all = BigInt::zero();
        for rmask in &rsubs {
            let last_row = (31 - rmask.leading_zeros()) as usize;
            let rrest = rmask & !(1u32 << last_row);
            for cmask in &csubs {
                let cvec: Vec<usize> = (0..32).filter(|i| cmask & (1 << i) != 0).collect();
                let mut det = BigInt::zero();
                for (j, &c) in cvec.iter().enumerate() {
                    let entry = m.get(last_row, c);
                    if entry.is_zero() {
                        continue;
                    }
                    let crest = cmask & !(1u32 << c);
                    let sub = prev.get(&(rrest, crest)).expect("previous round");
                    let term = entry * sub;
                    if (k - 1 + j) % 2 == 0 {
                        det += term;
                    } else {
                        det -= term;
                    }
                }
                gcd_all = gcd_all.gcd(&det);
                cur.insert((*rmask, *cmask), det);
            }
        }
        out.push(gcd_all);
        prev = cur;
    }
    out
}

#[test]
fn criterion_05_snf_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x534e46);
    let cases = 1000;
    for case in 0..cases {
        let rows = rng.gen_range(1..=8);
        let cols = rng.gen_range(1..=8);
        let m = IntMatrix::from_fn(rows, cols, |_, _| BigInt::from(rng.gen_range(-10i64..=10)));
        let snf = smith_normal_form(&m);
        assert_eq!(snf.u.mul(&m).mul(&snf.v), snf.d, "UMV = D, case {}", case);
        assert_eq!(
            snf.u.det().abs(),
            BigInt::one(),
            "U unimodular, case {}",
            case
        );
        assert_eq!(
            snf.v.det().abs(),
            BigInt::one(),
            "V unimodular, case {}",
            case
        );
        let factors = snf.invariant_factors();
        for w in factors.windows(2) {
            assert!(
                (&w[1] % &w[0]).is_zero(),
                "divisibility chain, case {}",
                case
            );
        }
        let gcds = minor_gcds(&m);
        let mut product = BigInt::one();
        for (k, gcd) in gcds.iter().enumerate() {
            if k < factors.len() {
                product *= &factors[k];
                assert_eq!(
                    &product,
                    gcd,
                    "d_1..d_{} = gcd of {}x{} minors, case {}",
                    k + 1,
                    k + 1,
                    k + 1,
                    case
                );
            } else {
                assert!(
                    gcd.is_zero(),
                    "minors beyond the rank vanish, case {}",
                    case
                );
            }
        }
    }
    println!(
        "[PASS] criterion 5: UMV = D with unimodular U, V and the minor-gcd oracle on {} \
         random matrices (exact)",
        cases
    );
}

#[test]
fn criterion_06_stabilization_postconditions() {
    let catalog_seeds: Vec<(&str, Fibration, bool)> = vec![
        // explicit even-b1 seed: P(2,2), b_1 = 8 > 2h = 4
        ("P(2,2)", p(2, 2), true),
        // opaque even-b1 seeds
        (
            "korkmaz-Y2",
            fibercalc_core::seeds::korkmaz_y(2).unwrap(),
            false,
        ),
        (
            "korkmaz-Y3",
            fibercalc_core::seeds::korkmaz_y(3).unwrap(),
            false,
        ),
        // explicit odd-b1 seed: Q_2(2,2) through the odd-b_1 path
        ("Q_2(2,2)", q(2, 2, 2), true),
    ];
    let mut checked = 0;
    for (name, seed, explicit) in &catalog_seeds {
        let sigma_seed = signature(seed).unwrap();
        for m in 2..=20i64 {
            let report = horizontal_stabilize(seed, 1, m, None)
                .unwrap_or_else(|e| panic!("stabilize {} at m = {}: {}", name, m, e));
            let b1 = report.b1_after.expect("full result");
            assert_eq!(b1 % 2, 1, "{} at m = {}: b_1 odd", name, m);
            assert_eq!(
                report.sigma_after, sigma_seed,
                "{} at m = {}: sigma preserved",
                name, m
            );
            let h1 = report.h1_after.as_ref().expect("full result");
            assert!(
                h1.has_torsion_divisible_by(&BigInt::from(m)),
                "{} at m = {}: torsion contains a divisor of m (H_1 = {})",
                name,
                m,
                h1
            );
            let expected_route = if *explicit {
                RouteCheck::DualAgreed
            } else {
                RouteCheck::SingleRoute
            };
            assert_eq!(report.cross_check, expected_route, "{} at m = {}", name, m);
            checked += 1;
        }
    }
    println!(
        "[PASS] criterion 6: {} stabilizations keep b_1 odd, preserve sigma, gain Z/m torsion, \
         and the dual H_1 routes agree wherever both are computable (exact)",
        checked
    );
}

#[test]
fn criterion_07_additivity_cross_checks() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xadd171);
    let families = [BlockFamily::P, BlockFamily::Q, BlockFamily::R];
    let random_block = |rng: &mut ChaCha8Rng, g: usize, h: usize| -> Fibration {
        let family = families[rng.gen_range(0..families.len())];
        let m = rng.gen_range(1..=6);
        match family {
            BlockFamily::P => p(g, h),
            BlockFamily::Q => q(g, h, m),
            BlockFamily::R => r(g, h, m),
        }
    };
    for case in 0..100 {
        // fiber sum: equal fiber genus
        let g = rng.gen_range(2..=3);
        let (h1, h2) = (rng.gen_range(1..=2), rng.gen_range(1..=2));
        let f1 = random_block(&mut rng, g, h1);
        let f2 = random_block(&mut rng, g, h2);
        let e1 = euler_characteristic(&f1);
        let e2 = euler_characteristic(&f2);
        let s1 = signature(&f1).unwrap();
        let s2 = signature(&f2).unwrap();
        let report = fiber_sum(&f1, &f2, None).unwrap();
        assert_eq!(
            report.euler_after,
            e1 + e2 + 4 * (g as i64 - 1),
            "fiber-sum e, case {}",
            case
        );
        assert_eq!(
            report.sigma_after,
            s1 + s2,
            "fiber-sum sigma, case {}",
            case
        );
        let composed = report.result.expect("explicit result");
        assert_eq!(
            euler_characteristic(&composed),
            report.euler_after,
            "recompute e, case {}",
            case
        );
        assert_eq!(
            signature(&composed).unwrap(),
            report.sigma_after,
            "recompute sigma, case {}",
            case
        );

        // section sum: equal base genus
        let h = rng.gen_range(1..=2);
        let (ga, gb) = (rng.gen_range(2..=3), rng.gen_range(2..=3));
        let f1 = random_block(&mut rng, ga, h);
        let f2 = random_block(&mut rng, gb, h);
        let e1 = euler_characteristic(&f1);
        let e2 = euler_characteristic(&f2);
        let s1 = signature(&f1).unwrap();
        let s2 = signature(&f2).unwrap();
        let report = section_sum(&f1, &f2).unwrap();
        assert_eq!(
            report.euler_after,
            e1 + e2 + 4 * (h as i64 - 1),
            "section-sum e, case {}",
            case
        );
        assert_eq!(
            report.sigma_after,
            s1 + s2,
            "section-sum sigma, case {}",
            case
        );
        let composed = report.result.expect("explicit result");
        assert_eq!(
            euler_characteristic(&composed),
            report.euler_after,
            "recompute e, case {}",
            case
        );
        assert_eq!(
            signature(&composed).unwrap(),
            report.sigma_after,
            "recompute sigma, case {}",
            case
        );
    }
    println!(
        "[PASS] criterion 7: e and sigma additivity on 100 random block pairs for both sums, \
         each equal to from-scratch recomputation on the composed factorization (exact)"
    );
}

#[test]
fn criterion_08_family_generation() {
    // mode iii
    for g in [2usize, 3] {
        for h in [1usize, 2] {
            let spec = FamilySpec {
                mode: FamilyMode::III,
                g,
                h,
                n: None,
                count: 10,
                m_start: 1,
            };
            let family = generate_family(&spec, None).unwrap();
            assert_eq!(family.members.len(), 10);
            assert_eq!(family.distinctions.len(), 45);
            let expected_sigma = if g % 2 == 0 { -4 } else { -8 };
            for member in &family.members {
                assert_eq!(signature(&member.fibration).unwrap(), expected_sigma);
                assert_eq!(member.fibration.fiber_genus, g);
                assert_eq!(member.fibration.base_genus, h);
                assert!(member.noncomplex.granted());
                // re-verify every premise from the raw fibration data
                assert!(reverify_noncomplex(&member.fibration, &member.noncomplex).unwrap());
                let (b1, b2) = betti_and_b2(&member.fibration).unwrap();
                assert_eq!(b1 % 2, 1);
                assert_ne!(b2, 0);
            }
            for (_, _, cert) in &family.distinctions {
                assert!(cert.granted());
            }
        }
    }
    // mode ii at n = 2
    let seed = fibercalc_core::seeds::bryan_donagi(2).unwrap().0;
    for h in 3..=8usize {
        let spec = FamilySpec {
            mode: FamilyMode::II,
            g: 25,
            h,
            n: Some(2),
            count: 5,
            m_start: 2,
        };
        let family = generate_family(&spec, Some(&seed)).unwrap();
        assert_eq!(family.members.len(), 5);
        for member in &family.members {
            assert_eq!(member.fibration.fiber_genus, 25);
            assert_eq!(member.fibration.base_genus, h);
            assert_eq!(signature(&member.fibration).unwrap(), 16);
            assert!(member.noncomplex.granted());
            assert!(reverify_noncomplex(&member.fibration, &member.noncomplex).unwrap());
        }
        for (_, _, cert) in &family.distinctions {
            assert!(cert.granted());
        }
    }
    println!(
        "[PASS] criterion 8: mode iii (g in 2..3, h in 1..2, count 10) all granted, premises \
         re-verified, pairwise H_1-distinct, sigma matching seed parity; mode ii (n = 2, \
         h in 3..8, count 5) fiber genus 25 and sigma = 16 (exact)"
    );
}

#[test]
fn criterion_09_certifier_boundaries() {
    let bin = env!("CARGO_BIN_EXE_fibercalc");
    let tmp = tempfile::TempDir::new().unwrap();
    let run = |id: &str| -> i32 {
        Command::new(bin)
            .args(["--catalog", tmp.path().to_str().unwrap(), "certify", id])
            .output()
            .unwrap()
            .status
            .code()
            .unwrap()
    };
    assert_eq!(run("q-2-2-m3"), 0, "Q_3(2,2) granted, exit 0");
    assert_eq!(
        run("q-1-2-m3"),
        1,
        "Q_3(1,2) refused (fiber genus 1), exit 1"
    );
    assert_eq!(run("p-3-9"), 1, "P(3,9) refused on parity, exit 1");
    assert_eq!(run("no-such-entry"), 2, "unknown input, exit 2");
    println!(
        "[PASS] criterion 9: certifier grants Q_m(2,2) (exit 0), refuses Q_m(1,h) and P(3,9) \
         (exit 1), input errors exit 2"
    );
}

fn random_opaque(rng: &mut ChaCha8Rng) -> Fibration {
    loop {
        let g = rng.gen_range(1..=5usize);
        let h = rng.gen_range(0..=4usize);
        let lefschetz = rng.gen_bool(0.5);
        let k = if lefschetz {
            rng.gen_range(1..=12i64)
        } else {
            0
        };
        let euler = 4 * (g as i64 - 1) * (h as i64 - 1) + k;
        let b1 = rng.gen_range(2 * h..=2 * g + 2 * h);
        let b2 = euler - 2 + 2 * b1 as i64;
        if b2 < 0 {
            continue;
        }
        let sigma = rng.gen_range(-b2..=b2);
        let torsion: Vec<BigInt> = (0..rng.gen_range(0..3))
            .map(|_| BigInt::from(rng.gen_range(2i64..=9)))
            .collect();
        let d = DeclaredInvariants {
            euler,
            signature: Some(sigma),
            h1: AbelianGroup::from_invariants(b1, &torsion),
            fiber_primitive: rng.gen_bool(0.5),
            nontorsion_fiber_curve_exists: b1 as i64 > 2 * h as i64,
            torsion_fiber_curve_exists: (b1 as i64) < 2 * (g + h) as i64,
            source: format!("randomized test record {}", rng.gen_range(0..1_000_000)),
        };
        let kind = if lefschetz {
            FibrationKind::Lefschetz
        } else {
            FibrationKind::Bundle
        };
        if let Ok(f) = Fibration::new(kind, g, h, Body::Opaque(d), vec![], Asserted::default()) {
            return f;
        }
    }
}

fn random_valid_fibration(rng: &mut ChaCha8Rng) -> Fibration {
    match rng.gen_range(0..5) {
        0 => {
            let g = rng.gen_range(1..=4);
            let h = rng.gen_range(0..=3);
            p(g, h.max(1))
        }
        1 => {
            let g = rng.gen_range(1..=4usize);
            let h = rng.gen_range(1..=3usize);
            if g + h < 3 {
                return p(g, h);
            }
            let a = random_primitive(rng, g);
            let spec =
                BlockSpec::new(BlockFamily::Q, g, h, rng.gen_range(1..=10)).with_curves(a, None);
            build_block(&spec).unwrap()
        }
        2 => {
            let g = rng.gen_range(2..=4usize);
            let h = rng.gen_range(1..=3usize);
            r(g, h, rng.gen_range(1..=10))
        }
        3 => {
            // elliptic word with optional separating cycles appended
            let n = rng.gen_range(1..=2usize);
            let mut cycles = elliptic_word(n);
            for _ in 0..rng.gen_range(0..3) {
                cycles.push(TwistLetter::new(CurveClass::separating(1), 1));
            }
            Fibration::new(
                FibrationKind::Lefschetz,
                1,
                0,
                Body::Explicit(MonodromyFactorization {
                    fiber_genus: 1,
                    base_genus: 0,
                    handles: vec![],
                    vanishing_cycles: cycles,
                }),
                vec![Section {
                    self_intersection: -(n as i64),
                    splits_base: true,
                }],
                Asserted {
                    relatively_minimal: true,
                    mcg_valid: true,
                    ..Asserted::default()
                },
            )
            .unwrap()
        }
        _ => random_opaque(rng),
    }
}

#[test]
fn criterion_10_round_trip_and_persistence() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0f11e5);
    let cases = 1000;
    for case in 0..cases {
        let f = random_valid_fibration(&mut rng);
        let meta = Meta {
            name: format!("random-{}", case),
            citation: format!("roundtrip case {}", case),
        };
        let text = emit_fibration(&f, &meta);
        let (parsed, parsed_meta) = parse_fibration(&text)
            .unwrap_or_else(|e| panic!("case {} failed to parse: {}\n{}", case, e, text));
        assert_eq!(
            parsed, f,
            "case {}: fibration survives the round trip",
            case
        );
        assert_eq!(parsed_meta, meta, "case {}: meta survives", case);
        let re_emitted = emit_fibration(&parsed, &parsed_meta);
        assert_eq!(
            re_emitted, text,
            "case {}: byte-identical re-emission",
            case
        );
    }

    // catalog atomicity under a simulated crash between temp write and rename
    let dir = tempfile::TempDir::new().unwrap();
    let catalog = Catalog::new(dir.path());
    let f = q(2, 2, 5);
    let meta = Meta {
        name: "q-2-2-m5".into(),
        citation: "".into(),
    };
    catalog
        .store("q-2-2-m5", &f, &meta, Provenance::User)
        .unwrap();
    std::fs::write(dir.path().join("interrupted.entry.tmp"), "{\"broken").unwrap();
    std::fs::write(dir.path().join("unindexed.entry.json"), "also broken").unwrap();
    assert_eq!(catalog.stored_ids().unwrap(), vec!["q-2-2-m5".to_string()]);
    let loaded = catalog.load("q-2-2-m5").unwrap();
    assert_eq!(loaded.fibration, f);
    assert!(loaded.cache_warning.is_none());
    println!(
        "[PASS] criterion 10: {} random fibration files round-trip byte-identically; the \
         catalog index never references interrupted writes",
        cases
    );
}
