//! Declared-invariant records for the literature fibrations used as
//! stabilization seeds. These are imported as opaque blocks: reconstructing
//! their monodromy factorizations from the original sources is out of
//! scope, so each carries its invariants with a citation.

use crate::error::FibrationError;
use crate::fibration::{Asserted, Body, DeclaredInvariants, Fibration, FibrationKind, Section};
use crate::linalg::AbelianGroup;
use num_bigint::BigInt;

/// The relatively minimal genus-g Lefschetz fibration Y(g) over the
/// sphere (generalized Matsumoto fibration): H_1 = Z^g and sigma = -4 for
/// g even, H_1 = Z^{g-1} and sigma = -8 for g odd. The critical point
/// count is 2g+4 (g even) resp. 2g+8 (g odd), which fixes e.
pub fn korkmaz_y(g: usize) -> Result<Fibration, FibrationError> {
    if g < 2 {
        return Err(FibrationError::ContradictoryDeclaration(
            "Y(g) requires g >= 2".into(),
        ));
    }
    let even = g % 2 == 0;
    let (b1, sigma, k) = if even {
        (g, -4, 2 * g as i64 + 4)
    } else {
        (g - 1, -8, 2 * g as i64 + 8)
    };
    let euler = -4 * (g as i64 - 1) + k;
    Fibration::new(
        FibrationKind::Lefschetz,
        g,
        0,
        Body::Opaque(DeclaredInvariants {
            euler,
            signature: Some(sigma),
            h1: AbelianGroup::free(b1),
            fiber_primitive: true,
            nontorsion_fiber_curve_exists: b1 > 0,
            torsion_fiber_curve_exists: b1 < 2 * g,
            source: format!("Korkmaz, genus-{} Lefschetz fibration over S^2", g),
        }),
        vec![],
        Asserted {
            relatively_minimal: true,
            ..Asserted::default()
        },
    )
}

/// The twisted-fiber-sum variants Y_n(g) over the sphere, with
/// pi_1 = Z (+) Z/n, hence H_1 of rank one with torsion n. Signature and
/// Euler characteristic double relative to Y(g) under the fiber sum.
pub fn korkmaz_yn(g: usize, n: i64) -> Result<Fibration, FibrationError> {
    if g < 2 || n < 1 {
        return Err(FibrationError::ContradictoryDeclaration(
            "Y_n(g) requires g >= 2 and n >= 1".into(),
        ));
    }
    let even = g % 2 == 0;
    let sigma = if even { -8 } else { -16 };
    let euler = if even { 12 } else { 20 };
    let torsion = if n >= 2 {
        vec![BigInt::from(n)]
    } else {
        vec![]
    };
    Fibration::new(
        FibrationKind::Lefschetz,
        g,
        0,
        Body::Opaque(DeclaredInvariants {
            euler,
            signature: Some(sigma),
            h1: AbelianGroup::from_invariants(1, &torsion),
            fiber_primitive: true,
            nontorsion_fiber_curve_exists: true,
            torsion_fiber_curve_exists: true,
            source: format!(
                "Korkmaz, twisted fiber sum Y_{}({}) with pi_1 = Z + Z/{}",
                n, g, n
            ),
        }),
        vec![],
        Asserted {
            relatively_minimal: true,
            // minimality over the sphere is a literature claim, not an
            // instance of the bundle or relative-minimality rules
            minimal: true,
            ..Asserted::default()
        },
    )
}

/// The Bryan-Donagi surfaces X_n, n >= 2: projective surfaces of
/// signature 8(n^3-n)/3 fibering in two ways, with fiber and base genera
/// ((4n-2)n^2 + 1, 2) and (2n^2 + 1, 2n). Both records describe the same
/// manifold; the declared first Betti number is the smallest even value
/// consistent with the bound b_1 >= 2n^2 + 1.
pub fn bryan_donagi(n: usize) -> Result<(Fibration, Fibration), FibrationError> {
    if n < 2 {
        return Err(FibrationError::ContradictoryDeclaration(
            "X_n requires n >= 2".into(),
        ));
    }
    let n_i = n as i64;
    let sigma = 8 * (n_i * n_i * n_i - n_i) / 3;
    let b1 = 2 * n * n + 2;
    let primary_g = (4 * n - 2) * n * n + 1;
    let companion_g = 2 * n * n + 1;
    let companion_h = 2 * n;
    let make = |g: usize, h: usize| -> Result<Fibration, FibrationError> {
        let euler = 4 * (g as i64 - 1) * (h as i64 - 1);
        Fibration::new(
            FibrationKind::Bundle,
            g,
            h,
            Body::Opaque(DeclaredInvariants {
                euler,
                signature: Some(sigma),
                h1: AbelianGroup::free(b1),
                fiber_primitive: true,
                nontorsion_fiber_curve_exists: b1 as i64 > 2 * h as i64,
                torsion_fiber_curve_exists: (b1 as i64) < 2 * (g as i64 + h as i64),
                source: format!(
                    "Bryan-Donagi X_{}: genus-{} bundle over a genus-{} surface",
                    n, g, h
                ),
            }),
            vec![],
            Asserted::default(),
        )
    };
    Ok((make(primary_g, 2)?, make(companion_g, companion_h)?))
}

/// Template for the genus-3 bundles over a genus-h surface (h >= 9) with
/// section of self-intersection zero and non-zero signature. The signature
/// value is not shipped: it must be supplied from the user's copy of the
/// source, so the template parses but refuses signature-dependent
/// operations until filled in.
pub fn ekkos_template(h: usize) -> Result<Fibration, FibrationError> {
    if h < 9 {
        return Err(FibrationError::ContradictoryDeclaration(
            "the genus-3 seed bundles live over base genus h >= 9".into(),
        ));
    }
    let b1 = 2 * h;
    Fibration::new(
        FibrationKind::Bundle,
        3,
        h,
        Body::Opaque(DeclaredInvariants {
            euler: 8 * (h as i64 - 1),
            signature: None,
            h1: AbelianGroup::free(b1),
            fiber_primitive: true,
            nontorsion_fiber_curve_exists: false, // b_1 = 2h exactly
            torsion_fiber_curve_exists: true,
            source: format!(
                "genus-3 bundle over genus-{} surface with sigma != 0 (signature \
                 to be supplied from the source)",
                h
            ),
        }),
        vec![Section {
            self_intersection: 0,
            splits_base: true,
        }],
        Asserted::default(),
    )
}

/// Fill in the declared signature of a template entry.
pub fn with_declared_signature(f: &Fibration, sigma: i64) -> Result<Fibration, FibrationError> {
    match &f.body {
        Body::Opaque(d) => {
            let mut d = d.clone();
            d.signature = Some(sigma);
            Fibration::new(
                f.kind,
                f.fiber_genus,
                f.base_genus,
                Body::Opaque(d),
                f.sections.clone(),
                f.asserted.clone(),
            )
        }
        Body::Explicit(_) => Err(FibrationError::OpaqueBody),
    }
}
