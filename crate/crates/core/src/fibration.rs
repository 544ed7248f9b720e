//! The central fibration data model: fiber/base genera plus either an
//! explicit monodromy factorization or an opaque declared-invariant record,
//! together with section data and asserted (non-homological) flags.

use num_bigint::BigInt;
use num_traits::Signed;

use crate::error::FibrationError;
use crate::linalg::AbelianGroup;
use crate::monodromy::{verify_homological_relation, MonodromyFactorization};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FibrationKind {
    Bundle,
    Lefschetz,
}

impl FibrationKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            FibrationKind::Bundle => "bundle",
            FibrationKind::Lefschetz => "lefschetz",
        }
    }
}

/// A section of the fibration. `splits_base` records that the induced map
/// on H_1 is the inclusion of the base summand, which holds for the
/// tautological sections of the elementary blocks.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Section {
    pub self_intersection: i64,
    pub splits_base: bool,
}

/// Invariants of a fibration imported from the literature without an
/// explicit factorization.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DeclaredInvariants {
    pub euler: i64,
    /// None marks a template entry whose signature the user must supply.
    pub signature: Option<i64>,
    pub h1: AbelianGroup,
    pub fiber_primitive: bool,
    pub nontorsion_fiber_curve_exists: bool,
    pub torsion_fiber_curve_exists: bool,
    pub source: String,
}

/// Non-homological claims carried alongside the homological data.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Asserted {
    pub relatively_minimal: bool,
    /// The factorization is claimed valid in Mod(Sigma_g), not merely in
    /// Sp(2g, Z). Homological checking cannot see the Torelli group.
    pub mcg_valid: bool,
    /// Pairs of letter indices claimed to be realized by disjoint curves.
    pub disjoint_pairs: Vec<(usize, usize)>,
    /// Overrides the section-derived fiber-primitivity test.
    pub fiber_primitive_override: bool,
    /// Declared minimality of the total space (literature import).
    pub minimal: bool,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Body {
    Explicit(MonodromyFactorization),
    Opaque(DeclaredInvariants),
}

/// A surface bundle or Lefschetz fibration over a surface.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Fibration {
    pub kind: FibrationKind,
    pub fiber_genus: usize,
    pub base_genus: usize,
    pub body: Body,
    pub sections: Vec<Section>,
    pub asserted: Asserted,
}

impl Fibration {
    /// Validate and construct. For explicit bodies this runs the
    /// homological relation check; for opaque bodies it cross-checks every
    /// declared value the closed formulas constrain.
    pub fn new(
        kind: FibrationKind,
        fiber_genus: usize,
        base_genus: usize,
        body: Body,
        sections: Vec<Section>,
        asserted: Asserted,
    ) -> Result<Self, FibrationError> {
        if fiber_genus == 0 {
            return Err(FibrationError::FiberGenusZero);
        }
        match &body {
            Body::Explicit(f) => {
                if f.fiber_genus != fiber_genus || f.base_genus != base_genus {
                    return Err(FibrationError::HandleCount {
                        expected: base_genus,
                        found: f.base_genus,
                    });
                }
                if f.handles.len() != base_genus {
                    return Err(FibrationError::HandleCount {
                        expected: base_genus,
                        found: f.handles.len(),
                    });
                }
                match kind {
                    FibrationKind::Bundle => {
                        if !f.vanishing_cycles.is_empty() {
                            return Err(FibrationError::BundleWithCycles(f.vanishing_cycles.len()));
                        }
                    }
                    FibrationKind::Lefschetz => {
                        if f.vanishing_cycles.is_empty() {
                            return Err(FibrationError::EmptyCriticalLocus);
                        }
                    }
                }
                for (index, letter) in f.vanishing_cycles.iter().enumerate() {
                    if letter.power != 1 {
                        return Err(FibrationError::CyclePower {
                            index,
                            power: letter.power,
                        });
                    }
                }
                let report = verify_homological_relation(f)?;
                if !report.valid {
                    let detail = match report.offending_handle {
                        Some(i) => format!("handle {} commutator is non-trivial", i),
                        None => "twist product differs from commutator product".to_string(),
                    };
                    return Err(FibrationError::RelationFails(detail));
                }
            }
            Body::Opaque(d) => {
                validate_declared(kind, fiber_genus, base_genus, d)?;
            }
        }
        Ok(Fibration {
            kind,
            fiber_genus,
            base_genus,
            body,
            sections,
            asserted,
        })
    }

    pub fn is_explicit(&self) -> bool {
        matches!(self.body, Body::Explicit(_))
    }

    pub fn explicit(&self) -> Result<&MonodromyFactorization, FibrationError> {
        match &self.body {
            Body::Explicit(f) => Ok(f),
            Body::Opaque(_) => Err(FibrationError::OpaqueBody),
        }
    }

    pub fn declared(&self) -> Option<&DeclaredInvariants> {
        match &self.body {
            Body::Opaque(d) => Some(d),
            Body::Explicit(_) => None,
        }
    }

    /// Number of vanishing cycles. For opaque bodies this is derived from
    /// the declared Euler characteristic via e = 4(g-1)(h-1) + k.
    pub fn vanishing_cycle_count(&self) -> i64 {
        match &self.body {
            Body::Explicit(f) => f.vanishing_cycles.len() as i64,
            Body::Opaque(d) => d.euler - genus_formula(self.fiber_genus, self.base_genus),
        }
    }

    /// A section of self-intersection zero, if any.
    pub fn zero_section(&self) -> Option<&Section> {
        self.sections.iter().find(|s| s.self_intersection == 0)
    }

    /// A section of self-intersection zero inducing the base-summand
    /// splitting on H_1.
    pub fn splitting_zero_section(&self) -> Option<&Section> {
        self.sections
            .iter()
            .find(|s| s.self_intersection == 0 && s.splits_base)
    }

    /// The fiber class is primitive in H_2: forced by any section (which
    /// meets the fiber once), otherwise taken from the override flag or,
    /// for opaque bodies, the declared flag.
    pub fn fiber_primitive(&self) -> bool {
        if !self.sections.is_empty() {
            return true;
        }
        if self.asserted.fiber_primitive_override {
            return true;
        }
        match &self.body {
            Body::Opaque(d) => d.fiber_primitive,
            Body::Explicit(_) => false,
        }
    }
}

/// 4(g-1)(h-1), the Euler characteristic of a bundle.
pub fn genus_formula(fiber_genus: usize, base_genus: usize) -> i64 {
    4 * (fiber_genus as i64 - 1) * (base_genus as i64 - 1)
}

fn validate_declared(
    kind: FibrationKind,
    fiber_genus: usize,
    base_genus: usize,
    d: &DeclaredInvariants,
) -> Result<(), FibrationError> {
    let k = d.euler - genus_formula(fiber_genus, base_genus);
    match kind {
        FibrationKind::Bundle => {
            if k != 0 {
                return Err(FibrationError::ContradictoryDeclaration(format!(
                    "declared euler {} differs from 4(g-1)(h-1) = {} for a bundle",
                    d.euler,
                    genus_formula(fiber_genus, base_genus)
                )));
            }
        }
        FibrationKind::Lefschetz => {
            if k < 1 {
                return Err(FibrationError::ContradictoryDeclaration(format!(
                    "declared euler {} gives k = {} vanishing cycles; a Lefschetz \
                     fibration requires k >= 1",
                    d.euler, k
                )));
            }
        }
    }
    // b_2 = e - 2 + 2 b_1 must be non-negative for a closed oriented 4-manifold
    let b1 = d.h1.rank() as i64;
    let b2 = d.euler - 2 + 2 * b1;
    if b2 < 0 {
        return Err(FibrationError::ContradictoryDeclaration(format!(
            "derived b_2 = {} is negative",
            b2
        )));
    }
    // the five-term sequence pins 2h <= b_1 <= 2g + 2h for any fibration
    let two_h = 2 * base_genus as i64;
    let full = 2 * fiber_genus as i64 + two_h;
    if b1 < two_h || b1 > full {
        return Err(FibrationError::ContradictoryDeclaration(format!(
            "declared b_1 = {} violates 2h <= b_1 <= 2g + 2h ({} <= b_1 <= {})",
            b1, two_h, full
        )));
    }
    // the curve-existence flags are constrained by the same sequence:
    // a nontorsion fiber class exists iff b_1 > 2h, a torsion one iff
    // b_1 < 2g + 2h
    if d.nontorsion_fiber_curve_exists != (b1 > two_h) {
        return Err(FibrationError::ContradictoryDeclaration(format!(
            "nontorsion_fiber_curve_exists={} contradicts b_1 = {} vs 2h = {}",
            d.nontorsion_fiber_curve_exists, b1, two_h
        )));
    }
    if d.torsion_fiber_curve_exists != (b1 < full) {
        return Err(FibrationError::ContradictoryDeclaration(format!(
            "torsion_fiber_curve_exists={} contradicts b_1 = {} vs 2g + 2h = {}",
            d.torsion_fiber_curve_exists, b1, full
        )));
    }
    if let Some(sig) = d.signature {
        // |sigma| <= b_2 always
        if BigInt::from(sig).abs() > BigInt::from(b2) {
            return Err(FibrationError::ContradictoryDeclaration(format!(
                "|sigma| = {} exceeds b_2 = {}",
                sig.abs(),
                b2
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::AbelianGroup;
    use crate::monodromy::{CurveClass, Handle, TwistLetter};

    fn torus_cycle() -> TwistLetter {
        TwistLetter::new(CurveClass::standard_a(1, 1), 1)
    }

    #[test]
    fn lefschetz_requires_cycles() {
        let f = MonodromyFactorization {
            fiber_genus: 2,
            base_genus: 1,
            handles: vec![Handle::trivial()],
            vanishing_cycles: vec![],
        };
        let err = Fibration::new(
            FibrationKind::Lefschetz,
            2,
            1,
            Body::Explicit(f),
            vec![],
            Asserted::default(),
        )
        .unwrap_err();
        assert_eq!(err, FibrationError::EmptyCriticalLocus);
    }

    #[test]
    fn bundle_rejects_cycles() {
        let f = MonodromyFactorization {
            fiber_genus: 1,
            base_genus: 0,
            handles: vec![],
            vanishing_cycles: vec![torus_cycle()],
        };
        assert!(matches!(
            Fibration::new(
                FibrationKind::Bundle,
                1,
                0,
                Body::Explicit(f),
                vec![],
                Asserted::default()
            ),
            Err(FibrationError::BundleWithCycles(1))
        ));
    }

    #[test]
    fn cycle_power_must_be_one() {
        let f = MonodromyFactorization {
            fiber_genus: 1,
            base_genus: 0,
            handles: vec![],
            vanishing_cycles: vec![TwistLetter::new(CurveClass::standard_a(1, 1), 2)],
        };
        assert!(matches!(
            Fibration::new(
                FibrationKind::Lefschetz,
                1,
                0,
                Body::Explicit(f),
                vec![],
                Asserted::default()
            ),
            Err(FibrationError::CyclePower { index: 0, power: 2 })
        ));
    }

    #[test]
    fn invalid_relation_rejected() {
        let f = MonodromyFactorization {
            fiber_genus: 1,
            base_genus: 1,
            handles: vec![Handle {
                alpha: vec![TwistLetter::new(CurveClass::standard_a(1, 1), 1)],
                beta: vec![TwistLetter::new(CurveClass::standard_b(1, 1), 1)],
            }],
            vanishing_cycles: vec![],
        };
        assert!(matches!(
            Fibration::new(
                FibrationKind::Bundle,
                1,
                1,
                Body::Explicit(f),
                vec![],
                Asserted::default()
            ),
            Err(FibrationError::RelationFails(_))
        ));
    }

    #[test]
    fn opaque_bundle_euler_cross_check() {
        let d = DeclaredInvariants {
            euler: 5, // should be 4(3-1)(2-1) = 8
            signature: Some(0),
            h1: AbelianGroup::free(10),
            fiber_primitive: true,
            nontorsion_fiber_curve_exists: true,
            torsion_fiber_curve_exists: true,
            source: "test".into(),
        };
        assert!(matches!(
            Fibration::new(
                FibrationKind::Bundle,
                3,
                2,
                Body::Opaque(d),
                vec![],
                Asserted::default()
            ),
            Err(FibrationError::ContradictoryDeclaration(_))
        ));
    }

    #[test]
    fn opaque_flag_consistency() {
        // b_1 = 2h = 4 but flag claims a nontorsion fiber curve
        let d = DeclaredInvariants {
            euler: genus_formula(3, 2),
            signature: Some(0),
            h1: AbelianGroup::free(4),
            fiber_primitive: true,
            nontorsion_fiber_curve_exists: true,
            torsion_fiber_curve_exists: true,
            source: "test".into(),
        };
        assert!(matches!(
            Fibration::new(
                FibrationKind::Bundle,
                3,
                2,
                Body::Opaque(d),
                vec![],
                Asserted::default()
            ),
            Err(FibrationError::ContradictoryDeclaration(_))
        ));
    }

    #[test]
    fn fiber_primitivity_from_section() {
        let f = MonodromyFactorization {
            fiber_genus: 2,
            base_genus: 1,
            handles: vec![Handle::trivial()],
            vanishing_cycles: vec![],
        };
        let fib = Fibration::new(
            FibrationKind::Bundle,
            2,
            1,
            Body::Explicit(f.clone()),
            vec![Section {
                self_intersection: 0,
                splits_base: true,
            }],
            Asserted::default(),
        )
        .unwrap();
        assert!(fib.fiber_primitive());
        let bare = Fibration::new(
            FibrationKind::Bundle,
            2,
            1,
            Body::Explicit(f),
            vec![],
            Asserted::default(),
        )
        .unwrap();
        assert!(!bare.fiber_primitive());
    }
}
