//! The non-complexity rule engine, homotopy-distinction certificates, and
//! the three family generators.
//!
//! Certificates embed the evidence values behind every premise, so the
//! claims can be re-derived offline from the attached data alone.

use num_bigint::BigInt;

use crate::construct::{horizontal_stabilize, vertical_stabilize, StabilizationReport};
use crate::error::{CertifyError, FibrationError};
use crate::fibration::{Body, Fibration};
use crate::invariants::{
    betti_and_b2, euler_characteristic, h1_group, minimality_basis, signature, MinimalityBasis,
};
use crate::linalg::abelian_group_equal;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CertificateKind {
    NonComplexBothOrientations,
    HomotopyDistinct,
    Family,
}

impl CertificateKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CertificateKind::NonComplexBothOrientations => "noncomplex-both-orientations",
            CertificateKind::HomotopyDistinct => "homotopy-distinct",
            CertificateKind::Family => "family",
        }
    }
}

/// One premise of a certificate: the condition, the evidence it was
/// evaluated on, and the rule it instantiates.
#[derive(Clone, Debug)]
pub struct Premise {
    pub condition: String,
    pub evidence: String,
    pub rule: String,
    pub holds: bool,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum CertificateStatus {
    Granted,
    Refused(String),
}

#[derive(Clone, Debug)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub premises: Vec<Premise>,
    pub conclusion: String,
    pub status: CertificateStatus,
}

impl Certificate {
    pub fn granted(&self) -> bool {
        self.status == CertificateStatus::Granted
    }
}

/// Decide non-complexity of the total space with either orientation:
/// granted when b_1 is odd, the manifold is minimal (bundle rule,
/// relative-minimality rule, or declared), b_2 != 0, and e or sigma is
/// non-zero. Refusal reports the first failing premise.
pub fn certify_noncomplex(f: &Fibration) -> Result<Certificate, FibrationError> {
    let (b1, b2) = betti_and_b2(f)?;
    let e = euler_characteristic(f);
    let sigma = signature(f)?;
    let basis = minimality_basis(f);

    let mut premises = Vec::new();
    premises.push(Premise {
        condition: "b_1(X) is odd".into(),
        evidence: format!("b_1 = {}", b1),
        rule: "odd first Betti number excludes type VII and elliptic totals".into(),
        holds: b1 % 2 != 0,
    });
    let minimality_evidence = match basis {
        Some(MinimalityBasis::BundleRule) => format!(
            "surface bundle with fiber genus {} >= 2 and base genus {} >= 2",
            f.fiber_genus, f.base_genus
        ),
        Some(MinimalityBasis::StipsiczRule) => format!(
            "relatively minimal Lefschetz fibration with fiber genus {} >= 2 and \
             base genus {} >= 1",
            f.fiber_genus, f.base_genus
        ),
        Some(MinimalityBasis::Declared) => "declared minimal (literature import)".into(),
        None => format!(
            "no applicable minimality rule (kind {}, fiber genus {}, base genus {}, \
             relatively_minimal = {})",
            f.kind.as_str(),
            f.fiber_genus,
            f.base_genus,
            f.asserted.relatively_minimal
        ),
    };
    premises.push(Premise {
        condition: "X is minimal".into(),
        evidence: minimality_evidence,
        rule: basis
            .map(|b| b.as_str().to_string())
            .unwrap_or_else(|| "none".into()),
        holds: basis.is_some(),
    });
    premises.push(Premise {
        condition: "b_2(X) != 0".into(),
        evidence: format!("b_2 = {}", b2),
        rule: "excludes type VII surfaces".into(),
        holds: b2 != 0,
    });
    premises.push(Premise {
        condition: "e(X) != 0 or sigma(X) != 0".into(),
        evidence: format!("e = {}, sigma = {}", e, sigma),
        rule: "minimal elliptic surfaces with odd b_1 have e = sigma = 0".into(),
        holds: e != 0 || sigma != 0,
    });

    let status = match premises.iter().find(|p| !p.holds) {
        None => CertificateStatus::Granted,
        Some(p) => CertificateStatus::Refused(format!("premise failed: {}", p.condition)),
    };
    Ok(Certificate {
        kind: CertificateKind::NonComplexBothOrientations,
        premises,
        conclusion: "the total space admits no complex structure with either orientation".into(),
        status,
    })
}

/// Homotopy distinction by H_1. Refusal means "not distinguished by H_1",
/// never "homotopy equivalent".
pub fn distinguish(f1: &Fibration, f2: &Fibration) -> Result<Certificate, FibrationError> {
    let h1_a = h1_group(f1)?;
    let h1_b = h1_group(f2)?;
    let distinct = !abelian_group_equal(&h1_a, &h1_b);
    let premises = vec![
        Premise {
            condition: "H_1(X_1) computed".into(),
            evidence: h1_a.to_string(),
            rule: "homotopy invariance of H_1".into(),
            holds: true,
        },
        Premise {
            condition: "H_1(X_2) computed".into(),
            evidence: h1_b.to_string(),
            rule: "homotopy invariance of H_1".into(),
            holds: true,
        },
        Premise {
            condition: "H_1(X_1) and H_1(X_2) are non-isomorphic".into(),
            evidence: format!("{} vs {}", h1_a, h1_b),
            rule: "normalized rank and torsion chains compared syntactically".into(),
            holds: distinct,
        },
    ];
    let status = if distinct {
        CertificateStatus::Granted
    } else {
        CertificateStatus::Refused("not distinguished by H_1".into())
    };
    Ok(Certificate {
        kind: CertificateKind::HomotopyDistinct,
        premises,
        conclusion: "the total spaces are not homotopy equivalent".into(),
        status,
    })
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FamilyMode {
    /// Surface bundles, g >= 4 and h >= 9, by vertical stabilization of a
    /// genus-3 seed bundle.
    I,
    /// Surface bundles with g = (4n-2)n^2 + 1, n >= 2, 3 <= h <= 8, by
    /// horizontal stabilization of the X_n records.
    II,
    /// Lefschetz fibrations, g >= 2 and h >= 0, from the genus-g seeds
    /// over the sphere.
    III,
}

impl FamilyMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            FamilyMode::I => "i",
            FamilyMode::II => "ii",
            FamilyMode::III => "iii",
        }
    }
}

#[derive(Clone, Debug)]
pub struct FamilySpec {
    pub mode: FamilyMode,
    pub g: usize,
    pub h: usize,
    pub n: Option<usize>,
    pub count: usize,
    pub m_start: i64,
}

#[derive(Clone, Debug)]
pub struct FamilyMember {
    pub m: i64,
    pub fibration: Fibration,
    pub stabilization: Option<StabilizationReport>,
    pub noncomplex: Certificate,
}

#[derive(Clone, Debug)]
pub struct FamilyResult {
    pub members: Vec<FamilyMember>,
    /// Granted homotopy-distinction certificates, one per unordered pair.
    pub distinctions: Vec<(usize, usize, Certificate)>,
}

/// Generate a family of pairwise non-homotopy-equivalent, certified
/// non-complex total spaces. `seed` is the resolved catalog fibration the
/// mode stabilizes (ignored by mode iii with h = 0, whose members are
/// literature records themselves).
pub fn generate_family(
    spec: &FamilySpec,
    seed: Option<&Fibration>,
) -> Result<FamilyResult, CertifyError> {
    validate_mode_bounds(spec)?;
    let mut members = Vec::with_capacity(spec.count);
    for i in 0..spec.count {
        let m = spec.m_start + i as i64;
        let (fibration, stabilization) = build_member(spec, seed, m)?;
        let sigma = signature(&fibration).map_err(CertifyError::Fibration)?;
        if sigma == 0 {
            return Err(CertifyError::IncompleteSeed(
                "family members must have non-zero signature".into(),
            ));
        }
        let noncomplex = certify_noncomplex(&fibration).map_err(CertifyError::Fibration)?;
        if !noncomplex.granted() {
            return Err(CertifyError::IncompleteSeed(format!(
                "member m = {} refused: {:?}",
                m, noncomplex.status
            )));
        }
        members.push(FamilyMember {
            m,
            fibration,
            stabilization,
            noncomplex,
        });
    }
    let mut distinctions = Vec::new();
    for i in 0..members.len() {
        for j in i + 1..members.len() {
            let cert = distinguish(&members[i].fibration, &members[j].fibration)
                .map_err(CertifyError::Fibration)?;
            if !cert.granted() {
                return Err(CertifyError::IncompleteSeed(format!(
                    "members m = {} and m = {} not distinguished by H_1",
                    members[i].m, members[j].m
                )));
            }
            distinctions.push((i, j, cert));
        }
    }
    Ok(FamilyResult {
        members,
        distinctions,
    })
}

fn validate_mode_bounds(spec: &FamilySpec) -> Result<(), CertifyError> {
    match spec.mode {
        FamilyMode::I => {
            if spec.g < 4 || spec.h < 9 {
                return Err(CertifyError::ModeBounds(format!(
                    "mode i requires g >= 4 and h >= 9 (got g = {}, h = {})",
                    spec.g, spec.h
                )));
            }
        }
        FamilyMode::II => {
            let n = spec.n.ok_or_else(|| {
                CertifyError::ModeBounds("mode ii requires the parameter n".into())
            })?;
            if n < 2 {
                return Err(CertifyError::ModeBounds("mode ii requires n >= 2".into()));
            }
            if !(3..=8).contains(&spec.h) {
                return Err(CertifyError::ModeBounds(format!(
                    "mode ii requires 3 <= h <= 8 (got h = {})",
                    spec.h
                )));
            }
        }
        FamilyMode::III => {
            if spec.g < 2 {
                return Err(CertifyError::ModeBounds(format!(
                    "mode iii requires g >= 2 (got g = {})",
                    spec.g
                )));
            }
        }
    }
    if spec.count == 0 {
        return Err(CertifyError::ModeBounds("count must be positive".into()));
    }
    if spec.m_start < 1 {
        return Err(CertifyError::ModeBounds(
            "m must start at 1 or higher".into(),
        ));
    }
    Ok(())
}

fn build_member(
    spec: &FamilySpec,
    seed: Option<&Fibration>,
    m: i64,
) -> Result<(Fibration, Option<StabilizationReport>), CertifyError> {
    match spec.mode {
        FamilyMode::I => {
            let seed = require_seed(seed, "mode i needs a genus-3 seed bundle")?;
            check_seed_signature(seed)?;
            if seed.base_genus != spec.h {
                return Err(CertifyError::ModeBounds(format!(
                    "seed base genus {} differs from requested h = {}",
                    seed.base_genus, spec.h
                )));
            }
            if spec.g <= seed.fiber_genus {
                return Err(CertifyError::ModeBounds(format!(
                    "mode i target fiber genus {} must exceed the seed's {}",
                    spec.g, seed.fiber_genus
                )));
            }
            let report = vertical_stabilize(seed, spec.g - seed.fiber_genus, m)?;
            let fibration = report.result.clone().ok_or_else(|| {
                CertifyError::IncompleteSeed("stabilization produced no fibration".into())
            })?;
            Ok((fibration, Some(report)))
        }
        FamilyMode::II => {
            let seed = require_seed(seed, "mode ii needs an X_n record")?;
            check_seed_signature(seed)?;
            let n = spec.n.expect("validated");
            let expected_g = (4 * n - 2) * n * n + 1;
            if seed.fiber_genus != expected_g {
                return Err(CertifyError::ModeBounds(format!(
                    "seed fiber genus {} does not match (4n-2)n^2 + 1 = {}",
                    seed.fiber_genus, expected_g
                )));
            }
            if spec.h <= seed.base_genus {
                return Err(CertifyError::ModeBounds(format!(
                    "mode ii target base genus {} must exceed the seed's {}",
                    spec.h, seed.base_genus
                )));
            }
            let report = horizontal_stabilize(seed, spec.h - seed.base_genus, m, None)?;
            let fibration = report.result.clone().ok_or_else(|| {
                CertifyError::IncompleteSeed("stabilization produced no fibration".into())
            })?;
            Ok((fibration, Some(report)))
        }
        FamilyMode::III => {
            if spec.h == 0 {
                // over the sphere the family members are the twisted
                // fiber-sum records themselves
                let fibration = crate::seeds::korkmaz_yn(spec.g, m)?;
                Ok((fibration, None))
            } else {
                let seed_owned;
                let seed = match seed {
                    Some(s) => s,
                    None => {
                        seed_owned = crate::seeds::korkmaz_y(spec.g)?;
                        &seed_owned
                    }
                };
                check_seed_signature(seed)?;
                if seed.fiber_genus != spec.g {
                    return Err(CertifyError::ModeBounds(format!(
                        "seed fiber genus {} differs from requested g = {}",
                        seed.fiber_genus, spec.g
                    )));
                }
                if spec.h <= seed.base_genus {
                    return Err(CertifyError::ModeBounds(format!(
                        "mode iii target base genus {} must exceed the seed's {}",
                        spec.h, seed.base_genus
                    )));
                }
                let report = horizontal_stabilize(seed, spec.h - seed.base_genus, m, None)?;
                let fibration = report.result.clone().ok_or_else(|| {
                    CertifyError::IncompleteSeed("stabilization produced no fibration".into())
                })?;
                Ok((fibration, Some(report)))
            }
        }
    }
}

fn require_seed<'a>(
    seed: Option<&'a Fibration>,
    message: &str,
) -> Result<&'a Fibration, CertifyError> {
    seed.ok_or_else(|| CertifyError::IncompleteSeed(message.into()))
}

fn check_seed_signature(seed: &Fibration) -> Result<(), CertifyError> {
    match &seed.body {
        Body::Opaque(d) => match d.signature {
            Some(s) if s != 0 => Ok(()),
            Some(_) => Err(CertifyError::IncompleteSeed(
                "seed signature is zero; families require sigma != 0".into(),
            )),
            None => Err(CertifyError::IncompleteSeed(format!(
                "seed lacks a declared signature: {}",
                d.source
            ))),
        },
        Body::Explicit(_) => {
            let s = signature(seed).map_err(CertifyError::Fibration)?;
            if s == 0 {
                Err(CertifyError::IncompleteSeed(
                    "seed signature is zero; families require sigma != 0".into(),
                ))
            } else {
                Ok(())
            }
        }
    }
}

/// Re-evaluate every premise of a non-complexity certificate from the raw
/// fibration data, independent of the values stored in the certificate.
/// Used by the verification harness.
pub fn reverify_noncomplex(f: &Fibration, cert: &Certificate) -> Result<bool, FibrationError> {
    if cert.kind != CertificateKind::NonComplexBothOrientations {
        return Ok(false);
    }
    let (b1, b2) = betti_and_b2(f)?;
    let e = euler_characteristic(f);
    let sigma = signature(f)?;
    let minimal = minimality_basis(f).is_some();
    let all_hold = b1 % 2 != 0 && minimal && b2 != 0 && (e != 0 || sigma != 0);
    Ok(match &cert.status {
        CertificateStatus::Granted => all_hold && cert.premises.iter().all(|p| p.holds),
        CertificateStatus::Refused(_) => !all_hold,
    })
}

/// Torsion divisor the member's H_1 gained at multiplicity m, for report
/// rendering.
pub fn member_torsion(member: &FamilyMember) -> Result<Vec<BigInt>, FibrationError> {
    Ok(h1_group(&member.fibration)?.torsion().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{build_block, BlockFamily, BlockSpec};
    use crate::fibration::FibrationKind;

    fn q_block(g: usize, h: usize, m: i64) -> Fibration {
        build_block(&BlockSpec::new(BlockFamily::Q, g, h, m)).unwrap()
    }

    #[test]
    fn q22_granted() {
        let cert = certify_noncomplex(&q_block(2, 2, 3)).unwrap();
        assert!(cert.granted());
        assert_eq!(cert.premises.len(), 4);
        assert!(cert.premises.iter().all(|p| p.holds));
    }

    #[test]
    fn genus_one_refused() {
        // Q_m(1, h): fiber genus 1 falls outside every minimality rule
        let cert = certify_noncomplex(&q_block(1, 2, 3)).unwrap();
        assert!(!cert.granted());
        assert!(matches!(&cert.status, CertificateStatus::Refused(r) if r.contains("minimal")));
    }

    #[test]
    fn even_b1_refused_on_parity() {
        let p = build_block(&BlockSpec::new(BlockFamily::P, 3, 9, 1)).unwrap();
        let cert = certify_noncomplex(&p).unwrap();
        assert!(!cert.granted());
        assert!(matches!(&cert.status, CertificateStatus::Refused(r) if r.contains("b_1")));
    }

    #[test]
    fn distinguish_by_torsion() {
        let a = q_block(2, 2, 2);
        let b = q_block(2, 2, 3);
        assert!(distinguish(&a, &b).unwrap().granted());
        let refused = distinguish(&a, &a).unwrap();
        assert!(!refused.granted());
    }

    #[test]
    fn distinguish_equal_ranks_refused() {
        // P(2,2) and P(3,1): both H_1 = Z^8
        let p1 = build_block(&BlockSpec::new(BlockFamily::P, 2, 2, 1)).unwrap();
        let p2 = build_block(&BlockSpec::new(BlockFamily::P, 3, 1, 1)).unwrap();
        assert!(!distinguish(&p1, &p2).unwrap().granted());
    }

    #[test]
    fn family_mode_iii_small() {
        let spec = FamilySpec {
            mode: FamilyMode::III,
            g: 2,
            h: 1,
            n: None,
            count: 5,
            m_start: 1,
        };
        let family = generate_family(&spec, None).unwrap();
        assert_eq!(family.members.len(), 5);
        assert_eq!(family.distinctions.len(), 10);
        for member in &family.members {
            assert!(member.noncomplex.granted());
            assert_eq!(signature(&member.fibration).unwrap(), -4);
            assert_eq!(member.fibration.kind, FibrationKind::Lefschetz);
            assert_eq!(member.fibration.vanishing_cycle_count(), 8);
            assert!(reverify_noncomplex(&member.fibration, &member.noncomplex).unwrap());
        }
    }

    #[test]
    fn family_mode_iii_sphere() {
        let spec = FamilySpec {
            mode: FamilyMode::III,
            g: 3,
            h: 0,
            n: None,
            count: 3,
            m_start: 1,
        };
        let family = generate_family(&spec, None).unwrap();
        assert_eq!(family.members.len(), 3);
        for member in &family.members {
            assert!(member.noncomplex.granted());
            assert_eq!(signature(&member.fibration).unwrap(), -16);
        }
    }

    #[test]
    fn family_mode_i_requires_signature() {
        let template = crate::seeds::ekkos_template(9).unwrap();
        let spec = FamilySpec {
            mode: FamilyMode::I,
            g: 4,
            h: 9,
            n: None,
            count: 2,
            m_start: 2,
        };
        assert!(matches!(
            generate_family(&spec, Some(&template)),
            Err(CertifyError::IncompleteSeed(_))
        ));
        let filled = crate::seeds::with_declared_signature(&template, -4).unwrap();
        let family = generate_family(&spec, Some(&filled)).unwrap();
        assert_eq!(family.members.len(), 2);
        for member in &family.members {
            assert_eq!(member.fibration.fiber_genus, 4);
            assert_eq!(member.fibration.base_genus, 9);
            assert_eq!(signature(&member.fibration).unwrap(), -4);
        }
    }

    #[test]
    fn reverification_rejects_foreign_certificates() {
        // a certificate granted for one fibration must not re-verify
        // against raw data that fails a premise
        let granted = certify_noncomplex(&q_block(2, 2, 3)).unwrap();
        assert!(granted.granted());
        let p = build_block(&BlockSpec::new(BlockFamily::P, 3, 9, 1)).unwrap();
        assert!(!reverify_noncomplex(&p, &granted).unwrap());
        // and a refusal is consistent with its own raw data
        let refused = certify_noncomplex(&p).unwrap();
        assert!(reverify_noncomplex(&p, &refused).unwrap());
    }

    #[test]
    fn family_mode_iii_rejects_oversized_seed_base() {
        // a seed already over a larger base than the target must refuse
        // cleanly rather than underflow
        use crate::fibration::{Asserted, Body, DeclaredInvariants, FibrationKind};
        use crate::linalg::AbelianGroup;
        let seed = Fibration::new(
            FibrationKind::Bundle,
            2,
            3,
            Body::Opaque(DeclaredInvariants {
                euler: 8,
                signature: Some(-4),
                h1: AbelianGroup::free(7),
                fiber_primitive: true,
                nontorsion_fiber_curve_exists: true,
                torsion_fiber_curve_exists: true,
                source: "test seed over a genus-3 base".into(),
            }),
            vec![],
            Asserted::default(),
        )
        .unwrap();
        let spec = FamilySpec {
            mode: FamilyMode::III,
            g: 2,
            h: 1,
            n: None,
            count: 1,
            m_start: 2,
        };
        assert!(matches!(
            generate_family(&spec, Some(&seed)),
            Err(CertifyError::ModeBounds(_))
        ));
    }

    #[test]
    fn family_mode_bounds() {
        let spec = FamilySpec {
            mode: FamilyMode::II,
            g: 25,
            h: 9,
            n: Some(2),
            count: 1,
            m_start: 1,
        };
        assert!(matches!(
            generate_family(&spec, None),
            Err(CertifyError::ModeBounds(_))
        ));
    }
}
