//! Builders for the elementary blocks and the horizontal/vertical
//! stabilization operators, including curve selection.
//!
//! Every stabilization computes H_1 of the result along two independent
//! routes whenever both are available (monodromy presentation vs the
//! Mayer-Vietoris cokernel) and aborts on disagreement.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::ConstructError;
use crate::fibration::{Asserted, Body, DeclaredInvariants, Fibration, FibrationKind, Section};
use crate::invariants::{betti_and_b2, euler_characteristic, h1_group, signature, FiberLattice};
use crate::linalg::{cokernel_group, smith_normal_form, AbelianGroup, IntMatrix};
use crate::monodromy::{CurveClass, Handle, MonodromyFactorization, SpElement, TwistLetter};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BlockFamily {
    P,
    Q,
    R,
}

impl BlockFamily {
    pub fn as_char(&self) -> char {
        match self {
            BlockFamily::P => 'P',
            BlockFamily::Q => 'Q',
            BlockFamily::R => 'R',
        }
    }
}

/// Parameters of an elementary block.
#[derive(Clone, Debug)]
pub struct BlockSpec {
    pub family: BlockFamily,
    pub g: usize,
    pub h: usize,
    pub m: i64,
    /// Twisting curve; defaults to a_1.
    pub a: Option<CurveClass>,
    /// Second curve for R-blocks; defaults to a_2.
    pub b: Option<CurveClass>,
}

impl BlockSpec {
    pub fn new(family: BlockFamily, g: usize, h: usize, m: i64) -> Self {
        BlockSpec {
            family,
            g,
            h,
            m,
            a: None,
            b: None,
        }
    }

    pub fn with_curves(mut self, a: CurveClass, b: Option<CurveClass>) -> Self {
        self.a = Some(a);
        self.b = b;
        self
    }
}

/// Build one of the elementary bundles P(g,h), Q_m(g,h,a), R_m(g,h,a,b).
///
/// All three are genus-g bundles over a genus-h surface whose monodromies
/// are supported away from a disk, so they carry a section of
/// self-intersection zero splitting the base summand of H_1.
pub fn build_block(spec: &BlockSpec) -> Result<Fibration, ConstructError> {
    let g = spec.g;
    let h = spec.h;
    if g == 0 {
        return Err(ConstructError::Precondition(
            "fiber genus must be >= 1".into(),
        ));
    }
    if spec.m < 1 {
        return Err(ConstructError::Precondition(format!(
            "twist multiplicity must be >= 1, got {}",
            spec.m
        )));
    }
    let needs_handle = !matches!(spec.family, BlockFamily::P);
    if needs_handle {
        if h == 0 {
            return Err(ConstructError::Precondition(
                "Q and R blocks need a base handle (h >= 1)".into(),
            ));
        }
        if g + h < 3 {
            return Err(ConstructError::GenusSum {
                family: spec.family.as_char(),
                g,
                h,
            });
        }
    }
    let a = match &spec.a {
        Some(c) => c.clone(),
        None => CurveClass::standard_a(g, 1),
    };
    if a.genus() != g || a.is_separating() {
        return Err(ConstructError::BadCurves(
            "curve a must be a non-separating class on the fiber".into(),
        ));
    }
    let mut asserted = Asserted {
        mcg_valid: true,
        ..Asserted::default()
    };
    let handles = match spec.family {
        BlockFamily::P => vec![Handle::trivial(); h],
        BlockFamily::Q => {
            let mut hs = vec![Handle {
                alpha: vec![TwistLetter::new(a.clone(), spec.m)],
                beta: vec![],
            }];
            hs.extend(std::iter::repeat_with(Handle::trivial).take(h - 1));
            hs
        }
        BlockFamily::R => {
            let b = match &spec.b {
                Some(c) => c.clone(),
                None => {
                    if g < 2 {
                        return Err(ConstructError::BadCurves(
                            "default R-block curves need g >= 2".into(),
                        ));
                    }
                    CurveClass::standard_a(g, 2)
                }
            };
            if b.genus() != g || b.is_separating() {
                return Err(ConstructError::BadCurves(
                    "curve b must be a non-separating class on the fiber".into(),
                ));
            }
            if a == b {
                return Err(ConstructError::BadCurves(
                    "R-block curves must be distinct classes".into(),
                ));
            }
            if h == 1 {
                let pairing = a.pairing_with(&b);
                if !pairing.is_zero() {
                    return Err(ConstructError::NonOrthogonalPair(pairing.to_string()));
                }
                // the two letters of the single handle are claimed disjoint
                asserted.disjoint_pairs.push((0, 1));
                vec![Handle {
                    alpha: vec![TwistLetter::new(a.clone(), spec.m)],
                    beta: vec![TwistLetter::new(b, 1)],
                }]
            } else {
                let mut hs = vec![
                    Handle {
                        alpha: vec![TwistLetter::new(a.clone(), spec.m)],
                        beta: vec![],
                    },
                    Handle {
                        alpha: vec![TwistLetter::new(b, 1)],
                        beta: vec![],
                    },
                ];
                hs.extend(std::iter::repeat_with(Handle::trivial).take(h - 2));
                hs
            }
        }
    };
    let fact = MonodromyFactorization {
        fiber_genus: g,
        base_genus: h,
        handles,
        vanishing_cycles: vec![],
    };
    Ok(Fibration::new(
        FibrationKind::Bundle,
        g,
        h,
        Body::Explicit(fact),
        vec![Section {
            self_intersection: 0,
            splits_base: true,
        }],
        asserted,
    )?)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CurveMode {
    NonTorsion,
    Torsion,
}

/// Normalize the sign of a class so the first nonzero entry is positive.
fn sign_normalize(mut v: Vec<BigInt>) -> Vec<BigInt> {
    if let Some(first) = v.iter().find(|e| !e.is_zero()) {
        if first < &BigInt::zero() {
            for e in &mut v {
                *e = -std::mem::take(e);
            }
        }
    }
    v
}

/// Select a primitive curve class whose image under the fiber inclusion
/// map has infinite order (NonTorsion) or lies in the torsion subgroup
/// (Torsion), read off the Smith form of the relation lattice.
///
/// For opaque bodies the declared existence flags gate the selection and a
/// representative standard class is returned; the stabilization operators
/// only use the mode, never the coordinates, on that route.
pub fn select_curve(f: &Fibration, mode: CurveMode) -> Result<CurveClass, ConstructError> {
    match &f.body {
        Body::Explicit(fact) => {
            let lattice = FiberLattice::compute(fact)?;
            let curves = select_from_lattice(&lattice, mode, 1)?;
            Ok(curves.into_iter().next().expect("one curve requested"))
        }
        Body::Opaque(d) => {
            let ok = match mode {
                CurveMode::NonTorsion => d.nontorsion_fiber_curve_exists,
                CurveMode::Torsion => d.torsion_fiber_curve_exists,
            };
            if !ok {
                return Err(ConstructError::NoSuitableCurve(format!(
                    "declared flags exclude a {:?}-image fiber curve",
                    mode
                )));
            }
            Ok(CurveClass::standard_a(f.fiber_genus, 1))
        }
    }
}

/// Pull `count` classes out of the lattice: NonTorsion mode returns the
/// preimages of the free coordinates (columns of U^{-1} past the rank),
/// which have primitive independent nontorsion images; Torsion mode
/// returns preimages of the leading diagonal coordinates.
fn select_from_lattice(
    lattice: &FiberLattice,
    mode: CurveMode,
    count: usize,
) -> Result<Vec<CurveClass>, ConstructError> {
    let n = 2 * lattice.genus;
    let r = lattice.rank();
    let u_inv = &lattice.snf.u_inv;
    let available: Vec<usize> = match mode {
        CurveMode::NonTorsion => (r..n).collect(),
        CurveMode::Torsion => (0..r).collect(),
    };
    if available.len() < count {
        return Err(ConstructError::NoSuitableCurve(match mode {
            CurveMode::NonTorsion => format!(
                "a nontorsion-image curve exists iff b_1 > 2h; free fiber rank is {}, need {}",
                available.len(),
                count
            ),
            CurveMode::Torsion => format!(
                "a torsion-image curve exists iff b_1 < 2g + 2h; relation rank is {}, need {}",
                available.len(),
                count
            ),
        }));
    }
    available
        .into_iter()
        .take(count)
        .map(|j| {
            let v = sign_normalize(u_inv.column(j));
            CurveClass::new(lattice.genus, v, false)
                .map_err(|e| ConstructError::BadCurves(e.to_string()))
        })
        .collect()
}

/// How the two H_1 routes related for a stabilization result.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RouteCheck {
    /// Presentation and Mayer-Vietoris cokernel both computed and agreed.
    DualAgreed,
    /// Only one route was available (declared data on one side).
    SingleRoute,
    /// Neither route could produce H_1; only e and sigma are reported.
    Partial,
}

/// Invariants of a sum that could not produce a full fibration record.
#[derive(Clone, Debug)]
pub struct PartialInvariants {
    pub euler: i64,
    pub signature: i64,
}

/// Outcome of a fiber or section sum.
#[derive(Clone, Debug)]
pub struct StabilizationReport {
    pub result: Option<Fibration>,
    pub partial: Option<PartialInvariants>,
    pub selected_curve: Option<CurveClass>,
    pub second_curve: Option<CurveClass>,
    /// dim ker(i_Y (+) i_T) over Q, when computable.
    pub kernel_dim: Option<i64>,
    pub b1_before: i64,
    pub b1_after: Option<i64>,
    pub sigma_before: i64,
    pub sigma_after: i64,
    pub euler_after: i64,
    pub h1_after: Option<AbelianGroup>,
    pub cross_check: RouteCheck,
    /// b_1(f1) + b_1(f2) - 2h, as printed in one closed form.
    pub closed_form_minus_2h: i64,
    /// b_1(f1) + b_1(f2) - 2g + d, the other closed form (fiber sums).
    pub closed_form_minus_2g: Option<i64>,
}

impl StabilizationReport {
    pub fn torsion_after(&self) -> Option<Vec<BigInt>> {
        self.h1_after.as_ref().map(|g| g.torsion().to_vec())
    }
}

/// Apply a homological twist to every letter of a factorization.
fn twist_factorization(
    fact: &MonodromyFactorization,
    twist: &SpElement,
) -> Result<MonodromyFactorization, ConstructError> {
    let map_letter = |letter: &TwistLetter| -> Result<TwistLetter, ConstructError> {
        let klass = twist.apply(letter.class.klass());
        let separating = klass.iter().all(|e| e.is_zero());
        let class = CurveClass::new(letter.class.genus(), klass, separating)
            .map_err(|_| ConstructError::BadTwist)?;
        Ok(TwistLetter::new(class, letter.power))
    };
    let mut handles = Vec::with_capacity(fact.handles.len());
    for h in &fact.handles {
        handles.push(Handle {
            alpha: h.alpha.iter().map(&map_letter).collect::<Result<_, _>>()?,
            beta: h.beta.iter().map(&map_letter).collect::<Result<_, _>>()?,
        });
    }
    Ok(MonodromyFactorization {
        fiber_genus: fact.fiber_genus,
        base_genus: fact.base_genus,
        handles,
        vanishing_cycles: fact
            .vanishing_cycles
            .iter()
            .map(&map_letter)
            .collect::<Result<_, _>>()?,
    })
}

/// Glue the distinguished sections of the two summands, when both exist.
fn glue_sections(f1: &Fibration, f2: &Fibration) -> Vec<Section> {
    match (f1.sections.first(), f2.sections.first()) {
        (Some(s1), Some(s2)) => vec![Section {
            self_intersection: s1.self_intersection + s2.self_intersection,
            splits_base: s1.splits_base && s2.splits_base,
        }],
        _ => vec![],
    }
}

fn summed_asserted(f1: &Fibration, f2: &Fibration, homological_twist: bool) -> Asserted {
    let rel_min_side = |f: &Fibration| match f.kind {
        FibrationKind::Bundle => true,
        FibrationKind::Lefschetz => f.asserted.relatively_minimal,
    };
    Asserted {
        relatively_minimal: rel_min_side(f1) && rel_min_side(f2),
        mcg_valid: f1.asserted.mcg_valid && f2.asserted.mcg_valid && !homological_twist,
        disjoint_pairs: vec![],
        fiber_primitive_override: false,
        minimal: false,
    }
}

/// The Mayer-Vietoris cokernel for a fiber sum: the quotient of
/// H_1(Y) (+) H_1(Q) by the antidiagonal fiber, presented on the
/// generators (base_Y, fiber_Y, base_Q, fiber_Q).
fn mv_cokernel_fiber(
    fact1: &MonodromyFactorization,
    fact2_twisted: &MonodromyFactorization,
) -> Result<AbelianGroup, ConstructError> {
    let g = fact1.fiber_genus;
    let n = 2 * g;
    let r1 = crate::invariants::relation_matrix(fact1)?;
    let r2 = crate::invariants::relation_matrix(fact2_twisted)?;
    let (h1, h2) = (2 * fact1.base_genus, 2 * fact2_twisted.base_genus);
    let rows = h1 + n + h2 + n;
    let fiber1_off = h1;
    let fiber2_off = h1 + n + h2;
    let mut columns: Vec<Vec<BigInt>> = Vec::new();
    for j in 0..r1.cols() {
        let mut col = vec![BigInt::zero(); rows];
        for i in 0..n {
            col[fiber1_off + i] = r1.get(i, j).clone();
        }
        columns.push(col);
    }
    for j in 0..r2.cols() {
        let mut col = vec![BigInt::zero(); rows];
        for i in 0..n {
            col[fiber2_off + i] = r2.get(i, j).clone();
        }
        columns.push(col);
    }
    // the twist is already folded into the second factorization, so the
    // antidiagonal fiber identification is the identity here
    for j in 0..n {
        let mut col = vec![BigInt::zero(); rows];
        col[fiber1_off + j] = BigInt::one();
        col[fiber2_off + j] = BigInt::one();
        columns.push(col);
    }
    Ok(cokernel_group(&IntMatrix::from_columns(rows, &columns)))
}

/// dim over Q of ker(i_Y (+) i_Q) on H_1 of the fiber: the free parts of
/// both quotient maps stacked.
fn fiber_sum_kernel_dim(
    fact1: &MonodromyFactorization,
    fact2_twisted: &MonodromyFactorization,
) -> Result<i64, ConstructError> {
    let n = 2 * fact1.fiber_genus;
    let l1 = FiberLattice::compute(fact1)?;
    let l2 = FiberLattice::compute(fact2_twisted)?;
    let free_rows = |l: &FiberLattice| -> Vec<Vec<BigInt>> {
        (l.rank()..n).map(|i| l.snf.u.row(i).to_vec()).collect()
    };
    let mut rows: Vec<Vec<BigInt>> = free_rows(&l1);
    rows.extend(free_rows(&l2));
    let stacked = IntMatrix::from_fn(rows.len(), n, |i, j| rows[i][j].clone());
    let rank = smith_normal_form(&stacked).rank();
    Ok(n as i64 - rank as i64)
}

/// Recognized elementary-block shapes of an explicit partner, used by the
/// declared route of sums against opaque seeds.
enum BlockShape {
    Q { m: i64 },
    R { m: i64 },
}

fn detect_block_shape(f: &Fibration) -> Option<BlockShape> {
    let fact = f.explicit().ok()?;
    if !fact.vanishing_cycles.is_empty() {
        return None;
    }
    let nontrivial: Vec<&Handle> = fact
        .handles
        .iter()
        .filter(|h| !(h.alpha.is_empty() && h.beta.is_empty()))
        .collect();
    match nontrivial.as_slice() {
        [h] if h.beta.is_empty() && h.alpha.len() == 1 => Some(BlockShape::Q {
            m: h.alpha[0].power,
        }),
        [h] if h.alpha.len() == 1 && h.beta.len() == 1 && h.beta[0].power == 1 => {
            Some(BlockShape::R {
                m: h.alpha[0].power,
            })
        }
        [h1, h2]
            if h1.beta.is_empty()
                && h2.beta.is_empty()
                && h1.alpha.len() == 1
                && h2.alpha.len() == 1
                && h2.alpha[0].power == 1 =>
        {
            Some(BlockShape::R {
                m: h1.alpha[0].power,
            })
        }
        _ => None,
    }
}

/// Fiber sum (horizontal gluing along regular fibers). Base genera add,
/// factorizations concatenate, the second conjugated letterwise by the
/// twist when given.
///
/// When one side is opaque the result is computed on the declared route,
/// provided the explicit side is an elementary block whose twist curves
/// are matched to the seed per the declared curve-existence flags (this is
/// how the stabilization operators construct partners). Unmatchable sums
/// yield only Euler characteristic and signature.
pub fn fiber_sum(
    f1: &Fibration,
    f2: &Fibration,
    twist: Option<&SpElement>,
) -> Result<StabilizationReport, ConstructError> {
    if f1.fiber_genus != f2.fiber_genus {
        return Err(ConstructError::FiberGenusMismatch(
            f1.fiber_genus,
            f2.fiber_genus,
        ));
    }
    if let Some(t) = twist {
        if t.genus() != f1.fiber_genus {
            return Err(ConstructError::BadTwist);
        }
        if !f1.is_explicit() || !f2.is_explicit() {
            return Err(ConstructError::Precondition(
                "twisted fiber sums need explicit factorizations on both sides; \
                 declared data cannot see the gluing"
                    .into(),
            ));
        }
    }
    if !f1.fiber_primitive() || !f2.fiber_primitive() {
        return Err(ConstructError::FiberNotPrimitive);
    }
    let g = f1.fiber_genus;
    let sigma1 = signature(f1)?;
    let sigma2 = signature(f2)?;
    let (b1_1, _) = betti_and_b2(f1)?;
    let (b1_2, _) = betti_and_b2(f2)?;
    let e1 = euler_characteristic(f1);
    let e2 = euler_characteristic(f2);
    let euler_after = e1 + e2 + 4 * (g as i64 - 1);
    let sigma_after = sigma1 + sigma2;
    let h_total = f1.base_genus + f2.base_genus;
    let closed_form_minus_2h = b1_1 + b1_2 - 2 * f1.base_genus as i64;

    match (&f1.body, &f2.body) {
        (Body::Explicit(fact1), Body::Explicit(fact2)) => {
            let fact2t = match twist {
                Some(t) => twist_factorization(fact2, t)?,
                None => fact2.clone(),
            };
            let mut handles = fact1.handles.clone();
            handles.extend(fact2t.handles.iter().cloned());
            let mut vanishing_cycles = fact1.vanishing_cycles.clone();
            vanishing_cycles.extend(fact2t.vanishing_cycles.iter().cloned());
            let kind = if vanishing_cycles.is_empty() {
                FibrationKind::Bundle
            } else {
                FibrationKind::Lefschetz
            };
            let composed = MonodromyFactorization {
                fiber_genus: g,
                base_genus: h_total,
                handles,
                vanishing_cycles,
            };
            let result = Fibration::new(
                kind,
                g,
                h_total,
                Body::Explicit(composed),
                glue_sections(f1, f2),
                summed_asserted(f1, f2, twist.is_some()),
            )?;
            // route one: monodromy presentation of the composed object
            let h1_pres = h1_group(&result)?;
            // route two: Mayer-Vietoris cokernel of i_Y (+) i_Q
            let h1_mv = mv_cokernel_fiber(fact1, &fact2t)?;
            if h1_pres != h1_mv {
                return Err(ConstructError::CrossCheckFailed(format!(
                    "presentation route {} vs Mayer-Vietoris route {}",
                    h1_pres, h1_mv
                )));
            }
            // Novikov additivity, against from-scratch recomputation
            let sigma_recomputed = signature(&result)?;
            if sigma_recomputed != sigma_after {
                return Err(ConstructError::CrossCheckFailed(format!(
                    "Novikov additivity: recomputed sigma {} vs {} + {}",
                    sigma_recomputed, sigma1, sigma2
                )));
            }
            let e_recomputed = euler_characteristic(&result);
            if e_recomputed != euler_after {
                return Err(ConstructError::CrossCheckFailed(format!(
                    "euler additivity: recomputed {} vs {}",
                    e_recomputed, euler_after
                )));
            }
            let d = fiber_sum_kernel_dim(fact1, &fact2t)?;
            let b1_after = h1_pres.rank() as i64;
            Ok(StabilizationReport {
                result: Some(result),
                partial: None,
                selected_curve: None,
                second_curve: None,
                kernel_dim: Some(d),
                b1_before: b1_1,
                b1_after: Some(b1_after),
                sigma_before: sigma1,
                sigma_after,
                euler_after,
                h1_after: Some(h1_pres),
                cross_check: RouteCheck::DualAgreed,
                closed_form_minus_2h,
                closed_form_minus_2g: Some(b1_1 + b1_2 - 2 * g as i64 + d),
            })
        }
        (Body::Opaque(declared), Body::Explicit(_)) => fiber_sum_declared(
            f1,
            declared,
            f2,
            b1_1,
            b1_2,
            sigma1,
            sigma_after,
            euler_after,
            h_total,
            closed_form_minus_2h,
        ),
        (Body::Explicit(_), Body::Opaque(declared)) => fiber_sum_declared(
            f2,
            declared,
            f1,
            b1_2,
            b1_1,
            sigma2,
            sigma_after,
            euler_after,
            h_total,
            closed_form_minus_2h,
        ),
        (Body::Opaque(_), Body::Opaque(_)) => Ok(StabilizationReport {
            result: None,
            partial: Some(PartialInvariants {
                euler: euler_after,
                signature: sigma_after,
            }),
            selected_curve: None,
            second_curve: None,
            kernel_dim: None,
            b1_before: b1_1,
            b1_after: None,
            sigma_before: sigma1,
            sigma_after,
            euler_after,
            h1_after: None,
            cross_check: RouteCheck::Partial,
            closed_form_minus_2h,
            closed_form_minus_2g: None,
        }),
    }
}

/// Declared route of a fiber sum: opaque seed against an elementary-block
/// partner matched to the seed's curve flags. The cokernel of
/// i_Y (+) i_Q collapses to H_1(Y) modulo the matched twist relations,
/// plus the partner's base summand.
#[allow(clippy::too_many_arguments)]
fn fiber_sum_declared(
    seed: &Fibration,
    declared: &DeclaredInvariants,
    partner: &Fibration,
    b1_seed: i64,
    b1_partner: i64,
    sigma_seed: i64,
    sigma_after: i64,
    euler_after: i64,
    h_total: usize,
    closed_form_minus_2h: i64,
) -> Result<StabilizationReport, ConstructError> {
    let g = seed.fiber_genus;
    let two_h_seed = 2 * seed.base_genus as i64;
    let shape = detect_block_shape(partner);
    let partial = |reason: RouteCheck| StabilizationReport {
        result: None,
        partial: Some(PartialInvariants {
            euler: euler_after,
            signature: sigma_after,
        }),
        selected_curve: None,
        second_curve: None,
        kernel_dim: None,
        b1_before: b1_seed,
        b1_after: None,
        sigma_before: sigma_seed,
        sigma_after,
        euler_after,
        h1_after: None,
        cross_check: reason,
        closed_form_minus_2h,
        closed_form_minus_2g: None,
    };
    let Some(shape) = shape else {
        return Ok(partial(RouteCheck::Partial));
    };
    // matched relations on H_1(Y): Q kills m * (primitive nontorsion class
    // with primitive free part); R additionally kills a second independent
    // nontorsion class. Both leave the seed torsion untouched and
    // contribute a clean Z/m.
    let (rank_drop, m) = match shape {
        BlockShape::Q { m } => {
            if !declared.nontorsion_fiber_curve_exists {
                return Err(ConstructError::NoSuitableCurve(
                    "declared flags exclude a nontorsion-image fiber curve".into(),
                ));
            }
            (1i64, m)
        }
        BlockShape::R { m } => {
            if b1_seed - two_h_seed < 2 {
                return Err(ConstructError::NoSuitableCurve(
                    "the R-partner route needs two independent nontorsion-image classes \
                     (b_1 > 2h + 1)"
                        .into(),
                ));
            }
            (2i64, m)
        }
    };
    let mut torsion: Vec<BigInt> = declared.h1.torsion().to_vec();
    if m > 1 {
        torsion.push(BigInt::from(m));
    }
    let rank = (b1_seed - rank_drop) as usize + 2 * partner.base_genus;
    let h1_after = AbelianGroup::from_invariants(rank, &torsion);
    let b1_after = h1_after.rank() as i64;
    let kind = seed.kind;
    let b1 = b1_after;
    let two_h_total = 2 * h_total as i64;
    let full = 2 * g as i64 + two_h_total;
    let result_declared = DeclaredInvariants {
        euler: euler_after,
        signature: Some(sigma_after),
        h1: h1_after.clone(),
        fiber_primitive: !glue_sections(seed, partner).is_empty(),
        nontorsion_fiber_curve_exists: b1 > two_h_total,
        torsion_fiber_curve_exists: b1 < full,
        source: format!("fiber sum: {} + elementary block", declared.source),
    };
    let result = Fibration::new(
        kind,
        g,
        h_total,
        Body::Opaque(result_declared),
        glue_sections(seed, partner),
        Asserted {
            relatively_minimal: match seed.kind {
                FibrationKind::Lefschetz => seed.asserted.relatively_minimal,
                FibrationKind::Bundle => false,
            },
            mcg_valid: false,
            disjoint_pairs: vec![],
            fiber_primitive_override: false,
            minimal: false,
        },
    )?;
    Ok(StabilizationReport {
        result: Some(result),
        partial: None,
        selected_curve: None,
        second_curve: None,
        kernel_dim: Some(0),
        b1_before: b1_seed,
        b1_after: Some(b1_after),
        sigma_before: sigma_seed,
        sigma_after,
        euler_after,
        h1_after: Some(h1_after),
        cross_check: RouteCheck::SingleRoute,
        closed_form_minus_2h,
        closed_form_minus_2g: Some(b1_seed + b1_partner - 2 * g as i64),
    })
}

/// The Mayer-Vietoris cokernel for a section sum: the quotient of
/// H_1(Z) (+) H_1(T) by the antidiagonal base.
fn mv_cokernel_section(
    fact1: &MonodromyFactorization,
    fact2: &MonodromyFactorization,
) -> Result<AbelianGroup, ConstructError> {
    let (n1, n2) = (2 * fact1.fiber_genus, 2 * fact2.fiber_genus);
    let two_h = 2 * fact1.base_genus;
    let r1 = crate::invariants::relation_matrix(fact1)?;
    let r2 = crate::invariants::relation_matrix(fact2)?;
    let rows = two_h + n1 + two_h + n2;
    let base1_off = 0;
    let fiber1_off = two_h;
    let base2_off = two_h + n1;
    let fiber2_off = two_h + n1 + two_h;
    let mut columns: Vec<Vec<BigInt>> = Vec::new();
    for j in 0..r1.cols() {
        let mut col = vec![BigInt::zero(); rows];
        for i in 0..n1 {
            col[fiber1_off + i] = r1.get(i, j).clone();
        }
        columns.push(col);
    }
    for j in 0..r2.cols() {
        let mut col = vec![BigInt::zero(); rows];
        for i in 0..n2 {
            col[fiber2_off + i] = r2.get(i, j).clone();
        }
        columns.push(col);
    }
    for j in 0..two_h {
        let mut col = vec![BigInt::zero(); rows];
        col[base1_off + j] = BigInt::one();
        col[base2_off + j] = BigInt::one();
        columns.push(col);
    }
    Ok(cokernel_group(&IntMatrix::from_columns(rows, &columns)))
}

/// Section sum (vertical gluing along zero-self-intersection sections).
/// Fiber genera add; handle words combine block-diagonally.
pub fn section_sum(f1: &Fibration, f2: &Fibration) -> Result<StabilizationReport, ConstructError> {
    if f1.base_genus != f2.base_genus {
        return Err(ConstructError::BaseGenusMismatch(
            f1.base_genus,
            f2.base_genus,
        ));
    }
    let h = f1.base_genus;
    for f in [f1, f2] {
        if f.zero_section().is_none() {
            return Err(ConstructError::MissingSection);
        }
    }
    let sigma1 = signature(f1)?;
    let sigma2 = signature(f2)?;
    let (b1_1, _) = betti_and_b2(f1)?;
    let (b1_2, _) = betti_and_b2(f2)?;
    let e1 = euler_characteristic(f1);
    let e2 = euler_characteristic(f2);
    let euler_after = e1 + e2 + 4 * (h as i64 - 1);
    let sigma_after = sigma1 + sigma2;
    let g_total = f1.fiber_genus + f2.fiber_genus;
    let closed_form_minus_2h = b1_1 + b1_2 - 2 * h as i64;

    match (&f1.body, &f2.body) {
        (Body::Explicit(fact1), Body::Explicit(fact2)) => {
            if f1.splitting_zero_section().is_none() || f2.splitting_zero_section().is_none() {
                return Err(ConstructError::MissingSection);
            }
            let (g1, g2) = (f1.fiber_genus, f2.fiber_genus);
            let embed1 = |l: &TwistLetter| TwistLetter::new(l.class.embed(g_total, 0), l.power);
            let embed2 = |l: &TwistLetter| TwistLetter::new(l.class.embed(g_total, g1), l.power);
            let _ = g2;
            let mut handles = Vec::with_capacity(h);
            for i in 0..h {
                let (h1, h2) = (&fact1.handles[i], &fact2.handles[i]);
                let mut alpha: Vec<TwistLetter> = h1.alpha.iter().map(embed1).collect();
                alpha.extend(h2.alpha.iter().map(embed2));
                let mut beta: Vec<TwistLetter> = h1.beta.iter().map(embed1).collect();
                beta.extend(h2.beta.iter().map(embed2));
                handles.push(Handle { alpha, beta });
            }
            let mut vanishing_cycles: Vec<TwistLetter> =
                fact1.vanishing_cycles.iter().map(embed1).collect();
            vanishing_cycles.extend(fact2.vanishing_cycles.iter().map(embed2));
            let kind = if vanishing_cycles.is_empty() {
                FibrationKind::Bundle
            } else {
                FibrationKind::Lefschetz
            };
            let composed = MonodromyFactorization {
                fiber_genus: g_total,
                base_genus: h,
                handles,
                vanishing_cycles,
            };
            // the glued sections are consumed by the sum; no section is
            // carried on the result
            let result = Fibration::new(
                kind,
                g_total,
                h,
                Body::Explicit(composed),
                vec![],
                summed_asserted(f1, f2, false),
            )?;
            let h1_pres = h1_group(&result)?;
            let h1_mv = mv_cokernel_section(fact1, fact2)?;
            if h1_pres != h1_mv {
                return Err(ConstructError::CrossCheckFailed(format!(
                    "presentation route {} vs Mayer-Vietoris route {}",
                    h1_pres, h1_mv
                )));
            }
            let sigma_recomputed = signature(&result)?;
            if sigma_recomputed != sigma_after {
                return Err(ConstructError::CrossCheckFailed(format!(
                    "Novikov additivity: recomputed sigma {} vs {} + {}",
                    sigma_recomputed, sigma1, sigma2
                )));
            }
            let e_recomputed = euler_characteristic(&result);
            if e_recomputed != euler_after {
                return Err(ConstructError::CrossCheckFailed(format!(
                    "euler additivity: recomputed {} vs {}",
                    e_recomputed, euler_after
                )));
            }
            let b1_after = h1_pres.rank() as i64;
            Ok(StabilizationReport {
                result: Some(result),
                partial: None,
                selected_curve: None,
                second_curve: None,
                kernel_dim: None,
                b1_before: b1_1,
                b1_after: Some(b1_after),
                sigma_before: sigma1,
                sigma_after,
                euler_after,
                h1_after: Some(h1_pres),
                cross_check: RouteCheck::DualAgreed,
                closed_form_minus_2h,
                closed_form_minus_2g: None,
            })
        }
        (Body::Opaque(d1), Body::Explicit(fact2)) => section_sum_declared(
            f1,
            d1,
            f2,
            fact2,
            b1_1,
            sigma1,
            sigma_after,
            euler_after,
            g_total,
            h,
            closed_form_minus_2h,
        ),
        (Body::Explicit(fact1), Body::Opaque(d2)) => section_sum_declared(
            f2,
            d2,
            f1,
            fact1,
            b1_2,
            sigma2,
            sigma_after,
            euler_after,
            g_total,
            h,
            closed_form_minus_2h,
        ),
        (Body::Opaque(_), Body::Opaque(_)) => Ok(StabilizationReport {
            result: None,
            partial: Some(PartialInvariants {
                euler: euler_after,
                signature: sigma_after,
            }),
            selected_curve: None,
            second_curve: None,
            kernel_dim: None,
            b1_before: b1_1,
            b1_after: None,
            sigma_before: sigma1,
            sigma_after,
            euler_after,
            h1_after: None,
            cross_check: RouteCheck::Partial,
            closed_form_minus_2h,
            closed_form_minus_2g: None,
        }),
    }
}

/// Declared route of a section sum: H_1 of the result is
/// H_1(Z) (+) coker(fiber relations of T), valid because the partner's
/// section splits its base summand and both section classes are primitive.
#[allow(clippy::too_many_arguments)]
fn section_sum_declared(
    seed: &Fibration,
    declared: &DeclaredInvariants,
    partner: &Fibration,
    partner_fact: &MonodromyFactorization,
    b1_seed: i64,
    sigma_seed: i64,
    sigma_after: i64,
    euler_after: i64,
    g_total: usize,
    h: usize,
    closed_form_minus_2h: i64,
) -> Result<StabilizationReport, ConstructError> {
    if partner.splitting_zero_section().is_none() {
        return Ok(StabilizationReport {
            result: None,
            partial: Some(PartialInvariants {
                euler: euler_after,
                signature: sigma_after,
            }),
            selected_curve: None,
            second_curve: None,
            kernel_dim: None,
            b1_before: b1_seed,
            b1_after: None,
            sigma_before: sigma_seed,
            sigma_after,
            euler_after,
            h1_after: None,
            cross_check: RouteCheck::Partial,
            closed_form_minus_2h,
            closed_form_minus_2g: None,
        });
    }
    let fiber_coker = cokernel_group(&crate::invariants::relation_matrix(partner_fact)?);
    let h1_after = declared.h1.direct_sum(&fiber_coker);
    let b1_after = h1_after.rank() as i64;
    let kind = if seed.kind == FibrationKind::Lefschetz || partner.kind == FibrationKind::Lefschetz
    {
        FibrationKind::Lefschetz
    } else {
        FibrationKind::Bundle
    };
    let two_h = 2 * h as i64;
    let full = 2 * g_total as i64 + two_h;
    let result_declared = DeclaredInvariants {
        euler: euler_after,
        signature: Some(sigma_after),
        h1: h1_after.clone(),
        fiber_primitive: false,
        nontorsion_fiber_curve_exists: b1_after > two_h,
        torsion_fiber_curve_exists: b1_after < full,
        source: format!("section sum: {} + elementary block", declared.source),
    };
    let rel_min_side = |f: &Fibration| match f.kind {
        FibrationKind::Bundle => true,
        FibrationKind::Lefschetz => f.asserted.relatively_minimal,
    };
    let result = Fibration::new(
        kind,
        g_total,
        h,
        Body::Opaque(result_declared),
        vec![],
        Asserted {
            relatively_minimal: rel_min_side(seed)
                && rel_min_side(partner)
                && kind == FibrationKind::Lefschetz,
            mcg_valid: false,
            disjoint_pairs: vec![],
            fiber_primitive_override: false,
            minimal: false,
        },
    )?;
    Ok(StabilizationReport {
        result: Some(result),
        partial: None,
        selected_curve: None,
        second_curve: None,
        kernel_dim: None,
        b1_before: b1_seed,
        b1_after: Some(b1_after),
        sigma_before: sigma_seed,
        sigma_after,
        euler_after,
        h1_after: Some(h1_after),
        cross_check: RouteCheck::SingleRoute,
        closed_form_minus_2h,
        closed_form_minus_2g: None,
    })
}

/// Horizontal stabilization: fiber sum with Q_m(g, h', a_hat) built on a
/// selected nontorsion curve (even b_1), or with R_m(g, h', a_hat, b_hat)
/// built on two independently selected nontorsion curves (odd b_1), so
/// that the summed kernel is trivial, b_1 of the result is odd, and the
/// torsion gains a clean Z/m.
pub fn horizontal_stabilize(
    f: &Fibration,
    partner_base_genus: usize,
    m: i64,
    twist: Option<&SpElement>,
) -> Result<StabilizationReport, ConstructError> {
    if !f.fiber_primitive() {
        return Err(ConstructError::FiberNotPrimitive);
    }
    let g = f.fiber_genus;
    let (b1, _) = betti_and_b2(f)?;
    let sigma_before = signature(f)?;
    let two_h = 2 * f.base_genus as i64;
    let even = b1 % 2 == 0;
    // with a twist the partner is built on the twist-preimage, so the
    // conjugated relations land exactly on the selected classes
    let pull_back = |c: &CurveClass| -> Result<CurveClass, ConstructError> {
        match twist {
            None => Ok(c.clone()),
            Some(t) => {
                let klass = t.inverse().apply(c.klass());
                CurveClass::new(g, klass, false)
                    .map_err(|e| ConstructError::BadCurves(e.to_string()))
            }
        }
    };
    let (partner, a_hat, b_hat) = if even {
        if b1 <= two_h {
            return Err(ConstructError::NoSuitableCurve(format!(
                "horizontal stabilization needs b_1 > 2h (b_1 = {}, 2h = {})",
                b1, two_h
            )));
        }
        let a_hat = select_curve(f, CurveMode::NonTorsion)?;
        let spec = BlockSpec::new(BlockFamily::Q, g, partner_base_genus, m)
            .with_curves(pull_back(&a_hat)?, None);
        (build_block(&spec)?, Some(a_hat), None)
    } else {
        // odd b_1: R-type partner on two independent nontorsion classes,
        // keeping the summed kernel trivial
        let (a_hat, b_hat) = select_independent_pair(f, partner_base_genus == 1)?;
        let spec = BlockSpec::new(BlockFamily::R, g, partner_base_genus, m)
            .with_curves(pull_back(&a_hat)?, Some(pull_back(&b_hat)?));
        (build_block(&spec)?, Some(a_hat), Some(b_hat))
    };
    let mut report = fiber_sum(f, &partner, twist)?;
    report.selected_curve = a_hat;
    report.second_curve = b_hat;
    // postconditions of the stabilization (not of a generic sum)
    if report.sigma_after != sigma_before {
        return Err(ConstructError::CrossCheckFailed(format!(
            "stabilization must preserve sigma: {} -> {}",
            sigma_before, report.sigma_after
        )));
    }
    if let Some(b1_after) = report.b1_after {
        if b1_after % 2 == 0 {
            return Err(ConstructError::CrossCheckFailed(format!(
                "stabilized b_1 = {} is even",
                b1_after
            )));
        }
    }
    Ok(report)
}

/// Two primitive classes with independent nontorsion images, orthogonal
/// when the partner base is a single handle (whose R-block requires
/// <a, b> = 0).
fn select_independent_pair(
    f: &Fibration,
    need_orthogonal: bool,
) -> Result<(CurveClass, CurveClass), ConstructError> {
    match &f.body {
        Body::Explicit(fact) => {
            let lattice = FiberLattice::compute(fact)?;
            let n = 2 * lattice.genus;
            let r = lattice.rank();
            if n - r < 2 {
                return Err(ConstructError::NoSuitableCurve(
                    "the odd-b_1 path needs two independent nontorsion-image classes \
                     (free fiber rank >= 2)"
                        .into(),
                ));
            }
            let first = select_from_lattice(&lattice, CurveMode::NonTorsion, 1)?
                .into_iter()
                .next()
                .expect("free rank checked");
            let u_inv = &lattice.snf.u_inv;
            for j in r + 1..n {
                let v = sign_normalize(u_inv.column(j));
                let cand = CurveClass::new(lattice.genus, v, false)
                    .map_err(|e| ConstructError::BadCurves(e.to_string()))?;
                if !need_orthogonal || first.pairing_with(&cand).is_zero() {
                    return Ok((first, cand));
                }
            }
            Err(ConstructError::NoSuitableCurve(
                "no second nontorsion class orthogonal to the first; use a partner \
                 base of genus >= 2"
                    .into(),
            ))
        }
        Body::Opaque(d) => {
            let two_h = 2 * f.base_genus as i64;
            let b1 = d.h1.rank() as i64;
            if !d.nontorsion_fiber_curve_exists || b1 - two_h < 2 {
                return Err(ConstructError::NoSuitableCurve(
                    "declared data excludes two independent nontorsion-image classes".into(),
                ));
            }
            // representative standard classes; the declared route never
            // reads their coordinates, and a_1, a_2 are orthogonal
            if f.fiber_genus < 2 {
                return Err(ConstructError::NoSuitableCurve(
                    "representative pair needs fiber genus >= 2".into(),
                ));
            }
            Ok((
                CurveClass::standard_a(f.fiber_genus, 1),
                CurveClass::standard_a(f.fiber_genus, 2),
            ))
        }
    }
}

/// Vertical stabilization: section sum with Q_m(g', h) or R_m(g', h)
/// depending on the parity of b_1, so that the result has odd b_1.
pub fn vertical_stabilize(
    f: &Fibration,
    partner_fiber_genus: usize,
    m: i64,
) -> Result<StabilizationReport, ConstructError> {
    if f.zero_section().is_none() {
        return Err(ConstructError::MissingSection);
    }
    let (b1, _) = betti_and_b2(f)?;
    let sigma_before = signature(f)?;
    let h = f.base_genus;
    let family = if b1 % 2 == 0 {
        BlockFamily::Q
    } else {
        BlockFamily::R
    };
    let spec = BlockSpec::new(family, partner_fiber_genus, h, m);
    let partner = build_block(&spec)?;
    let mut report = section_sum(f, &partner)?;
    report.selected_curve = None;
    if report.sigma_after != sigma_before {
        return Err(ConstructError::CrossCheckFailed(format!(
            "stabilization must preserve sigma: {} -> {}",
            sigma_before, report.sigma_after
        )));
    }
    if let Some(b1_after) = report.b1_after {
        if b1_after % 2 == 0 {
            return Err(ConstructError::CrossCheckFailed(format!(
                "stabilized b_1 = {} is even",
                b1_after
            )));
        }
    }
    Ok(report)
}
