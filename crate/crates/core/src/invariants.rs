//! Exact computation of e, b_1, b_2, H_1 and sigma for fibrations: the
//! monodromy-presentation route for explicit bodies, the declared/Novikov
//! route for opaque blocks.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::FibrationError;
use crate::fibration::{genus_formula, Body, Fibration, FibrationKind};
use crate::linalg::{smith_normal_form, AbelianGroup, IntMatrix, SmithNormalForm};
use crate::meyer::factorization_signature;
use crate::monodromy::{word_matrix, MonodromyFactorization};

/// Euler characteristic: 4(g-1)(h-1) + k, with k the number of vanishing
/// cycles (zero for a bundle). Opaque bodies return the declared value,
/// which construction already cross-checked against the formula.
pub fn euler_characteristic(f: &Fibration) -> i64 {
    match &f.body {
        Body::Explicit(fact) => {
            genus_formula(f.fiber_genus, f.base_genus) + fact.vanishing_cycles.len() as i64
        }
        Body::Opaque(d) => d.euler,
    }
}

/// The relation lattice of an explicit factorization: the columns are
/// (rho(gamma) - I) e_j for every handle word gamma and basis vector e_j,
/// followed by the classes of the vanishing cycles.
pub fn relation_matrix(fact: &MonodromyFactorization) -> Result<IntMatrix, FibrationError> {
    let g = fact.fiber_genus;
    let n = 2 * g;
    let id = IntMatrix::identity(n);
    let mut columns: Vec<Vec<BigInt>> = Vec::new();
    for handle in &fact.handles {
        for word in [&handle.alpha, &handle.beta] {
            let rho = word_matrix(word, g)?;
            if rho.is_identity() {
                continue; // contributes only zero columns
            }
            let diff = rho.matrix().sub(&id);
            for j in 0..n {
                let col = diff.column(j);
                if col.iter().any(|e| !e.is_zero()) {
                    columns.push(col);
                }
            }
        }
    }
    for cycle in &fact.vanishing_cycles {
        if !cycle.class.is_separating() {
            columns.push(cycle.class.klass().to_vec());
        }
    }
    Ok(IntMatrix::from_columns(n, &columns))
}

/// The Smith data of the fiber relation lattice, from which both the
/// quotient map H_1(Sigma_g) -> H_1(Y) and the curve selection are read.
pub struct FiberLattice {
    pub genus: usize,
    pub relations: IntMatrix,
    pub snf: SmithNormalForm,
}

impl FiberLattice {
    pub fn compute(fact: &MonodromyFactorization) -> Result<Self, FibrationError> {
        let relations = relation_matrix(fact)?;
        let snf = smith_normal_form(&relations);
        Ok(FiberLattice {
            genus: fact.fiber_genus,
            relations,
            snf,
        })
    }

    pub fn rank(&self) -> usize {
        self.snf.rank()
    }

    /// Free rank of the fiber contribution to H_1.
    pub fn free_rank(&self) -> usize {
        2 * self.genus - self.snf.rank()
    }

    /// Torsion divisors (entries >= 2 of the invariant factors).
    pub fn torsion(&self) -> Vec<BigInt> {
        self.snf
            .invariant_factors()
            .into_iter()
            .filter(|d| d > &BigInt::from(1))
            .collect()
    }
}

/// H_1 of the total space together with the induced map from the fiber.
///
/// Basis convention for H_1(Y): the first `2h` free coordinates form the
/// base summand, then the free fiber coordinates, then the torsion
/// coordinates in chain order; `fiber_map` has one row per coordinate, so
/// its first 2h rows are zero.
pub struct H1Data {
    pub group: AbelianGroup,
    pub fiber_map: IntMatrix,
    pub base_rank: usize,
}

/// H_1(total space) = Z^{2h} (+) coker(R) for the relation lattice R,
/// with the induced quotient map on the fiber summand.
///
/// The surface-relation lift is taken to contribute trivially to the
/// abelianization; this holds for monodromies supported on the complement
/// of a disk (all blocks here) and for fibrations with sections.
pub fn h1_total_space(f: &Fibration) -> Result<H1Data, FibrationError> {
    let fact = f.explicit()?;
    let lattice = FiberLattice::compute(fact)?;
    Ok(h1_from_lattice(&lattice, f.base_genus))
}

pub fn h1_from_lattice(lattice: &FiberLattice, base_genus: usize) -> H1Data {
    let n = 2 * lattice.genus;
    let r = lattice.rank();
    let two_h = 2 * base_genus;
    let torsion = lattice.torsion();
    let free_fiber = n - r;
    let rank = two_h + free_fiber;
    let u = &lattice.snf.u;
    // rows: base block (zero), free fiber coordinates (rows r.. of U),
    // then torsion coordinates (rows with d_i >= 2)
    let torsion_rows: Vec<usize> = (0..r)
        .filter(|&i| lattice.snf.d.get(i, i) > &BigInt::from(1))
        .collect();
    let total_rows = rank + torsion_rows.len();
    let fiber_map = IntMatrix::from_fn(total_rows, n, |row, col| {
        if row < two_h {
            BigInt::zero()
        } else if row < rank {
            u.get(r + (row - two_h), col).clone()
        } else {
            u.get(torsion_rows[row - rank], col).clone()
        }
    });
    H1Data {
        group: AbelianGroup::from_invariants(rank, &torsion),
        fiber_map,
        base_rank: two_h,
    }
}

/// H_1 of a fibration along either route: presentation for explicit
/// bodies, declared for opaque ones.
pub fn h1_group(f: &Fibration) -> Result<AbelianGroup, FibrationError> {
    match &f.body {
        Body::Explicit(_) => Ok(h1_total_space(f)?.group),
        Body::Opaque(d) => Ok(d.h1.clone()),
    }
}

/// (b_1, b_2) with b_2 = e - 2 + 2 b_1 (closed oriented 4-manifold
/// bookkeeping: b_0 = b_4 = 1 and b_3 = b_1).
pub fn betti_and_b2(f: &Fibration) -> Result<(i64, i64), FibrationError> {
    let b1 = h1_group(f)?.rank() as i64;
    let e = euler_characteristic(f);
    Ok((b1, e - 2 + 2 * b1))
}

/// Signature: the Meyer-cocycle route for explicit bodies, the declared
/// value for opaque ones.
pub fn signature(f: &Fibration) -> Result<i64, FibrationError> {
    match &f.body {
        Body::Explicit(fact) => Ok(factorization_signature(fact)?),
        Body::Opaque(d) => d
            .signature
            .ok_or_else(|| FibrationError::MissingSignature(d.source.clone())),
    }
}

/// Which rule established minimality of the total space.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MinimalityBasis {
    /// Surface bundle with g >= 2 and h >= 2 (aspherical total space).
    BundleRule,
    /// Relatively minimal Lefschetz fibration with g >= 2 and h >= 1.
    StipsiczRule,
    /// Imported literature claim.
    Declared,
}

impl MinimalityBasis {
    pub fn as_str(&self) -> &'static str {
        match self {
            MinimalityBasis::BundleRule => "bundle-rule",
            MinimalityBasis::StipsiczRule => "stipsicz-rule",
            MinimalityBasis::Declared => "declared",
        }
    }
}

pub fn minimality_basis(f: &Fibration) -> Option<MinimalityBasis> {
    match f.kind {
        FibrationKind::Bundle if f.fiber_genus >= 2 && f.base_genus >= 2 => {
            return Some(MinimalityBasis::BundleRule);
        }
        FibrationKind::Lefschetz
            if f.asserted.relatively_minimal && f.fiber_genus >= 2 && f.base_genus >= 1 =>
        {
            return Some(MinimalityBasis::StipsiczRule);
        }
        _ => {}
    }
    if f.asserted.minimal {
        return Some(MinimalityBasis::Declared);
    }
    None
}

/// The full invariant report of a fibration.
pub struct InvariantReport {
    pub euler: i64,
    pub signature: i64,
    pub h1: AbelianGroup,
    pub b1: i64,
    pub b2: i64,
    pub vanishing_cycles: i64,
    pub fiber_h1_map: Option<IntMatrix>,
    pub minimality_basis: Option<MinimalityBasis>,
}

pub fn invariant_report(f: &Fibration) -> Result<InvariantReport, FibrationError> {
    let euler = euler_characteristic(f);
    let sigma = signature(f)?;
    let (h1, fiber_map) = match &f.body {
        Body::Explicit(_) => {
            let data = h1_total_space(f)?;
            (data.group, Some(data.fiber_map))
        }
        Body::Opaque(d) => (d.h1.clone(), None),
    };
    let b1 = h1.rank() as i64;
    let b2 = euler - 2 + 2 * b1;
    Ok(InvariantReport {
        euler,
        signature: sigma,
        h1,
        b1,
        b2,
        vanishing_cycles: f.vanishing_cycle_count(),
        fiber_h1_map: fiber_map,
        minimality_basis: minimality_basis(f),
    })
}
