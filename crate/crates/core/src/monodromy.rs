//! Curves on a closed genus-g surface, the integral symplectic
//! representation of Dehn twists, monodromy words, and homological
//! validity checking of factorizations.
//!
//! Convention, used bit-identically everywhere: H_1(Sigma_g) carries the
//! basis a_1, b_1, ..., a_g, b_g and the intersection form J is block
//! diagonal with per-handle blocks [[0, 1], [-1, 0]], so <a_i, b_i> = +1
//! and <x, y> = x^T J y.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::MonodromyError;
use crate::linalg::{is_primitive_vector, IntMatrix};

/// The standard intersection form on H_1(Sigma_g).
pub fn intersection_form(genus: usize) -> IntMatrix {
    let mut j = IntMatrix::zero(2 * genus, 2 * genus);
    for h in 0..genus {
        j.set(2 * h, 2 * h + 1, BigInt::one());
        j.set(2 * h + 1, 2 * h, -BigInt::one());
    }
    j
}

/// Algebraic intersection number <x, y> = x^T J y.
pub fn pairing(x: &[BigInt], y: &[BigInt]) -> BigInt {
    assert_eq!(x.len(), y.len());
    assert_eq!(x.len() % 2, 0);
    let mut acc = BigInt::zero();
    for h in 0..x.len() / 2 {
        acc += &x[2 * h] * &y[2 * h + 1] - &x[2 * h + 1] * &y[2 * h];
    }
    acc
}

/// Homology class of a simple closed curve on Sigma_g.
///
/// Separating curves are exactly the ones with zero class; non-separating
/// curves must be primitive. Geometric data beyond the class (isotopy type,
/// geometric intersection numbers) is out of scope and handled by asserted
/// metadata on fibrations.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CurveClass {
    genus: usize,
    klass: Vec<BigInt>,
    separating: bool,
}

impl CurveClass {
    pub fn new(genus: usize, klass: Vec<BigInt>, separating: bool) -> Result<Self, MonodromyError> {
        if klass.len() != 2 * genus {
            return Err(MonodromyError::ClassLength {
                expected: 2 * genus,
                found: klass.len(),
            });
        }
        let zero = klass.iter().all(|e| e.is_zero());
        if separating != zero {
            return Err(MonodromyError::SeparatingFlag(format!(
                "separating={} but class is {}",
                separating,
                if zero { "zero" } else { "nonzero" }
            )));
        }
        if !separating {
            match is_primitive_vector(&klass) {
                Ok(true) => {}
                Ok(false) => {
                    return Err(MonodromyError::NotPrimitive(format!("{:?}", klass)));
                }
                Err(_) => unreachable!("nonzero by the check above"),
            }
        }
        Ok(CurveClass {
            genus,
            klass,
            separating,
        })
    }

    /// A separating (homologically trivial) curve.
    pub fn separating(genus: usize) -> Self {
        CurveClass {
            genus,
            klass: vec![BigInt::zero(); 2 * genus],
            separating: true,
        }
    }

    /// The standard curve a_i (1-indexed handle).
    pub fn standard_a(genus: usize, handle: usize) -> Self {
        assert!(handle >= 1 && handle <= genus);
        let mut klass = vec![BigInt::zero(); 2 * genus];
        klass[2 * (handle - 1)] = BigInt::one();
        CurveClass {
            genus,
            klass,
            separating: false,
        }
    }

    /// The standard curve b_i (1-indexed handle).
    pub fn standard_b(genus: usize, handle: usize) -> Self {
        assert!(handle >= 1 && handle <= genus);
        let mut klass = vec![BigInt::zero(); 2 * genus];
        klass[2 * (handle - 1) + 1] = BigInt::one();
        CurveClass {
            genus,
            klass,
            separating: false,
        }
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn klass(&self) -> &[BigInt] {
        &self.klass
    }

    pub fn is_separating(&self) -> bool {
        self.separating
    }

    pub fn pairing_with(&self, other: &CurveClass) -> BigInt {
        pairing(&self.klass, &other.klass)
    }

    /// Pad the class into a larger surface: `offset` handles are prepended,
    /// the rest appended.
    pub fn embed(&self, new_genus: usize, handle_offset: usize) -> CurveClass {
        assert!(handle_offset + self.genus <= new_genus);
        let mut klass = vec![BigInt::zero(); 2 * new_genus];
        for (k, v) in self.klass.iter().enumerate() {
            klass[2 * handle_offset + k] = v.clone();
        }
        CurveClass {
            genus: new_genus,
            klass,
            separating: self.separating,
        }
    }
}

/// An element of Sp(2g, Z), checked against M^T J M = J on construction.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SpElement {
    genus: usize,
    matrix: IntMatrix,
}

impl SpElement {
    pub fn new(genus: usize, matrix: IntMatrix) -> Result<Self, MonodromyError> {
        if matrix.rows() != 2 * genus || matrix.cols() != 2 * genus {
            return Err(MonodromyError::NotSymplectic(genus));
        }
        let j = intersection_form(genus);
        if matrix.transpose().mul(&j).mul(&matrix) != j {
            return Err(MonodromyError::NotSymplectic(genus));
        }
        Ok(SpElement { genus, matrix })
    }

    pub fn identity(genus: usize) -> Self {
        SpElement {
            genus,
            matrix: IntMatrix::identity(2 * genus),
        }
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn is_identity(&self) -> bool {
        self.matrix.is_identity()
    }

    pub fn compose(&self, other: &SpElement) -> SpElement {
        assert_eq!(self.genus, other.genus);
        // identity checks are quadratic, products cubic
        if self.is_identity() {
            return other.clone();
        }
        if other.is_identity() {
            return self.clone();
        }
        SpElement {
            genus: self.genus,
            matrix: self.matrix.mul(&other.matrix),
        }
    }

    /// Inverse via A^{-1} = -J A^T J (valid exactly because A is symplectic
    /// and J^2 = -I in our convention).
    pub fn inverse(&self) -> SpElement {
        let j = intersection_form(self.genus);
        SpElement {
            genus: self.genus,
            matrix: j.mul(&self.matrix.transpose()).mul(&j).neg(),
        }
    }

    pub fn commutator(&self, other: &SpElement) -> SpElement {
        self.compose(other)
            .compose(&self.inverse())
            .compose(&other.inverse())
    }

    pub fn pow(&self, e: i64) -> SpElement {
        let base = if e < 0 { self.inverse() } else { self.clone() };
        let mut acc = SpElement::identity(self.genus);
        for _ in 0..e.unsigned_abs() {
            acc = acc.compose(&base);
        }
        acc
    }

    pub fn apply(&self, v: &[BigInt]) -> Vec<BigInt> {
        self.matrix.mul_vec(v)
    }
}

/// Homological action of the `power`-fold positive Dehn twist along `c`:
/// x |-> x + power * <x, c> * c. A separating curve acts trivially.
///
/// As a matrix this is I - power * c c^T J, which is symplectic for every
/// power because c c^T J is nilpotent of order two.
pub fn transvection_matrix(c: &CurveClass, power: i64) -> SpElement {
    let g = c.genus();
    let n = 2 * g;
    if c.is_separating() || power == 0 {
        return SpElement::identity(g);
    }
    let j = intersection_form(g);
    let p = BigInt::from(power);
    let mut m = IntMatrix::identity(n);
    // M = I - p * c * (c^T J); column k of c^T J is <., .> bookkeeping
    for row in 0..n {
        for col in 0..n {
            // (c c^T J)[row][col] = c[row] * (c^T J)[col] = c[row] * sum_k c[k] J[k][col]
            let mut dot = BigInt::zero();
            for k in 0..n {
                let jk = j.get(k, col);
                if !jk.is_zero() {
                    dot += &c.klass()[k] * jk;
                }
            }
            if !dot.is_zero() {
                let val = m.get(row, col) - &p * &c.klass()[row] * dot;
                m.set(row, col, val);
            }
        }
    }
    SpElement {
        genus: g,
        matrix: m,
    }
}

/// A twist letter: a curve class together with an integer twist power.
/// Vanishing-cycle letters always have power one; handle words may use
/// arbitrary powers.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TwistLetter {
    pub class: CurveClass,
    pub power: i64,
}

impl TwistLetter {
    pub fn new(class: CurveClass, power: i64) -> Self {
        TwistLetter { class, power }
    }

    pub fn matrix(&self) -> SpElement {
        transvection_matrix(&self.class, self.power)
    }
}

/// Evaluate a word of twist letters as the ordered product of their
/// matrices (left-to-right), so that concatenation of words corresponds to
/// multiplication of values. The empty word is the identity.
pub fn word_matrix(word: &[TwistLetter], genus: usize) -> Result<SpElement, MonodromyError> {
    let mut acc = SpElement::identity(genus);
    for letter in word {
        if letter.class.genus() != genus {
            return Err(MonodromyError::GenusMismatch {
                expected: genus,
                found: letter.class.genus(),
            });
        }
        acc = acc.compose(&letter.matrix());
    }
    Ok(acc)
}

/// One base handle: the pair of monodromy words (alpha_i, beta_i).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Handle {
    pub alpha: Vec<TwistLetter>,
    pub beta: Vec<TwistLetter>,
}

impl Handle {
    pub fn trivial() -> Self {
        Handle {
            alpha: Vec::new(),
            beta: Vec::new(),
        }
    }
}

/// The complete homological description of a fibration: base-handle
/// commutator words plus the ordered vanishing-cycle twists (empty for a
/// bundle).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MonodromyFactorization {
    pub fiber_genus: usize,
    pub base_genus: usize,
    pub handles: Vec<Handle>,
    pub vanishing_cycles: Vec<TwistLetter>,
}

impl MonodromyFactorization {
    pub fn letters(&self) -> impl Iterator<Item = &TwistLetter> {
        self.handles
            .iter()
            .flat_map(|h| h.alpha.iter().chain(h.beta.iter()))
            .chain(self.vanishing_cycles.iter())
    }
}

/// Outcome of the homological relation check.
///
/// A pass is necessary but not sufficient for mapping-class-group validity:
/// the representation to Sp(2g, Z) kills the Torelli group, so claims
/// beyond homology ride on the `mcg_valid` asserted flag.
#[derive(Clone, Debug)]
pub struct ValidityReport {
    pub valid: bool,
    /// ordered product rho(t_{c_k}) ... rho(t_{c_1}) over the vanishing cycles
    pub twist_product: SpElement,
    /// ordered product of the handle commutators [rho(alpha_i), rho(beta_i)]
    pub commutator_product: SpElement,
    /// for each handle, whether its commutator alone is the identity
    pub handle_commutator_trivial: Vec<bool>,
    /// first handle whose commutator is non-trivial, when the check fails
    pub offending_handle: Option<usize>,
}

/// Check the defining relation in Sp(2g, Z):
/// for a bundle, prod_i [rho(alpha_i), rho(beta_i)] = I;
/// for a Lefschetz fibration, rho(t_{c_k}) ... rho(t_{c_1}) equals that
/// commutator product.
pub fn verify_homological_relation(
    f: &MonodromyFactorization,
) -> Result<ValidityReport, MonodromyError> {
    let g = f.fiber_genus;
    let mut commutator_product = SpElement::identity(g);
    let mut handle_commutator_trivial = Vec::with_capacity(f.handles.len());
    for handle in &f.handles {
        let a = word_matrix(&handle.alpha, g)?;
        let b = word_matrix(&handle.beta, g)?;
        let c = a.commutator(&b);
        handle_commutator_trivial.push(c.is_identity());
        commutator_product = commutator_product.compose(&c);
    }
    // rho(t_{c_k}) ... rho(t_{c_1}): the reversed list under our
    // left-to-right product convention
    let reversed: Vec<TwistLetter> = f.vanishing_cycles.iter().rev().cloned().collect();
    let twist_product = word_matrix(&reversed, g)?;
    let valid = twist_product == commutator_product;
    let offending_handle = if valid {
        None
    } else {
        handle_commutator_trivial.iter().position(|t| !t)
    };
    Ok(ValidityReport {
        valid,
        twist_product,
        commutator_product,
        handle_commutator_trivial,
        offending_handle,
    })
}

/// Block-diagonal embedding Sp(2g) x Sp(2g') -> Sp(2(g+g')): the
/// homological shadow of joining fibers along sections.
pub fn embed_block_diagonal(a: &SpElement, b: &SpElement) -> SpElement {
    let g = a.genus() + b.genus();
    let na = 2 * a.genus();
    let m = IntMatrix::from_fn(2 * g, 2 * g, |i, j| {
        if i < na && j < na {
            a.matrix().get(i, j).clone()
        } else if i >= na && j >= na {
            b.matrix().get(i - na, j - na).clone()
        } else {
            BigInt::zero()
        }
    });
    SpElement {
        genus: g,
        matrix: m,
    }
}
