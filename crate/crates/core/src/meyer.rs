//! The Meyer cocycle on Sp(2g, Z) and the signature of explicit
//! factorizations, computed over exact rationals.
//!
//! tau(A, B) is the signature of the symmetrized pairing
//! <(x1,y1),(x2,y2)> = (x1+y1)^T J (I-B) y2 restricted to
//! V = { (x, y) : (A^{-1}-I)x + (B-I)y = 0 }. Signatures are small
//! integers and must be exact, so the quadratic form is diagonalized by
//! congruence over Q, never numerically.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::linalg::{smith_normal_form, IntMatrix};
use crate::monodromy::{intersection_form, SpElement, TwistLetter};

/// Signature (positive minus negative inertia) of a symmetric integer
/// matrix, by congruence diagonalization over the rationals.
pub fn symmetric_signature(m: &IntMatrix) -> i64 {
    let n = m.rows();
    assert_eq!(n, m.cols());
    debug_assert_eq!(m, &m.transpose(), "signature of non-symmetric matrix");
    let mut a: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| BigRational::from(m.get(i, j).clone()))
                .collect()
        })
        .collect();
    let mut pos = 0i64;
    let mut neg = 0i64;
    let mut t = 0;
    while t < n {
        if a[t][t].is_zero() {
            // bring a nonzero diagonal entry to position t, or synthesize
            // one from an off-diagonal entry
            if let Some(j) = (t + 1..n).find(|&j| !a[j][j].is_zero()) {
                congruence_swap(&mut a, t, j);
            } else if let Some((i, j)) = find_offdiag(&a, t) {
                // R_i += R_j and C_i += C_j puts 2*a[i][j] on the diagonal
                congruence_add(&mut a, i, j);
                congruence_swap(&mut a, t, i);
            } else {
                break; // trailing block is identically zero
            }
        }
        let pivot = a[t][t].clone();
        if pivot.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        for i in t + 1..n {
            if a[i][t].is_zero() {
                continue;
            }
            let f = &a[i][t] / &pivot;
            for j in t..n {
                let delta = &f * &a[t][j];
                a[i][j] -= delta;
            }
            for j in t..n {
                let delta = &f * &a[j][t];
                a[j][i] -= delta;
            }
        }
        t += 1;
    }
    pos - neg
}

fn congruence_swap(a: &mut [Vec<BigRational>], i: usize, j: usize) {
    if i == j {
        return;
    }
    a.swap(i, j);
    for row in a.iter_mut() {
        row.swap(i, j);
    }
}

fn congruence_add(a: &mut [Vec<BigRational>], i: usize, j: usize) {
    for k in 0..a.len() {
        let v = a[j][k].clone();
        a[i][k] += v;
    }
    for row in a.iter_mut() {
        let v = row[j].clone();
        row[i] += v;
    }
}

fn find_offdiag(a: &[Vec<BigRational>], t: usize) -> Option<(usize, usize)> {
    let n = a.len();
    for i in t..n {
        for j in i + 1..n {
            if !a[i][j].is_zero() {
                return Some((i, j));
            }
        }
    }
    None
}

/// Meyer cocycle value tau(A, B).
pub fn meyer_tau(a: &SpElement, b: &SpElement) -> i64 {
    assert_eq!(a.genus(), b.genus(), "tau requires equal genus");
    let g = a.genus();
    let n = 2 * g;
    let id = IntMatrix::identity(n);
    let a_inv = a.inverse();
    let am = a_inv.matrix().sub(&id); // A^{-1} - I
    let bm = b.matrix().sub(&id); // B - I

    // integral kernel basis of the constraint (A^{-1}-I)x + (B-I)y = 0
    let constraint = am.hstack(&bm);
    let snf = smith_normal_form(&constraint);
    let kernel = snf.kernel_basis();
    if kernel.is_empty() {
        return 0;
    }
    let k = IntMatrix::from_columns(2 * n, &kernel);

    // f(u, w) = (x1+y1)^T P y2; as a 4g x 4g matrix F = [[0, P], [0, P]]
    // in the (x, y) block coordinates. The sign of P (here J(B-I)) is the
    // one convention the cocycle identity cannot see; it is pinned by the
    // elliptic-word oracle sigma(E(n)) = -8n under our J orientation.
    let j = intersection_form(g);
    let p = j.mul(&bm);
    let f = IntMatrix::from_fn(2 * n, 2 * n, |r, c| {
        if c < n {
            BigInt::zero()
        } else {
            p.get(r % n, c - n).clone()
        }
    });
    // twice the symmetrization; positive scaling preserves the signature
    let sym = f.add(&f.transpose());
    let gram = k.transpose().mul(&sym).mul(&k);
    symmetric_signature(&gram)
}

/// The letter sequence of a factorization: each handle contributes
/// alpha, beta, alpha^{-1}, beta^{-1} as group elements, then the
/// vanishing-cycle twists follow in order.
pub fn flatten_letters(
    f: &crate::monodromy::MonodromyFactorization,
) -> Result<Vec<SpElement>, crate::error::MonodromyError> {
    let g = f.fiber_genus;
    let mut letters = Vec::new();
    for handle in &f.handles {
        let a = crate::monodromy::word_matrix(&handle.alpha, g)?;
        let b = crate::monodromy::word_matrix(&handle.beta, g)?;
        letters.push(a.clone());
        letters.push(b.clone());
        letters.push(a.inverse());
        letters.push(b.inverse());
    }
    for cycle in &f.vanishing_cycles {
        letters.push(cycle.matrix());
    }
    Ok(letters)
}

/// Signature of the fibered 4-manifold with the given explicit
/// factorization: minus the Meyer sum over the flattened letter sequence,
/// minus one per separating vanishing cycle.
pub fn factorization_signature(
    f: &crate::monodromy::MonodromyFactorization,
) -> Result<i64, crate::error::MonodromyError> {
    let letters = flatten_letters(f)?;
    let mut sigma = 0i64;
    if !letters.is_empty() {
        let mut prefix = letters[0].clone();
        for next in &letters[1..] {
            // tau vanishes when either argument is the identity
            if !prefix.is_identity() && !next.is_identity() {
                sigma -= meyer_tau(&prefix, next);
            }
            prefix = prefix.compose(next);
        }
    }
    let separating = f
        .vanishing_cycles
        .iter()
        .filter(|c| c.class.is_separating())
        .count() as i64;
    Ok(sigma - separating)
}

/// The elliptic word on the torus: (t_a t_b) repeated 6n times, the
/// monodromy factorization of the elliptic surface E(n) over the sphere.
pub fn elliptic_word(n: usize) -> Vec<TwistLetter> {
    let a = crate::monodromy::CurveClass::standard_a(1, 1);
    let b = crate::monodromy::CurveClass::standard_b(1, 1);
    let mut word = Vec::with_capacity(12 * n);
    for _ in 0..6 * n {
        word.push(TwistLetter::new(a.clone(), 1));
        word.push(TwistLetter::new(b.clone(), 1));
    }
    word
}
