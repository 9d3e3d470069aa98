//! The generalized Binet closed form `U_n = c1 (-lambda3)^n + c2 lambda2^n + c3 lambda3^n`
//! and the explicit inverse of the root matrix that yields its coefficients.

use serde::Serialize;

use crate::numerics::{approx_eq, Backend, Scalar, Tolerance};
use crate::recurrence::DegenerateRoots;

/// Coefficients of the closed form, in root order `(-lambda3, lambda2, lambda3)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinetCoefficients {
    pub c1: Scalar,
    pub c2: Scalar,
    pub c3: Scalar,
}

/// A 3x3 grid of scalars (the root matrix or its inverse).
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix {
    pub rows: [[Scalar; 3]; 3],
}

impl CoefficientMatrix {
    pub fn mul_vec(&self, v: &[Scalar; 3]) -> [Scalar; 3] {
        let dot = |row: &[Scalar; 3]| &row[0] * &v[0] + &row[1] * &v[1] + &row[2] * &v[2];
        [dot(&self.rows[0]), dot(&self.rows[1]), dot(&self.rows[2])]
    }

    pub fn mul_mat(&self, other: &CoefficientMatrix) -> CoefficientMatrix {
        let rows = std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                let mut acc = &self.rows[i][0] * &other.rows[0][j];
                for k in 1..3 {
                    acc = acc + &self.rows[i][k] * &other.rows[k][j];
                }
                acc
            })
        });
        CoefficientMatrix { rows }
    }

    pub fn identity(backend: Backend) -> CoefficientMatrix {
        let e = |i: usize, j: usize| {
            if i == j {
                Scalar::one(backend)
            } else {
                Scalar::zero(backend)
            }
        };
        CoefficientMatrix {
            rows: [
                [e(0, 0), e(0, 1), e(0, 2)],
                [e(1, 0), e(1, 1), e(1, 2)],
                [e(2, 0), e(2, 1), e(2, 2)],
            ],
        }
    }
}

/// The matrix A relating Binet coefficients to initial conditions,
/// rows `(1,1,1)`, `(-l3, l2, l3)`, `(l3^2, l2^2, l3^2)`.
pub fn coefficient_matrix(roots: &DegenerateRoots) -> CoefficientMatrix {
    let l2 = roots.lambda2();
    let l3 = roots.lambda3();
    let one = Scalar::one(roots.backend());
    CoefficientMatrix {
        rows: [
            [one.clone(), one.clone(), one],
            [-l3, l2.clone(), l3.clone()],
            [l3.square(), l2.square(), l3.square()],
        ],
    }
}

/// A^{-1} in closed form. Entries (with l2, l3 the roots):
///
/// ```text
/// [ l2/(2(l2+l3))   -1/(2 l3)   1/(2 l3^2 + 2 l2 l3) ]
/// [ l3^2/(l3^2-l2^2)    0       1/(l2^2 - l3^2)      ]
/// [ l2/(2(l2-l3))    1/(2 l3)   1/(2 l3^2 - 2 l2 l3) ]
/// ```
pub fn invert_coefficient_matrix(roots: &DegenerateRoots) -> CoefficientMatrix {
    let l2 = roots.lambda2();
    let l3 = roots.lambda3();
    let one = Scalar::one(roots.backend());
    let two = Scalar::from_int(2, roots.backend());
    let l2sq = l2.square();
    let l3sq = l3.square();
    CoefficientMatrix {
        rows: [
            [
                l2 / &(&two * &(l2 + l3)),
                -&(&one / &(&two * l3)),
                &one / &(&(&two * &l3sq) + &(&(&two * l2) * l3)),
            ],
            [
                &l3sq / &(&l3sq - &l2sq),
                Scalar::zero(roots.backend()),
                &one / &(&l2sq - &l3sq),
            ],
            [
                l2 / &(&two * &(l2 - l3)),
                &one / &(&two * l3),
                &one / &(&(&two * &l3sq) - &(&(&two * l2) * l3)),
            ],
        ],
    }
}

/// The two aggregates the limits are built from:
/// `c1 + c3 = (-l2^2 u0 + u2) / (l3^2 - l2^2)` and
/// `c3 - c1 = (l3^2 (-l2 u0 + u1) + l2 (-l2 u1 + u2)) / (l3^3 - l3 l2^2)`.
pub fn coefficient_aggregates(
    roots: &DegenerateRoots,
    u0: &Scalar,
    u1: &Scalar,
    u2: &Scalar,
) -> (Scalar, Scalar) {
    let l2 = roots.lambda2();
    let l3 = roots.lambda3();
    let l2sq = l2.square();
    let l3sq = l3.square();
    let sum = &(&-&(&l2sq * u0) + u2) / &(&l3sq - &l2sq);
    let diff_num = &(&l3sq * &(&-&(l2 * u0) + u1)) + &(l2 * &(&-&(l2 * u1) + u2));
    let diff_den = &l3.pow(3) - &(l3 * &l2sq);
    let diff = &diff_num / &diff_den;
    (sum, diff)
}

/// `c = A^{-1} u`, cross-checked against the closed-form aggregates.
pub fn solve_coefficients(
    roots: &DegenerateRoots,
    u0: &Scalar,
    u1: &Scalar,
    u2: &Scalar,
) -> BinetCoefficients {
    let inv = invert_coefficient_matrix(roots);
    let [c1, c2, c3] = inv.mul_vec(&[u0.clone(), u1.clone(), u2.clone()]);

    let (sum, diff) = coefficient_aggregates(roots, u0, u1, u2);
    let tol = match roots.backend() {
        Backend::Exact => Tolerance::exact(),
        Backend::Float => Tolerance::default(),
    };
    assert!(
        approx_eq(&(&c1 + &c3), &sum, tol).unwrap(),
        "aggregate c1+c3 disagrees with solved coefficients"
    );
    assert!(
        approx_eq(&(&c3 - &c1), &diff, tol).unwrap(),
        "aggregate c3-c1 disagrees with solved coefficients"
    );

    BinetCoefficients { c1, c2, c3 }
}

/// Evaluates `c1 (-l3)^n + c2 l2^n + c3 l3^n`.
pub fn binet_eval(roots: &DegenerateRoots, c: &BinetCoefficients, n: usize) -> Scalar {
    let l3n = roots.lambda3().pow(n as u32);
    let minus_l3n = roots.lambda1().pow(n as u32);
    let l2n = roots.lambda2().pow(n as u32);
    &(&c.c1 * &minus_l3n) + &(&(&c.c2 * &l2n) + &(&c.c3 * &l3n))
}
