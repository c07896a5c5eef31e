//! Closed-form eigenvalues of small real symmetric matrices.

use std::f64::consts::PI;

pub type Vec3 = [f64; 3];
pub type Sym3 = [[f64; 3]; 3];

pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// u^T M v
pub fn quad(m: &Sym3, u: &Vec3, v: &Vec3) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            acc += u[i] * m[i][j] * v[j];
        }
    }
    acc
}

/// Two unit vectors completing `n` (assumed unit) to a right-handed frame.
pub fn orthonormal_complement(n: &Vec3) -> (Vec3, Vec3) {
    // Seed with the axis least aligned with n.
    let abs = [n[0].abs(), n[1].abs(), n[2].abs()];
    let seed = if abs[0] <= abs[1] && abs[0] <= abs[2] {
        [1.0, 0.0, 0.0]
    } else if abs[1] <= abs[2] {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let e1 = cross(n, &seed);
    let len = norm(&e1);
    let e1 = [e1[0] / len, e1[1] / len, e1[2] / len];
    let e2 = cross(n, &e1);
    (e1, e2)
}

/// Smaller eigenvalue of [[a, b], [b, c]].
pub fn sym2_min_eigenvalue(a: f64, b: f64, c: f64) -> f64 {
    let mean = 0.5 * (a + c);
    let half_diff = 0.5 * (a - c);
    mean - half_diff.hypot(b)
}

/// Eigenvalues of a real symmetric 3x3 matrix in ascending order
/// (trigonometric form of Cardano's solution).
pub fn sym3_eigenvalues(m: &Sym3) -> [f64; 3] {
    let p1 = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
    let q = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
    if p1 == 0.0 {
        let mut d = [m[0][0], m[1][1], m[2][2]];
        d.sort_by(f64::total_cmp);
        return d;
    }
    let p2 = (m[0][0] - q).powi(2) + (m[1][1] - q).powi(2) + (m[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    // B = (M - qI) / p
    let mut b = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            b[i][j] = (m[i][j] - if i == j { q } else { 0.0 }) / p;
        }
    }
    let det_b = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
        - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
        + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    let r = (0.5 * det_b).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let largest = q + 2.0 * p * phi.cos();
    let smallest = q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
    let middle = 3.0 * q - largest - smallest;
    [smallest, middle, largest]
}

pub fn sym3_min_eigenvalue(m: &Sym3) -> f64 {
    sym3_eigenvalues(m)[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent check: bisection on the characteristic polynomial.
    fn char_poly(m: &Sym3, x: f64) -> f64 {
        let a = [
            [m[0][0] - x, m[0][1], m[0][2]],
            [m[1][0], m[1][1] - x, m[1][2]],
            [m[2][0], m[2][1], m[2][2] - x],
        ];
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    }

    #[test]
    fn diagonal_matrix() {
        let m = [[3.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 2.0]];
        assert_eq!(sym3_eigenvalues(&m), [-1.0, 2.0, 3.0]);
    }

    #[test]
    fn known_spectrum() {
        // [[2,1,0],[1,2,0],[0,0,5]] has eigenvalues 1, 3, 5.
        let m = [[2.0, 1.0, 0.0], [1.0, 2.0, 0.0], [0.0, 0.0, 5.0]];
        let e = sym3_eigenvalues(&m);
        for (got, want) in e.iter().zip([1.0, 3.0, 5.0]) {
            assert!((got - want).abs() < 1e-14, "{got} vs {want}");
        }
    }

    #[test]
    fn sym2_matches_quadratic_formula() {
        let (a, b, c): (f64, f64, f64) = (1.5, -0.8, 1.0);
        let disc = ((a + c) * (a + c) - 4.0 * (a * c - b * b)).sqrt();
        assert!((sym2_min_eigenvalue(a, b, c) - 0.5 * (a + c - disc)).abs() < 1e-15);
    }

    #[test]
    fn complement_is_orthonormal() {
        let n = [0.6, 0.0, -0.8];
        let (e1, e2) = orthonormal_complement(&n);
        assert!(dot(&n, &e1).abs() < 1e-15);
        assert!(dot(&n, &e2).abs() < 1e-15);
        assert!(dot(&e1, &e2).abs() < 1e-15);
        assert!((norm(&e1) - 1.0).abs() < 1e-15);
        assert!((norm(&e2) - 1.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn eigenvalues_are_roots(vals in proptest::array::uniform6(-5.0f64..5.0)) {
            let m = [
                [vals[0], vals[3], vals[4]],
                [vals[3], vals[1], vals[5]],
                [vals[4], vals[5], vals[2]],
            ];
            let e = sym3_eigenvalues(&m);
            prop_assert!(e[0] <= e[1] + 1e-12 && e[1] <= e[2] + 1e-12);
            let trace = vals[0] + vals[1] + vals[2];
            prop_assert!((e[0] + e[1] + e[2] - trace).abs() < 1e-10);
            // Gershgorin-bounded bracket around the smallest root.
            let lo = -20.0;
            let mut a = lo;
            let mut b = 0.5 * (e[0] + e[1]);
            // With a simple smallest root the char poly changes sign once on [lo, b].
            if (e[1] - e[0]).abs() > 1e-6 {
                let fa = char_poly(&m, a);
                prop_assert!(fa * char_poly(&m, b) <= 0.0);
                for _ in 0..200 {
                    let mid = 0.5 * (a + b);
                    if char_poly(&m, mid) * fa > 0.0 { a = mid } else { b = mid }
                }
                prop_assert!((0.5 * (a + b) - e[0]).abs() < 1e-8);
            }
        }
    }
}
