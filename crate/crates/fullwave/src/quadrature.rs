//! Simplex quadrature rules.
//!
//! Assembly uses the degree-4, 11-point tetrahedron rule (exact for P2×P2
//! mass terms with constant coefficients) and the degree-4, 6-point
//! triangle rule for antenna boundary terms. Error norms and spectral
//! probes use the degree-5, 14-point tetrahedron rule, whose weights are
//! all positive so pointwise bounds survive summation.
//!
//! Points are barycentric; weights sum to 1 and multiply the cell measure.

/// A quadrature rule on the reference tetrahedron.
#[derive(Debug, Clone)]
pub struct TetRule {
    /// Barycentric coordinates (λ0, λ1, λ2, λ3) of each point.
    pub points: Vec<[f64; 4]>,
    /// Weights, summing to 1.
    pub weights: Vec<f64>,
}

/// A quadrature rule on the reference triangle.
#[derive(Debug, Clone)]
pub struct TriRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

/// Degree-4, 11-point tetrahedron rule (Keast). One weight is negative.
pub fn tet_degree4() -> TetRule {
    let mut points = Vec::with_capacity(11);
    let mut weights = Vec::with_capacity(11);

    points.push([0.25; 4]);
    weights.push(-148.0 / 1875.0);

    let a = 11.0 / 14.0;
    let b = 1.0 / 14.0;
    for i in 0..4 {
        let mut p = [b; 4];
        p[i] = a;
        points.push(p);
        weights.push(343.0 / 7500.0);
    }

    let c = (1.0 + (5.0f64 / 14.0).sqrt()) / 4.0;
    let d = (1.0 - (5.0f64 / 14.0).sqrt()) / 4.0;
    for (i, j) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
        let mut p = [d; 4];
        p[i] = c;
        p[j] = c;
        points.push(p);
        weights.push(56.0 / 375.0);
    }

    TetRule { points, weights }
}

/// Degree-5, 14-point tetrahedron rule with positive weights.
pub fn tet_degree5() -> TetRule {
    let mut points = Vec::with_capacity(14);
    let mut weights = Vec::with_capacity(14);

    let sets: [(f64, f64); 2] = [
        (0.310_885_919_263_300_6, 0.112_687_925_718_015_9),
        (0.092_735_250_310_891_2, 0.073_493_043_116_361_9),
    ];
    for (b, w) in sets {
        let a = 1.0 - 3.0 * b;
        for i in 0..4 {
            let mut p = [b; 4];
            p[i] = a;
            points.push(p);
            weights.push(w);
        }
    }
    let a = 0.045_503_704_125_649_7;
    let b = 0.5 - a;
    for (i, j) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
        let mut p = [b; 4];
        p[i] = a;
        p[j] = a;
        points.push(p);
        weights.push(0.042_546_020_777_081_5);
    }

    TetRule { points, weights }
}

/// Degree-4, 6-point triangle rule (Dunavant), positive weights.
pub fn tri_degree4() -> TriRule {
    let mut points = Vec::with_capacity(6);
    let mut weights = Vec::with_capacity(6);
    let sets: [(f64, f64); 2] = [
        (0.445948490915965, 0.223381589678011),
        (0.091576213509771, 0.109951743655322),
    ];
    for (a, w) in sets {
        let b = 1.0 - 2.0 * a;
        for k in 0..3 {
            let mut p = [a; 3];
            p[k] = b;
            points.push(p);
            weights.push(w);
        }
    }
    TriRule { points, weights }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Exact ∫ λ0^a λ1^b λ2^c λ3^d over the unit-volume reference tet:
    /// a!b!c!d!·3!/(a+b+c+d+3)!.
    fn exact_tet_moment(e: [u32; 4]) -> f64 {
        fn fact(n: u32) -> f64 {
            (1..=n).map(|k| k as f64).product()
        }
        let s: u32 = e.iter().sum();
        fact(e[0]) * fact(e[1]) * fact(e[2]) * fact(e[3]) * 6.0 / fact(s + 3)
    }

    fn exact_tri_moment(e: [u32; 3]) -> f64 {
        fn fact(n: u32) -> f64 {
            (1..=n).map(|k| k as f64).product()
        }
        let s: u32 = e.iter().sum();
        fact(e[0]) * fact(e[1]) * fact(e[2]) * 2.0 / fact(s + 2)
    }

    fn check_tet_rule(rule: &TetRule, degree: u32) {
        assert_relative_eq!(rule.weights.iter().sum::<f64>(), 1.0, max_relative = 1e-14);
        for a in 0..=degree {
            for b in 0..=(degree - a) {
                for c in 0..=(degree - a - b) {
                    for d in 0..=(degree - a - b - c) {
                        let e = [a, b, c, d];
                        let approx: f64 = rule
                            .points
                            .iter()
                            .zip(&rule.weights)
                            .map(|(p, w)| {
                                w * p[0].powi(a as i32)
                                    * p[1].powi(b as i32)
                                    * p[2].powi(c as i32)
                                    * p[3].powi(d as i32)
                            })
                            .sum();
                        let exact = exact_tet_moment(e);
                        assert!(
                            (approx - exact).abs() <= 1e-12 * exact.abs().max(1.0),
                            "moment {e:?}: rule {approx} vs exact {exact}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn tet4_exact_to_degree_4() {
        check_tet_rule(&tet_degree4(), 4);
    }

    #[test]
    fn tet5_exact_to_degree_5() {
        let rule = tet_degree5();
        check_tet_rule(&rule, 5);
        assert!(rule.weights.iter().all(|&w| w > 0.0));
    }

    #[test]
    fn tri4_exact_to_degree_4() {
        let rule = tri_degree4();
        assert_relative_eq!(rule.weights.iter().sum::<f64>(), 1.0, max_relative = 1e-14);
        for a in 0..=4u32 {
            for b in 0..=(4 - a) {
                for c in 0..=(4 - a - b) {
                    let approx: f64 = rule
                        .points
                        .iter()
                        .zip(&rule.weights)
                        .map(|(p, w)| {
                            w * p[0].powi(a as i32) * p[1].powi(b as i32) * p[2].powi(c as i32)
                        })
                        .sum();
                    let exact = exact_tri_moment([a, b, c]);
                    assert!(
                        (approx - exact).abs() <= 1e-12 * exact.abs().max(1.0),
                        "moment {:?}: rule {approx} vs exact {exact}",
                        [a, b, c]
                    );
                }
            }
        }
    }
}
