//! Symmetric positive-weight quadrature on the reference triangle
//! (0,0), (1,0), (0,1) and Gauss-Legendre rules on edges.

use crate::error::{Error, Result};

/// Points in barycentric coordinates `(λ0, λ1, λ2)` with weights summing to
/// the reference area 1/2.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Integrates `f(ξ, η)` over the reference triangle.
    pub fn integrate(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(p[1], p[2]))
            .sum()
    }
}

// (a, a, 1-2a) orbits of size 3 and (a, b, 1-a-b) orbits of size 6, weights
// normalized to total 1 (Dunavant).
const ORBIT3_D2: &[(f64, f64)] = &[(1.0 / 6.0, 1.0 / 3.0)];
const ORBIT3_D4: &[(f64, f64)] = &[
    (0.445948490915965, 0.223381589678011),
    (0.091576213509771, 0.109951743655322),
];
const ORBIT3_D5: &[(f64, f64)] = &[
    (0.470142064105115, 0.132394152788506),
    (0.101286507323456, 0.125939180544827),
];
const ORBIT3_D6: &[(f64, f64)] = &[
    (0.249286745170910, 0.116786275726379),
    (0.063089014491502, 0.050844906370207),
];
const ORBIT6_D6: &[(f64, f64, f64)] = &[(0.053145049844817, 0.310352451033784, 0.082851075618374)];

fn build(degree: usize, centroid: Option<f64>, orbit3: &[(f64, f64)], orbit6: &[(f64, f64, f64)]) -> QuadratureRule {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    if let Some(w) = centroid {
        points.push([1.0 / 3.0; 3]);
        weights.push(w);
    }
    for &(a, w) in orbit3 {
        let c = 1.0 - 2.0 * a;
        for p in [[a, a, c], [a, c, a], [c, a, a]] {
            points.push(p);
            weights.push(w);
        }
    }
    for &(a, b, w) in orbit6 {
        let c = 1.0 - a - b;
        for p in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
            points.push(p);
            weights.push(w);
        }
    }
    for w in &mut weights {
        *w *= 0.5;
    }
    QuadratureRule {
        points,
        weights,
        degree,
    }
}

/// Smallest tabulated rule exact for all polynomials of total degree `min_degree`.
pub fn quad_rule(min_degree: usize) -> Result<QuadratureRule> {
    Ok(match min_degree {
        0 | 1 => build(1, Some(1.0), &[], &[]),
        2 => build(2, None, ORBIT3_D2, &[]),
        // the 4-point degree-3 rule has a negative weight
        3 | 4 => build(4, None, ORBIT3_D4, &[]),
        5 => build(5, Some(0.225), ORBIT3_D5, &[]),
        6 => build(6, None, ORBIT3_D6, ORBIT6_D6),
        d => return Err(Error::UnsupportedQuadratureDegree(d)),
    })
}

/// Three-point Gauss-Legendre rule on [0, 1] (exact to degree 5).
pub fn edge_gauss3() -> [(f64, f64); 3] {
    let s = 0.5 * (3.0f64 / 5.0).sqrt();
    [(0.5 - s, 5.0 / 18.0), (0.5, 8.0 / 18.0), (0.5 + s, 5.0 / 18.0)]
}

#[cfg(test)]
mod tests {
    use super::*;

    // ∫ over the reference triangle of ξ^a η^b = a! b! / (a + b + 2)!
    fn monomial_exact(a: u32, b: u32) -> f64 {
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        fact(a) * fact(b) / fact(a + b + 2)
    }

    #[test]
    fn exactness_up_to_degree() {
        for d in 0..=6 {
            let rule = quad_rule(d).unwrap();
            assert!(rule.degree >= d);
            assert!(rule.weights.iter().all(|&w| w > 0.0));
            assert!((rule.weights.iter().sum::<f64>() - 0.5).abs() < 1e-14);
            for total in 0..=rule.degree as u32 {
                for a in 0..=total {
                    let b = total - a;
                    let q = rule.integrate(|x, y| x.powi(a as i32) * y.powi(b as i32));
                    let exact = monomial_exact(a, b);
                    assert!((q - exact).abs() <= 1e-13 * exact.max(1e-3), "deg {d}: x^{a} y^{b}: {q} vs {exact}");
                }
            }
        }
    }

    #[test]
    fn named_integrals() {
        let rule = quad_rule(6).unwrap();
        assert!((rule.integrate(|_, _| 1.0) - 0.5).abs() < 1e-15);
        assert!((rule.integrate(|x, _| x) - 1.0 / 6.0).abs() < 1e-14);
        assert!((rule.integrate(|x, y| x * x * y * y) - 1.0 / 180.0).abs() < 1e-14);
    }

    #[test]
    fn unsupported_degree() {
        assert!(matches!(quad_rule(7), Err(Error::UnsupportedQuadratureDegree(7))));
    }

    #[test]
    fn edge_rule_degree_five() {
        for p in 0..=5 {
            let q: f64 = edge_gauss3().iter().map(|(t, w)| w * t.powi(p)).sum();
            assert!((q - 1.0 / (p as f64 + 1.0)).abs() < 1e-15);
        }
    }
}
