//! Randomized property checks of the discrete operator, shared by the test
//! suites and the `selftest` command.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assembly::{GammaMode, ObstacleOperator, ProblemData};
use crate::fespace::FeSpace;
use crate::mesh::Point;
use crate::quadrature::quad_rule;

/// Outcome of a randomized check.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub name: &'static str,
    pub trials: usize,
    pub failures: usize,
    /// Largest observed violation measure (check-specific, relative where applicable).
    pub worst: f64,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.trials > 0
    }
}

impl std::fmt::Display for CheckReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}: {} trials, {} failures, worst {:.3e}",
            self.name, self.trials, self.failures, self.worst
        )
    }
}

fn pos(x: f64) -> f64 {
    x.max(0.0)
}

fn random_scalar(rng: &mut ChaCha8Rng) -> f64 {
    match rng.random_range(0..6) {
        0 => 0.0,
        1 => rng.random_range(-1.0..1.0),
        2 => rng.random_range(-1e-8..1e-8),
        3 => rng.random_range(-1e8..1e8),
        4 => {
            let e: i32 = rng.random_range(-300..300);
            let s = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            s * rng.random_range(1.0..10.0) * 10f64.powi(e)
        }
        _ => rng.random_range(-1e3f64..1e3).round(),
    }
}

/// `([a]₊ - [b]₊)² ≤ ([a]₊ - [b]₊)(a - b)` and `|[a]₊ - [b]₊| ≤ |a - b|`,
/// evaluated in floating point without tolerance.
pub fn scalar_monotonicity(pairs: usize, seed: u64) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let a = random_scalar(&mut rng);
        let b = if rng.random_bool(0.05) { a } else { random_scalar(&mut rng) };
        let d = pos(a) - pos(b);
        let lhs = d * d;
        let rhs = d * (a - b);
        let ok1 = lhs <= rhs;
        let ok2 = d.abs() <= (a - b).abs();
        if !(ok1 && ok2) {
            failures += 1;
            worst = worst.max((lhs - rhs).max(d.abs() - (a - b).abs()));
        }
    }
    CheckReport {
        name: "scalar monotonicity",
        trials: pairs,
        failures,
        worst,
    }
}

/// Random coefficient vector with the Dirichlet entries of `base` kept.
fn random_like(space: &FeSpace, base: &[f64], scale: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    base.iter()
        .zip(space.dirichlet_mask())
        .map(|(&b, &c)| if c { b } else { scale * rng.random_range(-1.0..1.0) })
        .collect()
}

fn random_direction(space: &FeSpace, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let zero = vec![0.0; space.n_dofs()];
    random_like(space, &zero, 1.0, rng)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `(R(u₁) - R(u₂))·(u₁ - u₂) ≥ -1e-12 ‖u₁ - u₂‖²` for random pairs sharing
/// the Dirichlet values of the data.
pub fn discrete_monotonicity(data: &ProblemData, space: &FeSpace, pairs: usize, seed: u64) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let op = ObstacleOperator::new(space, data);
    let mut base = vec![0.0; space.n_dofs()];
    space.impose_dirichlet(&mut base, |p| (data.g)(p));
    let mut failures = 0;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..pairs {
        let scale = 10f64.powf(rng.random_range(-2.0..1.0));
        let u1 = random_like(space, &base, scale, &mut rng);
        let u2 = random_like(space, &base, scale, &mut rng);
        let (r1, r2) = (op.residual(&u1), op.residual(&u2));
        let diff: Vec<f64> = u1.iter().zip(&u2).map(|(a, b)| a - b).collect();
        let dr: Vec<f64> = r1.iter().zip(r2.iter()).map(|(a, b)| a - b).collect();
        let q = dot(&dr, &diff);
        let n2 = dot(&diff, &diff);
        let margin = -q / n2;
        worst = worst.max(margin);
        if q < -1e-12 * n2 {
            failures += 1;
        }
    }
    CheckReport {
        name: "discrete monotonicity",
        trials: pairs,
        failures,
        worst,
    }
}

/// Finite-difference directional derivative of the residual against the
/// Jacobian for random `(u, w)` whose perturbation keeps every quadrature
/// point on the same side of the kink.
pub fn jacobian_consistency(data: &ProblemData, space: &FeSpace, configs: usize, seed: u64) -> CheckReport {
    const EPS: f64 = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let op = ObstacleOperator::new(space, data);
    let mut base = vec![0.0; space.n_dofs()];
    space.impose_dirichlet(&mut base, |p| (data.g)(p));
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    let mut trials = 0;
    let mut attempts = 0;
    while trials < configs && attempts < 100 * configs {
        attempts += 1;
        let u = random_like(space, &base, 10f64.powf(rng.random_range(-2.0..1.0)), &mut rng);
        let w = random_direction(space, &mut rng);
        let up: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a + EPS * b).collect();
        if op.min_kink_distance(&u) < 1e-4 || op.active_set(&u) != op.active_set(&up) {
            continue;
        }
        trials += 1;
        let (r0, r1) = (op.residual(&u), op.residual(&up));
        let jw = op.jacobian(&u).mul_vec(&w);
        let err = r1
            .iter()
            .zip(r0.iter())
            .zip(&jw)
            .map(|((a, b), j)| ((a - b) / EPS - j).powi(2))
            .sum::<f64>()
            .sqrt();
        let rel = err / dot(&jw, &jw).sqrt();
        worst = worst.max(rel);
        if !(rel <= 1e-5) {
            failures += 1;
        }
    }
    CheckReport {
        name: "jacobian finite differences",
        trials,
        failures,
        worst,
    }
}

/// Central difference of the discrete functional against `R(u)·w`.
pub fn functional_gradient(data: &ProblemData, space: &FeSpace, configs: usize, seed: u64) -> CheckReport {
    const EPS: f64 = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let op = ObstacleOperator::new(space, data);
    let mut base = vec![0.0; space.n_dofs()];
    space.impose_dirichlet(&mut base, |p| (data.g)(p));
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    let mut trials = 0;
    let mut attempts = 0;
    while trials < configs && attempts < 100 * configs {
        attempts += 1;
        let u = random_like(space, &base, 10f64.powf(rng.random_range(-2.0..1.0)), &mut rng);
        let w = random_direction(space, &mut rng);
        let up: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a + EPS * b).collect();
        let um: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a - EPS * b).collect();
        let act = op.active_set(&u);
        if op.min_kink_distance(&u) < 1e-4 || op.active_set(&up) != act || op.active_set(&um) != act {
            continue;
        }
        trials += 1;
        let fd = (op.functional(&up) - op.functional(&um)) / (2.0 * EPS);
        let exact = dot(&op.residual(&u), &w);
        let rel = (fd - exact).abs() / exact.abs();
        worst = worst.max(rel);
        if !(rel <= 1e-6) {
            failures += 1;
        }
    }
    CheckReport {
        name: "functional gradient",
        trials,
        failures,
        worst,
    }
}

/// Value, gradient and Laplacian of the six quadratic Lagrange functions at
/// a physical point, built from barycentric coordinates and their gradients.
fn p2_shapes(p: [Point; 3], x: Point) -> [(f64, [f64; 2], f64); 6] {
    let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
    let grad_l: [[f64; 2]; 3] = std::array::from_fn(|i| {
        let (a, b) = (p[(i + 1) % 3], p[(i + 2) % 3]);
        [(a[1] - b[1]) / det, (b[0] - a[0]) / det]
    });
    // λ_i is affine and vanishes on the edge opposite vertex i
    let lam: [f64; 3] = std::array::from_fn(|i| {
        let a = p[(i + 1) % 3];
        grad_l[i][0] * (x[0] - a[0]) + grad_l[i][1] * (x[1] - a[1])
    });
    let dotg = |a: usize, b: usize| grad_l[a][0] * grad_l[b][0] + grad_l[a][1] * grad_l[b][1];
    let mut out = [(0.0, [0.0; 2], 0.0); 6];
    for i in 0..3 {
        let c = 4.0 * lam[i] - 1.0;
        out[i] = (
            lam[i] * (2.0 * lam[i] - 1.0),
            [c * grad_l[i][0], c * grad_l[i][1]],
            4.0 * dotg(i, i),
        );
    }
    for (k, (a, b)) in [(0, 1), (1, 2), (2, 0)].into_iter().enumerate() {
        out[3 + k] = (
            4.0 * lam[a] * lam[b],
            [
                4.0 * (lam[a] * grad_l[b][0] + lam[b] * grad_l[a][0]),
                4.0 * (lam[a] * grad_l[b][1] + lam[b] * grad_l[a][1]),
            ],
            8.0 * dotg(a, b),
        );
    }
    out
}

/// `A_h(u; v) - (f, v)` evaluated point by point without the assembly code.
pub fn reference_form(data: &ProblemData, space: &FeSpace, u: &[f64], v: &[f64]) -> f64 {
    let mesh = space.mesh();
    let rule = quad_rule(6).expect("degree 6 is available");
    let nno = mesh.n_vertices() as f64;
    let mut total = 0.0;
    for t in 0..mesh.n_cells() {
        let c = mesh.cells()[t];
        let p = c.map(|i| mesh.vertices()[i]);
        let gamma = match data.gamma_mode {
            GammaMode::Global => data.gamma0 / nno,
            GammaMode::Local => {
                let len = |a: Point, b: Point| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
                data.gamma0 * len(p[0], p[1]).max(len(p[1], p[2])).max(len(p[2], p[0])).powi(2)
            }
        };
        let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1])).abs();
        let dofs = space.cell_dofs(t);
        for (q, b) in rule.points.iter().enumerate() {
            let x = [
                b[0] * p[0][0] + b[1] * p[1][0] + b[2] * p[2][0],
                b[0] * p[0][1] + b[1] * p[1][1] + b[2] * p[2][1],
            ];
            let shapes = p2_shapes(p, x);
            let (mut uv, mut ug, mut ul) = (0.0, [0.0; 2], 0.0);
            let (mut vv, mut vg, mut vl) = (0.0, [0.0; 2], 0.0);
            for (i, s) in shapes.iter().enumerate() {
                let (cu, cv) = (u[dofs[i]], v[dofs[i]]);
                uv += cu * s.0;
                ug[0] += cu * s.1[0];
                ug[1] += cu * s.1[1];
                ul += cu * s.2;
                vv += cv * s.0;
                vg[0] += cv * s.1[0];
                vg[1] += cv * s.1[1];
                vl += cv * s.2;
            }
            let f = (data.f)(x);
            let shifted = (data.psi)(x) - gamma * f;
            let pu = uv + gamma * ul;
            let pv = vv + gamma * vl;
            let integrand = ug[0] * vg[0] + ug[1] * vg[1]
                - pos(shifted - pu) / gamma * pv
                - gamma * (ul + f) * vl
                - f * vv;
            total += 2.0 * area * rule.weights[q] * integrand;
        }
    }
    total
}

/// Residual assembly against [`reference_form`] for random `u` and test
/// vectors vanishing on the Dirichlet nodes.
pub fn oracle_equivalence(data: &ProblemData, space: &FeSpace, configs: usize, seed: u64) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let op = ObstacleOperator::new(space, data);
    let mut base = vec![0.0; space.n_dofs()];
    space.impose_dirichlet(&mut base, |p| (data.g)(p));
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..configs {
        let u = random_like(space, &base, 10f64.powf(rng.random_range(-2.0..1.0)), &mut rng);
        let v = random_direction(space, &mut rng);
        let assembled = dot(&op.residual(&u), &v);
        let reference = reference_form(data, space, &u, &v);
        let rel = (assembled - reference).abs() / reference.abs().max(assembled.abs());
        worst = worst.max(rel);
        if !(rel <= 1e-12) {
            failures += 1;
        }
    }
    CheckReport {
        name: "oracle equivalence",
        trials: configs,
        failures,
        worst,
    }
}
