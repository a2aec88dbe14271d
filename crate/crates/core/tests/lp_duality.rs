//! Strong duality and determinism of the LP backends on random small LPs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use corrclust::lp::{solve_with, Backend, LpConfig, LpModel, LpStatus, Relation};

/// `min c.x` s.t. `A x >= b`, `G x <= h`, `x >= 0`, feasible at a random
/// point and bounded because `c > 0`.
struct Primal {
    c: Vec<f64>,
    ge: Vec<(Vec<f64>, f64)>,
    le: Vec<(Vec<f64>, f64)>,
}

fn random_primal(rng: &mut ChaCha8Rng) -> Primal {
    let n = rng.random_range(2..7);
    let x0: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0)).collect();
    let row = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..n).map(|_| if rng.random_bool(0.7) { rng.random_range(-1.0..3.0) } else { 0.0 }).collect()
    };
    let dot = |a: &[f64]| a.iter().zip(&x0).map(|(p, q)| p * q).sum::<f64>();
    let ge = (0..rng.random_range(1..6))
        .map(|_| {
            let a = row(rng);
            let b = dot(&a) - rng.random_range(0.0..1.0);
            (a, b)
        })
        .collect();
    let le = (0..rng.random_range(0..4))
        .map(|_| {
            let g = row(rng);
            let h = dot(&g) + rng.random_range(0.0..1.0);
            (g, h)
        })
        .collect();
    Primal { c: (0..n).map(|_| rng.random_range(0.1..2.0)).collect(), ge, le }
}

fn sparse(a: &[f64]) -> Vec<(usize, f64)> {
    a.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, v)| (i, *v)).collect()
}

fn primal_model(p: &Primal) -> LpModel {
    let mut m = LpModel::new();
    for &c in &p.c {
        m.add_var(c, 0.0, f64::INFINITY);
    }
    for (a, b) in &p.ge {
        m.add_constraint(sparse(a), Relation::Ge, *b);
    }
    for (g, h) in &p.le {
        m.add_constraint(sparse(g), Relation::Le, *h);
    }
    m
}

/// Dual `max b.u - h.v` s.t. `A^T u - G^T v <= c`, `u, v >= 0`, written as
/// a minimization of the negated objective.
fn dual_model(p: &Primal) -> LpModel {
    let mut m = LpModel::new();
    let u: Vec<usize> = p.ge.iter().map(|(_, b)| m.add_var(-b, 0.0, f64::INFINITY)).collect();
    let v: Vec<usize> = p.le.iter().map(|(_, h)| m.add_var(*h, 0.0, f64::INFINITY)).collect();
    for (j, &c) in p.c.iter().enumerate() {
        let mut row: Vec<(usize, f64)> = Vec::new();
        for (i, (a, _)) in p.ge.iter().enumerate() {
            if a[j] != 0.0 {
                row.push((u[i], a[j]));
            }
        }
        for (i, (g, _)) in p.le.iter().enumerate() {
            if g[j] != 0.0 {
                row.push((v[i], -g[j]));
            }
        }
        m.add_constraint(row, Relation::Le, c);
    }
    m
}

fn backends() -> Vec<Backend> {
    let mut b = vec![Backend::Dense, Backend::Sparse];
    if cfg!(feature = "highs") {
        b.push(Backend::Highs);
    }
    b
}

#[test]
fn primal_and_dual_optima_coincide() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..60 {
        let p = random_primal(&mut rng);
        for backend in backends() {
            let cfg = LpConfig { backend, ..LpConfig::default() };
            let primal = solve_with(&primal_model(&p), &cfg).unwrap();
            let dual = solve_with(&dual_model(&p), &cfg).unwrap();
            assert_eq!(primal.status, LpStatus::Optimal, "{backend:?}");
            assert_eq!(dual.status, LpStatus::Optimal, "{backend:?}");
            assert!(
                (primal.objective + dual.objective).abs() <= 1e-6,
                "{backend:?}: primal {} dual {}",
                primal.objective,
                -dual.objective
            );
            assert!(primal_model(&p).max_violation(&primal.values) <= 1e-7);
        }
    }
}

#[test]
fn backends_agree_on_the_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..30 {
        let m = primal_model(&random_primal(&mut rng));
        let values: Vec<f64> = backends()
            .into_iter()
            .map(|backend| solve_with(&m, &LpConfig { backend, ..LpConfig::default() }).unwrap().objective)
            .collect();
        for v in &values {
            assert!((v - values[0]).abs() <= 1e-6, "{values:?}");
        }
    }
}

#[test]
fn repeated_solves_are_identical() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..20 {
        let m = primal_model(&random_primal(&mut rng));
        for backend in backends() {
            let cfg = LpConfig { backend, ..LpConfig::default() };
            let a = solve_with(&m, &cfg).unwrap();
            let b = solve_with(&m, &cfg).unwrap();
            assert_eq!(a, b, "{backend:?}");
        }
    }
}
