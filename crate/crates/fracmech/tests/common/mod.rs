//! Shared fixtures for integration tests: the demo model and a seeded
//! corpus of random polynomial linear-velocity models.

use std::collections::BTreeSet;

use fracmech::expr::{parse, Expr};
use fracmech::varprob::LinearVelocityLagrangian;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `L = q2 D^alpha q1 - (q1^2 + q2^2)/2`.
pub fn demo_model(alpha: f64) -> LinearVelocityLagrangian {
    let names: Vec<String> = vec!["q1".into(), "q2".into()];
    let scope: BTreeSet<String> = names.iter().cloned().collect();
    LinearVelocityLagrangian::new(
        names,
        alpha,
        vec![parse("q2", &scope).unwrap(), parse("0", &scope).unwrap()],
        parse("0.5*(q1^2 + q2^2)", &scope).unwrap(),
    )
    .unwrap()
}

/// Random polynomial over `names`: up to four terms, each a uniform
/// coefficient times a product of at most three variables.
pub fn random_poly(rng: &mut ChaCha8Rng, names: &[String]) -> Expr {
    let terms = rng.gen_range(1..=4);
    let mut acc = Expr::Const(0.0);
    for _ in 0..terms {
        let mut term = Expr::Const(rng.gen_range(-1.0..1.0));
        for _ in 0..rng.gen_range(0..=3usize) {
            let name = &names[rng.gen_range(0..names.len())];
            term = Expr::mul(term, Expr::Var(name.clone()));
        }
        acc = Expr::add(acc, term);
    }
    acc
}

/// Seeded corpus of models with one to three coordinates, polynomial
/// coefficients and potentials of degree at most three, and orders cycling
/// through 0.3, 0.5, 0.7.
pub fn model_corpus(count: usize, seed: u64) -> Vec<LinearVelocityLagrangian> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alphas = [0.3, 0.5, 0.7];
    (0..count)
        .map(|i| {
            let r = 1 + i % 3;
            let names: Vec<String> = (1..=r).map(|k| format!("q{k}")).collect();
            let coefficients = (0..r).map(|_| random_poly(&mut rng, &names)).collect();
            let potential = random_poly(&mut rng, &names);
            LinearVelocityLagrangian::new(names, alphas[i % alphas.len()], coefficients, potential)
                .unwrap()
        })
        .collect()
}
