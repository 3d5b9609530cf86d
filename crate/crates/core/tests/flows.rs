mod common;

use common::*;
use hyperlap::synth::{connected_arcs, random_weights};
use hyperlap::{
    assemble, dense_laplacian, dirichlet_linear_solve, dirichlet_solve, eigendecomposition,
    neumann_flow, renormalized_flow, BoundaryCondition, Execution, FlowConfig, Hyperarc,
    OperatorParams, OrientedHypergraph, StepSize, VertexId, VertexState,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn oh1() -> OrientedHypergraph {
    OrientedHypergraph::new(4, vec![Hyperarc::new([0], [1, 2]), Hyperarc::new([1, 2], [3])], None).unwrap()
}

#[test]
fn path_renormalized_flow_finds_fiedler_vector() {
    let h = OrientedHypergraph::new(3, vec![Hyperarc::new([0], [1]), Hyperarc::new([1], [2])], None).unwrap();
    let sys = assemble(&h, OperatorParams::default()).unwrap();
    let mut cfg = FlowConfig::new(2.0);
    cfg.tolerance = 1e-10;
    let res = renormalized_flow(&sys, &VertexState(vec![0.3, -0.9, 0.5]), &cfg).unwrap();
    assert!(res.converged);
    // path Laplacian eigenvector for λ = 1 is (1, 0, −1)/√2
    let v = [1.0 / 2f64.sqrt(), 0.0, -1.0 / 2f64.sqrt()];
    let cos: f64 = res.final_state.iter().zip(v).map(|(a, b)| a * b).sum();
    assert!(cos.abs() >= 0.999, "{cos}");
    assert!((sys.rayleigh_quotient(&res.final_state, 2.0).unwrap() - 1.0).abs() < 1e-8);
}

#[test]
fn oh1_rayleigh_quotient_reaches_second_eigenvalue() {
    let h = oh1();
    let sys = assemble(&h, OperatorParams::default()).unwrap();
    let eig = eigendecomposition(&dense_laplacian(&sys).unwrap()).unwrap();
    let mut cfg = FlowConfig::new(2.0);
    cfg.tolerance = 1e-10;
    let res = renormalized_flow(&sys, &VertexState(vec![1.0, 2.0, 3.0, 4.0]), &cfg).unwrap();
    let rq = sys.rayleigh_quotient(&res.final_state, 2.0).unwrap();
    assert!((rq - eig.values[1]).abs() < 1e-4, "{rq} vs {}", eig.values[1]);
}

#[test]
fn star_dirichlet_is_determined_only_up_to_follower_mean() {
    // leader 0 with five followers, plus 1 → 6 → 5
    let h = OrientedHypergraph::new(
        7,
        vec![Hyperarc::new([0], [1, 2, 3, 4, 5]), Hyperarc::new([1], [6]), Hyperarc::new([6], [5])],
        None,
    )
    .unwrap();
    let sys = assemble(&h, OperatorParams::default()).unwrap();
    let bc = BoundaryCondition::new(vec![(VertexId(0), 1.0), (VertexId(6), -1.0)]).unwrap();
    // followers 2, 3, 4 only enter through the star's mean
    assert_eq!(
        dirichlet_linear_solve(&dense_laplacian(&sys).unwrap(), &bc),
        Err(hyperlap::Error::SingularSystem)
    );
    let mut cfg = FlowConfig::new(2.0);
    cfg.tolerance = 1e-10;
    let res = dirichlet_solve(&sys, &VertexState::zeros(7), &bc, &cfg).unwrap();
    assert!(res.converged);
    let f = &res.final_state;
    assert_eq!((f[0], f[6]), (1.0, -1.0));
    assert!(f[2] == f[3] && f[3] == f[4]);
    let grad = sys.gradient(f).unwrap();
    assert!(grad.norm_inf() < 1e-8, "{grad:?}");
    assert!((f[1..6].iter().sum::<f64>() / 5.0 - 1.0).abs() < 1e-8);
}

#[test]
fn neumann_flow_conserves_weighted_mean_with_weights() {
    let mut r = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..5 {
        let (h, e) = connected_conditioned(&mut r, 40, 20);
        let sys = assemble(&h, e).unwrap();
        let f0 = random_state(&mut r, 40);
        let mut cfg = FlowConfig::new(2.0);
        cfg.tolerance = 1e-10;
        let res = neumann_flow(&sys, &f0, &cfg).unwrap();
        let m0 = sys.weighted_mean(&f0);
        assert!(res.converged);
        assert!((sys.weighted_mean(&res.final_state) - m0).abs() < 1e-10);
        assert!(res.final_state.iter().all(|x| (x - m0).abs() < 1e-6));
    }
}

#[test]
fn p_flows_converge_and_conserve() {
    let mut r = ChaCha8Rng::seed_from_u64(8);
    for p in [1.5, 3.0] {
        let (h, e) = connected_conditioned(&mut r, 15, 5);
        let sys = assemble(&h, e).unwrap();
        let f0 = random_state(&mut r, 15);
        let mut cfg = FlowConfig::new(p);
        cfg.max_iterations = 200_000;
        let res = neumann_flow(&sys, &f0, &cfg).unwrap();
        let m0 = sys.weighted_mean(&f0);
        assert!((sys.weighted_mean(&res.final_state) - m0).abs() < 1e-9, "p = {p}");
        assert!(sys.energy(&res.final_state, p).unwrap() < sys.energy(&f0, p).unwrap());
    }
}

#[test]
fn flows_are_deterministic() {
    let mut r = ChaCha8Rng::seed_from_u64(5);
    let (h, e) = connected_conditioned(&mut r, 30, 30);
    let sys = assemble(&h, e).unwrap();
    let f0 = random_state(&mut r, 30);
    let cfg = FlowConfig::new(2.0);
    let a = renormalized_flow(&sys, &f0, &cfg).unwrap();
    let b = renormalized_flow(&sys, &f0, &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn parallel_and_sequential_are_bitwise_identical() {
    let mut r = ChaCha8Rng::seed_from_u64(99);
    let n = 3000;
    let arcs = connected_arcs(&mut r, n, 4000, 5);
    let w = random_weights(&mut r, n, arcs.len(), 0.5, 2.0);
    let h = OrientedHypergraph::new(n, arcs, Some(w)).unwrap();
    let params = random_exponents(&mut r, -1.0, 1.0);
    let par = assemble(&h, params).unwrap().with_execution(Execution::Parallel);
    let seq = assemble(&h, params).unwrap().with_execution(Execution::Sequential);
    assert!(par.nnz() >= hyperlap::operators::PARALLEL_MIN_NNZ);
    let f = random_state(&mut r, n);
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&par.gradient(&f).unwrap()), bits(&seq.gradient(&f).unwrap()));
    for p in [1.5, 2.0, 3.0] {
        assert_eq!(bits(&par.p_laplacian(&f, p, 1e-8).unwrap()), bits(&seq.p_laplacian(&f, p, 1e-8).unwrap()));
    }
    let mut cfg = FlowConfig::new(2.0);
    cfg.max_iterations = 50;
    cfg.tau = StepSize::Fixed(1e-3);
    let a = neumann_flow(&par, &f, &cfg).unwrap();
    let b = neumann_flow(&seq, &f, &cfg).unwrap();
    assert_eq!(bits(&a.final_state), bits(&b.final_state));
}

#[test]
fn dirichlet_rejects_bad_boundaries() {
    let h = oh1();
    let sys = assemble(&h, OperatorParams::default()).unwrap();
    let all = BoundaryCondition::new((0..4).map(|v| (VertexId(v), 0.0)).collect()).unwrap();
    let cfg = FlowConfig::new(2.0);
    assert!(matches!(
        dirichlet_solve(&sys, &VertexState::zeros(4), &all, &cfg),
        Err(hyperlap::Error::EmptyInterior)
    ));
    assert!(matches!(
        BoundaryCondition::new(vec![(VertexId(1), 0.0), (VertexId(1), 1.0)]),
        Err(hyperlap::Error::DuplicateBoundaryVertex { vertex: 1 })
    ));
    let far = BoundaryCondition::new(vec![(VertexId(9), 0.0)]).unwrap();
    assert!(dirichlet_solve(&sys, &VertexState::zeros(4), &far, &cfg).is_err());
}

#[test]
fn dirichlet_random_instances_match_oracle() {
    let mut r = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..5 {
        let n = r.gen_range(6..20);
        let (h, e) = connected_conditioned(&mut r, n, n / 2);
        let sys = assemble(&h, e).unwrap();
        let bc = BoundaryCondition::new(vec![(VertexId(0), 2.0), (VertexId(n - 1), -0.5)]).unwrap();
        let exact = dirichlet_linear_solve(&dense_laplacian(&sys).unwrap(), &bc).unwrap();
        let mut cfg = FlowConfig::new(2.0);
        cfg.tolerance = 1e-10;
        let res = dirichlet_solve(&sys, &VertexState::zeros(n), &bc, &cfg).unwrap();
        assert!(max_abs_diff(&res.final_state, &exact) < 1e-6);
    }
}
