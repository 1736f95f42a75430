use hybridsim::hilbert::{HilbertLayout, QOperator};
use hybridsim::lindblad::{evolve, steady_state, EvolveOptions, LindbladModel};
use hybridsim::states::{DensityMatrix, Factor};
use std::time::Instant;

fn quadratic_model(nm: usize, nc: usize) -> (HilbertLayout, LindbladModel) {
    let g = 1.00531e5; // 2pi*16 kHz
    let kappa = 3.8450e4;
    let omega = 2.0106e6; // 2pi*320 kHz
    let gamma = 20.106;
    let n_th = 2.0;
    let layout = HilbertLayout::new(&[("mech", nm), ("cav", nc)]).unwrap();
    let a = QOperator::destroy(&layout, "cav").unwrap();
    let b = QOperator::destroy(&layout, "mech").unwrap();
    let na = QOperator::number(&layout, "cav").unwrap();
    let nb = QOperator::number(&layout, "mech").unwrap();
    let xa = &a + &a.adjoint();
    let xb = &b + &b.adjoint();
    let model = LindbladModel::new(&layout)
        .add_hamiltonian(na, omega).unwrap()
        .add_hamiltonian(nb.clone(), omega).unwrap()
        .add_hamiltonian(&xa * &xb, g).unwrap()
        .add_collapse(a.clone(), kappa).unwrap()
        .add_collapse(b.clone(), gamma * (n_th + 1.0)).unwrap()
        .add_collapse(b.adjoint(), gamma * n_th).unwrap();
    (layout, model)
}

#[test]
fn bench_evolve() {
    for (nm, nc) in [(18usize, 9usize)] {
        let (layout, model) = quadratic_model(nm, nc);
        let rho0 = DensityMatrix::thermal(&layout, "mech", 2.0).unwrap();
        let nb = QOperator::number(&layout, "mech").unwrap();
        let times: Vec<f64> = (0..=50).map(|i| i as f64 * (20e-6 / 50.0)).collect();
        let mut opts = EvolveOptions::default();
        opts.ode.rtol = 1e-7;
        opts.ode.atol = 1e-12;
        let t0 = Instant::now();
        let res = evolve(&model, &rho0, &times, &[("n_b".into(), nb)], &opts).unwrap();
        let dt = t0.elapsed().as_secs_f64();
        println!(
            "evolve dim={} over 20us: {:.2}s steps={} rejected={} (200us extrapolation ~{:.0}s)",
            layout.total_dim(), dt, res.stats.ode.steps_accepted, res.stats.ode.steps_rejected, dt * 10.0
        );
    }
}

#[test]
fn bench_steady() {
    for n in [4usize, 5, 6] {
        let (layout, model) = quadratic_model(n, n);
        let t0 = Instant::now();
        let rho = steady_state(&model).unwrap();
        let nb = QOperator::number(&layout, "mech").unwrap();
        let v = rho.expect_re(&nb).unwrap();
        println!("steady dim={} ({}^2 Liouvillian): {:.2}s  n_b={:.6e}", layout.total_dim(), layout.total_dim()*layout.total_dim(), t0.elapsed().as_secs_f64(), v);
    }
}
