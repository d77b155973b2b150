use momentlab::calabi::*;
use momentlab::grid::{Field, Grid};
use std::time::Instant;

fn main() {
    let g = Grid::torus2();
    let theta = VolumeSpec::cosine_modes(g, &[(1, 1, 0.3)]).unwrap();
    let dt = stability_dt(g, &theta);

    // time the pieces
    let phi = Field::from_fn(g, |x| 0.01 * (2.0 * std::f64::consts::PI * x[0]).cos());
    let pot = KahlerPotential::new(phi).unwrap();
    let state = FlowState::initial(pot.clone(), &theta).unwrap();

    let t0 = Instant::now();
    let reps = 20000;
    let mut acc = 0.0;
    for _ in 0..reps {
        let rho = ma_density(&pot).unwrap();
        acc += rho.data()[0];
    }
    println!("ma_density: {:.1}us (acc {acc:.1})", t0.elapsed().as_secs_f64() / reps as f64 * 1e6);

    let t0 = Instant::now();
    let reps = 5000;
    let mut s = state.clone();
    for _ in 0..reps {
        s = flow_step(&s, &theta, dt).unwrap();
    }
    println!("flow_step: {:.1}us", t0.elapsed().as_secs_f64() / reps as f64 * 1e6);

    let t0 = Instant::now();
    let mut state = FlowState::initial(KahlerPotential::flat(g), &theta).unwrap();
    let mut steps = 0usize;
    while state.residual >= 1e-8 {
        state = flow_step(&state, &theta, dt).unwrap();
        steps += 1;
    }
    let elapsed = t0.elapsed().as_secs_f64();
    println!("steps = {steps}, wall = {elapsed:.2}s, per-step = {:.1}us", elapsed / steps as f64 * 1e6);
}
