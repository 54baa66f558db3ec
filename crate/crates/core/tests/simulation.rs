//! Simulated paths against the closed-form identities.

use levyme::mc::{Barrier, BarrierSpec, Estimate, Exit, Reflection, SimConfig, Simulator};
use levyme::{fixtures, fluct, LevyModel64, MeDist64, ScaleEval64};

/// Standard errors allowed between an estimate and its formula.
const BAND: f64 = 4.0;

fn config(seed: u64) -> SimConfig {
    SimConfig {
        paths: 4000,
        seed,
        ..SimConfig::default()
    }
}

fn check(name: &str, est: Estimate, want: f64) {
    assert!(
        est.agrees(want, BAND),
        "{name}: simulated {} ± {} vs {want}",
        est.value,
        est.se
    );
}

fn cases() -> Vec<(&'static str, ScaleEval64)> {
    vec![
        (
            "stable, worked example",
            ScaleEval64::new(LevyModel64::stable(1.5).unwrap(), fixtures::worked_example()).unwrap(),
        ),
        (
            "compound Poisson, erlang",
            ScaleEval64::new(fixtures::reference_cl(), MeDist64::erlang(2, 1.5).unwrap()).unwrap(),
        ),
        (
            "brownian, worked example",
            ScaleEval64::new(LevyModel64::brownian(1.0, 0.3).unwrap(), fixtures::worked_example()).unwrap(),
        ),
    ]
}

#[test]
fn exits_and_reflections() {
    let (x, a, theta) = (0.4, 1.0, 0.5);
    for (k, (name, ev)) in cases().into_iter().enumerate() {
        let spec = BarrierSpec {
            exits: vec![
                Barrier { upper: a - x, lower: -x },
                Barrier { upper: f64::INFINITY, lower: -x },
            ],
            reflections: vec![Reflection { start: x, level: a }],
        };
        let sim = Simulator::new(ev.model().clone(), config(k as u64))
            .unwrap()
            .simulate_paths(ev.horizon().unwrap(), &spec)
            .unwrap();
        let down = |i: usize| {
            sim.estimate(|p| match p.exits[i] {
                Exit::Down(v) => (theta * (x + v)).exp(),
                _ => 0.0,
            })
        };
        check(
            &format!("{name}: two-sided up"),
            sim.estimate(|p| f64::from(u8::from(p.exits[0] == Exit::Up))),
            fluct::p_two_sided_up(&ev, a - x, x).unwrap(),
        );
        check(&format!("{name}: two-sided down"), down(0), fluct::down_exit_two_sided(&ev, x, a, theta).unwrap());
        check(&format!("{name}: one-sided down"), down(1), fluct::down_exit_one_sided(&ev, x, theta).unwrap());
        check(
            &format!("{name}: reflected"),
            sim.estimate(|p| p.reflected[0].map_or(0.0, |r| (-theta * r).exp())),
            fluct::reflected_passage(&ev, x, a, theta).unwrap(),
        );
    }
}

#[test]
fn horizon_law_and_infimum_atom() {
    for (k, (name, ev)) in cases().into_iter().enumerate() {
        let h = ev.horizon().unwrap();
        let sim = Simulator::new(ev.model().clone(), config(10 + k as u64))
            .unwrap()
            .simulate_paths(h, &BarrierSpec::default())
            .unwrap();
        check(&format!("{name}: horizon mean"), sim.estimate(|p| p.horizon), h.mean().unwrap());
        check(&format!("{name}: horizon tail"), sim.estimate(|p| f64::from(u8::from(p.horizon > 0.7))), h.tail(0.7));
        if ev.drift_constant() > 0.0 {
            check(
                &format!("{name}: infimum atom"),
                sim.estimate(|p| f64::from(u8::from(p.inf == 0.0))),
                fluct::inf_atom(&ev).unwrap(),
            );
        }
    }
}

#[test]
fn observation_ruin_with_phase_type_gaps() {
    let gaps = MeDist64::erlang(2, 4.0).unwrap();
    for (k, model) in [fixtures::reference_cl(), LevyModel64::brownian(1.0, 0.5).unwrap()].into_iter().enumerate() {
        let ev = ScaleEval64::new(model.clone(), gaps.clone()).unwrap();
        let sim = Simulator::new(model, config(20 + k as u64)).unwrap();
        for x in [0.3, 1.0] {
            check(
                &format!("model {k}, x = {x}"),
                sim.observation_ruin(&gaps, x).unwrap(),
                fluct::ph_observation_ruin(&ev, x).unwrap(),
            );
        }
    }
}

#[test]
fn phase_at_passage_matches_phi() {
    let h = MeDist64::new(
        vec![0.6, 0.4],
        vec![vec![-3.0, 1.0], vec![0.5, -2.0]],
        vec![2.0, 1.5],
    )
    .unwrap();
    let ev = ScaleEval64::new(fixtures::reference_cl(), h.clone()).unwrap();
    let est = Simulator::new(ev.model().clone(), config(30)).unwrap().phase_tracked(&h).unwrap();
    let phi = ev.phi_matrix().unwrap().real_rows();
    for i in 0..2 {
        for j in 0..2 {
            let d = (est.generator[i][j] + phi[i][j]).abs();
            assert!(d <= BAND * est.se[i][j] + 1e-12, "({i},{j}): {} vs {}", est.generator[i][j], -phi[i][j]);
        }
    }
}

#[test]
fn fixed_seed_is_reproducible() {
    let ev = &cases()[0].1;
    let run = || {
        Simulator::new(ev.model().clone(), SimConfig { paths: 200, ..config(5) })
            .unwrap()
            .simulate_paths(ev.horizon().unwrap(), &BarrierSpec::default())
            .unwrap()
            .paths()
            .to_vec()
    };
    assert_eq!(run(), run());
}
