use std::f64::consts::PI;

use weakpde::experiments::{
    run_ensemble, BasisSpec, DataSource, ExperimentConfig, TermSpec, TruthTerm,
};
use weakpde::ks::SimulationConfig;

const LENGTH: f64 = 32.0 * PI;

fn modulated(label: &str, nu_x: u32, basis: BasisSpec) -> TermSpec {
    TermSpec {
        label: label.into(),
        prefactor: 1.0,
        power: 1,
        nu_x,
        nu_t: 0,
        basis: Some(basis),
    }
}

fn config(amplitude: f64) -> ExperimentConfig {
    let k = 2.0 * PI / LENGTH;
    let mut library = TermSpec::ks_library();
    library.push(modulated("sin*u_xxxx", 4, BasisSpec::SinX { freq: k }));
    library.push(modulated("cos*u_xxxx", 4, BasisSpec::CosX { freq: k }));
    library.push(modulated("sin*u_xx", 2, BasisSpec::SinX { freq: k }));
    let mut truth: Vec<TruthTerm> = ["u_t", "u*u_x", "u_xx", "u_xxxx"]
        .iter()
        .map(|t| TruthTerm { term: t.to_string(), value: 1.0 })
        .collect();
    truth.push(TruthTerm { term: "sin*u_xxxx".into(), value: amplitude });
    ExperimentConfig {
        data: DataSource {
            simulation: Some(SimulationConfig {
                n_x: 512,
                save_stride: 200,
                duration: 300.0,
                c4_modulation: amplitude,
                ..SimulationConfig::default()
            }),
            file: None,
        },
        stride_x: 1,
        stride_t: 1,
        sigma: 0.0,
        library,
        truth,
        ensemble_size: 4,
        ..ExperimentConfig::default()
    }
}

#[test]
fn recovers_modulated_hyperdiffusion() {
    let c = config(0.1);
    let r = run_ensemble(&c).unwrap();
    for t in &r.trials {
        let m = t.model.as_ref().unwrap();
        let labels: Vec<&str> = m.active_terms.iter().map(|&i| c.library[i].label.as_str()).collect();
        assert!(t.exact_support(), "trial {} kept {labels:?}", t.index);
        // the modulated part of ∂_x⁴ is stepped explicitly by the integrator,
        // so these data are less accurate than the constant-coefficient runs
        for e in &t.errors {
            assert!(e.delta_c < 1e-3, "{}: {}", c.library[e.term].label, e.delta_c);
        }
    }
}

#[test]
fn unmodulated_data_reject_modulation_terms() {
    let mut c = config(0.0);
    c.truth.retain(|t| t.term != "sin*u_xxxx");
    c.ensemble_size = 2;
    let r = run_ensemble(&c).unwrap();
    assert!(r.trials.iter().all(|t| t.exact_support()));
}
