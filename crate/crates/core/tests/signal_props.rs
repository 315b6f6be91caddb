use proptest::prelude::*;
use xwct_core::signal::{synthesize, ComponentSpec};

fn coeffs() -> impl Strategy<Value = [f64; 4]> {
    // keep the IF inside (0, 64) Hz on [0, 2) s
    (-1.0f64..1.0, 15.0f64..30.0, -3.0f64..3.0, -0.5f64..0.5).prop_map(|(a, b, c, d)| [a, b, c, d])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn finite_differences_match_truth(c in coeffs()) {
        let dt = 1.0 / 128.0;
        let spec = ComponentSpec::polynomial(c);
        let x = synthesize(std::slice::from_ref(&spec), 256, dt).unwrap();
        let truth = &x.truth.as_ref().unwrap()[0];
        for m in 1..255 {
            let t = m as f64 * dt;
            let (pm, p0, pp) = (spec.phase.phase(t - dt), spec.phase.phase(t), spec.phase.phase(t + dt));
            let f1 = (pp - pm) / (2.0 * dt);
            let f2 = (pp - 2.0 * p0 + pm) / (dt * dt);
            let (if_, cr) = (truth.inst_freq[m], truth.chirp_rate[m]);
            prop_assert!((f1 - if_).abs() <= 10.0 * dt * dt * (1.0 + if_.abs()));
            prop_assert!((f2 - cr).abs() <= 10.0 * dt * dt * (1.0 + cr.abs()) + 1e-6);
        }
    }

    #[test]
    fn negated_phase_conjugates(c in coeffs(), c2 in coeffs()) {
        let specs = [ComponentSpec::polynomial(c), ComponentSpec::polynomial(c2)];
        let neg: Vec<ComponentSpec> = specs
            .iter()
            .map(|s| ComponentSpec { phase: s.phase.negated(), ..*s })
            .collect();
        let dt = 1.0 / 128.0;
        let x = synthesize(&specs, 128, dt).unwrap();
        // negated IFs are outside (0, Nyquist), so sample the specs directly
        for (m, v) in x.samples.iter().enumerate() {
            let t = m as f64 * dt;
            let w: num_complex::Complex64 = neg.iter().map(|s| s.sample(t)).sum();
            prop_assert!((v.conj() - w).norm() <= 1e-12);
        }
    }
}
