//! Multicomponent test signals with analytic IF and chirprate.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Phase law of one component, in cycles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhaseModel {
    /// φ(t) = c0 + c1 t + c2 t² + c3 t³
    Polynomial { coeffs: [f64; 4] },
    /// φ(t) = α t + s β sin(ω t)
    Sinusoidal {
        alpha: f64,
        beta: f64,
        omega: f64,
        sign: f64,
    },
}

impl PhaseModel {
    pub fn phase(&self, t: f64) -> f64 {
        match *self {
            PhaseModel::Polynomial { coeffs: c } => c[0] + t * (c[1] + t * (c[2] + t * c[3])),
            PhaseModel::Sinusoidal {
                alpha,
                beta,
                omega,
                sign,
            } => alpha * t + sign * beta * (omega * t).sin(),
        }
    }

    /// φ'(t) in Hz.
    pub fn inst_freq(&self, t: f64) -> f64 {
        match *self {
            PhaseModel::Polynomial { coeffs: c } => c[1] + t * (2.0 * c[2] + 3.0 * c[3] * t),
            PhaseModel::Sinusoidal {
                alpha,
                beta,
                omega,
                sign,
            } => alpha + sign * beta * omega * (omega * t).cos(),
        }
    }

    /// φ''(t) in Hz/s.
    pub fn chirp_rate(&self, t: f64) -> f64 {
        match *self {
            PhaseModel::Polynomial { coeffs: c } => 2.0 * c[2] + 6.0 * c[3] * t,
            PhaseModel::Sinusoidal { beta, omega, sign, .. } => -sign * beta * omega * omega * (omega * t).sin(),
        }
    }

    pub fn negated(&self) -> PhaseModel {
        match *self {
            PhaseModel::Polynomial { coeffs: c } => PhaseModel::Polynomial {
                coeffs: [-c[0], -c[1], -c[2], -c[3]],
            },
            PhaseModel::Sinusoidal {
                alpha,
                beta,
                omega,
                sign,
            } => PhaseModel::Sinusoidal {
                alpha: -alpha,
                beta,
                omega,
                sign: -sign,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentSpec {
    #[serde(default = "unit")]
    pub amplitude: f64,
    pub phase: PhaseModel,
}

fn unit() -> f64 {
    1.0
}

impl ComponentSpec {
    pub fn polynomial(coeffs: [f64; 4]) -> Self {
        ComponentSpec {
            amplitude: 1.0,
            phase: PhaseModel::Polynomial { coeffs },
        }
    }

    pub fn sinusoidal(alpha: f64, beta: f64, omega: f64, sign: f64) -> Self {
        ComponentSpec {
            amplitude: 1.0,
            phase: PhaseModel::Sinusoidal {
                alpha,
                beta,
                omega,
                sign,
            },
        }
    }

    pub fn sample(&self, t: f64) -> Complex64 {
        Complex64::from_polar(self.amplitude, 2.0 * PI * self.phase.phase(t))
    }
}

/// Ground truth for one component, sampled on the signal's time axis.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentTruth {
    pub inst_freq: Vec<f64>,
    pub chirp_rate: Vec<f64>,
    /// Noise-free component samples, when known.
    pub mode: Option<Vec<Complex64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    pub samples: Vec<Complex64>,
    pub dt: f64,
    pub t0: f64,
    pub truth: Option<Vec<ComponentTruth>>,
}

impl SampledSignal {
    pub fn new(samples: Vec<Complex64>, dt: f64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidSignal(format!(
                "need at least 2 samples, got {}",
                samples.len()
            )));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidSignal(format!("dt must be positive, got {dt}")));
        }
        Ok(SampledSignal {
            samples,
            dt,
            t0: 0.0,
            truth: None,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, n: usize) -> f64 {
        self.t0 + n as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|n| self.time(n)).collect()
    }

    pub fn component_count(&self) -> usize {
        self.truth.as_ref().map_or(0, |t| t.len())
    }
}

/// Sums the components on t_n = n·dt and fills the truth arrays.
pub fn synthesize(components: &[ComponentSpec], n: usize, dt: f64) -> Result<SampledSignal> {
    synthesize_with_limit(components, n, dt, 0.5 / dt)
}

/// As [`synthesize`], with IFs checked against `max_freq` instead of 1/(2dt).
pub fn synthesize_with_limit(components: &[ComponentSpec], n: usize, dt: f64, max_freq: f64) -> Result<SampledSignal> {
    if n < 2 {
        return Err(Error::InvalidSignal(format!("need at least 2 samples, got {n}")));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidSignal(format!("dt must be positive, got {dt}")));
    }
    let mut samples = vec![Complex64::new(0.0, 0.0); n];
    let mut truth = Vec::with_capacity(components.len());
    for (k, c) in components.iter().enumerate() {
        if !(c.amplitude > 0.0 && c.amplitude.is_finite()) {
            return Err(Error::InvalidSignal(format!(
                "component {}: amplitude must be positive",
                k + 1
            )));
        }
        let mut inst_freq = Vec::with_capacity(n);
        let mut chirp_rate = Vec::with_capacity(n);
        let mut mode = Vec::with_capacity(n);
        for (i, s) in samples.iter_mut().enumerate() {
            let t = i as f64 * dt;
            let f = c.phase.inst_freq(t);
            if !(f > 0.0) || f >= max_freq {
                return Err(Error::InvalidSignal(format!(
                    "component {}: IF {f} at t={t} outside (0, {max_freq})",
                    k + 1
                )));
            }
            let v = c.sample(t);
            *s += v;
            mode.push(v);
            inst_freq.push(f);
            chirp_rate.push(c.phase.chirp_rate(t));
        }
        truth.push(ComponentTruth {
            inst_freq,
            chirp_rate,
            mode: Some(mode),
        });
    }
    Ok(SampledSignal {
        samples,
        dt,
        t0: 0.0,
        truth: Some(truth),
    })
}

/// Component specs of the three reference examples.
pub fn example_components(id: u32) -> Result<Vec<ComponentSpec>> {
    match id {
        1 => Ok(vec![
            ComponentSpec::polynomial([0.0, 42.0, -2.0, 0.0]),
            ComponentSpec::polynomial([0.0, 10.0, 2.0, 0.0]),
        ]),
        // 3(t-2)^3 + 29t and -3(t-2)^3 + 47t expanded
        2 => Ok(vec![
            ComponentSpec::polynomial([-24.0, 65.0, -18.0, 3.0]),
            ComponentSpec::polynomial([24.0, 11.0, 18.0, -3.0]),
        ]),
        3 => Ok(vec![
            ComponentSpec::sinusoidal(41.0, 32.0 / PI, PI / 2.0, -1.0),
            ComponentSpec::sinusoidal(41.0, 32.0 / PI, PI / 2.0, 1.0),
        ]),
        _ => Err(Error::InvalidParameter(format!("unknown example id {id}"))),
    }
}

pub fn example_signal(id: u32) -> Result<SampledSignal> {
    let comps = example_components(id)?;
    let seconds = if id == 1 { 8 } else { 4 };
    // Example 2 starts at 65 Hz, just above the 64 Hz Nyquist limit, for its
    // first few samples; the reference signals are kept exactly as defined.
    synthesize_with_limit(&comps, seconds * 128, 1.0 / 128.0, f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_linear_chirp() {
        let s = synthesize(&[ComponentSpec::polynomial([0.0, 10.0, 2.0, 0.0])], 1024, 1.0 / 128.0).unwrap();
        assert_eq!(s.samples[0], Complex64::new(1.0, 0.0));
        let tr = &s.truth.as_ref().unwrap()[0];
        for n in [0, 100, 1023] {
            let t = n as f64 / 128.0;
            assert_abs_diff_eq!(tr.inst_freq[n], 10.0 + 4.0 * t, epsilon = 1e-12);
            assert_eq!(tr.chirp_rate[n], 4.0);
        }
    }

    #[test]
    fn example1_crossing() {
        let s = example_signal(1).unwrap();
        assert_eq!(s.len(), 1024);
        let tr = s.truth.unwrap();
        assert_abs_diff_eq!(tr[0].inst_freq[512], 26.0, epsilon = 1e-12);
        assert_abs_diff_eq!(tr[1].inst_freq[512], 26.0, epsilon = 1e-12);
        assert!(tr[0].chirp_rate.iter().all(|&c| c == -4.0));
    }

    #[test]
    fn example2_crossings() {
        let s = example_signal(2).unwrap();
        assert_eq!(s.len(), 512);
        let tr = s.truth.unwrap();
        for n in [128, 384] {
            assert_abs_diff_eq!(tr[0].inst_freq[n], 38.0, epsilon = 1e-9);
            assert_abs_diff_eq!(tr[1].inst_freq[n], 38.0, epsilon = 1e-9);
        }
        // expanded coefficients reproduce the shifted cubic
        let c = example_components(2).unwrap();
        for t in [0.0, 0.7, 2.5] {
            let want = 3.0 * (t - 2.0f64).powi(3) + 29.0 * t;
            assert_abs_diff_eq!(c[0].phase.phase(t), want, epsilon = 1e-12);
        }
    }

    #[test]
    fn example3_chirprates() {
        let s = example_signal(3).unwrap();
        let tr = s.truth.unwrap();
        assert_abs_diff_eq!(tr[0].chirp_rate[256], 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(tr[1].chirp_rate[256], 0.0, epsilon = 1e-9);
        for n in [10, 100, 300] {
            let t = n as f64 / 128.0;
            let want = -8.0 * PI * (PI * t / 2.0).sin();
            assert_abs_diff_eq!(tr[1].chirp_rate[n], want, epsilon = 1e-9);
            assert_abs_diff_eq!(tr[0].chirp_rate[n], -want, epsilon = 1e-9);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(example_signal(4).is_err());
        let neg = ComponentSpec::polynomial([0.0, 5.0, -2.0, 0.0]);
        assert!(synthesize(&[neg], 1024, 1.0 / 128.0).is_err());
        let alias = ComponentSpec::polynomial([0.0, 70.0, 0.0, 0.0]);
        assert!(synthesize(&[alias], 256, 1.0 / 128.0).is_err());
        assert!(synthesize(&[], 1, 1.0).is_err());
    }
}
