//! Reference g²(τ) from direct integration of the optical Bloch equations.
//!
//! On resonance the real part of the coherence decouples, leaving
//!
//! ```text
//! ρee' = −γ₂ ρee − Ω y
//! y'   = Ω ρee − γ y − Ω/2          (y = Im ρeg)
//! ```
//!
//! Starting from the ground state (the state right after a detection), the
//! excited population normalized to its steady-state value is g²(τ).

use nalgebra::{Matrix2, Vector2};

use super::EmitterParams;
use crate::error::{Error, Result};

const MAX_STEPS: f64 = 1e9;

type State = [f64; 2];

struct Bloch {
    rabi: f64,
    decay: f64,
    dephasing: f64,
}

impl Bloch {
    #[inline]
    fn deriv(&self, s: &State) -> State {
        let [p, y] = *s;
        [
            -self.decay * p - self.rabi * y,
            self.rabi * p - self.dephasing * y - 0.5 * self.rabi,
        ]
    }

    #[inline]
    fn rk4(&self, s: &State, h: f64) -> State {
        let k1 = self.deriv(s);
        let s2 = [s[0] + 0.5 * h * k1[0], s[1] + 0.5 * h * k1[1]];
        let k2 = self.deriv(&s2);
        let s3 = [s[0] + 0.5 * h * k2[0], s[1] + 0.5 * h * k2[1]];
        let k3 = self.deriv(&s3);
        let s4 = [s[0] + h * k3[0], s[1] + h * k3[1]];
        let k4 = self.deriv(&s4);
        [
            s[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            s[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ]
    }
}

/// Steady-state excited population, from a linear solve of the Bloch
/// equations.
pub fn bloch_steady_state_population(params: &EmitterParams) -> Result<f64> {
    params.validate()?;
    let m = Matrix2::new(
        -params.decay_rate,
        -params.rabi_frequency,
        params.rabi_frequency,
        -params.dephasing_rate,
    );
    let rhs = Vector2::new(0.0, 0.5 * params.rabi_frequency);
    let x = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numerical("singular Bloch steady-state system".into()))?;
    Ok(x[0])
}

/// Integration step: a fraction of the shortest time scale in the problem.
pub(crate) fn bloch_step(params: &EmitterParams) -> f64 {
    let mut fastest = params.decay_rate.max(params.dephasing_rate);
    if params.rabi_frequency > 0.0 {
        fastest = fastest.max(params.rabi_frequency);
    }
    1.0 / (800.0 * fastest)
}

/// g²(τ) on `tau_grid` (seconds, sorted, nonnegative) by fixed-step RK4.
pub fn oracle_bloch_g2(params: &EmitterParams, tau_grid: &[f64]) -> Result<Vec<f64>> {
    params.validate()?;
    if tau_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::Validation("tau grid must be finite and nonnegative".into()));
    }
    if tau_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Validation("tau grid must be sorted".into()));
    }
    let steady = bloch_steady_state_population(params)?;
    if !(steady > 0.0) {
        return Err(Error::Numerical(
            "steady-state excited population is zero; g2 is undefined".into(),
        ));
    }
    let h_max = bloch_step(params);
    let t_end = tau_grid.last().copied().unwrap_or(0.0);
    if t_end / h_max > MAX_STEPS {
        return Err(Error::Numerical(format!(
            "step size {h_max:e} s underflows for delays up to {t_end:e} s"
        )));
    }

    let sys = Bloch {
        rabi: params.rabi_frequency,
        decay: params.decay_rate,
        dephasing: params.dephasing_rate,
    };
    let mut state: State = [0.0, 0.0];
    let mut t = 0.0;
    let mut out = Vec::with_capacity(tau_grid.len());
    for &target in tau_grid {
        let span = target - t;
        if span > 0.0 {
            let n = (span / h_max).ceil() as usize;
            let h = span / n as f64;
            for _ in 0..n {
                state = sys.rk4(&state, h);
            }
            t = target;
        }
        out.push(state[0] / steady);
    }
    Ok(out)
}
