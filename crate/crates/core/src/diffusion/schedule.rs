use super::DiffusionError;

pub const BASE_STEPS: usize = 1000;
pub const BETA_START: f64 = 1e-4;
pub const BETA_END: f64 = 2e-2;
pub const DEFAULT_STEPS: usize = 50;
/// Above this the subsampled indices stop being strictly increasing.
pub const MAX_STEPS: usize = 500;

/// `ᾱ_t` for `t = 0..=T`, subsampled from a linear-β base schedule, with the
/// per-step DDIM coefficients precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionSchedule {
    alpha_bar: Vec<f64>,
    /// `(a, b)` with `z_{t−1} = a·z_t + b·ε̂`, indexed by `t`.
    down: Vec<(f64, f64)>,
    /// `(a, b)` with `z_{t+1} = a·z_t + b·ε̂`, indexed by `t`.
    up: Vec<(f64, f64)>,
}

impl DiffusionSchedule {
    pub fn new(steps: usize) -> Result<Self, DiffusionError> {
        if steps == 0 || steps > MAX_STEPS {
            return Err(DiffusionError::InvalidSteps(steps));
        }
        let base = base_alpha_bar();
        let mut alpha_bar = Vec::with_capacity(steps + 1);
        alpha_bar.push(base[0]);
        for t in 1..=steps {
            alpha_bar.push(base[(t * BASE_STEPS).div_ceil(steps) - 1]);
        }
        Ok(DiffusionSchedule::from_alpha_bar(alpha_bar))
    }

    fn from_alpha_bar(alpha_bar: Vec<f64>) -> Self {
        let coeff = |from: f64, to: f64| {
            let a = (to / from).sqrt();
            let b = (1.0 - to).sqrt() - to.sqrt() * (1.0 - from).sqrt() / from.sqrt();
            (a, b)
        };
        let t_max = alpha_bar.len() - 1;
        let mut down = vec![(1.0, 0.0); t_max + 1];
        let mut up = vec![(1.0, 0.0); t_max + 1];
        for t in 1..=t_max {
            down[t] = coeff(alpha_bar[t], alpha_bar[t - 1]);
        }
        for t in 0..t_max {
            up[t] = coeff(alpha_bar[t], alpha_bar[t + 1]);
        }
        DiffusionSchedule {
            alpha_bar,
            down,
            up,
        }
    }

    /// Number of steps `T`.
    pub fn steps(&self) -> usize {
        self.alpha_bar.len() - 1
    }

    pub fn alpha_bar(&self) -> &[f64] {
        &self.alpha_bar
    }

    pub(crate) fn down(&self, t: usize) -> (f64, f64) {
        self.down[t]
    }

    pub(crate) fn up(&self, t: usize) -> (f64, f64) {
        self.up[t]
    }
}

impl Default for DiffusionSchedule {
    fn default() -> Self {
        DiffusionSchedule::new(DEFAULT_STEPS).expect("default step count is valid")
    }
}

/// Cumulative products of `1 − β` over the 1000 base steps.
fn base_alpha_bar() -> Vec<f64> {
    let mut acc = 1.0;
    (0..BASE_STEPS)
        .map(|i| {
            let beta = BETA_START + (BETA_END - BETA_START) * i as f64 / (BASE_STEPS - 1) as f64;
            acc *= 1.0 - beta;
            acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strictly_decreasing() {
        for steps in [1, 10, 25, 50, 100, 500] {
            let s = DiffusionSchedule::new(steps).unwrap();
            let ab = s.alpha_bar();
            assert_eq!(ab.len(), steps + 1);
            assert!(ab[0] <= 1.0);
            assert!(ab.windows(2).all(|w| w[0] > w[1]), "T={steps}");
            assert!(*ab.last().unwrap() > 0.0);
        }
        assert!(DiffusionSchedule::new(0).is_err());
        assert!(DiffusionSchedule::new(501).is_err());
    }

    #[test]
    fn endpoints() {
        let s = DiffusionSchedule::default();
        let ab = s.alpha_bar();
        assert_eq!(ab[0], 1.0 - 1e-4);
        // Product of (1 − β) over the full base schedule.
        let direct: f64 = (0..1000)
            .map(|i| 1.0 - (1e-4 + (2e-2 - 1e-4) * i as f64 / 999.0))
            .product();
        assert!((ab[50] - direct).abs() < 1e-15);
        assert!((ab[50] - 4.036e-5).abs() < 1e-7);
    }

    #[test]
    fn up_inverts_down_without_noise() {
        let s = DiffusionSchedule::new(10).unwrap();
        for t in 0..10 {
            let (a_up, _) = s.up(t);
            let (a_down, _) = s.down(t + 1);
            assert!((a_up * a_down - 1.0).abs() < 1e-12);
        }
    }
}
