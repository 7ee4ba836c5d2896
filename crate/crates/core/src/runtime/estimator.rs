//! Estimating the time elapsed since the last yield.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TimerKind {
    /// Read the clock on every call.
    Exact,
    /// Count calls; report the interval as elapsed after a fixed number.
    Countdown,
    /// Sample the clock occasionally and extrapolate from the call rate.
    #[default]
    Approx,
}

impl std::str::FromStr for TimerKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exact" => Ok(TimerKind::Exact),
            "countdown" => Ok(TimerKind::Countdown),
            "approx" => Ok(TimerKind::Approx),
            _ => Err(format!("unknown timer `{s}`")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Estimator {
    pub kind: TimerKind,
    /// Yield interval in ms.
    pub delta: f64,
    /// Resample horizon in ms.
    pub t: f64,
    pub countdown_n: u64,
    /// Calls per ms assumed before the second clock sample.
    pub velocity_floor: f64,
    pub distance: f64,
    pub counter: i64,
    pub ticks: f64,
    pub last_time: f64,
    pub velocity: f64,
    sampled: bool,
    last_reset: f64,
    calls: u64,
}

pub const DEFAULT_COUNTDOWN: u64 = 5000;

impl Estimator {
    pub fn new(kind: TimerKind, delta: f64, t: f64, countdown_n: u64) -> Self {
        Estimator {
            kind,
            delta,
            t,
            countdown_n: countdown_n.max(1),
            velocity_floor: 1.0,
            distance: 0.0,
            counter: 0,
            ticks: 0.0,
            last_time: 0.0,
            velocity: 0.0,
            sampled: false,
            last_reset: 0.0,
            calls: 0,
        }
    }

    /// Estimated ms since the last reset. `now` reads the clock and is only
    /// called when the estimator needs it.
    pub fn estimate_elapsed(&mut self, now: impl FnOnce() -> f64) -> f64 {
        match self.kind {
            TimerKind::Exact => now() - self.last_reset,
            TimerKind::Countdown => {
                self.calls += 1;
                if self.calls >= self.countdown_n {
                    self.delta
                } else {
                    0.0
                }
            }
            TimerKind::Approx => {
                self.distance += 1.0;
                let c = self.counter;
                self.counter -= 1;
                if c == 0 {
                    self.resample(now());
                }
                self.distance / self.velocity
            }
        }
    }

    fn resample(&mut self, now: f64) {
        if self.sampled {
            // Guard against a zero-length sampling window.
            let dt = (now - self.last_time).max(1e-6);
            self.velocity = self.ticks / dt;
        } else {
            self.sampled = true;
            self.velocity = self.velocity_floor;
        }
        if !(self.velocity.is_finite() && self.velocity > 0.0) {
            self.velocity = self.velocity_floor;
        }
        self.last_time = now;
        self.ticks = self.t * self.velocity;
        self.counter = self.ticks.floor() as i64;
    }

    pub fn reset_time(&mut self, now: impl FnOnce() -> f64) {
        match self.kind {
            TimerKind::Exact => self.last_reset = now(),
            TimerKind::Countdown => self.calls = 0,
            TimerKind::Approx => self.distance = 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn approx_at_constant_rate_reports_distance_in_ms() {
        // 1000 calls per virtual second, t = 100 ms.
        let mut e = Estimator::new(TimerKind::Approx, 100.0, 100.0, 1);
        let mut clock = 0.0;
        let mut last = 0.0;
        for _ in 0..1000 {
            clock += 1.0;
            last = e.estimate_elapsed(|| clock);
        }
        assert!((e.velocity - 1.0).abs() < 0.02, "velocity {}", e.velocity);
        assert!((last - e.distance / 1.0).abs() / last < 0.02);
    }

    #[test]
    fn countdown_fires_after_n_calls() {
        let mut e = Estimator::new(TimerKind::Countdown, 100.0, 100.0, 3);
        assert_eq!(e.estimate_elapsed(|| 0.0), 0.0);
        assert_eq!(e.estimate_elapsed(|| 0.0), 0.0);
        assert_eq!(e.estimate_elapsed(|| 0.0), 100.0);
        e.reset_time(|| 0.0);
        assert_eq!(e.estimate_elapsed(|| 0.0), 0.0);
    }

    #[test]
    fn exact_reads_the_clock() {
        let mut e = Estimator::new(TimerKind::Exact, 100.0, 100.0, 1);
        e.reset_time(|| 5.0);
        assert_eq!(e.estimate_elapsed(|| 42.0), 37.0);
    }
}
