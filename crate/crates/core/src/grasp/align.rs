//! Hill-climbing pitch alignment driven only by measured contact area.

/// Settings for [`align_step`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct AlignConfig {
    /// Stop once the step falls below this, degrees.
    pub min_step: f64,
    /// Stop once the best area reaches this.
    pub target_area: f64,
    /// An observation must beat the best area by more than this to be
    /// accepted, so measurement noise does not move the fingertip.
    pub min_improvement: f64,
    /// Pitch limits, degrees.
    pub min_pitch: f64,
    pub max_pitch: f64,
}

impl Default for AlignConfig {
    fn default() -> Self {
        Self {
            min_step: 0.5,
            target_area: 0.95 * 0.9,
            min_improvement: 0.01,
            min_pitch: 0.0,
            max_pitch: 90.0,
        }
    }
}

/// Outcome of one controller decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignStep {
    /// Pitch to observe next, or the final pitch when `done`.
    pub pitch: f64,
    /// Step size to use for the next decision.
    pub step: f64,
    pub done: bool,
}

const SAME_PITCH: f64 = 1e-9;

/// Best accepted pitch in `history` and the direction of the last accepted
/// move (`+1` when there was none). Entries are accepted in order when they
/// beat the running best by more than `min_improvement`.
pub fn best_of(history: &[(f64, f64)], min_improvement: f64) -> Option<((f64, f64), f64)> {
    let (&first, rest) = history.split_first()?;
    let mut best = first;
    let mut dir = 1.0;
    for &(pitch, area) in rest {
        if area > best.1 + min_improvement {
            if pitch != best.0 {
                dir = if pitch > best.0 { 1.0 } else { -1.0 };
            }
            best = (pitch, area);
        }
    }
    Some((best, dir))
}

/// Chooses the next pitch to observe.
///
/// Probes `best ± step` around the best accepted pitch, continuing in the
/// direction of the last accepted move first. When both neighbours have
/// been observed without improvement the step halves and the best pitch is
/// returned unchanged.
/// Alignment finishes at the best pitch when the step drops below
/// `min_step` or the best area reaches `target_area`. An empty history asks
/// for an observation at `current`.
pub fn align_step(current: f64, history: &[(f64, f64)], step: f64, cfg: &AlignConfig) -> AlignStep {
    let Some(((best, area), dir)) = best_of(history, cfg.min_improvement) else {
        return AlignStep {
            pitch: current,
            step,
            done: false,
        };
    };
    if area >= cfg.target_area || step < cfg.min_step {
        return AlignStep {
            pitch: best,
            step,
            done: true,
        };
    }
    for candidate in [best + dir * step, best - dir * step] {
        let candidate = candidate.clamp(cfg.min_pitch, cfg.max_pitch);
        if !observed(history, candidate) {
            return AlignStep {
                pitch: candidate,
                step,
                done: false,
            };
        }
    }
    let step = 0.5 * step;
    AlignStep {
        pitch: best,
        step,
        done: step < cfg.min_step,
    }
}

/// Whether `pitch` already has an observation in `history`.
pub fn observed(history: &[(f64, f64)], pitch: f64) -> bool {
    history.iter().any(|&(p, _)| (p - pitch).abs() < SAME_PITCH)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> AlignConfig {
        AlignConfig::default()
    }

    #[test]
    fn empty_history_observes_current() {
        let s = align_step(52.0, &[], 8.0, &cfg());
        assert_eq!(s, AlignStep { pitch: 52.0, step: 8.0, done: false });
    }

    #[test]
    fn follows_increasing_area() {
        let h = [(40.0, 0.3), (44.0, 0.5)];
        let s = align_step(44.0, &h, 4.0, &cfg());
        assert_eq!(s.pitch, 48.0);
        assert!(!s.done);
    }

    #[test]
    fn falls_back_to_other_side() {
        let h = [(40.0, 0.3), (44.0, 0.5), (48.0, 0.4)];
        let s = align_step(48.0, &h, 4.0, &cfg());
        assert_eq!(s, AlignStep { pitch: 44.0, step: 2.0, done: false });
        let s = align_step(44.0, &h, s.step, &cfg());
        assert_eq!(s.pitch, 46.0);
    }

    #[test]
    fn both_neighbours_worse_halves_step() {
        let h = [(50.0, 0.6), (52.0, 0.4), (48.0, 0.5)];
        let s = align_step(50.0, &h, 2.0, &cfg());
        assert_eq!(s, AlignStep { pitch: 50.0, step: 1.0, done: false });
    }

    #[test]
    fn terminates_on_small_step() {
        let h = [(50.0, 0.6), (50.5, 0.4), (49.5, 0.5)];
        let s = align_step(49.5, &h, 0.5, &cfg());
        assert_eq!(s, AlignStep { pitch: 50.0, step: 0.25, done: true });
    }

    #[test]
    fn terminates_on_target_area() {
        let s = align_step(45.0, &[(45.0, 0.88)], 8.0, &cfg());
        assert!(s.done);
        assert_eq!(s.pitch, 45.0);
    }

    #[test]
    fn noise_sized_gain_is_not_accepted() {
        let h = [(46.0, 0.84), (44.0, 0.845)];
        let ((best, _), _) = best_of(&h, 0.01).unwrap();
        assert_eq!(best, 46.0);
    }

    // Noise-free unimodal falloff peaking at 45 degrees.
    fn converge(start: f64) -> (f64, usize) {
        let area = |p: f64| (1.0 - (p - 45.0).abs() / 15.0).max(0.0) * 0.9;
        let c = cfg();
        let mut history = alloc::vec::Vec::new();
        let (mut pitch, mut step) = (start, 8.0);
        for _ in 0..50 {
            let s = align_step(pitch, &history, step, &c);
            step = s.step;
            if s.done {
                return (s.pitch, history.len());
            }
            pitch = s.pitch;
            if !observed(&history, pitch) {
                history.push((pitch, area(pitch)));
            }
        }
        panic!("did not converge");
    }

    #[test]
    fn converges_from_either_side() {
        for start in [60.0, 30.0, 52.0, 38.0] {
            let (p, n) = converge(start);
            assert!((p - 45.0).abs() <= 1.0, "start {start}: {p}");
            assert!(n <= 12, "start {start}: {n} observations");
        }
    }

    #[test]
    fn brute_force_sweep_agrees() {
        let area = |p: f64| (1.0 - (p - 45.0).abs() / 15.0).max(0.0) * 0.9;
        let best = (0..=900).map(|i| i as f64 / 10.0).max_by(|a, b| area(*a).total_cmp(&area(*b))).unwrap();
        assert!((best - 45.0).abs() < 1e-9);
    }
}
