pub const JERK_THRESHOLD: f64 = 2.5;
pub const DECEL_THRESHOLD: f64 = 2.0;
pub const DECEL_MIN_FRAMES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JerkFlag {
    pub magnitude: f64,
    /// Strictly above the threshold.
    pub flagged: bool,
}

pub fn jerk_flags(jerk_mag: &[f64], threshold: f64) -> Vec<JerkFlag> {
    jerk_mag.iter().map(|&m| JerkFlag { magnitude: m, flagged: m > threshold }).collect()
}

/// A maximal run of frames decelerating harder than the threshold; `end` is exclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecelEvent {
    pub start: usize,
    pub end: usize,
    pub peak: f64,
}

impl DecelEvent {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// Runs of at least `min_frames` consecutive samples whose deceleration magnitude (positive
/// when braking) strictly exceeds `threshold`. `NaN` samples break a run.
pub fn detect_decel_events(decel: &[f64], threshold: f64, min_frames: usize) -> Vec<DecelEvent> {
    let mut events = Vec::new();
    let mut start = None;
    for i in 0..=decel.len() {
        let hot = i < decel.len() && decel[i] > threshold;
        match (hot, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                if i - s >= min_frames {
                    let peak = decel[s..i].iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    events.push(DecelEvent { start: s, end: i, peak });
                }
                start = None;
            }
            _ => {}
        }
    }
    events
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::difference;
    use proptest::prelude::*;

    #[test]
    fn acceleration_step_is_jerky() {
        let j = difference(&[0.0, 0.3], 0.1);
        let flags = jerk_flags(&[j[0].abs()], JERK_THRESHOLD);
        assert!((flags[0].magnitude - 3.0).abs() < 1e-12);
        assert!(flags[0].flagged);
    }

    #[test]
    fn threshold_is_strict() {
        let f = jerk_flags(&[0.0, 2.5, 2.5000001], JERK_THRESHOLD);
        assert_eq!(f.iter().map(|x| x.flagged).collect::<Vec<_>>(), vec![false, false, true]);
    }

    #[test]
    fn five_frame_run() {
        let d = [0.0, 2.5, 2.5, 2.5, 2.5, 2.5, 0.0];
        let ev = detect_decel_events(&d, DECEL_THRESHOLD, DECEL_MIN_FRAMES);
        assert_eq!(ev, vec![DecelEvent { start: 1, end: 6, peak: 2.5 }]);
    }

    #[test]
    fn two_frame_run_is_ignored() {
        assert!(detect_decel_events(&[2.5, 2.5, 0.0], DECEL_THRESHOLD, DECEL_MIN_FRAMES).is_empty());
    }

    #[test]
    fn split_runs_are_separate_events() {
        let d = [2.5, 2.5, 2.5, 1.0, 2.5, 2.5, 2.5];
        let ev = detect_decel_events(&d, DECEL_THRESHOLD, DECEL_MIN_FRAMES);
        assert_eq!(ev.len(), 2);
        assert_eq!((ev[0].start, ev[0].end), (0, 3));
        assert_eq!((ev[1].start, ev[1].end), (4, 7));
    }

    #[test]
    fn exactly_threshold_does_not_count() {
        assert!(detect_decel_events(&[2.0; 6], DECEL_THRESHOLD, DECEL_MIN_FRAMES).is_empty());
    }

    proptest! {
        #[test]
        fn events_are_disjoint_and_cover_qualifying_frames(d in prop::collection::vec(0.0f64..4.0, 0..120)) {
            let ev = detect_decel_events(&d, DECEL_THRESHOLD, DECEL_MIN_FRAMES);
            for w in ev.windows(2) {
                prop_assert!(w[0].end < w[1].start);
            }
            let mut covered = vec![false; d.len()];
            for e in &ev {
                prop_assert!(e.len() >= DECEL_MIN_FRAMES);
                for i in e.start..e.end {
                    prop_assert!(d[i] > DECEL_THRESHOLD);
                    covered[i] = true;
                }
            }
            // run-length oracle
            let mut i = 0;
            while i < d.len() {
                if d[i] > DECEL_THRESHOLD {
                    let s = i;
                    while i < d.len() && d[i] > DECEL_THRESHOLD { i += 1; }
                    let qualifies = i - s >= DECEL_MIN_FRAMES;
                    for c in &covered[s..i] { prop_assert_eq!(*c, qualifies); }
                } else {
                    prop_assert!(!covered[i]);
                    i += 1;
                }
            }
        }
    }
}
