use crate::ingest::TrajectoryFrame;
use crate::interaction::HEADING_MIN_SPEED;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Headway {
    /// Euclidean distance to the validated leader, m.
    pub distance: f64,
    /// Distance over ego speed, s; `None` when the ego is (nearly) stopped.
    pub time: Option<f64>,
}

pub fn compute_headway(ego: &TrajectoryFrame, leader: &TrajectoryFrame) -> Headway {
    let distance = (leader.x - ego.x).hypot(leader.y - ego.y);
    let v = ego.speed();
    Headway { distance, time: (v >= HEADING_MIN_SPEED).then(|| distance / v) }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(x: f64, v: f64) -> TrajectoryFrame {
        let mut f = TrajectoryFrame::new(0.0, 0, x, 0.0);
        f.vx = v;
        f.vy = 0.0;
        f
    }

    #[test]
    fn distance_and_time() {
        let h = compute_headway(&frame(0.0, 15.0), &frame(30.0, 15.0));
        assert_eq!(h.distance, 30.0);
        assert_eq!(h.time, Some(2.0));
    }

    #[test]
    fn crawling_ego_has_no_time_headway() {
        let h = compute_headway(&frame(0.0, 0.05), &frame(30.0, 0.0));
        assert_eq!(h.distance, 30.0);
        assert_eq!(h.time, None);
    }
}
