use crate::ids::PodId;
use crate::model::ServiceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleDecision {
    ScaleUp,
    ScaleDown,
    Hold,
}

/// Per-service autoscaler memory between evaluations.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScalerState {
    /// Consecutive evaluations with average utilization below the
    /// downscale threshold.
    pub below_count: u32,
    pub last_decision: Option<u64>,
}

/// One autoscaler evaluation for a service.
///
/// `utilization` holds one CPU-consumed / cpu_request ratio per running pod.
/// Scales by at most one pod, keeping the pod count inside
/// `[min_pods, max_pods]`.
pub fn autoscale_cycle(
    config: &ServiceConfig,
    utilization: &[f64],
    state: &mut ScalerState,
    now: u64,
) -> ScaleDecision {
    let pods = utilization.len() as u32;
    let decision = if pods < config.min_pods {
        state.below_count = 0;
        ScaleDecision::ScaleUp
    } else if pods > config.max_pods {
        state.below_count = 0;
        ScaleDecision::ScaleDown
    } else {
        let avg = if pods == 0 {
            0.0
        } else {
            utilization.iter().sum::<f64>() / f64::from(pods)
        };
        if avg > config.upscale_threshold {
            state.below_count = 0;
            if pods < config.max_pods {
                ScaleDecision::ScaleUp
            } else {
                ScaleDecision::Hold
            }
        } else if avg < config.downscale_threshold {
            state.below_count += 1;
            if state.below_count >= config.downscale_period && pods > config.min_pods {
                state.below_count = 0;
                ScaleDecision::ScaleDown
            } else {
                ScaleDecision::Hold
            }
        } else {
            state.below_count = 0;
            ScaleDecision::Hold
        }
    };
    if decision != ScaleDecision::Hold {
        state.last_decision = Some(now);
    }
    decision
}

/// Picks the pod to drain on scale-down: fewest in-flight requests, highest
/// id on ties.
pub fn downscale_victim(pods: &[(PodId, usize)]) -> Option<PodId> {
    pods.iter()
        .min_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(id, _)| *id)
}

/// Whether an allocation pending since `since` has waited out `cooldown`.
pub fn cooldown_elapsed(since: u64, now: u64, cooldown: u64) -> bool {
    now.saturating_sub(since) >= cooldown
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(min: u32, start: u32, max: u32) -> ServiceConfig {
        ServiceConfig {
            name: "s".into(),
            starting_pods: start,
            min_pods: min,
            max_pods: max,
            scaler_cycle: 10,
            upscale_threshold: 0.8,
            downscale_threshold: 0.2,
            downscale_period: 3,
        }
    }

    #[test]
    fn scales_up_above_threshold() {
        let mut st = ScalerState::default();
        assert_eq!(autoscale_cycle(&config(1, 2, 4), &[0.9, 0.9], &mut st, 10), ScaleDecision::ScaleUp);
        assert_eq!(st.last_decision, Some(10));
    }

    #[test]
    fn holds_at_max() {
        let mut st = ScalerState::default();
        assert_eq!(autoscale_cycle(&config(1, 4, 4), &[0.95; 4], &mut st, 0), ScaleDecision::Hold);
    }

    #[test]
    fn scales_down_after_period() {
        let cfg = config(1, 3, 4);
        let mut st = ScalerState::default();
        let low = [0.1; 3];
        assert_eq!(autoscale_cycle(&cfg, &low, &mut st, 10), ScaleDecision::Hold);
        assert_eq!(autoscale_cycle(&cfg, &low, &mut st, 20), ScaleDecision::Hold);
        assert_eq!(autoscale_cycle(&cfg, &low, &mut st, 30), ScaleDecision::ScaleDown);
        assert_eq!(st.below_count, 0);
    }

    #[test]
    fn normal_cycle_resets_the_streak() {
        let cfg = config(1, 3, 4);
        let mut st = ScalerState::default();
        autoscale_cycle(&cfg, &[0.1; 3], &mut st, 10);
        autoscale_cycle(&cfg, &[0.1; 3], &mut st, 20);
        autoscale_cycle(&cfg, &[0.5; 3], &mut st, 30);
        assert_eq!(st.below_count, 0);
        assert_eq!(autoscale_cycle(&cfg, &[0.1; 3], &mut st, 40), ScaleDecision::Hold);
    }

    #[test]
    fn never_drops_below_min() {
        let cfg = config(2, 2, 4);
        let mut st = ScalerState::default();
        for t in 0..10 {
            assert_eq!(autoscale_cycle(&cfg, &[0.0; 2], &mut st, t), ScaleDecision::Hold);
        }
    }

    #[test]
    fn victim_selection() {
        let pods = [(PodId(1), 2), (PodId(2), 0), (PodId(3), 0), (PodId(4), 5)];
        assert_eq!(downscale_victim(&pods), Some(PodId(3)));
        assert_eq!(downscale_victim(&[]), None);
    }

    #[test]
    fn cooldown_boundaries() {
        assert!(cooldown_elapsed(0, 5, 5));
        assert!(!cooldown_elapsed(0, 3, 5));
        assert!(cooldown_elapsed(7, 7, 0));
    }
}
