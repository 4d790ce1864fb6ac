//! Reduce-on-plateau learning-rate schedule: when the monitored validation
//! loss fails to strictly improve for `patience` consecutive epochs, the rate
//! is multiplied by `factor` (floored at 1e-10) and the counter resets.

pub const LR_FLOOR: f32 = 1e-10;

#[derive(Debug, Clone, Copy)]
pub struct PlateauScheduler {
    pub patience: usize,
    pub factor: f32,
    pub best: f32,
    pub since_best: usize,
}

impl PlateauScheduler {
    pub fn new(patience: usize, factor: f32) -> Self {
        Self {
            patience,
            factor,
            best: f32::INFINITY,
            since_best: 0,
        }
    }

    /// Feeds one epoch's validation loss; returns the learning rate for the
    /// next epoch.
    pub fn observe(&mut self, val_loss: f32, lr: f32) -> f32 {
        if val_loss < self.best {
            self.best = val_loss;
            self.since_best = 0;
            return lr;
        }
        self.since_best += 1;
        if self.since_best >= self.patience {
            self.since_best = 0;
            return (lr * self.factor).max(LR_FLOOR);
        }
        lr
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn drive(losses: &[f32], lr0: f32) -> Vec<f32> {
        let mut sched = PlateauScheduler::new(3, 0.1);
        let mut lr = lr0;
        let mut rates = Vec::new();
        for &loss in losses {
            rates.push(lr);
            lr = sched.observe(loss, lr);
        }
        rates.push(lr);
        rates
    }

    #[test]
    fn monotone_improvement_never_reduces() {
        let rates = drive(&[1.0, 0.9, 0.8], 1e-4);
        assert!(rates.iter().all(|&r| r == 1e-4));
    }

    #[test]
    fn stall_reduces_at_the_fourth_epoch() {
        let rates = drive(&[1.0, 1.0, 1.0, 1.0], 1e-4);
        assert_eq!(rates[..4], [1e-4, 1e-4, 1e-4, 1e-4]);
        assert!((rates[4] - 1e-5).abs() < 1e-12);
    }

    #[test]
    fn improvement_every_two_epochs_resets_the_counter() {
        let rates = drive(&[1.0, 1.0, 0.9, 0.9, 0.8, 0.8, 0.7], 1e-4);
        assert!(rates.iter().all(|&r| r == 1e-4));
    }

    #[test]
    fn equal_loss_is_not_an_improvement() {
        let mut sched = PlateauScheduler::new(1, 0.5);
        let lr = sched.observe(1.0, 1.0);
        assert_eq!(lr, 1.0);
        let lr = sched.observe(1.0, lr);
        assert_eq!(lr, 0.5);
    }

    #[test]
    fn rate_floors_at_1e_10() {
        let mut sched = PlateauScheduler::new(1, 0.1);
        let mut lr = 1e-9;
        sched.observe(1.0, lr);
        for _ in 0..5 {
            lr = sched.observe(2.0, lr);
        }
        assert_eq!(lr, LR_FLOOR);
    }
}
