//! Two-hidden-layer tanh network emitting the location and scale of a Gaussian on the
//! log-spacing, trained with Adam on the negative log-likelihood.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NetworkConfig {
    pub hidden: usize,
    pub steps: usize,
    pub batch: usize,
    pub learning_rate: f64,
    /// Decoupled weight decay applied to the weight matrices (not biases).
    pub weight_decay: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self { hidden: 32, steps: 2500, batch: 256, learning_rate: 5e-3, weight_decay: 0.1 }
    }
}

pub(crate) const SIGMA_FLOOR: f64 = 1e-3;
const AVERAGE_RATE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub inputs: usize,
    pub hidden: usize,
    /// Target standardization: the network works on `(ln s - y_mean) / y_std`.
    pub y_mean: f64,
    pub y_std: f64,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    pub w3: Vec<f64>,
    pub b3: Vec<f64>,
}

fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

struct Trace {
    a1: Vec<f64>,
    a2: Vec<f64>,
    out: [f64; 2],
}

impl Network {
    fn forward(&self, x: &[f64]) -> Trace {
        let (d, h) = (self.inputs, self.hidden);
        let a1: Vec<f64> =
            (0..h).map(|j| (self.b1[j] + (0..d).map(|k| self.w1[j * d + k] * x[k]).sum::<f64>()).tanh()).collect();
        let a2: Vec<f64> =
            (0..h).map(|j| (self.b2[j] + (0..h).map(|k| self.w2[j * h + k] * a1[k]).sum::<f64>()).tanh()).collect();
        let mut out = [0.0; 2];
        for (o, slot) in out.iter_mut().enumerate() {
            *slot = self.b3[o] + (0..h).map(|k| self.w3[o * h + k] * a2[k]).sum::<f64>();
        }
        Trace { a1, a2, out }
    }

    /// `(mu, sigma)` of ln-spacing for an encoded input.
    pub fn predict(&self, x: &[f64]) -> (f64, f64) {
        let tr = self.forward(x);
        let sigma = softplus(tr.out[1]) + SIGMA_FLOOR;
        (self.y_mean + self.y_std * tr.out[0], self.y_std * sigma)
    }

    fn params_mut(&mut self) -> [&mut Vec<f64>; 6] {
        [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2, &mut self.w3, &mut self.b3]
    }

    pub fn train(xs: &[Vec<f64>], log_s: &[f64], cfg: &NetworkConfig, seed: u64) -> Network {
        let d = xs[0].len();
        let h = cfg.hidden;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = log_s.len() as f64;
        let y_mean = log_s.iter().sum::<f64>() / n;
        let y_std = (log_s.iter().map(|v| (v - y_mean).powi(2)).sum::<f64>() / n).sqrt().max(1e-6);
        let ys: Vec<f64> = log_s.iter().map(|v| (v - y_mean) / y_std).collect();

        let mut init = |fan_in: usize, fan_out: usize, len: usize| -> Vec<f64> {
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            (0..len).map(|_| rng.random_range(-limit..limit)).collect()
        };
        let mut net = Network {
            inputs: d,
            hidden: h,
            y_mean,
            y_std,
            w1: init(d, h, h * d),
            b1: vec![0.0; h],
            w2: init(h, h, h * h),
            b2: vec![0.0; h],
            w3: init(h, 2, 2 * h).into_iter().map(|w| 0.1 * w).collect(),
            // standardized target starts at N(0, 1): softplus^-1(1) = ln(e - 1)
            b3: vec![0.0, (std::f64::consts::E - 1.0).ln()],
        };

        let sizes: Vec<usize> = net.params_mut().iter().map(|p| p.len()).collect();
        let mut m: Vec<Vec<f64>> = sizes.iter().map(|&s| vec![0.0; s]).collect();
        let mut v: Vec<Vec<f64>> = sizes.iter().map(|&s| vec![0.0; s]).collect();
        let (beta1, beta2, eps) = (0.9, 0.999, 1e-8);

        let mut order: Vec<usize> = (0..ys.len()).collect();
        let mut cursor = order.len();
        // exponential average of the iterates over the second half damps minibatch noise
        let average_from = cfg.steps / 2;
        let mut avg: Option<Vec<Vec<f64>>> = None;
        for step in 1..=cfg.steps {
            let mut grads: Vec<Vec<f64>> = sizes.iter().map(|&s| vec![0.0; s]).collect();
            let batch = cfg.batch.min(order.len());
            for _ in 0..batch {
                if cursor >= order.len() {
                    order.shuffle(&mut rng);
                    cursor = 0;
                }
                let i = order[cursor];
                cursor += 1;
                net.accumulate_grad(&xs[i], ys[i], &mut grads);
            }
            // cosine decay to 10% of the base rate
            let progress = step as f64 / cfg.steps as f64;
            let lr = cfg.learning_rate * (0.1 + 0.9 * 0.5 * (1.0 + (std::f64::consts::PI * progress).cos()));
            let bc1 = 1.0 - decay_pow(beta1, step);
            let bc2 = 1.0 - decay_pow(beta2, step);
            for (pi, param) in net.params_mut().into_iter().enumerate() {
                let decay = if pi % 2 == 0 { lr * cfg.weight_decay } else { 0.0 };
                for k in 0..param.len() {
                    param[k] -= decay * param[k];
                    let g = grads[pi][k] / batch as f64;
                    m[pi][k] = beta1 * m[pi][k] + (1.0 - beta1) * g;
                    v[pi][k] = beta2 * v[pi][k] + (1.0 - beta2) * g * g;
                    let mh = m[pi][k] / bc1;
                    let vh = v[pi][k] / bc2;
                    param[k] -= lr * mh / (vh.sqrt() + eps);
                }
            }
            if step > average_from {
                let params = net.params_mut();
                match avg.as_mut() {
                    None => avg = Some(params.iter().map(|p| p.to_vec()).collect()),
                    Some(avg) => {
                        for (a, p) in avg.iter_mut().zip(params) {
                            a.iter_mut().zip(p.iter()).for_each(|(a, p)| *a += AVERAGE_RATE * (p - *a));
                        }
                    }
                }
            }
        }
        if let Some(avg) = avg {
            for (p, a) in net.params_mut().into_iter().zip(avg) {
                *p = a;
            }
        }
        net
    }

    fn accumulate_grad(&self, x: &[f64], y: f64, grads: &mut [Vec<f64>]) {
        let (d, h) = (self.inputs, self.hidden);
        let tr = self.forward(x);
        let mu = tr.out[0];
        let sigma = softplus(tr.out[1]) + SIGMA_FLOOR;
        let r = y - mu;
        // loss = ln sigma + r^2 / (2 sigma^2)
        let d_mu = -r / (sigma * sigma);
        let d_sigma = 1.0 / sigma - r * r / (sigma * sigma * sigma);
        let d_out = [d_mu, d_sigma * sigmoid(tr.out[1])];

        let mut d_a2 = vec![0.0; h];
        for o in 0..2 {
            grads[5][o] += d_out[o];
            for k in 0..h {
                grads[4][o * h + k] += d_out[o] * tr.a2[k];
                d_a2[k] += d_out[o] * self.w3[o * h + k];
            }
        }
        let d_z2: Vec<f64> = (0..h).map(|k| d_a2[k] * (1.0 - tr.a2[k] * tr.a2[k])).collect();
        let mut d_a1 = vec![0.0; h];
        for j in 0..h {
            grads[3][j] += d_z2[j];
            for k in 0..h {
                grads[2][j * h + k] += d_z2[j] * tr.a1[k];
                d_a1[k] += d_z2[j] * self.w2[j * h + k];
            }
        }
        for j in 0..h {
            let dz = d_a1[j] * (1.0 - tr.a1[j] * tr.a1[j]);
            grads[1][j] += dz;
            for k in 0..d {
                grads[0][j * d + k] += dz * x[k];
            }
        }
    }
}

fn decay_pow(beta: f64, step: usize) -> f64 {
    beta.powi(step as i32)
}
