use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;

/// Dense row-major sample matrix.
#[derive(Debug, Clone)]
pub struct Samples {
    pub dim: usize,
    pub data: Vec<f32>,
}

impl Samples {
    pub fn new(dim: usize) -> Self {
        Self { dim, data: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn push(&mut self, row: &[f32]) {
        assert_eq!(row.len(), self.dim);
        self.data.extend_from_slice(row);
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

pub(crate) fn dot(a: &[f32], b: &[f32]) -> f32 {
    // Eight independent accumulators let the compiler vectorise.
    let mut acc = [0f32; 8];
    let chunks = a.len() / 8;
    for k in 0..chunks {
        for l in 0..8 {
            acc[l] += a[8 * k + l] * b[8 * k + l];
        }
    }
    let mut s: f32 = acc.iter().sum();
    for k in chunks * 8..a.len() {
        s += a[k] * b[k];
    }
    s
}

fn axpy(alpha: f32, x: &[f32], y: &mut [f32]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Solver settings for one binary problem.
#[derive(Debug, Clone, Copy)]
pub struct SolverParams {
    pub c: f64,
    /// Value of the constant feature appended for the bias; 0 disables it.
    pub bias: f32,
    pub eps: f64,
    pub max_iter: usize,
    pub seed: u64,
}

/// Binary L2-regularised hinge-loss SVM by dual coordinate descent with
/// shrinking. `rows` selects the training samples, `positive` their labels.
/// Returns the weight vector and the bias weight.
pub fn train_binary(samples: &Samples, rows: &[usize], positive: &[bool], p: &SolverParams) -> (Vec<f32>, f32) {
    let l = rows.len();
    let c = p.c as f32;
    let mut w = vec![0f32; samples.dim];
    let mut wb = 0f32;
    let mut alpha = vec![0f32; l];
    let y: Vec<f32> = positive.iter().map(|&b| if b { 1.0 } else { -1.0 }).collect();
    let qd: Vec<f32> = rows
        .iter()
        .map(|&r| {
            let x = samples.row(r);
            dot(x, x) + p.bias * p.bias
        })
        .collect();

    let mut index: Vec<usize> = (0..l).collect();
    let mut active = l;
    let mut pg_max_old = f32::INFINITY;
    let mut pg_min_old = f32::NEG_INFINITY;
    let mut rng = StdRng::seed_from_u64(p.seed);

    for _ in 0..p.max_iter {
        let mut pg_max_new = f32::NEG_INFINITY;
        let mut pg_min_new = f32::INFINITY;
        index[..active].shuffle(&mut rng);
        let mut s = 0;
        while s < active {
            let i = index[s];
            let x = samples.row(rows[i]);
            let g = y[i] * (dot(&w, x) + wb * p.bias) - 1.0;
            let mut pg = 0.0;
            if alpha[i] == 0.0 {
                if g > pg_max_old {
                    active -= 1;
                    index.swap(s, active);
                    continue;
                } else if g < 0.0 {
                    pg = g;
                }
            } else if alpha[i] == c {
                if g < pg_min_old {
                    active -= 1;
                    index.swap(s, active);
                    continue;
                } else if g > 0.0 {
                    pg = g;
                }
            } else {
                pg = g;
            }
            pg_max_new = pg_max_new.max(pg);
            pg_min_new = pg_min_new.min(pg);
            if pg.abs() > 1e-12 && qd[i] > 0.0 {
                let old = alpha[i];
                alpha[i] = (old - g / qd[i]).clamp(0.0, c);
                let d = (alpha[i] - old) * y[i];
                axpy(d, x, &mut w);
                wb += d * p.bias;
            }
            s += 1;
        }
        if (pg_max_new - pg_min_new) as f64 <= p.eps {
            if active == l {
                break;
            }
            active = l;
            pg_max_old = f32::INFINITY;
            pg_min_old = f32::NEG_INFINITY;
            continue;
        }
        pg_max_old = if pg_max_new <= 0.0 { f32::INFINITY } else { pg_max_new };
        pg_min_old = if pg_min_new >= 0.0 { f32::NEG_INFINITY } else { pg_min_new };
    }
    (w, wb)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(c: f64) -> SolverParams {
        SolverParams {
            c,
            bias: 1.0,
            eps: 1e-3,
            max_iter: 1000,
            seed: 7,
        }
    }

    #[test]
    fn separates_two_points() {
        let mut s = Samples::new(2);
        s.push(&[1.0, 0.0]);
        s.push(&[-1.0, 0.0]);
        let (w, b) = train_binary(&s, &[0, 1], &[true, false], &params(10.0));
        assert!(dot(&w, s.row(0)) + b > 0.9);
        assert!(dot(&w, s.row(1)) + b < -0.9);
    }

    #[test]
    fn primal_objective_matches_hand_solution() {
        // 1-D points at +2 and -2 without bias: optimum w = 0.5 (margin
        // exactly 1), attained for any C >= 1/8.
        let mut s = Samples::new(1);
        s.push(&[2.0]);
        s.push(&[-2.0]);
        let mut p = params(1.0);
        p.bias = 0.0;
        let (w, _) = train_binary(&s, &[0, 1], &[true, false], &p);
        assert!((w[0] - 0.5).abs() < 1e-3, "{w:?}");
    }
}
