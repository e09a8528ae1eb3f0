//! Central-cut ellipsoid in `f64`. Only ever used to propose candidates that
//! are re-verified exactly.

pub(crate) struct Ellipsoid {
    d: usize,
    pub center: Vec<f64>,
    q: Vec<Vec<f64>>,
}

impl Ellipsoid {
    /// The ball of radius `r` around `center`.
    pub fn ball(center: Vec<f64>, r: f64) -> Ellipsoid {
        let d = center.len();
        let mut q = vec![vec![0.0; d]; d];
        for (i, row) in q.iter_mut().enumerate() {
            row[i] = r * r;
        }
        Ellipsoid { d, center, q }
    }

    fn qg(&self, g: &[f64]) -> Vec<f64> {
        self.q.iter().map(|row| row.iter().zip(g).map(|(a, b)| a * b).sum()).collect()
    }

    /// `sqrt(g^T Q g)`: half the width of the ellipsoid along `g`.
    pub fn width(&self, g: &[f64]) -> f64 {
        let qg = self.qg(g);
        qg.iter().zip(g).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt()
    }

    /// Keep `{y : g.y <= g.center}`. Returns false once the ellipsoid is numerically flat.
    pub fn cut(&mut self, g: &[f64]) -> bool {
        let qg = self.qg(g);
        let gqg: f64 = qg.iter().zip(g).map(|(a, b)| a * b).sum();
        if !(gqg > 1e-300) || !gqg.is_finite() {
            return false;
        }
        let s = gqg.sqrt();
        let b: Vec<f64> = qg.iter().map(|v| v / s).collect();
        let d = self.d as f64;
        for (c, bi) in self.center.iter_mut().zip(&b) {
            *c -= bi / (d + 1.0);
        }
        if self.d == 1 {
            self.q[0][0] /= 4.0;
        } else {
            let f = d * d / (d * d - 1.0);
            let t = 2.0 / (d + 1.0);
            for i in 0..self.d {
                for j in 0..self.d {
                    self.q[i][j] = f * (self.q[i][j] - t * b[i] * b[j]);
                }
            }
        }
        self.center.iter().all(|v| v.is_finite())
    }
}
