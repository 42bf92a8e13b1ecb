//! Brute-force reference for vertical 1D infiltration.
//!
//! Mixed-form Picard scheme on a uniform cell-centred column, solved with
//! dense Gaussian elimination. Deliberately shares no code with the main
//! solver: closures, discretization and linear algebra are all local.
//!
//! Heads in m, conductivity in m/s, `z` positive upward.

#[derive(Clone, Copy, Debug)]
pub struct Soil {
    /// 1/m
    pub alpha: f64,
    pub n: f64,
    pub theta_r: f64,
    pub theta_s: f64,
    /// Saturated conductivity, m/s.
    pub ks: f64,
}

impl Soil {
    fn m(&self) -> f64 {
        1.0 - 1.0 / self.n
    }

    pub fn theta(&self, h: f64) -> f64 {
        if h >= 0.0 {
            return self.theta_s;
        }
        let se = (1.0 + (self.alpha * -h).powf(self.n)).powf(-self.m());
        self.theta_r + (self.theta_s - self.theta_r) * se
    }

    /// dθ/dh by the chain rule on `theta`.
    pub fn capacity(&self, h: f64) -> f64 {
        if h >= 0.0 {
            return 0.0;
        }
        let (a, n, m) = (self.alpha, self.n, self.m());
        let x = a * -h;
        let base = 1.0 + x.powf(n);
        (self.theta_s - self.theta_r) * m * n * a * x.powf(n - 1.0) * base.powf(-m - 1.0)
    }

    pub fn conductivity(&self, h: f64) -> f64 {
        if h >= 0.0 {
            return self.ks;
        }
        let se = (self.theta(h) - self.theta_r) / (self.theta_s - self.theta_r);
        let m = self.m();
        let inner = 1.0 - (1.0 - se.powf(1.0 / m)).powf(m);
        self.ks * se.sqrt() * inner * inner
    }
}

#[derive(Clone, Copy, Debug)]
pub enum End {
    Head(f64),
    /// Inward volumetric flux per unit area, m/s.
    Inflow(f64),
}

#[derive(Clone, Debug)]
pub struct Column {
    pub soil: Soil,
    pub n_cells: usize,
    pub z_bottom: f64,
    pub z_top: f64,
    pub bottom: End,
    pub top: End,
}

#[derive(Clone, Debug)]
pub struct Settings {
    pub dt: f64,
    pub t_end: f64,
    /// Max-norm head change that ends the Picard loop, m.
    pub tol: f64,
    pub max_iter: usize,
}

impl Column {
    pub fn dz(&self) -> f64 {
        (self.z_top - self.z_bottom) / self.n_cells as f64
    }

    /// Cell-centre elevations, bottom to top.
    pub fn centers(&self) -> Vec<f64> {
        let dz = self.dz();
        (0..self.n_cells).map(|i| self.z_bottom + (i as f64 + 0.5) * dz).collect()
    }

    /// Integrates from a uniform initial head; returns cell heads bottom to top.
    pub fn run(&self, h_init: f64, s: &Settings) -> Result<Vec<f64>, String> {
        let n = self.n_cells;
        if n == 0 || s.dt <= 0.0 || s.t_end < 0.0 {
            return Err("bad column setup".into());
        }
        let dz = self.dz();
        let soil = &self.soil;
        let mut h = vec![h_init; n];
        let mut t = 0.0;
        while t < s.t_end - 1e-9 * s.dt {
            let dt = s.dt.min(s.t_end - t);
            let theta_old: Vec<f64> = h.iter().map(|&x| soil.theta(x)).collect();
            let mut it = h.clone();
            let mut done = false;
            for _ in 0..s.max_iter {
                let k: Vec<f64> = it.iter().map(|&x| soil.conductivity(x)).collect();
                let mut a = vec![vec![0.0; n]; n];
                let mut b = vec![0.0; n];
                for i in 0..n {
                    let c = soil.capacity(it[i]);
                    a[i][i] += c / dt;
                    b[i] += c * it[i] / dt - (soil.theta(it[i]) - theta_old[i]) / dt;
                    // internal faces
                    if i > 0 {
                        let kf = 0.5 * (k[i] + k[i - 1]);
                        let g = kf / (dz * dz);
                        a[i][i] += g;
                        a[i][i - 1] -= g;
                        b[i] -= kf / dz;
                    }
                    if i + 1 < n {
                        let kf = 0.5 * (k[i] + k[i + 1]);
                        let g = kf / (dz * dz);
                        a[i][i] += g;
                        a[i][i + 1] -= g;
                        b[i] += kf / dz;
                    }
                }
                apply_end(&mut a, &mut b, 0, self.bottom, soil, dz, -1.0);
                apply_end(&mut a, &mut b, n - 1, self.top, soil, dz, 1.0);
                let next = gauss(a, b)?;
                let r = next.iter().zip(&it).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
                it = next;
                if r <= s.tol {
                    done = true;
                    break;
                }
            }
            if !done {
                return Err(format!("no convergence at t = {t}"));
            }
            h = it;
            t += dt;
        }
        Ok(h)
    }
}

// `up` is +1 for the top end (outward normal +z) and -1 for the bottom.
// Fixed-head ends take the conductivity at the prescribed head.
fn apply_end(a: &mut [Vec<f64>], b: &mut [f64], i: usize, end: End, soil: &Soil, dz: f64, up: f64) {
    match end {
        End::Head(hb) => {
            let kf = soil.conductivity(hb);
            let g = kf / (dz * 0.5 * dz);
            a[i][i] += g;
            b[i] += g * hb + up * kf / dz;
        }
        End::Inflow(q) => b[i] += q / dz,
    }
}

fn gauss(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>, String> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[p][col] == 0.0 {
            return Err("singular matrix".into());
        }
        a.swap(col, p);
        b.swap(col, p);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Ok(x)
}
