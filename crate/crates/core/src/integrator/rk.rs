//! Dormand-Prince 5(4) stepping on real state vectors.

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

pub const ORDER: i32 = 5;

/// Work buffers for one integration; FSAL derivative kept in `k1`.
pub struct Dp5 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    k5: Vec<f64>,
    k6: Vec<f64>,
    k7: Vec<f64>,
    tmp: Vec<f64>,
    pub y_new: Vec<f64>,
    pub err: Vec<f64>,
    fresh: bool,
}

impl Dp5 {
    pub fn new(n: usize) -> Self {
        let z = || vec![0.0; n];
        Dp5 {
            k1: z(),
            k2: z(),
            k3: z(),
            k4: z(),
            k5: z(),
            k6: z(),
            k7: z(),
            tmp: z(),
            y_new: z(),
            err: z(),
            fresh: true,
        }
    }

    /// Marks the cached derivative stale (after the state is rescaled).
    pub fn invalidate(&mut self) {
        self.fresh = true;
    }

    /// Scales the cached derivative along with a linear rescaling of the state.
    pub fn scale_cached(&mut self, f: impl Fn(usize, f64) -> f64) {
        for (i, v) in self.k1.iter_mut().enumerate() {
            *v = f(i, *v);
        }
    }

    /// One trial step from `(t, y)`; fills `y_new` and `err`.
    pub fn step<F>(&mut self, rhs: &mut F, t: f64, y: &[f64], h: f64)
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let n = y.len();
        if self.fresh {
            rhs(t, y, &mut self.k1);
            self.fresh = false;
        }
        for i in 0..n {
            self.tmp[i] = y[i] + h * A21 * self.k1[i];
        }
        rhs(t + C2 * h, &self.tmp, &mut self.k2);
        for i in 0..n {
            self.tmp[i] = y[i] + h * (A31 * self.k1[i] + A32 * self.k2[i]);
        }
        rhs(t + C3 * h, &self.tmp, &mut self.k3);
        for i in 0..n {
            self.tmp[i] = y[i] + h * (A41 * self.k1[i] + A42 * self.k2[i] + A43 * self.k3[i]);
        }
        rhs(t + C4 * h, &self.tmp, &mut self.k4);
        for i in 0..n {
            self.tmp[i] = y[i]
                + h * (A51 * self.k1[i] + A52 * self.k2[i] + A53 * self.k3[i] + A54 * self.k4[i]);
        }
        rhs(t + C5 * h, &self.tmp, &mut self.k5);
        for i in 0..n {
            self.tmp[i] = y[i]
                + h * (A61 * self.k1[i]
                    + A62 * self.k2[i]
                    + A63 * self.k3[i]
                    + A64 * self.k4[i]
                    + A65 * self.k5[i]);
        }
        rhs(t + h, &self.tmp, &mut self.k6);
        for i in 0..n {
            self.y_new[i] = y[i]
                + h * (B1 * self.k1[i]
                    + B3 * self.k3[i]
                    + B4 * self.k4[i]
                    + B5 * self.k5[i]
                    + B6 * self.k6[i]);
        }
        rhs(t + h, &self.y_new, &mut self.k7);
        for i in 0..n {
            self.err[i] = h
                * (E1 * self.k1[i]
                    + E3 * self.k3[i]
                    + E4 * self.k4[i]
                    + E5 * self.k5[i]
                    + E6 * self.k6[i]
                    + E7 * self.k7[i]);
        }
    }

    /// Commits the last trial step (FSAL).
    pub fn accept(&mut self) {
        std::mem::swap(&mut self.k1, &mut self.k7);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_fixed_step_order() {
        // y' = y on [0, 1]; global error should drop ~2^5 per halving.
        let run = |n: usize| {
            let mut dp = Dp5::new(1);
            let mut y = vec![1.0];
            let h = 1.0 / n as f64;
            let mut f = |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = y[0];
            for i in 0..n {
                dp.step(&mut f, i as f64 * h, &y, h);
                y.copy_from_slice(&dp.y_new);
                dp.accept();
            }
            (y[0] - 1f64.exp()).abs()
        };
        let (e1, e2) = (run(8), run(16));
        let order = (e1 / e2).log2();
        assert!((order - 5.0).abs() < 0.5, "order {order}");
    }
}
