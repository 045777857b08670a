//! Small deterministic helpers shared by the verify command and tests.

/// SplitMix64: tiny, deterministic, good enough for sampling test fields.
pub struct SplitMix(pub u64);

impl SplitMix {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// Piecewise-linear random field on `n` nodes, clipped to [0, 2c]: a random
/// member of the box |w - c| <= c.
pub fn random_box_member(rng: &mut SplitMix, n: usize, c: f64) -> Vec<f64> {
    let knots = 17.min(n.max(2));
    let knot_vals: Vec<f64> = (0..knots).map(|_| 2.0 * c * rng.unit()).collect();
    (0..n)
        .map(|i| {
            let x = i as f64 / (n - 1) as f64 * (knots - 1) as f64;
            let k = (x.floor() as usize).min(knots - 2);
            let frac = x - k as f64;
            let v = knot_vals[k] * (1.0 - frac) + knot_vals[k + 1] * frac;
            v.clamp(0.0, 2.0 * c)
        })
        .collect()
}
