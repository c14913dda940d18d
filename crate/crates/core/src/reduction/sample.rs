//! Random points for tests, gradient checks and solver restarts.

use rand::Rng;

use super::{GdaInstance, JointPoint};

/// Uniform on `[0,1]^{2d}`.
pub fn uniform_point<R: Rng + ?Sized>(inst: &GdaInstance, rng: &mut R) -> JointPoint {
    let x = (0..inst.dim).map(|_| rng.gen::<f64>()).collect();
    let y = (0..inst.dim).map(|_| rng.gen::<f64>()).collect();
    JointPoint { x, y }
}

/// Points whose per-vertex distances `‖x^q - y^q‖²` spread over `[0, nm]`
/// with extra mass at 0 and around the λ threshold `[3m, 3m + 1]`, so the
/// gate functions leave their constant pieces.
///
/// Uniform points rarely do: the expected squared distance is `nm/6`.
pub fn structured_point<R: Rng + ?Sized>(inst: &GdaInstance, rng: &mut R) -> JointPoint {
    let (n, m) = (inst.n(), inst.m());
    let block = n * m;
    let cap = block as f64;
    let lo = 3.0 * m as f64;
    let mut x = vec![0.0; inst.dim];
    let mut y = vec![0.0; inst.dim];
    for q in 0..inst.kappa() {
        let target = match rng.gen_range(0..4) {
            0 => 0.0,
            1 if cap > lo - 0.5 => rng.gen_range((lo - 0.5).max(0.0)..(lo + 1.5).min(cap)),
            _ => rng.gen_range(0.0..cap),
        };
        let gap = (target / cap).sqrt().min(1.0);
        for k in q * block..(q + 1) * block {
            let base = rng.gen_range(0.0..=(1.0 - gap));
            if rng.gen_bool(0.5) {
                x[k] = base;
                y[k] = base + gap;
            } else {
                x[k] = base + gap;
                y[k] = base;
            }
        }
    }
    JointPoint { x, y }
}
