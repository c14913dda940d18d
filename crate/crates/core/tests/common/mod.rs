#![allow(dead_code)]

use gda_core::pure_circuit::ExampleKind;
use gda_core::{GdaInstance, GdaParams, JointPoint, LinViInstance, PureCircuitInstance};

pub fn ring3() -> PureCircuitInstance {
    PureCircuitInstance::gen_example(ExampleKind::Ring, 3, 0).unwrap()
}

pub fn instance(
    pc: PureCircuitInstance,
    vi: LinViInstance,
    n: usize,
    eps: f64,
    delta: f64,
) -> GdaInstance {
    GdaInstance::build(pc, vi, GdaParams::custom(n, eps, delta).unwrap()).unwrap()
}

/// The three shapes used throughout: ring-3/m=1/n=1, ring-3/m=2/n=4 and a
/// 6-vertex PURIFY tree with m=2/n=8.
pub fn shapes() -> Vec<(&'static str, GdaInstance)> {
    vec![
        (
            "ring3/m1/n1",
            instance(
                ring3(),
                LinViInstance::gen_random(1, 11).unwrap(),
                1,
                1e-3,
                1.0,
            ),
        ),
        (
            "ring3/m2/n4",
            instance(
                ring3(),
                LinViInstance::gen_random(2, 12).unwrap(),
                4,
                1e-3,
                0.5,
            ),
        ),
        (
            "tree6/m2/n8",
            instance(
                PureCircuitInstance::gen_example(ExampleKind::PurifyTree, 6, 3).unwrap(),
                LinViInstance::gen_random(2, 13).unwrap(),
                8,
                1e-3,
                0.25,
            ),
        ),
    ]
}

// ---------------------------------------------------------------------------
// Literal evaluation of f, written against the definitions and sharing no
// code with the library's evaluation path.

fn g_ref(z: f64) -> f64 {
    if z <= 0.25 {
        1.0
    } else if z >= 0.5 {
        0.0
    } else {
        128.0 * (z - 0.25).powi(3) - 48.0 * (z - 0.25).powi(2) + 1.0
    }
}

fn l_ref(z: f64) -> f64 {
    if z <= 5.0 / 12.0 {
        0.0
    } else if z >= 7.0 / 12.0 {
        1.0
    } else {
        144.0 * (z - 5.0 / 12.0).powi(2) * (2.0 - 3.0 * z)
    }
}

fn lambda_ref(z: f64, m: usize) -> f64 {
    let t = z - 3.0 * m as f64;
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        -2.0 * t.powi(3) + 3.0 * t.powi(2)
    }
}

pub fn f_reference(inst: &GdaInstance, p: &JointPoint) -> f64 {
    let (kappa, n, m) = (inst.pc.kappa, inst.params.n, inst.vi.m);
    let at = |v: &Vec<f64>, q: usize, i: usize, j: usize| v[(q * n + i) * m + j];
    let dist = |q: usize| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..m {
                s += (at(&p.x, q, i, j) - at(&p.y, q, i, j)).powi(2);
            }
        }
        s
    };
    let link = |q: usize| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for row in 0..m {
                let mut dx = inst.vi.c[row];
                for col in 0..m {
                    dx += inst.vi.d[row * m + col] * at(&p.x, q, i, col);
                }
                s += dx * (at(&p.y, q, i, row) - at(&p.x, q, i, row));
            }
        }
        s
    };
    let lam = |q: usize| lambda_ref(dist(q), m);
    let mut f = 0.0;
    for &[u, v, w] in &inst.pc.nor_gates {
        f += g_ref(lam(u) + lam(v)) * link(w);
    }
    for &[u, v, w] in &inst.pc.purify_gates {
        f += l_ref(lam(u) + 0.25) * link(v) + l_ref(lam(u) - 0.25) * link(w);
    }
    for q in 0..kappa {
        for i in 0..n {
            let weight = inst.params.delta * ((i + 1) as f64 - n as f64 / 2.0);
            for j in 0..m {
                f += weight * (at(&p.x, q, i, j) - at(&p.y, q, i, j)).powi(2);
            }
        }
    }
    f
}
