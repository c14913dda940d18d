//! Pure-Circuit instances: vertices carrying values in {0, 1, ⊥}, constrained
//! by NOR and PURIFY gates. Vertex ids are dense and 0-based.

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Three vertex ids. For NOR, `(u, v, w)` reads `w = NOR(u, v)`; for
/// PURIFY it reads `(v, w) = PURIFY(u)`.
pub type Triple = [usize; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateType {
    Nor,
    Purify,
}

impl fmt::Display for GateType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateType::Nor => f.write_str("NOR"),
            GateType::Purify => f.write_str("PURIFY"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PureCircuitInstance {
    pub kappa: usize,
    #[serde(rename = "nor")]
    pub nor_gates: Vec<Triple>,
    #[serde(rename = "purify")]
    pub purify_gates: Vec<Triple>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateRef {
    pub kind: GateType,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum ViolationKind {
    UnknownVertex { vertex: usize },
    RepeatedVertex { vertex: usize },
    NotAnOutput { vertex: usize },
    MultipleOutputs { vertex: usize, count: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// The offending gate, absent for vertex-level violations.
    pub gate: Option<GateRef>,
    #[serde(flatten)]
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Trit {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "bot")]
    Bot,
}

impl Trit {
    pub fn is_pure(self) -> bool {
        self != Trit::Bot
    }
}

impl fmt::Display for Trit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Trit::Zero => "0",
            Trit::One => "1",
            Trit::Bot => "⊥",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment(pub Vec<Trit>);

impl Assignment {
    pub fn get(&self, v: usize) -> Trit {
        self.0[v]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A gate whose constraint the assignment breaks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateFailure {
    pub gate: GateRef,
    pub triple: Triple,
    pub rule: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verification {
    pub ok: bool,
    pub failures: Vec<GateFailure>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExampleKind {
    Ring,
    PurifyTree,
}

impl PureCircuitInstance {
    pub fn gates(&self) -> impl Iterator<Item = (GateRef, &Triple)> {
        let nor = self.nor_gates.iter().enumerate().map(|(index, t)| {
            (
                GateRef {
                    kind: GateType::Nor,
                    index,
                },
                t,
            )
        });
        let purify = self.purify_gates.iter().enumerate().map(|(index, t)| {
            (
                GateRef {
                    kind: GateType::Purify,
                    index,
                },
                t,
            )
        });
        nor.chain(purify)
    }

    /// Every broken structural invariant, in gate order then vertex order.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut produced = vec![0usize; self.kappa];
        for (gate, t) in self.gates() {
            for (pos, &v) in t.iter().enumerate() {
                if v >= self.kappa {
                    out.push(Violation {
                        gate: Some(gate),
                        kind: ViolationKind::UnknownVertex { vertex: v },
                    });
                } else if t[..pos].contains(&v) {
                    out.push(Violation {
                        gate: Some(gate),
                        kind: ViolationKind::RepeatedVertex { vertex: v },
                    });
                }
            }
            let outputs: &[usize] = match gate.kind {
                GateType::Nor => &t[2..],
                GateType::Purify => &t[1..],
            };
            for &w in outputs {
                if w < self.kappa {
                    produced[w] += 1;
                }
            }
        }
        for (vertex, &count) in produced.iter().enumerate() {
            match count {
                1 => {}
                0 => out.push(Violation {
                    gate: None,
                    kind: ViolationKind::NotAnOutput { vertex },
                }),
                count => out.push(Violation {
                    gate: None,
                    kind: ViolationKind::MultipleOutputs { vertex, count },
                }),
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidCircuit(v))
        }
    }

    /// Checks both NOR implications and both PURIFY rules on every gate.
    pub fn verify_assignment(&self, b: &Assignment) -> Result<Verification> {
        if b.len() != self.kappa {
            return Err(Error::AssignmentNotTotal {
                expected: self.kappa,
                actual: b.len(),
            });
        }
        let mut failures = Vec::new();
        let mut fail = |gate, triple: &Triple, rule: &str| {
            failures.push(GateFailure {
                gate,
                triple: *triple,
                rule: rule.to_string(),
            })
        };
        for (gate, t) in self.gates() {
            let [u, v, w] = *t;
            let (bu, bv, bw) = (b.get(u), b.get(v), b.get(w));
            match gate.kind {
                GateType::Nor => {
                    if bu == Trit::Zero && bv == Trit::Zero && bw != Trit::One {
                        fail(gate, t, "b(u) = b(v) = 0 requires b(w) = 1");
                    }
                    if (bu == Trit::One || bv == Trit::One) && bw != Trit::Zero {
                        fail(gate, t, "b(u) = 1 or b(v) = 1 requires b(w) = 0");
                    }
                }
                GateType::Purify => {
                    if !bv.is_pure() && !bw.is_pure() {
                        fail(gate, t, "at least one of b(v), b(w) must be pure");
                    }
                    if bu.is_pure() && (bv != bu || bw != bu) {
                        fail(gate, t, "pure b(u) requires b(v) = b(w) = b(u)");
                    }
                }
            }
        }
        Ok(Verification {
            ok: failures.is_empty(),
            failures,
        })
    }

    /// Small valid instances for experiments.
    ///
    /// `Ring` chains blocks `PURIFY(a → a+1, a+2), NOR(a+1, a+2 → next a)`
    /// around a cycle. `PurifyTree` fans vertex 0 out through a binary tree of
    /// PURIFY gates and closes the root with a NOR over two leaves. Leftover
    /// vertices that do not fit the pattern are produced by NOR gates whose
    /// inputs are drawn from `seed`.
    pub fn gen_example(kind: ExampleKind, size: usize, seed: u64) -> Result<Self> {
        if size < 3 {
            return Err(Error::InvalidParameter(format!(
                "example size must be >= 3, got {size}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut nor = Vec::new();
        let mut purify = Vec::new();
        match kind {
            ExampleKind::Ring => {
                let blocks = size / 3;
                for k in 0..blocks {
                    let a = 3 * k;
                    let next = 3 * ((k + 1) % blocks);
                    purify.push([a, a + 1, a + 2]);
                    nor.push([a + 1, a + 2, next]);
                }
                let core = 3 * blocks;
                for extra in core..size {
                    let pair = pick_two(&mut rng, core);
                    nor.push([pair[0], pair[1], extra]);
                }
            }
            ExampleKind::PurifyTree => {
                let mut parent = 0;
                let mut next = 1;
                while next + 1 < size {
                    purify.push([parent, next, next + 1]);
                    parent += 1;
                    next += 2;
                }
                if next < size {
                    let pair = pick_two(&mut rng, next);
                    nor.push([pair[0], pair[1], next]);
                }
                // leaves are the vertices never used as a PURIFY input
                let leaves: Vec<usize> = (1..size)
                    .filter(|v| !purify.iter().any(|g: &Triple| g[0] == *v))
                    .collect();
                let pair = pick_two(&mut rng, leaves.len());
                nor.push([leaves[pair[0]], leaves[pair[1]], 0]);
            }
        }
        let inst = Self {
            kappa: size,
            nor_gates: nor,
            purify_gates: purify,
        };
        debug_assert!(inst.violations().is_empty());
        Ok(inst)
    }
}

/// Two distinct indices below `n` (n >= 2), sorted.
fn pick_two(rng: &mut ChaCha8Rng, n: usize) -> [usize; 2] {
    let ids: Vec<usize> = (0..n).collect();
    let mut chosen: Vec<usize> = ids.choose_multiple(rng, 2).copied().collect();
    chosen.sort_unstable();
    [chosen[0], chosen[1]]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring3() -> PureCircuitInstance {
        PureCircuitInstance {
            kappa: 3,
            nor_gates: vec![[1, 2, 0]],
            purify_gates: vec![[0, 1, 2]],
        }
    }

    fn nor_only(b: [Trit; 3]) -> Verification {
        let inst = PureCircuitInstance {
            kappa: 3,
            nor_gates: vec![[0, 1, 2]],
            purify_gates: vec![],
        };
        inst.verify_assignment(&Assignment(b.to_vec())).unwrap()
    }

    #[test]
    fn ring3_is_valid() {
        assert!(ring3().validate().is_ok());
    }

    #[test]
    fn missing_outputs_reported() {
        let inst = PureCircuitInstance {
            kappa: 3,
            nor_gates: vec![[0, 1, 2]],
            purify_gates: vec![],
        };
        let v = inst.violations();
        assert_eq!(
            v,
            vec![
                Violation {
                    gate: None,
                    kind: ViolationKind::NotAnOutput { vertex: 0 }
                },
                Violation {
                    gate: None,
                    kind: ViolationKind::NotAnOutput { vertex: 1 }
                },
            ]
        );
    }

    #[test]
    fn repeated_and_unknown_vertices_reported() {
        let inst = PureCircuitInstance {
            kappa: 3,
            nor_gates: vec![[0, 0, 1], [1, 2, 7]],
            purify_gates: vec![[1, 2, 0]],
        };
        let v = inst.violations();
        assert!(v.contains(&Violation {
            gate: Some(GateRef {
                kind: GateType::Nor,
                index: 0
            }),
            kind: ViolationKind::RepeatedVertex { vertex: 0 }
        }));
        assert!(v.contains(&Violation {
            gate: Some(GateRef {
                kind: GateType::Nor,
                index: 1
            }),
            kind: ViolationKind::UnknownVertex { vertex: 7 }
        }));
        // vertex 0 is produced by PURIFY only; vertex 2 by PURIFY, vertex 1 by NOR 0
        assert!(v
            .iter()
            .all(|x| !matches!(x.kind, ViolationKind::MultipleOutputs { .. })));
    }

    #[test]
    fn nor_rules() {
        use Trit::*;
        assert!(nor_only([Zero, Zero, One]).ok);
        assert!(!nor_only([Zero, Zero, Bot]).ok);
        assert!(!nor_only([One, Bot, One]).ok);
        assert!(nor_only([One, Bot, Zero]).ok);
        assert!(nor_only([Bot, Zero, Bot]).ok);
    }

    #[test]
    fn purify_rules() {
        use Trit::*;
        let inst = PureCircuitInstance {
            kappa: 3,
            nor_gates: vec![],
            purify_gates: vec![[0, 1, 2]],
        };
        let check = |b: [Trit; 3]| inst.verify_assignment(&Assignment(b.to_vec())).unwrap().ok;
        assert!(!check([Bot, Bot, Bot]));
        assert!(check([Bot, Bot, One]));
        assert!(check([One, One, One]));
        assert!(!check([One, One, Zero]));
        assert!(check([Zero, Zero, Zero]));
    }

    #[test]
    fn ring3_satisfying_assignments() {
        use Trit::*;
        let inst = ring3();
        let ok = |b: [Trit; 3]| inst.verify_assignment(&Assignment(b.to_vec())).unwrap().ok;
        let all = [Zero, One, Bot];
        let mut sat = Vec::new();
        for a in all {
            for b in all {
                for c in all {
                    if ok([a, b, c]) {
                        sat.push([a, b, c]);
                    }
                }
            }
        }
        assert_eq!(sat, vec![[Bot, Zero, Bot], [Bot, Bot, Zero]]);
    }

    #[test]
    fn assignment_must_be_total() {
        assert!(matches!(
            ring3().verify_assignment(&Assignment(vec![Trit::Zero])),
            Err(Error::AssignmentNotTotal { .. })
        ));
    }

    #[test]
    fn gen_ring3_is_canonical() {
        let a = PureCircuitInstance::gen_example(ExampleKind::Ring, 3, 0).unwrap();
        assert_eq!(a, ring3());
        assert_eq!(
            a,
            PureCircuitInstance::gen_example(ExampleKind::Ring, 3, 0).unwrap()
        );
        assert!(PureCircuitInstance::gen_example(ExampleKind::Ring, 2, 0).is_err());
    }

    #[test]
    fn generated_instances_validate() {
        for kind in [ExampleKind::Ring, ExampleKind::PurifyTree] {
            for size in 3..40 {
                for seed in 0..4 {
                    let inst = PureCircuitInstance::gen_example(kind, size, seed).unwrap();
                    assert!(inst.validate().is_ok(), "{kind:?} {size} {seed}");
                    assert_eq!(
                        inst,
                        PureCircuitInstance::gen_example(kind, size, seed).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn json_shape() {
        let s = serde_json::to_string(&ring3()).unwrap();
        assert_eq!(s, r#"{"kappa":3,"nor":[[1,2,0]],"purify":[[0,1,2]]}"#);
        let back: PureCircuitInstance = serde_json::from_str(&s).unwrap();
        assert_eq!(back, ring3());
    }
}
