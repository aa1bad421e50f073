//! Initial gradient-flow rate comparison in the identity-feature, one-hot
//! label geometry, where the rate of objective `f` is
//! `E_c[ q_{y*} q_{y~} f'(q_{y~}) <e_{y*} - q, e_{y~} - q> ]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::math::Dist;
use crate::objectives::{gate, ObjectiveKind};
use crate::sampling::random_simplex;

use super::PropertyReport;

pub const FLOW_VOCAB: usize = 10;
const FLOW_CONTEXTS: usize = 32;
const STRONG_TARGET_MASS: f64 = 0.9;
const WEAK_LOGIT_SCALE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowRegime {
    /// `q_{y*} = 0.9` and the label agrees with the truth.
    Strong,
    /// Near-uniform `q` and the label disagrees with the truth.
    Weak,
}

impl std::fmt::Display for FlowRegime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Strong => "strong",
            Self::Weak => "weak",
        })
    }
}

struct FlowContext {
    q: Dist,
    truth: usize,
    label: usize,
}

fn contexts(regime: FlowRegime, seed: u64) -> Vec<FlowContext> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..FLOW_CONTEXTS)
        .map(|_| {
            let truth = rng.random_range(0..FLOW_VOCAB);
            match regime {
                FlowRegime::Strong => {
                    let rest = random_simplex(&mut rng, FLOW_VOCAB - 1);
                    let mut probs = Vec::with_capacity(FLOW_VOCAB);
                    let mut tail = rest.iter().map(|v| v * (1.0 - STRONG_TARGET_MASS));
                    for i in 0..FLOW_VOCAB {
                        probs.push(if i == truth {
                            STRONG_TARGET_MASS
                        } else {
                            tail.next().unwrap()
                        });
                    }
                    let q = Dist::new(probs).expect("strong-regime distribution");
                    FlowContext { q, truth, label: truth }
                }
                FlowRegime::Weak => {
                    let z: Vec<f64> = (0..FLOW_VOCAB)
                        .map(|_| WEAK_LOGIT_SCALE * Distribution::<f64>::sample(&StandardNormal, &mut rng))
                        .collect::<Vec<f64>>();
                    let q = Dist::softmax(&z).expect("finite logits");
                    let offset = rng.random_range(1..FLOW_VOCAB);
                    FlowContext {
                        q,
                        truth,
                        label: (truth + offset) % FLOW_VOCAB,
                    }
                }
            }
        })
        .collect()
}

fn check_static(kind: &ObjectiveKind) -> Result<f64> {
    kind.static_alpha().ok_or_else(|| {
        Error::Unsupported(format!(
            "gradient-flow ordering assumes a fixed objective; `{kind}` has a state-dependent gate"
        ))
    })
}

/// Population-risk rate `<grad R, grad L_f>` with identity features.
fn flow_rate(kind: &ObjectiveKind, ctxs: &[FlowContext]) -> Result<f64> {
    let mut total = 0.0;
    for c in ctxs {
        let q = c.q.probs();
        // grad of L_f in logit space: s_f(q_label) (q - e_label)
        let s = gate(kind, &c.q, c.label)?.gate;
        let q_truth = q[c.truth];
        let mut inner = 0.0;
        for (i, &qi) in q.iter().enumerate() {
            let risk_dir = q_truth * ((i == c.truth) as u8 as f64 - qi);
            let obj_dir = s * (qi - (i == c.label) as u8 as f64);
            inner += risk_dir * obj_dir;
        }
        total += inner;
    }
    Ok(total / ctxs.len() as f64)
}

/// `Rdot(first) - Rdot(second)` on the seeded contexts of `regime`.
pub fn gradient_flow_difference(
    regime: FlowRegime,
    pair: (ObjectiveKind, ObjectiveKind),
    seed: u64,
) -> Result<f64> {
    check_static(&pair.0)?;
    check_static(&pair.1)?;
    let ctxs = contexts(regime, seed);
    Ok(flow_rate(&pair.0, &ctxs)? - flow_rate(&pair.1, &ctxs)?)
}

/// Checks the sign of `Rdot(first) - Rdot(second)`: when `first` has the
/// larger focus index it must be `>= 0` in the strong regime and `<= 0` in the
/// weak one (reversed when `first` is the smaller index, zero when equal).
pub fn gradient_flow_ordering(
    regime: FlowRegime,
    pair: (ObjectiveKind, ObjectiveKind),
    seed: u64,
) -> Result<PropertyReport> {
    let a = check_static(&pair.0)?;
    let b = check_static(&pair.1)?;
    let diff = gradient_flow_difference(regime, pair, seed)?;
    let expected = if a == b {
        0.0
    } else {
        let sharper_first = if a > b { 1.0 } else { -1.0 };
        match regime {
            FlowRegime::Strong => sharper_first,
            FlowRegime::Weak => -sharper_first,
        }
    };
    let violation = if expected == 0.0 {
        diff.abs()
    } else {
        (-expected * diff).max(0.0)
    };
    let sign = if diff > 0.0 {
        1
    } else if diff < 0.0 {
        -1
    } else {
        0
    };
    Ok(PropertyReport::check(
        format!("verification.gradient_flow_ordering[{regime}]({},{})", pair.0, pair.1),
        violation,
        0.0,
        format!("seed {seed}; difference {diff:.6e}; sign {sign:+}; expected sign {expected:+}"),
    ))
}
