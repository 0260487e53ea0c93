//! Classification of the hub's opinion sequence around a recurrent cycle.
//! Up to rotation and a global sign flip, an anti-threshold hub only ever
//! produces eight shapes, named here by the run lengths of their repeating
//! unit. Each shape pins the system period to one or two values, and the two
//! shapes whose repeating unit has odd positive/negative balance across an
//! odd length (`OneTwo`, `OneTwoTwoThree`) need a loop at the hub.

use crate::Opinion;

use super::AnalysisError;

/// The repeating unit of a cyclic opinion sequence, by run-length shape.
/// `x` is the opinion opening the anchor run where the shape is unbalanced.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CyclePattern {
    /// Never changes.
    Constant(Opinion),
    /// Changes every step.
    Alternating,
    /// Two up, two down.
    TwoTwo,
    /// Three up, three down.
    ThreeThree,
    /// Three of `x`, one of the opposite.
    ThreeOne(Opinion),
    /// Three of `x`, two of the opposite.
    ThreeTwo(Opinion),
    /// One of `x`, two of the opposite.
    OneTwo(Opinion),
    /// Runs of 1, 2, 2, 3 over eight steps; `x` opens the single.
    OneTwoTwoThree(Opinion),
}

impl CyclePattern {
    /// System periods the shape permits.
    pub fn allowed_periods(self) -> &'static [usize] {
        match self {
            CyclePattern::Constant(_) => &[1, 2],
            CyclePattern::Alternating => &[2],
            CyclePattern::TwoTwo => &[4],
            CyclePattern::ThreeThree => &[6],
            CyclePattern::ThreeOne(_) => &[4],
            CyclePattern::ThreeTwo(_) => &[5, 10],
            CyclePattern::OneTwo(_) => &[3, 6],
            CyclePattern::OneTwoTwoThree(_) => &[8],
        }
    }

    /// Shapes only realizable when the hub carries a loop.
    pub fn needs_hub_loop(self) -> bool {
        matches!(
            self,
            CyclePattern::OneTwo(_) | CyclePattern::OneTwoTwoThree(_)
        )
    }

    /// One copy of the repeating unit.
    pub fn base_sequence(self) -> Vec<Opinion> {
        use Opinion::{Minus, Plus};
        let signed = |x: Opinion, pat: &[i8]| -> Vec<Opinion> {
            pat.iter()
                .map(|&s| if s > 0 { x } else { x.flip() })
                .collect()
        };
        match self {
            CyclePattern::Constant(v) => vec![v],
            CyclePattern::Alternating => vec![Plus, Minus],
            CyclePattern::TwoTwo => vec![Plus, Plus, Minus, Minus],
            CyclePattern::ThreeThree => vec![Plus, Plus, Plus, Minus, Minus, Minus],
            CyclePattern::ThreeOne(x) => signed(x, &[1, 1, 1, -1]),
            CyclePattern::ThreeTwo(x) => signed(x, &[1, 1, 1, -1, -1]),
            CyclePattern::OneTwo(x) => signed(x, &[1, -1, -1]),
            CyclePattern::OneTwoTwoThree(x) => signed(x, &[1, -1, -1, 1, 1, -1, -1, -1]),
        }
    }

    /// The same shape with both opinions swapped.
    pub fn flipped(self) -> CyclePattern {
        match self {
            CyclePattern::Constant(v) => CyclePattern::Constant(v.flip()),
            CyclePattern::ThreeOne(x) => CyclePattern::ThreeOne(x.flip()),
            CyclePattern::ThreeTwo(x) => CyclePattern::ThreeTwo(x.flip()),
            CyclePattern::OneTwo(x) => CyclePattern::OneTwo(x.flip()),
            CyclePattern::OneTwoTwoThree(x) => CyclePattern::OneTwoTwoThree(x.flip()),
            balanced => balanced,
        }
    }
}

impl std::fmt::Display for CyclePattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CyclePattern::Constant(v) => write!(f, "constant({v})"),
            CyclePattern::Alternating => write!(f, "alternating"),
            CyclePattern::TwoTwo => write!(f, "runs-2-2"),
            CyclePattern::ThreeThree => write!(f, "runs-3-3"),
            CyclePattern::ThreeOne(x) => write!(f, "runs-3-1(x={x})"),
            CyclePattern::ThreeTwo(x) => write!(f, "runs-3-2(x={x})"),
            CyclePattern::OneTwo(x) => write!(f, "runs-1-2(x={x})"),
            CyclePattern::OneTwoTwoThree(x) => write!(f, "runs-1-2-2-3(x={x})"),
        }
    }
}

/// Smallest d dividing len with c[i] == c[i+d] cyclically.
fn minimal_cyclic_period(c: &[Opinion]) -> usize {
    let len = c.len();
    (1..=len)
        .filter(|d| len % d == 0)
        .find(|&d| (0..len).all(|i| c[i] == c[(i + d) % len]))
        .expect("len divides len")
}

/// Cyclic run decomposition of a non-constant sequence: (opinion, length)
/// pairs, starting at a run boundary.
fn cyclic_runs(base: &[Opinion]) -> Vec<(Opinion, usize)> {
    let q = base.len();
    let start = (0..q)
        .find(|&i| base[(i + q - 1) % q] != base[i])
        .expect("non-constant");
    let mut runs: Vec<(Opinion, usize)> = Vec::new();
    for i in 0..q {
        let v = base[(start + i) % q];
        match runs.last_mut() {
            Some((rv, len)) if *rv == v => *len += 1,
            _ => runs.push((v, 1)),
        }
    }
    runs
}

/// Classifies a full cyclic opinion sequence (one entry per cycle state).
/// The shape is decided by the repeating unit, so rotations classify alike
/// and a global sign flip maps a shape to its `flipped` form. `None` means
/// no shape matches; an anti-threshold hub on a recurrent cycle always
/// matches exactly one.
pub fn classify_pattern(c: &[Opinion]) -> Result<Option<CyclePattern>, AnalysisError> {
    if c.is_empty() {
        return Err(AnalysisError::EmptySequence);
    }
    let q = minimal_cyclic_period(c);
    if q == 1 {
        return Ok(Some(CyclePattern::Constant(c[0])));
    }
    let base = &c[..q];
    let runs = cyclic_runs(base);
    let lens: Vec<usize> = runs.iter().map(|&(_, len)| len).collect();
    let value_of = |len: usize| runs.iter().find(|&&(_, l)| l == len).expect("present").0;
    let shape = match lens.as_slice() {
        [1, 1] => Some(CyclePattern::Alternating),
        [2, 2] => Some(CyclePattern::TwoTwo),
        [3, 3] => Some(CyclePattern::ThreeThree),
        [1, 3] | [3, 1] => Some(CyclePattern::ThreeOne(value_of(3))),
        [2, 3] | [3, 2] => Some(CyclePattern::ThreeTwo(value_of(3))),
        [1, 2] | [2, 1] => Some(CyclePattern::OneTwo(value_of(1))),
        _ if lens.len() == 4 => {
            // anchor at the unique run of length 1, then demand 1,2,2,3
            let ones = lens.iter().filter(|&&l| l == 1).count();
            if ones == 1 {
                let at = lens.iter().position(|&l| l == 1).expect("counted");
                let rotated: Vec<usize> = (0..4).map(|i| lens[(at + i) % 4]).collect();
                (rotated == [1, 2, 2, 3]).then(|| CyclePattern::OneTwoTwoThree(runs[at].0))
            } else {
                None
            }
        }
        _ => None,
    };
    Ok(shape)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Opinion::{Minus, Plus};

    fn seq(s: &str) -> Vec<Opinion> {
        s.chars()
            .map(|c| if c == '+' { Plus } else { Minus })
            .collect()
    }

    #[test]
    fn named_examples() {
        assert_eq!(
            classify_pattern(&seq("++++")).unwrap(),
            Some(CyclePattern::Constant(Plus))
        );
        assert_eq!(
            classify_pattern(&seq("++--")).unwrap(),
            Some(CyclePattern::TwoTwo)
        );
        assert_eq!(
            classify_pattern(&seq("-++--+++")).unwrap(),
            Some(CyclePattern::OneTwoTwoThree(Minus))
        );
        assert_eq!(
            classify_pattern(&seq("+-")).unwrap(),
            Some(CyclePattern::Alternating)
        );
        assert_eq!(
            classify_pattern(&seq("+++-")).unwrap(),
            Some(CyclePattern::ThreeOne(Plus))
        );
        assert_eq!(
            classify_pattern(&seq("---++")).unwrap(),
            Some(CyclePattern::ThreeTwo(Minus))
        );
        assert_eq!(
            classify_pattern(&seq("+--")).unwrap(),
            Some(CyclePattern::OneTwo(Plus))
        );
        assert_eq!(
            classify_pattern(&seq("++-+")).unwrap(),
            Some(CyclePattern::ThreeOne(Plus))
        );
    }

    #[test]
    fn doubled_units_classify_by_their_unit() {
        assert_eq!(
            classify_pattern(&seq("+--+--")).unwrap(),
            Some(CyclePattern::OneTwo(Plus))
        );
        assert_eq!(
            classify_pattern(&seq("+++--+++--")).unwrap(),
            Some(CyclePattern::ThreeTwo(Plus))
        );
    }

    #[test]
    fn empty_sequence_is_an_error() {
        assert_eq!(
            classify_pattern(&[]).unwrap_err(),
            AnalysisError::EmptySequence
        );
    }

    #[test]
    fn unmatched_shapes_return_none() {
        assert_eq!(classify_pattern(&seq("++-+-")).unwrap(), None);
        assert_eq!(classify_pattern(&seq("+----")).unwrap(), None);
        assert_eq!(classify_pattern(&seq("++--+-")).unwrap(), None);
        assert_eq!(classify_pattern(&seq("+-++----")).unwrap(), None);
    }

    fn rotate(c: &[Opinion], by: usize) -> Vec<Opinion> {
        (0..c.len()).map(|i| c[(i + by) % c.len()]).collect()
    }

    #[test]
    fn classification_is_rotation_and_flip_stable() {
        let all_shapes: Vec<CyclePattern> = vec![
            CyclePattern::Constant(Plus),
            CyclePattern::Constant(Minus),
            CyclePattern::Alternating,
            CyclePattern::TwoTwo,
            CyclePattern::ThreeThree,
            CyclePattern::ThreeOne(Plus),
            CyclePattern::ThreeOne(Minus),
            CyclePattern::ThreeTwo(Plus),
            CyclePattern::ThreeTwo(Minus),
            CyclePattern::OneTwo(Plus),
            CyclePattern::OneTwo(Minus),
            CyclePattern::OneTwoTwoThree(Plus),
            CyclePattern::OneTwoTwoThree(Minus),
        ];
        for &shape in &all_shapes {
            for reps in 1..=2usize {
                let unit = shape.base_sequence();
                let mut c = Vec::new();
                for _ in 0..reps {
                    c.extend_from_slice(&unit);
                }
                for by in 0..c.len() {
                    let rot = rotate(&c, by);
                    assert_eq!(
                        classify_pattern(&rot).unwrap(),
                        Some(shape),
                        "shape {shape} reps {reps} rot {by}"
                    );
                    let flipped: Vec<Opinion> = rot.iter().map(|o| o.flip()).collect();
                    assert_eq!(
                        classify_pattern(&flipped).unwrap(),
                        Some(shape.flipped()),
                        "flipped {shape} reps {reps} rot {by}"
                    );
                }
            }
        }
    }

    #[test]
    fn every_short_sequence_classifies_consistently() {
        // soundness over every cyclic word up to length 12: whenever a shape
        // comes back, rebuilding from the shape reproduces the repeating unit
        for len in 1..=12usize {
            for bits in 0..1u32 << len {
                let c: Vec<Opinion> = (0..len)
                    .map(|i| Opinion::from_bool(bits >> i & 1 == 1))
                    .collect();
                if let Some(shape) = classify_pattern(&c).unwrap() {
                    let unit = shape.base_sequence();
                    assert_eq!(len % unit.len(), 0, "{c:?} -> {shape}");
                    let matched = (0..unit.len())
                        .any(|by| (0..len).all(|i| c[i] == unit[(i + by) % unit.len()]));
                    assert!(matched, "{c:?} classified {shape} but does not repeat it");
                }
            }
        }
    }
}
