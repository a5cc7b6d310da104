//! Parallel schedules of two-level rotations.
//!
//! A [`Schedule`] is stored in application order: `steps[0]` acts first. The
//! human notation renders in operator order, so the last step is printed first
//! and a bracket groups the rotations of one step, e.g. `G05 [G06 G52] [G61 G07] [G14 G23]`.

mod bounds;
mod qr;
mod tree;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

pub use bounds::{counting_bound, lower_bound};
pub use qr::{
    builtin_qr_layout, constrain_dag, default_qr_layout, qr_precedence, step_matrix, DagNode,
    PrecedenceDag, QrLayout,
};
pub use tree::{
    best_state_synthesis, bct_schedule, build_bct, constrain_tree_schedule, greedy_schedule,
    BctNode, BinaryComputationTree, SynthesisOptions,
};

/// Which physical operation a schedule entry stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PulseKind {
    /// Givens rotation `G_{pivot,target}`.
    Givens,
    /// `e^{it λˣ}` layer of an Euler-decomposed phase.
    PhaseX,
    /// `e^{it λʸ}` layer of an Euler-decomposed phase.
    PhaseY,
}

impl PulseKind {
    fn prefix(self) -> char {
        match self {
            PulseKind::Givens => 'G',
            PulseKind::PhaseX => 'X',
            PulseKind::PhaseY => 'Y',
        }
    }
}

/// One scheduled two-level operation.
///
/// For Givens rotations `target` is the level being emptied and `pivot` the
/// level that keeps the weight; the printed token is `G{pivot}{target}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RotationLabel {
    pub target: usize,
    pub pivot: usize,
    pub column: Option<usize>,
    pub kind: PulseKind,
}

impl RotationLabel {
    pub fn new(pivot: usize, target: usize) -> Self {
        Self {
            target,
            pivot,
            column: None,
            kind: PulseKind::Givens,
        }
    }

    pub fn with_column(mut self, column: usize) -> Self {
        self.column = Some(column);
        self
    }

    pub fn with_kind(mut self, kind: PulseKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn touches(&self, level: usize) -> bool {
        self.pivot == level || self.target == level
    }

    /// Compact token: `G05`, or `G15,0` when a level has more than one digit.
    pub fn paper_token(&self) -> String {
        self.paper_token_with(self.pivot >= 10 || self.target >= 10)
    }

    /// Token with or without a comma between the two levels.
    pub fn paper_token_with(&self, comma: bool) -> String {
        let p = self.kind.prefix();
        if !comma {
            format!("{p}{}{}", self.pivot, self.target)
        } else {
            format!("{p}{},{}", self.pivot, self.target)
        }
    }
}

impl fmt::Display for RotationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({},{})", self.kind.prefix(), self.pivot, self.target)
    }
}

/// Ordered time steps; each step is a set of index-disjoint rotations.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Schedule {
    steps: Vec<Vec<RotationLabel>>,
}

impl Schedule {
    pub fn new(steps: Vec<Vec<RotationLabel>>) -> Self {
        Self { steps }
    }

    /// Builds a schedule from 1-based step assignments.
    pub fn from_assignment(assignment: impl IntoIterator<Item = (RotationLabel, usize)>) -> Self {
        let mut steps: Vec<Vec<RotationLabel>> = Vec::new();
        for (label, step) in assignment {
            assert!(step >= 1, "steps are 1-based");
            if steps.len() < step {
                steps.resize(step, Vec::new());
            }
            steps[step - 1].push(label);
        }
        Self { steps }
    }

    pub fn steps(&self) -> &[Vec<RotationLabel>] {
        &self.steps
    }

    /// Number of nonempty steps.
    pub fn depth(&self) -> usize {
        self.steps.iter().filter(|s| !s.is_empty()).count()
    }

    /// Largest step size.
    pub fn width(&self) -> usize {
        self.steps.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn rotation_count(&self) -> usize {
        self.steps.iter().map(Vec::len).sum()
    }

    /// Rotations in application order.
    pub fn rotations(&self) -> impl Iterator<Item = RotationLabel> + '_ {
        self.steps.iter().flatten().copied()
    }

    /// 1-based step index of every rotation.
    pub fn step_of(&self) -> BTreeMap<RotationLabel, usize> {
        let mut map = BTreeMap::new();
        for (i, step) in self.steps.iter().enumerate() {
            for &r in step {
                map.insert(r, i + 1);
            }
        }
        map
    }

    /// Same rotations in the same steps, ignoring order within a step.
    pub fn same_steps(&self, other: &Schedule) -> bool {
        let sets = |s: &Schedule| {
            s.steps
                .iter()
                .filter(|st| !st.is_empty())
                .map(|st| st.iter().copied().collect::<BTreeSet<_>>())
                .collect::<Vec<_>>()
        };
        sets(self) == sets(other)
    }

    /// Errors unless the rotations of every step act on pairwise-disjoint levels.
    pub fn check_disjoint(&self) -> Result<()> {
        for (i, step) in self.steps.iter().enumerate() {
            let mut used = Vec::new();
            for r in step {
                if r.pivot == r.target {
                    return Err(Error::DegenerateRotation(r.pivot));
                }
                for level in [r.pivot, r.target] {
                    if used.contains(&level) {
                        return Err(Error::InvalidSchedule(format!(
                            "step {} uses level {level} twice",
                            i + 1
                        )));
                    }
                    used.push(level);
                }
            }
        }
        Ok(())
    }

    /// Operator-order rendering with brackets around multi-rotation steps.
    pub fn render_paper(&self) -> String {
        let comma = self.rotations().any(|r| r.pivot >= 10 || r.target >= 10);
        self.steps
            .iter()
            .rev()
            .filter(|s| !s.is_empty())
            .map(|step| {
                let tokens: Vec<String> = step.iter().map(|r| r.paper_token_with(comma)).collect();
                if tokens.len() == 1 {
                    tokens[0].clone()
                } else {
                    format!("[{}]", tokens.join(" "))
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// One line per step in application order, rotations as `G(j,k)`.
    pub fn render_lines(&self) -> String {
        self.steps
            .iter()
            .map(|step| step.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(" "))
            .collect::<Vec<_>>()
            .join("\n")
    }

    /// Parses operator-order notation such as `G32 G24 [G25 G41] [G50 G16] G07`.
    pub fn parse_paper(text: &str) -> Result<Self> {
        let mut groups: Vec<Vec<RotationLabel>> = Vec::new();
        let mut open: Option<Vec<RotationLabel>> = None;
        for raw in text.split_whitespace() {
            let mut tok = raw;
            let opens = tok.starts_with('[');
            if opens {
                if open.is_some() {
                    return Err(Error::InvalidSchedule(format!("nested bracket at `{raw}`")));
                }
                tok = &tok[1..];
                open = Some(Vec::new());
            }
            let closes = tok.ends_with(']');
            if closes {
                tok = &tok[..tok.len() - 1];
            }
            let label = parse_token(tok)?;
            match open.as_mut() {
                Some(group) => group.push(label),
                None => groups.push(vec![label]),
            }
            if closes {
                let group = open
                    .take()
                    .ok_or_else(|| Error::InvalidSchedule(format!("unmatched `]` at `{raw}`")))?;
                groups.push(group);
            }
        }
        if open.is_some() {
            return Err(Error::InvalidSchedule("unclosed `[`".into()));
        }
        groups.reverse();
        Ok(Self { steps: groups })
    }
}

fn parse_token(tok: &str) -> Result<RotationLabel> {
    let bad = || Error::InvalidSchedule(format!("bad rotation token `{tok}`"));
    let mut chars = tok.chars();
    let kind = match chars.next() {
        Some('G') => PulseKind::Givens,
        Some('X') => PulseKind::PhaseX,
        Some('Y') => PulseKind::PhaseY,
        _ => return Err(bad()),
    };
    let body = chars.as_str();
    let (p, t) = if let Some((a, b)) = body.split_once(',') {
        (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?)
    } else {
        let digits: Vec<u32> = body.chars().map(|c| c.to_digit(10)).collect::<Option<_>>().ok_or_else(bad)?;
        if digits.len() != 2 {
            return Err(bad());
        }
        (digits[0] as usize, digits[1] as usize)
    };
    Ok(RotationLabel::new(p, t).with_kind(kind))
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_paper())
    }
}

/// Input accepted by [`constrain_width`].
#[derive(Debug, Clone, Copy)]
pub enum Workload<'a> {
    /// State-synthesis schedule over a spanning tree.
    Tree(&'a Schedule),
    /// QR elimination precedence structure.
    Qr(&'a PrecedenceDag),
}

/// Reschedules a workload so that no step holds more than `k` rotations.
pub fn constrain_width(work: Workload<'_>, k: usize) -> Schedule {
    match work {
        Workload::Tree(s) => constrain_tree_schedule(s, k),
        Workload::Qr(dag) => constrain_dag(dag, k),
    }
}
