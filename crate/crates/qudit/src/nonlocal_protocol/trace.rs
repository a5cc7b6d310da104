//! Ordered protocol events with resource counters.

use std::fmt;

/// Event category.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Gate,
    Measure,
    Cbit,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EventKind::Gate => "gate",
            EventKind::Measure => "measure",
            EventKind::Cbit => "cbit",
        })
    }
}

/// One event. `step` is the accounted parallel step; `stage` is the literal time slice inside it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    pub step: usize,
    pub stage: usize,
    pub kind: EventKind,
    pub detail: String,
}

/// Events plus e-bit, c-bit, accounted-step and literal-stage counters.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProtocolTrace {
    pub events: Vec<TraceEvent>,
    pub ebits: usize,
    pub cbits: usize,
    pub steps: usize,
    pub stages: usize,
}

impl ProtocolTrace {
    pub fn push(&mut self, step: usize, stage: usize, kind: EventKind, detail: impl Into<String>) {
        if kind == EventKind::Cbit {
            self.cbits += 1;
        }
        self.events.push(TraceEvent {
            step,
            stage,
            kind,
            detail: detail.into(),
        });
    }

    /// Appends `other`, shifting its steps and stages past the current totals.
    pub fn append(&mut self, other: &ProtocolTrace) {
        for e in &other.events {
            self.events.push(TraceEvent {
                step: e.step + self.steps,
                stage: e.stage + self.stages,
                kind: e.kind,
                detail: e.detail.clone(),
            });
        }
        self.ebits += other.ebits;
        self.cbits += other.cbits;
        self.steps += other.steps;
        self.stages += other.stages;
    }

    pub fn summary(&self) -> String {
        format!("ebits={} cbits={} steps={}", self.ebits, self.cbits, self.steps)
    }

    /// One `step=<n> kind=<k> detail=...` line per event, then the summary line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&format!("step={} kind={} detail=stage{}: {}\n", e.step, e.kind, e.stage, e.detail));
        }
        out.push_str(&self.summary());
        out.push('\n');
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn append_shifts_and_sums() {
        let mut a = ProtocolTrace::default();
        a.push(1, 1, EventKind::Cbit, "m");
        a.ebits = 1;
        a.steps = 1;
        a.stages = 6;
        let mut b = a.clone();
        b.append(&a);
        assert_eq!((b.ebits, b.cbits, b.steps, b.stages), (2, 2, 2, 12));
        assert_eq!(b.events[1].step, 2);
        assert_eq!(b.events[1].stage, 7);
        assert!(b.render().ends_with("ebits=2 cbits=2 steps=2\n"));
        assert!(b.render().starts_with("step=1 kind=cbit detail="));
    }
}
