use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

/// A loss that has happened at the congestion point but reaches its sender
/// only one delay later.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendingIndication {
    pub time: f64,
    pub flow: usize,
    pub loss_time: f64,
    seq: u64,
}

impl Eq for PendingIndication {}

impl Ord for PendingIndication {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time.total_cmp(&other.time).then(self.seq.cmp(&other.seq))
    }
}

impl PartialOrd for PendingIndication {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Pending indications plus the bookkeeping times the generator needs.
#[derive(Debug, Clone)]
pub struct LossSchedule {
    pending: BinaryHeap<Reverse<PendingIndication>>,
    /// Time of the most recent indication per flow (start of its epoch).
    pub last_indication: Vec<f64>,
    /// Most recent indication over all flows.
    pub global_last_indication: f64,
    /// Most recent loss at the congestion point.
    pub last_loss: f64,
    next_seq: u64,
}

impl LossSchedule {
    pub fn new(last_indication: Vec<f64>, last_loss: f64) -> Self {
        let global = last_indication.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        LossSchedule { pending: BinaryHeap::new(), last_indication, global_last_indication: global, last_loss, next_seq: 0 }
    }

    pub fn schedule(&mut self, loss_time: f64, flow: usize, delay: f64) -> PendingIndication {
        let ind = PendingIndication { time: loss_time + delay, flow, loss_time, seq: self.next_seq };
        self.next_seq += 1;
        self.pending.push(Reverse(ind));
        ind
    }

    pub fn next(&self) -> Option<&PendingIndication> {
        self.pending.peek().map(|r| &r.0)
    }

    /// Removes the earliest indication and marks it as the latest one seen.
    pub fn advance(&mut self) -> Option<PendingIndication> {
        let ind = self.pending.pop()?.0;
        self.global_last_indication = ind.time;
        self.last_indication[ind.flow] = ind.time;
        Some(ind)
    }

    pub fn len(&self) -> usize {
        self.pending.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pending.is_empty()
    }
}
