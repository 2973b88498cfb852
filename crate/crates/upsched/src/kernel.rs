//! Event kernel: a deterministic future-event list.
//!
//! Events are totally ordered by `(fire_at, class, seq)` where `seq` is the
//! order of scheduling. Two kernels fed the same schedule calls pop the same
//! events in the same order, which is what makes whole-simulation traces
//! reproducible.
//!
//! The class byte partitions a tick into phases: class-0 events (packet
//! movement) all run before class-1 events (port service decisions) at the
//! same instant, no matter how deep the same-tick causal chains go. Without
//! this, a port freed at t could start serving before a packet arriving "at t"
//! through a chain of zero-time hops became visible, and scheduling outcomes
//! would depend on event plumbing instead of the discipline.
//!
//! Cancellation is by tombstone: handles mark their seq dead and the heap
//! discards dead entries lazily on pop, keeping both schedule and cancel at
//! O(log n) amortized.

use crate::time::SimTime;
use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};

/// Handle returned by [`Kernel::schedule`]; cancels at most one event.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct EventHandle(u64);

struct Entry<E> {
    fire_at: SimTime,
    class: u8,
    seq: u64,
    payload: E,
}

// Min-order on (fire_at, class, seq) via reversed comparison for BinaryHeap.
impl<E> Ord for Entry<E> {
    fn cmp(&self, other: &Self) -> Ordering {
        (other.fire_at, other.class, other.seq).cmp(&(self.fire_at, self.class, self.seq))
    }
}
impl<E> PartialOrd for Entry<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<E> PartialEq for Entry<E> {
    fn eq(&self, other: &Self) -> bool {
        self.fire_at == other.fire_at && self.seq == other.seq
    }
}
impl<E> Eq for Entry<E> {}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct KernelStats {
    pub scheduled: u64,
    pub processed: u64,
    pub cancelled: u64,
    pub final_time: SimTime,
}

pub struct Kernel<E> {
    heap: BinaryHeap<Entry<E>>,
    /// Seqs queued and not cancelled; membership makes cancel-after-fire
    /// detectable in O(log n).
    live: BTreeSet<u64>,
    dead: BTreeSet<u64>,
    next_seq: u64,
    now: SimTime,
    stats: KernelStats,
}

impl<E> Default for Kernel<E> {
    fn default() -> Self {
        Kernel::new()
    }
}

impl<E> Kernel<E> {
    pub fn new() -> Self {
        Kernel {
            heap: BinaryHeap::new(),
            live: BTreeSet::new(),
            dead: BTreeSet::new(),
            next_seq: 0,
            now: SimTime::ZERO,
            stats: KernelStats::default(),
        }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn stats(&self) -> KernelStats {
        KernelStats {
            final_time: self.now,
            ..self.stats
        }
    }

    pub fn is_empty(&self) -> bool {
        self.live.is_empty()
    }

    /// Schedule `payload` at `fire_at` in class 0. Scheduling in the past is
    /// a configuration error and panics.
    pub fn schedule(&mut self, fire_at: SimTime, payload: E) -> EventHandle {
        self.schedule_class(fire_at, 0, payload)
    }

    /// Schedule in an explicit class; higher classes run later within a tick.
    pub fn schedule_class(&mut self, fire_at: SimTime, class: u8, payload: E) -> EventHandle {
        assert!(
            fire_at >= self.now,
            "event scheduled in the past: fire_at={fire_at} now={}",
            self.now
        );
        let seq = self.next_seq;
        self.next_seq += 1;
        self.stats.scheduled += 1;
        self.live.insert(seq);
        self.heap.push(Entry {
            fire_at,
            class,
            seq,
            payload,
        });
        EventHandle(seq)
    }

    /// Cancel a pending event. Returns false if it already fired or was
    /// already cancelled.
    pub fn cancel(&mut self, handle: EventHandle) -> bool {
        // Seqs enter `dead` only while their entry is still queued; popping
        // removes them again, so both sets stay bounded by the queue size.
        if !self.live.remove(&handle.0) {
            return false;
        }
        self.dead.insert(handle.0);
        self.stats.cancelled += 1;
        true
    }

    /// Pop the next live event with `fire_at <= t_end`, advancing the clock.
    pub fn pop_before(&mut self, t_end: SimTime) -> Option<(SimTime, E)> {
        loop {
            let head = self.heap.peek()?;
            if head.fire_at > t_end {
                return None;
            }
            let entry = self.heap.pop().expect("peeked entry vanished");
            if self.dead.remove(&entry.seq) {
                continue;
            }
            self.live.remove(&entry.seq);
            debug_assert!(entry.fire_at >= self.now, "event queue went backwards");
            self.now = entry.fire_at;
            self.stats.processed += 1;
            return Some((entry.fire_at, entry.payload));
        }
    }

    /// Run the dispatch loop until the queue is drained or the next event
    /// fires after `t_end`. The handler may schedule and cancel freely.
    pub fn run_until(
        &mut self,
        t_end: SimTime,
        mut handler: impl FnMut(&mut Self, SimTime, E),
    ) -> KernelStats {
        while let Some((at, ev)) = self.pop_before(t_end) {
            handler(self, at, ev);
        }
        if t_end != SimTime::MAX && t_end > self.now {
            self.now = t_end;
        }
        self.stats()
    }
}
