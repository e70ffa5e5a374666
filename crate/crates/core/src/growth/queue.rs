use std::cmp::Reverse;
use std::collections::{BTreeMap, VecDeque};

use crate::geometry::Vec3;

/// Processing class of a candidate, best first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Priority {
    /// A parent has no edges yet.
    IsolatedParent,
    /// A parent has exactly one edge.
    LeafParent,
    Join,
    /// Split with the distance between the parents along their border.
    Split(usize),
}

impl Priority {
    /// Sort key: smaller is processed earlier.
    fn rank(self) -> (u8, Reverse<usize>) {
        match self {
            Priority::IsolatedParent => (1, Reverse(0)),
            Priority::LeafParent => (2, Reverse(0)),
            Priority::Join => (3, Reverse(0)),
            Priority::Split(k) => (4, Reverse(k)),
        }
    }

    pub fn is_worse_than(self, other: Priority) -> bool {
        self.rank() > other.rank()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexCandidate {
    pub position: Vec3,
    pub parent_a: u32,
    pub parent_b: u32,
    /// Splat the position was computed on.
    pub splat: u32,
    pub priority: Priority,
    /// How often the candidate went back to the queue with a worse priority.
    pub demotions: u8,
}

/// One FIFO per priority; splits are keyed by distance, largest first.
#[derive(Debug, Clone, Default)]
pub struct CandidateQueue {
    fixed: [VecDeque<VertexCandidate>; 3],
    splits: BTreeMap<Reverse<usize>, VecDeque<VertexCandidate>>,
    len: usize,
}

impl CandidateQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push(&mut self, c: VertexCandidate) {
        self.len += 1;
        match c.priority {
            Priority::IsolatedParent => self.fixed[0].push_back(c),
            Priority::LeafParent => self.fixed[1].push_back(c),
            Priority::Join => self.fixed[2].push_back(c),
            Priority::Split(k) => self.splits.entry(Reverse(k)).or_default().push_back(c),
        }
    }

    /// Front of the best nonempty queue.
    pub fn pop(&mut self) -> Option<VertexCandidate> {
        let c = if let Some(q) = self.fixed.iter_mut().find(|q| !q.is_empty()) {
            q.pop_front()
        } else {
            let mut entry = self.splits.first_entry()?;
            let c = entry.get_mut().pop_front();
            if entry.get().is_empty() {
                entry.remove();
            }
            c
        };
        if c.is_some() {
            self.len -= 1;
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cand(tag: u32, priority: Priority) -> VertexCandidate {
        VertexCandidate {
            position: Vec3::ZERO,
            parent_a: tag,
            parent_b: tag,
            splat: 0,
            priority,
            demotions: 0,
        }
    }

    fn drain(q: &mut CandidateQueue) -> Vec<u32> {
        std::iter::from_fn(|| q.pop()).map(|c| c.parent_a).collect()
    }

    #[test]
    fn lowest_class_first() {
        let mut q = CandidateQueue::new();
        q.push(cand(1, Priority::Join));
        q.push(cand(0, Priority::IsolatedParent));
        assert_eq!(drain(&mut q), vec![0, 1]);
    }

    #[test]
    fn fifo_within_class() {
        let mut q = CandidateQueue::new();
        q.push(cand(7, Priority::Split(3)));
        q.push(cand(8, Priority::Split(3)));
        assert_eq!(q.len(), 2);
        assert_eq!(drain(&mut q), vec![7, 8]);
        assert!(q.is_empty());
        assert!(q.pop().is_none());
    }

    #[test]
    fn larger_split_distance_first() {
        let mut q = CandidateQueue::new();
        q.push(cand(2, Priority::Split(2)));
        q.push(cand(5, Priority::Split(5)));
        q.push(cand(3, Priority::LeafParent));
        q.push(cand(4, Priority::Split(5)));
        assert_eq!(drain(&mut q), vec![3, 5, 4, 2]);
    }

    #[test]
    fn worse_ordering() {
        use Priority::*;
        assert!(LeafParent.is_worse_than(IsolatedParent));
        assert!(Split(8).is_worse_than(Join));
        assert!(Split(2).is_worse_than(Split(3)));
        assert!(!Split(3).is_worse_than(Split(3)));
        assert!(!Join.is_worse_than(Split(1)));
    }
}
