use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::ids::ObjectId;
use crate::model::Message;

/// Buffers in-flight messages per receiver, in arrival order. Delivery
/// takes the oldest message of one sender, so order per sender-receiver
/// pair is preserved while different senders may overtake each other.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MediumState {
    buffers: BTreeMap<ObjectId, Vec<Message>>,
}

impl MediumState {
    pub fn send(&mut self, m: Message) {
        self.buffers.entry(m.receiver.clone()).or_default().push(m);
    }

    pub fn is_empty(&self) -> bool {
        self.buffers.values().all(Vec::is_empty)
    }

    pub fn len(&self) -> usize {
        self.buffers.values().map(Vec::len).sum()
    }

    /// Deliverable `(receiver, sender)` pairs, sorted.
    pub fn pairs(&self) -> Vec<(ObjectId, ObjectId)> {
        let mut out = BTreeSet::new();
        for (r, q) in &self.buffers {
            for m in q {
                out.insert((r.clone(), m.sender.clone()));
            }
        }
        out.into_iter().collect()
    }

    /// Removes the head message of `sender`'s queue to `receiver`.
    pub fn take(&mut self, receiver: &ObjectId, sender: &ObjectId) -> Option<Message> {
        let q = self.buffers.get_mut(receiver)?;
        let i = q.iter().position(|m| m.sender == *sender)?;
        let m = q.remove(i);
        if q.is_empty() {
            self.buffers.remove(receiver);
        }
        Some(m)
    }

    pub fn queue(&self, receiver: &ObjectId) -> &[Message] {
        self.buffers.get(receiver).map_or(&[], Vec::as_slice)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn msg(s: &str, r: &str, sel: &str) -> Message {
        Message::call(s, r, sel, vec![])
    }

    #[test]
    fn fifo_per_pair_with_overtaking() {
        let mut m = MediumState::default();
        m.send(msg("a", "c", "one"));
        m.send(msg("b", "c", "x"));
        m.send(msg("a", "c", "two"));
        assert_eq!(m.pairs().len(), 2);
        assert_eq!(m.take(&"c".into(), &"b".into()).unwrap().selector, "x");
        assert_eq!(m.take(&"c".into(), &"a".into()).unwrap().selector, "one");
        assert_eq!(m.take(&"c".into(), &"a".into()).unwrap().selector, "two");
        assert!(m.is_empty());
        assert!(m.take(&"c".into(), &"a".into()).is_none());
    }
}
