use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::ids::ObjectId;
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum MessageKind {
    #[default]
    Call,
    Return,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Message {
    pub sender: ObjectId,
    pub receiver: ObjectId,
    pub selector: String,
    pub args: Vec<Value>,
    pub kind: MessageKind,
}

impl Message {
    pub fn call(
        sender: impl Into<ObjectId>,
        receiver: impl Into<ObjectId>,
        selector: &str,
        args: Vec<Value>,
    ) -> Self {
        Message {
            sender: sender.into(),
            receiver: receiver.into(),
            selector: selector.into(),
            args,
            kind: MessageKind::Call,
        }
    }
}

/// `sender->receiver.selector(args)`, prefixed with `ret:` for returns.
impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.kind == MessageKind::Return {
            f.write_str("ret:")?;
        }
        write!(f, "{}->{}.{}(", self.sender, self.receiver, self.selector)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StreamItem<T> {
    Item(T),
    Tick,
}

/// Finite prefix of a timed stream: items separated by round-ending ticks.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimedStream<T> {
    pub items: Vec<StreamItem<T>>,
}

impl<T> Default for TimedStream<T> {
    fn default() -> Self {
        TimedStream { items: Vec::new() }
    }
}

impl<T> TimedStream<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, item: T) {
        self.items.push(StreamItem::Item(item));
    }

    pub fn tick(&mut self) {
        self.items.push(StreamItem::Tick);
    }

    pub fn ticks(&self) -> usize {
        self.items.iter().filter(|i| matches!(i, StreamItem::Tick)).count()
    }

    /// Non-tick items in order.
    pub fn payload(&self) -> impl Iterator<Item = &T> {
        self.items.iter().filter_map(|i| match i {
            StreamItem::Item(t) => Some(t),
            StreamItem::Tick => None,
        })
    }

    /// Items of each completed round; a trailing partial round is dropped.
    pub fn rounds(&self) -> Vec<Vec<&T>> {
        let mut out = Vec::new();
        let mut cur = Vec::new();
        for item in &self.items {
            match item {
                StreamItem::Item(t) => cur.push(t),
                StreamItem::Tick => out.push(core::mem::take(&mut cur)),
            }
        }
        out
    }

    /// Keeps everything up to and including the `k`-th tick.
    pub fn truncate_rounds(&mut self, k: usize) {
        let mut seen = 0;
        let cut = self.items.iter().position(|i| {
            if matches!(i, StreamItem::Tick) {
                seen += 1;
            }
            seen == k && matches!(i, StreamItem::Tick)
        });
        match cut {
            Some(p) => self.items.truncate(p + 1),
            None if k == 0 => self.items.clear(),
            None => {}
        }
    }
}

impl<T: fmt::Display> fmt::Display for TimedStream<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for (i, item) in self.items.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            match item {
                StreamItem::Item(t) => write!(f, "{t}")?,
                StreamItem::Tick => f.write_str("|")?,
            }
        }
        f.write_str(">")
    }
}
