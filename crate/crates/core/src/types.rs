//! Value types shared by every other module: transaction identifiers and
//! descriptors, versions, snapshot-queue entries, and the wire messages
//! exchanged between nodes.
//!
//! Everything here is an immutable value type, safe to copy between
//! execution contexts. Protocol state lives in the node and coordinator
//! modules, not here.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::clock::VectorClock;

/// Index of a node in the cluster, also a position in every vector clock.
pub type NodeId = usize;

/// A key in the store. Keys are dense indices `0..num_keys`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Key(pub u32);

impl fmt::Debug for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k{}", self.0)
    }
}

/// Opaque value payload; the store is agnostic to its contents.
pub type Value = Vec<u8>;

/// Globally unique transaction identifier: (origin node, per-node counter).
///
/// Totally ordered lexicographically, which gives every tie-break in the
/// protocol a deterministic answer.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TxnId {
    pub origin: NodeId,
    pub seq: u64,
}

impl TxnId {
    pub fn new(origin: NodeId, seq: u64) -> Self {
        TxnId { origin, seq }
    }

    /// Reserved id for the synthetic transaction that installs initial
    /// versions before any client runs.
    pub const INIT: TxnId = TxnId { origin: 0, seq: 0 };
}

impl fmt::Debug for TxnId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T{}.{}", self.origin, self.seq)
    }
}

impl fmt::Display for TxnId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T{}.{}", self.origin, self.seq)
    }
}

/// Lifecycle of a transaction, monotone along
/// active -> preparing -> internally committed -> pre-commit -> externally
/// committed, with active/preparing -> aborted possible for update
/// transactions only.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TxnStatus {
    Active,
    Preparing,
    InternallyCommitted,
    PreCommit,
    ExternallyCommitted,
    Aborted,
}

/// One version of a key: value plus the commit vector clock of the writer.
///
/// Versions of one key on one node form a chain ordered by strictly
/// increasing `vc[i]`, where `i` is the storing node's index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Version {
    pub value: Value,
    pub vc: VectorClock,
    pub writer: TxnId,
}

/// Whether a snapshot-queue entry records a reader or a writer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EntryKind {
    R,
    W,
}

/// One snapshot-queue entry: (txn, insertion-snapshot, kind).
///
/// The insertion-snapshot of an entry inserted on node `i` is the
/// transaction's vector-clock entry `i` at insertion time.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotQueueEntry {
    pub txn: TxnId,
    pub snapshot: u64,
    pub kind: EntryKind,
}

/// A read-only queue entry carried inside messages: (txn, insertion-snapshot).
pub type PropagatedEntry = (TxnId, u64);

/// Per-transaction state kept by its coordinator.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TxnDescriptor {
    pub id: TxnId,
    pub coordinator: NodeId,
    pub is_update: bool,
    pub vc: VectorClock,
    /// Set lazily at first read for read-only transactions.
    pub vc_assigned: bool,
    pub has_read: Vec<bool>,
    /// (key, value, clock returned with the read).
    pub read_set: Vec<(Key, Value, VectorClock)>,
    /// Buffered writes; last write per key wins.
    pub write_set: Vec<(Key, Value)>,
    /// Read-only queue entries observed while reading; propagated into the
    /// written keys' queues at pre-commit.
    pub propagated: Vec<PropagatedEntry>,
    pub status: TxnStatus,
}

impl TxnDescriptor {
    pub fn new(id: TxnId, coordinator: NodeId, is_update: bool, n_nodes: usize) -> Self {
        TxnDescriptor {
            id,
            coordinator,
            is_update,
            vc: VectorClock::zero(n_nodes),
            vc_assigned: false,
            has_read: vec![false; n_nodes],
            read_set: Vec::new(),
            write_set: Vec::new(),
            propagated: Vec::new(),
            status: TxnStatus::Active,
        }
    }

    pub fn read_keys(&self) -> Vec<Key> {
        let mut ks: Vec<Key> = self.read_set.iter().map(|(k, _, _)| *k).collect();
        ks.sort_unstable();
        ks.dedup();
        ks
    }

    pub fn write_keys(&self) -> Vec<Key> {
        let mut ks: Vec<Key> = self.write_set.iter().map(|(k, _)| *k).collect();
        ks.sort_unstable();
        ks.dedup();
        ks
    }

    /// Last buffered write for `k`, if any.
    pub fn buffered_write(&self, k: Key) -> Option<&Value> {
        self.write_set
            .iter()
            .rev()
            .find(|(wk, _)| *wk == k)
            .map(|(_, v)| v)
    }

    pub fn record_write(&mut self, k: Key, v: Value) {
        if let Some(slot) = self.write_set.iter_mut().find(|(wk, _)| *wk == k) {
            slot.1 = v;
        } else {
            self.write_set.push((k, v));
        }
    }
}

/// Delivery priority classes. Lower value = delivered first among events
/// scheduled for the same instant. Remove is highest because it unblocks
/// external commits; the commit path outranks the read path.
pub mod priority {
    pub const REMOVE: u8 = 0;
    pub const DECIDE_ACK: u8 = 1;
    pub const VOTE_PREPARE: u8 = 2;
    pub const READ: u8 = 3;
}

/// The payload a Prepare carries: everything a participant needs to lock,
/// validate, vote, and later install the transaction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrepareBody {
    pub txn: TxnId,
    pub coordinator: NodeId,
    pub vc: VectorClock,
    pub read_keys: Vec<Key>,
    pub writes: Vec<(Key, Value)>,
    pub propagated: Vec<PropagatedEntry>,
}

/// Messages of the main protocol, mirroring the parameters the algorithms
/// exchange. Every message is delivered with explicit sender and destination.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SssMessage {
    ReadRequest {
        txn: TxnId,
        key: Key,
        vc: VectorClock,
        has_read: Vec<bool>,
        is_update: bool,
        /// Sequence number of the read within its transaction, used by the
        /// coordinator to discard slow duplicate replies.
        read_seq: u32,
    },
    ReadReturn {
        txn: TxnId,
        key: Key,
        read_seq: u32,
        value: Value,
        /// `VC*`: the visibility clock the responder computed.
        vc: VectorClock,
        propagated: Vec<PropagatedEntry>,
        /// Writer of the returned version, recorded for the checker.
        writer: TxnId,
    },
    Prepare(PrepareBody),
    Vote {
        txn: TxnId,
        vc: VectorClock,
        ok: bool,
    },
    Decide {
        txn: TxnId,
        vc: VectorClock,
        ok: bool,
    },
    Ack {
        txn: TxnId,
        /// The sender's own vector-clock entry for the transaction.
        snapshot: u64,
    },
    Remove {
        txn: TxnId,
    },
}

impl SssMessage {
    pub fn priority(&self) -> u8 {
        match self {
            SssMessage::Remove { .. } => priority::REMOVE,
            SssMessage::Decide { .. } | SssMessage::Ack { .. } => priority::DECIDE_ACK,
            SssMessage::Prepare(_) | SssMessage::Vote { .. } => priority::VOTE_PREPARE,
            SssMessage::ReadRequest { .. } | SssMessage::ReadReturn { .. } => priority::READ,
        }
    }

    pub fn txn(&self) -> TxnId {
        match self {
            SssMessage::ReadRequest { txn, .. }
            | SssMessage::ReadReturn { txn, .. }
            | SssMessage::Vote { txn, .. }
            | SssMessage::Decide { txn, .. }
            | SssMessage::Ack { txn, .. }
            | SssMessage::Remove { txn } => *txn,
            SssMessage::Prepare(body) => body.txn,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            SssMessage::ReadRequest { .. } => "ReadRequest",
            SssMessage::ReadReturn { .. } => "ReadReturn",
            SssMessage::Prepare(_) => "Prepare",
            SssMessage::Vote { .. } => "Vote",
            SssMessage::Decide { .. } => "Decide",
            SssMessage::Ack { .. } => "Ack",
            SssMessage::Remove { .. } => "Remove",
        }
    }
}
