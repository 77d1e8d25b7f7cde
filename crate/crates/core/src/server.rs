//! Edge-server logic: the global database with node-ownership semantics,
//! round-robin processing of per-node inbound buffers, and cross-camera
//! re-identification.
//!
//! Ownership: while an identity is active in some node's scene, that node
//! owns the corresponding global entry and no other node can match it.
//! Ownership clears when the owning node releases the object (eviction from
//! its local database), after which any node may re-identify it.
//!
//! Identity aliasing: a node knows an object only by its own local ID until
//! (and unless) a match reply arrives — unmatched queries are never answered.
//! The server therefore records, for every query, the mapping from
//! `(node, temp_id)` to the global ID it resolved or created, and node-sent
//! `UpdateFeature`/`Release` messages carry the local ID, which the server
//! translates through that alias table.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::feature::{l2_distance, FeatureVector};
use crate::protocol::Message;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ServerError {
    #[error("node {0} is not registered")]
    UnknownNode(u64),
    #[error("global id {0} does not exist")]
    UnknownId(u64),
    #[error("node {node} does not own global id {global_id}")]
    NotOwner { node: u64, global_id: u64 },
    #[error("database over capacity but every entry is owned")]
    CapacityDeadlock,
}

/// One identity known to the server.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalEntry {
    pub global_id: u64,
    pub feature: FeatureVector,
    /// The node whose scene the identity is currently active in, if any.
    pub owner: Option<u64>,
    /// Logical timestamp of the last touch, for replacement ordering.
    pub last_update: u64,
}

/// The server's identity store.
#[derive(Debug, Clone)]
pub struct GlobalDatabase {
    entries: BTreeMap<u64, GlobalEntry>,
    next_global_id: u64,
    capacity: usize,
}

impl GlobalDatabase {
    pub fn new(capacity: usize) -> Self {
        Self {
            entries: BTreeMap::new(),
            next_global_id: 1,
            capacity: capacity.max(1),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn get(&self, global_id: u64) -> Option<&GlobalEntry> {
        self.entries.get(&global_id)
    }

    pub fn entries(&self) -> impl Iterator<Item = &GlobalEntry> {
        self.entries.values()
    }

    /// Total identities ever created (IDs are never reused).
    pub fn identities_created(&self) -> u64 {
        self.next_global_id - 1
    }

    fn fresh_global_id(&mut self) -> u64 {
        let id = self.next_global_id;
        self.next_global_id += 1;
        id
    }

    /// Closest unowned entry to `feature`; ties go to the lowest global ID.
    fn best_unowned_match(&self, feature: &FeatureVector) -> Option<(u64, f64)> {
        let mut best: Option<(u64, f64)> = None;
        for (&id, entry) in &self.entries {
            if entry.owner.is_some() {
                continue;
            }
            let Ok(d) = l2_distance(feature, &entry.feature) else {
                continue;
            };
            // BTreeMap iteration is ascending, so strict less-than keeps the
            // lowest id on ties.
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((id, d));
            }
        }
        best
    }
}

/// Counters for conditions the server tolerates but records.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServerCounters {
    pub malformed_dropped: u64,
    pub unknown_node: u64,
    pub unknown_id: u64,
    pub not_owner: u64,
    pub capacity_deadlocks: u64,
    pub evictions: u64,
}

/// Per-node FIFO inbound buffers feeding the round-robin loop.
#[derive(Debug, Clone, Default)]
pub struct NodeBuffers {
    queues: BTreeMap<u64, VecDeque<Message>>,
}

impl NodeBuffers {
    pub fn register(&mut self, node: u64) {
        self.queues.entry(node).or_default();
    }

    pub fn enqueue(&mut self, node: u64, msg: Message) {
        self.queues.entry(node).or_default().push_back(msg);
    }

    pub fn pending(&self, node: u64) -> usize {
        self.queues.get(&node).map_or(0, VecDeque::len)
    }

    pub fn nodes(&self) -> impl Iterator<Item = u64> + '_ {
        self.queues.keys().copied()
    }

    fn pop(&mut self, node: u64) -> Option<Message> {
        self.queues.get_mut(&node).and_then(VecDeque::pop_front)
    }
}

/// The edge server: global database, node registry, alias table, and the
/// round-robin cursor.
#[derive(Debug, Clone)]
pub struct EdgeServer {
    pub db: GlobalDatabase,
    beta_euc: f64,
    nodes: BTreeSet<u64>,
    /// `(node, temp_id) -> global_id`, recorded at query time and pruned on
    /// release.
    aliases: HashMap<(u64, u64), u64>,
    /// Append-only record of every alias ever made, for end-of-run scoring.
    alias_log: BTreeMap<(u64, u64), u64>,
    last_served: Option<u64>,
    clock: u64,
    pub counters: ServerCounters,
}

impl EdgeServer {
    pub fn new(capacity: usize, beta_euc: f64) -> Self {
        Self {
            db: GlobalDatabase::new(capacity),
            beta_euc,
            nodes: BTreeSet::new(),
            aliases: HashMap::new(),
            alias_log: BTreeMap::new(),
            last_served: None,
            clock: 0,
            counters: ServerCounters::default(),
        }
    }

    pub fn register_node(&mut self, node: u64) {
        self.nodes.insert(node);
    }

    pub fn beta_euc(&self) -> f64 {
        self.beta_euc
    }

    fn tick(&mut self) -> u64 {
        self.clock += 1;
        self.clock
    }

    /// Looks for a cross-camera match among unowned entries. On a match the
    /// querying node gains ownership and a reply is returned; otherwise a
    /// new global entry is created (owned by the node) and there is no
    /// reply.
    pub fn handle_query(
        &mut self,
        node: u64,
        temp_id: u64,
        feature: &FeatureVector,
    ) -> Result<Option<Message>, ServerError> {
        if !self.nodes.contains(&node) {
            return Err(ServerError::UnknownNode(node));
        }
        let now = self.tick();
        if let Some((global_id, distance)) = self.db.best_unowned_match(feature) {
            if distance < self.beta_euc {
                let entry = self
                    .db
                    .entries
                    .get_mut(&global_id)
                    .expect("matched entry exists");
                entry.owner = Some(node);
                entry.last_update = now;
                self.aliases.insert((node, temp_id), global_id);
                self.alias_log.insert((node, temp_id), global_id);
                return Ok(Some(Message::MatchReply { temp_id, global_id }));
            }
        }
        let global_id = self.db.fresh_global_id();
        self.db.entries.insert(
            global_id,
            GlobalEntry {
                global_id,
                feature: feature.clone(),
                owner: Some(node),
                last_update: now,
            },
        );
        self.aliases.insert((node, temp_id), global_id);
        self.alias_log.insert((node, temp_id), global_id);
        if self.db.len() > self.db.capacity {
            match self.evict_lru() {
                Ok(removed) => self.counters.evictions += removed.len() as u64,
                Err(ServerError::CapacityDeadlock) => self.counters.capacity_deadlocks += 1,
                Err(_) => unreachable!("evict_lru only fails with CapacityDeadlock"),
            }
        }
        Ok(None)
    }

    /// Replaces the stored feature for an entry the node owns.
    pub fn handle_update(
        &mut self,
        node: u64,
        global_id: u64,
        feature: &FeatureVector,
    ) -> Result<(), ServerError> {
        if !self.nodes.contains(&node) {
            return Err(ServerError::UnknownNode(node));
        }
        let now = self.tick();
        let entry = self
            .db
            .entries
            .get_mut(&global_id)
            .ok_or(ServerError::UnknownId(global_id))?;
        if entry.owner != Some(node) {
            return Err(ServerError::NotOwner { node, global_id });
        }
        entry.feature = feature.clone();
        entry.last_update = now;
        Ok(())
    }

    /// Clears ownership; the entry stays available for future matching.
    pub fn handle_release(&mut self, node: u64, global_id: u64) -> Result<(), ServerError> {
        if !self.nodes.contains(&node) {
            return Err(ServerError::UnknownNode(node));
        }
        let now = self.tick();
        let entry = self
            .db
            .entries
            .get_mut(&global_id)
            .ok_or(ServerError::UnknownId(global_id))?;
        if entry.owner != Some(node) {
            return Err(ServerError::NotOwner { node, global_id });
        }
        entry.owner = None;
        entry.last_update = now;
        Ok(())
    }

    /// Removes unowned entries, oldest `last_update` first, until the
    /// database is back at capacity. Owned entries are never evicted.
    pub fn evict_lru(&mut self) -> Result<Vec<u64>, ServerError> {
        let mut removed = Vec::new();
        while self.db.len() > self.db.capacity {
            let victim = self
                .db
                .entries
                .values()
                .filter(|e| e.owner.is_none())
                .min_by(|a, b| {
                    a.last_update
                        .cmp(&b.last_update)
                        .then(a.global_id.cmp(&b.global_id))
                })
                .map(|e| e.global_id);
            match victim {
                Some(id) => {
                    self.db.entries.remove(&id);
                    removed.push(id);
                }
                None => return Err(ServerError::CapacityDeadlock),
            }
        }
        Ok(removed)
    }

    /// Serves one message: scans node buffers cyclically starting after the
    /// last-served node, dequeues at most one message from the first
    /// non-empty buffer, and dispatches it. Malformed or rejected messages
    /// are counted, never fatal.
    pub fn round_robin_step(&mut self, buffers: &mut NodeBuffers) -> Vec<(u64, Message)> {
        let order: Vec<u64> = {
            let nodes: Vec<u64> = buffers.nodes().collect();
            match self.last_served {
                None => nodes,
                Some(last) => {
                    let split = nodes.iter().position(|&n| n > last).unwrap_or(0);
                    nodes[split..]
                        .iter()
                        .chain(nodes[..split].iter())
                        .copied()
                        .collect()
                }
            }
        };
        let mut replies = Vec::new();
        for node in order {
            let Some(msg) = buffers.pop(node) else {
                continue;
            };
            self.last_served = Some(node);
            match self.dispatch(node, msg) {
                Ok(Some(reply)) => replies.push((node, reply)),
                Ok(None) => {}
                Err(err) => match err {
                    ServerError::UnknownNode(_) => self.counters.unknown_node += 1,
                    ServerError::UnknownId(_) => self.counters.unknown_id += 1,
                    ServerError::NotOwner { .. } => self.counters.not_owner += 1,
                    ServerError::CapacityDeadlock => self.counters.capacity_deadlocks += 1,
                },
            }
            break;
        }
        replies
    }

    fn dispatch(&mut self, from: u64, msg: Message) -> Result<Option<Message>, ServerError> {
        match msg {
            Message::Query {
                node_id,
                temp_id,
                feature,
            } => {
                self.ensure_sender(from, node_id)?;
                self.handle_query(node_id, temp_id, &feature)
            }
            Message::UpdateFeature {
                node_id,
                object_id,
                feature,
            } => {
                self.ensure_sender(from, node_id)?;
                let global_id = self.resolve_alias(node_id, object_id);
                self.handle_update(node_id, global_id, &feature)
                    .map(|()| None)
            }
            Message::Release { node_id, object_id } => {
                self.ensure_sender(from, node_id)?;
                let global_id = self.resolve_alias(node_id, object_id);
                self.handle_release(node_id, global_id)?;
                self.aliases.remove(&(node_id, object_id));
                Ok(None)
            }
            Message::MatchReply { .. } => {
                // Wrong direction; drop and count.
                self.counters.malformed_dropped += 1;
                Ok(None)
            }
        }
    }

    fn ensure_sender(&mut self, from: u64, claimed: u64) -> Result<(), ServerError> {
        if from != claimed {
            self.counters.malformed_dropped += 1;
            return Err(ServerError::UnknownNode(claimed));
        }
        Ok(())
    }

    /// Translates a node-local object ID to the global ID recorded at query
    /// time; IDs with no alias are taken as raw global IDs.
    fn resolve_alias(&self, node: u64, object_id: u64) -> u64 {
        self.aliases
            .get(&(node, object_id))
            .copied()
            .unwrap_or(object_id)
    }

    /// Every `(node, temp_id) -> global_id` resolution the server ever made.
    pub fn alias_history(&self) -> &BTreeMap<(u64, u64), u64> {
        &self.alias_log
    }
}
