//! Relay-network graphs and their text format.
//!
//! ```text
//! # hybrid network
//! node S  source power=1
//! node R1 relay ef power=1
//! node D  destination
//! edge S R1 gain=1
//! edge R1 D gain=0.8,-0.6
//! ```
//!
//! Complex gains are written `re,im`. Every receiving node adds its own unit
//! noise to the superposition of its predecessors.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::relayfn::RelayKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    Source,
    Relay,
    Destination,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub role: Role,
    /// Relays only.
    pub strategy: Option<RelayKind>,
    /// Transmit power (source power P or relay power P_R).
    pub power: f64,
    /// Predecessor index and link gain.
    pub incoming: Vec<(usize, Complex64)>,
}

/// A validated directed acyclic relay network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    nodes: Vec<Node>,
    order: Vec<usize>,
    source: usize,
    destination: usize,
}

fn topo(msg: impl Into<String>) -> Error {
    Error::InvalidTopology(msg.into())
}

/// Incremental construction of a [`Topology`].
#[derive(Debug, Clone, Default)]
pub struct TopologyBuilder {
    nodes: Vec<Node>,
    index: HashMap<String, usize>,
}

impl TopologyBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(mut self, id: &str, role: Role, strategy: Option<RelayKind>, power: f64) -> Result<Self> {
        if self.index.contains_key(id) {
            return Err(topo(format!("duplicate node '{id}'")));
        }
        if id.is_empty() || id.chars().any(char::is_whitespace) {
            return Err(topo(format!("bad node id '{id}'")));
        }
        match (role, strategy) {
            (Role::Relay, None) => return Err(topo(format!("relay '{id}' needs a strategy"))),
            (Role::Source | Role::Destination, Some(_)) => {
                return Err(topo(format!("only relays carry a strategy ('{id}')")))
            }
            _ => {}
        }
        if role != Role::Destination && !(power > 0.0 && power.is_finite()) {
            return Err(topo(format!("node '{id}' needs a positive power, got {power}")));
        }
        self.index.insert(id.to_string(), self.nodes.len());
        self.nodes.push(Node { id: id.to_string(), role, strategy, power, incoming: Vec::new() });
        Ok(self)
    }

    pub fn edge(mut self, from: &str, to: &str, gain: Complex64) -> Result<Self> {
        let f = *self.index.get(from).ok_or_else(|| topo(format!("edge from unknown node '{from}'")))?;
        let t = *self.index.get(to).ok_or_else(|| topo(format!("edge to unknown node '{to}'")))?;
        if f == t {
            return Err(topo(format!("self loop at '{from}'")));
        }
        if !(gain.re.is_finite() && gain.im.is_finite()) || gain.norm() == 0.0 {
            return Err(topo(format!("edge {from}→{to} needs a finite nonzero gain")));
        }
        if self.nodes[t].incoming.iter().any(|(p, _)| *p == f) {
            return Err(topo(format!("duplicate edge {from}→{to}")));
        }
        self.nodes[t].incoming.push((f, gain));
        Ok(self)
    }

    pub fn build(self) -> Result<Topology> {
        Topology::validate(self.nodes)
    }
}

impl Topology {
    fn validate(nodes: Vec<Node>) -> Result<Self> {
        let find = |role: Role| -> Result<usize> {
            let hits: Vec<usize> = nodes.iter().enumerate().filter(|(_, n)| n.role == role).map(|(i, _)| i).collect();
            match hits.as_slice() {
                [one] => Ok(*one),
                _ => Err(topo(format!("expected exactly one {role:?} node, found {}", hits.len()))),
            }
        };
        let source = find(Role::Source)?;
        let destination = find(Role::Destination)?;
        let n = nodes.len();
        let mut succ = vec![Vec::new(); n];
        for (i, node) in nodes.iter().enumerate() {
            for (p, _) in &node.incoming {
                succ[*p].push(i);
            }
        }
        if !nodes[source].incoming.is_empty() {
            return Err(topo("the source cannot receive"));
        }
        if !succ[destination].is_empty() {
            return Err(topo("the destination cannot transmit"));
        }
        for node in &nodes {
            if node.role != Role::Source && node.incoming.is_empty() {
                return Err(topo(format!("node '{}' has no predecessor", node.id)));
            }
        }
        // Kahn's algorithm, smallest index first for a stable order
        let mut indeg: Vec<usize> = nodes.iter().map(|n| n.incoming.len()).collect();
        let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = ready.pop_first() {
            order.push(i);
            for &s in &succ[i] {
                indeg[s] -= 1;
                if indeg[s] == 0 {
                    ready.insert(s);
                }
            }
        }
        if order.len() != n {
            return Err(topo("the network contains a cycle"));
        }
        let reach = |start: usize, next: &dyn Fn(usize) -> Vec<usize>| {
            let mut seen = vec![false; n];
            let mut stack = vec![start];
            while let Some(i) = stack.pop() {
                if !std::mem::replace(&mut seen[i], true) {
                    stack.extend(next(i));
                }
            }
            seen
        };
        let from_source = reach(source, &|i| succ[i].clone());
        let to_dest = reach(destination, &|i| nodes[i].incoming.iter().map(|(p, _)| *p).collect());
        for (i, node) in nodes.iter().enumerate() {
            if !from_source[i] || !to_dest[i] {
                return Err(topo(format!("node '{}' is not on a source-to-destination path", node.id)));
            }
        }
        Ok(Self { nodes, order, source, destination })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &Node {
        &self.nodes[i]
    }

    /// Node indices in topological order.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn destination(&self) -> usize {
        self.destination
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn source_power(&self) -> f64 {
        self.nodes[self.source].power
    }

    /// Relay indices in topological order.
    pub fn relays(&self) -> Vec<usize> {
        self.order.iter().copied().filter(|&i| self.nodes[i].role == Role::Relay).collect()
    }

    /// Successor indices of node `i`.
    pub fn successors(&self, i: usize) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&j| self.nodes[j].incoming.iter().any(|(p, _)| *p == i)).collect()
    }

    /// Relays (not the source) that node `i` depends on, including itself when a relay.
    pub fn relay_ancestors(&self, i: usize) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        let mut stack = vec![i];
        while let Some(j) = stack.pop() {
            if self.nodes[j].role == Role::Relay && out.insert(j) {
                stack.extend(self.nodes[j].incoming.iter().map(|(p, _)| *p));
            } else if self.nodes[j].role == Role::Destination {
                stack.extend(self.nodes[j].incoming.iter().map(|(p, _)| *p));
            }
        }
        out
    }

    /// True when the predecessors of every node are conditionally independent
    /// given the source symbol (their relay ancestries are disjoint).
    pub fn has_independent_inputs(&self) -> bool {
        self.nodes.iter().all(|node| {
            let mut seen = BTreeSet::new();
            node.incoming.iter().all(|(p, _)| {
                let anc = self.relay_ancestors(*p);
                let ok = anc.is_disjoint(&seen);
                seen.extend(anc);
                ok
            })
        })
    }

    /// Same graph with every relay switched to `kind`.
    pub fn with_strategy(&self, kind: RelayKind) -> Self {
        let mut t = self.clone();
        for node in &mut t.nodes {
            if node.role == Role::Relay {
                node.strategy = Some(kind);
            }
        }
        t
    }

    /// Same graph with one relay switched to `kind`.
    pub fn with_node_strategy(&self, id: &str, kind: RelayKind) -> Result<Self> {
        let i = self.index_of(id).ok_or_else(|| topo(format!("unknown node '{id}'")))?;
        if self.nodes[i].role != Role::Relay {
            return Err(topo(format!("'{id}' is not a relay")));
        }
        let mut t = self.clone();
        t.nodes[i].strategy = Some(kind);
        Ok(t)
    }

    /// Same graph with the source power and every relay power replaced.
    pub fn with_powers(&self, source_power: f64, relay_power: f64) -> Result<Self> {
        if !(source_power > 0.0 && relay_power > 0.0) {
            return Err(topo("powers must be positive"));
        }
        let mut t = self.clone();
        for node in &mut t.nodes {
            match node.role {
                Role::Source => node.power = source_power,
                Role::Relay => node.power = relay_power,
                Role::Destination => {}
            }
        }
        Ok(t)
    }

    /// Source → destination.
    pub fn direct(power: f64) -> Result<Self> {
        TopologyBuilder::new()
            .node("S", Role::Source, None, power)?
            .node("D", Role::Destination, None, 0.0)?
            .edge("S", "D", Complex64::new(1.0, 0.0))?
            .build()
    }

    /// Source → one relay → destination.
    pub fn single(kind: RelayKind, power: f64, relay_power: f64) -> Result<Self> {
        Self::serial(&[kind], power, relay_power)
    }

    /// `L` relays heard by the source with the given gains, summed at the destination
    /// over unit-gain links.
    pub fn parallel(kind: RelayKind, gains: &[Complex64], power: f64, relay_power: f64) -> Result<Self> {
        if gains.is_empty() {
            return Err(topo("a parallel network needs at least one relay"));
        }
        let mut b = TopologyBuilder::new().node("S", Role::Source, None, power)?;
        for i in 0..gains.len() {
            b = b.node(&format!("R{}", i + 1), Role::Relay, Some(kind), relay_power)?;
        }
        b = b.node("D", Role::Destination, None, 0.0)?;
        for (i, g) in gains.iter().enumerate() {
            let id = format!("R{}", i + 1);
            b = b.edge("S", &id, *g)?.edge(&id, "D", Complex64::new(1.0, 0.0))?;
        }
        b.build()
    }

    /// `L` unit-gain parallel relays.
    pub fn parallel_uniform(kind: RelayKind, relays: usize, power: f64, relay_power: f64) -> Result<Self> {
        Self::parallel(kind, &vec![Complex64::new(1.0, 0.0); relays], power, relay_power)
    }

    /// A unit-gain chain; `kinds[i]` is the strategy of hop `i + 1`.
    pub fn serial(kinds: &[RelayKind], power: f64, relay_power: f64) -> Result<Self> {
        let mut b = TopologyBuilder::new().node("S", Role::Source, None, power)?;
        for (i, k) in kinds.iter().enumerate() {
            b = b.node(&format!("R{}", i + 1), Role::Relay, Some(*k), relay_power)?;
        }
        b = b.node("D", Role::Destination, None, 0.0)?;
        let ids: Vec<String> = std::iter::once("S".to_string())
            .chain((1..=kinds.len()).map(|i| format!("R{i}")))
            .chain(std::iter::once("D".to_string()))
            .collect();
        for w in ids.windows(2) {
            b = b.edge(&w[0], &w[1], Complex64::new(1.0, 0.0))?;
        }
        b.build()
    }

    /// `L` identical relays in series.
    pub fn serial_uniform(kind: RelayKind, relays: usize, power: f64, relay_power: f64) -> Result<Self> {
        Self::serial(&vec![kind; relays], power, relay_power)
    }

    /// Default hybrid network: the source feeds two parallel relays whose
    /// superposition is received by one serial relay, which feeds the
    /// destination. Unit gains, equal relay powers.
    pub fn hybrid_default(kind: RelayKind, power: f64, relay_power: f64) -> Result<Self> {
        let one = Complex64::new(1.0, 0.0);
        TopologyBuilder::new()
            .node("S", Role::Source, None, power)?
            .node("R1", Role::Relay, Some(kind), relay_power)?
            .node("R2", Role::Relay, Some(kind), relay_power)?
            .node("R3", Role::Relay, Some(kind), relay_power)?
            .node("D", Role::Destination, None, 0.0)?
            .edge("S", "R1", one)?
            .edge("S", "R2", one)?
            .edge("R1", "R3", one)?
            .edge("R2", "R3", one)?
            .edge("R3", "D", one)?
            .build()
    }

    /// Text form accepted by [`FromStr`].
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

fn format_gain(g: Complex64) -> String {
    if g.im == 0.0 {
        format!("{}", g.re)
    } else {
        format!("{},{}", g.re, g.im)
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for node in &self.nodes {
            match node.role {
                Role::Source => writeln!(f, "node {} source power={}", node.id, node.power)?,
                Role::Relay => writeln!(
                    f,
                    "node {} relay {} power={}",
                    node.id,
                    node.strategy.expect("relays carry a strategy"),
                    node.power
                )?,
                Role::Destination => writeln!(f, "node {} destination", node.id)?,
            }
        }
        for node in &self.nodes {
            for (p, g) in &node.incoming {
                writeln!(f, "edge {} {} gain={}", self.nodes[*p].id, node.id, format_gain(*g))?;
            }
        }
        Ok(())
    }
}

fn parse_number(s: &str, line: usize) -> Result<f64> {
    s.parse::<f64>().map_err(|_| topo(format!("line {line}: bad number '{s}'")))
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut b = TopologyBuilder::new();
        for (ln, raw) in text.lines().enumerate() {
            let ln = ln + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let words: Vec<&str> = line.split_whitespace().collect();
            let mut params = HashMap::<String, &str>::new();
            let mut plain = Vec::new();
            for w in &words[1..] {
                match w.split_once('=') {
                    Some((k, v)) => {
                        if params.insert(k.to_ascii_lowercase(), v).is_some() {
                            return Err(topo(format!("line {ln}: repeated '{k}'")));
                        }
                    }
                    None => plain.push(*w),
                }
            }
            match words[0].to_ascii_lowercase().as_str() {
                "node" => {
                    let (id, role) = match plain.as_slice() {
                        [id, role, ..] => (*id, role.to_ascii_lowercase()),
                        _ => return Err(topo(format!("line {ln}: expected 'node ID ROLE ...'"))),
                    };
                    let role = match role.as_str() {
                        "source" => Role::Source,
                        "relay" => Role::Relay,
                        "destination" => Role::Destination,
                        other => return Err(topo(format!("line {ln}: unknown role '{other}'"))),
                    };
                    let strategy = match (role, plain.get(2)) {
                        (Role::Relay, Some(s)) => {
                            let k: RelayKind =
                                s.parse().map_err(|_| topo(format!("line {ln}: unknown strategy '{s}'")))?;
                            if k == RelayKind::Custom {
                                return Err(topo(format!("line {ln}: custom maps cannot be declared in a file")));
                            }
                            Some(k)
                        }
                        (Role::Relay, None) => return Err(topo(format!("line {ln}: relay '{id}' needs a strategy"))),
                        (_, Some(extra)) => return Err(topo(format!("line {ln}: unexpected '{extra}'"))),
                        (_, None) => None,
                    };
                    if plain.len() > 3 {
                        return Err(topo(format!("line {ln}: unexpected '{}'", plain[3])));
                    }
                    let power = match params.remove("power") {
                        Some(v) => parse_number(v, ln)?,
                        None if role == Role::Destination => 0.0,
                        None => 1.0,
                    };
                    if let Some(k) = params.keys().next() {
                        return Err(topo(format!("line {ln}: unknown key '{k}'")));
                    }
                    b = b.node(id, role, strategy, power)?;
                }
                "edge" => {
                    let [from, to] = plain.as_slice() else {
                        return Err(topo(format!("line {ln}: expected 'edge FROM TO [gain=..]'")));
                    };
                    let gain = match params.remove("gain") {
                        None => Complex64::new(1.0, 0.0),
                        Some(v) => match v.split_once(',') {
                            Some((re, im)) => Complex64::new(parse_number(re, ln)?, parse_number(im, ln)?),
                            None => Complex64::new(parse_number(v, ln)?, 0.0),
                        },
                    };
                    if let Some(k) = params.keys().next() {
                        return Err(topo(format!("line {ln}: unknown key '{k}'")));
                    }
                    b = b.edge(from, to, gain)?;
                }
                other => return Err(topo(format!("line {ln}: unknown directive '{other}'"))),
            }
        }
        b.build()
    }
}
