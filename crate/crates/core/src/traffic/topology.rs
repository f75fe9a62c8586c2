use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mix::{MixStrategy, UserId};

/// Identifier of a directed network link. Ids start at 1; 0 is reserved
/// for "no activity" in encoded sequences.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LinkId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endpoint {
    User(UserId),
    Node { layer: usize, index: usize },
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::User(u) => write!(f, "{u}"),
            Endpoint::Node { layer, index } => write!(f, "n{layer}.{index}"),
        }
    }
}

/// A directed link between two endpoints.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Link {
    pub from: Endpoint,
    pub to: Endpoint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub strategy: MixStrategy,
    pub honest: bool,
}

/// Bijection between directed links and their integer ids.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinkMap {
    links: Vec<Link>,
    ids: HashMap<Link, LinkId>,
}

impl LinkMap {
    fn push(&mut self, from: Endpoint, to: Endpoint) {
        let link = Link { from, to };
        let id = LinkId(self.links.len() as u32 + 1);
        let prev = self.ids.insert(link, id);
        debug_assert!(prev.is_none(), "duplicate link {link:?}");
        self.links.push(link);
    }

    pub fn id(&self, from: Endpoint, to: Endpoint) -> Option<LinkId> {
        self.ids.get(&Link { from, to }).copied()
    }

    pub fn link(&self, id: LinkId) -> Option<Link> {
        (id.0 as usize).checked_sub(1).and_then(|i| self.links.get(i)).copied()
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (LinkId, Link)> + '_ {
        self.links.iter().enumerate().map(|(i, l)| (LinkId(i as u32 + 1), *l))
    }

    /// Vocabulary covering every link id, the zero token and the
    /// classification token.
    pub fn vocab_size(&self) -> u32 {
        self.links.len() as u32 + 2
    }

    /// The classification token, `vocab_size - 1`.
    pub fn cls_token(&self) -> u32 {
        self.vocab_size() - 1
    }
}

/// Layered mix network. Every message crosses one node per layer.
#[derive(Clone, Debug, PartialEq)]
pub struct Topology {
    users: usize,
    layers: Vec<Vec<NodeSpec>>,
    links: LinkMap,
}

impl Topology {
    pub fn new(users: usize, layers: Vec<Vec<NodeSpec>>) -> Result<Self> {
        if layers.is_empty() || layers.iter().any(|l| l.is_empty()) {
            return Err(Error::config("every layer needs at least one node"));
        }
        for spec in layers.iter().flatten() {
            spec.strategy.validate()?;
        }
        let mut links = LinkMap::default();
        let node = |layer: usize, index: usize| Endpoint::Node { layer, index };
        for u in 0..users {
            for i in 0..layers[0].len() {
                links.push(Endpoint::User(UserId(u as u32)), node(0, i));
            }
        }
        for l in 0..layers.len() - 1 {
            for i in 0..layers[l].len() {
                for j in 0..layers[l + 1].len() {
                    links.push(node(l, i), node(l + 1, j));
                }
            }
        }
        let last = layers.len() - 1;
        for u in 0..users {
            for i in 0..layers[last].len() {
                links.push(node(last, i), Endpoint::User(UserId(u as u32)));
            }
        }
        Ok(Topology { users, layers, links })
    }

    /// One honest node between all users.
    pub fn single(users: usize, strategy: MixStrategy) -> Result<Self> {
        Topology::new(users, vec![vec![NodeSpec { strategy, honest: true }]])
    }

    /// One corrupt (FIFO) node.
    pub fn single_corrupt(users: usize, strategy: MixStrategy) -> Result<Self> {
        Topology::new(users, vec![vec![NodeSpec { strategy, honest: false }]])
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn layers(&self) -> &[Vec<NodeSpec>] {
        &self.layers
    }

    pub fn node(&self, layer: usize, index: usize) -> &NodeSpec {
        &self.layers[layer][index]
    }

    pub fn links(&self) -> &LinkMap {
        &self.links
    }

    /// True when every possible route crosses an honest node, i.e. some
    /// layer is entirely honest.
    pub fn is_anytrust(&self) -> bool {
        self.layers.iter().any(|l| l.iter().all(|n| n.honest))
    }

    pub fn check_route(&self, route: &[usize]) -> Result<()> {
        if route.iter().enumerate().any(|(l, &i)| self.layers[l][i].honest) {
            Ok(())
        } else {
            Err(Error::Anytrust(route.iter().copied().enumerate().collect()))
        }
    }

    pub fn check_anytrust(&self) -> Result<()> {
        if self.is_anytrust() {
            Ok(())
        } else {
            let route = self
                .layers
                .iter()
                .enumerate()
                .map(|(l, nodes)| (l, nodes.iter().position(|n| !n.honest).unwrap_or(0)))
                .collect();
            Err(Error::Anytrust(route))
        }
    }
}
