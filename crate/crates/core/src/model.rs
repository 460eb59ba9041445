//! Elements, sides, balanced partitions, components and the union-find
//! tracker that turns raw element-pair requests into component merges.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{BisectError, Result};

/// Dense element index in `[0, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ElementId(pub usize);

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Left, Side::Right];

    #[inline]
    pub fn index(self) -> usize {
        match self {
            Side::Left => 0,
            Side::Right => 1,
        }
    }

    #[inline]
    pub fn from_index(i: usize) -> Side {
        if i == 0 {
            Side::Left
        } else {
            Side::Right
        }
    }

    #[inline]
    pub fn flip(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// Rejects odd or too-small universes.
pub fn check_universe(n: usize) -> Result<()> {
    if n < 2 || n % 2 != 0 {
        return Err(BisectError::InvalidSize(n));
    }
    Ok(())
}

/// A balanced assignment of the `n` elements to two clusters of `n/2` each.
/// Serialized as its bit string.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Partition {
    sides: Vec<Side>,
}

impl From<Partition> for String {
    fn from(p: Partition) -> String {
        p.to_bits()
    }
}

impl TryFrom<String> for Partition {
    type Error = BisectError;

    fn try_from(s: String) -> Result<Self> {
        Partition::parse_bits(&s)
    }
}

impl Partition {
    pub fn new(sides: Vec<Side>) -> Result<Self> {
        let n = sides.len();
        check_universe(n)?;
        let left = sides.iter().filter(|&&s| s == Side::Left).count();
        if left != n / 2 {
            return Err(BisectError::Unbalanced {
                left,
                expected: n / 2,
            });
        }
        Ok(Partition { sides })
    }

    /// Elements `0..n/2` on the left, the rest on the right.
    pub fn halves(n: usize) -> Result<Self> {
        check_universe(n)?;
        Ok(Partition {
            sides: (0..n)
                .map(|i| if i < n / 2 { Side::Left } else { Side::Right })
                .collect(),
        })
    }

    /// Builds a partition whose left cluster is exactly `left`.
    pub fn from_left_set(n: usize, left: &[usize]) -> Result<Self> {
        check_universe(n)?;
        let mut sides = vec![Side::Right; n];
        for &v in left {
            if v >= n {
                return Err(BisectError::ElementOutOfRange { element: v, n });
            }
            sides[v] = Side::Left;
        }
        Partition::new(sides)
    }

    /// Parses a string of `0`/`1` characters, one per element.
    pub fn parse_bits(s: &str) -> Result<Self> {
        let sides = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => Ok(Side::Left),
                '1' => Ok(Side::Right),
                other => Err(BisectError::usage(format!(
                    "partition strings use 0 and 1 only, found {other:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Partition::new(sides)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.sides.len()
    }

    #[inline]
    pub fn side(&self, v: ElementId) -> Side {
        self.sides[v.0]
    }

    pub fn sides(&self) -> &[Side] {
        &self.sides
    }

    pub fn left_elements(&self) -> impl Iterator<Item = ElementId> + '_ {
        self.sides
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == Side::Left)
            .map(|(i, _)| ElementId(i))
    }

    /// Number of elements that change cluster between `self` and `other`.
    pub fn dist(&self, other: &Partition) -> Result<usize> {
        if self.n() != other.n() {
            return Err(BisectError::UniverseMismatch(self.n(), other.n()));
        }
        Ok(self
            .sides
            .iter()
            .zip(&other.sides)
            .filter(|(a, b)| a != b)
            .count())
    }

    /// Side of the component, or `None` when the partition splits it.
    pub fn component_side(&self, members: &[ElementId]) -> Option<Side> {
        let first = self.side(*members.first()?);
        members
            .iter()
            .all(|&v| self.side(v) == first)
            .then_some(first)
    }

    /// True when every component of `set` lies on one side.
    pub fn preserves(&self, set: &ComponentSet) -> bool {
        set.n() == self.n()
            && set
                .components()
                .iter()
                .all(|c| self.component_side(&c.members).is_some())
    }

    pub fn to_bits(&self) -> String {
        self.sides
            .iter()
            .map(|s| if *s == Side::Left { '0' } else { '1' })
            .collect()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bits())
    }
}

/// Free function form of [`Partition::dist`].
pub fn dist(p: &Partition, p2: &Partition) -> Result<usize> {
    p.dist(p2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComponentId(pub u64);

impl fmt::Display for ComponentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub id: ComponentId,
    /// Sorted, non-empty.
    pub members: Vec<ElementId>,
}

impl Component {
    #[inline]
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

/// Snapshot of the live components, ordered by component id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentSet {
    n: usize,
    components: Vec<Component>,
}

impl ComponentSet {
    /// Validates that the member sets are disjoint and cover `[0, n)`.
    pub fn new(n: usize, mut components: Vec<Component>) -> Result<Self> {
        check_universe(n)?;
        let mut seen = vec![false; n];
        for c in &mut components {
            if c.members.is_empty() {
                return Err(BisectError::usage(format!("component {} is empty", c.id)));
            }
            c.members.sort_unstable();
            for &v in &c.members {
                if v.0 >= n {
                    return Err(BisectError::ElementOutOfRange { element: v.0, n });
                }
                if std::mem::replace(&mut seen[v.0], true) {
                    return Err(BisectError::usage(format!(
                        "element {v} belongs to two components"
                    )));
                }
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(BisectError::usage(format!(
                "element {v} is not covered by any component"
            )));
        }
        components.sort_by_key(|c| c.id);
        Ok(ComponentSet { n, components })
    }

    /// Components with the given sizes over contiguous element ranges;
    /// component `i` gets id `i`.
    pub fn from_sizes(sizes: &[usize]) -> Result<Self> {
        let n: usize = sizes.iter().sum();
        let mut next = 0;
        let components = sizes
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let members = (next..next + s).map(ElementId).collect();
                next += s;
                Component {
                    id: ComponentId(i as u64),
                    members,
                }
            })
            .collect();
        ComponentSet::new(n, components)
    }

    pub fn singletons(n: usize) -> Result<Self> {
        ComponentSet::from_sizes(&vec![1; n])
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.components.iter().map(Component::size).collect()
    }

    /// Number of components of size exactly `i`.
    pub fn count_of_size(&self, i: usize) -> usize {
        self.components.iter().filter(|c| c.size() == i).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeEvent {
    /// 1-based merge index within the epoch.
    pub step: usize,
    pub absorbed: [ComponentId; 2],
    pub absorbed_sizes: [usize; 2],
    pub result: ComponentId,
    pub result_size: usize,
    /// Endpoints were on different sides at request time.
    pub crossed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ingest {
    pub service: u32,
    pub merge: Option<MergeEvent>,
}

/// Union-find over the elements of one epoch, with union by size, path
/// compression, fresh component ids and per-root member lists.
#[derive(Debug, Clone)]
pub struct ComponentTracker {
    parent: Vec<usize>,
    size: Vec<usize>,
    ids: Vec<ComponentId>,
    members: Vec<Vec<ElementId>>,
    /// `size_counts[i]` = number of live components of size `i`.
    size_counts: Vec<usize>,
    live: usize,
    merges: usize,
    next_id: u64,
}

impl ComponentTracker {
    pub fn new(n: usize) -> Result<Self> {
        check_universe(n)?;
        let mut t = ComponentTracker {
            parent: Vec::new(),
            size: Vec::new(),
            ids: Vec::new(),
            members: Vec::new(),
            size_counts: Vec::new(),
            live: 0,
            merges: 0,
            next_id: 0,
        };
        t.init(n);
        Ok(t)
    }

    fn init(&mut self, n: usize) {
        self.parent = (0..n).collect();
        self.size = vec![1; n];
        self.ids = (0..n as u64).map(ComponentId).collect();
        self.members = (0..n).map(|v| vec![ElementId(v)]).collect();
        self.size_counts = vec![0; n + 1];
        self.size_counts[1] = n;
        self.live = n;
        self.merges = 0;
        self.next_id = n as u64;
    }

    /// Drops every edge: each element becomes a singleton again.
    pub fn reset_epoch(&mut self) {
        let n = self.n();
        self.init(n);
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.parent.len()
    }

    pub fn live_components(&self) -> usize {
        self.live
    }

    /// Merges performed since the last reset.
    pub fn merges(&self) -> usize {
        self.merges
    }

    pub fn count_of_size(&self, i: usize) -> usize {
        self.size_counts.get(i).copied().unwrap_or(0)
    }

    pub fn find(&mut self, v: usize) -> usize {
        let mut root = v;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = v;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn find_readonly(&self, v: usize) -> usize {
        let mut root = v;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        root
    }

    pub fn component_of(&self, v: ElementId) -> ComponentId {
        self.ids[self.find_readonly(v.0)]
    }

    pub fn component_size(&self, v: ElementId) -> usize {
        self.size[self.find_readonly(v.0)]
    }

    pub fn members_of(&self, v: ElementId) -> &[ElementId] {
        &self.members[self.find_readonly(v.0)]
    }

    pub fn same_component(&self, u: ElementId, v: ElementId) -> bool {
        self.find_readonly(u.0) == self.find_readonly(v.0)
    }

    fn check_request(&self, u: ElementId, v: ElementId) -> Result<()> {
        let n = self.n();
        for w in [u, v] {
            if w.0 >= n {
                return Err(BisectError::ElementOutOfRange { element: w.0, n });
            }
        }
        if u == v {
            return Err(BisectError::SelfRequest(u.0));
        }
        Ok(())
    }

    /// Charges the request against `prev` and merges the endpoints'
    /// components if they differ.
    pub fn ingest(&mut self, u: ElementId, v: ElementId, prev: &Partition) -> Result<Ingest> {
        self.check_request(u, v)?;
        if prev.n() != self.n() {
            return Err(BisectError::UniverseMismatch(prev.n(), self.n()));
        }
        let crossed = prev.side(u) != prev.side(v);
        let service = u32::from(crossed);
        let (ru, rv) = (self.find(u.0), self.find(v.0));
        if ru == rv {
            return Ok(Ingest {
                service,
                merge: None,
            });
        }
        let absorbed = [self.ids[ru], self.ids[rv]];
        let absorbed_sizes = [self.size[ru], self.size[rv]];
        let (big, small) = if self.size[ru] >= self.size[rv] {
            (ru, rv)
        } else {
            (rv, ru)
        };
        self.parent[small] = big;
        let moved = std::mem::take(&mut self.members[small]);
        self.members[big].extend(moved);
        let result_size = absorbed_sizes[0] + absorbed_sizes[1];
        self.size[big] = result_size;
        self.size_counts[absorbed_sizes[0]] -= 1;
        self.size_counts[absorbed_sizes[1]] -= 1;
        self.size_counts[result_size] += 1;
        let result = ComponentId(self.next_id);
        self.next_id += 1;
        self.ids[big] = result;
        self.live -= 1;
        self.merges += 1;
        Ok(Ingest {
            service,
            merge: Some(MergeEvent {
                step: self.merges,
                absorbed,
                absorbed_sizes,
                result,
                result_size,
                crossed,
            }),
        })
    }

    fn roots(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n()).filter(|&r| self.parent[r] == r)
    }

    /// Some live component that `p` splits across both sides.
    pub fn split_by(&self, p: &Partition) -> Option<ComponentId> {
        self.roots()
            .find(|&r| p.component_side(&self.members[r]).is_none())
            .map(|r| self.ids[r])
    }

    /// Per side, the live components whose size satisfies `pred`, placed by
    /// their first member.
    pub fn side_counts(&self, p: &Partition, pred: impl Fn(usize) -> bool) -> [usize; 2] {
        let mut out = [0; 2];
        for r in self.roots().filter(|&r| pred(self.size[r])) {
            out[p.side(self.members[r][0]).index()] += 1;
        }
        out
    }

    /// Snapshot of the live components ordered by id.
    pub fn components(&self) -> ComponentSet {
        let mut components: Vec<Component> = (0..self.n())
            .filter(|&r| self.parent[r] == r)
            .map(|r| {
                let mut members = self.members[r].clone();
                members.sort_unstable();
                Component {
                    id: self.ids[r],
                    members,
                }
            })
            .collect();
        components.sort_by_key(|c| c.id);
        ComponentSet {
            n: self.n(),
            components,
        }
    }
}

/// Free function form of [`ComponentTracker::ingest`].
pub fn ingest_request(
    tracker: &mut ComponentTracker,
    u: ElementId,
    v: ElementId,
    prev: &Partition,
) -> Result<Ingest> {
    tracker.ingest(u, v, prev)
}
