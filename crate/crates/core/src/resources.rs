//! Gate and CNOT counts, heavy-hex topologies and swap-routing upper bounds.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ResourceError {
    #[error("formula needs L >= 5, got {0}")]
    TooFewSites(usize),
    #[error("depth must be at least 1")]
    ZeroDepth,
    #[error("unknown preset or family '{0}'")]
    Unknown(String),
    #[error("mode {0} is not mapped")]
    Unmapped(usize),
    #[error("mapping assigns node '{0}' twice")]
    NotInjective(String),
    #[error("node '{0}' is not in the topology")]
    MissingNode(String),
    #[error("bad preset data: {0}")]
    Data(String),
}

/// SWAP cost in CNOTs.
pub const SWAP_CNOTS: usize = 3;

/// Undirected coupling graph with labelled nodes.
#[derive(Clone, Debug)]
pub struct Topology {
    pub labels: Vec<String>,
    pub adjacency: Vec<Vec<usize>>,
    index: HashMap<String, usize>,
}

impl Topology {
    pub fn from_edges(labels: Vec<String>, edges: &[(usize, usize)]) -> Self {
        let mut adjacency = vec![Vec::new(); labels.len()];
        for &(a, b) in edges {
            if a != b && !adjacency[a].contains(&b) {
                adjacency[a].push(b);
                adjacency[b].push(a);
            }
        }
        for row in &mut adjacency {
            row.sort_unstable();
        }
        let index = labels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
        Topology { labels, adjacency, index }
    }

    pub fn all_to_all(n: usize) -> Self {
        let labels = (0..n).map(|i| format!("q{i}")).collect();
        let edges: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        Self::from_edges(labels, &edges)
    }

    /// Heavy-hex patch: a brick-wall hexagonal lattice of `rows x cols` cells
    /// with one extra qubit on every edge.
    ///
    /// Vertex `(i, j)` is labelled `v(i,j)`; the qubit on the edge between
    /// vertices `a` and `b` (sorted) is `e(ai,aj|bi,bj)`.
    pub fn heavy_hex(rows: usize, cols: usize) -> Self {
        let mut verts = std::collections::BTreeSet::new();
        let mut edges = std::collections::BTreeSet::new();
        for i in 0..rows {
            let mut j = i % 2;
            while j + 2 <= 2 * cols + 1 {
                let cell = [(i, j), (i, j + 1), (i, j + 2), (i + 1, j), (i + 1, j + 1), (i + 1, j + 2)];
                verts.extend(cell);
                edges.insert(((i, j), (i, j + 1)));
                edges.insert(((i, j + 1), (i, j + 2)));
                edges.insert(((i + 1, j), (i + 1, j + 1)));
                edges.insert(((i + 1, j + 1), (i + 1, j + 2)));
                edges.insert(((i, j), (i + 1, j)));
                edges.insert(((i, j + 2), (i + 1, j + 2)));
                j += 2;
            }
        }
        let mut labels: Vec<String> = verts.iter().map(|&(i, j)| format!("v({i},{j})")).collect();
        let vindex: HashMap<(usize, usize), usize> = verts.iter().enumerate().map(|(k, &v)| (v, k)).collect();
        let mut links = Vec::new();
        for &(a, b) in &edges {
            let e = labels.len();
            labels.push(format!("e({},{}|{},{})", a.0, a.1, b.0, b.1));
            links.push((e, vindex[&a]));
            links.push((e, vindex[&b]));
        }
        Self::from_edges(labels, &links)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn node(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn degree(&self, n: usize) -> usize {
        self.adjacency[n].len()
    }

    pub fn n_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn bfs(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.len()];
        dist[source] = Some(0);
        let mut q = VecDeque::from([source]);
        while let Some(u) = q.pop_front() {
            let du = dist[u].expect("visited");
            for &w in &self.adjacency[u] {
                if dist[w].is_none() {
                    dist[w] = Some(du + 1);
                    q.push_back(w);
                }
            }
        }
        dist
    }

    /// All-pairs shortest-path lengths; `None` between disconnected nodes.
    pub fn distances(&self) -> Vec<Vec<Option<usize>>> {
        (0..self.len()).map(|s| self.bfs(s)).collect()
    }

    pub fn is_connected(&self) -> bool {
        self.is_empty() || self.bfs(0).iter().all(Option::is_some)
    }

    /// Breadth-first visiting order from `seed`, restricted to `allowed`,
    /// neighbours taken in label order.
    pub fn bfs_order(&self, seed: usize, allowed: &dyn Fn(usize) -> bool) -> Vec<usize> {
        let mut order = vec![seed];
        let mut seen = vec![false; self.len()];
        seen[seed] = true;
        let mut k = 0;
        while k < order.len() {
            let u = order[k];
            k += 1;
            let mut next: Vec<usize> = self.adjacency[u].clone();
            next.sort_by(|a, b| self.labels[*a].cmp(&self.labels[*b]));
            for w in next {
                if !seen[w] && allowed(w) {
                    seen[w] = true;
                    order.push(w);
                }
            }
        }
        order
    }

    /// Planar position: vertex `(i, j)` at `(i, j)`, edge qubits at the midpoint.
    pub fn coordinate(&self, n: usize) -> Option<(f64, f64)> {
        let lab = &self.labels[n];
        let nums: Vec<f64> = lab
            .trim_start_matches(['v', 'e'])
            .trim_matches(['(', ')'])
            .split([',', '|'])
            .map(|s| s.parse().ok())
            .collect::<Option<Vec<f64>>>()?;
        match nums.len() {
            2 => Some((nums[0], nums[1])),
            4 => Some(((nums[0] + nums[2]) / 2.0, (nums[1] + nums[3]) / 2.0)),
            _ => None,
        }
    }
}

/// Assignment of fermionic modes (blocked order: up sites, then down sites)
/// to topology nodes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Mapping {
    pub name: String,
    pub sites: usize,
    pub nodes: Vec<usize>,
}

impl Mapping {
    pub fn new(name: &str, sites: usize, nodes: Vec<usize>, topo: &Topology) -> Result<Self, ResourceError> {
        let mut seen = std::collections::HashSet::new();
        for &n in &nodes {
            if n >= topo.len() {
                return Err(ResourceError::MissingNode(format!("#{n}")));
            }
            if !seen.insert(n) {
                return Err(ResourceError::NotInjective(topo.labels[n].clone()));
            }
        }
        Ok(Mapping { name: name.to_string(), sites, nodes })
    }

    pub fn from_labels(name: &str, sites: usize, labels: &[String], topo: &Topology) -> Result<Self, ResourceError> {
        let nodes = labels
            .iter()
            .map(|l| topo.node(l).ok_or_else(|| ResourceError::MissingNode(l.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(name, sites, nodes, topo)
    }
}

#[derive(Deserialize)]
struct PresetFile {
    topology: PresetTopology,
    presets: Vec<PresetEntry>,
}

#[derive(Deserialize)]
struct PresetTopology {
    rows: usize,
    cols: usize,
}

#[derive(Deserialize)]
struct PresetEntry {
    name: String,
    sites: usize,
    modes: Vec<String>,
}

const PRESET_DATA: &str = include_str!("../data/mappings.json");

pub const PRESET_NAMES: [&str; 3] = ["fig7a", "fig7b", "fig7c"];

/// Named heavy-hex mapping together with its topology.
pub fn preset(name: &str) -> Result<(Topology, Mapping), ResourceError> {
    let file: PresetFile = serde_json::from_str(PRESET_DATA).map_err(|e| ResourceError::Data(e.to_string()))?;
    let topo = Topology::heavy_hex(file.topology.rows, file.topology.cols);
    let entry = file.presets.into_iter().find(|p| p.name == name).ok_or_else(|| ResourceError::Unknown(name.to_string()))?;
    if entry.modes.len() != 2 * entry.sites {
        return Err(ResourceError::Data(format!("{} lists {} modes for {} sites", name, entry.modes.len(), entry.sites)));
    }
    let map = Mapping::from_labels(&entry.name, entry.sites, &entry.modes, &topo)?;
    Ok((topo, map))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairKind {
    Hopping(usize),
    Onsite,
    /// Same-spin pair of the all-to-all model.
    SameSpin,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pair {
    pub a: usize,
    pub b: usize,
    pub kind: PairKind,
}

/// Unique mode pairs coupled by periodic hoppings at the given distances and,
/// optionally, by the onsite term.
pub fn interaction_pairs(l: usize, distances: &[usize], onsite: bool) -> Vec<Pair> {
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for s in 0..2 {
        for &r in distances {
            for j in 0..l {
                let (a, b) = (j + s * l, (j + r) % l + s * l);
                let key = (a.min(b), a.max(b));
                if a != b && seen.insert(key) {
                    out.push(Pair { a: key.0, b: key.1, kind: PairKind::Hopping(r) });
                }
            }
        }
    }
    if onsite {
        for j in 0..l {
            out.push(Pair { a: j, b: j + l, kind: PairKind::Onsite });
        }
    }
    out
}

/// Nearest, next-nearest and onsite pairs of one ansatz layer.
pub fn ansatz_pairs(l: usize) -> Vec<Pair> {
    interaction_pairs(l, &[1, 2], true)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SwapBound {
    pub total: usize,
    /// Per pair: `(pair, distance, swaps)`.
    pub pairs: Vec<(Pair, usize, usize)>,
    pub by_kind: BTreeMap<String, usize>,
}

/// Sum over pairs of `2 max(0, d - 1)`: move one partner next to the other and back.
pub fn swap_upper_bound(topo: &Topology, map: &Mapping, pairs: &[Pair]) -> Result<SwapBound, ResourceError> {
    let mut cache: HashMap<usize, Vec<Option<usize>>> = HashMap::new();
    let mut out = Vec::with_capacity(pairs.len());
    let mut by_kind = BTreeMap::new();
    let mut total = 0;
    for &pr in pairs {
        let na = *map.nodes.get(pr.a).ok_or(ResourceError::Unmapped(pr.a))?;
        let nb = *map.nodes.get(pr.b).ok_or(ResourceError::Unmapped(pr.b))?;
        let d = cache.entry(na).or_insert_with(|| topo.bfs(na))[nb]
            .ok_or_else(|| ResourceError::MissingNode(topo.labels[nb].clone()))?;
        let swaps = 2 * d.saturating_sub(1);
        total += swaps;
        let key = match pr.kind {
            PairKind::Hopping(r) => format!("hopping_{r}"),
            PairKind::Onsite => "onsite".to_string(),
            PairKind::SameSpin => "same_spin".to_string(),
        };
        *by_kind.entry(key).or_insert(0) += swaps;
        out.push((pr, d, swaps));
    }
    Ok(SwapBound { total, pairs: out, by_kind })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCategories {
    pub rsy: usize,
    pub rsz: usize,
    pub rsx: usize,
    pub swaps: usize,
}

impl GateCategories {
    fn cnots(&self) -> GateCategories {
        GateCategories { rsy: 2 * self.rsy, rsz: 2 * self.rsz, rsx: 2 * self.rsx, swaps: SWAP_CNOTS * self.swaps }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StaticCounts {
    pub l: usize,
    pub d: usize,
    pub gates: GateCategories,
    pub cnots: GateCategories,
}

fn check_l(l: usize) -> Result<(), ResourceError> {
    if l < 5 {
        return Err(ResourceError::TooFewSites(l));
    }
    Ok(())
}

/// Ansatz gate counts: `(3L-4)d` RsY, `Ld` RsZ, `4Ld` RsX and `(18L-32)d` swaps.
pub fn static_gate_counts(l: usize, d: usize) -> Result<StaticCounts, ResourceError> {
    check_l(l)?;
    if d == 0 {
        return Err(ResourceError::ZeroDepth);
    }
    let gates = GateCategories { rsy: (3 * l - 4) * d, rsz: l * d, rsx: 4 * l * d, swaps: (18 * l - 32) * d };
    Ok(StaticCounts { l, d, gates, cnots: gates.cnots() })
}

/// Per-step Trotter CNOT counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrotterCounts {
    pub l: usize,
    pub u: usize,
    pub t: usize,
    pub t_prime: usize,
    /// `3 (6L)` from the swap formula.
    pub swaps: usize,
}

/// `{U: 2L, t: 28L - 36, t': 56L - 120, swaps: 3 (6L)}`.
pub fn trotter_gate_counts(l: usize) -> Result<TrotterCounts, ResourceError> {
    check_l(l)?;
    Ok(TrotterCounts { l, u: 2 * l, t: 28 * l - 36, t_prime: 56 * l - 120, swaps: SWAP_CNOTS * 6 * l })
}

/// Swap CNOTs printed in the published table for `L = 20`.
pub const TABLE_L20_SWAP_CNOTS: usize = 348;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LeadingTerm {
    pub family: String,
    pub expression: String,
    /// Swap coefficient of `d` at this `L`.
    pub per_layer: usize,
    pub total: usize,
    pub note: String,
}

/// Leading-order swap count formulas of the two mapping families.
pub fn mapping_leading_term(family: &str, l: usize, d: usize) -> Result<LeadingTerm, ResourceError> {
    let (expression, per_layer) = match family {
        "fig7a" => ("(18L-28)d", (18 * l).checked_sub(28).ok_or(ResourceError::TooFewSites(l))?),
        "fig7b" => ("22Ld", 22 * l),
        other => return Err(ResourceError::Unknown(other.to_string())),
    };
    Ok(LeadingTerm {
        family: family.to_string(),
        expression: expression.to_string(),
        per_layer,
        total: per_layer * d,
        note: "leading term of the scaling is 22Ld in both cases".to_string(),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClusterPoint {
    pub l: usize,
    pub same_spin: usize,
    pub onsite: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClusterScaling {
    pub points: Vec<ClusterPoint>,
    /// Log-log slope of the same-spin totals against `L`.
    pub exponent: f64,
}

/// All-to-all same-spin model on a large heavy-hex patch: each spin family
/// fills its own half by breadth-first growth from two adjacent seed vertices.
pub fn all_to_all_scaling(sizes: &[usize]) -> Result<ClusterScaling, ResourceError> {
    let topo = Topology::heavy_hex(8, 8);
    let seed_up = topo.node("v(4,7)").ok_or_else(|| ResourceError::MissingNode("v(4,7)".into()))?;
    let seed_dn = topo.node("v(4,8)").ok_or_else(|| ResourceError::MissingNode("v(4,8)".into()))?;
    let left = |n: usize| topo.coordinate(n).is_some_and(|(_, y)| y < 8.0);
    let up_order = topo.bfs_order(seed_up, &left);
    let dn_order = topo.bfs_order(seed_dn, &|n| !left(n));
    let mut points = Vec::new();
    for &l in sizes {
        if up_order.len() < l || dn_order.len() < l {
            return Err(ResourceError::Data(format!("patch too small for L = {l}")));
        }
        let nodes: Vec<usize> = up_order[..l].iter().chain(&dn_order[..l]).copied().collect();
        let map = Mapping::new("cluster", l, nodes, &topo)?;
        let mut same = Vec::new();
        for s in 0..2 {
            for i in 0..l {
                for j in i + 1..l {
                    same.push(Pair { a: i + s * l, b: j + s * l, kind: PairKind::SameSpin });
                }
            }
        }
        let onsite: Vec<Pair> = (0..l).map(|j| Pair { a: j, b: j + l, kind: PairKind::Onsite }).collect();
        points.push(ClusterPoint {
            l,
            same_spin: swap_upper_bound(&topo, &map, &same)?.total,
            onsite: swap_upper_bound(&topo, &map, &onsite)?.total,
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.l as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| (p.same_spin.max(1) as f64).ln()).collect();
    Ok(ClusterScaling { exponent: slope(&xs, &ys), points })
}

/// Least-squares slope.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Combined report for one `(L, d)`.
pub fn report(l: usize, d: usize) -> Result<serde_json::Value, ResourceError> {
    let st = static_gate_counts(l, d)?;
    let tr = trotter_gate_counts(l)?;
    let mut presets = Vec::new();
    for name in PRESET_NAMES {
        let (topo, map) = preset(name)?;
        let b = swap_upper_bound(&topo, &map, &ansatz_pairs(map.sites))?;
        presets.push(serde_json::json!({ "name": name, "sites": map.sites, "swap_upper_bound": b.total, "by_kind": b.by_kind }));
    }
    let mut value = serde_json::json!({
        "static": st,
        "trotter": tr,
        "presets": presets,
        "leading_terms": [mapping_leading_term("fig7a", l, d)?, mapping_leading_term("fig7b", l, d)?],
    });
    if l == 20 {
        value["trotter_swap_discrepancy"] = serde_json::json!({
            "formula": tr.swaps,
            "table": TABLE_L20_SWAP_CNOTS,
            "note": "the 3(6L) formula gives 360 swap CNOTs at L = 20; the table prints 348",
        });
    }
    Ok(value)
}

/// Plain-text rendering of [`report`].
pub fn report_table(l: usize, d: usize) -> Result<String, ResourceError> {
    let st = static_gate_counts(l, d)?;
    let tr = trotter_gate_counts(l)?;
    let mut s = String::new();
    s.push_str(&format!("statics  L={l} d={d}\n"));
    s.push_str("            RsY    RsZ    RsX  swaps\n");
    s.push_str(&format!("gates   {:>6} {:>6} {:>6} {:>6}\n", st.gates.rsy, st.gates.rsz, st.gates.rsx, st.gates.swaps));
    s.push_str(&format!("cnots   {:>6} {:>6} {:>6} {:>6}\n", st.cnots.rsy, st.cnots.rsz, st.cnots.rsx, st.cnots.swaps));
    s.push_str(&format!("dynamics L={l}\n"));
    s.push_str("              U      t     t'  swaps\n");
    s.push_str(&format!("cnots   {:>6} {:>6} {:>6} {:>6}\n", tr.u, tr.t, tr.t_prime, tr.swaps));
    if l == 20 {
        s.push_str(&format!("note: swap CNOTs by formula {} vs table {}\n", tr.swaps, TABLE_L20_SWAP_CNOTS));
    }
    Ok(s)
}
