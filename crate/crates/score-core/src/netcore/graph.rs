use super::NetError;
use ndarray::Array2;
use std::collections::BTreeSet;
use std::io::BufRead;
use std::path::Path;

/// A simple graph with contiguous node ids `0..n`.
///
/// Self-loops are dropped and duplicate edges deduplicated at construction.
/// Undirected edges are stored once with endpoints in increasing order.
#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    directed: bool,
    edges: Vec<(u32, u32)>,
    /// Outgoing neighbors per node; for undirected graphs simply neighbors.
    adj: Vec<Vec<u32>>,
    /// Incoming neighbors; only populated for directed graphs.
    radj: Vec<Vec<u32>>,
}

impl Graph {
    /// Build a graph from an edge iterator.
    ///
    /// `n` fixes the node count; with `None` it is inferred as one plus the
    /// largest endpoint. Self-loops are silently dropped, duplicates (and for
    /// undirected graphs, reversed duplicates) are merged.
    pub fn from_edges<I>(n: Option<usize>, edges: I, directed: bool) -> Result<Graph, NetError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut set: BTreeSet<(u32, u32)> = BTreeSet::new();
        let mut max_id: Option<usize> = None;
        for (u, v) in edges {
            if u == v {
                continue;
            }
            max_id = Some(max_id.map_or(u.max(v), |m| m.max(u).max(v)));
            let (a, b) = if directed || u < v { (u, v) } else { (v, u) };
            if a > u32::MAX as usize || b > u32::MAX as usize {
                return Err(NetError::InvalidParams(format!(
                    "node id {} exceeds supported range",
                    a.max(b)
                )));
            }
            set.insert((a as u32, b as u32));
        }
        let inferred = max_id.map_or(0, |m| m + 1);
        let n = match n {
            Some(explicit) => {
                if inferred > explicit {
                    return Err(NetError::InvalidParams(format!(
                        "edge endpoint {} out of range for declared n = {}",
                        inferred - 1,
                        explicit
                    )));
                }
                explicit
            }
            None => inferred,
        };
        let edges: Vec<(u32, u32)> = set.into_iter().collect();
        let mut adj = vec![Vec::new(); n];
        let mut radj = vec![Vec::new(); if directed { n } else { 0 }];
        for &(u, v) in &edges {
            adj[u as usize].push(v);
            if directed {
                radj[v as usize].push(u);
            } else {
                adj[v as usize].push(u);
            }
        }
        for list in adj.iter_mut().chain(radj.iter_mut()) {
            list.sort_unstable();
        }
        Ok(Graph {
            n,
            directed,
            edges,
            adj,
            radj,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Number of stored edges (each undirected edge counted once).
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Edges in canonical (sorted) order.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    /// Neighbors of `i` (outgoing neighbors when directed), sorted.
    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.adj[i]
    }

    /// Degree sequence; for directed graphs this is the out-degree.
    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    /// Dense adjacency matrix view (0/1 entries, zero diagonal).
    pub fn adjacency(&self) -> Array2<f64> {
        let mut a = Array2::zeros((self.n, self.n));
        for &(u, v) in &self.edges {
            a[[u as usize, v as usize]] = 1.0;
            if !self.directed {
                a[[v as usize, u as usize]] = 1.0;
            }
        }
        a
    }

    /// Connected components (weak connectivity for directed graphs), each
    /// sorted ascending; components ordered by their smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            let mut comp = Vec::new();
            let mut queue = std::collections::VecDeque::from([start]);
            seen[start] = true;
            while let Some(u) = queue.pop_front() {
                comp.push(u);
                let incoming = if self.directed {
                    self.radj[u].as_slice()
                } else {
                    &[]
                };
                for &v in self.adj[u].iter().chain(incoming.iter()) {
                    if !seen[v as usize] {
                        seen[v as usize] = true;
                        queue.push_back(v as usize);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.components().len() == 1
    }

    /// Subgraph induced by `nodes` (need not be sorted; duplicates rejected).
    ///
    /// Returns the subgraph with nodes relabeled `0..m` in the order given,
    /// together with the map from new index to original id.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Result<(Graph, Vec<usize>), NetError> {
        let mut old_to_new = vec![usize::MAX; self.n];
        for (new, &old) in nodes.iter().enumerate() {
            if old >= self.n {
                return Err(NetError::InvalidParams(format!(
                    "node {old} out of range for graph of size {}",
                    self.n
                )));
            }
            if old_to_new[old] != usize::MAX {
                return Err(NetError::InvalidParams(format!(
                    "node {old} listed twice in induced subgraph"
                )));
            }
            old_to_new[old] = new;
        }
        let edges = self.edges.iter().filter_map(|&(u, v)| {
            let (nu, nv) = (old_to_new[u as usize], old_to_new[v as usize]);
            (nu != usize::MAX && nv != usize::MAX).then_some((nu, nv))
        });
        let sub = Graph::from_edges(Some(nodes.len()), edges, self.directed)?;
        Ok((sub, nodes.to_vec()))
    }
}

/// Options for [`load_edge_list`].
#[derive(Debug, Clone, Copy, Default)]
pub struct EdgeListOptions {
    /// Treat each line as a directed edge `u -> v`.
    pub directed: bool,
    /// Node ids in the file start at 1; subtract one while loading.
    pub one_indexed: bool,
}

/// Load a whitespace-separated edge list.
///
/// Each non-blank line carries two integer node ids; `#` starts a comment that
/// runs to the end of the line. Self-loops are dropped and duplicate edges
/// merged. A file with no edges at all is an error, as is any malformed line
/// (reported with its 1-based line number).
pub fn load_edge_list<P: AsRef<Path>>(path: P, opts: EdgeListOptions) -> Result<Graph, NetError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| NetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let reader = std::io::BufReader::new(file);
    let mut edges = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| NetError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let content = line.split('#').next().unwrap_or("");
        let mut fields = content.split_whitespace();
        let (Some(a), Some(b)) = (fields.next(), fields.next()) else {
            if content.trim().is_empty() {
                continue;
            }
            return Err(NetError::Parse {
                line: line_no,
                msg: format!("expected two node ids, got {:?}", content.trim()),
            });
        };
        if let Some(extra) = fields.next() {
            return Err(NetError::Parse {
                line: line_no,
                msg: format!("unexpected trailing field {extra:?}"),
            });
        }
        let parse = |tok: &str| -> Result<usize, NetError> {
            tok.parse::<usize>().map_err(|_| NetError::Parse {
                line: line_no,
                msg: format!("invalid node id {tok:?}"),
            })
        };
        let (mut u, mut v) = (parse(a)?, parse(b)?);
        if opts.one_indexed {
            if u == 0 || v == 0 {
                return Err(NetError::Parse {
                    line: line_no,
                    msg: "node id 0 in a one-indexed file".into(),
                });
            }
            u -= 1;
            v -= 1;
        }
        edges.push((u, v));
    }
    if edges.is_empty() {
        return Err(NetError::EmptyEdgeList);
    }
    Graph::from_edges(None, edges, opts.directed)
}

/// Largest connected component (weak connectivity for directed graphs).
///
/// Ties on size go to the component whose smallest original node id is
/// smallest. Returns the induced subgraph and the map from new index to
/// original id.
pub fn giant_component(g: &Graph) -> (Graph, Vec<usize>) {
    let comps = g.components();
    let best = comps
        .iter()
        .max_by(|a, b| a.len().cmp(&b.len()).then(b[0].cmp(&a[0])))
        .cloned()
        .unwrap_or_default();
    let (sub, map) = g
        .induced_subgraph(&best)
        .expect("component nodes are valid by construction");
    (sub, map)
}
