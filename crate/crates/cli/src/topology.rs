use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use unisynth::skeletons::{
    full_skeleton_with_layers, graph_skeleton, line_skeleton, required_layers, required_layers_constrained,
    star_skeleton_default, CouplingGraph,
};
use unisynth::Skeleton;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Topology {
    /// Full for even `n`, line for odd `n`.
    Auto,
    Full,
    Star,
    Line,
    CustomGraph(PathBuf),
}

impl Topology {
    pub fn parse(name: &str, graph: Option<&Path>) -> Result<Self> {
        Ok(match name {
            "auto" => Topology::Auto,
            "full" => Topology::Full,
            "star" => Topology::Star,
            "line" => Topology::Line,
            "graph" => match graph {
                Some(p) => Topology::CustomGraph(p.to_path_buf()),
                None => bail!("--topology graph needs --graph FILE"),
            },
            other => bail!("unknown topology {other:?} (expected auto, full, star, line or graph)"),
        })
    }

    pub fn resolve(&self, n: usize) -> Topology {
        match self {
            Topology::Auto if n % 2 == 0 => Topology::Full,
            Topology::Auto => Topology::Line,
            other => other.clone(),
        }
    }
}

/// Circuit depth request. `SLayers` counts single-qubit layers, so the
/// skeleton gets one fewer CNOT layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Depth {
    Auto,
    SLayers(usize),
    CnotLayers(usize),
}

impl Depth {
    pub fn parse(layers: &str, cnot_layers: Option<usize>) -> Result<Self> {
        if let Some(l) = cnot_layers {
            return Ok(Depth::CnotLayers(l));
        }
        if layers == "auto" {
            return Ok(Depth::Auto);
        }
        let l: usize = layers.parse().with_context(|| format!("--layers expects a number or auto, got {layers:?}"))?;
        if l == 0 {
            bail!("--layers must be at least 1");
        }
        Ok(Depth::SLayers(l))
    }
}

#[derive(Deserialize)]
struct GraphFile {
    n_qubits: usize,
    edges: Vec<(usize, usize)>,
}

pub fn load_graph(path: &Path) -> Result<CouplingGraph> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let g: GraphFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(CouplingGraph::new(g.n_qubits, g.edges)?)
}

pub fn build_skeleton(n: usize, topology: &Topology, depth: Depth) -> Result<Skeleton> {
    if n == 0 {
        bail!("--n must be at least 1");
    }
    let topology = topology.resolve(n);
    if n == 1 {
        return Ok(Skeleton::new(1, vec![], unisynth::Dressing::Full)?);
    }
    let skeleton = match topology {
        Topology::Full => {
            if n % 2 == 1 {
                bail!(
                    "full topology needs an even qubit count: the one-factorization of K_{n} does not exist for odd n \
                     (use --topology line, star or graph)"
                );
            }
            let s_layers = match depth {
                Depth::Auto => required_layers(n),
                Depth::SLayers(l) => l,
                Depth::CnotLayers(l) => l + 1,
            };
            full_skeleton_with_layers(n, s_layers)?
        }
        Topology::Star => constrained(depth, |l| star_skeleton_default(n, l))?,
        Topology::Line => constrained(depth, |l| line_skeleton(n, l))?,
        Topology::CustomGraph(path) => {
            let graph = load_graph(&path)?;
            if graph.n_qubits() != n {
                bail!("graph file has {} qubits but --n is {n}", graph.n_qubits());
            }
            constrained(depth, |l| graph_skeleton(&graph, l))?
        }
        Topology::Auto => unreachable!("resolved above"),
    };
    Ok(skeleton)
}

fn constrained<F>(depth: Depth, generator: F) -> Result<Skeleton>
where
    F: Fn(usize) -> unisynth::Result<Skeleton>,
{
    let cnot_layers = match depth {
        Depth::Auto => required_layers_constrained_checked(&generator)?,
        Depth::SLayers(l) => l - 1,
        Depth::CnotLayers(l) => l,
    };
    Ok(generator(cnot_layers)?)
}

fn required_layers_constrained_checked<F>(generator: &F) -> Result<usize>
where
    F: Fn(usize) -> unisynth::Result<Skeleton>,
{
    let n = generator(0)?.n_qubits();
    required_layers_constrained(n, generator).context("searching for the minimal adequate depth")
}
