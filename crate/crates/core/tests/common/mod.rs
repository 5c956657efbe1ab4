//! Independent reference implementations used by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeSet;

use nacc_core::arch::{GridArch, GridPoint};
use nacc_core::circuit::CzCircuit;
use nacc_core::embed::Mapping;
use nacc_core::graph::Graph;
use rand::seq::SliceRandom;
use rand::Rng;

/// Layer of every gate by longest path in the gate dependency DAG.
pub fn longest_path_layers(c: &CzCircuit) -> Vec<usize> {
    let gates = c.gates();
    let mut layer = vec![0usize; gates.len()];
    for j in 0..gates.len() {
        for i in 0..j {
            if gates[i].shares_qubit(&gates[j]) {
                layer[j] = layer[j].max(layer[i] + 1);
            }
        }
    }
    layer
}

pub fn longest_path_depth(c: &CzCircuit) -> usize {
    longest_path_layers(c).iter().map(|l| l + 1).max().unwrap_or(0)
}

/// Every injection of the non-isolated vertices of `ig` into the grid that
/// carries edges onto architecture edges, by exhaustive search.
pub fn brute_core_embeddings(ig: &Graph, arch: &GridArch) -> BTreeSet<Vec<(usize, GridPoint)>> {
    let core = ig.non_isolated();
    let sites: Vec<GridPoint> = (0..arch.site_count()).map(|i| arch.point(i)).collect();
    let mut out = BTreeSet::new();
    let mut chosen: Vec<GridPoint> = Vec::new();
    fn rec(
        k: usize,
        core: &[usize],
        sites: &[GridPoint],
        chosen: &mut Vec<GridPoint>,
        ig: &Graph,
        arch: &GridArch,
        out: &mut BTreeSet<Vec<(usize, GridPoint)>>,
    ) {
        if k == core.len() {
            let ok = ig.edges().all(|(a, b)| {
                let pa = chosen[core.iter().position(|&v| v == a).unwrap()];
                let pb = chosen[core.iter().position(|&v| v == b).unwrap()];
                arch.connected(pa, pb)
            });
            if ok {
                out.insert(core.iter().copied().zip(chosen.iter().copied()).collect());
            }
            return;
        }
        for &s in sites {
            if !chosen.contains(&s) {
                chosen.push(s);
                rec(k + 1, core, sites, chosen, ig, arch, out);
                chosen.pop();
            }
        }
    }
    rec(0, &core, &sites, &mut chosen, ig, arch, &mut out);
    out
}

pub fn core_projection(m: &Mapping, ig: &Graph) -> Vec<(usize, GridPoint)> {
    ig.non_isolated().into_iter().map(|v| (v, m.get(v))).collect()
}

pub fn random_mapping(n: usize, arch: &GridArch, rng: &mut impl Rng) -> Mapping {
    let mut sites: Vec<GridPoint> = (0..arch.site_count()).map(|i| arch.point(i)).collect();
    sites.shuffle(rng);
    sites.truncate(n);
    Mapping::new(sites, arch).unwrap()
}

pub fn random_graph(n: usize, p: f64, rng: &mut impl Rng) -> Graph {
    let mut g = Graph::new(n);
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(p) {
                g.add_edge(a, b);
            }
        }
    }
    g
}

/// `m` CZ gates cycling along the path 0-1-...-(n-1).
pub fn chain_circuit(n: usize, m: usize) -> CzCircuit {
    CzCircuit::new(n, (0..m).map(|i| (i % (n - 1), i % (n - 1) + 1))).unwrap()
}

/// `exp(-T_idle/T2) * f_cz^m * f_trans^s` evaluated as a plain product.
pub fn direct_fidelity(n: usize, m: usize, h: usize, s: usize, d_um: f64, p: &nacc_core::HardwareParams) -> f64 {
    let t = h as f64 * p.t_cz + s as f64 * p.t_trans + d_um / p.v;
    let idle = n as f64 * t - m as f64 * p.t_cz;
    let mut f = (-idle / p.t2).exp();
    for _ in 0..m {
        f *= p.f_cz;
    }
    for _ in 0..s {
        f *= p.f_trans;
    }
    f
}
