//! Decorrelating bit selection: correlation graphs, Kernighan-Lin
//! bipartitioning, and the short-code extractor.
//!
//! The filtering stage works best when the four 16-bit subcodes of the
//! 64-bit code are close to independent. To pick the 64 positions out of
//! 256, pairwise bit correlations are estimated over a sample of codes and
//! the 256 positions are split into four groups by recursive graph
//! bisection, minimizing the absolute-correlation weight that stays inside
//! a group. The extractor then takes the 16 lowest positions of each group.

use std::fs;
use std::path::Path;

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::codes::{LongCode, ShortCode, LONG_BITS, SHORT_BITS};
use crate::error::{Error, Result};

/// Independent restarts per bisection; the split with the smallest cut wins.
const KL_RESTARTS: u64 = 8;
/// Hard cap on improvement passes per restart. Plain Kernighan-Lin
/// terminates in a handful of passes; the cap only guards against
/// pathological floating-point gain oscillation.
const KL_MAX_PASSES: usize = 100;

/// A symmetric weighted graph over bit positions. Edge weights are absolute
/// correlations in `[0, 1]`; the diagonal is fixed at zero.
#[derive(Clone, Debug)]
pub struct CorrelationGraph {
    nodes: usize,
    weights: Vec<f64>,
}

impl CorrelationGraph {
    /// A graph over `nodes` positions with all weights zero.
    pub fn new(nodes: usize) -> Self {
        Self { nodes, weights: vec![0.0; nodes * nodes] }
    }

    pub fn len(&self) -> usize {
        self.nodes
    }

    pub fn is_empty(&self) -> bool {
        self.nodes == 0
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.nodes + j]
    }

    /// Sets the symmetric edge weight between two distinct nodes.
    ///
    /// Panics if `i == j` or the weight lies outside `[0, 1]`; both indicate
    /// a caller bug, not recoverable input.
    pub fn set_weight(&mut self, i: usize, j: usize, w: f64) {
        assert!(i != j, "diagonal weights are fixed at zero");
        assert!(
            w.is_finite() && (0.0..=1.0).contains(&w),
            "edge weight must lie in [0, 1], got {w}"
        );
        self.weights[i * self.nodes + j] = w;
        self.weights[j * self.nodes + i] = w;
    }
}

/// Estimates the absolute Pearson correlation between every pair of bit
/// positions over a sample of codes. Bits that are constant in the sample
/// have undefined correlation and get weight 0 to every other bit.
pub fn compute_bit_correlations(sample: &[LongCode]) -> Result<CorrelationGraph> {
    if sample.len() < 2 {
        return Err(Error::SampleTooSmall(sample.len()));
    }
    let n = sample.len();
    let bits = LONG_BITS as usize;
    // Transpose into one bitset per position so each pairwise co-occurrence
    // count is an AND + popcount sweep.
    let words = n.div_ceil(64);
    let mut columns = vec![vec![0u64; words]; bits];
    for (row, code) in sample.iter().enumerate() {
        for pos in 0..LONG_BITS {
            if code.bit(pos) {
                columns[pos as usize][row >> 6] |= 1u64 << (row & 63);
            }
        }
    }
    let n_f = n as f64;
    let ones: Vec<f64> = columns
        .iter()
        .map(|col| col.iter().map(|w| u64::from(w.count_ones())).sum::<u64>() as f64)
        .collect();

    let mut graph = CorrelationGraph::new(bits);
    for i in 0..bits {
        let p_i = ones[i] / n_f;
        let var_i = p_i * (1.0 - p_i);
        if var_i == 0.0 {
            continue;
        }
        for j in (i + 1)..bits {
            let p_j = ones[j] / n_f;
            let var_j = p_j * (1.0 - p_j);
            if var_j == 0.0 {
                continue;
            }
            let both = columns[i]
                .iter()
                .zip(&columns[j])
                .map(|(a, b)| u64::from((a & b).count_ones()))
                .sum::<u64>() as f64;
            let covariance = both / n_f - p_i * p_j;
            // Clamp: with p estimated from the same sample the ratio can
            // exceed 1 by rounding only.
            let corr = (covariance.abs() / (var_i * var_j).sqrt()).min(1.0);
            graph.set_weight(i, j, corr);
        }
    }
    Ok(graph)
}

/// Total edge weight crossing between two node sets.
pub fn cut_weight(graph: &CorrelationGraph, side_a: &[usize], side_b: &[usize]) -> f64 {
    side_a
        .iter()
        .map(|&a| side_b.iter().map(|&b| graph.weight(a, b)).sum::<f64>())
        .sum()
}

/// Splits `positions` into two equal halves with small crossing weight using
/// Kernighan-Lin refinement from a seeded random initial split. Both halves
/// come back sorted ascending. The split is deterministic in
/// `(graph, positions, seed)`.
pub fn kl_bipartition(
    graph: &CorrelationGraph,
    positions: &[usize],
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    kl_bipartition_capped(graph, positions, seed, KL_MAX_PASSES)
}

fn kl_bipartition_capped(
    graph: &CorrelationGraph,
    positions: &[usize],
    seed: u64,
    max_passes: usize,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if positions.len() % 2 != 0 {
        return Err(Error::OddPartition(positions.len()));
    }
    let mut nodes: Vec<usize> = positions.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    nodes.shuffle(&mut rng);
    let m = nodes.len();
    let half = m / 2;
    // side[i]: false = A, true = B, indexing into `nodes`.
    let mut side: Vec<bool> = (0..m).map(|i| i >= half).collect();
    let w = |i: usize, j: usize| graph.weight(nodes[i], nodes[j]);

    for _pass in 0..max_passes {
        // d[i] = external minus internal connection weight of node i.
        let mut d: Vec<f64> = (0..m)
            .map(|i| {
                (0..m)
                    .filter(|&j| j != i)
                    .map(|j| if side[j] != side[i] { w(i, j) } else { -w(i, j) })
                    .sum()
            })
            .collect();
        let mut locked = vec![false; m];
        let mut swaps: Vec<(usize, usize, f64)> = Vec::with_capacity(half);
        for _ in 0..half {
            // Best unlocked exchange pair by gain d[a] + d[b] - 2 w(a, b).
            let mut best: Option<(usize, usize, f64)> = None;
            for a in 0..m {
                if locked[a] || side[a] {
                    continue;
                }
                for b in 0..m {
                    if locked[b] || !side[b] {
                        continue;
                    }
                    let gain = d[a] + d[b] - 2.0 * w(a, b);
                    if best.is_none_or(|(_, _, g)| gain > g) {
                        best = Some((a, b, gain));
                    }
                }
            }
            let (a, b, gain) = best.expect("both sides hold unlocked nodes");
            locked[a] = true;
            locked[b] = true;
            for x in 0..m {
                if locked[x] {
                    continue;
                }
                if side[x] == side[a] {
                    d[x] += 2.0 * w(x, a) - 2.0 * w(x, b);
                } else {
                    d[x] += 2.0 * w(x, b) - 2.0 * w(x, a);
                }
            }
            swaps.push((a, b, gain));
        }
        // Commit the prefix of tentative exchanges with the best total gain;
        // stop once no prefix improves the cut.
        let mut best_len = 0;
        let mut best_total = 0.0;
        let mut total = 0.0;
        for (idx, &(_, _, gain)) in swaps.iter().enumerate() {
            total += gain;
            if total > best_total {
                best_total = total;
                best_len = idx + 1;
            }
        }
        if best_len == 0 {
            break;
        }
        for &(a, b, _) in &swaps[..best_len] {
            side[a] = true;
            side[b] = false;
        }
    }

    let mut set_a: Vec<usize> = (0..m).filter(|&i| !side[i]).map(|i| nodes[i]).collect();
    let mut set_b: Vec<usize> = (0..m).filter(|&i| side[i]).map(|i| nodes[i]).collect();
    set_a.sort_unstable();
    set_b.sort_unstable();
    Ok((set_a, set_b))
}

/// A partition of all 256 bit positions into four disjoint groups of 64,
/// each sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitPartition {
    groups: [Vec<usize>; 4],
}

impl BitPartition {
    /// Validates that the groups are disjoint, cover `0..256`, and hold 64
    /// positions each. Groups are sorted on the way in.
    pub fn new(mut groups: [Vec<usize>; 4]) -> Result<Self> {
        let mut seen = [false; LONG_BITS as usize];
        for group in &mut groups {
            if group.len() != 64 {
                return Err(Error::InvalidPartition(format!(
                    "group has {} positions, expected 64",
                    group.len()
                )));
            }
            group.sort_unstable();
            for &pos in group.iter() {
                if pos >= LONG_BITS as usize {
                    return Err(Error::InvalidPartition(format!(
                        "position {pos} is out of range 0..256"
                    )));
                }
                if seen[pos] {
                    return Err(Error::InvalidPartition(format!(
                        "position {pos} appears in more than one group"
                    )));
                }
                seen[pos] = true;
            }
        }
        // 4 x 64 distinct in-range positions necessarily cover 0..256.
        Ok(Self { groups })
    }

    pub fn groups(&self) -> &[Vec<usize>; 4] {
        &self.groups
    }
}

/// Derives a salted child seed so each bisection stage and restart draws an
/// independent initial split.
fn derive_seed(seed: u64, salt: u64) -> u64 {
    seed.wrapping_add(salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn best_bipartition(
    graph: &CorrelationGraph,
    positions: &[usize],
    seed: u64,
) -> (Vec<usize>, Vec<usize>) {
    let mut best: Option<((Vec<usize>, Vec<usize>), f64)> = None;
    for restart in 0..KL_RESTARTS {
        let split = kl_bipartition(graph, positions, derive_seed(seed, restart))
            .expect("even-size position set");
        let cut = cut_weight(graph, &split.0, &split.1);
        if best.as_ref().is_none_or(|(_, best_cut)| cut < *best_cut) {
            best = Some((split, cut));
        }
    }
    best.expect("at least one restart ran").0
}

/// Splits all 256 bit positions into four groups of 64 by recursive
/// bisection (256 -> 128 -> 64), taking the best of several seeded
/// Kernighan-Lin restarts at every stage. Deterministic in `(graph, seed)`.
///
/// Panics if the graph does not have exactly 256 nodes.
pub fn partition_bits(graph: &CorrelationGraph, seed: u64) -> BitPartition {
    assert_eq!(
        graph.len(),
        LONG_BITS as usize,
        "bit partitioning expects a 256-node correlation graph"
    );
    let all: Vec<usize> = (0..LONG_BITS as usize).collect();
    let (left, right) = best_bipartition(graph, &all, derive_seed(seed, 101));
    let (g0, g1) = best_bipartition(graph, &left, derive_seed(seed, 202));
    let (g2, g3) = best_bipartition(graph, &right, derive_seed(seed, 303));
    BitPartition::new([g0, g1, g2, g3]).expect("recursive bisection yields a valid partition")
}

/// An ordered selection of 64 of the 256 bit positions. Applying it to a
/// long code gathers the selected bits, in order, into a [`ShortCode`]:
/// selection index `i` becomes short-code bit `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShortCodeExtractor {
    positions: Vec<u16>,
}

impl ShortCodeExtractor {
    /// Validates 64 distinct positions, each below 256.
    pub fn new(positions: Vec<u16>) -> Result<Self> {
        if positions.len() != SHORT_BITS as usize {
            return Err(Error::BadExtractor(format!(
                "expected 64 positions, got {}",
                positions.len()
            )));
        }
        let mut seen = [false; LONG_BITS as usize];
        for &pos in &positions {
            if pos >= LONG_BITS as u16 {
                return Err(Error::BadExtractor(format!(
                    "position {pos} is out of range 0..256"
                )));
            }
            if seen[pos as usize] {
                return Err(Error::BadExtractor(format!("position {pos} repeats")));
            }
            seen[pos as usize] = true;
        }
        Ok(Self { positions })
    }

    /// The identity-like default: the first 16 positions of each 64-bit
    /// word, so each subcode is a contiguous prefix slice of one word.
    pub fn sequential() -> Self {
        let positions = (0..4u16)
            .flat_map(|word| (0..16u16).map(move |bit| word * 64 + bit))
            .collect();
        Self { positions }
    }

    pub fn positions(&self) -> &[u16] {
        &self.positions
    }

    /// Gathers the selected bits of `code` into a short code.
    pub fn extract(&self, code: &LongCode) -> ShortCode {
        let mut subcodes = [0u16; 4];
        for (i, &pos) in self.positions.iter().enumerate() {
            if code.bit(u32::from(pos)) {
                subcodes[i >> 4] |= 1 << (15 - (i & 15));
            }
        }
        ShortCode::new(subcodes)
    }

    /// Renders the single-line `positions=` file format.
    pub fn to_file_string(&self) -> String {
        format!("positions={}\n", self.positions.iter().join(","))
    }

    /// Parses the `positions=` file format. Blank lines and `#` comments are
    /// tolerated around the single payload line.
    pub fn parse_file_string(text: &str) -> Result<Self> {
        let payload = text
            .lines()
            .map(str::trim)
            .find(|line| !line.is_empty() && !line.starts_with('#'))
            .ok_or_else(|| Error::BadExtractor("no positions= line found".into()))?;
        let list = payload
            .strip_prefix("positions=")
            .ok_or_else(|| Error::BadExtractor(format!("expected positions=..., got {payload:?}")))?;
        let positions = list
            .split(',')
            .map(|item| {
                item.trim()
                    .parse::<u16>()
                    .map_err(|_| Error::BadExtractor(format!("bad position {:?}", item.trim())))
            })
            .collect::<Result<Vec<u16>>>()?;
        Self::new(positions)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_file_string())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse_file_string(&fs::read_to_string(path)?)
    }
}

/// Builds the extractor for a partition: the 16 lowest-numbered positions of
/// each group, groups in order, positions ascending within a group.
pub fn build_extractor(partition: &BitPartition) -> ShortCodeExtractor {
    let positions: Vec<u16> = partition
        .groups()
        .iter()
        .flat_map(|group| group[..16].iter().map(|&pos| pos as u16))
        .collect();
    ShortCodeExtractor::new(positions).expect("groups are disjoint and in range")
}

/// Applies `extractor` to `code`.
pub fn extract_short(extractor: &ShortCodeExtractor, code: &LongCode) -> ShortCode {
    extractor.extract(code)
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::codes::hamming64;

    fn random_long(rng: &mut ChaCha8Rng) -> LongCode {
        LongCode::new([rng.random(), rng.random(), rng.random(), rng.random()])
    }

    /// A graph with independent uniform weights on a fraction of the edges.
    fn random_graph(nodes: usize, density: f64, seed: u64) -> CorrelationGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut graph = CorrelationGraph::new(nodes);
        for i in 0..nodes {
            for j in (i + 1)..nodes {
                if rng.random::<f64>() < density {
                    graph.set_weight(i, j, rng.random::<f64>());
                }
            }
        }
        graph
    }

    #[test]
    fn correlations_detect_duplicated_bits() {
        // Clone bit 3 into bit 200 across the sample: correlation 1. Bit 7
        // is its complement: |corr| = 1 as well. Other pairs stay small.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let sample: Vec<LongCode> = (0..4096)
            .map(|_| {
                let mut code = random_long(&mut rng);
                code.set_bit(200, code.bit(3));
                code.set_bit(7, !code.bit(3));
                code
            })
            .collect();
        let graph = compute_bit_correlations(&sample).unwrap();
        assert!((graph.weight(3, 200) - 1.0).abs() < 1e-9);
        assert!((graph.weight(3, 7) - 1.0).abs() < 1e-9);
        assert!((graph.weight(7, 200) - 1.0).abs() < 1e-9);
        // Independent bits: sample correlation is O(1/sqrt(n)).
        assert!(graph.weight(10, 11) < 0.1);
    }

    #[test]
    fn correlations_zero_for_constant_bits() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let sample: Vec<LongCode> = (0..512)
            .map(|_| {
                let mut code = random_long(&mut rng);
                code.set_bit(42, true);
                code
            })
            .collect();
        let graph = compute_bit_correlations(&sample).unwrap();
        for j in 0..256 {
            if j != 42 {
                assert_eq!(graph.weight(42, j), 0.0);
            }
        }
    }

    #[test]
    fn correlations_need_two_codes() {
        assert!(matches!(
            compute_bit_correlations(&[]).unwrap_err(),
            Error::SampleTooSmall(0)
        ));
        assert!(matches!(
            compute_bit_correlations(&[LongCode::ZERO]).unwrap_err(),
            Error::SampleTooSmall(1)
        ));
    }

    #[test]
    fn correlation_weights_stay_in_unit_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let sample: Vec<LongCode> = (0..300).map(|_| random_long(&mut rng)).collect();
        let graph = compute_bit_correlations(&sample).unwrap();
        for i in 0..256 {
            assert_eq!(graph.weight(i, i), 0.0);
            for j in 0..256 {
                let w = graph.weight(i, j);
                assert!((0.0..=1.0).contains(&w));
                assert_eq!(w, graph.weight(j, i));
            }
        }
    }

    #[test]
    fn kl_separates_two_cliques() {
        // Two 4-cliques of weight 1 joined by one weight-0.1 bridge: the
        // optimal bisection cuts only the bridge.
        let mut graph = CorrelationGraph::new(8);
        for i in 0..4 {
            for j in (i + 1)..4 {
                graph.set_weight(i, j, 1.0);
                graph.set_weight(i + 4, j + 4, 1.0);
            }
        }
        graph.set_weight(0, 4, 0.1);
        let positions: Vec<usize> = (0..8).collect();
        for seed in 0..10 {
            let (a, b) = kl_bipartition(&graph, &positions, seed).unwrap();
            let (a, b) = if a.contains(&0) { (a, b) } else { (b, a) };
            assert_eq!(a, vec![0, 1, 2, 3]);
            assert_eq!(b, vec![4, 5, 6, 7]);
            assert!((cut_weight(&graph, &a, &b) - 0.1).abs() < 1e-12);
        }
    }

    #[test]
    fn kl_rejects_odd_input() {
        let graph = CorrelationGraph::new(5);
        let positions: Vec<usize> = (0..5).collect();
        assert!(matches!(
            kl_bipartition(&graph, &positions, 0).unwrap_err(),
            Error::OddPartition(5)
        ));
    }

    #[test]
    fn kl_is_deterministic_per_seed() {
        let graph = random_graph(32, 0.4, 24);
        let positions: Vec<usize> = (0..32).collect();
        let first = kl_bipartition(&graph, &positions, 7).unwrap();
        let second = kl_bipartition(&graph, &positions, 7).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn kl_cut_never_increases_with_more_passes() {
        // Capping the pass count exposes the per-pass trajectory: each
        // committed pass must keep or shrink the cut.
        for seed in 0..5 {
            let graph = random_graph(48, 0.5, 100 + seed);
            let positions: Vec<usize> = (0..48).collect();
            let mut previous = f64::INFINITY;
            for passes in 0..6 {
                let (a, b) = kl_bipartition_capped(&graph, &positions, seed, passes).unwrap();
                let cut = cut_weight(&graph, &a, &b);
                assert!(
                    cut <= previous + 1e-9,
                    "cut grew from {previous} to {cut} at pass {passes}"
                );
                previous = cut;
            }
        }
    }

    #[test]
    fn kl_halves_partition_the_input() {
        let graph = random_graph(96, 0.3, 25);
        let positions: Vec<usize> = (10..74).collect();
        let (a, b) = kl_bipartition(&graph, &positions, 3).unwrap();
        assert_eq!(a.len(), 32);
        assert_eq!(b.len(), 32);
        let mut all: Vec<usize> = a.iter().chain(b.iter()).copied().collect();
        all.sort_unstable();
        assert_eq!(all, positions);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert!(b.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn partition_bits_yields_four_valid_groups() {
        let graph = random_graph(256, 0.1, 26);
        let partition = partition_bits(&graph, 0);
        let mut seen = vec![false; 256];
        for group in partition.groups() {
            assert_eq!(group.len(), 64);
            assert!(group.windows(2).all(|w| w[0] < w[1]));
            for &pos in group {
                assert!(!seen[pos]);
                seen[pos] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
        // Deterministic in the seed.
        assert_eq!(partition, partition_bits(&graph, 0));
    }

    #[test]
    fn partition_groups_correlated_blocks_together() {
        // Four blocks of 64 positions with strong in-block correlation:
        // recursive bisection must keep each block in one group, so the
        // cross-group weight is (near) zero.
        let mut graph = CorrelationGraph::new(256);
        for block in 0..4 {
            for i in 0..64 {
                for j in (i + 1)..64 {
                    graph.set_weight(block * 64 + i, block * 64 + j, 0.9);
                }
            }
        }
        let partition = partition_bits(&graph, 1);
        for group in partition.groups() {
            let block = group[0] / 64;
            assert!(
                group.iter().all(|&pos| pos / 64 == block),
                "group mixes correlated blocks: {group:?}"
            );
        }
    }

    #[test]
    fn bit_partition_validation() {
        let groups = |base: [usize; 4]| {
            [
                (base[0]..base[0] + 64).collect::<Vec<_>>(),
                (base[1]..base[1] + 64).collect(),
                (base[2]..base[2] + 64).collect(),
                (base[3]..base[3] + 64).collect(),
            ]
        };
        assert!(BitPartition::new(groups([0, 64, 128, 192])).is_ok());
        assert!(matches!(
            BitPartition::new(groups([0, 0, 128, 192])).unwrap_err(),
            Error::InvalidPartition(_)
        ));
        assert!(matches!(
            BitPartition::new(groups([0, 64, 128, 193])).unwrap_err(),
            Error::InvalidPartition(_)
        ));
        let mut uneven = groups([0, 64, 128, 192]);
        uneven[0].pop();
        assert!(matches!(
            BitPartition::new(uneven).unwrap_err(),
            Error::InvalidPartition(_)
        ));
    }

    #[test]
    fn extractor_takes_lowest_sixteen_per_group() {
        let groups = [
            (0..64).collect::<Vec<_>>(),
            (64..128).collect(),
            (128..192).collect(),
            (192..256).collect(),
        ];
        let partition = BitPartition::new(groups).unwrap();
        let extractor = build_extractor(&partition);
        let expected: Vec<u16> = (0..4u16)
            .flat_map(|g| (0..16u16).map(move |b| g * 64 + b))
            .collect();
        assert_eq!(extractor.positions(), expected.as_slice());
        assert_eq!(extractor, ShortCodeExtractor::sequential());
    }

    #[test]
    fn extract_gathers_bits_in_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(27);
        // A scrambled but valid extractor.
        let mut all: Vec<u16> = (0..256).collect();
        all.shuffle(&mut rng);
        let extractor = ShortCodeExtractor::new(all[..64].to_vec()).unwrap();
        for _ in 0..100 {
            let code = random_long(&mut rng);
            let short = extractor.extract(&code);
            for (i, &pos) in extractor.positions().iter().enumerate() {
                assert_eq!(short.bit(i as u32), code.bit(u32::from(pos)));
            }
        }
    }

    #[test]
    fn extract_commutes_with_selected_bit_flips() {
        let mut rng = ChaCha8Rng::seed_from_u64(28);
        let extractor = ShortCodeExtractor::sequential();
        for _ in 0..200 {
            let code = random_long(&mut rng);
            let short = extractor.extract(&code);
            let choice = rng.random_range(0..64);
            let pos = extractor.positions()[choice];
            let mut flipped = code;
            flipped.flip_bit(u32::from(pos));
            let short_flipped = extractor.extract(&flipped);
            assert_eq!(hamming64(&short, &short_flipped), 1);
            assert!(short.bit(choice as u32) != short_flipped.bit(choice as u32));
        }
    }

    #[test]
    fn extractor_validation_rejects_bad_inputs() {
        assert!(matches!(
            ShortCodeExtractor::new(vec![0; 64]).unwrap_err(),
            Error::BadExtractor(_)
        ));
        assert!(matches!(
            ShortCodeExtractor::new((0..63).collect()).unwrap_err(),
            Error::BadExtractor(_)
        ));
        let mut out_of_range: Vec<u16> = (0..63).collect();
        out_of_range.push(256);
        assert!(matches!(
            ShortCodeExtractor::new(out_of_range).unwrap_err(),
            Error::BadExtractor(_)
        ));
    }

    #[test]
    fn extractor_file_round_trip() {
        let extractor = ShortCodeExtractor::sequential();
        let text = extractor.to_file_string();
        assert!(text.starts_with("positions=0,1,2,"));
        let parsed = ShortCodeExtractor::parse_file_string(&text).unwrap();
        assert_eq!(parsed, extractor);
        // Comments and blank lines around the payload are tolerated.
        let commented = format!("# extractor\n\n{text}");
        assert_eq!(
            ShortCodeExtractor::parse_file_string(&commented).unwrap(),
            extractor
        );
        assert!(matches!(
            ShortCodeExtractor::parse_file_string("positions=1,2\n").unwrap_err(),
            Error::BadExtractor(_)
        ));
        assert!(matches!(
            ShortCodeExtractor::parse_file_string("nope\n").unwrap_err(),
            Error::BadExtractor(_)
        ));
    }
}
