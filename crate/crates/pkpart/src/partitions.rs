//! Combinatorial core: set partitions in canonical (least-element) block
//! order, compositions of block sizes, exact enumeration, shape counts, and
//! size-biased permutation of mass vectors.

use crate::error::{PkError, Result};
use crate::rng::RandomSource;
use num_bigint::BigUint;
use num_traits::One;

/// Largest ground-set size the enumeration oracle accepts.
/// Bell(12) = 4,213,597 keeps full sweeps in the seconds range.
pub const ENUMERATION_MAX_N: usize = 12;

/// A partition of {1..n} into labeled blocks.
///
/// Blocks are numbered in order of their least elements: element 1 is always
/// in block 1, and the least element of block j+1 exceeds that of block j.
/// `assignment[i]` holds the 1-based block index of element i+1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SetPartition {
    assignment: Vec<u32>,
    block_count: u32,
}

impl SetPartition {
    /// Build from a canonical assignment vector (restricted growth string).
    pub fn from_assignment(assignment: Vec<u32>) -> Result<Self> {
        if assignment.is_empty() {
            return Err(PkError::Domain("empty assignment".into()));
        }
        let mut max_seen = 0u32;
        for (i, &b) in assignment.iter().enumerate() {
            if b == 0 || b > max_seen + 1 {
                return Err(PkError::Domain(format!(
                    "assignment not in least-element canonical form at position {}",
                    i + 1
                )));
            }
            max_seen = max_seen.max(b);
        }
        Ok(Self {
            assignment,
            block_count: max_seen,
        })
    }

    /// Build from explicit blocks; elements must cover {1..n} exactly once.
    pub fn from_blocks(blocks: &[Vec<u32>]) -> Result<Self> {
        let n: usize = blocks.iter().map(|b| b.len()).sum();
        if n == 0 {
            return Err(PkError::Domain("empty partition".into()));
        }
        let mut assignment = vec![0u32; n];
        let mut order: Vec<usize> = (0..blocks.len()).collect();
        for b in blocks {
            if b.is_empty() {
                return Err(PkError::Domain("empty block".into()));
            }
        }
        order.sort_by_key(|&i| blocks[i].iter().min().copied().unwrap_or(u32::MAX));
        for (label, &bi) in order.iter().enumerate() {
            for &e in &blocks[bi] {
                if e == 0 || e as usize > n || assignment[e as usize - 1] != 0 {
                    return Err(PkError::Domain(format!(
                        "blocks do not form a partition of 1..{n} (element {e})"
                    )));
                }
                assignment[e as usize - 1] = label as u32 + 1;
            }
        }
        Self::from_assignment(assignment)
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    pub fn block_count(&self) -> usize {
        self.block_count as usize
    }

    /// 1-based block index of a 1-based element.
    pub fn block_of(&self, element: usize) -> u32 {
        self.assignment[element - 1]
    }

    pub fn assignment(&self) -> &[u32] {
        &self.assignment
    }

    /// Blocks in least-element order, elements ascending.
    pub fn blocks(&self) -> Vec<Vec<u32>> {
        let mut blocks = vec![Vec::new(); self.block_count as usize];
        for (i, &b) in self.assignment.iter().enumerate() {
            blocks[b as usize - 1].push(i as u32 + 1);
        }
        blocks
    }

    /// Serialize as a JSON array of block arrays, e.g. [[1,2,5],[3],[4]].
    pub fn to_json(&self) -> String {
        let mut out = String::from("[");
        for (i, block) in self.blocks().iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push('[');
            for (j, e) in block.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                out.push_str(&e.to_string());
            }
            out.push(']');
        }
        out.push(']');
        out
    }

    /// Block sizes in order of block appearance.
    pub fn composition(&self) -> Composition {
        let mut sizes = vec![0u32; self.block_count as usize];
        for &b in &self.assignment {
            sizes[b as usize - 1] += 1;
        }
        Composition::new(sizes).expect("sizes of a valid partition form a composition")
    }

    /// The induced partition of {1..m}, blocks renumbered canonically.
    pub fn restrict(&self, m: usize) -> Result<SetPartition> {
        if m == 0 || m > self.n() {
            return Err(PkError::Bounds(format!(
                "restrict to {m} outside 1..={}",
                self.n()
            )));
        }
        let mut relabel = vec![0u32; self.block_count as usize];
        let mut next = 0u32;
        let mut assignment = Vec::with_capacity(m);
        for &b in &self.assignment[..m] {
            let slot = &mut relabel[b as usize - 1];
            if *slot == 0 {
                next += 1;
                *slot = next;
            }
            assignment.push(*slot);
        }
        SetPartition::from_assignment(assignment)
    }

    /// Remove blocks 1..=k (in least-element order), renumber the surviving
    /// elements in increasing order, and return the induced partition.
    pub fn delete_first_k_classes(&self, k: usize) -> Result<SetPartition> {
        if k == 0 {
            return Ok(self.clone());
        }
        if k >= self.block_count() {
            return Err(PkError::Domain(format!(
                "cannot delete {k} classes from a partition with {} blocks",
                self.block_count()
            )));
        }
        let mut assignment = Vec::new();
        let mut relabel = vec![0u32; self.block_count as usize];
        let mut next = 0u32;
        for &b in &self.assignment {
            if (b as usize) <= k {
                continue;
            }
            let slot = &mut relabel[b as usize - 1];
            if *slot == 0 {
                next += 1;
                *slot = next;
            }
            assignment.push(*slot);
        }
        SetPartition::from_assignment(assignment)
    }
}

/// Ordered block sizes (n_1, ..., n_k) in order of block appearance.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Composition {
    parts: Vec<u32>,
}

impl Composition {
    pub fn new(parts: Vec<u32>) -> Result<Self> {
        if parts.is_empty() {
            return Err(PkError::Domain("composition must be non-empty".into()));
        }
        if parts.contains(&0) {
            return Err(PkError::Domain("composition parts must be positive".into()));
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn n(&self) -> u32 {
        self.parts.iter().sum()
    }

    pub fn k(&self) -> usize {
        self.parts.len()
    }

    /// Parts sorted decreasing.
    pub fn sorted_desc(&self) -> Composition {
        let mut parts = self.parts.clone();
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Composition { parts }
    }
}

impl std::fmt::Display for Composition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// Finite vector of strictly positive masses, either an exact unit partition
/// or a truncated prefix of one.
#[derive(Debug, Clone, PartialEq)]
pub struct MassVector {
    masses: Vec<f64>,
    exact: bool,
}

pub const MASS_TOLERANCE: f64 = 1e-12;

impl MassVector {
    pub fn exact(masses: Vec<f64>) -> Result<Self> {
        Self::build(masses, true)
    }

    pub fn truncated(masses: Vec<f64>) -> Result<Self> {
        Self::build(masses, false)
    }

    fn build(masses: Vec<f64>, exact: bool) -> Result<Self> {
        if masses.is_empty() {
            return Err(PkError::Domain("empty mass vector".into()));
        }
        if masses.iter().any(|&m| !(m > 0.0) || m > 1.0 + MASS_TOLERANCE) {
            return Err(PkError::Domain("masses must lie in (0, 1]".into()));
        }
        let sum: f64 = masses.iter().sum();
        if sum > 1.0 + MASS_TOLERANCE {
            return Err(PkError::Domain(format!("masses sum to {sum} > 1")));
        }
        if exact && (sum - 1.0).abs() > MASS_TOLERANCE {
            return Err(PkError::Domain(format!(
                "exact mass vector sums to {sum}, expected 1"
            )));
        }
        Ok(Self { masses, exact })
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }
}

/// Iterator over all set partitions of {1..n} in lexicographic
/// restricted-growth order.
pub struct SetPartitionIter {
    n: usize,
    current: Option<Vec<u32>>,
    max_prefix: Vec<u32>,
}

impl Iterator for SetPartitionIter {
    type Item = SetPartition;

    fn next(&mut self) -> Option<SetPartition> {
        let current = self.current.as_mut()?;
        let item = SetPartition::from_assignment(current.clone())
            .expect("iterator maintains canonical form");
        // advance: rightmost position that can still be incremented
        let mut i = self.n;
        loop {
            if i <= 1 {
                self.current = None;
                break;
            }
            i -= 1;
            if current[i] <= self.max_prefix[i] {
                current[i] += 1;
                let run_max = self.max_prefix[i].max(current[i]);
                for (c, m) in current[i + 1..]
                    .iter_mut()
                    .zip(self.max_prefix[i + 1..].iter_mut())
                {
                    *c = 1;
                    *m = run_max;
                }
                break;
            }
        }
        Some(item)
    }
}

/// Every set partition of {1..n}, exactly once, in deterministic order.
pub fn enumerate_set_partitions(n: usize) -> Result<SetPartitionIter> {
    if n == 0 || n > ENUMERATION_MAX_N {
        return Err(PkError::Bounds(format!(
            "enumeration accepts 1..={ENUMERATION_MAX_N}, got {n}"
        )));
    }
    let mut max_prefix = vec![0u32; n];
    for (i, slot) in max_prefix.iter_mut().enumerate() {
        *slot = if i == 0 { 0 } else { 1 };
    }
    Ok(SetPartitionIter {
        n,
        current: Some(vec![1; n]),
        max_prefix,
    })
}

/// Block sizes of `p` in appearance order.
pub fn composition_of(p: &SetPartition) -> Composition {
    p.composition()
}

/// The nth Bell number by the Bell-triangle recurrence, exact.
pub fn bell_number(n: usize) -> BigUint {
    if n == 0 {
        return BigUint::one();
    }
    let mut row = vec![BigUint::one()];
    for _ in 1..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(row.last().unwrap().clone());
        for v in &row {
            let last = next.last().unwrap().clone();
            next.push(last + v);
        }
        row = next;
    }
    row.last().unwrap().clone()
}

/// Number of distinct set partitions of {1..n} whose multiset of block sizes
/// is the given decreasing shape: n! / (prod n_i! * prod_s m_s!), exact.
pub fn count_shape_arrangements(sorted_parts: &Composition) -> Result<BigUint> {
    let parts = sorted_parts.parts();
    if parts.windows(2).any(|w| w[0] < w[1]) {
        return Err(PkError::Domain(format!(
            "shape {sorted_parts} is not sorted decreasing"
        )));
    }
    let n = sorted_parts.n();
    let mut count = factorial_big(n);
    for &p in parts {
        count /= factorial_big(p);
    }
    let mut run = 1u32;
    for w in parts.windows(2) {
        if w[0] == w[1] {
            run += 1;
            count /= BigUint::from(run);
        } else {
            run = 1;
        }
    }
    Ok(count)
}

fn factorial_big(n: u32) -> BigUint {
    let mut acc = BigUint::one();
    for i in 2..=n {
        acc *= BigUint::from(i);
    }
    acc
}

/// All decreasing shapes (integer partitions) of n, optionally fixed length.
pub fn decreasing_shapes(n: u32) -> Vec<Composition> {
    let mut shapes = Vec::new();
    let mut current = Vec::new();
    fn rec(remaining: u32, max_part: u32, current: &mut Vec<u32>, out: &mut Vec<Composition>) {
        if remaining == 0 {
            out.push(Composition::new(current.clone()).unwrap());
            return;
        }
        let hi = remaining.min(max_part);
        for part in (1..=hi).rev() {
            current.push(part);
            rec(remaining - part, part, current, out);
            current.pop();
        }
    }
    rec(n, n, &mut current, &mut shapes);
    shapes
}

/// Random size-biased permutation: index i_1 is picked with probability
/// P_{i_1}, then i_2 with probability P_{i_2}/(1 - P_{i_1}), and so on.
pub fn size_biased_permutation(m: &MassVector, r: &mut RandomSource) -> Result<MassVector> {
    if m.is_empty() {
        return Err(PkError::Domain("empty mass vector".into()));
    }
    let mut remaining: Vec<f64> = m.masses().to_vec();
    let mut out = Vec::with_capacity(remaining.len());
    let mut total: f64 = remaining.iter().sum();
    // leftover mass outside a truncated prefix is never selected, matching
    // picks conditioned on landing inside the listed masses
    while !remaining.is_empty() {
        let mut u = r.uniform() * total;
        let mut chosen = remaining.len() - 1;
        for (i, &w) in remaining.iter().enumerate() {
            if u < w {
                chosen = i;
                break;
            }
            u -= w;
        }
        let w = remaining.swap_remove(chosen);
        out.push(w);
        total -= w;
    }
    if m.is_exact() {
        MassVector::exact(out)
    } else {
        MassVector::truncated(out)
    }
}

/// Number of blocks of each multiset-partition "coarsening" helper:
/// all set partitions of {1..k} as index partitions. Small k only.
pub fn index_partitions(k: usize) -> Result<Vec<Vec<Vec<usize>>>> {
    if k == 0 || k > ENUMERATION_MAX_N {
        return Err(PkError::Bounds(format!(
            "index partitions accept 1..={ENUMERATION_MAX_N}, got {k}"
        )));
    }
    let mut out = Vec::new();
    for p in enumerate_set_partitions(k)? {
        let blocks: Vec<Vec<usize>> = p
            .blocks()
            .into_iter()
            .map(|b| b.into_iter().map(|e| e as usize - 1).collect())
            .collect();
        out.push(blocks);
    }
    Ok(out)
}
