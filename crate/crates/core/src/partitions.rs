//! Set partitions of `[n] = {1, ..., n}` and the split/merge moves between them.
//!
//! Blocks are always stored sorted and ordered by their least element, so two
//! partitions are equal iff their representations are equal. Block indices in
//! this API are zero-based positions in that order.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

/// Largest `n` for which `P_[n]` is enumerated by default (`Bell(10) = 115975`).
pub const DEFAULT_CAP: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SetPartition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl SetPartition {
    /// Builds a partition of `[n]` from arbitrary non-empty blocks, canonicalizing order.
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n + 1];
        let mut blocks: Vec<Vec<usize>> = blocks.into_iter().filter(|b| !b.is_empty()).collect();
        for b in &mut blocks {
            b.sort_unstable();
            for &e in b.iter() {
                if e == 0 || e > n {
                    return Err(invalid(format!("element {e} outside [1, {n}]")));
                }
                if std::mem::replace(&mut seen[e], true) {
                    return Err(invalid(format!("element {e} appears twice")));
                }
            }
        }
        if let Some(missing) = (1..=n).find(|&e| !seen[e]) {
            return Err(invalid(format!("element {missing} is not covered")));
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        Ok(Self { n, blocks })
    }

    /// Partition whose block of `i+1` is labelled `labels[i]`; labels are arbitrary.
    pub fn from_labels<L: Eq + Copy>(labels: &[L]) -> Self {
        let mut keys: Vec<L> = Vec::new();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for (i, &l) in labels.iter().enumerate() {
            match keys.iter().position(|&k| k == l) {
                Some(j) => blocks[j].push(i + 1),
                None => {
                    keys.push(l);
                    blocks.push(vec![i + 1]);
                }
            }
        }
        // first-occurrence order is already least-element order
        Self { n: labels.len(), blocks }
    }

    pub fn single_block(n: usize) -> Self {
        Self { n, blocks: if n == 0 { vec![] } else { vec![(1..=n).collect()] } }
    }

    pub fn singletons(n: usize) -> Self {
        Self { n, blocks: (1..=n).map(|i| vec![i]).collect() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    /// Zero-based index of the block containing `element`.
    pub fn block_of(&self, element: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.binary_search(&element).is_ok())
    }

    pub fn shape(&self) -> PartitionShape {
        PartitionShape::from_sorted_unchecked(self.block_sizes())
    }

    /// Restriction to `[m]`: intersect every block with `[m]` and drop empties.
    pub fn restrict(&self, m: usize) -> Result<Self> {
        if m == 0 || m > self.n {
            return Err(invalid(format!("cannot restrict a partition of [{}] to [{m}]", self.n)));
        }
        let blocks = self
            .blocks
            .iter()
            .map(|b| b.iter().copied().take_while(|&e| e <= m).collect::<Vec<_>>())
            .filter(|b| !b.is_empty())
            .collect();
        Ok(Self { n: m, blocks })
    }

    /// Simple coagulation: replace the selected blocks by their union.
    pub fn merge_blocks(&self, indices: &[usize]) -> Result<Self> {
        if indices.len() < 2 {
            return Err(invalid("a merge needs at least two blocks"));
        }
        let mut selected = vec![false; self.blocks.len()];
        for &i in indices {
            if i >= self.blocks.len() {
                return Err(invalid(format!("block index {i} out of range")));
            }
            if std::mem::replace(&mut selected[i], true) {
                return Err(invalid(format!("block index {i} repeated")));
            }
        }
        let mut merged = Vec::new();
        let mut blocks = Vec::with_capacity(self.blocks.len() - indices.len() + 1);
        for (b, &sel) in self.blocks.iter().zip(&selected) {
            if sel {
                merged.extend_from_slice(b);
            } else {
                blocks.push(b.clone());
            }
        }
        merged.sort_unstable();
        blocks.push(merged);
        blocks.sort_unstable_by_key(|b| b[0]);
        Ok(Self { n: self.n, blocks })
    }

    /// Fragments block `i = (i_1 < ... < i_k)` into `{i_j : j in C}` for each block `C` of `eta`.
    pub fn split_block(&self, i: usize, eta: &SetPartition) -> Result<Self> {
        let block = self
            .blocks
            .get(i)
            .ok_or_else(|| invalid(format!("block index {i} out of range")))?;
        if block.len() < 2 {
            return Err(invalid("cannot split a singleton block"));
        }
        if eta.n != block.len() {
            return Err(invalid(format!(
                "eta partitions [{}] but block {i} has {} elements",
                eta.n,
                block.len()
            )));
        }
        if eta.num_blocks() < 2 {
            return Err(invalid("eta must be a non-trivial partition"));
        }
        let mut blocks: Vec<Vec<usize>> = Vec::with_capacity(self.blocks.len() + eta.num_blocks() - 1);
        blocks.extend(self.blocks.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, b)| b.clone()));
        blocks.extend(eta.blocks.iter().map(|c| c.iter().map(|&j| block[j - 1]).collect::<Vec<_>>()));
        blocks.sort_unstable_by_key(|b| b[0]);
        Ok(Self { n: self.n, blocks })
    }

    /// Every simple merge of at least two blocks, with the merged (zero-based) index set.
    pub fn coag_transitions(&self) -> Vec<(SetPartition, Vec<usize>)> {
        let l = self.blocks.len();
        if l < 2 {
            return Vec::new();
        }
        let mut out = Vec::with_capacity((1usize << l) - l - 1);
        for mask in 1u64..(1u64 << l) {
            if mask.count_ones() < 2 {
                continue;
            }
            let idx: Vec<usize> = (0..l).filter(|&j| mask >> j & 1 == 1).collect();
            let target = self.merge_blocks(&idx).expect("indices are valid by construction");
            out.push((target, idx));
        }
        out
    }

    /// Every fragmentation of a single block by a non-trivial `eta`.
    pub fn split_transitions(&self) -> Vec<(SetPartition, usize, SetPartition)> {
        let mut out = Vec::new();
        for (i, b) in self.blocks.iter().enumerate() {
            if b.len() < 2 {
                continue;
            }
            for eta in nontrivial_partitions(b.len()) {
                let target = self.split_block(i, &eta).expect("valid split by construction");
                out.push((target, i, eta));
            }
        }
        out
    }
}

impl fmt::Display for SetPartition {
    /// Blocks as space-separated lists joined by `|`, e.g. `1 3|2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (j, b) in self.blocks.iter().enumerate() {
            if j > 0 {
                f.write_str("|")?;
            }
            for (t, e) in b.iter().enumerate() {
                if t > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{e}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for SetPartition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut blocks = Vec::new();
        for part in s.split('|') {
            let block = part
                .split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|_| Error::Parse(format!("bad element {t:?} in {s:?}"))))
                .collect::<Result<Vec<_>>>()?;
            if block.is_empty() {
                return Err(Error::Parse(format!("empty block in {s:?}")));
            }
            blocks.push(block);
        }
        let n = blocks.iter().flatten().copied().max().unwrap_or(0);
        SetPartition::new(n, blocks).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Multiset of block sizes, stored in decreasing order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartitionShape {
    sizes: Vec<usize>,
}

impl PartitionShape {
    pub fn new(mut sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(invalid("a shape needs at least one block"));
        }
        if sizes.contains(&0) {
            return Err(invalid("block sizes must be positive"));
        }
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Self { sizes })
    }

    fn from_sorted_unchecked(mut sizes: Vec<usize>) -> Self {
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        Self { sizes }
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Number of blocks.
    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    /// Total number of elements.
    pub fn n(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// Shape with block `j` enlarged by one.
    pub fn grow(&self, j: usize) -> Self {
        let mut sizes = self.sizes.clone();
        sizes[j] += 1;
        Self::from_sorted_unchecked(sizes)
    }

    /// Shape with an extra singleton block.
    pub fn with_singleton(&self) -> Self {
        let mut sizes = self.sizes.clone();
        sizes.push(1);
        Self { sizes }
    }
}

impl fmt::Display for PartitionShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.sizes.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for PartitionShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let sizes = s
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad block size {t:?}"))))
            .collect::<Result<Vec<_>>>()?;
        PartitionShape::new(sizes)
    }
}

/// All partitions of `[n]` for `1 <= n <= DEFAULT_CAP`.
pub fn enumerate_set_partitions(n: usize) -> Result<Vec<SetPartition>> {
    enumerate_set_partitions_capped(n, DEFAULT_CAP)
}

/// All partitions of `[n]`, generated from restricted growth strings.
pub fn enumerate_set_partitions_capped(n: usize, cap: usize) -> Result<Vec<SetPartition>> {
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    if n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    let mut out = Vec::with_capacity(bell_number(n) as usize);
    let mut rgs = vec![0usize; n];
    loop {
        out.push(SetPartition::from_labels(&rgs));
        // next restricted growth string: rgs[i] <= 1 + max(rgs[..i])
        let mut i = n - 1;
        loop {
            if i == 0 {
                return Ok(out);
            }
            let max_prefix = rgs[..i].iter().copied().max().unwrap_or(0);
            if rgs[i] <= max_prefix {
                rgs[i] += 1;
                for r in &mut rgs[i + 1..] {
                    *r = 0;
                }
                break;
            }
            i -= 1;
        }
    }
}

/// Partitions of `[k]` other than the single block.
pub fn nontrivial_partitions(k: usize) -> Vec<SetPartition> {
    enumerate_set_partitions_capped(k, usize::MAX)
        .map(|all| all.into_iter().filter(|p| p.num_blocks() >= 2).collect())
        .unwrap_or_default()
}

/// Bell numbers via the Bell triangle.
pub fn bell_number(n: usize) -> u64 {
    let mut row = vec![1u64];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().expect("non-empty row"));
        for &x in &row {
            let last = *next.last().expect("non-empty row");
            next.push(last + x);
        }
        row = next;
    }
    row[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn p(s: &str) -> SetPartition {
        s.parse().unwrap()
    }

    /// Independent enumeration: every map [n] -> [n], deduplicated after canonicalization.
    fn brute_force_partitions(n: usize) -> BTreeSet<SetPartition> {
        let total = n.pow(n as u32);
        (0..total)
            .map(|mut code| {
                let labels: Vec<usize> = (0..n)
                    .map(|_| {
                        let l = code % n;
                        code /= n;
                        l
                    })
                    .collect();
                SetPartition::from_labels(&labels)
            })
            .collect()
    }

    #[test]
    fn enumeration_examples() {
        let one = enumerate_set_partitions(1).unwrap();
        assert_eq!(one, vec![p("1")]);
        assert_eq!(enumerate_set_partitions(3).unwrap().len(), 5);
        assert_eq!(enumerate_set_partitions(4).unwrap().len(), 15);
    }

    #[test]
    fn enumeration_matches_brute_force() {
        for n in 1..=6 {
            let fast: BTreeSet<_> = enumerate_set_partitions(n).unwrap().into_iter().collect();
            assert_eq!(fast, brute_force_partitions(n), "n = {n}");
        }
    }

    #[test]
    fn enumeration_counts_are_bell_numbers() {
        let bell = [1u64, 2, 5, 15, 52, 203, 877, 4140];
        for (i, &b) in bell.iter().enumerate() {
            let all = enumerate_set_partitions(i + 1).unwrap();
            assert_eq!(all.len() as u64, b);
            let distinct: BTreeSet<_> = all.iter().collect();
            assert_eq!(distinct.len(), all.len());
            assert_eq!(bell_number(i + 1), b);
        }
        assert_eq!(bell_number(10), 115_975);
    }

    #[test]
    fn enumeration_respects_cap() {
        assert_eq!(enumerate_set_partitions(11), Err(Error::CapExceeded { n: 11, cap: 10 }));
        assert!(enumerate_set_partitions(0).is_err());
        assert_eq!(enumerate_set_partitions_capped(4, 3), Err(Error::CapExceeded { n: 4, cap: 3 }));
    }

    #[test]
    fn restrict_examples() {
        assert_eq!(p("1 3|2").restrict(2).unwrap(), p("1|2"));
        assert_eq!(p("1 2 3").restrict(2).unwrap(), p("1 2"));
        assert_eq!(p("1 4|2|3").restrict(3).unwrap(), p("1|2|3"));
        assert!(p("1 2").restrict(3).is_err());
        assert!(p("1 2").restrict(0).is_err());
    }

    #[test]
    fn restrict_is_compatible() {
        for n in 1..=6 {
            for pi in enumerate_set_partitions(n).unwrap() {
                for m in 1..=n {
                    let rm = pi.restrict(m).unwrap();
                    for m2 in 1..=m {
                        assert_eq!(rm.restrict(m2).unwrap(), pi.restrict(m2).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn shape_examples() {
        assert_eq!(p("1 2|3").shape().sizes(), &[2, 1]);
        assert_eq!(p("1|2|3").shape().sizes(), &[1, 1, 1]);
        assert_eq!(p("1 3 5|2 4").shape().sizes(), &[3, 2]);
        assert_eq!(p("1|2 3 4").shape().sizes(), &[3, 1]);
    }

    #[test]
    fn merge_examples() {
        assert_eq!(p("1|2|3").merge_blocks(&[0, 1]).unwrap(), p("1 2|3"));
        assert_eq!(p("1|2|3").merge_blocks(&[0, 1, 2]).unwrap(), p("1 2 3"));
        assert_eq!(p("1 4|2|3").merge_blocks(&[1, 2]).unwrap(), p("1 4|2 3"));
        assert!(p("1|2|3").merge_blocks(&[1]).is_err());
        assert!(p("1|2|3").merge_blocks(&[1, 1]).is_err());
        assert!(p("1|2|3").merge_blocks(&[1, 3]).is_err());
    }

    #[test]
    fn split_examples() {
        assert_eq!(p("1 2 3").split_block(0, &p("1 3|2")).unwrap(), p("1 3|2"));
        assert_eq!(p("1 4|2 3").split_block(0, &p("1|2")).unwrap(), p("1|2 3|4"));
        assert_eq!(p("1 2|3").split_block(0, &p("1|2")).unwrap(), p("1|2|3"));
        assert!(p("1 2|3").split_block(0, &p("1 2")).is_err());
        assert!(p("1 2|3").split_block(1, &p("1")).is_err());
        assert!(p("1 2|3").split_block(0, &p("1|2|3")).is_err());
    }

    #[test]
    fn transition_counts() {
        assert_eq!(p("1 2|3").coag_transitions().len(), 1);
        assert_eq!(p("1|2|3").coag_transitions().len(), 4);
        assert_eq!(p("1|2|3|4").coag_transitions().len(), 11);
        assert!(p("1 2 3").coag_transitions().is_empty());

        assert!(p("1|2").split_transitions().is_empty());
        let two = p("1 2").split_transitions();
        assert_eq!(two.len(), 1);
        assert_eq!(two[0].0, p("1|2"));
        assert_eq!(p("1 2 3").split_transitions().len(), 4);
        assert_eq!(p("1 2 3|4 5").split_transitions().len(), 4 + 1);
    }

    #[test]
    fn every_split_has_a_unique_inverse_merge() {
        for n in 1..=6 {
            for gamma in enumerate_set_partitions(n).unwrap() {
                for (target, _, _) in gamma.split_transitions() {
                    let inverses: Vec<_> = target
                        .coag_transitions()
                        .into_iter()
                        .filter(|(back, _)| *back == gamma)
                        .collect();
                    assert_eq!(inverses.len(), 1, "{gamma} -> {target}");
                }
            }
        }
    }

    #[test]
    fn text_form_round_trips() {
        for pi in enumerate_set_partitions(5).unwrap() {
            assert_eq!(pi.to_string().parse::<SetPartition>().unwrap(), pi);
        }
        assert_eq!(p("2|3 1").to_string(), "1 3|2");
        assert!("1 2|2".parse::<SetPartition>().is_err());
        assert!("1|3".parse::<SetPartition>().is_err());
        assert_eq!("1,3,2".parse::<PartitionShape>().unwrap().sizes(), &[3, 2, 1]);
        assert!("1,0".parse::<PartitionShape>().is_err());
    }
}
