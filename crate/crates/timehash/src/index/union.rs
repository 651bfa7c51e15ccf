//! Posting-list union.

use super::DocId;

/// How posting lists are combined at query time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnionMode {
    /// Bitset for large candidate sets, sorted merge otherwise.
    #[default]
    Auto,
    Merge,
    Bitset,
}

/// Union of sorted, duplicate-free lists; the output is sorted and duplicate-free.
pub fn union_sorted(lists: &[&[DocId]], doc_count: usize, mode: UnionMode) -> Vec<DocId> {
    let non_empty: Vec<&[DocId]> = lists.iter().copied().filter(|l| !l.is_empty()).collect();
    match non_empty.len() {
        0 => return Vec::new(),
        1 => return non_empty[0].to_vec(),
        _ => {}
    }
    let total: usize = non_empty.iter().map(|l| l.len()).sum();
    let use_bitset = match mode {
        UnionMode::Bitset => true,
        UnionMode::Merge => false,
        UnionMode::Auto => total * 64 >= doc_count,
    };
    if use_bitset {
        bitset_union(&non_empty, doc_count)
    } else {
        merge_union(&non_empty)
    }
}

fn bitset_union(lists: &[&[DocId]], doc_count: usize) -> Vec<DocId> {
    let mut words = vec![0u64; doc_count.div_ceil(64)];
    let mut total = 0;
    for list in lists {
        total += list.len();
        for d in *list {
            words[(d.0 / 64) as usize] |= 1 << (d.0 % 64);
        }
    }
    let mut out = Vec::with_capacity(total.min(doc_count));
    for (i, &word) in words.iter().enumerate() {
        let mut w = word;
        while w != 0 {
            let bit = w.trailing_zeros();
            out.push(DocId(i as u32 * 64 + bit));
            w &= w - 1;
        }
    }
    out
}

fn merge_union(lists: &[&[DocId]]) -> Vec<DocId> {
    let mut acc = lists[0].to_vec();
    let mut next = Vec::new();
    for list in &lists[1..] {
        next.clear();
        next.reserve(acc.len() + list.len());
        let (mut i, mut j) = (0, 0);
        while i < acc.len() && j < list.len() {
            match acc[i].cmp(&list[j]) {
                std::cmp::Ordering::Less => {
                    next.push(acc[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    next.push(list[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    next.push(acc[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        next.extend_from_slice(&acc[i..]);
        next.extend_from_slice(&list[j..]);
        std::mem::swap(&mut acc, &mut next);
    }
    acc
}
