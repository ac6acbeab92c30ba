//! Packed GF(2) vectors and the handful of linear-algebra routines the
//! tableau needs: rank, row-space membership and column-class partitions.
//!
//! Bits are packed little-endian into 64-bit words: bit `k` lives in word
//! `k / 64` at position `k % 64`.

use std::collections::HashMap;

const WORD: usize = 64;

#[inline]
pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

/// A fixed-length packed binary vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitRow {
    len: usize,
    words: Vec<u64>,
}

impl BitRow {
    pub fn zeros(len: usize) -> Self {
        Self { len, words: vec![0; words_for(len)] }
    }

    /// Row with ones exactly at `sites`. Repeated indices cancel.
    pub fn from_sites(len: usize, sites: &[usize]) -> Self {
        let mut row = Self::zeros(len);
        for &s in sites {
            row.flip(s);
        }
        row
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, k: usize) -> bool {
        debug_assert!(k < self.len);
        (self.words[k / WORD] >> (k % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, k: usize, value: bool) {
        debug_assert!(k < self.len);
        let mask = 1u64 << (k % WORD);
        if value {
            self.words[k / WORD] |= mask;
        } else {
            self.words[k / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, k: usize) {
        debug_assert!(k < self.len);
        self.words[k / WORD] ^= 1u64 << (k % WORD);
    }

    /// Parity of bits `a` and `b`: `true` iff exactly one of them is set.
    #[inline]
    pub fn pair_parity(&self, a: usize, b: usize) -> bool {
        let wa = self.words[a / WORD] >> (a % WORD);
        let wb = self.words[b / WORD] >> (b % WORD);
        (wa ^ wb) & 1 == 1
    }

    #[inline]
    pub fn xor_assign(&mut self, other: &BitRow) {
        debug_assert_eq!(self.len, other.len);
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w ^= o;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Popcount of `self AND other`.
    pub fn and_count(&self, other: &BitRow) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Indices of set bits in increasing order.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD + t)
            })
        })
    }
}

/// Rank of `rows` over GF(2). The input is copied; nothing is mutated.
pub fn rank_gf2(rows: &[BitRow]) -> usize {
    let Some(first) = rows.first() else {
        return 0;
    };
    let width = first.len();
    assert!(rows.iter().all(|r| r.len() == width), "rows of unequal length");
    let stride = words_for(width);
    let mut flat: Vec<u64> = Vec::with_capacity(stride * rows.len());
    for r in rows {
        flat.extend_from_slice(r.words());
    }
    rank_flat(&mut flat, rows.len(), width)
}

/// In-place echelon reduction of a flat row-major word buffer. Returns rank.
pub(crate) fn rank_flat(flat: &mut [u64], n_rows: usize, width: usize) -> usize {
    let stride = words_for(width);
    debug_assert_eq!(flat.len(), stride * n_rows);
    let mut rank = 0;
    for col in 0..width {
        if rank == n_rows {
            break;
        }
        let w = col / WORD;
        let mask = 1u64 << (col % WORD);
        let Some(pivot) = (rank..n_rows).find(|&r| flat[r * stride + w] & mask != 0) else {
            continue;
        };
        if pivot != rank {
            for k in w..stride {
                flat.swap(pivot * stride + k, rank * stride + k);
            }
        }
        let (head, tail) = flat.split_at_mut((rank + 1) * stride);
        let prow = &head[rank * stride + w..(rank + 1) * stride];
        for row in tail.chunks_exact_mut(stride) {
            if row[w] & mask != 0 {
                for (a, b) in row[w..].iter_mut().zip(prow) {
                    *a ^= b;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Rank of `rows` restricted to the columns listed in `columns`.
///
/// Columns are gathered into a compact buffer first so elimination only
/// touches the selected width.
pub fn restricted_rank_gf2(rows: &[BitRow], columns: &[usize]) -> usize {
    if rows.is_empty() || columns.is_empty() {
        return 0;
    }
    let width = rows[0].len();
    let mut position = vec![usize::MAX; width];
    for (k, &c) in columns.iter().enumerate() {
        assert!(c < width, "column {c} out of range");
        position[c] = k;
    }
    let mut mask = BitRow::zeros(width);
    for &c in columns {
        mask.set(c, true);
    }
    let sub = columns.len();
    let stride = words_for(sub);
    let mut flat = vec![0u64; stride * rows.len()];
    for (r, row) in rows.iter().enumerate() {
        let out = &mut flat[r * stride..(r + 1) * stride];
        for (wi, (&w, &m)) in row.words().iter().zip(mask.words()).enumerate() {
            let mut hit = w & m;
            while hit != 0 {
                let t = hit.trailing_zeros() as usize;
                hit &= hit - 1;
                let k = position[wi * WORD + t];
                out[k / WORD] |= 1u64 << (k % WORD);
            }
        }
    }
    rank_flat(&mut flat, rows.len(), sub)
}

/// `true` iff `target` lies in the GF(2) span of `rows`.
pub fn in_row_space(rows: &[BitRow], target: &BitRow) -> bool {
    if target.is_zero() {
        return true;
    }
    // Reduce into a basis keyed by lowest set bit.
    let mut basis: HashMap<usize, BitRow> = HashMap::new();
    let reduce = |mut v: BitRow, basis: &mut HashMap<usize, BitRow>| -> Option<(usize, BitRow)> {
        loop {
            let lead = v.ones().next()?;
            match basis.get(&lead) {
                Some(b) => v.xor_assign(b),
                None => return Some((lead, v)),
            }
        }
    };
    for r in rows {
        if let Some((lead, v)) = reduce(r.clone(), &mut basis) {
            basis.insert(lead, v);
        }
    }
    reduce(target.clone(), &mut basis).is_none()
}

/// Partition of columns into classes of identical bit patterns.
///
/// `labels[c]` is the class of column `c`; classes are numbered in order of
/// their first column, so the labelling is canonical.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColumnClasses {
    labels: Vec<u32>,
    n_classes: usize,
}

impl ColumnClasses {
    #[inline]
    pub fn label(&self, col: usize) -> u32 {
        self.labels[col]
    }

    #[inline]
    pub fn same(&self, a: usize, b: usize) -> bool {
        self.labels[a] == self.labels[b]
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// Members of each class, classes in label order, members ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_classes];
        for (c, &l) in self.labels.iter().enumerate() {
            out[l as usize].push(c);
        }
        out
    }
}

/// Groups the `n_cols` columns of `rows` by equal column pattern.
pub fn column_class_partition(rows: &[BitRow], n_cols: usize) -> ColumnClasses {
    assert!(rows.iter().all(|r| r.len() == n_cols), "row length differs from n_cols");
    // Transpose: one packed vector of length rows.len() per column.
    let stride = words_for(rows.len()).max(1);
    let mut cols = vec![0u64; stride * n_cols];
    for (r, row) in rows.iter().enumerate() {
        let (rw, rb) = (r / WORD, 1u64 << (r % WORD));
        for c in row.ones() {
            cols[c * stride + rw] |= rb;
        }
    }
    let mut seen: HashMap<&[u64], u32> = HashMap::with_capacity(n_cols);
    let mut labels = Vec::with_capacity(n_cols);
    for c in 0..n_cols {
        let key = &cols[c * stride..(c + 1) * stride];
        let next = seen.len() as u32;
        labels.push(*seen.entry(key).or_insert(next));
    }
    let n_classes = seen.len();
    ColumnClasses { labels, n_classes }
}
