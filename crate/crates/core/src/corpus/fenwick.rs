/// Growable Fenwick tree over `u64` weights for O(log n) weighted draws.
#[derive(Debug, Clone, Default)]
pub struct Fenwick {
    // 1-based; tree[0] unused.
    tree: Vec<u64>,
    total: u64,
}

impl Fenwick {
    pub fn new() -> Self {
        Fenwick { tree: vec![0], total: 0 }
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Sum of weights at indices `< end`.
    pub fn prefix(&self, end: usize) -> u64 {
        let mut i = end;
        let mut s = 0;
        while i > 0 {
            s += self.tree[i];
            i &= i - 1;
        }
        s
    }

    /// Appends a weight after the last index.
    pub fn push(&mut self, w: u64) {
        let n = self.tree.len();
        let low = n & n.wrapping_neg();
        let covered = self.prefix(n - 1) - self.prefix(n - low);
        self.tree.push(w + covered);
        self.total += w;
    }

    pub fn add(&mut self, idx: usize, delta: i64) {
        let mut i = idx + 1;
        while i < self.tree.len() {
            self.tree[i] = self.tree[i].wrapping_add_signed(delta);
            i += i & i.wrapping_neg();
        }
        self.total = self.total.wrapping_add_signed(delta);
    }

    pub fn get(&self, idx: usize) -> u64 {
        self.prefix(idx + 1) - self.prefix(idx)
    }

    /// Smallest index whose inclusive prefix sum exceeds `target`.
    /// `target` must be below [`Fenwick::total`].
    pub fn find(&self, mut target: u64) -> usize {
        debug_assert!(target < self.total);
        let mut pos = 0;
        let mut step = (self.tree.len() - 1).next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next < self.tree.len() && self.tree[next] <= target {
                target -= self.tree[next];
                pos = next;
            }
            step >>= 1;
        }
        pos
    }
}
