//! Indexed binary heap over variables, ordered by a caller-supplied key.

pub(crate) struct VarHeap {
    heap: Vec<u32>,
    pos: Vec<i32>,
}

/// `(hint level, activity)`; larger wins, ties go to the smaller variable.
pub(crate) struct Keys<'a> {
    pub level: &'a [i64],
    pub activity: &'a [f64],
}

impl Keys<'_> {
    #[inline]
    fn before(&self, a: u32, b: u32) -> bool {
        let (ai, bi) = (a as usize, b as usize);
        match self.level[ai].cmp(&self.level[bi]) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => match self.activity[ai].partial_cmp(&self.activity[bi]) {
                Some(std::cmp::Ordering::Greater) => true,
                Some(std::cmp::Ordering::Less) => false,
                _ => a < b,
            },
        }
    }
}

impl VarHeap {
    pub fn new() -> Self {
        Self { heap: Vec::new(), pos: Vec::new() }
    }

    pub fn grow(&mut self, n: usize) {
        if self.pos.len() < n {
            self.pos.resize(n, -1);
        }
    }

    #[inline]
    pub fn contains(&self, v: u32) -> bool {
        self.pos.get(v as usize).is_some_and(|&p| p >= 0)
    }

    pub fn insert(&mut self, v: u32, k: &Keys) {
        if self.contains(v) {
            return;
        }
        self.pos[v as usize] = self.heap.len() as i32;
        self.heap.push(v);
        self.up(self.heap.len() - 1, k);
    }

    /// Restores heap order after `v`'s key changed in either direction.
    pub fn update(&mut self, v: u32, k: &Keys) {
        if let Some(&p) = self.pos.get(v as usize) {
            if p >= 0 {
                let p = self.up(p as usize, k);
                self.down(p, k);
            }
        }
    }

    pub fn pop(&mut self, k: &Keys) -> Option<u32> {
        if self.heap.is_empty() {
            return None;
        }
        let top = self.heap.swap_remove(0);
        self.pos[top as usize] = -1;
        if !self.heap.is_empty() {
            self.pos[self.heap[0] as usize] = 0;
            self.down(0, k);
        }
        Some(top)
    }

    fn up(&mut self, mut i: usize, k: &Keys) -> usize {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            if !k.before(v, self.heap[parent]) {
                break;
            }
            self.heap[i] = self.heap[parent];
            self.pos[self.heap[i] as usize] = i as i32;
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i as i32;
        i
    }

    fn down(&mut self, mut i: usize, k: &Keys) {
        let v = self.heap[i];
        loop {
            let l = 2 * i + 1;
            if l >= self.heap.len() {
                break;
            }
            let r = l + 1;
            let child = if r < self.heap.len() && k.before(self.heap[r], self.heap[l]) { r } else { l };
            if !k.before(self.heap[child], v) {
                break;
            }
            self.heap[i] = self.heap[child];
            self.pos[self.heap[i] as usize] = i as i32;
            i = child;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i as i32;
    }
}
