//! Sparse incremental Gaussian elimination over a field.

use std::collections::BTreeMap;

use rustc_hash::FxHashMap;

use crate::ring::Field;

/// Sparse vector keyed by coordinate index.
pub type SparseVec<E> = BTreeMap<usize, E>;

#[derive(Clone, Debug)]
struct Row<E> {
    /// Reduced vector; its smallest key is the pivot and carries 1.
    vec: SparseVec<E>,
    /// The row as a combination of accepted generators.
    combo: SparseVec<E>,
}

/// Outcome of inserting a vector into a [`SpanReducer`].
#[derive(Clone, Debug, PartialEq)]
pub enum Insert<E> {
    /// The vector was independent and became generator number `.0`.
    Independent(usize),
    /// The vector equals this combination of existing generators.
    Dependent(SparseVec<E>),
}

/// Maintains an echelon basis of the span of the inserted vectors and
/// expresses further vectors in terms of the accepted generators.
#[derive(Clone, Debug)]
pub struct SpanReducer<F: Field> {
    field: F,
    rows: Vec<Row<F::Elem>>,
    by_pivot: FxHashMap<usize, usize>,
    generators: usize,
}

impl<F: Field> SpanReducer<F> {
    pub fn new(field: F) -> Self {
        SpanReducer { field, rows: Vec::new(), by_pivot: FxHashMap::default(), generators: 0 }
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Returns `(coords, residual)` with `v = Σ coords[g]·generator_g + residual`
    /// and `residual` free of pivot columns.
    pub fn reduce(&self, v: &SparseVec<F::Elem>) -> (SparseVec<F::Elem>, SparseVec<F::Elem>) {
        let (coords, residual) = self.reduce_with_combo(v);
        (coords, residual)
    }

    fn reduce_with_combo(&self, v: &SparseVec<F::Elem>) -> (SparseVec<F::Elem>, SparseVec<F::Elem>) {
        let f = &self.field;
        let mut work: SparseVec<F::Elem> = v.iter().filter(|(_, c)| !f.is_zero(c)).map(|(&k, c)| (k, c.clone())).collect();
        let mut coords: SparseVec<F::Elem> = BTreeMap::new();
        let mut cursor = 0usize;
        loop {
            let next = work.range(cursor..).find(|(col, _)| self.by_pivot.contains_key(col)).map(|(&col, c)| (col, c.clone()));
            let Some((col, factor)) = next else { break };
            let row = &self.rows[self.by_pivot[&col]];
            for (&k, c) in &row.vec {
                let delta = f.neg(&f.mul(&factor, c));
                axpy_entry(f, &mut work, k, &delta);
            }
            for (&g, c) in &row.combo {
                let delta = f.mul(&factor, c);
                axpy_entry(f, &mut coords, g, &delta);
            }
            cursor = col + 1;
        }
        (coords, work)
    }

    /// Inserts `v`, accepting it as a new generator when independent.
    pub fn insert(&mut self, v: &SparseVec<F::Elem>) -> Insert<F::Elem> {
        let (coords, residual) = self.reduce_with_combo(v);
        if residual.is_empty() {
            return Insert::Dependent(coords);
        }
        let f = self.field.clone();
        let g = self.generators;
        self.generators += 1;
        let (&pivot, lead) = residual.iter().next().expect("nonempty residual");
        let scale = f.inv(lead);
        let vec: SparseVec<F::Elem> = residual.iter().map(|(&k, c)| (k, f.mul(c, &scale))).collect();
        // residual = v - Σ coords·gen, so the row is (gen_g - Σ coords·gen)·scale
        let mut combo: SparseVec<F::Elem> = coords.iter().map(|(&k, c)| (k, f.neg(&f.mul(c, &scale)))).collect();
        combo.insert(g, scale);
        combo.retain(|_, c| !f.is_zero(c));
        self.by_pivot.insert(pivot, self.rows.len());
        self.rows.push(Row { vec, combo });
        Insert::Independent(g)
    }

    /// Coordinates of `v` in the accepted generators, or `None` if `v` is not
    /// in their span.
    pub fn solve(&self, v: &SparseVec<F::Elem>) -> Option<SparseVec<F::Elem>> {
        let (coords, residual) = self.reduce(v);
        residual.is_empty().then_some(coords)
    }
}

fn axpy_entry<F: Field>(f: &F, target: &mut SparseVec<F::Elem>, key: usize, delta: &F::Elem) {
    if f.is_zero(delta) {
        return;
    }
    match target.get_mut(&key) {
        Some(c) => {
            f.add_assign(c, delta);
            if f.is_zero(c) {
                target.remove(&key);
            }
        }
        None => {
            target.insert(key, delta.clone());
        }
    }
}

/// Kernel of the linear map sending domain basis vector `j` to `images[j]`.
/// Returned vectors are sparse over the domain.
pub fn kernel<F: Field>(field: &F, images: &[SparseVec<F::Elem>]) -> Vec<SparseVec<F::Elem>> {
    let mut reducer = SpanReducer::new(field.clone());
    let mut accepted = Vec::new();
    let mut out = Vec::new();
    for (j, img) in images.iter().enumerate() {
        match reducer.insert(img) {
            Insert::Independent(_) => accepted.push(j),
            Insert::Dependent(coords) => {
                let mut v: SparseVec<F::Elem> = coords.iter().map(|(&g, c)| (accepted[g], field.neg(c))).collect();
                v.insert(j, field.one());
                out.push(v);
            }
        }
    }
    out
}
