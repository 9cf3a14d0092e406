/// Size limits and search budgets shared by every module.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Config {
    /// Largest group built by permutation closure.
    pub max_order: usize,
    /// Largest order accepted by the isomorphism search.
    pub iso_bound: usize,
    /// Node budget for homomorphism and lifting searches.
    pub hom_budget: u64,
    /// Bound on `|arr'|^|obj|` for the natural-transformation search.
    pub mu_budget: u64,
    /// Word-length bound for the graph exact-sequence checks.
    pub max_word_len: usize,
    /// Largest group for which H₂ is computed by dense exact elimination.
    pub h2_dense_bound: usize,
    /// Largest group for which H₂ is computed at all (local elimination).
    pub h2_sparse_bound: usize,
    /// Largest group for which H₁ is computed from the bar complex.
    pub h1_bound: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            max_order: 2048,
            iso_bound: 256,
            hom_budget: 10_000_000,
            mu_budget: 1_000_000,
            max_word_len: 8,
            h2_dense_bound: 16,
            h2_sparse_bound: 60,
            h1_bound: 256,
        }
    }
}
