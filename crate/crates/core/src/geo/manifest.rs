//! Canonical category and cuisine manifests.
//!
//! The 22 top-level business categories and the 145 restaurant cuisine
//! subcategories ship as versioned data files compiled into the crate.
//! Category strings not present in a manifest never crash the pipeline;
//! they are tallied in reports and ignored in count vectors.

use std::collections::BTreeMap;
use std::sync::LazyLock;

pub const CATEGORY_COUNT: usize = 22;
pub const CUISINE_COUNT: usize = 145;

const CATEGORIES_RAW: &str = include_str!("../../data/categories.txt");
const CUISINES_RAW: &str = include_str!("../../data/cuisines.txt");

#[derive(Debug)]
pub struct Manifest {
    names: Vec<String>,
    slugs: Vec<String>,
    /// Lowercased name -> vector index.
    index: BTreeMap<String, usize>,
}

impl Manifest {
    fn from_raw(raw: &str, expected: usize) -> Manifest {
        let names: Vec<String> = raw
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_string)
            .collect();
        assert_eq!(names.len(), expected, "manifest entry count");
        let slugs: Vec<String> = names.iter().map(|n| slugify(n)).collect();
        let mut index = BTreeMap::new();
        for (i, name) in names.iter().enumerate() {
            let prev = index.insert(name.to_lowercase(), i);
            assert!(prev.is_none(), "duplicate manifest entry {name:?}");
        }
        Manifest { names, slugs, index }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn slugs(&self) -> &[String] {
        &self.slugs
    }

    /// Index of a category name, matched case-insensitively.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(&name.to_lowercase()).copied()
    }

    /// Tally a business's category list into a fixed-width count vector.
    /// Returns the names that matched nothing.
    pub fn tally<'a>(&self, categories: impl IntoIterator<Item = &'a str>) -> (Vec<u32>, Vec<&'a str>) {
        let mut counts = vec![0u32; self.len()];
        let mut unknown = Vec::new();
        for c in categories {
            match self.index_of(c) {
                Some(i) => counts[i] += 1,
                None => unknown.push(c),
            }
        }
        (counts, unknown)
    }
}

/// The 22 top-level business categories.
pub fn categories() -> &'static Manifest {
    static M: LazyLock<Manifest> =
        LazyLock::new(|| Manifest::from_raw(CATEGORIES_RAW, CATEGORY_COUNT));
    &M
}

/// The 145 restaurant cuisine subcategories.
pub fn cuisines() -> &'static Manifest {
    static M: LazyLock<Manifest> = LazyLock::new(|| Manifest::from_raw(CUISINES_RAW, CUISINE_COUNT));
    &M
}

/// Stable column-name slug: lowercase, runs of non-alphanumerics collapsed
/// to single underscores.
pub fn slugify(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    let mut last_sep = true;
    for ch in name.chars() {
        if ch.is_alphanumeric() {
            out.extend(ch.to_lowercase());
            last_sep = false;
        } else if !last_sep {
            out.push('_');
            last_sep = true;
        }
    }
    while out.ends_with('_') {
        out.pop();
    }
    out
}
