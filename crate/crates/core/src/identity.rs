//! Contributor de-aliasing.
//!
//! People show up in archives under several names and addresses. Records
//! are merged into one contributor when they share an email address
//! (case-insensitive) or any normalized name variant, with first/last order
//! swapped for names written as `Last, First`. Resolution is per-project.

use std::collections::{BTreeSet, HashMap};
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::ContributorId;

/// Words stripped from names before matching: personal titles plus mailing
/// list boilerplate.
const DROPPED_WORDS: [&str; 8] = ["jr", "sr", "dr", "mr", "ms", "admin", "lists", "group"];

/// Lowercase, strip titles and common words, collapse whitespace. The empty
/// string is a legal result (for example a name that was all boilerplate).
pub fn normalize_name(raw: &str) -> String {
    raw.split(|c: char| c.is_whitespace() || c == ',')
        .map(|tok| tok.trim_matches(|c: char| c == '.' || c == ',').to_lowercase())
        .filter(|tok| !tok.is_empty() && !DROPPED_WORDS.contains(&tok.as_str()))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Normalized name variants to match on. A name with exactly one comma is
/// treated as `Last, First` and contributes both orders; anything else only
/// its as-is normalization.
pub fn comma_swap_candidates(raw: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    out.insert(normalize_name(raw));
    if raw.matches(',').count() == 1 {
        let (last, first) = raw.split_once(',').expect("one comma");
        out.insert(normalize_name(&format!("{first} {last}")));
    }
    out
}

/// A resolved person: every email and name variant seen for them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Contributor {
    pub id: ContributorId,
    pub canonical_name: String,
    pub emails: BTreeSet<String>,
    pub name_variants: BTreeSet<String>,
}

/// The per-project resolution result.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct IdentityMap {
    pub contributors: Vec<Contributor>,
    /// (raw name, raw email) observation -> contributor.
    key_index: HashMap<(String, String), ContributorId>,
    email_index: HashMap<String, ContributorId>,
    /// Contributors whose merged class gathered more than 5 addresses;
    /// worth a manual look, since one shared variant chains whole clusters.
    pub flagged_large_classes: Vec<ContributorId>,
}

impl IdentityMap {
    pub fn lookup(&self, name: &str, email: &str) -> Option<ContributorId> {
        self.key_index
            .get(&(name.to_string(), email.to_lowercase()))
            .copied()
            .or_else(|| self.email_index.get(&email.to_lowercase()).copied())
    }

    pub fn contributor(&self, id: ContributorId) -> &Contributor {
        &self.contributors[id.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.contributors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contributors.is_empty()
    }
}

/// Disjoint sets with path halving; on ties the lower index becomes root so
/// results do not depend on union order.
struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi] = lo;
        }
    }
}

/// Manual identity corrections, applied before automatic merging: every
/// email mapped to the same key is forced into one contributor.
#[derive(Debug, Clone, Default)]
pub struct IdentityOverrides {
    /// lowercased raw email -> arbitrary group key
    pub email_groups: HashMap<String, String>,
}

impl IdentityOverrides {
    /// Load a `raw_email,contributor_key` CSV.
    pub fn load(reader: impl Read, path: &Path) -> Result<Self> {
        let mut csv = csv::ReaderBuilder::new().from_reader(reader);
        let headers = csv
            .headers()
            .map_err(|e| Error::UnreadableStream(e.to_string()))?
            .clone();
        let col = |name: &str| -> Result<usize> {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::MissingColumn {
                    column: name.to_string(),
                    path: path.to_path_buf(),
                })
        };
        let email_col = col("raw_email")?;
        let key_col = col("contributor_key")?;
        let mut email_groups = HashMap::new();
        for row in csv.records() {
            let row = row.map_err(|e| Error::UnreadableStream(e.to_string()))?;
            let email = row.get(email_col).unwrap_or("").trim().to_lowercase();
            let key = row.get(key_col).unwrap_or("").trim().to_string();
            if !email.is_empty() && !key.is_empty() {
                email_groups.insert(email, key);
            }
        }
        Ok(IdentityOverrides { email_groups })
    }
}

/// Merge raw (name, email) observations into contributors.
///
/// Two observations unify when they share a (case-insensitive) email or any
/// name variant of at least two normalized tokens; the token minimum keeps
/// single-word boilerplate names ("admin") from collapsing everyone into one
/// class. The partition is independent of input order; contributor ids
/// follow first appearance.
pub fn resolve_identities(
    observations: &[(String, String)],
    overrides: &IdentityOverrides,
) -> IdentityMap {
    let n = observations.len();
    let mut uf = UnionFind::new(n);

    let mut by_email: HashMap<String, usize> = HashMap::new();
    let mut by_override: HashMap<&str, usize> = HashMap::new();
    let mut by_variant: HashMap<String, usize> = HashMap::new();

    for (i, (name, email)) in observations.iter().enumerate() {
        let email = email.to_lowercase();
        if !email.is_empty() {
            if let Some(key) = overrides.email_groups.get(&email) {
                match by_override.get(key.as_str()) {
                    Some(&j) => uf.union(i, j),
                    None => {
                        by_override.insert(key, i);
                    }
                }
            }
            match by_email.get(&email) {
                Some(&j) => uf.union(i, j),
                None => {
                    by_email.insert(email, i);
                }
            }
        }
        for variant in comma_swap_candidates(name) {
            if variant.split(' ').count() < 2 {
                continue;
            }
            match by_variant.get(&variant) {
                Some(&j) => uf.union(i, j),
                None => {
                    by_variant.insert(variant, i);
                }
            }
        }
    }

    // Classes in first-appearance order.
    let mut class_of_root: HashMap<usize, usize> = HashMap::new();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let root = uf.find(i);
        let class = *class_of_root.entry(root).or_insert_with(|| {
            classes.push(Vec::new());
            classes.len() - 1
        });
        classes[class].push(i);
    }

    let mut map = IdentityMap::default();
    for (class_idx, members) in classes.iter().enumerate() {
        let id = ContributorId(class_idx as u32);
        let mut emails = BTreeSet::new();
        let mut variants = BTreeSet::new();
        let mut name_freq: HashMap<&str, usize> = HashMap::new();
        for &i in members {
            let (name, email) = &observations[i];
            if !email.is_empty() {
                emails.insert(email.to_lowercase());
            }
            if !name.trim().is_empty() {
                *name_freq.entry(name.as_str()).or_insert(0) += 1;
            }
            variants.extend(comma_swap_candidates(name));
            map.key_index
                .insert((name.clone(), email.to_lowercase()), id);
        }
        for email in &emails {
            map.email_index.insert(email.clone(), id);
        }
        // Most frequent raw spelling; ties broken lexicographically.
        let canonical_name = name_freq
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
            .map(|(name, _)| name.to_string())
            .unwrap_or_default();
        variants.remove("");
        if emails.len() > 5 {
            map.flagged_large_classes.push(id);
        }
        map.contributors.push(Contributor {
            id,
            canonical_name,
            emails,
            name_variants: variants,
        });
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn obs(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs
            .iter()
            .map(|(n, e)| (n.to_string(), e.to_string()))
            .collect()
    }

    #[test]
    fn normalize_strips_titles_and_common_words() {
        assert_eq!(normalize_name("John Smith Jr."), "john smith");
        assert_eq!(normalize_name(""), "");
        assert_eq!(normalize_name("ASF Lists Admin"), "asf");
        assert_eq!(normalize_name("  Dr.  Maria   Garcia "), "maria garcia");
    }

    #[test]
    fn comma_swap_only_on_exactly_one_comma() {
        let swapped = comma_swap_candidates("Smith, John");
        assert_eq!(
            swapped,
            BTreeSet::from(["smith john".to_string(), "john smith".to_string()])
        );
        assert_eq!(
            comma_swap_candidates("John Smith"),
            BTreeSet::from(["john smith".to_string()])
        );
        assert_eq!(
            comma_swap_candidates("a, b, c"),
            BTreeSet::from(["a b c".to_string()])
        );
    }

    #[test]
    fn name_variant_match_merges() {
        let map = resolve_identities(
            &obs(&[("John Smith", "a@x.org"), ("Smith, John", "b@y.org")]),
            &IdentityOverrides::default(),
        );
        assert_eq!(map.len(), 1);
        assert_eq!(map.lookup("John Smith", "a@x.org"), map.lookup("Smith, John", "b@y.org"));
    }

    #[test]
    fn shared_email_merges() {
        let map = resolve_identities(
            &obs(&[("J S", "a@x.org"), ("Jane Smith", "a@x.org")]),
            &IdentityOverrides::default(),
        );
        assert_eq!(map.len(), 1);
    }

    #[test]
    fn single_token_names_do_not_merge() {
        let map = resolve_identities(
            &obs(&[("Admin", "a@x.org"), ("Admin", "b@y.org")]),
            &IdentityOverrides::default(),
        );
        assert_eq!(map.len(), 2);
    }

    // Twelve-record fixture; the expected partition was computed with
    // pencil-and-paper union-find before this module was written:
    // {0,1,2,3} {4,5,6} {7,8,9,11} {10}.
    fn twelve_records() -> Vec<(String, String)> {
        obs(&[
            ("John Smith", "jsmith@apache.org"),
            ("Smith, John", "john@gmail.com"),
            ("J. Smith", "jsmith@apache.org"),
            ("john smith jr.", "smithy@corp.com"),
            ("Maria Garcia", "maria@apache.org"),
            ("Garcia, Maria", "mgarcia@zoo.net"),
            ("MARIA GARCIA", "maria@APACHE.ORG"),
            ("Wei Chen", "wchen@apache.org"),
            ("Wei Chen", "wei.chen@corp.com"),
            ("Admin", "wchen@apache.org"),
            ("Lists Admin", "announce@apache.org"),
            ("Chen, Wei", "chen@foo.org"),
        ])
    }

    fn partition_of(records: &[(String, String)], map: &IdentityMap) -> Vec<BTreeSet<usize>> {
        let mut classes: HashMap<ContributorId, BTreeSet<usize>> = HashMap::new();
        for (i, (name, email)) in records.iter().enumerate() {
            let id = map.lookup(name, email).expect("all records resolved");
            classes.entry(id).or_default().insert(i);
        }
        let mut out: Vec<BTreeSet<usize>> = classes.into_values().collect();
        out.sort();
        out
    }

    #[test]
    fn twelve_record_fixture_matches_hand_oracle() {
        let records = twelve_records();
        let map = resolve_identities(&records, &IdentityOverrides::default());
        let expected: Vec<BTreeSet<usize>> = vec![
            BTreeSet::from([0, 1, 2, 3]),
            BTreeSet::from([4, 5, 6]),
            BTreeSet::from([7, 8, 9, 11]),
            BTreeSet::from([10]),
        ];
        assert_eq!(partition_of(&records, &map), expected);
    }

    #[test]
    fn no_two_contributors_share_an_email() {
        let records = twelve_records();
        let map = resolve_identities(&records, &IdentityOverrides::default());
        let mut seen: HashMap<&str, ContributorId> = HashMap::new();
        for c in &map.contributors {
            for email in &c.emails {
                if let Some(prev) = seen.insert(email, c.id) {
                    panic!("email {email} in contributors {prev:?} and {:?}", c.id);
                }
            }
        }
    }

    #[test]
    fn overrides_force_merges_before_automatic_rules() {
        let mut overrides = IdentityOverrides::default();
        overrides
            .email_groups
            .insert("x1@a.org".into(), "person-x".into());
        overrides
            .email_groups
            .insert("x2@b.org".into(), "person-x".into());
        let map = resolve_identities(
            &obs(&[("Alpha One", "x1@a.org"), ("Beta Two", "x2@b.org")]),
            &overrides,
        );
        assert_eq!(map.len(), 1);
    }

    #[test]
    fn override_file_parses() {
        let csv = "raw_email,contributor_key\na@x.org,p1\nb@y.org,p1\n";
        let o = IdentityOverrides::load(csv.as_bytes(), Path::new("o.csv")).unwrap();
        assert_eq!(o.email_groups.len(), 2);
    }

    proptest! {
        // The partition does not depend on input order.
        #[test]
        fn partition_invariant_under_shuffle(seed in 0u64..500) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let records = twelve_records();
            let base = partition_of(&records, &resolve_identities(&records, &IdentityOverrides::default()));

            let mut shuffled = records.clone();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            shuffled.shuffle(&mut rng);
            let map = resolve_identities(&shuffled, &IdentityOverrides::default());
            // Partition compared on the original record indexing.
            let mut classes: HashMap<ContributorId, BTreeSet<usize>> = HashMap::new();
            for (i, (name, email)) in records.iter().enumerate() {
                let id = map.lookup(name, email).expect("resolved");
                classes.entry(id).or_default().insert(i);
            }
            let mut got: Vec<BTreeSet<usize>> = classes.into_values().collect();
            got.sort();
            prop_assert_eq!(got, base);
        }
    }
}
