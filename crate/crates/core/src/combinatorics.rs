//! Permutation pairs and their combinatorial invariants: irreducibility and
//! rotation tests, the singularity structure `Sigma(pi)` with its `b^s`
//! vectors, the genus, and the linear maps `Omega_pi` whose image is `H(pi)`.
//!
//! Conventions: the alphabet is an ordered list of symbols fixed at
//! construction; every vector and matrix in the crate is indexed in alphabet
//! order. Rows are stored as orderings of alphabet indices.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use crate::intmat::{integer_kernel, IMat};
use crate::linalg::orthonormal_colspace;
use crate::{Error, Result};

/// A pair of top/bottom orderings of a common alphabet.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    symbols: Vec<String>,
    /// Alphabet index occupying each top-row position.
    top_order: Vec<usize>,
    /// Alphabet index occupying each bottom-row position.
    bottom_order: Vec<usize>,
}

impl Permutation {
    pub fn new(symbols: Vec<String>, top_order: Vec<usize>, bottom_order: Vec<usize>) -> Result<Self> {
        let d = symbols.len();
        if d < 2 {
            return Err(Error::InvalidPermutation("need at least two symbols".into()));
        }
        if symbols.iter().collect::<HashSet<_>>().len() != d {
            return Err(Error::InvalidPermutation("duplicate symbols".into()));
        }
        for row in [&top_order, &bottom_order] {
            if row.len() != d || row.iter().collect::<HashSet<_>>().len() != d
                || row.iter().any(|&i| i >= d)
            {
                return Err(Error::InvalidPermutation("rows must order the alphabet".into()));
            }
        }
        Ok(Permutation { symbols, top_order, bottom_order })
    }

    /// Build from symbol rows; the alphabet order is the top row's order.
    pub fn from_rows(top: &[&str], bottom: &[&str]) -> Result<Self> {
        let symbols: Vec<String> = top.iter().map(|s| s.to_string()).collect();
        let d = symbols.len();
        let pos_of = |s: &str| symbols.iter().position(|t| t == s);
        let top_order = (0..d).collect();
        let bottom_order = bottom
            .iter()
            .map(|s| pos_of(s).ok_or_else(|| Error::InvalidPermutation(format!("unknown symbol '{s}' in bottom row"))))
            .collect::<Result<Vec<_>>>()?;
        Permutation::new(symbols, top_order, bottom_order)
    }

    /// The reversal `pi_d(j) = d + 1 - j` on `d` letters.
    pub fn reversal(d: usize) -> Self {
        let symbols: Vec<String> = (0..d).map(default_symbol).collect();
        Permutation::new(symbols, (0..d).collect(), (0..d).rev().collect())
            .expect("reversal is valid")
    }

    /// Canonically labeled permutation with the given monodromy
    /// (`monodromy[i]` is the 0-based bottom position of the i-th top symbol).
    pub fn from_monodromy(monodromy: &[usize]) -> Result<Self> {
        let d = monodromy.len();
        let symbols: Vec<String> = (0..d).map(default_symbol).collect();
        let mut bottom_order = vec![usize::MAX; d];
        for (i, &p) in monodromy.iter().enumerate() {
            if p >= d || bottom_order[p] != usize::MAX {
                return Err(Error::InvalidPermutation("monodromy is not a permutation".into()));
            }
            bottom_order[p] = i;
        }
        Permutation::new(symbols, (0..d).collect(), bottom_order)
    }

    pub fn d(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn symbol(&self, idx: usize) -> &str {
        &self.symbols[idx]
    }

    pub fn top_order(&self) -> &[usize] {
        &self.top_order
    }

    pub fn bottom_order(&self) -> &[usize] {
        &self.bottom_order
    }

    /// Position (0-based) of an alphabet index in the top row.
    pub fn top_pos(&self, sym: usize) -> usize {
        self.top_order.iter().position(|&s| s == sym).unwrap()
    }

    pub fn bottom_pos(&self, sym: usize) -> usize {
        self.bottom_order.iter().position(|&s| s == sym).unwrap()
    }

    /// Last symbol of the top row, `alpha(t)`.
    pub fn alpha_t(&self) -> usize {
        *self.top_order.last().unwrap()
    }

    /// Last symbol of the bottom row, `alpha(b)`.
    pub fn alpha_b(&self) -> usize {
        *self.bottom_order.last().unwrap()
    }

    /// Monodromy invariant as 0-based positions: entry `i` is the bottom-row
    /// position of the symbol at top-row position `i`.
    pub fn monodromy(&self) -> Vec<usize> {
        self.top_order.iter().map(|&s| self.bottom_pos(s)).collect()
    }

    /// No proper top prefix equals the corresponding bottom prefix as a set.
    pub fn is_irreducible(&self) -> bool {
        let d = self.d();
        debug_assert!(d <= 64, "bitmask prefix test assumes small alphabets");
        let mut top_mask = 0u64;
        let mut bottom_mask = 0u64;
        for k in 0..d - 1 {
            top_mask |= 1 << self.top_order[k];
            bottom_mask |= 1 << self.bottom_order[k];
            if top_mask == bottom_mask {
                return false;
            }
        }
        true
    }

    /// Whether the monodromy satisfies `m(i+1) = m(i) + 1 (mod d)`, in which
    /// case the i.e.t. is conjugate to a circle rotation.
    pub fn is_rotation(&self) -> bool {
        let m = self.monodromy();
        let d = self.d();
        (0..d - 1).all(|i| m[i + 1] == (m[i] + 1) % d)
    }

    pub fn require_irreducible(&self) -> Result<()> {
        if self.is_irreducible() {
            Ok(())
        } else {
            Err(Error::Reducible(self.to_string()))
        }
    }
}

fn default_symbol(i: usize) -> String {
    // a..z, then a1, b1, ...
    let letter = (b'a' + (i % 26) as u8) as char;
    if i < 26 {
        letter.to_string()
    } else {
        format!("{letter}{}", i / 26)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let row = |order: &[usize]| {
            order.iter().map(|&i| self.symbols[i].as_str()).collect::<Vec<_>>().join(" ")
        };
        write!(f, "{} / {}", row(&self.top_order), row(&self.bottom_order))
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation({self})")
    }
}

impl FromStr for Permutation {
    type Err = Error;

    /// Parse the text form `"a b c / c b a"`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split('/');
        let (top, bottom) = match (parts.next(), parts.next(), parts.next()) {
            (Some(t), Some(b), None) => (t, b),
            _ => {
                return Err(Error::InvalidPermutation(
                    "expected two rows separated by one '/'".into(),
                ))
            }
        };
        let top: Vec<&str> = top.split_whitespace().collect();
        let bottom: Vec<&str> = bottom.split_whitespace().collect();
        Permutation::from_rows(&top, &bottom)
    }
}

/// The permutation `sigma_pi` on `{0..d}`, its orbits `Sigma(pi)`, the
/// associated integer vectors `b^s`, and the genus of the suspension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SingularityProfile {
    pub sigma: Vec<usize>,
    /// Orbits of `sigma`, each sorted, ordered by smallest element.
    pub orbits: Vec<Vec<usize>>,
    /// `b^s` per orbit, aligned with `orbits`.
    pub b_vectors: Vec<Vec<i64>>,
    pub genus: usize,
}

impl SingularityProfile {
    pub fn num_singularities(&self) -> usize {
        self.orbits.len()
    }
}

/// Compute `sigma_pi` and everything derived from it.
pub fn singularity_profile(p: &Permutation) -> Result<SingularityProfile> {
    p.require_irreducible()?;
    let d = p.d();
    let m = p.monodromy(); // 0-based positions
    // inv[v] = top position whose bottom position is v
    let mut inv = vec![0usize; d];
    for (i, &v) in m.iter().enumerate() {
        inv[v] = i;
    }
    // sigma on {0..d}, with the paper's three cases translated to 0-based
    // monodromy values: sigma(0) = position of bottom value 0; the preimage
    // of the last bottom value maps to d; otherwise follow the successor.
    let mut sigma = vec![0usize; d + 1];
    sigma[0] = inv[0];
    for i in 1..=d {
        if i - 1 == inv[d - 1] {
            sigma[i] = d;
        } else {
            sigma[i] = inv[m[i - 1] + 1];
        }
    }

    let mut seen = vec![false; d + 1];
    let mut orbits = Vec::new();
    for start in 0..=d {
        if seen[start] {
            continue;
        }
        let mut orbit = Vec::new();
        let mut cur = start;
        while !seen[cur] {
            seen[cur] = true;
            orbit.push(cur);
            cur = sigma[cur];
        }
        orbit.sort_unstable();
        orbits.push(orbit);
    }

    let b_vectors: Vec<Vec<i64>> = orbits
        .iter()
        .map(|orbit| {
            let chi = |i: usize| orbit.binary_search(&i).is_ok() as i64;
            (1..=d).map(|i| chi(i - 1) - chi(i)).collect()
        })
        .collect();

    let k = d + 1 - orbits.len();
    if k % 2 != 0 {
        return Err(Error::Internal(format!(
            "d + 1 - #Sigma = {k} must be even for {p}"
        )));
    }
    Ok(SingularityProfile { sigma, orbits, b_vectors, genus: k / 2 })
}

/// Per-orbit values of `(1,...,1) . b^s`, checked against the three-case
/// rule, plus whether `(1,...,1)` lies in `H(pi)`.
pub fn check_one_vector_rule(p: &Permutation) -> Result<(Vec<i64>, bool)> {
    let profile = singularity_profile(p)?;
    let d = p.d();
    let mut values = Vec::with_capacity(profile.orbits.len());
    for (orbit, b) in profile.orbits.iter().zip(&profile.b_vectors) {
        let dot: i64 = b.iter().sum();
        let has0 = orbit.binary_search(&0).is_ok();
        let hasd = orbit.binary_search(&d).is_ok();
        let expected = match (has0, hasd) {
            (true, false) => 1,
            (false, true) => -1,
            _ => 0,
        };
        if dot != expected {
            return Err(Error::Internal(format!(
                "one-vector rule violated for orbit {orbit:?}: got {dot}, expected {expected}"
            )));
        }
        values.push(dot);
    }
    let membership = values.iter().all(|&v| v == 0);
    Ok((values, membership))
}

/// The maps `Omega^t`, `Omega^b`, `Omega = Omega^b - Omega^t`, an orthonormal
/// f64 basis of `H(pi) = Omega(R^d)`, and an integer basis of `H(pi) ∩ Z^d`.
#[derive(Clone, Debug)]
pub struct TranslationStructure {
    pub omega_t: IMat,
    pub omega_b: IMat,
    pub omega: IMat,
    pub h_basis: DMatrix<f64>,
    pub h_lattice: Vec<Vec<BigInt>>,
    pub rank: usize,
}

pub fn omega_maps(p: &Permutation) -> Result<TranslationStructure> {
    p.require_irreducible()?;
    let d = p.d();
    let top_pos: Vec<usize> = (0..d).map(|s| p.top_pos(s)).collect();
    let bottom_pos: Vec<usize> = (0..d).map(|s| p.bottom_pos(s)).collect();
    let build = |pos: &[usize]| {
        let rows: Vec<Vec<i64>> = (0..d)
            .map(|a| (0..d).map(|b| (pos[b] < pos[a]) as i64).collect())
            .collect();
        IMat::from_i64_rows(&rows)
    };
    let omega_t = build(&top_pos);
    let omega_b = build(&bottom_pos);
    let mut omega = IMat::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            omega[(i, j)] = omega_b[(i, j)].clone() - omega_t[(i, j)].clone();
        }
    }
    let rank = omega.rank();
    let profile = singularity_profile(p)?;
    if rank != 2 * profile.genus {
        return Err(Error::Internal(format!(
            "rank Omega = {rank} but 2g = {} for {p}",
            2 * profile.genus
        )));
    }
    let h_basis = orthonormal_colspace(&omega, 1e-10);
    let b_rows = IMat::from_i64_rows(&profile.b_vectors);
    let h_lattice = integer_kernel(&b_rows);
    if h_lattice.len() != rank {
        return Err(Error::Internal(format!(
            "lattice basis of H has {} vectors, expected {rank}",
            h_lattice.len()
        )));
    }
    Ok(TranslationStructure { omega_t, omega_b, omega, h_basis, h_lattice, rank })
}

/// All irreducible monodromies on `d` letters (0-based position vectors).
pub fn irreducible_monodromies(d: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..d).collect();
    permute_rec(&mut current, 0, &mut |perm| {
        if monodromy_is_irreducible(perm) {
            out.push(perm.to_vec());
        }
    });
    out
}

fn permute_rec(v: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute_rec(v, k + 1, f);
        v.swap(k, i);
    }
}

fn monodromy_is_irreducible(m: &[usize]) -> bool {
    let d = m.len();
    let mut max = 0usize;
    for k in 0..d - 1 {
        max = max.max(m[k]);
        if max == k {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    #[test]
    fn parse_display_round_trip() {
        let perm = p("a b c / c b a");
        assert_eq!(perm.to_string(), "a b c / c b a");
        assert_eq!(perm.d(), 3);
        assert_eq!(perm.alpha_t(), 2);
        assert_eq!(perm.alpha_b(), 0);
        assert!("a b / a".parse::<Permutation>().is_err());
        assert!("a a / a a".parse::<Permutation>().is_err());
        assert!("a b / c d".parse::<Permutation>().is_err());
    }

    #[test]
    fn irreducibility_examples() {
        assert!(p("a b / b a").is_irreducible());
        assert!(!p("a b c / a c b").is_irreducible());
        assert!(p("a b c d / d c b a").is_irreducible());
    }

    #[test]
    fn rotation_examples() {
        assert!(p("a b / b a").is_rotation());
        assert!(!p("a b c / c b a").is_rotation());
        assert!(p("a b c / b c a").is_rotation());
    }

    #[test]
    fn singularity_profile_examples() {
        let pr = singularity_profile(&p("a b / b a")).unwrap();
        assert_eq!(pr.orbits, vec![vec![0, 1, 2]]);
        assert_eq!(pr.genus, 1);

        let pr = singularity_profile(&p("a b c / c b a")).unwrap();
        assert_eq!(pr.orbits, vec![vec![0, 2], vec![1, 3]]);
        assert_eq!(pr.b_vectors[0], vec![1, -1, 1]);
        assert_eq!(pr.genus, 1);

        let pr = singularity_profile(&p("a b c d / d c b a")).unwrap();
        assert_eq!(pr.orbits, vec![vec![0, 1, 2, 3, 4]]);
        assert_eq!(pr.genus, 2);
        assert_eq!(pr.b_vectors[0], vec![0, 0, 0, 0]);

        assert!(singularity_profile(&p("a b c / a c b")).is_err());
    }

    #[test]
    fn one_vector_rule_examples() {
        let (vals, member) = check_one_vector_rule(&p("a b c / c b a")).unwrap();
        assert_eq!(vals, vec![1, -1]);
        assert!(!member);

        let (vals, member) = check_one_vector_rule(&p("a b c d / d c b a")).unwrap();
        assert_eq!(vals, vec![0]);
        assert!(member);

        let (vals, member) = check_one_vector_rule(&p("a b / b a")).unwrap();
        assert_eq!(vals, vec![0]);
        assert!(member);
    }

    #[test]
    fn omega_examples() {
        let ts = omega_maps(&p("a b c / c b a")).unwrap();
        let expect = IMat::from_i64_rows(&[vec![0, 1, 1], vec![-1, 0, 1], vec![-1, -1, 0]]);
        assert_eq!(ts.omega, expect);
        assert_eq!(ts.rank, 2);

        let ts2 = omega_maps(&p("a b / b a")).unwrap();
        let expect2 = IMat::from_i64_rows(&[vec![0, 1], vec![-1, 0]]);
        assert_eq!(ts2.omega, expect2);
    }

    #[test]
    fn omega_antisymmetric_for_all_small_irreducibles() {
        for d in 2..=5 {
            for m in irreducible_monodromies(d) {
                let perm = Permutation::from_monodromy(&m).unwrap();
                let ts = omega_maps(&perm).unwrap();
                for i in 0..d {
                    for j in 0..d {
                        assert_eq!(ts.omega[(i, j)], -ts.omega[(j, i)].clone());
                    }
                }
            }
        }
    }

    #[test]
    fn h_lattice_annihilates_b_vectors() {
        for s in ["a b c / c b a", "a b c d / d c b a", "a b c d e / e d c b a"] {
            let perm = p(s);
            let ts = omega_maps(&perm).unwrap();
            let prof = singularity_profile(&perm).unwrap();
            for h in &ts.h_lattice {
                for b in &prof.b_vectors {
                    let dot: BigInt =
                        h.iter().zip(b).map(|(x, &k)| x * BigInt::from(k)).sum();
                    assert_eq!(dot, BigInt::from(0));
                }
            }
        }
    }

    #[test]
    fn irreducible_counts_small_d() {
        assert_eq!(irreducible_monodromies(2).len(), 1);
        assert_eq!(irreducible_monodromies(3).len(), 3);
        assert_eq!(irreducible_monodromies(4).len(), 13);
    }

    #[test]
    fn monodromy_round_trip() {
        let perm = p("a b c d / d c b a");
        let m = perm.monodromy();
        let back = Permutation::from_monodromy(&m).unwrap();
        assert_eq!(back.monodromy(), m);
    }
}
