//! Degree-3 polynomials over F_2 and the published instances that replace
//! membership oracles: p's vanishing on the hidden subspace, q's vanishing
//! on its dual, with a controlled fraction of decoys mixed in.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::f2::{invert_linear_map, SubspaceF2, VecF2};
use crate::public::hs::HsKey;
use crate::rng::Stream;

/// A multilinear polynomial of degree at most three: a set of monomials,
/// each a sorted list of variable indices, with the empty list standing for
/// the constant 1. Addition of equal monomials cancels mod 2, and repeated
/// variables collapse (x^2 = x).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly3F2 {
    n: usize,
    monomials: BTreeSet<Vec<usize>>,
}

fn normalize_monomial(n: usize, mut vars: Vec<usize>) -> Result<Vec<usize>> {
    vars.sort_unstable();
    vars.dedup();
    if let Some(&bad) = vars.iter().find(|&&v| v >= n) {
        return Err(Error::InvalidArgument(format!(
            "variable x{bad} outside the {n}-variable ring"
        )));
    }
    if vars.len() > 3 {
        return Err(Error::InvalidArgument(format!(
            "monomial degree {} exceeds three",
            vars.len()
        )));
    }
    Ok(vars)
}

fn toggle(set: &mut BTreeSet<Vec<usize>>, m: Vec<usize>) {
    if !set.remove(&m) {
        set.insert(m);
    }
}

impl Poly3F2 {
    /// Build from monomials; duplicates cancel in pairs.
    pub fn new(n: usize, monomials: impl IntoIterator<Item = Vec<usize>>) -> Result<Self> {
        if n == 0 || n > crate::MAX_QUBITS {
            return Err(Error::InvalidArgument(format!(
                "polynomial ring width {n} outside 1..={}",
                crate::MAX_QUBITS
            )));
        }
        let mut set = BTreeSet::new();
        for m in monomials {
            toggle(&mut set, normalize_monomial(n, m)?);
        }
        Ok(Poly3F2 { n, monomials: set })
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::new(n, [])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> &BTreeSet<Vec<usize>> {
        &self.monomials
    }

    pub fn evaluate(&self, x: &VecF2) -> Result<u8> {
        if x.n() != self.n {
            return Err(Error::Dimension(format!(
                "point lives in F_2^{}, polynomial in F_2^{}",
                x.n(),
                self.n
            )));
        }
        let mut acc = 0u8;
        for m in &self.monomials {
            if m.iter().all(|&v| x.get(v) == 1) {
                acc ^= 1;
            }
        }
        Ok(acc)
    }

    /// Index-space masks of the monomials: variable i sits at index bit
    /// n-1-i, so a monomial evaluates to 1 on x iff its mask is contained
    /// in x.
    pub fn index_masks(&self) -> Vec<u64> {
        self.monomials
            .iter()
            .map(|m| m.iter().fold(0u64, |acc, &v| acc | 1 << (self.n - 1 - v)))
            .collect()
    }

    /// Evaluate at a basis index (same convention as [`VecF2::to_index`]).
    pub fn evaluate_index(&self, x: u64) -> u8 {
        let mut acc = 0u8;
        for m in &self.monomials {
            let mask = m.iter().fold(0u64, |a, &v| a | 1 << (self.n - 1 - v));
            if x & mask == mask {
                acc ^= 1;
            }
        }
        acc
    }

    /// Uniform over all degree-at-most-3 polynomials: an independent coin
    /// per monomial, constant included.
    pub fn random(n: usize, rng: &mut Stream) -> Result<Self> {
        let mut set = BTreeSet::new();
        let mut maybe = |m: Vec<usize>, rng: &mut Stream| {
            if rng.bit() == 1 {
                set.insert(m);
            }
        };
        maybe(vec![], rng);
        for i in 0..n {
            maybe(vec![i], rng);
            for j in i + 1..n {
                maybe(vec![i, j], rng);
                for k in j + 1..n {
                    maybe(vec![i, j, k], rng);
                }
            }
        }
        Ok(Poly3F2 { n, monomials: set })
    }

    /// Substitute x_i <- rows[i] . x for every variable simultaneously.
    /// Degree never grows, so the result stays in the ring.
    pub fn compose_linear(&self, rows: &[VecF2]) -> Result<Poly3F2> {
        if rows.len() != self.n || rows.iter().any(|r| r.n() != self.n) {
            return Err(Error::Dimension(format!(
                "substitution needs {0} linear forms over {0} variables",
                self.n
            )));
        }
        let supports: Vec<Vec<usize>> = rows
            .iter()
            .map(|r| (0..self.n).filter(|&j| r.get(j) == 1).collect())
            .collect();
        let mut acc = BTreeSet::new();
        for m in &self.monomials {
            // Expand the product of the substituted linear forms; identical
            // expansion terms cancel pairwise at the toggle.
            let mut terms: Vec<Vec<usize>> = vec![vec![]];
            for &var in m {
                let mut next = Vec::with_capacity(terms.len() * supports[var].len().max(1));
                for t in &terms {
                    for &b in &supports[var] {
                        let mut grown = t.clone();
                        grown.push(b);
                        grown.sort_unstable();
                        grown.dedup();
                        next.push(grown);
                    }
                }
                terms = next;
            }
            for t in terms {
                toggle(&mut acc, t);
            }
        }
        Ok(Poly3F2 { n: self.n, monomials: acc })
    }

    /// Parse the display form: monomials joined by '+', variables joined by
    /// '*', the constant written '1', the zero polynomial written '0'.
    pub fn parse(n: usize, s: &str) -> Result<Poly3F2> {
        let body = s.trim();
        if body.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        if body == "0" {
            return Poly3F2::zero(n);
        }
        let mut set = BTreeSet::new();
        for term in body.split('+') {
            let term = term.trim();
            if term == "1" {
                toggle(&mut set, vec![]);
                continue;
            }
            let mut vars = Vec::new();
            for factor in term.split('*') {
                let factor = factor.trim();
                let idx: usize = factor
                    .strip_prefix('x')
                    .and_then(|d| d.parse().ok())
                    .ok_or_else(|| Error::Parse(format!("bad factor {factor:?}")))?;
                vars.push(idx);
            }
            toggle(&mut set, normalize_monomial(n, vars)?);
        }
        Ok(Poly3F2 { n, monomials: set })
    }
}

impl fmt::Display for Poly3F2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.monomials.is_empty() {
            return write!(f, "0");
        }
        let mut parts: Vec<String> = self
            .monomials
            .iter()
            .filter(|m| !m.is_empty())
            .map(|m| m.iter().map(|v| format!("x{v}")).collect::<Vec<_>>().join("*"))
            .collect();
        if self.monomials.contains(&vec![]) {
            parts.push("1".into());
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// File form: a `polys <n>` header, then one polynomial per line.
pub fn polys_to_text(n: usize, polys: &[Poly3F2]) -> String {
    let mut out = format!("polys {n}\n");
    for p in polys {
        out.push_str(&p.to_string());
        out.push('\n');
    }
    out
}

pub fn polys_from_text(text: &str) -> Result<(usize, Vec<Poly3F2>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty polynomial file".into()))?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some("polys") {
        return Err(Error::Parse("polynomial file must start with 'polys <n>'".into()));
    }
    let n: usize = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Parse("bad variable count in polys header".into()))?;
    if n == 0 || n > crate::MAX_QUBITS {
        return Err(Error::Parse(format!("variable count {n} out of range")));
    }
    let polys: Result<Vec<Poly3F2>> = lines.map(|l| Poly3F2::parse(n, l)).collect();
    Ok((n, polys?))
}

/// Indices (ascending) on which every polynomial evaluates to zero.
pub fn common_zero_set(n: usize, polys: &[Poly3F2]) -> Result<Vec<u64>> {
    if n > crate::MAX_QUBITS {
        return Err(Error::Capacity { requested: n, max: crate::MAX_QUBITS });
    }
    if let Some(bad) = polys.iter().find(|p| p.n() != n) {
        return Err(Error::Dimension(format!(
            "polynomial over {} variables in a {n}-variable system",
            bad.n()
        )));
    }
    let mut survivors: Vec<u64> = (0..1u64 << n).collect();
    for p in polys {
        let masks = p.index_masks();
        survivors.retain(|&x| {
            masks.iter().filter(|&&m| x & m == m).count() % 2 == 0
        });
    }
    Ok(survivors)
}

/// The published instance: p's claimed to vanish on S, q's on the dual.
#[derive(Clone, Debug)]
pub struct PolyInstance {
    pub n: usize,
    pub ps: Vec<Poly3F2>,
    pub qs: Vec<Poly3F2>,
}

/// Which instance entries are decoys. Generation hands this back separately
/// so holders of the instance alone learn nothing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NoiseTruth {
    pub noisy_ps: Vec<usize>,
    pub noisy_qs: Vec<usize>,
}

const FAMILY_DRAWS: usize = 10_000;
const NOISE_DRAWS: usize = 10_000;

/// Random polynomial vanishing identically on span(e_0..e_{n/2-1}): every
/// monomial contains a late variable, and there is no constant term.
fn random_vanishing_on_first_half(n: usize, rng: &mut Stream) -> Poly3F2 {
    let half = n / 2;
    let mut set = BTreeSet::new();
    let mut maybe = |m: Vec<usize>, rng: &mut Stream| {
        if m.iter().any(|&v| v >= half) && rng.bit() == 1 {
            set.insert(m);
        }
    };
    for i in 0..n {
        maybe(vec![i], rng);
        for j in i + 1..n {
            maybe(vec![i, j], rng);
            for k in j + 1..n {
                maybe(vec![i, j, k], rng);
            }
        }
    }
    Poly3F2 { n, monomials: set }
}

/// Rows of the inverse of the completed-basis map: composing with them
/// carries a polynomial vanishing on the canonical half-space onto one
/// vanishing on the subspace.
fn inverse_rows(sub: &SubspaceF2) -> Vec<VecF2> {
    let n = sub.n();
    let cols = sub.complete_to_full_basis();
    let inv = invert_linear_map(&cols).expect("a completed basis is invertible");
    (0..n)
        .map(|i| {
            let mut r = VecF2::zero(n);
            for (j, col) in inv.iter().enumerate() {
                if col.get(i) == 1 {
                    r.set(j, 1);
                }
            }
            r
        })
        .collect()
}

/// `count` polynomials vanishing on the subspace whose common zero set is
/// the subspace exactly; whole families are redrawn until the zero set is
/// tight.
fn genuine_family(sub: &SubspaceF2, count: usize, rng: &mut Stream) -> Result<Vec<Poly3F2>> {
    let n = sub.n();
    let rows = inverse_rows(sub);
    let members: BTreeSet<u64> = sub.enumerate().iter().map(|v| v.to_index()).collect();
    for _ in 0..FAMILY_DRAWS {
        let fam: Result<Vec<Poly3F2>> = (0..count)
            .map(|_| random_vanishing_on_first_half(n, rng).compose_linear(&rows))
            .collect();
        let fam = fam?;
        let zeros = common_zero_set(n, &fam)?;
        if zeros.len() == members.len() && zeros.iter().all(|x| members.contains(x)) {
            return Ok(fam);
        }
    }
    Err(Error::NonConvergence(format!(
        "no {count}-polynomial family pinned the subspace after {FAMILY_DRAWS} draws"
    )))
}

/// A decoy: uniform over the ring, resampled until it vanishes on between a
/// quarter and three quarters of the reference subspace, so it is neither a
/// disguised genuine entry nor an instant giveaway.
fn balanced_decoy(n: usize, members: &[u64], rng: &mut Stream) -> Result<Poly3F2> {
    for _ in 0..NOISE_DRAWS {
        let p = Poly3F2::random(n, rng)?;
        let zeros = members.iter().filter(|&&x| p.evaluate_index(x) == 0).count();
        let frac = zeros as f64 / members.len() as f64;
        if (0.25..=0.75).contains(&frac) {
            return Ok(p);
        }
    }
    Err(Error::NonConvergence(format!(
        "no balanced decoy after {NOISE_DRAWS} draws"
    )))
}

fn one_side(
    sub: &SubspaceF2,
    m: usize,
    decoys: usize,
    rng: &mut Stream,
) -> Result<(Vec<Poly3F2>, Vec<usize>)> {
    let n = sub.n();
    let members: Vec<u64> = sub.enumerate().iter().map(|v| v.to_index()).collect();
    let genuine = genuine_family(sub, m - decoys, rng)?;
    let mut noisy_at: Vec<usize> = rng.permutation(m).into_iter().take(decoys).collect();
    noisy_at.sort_unstable();
    let mut polys = Vec::with_capacity(m);
    let mut next_genuine = genuine.into_iter();
    for pos in 0..m {
        if noisy_at.binary_search(&pos).is_ok() {
            polys.push(balanced_decoy(n, &members, rng)?);
        } else {
            polys.push(next_genuine.next().expect("counts add up"));
        }
    }
    Ok((polys, noisy_at))
}

/// Publish a polynomial instance for the key: m p's and m q's, with
/// floor(noise_rate * m) uniformly placed decoys on each side. The genuine
/// entries on each side cut out exactly the subspace (resp. its dual).
pub fn polys_generate(
    key: &HsKey,
    m: usize,
    noise_rate: f64,
    rng: &mut Stream,
) -> Result<(PolyInstance, NoiseTruth)> {
    let n = key.n();
    if m < n {
        return Err(Error::Precondition(format!(
            "{m} polynomials cannot pin down a subspace of F_2^{n}; need at least {n}"
        )));
    }
    if !noise_rate.is_finite() || !(0.0..=0.5).contains(&noise_rate) {
        return Err(Error::InvalidArgument(format!(
            "noise rate {noise_rate} outside [0, 0.5]"
        )));
    }
    let decoys = (noise_rate * m as f64).floor() as usize;
    let (ps, noisy_ps) = one_side(key.subspace(), m, decoys, rng)?;
    let (qs, noisy_qs) = one_side(key.dual(), m, decoys, rng)?;
    Ok((PolyInstance { n, ps, qs }, NoiseTruth { noisy_ps, noisy_qs }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::f2::random_subspace;
    use crate::public::hs::hs_keygen;

    #[test]
    fn display_and_parse_round_trip() {
        let mut rng = Stream::from_seed(301);
        for _ in 0..50 {
            let p = Poly3F2::random(7, &mut rng).unwrap();
            let q = Poly3F2::parse(7, &p.to_string()).unwrap();
            assert_eq!(p, q, "text was {p}");
        }
        let z = Poly3F2::zero(3).unwrap();
        assert_eq!(z.to_string(), "0");
        assert_eq!(Poly3F2::parse(3, "0").unwrap(), z);
        let crafted = Poly3F2::parse(4, "x0*x2 + x1 + 1").unwrap();
        assert_eq!(crafted.to_string(), "x0*x2 + x1 + 1");
    }

    #[test]
    fn parser_applies_ring_identities() {
        // Equal monomials cancel, repeated variables collapse.
        assert!(Poly3F2::parse(4, "x1 + x1").unwrap().is_zero());
        let collapsed = Poly3F2::parse(4, "x2*x2*x0").unwrap();
        assert_eq!(collapsed, Poly3F2::new(4, [vec![0, 2]]).unwrap());
        assert!(Poly3F2::parse(4, "x9").is_err());
        assert!(Poly3F2::parse(4, "x0*x1*x2*x3").is_err());
        assert!(Poly3F2::parse(4, "y3").is_err());
        assert!(Poly3F2::parse(4, "").is_err());
    }

    #[test]
    fn evaluation_conventions_agree() {
        let mut rng = Stream::from_seed(303);
        for _ in 0..20 {
            let p = Poly3F2::random(5, &mut rng).unwrap();
            for x in 0..32u64 {
                let v = VecF2::from_index(5, x);
                assert_eq!(p.evaluate(&v).unwrap(), p.evaluate_index(x));
            }
        }
        // x0 is the most significant index bit.
        let p = Poly3F2::parse(2, "x0").unwrap();
        assert_eq!(common_zero_set(2, &[p]).unwrap(), vec![0, 1]);
    }

    #[test]
    fn composition_matches_pointwise_substitution() {
        let mut rng = Stream::from_seed(307);
        for _ in 0..10 {
            let sub = random_subspace(6, 3, &mut rng).unwrap();
            let cols = sub.complete_to_full_basis();
            let rows = inverse_rows(&sub);
            let p = Poly3F2::random(6, &mut rng).unwrap();
            let q = p.compose_linear(&rows).unwrap();
            for x in 0..64u64 {
                let v = VecF2::from_index(6, x);
                let tx = crate::f2::apply_linear_map(&cols, &v);
                assert_eq!(q.evaluate(&tx).unwrap(), p.evaluate(&v).unwrap());
            }
        }
    }

    #[test]
    fn noiseless_instance_vanishes_exactly_on_the_subspaces() {
        let mut rng = Stream::from_seed(311);
        let key = hs_keygen(6, &mut rng).unwrap();
        let (inst, truth) = polys_generate(&key, 12, 0.0, &mut rng).unwrap();
        assert!(truth.noisy_ps.is_empty() && truth.noisy_qs.is_empty());
        for p in &inst.ps {
            for v in key.subspace().enumerate() {
                assert_eq!(p.evaluate(&v).unwrap(), 0);
            }
        }
        for q in &inst.qs {
            for v in key.dual().enumerate() {
                assert_eq!(q.evaluate(&v).unwrap(), 0);
            }
        }
        let zeros = common_zero_set(6, &inst.ps).unwrap();
        let members: Vec<u64> = key.subspace().enumerate().iter().map(|v| v.to_index()).collect();
        let mut sorted = members.clone();
        sorted.sort_unstable();
        assert_eq!(zeros, sorted);
        let zeros_q = common_zero_set(6, &inst.qs).unwrap();
        let mut dual_members: Vec<u64> =
            key.dual().enumerate().iter().map(|v| v.to_index()).collect();
        dual_members.sort_unstable();
        assert_eq!(zeros_q, dual_members);
    }

    #[test]
    fn decoys_are_balanced_and_genuine_entries_stay_tight() {
        let mut rng = Stream::from_seed(313);
        let key = hs_keygen(6, &mut rng).unwrap();
        let (inst, truth) = polys_generate(&key, 16, 0.25, &mut rng).unwrap();
        assert_eq!(truth.noisy_ps.len(), 4);
        assert_eq!(truth.noisy_qs.len(), 4);
        let members: Vec<u64> = key.subspace().enumerate().iter().map(|v| v.to_index()).collect();
        for &i in &truth.noisy_ps {
            let zeros =
                members.iter().filter(|&&x| inst.ps[i].evaluate_index(x) == 0).count();
            let frac = zeros as f64 / members.len() as f64;
            assert!((0.25..=0.75).contains(&frac), "decoy fraction {frac}");
        }
        let genuine: Vec<Poly3F2> = (0..16)
            .filter(|i| !truth.noisy_ps.contains(i))
            .map(|i| inst.ps[i].clone())
            .collect();
        for p in &genuine {
            for v in key.subspace().enumerate() {
                assert_eq!(p.evaluate(&v).unwrap(), 0);
            }
        }
        let zeros = common_zero_set(6, &genuine).unwrap();
        assert_eq!(zeros.len(), 8);
    }

    #[test]
    fn generation_rejects_undersized_or_oversalted_requests() {
        let mut rng = Stream::from_seed(317);
        let key = hs_keygen(6, &mut rng).unwrap();
        assert!(matches!(
            polys_generate(&key, 5, 0.0, &mut rng),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            polys_generate(&key, 12, 0.75, &mut rng),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn file_round_trip_and_header_validation() {
        let mut rng = Stream::from_seed(331);
        let polys: Vec<Poly3F2> =
            (0..5).map(|_| Poly3F2::random(6, &mut rng).unwrap()).collect();
        let text = polys_to_text(6, &polys);
        let (n, back) = polys_from_text(&text).unwrap();
        assert_eq!(n, 6);
        assert_eq!(back, polys);
        assert!(polys_from_text("").is_err());
        assert!(polys_from_text("poly 6\nx0").is_err());
        assert!(polys_from_text("polys\nx0").is_err());
        assert!(polys_from_text("polys 99\nx0").is_err());
    }
}
