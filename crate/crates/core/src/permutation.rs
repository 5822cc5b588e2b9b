//! Segment cycles: orbits of the group generated by two pairings.
//!
//! Closing a linkoid state by a pairing `sigma` joins the state's strand
//! pairing `tau` into closed loops; the loops are the orbits of
//! `<tau, sigma>` on the endpoint labels. That group is dihedral of order
//! `2r` with `r` the order of `sigma . tau`, and Burnside's lemma gives the
//! count from the cycle type of `sigma . tau` alone: the reflections are
//! fixed-point free, and the rotation `(sigma tau)^p` fixes every label on
//! a cycle whose length divides `p`.

use num_integer::Integer;
use thiserror::Error;

use crate::pairing::{Label, Pairing};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PermutationError {
    #[error("pairings act on different label sets")]
    DomainMismatch,
}

fn check_domains(tau: &Pairing, sigma: &Pairing) -> Result<Vec<Label>, PermutationError> {
    let labels = tau.labels();
    if sigma.labels() != labels {
        return Err(PermutationError::DomainMismatch);
    }
    Ok(labels)
}

/// Cycle lengths of `sigma . tau` (apply `tau` first), in order of each
/// cycle's smallest label.
pub fn compose_to_cycles(tau: &Pairing, sigma: &Pairing) -> Result<Vec<usize>, PermutationError> {
    let labels = check_domains(tau, sigma)?;
    let index = |l: Label| labels.binary_search(&l).expect("label in domain");
    let mut t = vec![0usize; labels.len()];
    let mut s = vec![0usize; labels.len()];
    for &(a, b) in tau.pairs() {
        t[index(a)] = index(b);
        t[index(b)] = index(a);
    }
    for &(a, b) in sigma.pairs() {
        s[index(a)] = index(b);
        s[index(b)] = index(a);
    }
    let mut seen = vec![false; labels.len()];
    let mut out = Vec::new();
    for start in 0..labels.len() {
        let mut len = 0;
        let mut cur = start;
        while !seen[cur] {
            seen[cur] = true;
            len += 1;
            cur = s[t[cur]];
        }
        if len > 0 {
            out.push(len);
        }
    }
    Ok(out)
}

/// Number of orbits of `<tau, sigma>`, by the cycle-type formula.
pub fn segment_cycles_formula(tau: &Pairing, sigma: &Pairing) -> Result<usize, PermutationError> {
    let cycles = compose_to_cycles(tau, sigma)?;
    let n = tau.len();
    let r = cycles.iter().fold(1usize, |acc, &l| acc.lcm(&l));
    if r == 1 {
        return Ok(n);
    }
    let mut fixed = 2 * n;
    for p in 1..r {
        fixed += cycles.iter().filter(|&&l| p % l == 0).sum::<usize>();
    }
    debug_assert_eq!(fixed % (2 * r), 0);
    Ok(fixed / (2 * r))
}

/// Number of orbits of `<tau, sigma>`, by union-find. Used as an oracle.
pub fn segment_cycles_oracle(tau: &Pairing, sigma: &Pairing) -> Result<usize, PermutationError> {
    let labels = check_domains(tau, sigma)?;
    let index = |l: Label| labels.binary_search(&l).expect("label in domain");
    let mut parent: Vec<usize> = (0..labels.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut components = labels.len();
    for &(a, b) in tau.pairs().iter().chain(sigma.pairs()) {
        let (ra, rb) = (find(&mut parent, index(a)), find(&mut parent, index(b)));
        if ra != rb {
            parent[ra] = rb;
            components -= 1;
        }
    }
    Ok(components)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(pairs: &[(Label, Label)]) -> Pairing {
        Pairing::new(pairs.iter().copied()).unwrap()
    }

    #[test]
    fn small_cases() {
        let tau = p(&[(1, 2), (3, 4)]);
        assert_eq!(segment_cycles_formula(&tau, &tau).unwrap(), 2);
        let sigma = p(&[(2, 3), (4, 1)]);
        assert_eq!(segment_cycles_formula(&tau, &sigma).unwrap(), 1);
        assert_eq!(compose_to_cycles(&tau, &sigma).unwrap(), vec![2, 2]);
        assert_eq!(segment_cycles_formula(&Pairing::empty(), &Pairing::empty()).unwrap(), 0);
    }

    #[test]
    fn domain_mismatch() {
        let tau = p(&[(1, 2)]);
        let sigma = p(&[(1, 3)]);
        assert_eq!(
            segment_cycles_formula(&tau, &sigma),
            Err(PermutationError::DomainMismatch)
        );
        assert_eq!(
            segment_cycles_oracle(&tau, &sigma),
            Err(PermutationError::DomainMismatch)
        );
    }

    #[test]
    fn exhaustive_up_to_eight_labels() {
        for n in [0u32, 2, 4, 6, 8] {
            let labels: Vec<Label> = (1..=n).collect();
            let all = Pairing::all_on(&labels);
            for tau in &all {
                for sigma in &all {
                    assert_eq!(
                        segment_cycles_formula(tau, sigma).unwrap(),
                        segment_cycles_oracle(tau, sigma).unwrap(),
                        "tau={tau} sigma={sigma}"
                    );
                }
            }
        }
    }

    #[test]
    fn random_large() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for i in 0..10_000 {
            let n = 10 + 2 * (i % 4) as u32;
            let labels: Vec<Label> = (1..=n).map(|k| 3 * k + 1).collect();
            let tau = Pairing::random(&labels, &mut rng).unwrap();
            let sigma = Pairing::random(&labels, &mut rng).unwrap();
            assert_eq!(
                segment_cycles_formula(&tau, &sigma).unwrap(),
                segment_cycles_oracle(&tau, &sigma).unwrap()
            );
        }
    }
}
