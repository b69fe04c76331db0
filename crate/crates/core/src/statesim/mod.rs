//! Exact simulation of swap, fusion and qubit removal on states diagonal in
//! the Bell/GHZ basis.
//!
//! An n-qubit GHZ-basis element is `P |GHZ_n⟩` for a Pauli frame `P`. We
//! index the `2^n` elements by `x | s` where `s` (bit 0) is the phase flip and
//! bit `i` of `x` (`i ≥ 1`) says whether qubit `i` is bit-flipped relative to
//! qubit 0. Index 0 is the target state. Every operation here is a Clifford
//! circuit with ideal measurement and correction, so it maps basis elements to
//! basis elements and acts on the weight vector as a permutation/convolution.

pub mod dense;
mod pipeline;

pub use pipeline::{ghz_fidelity_from_branches, tree_ghz_fidelity, BranchLinks};

use crate::error::{invalid, Error, Result};
use crate::noise::{Fidelity, WernerParam};
use crate::scalar::Scalar;

/// Weights below zero but above this are rounding drift and clamp to zero.
const CLAMP: f64 = -1e-14;

/// Two-qubit state diagonal in the Bell basis.
///
/// Weight order: `φ+`, `φ-`, `ψ+`, `ψ-` (phase flip in bit 0, bit flip in bit 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellDiagonalState<T> {
    weights: [T; 4],
}

impl<T: Scalar> BellDiagonalState<T> {
    pub fn new(weights: [T; 4]) -> Result<Self> {
        validate(&weights)?;
        Ok(Self { weights })
    }

    pub fn perfect() -> Self {
        Self { weights: [T::one(), T::zero(), T::zero(), T::zero()] }
    }

    pub fn maximally_mixed() -> Self {
        Self { weights: [T::lit(0.25); 4] }
    }

    pub fn weights(&self) -> &[T; 4] {
        &self.weights
    }

    pub fn fidelity(&self) -> Fidelity<T> {
        Fidelity::new(self.weights[0].min(T::one())).expect("normalized weight")
    }
}

/// Werner state as a Bell-diagonal mixture.
pub fn werner_state<T: Scalar>(w: WernerParam<T>) -> BellDiagonalState<T> {
    let off = (T::one() - w.value()) / T::lit(4.0);
    BellDiagonalState { weights: [w.value() + off, off, off, off] }
}

/// Entanglement swap of `a = (A, B1)` and `b = (B2, C)` by a Bell measurement
/// on `B1, B2`. Pauli frames compose, so weights convolve over XOR.
pub fn swap<T: Scalar>(a: &BellDiagonalState<T>, b: &BellDiagonalState<T>) -> BellDiagonalState<T> {
    let mut out = [T::zero(); 4];
    for (i, &wa) in a.weights.iter().enumerate() {
        for (j, &wb) in b.weights.iter().enumerate() {
            out[i ^ j] = out[i ^ j] + wa * wb;
        }
    }
    clamp(&mut out);
    BellDiagonalState { weights: out }
}

/// n-qubit state diagonal in the GHZ basis.
#[derive(Debug, Clone, PartialEq)]
pub struct GhzDiagonalState<T> {
    n_qubits: usize,
    weights: Vec<T>,
}

impl<T: Scalar> GhzDiagonalState<T> {
    pub fn new(n_qubits: usize, weights: Vec<T>) -> Result<Self> {
        if n_qubits < 2 {
            return invalid(format!("GHZ state needs at least 2 qubits, got {n_qubits}"));
        }
        if n_qubits > 30 || weights.len() != 1 << n_qubits {
            return invalid(format!("expected 2^{n_qubits} weights, got {}", weights.len()));
        }
        validate(&weights)?;
        Ok(Self { n_qubits, weights })
    }

    pub fn perfect(n_qubits: usize) -> Self {
        let mut weights = vec![T::zero(); 1 << n_qubits];
        weights[0] = T::one();
        Self { n_qubits, weights }
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let d = 1usize << n_qubits;
        Self { n_qubits, weights: vec![T::one() / T::from_usize(d).unwrap(); d] }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// `⟨GHZ_n|ρ|GHZ_n⟩`, the weight of the target element.
    pub fn fidelity(&self) -> Fidelity<T> {
        fidelity(self)
    }
}

impl<T: Scalar> From<BellDiagonalState<T>> for GhzDiagonalState<T> {
    fn from(b: BellDiagonalState<T>) -> Self {
        Self { n_qubits: 2, weights: b.weights.to_vec() }
    }
}

impl<T: Scalar> TryFrom<GhzDiagonalState<T>> for BellDiagonalState<T> {
    type Error = Error;

    fn try_from(g: GhzDiagonalState<T>) -> Result<Self> {
        if g.n_qubits != 2 {
            return invalid(format!("{}-qubit state is not a Bell state", g.n_qubits));
        }
        Ok(Self { weights: [g.weights[0], g.weights[1], g.weights[2], g.weights[3]] })
    }
}

pub fn fidelity<T: Scalar>(g: &GhzDiagonalState<T>) -> Fidelity<T> {
    Fidelity::new(g.weights[0].min(T::one())).expect("normalized weight")
}

/// Fuses qubit `qa` of `a` with qubit `qb` of `b` (both held at one node):
/// CNOT from `qa` onto `qb`, Z-measure `qb`, and on outcome 1 flip the rest
/// of `b`'s qubits. Output qubits are `a`'s followed by `b`'s without `qb`.
pub fn fuse<T: Scalar>(
    a: &GhzDiagonalState<T>,
    qa: usize,
    b: &GhzDiagonalState<T>,
    qb: usize,
) -> Result<GhzDiagonalState<T>> {
    if qa >= a.n_qubits || qb >= b.n_qubits {
        return invalid(format!(
            "fusion qubits ({qa}, {qb}) out of range for ({}, {}) qubits",
            a.n_qubits, b.n_qubits
        ));
    }
    let n1 = a.n_qubits;
    let n2 = b.n_qubits;
    let n = n1 + n2 - 1;
    if n > 30 {
        return invalid(format!("fused state would have {n} qubits"));
    }
    let rest_mask = (1usize << (n2 - 1)) - 1;
    let mut out = vec![T::zero(); 1 << n];
    for (ia, &wa) in a.weights.iter().enumerate() {
        if wa == T::zero() {
            continue;
        }
        let xa = ia & !1;
        for (ib, &wb) in b.weights.iter().enumerate() {
            let xb = ib & !1;
            let phase = (ia ^ ib) & 1;
            let flip = ((xa >> qa) ^ (xb >> qb)) & 1;
            let mut rest = remove_bit(xb, qb);
            if flip == 1 {
                rest ^= rest_mask;
            }
            out[xa | (rest << n1) | phase] = out[xa | (rest << n1) | phase] + wa * wb;
        }
    }
    clamp(&mut out);
    Ok(GhzDiagonalState { n_qubits: n, weights: out })
}

/// Removes `qubit` by an X-basis measurement with phase correction on a
/// remaining qubit.
///
/// A frame that bit-flips only the removed qubit becomes the identity, so the
/// output fidelity is never below the input's and equals it exactly when that
/// frame carries no weight.
pub fn remove_qubit<T: Scalar>(g: &GhzDiagonalState<T>, qubit: usize) -> Result<GhzDiagonalState<T>> {
    if g.n_qubits < 3 {
        return invalid(format!("cannot remove a qubit from a {}-qubit state", g.n_qubits));
    }
    if qubit >= g.n_qubits {
        return invalid(format!("qubit {qubit} out of range for {} qubits", g.n_qubits));
    }
    let n = g.n_qubits - 1;
    let all = (1usize << n) - 1;
    let mut out = vec![T::zero(); 1 << n];
    for (i, &w) in g.weights.iter().enumerate() {
        let mut x = remove_bit(i & !1, qubit);
        if x & 1 == 1 {
            x ^= all;
        }
        out[x | (i & 1)] = out[x | (i & 1)] + w;
    }
    clamp(&mut out);
    Ok(GhzDiagonalState { n_qubits: n, weights: out })
}

fn remove_bit(x: usize, bit: usize) -> usize {
    let low = x & ((1 << bit) - 1);
    let high = x >> (bit + 1);
    low | (high << bit)
}

fn validate<T: Scalar>(weights: &[T]) -> Result<()> {
    let mut sum = T::zero();
    for &w in weights {
        if w.is_nan() || w < T::zero() {
            return invalid(format!("negative or NaN weight {w}"));
        }
        sum = sum + w;
    }
    if (sum - T::one()).abs() > T::norm_tol() {
        return invalid(format!("weights sum to {sum}, not 1"));
    }
    Ok(())
}

fn clamp<T: Scalar>(weights: &mut [T]) {
    let floor = T::lit(CLAMP);
    for w in weights {
        if *w < T::zero() && *w >= floor {
            *w = T::zero();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(x: f64) -> WernerParam<f64> {
        WernerParam::new(x).unwrap()
    }

    fn sum(ws: &[f64]) -> f64 {
        ws.iter().sum()
    }

    #[test]
    fn werner_embedding() {
        assert_eq!(werner_state(w(1.0)).weights(), &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(werner_state(w(0.0)).weights(), &[0.25; 4]);
        let s = werner_state(w(0.987));
        for (got, want) in s.weights().iter().zip([0.99025, 0.00325, 0.00325, 0.00325]) {
            assert!((got - want).abs() < 1e-6);
        }
    }

    #[test]
    fn swap_examples() {
        let x = werner_state(w(0.63));
        assert_eq!(swap(&BellDiagonalState::perfect(), &x), x);
        let f = swap(&werner_state(w(0.9)), &werner_state(w(0.8))).fidelity().value();
        assert!((f - 0.79).abs() < 1e-15);
        let mixed = swap(&BellDiagonalState::maximally_mixed(), &x);
        for v in mixed.weights() {
            assert!((v - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn fuse_examples() {
        let bell = GhzDiagonalState::from(BellDiagonalState::<f64>::perfect());
        let ghz3 = fuse(&bell, 0, &bell, 0).unwrap();
        assert_eq!(ghz3.n_qubits(), 3);
        assert_eq!(ghz3.fidelity().value(), 1.0);

        let mixed = GhzDiagonalState::from(BellDiagonalState::<f64>::maximally_mixed());
        let out = fuse(&mixed, 0, &mixed, 0).unwrap();
        assert!((out.fidelity().value() - 0.125).abs() < 1e-15);
        assert!((sum(out.weights()) - 1.0).abs() < 1e-12);

        assert!(fuse(&bell, 2, &bell, 0).is_err());
    }

    #[test]
    fn remove_examples() {
        let p4 = GhzDiagonalState::<f64>::perfect(4);
        let p3 = remove_qubit(&p4, 2).unwrap();
        assert_eq!(p3, GhzDiagonalState::perfect(3));

        let m4 = GhzDiagonalState::<f64>::maximally_mixed(4);
        assert!((m4.fidelity().value() - 1.0 / 16.0).abs() < 1e-15);
        let m3 = remove_qubit(&m4, 1).unwrap();
        assert!((m3.fidelity().value() - 0.125).abs() < 1e-15);

        assert!(remove_qubit(&GhzDiagonalState::<f64>::perfect(2), 0).is_err());
    }

    #[test]
    fn single_flip_on_removed_qubit_is_erased() {
        // X on qubit 2 of GHZ_3: |001> + |110> -> measuring qubit 2 in X leaves GHZ_2.
        let mut weights = vec![0.0; 8];
        weights[0b100] = 1.0;
        let g = GhzDiagonalState::new(3, weights).unwrap();
        assert_eq!(g.fidelity().value(), 0.0);
        assert_eq!(remove_qubit(&g, 2).unwrap().fidelity().value(), 1.0);
    }

    #[test]
    fn bell_ghz_identification() {
        let b = werner_state(w(0.987));
        let g = GhzDiagonalState::from(b);
        assert!((g.fidelity().value() - 0.99025).abs() < 1e-15);
        assert_eq!(BellDiagonalState::try_from(g).unwrap(), b);
        assert!(BellDiagonalState::try_from(GhzDiagonalState::<f64>::perfect(3)).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let a = werner_state(WernerParam::new(0.9f32).unwrap());
        let g = GhzDiagonalState::from(a);
        let f = fuse(&g, 0, &g, 1).unwrap();
        assert!((f.weights().iter().sum::<f32>() - 1.0).abs() < 1e-5);
    }

    fn arb_state(n: usize) -> impl Strategy<Value = GhzDiagonalState<f64>> {
        prop::collection::vec(0.0..1.0f64, 1 << n).prop_filter_map("nonzero", move |raw| {
            let total: f64 = raw.iter().sum();
            (total > 1e-6).then(|| {
                GhzDiagonalState::new(n, raw.iter().map(|x| x / total).collect()).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn operations_preserve_normalization(a in arb_state(3), b in arb_state(2), qa in 0usize..3, qb in 0usize..2, q in 0usize..4) {
            let f = fuse(&a, qa, &b, qb).unwrap();
            prop_assert!((sum(f.weights()) - 1.0).abs() < 1e-12);
            prop_assert!(f.weights().iter().all(|&x| x >= 0.0));
            let r = remove_qubit(&f, q).unwrap();
            prop_assert!((sum(r.weights()) - 1.0).abs() < 1e-12);
            prop_assert!(r.fidelity().value() >= f.fidelity().value() - 1e-15);
        }

        #[test]
        fn swap_product_law(w1 in 0.0..=1.0f64, w2 in 0.0..=1.0f64, w3 in 0.0..=1.0f64) {
            let (a, b, c) = (werner_state(w(w1)), werner_state(w(w2)), werner_state(w(w3)));
            let left = swap(&swap(&a, &b), &c).fidelity().value();
            let right = swap(&a, &swap(&c, &b)).fidelity().value();
            prop_assert!((left - right).abs() < 1e-14);
            prop_assert!((left - (3.0 * w1 * w2 * w3 + 1.0) / 4.0).abs() < 1e-14);
        }
    }
}
