//! Dense density-matrix oracle for the GHZ generation pipeline.
//!
//! Shares no state-update code with the diagonal simulator: links are
//! explicit 4×4 Werner matrices and every swap, fusion and removal is the
//! literal gate sequence (CNOT, Hadamard, projective measurement, Pauli
//! correction) summed over measurement outcomes. Everything stays real.

use crate::error::{invalid, Error, Result};
use crate::routing::RoutingSolution;
use crate::topology::{EdgeId, NodeId, UserSet};

/// Largest total qubit count (two per link) the oracle accepts.
pub const MAX_QUBITS: usize = 16;

/// Real density matrix over `n` qubits; qubit `k` is bit `k` of the basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DensityMatrix {
    fn dim(&self) -> usize {
        1 << self.n
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.dim() + c]
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.at(i, i)).sum()
    }

    /// `w |φ+⟩⟨φ+| + (1-w)/4 I` on two qubits.
    pub fn werner(w: f64) -> Self {
        let mut data = vec![0.0; 16];
        for i in 0..4 {
            data[i * 4 + i] = (1.0 - w) / 4.0;
        }
        for &r in &[0usize, 3] {
            for &c in &[0usize, 3] {
                data[r * 4 + c] += w / 2.0;
            }
        }
        Self { n: 2, data }
    }

    /// Depolarizing channel `p ρ + (1-p) I/d`.
    pub fn depolarize(&self, p_unaffected: f64) -> Self {
        let d = self.dim();
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= p_unaffected;
        }
        for i in 0..d {
            out.data[i * d + i] += (1.0 - p_unaffected) / d as f64;
        }
        out
    }

    /// `self ⊗ other`: `self`'s qubits first.
    pub fn kron(&self, other: &Self) -> Self {
        let n = self.n + other.n;
        let d = 1usize << n;
        let (da, db) = (self.dim(), other.dim());
        let mut data = vec![0.0; d * d];
        for ra in 0..da {
            for ca in 0..da {
                let x = self.at(ra, ca);
                if x == 0.0 {
                    continue;
                }
                for rb in 0..db {
                    for cb in 0..db {
                        data[(ra | rb << self.n) * d + (ca | cb << self.n)] = x * other.at(rb, cb);
                    }
                }
            }
        }
        Self { n, data }
    }

    /// Conjugates by a basis permutation `P|i⟩ = |perm(i)⟩` (X and CNOT).
    fn permute(&self, perm: impl Fn(usize) -> usize) -> Self {
        let d = self.dim();
        let mut data = vec![0.0; d * d];
        for r in 0..d {
            for c in 0..d {
                data[perm(r) * d + perm(c)] = self.at(r, c);
            }
        }
        Self { n: self.n, data }
    }

    pub fn x(&self, q: usize) -> Self {
        self.permute(|i| i ^ (1 << q))
    }

    pub fn cnot(&self, control: usize, target: usize) -> Self {
        self.permute(|i| if i >> control & 1 == 1 { i ^ (1 << target) } else { i })
    }

    pub fn z(&self, q: usize) -> Self {
        let d = self.dim();
        let mut out = self.clone();
        for r in 0..d {
            for c in 0..d {
                if ((r >> q) ^ (c >> q)) & 1 == 1 {
                    out.data[r * d + c] = -out.data[r * d + c];
                }
            }
        }
        out
    }

    pub fn h(&self, q: usize) -> Self {
        let d = self.dim();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bit = 1 << q;
        let amp = |from: usize, to: usize| -> f64 {
            // ⟨to|H|from⟩ restricted to qubit q; other bits must match.
            if (from & bit != 0) && (to & bit != 0) {
                -s
            } else {
                s
            }
        };
        // Left multiply.
        let mut tmp = vec![0.0; d * d];
        for r in 0..d {
            let r0 = r & !bit;
            for c in 0..d {
                tmp[r * d + c] = amp(r0, r) * self.at(r0, c) + amp(r0 | bit, r) * self.at(r0 | bit, c);
            }
        }
        // Right multiply by Hᵀ = H.
        let mut data = vec![0.0; d * d];
        for r in 0..d {
            for c in 0..d {
                let c0 = c & !bit;
                data[r * d + c] = tmp[r * d + c0] * amp(c0, c) + tmp[r * d + (c0 | bit)] * amp(c0 | bit, c);
            }
        }
        Self { n: self.n, data }
    }

    /// Unnormalized post-measurement state for outcome `m` of a Z measurement
    /// on `q`, with `q` traced out.
    pub fn project(&self, q: usize, m: usize) -> Self {
        let n = self.n - 1;
        let d = 1usize << n;
        let expand = |i: usize| {
            let low = i & ((1 << q) - 1);
            let high = i >> q;
            low | (m << q) | (high << (q + 1))
        };
        let mut data = vec![0.0; d * d];
        for r in 0..d {
            for c in 0..d {
                data[r * d + c] = self.at(expand(r), expand(c));
            }
        }
        Self { n, data }
    }

    fn add_assign(&mut self, other: &Self) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    fn zero(n: usize) -> Self {
        Self { n, data: vec![0.0; 1 << (2 * n)] }
    }

    /// `⟨GHZ_n|ρ|GHZ_n⟩`.
    pub fn ghz_fidelity(&self) -> f64 {
        let last = self.dim() - 1;
        0.5 * (self.at(0, 0) + self.at(0, last) + self.at(last, 0) + self.at(last, last))
    }
}

struct Fragment {
    rho: DensityMatrix,
    holders: Vec<NodeId>,
}

/// Bell measurement on qubits `a`, `b` with the Pauli correction applied to
/// `partner`. Returns the state with `a` and `b` traced out.
fn bell_measure(rho: &DensityMatrix, a: usize, b: usize, partner: usize) -> DensityMatrix {
    let rotated = rho.cnot(a, b).h(a);
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    let partner_after = partner - (partner > hi) as usize - (partner > lo) as usize;
    let mut acc = DensityMatrix::zero(rho.n - 2);
    for ma in 0..2 {
        for mb in 0..2 {
            let (m_hi, m_lo) = if a > b { (ma, mb) } else { (mb, ma) };
            let mut post = rotated.project(hi, m_hi).project(lo, m_lo);
            if mb == 1 {
                post = post.x(partner_after);
            }
            if ma == 1 {
                post = post.z(partner_after);
            }
            acc.add_assign(&post);
        }
    }
    acc
}

fn swap_along(links: &[f64]) -> DensityMatrix {
    let mut rho = DensityMatrix::werner(links[0]);
    for &w in &links[1..] {
        // Qubits: 0 = start, 1 = shared node (old), 2 = shared node (new), 3 = far end.
        let joint = rho.kron(&DensityMatrix::werner(w));
        rho = bell_measure(&joint, 1, 2, 3);
    }
    rho
}

fn fuse(a: &Fragment, b: &Fragment, node: NodeId) -> Fragment {
    let na = a.holders.len();
    let qa = a.holders.iter().position(|&h| h == node).unwrap();
    let qb = b.holders.iter().position(|&h| h == node).unwrap();
    let joint = a.rho.kron(&b.rho).cnot(qa, na + qb);
    let target = na + qb;
    let mut acc = DensityMatrix::zero(joint.n - 1);
    for m in 0..2 {
        let mut post = joint.project(target, m);
        if m == 1 {
            for k in 0..b.holders.len() {
                if k != qb {
                    let idx = na + k - (k > qb) as usize;
                    post = post.x(idx);
                }
            }
        }
        acc.add_assign(&post);
    }
    let mut holders = a.holders.clone();
    holders.extend(b.holders.iter().enumerate().filter(|&(k, _)| k != qb).map(|(_, &h)| h));
    Fragment { rho: acc, holders }
}

fn remove(frag: &mut Fragment, q: usize) {
    let rotated = frag.rho.h(q);
    let mut acc = DensityMatrix::zero(frag.rho.n - 1);
    for m in 0..2 {
        let mut post = rotated.project(q, m);
        if m == 1 {
            post = post.z(0);
        }
        acc.add_assign(&post);
    }
    frag.rho = acc;
    frag.holders.remove(q);
}

/// Dense-matrix GHZ fidelity for branches given as `(end_a, end_b, link
/// Werner parameters)`, following the same swap → fuse → remove schedule.
pub fn dense_fidelity_from_branches(branches: &[(NodeId, NodeId, Vec<f64>)], users: &[NodeId]) -> Result<f64> {
    let total: usize = branches.iter().map(|b| 2 * b.2.len()).sum();
    if total > MAX_QUBITS {
        return Err(Error::UnsupportedSize(format!(
            "{total} qubits exceeds the dense oracle limit of {MAX_QUBITS}"
        )));
    }
    if branches.iter().any(|b| b.2.is_empty()) {
        return invalid("branch without links");
    }
    let mut frags: Vec<Fragment> = branches
        .iter()
        .map(|(a, b, ws)| Fragment { rho: swap_along(ws), holders: vec![*a, *b] })
        .collect();
    let mut nodes: Vec<NodeId> = frags.iter().flat_map(|f| f.holders.clone()).collect();
    nodes.sort_unstable();
    nodes.dedup();
    for node in nodes {
        while let Some(i) = frags.iter().position(|f| f.holders.contains(&node)) {
            let Some(j) = frags.iter().skip(i + 1).position(|f| f.holders.contains(&node)) else { break };
            let b = frags.remove(i + 1 + j);
            frags[i] = fuse(&frags[i], &b, node);
        }
    }
    if frags.len() != 1 {
        return invalid("route is not connected");
    }
    let mut frag = frags.pop().unwrap();
    if users.iter().any(|u| frag.holders.iter().filter(|&h| h == u).count() != 1) {
        return invalid("every user must hold exactly one qubit");
    }
    while let Some(q) = frag.holders.iter().position(|h| !users.contains(h)) {
        remove(&mut frag, q);
    }
    Ok(frag.rho.ghz_fidelity() / frag.rho.trace())
}

/// Dense-matrix counterpart of [`super::tree_ghz_fidelity`].
pub fn dense_oracle_fidelity(
    solution: &RoutingSolution,
    werner_of: impl Fn(EdgeId) -> f64,
    users: &UserSet,
) -> Result<f64> {
    solution.check_spans(users)?;
    let branches: Vec<_> = solution
        .branches
        .iter()
        .map(|b| (b.nodes[0], *b.nodes.last().unwrap(), b.edges.iter().map(|&e| werner_of(e)).collect()))
        .collect();
    dense_fidelity_from_branches(&branches, users.as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn werner_matrix_is_normalized() {
        let r = DensityMatrix::werner(0.7);
        assert!((r.trace() - 1.0).abs() < 1e-15);
        assert!((r.ghz_fidelity() - (3.0 * 0.7 + 1.0) / 4.0).abs() < 1e-15);
    }

    #[test]
    fn depolarizing_channel_preserves_trace() {
        let r = DensityMatrix::werner(0.9).kron(&DensityMatrix::werner(0.4)).depolarize(0.8);
        assert!((r.trace() - 1.0).abs() < 1e-12);
        // Depolarizing a Bell pair is the Werner family.
        let d = DensityMatrix::werner(1.0).depolarize(0.6);
        assert!(d.data.iter().zip(&DensityMatrix::werner(0.6).data).all(|(a, b)| (a - b).abs() < 1e-15));
    }

    #[test]
    fn hadamard_is_involution() {
        let r = DensityMatrix::werner(0.3).kron(&DensityMatrix::werner(0.8));
        let back = r.h(2).h(2);
        assert!(r.data.iter().zip(&back.data).all(|(a, b)| (a - b).abs() < 1e-14));
    }

    #[test]
    fn swap_of_werner_pairs() {
        let f = swap_along(&[0.9, 0.8]).ghz_fidelity();
        assert!((f - 0.79).abs() < 1e-14);
        let perfect = swap_along(&[1.0, 1.0, 1.0]);
        assert!((perfect.ghz_fidelity() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn fused_mixed_pairs() {
        let f = dense_fidelity_from_branches(&[(0, 1, vec![0.0]), (0, 2, vec![0.0])], &[1, 2, 0]).unwrap();
        assert!((f - 0.125).abs() < 1e-14);
    }

    #[test]
    fn maximally_mixed_four_users() {
        let branches: Vec<_> = (1..5).map(|u| (0, u, vec![0.0])).collect();
        let f = dense_fidelity_from_branches(&branches, &[1, 2, 3, 4]).unwrap();
        assert!((f - 1.0 / 16.0).abs() < 1e-14);
        let perfect: Vec<_> = (1..5).map(|u| (0, u, vec![1.0])).collect();
        assert!((dense_fidelity_from_branches(&perfect, &[1, 2, 3, 4]).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn size_guard() {
        let branches: Vec<_> = (1..4).map(|u| (0, u, vec![0.9; 3])).collect();
        assert!(matches!(
            dense_fidelity_from_branches(&branches, &[1, 2, 3]),
            Err(Error::UnsupportedSize(_))
        ));
    }
}
