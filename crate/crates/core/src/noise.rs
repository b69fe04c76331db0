//! Closed-form Werner-parameter algebra.
//!
//! All link states are Werner states `w |φ+⟩⟨φ+| + (1-w)/4 I` with
//! `w ∈ [0, 1]`. Swapping multiplies Werner parameters, storage multiplies by
//! `Δ` per timeslot, and a fused star of Bell pairs has a closed-form GHZ
//! fidelity.

use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Products longer than this are accumulated in log space.
const LOG_PRODUCT_THRESHOLD: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct WernerParam<T>(T);

impl<T: Scalar> WernerParam<T> {
    pub fn new(w: T) -> Result<Self> {
        if w >= T::zero() && w <= T::one() {
            Ok(Self(w))
        } else {
            invalid(format!("Werner parameter {w} outside [0,1]"))
        }
    }

    pub fn one() -> Self {
        Self(T::one())
    }

    pub fn value(self) -> T {
        self.0
    }

    pub fn fidelity(self) -> Fidelity<T> {
        werner_to_fidelity(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Fidelity<T>(T);

impl<T: Scalar> Fidelity<T> {
    pub fn new(f: T) -> Result<Self> {
        if f >= T::zero() && f <= T::one() {
            Ok(Self(f))
        } else {
            invalid(format!("fidelity {f} outside [0,1]"))
        }
    }

    pub fn value(self) -> T {
        self.0
    }

    /// Werner parameter of the Werner state with this fidelity.
    pub fn to_werner(self) -> Result<WernerParam<T>> {
        WernerParam::new((T::lit(4.0) * self.0 - T::one()) / T::lit(3.0))
    }
}

/// Per-timeslot memory decoherence `w_τ = w_0 Δ^τ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoherenceModel<T> {
    delta: T,
}

impl<T: Scalar> DecoherenceModel<T> {
    pub fn new(delta: T) -> Result<Self> {
        if delta > T::zero() && delta <= T::one() {
            Ok(Self { delta })
        } else {
            invalid(format!("decoherence constant {delta} outside (0,1]"))
        }
    }

    pub fn delta(&self) -> T {
        self.delta
    }
}

pub fn werner_to_fidelity<T: Scalar>(w: WernerParam<T>) -> Fidelity<T> {
    Fidelity((T::lit(3.0) * w.0 + T::one()) / T::lit(4.0))
}

pub fn decohere<T: Scalar>(w0: WernerParam<T>, model: &DecoherenceModel<T>, tau: u32) -> WernerParam<T> {
    WernerParam(w0.0 * powu(model.delta, tau))
}

/// Werner parameter after swapping along a chain of links.
pub fn swap_chain<T: Scalar>(ws: &[WernerParam<T>]) -> Result<WernerParam<T>> {
    if ws.is_empty() {
        return invalid("swap chain needs at least one link");
    }
    Ok(WernerParam(product(ws.iter().map(|w| w.0), ws.len())))
}

/// GHZ fidelity of a star of Bell pairs fused at a centre, one pair per branch.
pub fn star_ghz_fidelity<T: Scalar>(branch_fidelities: &[Fidelity<T>]) -> Result<Fidelity<T>> {
    if branch_fidelities.len() < 3 {
        return invalid(format!(
            "star formula needs at least 3 branches, got {}",
            branch_fidelities.len()
        ));
    }
    let three = T::lit(3.0);
    let mut ideal = T::one();
    let mut flipped = T::one();
    let mut unflipped = T::one();
    for f in branch_fidelities {
        let f = f.0;
        ideal = ideal * (T::lit(4.0) * f - T::one()) / three;
        flipped = flipped * T::lit(2.0) * (T::one() - f) / three;
        unflipped = unflipped * (T::one() + T::lit(2.0) * f) / three;
    }
    Ok(Fidelity(T::lit(0.5) * (ideal + flipped + unflipped)))
}

/// `w_R`: product of the Werner parameters of every edge in a route.
pub fn route_werner_product<T: Scalar>(edge_ws: &[WernerParam<T>]) -> Result<WernerParam<T>> {
    if edge_ws.is_empty() {
        return invalid("route has no edges");
    }
    Ok(WernerParam(product(edge_ws.iter().map(|w| w.0), edge_ws.len())))
}

/// `p_R`: probability that every edge of a route generates in one attempt.
pub fn route_success_product<T: Scalar>(edge_ps: &[T]) -> Result<T> {
    if edge_ps.is_empty() {
        return invalid("route has no edges");
    }
    if let Some(p) = edge_ps.iter().find(|&&p| !(p >= T::zero() && p <= T::one())) {
        return invalid(format!("probability {p} outside [0,1]"));
    }
    Ok(product(edge_ps.iter().copied(), edge_ps.len()))
}

/// Smallest `k` with `1 - (1-p)^k >= p_c`.
pub fn percolation_min_rounds(p: f64, p_c: f64) -> Result<u32> {
    if !(p > 0.0 && p < 1.0) {
        return invalid(format!("generation probability {p} must lie in (0,1)"));
    }
    if !(p_c > 0.0 && p_c < 1.0) {
        return invalid(format!("percolation threshold {p_c} must lie in (0,1)"));
    }
    let reached = |k: u32| 1.0 - (1.0 - p).powi(k as i32) >= p_c;
    let estimate = ((1.0 - p_c).ln() / (1.0 - p).ln()).ceil().max(1.0) as u32;
    let mut k = estimate;
    while k > 1 && reached(k - 1) {
        k -= 1;
    }
    while !reached(k) {
        k += 1;
    }
    Ok(k)
}

/// `w_0^{|R|} Δ^{τ̄ |R|}`, the Werner-product floor on the GHZ fidelity of a
/// route of `r_size` links with mean age `mean_age`.
pub fn ghz_fidelity_floor<T: Scalar>(r_size: usize, mean_age: T, w0: WernerParam<T>, delta: T) -> Result<T> {
    if r_size == 0 {
        return invalid("route size must be positive");
    }
    let n = T::from_usize(r_size).unwrap();
    Ok(w0.0.powf(n) * delta.powf(mean_age * n))
}

fn powu<T: Scalar>(x: T, k: u32) -> T {
    let mut acc = T::one();
    let mut base = x;
    let mut k = k;
    while k > 0 {
        if k & 1 == 1 {
            acc = acc * base;
        }
        base = base * base;
        k >>= 1;
    }
    acc
}

fn product<T: Scalar>(xs: impl Iterator<Item = T>, len: usize) -> T {
    if len <= LOG_PRODUCT_THRESHOLD {
        return xs.fold(T::one(), |a, x| a * x);
    }
    let mut log_sum = T::zero();
    for x in xs {
        if x == T::zero() {
            return T::zero();
        }
        log_sum = log_sum + x.ln();
    }
    log_sum.exp()
}
