//! Marginal choice models: ordered logit, multinomial logit, the residual
//! utility stack and the CORAL ordinal head.
//!
//! Each computation has a generic form over [`Real`] (used by the likelihood
//! and its gradient) and an `f64` entry point with input checks.

use crate::error::{Error, Result};
use crate::scalar::{logistic, Real};

/// Ordered thresholds `psi_1 <= ... <= psi_{K-1}` parameterized by
/// `psi_1 = raw_1`, `psi_k = psi_{k-1} + exp(raw_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSet {
    pub raw: Vec<f64>,
}

impl ThresholdSet {
    pub fn new(raw: Vec<f64>) -> Self {
        Self { raw }
    }

    /// Raw parameters reproducing the given nondecreasing thresholds.
    /// Ties are nudged apart by `1e-12`.
    pub fn from_thresholds(psi: &[f64]) -> Self {
        let mut raw = Vec::with_capacity(psi.len());
        for (k, &p) in psi.iter().enumerate() {
            if k == 0 {
                raw.push(p);
            } else {
                raw.push((p - psi[k - 1]).max(1e-12).ln());
            }
        }
        Self { raw }
    }

    pub fn thresholds(&self) -> Vec<f64> {
        threshold_values(&self.raw)
    }

    pub fn levels(&self) -> usize {
        self.raw.len() + 1
    }
}

pub fn threshold_values<T: Real>(raw: &[T]) -> Vec<T> {
    let mut out: Vec<T> = Vec::with_capacity(raw.len());
    for (k, &r) in raw.iter().enumerate() {
        out.push(if k == 0 { r } else { out[k - 1] + r.exp() });
    }
    out
}

/// CORAL biases `b_1 > b_2 > ... > b_{K-1}` from `b_1 = raw_1`,
/// `b_k = b_{k-1} - exp(raw_k)`.
pub fn coral_bias_values<T: Real>(raw: &[T]) -> Vec<T> {
    let mut out: Vec<T> = Vec::with_capacity(raw.len());
    for (k, &r) in raw.iter().enumerate() {
        out.push(if k == 0 { r } else { out[k - 1] - r.exp() });
    }
    out
}

/// Residual layers `h_m = h_{m-1} - ln(1 + exp(W_m h_{m-1}))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualStack {
    pub depth: usize,
    pub dim: usize,
    /// `depth` row-major `dim x dim` matrices, concatenated.
    pub weights: Vec<f64>,
}

impl ResidualStack {
    pub fn zeros(depth: usize, dim: usize) -> Self {
        Self {
            depth,
            dim,
            weights: vec![0.0; depth * dim * dim],
        }
    }

    pub fn new(depth: usize, dim: usize, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != depth * dim * dim {
            return Err(Error::Dimension(format!(
                "residual stack of depth {depth} and dim {dim} needs {} weights, got {}",
                depth * dim * dim,
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Numerical("non-finite residual weight".into()));
        }
        Ok(Self {
            depth,
            dim,
            weights,
        })
    }

    /// Output `h_M` of the stack. The residual correction is `h_M - h0`.
    pub fn forward(&self, h0: &[f64]) -> Result<Vec<f64>> {
        if h0.len() != self.dim {
            return Err(Error::Dimension(format!(
                "residual input has length {}, stack dim is {}",
                h0.len(),
                self.dim
            )));
        }
        let d = self.dim;
        let mut h = h0.to_vec();
        for m in 0..self.depth {
            h = residual_layer(&self.weights[m * d * d..(m + 1) * d * d], &h);
            if h.iter().any(|x| !x.is_finite()) {
                return Err(Error::Numerical(format!(
                    "non-finite activation after residual layer {}",
                    m + 1
                )));
            }
        }
        Ok(h)
    }
}

#[inline]
fn residual_layer<T: Real>(w: &[T], h: &[T]) -> Vec<T> {
    let d = h.len();
    (0..d)
        .map(|i| h[i] - T::dot(&w[i * d..(i + 1) * d], h).softplus())
        .collect()
}

pub fn residual_forward_generic<T: Real>(weights: &[T], depth: usize, h0: &[T]) -> Vec<T> {
    let d = h0.len();
    debug_assert_eq!(weights.len(), depth * d * d);
    let mut h = h0.to_vec();
    for m in 0..depth {
        h = residual_layer(&weights[m * d * d..(m + 1) * d * d], &h);
    }
    h
}

/// Alternative utilities: the first alternative is the reference with all
/// coefficients pinned to zero; alternative `j >= 1` has utility
/// `asc[j-1] + beta[j-1] . x`. The optional stack (dimension `J`) is applied to
/// the assembled utility vector.
pub fn mnl_utilities(
    asc: &[f64],
    beta: &[Vec<f64>],
    x: &[f64],
    stack: Option<&ResidualStack>,
) -> Result<Vec<f64>> {
    if asc.len() != beta.len() {
        return Err(Error::Dimension(format!(
            "{} constants for {} non-reference alternatives",
            asc.len(),
            beta.len()
        )));
    }
    if let Some(row) = beta.iter().find(|b| b.len() != x.len()) {
        return Err(Error::Dimension(format!(
            "coefficient row of length {} for {} features",
            row.len(),
            x.len()
        )));
    }
    let mut v = Vec::with_capacity(beta.len() + 1);
    v.push(0.0);
    for (a, b) in asc.iter().zip(beta) {
        v.push(a + f64::dot(b, x));
    }
    match stack {
        Some(s) if s.depth > 0 => s.forward(&v),
        _ => Ok(v),
    }
}

/// Softmax with max subtraction.
pub fn softmax<T: Real>(v: &[T]) -> Vec<T> {
    let max = v.iter().map(|x| x.val()).fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<T> = v.iter().map(|&x| (x - max).exp()).collect();
    let total = T::sum(&e);
    e.into_iter().map(|x| x / total).collect()
}

pub fn mnl_probs(v: &[f64]) -> Vec<f64> {
    softmax(v)
}

/// CORAL head: a shared weight vector over the representation plus ordered
/// per-threshold biases.
#[derive(Debug, Clone, PartialEq)]
pub struct CoralHead {
    pub weight: Vec<f64>,
    pub raw_biases: Vec<f64>,
}

impl CoralHead {
    pub fn biases(&self) -> Vec<f64> {
        coral_bias_values(&self.raw_biases)
    }

    /// `p_k = logistic(a . rep + b_k)`, decreasing in `k`.
    pub fn binary_probs(&self, rep: &[f64]) -> Result<Vec<f64>> {
        if rep.len() != self.weight.len() {
            return Err(Error::Dimension(format!(
                "representation of length {} for head of width {}",
                rep.len(),
                self.weight.len()
            )));
        }
        let score = f64::dot(&self.weight, rep);
        Ok(self.biases().iter().map(|b| logistic(score + b)).collect())
    }
}

/// Level probabilities from decreasing exceedance probabilities
/// `p_k = P(y > k)`.
pub fn ordinal_level_probs(binary: &[f64]) -> Result<Vec<f64>> {
    if binary.is_empty() {
        return Err(Error::Contract("need at least one binary classifier".into()));
    }
    if let Some(&p) = binary.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Contract(format!("binary probability {p} outside [0, 1]")));
    }
    if let Some(k) = (1..binary.len()).find(|&k| binary[k] > binary[k - 1]) {
        return Err(Error::Contract(format!(
            "binary probabilities must be decreasing, p_{} = {} < p_{} = {}",
            k,
            binary[k - 1],
            k + 1,
            binary[k]
        )));
    }
    let kk = binary.len() + 1;
    let mut out = Vec::with_capacity(kk);
    out.push(1.0 - binary[0]);
    for k in 1..kk - 1 {
        out.push(binary[k - 1] - binary[k]);
    }
    out.push(binary[kk - 2]);
    Ok(out)
}

/// Cumulative points `(0, P(y <= 1), ..., P(y <= K-1), 1)` of a CORAL head
/// with score `s`: `P(y <= k) = 1 - logistic(s + b_k) = logistic(-s - b_k)`.
pub fn coral_cumulative<T: Real>(score: T, biases: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(biases.len() + 2);
    out.push(T::cst(0.0));
    for &b in biases {
        out.push((-(score + b)).logistic());
    }
    out.push(T::cst(1.0));
    out
}

/// Cumulative points `(0, F(psi_1 - index), ..., F(psi_{K-1} - index), 1)`
/// of an ordered logit with latent index `index`.
pub fn ordered_logit_cumulative_generic<T: Real>(index: T, thresholds: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(thresholds.len() + 2);
    out.push(T::cst(0.0));
    for &psi in thresholds {
        out.push((psi - index).logistic());
    }
    out.push(T::cst(1.0));
    out
}

pub fn ordered_logit_cumulative(index: f64, thresholds: &ThresholdSet) -> Vec<f64> {
    ordered_logit_cumulative_generic(index, &thresholds.thresholds())
}

/// Cell masses from cumulative points.
pub fn cumulative_to_masses(cum: &[f64]) -> Vec<f64> {
    cum.windows(2).map(|w| (w[1] - w[0]).max(0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn empty_stack_is_identity() {
        let h0 = [0.3, -1.2];
        assert_eq!(ResidualStack::zeros(0, 2).forward(&h0).unwrap(), h0.to_vec());
    }

    #[test]
    fn zero_weights_shift_by_ln2_per_layer() {
        let h0 = [0.3, -1.2, 4.0];
        let out = ResidualStack::zeros(3, 3).forward(&h0).unwrap();
        let ln2 = std::f64::consts::LN_2;
        assert!(close(&out, &[0.3 - 3.0 * ln2, -1.2 - 3.0 * ln2, 4.0 - 3.0 * ln2], 1e-15));
    }

    #[test]
    fn single_layer_matches_straight_line_recomputation() {
        let w = vec![0.4, -0.2, 0.1, 0.7];
        let h0 = [1.5, -0.5];
        let out = ResidualStack::new(1, 2, w.clone()).unwrap().forward(&h0).unwrap();
        let z0 = w[0] * h0[0] + w[1] * h0[1];
        let z1 = w[2] * h0[0] + w[3] * h0[1];
        let expected = [h0[0] - (1.0 + z0.exp()).ln(), h0[1] - (1.0 + z1.exp()).ln()];
        assert!(close(&out, &expected, 1e-15));
    }

    #[test]
    fn residual_overflow_names_layer() {
        let stack = ResidualStack::new(2, 1, vec![-1e300, 1e300]).unwrap();
        let err = stack.forward(&[1e10]).unwrap_err().to_string();
        assert!(err.contains("layer"), "{err}");
    }

    #[test]
    fn residual_jacobian_matches_finite_differences() {
        use crate::autodiff::gradient;
        let (d, depth) = (3, 2);
        let weights: Vec<f64> = (0..depth * d * d).map(|i| 0.3 * ((i as f64) * 1.7).sin()).collect();
        let stack = ResidualStack::new(depth, d, weights.clone()).unwrap();
        let h0 = [0.5, -0.8, 1.1];
        for out_idx in 0..d {
            let (_, g) = gradient(&h0, |h| {
                let w: Vec<_> = weights.iter().map(|&x| crate::autodiff::Var::constant(x)).collect();
                residual_forward_generic(&w, depth, h)[out_idx]
            })
            .unwrap();
            for j in 0..d {
                let eps = 1e-6;
                let mut hp = h0;
                let mut hm = h0;
                hp[j] += eps;
                hm[j] -= eps;
                let fd = (stack.forward(&hp).unwrap()[out_idx] - stack.forward(&hm).unwrap()[out_idx])
                    / (2.0 * eps);
                assert!((g[j] - fd).abs() <= 1e-4 * fd.abs().max(1e-3), "{out_idx},{j}: {} vs {fd}", g[j]);
            }
        }
    }

    #[test]
    fn mnl_utility_examples() {
        let beta = vec![vec![0.0, 0.0], vec![0.0, 0.0]];
        let v = mnl_utilities(&[0.0, 0.0], &beta, &[1.0, 2.0], None).unwrap();
        assert_eq!(v, vec![0.0, 0.0, 0.0]);

        let stack = ResidualStack::zeros(2, 3);
        let beta = vec![vec![1.0], vec![-0.5]];
        let plain = mnl_utilities(&[0.2, 0.1], &beta, &[2.0], None).unwrap();
        let deep = mnl_utilities(&[0.2, 0.1], &beta, &[2.0], Some(&stack)).unwrap();
        let shift = 2.0 * std::f64::consts::LN_2;
        assert!(close(&deep, &plain.iter().map(|x| x - shift).collect::<Vec<_>>(), 1e-15));
        assert!(close(&mnl_probs(&deep), &mnl_probs(&plain), 1e-15));
        assert!(mnl_utilities(&[0.0], &beta, &[2.0], None).is_err());
    }

    #[test]
    fn mnl_prob_examples() {
        let p = mnl_probs(&[0.0, 0.0, 0.0]);
        assert!(close(&p, &[1.0 / 3.0; 3], 1e-15));
        let p = mnl_probs(&[1.0, 0.0, 0.0]);
        assert!(close(&p, &[0.576_117, 0.211_942, 0.211_942], 1e-5));
        let shifted = mnl_probs(&[1001.0, 1000.0, 1000.0]);
        assert!(close(&shifted, &p, 1e-12));
    }

    #[test]
    fn coral_examples() {
        let head = CoralHead {
            weight: vec![0.0],
            raw_biases: vec![0.0],
        };
        assert_eq!(head.binary_probs(&[3.0]).unwrap(), vec![0.5]);
        // b = (2, -1): raw = (2, ln 3)
        let head = CoralHead {
            weight: vec![0.0, 0.0],
            raw_biases: vec![2.0, 3f64.ln()],
        };
        let p = head.binary_probs(&[1.0, 1.0]).unwrap();
        assert!(close(&p, &[0.880_797, 0.268_941], 1e-5));
    }

    #[test]
    fn level_probability_examples() {
        let l = ordinal_level_probs(&[0.268_941_421_369_995_1]).unwrap();
        assert!(close(&l, &[0.731_059, 0.268_941], 1e-6));
        let l = ordinal_level_probs(&[0.880_797_077_977_882_3, 0.268_941_421_369_995_1]).unwrap();
        assert!(close(&l, &[0.119_203, 0.611_856, 0.268_941], 1e-5));
        assert_eq!(ordinal_level_probs(&[0.5]).unwrap(), vec![0.5, 0.5]);
        assert!(matches!(ordinal_level_probs(&[0.2, 0.6]), Err(Error::Contract(_))));
    }

    #[test]
    fn ordered_logit_examples() {
        let t = ThresholdSet::from_thresholds(&[-1.0, 1.0]);
        let cum = ordered_logit_cumulative(0.0, &t);
        assert!(close(&cum, &[0.0, 0.268_941, 0.731_059, 1.0], 1e-6));
        let masses = cumulative_to_masses(&cum);
        assert!(close(&masses, &[0.268_941, 0.462_117, 0.268_941], 1e-6));

        let cum = ordered_logit_cumulative(1e6, &t);
        assert!(cum[1] < 1e-12 && cum[2] < 1e-12);
        assert!((cumulative_to_masses(&cum)[2] - 1.0).abs() < 1e-12);

        let t = ThresholdSet::new(vec![0.0]);
        assert_eq!(ordered_logit_cumulative(0.0, &t), vec![0.0, 0.5, 1.0]);
    }

    proptest! {
        #[test]
        fn coral_probabilities_are_rank_monotone(
            weight in prop::collection::vec(-3.0f64..3.0, 1..5),
            raw in prop::collection::vec(-4.0f64..4.0, 1..6),
            rep_scale in -5.0f64..5.0,
        ) {
            let rep: Vec<f64> = (0..weight.len()).map(|i| rep_scale * (i as f64 + 0.5).cos()).collect();
            let head = CoralHead { weight, raw_biases: raw };
            let p = head.binary_probs(&rep).unwrap();
            prop_assert!(p.windows(2).all(|w| w[0] >= w[1]));
            let levels = ordinal_level_probs(&p).unwrap();
            prop_assert!(levels.iter().all(|&x| x >= 0.0));
            prop_assert!((levels.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn thresholds_are_ordered_and_round_trip(raw in prop::collection::vec(-5.0f64..5.0, 1..8)) {
            let t = ThresholdSet::new(raw.clone());
            let psi = t.thresholds();
            prop_assert!(psi.windows(2).all(|w| w[0] <= w[1]));
            let back = ThresholdSet::from_thresholds(&psi);
            for (a, b) in back.raw.iter().zip(&raw) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }

        #[test]
        fn softmax_normalizes(v in prop::collection::vec(-50.0f64..50.0, 2..8), c in -100.0f64..100.0) {
            let p = mnl_probs(&v);
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let shifted: Vec<f64> = v.iter().map(|x| x + c).collect();
            let q = mnl_probs(&shifted);
            for (a, b) in p.iter().zip(&q) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
