#![allow(dead_code)]

use signed_sinkhorn::{MarginalTargets, SignedTensor};

/// Example-1 prior: `SLICES[k][i][j] / 14` is the entry at `(i, j, k)`.
const EXAMPLE1_SLICES: [[[f64; 3]; 3]; 3] = [
    [[1.0, 1.0, -1.0], [1.0, 0.0, 1.0], [1.0, 0.0, 1.0]],
    [[-1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [1.0, 1.0, 0.0]],
    [[1.0, 1.0, 1.0], [1.0, -1.0, 1.0], [0.0, 1.0, 1.0]],
];

/// Published Example-1 posterior, same layout as the prior.
pub const EXAMPLE1_PUBLISHED: [[[f64; 3]; 3]; 3] = [
    [[0.1167, 0.2368, -0.5447], [0.0659, 0.0, 0.1402], [0.0272, 0.0, 0.0579]],
    [[-0.3456, 0.0, 0.0], [0.2210, 0.4482, 0.0], [0.0913, 0.1851, 0.0]],
    [[0.1429, 0.2898, 0.3041], [0.0806, -0.8275, 0.1716], [0.0, 0.0676, 0.0709]],
];

pub fn example1_sign_pattern() -> SignedTensor {
    SignedTensor::from_fn(vec![3, 3, 3], |ix| EXAMPLE1_SLICES[ix[2]][ix[0]][ix[1]]).unwrap()
}

pub fn example1_prior() -> SignedTensor {
    example1_sign_pattern().map(|v| v / 14.0).unwrap()
}

pub fn example1_targets() -> MarginalTargets {
    MarginalTargets::new(vec![
        vec![0.2, 0.3, 0.5],
        vec![0.4, 0.4, 0.2],
        vec![0.1, 0.6, 0.3],
    ])
    .unwrap()
}

pub fn example1_published() -> SignedTensor {
    SignedTensor::from_fn(vec![3, 3, 3], |ix| EXAMPLE1_PUBLISHED[ix[2]][ix[0]][ix[1]]).unwrap()
}

/// Published two-marginal posterior (10 x 10, four decimals).
pub const TWO_MARGINAL_PUBLISHED: [[f64; 10]; 10] = [
    [0.6140, -0.2138, 0.0208, 0.0, 0.0461, 0.0, -0.4165, 0.0, 0.0251, 0.0242],
    [-0.2616, 0.0, 0.0176, 0.0, 0.0, 0.0, 0.2737, 0.0, 0.0, 0.0203],
    [0.0147, 0.0152, 0.0, 0.0, 0.0011, 0.0, 0.0078, 0.0112, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0, 0.0135, 0.0, 0.0, 0.1365, 0.0, 0.0],
    [0.0463, 0.0, 0.0016, 0.1327, 0.0035, 0.0160, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0, 0.0058, 0.0, 0.0410, 0.0, 0.0032, 0.0],
    [-0.4975, 0.2804, 0.0092, 0.0, 0.0, 0.0939, 0.1440, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0008, 0.0673, 0.0, 0.0, 0.0, 0.0, 0.0010, 0.0009],
    [0.1165, 0.0, 0.0, 0.0, 0.0, 0.0402, 0.0, 0.0888, 0.0, 0.0046],
    [0.0176, 0.0182, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0134, 0.0007, 0.0],
];

pub fn two_marginal_published() -> SignedTensor {
    SignedTensor::from_fn(vec![10, 10], |ix| TWO_MARGINAL_PUBLISHED[ix[0]][ix[1]]).unwrap()
}

/// Prior reconstructed from the published posterior: its sign, zero where it is zero.
pub fn two_marginal_prior() -> SignedTensor {
    two_marginal_published()
        .map(|v| if v > 0.0 { 1.0 } else if v < 0.0 { -1.0 } else { 0.0 })
        .unwrap()
}

pub fn two_marginal_targets() -> MarginalTargets {
    MarginalTargets::new(vec![
        vec![0.1, 0.05, 0.05, 0.15, 0.2, 0.05, 0.03, 0.07, 0.25, 0.05],
        vec![0.05, 0.1, 0.05, 0.2, 0.07, 0.15, 0.05, 0.25, 0.03, 0.05],
    ])
    .unwrap()
}

pub fn max_abs_diff(a: &SignedTensor, b: &SignedTensor) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}
