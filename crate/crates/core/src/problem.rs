//! Linear-system instances with controlled condition number.
//!
//! Instances are real symmetric positive definite with spectral norm 1,
//! paired with a unit right-hand side. Generation pins the extreme
//! eigenvalues to 1/kappa and 1 and log-spaces the interior, then applies
//! a random orthogonal rotation, so the target condition number is met
//! exactly up to rounding.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{self, vec_norm, RealMatrix, RealVector};

pub const SYMMETRY_TOL: f64 = 1e-12;
pub const NORM_TOL: f64 = 1e-10;
pub const KAPPA_TOL: f64 = 1e-6;

/// A normalized system `A x = b` to be solved.
#[derive(Debug, Clone)]
pub struct LinearSystemInstance {
    a: RealMatrix,
    b: RealVector,
    kappa_target: f64,
    seed: u64,
    dim: usize,
}

impl LinearSystemInstance {
    /// Validates all invariants before admitting the instance.
    pub fn new(a: RealMatrix, b: RealVector, kappa_target: f64, seed: u64) -> Result<Self> {
        let dim = a.rows();
        if !dim.is_power_of_two() || dim < 2 {
            return Err(Error::NotPowerOfTwo { dim });
        }
        if a.cols() != dim || b.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: b.len() });
        }
        for i in 0..dim {
            for j in 0..dim {
                if (a[(i, j)] - a[(j, i)]).abs() > SYMMETRY_TOL {
                    return Err(Error::NotHermitian {
                        row: i,
                        col: j,
                        delta: (a[(i, j)] - a[(j, i)]).abs(),
                    });
                }
            }
        }
        let bnorm = vec_norm(&b);
        if (bnorm - 1.0).abs() > 1e-12 {
            return Err(Error::NotUnit { norm: bnorm });
        }
        let ac = a.to_complex();
        let norm = numerics::spectral_norm(&ac);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidConfig(format!("spectral norm {norm} != 1")));
        }
        let kappa = numerics::condition_number(&ac)?;
        if (kappa - kappa_target).abs() > KAPPA_TOL {
            return Err(Error::InvalidConfig(format!(
                "condition number {kappa} misses target {kappa_target}"
            )));
        }
        let (eigs, _) = numerics::hermitian_eig(&ac)?;
        if eigs.iter().any(|&l| l <= 0.0) {
            return Err(Error::InvalidConfig("matrix is not positive definite".into()));
        }
        Ok(Self { a, b, kappa_target, seed, dim })
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.a
    }

    pub fn rhs(&self) -> &RealVector {
        &self.b
    }

    pub fn kappa(&self) -> f64 {
        self.kappa_target
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn to_json(&self) -> InstanceFile {
        InstanceFile {
            dim: self.dim,
            kappa: self.kappa_target,
            seed: self.seed,
            a: self.a.entries().to_vec(),
            b: self.b.clone(),
        }
    }

    pub fn from_json(file: &InstanceFile) -> Result<Self> {
        let a = RealMatrix::from_vec(file.dim, file.dim, file.a.clone())?;
        Self::new(a, file.b.clone(), file.kappa, file.seed)
    }
}

/// On-disk instance representation (round-trippable JSON).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    pub dim: usize,
    pub kappa: f64,
    pub seed: u64,
    #[serde(rename = "A")]
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

fn standard_normal(rng: &mut ChaCha12Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Orthonormalize the columns of a square matrix by modified Gram-Schmidt
/// with one re-orthogonalization pass. Diagonal signs are fixed positive
/// so the factorization is unique.
fn orthonormalize(g: &RealMatrix) -> RealMatrix {
    let n = g.rows();
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| g[(i, j)]).collect()).collect();
    for j in 0..n {
        for _pass in 0..2 {
            for k in 0..j {
                let proj = numerics::dot(&cols[j], &cols[k]);
                for i in 0..n {
                    cols[j][i] -= proj * cols[k][i];
                }
            }
        }
        let norm = vec_norm(&cols[j]);
        let sign = if g[(j, j)] < 0.0 { -1.0 } else { 1.0 };
        for x in cols[j].iter_mut() {
            *x *= sign / norm;
        }
    }
    let mut q = RealMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            q[(i, j)] = cols[j][i];
        }
    }
    q
}

/// Eigenvalues log-spaced on [1/kappa, 1] with both endpoints pinned.
fn spectrum(dim: usize, kappa: f64) -> Vec<f64> {
    if kappa == 1.0 {
        return vec![1.0; dim];
    }
    let lo = -(kappa.log10());
    (0..dim)
        .map(|i| {
            if i == 0 {
                1.0 / kappa
            } else if i == dim - 1 {
                1.0
            } else {
                10f64.powf(lo * (1.0 - i as f64 / (dim - 1) as f64))
            }
        })
        .collect()
}

/// Deterministically generate an instance with the requested condition number.
pub fn generate_instance(dim: usize, kappa: f64, seed: u64) -> Result<LinearSystemInstance> {
    if !dim.is_power_of_two() || dim < 2 {
        return Err(Error::NotPowerOfTwo { dim });
    }
    if kappa < 1.0 || !kappa.is_finite() {
        return Err(Error::BadKappa { kappa });
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut g = RealMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            g[(i, j)] = standard_normal(&mut rng);
        }
    }
    let q = orthonormalize(&g);
    let lambda = spectrum(dim, kappa);
    // A = Q diag(lambda) Q^T, symmetrized exactly.
    let mut a = RealMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let mut acc = 0.0;
            for (k, &l) in lambda.iter().enumerate() {
                acc += q[(i, k)] * l * q[(j, k)];
            }
            a[(i, j)] = acc;
            a[(j, i)] = acc;
        }
    }
    let mut b: Vec<f64> = (0..dim).map(|_| standard_normal(&mut rng)).collect();
    let norm = vec_norm(&b);
    for x in b.iter_mut() {
        *x /= norm;
    }
    LinearSystemInstance::new(a, b, kappa, seed)
}

/// Scale an arbitrary symmetric positive definite system to the normalized
/// form (unit spectral norm, unit rhs). The solution direction is unchanged.
pub fn normalize_system(a_raw: &RealMatrix, b_raw: &[f64]) -> Result<LinearSystemInstance> {
    let bnorm = vec_norm(b_raw);
    if bnorm <= 1e-14 {
        return Err(Error::ZeroVector { norm: bnorm });
    }
    let norm = numerics::spectral_norm(&a_raw.to_complex());
    if norm <= 1e-14 {
        return Err(Error::SingularMatrix);
    }
    let dim = a_raw.rows();
    let mut a = RealMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            a[(i, j)] = a_raw[(i, j)] / norm;
        }
    }
    // exact symmetrization after division
    for i in 0..dim {
        for j in (i + 1)..dim {
            let avg = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = avg;
            a[(j, i)] = avg;
        }
    }
    let b: Vec<f64> = b_raw.iter().map(|x| x / bnorm).collect();
    let kappa = numerics::condition_number(&a.to_complex())?;
    LinearSystemInstance::new(a, b, kappa, 0)
}

/// Embed an arbitrary matrix into the Hermitian form [[0, A], [A^T, 0]].
pub fn hermitian_dilation(a: &RealMatrix) -> RealMatrix {
    let (r, c) = (a.rows(), a.cols());
    let n = r.max(c);
    let mut out = RealMatrix::zeros(2 * n, 2 * n);
    for i in 0..r {
        for j in 0..c {
            out[(i, n + j)] = a[(i, j)];
            out[(n + j, i)] = a[(i, j)];
        }
    }
    out
}

/// Pad a matrix with zero rows/columns up to the next power of two.
/// The padded matrix is singular, so it is excluded from benchmarks.
pub fn zero_pad_to_power_of_two(a: &RealMatrix) -> RealMatrix {
    let n = a.rows().max(a.cols()).max(2).next_power_of_two();
    let mut out = RealMatrix::zeros(n, n);
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            out[(i, j)] = a[(i, j)];
        }
    }
    out
}

/// Dense solve of A x = b by Gaussian elimination with partial pivoting.
/// Used as the reference-solution oracle throughout.
pub fn dense_solve(a: &RealMatrix, b: &[f64]) -> Result<RealVector> {
    let n = a.rows();
    if a.cols() != n || b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.len() });
    }
    let mut m: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| a[(i, j)]).collect()).collect();
    let mut x = b.to_vec();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        if m[pivot][col].abs() <= 1e-14 {
            return Err(Error::SingularMatrix);
        }
        m.swap(col, pivot);
        x.swap(col, pivot);
        for row in (col + 1)..n {
            let f = m[row][col] / m[col][col];
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                m[row][j] -= f * m[col][j];
            }
            x[row] -= f * x[col];
        }
    }
    for col in (0..n).rev() {
        x[col] /= m[col][col];
        for row in 0..col {
            x[row] -= m[row][col] * x[col];
        }
    }
    Ok(x)
}
