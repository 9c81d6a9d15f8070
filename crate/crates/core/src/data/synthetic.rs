use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::GroupedDataset;
use crate::error::{Error, Result};
use crate::linalg::{DataMatrix, Matrix};

/// Standard deviations of group 1 along its major and minor axes.
const MAJOR_STD: f64 = 3.0;
const MINOR_STD: f64 = 1.0;
/// Standard deviation of the remaining coordinates.
const NOISE_STD: f64 = 0.5;

/// Two groups whose covariances are reflections of each other.
///
/// Group 0 is a zero-mean Gaussian elongated along `(cos θ, sin θ)` in the
/// first two coordinates; group 1 is its exact mirror image `(x, -y, …)`,
/// elongated along `-θ`. A basis along the first axis therefore gives both
/// groups the same disparity error. No labels are attached.
pub fn synthetic_mirrored_groups(
    n_per_group: usize,
    d: usize,
    angle: f64,
    seed: u64,
) -> Result<GroupedDataset> {
    if d < 2 {
        return Err(Error::Dimension(format!("need d >= 2, got {d}")));
    }
    if n_per_group == 0 {
        return Err(Error::InvalidInput("need at least one sample per group".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (s, c) = angle.sin_cos();
    let mut m = Matrix::zeros(2 * n_per_group, d);
    for i in 0..n_per_group {
        let a: f64 = StandardNormal.sample(&mut rng);
        let b: f64 = StandardNormal.sample(&mut rng);
        let (a, b) = (MAJOR_STD * a, MINOR_STD * b);
        let x = c * a - s * b;
        let y = s * a + c * b;
        m[(i, 0)] = x;
        m[(i, 1)] = y;
        m[(n_per_group + i, 0)] = x;
        m[(n_per_group + i, 1)] = -y;
        for j in 2..d {
            let z: f64 = StandardNormal.sample(&mut rng);
            m[(i, j)] = NOISE_STD * z;
            m[(n_per_group + i, j)] = NOISE_STD * z;
        }
    }
    let group_ids = (0..2 * n_per_group).map(|i| usize::from(i >= n_per_group)).collect();
    let feature_names = (0..d).map(|j| format!("x{j}")).collect();
    GroupedDataset::new(
        DataMatrix::new(m)?,
        group_ids,
        vec!["plus".into(), "minus".into()],
        None,
        feature_names,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::split_groups;
    use crate::linalg::{gram, Subspace};
    use crate::objectives::{disparity_error, FairPcaProblem, ProblemOptions};

    fn unit(theta: f64) -> Subspace {
        Subspace::new(Matrix::from_column_slice(2, 1, &[theta.cos(), theta.sin()])).unwrap()
    }

    #[test]
    fn deterministic() {
        assert_eq!(
            synthetic_mirrored_groups(50, 3, 0.4, 7).unwrap(),
            synthetic_mirrored_groups(50, 3, 0.4, 7).unwrap()
        );
    }

    #[test]
    fn zero_angle_groups_coincide() {
        let gd = synthetic_mirrored_groups(20_000, 2, 0.0, 1).unwrap();
        let blocks = split_groups(&gd);
        let problem = FairPcaProblem::from_groups(&blocks, 1, ProblemOptions::default()).unwrap();
        for k in 0..8 {
            let u = unit(k as f64 * 0.4);
            let e1 = disparity_error(&problem, 0, &u).unwrap();
            let e2 = disparity_error(&problem, 1, &u).unwrap();
            let energy = problem.group_energies()[0];
            assert!((e1 - e2).abs() <= 0.01 * energy, "{e1} vs {e2}");
        }
    }

    #[test]
    fn mirrored_grams_and_fair_axis() {
        let gd = synthetic_mirrored_groups(400, 2, std::f64::consts::FRAC_PI_4, 2).unwrap();
        let blocks = split_groups(&gd);
        let (g1, g2) = (gram(&blocks[0]), gram(&blocks[1]));
        let (a, b) = (g1.as_matrix(), g2.as_matrix());
        assert_eq!(a[(0, 0)], b[(0, 0)]);
        assert_eq!(a[(1, 1)], b[(1, 1)]);
        assert_eq!(a[(0, 1)], -b[(0, 1)]);

        let problem = FairPcaProblem::from_groups(&blocks, 1, ProblemOptions::default()).unwrap();
        let gap = |u: &Subspace| {
            (disparity_error(&problem, 0, u).unwrap() - disparity_error(&problem, 1, u).unwrap()).abs()
        };
        assert!(gap(&unit(0.0)) <= 1e-9);
        let plain = problem.plain_pca().unwrap();
        // Pooled covariance is diagonal, so plain PCA picks an axis too.
        assert!(gap(&plain) <= 1e-6 * problem.total_energy());
        assert!(gap(&unit(0.3)) > 1.0);
    }
}
