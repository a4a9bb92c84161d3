//! Point-process machinery: nearest-transmitter distance law, Poisson
//! sampling in a spherical shell, nearest-point identification.
//!
//! Transmitters live outside the receiver, so the nearest-distance law is
//! the void probability of a homogeneous Poisson process on the complement
//! of the receiver ball. Sampling uses a finite outer radius `R` as a
//! placement device only; the analytic densities always extend to infinity.

use crate::error::{Error, Result};
use crate::seeding;
use rand::Rng;
use rand_distr::{Distribution, Poisson, UnitSphere};

const FOUR_THIRDS_PI: f64 = 4.0 / 3.0 * std::f64::consts::PI;

/// One sampled set of active-transmitter positions.
#[derive(Debug, Clone, PartialEq)]
pub struct PPPRealization {
    /// Transmitter positions, um; every norm lies in `[shell.0, shell.1]`.
    pub positions: Vec<[f64; 3]>,
    /// Index of the minimum-norm position; ties go to the lowest index.
    pub nearest_index: Option<usize>,
    /// Seed this realization was generated from.
    pub generating_seed: u64,
    /// Inner and outer sampling radii `(r_r, R)`, um.
    pub shell: (f64, f64),
}

impl PPPRealization {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Distance of the nearest transmitter, if any.
    pub fn nearest_distance(&self) -> Option<f64> {
        self.nearest_index.map(|i| norm(&self.positions[i]))
    }

    /// Radial distances of all positions, in position order.
    pub fn radii(&self) -> Vec<f64> {
        self.positions.iter().map(norm).collect()
    }
}

#[inline]
fn norm(p: &[f64; 3]) -> f64 {
    (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()
}

fn check_density(lambda_a: f64) -> Result<()> {
    if !lambda_a.is_finite() || lambda_a <= 0.0 {
        return Err(Error::domain(format!(
            "active density {lambda_a} must be positive"
        )));
    }
    Ok(())
}

/// PDF of the nearest-transmitter distance in 3D:
/// `4 lambda_a pi x^2 exp(-lambda_a (4/3) pi (x^3 - r_r^3))` for `x >= r_r`,
/// 0 below the receiver surface.
pub fn nearest_pdf_3d(x: f64, lambda_a: f64, r_r: f64) -> Result<f64> {
    check_density(lambda_a)?;
    if x < r_r {
        return Ok(0.0);
    }
    let exponent = lambda_a * FOUR_THIRDS_PI * (x.powi(3) - r_r.powi(3));
    Ok(4.0 * lambda_a * std::f64::consts::PI * x * x * (-exponent).exp())
}

/// CDF of the nearest-transmitter distance in 3D:
/// `1 - exp(-lambda_a (4/3) pi (x^3 - r_r^3))`.
pub fn nearest_cdf_3d(x: f64, lambda_a: f64, r_r: f64) -> Result<f64> {
    check_density(lambda_a)?;
    if x <= r_r {
        return Ok(0.0);
    }
    let exponent = lambda_a * FOUR_THIRDS_PI * (x.powi(3) - r_r.powi(3));
    Ok(-(-exponent).exp_m1())
}

/// PDF of the nearest-transmitter distance in 2D (density in um^-2):
/// `2 lambda_a pi r exp(-lambda_a pi (r^2 - r_r^2))` for `r >= r_r`.
///
/// Provided for completeness of the distance law; no 2D expectation engine
/// is built on top of it.
pub fn nearest_pdf_2d(r: f64, lambda_a: f64, r_r: f64) -> Result<f64> {
    check_density(lambda_a)?;
    if r < r_r {
        return Ok(0.0);
    }
    let exponent = lambda_a * std::f64::consts::PI * (r * r - r_r * r_r);
    Ok(2.0 * lambda_a * std::f64::consts::PI * r * (-exponent).exp())
}

/// CDF companion of [`nearest_pdf_2d`].
pub fn nearest_cdf_2d(r: f64, lambda_a: f64, r_r: f64) -> Result<f64> {
    check_density(lambda_a)?;
    if r <= r_r {
        return Ok(0.0);
    }
    let exponent = lambda_a * std::f64::consts::PI * (r * r - r_r * r_r);
    Ok(-(-exponent).exp_m1())
}

/// Samples one Poisson realization in the shell `r_r <= |p| <= R`.
///
/// The point count is Poisson with mean `lambda_a (4/3) pi (R^3 - r_r^3)`;
/// positions are i.i.d. uniform over the shell (radius by inverse CDF of
/// the `r^2` density, direction uniform on the sphere). Deterministic given
/// the seed.
pub fn sample_ppp_shell(
    lambda_a: f64,
    r_r: f64,
    placement_radius: f64,
    seed: u64,
) -> Result<PPPRealization> {
    if !lambda_a.is_finite() || lambda_a < 0.0 {
        return Err(Error::domain(format!(
            "active density {lambda_a} must be nonnegative"
        )));
    }
    if !placement_radius.is_finite() || placement_radius <= r_r {
        return Err(Error::domain(format!(
            "placement radius {placement_radius} must be finite and exceed the receiver radius {r_r}"
        )));
    }
    let r3_lo = r_r.powi(3);
    let r3_hi = placement_radius.powi(3);
    let mean = lambda_a * FOUR_THIRDS_PI * (r3_hi - r3_lo);

    let mut rng = seeding::stream_rng(seed, 0);
    let count = if mean > 0.0 {
        let poisson = Poisson::new(mean)
            .map_err(|e| Error::domain(format!("invalid Poisson mean {mean}: {e}")))?;
        poisson.sample(&mut rng) as usize
    } else {
        0
    };

    let mut positions = Vec::with_capacity(count);
    for _ in 0..count {
        let u: f64 = rng.random();
        let radius = (r3_lo + u * (r3_hi - r3_lo)).cbrt();
        let dir: [f64; 3] = UnitSphere.sample(&mut rng);
        positions.push([radius * dir[0], radius * dir[1], radius * dir[2]]);
    }
    let nearest_index = identify_nearest(&positions);

    Ok(PPPRealization {
        positions,
        nearest_index,
        generating_seed: seed,
        shell: (r_r, placement_radius),
    })
}

/// Probability that the nearest transmitter lies beyond `placement_radius`:
/// the distribution mass a finite sampling radius cannot represent.
pub fn nearest_tail_mass(lambda_a: f64, r_r: f64, placement_radius: f64) -> f64 {
    if !placement_radius.is_finite() || lambda_a <= 0.0 {
        return 0.0;
    }
    (-lambda_a * FOUR_THIRDS_PI * (placement_radius.powi(3) - r_r.powi(3))).exp()
}

/// Index of the minimum-norm position; `None` when empty, ties to the
/// lowest index.
pub fn identify_nearest(positions: &[[f64; 3]]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, p) in positions.iter().enumerate() {
        let d2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
        match best {
            Some((_, best_d2)) if d2 >= best_d2 => {}
            _ => best = Some((i, d2)),
        }
    }
    best.map(|(i, _)| i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::ks_statistic;
    use crate::numerics;

    const LAMBDA: f64 = 1e-4;
    const RR: f64 = 5.0;

    #[test]
    fn pdf_3d_normalizes_to_one() {
        let r = numerics::integrate_semi_infinite(
            |x| nearest_pdf_3d(x, LAMBDA, RR).unwrap(),
            RR,
            1e-10,
            1e-13,
        )
        .unwrap();
        assert!((r.value - 1.0).abs() < 1e-9, "integral {}", r.value);
    }

    #[test]
    fn pdf_3d_boundary_value() {
        let v = nearest_pdf_3d(RR, LAMBDA, RR).unwrap();
        let expected = 4.0 * LAMBDA * std::f64::consts::PI * RR * RR;
        assert!((v - expected).abs() < 1e-18);
        assert_eq!(nearest_pdf_3d(RR - 1e-9, LAMBDA, RR).unwrap(), 0.0);
    }

    #[test]
    fn pdf_rejects_nonpositive_density() {
        assert!(nearest_pdf_3d(6.0, 0.0, RR).is_err());
        assert!(nearest_cdf_3d(6.0, -1.0, RR).is_err());
        assert!(nearest_pdf_2d(6.0, 0.0, RR).is_err());
    }

    #[test]
    fn cdf_3d_is_derivative_consistent_with_pdf() {
        let h = 1e-5;
        for &x in &[6.0, 10.0, 14.0, 22.0] {
            let num = (nearest_cdf_3d(x + h, LAMBDA, RR).unwrap()
                - nearest_cdf_3d(x - h, LAMBDA, RR).unwrap())
                / (2.0 * h);
            let pdf = nearest_pdf_3d(x, LAMBDA, RR).unwrap();
            assert!((num - pdf).abs() < 1e-7, "x={x}: {num} vs {pdf}");
        }
    }

    #[test]
    fn cdf_3d_limits() {
        assert_eq!(nearest_cdf_3d(RR, LAMBDA, RR).unwrap(), 0.0);
        assert!((nearest_cdf_3d(1e4, LAMBDA, RR).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tail_mass_complements_cdf() {
        let big_r = 35.0;
        let mass = nearest_tail_mass(LAMBDA, RR, big_r);
        let cdf = nearest_cdf_3d(big_r, LAMBDA, RR).unwrap();
        assert!((mass - (1.0 - cdf)).abs() < 1e-12);
        assert!(mass < 1e-6, "R=35 leaves mass {mass}");
        assert_eq!(nearest_tail_mass(LAMBDA, RR, f64::INFINITY), 0.0);
    }

    #[test]
    fn median_nearest_distance_matches_root_find() {
        // Root of CDF(x) = 1/2, frozen from an independent solver.
        let median = 12.118653924783086;
        let cdf = nearest_cdf_3d(median, LAMBDA, RR).unwrap();
        assert!((cdf - 0.5).abs() < 1e-12, "{cdf}");
    }

    #[test]
    fn pdf_2d_normalizes_and_boundary() {
        let lambda2 = 3e-3; // um^-2
        let r = numerics::integrate_semi_infinite(
            |x| nearest_pdf_2d(x, lambda2, RR).unwrap(),
            RR,
            1e-10,
            1e-13,
        )
        .unwrap();
        assert!((r.value - 1.0).abs() < 1e-9);
        let at_surface = nearest_pdf_2d(RR, lambda2, RR).unwrap();
        assert!((at_surface - 2.0 * lambda2 * std::f64::consts::PI * RR).abs() < 1e-15);
    }

    #[test]
    fn cdf_2d_inversion_round_trip() {
        let lambda2 = 2e-3;
        for k in 1..40 {
            let u = k as f64 / 40.0;
            // Invert 1 - exp(-lambda pi (r^2 - r_r^2)) = u.
            let r = (RR * RR - (1.0 - u).ln() / (lambda2 * std::f64::consts::PI)).sqrt();
            let back = nearest_cdf_2d(r, lambda2, RR).unwrap();
            assert!((back - u).abs() < 1e-12, "u={u}: {back}");
        }
    }

    #[test]
    fn sampler_rejects_bad_shell() {
        assert!(sample_ppp_shell(LAMBDA, RR, RR, 1).is_err());
        assert!(sample_ppp_shell(LAMBDA, RR, f64::INFINITY, 1).is_err());
        assert!(sample_ppp_shell(-1.0, RR, 50.0, 1).is_err());
    }

    #[test]
    fn zero_density_gives_empty_realization() {
        let r = sample_ppp_shell(0.0, RR, 50.0, 7).unwrap();
        assert!(r.is_empty());
        assert_eq!(r.nearest_index, None);
    }

    #[test]
    fn sampled_count_matches_poisson_mean() {
        // lambda = 1e-4, shell (5, 50): mean 52.3075...
        let n_real = 2000;
        let mut total = 0usize;
        for i in 0..n_real {
            let seed = seeding::derive_seed(99, &[i]);
            total += sample_ppp_shell(LAMBDA, RR, 50.0, seed).unwrap().len();
        }
        let mean = total as f64 / n_real as f64;
        let expected = 52.30751768227006;
        // 3 sigma of the realization-averaged Poisson count.
        let tol = 3.0 * (expected / n_real as f64).sqrt();
        assert!((mean - expected).abs() < tol, "mean {mean} vs {expected}");
    }

    #[test]
    fn positions_stay_in_shell_and_nearest_is_min() {
        let r = sample_ppp_shell(1e-3, RR, 30.0, 1234).unwrap();
        assert!(!r.is_empty());
        let radii = r.radii();
        for &d in &radii {
            assert!((RR..=30.0 + 1e-12).contains(&d));
        }
        let min = radii.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(radii[r.nearest_index.unwrap()], min);
    }

    #[test]
    fn identify_nearest_edge_cases() {
        assert_eq!(identify_nearest(&[]), None);
        let pts = [[12.0, 0.0, 0.0], [0.0, 7.0, 0.0], [0.0, 0.0, 30.0]];
        assert_eq!(identify_nearest(&pts), Some(1));
        // Identical radii tie to the lower index.
        let ties = [[0.0, 9.0, 0.0], [9.0, 0.0, 0.0]];
        assert_eq!(identify_nearest(&ties), Some(0));
    }

    #[test]
    fn identical_seeds_reproduce_realizations() {
        let a = sample_ppp_shell(LAMBDA, RR, 50.0, 42).unwrap();
        let b = sample_ppp_shell(LAMBDA, RR, 50.0, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_ppp_shell(LAMBDA, RR, 50.0, 43).unwrap();
        assert_ne!(a.positions, c.positions);
    }

    #[test]
    fn radial_cdf_of_shell_points_passes_ks() {
        // Pool points from many realizations; their radial CDF is
        // (r^3 - r_r^3) / (R^3 - r_r^3).
        let big_r = 50.0;
        let mut radii = Vec::new();
        for i in 0..400 {
            let seed = seeding::derive_seed(5150, &[i]);
            radii.extend(sample_ppp_shell(LAMBDA, RR, big_r, seed).unwrap().radii());
        }
        radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let denom = big_r.powi(3) - RR.powi(3);
        let (stat, p) = ks_statistic(&radii, |r| (r.powi(3) - RR.powi(3)) / denom).unwrap();
        assert!(p > 0.01, "KS stat {stat}, p {p}, n {}", radii.len());
    }

    #[test]
    fn void_probability_matches_theory() {
        // P(no point within radius x) = exp(-lambda (4/3) pi (x^3 - r_r^3)),
        // checked within 3 binomial standard errors with R >> x.
        let x = 12.0;
        let n_real = 4000;
        let mut void = 0usize;
        for i in 0..n_real {
            let seed = seeding::derive_seed(31337, &[i]);
            let r = sample_ppp_shell(LAMBDA, RR, 60.0, seed).unwrap();
            if r.nearest_distance().is_none_or(|d| d > x) {
                void += 1;
            }
        }
        let p_expected = (-LAMBDA * FOUR_THIRDS_PI * (x.powi(3) - RR.powi(3))).exp();
        let p_observed = void as f64 / n_real as f64;
        let se = (p_expected * (1.0 - p_expected) / n_real as f64).sqrt();
        assert!(
            (p_observed - p_expected).abs() < 3.0 * se,
            "observed {p_observed}, expected {p_expected}, se {se}"
        );
    }

    #[test]
    fn nearest_distance_distribution_passes_ks() {
        // R = 35 leaves truncation mass below 1e-6 at this density.
        let n_real = 20_000;
        let mut distances = Vec::with_capacity(n_real);
        for i in 0..n_real {
            let seed = seeding::derive_seed(2024, &[i as u64]);
            if let Some(d) = sample_ppp_shell(LAMBDA, RR, 35.0, seed)
                .unwrap()
                .nearest_distance()
            {
                distances.push(d);
            }
        }
        distances.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let (stat, p) =
            ks_statistic(&distances, |x| nearest_cdf_3d(x, LAMBDA, RR).unwrap()).unwrap();
        assert!(p > 0.01, "KS stat {stat}, p {p}");
    }
}
