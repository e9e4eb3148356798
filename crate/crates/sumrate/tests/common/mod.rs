//! Shared support for the acceptance suite: an independent projected-gradient
//! oracle for the convex QCQPs and small complex-Gaussian sampling helpers.
//!
//! The oracle deliberately shares no machinery with the library's dual
//! bisection solver: it minimizes the same objective by plain projected
//! gradient descent, with Euclidean projections onto each ellipsoid computed
//! in the constraint's eigenbasis and intersections handled by Dykstra's
//! alternating-projection scheme.

use nalgebra::SymmetricEigen;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use sumrate::subsolvers::QcqpProblem;
use sumrate::{C64, CMatrix, CVector};

/// Deterministic generator for one named sampling stream.
pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// One circularly-symmetric complex Gaussian scalar with unit variance.
pub fn cgauss(r: &mut ChaCha12Rng) -> C64 {
    let re: f64 = StandardNormal.sample(r);
    let im: f64 = StandardNormal.sample(r);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix with i.i.d. CN(0,1) entries.
pub fn cgauss_matrix(rows: usize, cols: usize, r: &mut ChaCha12Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| cgauss(r))
}

/// Vector with i.i.d. CN(0,1) entries.
pub fn cgauss_vector(n: usize, r: &mut ChaCha12Rng) -> CVector {
    CVector::from_fn(n, |_, _| cgauss(r))
}

/// Euclidean projector onto one ellipsoid `{x : x*Cx ≤ β}` with `C ≻ 0`,
/// precomputed in the eigenbasis of `C`.
pub struct EllipsoidProjector {
    basis: CMatrix,
    eigenvalues: Vec<f64>,
    pub budget: f64,
}

impl EllipsoidProjector {
    pub fn new(c: &CMatrix, budget: f64) -> EllipsoidProjector {
        let eig = SymmetricEigen::new(c.clone());
        let eigenvalues: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        assert!(
            eigenvalues.iter().all(|&l| l > 0.0),
            "projector requires a positive-definite constraint form"
        );
        EllipsoidProjector { basis: eig.eigenvectors, eigenvalues, budget }
    }

    pub fn value(&self, x: &CVector) -> f64 {
        let y = self.basis.adjoint() * x;
        y.iter().zip(&self.eigenvalues).map(|(yi, &l)| l * yi.norm_sqr()).sum()
    }

    /// Nearest point of the ellipsoid. In eigencoordinates the projection is
    /// `ŷ_i / (1 + μλ_i)` where `μ ≥ 0` makes the constraint tight; the
    /// constraint value is strictly decreasing in `μ`, so bisection finds it.
    pub fn project(&self, x: &CVector) -> CVector {
        let y = self.basis.adjoint() * x;
        let value =
            |mu: f64| -> f64 {
                y.iter()
                    .zip(&self.eigenvalues)
                    .map(|(yi, &l)| l * yi.norm_sqr() / (1.0 + mu * l).powi(2))
                    .sum()
            };
        if value(0.0) <= self.budget {
            return x.clone();
        }
        let mut hi = 1.0;
        while value(hi) > self.budget {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if value(mid) > self.budget {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mu = 0.5 * (lo + hi);
        let scaled = CVector::from_fn(y.len(), |i, _| {
            y[i] / C64::new(1.0 + mu * self.eigenvalues[i], 0.0)
        });
        &self.basis * scaled
    }
}

/// Euclidean projection onto the intersection of the given ellipsoids via
/// Dykstra's alternating projections (exact for one set).
pub fn project_intersection(y: &CVector, sets: &[EllipsoidProjector]) -> CVector {
    match sets.len() {
        0 => y.clone(),
        1 => sets[0].project(y),
        _ => {
            let mut x = y.clone();
            let mut corrections: Vec<CVector> = vec![CVector::zeros(y.len()); sets.len()];
            for _ in 0..1000 {
                let previous = x.clone();
                for (set, correction) in sets.iter().zip(corrections.iter_mut()) {
                    let shifted = &x + &*correction;
                    let projected = set.project(&shifted);
                    *correction = shifted - &projected;
                    x = projected;
                }
                if (&x - &previous).norm() <= 1e-13 * (1.0 + x.norm()) {
                    break;
                }
            }
            x
        }
    }
}

/// Projected-gradient minimizer of a [`QcqpProblem`]; returns the optimal
/// point and objective value.
///
/// Plain descent with the fixed step `1/(2λ_max(A))` converges linearly here
/// because every generated objective is strongly convex; the iteration count
/// is sized so the remaining error is far below the comparison tolerance.
pub fn pgd_oracle(p: &QcqpProblem, iterations: usize) -> (CVector, f64) {
    let a = &p.objective.a;
    let eig = SymmetricEigen::new(a.clone());
    let lipschitz = 2.0 * eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let step = 1.0 / (1.01 * lipschitz);
    let sets: Vec<EllipsoidProjector> =
        p.constraints.iter().map(|(form, budget)| EllipsoidProjector::new(&form.a, *budget)).collect();
    let mut x = CVector::zeros(p.objective.dim());
    for _ in 0..iterations {
        let gradient = (a * &x - &p.objective.b).scale(2.0);
        let candidate = &x - gradient.scale(step);
        x = project_intersection(&candidate, &sets);
    }
    for set in &sets {
        let value = set.value(&x);
        assert!(
            value <= set.budget * (1.0 + 1e-9),
            "oracle iterate infeasible: {value} > {}",
            set.budget
        );
    }
    let objective = p.objective.eval(&x);
    (x, objective)
}
