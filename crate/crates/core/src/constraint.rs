//! Linear equality constraints `Cᵀw = z` and their projection machinery.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, Error, Result};
use crate::linalg::symmetrize;

/// Ratio `σ_max / σ_min` of `C` beyond which `CᵀC` (condition number squared)
/// is treated as singular.
const MAX_CONDITION: f64 = 1e6;

/// A validated constraint set together with its projector and feasible offset.
///
/// `projector` is `I − C(CᵀC)⁻¹Cᵀ`, the orthogonal projector onto the null
/// space of `Cᵀ`; `offset` is the minimum-norm point satisfying `Cᵀf = z`.
/// Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet {
    matrix: DMatrix<f64>,
    values: DVector<f64>,
    projector: DMatrix<f64>,
    offset: DVector<f64>,
}

impl ConstraintSet {
    /// Builds `P` and `f` for `Cᵀw = z` from the thin SVD of `C`.
    ///
    /// With `C = U S Vᵀ`, `P = I − UUᵀ` and `f = U S⁻¹ Vᵀ z`, which avoids
    /// forming `(CᵀC)⁻¹` explicitly.
    pub fn new(matrix: DMatrix<f64>, values: DVector<f64>) -> Result<Self> {
        let (l, k) = matrix.shape();
        if k == 0 || k >= l {
            return Err(Error::Dimension {
                context: "constraint count (need 0 < K < L)",
                expected: l.saturating_sub(1),
                found: k,
            });
        }
        check_len("constraint values", k, values.len())?;
        if matrix.iter().chain(values.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("constraint entries must be finite".into()));
        }

        let svd = matrix.clone().svd(true, true);
        let sv = &svd.singular_values;
        let largest = sv.max();
        let deficient = sv
            .iter()
            .filter(|&&s| largest == 0.0 || s * MAX_CONDITION <= largest)
            .count();
        if deficient > 0 {
            return Err(Error::RankDeficient {
                columns: k,
                deficient,
            });
        }

        let u = svd.u.as_ref().expect("U requested");
        let v_t = svd.v_t.as_ref().expect("Vᵀ requested");

        let projector = symmetrize(&(DMatrix::identity(l, l) - u * u.transpose()));
        let mut coeffs = v_t * &values;
        coeffs.component_div_assign(sv);
        let offset = u * coeffs;

        Ok(Self {
            matrix,
            values,
            projector,
            offset,
        })
    }

    /// Filter length `L`.
    pub fn filter_len(&self) -> usize {
        self.matrix.nrows()
    }

    /// Number of constraints `K`.
    pub fn count(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn projector(&self) -> &DMatrix<f64> {
        &self.projector
    }

    pub fn offset(&self) -> &DVector<f64> {
        &self.offset
    }

    /// `‖Cᵀw − z‖_∞`.
    pub fn residual(&self, w: &DVector<f64>) -> f64 {
        (self.matrix.tr_mul(w) - &self.values).amax()
    }

    /// Residual bound `1e-10 · (1 + ‖z‖_∞)` that every constrained update keeps.
    pub fn tolerance(&self) -> f64 {
        1e-10 * (1.0 + self.values.amax())
    }

    /// Feasibility projection `w ↦ Pw + f`.
    pub fn project(&self, w: &DVector<f64>) -> DVector<f64> {
        &self.projector * w + &self.offset
    }

    /// Returns a copy with the same directions and new values `z`.
    pub fn with_values(&self, values: DVector<f64>) -> Result<Self> {
        Self::new(self.matrix.clone(), values)
    }
}

/// Alias kept for call sites that read better as a free function.
pub fn build_constraint_set(matrix: DMatrix<f64>, values: DVector<f64>) -> Result<ConstraintSet> {
    ConstraintSet::new(matrix, values)
}

/// Linear-phase (symmetric impulse response) constraints for a length-`L` filter.
///
/// Even `L` stacks `I_{L/2}` over `−J_{L/2}`; odd `L` inserts a zero row for
/// the centre tap. `z = 0`, so `Cᵀw = 0` iff `w_i = w_{L−1−i}`.
pub fn linear_phase_constraints(len: usize) -> Result<ConstraintSet> {
    if len < 2 {
        return Err(Error::Dimension {
            context: "linear-phase filter length (need L >= 2)",
            expected: 2,
            found: len,
        });
    }
    let half = len / 2;
    let mut c = DMatrix::zeros(len, half);
    for j in 0..half {
        c[(j, j)] = 1.0;
        c[(len - 1 - j, j)] = -1.0;
    }
    ConstraintSet::new(c, DVector::zeros(half))
}

/// Constraint set whose columns are array steering vectors and whose values are
/// the desired responses (`wᵀa_k = g_k`).
pub fn beamforming_constraints(
    steering: DMatrix<f64>,
    gains: DVector<f64>,
) -> Result<ConstraintSet> {
    if steering.ncols() == 0 {
        return Err(Error::InvalidArgument(
            "beamforming needs at least one steering vector".into(),
        ));
    }
    ConstraintSet::new(steering, gains)
}

/// Uniform linear array used to build real-valued steering constraints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformLinearArray {
    pub elements: usize,
    /// Element spacing in wavelengths.
    pub spacing: f64,
}

impl UniformLinearArray {
    pub fn new(elements: usize, spacing: f64) -> Self {
        Self { elements, spacing }
    }

    fn phases(&self, angle: f64) -> impl Iterator<Item = f64> + '_ {
        let k = 2.0 * PI * self.spacing * angle.sin();
        (0..self.elements).map(move |m| k * m as f64)
    }

    /// Real and imaginary parts of the steering vector towards `angle` (radians
    /// from broadside).
    pub fn steering(&self, angle: f64) -> (DVector<f64>, DVector<f64>) {
        let re = DVector::from_iterator(self.elements, self.phases(angle).map(f64::cos));
        let im = DVector::from_iterator(self.elements, self.phases(angle).map(f64::sin));
        (re, im)
    }

    /// Real-form constraints for a set of `(angle, gain)` look directions.
    ///
    /// Each direction contributes a cosine column with value `gain` and, when it
    /// is not identically zero, a sine column with value `0`.
    pub fn constraints(&self, looks: &[(f64, f64)]) -> Result<ConstraintSet> {
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for &(angle, gain) in looks {
            let (re, im) = self.steering(angle);
            cols.push(re);
            vals.push(gain);
            if im.amax() > 1e-12 {
                cols.push(im);
                vals.push(0.0);
            }
        }
        if cols.is_empty() {
            return Err(Error::InvalidArgument(
                "beamforming needs at least one look direction".into(),
            ));
        }
        beamforming_constraints(DMatrix::from_columns(&cols), DVector::from_vec(vals))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn assert_invariants(cs: &ConstraintSet) {
        let p = cs.projector();
        assert_eq!(p, &p.transpose());
        assert!(max_abs(&(p * p - p)) <= 1e-12);
        assert!(max_abs(&(cs.matrix().transpose() * p)) <= 1e-10);
        let fz = cs.matrix().tr_mul(cs.offset());
        assert!((fz - cs.values()).amax() <= 1e-10 * cs.values().amax().max(1.0));
    }

    fn rank(p: &DMatrix<f64>) -> usize {
        p.clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .filter(|&&e| e > 0.5)
            .count()
    }

    #[test]
    fn single_axis_constraint() {
        let cs = ConstraintSet::new(DMatrix::from_column_slice(2, 1, &[1.0, 0.0]), DVector::from_element(1, 2.0)).unwrap();
        let expected_p = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]);
        assert!(max_abs(&(cs.projector() - expected_p)) < 1e-15);
        assert!((cs.offset() - DVector::from_vec(vec![2.0, 0.0])).amax() < 1e-15);
    }

    #[test]
    fn diagonal_constraint_splits_evenly() {
        let cs = ConstraintSet::new(DMatrix::from_column_slice(2, 1, &[1.0, 1.0]), DVector::from_element(1, 2.0)).unwrap();
        let expected_p = DMatrix::from_row_slice(2, 2, &[0.5, -0.5, -0.5, 0.5]);
        assert!(max_abs(&(cs.projector() - expected_p)) < 1e-15);
        assert!((cs.offset() - DVector::from_vec(vec![1.0, 1.0])).amax() < 1e-15);
    }

    #[test]
    fn random_constraints_satisfy_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let c = DMatrix::from_fn(6, 2, |_, _| rng.gen_range(-1.0..1.0));
            let z = DVector::from_fn(2, |_, _| rng.gen_range(-3.0..3.0));
            let cs = ConstraintSet::new(c, z).unwrap();
            assert_invariants(&cs);
            assert!(max_abs(&(cs.projector() * cs.projector() - cs.projector())) <= 1e-12);
            assert_eq!(rank(cs.projector()), 4);
        }
    }

    #[test]
    fn rank_deficient_matrix_is_rejected() {
        let c = DMatrix::from_row_slice(4, 3, &[1.0, 2.0, 0.0, 0.0, 0.0, 1.0, 1.0, 2.0, 0.0, 0.0, 0.0, 0.0]);
        match ConstraintSet::new(c, DVector::zeros(3)) {
            Err(Error::RankDeficient { columns, deficient }) => {
                assert_eq!(columns, 3);
                assert_eq!(deficient, 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn too_many_constraints_is_a_dimension_error() {
        let err = ConstraintSet::new(DMatrix::identity(3, 3), DVector::zeros(3)).unwrap_err();
        assert!(matches!(err, Error::Dimension { .. }));
    }

    #[test]
    fn linear_phase_even_and_odd() {
        let cs = linear_phase_constraints(4).unwrap();
        let expected = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, -1.0, -1.0, 0.0]);
        assert_eq!(cs.matrix(), &expected);
        assert_eq!(cs.offset(), &DVector::zeros(4));

        let cs = linear_phase_constraints(3).unwrap();
        assert_eq!(cs.matrix(), &DMatrix::from_column_slice(3, 1, &[1.0, 0.0, -1.0]));

        assert!(linear_phase_constraints(1).is_err());
    }

    #[test]
    fn linear_phase_projection_is_symmetric_averaging() {
        for len in 2..12 {
            let cs = linear_phase_constraints(len).unwrap();
            assert_invariants(&cs);
            assert!(cs.offset().iter().all(|&x| x == 0.0));
            let w = DVector::from_fn(len, |i, _| (i * i) as f64 + 1.0);
            let pw = cs.project(&w);
            for i in 0..len {
                assert!((pw[i] - pw[len - 1 - i]).abs() < 1e-12);
                assert!((pw[i] - 0.5 * (w[i] + w[len - 1 - i])).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn broadside_distortionless_constraint() {
        let cs = beamforming_constraints(DMatrix::from_element(4, 1, 1.0), DVector::from_element(1, 1.0)).unwrap();
        assert_invariants(&cs);
        let w = cs.project(&DVector::from_vec(vec![0.3, -2.0, 5.0, 0.1]));
        assert!((w.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nearly_full_rank_steering_leaves_rank_one_projector() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = DMatrix::from_fn(5, 4, |_, _| rng.gen_range(-1.0..1.0));
        let cs = beamforming_constraints(a, DVector::from_element(4, 1.0)).unwrap();
        assert_eq!(rank(cs.projector()), 1);
    }

    #[test]
    fn empty_steering_is_rejected() {
        assert!(beamforming_constraints(DMatrix::zeros(4, 0), DVector::zeros(0)).is_err());
        let dependent = DMatrix::from_column_slice(3, 2, &[1.0, 1.0, 1.0, 2.0, 2.0, 2.0]);
        assert!(matches!(
            beamforming_constraints(dependent, DVector::zeros(2)),
            Err(Error::RankDeficient { deficient: 1, .. })
        ));
    }

    #[test]
    fn ula_constraints_hold_look_and_null() {
        let ula = UniformLinearArray::new(8, 0.5);
        let cs = ula.constraints(&[(0.0, 1.0), (0.5, 0.0)]).unwrap();
        // broadside has no sine column, 0.5 rad contributes two.
        assert_eq!(cs.count(), 3);
        assert_invariants(&cs);
        let w = cs.project(&DVector::zeros(8));
        let (re, im) = ula.steering(0.5);
        assert!(w.dot(&re).abs() < 1e-12 && w.dot(&im).abs() < 1e-12);
        assert!((w.sum() - 1.0).abs() < 1e-12);
    }
}
