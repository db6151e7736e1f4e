#pragma once

// Steady-state mean-square error of filters and smoothers designed on the nominal
// model and run on the perturbed plant A + G Delta K.
//
// Each filter is augmented with the plant it observes and the stationary joint
// covariance [[Sigma, M], [M^T, N]] is read off a Lyapunov equation. A backward
// filter consumes the measurement record in reverse time, so it is augmented with
// the reverse-time Markov model of the plant, A_rev = Sigma A^T Sigma^{-1}
// (same Sigma, same noise intensity). Forward and backward estimates depend on x(t)
// only through past and future data respectively, which are conditionally
// independent given x(t); that gives the cross term Sigma - M_f^T - M_b + alpha Sigma beta.

#include <rsk/model.hpp>
#include <rsk/optimal.hpp>
#include <rsk/robust.hpp>

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace rsk
{
	enum class EstimatorKind
	{
		kalman_filter,
		rts_smoother,
		robust_filter,
		robust_smoother
	};

	inline constexpr std::array<EstimatorKind, 4> kAllEstimators = {
		EstimatorKind::kalman_filter, EstimatorKind::rts_smoother,
		EstimatorKind::robust_filter, EstimatorKind::robust_smoother};

	const char *to_string(EstimatorKind kind);
	std::optional<EstimatorKind> parse_estimator(std::string_view name);

	enum class StateKind
	{
		coherent,
		squeezed
	};

	const char *to_string(StateKind kind);
	std::optional<StateKind> parse_state(std::string_view name);

	/// How a smoother's error is scored.
	///   combiner: exact MSE of the smoother's own weights (W_f, W_b), backward pass
	///             analysed against the reverse-time plant. This is what the estimator
	///             actually achieves on simulated data.
	///   scalar:   (pf pb - pfb^2) / (pf + pb - 2 pfb) on the phase entries, backward
	///             filter augmented with the forward-time plant.
	enum class SmootherErrorModel
	{
		combiner,
		scalar
	};

	const char *to_string(SmootherErrorModel model);
	std::optional<SmootherErrorModel> parse_smoother_model(std::string_view name);

	struct AugmentedSystem
	{
		Mat4 A_bar;
		Mat42 B_bar; ///< inputs (v, w)
	};

	struct ErrorBlocks
	{
		Mat2 Sigma;
		Mat2 M;
		Mat2 N;
		Mat2 Pi; ///< Sigma - M - M^T + N
		double lyapunov_residual = 0; ///< relative to ||B_bar B_bar^T||
	};

	struct ErrorDecomposition
	{
		Mat2 Sigma;
		Mat2 M_f, M_b;
		Mat2 N_f, N_b;
		Mat2 Pi_f, Pi_b, Pi_fb;
		double Pi = 0; ///< smoothed phase error (rad^2)
		double max_lyapunov_residual = 0;
	};

	/// A_bar = [[true_A, 0], [B_f H, A_f]], B_bar = [[G, 0], [0, B_f J]].
	AugmentedSystem augment(const Mat2 &true_A, const Vec2 &G, const RowVec2 &H, double J,
							const FilterRealization &filt);

	/// Sigma A^T Sigma^{-1} with Sigma the stationary covariance of (true_A, G).
	Mat2 time_reversed_dynamics(const Mat2 &true_A, const Vec2 &G);

	ErrorBlocks error_covariance(const AugmentedSystem &aug);

	/// Sigma - M_f^T - M_b + alpha Sigma beta, alpha = M_f^T Sigma^{-1}, beta = Sigma^{-1} M_b.
	Mat2 cross_correlation(const Mat2 &Sigma, const Mat2 &M_f, const Mat2 &M_b);

	/// Minimum-variance scalar combination of two correlated estimates.
	double smoother_error(double pi_f, double pi_b, double pi_fb);

	/// Covariance of W_f e_f + W_b e_b.
	Mat2 combined_error(const Mat2 &Pi_f, const Mat2 &Pi_b, const Mat2 &Pi_fb, const Combiner &w);

	ErrorDecomposition decompose(const Mat2 &true_A, const StateSpaceModel &ss, const FilterRealization &fwd,
								 const FilterRealization &bwd, const Combiner &combiner,
								 SmootherErrorModel model = SmootherErrorModel::combiner);

	/// Every estimator designed on the nominal model.
	struct EstimatorBank
	{
		StateSpaceModel model;
		UncertaintyStructure uncertainty;
		KalmanDesign kalman_fwd;
		KalmanDesign kalman_bwd;
		Mat2 P_s;
		Combiner rts;
		RobustDesign robust;

		double max_riccati_residual() const;
	};

	EstimatorBank design_estimators(const StateSpaceModel &ss, const UncertaintyStructure &u);

	struct Evaluation
	{
		std::array<double, 4> err{}; ///< indexed like kAllEstimators
		double max_lyapunov_residual = 0;
	};

	/// All four errors at the true plant A + G Delta K.
	Evaluation evaluate_all(const EstimatorBank &bank, double delta,
							SmootherErrorModel model = SmootherErrorModel::combiner);

	double evaluate_estimator(const EstimatorBank &bank, double delta, EstimatorKind kind,
							  SmootherErrorModel model = SmootherErrorModel::combiner);

	struct Scenario
	{
		ResonantParams process = DefaultParameters::resonant();
		SqueezingParams beam = DefaultParameters::squeezing(); ///< alpha_mag is used by both state kinds
		double mu = 0;
		StateKind state = StateKind::coherent;
		SmootherErrorModel smoother_model = SmootherErrorModel::combiner;

		StateSpaceModel coherent_model() const;
		UncertaintyStructure uncertainty() const;
	};

	struct SqueezedOperatingPoint
	{
		double sigma_f_sq = 0; ///< loop filter's phase error at the true plant (rad^2)
		double R_sq = 1;
		int iterations = 0;
		double last_step = 0;		  ///< |sigma^(k) - sigma^(k-1)| at exit
		std::vector<double> history; ///< sigma^(0), sigma^(1), ...
		StateSpaceModel model;		 ///< measurement model at the fixed point
	};

	inline constexpr double kFixedPointTolerance = 1e-6;
	inline constexpr int kFixedPointMaxIterations = 200;

	/// Iterates sigma <- Pi_f(1,1)[H(sigma)] for the loop filter at the true plant,
	/// starting from the coherent-beam value, until successive iterates differ by < 1e-6.
	SqueezedOperatingPoint squeezed_fixed_point(const Scenario &sc, double delta, EstimatorKind loop_filter);

	struct ErrorRow
	{
		double delta = 0;
		double mu = 0;
		StateKind state = StateKind::coherent;
		std::array<double, 4> err{};
		double sigma_f_sq_kalman = 0; ///< squeezed rows only
		double sigma_f_sq_robust = 0; ///< squeezed rows only

		double error(EstimatorKind kind) const { return err[static_cast<std::size_t>(kind)]; }
	};

	struct ReportDiagnostics
	{
		double max_riccati_residual = 0;
		double max_lyapunov_residual = 0;
		int max_fixed_point_iterations = 0;
		double max_fixed_point_step = 0;
	};

	struct ErrorReport
	{
		std::vector<ErrorRow> rows;
		ReportDiagnostics diagnostics;
	};

	/// n uniformly spaced points on [-1, 1]; n must be odd so that 0 is on the grid.
	std::vector<double> uniform_grid(int n);

	/// One row per delta. Squeezed rows use the per-delta fixed point of the Kalman
	/// filter (Kalman/RTS columns) and of the robust filter (robust columns).
	ErrorReport sweep_delta(const Scenario &sc, std::span<const double> grid);

	struct WorstCase
	{
		double delta = 0;
		double error = 0;
	};

	/// Row with the largest error; ties go to the smaller |delta|.
	WorstCase worst_case(const ErrorReport &report, EstimatorKind kind);

	/// 10 log10(x).
	double to_db(double x);
} // namespace rsk
