#pragma once

// Time-domain check of the analytic error pipeline: simulate the perturbed plant and
// its measurement record, run the nominal-design filters over it (backward filters
// over the reversed record), combine, and average squared phase errors.

#include <rsk/analysis.hpp>

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace rsk
{
	enum class Integrator
	{
		exact,		   ///< x_{k+1} = e^{A dt} x_k + chol(Q_d) z, Q_d by Van Loan
		euler_maruyama ///< x_{k+1} = x_k + A x_k dt + G sqrt(dt) z
	};

	const char *to_string(Integrator integrator);

	struct SimConfig
	{
		double dt = 1e-6;
		double t_final = 0.2;
		double discard_fraction = 0.1; ///< trimmed from each end before averaging
		int trials = 16;
		std::uint64_t seed = 20240521;
		Integrator integrator = Integrator::exact;
		bool inject_noise = true;	  ///< false zeroes both noise sequences (test hook)
		bool stationary_start = true; ///< x(0) ~ N(0, Sigma); otherwise x(0) = 0

		std::size_t steps() const;
		/// dt <= 1e-5, t_final >= 100 resonance periods, trials >= 1, discard in [0, 0.45).
		void validate(double omega_r) const;
	};

	struct Trajectory
	{
		double dt = 0;
		Eigen::VectorXd times;
		Eigen::Matrix2Xd x;
		/// theta_k = H x_k + J w_k / sqrt(dt): sample of unit-intensity white noise,
		/// held over [t_k, t_k + dt).
		Eigen::VectorXd theta;
	};

	/// Trial `trial` draws from a generator seeded with cfg.seed + trial.
	Trajectory simulate_truth(const Mat2 &true_A, const Vec2 &G, const RowVec2 &H, double J, const SimConfig &cfg,
							  std::uint64_t trial = 0);

	/// Zero-order-hold discretization of d(xhat)/ds = A_f xhat + B_f theta.
	/// Forward filters start from 0 at t = 0 and estimate x(t_k) from theta_0..theta_{k-1};
	/// backward filters start from 0 at T and estimate x(t_k) from theta_k..theta_{n-1}.
	Eigen::Matrix2Xd run_filter(const Eigen::VectorXd &theta, const FilterRealization &filt, double dt);

	Eigen::Matrix2Xd combine(const Eigen::Matrix2Xd &forward, const Eigen::Matrix2Xd &backward, const Combiner &w);

	Eigen::Matrix2Xd run_smoother(const Eigen::VectorXd &theta, const FilterRealization &fwd,
								  const FilterRealization &bwd, const Combiner &w, double dt);

	struct MseEstimate
	{
		double mse = 0;		   ///< rad^2
		double std_error = 0;  ///< between-trial; 8-block jackknife for a single trial
		std::vector<double> per_trial;
	};

	inline constexpr int kJackknifeBlocks = 8;

	/// Squared phase error statistics of one trial over the retained window.
	struct TrialErrors
	{
		double mse = 0;
		std::array<double, kJackknifeBlocks> block_sum{};
		std::array<std::size_t, kJackknifeBlocks> block_count{};
	};

	TrialErrors trial_errors(const Eigen::VectorXd &truth, const Eigen::VectorXd &estimate, double discard_fraction);
	MseEstimate aggregate(std::span<const TrialErrors> trials);

	/// Mean squared phase error over all trials' retained windows.
	MseEstimate empirical_mse(std::span<const Eigen::VectorXd> truth, std::span<const Eigen::VectorXd> estimate,
							  double discard_fraction);

	/// RMS of (a - b) over RMS of b, phase component.
	double relative_rms_difference(const Eigen::Matrix2Xd &a, const Eigen::Matrix2Xd &b);

	struct McEstimatorResult
	{
		EstimatorKind kind = EstimatorKind::kalman_filter;
		double analytic = 0;
		MseEstimate empirical;
		double z_score = 0;
	};

	struct McPoint
	{
		double delta = 0;
		double mu = 0;
		std::vector<McEstimatorResult> results; ///< in the order requested
	};

	/// Simulates cfg.trials records at the true plant and compares each requested
	/// estimator's empirical MSE with the analytic value. Squeezed scenarios simulate
	/// the measurement of the matching loop filter's fixed point.
	McPoint monte_carlo_point(const Scenario &sc, double delta, const SimConfig &cfg,
							  std::span<const EstimatorKind> kinds);
} // namespace rsk
