#pragma once

#include <rsk/optimal.hpp>

namespace rsk
{
	/// Weights of the integral quadratic constraint. Both are 1 for the uncertainty
	/// inputs (Delta K x + v, w); they are not configurable.
	inline constexpr double kIqcQ = 1.0;
	inline constexpr double kIqcR = 1.0;

	struct RobustFilterDesign
	{
		RiccatiSolution<double> riccati; ///< X = Y (forward) or Z (backward)
		FilterRealization realization;	 ///< estimate coordinates, xhat = Y^{-1} eta or Z^{-1} xi
	};

	struct RobustSmoother
	{
		Combiner combiner;
		Mat2 covariance_proxy; ///< (Y + Z)^{-1}
	};

	struct RobustDesign
	{
		double mu = 0;
		RobustFilterDesign forward;
		RobustFilterDesign backward;
		RobustSmoother smoother;
	};

	/// Y A + A^T Y + Y G Q^{-1} G^T Y + K^T K - H^T R H = 0, with the filter
	///   d(eta)/dt = -(A + G Q^{-1} G^T Y)^T eta + H^T R theta,  xhat_f = Y^{-1} eta.
	RobustFilterDesign robust_forward(const StateSpaceModel &ss, const Mat2 &K);

	/// Z A + A^T Z - Z G Q^{-1} G^T Z - K^T K + H^T R H = 0, with the reverse-time filter
	///   d(xi)/ds = (A - G Q^{-1} G^T Z)^T xi + H^T R theta,  xhat_b = Z^{-1} xi.
	RobustFilterDesign robust_backward(const StateSpaceModel &ss, const Mat2 &K);

	/// Smoothed estimate (Y + Z)^{-1} (Y xhat_f + Z xhat_b), i.e. (Y + Z)^{-1}(eta + xi) with
	/// xi integrated in reverse time.
	RobustSmoother robust_smoother(const Mat2 &Y, const Mat2 &Z);

	/// Full design at uncertainty structure u. On Riccati failure throws
	/// InfeasibleDesign carrying the largest feasible mu found by bisection.
	RobustDesign design_robust(const StateSpaceModel &ss, const UncertaintyStructure &u);

	/// Bisection (8 halvings) on [0, mu_hi] for the largest mu at which both robust
	/// Riccati equations admit stabilizing solutions. `K` is the structure at mu_hi.
	double largest_feasible_mu(const StateSpaceModel &ss, const Mat2 &K, double mu_hi);
} // namespace rsk
