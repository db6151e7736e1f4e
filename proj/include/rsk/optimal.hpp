#pragma once

#include <rsk/model.hpp>
#include <rsk/solvers.hpp>

namespace rsk
{
	enum class Direction
	{
		forward,
		backward
	};

	/// Linear estimator d(xhat)/ds = dynamics * xhat + gain * theta, in state-estimate
	/// coordinates. For backward realizations s runs from T down to 0, so
	/// `dynamics` is the reverse-time matrix and must be Hurwitz either way.
	struct FilterRealization
	{
		Mat2 dynamics;
		Vec2 gain;
		Direction direction = Direction::forward;
	};

	FilterRealization make_realization(const Mat2 &dynamics, const Vec2 &gain, Direction direction);

	/// Smoothed estimate = forward * xhat_f + backward * xhat_b.
	struct Combiner
	{
		Mat2 forward;
		Mat2 backward;
	};

	struct KalmanDesign
	{
		RiccatiSolution<double> riccati;
		Mat2 P;
		Vec2 K;
		FilterRealization realization;
	};

	KalmanDesign kalman_forward(const StateSpaceModel &ss);
	KalmanDesign kalman_backward(const StateSpaceModel &ss);

	/// (P_f^{-1} + P_b^{-1})^{-1}; rejects covariances with condition number above 1e12.
	Mat2 rts_smoother_covariance(const Mat2 &P_f, const Mat2 &P_b);

	/// Weights (P_s P_f^{-1}, P_s P_b^{-1}).
	Combiner rts_combiner(const Mat2 &P_f, const Mat2 &P_b);
} // namespace rsk
