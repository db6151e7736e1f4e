#include <rsk/optimal.hpp>

#include <Eigen/Cholesky>

namespace rsk
{
	namespace
	{
		Mat2 spd_inverse(const Mat2 &p, const char *what)
		{
			Eigen::SelfAdjointEigenSolver<Mat2> es(p);
			const double lo = es.eigenvalues().minCoeff();
			const double hi = es.eigenvalues().maxCoeff();
			if (!(lo > 0) || hi / lo > 1e12)
				throw Error(ErrorKind::SingularMatrix, std::string(what) + " is not safely positive definite");
			Eigen::LLT<Mat2> llt(p);
			if (llt.info() != Eigen::Success)
				throw Error(ErrorKind::SingularMatrix, std::string(what) + ": Cholesky failed");
			Mat2 inv = llt.solve(Mat2::Identity());
			return 0.5 * (inv + inv.transpose());
		}

		// Both Kalman Riccati equations are the dual CARE on (+/-A^T):
		//   (+/-A) P + P (+/-A)^T + G N G^T - P H^T (J S J^T)^{-1} H P = 0
		// i.e. solve_care(a = +/-A^T, s = H^T H / JSJ^T, q = G N G^T).
		KalmanDesign kalman_design(const StateSpaceModel &ss, double sign, Direction direction)
		{
			const double meas_intensity = ss.J * ss.S * ss.J;
			if (!(meas_intensity > 0))
				throw Error(ErrorKind::InvalidArgument, "measurement noise intensity must be positive");

			const Mat2 a = sign * ss.A.transpose();
			const Mat2 s = ss.H.transpose() * ss.H / meas_intensity;
			const Mat2 q = ss.G * ss.N * ss.G.transpose();

			KalmanDesign d;
			d.riccati = solve_care<double>(a, s, q);
			d.P = d.riccati.X;
			d.K = d.P * ss.H.transpose() / meas_intensity;
			// The innovation form K H x + K J w is grouped as K * theta.
			d.realization = make_realization(sign * ss.A - d.K * ss.H, d.K, direction);
			return d;
		}
	} // namespace

	FilterRealization make_realization(const Mat2 &dynamics, const Vec2 &gain, Direction direction)
	{
		if (!is_hurwitz(dynamics))
			throw Error(ErrorKind::UnstableMatrix, "filter dynamics are not Hurwitz in their integration direction");
		return FilterRealization{dynamics, gain, direction};
	}

	KalmanDesign kalman_forward(const StateSpaceModel &ss)
	{
		return kalman_design(ss, 1.0, Direction::forward);
	}

	KalmanDesign kalman_backward(const StateSpaceModel &ss)
	{
		return kalman_design(ss, -1.0, Direction::backward);
	}

	Mat2 rts_smoother_covariance(const Mat2 &P_f, const Mat2 &P_b)
	{
		const Mat2 info = spd_inverse(P_f, "P_f") + spd_inverse(P_b, "P_b");
		return spd_inverse(info, "P_f^-1 + P_b^-1");
	}

	Combiner rts_combiner(const Mat2 &P_f, const Mat2 &P_b)
	{
		const Mat2 ps = rts_smoother_covariance(P_f, P_b);
		return {ps * spd_inverse(P_f, "P_f"), ps * spd_inverse(P_b, "P_b")};
	}
} // namespace rsk
