#include <rsk/robust.hpp>

namespace rsk
{
	namespace
	{
		Mat2 invert_checked(const Mat2 &m, ErrorKind kind, const char *what)
		{
			Eigen::FullPivLU<Mat2> lu(m);
			if (!lu.isInvertible() || lu.rcond() < 1e-14)
				throw Error(kind, std::string(what) + " is singular");
			return lu.inverse();
		}

		struct Canonical
		{
			Mat2 s;
			Mat2 q;
		};

		Canonical iqc_terms(const StateSpaceModel &ss, const Mat2 &K)
		{
			return {ss.G * (1.0 / kIqcQ) * ss.G.transpose(),
					ss.H.transpose() * kIqcR * ss.H - K.transpose() * K};
		}
	} // namespace

	RobustFilterDesign robust_forward(const StateSpaceModel &ss, const Mat2 &K)
	{
		const Canonical c = iqc_terms(ss, K);
		// Negating the equation gives (-A)^T Y + Y (-A) - Y S Y + (H^T R H - K^T K) = 0;
		// its stabilizing solution makes -(A + S Y) Hurwitz, which is exactly the eta dynamics.
		RobustFilterDesign d;
		d.riccati = solve_care<double>(-ss.A, c.s, c.q);
		const Mat2 Y = d.riccati.X;
		const Mat2 Yi = invert_checked(Y, ErrorKind::SingularMatrix, "Y");
		const Mat2 eta_dynamics = -(ss.A + c.s * Y).transpose();
		d.realization = make_realization(Yi * eta_dynamics * Y, Yi * ss.H.transpose() * kIqcR, Direction::forward);
		return d;
	}

	RobustFilterDesign robust_backward(const StateSpaceModel &ss, const Mat2 &K)
	{
		const Canonical c = iqc_terms(ss, K);
		// Already canonical: A^T Z + Z A - Z S Z + (H^T R H - K^T K) = 0, stabilizing
		// solution makes A - S Z Hurwitz, i.e. the xi dynamics are stable in reverse time.
		RobustFilterDesign d;
		d.riccati = solve_care<double>(ss.A, c.s, c.q);
		const Mat2 Z = d.riccati.X;
		const Mat2 Zi = invert_checked(Z, ErrorKind::SingularMatrix, "Z");
		const Mat2 xi_dynamics = (ss.A - c.s * Z).transpose();
		d.realization = make_realization(Zi * xi_dynamics * Z, Zi * ss.H.transpose() * kIqcR, Direction::backward);
		return d;
	}

	RobustSmoother robust_smoother(const Mat2 &Y, const Mat2 &Z)
	{
		const Mat2 proxy = invert_checked(Y + Z, ErrorKind::SingularMatrix, "Y + Z");
		RobustSmoother out;
		out.covariance_proxy = 0.5 * (proxy + proxy.transpose());
		out.combiner.forward = proxy * Y;
		out.combiner.backward = Mat2::Identity() - out.combiner.forward;
		return out;
	}

	double largest_feasible_mu(const StateSpaceModel &ss, const Mat2 &K, double mu_hi)
	{
		if (!(mu_hi > 0))
			return 0.0;
		const auto feasible = [&](double mu)
		{
			const Mat2 k = K * (mu / mu_hi);
			try
			{
				robust_forward(ss, k);
				robust_backward(ss, k);
				return true;
			}
			catch (const Error &)
			{
				return false;
			}
		};
		double lo = 0.0, hi = mu_hi;
		if (!feasible(lo))
			return 0.0;
		for (int i = 0; i < 8; ++i)
		{
			const double mid = 0.5 * (lo + hi);
			(feasible(mid) ? lo : hi) = mid;
		}
		return lo;
	}

	RobustDesign design_robust(const StateSpaceModel &ss, const UncertaintyStructure &u)
	{
		RobustDesign d;
		d.mu = u.mu;
		try
		{
			d.forward = robust_forward(ss, u.K);
			d.backward = robust_backward(ss, u.K);
		}
		catch (const Error &e)
		{
			if (e.kind() == ErrorKind::InvalidArgument)
				throw;
			throw InfeasibleDesign(u.mu, largest_feasible_mu(ss, u.K, u.mu), e.what());
		}
		d.smoother = robust_smoother(d.forward.riccati.X, d.backward.riccati.X);
		return d;
	}
} // namespace rsk
