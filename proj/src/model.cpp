#include <rsk/model.hpp>

#include <cmath>
#include <string>

namespace rsk
{
	void ResonantParams::validate() const
	{
		if (!(kappa > 0) || !std::isfinite(kappa))
			throw Error(ErrorKind::InvalidArgument, "kappa must be positive");
		if (!(zeta > 0 && zeta < 1))
			throw Error(ErrorKind::InvalidArgument, "zeta must lie in (0, 1)");
		if (!(omega_r > 0) || !std::isfinite(omega_r))
			throw Error(ErrorKind::InvalidArgument, "omega_r must be positive");
	}

	void SqueezingParams::validate() const
	{
		if (!(alpha_mag > 0) || !std::isfinite(alpha_mag))
			throw Error(ErrorKind::InvalidArgument, "alpha_mag must be positive");
		if (!(r_m >= 0) || !(r_p >= r_m) || !std::isfinite(r_p))
			throw Error(ErrorKind::InvalidArgument, "need 0 <= r_m <= r_p");
	}

	ProcessModel build_process(const ResonantParams &p)
	{
		p.validate();
		ProcessModel m;
		m.A << 0.0, 1.0,
			-p.omega_r * p.omega_r, -2.0 * p.zeta * p.omega_r;
		m.G << 0.0, p.kappa;
		return m;
	}

	double frequency_response_mag(const ResonantParams &p, double omega)
	{
		p.validate();
		if (!(omega >= 0))
			throw Error(ErrorKind::InvalidArgument, "omega must be non-negative");
		if (std::isinf(omega))
			return 0.0;
		const double wr2 = p.omega_r * p.omega_r;
		const double re = wr2 - omega * omega;
		const double im = 2.0 * p.zeta * p.omega_r * omega;
		return p.kappa / std::hypot(re, im);
	}

	double frequency_response_db(const ResonantParams &p, double omega)
	{
		return 20.0 * std::log10(frequency_response_mag(p, omega));
	}

	MeasurementModel build_coherent_measurement(double alpha_mag)
	{
		if (!(alpha_mag > 0) || !std::isfinite(alpha_mag))
			throw Error(ErrorKind::InvalidArgument, "alpha_mag must be positive");
		MeasurementModel m;
		m.H << 2.0 * alpha_mag, 0.0;
		m.J = 1.0;
		return m;
	}

	SqueezedMeasurement build_squeezed_measurement(const SqueezingParams &sq, double sigma_f_sq)
	{
		sq.validate();
		// The linearized photocurrent model is only used for sigma_f^2 in [0, 1].
		if (!(sigma_f_sq >= 0) || sigma_f_sq > 1)
			throw Error(ErrorKind::InvalidArgument,
						"sigma_f_sq = " + std::to_string(sigma_f_sq) + " outside [0, 1]");
		SqueezedMeasurement m;
		m.R_sq = sigma_f_sq * std::exp(2.0 * sq.r_p) + (1.0 - sigma_f_sq) * std::exp(-2.0 * sq.r_m);
		if (!(m.R_sq > 0))
			throw Error(ErrorKind::NonPositiveRsq, "R_sq <= 0");
		m.H << 2.0 * sq.alpha_mag / std::sqrt(m.R_sq), 0.0;
		m.J = 1.0;
		return m;
	}

	UncertaintyStructure build_uncertainty(const ResonantParams &p, double mu)
	{
		p.validate();
		if (!(mu >= 0 && mu < 1))
			throw Error(ErrorKind::InvalidArgument, "mu must lie in [0, 1)");
		UncertaintyStructure u;
		u.K(0, 0) = -mu * p.omega_r * p.omega_r / p.kappa;
		u.mu = mu;
		u.delta_bound = 1.0;
		return u;
	}

	Mat2 apply_uncertainty(const Mat2 &a, const Vec2 &g, const UncertaintyStructure &u, double delta)
	{
		if (!(std::abs(delta) <= u.delta_bound))
			throw Error(ErrorKind::DeltaOutOfRange, "|delta| = " + std::to_string(std::abs(delta)) + " > bound");
		const RowVec2 Delta(delta, 0.0);
		return a + g * Delta * u.K;
	}

	StateSpaceModel make_model(const ProcessModel &process, const MeasurementModel &meas)
	{
		StateSpaceModel ss;
		ss.A = process.A;
		ss.G = process.G;
		ss.H = meas.H;
		ss.J = meas.J;
		return ss;
	}

	StateSpaceModel make_model(const ProcessModel &process, const SqueezedMeasurement &meas)
	{
		return make_model(process, MeasurementModel{meas.H, meas.J});
	}
} // namespace rsk
