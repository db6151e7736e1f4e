#pragma once

#include <rsk/common.hpp>

namespace rsk
{
	/// Second-order resonant noise process G(s) = kappa / (s^2 + 2 zeta omega_r s + omega_r^2).
	/// kappa is the gain from unit-intensity white noise to d^2(phi)/dt^2.
	struct ResonantParams
	{
		double kappa = 0;
		double zeta = 0;
		double omega_r = 0; ///< rad/s

		void validate() const;
	};

	/// Amplitude and (anti-)squeezing of the input beam.
	struct SqueezingParams
	{
		double alpha_mag = 0; ///< coherent amplitude |alpha|, photon flux |alpha|^2
		double r_m = 0;		  ///< squeezing, >= 0
		double r_p = 0;		  ///< anti-squeezing, >= r_m

		void validate() const;
	};

	/// Reference parameter set (PZT resonance at 1 kHz, |alpha| = 500, r_m = 0.36, r_p = 0.59).
	struct DefaultParameters
	{
		static constexpr int version = 1;
		static constexpr double kappa = 9e4;
		static constexpr double zeta = 0.1;
		static constexpr double omega_r = 6.283e3;
		static constexpr double alpha_mag = 5e2;
		static constexpr double r_m = 0.36;
		static constexpr double r_p = 0.59;

		static ResonantParams resonant() { return {kappa, zeta, omega_r}; }
		static SqueezingParams squeezing() { return {alpha_mag, r_m, r_p}; }
	};

	/// x = (phi, dphi/dt), dx/dt = A x + G v.
	struct ProcessModel
	{
		Mat2 A;
		Vec2 G;
	};

	/// theta = H x + J w.
	struct MeasurementModel
	{
		RowVec2 H;
		double J = 1;
	};

	struct SqueezedMeasurement
	{
		RowVec2 H;
		double J = 1;
		double R_sq = 1;
	};

	/// Process plus measurement with unit noise intensities N = S = 1.
	struct StateSpaceModel
	{
		Mat2 A;
		Vec2 G;
		RowVec2 H;
		double J = 1;
		double N = 1;
		double S = 1;
	};

	/// A + G Delta K with Delta = [delta, 0], |delta| <= delta_bound.
	struct UncertaintyStructure
	{
		Mat2 K = Mat2::Zero();
		double mu = 0;
		double delta_bound = 1;
	};

	ProcessModel build_process(const ResonantParams &p);

	/// |G(j omega)|.
	double frequency_response_mag(const ResonantParams &p, double omega);
	/// 20 log10 |G(j omega)|.
	double frequency_response_db(const ResonantParams &p, double omega);

	MeasurementModel build_coherent_measurement(double alpha_mag);

	/// R_sq = s e^{2 r_p} + (1 - s) e^{-2 r_m} with s = sigma_f_sq in [0, 1];
	/// H = [2|alpha| / sqrt(R_sq), 0].
	SqueezedMeasurement build_squeezed_measurement(const SqueezingParams &sq, double sigma_f_sq);

	UncertaintyStructure build_uncertainty(const ResonantParams &p, double mu);

	/// A + G Delta K.
	Mat2 apply_uncertainty(const Mat2 &a, const Vec2 &g, const UncertaintyStructure &u, double delta);

	StateSpaceModel make_model(const ProcessModel &process, const MeasurementModel &meas);
	StateSpaceModel make_model(const ProcessModel &process, const SqueezedMeasurement &meas);
} // namespace rsk
