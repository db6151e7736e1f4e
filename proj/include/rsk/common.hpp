#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace rsk
{
	using Mat2 = Eigen::Matrix2d;
	using Vec2 = Eigen::Vector2d;
	using RowVec2 = Eigen::RowVector2d;
	using Mat4 = Eigen::Matrix4d;
	using Mat42 = Eigen::Matrix<double, 4, 2>;

	enum class ErrorKind
	{
		InvalidArgument,
		ImaginaryAxisEigenvalue,
		NonConvergence,
		UnstableMatrix,
		SingularMatrix,
		InfeasibleUncertaintyLevel,
		UnstableAugmentedSystem,
		DegenerateDenominator,
		DeltaOutOfRange,
		NonPositiveRsq,
		NonPositiveInput,
		EmptyWindow,
		ConfigError,
	};

	const char *to_string(ErrorKind kind);

	class Error : public std::runtime_error
	{
	public:
		Error(ErrorKind kind, const std::string &what)
			: std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
		{
		}

		ErrorKind kind() const noexcept { return kind_; }

	private:
		ErrorKind kind_;
	};

	/// Raised when the robust Riccati equations have no stabilizing solution at the
	/// requested uncertainty level. Carries the largest level found feasible.
	class InfeasibleDesign : public Error
	{
	public:
		InfeasibleDesign(double requested_mu, double largest_feasible_mu, const std::string &detail);

		double requested_mu() const noexcept { return requested_mu_; }
		double largest_feasible_mu() const noexcept { return largest_feasible_mu_; }

	private:
		double requested_mu_;
		double largest_feasible_mu_;
	};
} // namespace rsk
