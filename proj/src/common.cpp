#include <rsk/common.hpp>

#include <cstdio>

namespace rsk
{
	const char *to_string(ErrorKind kind)
	{
		switch (kind)
		{
		case ErrorKind::InvalidArgument: return "InvalidArgument";
		case ErrorKind::ImaginaryAxisEigenvalue: return "ImaginaryAxisEigenvalue";
		case ErrorKind::NonConvergence: return "NonConvergence";
		case ErrorKind::UnstableMatrix: return "UnstableMatrix";
		case ErrorKind::SingularMatrix: return "SingularMatrix";
		case ErrorKind::InfeasibleUncertaintyLevel: return "InfeasibleUncertaintyLevel";
		case ErrorKind::UnstableAugmentedSystem: return "UnstableAugmentedSystem";
		case ErrorKind::DegenerateDenominator: return "DegenerateDenominator";
		case ErrorKind::DeltaOutOfRange: return "DeltaOutOfRange";
		case ErrorKind::NonPositiveRsq: return "NonPositiveRsq";
		case ErrorKind::NonPositiveInput: return "NonPositiveInput";
		case ErrorKind::EmptyWindow: return "EmptyWindow";
		case ErrorKind::ConfigError: return "ConfigError";
		}
		return "Unknown";
	}

	namespace
	{
		std::string infeasible_message(double requested, double feasible, const std::string &detail)
		{
			char buf[160];
			std::snprintf(buf, sizeof(buf), "no stabilizing robust Riccati solution at mu=%.6g; largest feasible mu ~ %.6g",
						  requested, feasible);
			return detail.empty() ? std::string(buf) : std::string(buf) + " (" + detail + ")";
		}
	} // namespace

	InfeasibleDesign::InfeasibleDesign(double requested_mu, double largest_feasible_mu, const std::string &detail)
		: Error(ErrorKind::InfeasibleUncertaintyLevel, infeasible_message(requested_mu, largest_feasible_mu, detail)),
		  requested_mu_(requested_mu), largest_feasible_mu_(largest_feasible_mu)
	{
	}
} // namespace rsk
