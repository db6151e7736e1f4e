#pragma once

// Acceptance suite shared by `rsk validate` and the acceptance test binary.

#include <rsk/model.hpp>

#include <functional>
#include <string>
#include <vector>

namespace rsk
{
	struct CheckResult
	{
		int criterion = 0;
		std::string claim;
		std::string computed;
		std::string tolerance;
		bool pass = false;
		bool informational = false; ///< reported, never counted
	};

	struct ValidationOptions
	{
		ResonantParams process = DefaultParameters::resonant();
		SqueezingParams beam = DefaultParameters::squeezing();
		/// When set, determinism is checked by running this executable twice;
		/// otherwise in-process.
		std::string cli_path;
		std::string scratch_dir = "/tmp";
		std::function<void(const CheckResult &)> on_check;
	};

	struct ValidationSummary
	{
		std::vector<CheckResult> checks;

		bool criterion_pass(int criterion) const;
		bool all_pass() const;
	};

	inline constexpr int kCriteria = 9;

	ValidationSummary run_validation(const ValidationOptions &opts);

	/// "claim | computed | tolerance | verdict" rows.
	std::string format_table(const ValidationSummary &summary);
} // namespace rsk
