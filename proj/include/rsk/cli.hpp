#pragma once

// Run configuration and CSV emission shared by the `rsk` executable and the
// acceptance suite.
//
// Config files are flat `key = value` lines; `#` starts a comment. Files written by
// `sweep`/`mc` embed their effective configuration as `# config: key = value`
// lines; when a file contains such lines only those are read, so an output CSV can
// be passed back through --config to reproduce it.
//
// Precedence: built-in defaults < config file (--config, else $RSK_CONFIG) < flags.

#include <rsk/analysis.hpp>
#include <rsk/montecarlo.hpp>

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rsk
{
	struct RunConfig
	{
		ResonantParams process = DefaultParameters::resonant();
		SqueezingParams beam = DefaultParameters::squeezing();
		double mu = 0.5;
		StateKind state = StateKind::coherent;
		int grid = 201;
		std::vector<EstimatorKind> estimators{kAllEstimators.begin(), kAllEstimators.end()};
		SmootherErrorModel smoother_model = SmootherErrorModel::combiner;
		SimConfig sim;
		std::vector<double> mc_deltas{0.0};
		std::string out; ///< empty: stdout

		Scenario scenario() const;
		/// Throws Error(ConfigError) naming the offending key.
		void validate() const;
	};

	/// Applies one `key = value` setting. Throws Error(ConfigError) on unknown keys or bad values.
	void apply_setting(RunConfig &cfg, std::string_view key, std::string_view value);

	void load_config_text(RunConfig &cfg, std::string_view text, const std::string &origin = "<text>");
	void load_config_file(RunConfig &cfg, const std::string &path);

	/// Every setting needed to reproduce a run, values printed to round-trip exactly.
	std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig &cfg);

	/// %.9g with '.' as decimal separator.
	std::string format_number(double x);

	/// CSV: delta,mu,state,err_*,db_* (one row per grid point) followed by a `#` block
	/// with configuration, conventions and worst cases. Unselected estimators leave
	/// their columns empty.
	std::string sweep_csv(const RunConfig &cfg);

	/// CSV: estimator,delta,mu,analytic_mse,empirical_mse,std_error,z_score followed by
	/// a `#` block with configuration and per-trial MSEs.
	std::string mc_csv(const RunConfig &cfg);

	inline constexpr const char *kSweepHeader =
		"delta,mu,state,err_kalman_filter,err_rts_smoother,err_robust_filter,err_robust_smoother,"
		"db_kalman_filter,db_rts_smoother,db_robust_filter,db_robust_smoother";
	inline constexpr const char *kMcHeader = "estimator,delta,mu,analytic_mse,empirical_mse,std_error,z_score";

	/// Process exit codes.
	enum ExitCode : int
	{
		kExitOk = 0,
		kExitConfig = 1,
		kExitInfeasible = 2,
		kExitValidation = 3,
	};
} // namespace rsk
