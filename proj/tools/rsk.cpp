#include <rsk/cli.hpp>
#include <rsk/validation.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace
{
	struct Flags
	{
		std::string config;
		std::optional<std::string> state, estimators, out, smoother_model, deltas;
		std::optional<double> mu, dt, t_final;
		std::optional<int> grid, trials;
		std::optional<std::uint64_t> seed;
	};

	void add_run_flags(CLI::App *cmd, Flags &f, bool simulation)
	{
		cmd->add_option("--config", f.config, "config file (key = value); falls back to $RSK_CONFIG");
		cmd->add_option("--state", f.state, "coherent | squeezed");
		cmd->add_option("--mu", f.mu, "uncertainty level in [0, 1)");
		cmd->add_option("--estimators", f.estimators,
						"comma-separated subset of kalman_filter,rts_smoother,robust_filter,robust_smoother");
		cmd->add_option("--out", f.out, "output CSV path (default stdout)");
		cmd->add_option("--smoother-model", f.smoother_model, "combiner | scalar");
		cmd->add_option("--grid", f.grid, "odd number of delta points on [-1, 1]");
		if (simulation)
		{
			cmd->add_option("--dt", f.dt, "integration step (s)");
			cmd->add_option("--t-final", f.t_final, "record length (s)");
			cmd->add_option("--trials", f.trials, "independent records");
			cmd->add_option("--seed", f.seed, "base seed; trial i uses seed + i");
			cmd->add_option("--deltas", f.deltas, "comma-separated true-plant deltas");
		}
	}

	rsk::RunConfig resolve(const Flags &f)
	{
		rsk::RunConfig cfg;
		std::string path = f.config;
		if (path.empty())
		{
			if (const char *env = std::getenv("RSK_CONFIG"); env && *env)
				path = env;
		}
		if (!path.empty())
			rsk::load_config_file(cfg, path);

		auto set = [&](const char *key, const std::string &value) { rsk::apply_setting(cfg, key, value); };
		auto str = [](double x) {
			char buf[40];
			std::snprintf(buf, sizeof(buf), "%.17g", x);
			return std::string(buf);
		};
		if (f.state)
			set("state", *f.state);
		if (f.mu)
			set("mu", str(*f.mu));
		if (f.grid)
			set("grid", std::to_string(*f.grid));
		if (f.estimators)
			set("estimators", *f.estimators);
		if (f.out)
			set("out", *f.out);
		if (f.smoother_model)
			set("smoother_model", *f.smoother_model);
		if (f.dt)
			set("dt", str(*f.dt));
		if (f.t_final)
			set("t_final", str(*f.t_final));
		if (f.trials)
			set("trials", std::to_string(*f.trials));
		if (f.seed)
			set("seed", std::to_string(*f.seed));
		if (f.deltas)
			set("deltas", *f.deltas);
		cfg.validate();
		return cfg;
	}

	void emit(const rsk::RunConfig &cfg, const std::string &csv)
	{
		if (cfg.out.empty())
		{
			std::cout << csv;
			return;
		}
		std::ofstream os(cfg.out, std::ios::binary);
		os << csv;
		if (!os)
			throw rsk::Error(rsk::ErrorKind::ConfigError, "cannot write '" + cfg.out + "'");
	}
} // namespace

int main(int argc, char **argv)
{
	CLI::App app{"Robust and optimal phase smoothing: error sweeps, validation and Monte Carlo checks"};
	app.require_subcommand(1);

	Flags sweep_flags, mc_flags;
	CLI::App *sweep = app.add_subcommand("sweep", "analytic error of each estimator over delta in [-1, 1]");
	add_run_flags(sweep, sweep_flags, false);

	CLI::App *mc = app.add_subcommand("mc", "Monte Carlo check of the analytic errors");
	add_run_flags(mc, mc_flags, true);

	double kappa_scale = 1.0;
	CLI::App *validate = app.add_subcommand("validate", "run the acceptance suite on the built-in defaults");
	validate->add_option("--kappa-scale", kappa_scale)->group("");

	try
	{
		app.parse(argc, argv);
	}
	catch (const CLI::ParseError &e)
	{
		const int rc = app.exit(e);
		return rc == 0 ? rsk::kExitOk : rsk::kExitConfig;
	}

	try
	{
		if (*sweep)
		{
			const rsk::RunConfig cfg = resolve(sweep_flags);
			emit(cfg, rsk::sweep_csv(cfg));
		}
		else if (*mc)
		{
			const rsk::RunConfig cfg = resolve(mc_flags);
			emit(cfg, rsk::mc_csv(cfg));
		}
		else
		{
			rsk::ValidationOptions opts;
			opts.process.kappa *= kappa_scale;
			opts.cli_path = "/proc/self/exe";
			std::error_code ec;
			const std::string exe = std::filesystem::read_symlink("/proc/self/exe", ec).string();
			if (!ec)
				opts.cli_path = exe;
			const rsk::ValidationSummary summary = rsk::run_validation(opts);
			std::cout << rsk::format_table(summary) << '\n';
			for (int c = 1; c <= rsk::kCriteria; ++c)
				std::cout << "criterion " << c << ": " << (summary.criterion_pass(c) ? "PASS" : "FAIL") << '\n';
			return summary.all_pass() ? rsk::kExitOk : rsk::kExitValidation;
		}
	}
	catch (const rsk::InfeasibleDesign &e)
	{
		std::cerr << "rsk: " << e.what() << '\n';
		return rsk::kExitInfeasible;
	}
	catch (const rsk::Error &e)
	{
		std::cerr << "rsk: " << e.what() << '\n';
		return rsk::kExitConfig;
	}
	return rsk::kExitOk;
}
