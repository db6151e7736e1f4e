#include <rsk/cli.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace rsk
{
	namespace
	{
		Error config_error(const std::string &what) { return Error(ErrorKind::ConfigError, what); }

		std::string_view trim(std::string_view s)
		{
			const auto b = s.find_first_not_of(" \t\r");
			if (b == std::string_view::npos)
				return {};
			const auto e = s.find_last_not_of(" \t\r");
			return s.substr(b, e - b + 1);
		}

		std::vector<std::string_view> split(std::string_view s, char sep)
		{
			std::vector<std::string_view> parts;
			std::size_t start = 0;
			while (true)
			{
				const auto pos = s.find(sep, start);
				parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
				if (pos == std::string_view::npos)
					break;
				start = pos + 1;
			}
			return parts;
		}

		double parse_double(std::string_view key, std::string_view value)
		{
			const std::string v(trim(value));
			double x = 0;
			const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
			if (v.empty() || ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(x))
				throw config_error(std::string(key) + ": not a finite number: '" + v + "'");
			return x;
		}

		long long parse_integer(std::string_view key, std::string_view value)
		{
			const std::string v(trim(value));
			long long x = 0;
			const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
			if (v.empty() || ec != std::errc() || ptr != v.data() + v.size())
				throw config_error(std::string(key) + ": not an integer: '" + v + "'");
			return x;
		}

		std::string exact(double x)
		{
			char buf[40];
			std::snprintf(buf, sizeof(buf), "%.17g", x);
			return buf;
		}

		std::string join_estimators(const std::vector<EstimatorKind> &kinds)
		{
			std::string s;
			for (EstimatorKind k : kinds)
			{
				if (!s.empty())
					s += ',';
				s += to_string(k);
			}
			return s;
		}

		bool selected(const RunConfig &cfg, EstimatorKind k)
		{
			for (EstimatorKind e : cfg.estimators)
				if (e == k)
					return true;
			return false;
		}

		void write_config_block(std::ostringstream &os, const RunConfig &cfg)
		{
			for (const auto &[k, v] : config_entries(cfg))
				os << "# config: " << k << " = " << v << '\n';
		}
	} // namespace

	Scenario RunConfig::scenario() const
	{
		Scenario sc;
		sc.process = process;
		sc.beam = beam;
		sc.mu = mu;
		sc.state = state;
		sc.smoother_model = smoother_model;
		return sc;
	}

	void RunConfig::validate() const
	{
		try
		{
			process.validate();
			beam.validate();
		}
		catch (const Error &e)
		{
			throw config_error(e.what());
		}
		if (!(mu >= 0 && mu < 1))
			throw config_error("mu: must lie in [0, 1), got " + exact(mu));
		if (grid < 1 || grid % 2 == 0)
			throw config_error("grid: must be a positive odd integer, got " + std::to_string(grid));
		if (estimators.empty())
			throw config_error("estimators: at least one estimator is required");
		if (mc_deltas.empty())
			throw config_error("deltas: at least one delta is required");
		for (double d : mc_deltas)
			if (!(std::abs(d) <= 1))
				throw config_error("deltas: |delta| must not exceed 1, got " + exact(d));
		try
		{
			sim.validate(process.omega_r);
		}
		catch (const Error &e)
		{
			throw config_error(e.what());
		}
	}

	void apply_setting(RunConfig &cfg, std::string_view key_in, std::string_view value_in)
	{
		const std::string key(trim(key_in));
		const std::string_view value = trim(value_in);

		if (key == "kappa")
			cfg.process.kappa = parse_double(key, value);
		else if (key == "zeta")
			cfg.process.zeta = parse_double(key, value);
		else if (key == "omega_r")
			cfg.process.omega_r = parse_double(key, value);
		else if (key == "alpha")
			cfg.beam.alpha_mag = parse_double(key, value);
		else if (key == "r_m")
			cfg.beam.r_m = parse_double(key, value);
		else if (key == "r_p")
			cfg.beam.r_p = parse_double(key, value);
		else if (key == "mu")
			cfg.mu = parse_double(key, value);
		else if (key == "state")
		{
			const auto s = parse_state(value);
			if (!s)
				throw config_error("state: expected coherent or squeezed, got '" + std::string(value) + "'");
			cfg.state = *s;
		}
		else if (key == "grid")
		{
			const long long n = parse_integer(key, value);
			if (n < 1 || n > 1000001)
				throw config_error("grid: out of range: " + std::string(value));
			cfg.grid = static_cast<int>(n);
		}
		else if (key == "estimators")
		{
			std::vector<EstimatorKind> kinds;
			for (std::string_view name : split(value, ','))
			{
				const auto k = parse_estimator(name);
				if (!k)
					throw config_error("estimators: unknown estimator '" + std::string(name) + "'");
				bool dup = false;
				for (EstimatorKind e : kinds)
					dup = dup || e == *k;
				if (!dup)
					kinds.push_back(*k);
			}
			cfg.estimators = std::move(kinds);
		}
		else if (key == "smoother_model")
		{
			const auto m = parse_smoother_model(value);
			if (!m)
				throw config_error("smoother_model: expected combiner or scalar, got '" + std::string(value) + "'");
			cfg.smoother_model = *m;
		}
		else if (key == "dt")
			cfg.sim.dt = parse_double(key, value);
		else if (key == "t_final")
			cfg.sim.t_final = parse_double(key, value);
		else if (key == "trials")
		{
			const long long n = parse_integer(key, value);
			if (n < 1 || n > 100000)
				throw config_error("trials: out of range: " + std::string(value));
			cfg.sim.trials = static_cast<int>(n);
		}
		else if (key == "seed")
		{
			const long long n = parse_integer(key, value);
			if (n < 0)
				throw config_error("seed: must be non-negative");
			cfg.sim.seed = static_cast<std::uint64_t>(n);
		}
		else if (key == "discard_fraction")
			cfg.sim.discard_fraction = parse_double(key, value);
		else if (key == "integrator")
		{
			if (value == "exact")
				cfg.sim.integrator = Integrator::exact;
			else if (value == "euler_maruyama")
				cfg.sim.integrator = Integrator::euler_maruyama;
			else
				throw config_error("integrator: expected exact or euler_maruyama, got '" + std::string(value) + "'");
		}
		else if (key == "deltas")
		{
			std::vector<double> deltas;
			for (std::string_view d : split(value, ','))
				deltas.push_back(parse_double(key, d));
			cfg.mc_deltas = std::move(deltas);
		}
		else if (key == "out")
			cfg.out = std::string(value);
		else
			throw config_error("unknown key '" + key + "'");
	}

	void load_config_text(RunConfig &cfg, std::string_view text, const std::string &origin)
	{
		constexpr std::string_view marker = "# config:";
		std::vector<std::string_view> lines = split(text, '\n');

		bool embedded = false;
		for (std::string_view line : lines)
			embedded = embedded || line.starts_with(marker);

		int lineno = 0;
		for (std::string_view raw : lines)
		{
			++lineno;
			std::string_view line = raw;
			if (embedded)
			{
				if (!line.starts_with(marker))
					continue;
				line = line.substr(marker.size());
			}
			else
			{
				const auto hash = line.find('#');
				if (hash != std::string_view::npos)
					line = line.substr(0, hash);
			}
			line = trim(line);
			if (line.empty())
				continue;
			const auto eq = line.find('=');
			if (eq == std::string_view::npos)
				throw config_error(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
			try
			{
				apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
			}
			catch (const Error &e)
			{
				throw config_error(origin + ":" + std::to_string(lineno) + ": " + e.what());
			}
		}
	}

	void load_config_file(RunConfig &cfg, const std::string &path)
	{
		std::ifstream in(path, std::ios::binary);
		if (!in)
			throw config_error("cannot open config file '" + path + "'");
		std::ostringstream ss;
		ss << in.rdbuf();
		load_config_text(cfg, ss.str(), path);
	}

	std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig &cfg)
	{
		std::string deltas;
		for (double d : cfg.mc_deltas)
		{
			if (!deltas.empty())
				deltas += ',';
			deltas += exact(d);
		}
		return {
			{"kappa", exact(cfg.process.kappa)},
			{"zeta", exact(cfg.process.zeta)},
			{"omega_r", exact(cfg.process.omega_r)},
			{"alpha", exact(cfg.beam.alpha_mag)},
			{"r_m", exact(cfg.beam.r_m)},
			{"r_p", exact(cfg.beam.r_p)},
			{"mu", exact(cfg.mu)},
			{"state", to_string(cfg.state)},
			{"grid", std::to_string(cfg.grid)},
			{"estimators", join_estimators(cfg.estimators)},
			{"smoother_model", to_string(cfg.smoother_model)},
			{"dt", exact(cfg.sim.dt)},
			{"t_final", exact(cfg.sim.t_final)},
			{"trials", std::to_string(cfg.sim.trials)},
			{"seed", std::to_string(cfg.sim.seed)},
			{"discard_fraction", exact(cfg.sim.discard_fraction)},
			{"integrator", to_string(cfg.sim.integrator)},
			{"deltas", deltas},
		};
	}

	std::string format_number(double x)
	{
		char buf[40];
		std::snprintf(buf, sizeof(buf), "%.9g", x);
		return buf;
	}

	std::string sweep_csv(const RunConfig &cfg)
	{
		cfg.validate();
		const Scenario sc = cfg.scenario();
		const std::vector<double> grid = uniform_grid(cfg.grid);
		const ErrorReport report = sweep_delta(sc, grid);

		std::ostringstream os;
		os << kSweepHeader << '\n';
		for (const ErrorRow &row : report.rows)
		{
			os << format_number(row.delta) << ',' << format_number(row.mu) << ',' << to_string(row.state);
			for (EstimatorKind k : kAllEstimators)
			{
				os << ',';
				if (selected(cfg, k))
					os << format_number(row.error(k));
			}
			for (EstimatorKind k : kAllEstimators)
			{
				os << ',';
				if (selected(cfg, k))
					os << format_number(to_db(row.error(k)));
			}
			os << '\n';
		}

		os << "# rsk sweep\n";
		write_config_block(os, cfg);
		os << "# units: err_* in rad^2, db_* = 10 log10(err_*)\n";
		os << "# convention: estimators designed on the nominal plant, evaluated on A + G [delta, 0] K,"
			  " K = [[-mu omega_r^2 / kappa, 0], [0, 0]]\n";
		os << "# convention: smoother error model = " << to_string(cfg.smoother_model) << '\n';
		if (cfg.state == StateKind::squeezed)
			os << "# convention: squeezed rows use the loop filter's own fixed point"
				  " (Kalman filter for kalman/rts columns, robust filter for robust columns)\n";
		for (EstimatorKind k : cfg.estimators)
		{
			const WorstCase wc = worst_case(report, k);
			os << "# worst_case: " << to_string(k) << " delta = " << format_number(wc.delta)
			   << " err = " << format_number(wc.error) << " db = " << format_number(to_db(wc.error)) << '\n';
		}
		const ReportDiagnostics &d = report.diagnostics;
		os << "# diagnostics: max_riccati_residual = " << format_number(d.max_riccati_residual)
		   << " max_lyapunov_residual = " << format_number(d.max_lyapunov_residual);
		if (cfg.state == StateKind::squeezed)
			os << " max_fixed_point_iterations = " << d.max_fixed_point_iterations
			   << " max_fixed_point_step = " << format_number(d.max_fixed_point_step);
		os << '\n';
		return os.str();
	}

	std::string mc_csv(const RunConfig &cfg)
	{
		cfg.validate();
		const Scenario sc = cfg.scenario();

		std::vector<McPoint> points;
		for (double delta : cfg.mc_deltas)
			points.push_back(monte_carlo_point(sc, delta, cfg.sim, cfg.estimators));

		std::ostringstream os;
		os << kMcHeader << '\n';
		for (const McPoint &p : points)
		{
			for (const McEstimatorResult &r : p.results)
			{
				os << to_string(r.kind) << ',' << format_number(p.delta) << ',' << format_number(p.mu) << ','
				   << format_number(r.analytic) << ',' << format_number(r.empirical.mse) << ','
				   << format_number(r.empirical.std_error) << ',' << format_number(r.z_score) << '\n';
			}
		}

		os << "# rsk mc\n";
		write_config_block(os, cfg);
		os << "# units: mse in rad^2; z_score = (empirical - analytic) / std_error\n";
		os << "# convention: trial i uses mt19937_64 seeded with seed + i; truth integrator = "
		   << to_string(cfg.sim.integrator) << "; filters discretized by zero-order hold\n";
		os << "# convention: std_error is the between-trial standard error"
			  " (8-block jackknife when trials = 1)\n";
		for (const McPoint &p : points)
		{
			for (const McEstimatorResult &r : p.results)
			{
				os << "# per_trial: " << to_string(r.kind) << " delta = " << format_number(p.delta) << " mse =";
				for (double m : r.empirical.per_trial)
					os << ' ' << format_number(m);
				os << '\n';
			}
		}
		return os.str();
	}
} // namespace rsk
