#include <rsk/validation.hpp>

#include <rsk/analysis.hpp>
#include <rsk/cli.hpp>
#include <rsk/montecarlo.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace rsk
{
	namespace
	{
		// Displayed smoother covariance for the default resonant plant and coherent beam.
		constexpr double kPs11 = 3.7748607e-3;
		constexpr double kPs22 = 3.7098537e5;

		constexpr double kMus[] = {0.5, 0.7, 0.8};

		using Clock = std::chrono::steady_clock;

		double seconds_since(Clock::time_point t0)
		{
			return std::chrono::duration<double>(Clock::now() - t0).count();
		}

		std::string num(double x, const char *fmt = "%.9g")
		{
			char buf[64];
			std::snprintf(buf, sizeof(buf), fmt, x);
			return buf;
		}

		double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

		std::string read_file(const std::string &path)
		{
			std::ifstream in(path, std::ios::binary);
			std::ostringstream ss;
			ss << in.rdbuf();
			return ss.str();
		}

		class Recorder
		{
		public:
			Recorder(ValidationSummary &s, const ValidationOptions &o) : summary_(s), opts_(o) {}

			void add(int criterion, std::string claim, std::string computed, std::string tolerance, bool pass,
					 bool informational = false)
			{
				CheckResult r{criterion, std::move(claim), std::move(computed), std::move(tolerance), pass, informational};
				if (opts_.on_check)
					opts_.on_check(r);
				summary_.checks.push_back(std::move(r));
			}

			void runtime(int criterion, const std::string &what, double secs, double limit)
			{
				add(criterion, "runtime " + what, num(secs, "%.3f s"), "< " + num(limit, "%g s"), secs < limit);
			}

			void failure(int criterion, const std::string &what, const std::exception &e)
			{
				add(criterion, what, std::string("exception: ") + e.what(), "no error", false);
			}

		private:
			ValidationSummary &summary_;
			const ValidationOptions &opts_;
		};

		// Residual and stability bookkeeping for criterion 8.
		struct Audit
		{
			double riccati = 0;
			double lyapunov = 0;
			int realizations = 0;
			int non_hurwitz = 0;

			void bank(const EstimatorBank &b)
			{
				riccati = std::max(riccati, b.max_riccati_residual());
				for (const FilterRealization *f :
					 {&b.kalman_fwd.realization, &b.kalman_bwd.realization, &b.robust.forward.realization,
					  &b.robust.backward.realization})
				{
					++realizations;
					if (!is_hurwitz(f->dynamics))
						++non_hurwitz;
				}
			}

			void report(const ReportDiagnostics &d)
			{
				riccati = std::max(riccati, d.max_riccati_residual);
				lyapunov = std::max(lyapunov, d.max_lyapunov_residual);
			}
		};

		Scenario scenario(const ValidationOptions &o, double mu, StateKind state,
						  SmootherErrorModel model = SmootherErrorModel::combiner)
		{
			Scenario sc;
			sc.process = o.process;
			sc.beam = o.beam;
			sc.mu = mu;
			sc.state = state;
			sc.smoother_model = model;
			return sc;
		}

		double worst_db(const ErrorReport &r, EstimatorKind k) { return to_db(worst_case(r, k).error); }

		struct Orderings
		{
			bool at_zero = true;
			bool worst = true;
			bool dominance = true;
			std::string detail;
		};

		Orderings check_orderings(const ErrorReport &r)
		{
			Orderings o;
			for (const ErrorRow &row : r.rows)
			{
				if (row.delta == 0)
					o.at_zero = row.error(EstimatorKind::rts_smoother) <= row.error(EstimatorKind::robust_smoother);
				const bool ok =
					row.error(EstimatorKind::robust_smoother) <= row.error(EstimatorKind::robust_filter) + 1e-12 &&
					row.error(EstimatorKind::rts_smoother) <= row.error(EstimatorKind::kalman_filter) + 1e-12;
				if (!ok && o.dominance)
					o.detail = "smoother above its filter at delta=" + num(row.delta);
				o.dominance = o.dominance && ok;
			}
			o.worst = worst_case(r, EstimatorKind::robust_smoother).error < worst_case(r, EstimatorKind::rts_smoother).error;
			return o;
		}

		void record_orderings(Recorder &rec, int criterion, const std::string &tag, const ErrorReport &r)
		{
			const Orderings o = check_orderings(r);
			const ErrorRow *zero = nullptr;
			for (const ErrorRow &row : r.rows)
				if (row.delta == 0)
					zero = &row;
			rec.add(criterion, tag + " delta=0: err(rts_smoother) <= err(robust_smoother)",
					zero ? num(zero->error(EstimatorKind::rts_smoother)) + " vs " +
							   num(zero->error(EstimatorKind::robust_smoother))
						 : "delta=0 not on grid",
					"ordering", zero && o.at_zero);
			const WorstCase wr = worst_case(r, EstimatorKind::robust_smoother);
			const WorstCase wk = worst_case(r, EstimatorKind::rts_smoother);
			rec.add(criterion, tag + " worst case: err(robust_smoother) < err(rts_smoother)",
					num(wr.error) + " (delta=" + num(wr.delta) + ") vs " + num(wk.error) + " (delta=" + num(wk.delta) + ")",
					"ordering", o.worst);
			rec.add(criterion, tag + " every delta: smoothers <= their filters",
					o.dominance ? std::string("holds on ") + std::to_string(r.rows.size()) + " points" : o.detail,
					"+1e-12", o.dominance);
		}

		void criterion1(Recorder &rec, const ValidationOptions &o, Audit &audit)
		{
			const auto t0 = Clock::now();
			const StateSpaceModel ss = scenario(o, 0, StateKind::coherent).coherent_model();
			const KalmanDesign f = kalman_forward(ss);
			const KalmanDesign b = kalman_backward(ss);
			const Mat2 Ps = rts_smoother_covariance(f.P, b.P);
			const double secs = seconds_since(t0);
			audit.riccati = std::max({audit.riccati, f.riccati.residual_norm, b.riccati.residual_norm});

			rec.add(1, "P_s(1,1) = " + num(kPs11), num(Ps(0, 0)), "1e-4 relative", rel(Ps(0, 0), kPs11) < 1e-4);
			rec.add(1, "P_s(2,2) = " + num(kPs22), num(Ps(1, 1)), "1e-4 relative", rel(Ps(1, 1), kPs22) < 1e-4);
			rec.add(1, "|P_s(1,2)| = 0", num(std::abs(Ps(0, 1)), "%.3g"), "< 1e-10", std::abs(Ps(0, 1)) < 1e-10);
			rec.runtime(1, "P_s", secs, 1.0);
		}

		void criterion2(Recorder &rec, const ValidationOptions &o, Audit &audit)
		{
			const auto t0 = Clock::now();
			const Scenario sc = scenario(o, 0, StateKind::coherent);
			const EstimatorBank bank = design_estimators(sc.coherent_model(), sc.uncertainty());
			const double secs = seconds_since(t0);
			audit.bank(bank);

			const Mat2 &Y = bank.robust.forward.riccati.X;
			const Mat2 &Z = bank.robust.backward.riccati.X;
			const Mat2 Pf_inv = bank.kalman_fwd.P.inverse();
			const Mat2 Pb_inv = bank.kalman_bwd.P.inverse();
			const double ey = (Y - Pf_inv).norm() / Pf_inv.norm();
			const double ez = (Z - Pb_inv).norm() / Pb_inv.norm();
			const double es = (Mat2((Y + Z).inverse()) - bank.P_s).norm() / bank.P_s.norm();
			rec.add(2, "mu=0: Y = P_f^-1", num(ey, "%.3g"), "< 1e-8", ey < 1e-8);
			rec.add(2, "mu=0: Z = P_b^-1", num(ez, "%.3g"), "< 1e-8", ez < 1e-8);
			rec.add(2, "mu=0: (Y+Z)^-1 = P_s", num(es, "%.3g"), "< 1e-8", es < 1e-8);
			rec.runtime(2, "mu=0 designs", secs, 1.0);
		}

		void criterion3(Recorder &rec, const ValidationOptions &o, Audit &audit)
		{
			for (double mu : kMus)
			{
				const Scenario sc = scenario(o, mu, StateKind::coherent);
				const EstimatorBank bank = design_estimators(sc.coherent_model(), sc.uncertainty());
				audit.bank(bank);
				const Evaluation ev = evaluate_all(bank, 0.0);
				audit.lyapunov = std::max(audit.lyapunov, ev.max_lyapunov_residual);
				const double pi = ev.err[static_cast<std::size_t>(EstimatorKind::rts_smoother)];
				const double e = rel(pi, bank.P_s(0, 0));
				rec.add(3, "mu=" + num(mu) + " delta=0: Kalman-pair Pi = P_s(1,1)",
						num(pi) + " vs " + num(bank.P_s(0, 0)) + " (rel " + num(e, "%.2g") + ")", "1e-6 relative",
						e < 1e-6);
			}
		}

		void criterion4_5(Recorder &rec, const ValidationOptions &o, Audit &audit, const std::vector<double> &grid,
						  double &coherent_robust_worst_db_08)
		{
			for (double mu : kMus)
			{
				const std::string tag = "coherent mu=" + num(mu);
				try
				{
					const auto t0 = Clock::now();
					const ErrorReport r = sweep_delta(scenario(o, mu, StateKind::coherent), grid);
					const double secs = seconds_since(t0);
					audit.report(r.diagnostics);
					record_orderings(rec, 4, tag, r);
					rec.runtime(4, tag + " sweep", secs, 10.0);

					if (mu == 0.8)
					{
						coherent_robust_worst_db_08 = worst_db(r, EstimatorKind::robust_smoother);
						const double gain = worst_db(r, EstimatorKind::rts_smoother) - coherent_robust_worst_db_08;
						rec.add(5, "mu=0.8 worst-case dB(rts_smoother) - dB(robust_smoother) = 1.5", num(gain, "%.4f dB"),
								"+/- 0.5 dB", std::abs(gain - 1.5) <= 0.5);
					}
				}
				catch (const std::exception &e)
				{
					rec.failure(4, tag + " sweep", e);
					if (mu == 0.8)
						rec.failure(5, "mu=0.8 worst-case gain", e);
				}
			}

			try
			{
				const ErrorReport r =
					sweep_delta(scenario(o, 0.8, StateKind::coherent, SmootherErrorModel::scalar), grid);
				const double gain =
					worst_db(r, EstimatorKind::rts_smoother) - worst_db(r, EstimatorKind::robust_smoother);
				rec.add(5, "same gain, scalar smoother error model", num(gain, "%.4f dB"), "informational", true, true);
			}
			catch (const std::exception &e)
			{
				rec.add(5, "same gain, scalar smoother error model", e.what(), "informational", true, true);
			}
		}

		void criterion6(Recorder &rec, const ValidationOptions &o, Audit &audit, const std::vector<double> &grid,
						double coherent_robust_worst_db_08)
		{
			for (double mu : kMus)
			{
				const std::string tag = "squeezed mu=" + num(mu);
				try
				{
					const auto t0 = Clock::now();
					const ErrorReport r = sweep_delta(scenario(o, mu, StateKind::squeezed), grid);
					const double secs = seconds_since(t0);
					audit.report(r.diagnostics);
					record_orderings(rec, 6, tag, r);
					const ReportDiagnostics &d = r.diagnostics;
					rec.add(6, tag + " fixed points converge",
							"max " + std::to_string(d.max_fixed_point_iterations) + " iterations, last step " +
								num(d.max_fixed_point_step, "%.2g"),
							"< 1e-6 in <= 200", d.max_fixed_point_step < kFixedPointTolerance &&
													d.max_fixed_point_iterations <= kFixedPointMaxIterations);
					rec.runtime(6, tag + " sweep", secs, 60.0);

					if (mu == 0.8)
					{
						const double gain = coherent_robust_worst_db_08 - worst_db(r, EstimatorKind::robust_smoother);
						rec.add(6, "mu=0.8 worst-case dB(robust_smoother): coherent - squeezed = 2",
								num(gain, "%.4f dB"), "+/- 0.75 dB", std::abs(gain - 2.0) <= 0.75);
					}
				}
				catch (const std::exception &e)
				{
					rec.failure(6, tag + " sweep", e);
				}
			}

			try
			{
				const ErrorReport c =
					sweep_delta(scenario(o, 0.8, StateKind::coherent, SmootherErrorModel::scalar), grid);
				const ErrorReport s =
					sweep_delta(scenario(o, 0.8, StateKind::squeezed, SmootherErrorModel::scalar), grid);
				const double gain =
					worst_db(c, EstimatorKind::robust_smoother) - worst_db(s, EstimatorKind::robust_smoother);
				rec.add(6, "same gain, scalar smoother error model", num(gain, "%.4f dB"), "informational", true, true);
			}
			catch (const std::exception &e)
			{
				rec.add(6, "same gain, scalar smoother error model", e.what(), "informational", true, true);
			}

			// Fixed-point banks at the sweep ends and centre, for the Hurwitz audit.
			for (double mu : kMus)
			{
				for (double delta : {-1.0, 0.0, 1.0})
				{
					for (EstimatorKind loop : {EstimatorKind::kalman_filter, EstimatorKind::robust_filter})
					{
						try
						{
							const Scenario sc = scenario(o, mu, StateKind::squeezed);
							audit.bank(design_estimators(squeezed_fixed_point(sc, delta, loop).model, sc.uncertainty()));
						}
						catch (const std::exception &)
						{
							++audit.non_hurwitz;
						}
					}
				}
			}
		}

		void criterion7(Recorder &rec, const ValidationOptions &o)
		{
			const auto t0 = Clock::now();
			SimConfig cfg;
			const std::pair<double, double> points[] = {{0.0, 0.0}, {0.5, 0.0}, {0.8, 1.0}, {0.8, -1.0}};
			for (const auto &[mu, delta] : points)
			{
				try
				{
					const McPoint p = monte_carlo_point(scenario(o, mu, StateKind::coherent), delta, cfg, kAllEstimators);
					for (const McEstimatorResult &r : p.results)
					{
						rec.add(7,
								std::string("mu=") + num(mu) + " delta=" + num(delta) + " " + to_string(r.kind) +
									": empirical = analytic",
								num(r.empirical.mse, "%.5g") + " vs " + num(r.analytic, "%.5g") + " (z=" +
									num(r.z_score, "%+.2f") + ")",
								"|z| <= 3", std::abs(r.z_score) <= 3.0);
					}
				}
				catch (const std::exception &e)
				{
					rec.failure(7, "mu=" + num(mu) + " delta=" + num(delta) + " Monte Carlo", e);
				}
			}

			try
			{
				const Scenario sc = scenario(o, 0, StateKind::coherent);
				const EstimatorBank bank = design_estimators(sc.coherent_model(), sc.uncertainty());
				const StateSpaceModel &ss = bank.model;
				const Trajectory traj = simulate_truth(ss.A, ss.G, ss.H, ss.J, cfg, 0);
				const Eigen::Matrix2Xd rts =
					run_smoother(traj.theta, bank.kalman_fwd.realization, bank.kalman_bwd.realization, bank.rts, cfg.dt);
				const Eigen::Matrix2Xd robust =
					run_smoother(traj.theta, bank.robust.forward.realization, bank.robust.backward.realization,
								 bank.robust.smoother.combiner, cfg.dt);
				const double d = relative_rms_difference(robust, rts);
				rec.add(7, "mu=0 delta=0: robust smoother trajectory = RTS trajectory", num(d, "%.3g"),
						"< 1e-6 relative RMS", d < 1e-6);
			}
			catch (const std::exception &e)
			{
				rec.failure(7, "mu=0 trajectory comparison", e);
			}
			rec.runtime(7, "Monte Carlo", seconds_since(t0), 300.0);
		}

		void criterion8(Recorder &rec, const Audit &audit)
		{
			rec.add(8, "Riccati residuals (criteria 1-6)", num(audit.riccati, "%.3g"), "< 1e-8 relative",
					audit.riccati < 1e-8);
			rec.add(8, "augmented Lyapunov residuals (criteria 3-6)", num(audit.lyapunov, "%.3g"), "< 1e-8 relative",
					audit.lyapunov < 1e-8);
			rec.add(8, "filter realizations Hurwitz in their direction",
					std::to_string(audit.realizations - audit.non_hurwitz) + "/" + std::to_string(audit.realizations),
					"all", audit.non_hurwitz == 0 && audit.realizations > 0);
		}

		// Outputs of two identical runs, either through the executable or in process.
		std::pair<std::string, std::string> twice(const ValidationOptions &o, const std::string &subcommand,
												  const RunConfig &cfg, const std::string &flags)
		{
			if (o.cli_path.empty())
			{
				auto run = [&] { return subcommand == "sweep" ? sweep_csv(cfg) : mc_csv(cfg); };
				std::string a = run();
				return {a, run()};
			}
			namespace fs = std::filesystem;
			const fs::path dir = fs::path(o.scratch_dir);
			std::string out[2];
			for (int i = 0; i < 2; ++i)
			{
				const fs::path file = dir / ("rsk_determinism_" + subcommand + "_" + std::to_string(i) + ".csv");
				const std::string cmd = "\"" + o.cli_path + "\" " + subcommand + " " + flags + " --out \"" +
										file.string() + "\" > /dev/null 2>&1";
				const int rc = std::system(cmd.c_str());
				if (rc != 0)
					throw Error(ErrorKind::InvalidArgument, "'" + cmd + "' exited with status " + std::to_string(rc));
				out[i] = read_file(file.string());
				fs::remove(file);
			}
			return {out[0], out[1]};
		}

		void criterion9(Recorder &rec, const ValidationOptions &o)
		{
			RunConfig sweep_cfg;
			sweep_cfg.process = o.process;
			sweep_cfg.beam = o.beam;
			sweep_cfg.mu = 0.7;
			sweep_cfg.grid = 41;
			sweep_cfg.state = StateKind::squeezed;

			RunConfig mc_cfg;
			mc_cfg.process = o.process;
			mc_cfg.beam = o.beam;
			mc_cfg.mu = 0.5;
			mc_cfg.sim.trials = 2;
			mc_cfg.mc_deltas = {0.5};

			struct Job
			{
				const char *sub;
				const RunConfig *cfg;
				std::string flags;
			} jobs[] = {
				{"sweep", &sweep_cfg, "--state squeezed --mu 0.7 --grid 41"},
				{"mc", &mc_cfg, "--mu 0.5 --trials 2 --deltas 0.5"},
			};
			for (const Job &j : jobs)
			{
				try
				{
					const auto [a, b] = twice(o, j.sub, *j.cfg, j.flags);
					const bool same = a == b && !a.empty();
					rec.add(9, std::string(j.sub) + " twice: byte-identical CSV",
							std::to_string(a.size()) + " bytes, " + (same ? "identical" : "different"), "exact", same);
				}
				catch (const std::exception &e)
				{
					rec.failure(9, std::string(j.sub) + " determinism", e);
				}
			}
		}
	} // namespace

	bool ValidationSummary::criterion_pass(int criterion) const
	{
		bool any = false;
		for (const CheckResult &c : checks)
		{
			if (c.criterion != criterion || c.informational)
				continue;
			any = true;
			if (!c.pass)
				return false;
		}
		return any;
	}

	bool ValidationSummary::all_pass() const
	{
		for (int c = 1; c <= kCriteria; ++c)
			if (!criterion_pass(c))
				return false;
		return true;
	}

	ValidationSummary run_validation(const ValidationOptions &opts)
	{
		ValidationSummary summary;
		Recorder rec(summary, opts);
		Audit audit;
		const std::vector<double> grid = uniform_grid(201);

		auto guarded = [&](int criterion, const char *what, auto &&body) {
			try
			{
				body();
			}
			catch (const std::exception &e)
			{
				rec.failure(criterion, what, e);
			}
		};

		guarded(1, "P_s", [&] { criterion1(rec, opts, audit); });
		guarded(2, "mu=0 reductions", [&] { criterion2(rec, opts, audit); });
		guarded(3, "pipeline consistency", [&] { criterion3(rec, opts, audit); });
		double coherent_db = 0;
		guarded(4, "coherent sweeps", [&] { criterion4_5(rec, opts, audit, grid, coherent_db); });
		guarded(6, "squeezed sweeps", [&] { criterion6(rec, opts, audit, grid, coherent_db); });
		guarded(7, "Monte Carlo", [&] { criterion7(rec, opts); });
		criterion8(rec, audit);
		guarded(9, "determinism", [&] { criterion9(rec, opts); });
		return summary;
	}

	std::string format_table(const ValidationSummary &summary)
	{
		std::size_t wc = 5, wv = 8, wt = 9;
		for (const CheckResult &c : summary.checks)
		{
			wc = std::max(wc, c.claim.size());
			wv = std::max(wv, c.computed.size());
			wt = std::max(wt, c.tolerance.size());
		}
		std::ostringstream os;
		auto row = [&](const std::string &n, const std::string &a, const std::string &b, const std::string &t,
					   const std::string &v) {
			os << n << std::string(3 - std::min<std::size_t>(3, n.size()), ' ') << " | " << a
			   << std::string(wc - a.size(), ' ') << " | " << b << std::string(wv - b.size(), ' ') << " | " << t
			   << std::string(wt - t.size(), ' ') << " | " << v << '\n';
		};
		row("#", "claim", "computed", "tolerance", "verdict");
		for (const CheckResult &c : summary.checks)
			row(std::to_string(c.criterion), c.claim, c.computed, c.tolerance,
				c.informational ? "info" : (c.pass ? "PASS" : "FAIL"));
		return os.str();
	}
} // namespace rsk
