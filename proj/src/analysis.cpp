#include <rsk/analysis.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace rsk
{
	const char *to_string(EstimatorKind kind)
	{
		switch (kind)
		{
		case EstimatorKind::kalman_filter: return "kalman_filter";
		case EstimatorKind::rts_smoother: return "rts_smoother";
		case EstimatorKind::robust_filter: return "robust_filter";
		case EstimatorKind::robust_smoother: return "robust_smoother";
		}
		return "?";
	}

	std::optional<EstimatorKind> parse_estimator(std::string_view name)
	{
		for (EstimatorKind k : kAllEstimators)
			if (name == to_string(k))
				return k;
		return std::nullopt;
	}

	const char *to_string(StateKind kind)
	{
		return kind == StateKind::coherent ? "coherent" : "squeezed";
	}

	std::optional<StateKind> parse_state(std::string_view name)
	{
		if (name == "coherent")
			return StateKind::coherent;
		if (name == "squeezed")
			return StateKind::squeezed;
		return std::nullopt;
	}

	const char *to_string(SmootherErrorModel model)
	{
		return model == SmootherErrorModel::combiner ? "combiner" : "scalar";
	}

	std::optional<SmootherErrorModel> parse_smoother_model(std::string_view name)
	{
		if (name == "combiner")
			return SmootherErrorModel::combiner;
		if (name == "scalar")
			return SmootherErrorModel::scalar;
		return std::nullopt;
	}

	AugmentedSystem augment(const Mat2 &true_A, const Vec2 &G, const RowVec2 &H, double J,
							const FilterRealization &filt)
	{
		AugmentedSystem aug;
		aug.A_bar << true_A, Mat2::Zero(),
			filt.gain * H, filt.dynamics;
		aug.B_bar.setZero();
		aug.B_bar.block<2, 1>(0, 0) = G;
		aug.B_bar.block<2, 1>(2, 1) = filt.gain * J;
		if (!is_hurwitz(aug.A_bar))
			throw Error(ErrorKind::UnstableAugmentedSystem, "augmented plant/filter system is not Hurwitz");
		return aug;
	}

	Mat2 time_reversed_dynamics(const Mat2 &true_A, const Vec2 &G)
	{
		const Mat2 sigma = solve_lyapunov<double>(true_A, G * G.transpose());
		Eigen::FullPivLU<Mat2> lu(sigma);
		if (!lu.isInvertible())
			throw Error(ErrorKind::SingularMatrix, "stationary covariance is singular");
		return sigma * true_A.transpose() * lu.inverse();
	}

	ErrorBlocks error_covariance(const AugmentedSystem &aug)
	{
		const Mat4 q = aug.B_bar * aug.B_bar.transpose();
		const Mat4 p = solve_lyapunov<double>(aug.A_bar, q);

		ErrorBlocks e;
		e.Sigma = p.topLeftCorner<2, 2>();
		e.M = p.topRightCorner<2, 2>();
		e.N = p.bottomRightCorner<2, 2>();
		e.Pi = e.Sigma - e.M - e.M.transpose() + e.N;
		e.lyapunov_residual = lyapunov_residual<double>(aug.A_bar, q, p) / q.norm();
		return e;
	}

	Mat2 cross_correlation(const Mat2 &Sigma, const Mat2 &M_f, const Mat2 &M_b)
	{
		Eigen::FullPivLU<Mat2> lu(Sigma);
		if (!lu.isInvertible())
			throw Error(ErrorKind::SingularMatrix, "Sigma is singular");
		const Mat2 alpha = M_f.transpose() * lu.inverse();
		const Mat2 beta = lu.solve(M_b);
		return Sigma - M_f.transpose() - M_b + alpha * Sigma * beta;
	}

	double smoother_error(double pi_f, double pi_b, double pi_fb)
	{
		const double den = pi_f + pi_b - 2.0 * pi_fb;
		if (!(std::abs(den) > 1e-300))
			throw Error(ErrorKind::DegenerateDenominator, "pi_f + pi_b - 2 pi_fb vanishes");
		return (pi_f * pi_b - pi_fb * pi_fb) / den;
	}

	Mat2 combined_error(const Mat2 &Pi_f, const Mat2 &Pi_b, const Mat2 &Pi_fb, const Combiner &w)
	{
		const Mat2 cross = w.forward * Pi_fb * w.backward.transpose();
		const Mat2 out = w.forward * Pi_f * w.forward.transpose() + w.backward * Pi_b * w.backward.transpose() +
						 cross + cross.transpose();
		return 0.5 * (out + out.transpose());
	}

	ErrorDecomposition decompose(const Mat2 &true_A, const StateSpaceModel &ss, const FilterRealization &fwd,
								 const FilterRealization &bwd, const Combiner &combiner, SmootherErrorModel model)
	{
		const ErrorBlocks f = error_covariance(augment(true_A, ss.G, ss.H, ss.J, fwd));
		const Mat2 plant_b = model == SmootherErrorModel::combiner ? time_reversed_dynamics(true_A, ss.G) : true_A;
		const ErrorBlocks b = error_covariance(augment(plant_b, ss.G, ss.H, ss.J, bwd));

		ErrorDecomposition d;
		d.Sigma = f.Sigma;
		d.M_f = f.M;
		d.N_f = f.N;
		d.Pi_f = f.Pi;
		d.M_b = b.M;
		d.N_b = b.N;
		d.Pi_b = b.Pi;
		d.Pi_fb = cross_correlation(d.Sigma, d.M_f, d.M_b);
		d.max_lyapunov_residual = std::max(f.lyapunov_residual, b.lyapunov_residual);
		d.Pi = model == SmootherErrorModel::combiner
				   ? combined_error(d.Pi_f, d.Pi_b, d.Pi_fb, combiner)(0, 0)
				   : smoother_error(d.Pi_f(0, 0), d.Pi_b(0, 0), d.Pi_fb(0, 0));
		return d;
	}

	double EstimatorBank::max_riccati_residual() const
	{
		return std::max({kalman_fwd.riccati.residual_norm, kalman_bwd.riccati.residual_norm,
						 robust.forward.riccati.residual_norm, robust.backward.riccati.residual_norm});
	}

	EstimatorBank design_estimators(const StateSpaceModel &ss, const UncertaintyStructure &u)
	{
		EstimatorBank bank;
		bank.model = ss;
		bank.uncertainty = u;
		bank.kalman_fwd = kalman_forward(ss);
		bank.kalman_bwd = kalman_backward(ss);
		bank.P_s = rts_smoother_covariance(bank.kalman_fwd.P, bank.kalman_bwd.P);
		bank.rts = rts_combiner(bank.kalman_fwd.P, bank.kalman_bwd.P);
		bank.robust = design_robust(ss, u);
		return bank;
	}

	Evaluation evaluate_all(const EstimatorBank &bank, double delta, SmootherErrorModel model)
	{
		const StateSpaceModel &ss = bank.model;
		const Mat2 true_A = apply_uncertainty(ss.A, ss.G, bank.uncertainty, delta);

		const ErrorDecomposition k = decompose(true_A, ss, bank.kalman_fwd.realization,
											   bank.kalman_bwd.realization, bank.rts, model);
		const ErrorDecomposition r = decompose(true_A, ss, bank.robust.forward.realization,
											   bank.robust.backward.realization, bank.robust.smoother.combiner, model);
		Evaluation ev;
		ev.err = {k.Pi_f(0, 0), k.Pi, r.Pi_f(0, 0), r.Pi};
		ev.max_lyapunov_residual = std::max(k.max_lyapunov_residual, r.max_lyapunov_residual);
		return ev;
	}

	double evaluate_estimator(const EstimatorBank &bank, double delta, EstimatorKind kind, SmootherErrorModel model)
	{
		return evaluate_all(bank, delta, model).err[static_cast<std::size_t>(kind)];
	}

	StateSpaceModel Scenario::coherent_model() const
	{
		return make_model(build_process(process), build_coherent_measurement(beam.alpha_mag));
	}

	UncertaintyStructure Scenario::uncertainty() const
	{
		return build_uncertainty(process, mu);
	}

	namespace
	{
		double loop_filter_error(const StateSpaceModel &ss, const UncertaintyStructure &u, const Mat2 &true_A,
								 EstimatorKind loop_filter)
		{
			const FilterRealization filt = loop_filter == EstimatorKind::kalman_filter
											   ? kalman_forward(ss).realization
											   : robust_forward(ss, u.K).realization;
			return error_covariance(augment(true_A, ss.G, ss.H, ss.J, filt)).Pi(0, 0);
		}
	} // namespace

	SqueezedOperatingPoint squeezed_fixed_point(const Scenario &sc, double delta, EstimatorKind loop_filter)
	{
		if (loop_filter != EstimatorKind::kalman_filter && loop_filter != EstimatorKind::robust_filter)
			throw Error(ErrorKind::InvalidArgument, "loop filter must be kalman_filter or robust_filter");

		const ProcessModel process = build_process(sc.process);
		const UncertaintyStructure u = sc.uncertainty();
		const Mat2 true_A = apply_uncertainty(process.A, process.G, u, delta);

		SqueezedOperatingPoint op;
		double sigma = loop_filter_error(sc.coherent_model(), u, true_A, loop_filter);
		op.history.push_back(sigma);

		for (int it = 1; it <= kFixedPointMaxIterations; ++it)
		{
			const SqueezedMeasurement meas = build_squeezed_measurement(sc.beam, sigma);
			const double next = loop_filter_error(make_model(process, meas), u, true_A, loop_filter);
			op.history.push_back(next);
			const double step = std::abs(next - sigma);
			sigma = next;
			if (step < kFixedPointTolerance)
			{
				const SqueezedMeasurement final_meas = build_squeezed_measurement(sc.beam, sigma);
				op.sigma_f_sq = sigma;
				op.R_sq = final_meas.R_sq;
				op.iterations = it;
				op.last_step = step;
				op.model = make_model(process, final_meas);
				return op;
			}
		}
		const std::size_t n = op.history.size();
		throw Error(ErrorKind::NonConvergence,
					"squeezed fixed point did not converge in " + std::to_string(kFixedPointMaxIterations) +
						" iterations; last iterates " + std::to_string(op.history[n - 2]) + ", " +
						std::to_string(op.history[n - 1]));
	}

	std::vector<double> uniform_grid(int n)
	{
		if (n < 1 || n % 2 == 0)
			throw Error(ErrorKind::InvalidArgument, "grid size must be a positive odd integer");
		std::vector<double> grid(static_cast<std::size_t>(n));
		if (n == 1)
		{
			grid[0] = 0.0;
			return grid;
		}
		const int half = n / 2;
		for (int i = 0; i < n; ++i)
			grid[static_cast<std::size_t>(i)] = static_cast<double>(i - half) / half;
		return grid;
	}

	namespace
	{
		void check_grid(std::span<const double> grid)
		{
			if (grid.empty())
				throw Error(ErrorKind::InvalidArgument, "empty delta grid");
			for (std::size_t i = 0; i < grid.size(); ++i)
			{
				if (!(std::abs(grid[i]) <= 1.0))
					throw Error(ErrorKind::DeltaOutOfRange, "grid point outside [-1, 1]");
				if (i > 0 && !(grid[i] > grid[i - 1]))
					throw Error(ErrorKind::InvalidArgument, "delta grid must be strictly increasing");
			}
		}

		[[noreturn]] void rethrow_at(const InfeasibleDesign &e, double delta)
		{
			throw InfeasibleDesign(e.requested_mu(), e.largest_feasible_mu(), "at delta=" + std::to_string(delta));
		}

		void note(ReportDiagnostics &d, const EstimatorBank &bank, const Evaluation &ev)
		{
			d.max_riccati_residual = std::max(d.max_riccati_residual, bank.max_riccati_residual());
			d.max_lyapunov_residual = std::max(d.max_lyapunov_residual, ev.max_lyapunov_residual);
		}
	} // namespace

	ErrorReport sweep_delta(const Scenario &sc, std::span<const double> grid)
	{
		check_grid(grid);
		ErrorReport report;
		report.rows.reserve(grid.size());
		const UncertaintyStructure u = sc.uncertainty();

		if (sc.state == StateKind::coherent)
		{
			const EstimatorBank bank = design_estimators(sc.coherent_model(), u);
			for (double delta : grid)
			{
				const Evaluation ev = evaluate_all(bank, delta, sc.smoother_model);
				note(report.diagnostics, bank, ev);
				ErrorRow row;
				row.delta = delta;
				row.mu = sc.mu;
				row.state = sc.state;
				row.err = ev.err;
				report.rows.push_back(row);
			}
			return report;
		}

		for (double delta : grid)
		{
			ErrorRow row;
			row.delta = delta;
			row.mu = sc.mu;
			row.state = sc.state;
			try
			{
				const SqueezedOperatingPoint kop = squeezed_fixed_point(sc, delta, EstimatorKind::kalman_filter);
				const SqueezedOperatingPoint rop = squeezed_fixed_point(sc, delta, EstimatorKind::robust_filter);
				const EstimatorBank kbank = design_estimators(kop.model, u);
				const EstimatorBank rbank = design_estimators(rop.model, u);
				const Evaluation kev = evaluate_all(kbank, delta, sc.smoother_model);
				const Evaluation rev = evaluate_all(rbank, delta, sc.smoother_model);
				note(report.diagnostics, kbank, kev);
				note(report.diagnostics, rbank, rev);
				ReportDiagnostics &d = report.diagnostics;
				d.max_fixed_point_iterations = std::max({d.max_fixed_point_iterations, kop.iterations, rop.iterations});
				d.max_fixed_point_step = std::max({d.max_fixed_point_step, kop.last_step, rop.last_step});

				row.err = {kev.err[0], kev.err[1], rev.err[2], rev.err[3]};
				row.sigma_f_sq_kalman = kop.sigma_f_sq;
				row.sigma_f_sq_robust = rop.sigma_f_sq;
			}
			catch (const InfeasibleDesign &e)
			{
				rethrow_at(e, delta);
			}
			report.rows.push_back(row);
		}
		return report;
	}

	WorstCase worst_case(const ErrorReport &report, EstimatorKind kind)
	{
		if (report.rows.empty())
			throw Error(ErrorKind::InvalidArgument, "empty report");
		WorstCase best{report.rows.front().delta, report.rows.front().error(kind)};
		for (const ErrorRow &row : report.rows)
		{
			const double e = row.error(kind);
			if (e > best.error || (e == best.error && std::abs(row.delta) < std::abs(best.delta)))
				best = {row.delta, e};
		}
		return best;
	}

	double to_db(double x)
	{
		if (!(x > 0))
			throw Error(ErrorKind::NonPositiveInput, "to_db needs a positive argument");
		return 10.0 * std::log10(x);
	}
} // namespace rsk
