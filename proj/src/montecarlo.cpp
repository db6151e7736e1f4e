#include <rsk/montecarlo.hpp>

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace rsk
{
	const char *to_string(Integrator integrator)
	{
		return integrator == Integrator::exact ? "exact" : "euler_maruyama";
	}

	std::size_t SimConfig::steps() const
	{
		return static_cast<std::size_t>(std::llround(t_final / dt));
	}

	void SimConfig::validate(double omega_r) const
	{
		if (!(dt > 0) || dt > 1e-5)
			throw Error(ErrorKind::InvalidArgument, "dt must lie in (0, 1e-5]");
		if (!(t_final >= 100.0 * 2.0 * std::numbers::pi / omega_r))
			throw Error(ErrorKind::InvalidArgument, "t_final must cover at least 100 resonance periods");
		if (trials < 1)
			throw Error(ErrorKind::InvalidArgument, "trials must be >= 1");
		if (!(discard_fraction >= 0 && discard_fraction < 0.45))
			throw Error(ErrorKind::InvalidArgument, "discard_fraction must lie in [0, 0.45)");
	}

	namespace
	{
		Mat2 psd_sqrt_factor(const Mat2 &q)
		{
			Eigen::SelfAdjointEigenSolver<Mat2> es(0.5 * (q + q.transpose()));
			const Vec2 root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
			return es.eigenvectors() * root.asDiagonal();
		}

		struct ExactStep
		{
			Mat2 phi;
			Mat2 noise_factor;
		};

		// Van Loan: exp([[-A, GG^T], [0, A^T]] dt) = [[., F12], [0, F22]],
		// Phi = F22^T, Q_d = F22^T F12.
		ExactStep exact_step(const Mat2 &a, const Vec2 &g, double dt)
		{
			Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
			m.topLeftCorner<2, 2>() = -a;
			m.topRightCorner<2, 2>() = g * g.transpose();
			m.bottomRightCorner<2, 2>() = a.transpose();
			const Eigen::Matrix4d e = (m * dt).exp();
			const Mat2 phi = e.bottomRightCorner<2, 2>().transpose();
			const Mat2 qd = phi * e.topRightCorner<2, 2>();
			return {phi, psd_sqrt_factor(qd)};
		}

		std::size_t discard_count(std::size_t n, double fraction)
		{
			return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
		}
	} // namespace

	Trajectory simulate_truth(const Mat2 &true_A, const Vec2 &G, const RowVec2 &H, double J, const SimConfig &cfg,
							  std::uint64_t trial)
	{
		if (!is_hurwitz(true_A))
			throw Error(ErrorKind::UnstableMatrix, "simulate_truth: plant is not Hurwitz");
		const std::size_t n = cfg.steps();
		if (n == 0)
			throw Error(ErrorKind::InvalidArgument, "simulate_truth: no time steps");

		std::mt19937_64 rng(cfg.seed + trial);
		std::normal_distribution<double> normal(0.0, 1.0);
		const double noise_scale = cfg.inject_noise ? 1.0 : 0.0;
		const auto draw = [&] { return noise_scale * normal(rng); };

		Trajectory traj;
		traj.dt = cfg.dt;
		traj.times.resize(static_cast<Eigen::Index>(n));
		traj.x.resize(2, static_cast<Eigen::Index>(n));
		traj.theta.resize(static_cast<Eigen::Index>(n));

		Vec2 x = Vec2::Zero();
		if (cfg.stationary_start)
		{
			const Mat2 sigma = solve_lyapunov<double>(true_A, G * G.transpose());
			x = psd_sqrt_factor(sigma) * Vec2(draw(), draw());
		}

		const ExactStep step = exact_step(true_A, G, cfg.dt);
		const Mat2 euler = Mat2::Identity() + true_A * cfg.dt;
		const double sqrt_dt = std::sqrt(cfg.dt);

		for (std::size_t k = 0; k < n; ++k)
		{
			const auto i = static_cast<Eigen::Index>(k);
			traj.times(i) = static_cast<double>(k) * cfg.dt;
			traj.x.col(i) = x;
			traj.theta(i) = H.dot(x) + J * draw() / sqrt_dt;
			if (cfg.integrator == Integrator::exact)
			{
				const Vec2 z(draw(), draw());
				x = step.phi * x + step.noise_factor * z;
			}
			else
			{
				x = euler * x + G * (sqrt_dt * draw());
			}
		}
		return traj;
	}

	Eigen::Matrix2Xd run_filter(const Eigen::VectorXd &theta, const FilterRealization &filt, double dt)
	{
		Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
		m.topLeftCorner<2, 2>() = filt.dynamics;
		m.topRightCorner<2, 1>() = filt.gain;
		const Eigen::Matrix3d e = (m * dt).exp();
		const Mat2 phi = e.topLeftCorner<2, 2>();
		const Vec2 gamma = e.topRightCorner<2, 1>();

		const Eigen::Index n = theta.size();
		Eigen::Matrix2Xd out(2, n);
		Vec2 xhat = Vec2::Zero();
		if (filt.direction == Direction::forward)
		{
			for (Eigen::Index k = 0; k < n; ++k)
			{
				out.col(k) = xhat;
				xhat = phi * xhat + gamma * theta(k);
			}
		}
		else
		{
			for (Eigen::Index k = n - 1; k >= 0; --k)
			{
				xhat = phi * xhat + gamma * theta(k);
				out.col(k) = xhat;
			}
		}
		return out;
	}

	Eigen::Matrix2Xd combine(const Eigen::Matrix2Xd &forward, const Eigen::Matrix2Xd &backward, const Combiner &w)
	{
		if (forward.cols() != backward.cols())
			throw Error(ErrorKind::InvalidArgument, "combine: series lengths differ");
		return w.forward * forward + w.backward * backward;
	}

	Eigen::Matrix2Xd run_smoother(const Eigen::VectorXd &theta, const FilterRealization &fwd,
								  const FilterRealization &bwd, const Combiner &w, double dt)
	{
		if (fwd.direction != Direction::forward || bwd.direction != Direction::backward)
			throw Error(ErrorKind::InvalidArgument, "run_smoother: need one forward and one backward filter");
		const Mat2 partition = w.forward + w.backward - Mat2::Identity();
		if (partition.norm() > 1e-9)
			throw Error(ErrorKind::InvalidArgument, "run_smoother: combiner weights do not sum to identity");
		return combine(run_filter(theta, fwd, dt), run_filter(theta, bwd, dt), w);
	}

	TrialErrors trial_errors(const Eigen::VectorXd &truth, const Eigen::VectorXd &estimate, double discard_fraction)
	{
		if (truth.size() != estimate.size())
			throw Error(ErrorKind::InvalidArgument, "trial_errors: series lengths differ");
		const auto n = static_cast<std::size_t>(truth.size());
		const std::size_t cut = discard_count(n, discard_fraction);
		if (n <= 2 * cut)
			throw Error(ErrorKind::EmptyWindow, "no samples left after discarding transients");
		const std::size_t first = cut, count = n - 2 * cut;

		TrialErrors out;
		double total = 0;
		for (std::size_t j = 0; j < count; ++j)
		{
			const auto i = static_cast<Eigen::Index>(first + j);
			const double e = truth(i) - estimate(i);
			const std::size_t block = j * kJackknifeBlocks / count;
			out.block_sum[block] += e * e;
			out.block_count[block] += 1;
			total += e * e;
		}
		out.mse = total / static_cast<double>(count);
		return out;
	}

	MseEstimate aggregate(std::span<const TrialErrors> trials)
	{
		if (trials.empty())
			throw Error(ErrorKind::EmptyWindow, "no trials");
		MseEstimate est;
		for (const TrialErrors &t : trials)
			est.per_trial.push_back(t.mse);
		const double m = static_cast<double>(trials.size());
		double mean = 0;
		for (double v : est.per_trial)
			mean += v;
		mean /= m;
		est.mse = mean;

		if (trials.size() > 1)
		{
			double ss = 0;
			for (double v : est.per_trial)
				ss += (v - mean) * (v - mean);
			est.std_error = std::sqrt(ss / (m - 1.0) / m);
			return est;
		}

		// Single record: delete-one-block jackknife over contiguous blocks.
		const TrialErrors &t = trials.front();
		double sum = 0;
		std::size_t count = 0;
		for (int b = 0; b < kJackknifeBlocks; ++b)
		{
			sum += t.block_sum[static_cast<std::size_t>(b)];
			count += t.block_count[static_cast<std::size_t>(b)];
		}
		std::vector<double> loo;
		for (int b = 0; b < kJackknifeBlocks; ++b)
		{
			const auto ub = static_cast<std::size_t>(b);
			if (t.block_count[ub] == 0 || t.block_count[ub] == count)
				continue;
			loo.push_back((sum - t.block_sum[ub]) / static_cast<double>(count - t.block_count[ub]));
		}
		if (loo.size() < 2)
		{
			est.std_error = std::numeric_limits<double>::quiet_NaN();
			return est;
		}
		const double nb = static_cast<double>(loo.size());
		double loo_mean = 0;
		for (double v : loo)
			loo_mean += v;
		loo_mean /= nb;
		double ss = 0;
		for (double v : loo)
			ss += (v - loo_mean) * (v - loo_mean);
		est.std_error = std::sqrt((nb - 1.0) / nb * ss);
		return est;
	}

	MseEstimate empirical_mse(std::span<const Eigen::VectorXd> truth, std::span<const Eigen::VectorXd> estimate,
							  double discard_fraction)
	{
		if (truth.size() != estimate.size())
			throw Error(ErrorKind::InvalidArgument, "empirical_mse: trial counts differ");
		std::vector<TrialErrors> trials;
		trials.reserve(truth.size());
		for (std::size_t i = 0; i < truth.size(); ++i)
			trials.push_back(trial_errors(truth[i], estimate[i], discard_fraction));
		return aggregate(trials);
	}

	double relative_rms_difference(const Eigen::Matrix2Xd &a, const Eigen::Matrix2Xd &b)
	{
		if (a.cols() != b.cols() || a.cols() == 0)
			throw Error(ErrorKind::InvalidArgument, "relative_rms_difference: series lengths differ");
		const double ref = b.row(0).norm();
		const double diff = (a.row(0) - b.row(0)).norm();
		return ref == 0 ? diff : diff / ref;
	}

	namespace
	{
		bool is_smoother(EstimatorKind k)
		{
			return k == EstimatorKind::rts_smoother || k == EstimatorKind::robust_smoother;
		}

		bool is_robust(EstimatorKind k)
		{
			return k == EstimatorKind::robust_filter || k == EstimatorKind::robust_smoother;
		}

		struct Channel
		{
			EstimatorBank bank;
			std::vector<EstimatorKind> kinds;
		};

		void simulate_channel(const Channel &ch, double delta, const SimConfig &cfg, SmootherErrorModel model,
							  std::vector<McEstimatorResult> &out, std::span<const EstimatorKind> order)
		{
			if (ch.kinds.empty())
				return;
			const StateSpaceModel &ss = ch.bank.model;
			const Mat2 true_A = apply_uncertainty(ss.A, ss.G, ch.bank.uncertainty, delta);
			const Evaluation analytic = evaluate_all(ch.bank, delta, model);

			std::vector<std::vector<TrialErrors>> per_kind(ch.kinds.size());
			for (int trial = 0; trial < cfg.trials; ++trial)
			{
				const Trajectory traj = simulate_truth(true_A, ss.G, ss.H, ss.J, cfg, static_cast<std::uint64_t>(trial));
				const Eigen::VectorXd phi = traj.x.row(0).transpose();
				for (std::size_t i = 0; i < ch.kinds.size(); ++i)
				{
					const EstimatorKind k = ch.kinds[i];
					const bool robust = is_robust(k);
					const FilterRealization &fwd =
						robust ? ch.bank.robust.forward.realization : ch.bank.kalman_fwd.realization;
					Eigen::Matrix2Xd est;
					if (is_smoother(k))
					{
						const FilterRealization &bwd =
							robust ? ch.bank.robust.backward.realization : ch.bank.kalman_bwd.realization;
						const Combiner &w = robust ? ch.bank.robust.smoother.combiner : ch.bank.rts;
						est = run_smoother(traj.theta, fwd, bwd, w, cfg.dt);
					}
					else
					{
						est = run_filter(traj.theta, fwd, cfg.dt);
					}
					per_kind[i].push_back(trial_errors(phi, est.row(0).transpose(), cfg.discard_fraction));
				}
			}

			for (std::size_t i = 0; i < ch.kinds.size(); ++i)
			{
				McEstimatorResult r;
				r.kind = ch.kinds[i];
				r.analytic = analytic.err[static_cast<std::size_t>(r.kind)];
				r.empirical = aggregate(per_kind[i]);
				r.z_score = (r.empirical.mse - r.analytic) / r.empirical.std_error;
				for (std::size_t j = 0; j < order.size(); ++j)
					if (order[j] == r.kind)
						out[j] = r;
			}
		}
	} // namespace

	McPoint monte_carlo_point(const Scenario &sc, double delta, const SimConfig &cfg,
							  std::span<const EstimatorKind> kinds)
	{
		cfg.validate(sc.process.omega_r);
		const UncertaintyStructure u = sc.uncertainty();

		Channel kalman, robust;
		for (EstimatorKind k : kinds)
			(is_robust(k) ? robust : kalman).kinds.push_back(k);

		if (sc.state == StateKind::coherent)
		{
			// One measurement record serves every estimator.
			kalman.bank = design_estimators(sc.coherent_model(), u);
			kalman.kinds.assign(kinds.begin(), kinds.end());
			robust.kinds.clear();
		}
		else
		{
			if (!kalman.kinds.empty())
				kalman.bank = design_estimators(squeezed_fixed_point(sc, delta, EstimatorKind::kalman_filter).model, u);
			if (!robust.kinds.empty())
				robust.bank = design_estimators(squeezed_fixed_point(sc, delta, EstimatorKind::robust_filter).model, u);
		}

		McPoint point;
		point.delta = delta;
		point.mu = sc.mu;
		point.results.resize(kinds.size());
		simulate_channel(kalman, delta, cfg, sc.smoother_model, point.results, kinds);
		simulate_channel(robust, delta, cfg, sc.smoother_model, point.results, kinds);
		return point;
	}
} // namespace rsk
