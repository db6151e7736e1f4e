#include <rsk/analysis.hpp>

#include <doctest.h>

#include <cmath>

namespace
{
	rsk::Scenario coherent(double mu, rsk::SmootherErrorModel model = rsk::SmootherErrorModel::combiner)
	{
		rsk::Scenario sc;
		sc.mu = mu;
		sc.smoother_model = model;
		return sc;
	}

	rsk::EstimatorBank bank(double mu)
	{
		const rsk::Scenario sc = coherent(mu);
		return rsk::design_estimators(sc.coherent_model(), sc.uncertainty());
	}

	constexpr double kPs11 = 3.7748607e-3;
} // namespace

TEST_CASE("augmented system blocks")
{
	const rsk::EstimatorBank b = bank(0.8);
	const rsk::StateSpaceModel &ss = b.model;

	const rsk::AugmentedSystem f = rsk::augment(ss.A, ss.G, ss.H, ss.J, b.kalman_fwd.realization);
	CHECK(f.A_bar.topLeftCorner<2, 2>() == ss.A);
	CHECK(f.A_bar.topRightCorner<2, 2>().isZero());
	CHECK(f.A_bar.bottomRightCorner<2, 2>() == b.kalman_fwd.realization.dynamics);
	CHECK((f.A_bar.bottomRightCorner<2, 2>() - (ss.A - b.kalman_fwd.K * ss.H)).norm() < 1e-12 * ss.A.norm());
	CHECK(f.B_bar.col(0).head<2>() == ss.G);
	CHECK(f.B_bar.col(1).head<2>().isZero());

	const rsk::AugmentedSystem bw = rsk::augment(ss.A, ss.G, ss.H, ss.J, b.kalman_bwd.realization);
	CHECK((bw.A_bar.bottomRightCorner<2, 2>() - (-ss.A - b.kalman_bwd.K * ss.H)).norm() < 1e-12 * ss.A.norm());

	const rsk::Mat2 true_A = rsk::apply_uncertainty(ss.A, ss.G, b.uncertainty, 1.0);
	CHECK(rsk::is_hurwitz(rsk::augment(true_A, ss.G, ss.H, ss.J, b.robust.forward.realization).A_bar));
}

TEST_CASE("augment rejects an unstable plant")
{
	const rsk::EstimatorBank b = bank(0.5);
	rsk::Mat2 unstable = b.model.A;
	unstable(1, 1) = -unstable(1, 1);
	CHECK_THROWS_AS(rsk::augment(unstable, b.model.G, b.model.H, 1.0, b.kalman_fwd.realization), rsk::Error);
}

TEST_CASE("Lyapunov error analysis recovers the Riccati covariances at the design point")
{
	const rsk::EstimatorBank b = bank(0.5);
	const rsk::StateSpaceModel &ss = b.model;
	const rsk::ErrorDecomposition d = rsk::decompose(ss.A, ss, b.kalman_fwd.realization, b.kalman_bwd.realization, b.rts);
	CHECK(std::abs(d.Pi_f(0, 0) - b.kalman_fwd.P(0, 0)) < 1e-8 * b.kalman_fwd.P(0, 0));
	CHECK(std::abs(d.Pi_b(0, 0) - b.kalman_bwd.P(0, 0)) < 1e-8 * b.kalman_bwd.P(0, 0));
	CHECK((d.Pi_f - b.kalman_fwd.P).norm() < 1e-8 * b.kalman_fwd.P.norm());
	CHECK((d.Pi_b - b.kalman_bwd.P).norm() < 1e-8 * b.kalman_bwd.P.norm());
	CHECK(std::abs(d.Pi_fb(0, 0)) < 1e-6 * b.P_s(0, 0));
	CHECK(d.Pi == doctest::Approx(kPs11).epsilon(1e-4));
	CHECK(std::abs(d.Pi - b.P_s(0, 0)) < 1e-6 * b.P_s(0, 0));
	CHECK(d.max_lyapunov_residual < 1e-8);
}

TEST_CASE("error blocks of a silent estimator")
{
	const rsk::EstimatorBank b = bank(0.0);
	const rsk::StateSpaceModel &ss = b.model;
	const rsk::FilterRealization silent{ss.A, rsk::Vec2::Zero(), rsk::Direction::forward};
	const rsk::ErrorBlocks e = rsk::error_covariance(rsk::augment(ss.A, ss.G, ss.H, ss.J, silent));
	CHECK(e.N.norm() < 1e-12 * e.Sigma.norm());
	CHECK(e.M.norm() < 1e-12 * e.Sigma.norm());
	CHECK((e.Pi - e.Sigma).norm() < 1e-12 * e.Sigma.norm());
}

TEST_CASE("cross correlation trivial cases")
{
	rsk::Mat2 sigma;
	sigma << 2.0, 0.3, 0.3, 5.0;
	CHECK(rsk::cross_correlation(sigma, sigma, sigma).norm() < 1e-14);
	CHECK((rsk::cross_correlation(sigma, rsk::Mat2::Zero(), rsk::Mat2::Zero()) - sigma).norm() == 0.0);
	CHECK_THROWS_AS(rsk::cross_correlation(rsk::Mat2::Zero(), sigma, sigma), rsk::Error);
}

TEST_CASE("scalar smoother formula")
{
	CHECK(rsk::smoother_error(1.0, 3.0, 0.0) == doctest::Approx(0.75));
	CHECK(rsk::smoother_error(2.0, 2.0, 2.0 - 1e-9) == doctest::Approx(2.0).epsilon(1e-6));
	CHECK_THROWS_AS(rsk::smoother_error(2.0, 2.0, 2.0), rsk::Error);
}

TEST_CASE("combined error with degenerate weights")
{
	rsk::Mat2 pf, pb, pfb;
	pf << 2, 0.1, 0.1, 3;
	pb << 4, 0, 0, 1;
	pfb << 0.5, 0.2, 0.1, 0.3;
	const rsk::Combiner only_forward{rsk::Mat2::Identity(), rsk::Mat2::Zero()};
	CHECK((rsk::combined_error(pf, pb, pfb, only_forward) - pf).norm() == 0.0);
	const rsk::Combiner half{0.5 * rsk::Mat2::Identity(), 0.5 * rsk::Mat2::Identity()};
	const rsk::Mat2 c = rsk::combined_error(pf, pb, pfb, half);
	CHECK((c - 0.25 * (pf + pb + pfb + pfb.transpose())).norm() < 1e-15);
}

TEST_CASE("nominal errors at delta = 0")
{
	const rsk::EstimatorBank b = bank(0.5);
	const rsk::Evaluation ev = rsk::evaluate_all(b, 0.0);
	CHECK(ev.err[1] == doctest::Approx(kPs11).epsilon(1e-4));
	CHECK(ev.err[0] == doctest::Approx(b.kalman_fwd.P(0, 0)).epsilon(1e-8));
	CHECK(ev.err[1] <= ev.err[3]);
	CHECK(ev.err[3] <= ev.err[2]);
	CHECK(ev.err[1] <= ev.err[0]);
	for (rsk::EstimatorKind k : rsk::kAllEstimators)
		CHECK(rsk::evaluate_estimator(b, 0.0, k) == ev.err[static_cast<std::size_t>(k)]);
}

TEST_CASE("scalar smoother model")
{
	const rsk::EstimatorBank b = bank(0.5);
	const double scalar = rsk::evaluate_estimator(b, 0.0, rsk::EstimatorKind::rts_smoother,
												  rsk::SmootherErrorModel::scalar);
	const double combiner = rsk::evaluate_estimator(b, 0.0, rsk::EstimatorKind::rts_smoother);
	CHECK(scalar > combiner);
	CHECK(rsk::evaluate_estimator(b, 0.3, rsk::EstimatorKind::kalman_filter, rsk::SmootherErrorModel::scalar) ==
		  rsk::evaluate_estimator(b, 0.3, rsk::EstimatorKind::kalman_filter));
}

TEST_CASE("time-reversed dynamics")
{
	const rsk::EstimatorBank b = bank(0.0);
	const rsk::Mat2 rev = rsk::time_reversed_dynamics(b.model.A, b.model.G);
	CHECK(rsk::is_hurwitz(rev));
	// Same stationary covariance under reversal.
	const rsk::Mat2 s1 = rsk::solve_lyapunov<double>(rsk::DenseMatrix<double>(b.model.A),
													 rsk::DenseMatrix<double>(b.model.G * b.model.G.transpose()));
	const rsk::Mat2 s2 = rsk::solve_lyapunov<double>(rsk::DenseMatrix<double>(rev),
													 rsk::DenseMatrix<double>(b.model.G * b.model.G.transpose()));
	CHECK((s1 - s2).norm() < 1e-10 * s1.norm());
}

TEST_CASE("squeezed fixed point")
{
	rsk::Scenario sc = coherent(0.5);
	sc.state = rsk::StateKind::squeezed;

	const rsk::SqueezedOperatingPoint k = rsk::squeezed_fixed_point(sc, 0.0, rsk::EstimatorKind::kalman_filter);
	const double coherent_sigma = bank(0.5).kalman_fwd.P(0, 0);
	CHECK(k.sigma_f_sq < coherent_sigma);
	CHECK(k.last_step < rsk::kFixedPointTolerance);
	CHECK(k.iterations <= rsk::kFixedPointMaxIterations);
	CHECK(k.history.front() == doctest::Approx(coherent_sigma).epsilon(1e-12));
	CHECK(k.R_sq == doctest::Approx(rsk::build_squeezed_measurement(sc.beam, k.sigma_f_sq).R_sq).epsilon(1e-5));

	const std::size_t n = k.history.size();
	REQUIRE(n >= 3);
	for (std::size_t i = std::max<std::size_t>(2, n >= 5 ? n - 5 : 2); i < n; ++i)
		CHECK(std::abs(k.history[i] - k.history[i - 1]) < std::abs(k.history[i - 1] - k.history[i - 2]));

	const rsk::SqueezedOperatingPoint r = rsk::squeezed_fixed_point(sc, 0.7, rsk::EstimatorKind::robust_filter);
	CHECK(r.last_step < rsk::kFixedPointTolerance);

	rsk::Scenario off = sc;
	off.beam.r_m = 0;
	off.beam.r_p = 0;
	const rsk::SqueezedOperatingPoint o = rsk::squeezed_fixed_point(off, 0.0, rsk::EstimatorKind::kalman_filter);
	CHECK(o.iterations == 1);
	CHECK(o.R_sq == 1.0);
	CHECK(o.sigma_f_sq == doctest::Approx(coherent_sigma).epsilon(1e-12));

	CHECK_THROWS_AS(rsk::squeezed_fixed_point(sc, 0.0, rsk::EstimatorKind::rts_smoother), rsk::Error);
}

TEST_CASE("delta grid")
{
	CHECK(rsk::uniform_grid(1) == std::vector<double>{0.0});
	const std::vector<double> g = rsk::uniform_grid(201);
	REQUIRE(g.size() == 201);
	CHECK(g.front() == -1.0);
	CHECK(g.back() == 1.0);
	CHECK(g[100] == 0.0);
	CHECK(g[101] == doctest::Approx(0.01));
	CHECK_THROWS_AS(rsk::uniform_grid(4), rsk::Error);
	CHECK_THROWS_AS(rsk::uniform_grid(0), rsk::Error);
}

TEST_CASE("single-point sweep matches direct evaluation")
{
	const double zero[] = {0.0};
	const rsk::ErrorReport r = rsk::sweep_delta(coherent(0.5), zero);
	REQUIRE(r.rows.size() == 1);
	const rsk::Evaluation ev = rsk::evaluate_all(bank(0.5), 0.0);
	CHECK(r.rows[0].err == ev.err);
	CHECK(r.rows[0].error(rsk::EstimatorKind::rts_smoother) == doctest::Approx(kPs11).epsilon(1e-4));
	CHECK(rsk::worst_case(r, rsk::EstimatorKind::kalman_filter).delta == 0.0);
}

TEST_CASE("coherent sweep shape")
{
	const std::vector<double> grid = rsk::uniform_grid(201);
	for (double mu : {0.5, 0.7, 0.8})
	{
		const rsk::ErrorReport r = rsk::sweep_delta(coherent(mu), grid);
		REQUIRE(r.rows.size() == 201);
		for (std::size_t i = 0; i < r.rows.size(); ++i)
		{
			const rsk::ErrorRow &row = r.rows[i];
			CHECK(row.error(rsk::EstimatorKind::robust_smoother) <=
				  row.error(rsk::EstimatorKind::robust_filter) + 1e-12);
			CHECK(row.error(rsk::EstimatorKind::rts_smoother) <= row.error(rsk::EstimatorKind::kalman_filter) + 1e-12);
			if (i > 0)
				for (std::size_t k = 0; k < 4; ++k)
					CHECK(std::abs(row.err[k] - r.rows[i - 1].err[k]) < 0.2 * r.rows[i - 1].err[k]);
		}
		CHECK(rsk::worst_case(r, rsk::EstimatorKind::robust_smoother).error <
			  rsk::worst_case(r, rsk::EstimatorKind::rts_smoother).error);
		CHECK(r.diagnostics.max_riccati_residual < 1e-8);
		CHECK(r.diagnostics.max_lyapunov_residual < 1e-8);
	}
	const rsk::ErrorReport r8 = rsk::sweep_delta(coherent(0.8), grid);
	CHECK(std::abs(rsk::worst_case(r8, rsk::EstimatorKind::rts_smoother).delta) == 1.0);
}

TEST_CASE("sweep rejects malformed grids")
{
	const double unsorted[] = {0.5, 0.0, 1.0};
	const double wide[] = {-2.0, 0.0, 2.0};
	CHECK_THROWS_AS(rsk::sweep_delta(coherent(0.5), unsorted), rsk::Error);
	CHECK_THROWS_AS(rsk::sweep_delta(coherent(0.5), wide), rsk::Error);
}

TEST_CASE("worst case prefers the smaller |delta| on ties")
{
	rsk::ErrorReport r;
	for (double d : {-1.0, -0.5, 0.0, 0.5, 1.0})
	{
		rsk::ErrorRow row;
		row.delta = d;
		row.err = {1.0, std::abs(d) == 0.5 ? 2.0 : 1.0, 1.0, 1.0};
		r.rows.push_back(row);
	}
	CHECK(rsk::worst_case(r, rsk::EstimatorKind::rts_smoother).delta == -0.5);
	CHECK(rsk::worst_case(r, rsk::EstimatorKind::kalman_filter).delta == 0.0);
	CHECK_THROWS_AS(rsk::worst_case(rsk::ErrorReport{}, rsk::EstimatorKind::kalman_filter), rsk::Error);
}

TEST_CASE("decibels")
{
	CHECK(rsk::to_db(1.0) == 0.0);
	CHECK(rsk::to_db(0.1) == doctest::Approx(-10.0));
	CHECK(rsk::to_db(kPs11) == doctest::Approx(-24.231).epsilon(1e-4));
	CHECK_THROWS_AS(rsk::to_db(0.0), rsk::Error);
	CHECK_THROWS_AS(rsk::to_db(-1.0), rsk::Error);
}

TEST_CASE("names round-trip")
{
	for (rsk::EstimatorKind k : rsk::kAllEstimators)
		CHECK(rsk::parse_estimator(rsk::to_string(k)) == k);
	CHECK_FALSE(rsk::parse_estimator("kalman").has_value());
	CHECK(rsk::parse_state("squeezed") == rsk::StateKind::squeezed);
	CHECK(rsk::parse_smoother_model("scalar") == rsk::SmootherErrorModel::scalar);
}
