#include <rsk/model.hpp>
#include <rsk/solvers.hpp>

#include <doctest.h>

#include <random>

using rsk::DenseMatrix;
using Mat = DenseMatrix<double>;

namespace
{
	// vec(A X + X A^T) = (I (x) A + A (x) I) vec(X), solved densely.
	Mat lyapunov_by_kronecker(const Mat &a, const Mat &q)
	{
		const Eigen::Index n = a.rows();
		Mat big = Mat::Zero(n * n, n * n);
		for (Eigen::Index i = 0; i < n; ++i)
			for (Eigen::Index j = 0; j < n; ++j)
				for (Eigen::Index k = 0; k < n; ++k)
				{
					big(i + j * n, k + j * n) += a(i, k);
					big(i + j * n, i + k * n) += a(j, k);
				}
		Eigen::VectorXd rhs(n * n);
		for (Eigen::Index j = 0; j < n; ++j)
			rhs.segment(j * n, n) = -q.col(j);
		const Eigen::VectorXd x = big.fullPivLu().solve(rhs);
		Mat out(n, n);
		for (Eigen::Index j = 0; j < n; ++j)
			out.col(j) = x.segment(j * n, n);
		return out;
	}

	Mat random_hurwitz(std::mt19937_64 &rng, Eigen::Index n)
	{
		std::normal_distribution<double> nd;
		Mat a(n, n);
		for (Eigen::Index i = 0; i < n; ++i)
			for (Eigen::Index j = 0; j < n; ++j)
				a(i, j) = nd(rng);
		const double shift = std::max(0.0, rsk::spectral_abscissa(a)) + 0.5;
		return a - shift * Mat::Identity(n, n);
	}

	Mat mat1(double x) { return Mat::Constant(1, 1, x); }
} // namespace

TEST_CASE("scalar CARE picks the stabilizing root")
{
	const auto sol = rsk::solve_care<double>(mat1(-1), mat1(1), mat1(3));
	CHECK(sol.X(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
	CHECK(sol.closed_loop_stable);
	CHECK(sol.residual_norm < 1e-12);
}

TEST_CASE("CARE with S = 0 is a Lyapunov equation")
{
	const Mat a = -Mat::Identity(2, 2);
	const auto sol = rsk::solve_care<double>(a, Mat::Zero(2, 2), 2 * Mat::Identity(2, 2));
	CHECK((sol.X - Mat::Identity(2, 2)).norm() < 1e-12);

	std::mt19937_64 rng(7);
	for (int trial = 0; trial < 10; ++trial)
	{
		const Mat h = random_hurwitz(rng, 3);
		Mat q = Mat::Random(3, 3);
		q = q * q.transpose() + Mat::Identity(3, 3);
		const Mat x = rsk::solve_care<double>(h, Mat::Zero(3, 3), q).X;
		const Mat y = rsk::solve_lyapunov<double>(Mat(h.transpose()), q);
		CHECK((x - y).norm() / y.norm() < 1e-10);
	}
}

TEST_CASE("CARE on the resonant Kalman problem")
{
	const auto p = rsk::DefaultParameters::resonant();
	const auto proc = rsk::build_process(p);
	const auto meas = rsk::build_coherent_measurement(rsk::DefaultParameters::alpha_mag);
	const Mat a = proc.A.transpose();
	const Mat s = meas.H.transpose() * meas.H;
	const Mat q = proc.G * proc.G.transpose();
	const auto sol = rsk::solve_care<double>(a, s, q);

	// scipy.linalg.solve_continuous_are on the same data.
	CHECK(sol.X(0, 0) == doctest::Approx(9.660395605384e-03).epsilon(1e-9));
	CHECK(sol.X(0, 1) == doctest::Approx(4.666162162626e+01).epsilon(1e-9));
	CHECK(sol.X(1, 1) == doctest::Approx(8.907593549273e+05).epsilon(1e-9));
	CHECK(sol.residual_norm < 1e-8);
	CHECK(rsk::symmetry_error(sol.X) == 0.0);
	CHECK(rsk::is_hurwitz(a - s * sol.X));
}

TEST_CASE("CARE solution scales with Q and inversely with S")
{
	std::mt19937_64 rng(11);
	for (int trial = 0; trial < 5; ++trial)
	{
		const Mat a = random_hurwitz(rng, 3) + 0.3 * Mat::Identity(3, 3);
		Mat b = Mat::Random(3, 2);
		const Mat s = b * b.transpose();
		Mat c = Mat::Random(3, 3);
		const Mat q = c * c.transpose() + 0.1 * Mat::Identity(3, 3);
		const Mat x1 = rsk::solve_care<double>(a, s, q).X;
		const Mat x2 = rsk::solve_care<double>(a, s / 4, 4 * q).X;
		CHECK((x2 - 4 * x1).norm() / x1.norm() < 1e-9);
	}
}

TEST_CASE("CARE rejects imaginary-axis Hamiltonians")
{
	// a = 0, s = 0, q = 0: both Hamiltonian eigenvalues at the origin.
	CHECK_THROWS_AS(rsk::solve_care<double>(mat1(0), mat1(0), mat1(0)), rsk::Error);
	try
	{
		rsk::solve_care<double>(mat1(0), mat1(0), mat1(0));
	}
	catch (const rsk::Error &e)
	{
		CHECK(e.kind() == rsk::ErrorKind::ImaginaryAxisEigenvalue);
	}
	CHECK_THROWS_AS(rsk::solve_care<double>(Mat::Zero(2, 2), Mat::Zero(2, 2), Mat::Identity(2, 2)), rsk::Error);
}

TEST_CASE("Lyapunov: trivial cases")
{
	CHECK((rsk::solve_lyapunov<double>(-Mat::Identity(2, 2), 2 * Mat::Identity(2, 2)) - Mat::Identity(2, 2)).norm() <
		  1e-14);
	CHECK(rsk::solve_lyapunov<double>(mat1(-3), mat1(6))(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("Lyapunov matches the Kronecker-product oracle")
{
	std::mt19937_64 rng(3);
	for (Eigen::Index n : {2, 3, 4, 6})
	{
		const Mat a = random_hurwitz(rng, n);
		Mat c = Mat::Random(n, n);
		const Mat q = c * c.transpose();
		const Mat x = rsk::solve_lyapunov<double>(a, q);
		const Mat ref = lyapunov_by_kronecker(a, q);
		CHECK((x - ref).norm() / ref.norm() < 1e-10);
		CHECK(rsk::lyapunov_residual(a, q, x) / q.norm() < 1e-10);
		CHECK(rsk::symmetry_error(x) == 0.0);
	}
}

TEST_CASE("Lyapunov: stationary covariance of the resonant plant")
{
	const auto p = rsk::DefaultParameters::resonant();
	const auto proc = rsk::build_process(p);
	const Mat sigma = rsk::solve_lyapunov<double>(Mat(proc.A), Mat(proc.G * proc.G.transpose()));
	const double w3 = p.omega_r * p.omega_r * p.omega_r;
	CHECK(sigma(0, 0) == doctest::Approx(p.kappa * p.kappa / (4 * p.zeta * w3)).epsilon(1e-10));
	CHECK(sigma(1, 1) == doctest::Approx(p.kappa * p.kappa / (4 * p.zeta * p.omega_r)).epsilon(1e-10));
	CHECK(std::abs(sigma(0, 1)) < 1e-10 * sigma(0, 0));
}

TEST_CASE("Lyapunov rejects non-Hurwitz matrices")
{
	CHECK_THROWS_AS(rsk::solve_lyapunov<double>(mat1(0), mat1(1)), rsk::Error);
	CHECK_THROWS_AS(rsk::solve_lyapunov<double>(Mat::Identity(2, 2), Mat::Identity(2, 2)), rsk::Error);
}

TEST_CASE("is_hurwitz")
{
	const auto proc = rsk::build_process(rsk::DefaultParameters::resonant());
	CHECK(rsk::is_hurwitz(proc.A));
	CHECK_FALSE(rsk::is_hurwitz(Mat(-proc.A)));
	CHECK_FALSE(rsk::is_hurwitz(mat1(0)));
	CHECK(rsk::spectral_abscissa(proc.A) == doctest::Approx(-0.1 * 6.283e3));
}

TEST_CASE("solvers work in long double")
{
	using L = DenseMatrix<long double>;
	const auto sol = rsk::solve_care<long double>(L::Constant(1, 1, -1), L::Constant(1, 1, 1), L::Constant(1, 1, 3));
	CHECK(std::abs(sol.X(0, 0) - 1.0L) < 1e-15L);
	const L x = rsk::solve_lyapunov<long double>(L::Constant(1, 1, -3), L::Constant(1, 1, 6));
	CHECK(std::abs(x(0, 0) - 1.0L) < 1e-15L);
}

TEST_CASE("dimension mismatch and non-finite input")
{
	CHECK_THROWS_AS(rsk::solve_care<double>(Mat::Identity(2, 2), mat1(1), mat1(1)), rsk::Error);
	CHECK_THROWS_AS(rsk::solve_lyapunov<double>(mat1(std::nan("")), mat1(1)), rsk::Error);
}
