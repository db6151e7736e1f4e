#pragma once

// Dense kernels for small (n <= 8) continuous-time matrix equations.
//
//   CARE:      A^T X + X A - X S X + Q = 0,  stabilizing solution (A - S X Hurwitz)
//   Lyapunov:  A X + X A^T + Q = 0,          A Hurwitz
//
// Both go through a complex Schur form. The CARE selects the stable invariant
// subspace of the Hamiltonian by reordering the triangular factor with Givens
// swaps; the Lyapunov solver is Bartels-Stewart on the triangular factor.

#include <rsk/common.hpp>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <limits>
#include <string>

namespace rsk
{
	template <typename Scalar>
	using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

	template <typename Scalar>
	struct RiccatiSolution
	{
		DenseMatrix<Scalar> X;
		/// ||A^T X + X A - X S X + Q||_F / ||Q||_F (falls back to the size of the
		/// individual terms when Q = 0).
		Scalar residual_norm = Scalar(0);
		bool closed_loop_stable = false;
	};

	/// Largest real part over the spectrum of a square matrix.
	template <typename Derived>
	typename Derived::RealScalar spectral_abscissa(const Eigen::MatrixBase<Derived> &a)
	{
		using Real = typename Derived::RealScalar;
		if (a.rows() != a.cols())
			throw Error(ErrorKind::InvalidArgument, "spectral_abscissa: matrix is not square");
		if (a.size() == 0)
			return -std::numeric_limits<Real>::infinity();
		if (!a.allFinite())
			throw Error(ErrorKind::InvalidArgument, "spectral_abscissa: non-finite entries");
		const DenseMatrix<Real> m = a.template cast<Real>();
		Eigen::EigenSolver<DenseMatrix<Real>> es(m, false);
		if (es.info() != Eigen::Success)
			throw Error(ErrorKind::NonConvergence, "eigenvalue iteration failed");
		return es.eigenvalues().real().maxCoeff();
	}

	/// True iff every eigenvalue has strictly negative real part.
	template <typename Derived>
	bool is_hurwitz(const Eigen::MatrixBase<Derived> &a)
	{
		return spectral_abscissa(a) < 0;
	}

	template <typename Scalar>
	Scalar symmetry_error(const DenseMatrix<Scalar> &x)
	{
		const Scalar nx = x.norm();
		return nx == Scalar(0) ? Scalar(0) : (x - x.transpose()).norm() / nx;
	}

	namespace detail
	{
		template <typename Scalar>
		using ComplexMatrix = DenseMatrix<std::complex<Scalar>>;

		// Swap the adjacent diagonal entries k, k+1 of the upper-triangular T,
		// updating the unitary factor so that U T U^H is unchanged.
		template <typename Scalar>
		void swap_schur_pair(ComplexMatrix<Scalar> &t, ComplexMatrix<Scalar> &u, Eigen::Index k)
		{
			using Complex = std::complex<Scalar>;
			const Eigen::Index n = t.rows();
			const Complex t11 = t(k, k);
			const Complex t22 = t(k + 1, k + 1);

			// Eigenvector of the 2x2 block belonging to t22.
			Complex a = t(k, k + 1);
			Complex b = t22 - t11;
			const Scalar nrm = std::sqrt(std::norm(a) + std::norm(b));
			if (nrm == Scalar(0))
				return;
			a /= nrm;
			b /= nrm;

			Eigen::Matrix<Complex, 2, 2> g;
			g << a, -std::conj(b),
				b, std::conj(a);

			t.block(k, k, 2, n - k) = g.adjoint() * t.block(k, k, 2, n - k);
			t.block(0, k, k + 2, 2) = t.block(0, k, k + 2, 2) * g;
			u.block(0, k, n, 2) = u.block(0, k, n, 2) * g;

			t(k + 1, k) = Complex(0);
			t(k, k) = t22;
			t(k + 1, k + 1) = t11;
		}

		// Reorder so that eigenvalues with negative real part lead. Returns the
		// number of leading stable eigenvalues.
		template <typename Scalar>
		Eigen::Index order_stable_first(ComplexMatrix<Scalar> &t, ComplexMatrix<Scalar> &u)
		{
			const Eigen::Index n = t.rows();
			bool swapped = true;
			while (swapped)
			{
				swapped = false;
				for (Eigen::Index k = 0; k + 1 < n; ++k)
				{
					if (t(k, k).real() >= Scalar(0) && t(k + 1, k + 1).real() < Scalar(0))
					{
						swap_schur_pair(t, u, k);
						swapped = true;
					}
				}
			}
			Eigen::Index stable = 0;
			while (stable < n && t(stable, stable).real() < Scalar(0))
				++stable;
			return stable;
		}

		template <typename Scalar>
		Scalar care_residual_scale(const DenseMatrix<Scalar> &a, const DenseMatrix<Scalar> &s,
								   const DenseMatrix<Scalar> &q, const DenseMatrix<Scalar> &x)
		{
			const Scalar nq = q.norm();
			if (nq > Scalar(0))
				return nq;
			const Scalar terms = Scalar(2) * (a.transpose() * x).norm() + (x * s * x).norm();
			return terms > Scalar(0) ? terms : Scalar(1);
		}
	} // namespace detail

	/// Frobenius norm of A^T X + X A - X S X + Q.
	template <typename Scalar>
	Scalar care_residual(const DenseMatrix<Scalar> &a, const DenseMatrix<Scalar> &s,
						 const DenseMatrix<Scalar> &q, const DenseMatrix<Scalar> &x)
	{
		return (a.transpose() * x + x * a - x * s * x + q).norm();
	}

	/// Frobenius norm of A X + X A^T + Q.
	template <typename Scalar>
	Scalar lyapunov_residual(const DenseMatrix<Scalar> &a, const DenseMatrix<Scalar> &q,
							 const DenseMatrix<Scalar> &x)
	{
		return (a * x + x * a.transpose() + q).norm();
	}

	/// Stabilizing solution of A^T X + X A - X S X + Q = 0.
	///
	/// S is expected positive semidefinite, Q symmetric (possibly indefinite).
	/// Throws ImaginaryAxisEigenvalue when the Hamiltonian has eigenvalues on the
	/// imaginary axis (no stabilizing solution exists), NonConvergence when the
	/// result fails the 1e-8 relative residual or the closed-loop stability check.
	template <typename Scalar>
	RiccatiSolution<Scalar> solve_care(const DenseMatrix<Scalar> &a, const DenseMatrix<Scalar> &s,
									   const DenseMatrix<Scalar> &q)
	{
		using Complex = std::complex<Scalar>;
		const Eigen::Index n = a.rows();
		if (a.cols() != n || s.rows() != n || s.cols() != n || q.rows() != n || q.cols() != n)
			throw Error(ErrorKind::InvalidArgument, "solve_care: dimension mismatch");
		if (!a.allFinite() || !s.allFinite() || !q.allFinite())
			throw Error(ErrorKind::InvalidArgument, "solve_care: non-finite input");

		DenseMatrix<Scalar> ham(2 * n, 2 * n);
		ham << a, -s,
			-q, -a.transpose();

		Eigen::ComplexSchur<detail::ComplexMatrix<Scalar>> schur(ham.template cast<Complex>());
		if (schur.info() != Eigen::Success)
			throw Error(ErrorKind::NonConvergence, "solve_care: Schur iteration did not converge");
		detail::ComplexMatrix<Scalar> t = schur.matrixT();
		detail::ComplexMatrix<Scalar> u = schur.matrixU();

		const Scalar axis_tol = Scalar(1e-9) * std::max(a.norm(), Scalar(1));
		for (Eigen::Index i = 0; i < 2 * n; ++i)
		{
			if (std::abs(t(i, i).real()) <= axis_tol)
				throw Error(ErrorKind::ImaginaryAxisEigenvalue,
							"Hamiltonian eigenvalue with |Re| <= " + std::to_string(axis_tol));
		}

		if (detail::order_stable_first(t, u) != n)
			throw Error(ErrorKind::ImaginaryAxisEigenvalue, "Hamiltonian spectrum is not split n/n");

		const detail::ComplexMatrix<Scalar> u11 = u.topLeftCorner(n, n);
		const detail::ComplexMatrix<Scalar> u21 = u.bottomLeftCorner(n, n);
		Eigen::FullPivLU<detail::ComplexMatrix<Scalar>> lu(u11.transpose());
		if (!lu.isInvertible())
			throw Error(ErrorKind::SingularMatrix, "solve_care: stable subspace is not a graph (U11 singular)");
		const detail::ComplexMatrix<Scalar> xc = lu.solve(u21.transpose()).transpose();

		RiccatiSolution<Scalar> out;
		out.X = xc.real();
		out.X = Scalar(0.5) * (out.X + out.X.transpose()).eval();
		out.residual_norm = care_residual(a, s, q, out.X) / detail::care_residual_scale(a, s, q, out.X);
		out.closed_loop_stable = is_hurwitz(a - s * out.X);
		if (!(out.residual_norm < Scalar(1e-8)) || !out.closed_loop_stable)
			throw Error(ErrorKind::NonConvergence,
						"solve_care: rejected solution (relative residual " + std::to_string(double(out.residual_norm)) +
							(out.closed_loop_stable ? ")" : ", closed loop unstable)"));
		return out;
	}

	/// Solution of A X + X A^T + Q = 0 for Hurwitz A (Bartels-Stewart).
	template <typename Scalar>
	DenseMatrix<Scalar> solve_lyapunov(const DenseMatrix<Scalar> &a, const DenseMatrix<Scalar> &q)
	{
		using Complex = std::complex<Scalar>;
		const Eigen::Index n = a.rows();
		if (a.cols() != n || q.rows() != n || q.cols() != n)
			throw Error(ErrorKind::InvalidArgument, "solve_lyapunov: dimension mismatch");
		if (!a.allFinite() || !q.allFinite())
			throw Error(ErrorKind::InvalidArgument, "solve_lyapunov: non-finite input");

		Eigen::ComplexSchur<detail::ComplexMatrix<Scalar>> schur(a.template cast<Complex>());
		if (schur.info() != Eigen::Success)
			throw Error(ErrorKind::NonConvergence, "solve_lyapunov: Schur iteration did not converge");
		const detail::ComplexMatrix<Scalar> &t = schur.matrixT();
		const detail::ComplexMatrix<Scalar> &u = schur.matrixU();

		const Scalar margin = Scalar(1e-10) * std::max(a.norm(), Scalar(1));
		for (Eigen::Index i = 0; i < n; ++i)
		{
			if (!(t(i, i).real() < -margin))
				throw Error(ErrorKind::UnstableMatrix, "solve_lyapunov: matrix is not Hurwitz");
		}

		// T Y + Y T^H = C with C = -U^H Q U, solved column by column from the right.
		const detail::ComplexMatrix<Scalar> c = -(u.adjoint() * q.template cast<Complex>() * u);
		detail::ComplexMatrix<Scalar> y = detail::ComplexMatrix<Scalar>::Zero(n, n);
		for (Eigen::Index j = n - 1; j >= 0; --j)
		{
			Eigen::Matrix<Complex, Eigen::Dynamic, 1> rhs = c.col(j);
			for (Eigen::Index k = j + 1; k < n; ++k)
				rhs -= std::conj(t(j, k)) * y.col(k);
			detail::ComplexMatrix<Scalar> shifted = t;
			shifted.diagonal().array() += std::conj(t(j, j));
			y.col(j) = shifted.template triangularView<Eigen::Upper>().solve(rhs);
		}

		DenseMatrix<Scalar> x = (u * y * u.adjoint()).real();
		return Scalar(0.5) * (x + x.transpose());
	}
} // namespace rsk
