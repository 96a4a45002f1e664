#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace seqcal {

template <typename Scalar>
struct SimplexLsqResult {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x;
    Scalar residual = 0;
    int iterations = 0;
};

namespace detail {

// min ||A_P z - b|| subject to sum(z) = 1 over the columns in `cols`, no sign
// constraint. z = 1/p + Z t with Z an orthonormal basis of the complement of
// the ones vector; t is the minimum-norm least-squares solution.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> affine_lsq(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& A,
                                                    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& b,
                                                    const std::vector<int>& cols)
{
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    const int p = static_cast<int>(cols.size());
    Matrix Ap(A.rows(), p);
    for (int j = 0; j < p; ++j)
        Ap.col(j) = A.col(cols[j]);
    Vector z = Vector::Constant(p, Scalar(1) / p);
    if (p == 1)
        return z;
    const Matrix ones = Matrix::Ones(p, 1);
    const Matrix Q = Eigen::HouseholderQR<Matrix>(ones).householderQ();
    const Matrix Z = Q.rightCols(p - 1);
    const Vector rhs = b - Ap * z;
    const Vector t = Eigen::CompleteOrthogonalDecomposition<Matrix>(Ap * Z).solve(rhs);
    z += Z * t;
    return z;
}

} // namespace detail

/// Least squares on the probability simplex:
///   minimise ||A x - b||_2  subject to  x >= 0, sum(x) = 1.
///
/// Primal active-set method in the style of Lawson-Hanson NNLS, with the
/// sum constraint carried exactly by every subproblem. Starts from the best
/// single vertex; ties are broken by lowest column index, so the result is a
/// deterministic function of (A, b).
template <typename Scalar>
SimplexLsqResult<Scalar> simplex_lsq(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& A,
                                     const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& b, int max_iterations = 0)
{
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    const int n = static_cast<int>(A.cols());
    SimplexLsqResult<Scalar> out;
    out.x = Vector::Zero(n);
    if (n == 0)
        return out;
    if (max_iterations <= 0)
        max_iterations = 30 * n + 100;

    int start = 0;
    Scalar best = std::numeric_limits<Scalar>::infinity();
    for (int j = 0; j < n; ++j) {
        const Scalar d = (A.col(j) - b).squaredNorm();
        if (d < best) {
            best = d;
            start = j;
        }
    }
    Vector x = Vector::Zero(n);
    x[start] = 1;
    std::vector<int> passive{start};
    std::vector<bool> in_passive(n, false);
    in_passive[start] = true;

    const Scalar eps = std::numeric_limits<Scalar>::epsilon();
    const Scalar a_scale = std::max<Scalar>(A.cwiseAbs().maxCoeff(), Scalar(1));
    const Scalar b_scale = std::max<Scalar>(b.cwiseAbs().maxCoeff(), Scalar(1));

    int iter = 0;
    int last_added = -1;
    for (; iter < max_iterations; ++iter) {
        const Vector r = A * x - b;
        const Scalar rnorm = r.norm();
        if (rnorm <= 4 * eps * b_scale)
            break;
        const Vector g = A.transpose() * r;
        const Scalar level = x.dot(g);
        // most negative reduced gradient among inactive columns
        const Scalar tol = 64 * eps * a_scale * rnorm * std::sqrt(Scalar(n));
        int enter = -1;
        Scalar most = -tol;
        for (int j = 0; j < n; ++j) {
            if (in_passive[j] || j == last_added)
                continue;
            const Scalar d = g[j] - level;
            if (d < most) {
                most = d;
                enter = j;
            }
        }
        if (enter < 0)
            break;
        passive.push_back(enter);
        in_passive[enter] = true;
        last_added = enter;

        // inner loop: restore feasibility of the passive set
        for (int inner = 0; inner <= n; ++inner) {
            Vector z_p = detail::affine_lsq<Scalar>(A, b, passive);
            bool feasible = true;
            for (std::size_t i = 0; i < passive.size(); ++i)
                if (!(z_p[i] > 0)) {
                    feasible = false;
                    break;
                }
            if (feasible) {
                x.setZero();
                for (std::size_t i = 0; i < passive.size(); ++i)
                    x[passive[i]] = z_p[i];
                last_added = -1;
                break;
            }
            // step from x towards z as far as nonnegativity allows
            Scalar alpha = 1;
            for (std::size_t i = 0; i < passive.size(); ++i) {
                const Scalar xi = x[passive[i]];
                if (!(z_p[i] > 0)) {
                    const Scalar denom = xi - z_p[i];
                    alpha = std::min(alpha, denom > 0 ? xi / denom : Scalar(0));
                }
            }
            for (std::size_t i = 0; i < passive.size(); ++i)
                x[passive[i]] += alpha * (z_p[i] - x[passive[i]]);
            std::vector<int> keep;
            for (int j : passive) {
                if (x[j] > eps * 16) {
                    keep.push_back(j);
                } else {
                    x[j] = 0;
                    in_passive[j] = false;
                }
            }
            if (keep.empty()) {
                // numerically degenerate step; fall back to the best vertex
                keep.push_back(start);
                x.setZero();
                x[start] = 1;
                in_passive[start] = true;
            }
            passive = std::move(keep);
            x /= x.sum();
        }
    }

    x = x.cwiseMax(Scalar(0));
    x /= x.sum();
    out.x = x;
    out.residual = (A * x - b).norm();
    out.iterations = iter;
    return out;
}

/// Closest point to `prior` among the weights that reproduce `x0`'s fit:
///   minimise ||x - prior||_2  subject to  A x = A x0, sum(x) = 1, x >= 0,
/// starting from the feasible point x0 (typically a simplex_lsq solution).
/// Primal active-set on the bound constraints; each subproblem is an
/// equality-constrained projection solved by complete orthogonal
/// decomposition.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> simplex_closest(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& A,
                                                         const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x0,
                                                         const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& prior,
                                                         int max_iterations = 0)
{
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    const int n = static_cast<int>(A.cols());
    const int m = static_cast<int>(A.rows());
    if (max_iterations <= 0)
        max_iterations = 30 * n + 100;

    Matrix E(m + 1, n);
    E.topRows(m) = A;
    E.row(m).setOnes();
    const Vector f = E * x0;

    Vector x = x0;
    std::vector<bool> bound(n);
    for (int j = 0; j < n; ++j)
        bound[j] = !(x[j] > 0);

    const Scalar eps = std::numeric_limits<Scalar>::epsilon();
    for (int iter = 0; iter < max_iterations; ++iter) {
        std::vector<int> free;
        for (int j = 0; j < n; ++j)
            if (!bound[j])
                free.push_back(j);
        const int p = static_cast<int>(free.size());
        if (p == 0)
            break;
        Matrix Ef(m + 1, p);
        Vector pf(p), xf(p);
        for (int i = 0; i < p; ++i) {
            Ef.col(i) = E.col(free[i]);
            pf[i] = prior[free[i]];
            xf[i] = x[free[i]];
        }
        // projection of the prior onto {E_F y = f}: minimum-norm correction of pf
        const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(Ef);
        Vector target = pf + cod.solve(Vector(f - Ef * pf));
        target += cod.solve(Vector(f - Ef * target));

        bool inside = true;
        for (int i = 0; i < p; ++i)
            if (target[i] < 0) {
                inside = false;
                break;
            }
        if (!inside) {
            Scalar alpha = 1;
            int blocking = -1;
            for (int i = 0; i < p; ++i) {
                if (target[i] < 0) {
                    const Scalar a = xf[i] / (xf[i] - target[i]);
                    if (a < alpha) {
                        alpha = a;
                        blocking = i;
                    }
                }
            }
            for (int i = 0; i < p; ++i)
                x[free[i]] = xf[i] + alpha * (target[i] - xf[i]);
            if (blocking >= 0) {
                x[free[blocking]] = 0;
                bound[free[blocking]] = true;
            }
            for (int i = 0; i < p; ++i)
                if (x[free[i]] <= eps * 4) {
                    x[free[i]] = 0;
                    bound[free[i]] = true;
                }
            continue;
        }
        for (int i = 0; i < p; ++i)
            x[free[i]] = target[i];

        // multipliers of the active bounds: mu_j = (x_j - prior_j) - E_j^T lambda
        const Vector lam = Eigen::CompleteOrthogonalDecomposition<Matrix>(Ef.transpose()).solve(Vector(target - pf));
        int release = -1;
        Scalar most = -std::sqrt(eps);
        for (int j = 0; j < n; ++j) {
            if (!bound[j])
                continue;
            const Scalar mu = (x[j] - prior[j]) - E.col(j).dot(lam);
            if (mu < most) {
                most = mu;
                release = j;
            }
        }
        if (release < 0)
            break;
        bound[release] = false;
    }
    return x.cwiseMax(Scalar(0));
}

} // namespace seqcal
