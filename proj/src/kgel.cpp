#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "iqp/errors.hpp"
#include "iqp/evaluation.hpp"

namespace iqp {

namespace {

struct DualState {
    double objective = 0.0;  // log mean exp(lambda . k_i) - lambda . r
    Eigen::VectorXd pi;
    Eigen::VectorXd moment;  // E_pi[k]
};

DualState evaluate_dual(const Eigen::MatrixXd& k, const Eigen::VectorXd& rhs, const Eigen::VectorXd& lambda) {
    const Eigen::Index rows = k.rows();
    const Eigen::VectorXd s = k * lambda;
    const double shift = s.maxCoeff();
    DualState st;
    st.pi = (s.array() - shift).exp().matrix();
    const double total = st.pi.sum();
    st.pi /= total;
    st.objective = shift + std::log(total / static_cast<double>(rows)) - lambda.dot(rhs);
    st.moment = k.transpose() * st.pi;
    return st;
}

}  // namespace

KgelSolution kgel_solve(const KgelProblem& problem) {
    const BitMatrix& x = problem.test_set;
    const BitMatrix& t = problem.witnesses;
    if (x.empty()) throw ShapeError("KGEL needs a nonempty test set");
    if (t.empty()) throw ShapeError("KGEL needs at least one witness point");
    if (x.width() != t.width()) throw ShapeError("test set and witnesses differ in width");
    if (problem.rhs.size() != t.rows()) throw ShapeError("KGEL right-hand side length must equal the witness count");
    if (!(problem.tolerance > 0.0)) throw std::invalid_argument("KGEL tolerance must be positive");
    const KernelConfig cfg(problem.sigma);

    const Eigen::Index n = static_cast<Eigen::Index>(x.rows());
    const Eigen::Index w = static_cast<Eigen::Index>(t.rows());
    Eigen::MatrixXd k(n, w);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < w; ++j)
            k(i, j) = gaussian_kernel(x.row(static_cast<std::size_t>(i)), t.row(static_cast<std::size_t>(j)), cfg);
    const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(problem.rhs.data(), w);

    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(w);
    DualState st = evaluate_dual(k, rhs, lambda);
    KgelSolution sol;
    std::size_t it = 0;
    for (; it < problem.max_iterations; ++it) {
        const Eigen::VectorXd grad = st.moment - rhs;
        if (grad.cwiseAbs().maxCoeff() <= problem.tolerance) break;

        // Hessian of the dual is the pi-weighted covariance of the kernel columns.
        const Eigen::MatrixXd centered = k.rowwise() - st.moment.transpose();
        Eigen::MatrixXd hess = centered.transpose() * st.pi.asDiagonal() * centered;
        const double ridge = 1e-12 * std::max(1.0, hess.trace());
        hess.diagonal().array() += ridge;
        Eigen::VectorXd dir = hess.ldlt().solve(-grad);
        if (!dir.allFinite() || dir.dot(grad) >= 0.0) dir = -grad;

        // Backtracking line search on the convex dual objective.
        double step = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 60; ++ls) {
            const Eigen::VectorXd trial = lambda + step * dir;
            DualState cand = evaluate_dual(k, rhs, trial);
            if (std::isfinite(cand.objective) && cand.objective <= st.objective + 1e-4 * step * grad.dot(dir)) {
                lambda = trial;
                st = std::move(cand);
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) {
            // Newton stalled; one plain gradient step before giving up.
            const Eigen::VectorXd trial = lambda - grad;
            DualState cand = evaluate_dual(k, rhs, trial);
            if (!(cand.objective < st.objective)) break;
            lambda = trial;
            st = std::move(cand);
        }
    }
    sol.iterations = it;
    sol.pi.assign(st.pi.data(), st.pi.data() + n);
    sol.lambda.assign(lambda.data(), lambda.data() + w);
    sol.residual = (st.moment - rhs).cwiseAbs().maxCoeff();
    sol.feasible = sol.residual <= problem.tolerance;
    double kl = 0.0;
    for (double p : sol.pi)
        if (p > 0.0) kl += p * std::log(p * static_cast<double>(n));
    sol.kl_value = std::max(0.0, kl);
    return sol;
}

}  // namespace iqp
