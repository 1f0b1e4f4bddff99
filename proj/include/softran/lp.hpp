// Dense two-phase simplex for the small power-feasibility programs of the
// rate-region membership test. Bland's rule throughout: the programs have a few
// dozen columns, so anti-cycling matters more than pivot count.
#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Core>

namespace softran::lp {

enum class Status { optimal, infeasible, unbounded };

struct Result {
    Status status = Status::infeasible;
    Eigen::VectorXd x;
    double value = std::numeric_limits<double>::infinity();
};

namespace detail {

class Tableau {
public:
    Tableau(Eigen::Index rows, Eigen::Index cols) : t_(Eigen::MatrixXd::Zero(rows, cols + 1)), basis_(rows, -1) {}

    Eigen::MatrixXd& t() { return t_; }
    std::vector<Eigen::Index>& basis() { return basis_; }
    Eigen::Index rows() const { return t_.rows(); }
    Eigen::Index cols() const { return t_.cols() - 1; }
    double rhs(Eigen::Index r) const { return t_(r, cols()); }

    void pivot(Eigen::Index r, Eigen::Index c) {
        t_.row(r) /= t_(r, c);
        for (Eigen::Index i = 0; i < rows(); ++i)
            if (i != r && t_(i, c) != 0.0) t_.row(i) -= t_(i, c) * t_.row(r);
        basis_[r] = c;
    }

    /// Minimizes cost over the current basis; columns at or beyond `allowed` never enter.
    Status run(const Eigen::VectorXd& cost, Eigen::Index allowed, double tol, int max_pivots) {
        for (int it = 0; it < max_pivots; ++it) {
            Eigen::Index enter = -1;
            for (Eigen::Index j = 0; j < allowed && enter < 0; ++j) {
                double d = cost[j];
                for (Eigen::Index i = 0; i < rows(); ++i) d -= cost[basis_[i]] * t_(i, j);
                if (d < -tol) enter = j;
            }
            if (enter < 0) return Status::optimal;
            Eigen::Index leave = -1;
            double best = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < rows(); ++i)
                if (t_(i, enter) > tol) {
                    const double ratio = rhs(i) / t_(i, enter);
                    if (ratio < best - tol || (ratio <= best + tol && leave >= 0 && basis_[i] < basis_[leave])) {
                        best = ratio;
                        leave = i;
                    }
                }
            if (leave < 0) return Status::unbounded;
            pivot(leave, enter);
        }
        return Status::optimal;
    }

private:
    Eigen::MatrixXd t_;
    std::vector<Eigen::Index> basis_;
};

}  // namespace detail

/// min c'x subject to A x <= b, x >= 0.
inline Result minimize(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                       double tol = 1e-10) {
    const Eigen::Index m = A.rows(), n = A.cols();
    std::vector<Eigen::Index> neg;
    for (Eigen::Index i = 0; i < m; ++i)
        if (b[i] < 0.0) neg.push_back(i);
    const Eigen::Index art = static_cast<Eigen::Index>(neg.size());
    const Eigen::Index cols = n + m + art;
    detail::Tableau tab(m, cols);
    auto& t = tab.t();
    Eigen::Index a = 0;
    for (Eigen::Index i = 0; i < m; ++i) {
        const double sgn = b[i] < 0.0 ? -1.0 : 1.0;
        t.row(i).head(n) = sgn * A.row(i);
        t(i, n + i) = sgn;
        t(i, cols) = sgn * b[i];
        if (sgn < 0.0) {
            t(i, n + m + a) = 1.0;
            tab.basis()[i] = n + m + a;
            ++a;
        } else {
            tab.basis()[i] = n + i;
        }
    }
    const int max_pivots = 50 * static_cast<int>(cols + m) + 100;

    Result res;
    if (art > 0) {
        Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(cols);
        phase1.tail(art).setOnes();
        tab.run(phase1, cols, tol, max_pivots);
        double infeas = 0.0;
        for (Eigen::Index i = 0; i < m; ++i)
            if (tab.basis()[i] >= n + m) infeas += tab.rhs(i);
        if (infeas > tol * std::max(1.0, b.cwiseAbs().maxCoeff())) return res;
        // drive zero-level artificials out of the basis
        for (Eigen::Index i = 0; i < m; ++i)
            if (tab.basis()[i] >= n + m)
                for (Eigen::Index j = 0; j < n + m; ++j)
                    if (std::abs(t(i, j)) > tol) {
                        tab.pivot(i, j);
                        break;
                    }
    }
    Eigen::VectorXd cost = Eigen::VectorXd::Zero(cols);
    cost.head(n) = c;
    const Status st = tab.run(cost, n + m, tol, max_pivots);
    if (st == Status::unbounded) {
        res.status = st;
        return res;
    }
    res.status = Status::optimal;
    res.x = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < m; ++i)
        if (tab.basis()[i] < n) res.x[tab.basis()[i]] = std::max(0.0, tab.rhs(i));
    res.value = c.dot(res.x);
    return res;
}

}  // namespace softran::lp
