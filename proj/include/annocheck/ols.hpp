#pragma once

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "annocheck/errors.hpp"
#include "annocheck/stats.hpp"

namespace annocheck {

struct OlsOptions {
    // Condition number of the (column-rescaled) design above which the fit
    // refuses to report coefficients.
    double condition_limit = 1e10;
};

struct OlsFit {
    Eigen::VectorXd beta;
    Eigen::VectorXd residuals;
    Eigen::MatrixXd cov_hc1;  // (n/(n-p)) (X'X)^-1 X' diag(e^2) X (X'X)^-1
    double r_squared = 0.0;
    Eigen::Index n = 0;
    Eigen::Index p = 0;

    double se(Eigen::Index j) const { return std::sqrt(cov_hc1(j, j)); }
    double t_stat(Eigen::Index j) const { return beta[j] / se(j); }
    double p_value(Eigen::Index j) const {
        return two_sided_p_value(t_stat(j), static_cast<double>(n - p));
    }
};

// Least squares via column-rescaled QR; coefficients are reported on the
// original scale. Throws RankDeficientError / TooFewRowsError /
// NumericalInstabilityError per the guard limits.
template <typename DerivedX, typename DerivedY>
OlsFit ols_fit(const Eigen::MatrixBase<DerivedX>& X_in, const Eigen::MatrixBase<DerivedY>& y_in,
               const OlsOptions& options = {}) {
    const Eigen::MatrixXd X = X_in.template cast<double>();
    const Eigen::VectorXd y = y_in.template cast<double>();
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (y.size() != n) throw DataError("design and outcome row counts disagree");
    if (n <= p) throw TooFewRowsError(static_cast<long>(n), static_cast<long>(p));

    // Rescale columns to unit norm; dummy-heavy designs are poorly scaled.
    Eigen::VectorXd scale(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double norm = X.col(j).norm();
        if (norm == 0.0) {
            throw RankDeficientError("design column " + std::to_string(j) + " is identically zero");
        }
        scale[j] = norm;
    }
    const Eigen::MatrixXd Xs = X * scale.cwiseInverse().asDiagonal();

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Xs, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double tol = static_cast<double>(n) * sv[0] * std::numeric_limits<double>::epsilon();
    if (sv[p - 1] <= tol) {
        throw RankDeficientError("design matrix is rank deficient (collinear columns)");
    }
    const double condition = sv[0] / sv[p - 1];
    if (condition > options.condition_limit) {
        throw NumericalInstabilityError("design condition number " + std::to_string(condition) +
                                        " exceeds limit " + std::to_string(options.condition_limit));
    }

    OlsFit fit;
    fit.n = n;
    fit.p = p;
    const Eigen::VectorXd beta_scaled = svd.solve(y);
    fit.beta = scale.cwiseInverse().asDiagonal() * beta_scaled;
    fit.residuals = y - X * fit.beta;

    const double ssr = fit.residuals.squaredNorm();
    const Eigen::VectorXd centered = y.array() - y.mean();
    const double sst = centered.squaredNorm();
    fit.r_squared = sst == 0.0 ? 1.0 : 1.0 - ssr / sst;

    // HC1 sandwich on the rescaled design, mapped back to the original scale.
    const Eigen::MatrixXd xtx_inv_s =
        (Xs.transpose() * Xs).ldlt().solve(Eigen::MatrixXd::Identity(p, p));
    const Eigen::MatrixXd meat_s =
        Xs.transpose() * fit.residuals.array().square().matrix().asDiagonal() * Xs;
    const double small_sample = static_cast<double>(n) / static_cast<double>(n - p);
    const Eigen::MatrixXd cov_s = small_sample * xtx_inv_s * meat_s * xtx_inv_s;
    fit.cov_hc1 = scale.cwiseInverse().asDiagonal() * cov_s * scale.cwiseInverse().asDiagonal();
    return fit;
}

}  // namespace annocheck
