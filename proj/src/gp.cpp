#include "mphd/gp.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "mphd/error.hpp"

namespace mphd {
namespace {

const double kSqrt3 = std::sqrt(3.0);
const double kSqrt5 = std::sqrt(5.0);
const double kLog2Pi = std::log(2.0 * std::numbers::pi);

// -(1/r) dm/dr, finite at r = 0. Multiplying by (dx_j / l_j)^2 gives dm/dlog(l_j).
double matern_log_scale_factor(double r, Smoothness nu) {
    if (nu == Smoothness::kNu52) {
        return (5.0 / 3.0) * (1.0 + kSqrt5 * r) * std::exp(-kSqrt5 * r);
    }
    return 3.0 * std::exp(-kSqrt3 * r);
}

double scaled_sq_distance(const Eigen::MatrixXd& a, Eigen::Index i, const Eigen::MatrixXd& b,
                          Eigen::Index j, const Eigen::VectorXd& inv_ls) {
    double r2 = 0.0;
    for (Eigen::Index k = 0; k < inv_ls.size(); ++k) {
        const double z = (a(i, k) - b(j, k)) * inv_ls[k];
        r2 += z * z;
    }
    return r2;
}

void check_input_dim(const Eigen::MatrixXd& x, const GpParams& params) {
    if (static_cast<std::size_t>(x.cols()) != params.dim()) {
        throw Error(ErrorCode::kDimensionMismatch,
                    "input dimension " + std::to_string(x.cols()) + " does not match " +
                        std::to_string(params.dim()) + " length-scales");
    }
}

}  // namespace

void GpParams::validate() const {
    if (length_scales.size() == 0) {
        throw Error(ErrorCode::kInvalidArgument, "GpParams needs at least one length-scale");
    }
    if (!std::isfinite(constant_mean)) {
        throw Error(ErrorCode::kInvalidArgument, "constant_mean must be finite");
    }
    for (Eigen::Index j = 0; j < length_scales.size(); ++j) {
        if (!(length_scales[j] > 0.0) || !std::isfinite(length_scales[j])) {
            throw Error(ErrorCode::kInvalidArgument, "length-scales must be positive and finite");
        }
    }
    if (!(signal_variance > 0.0) || !std::isfinite(signal_variance)) {
        throw Error(ErrorCode::kInvalidArgument, "signal_variance must be positive and finite");
    }
    if (!(noise_variance > 0.0) || !std::isfinite(noise_variance)) {
        throw Error(ErrorCode::kInvalidArgument, "noise_variance must be positive and finite");
    }
}

bool GpParams::operator==(const GpParams& other) const {
    return constant_mean == other.constant_mean && length_scales.size() == other.length_scales.size() &&
           length_scales == other.length_scales && signal_variance == other.signal_variance &&
           noise_variance == other.noise_variance;
}

double matern_correlation(double r, Smoothness nu) {
    if (nu == Smoothness::kNu52) {
        return (1.0 + kSqrt5 * r + 5.0 * r * r / 3.0) * std::exp(-kSqrt5 * r);
    }
    return (1.0 + kSqrt3 * r) * std::exp(-kSqrt3 * r);
}

double matern_kernel(const Eigen::Ref<const Eigen::VectorXd>& x1,
                     const Eigen::Ref<const Eigen::VectorXd>& x2, const GpParams& params,
                     Smoothness nu) {
    params.validate();
    if (x1.size() != x2.size() || static_cast<std::size_t>(x1.size()) != params.dim()) {
        throw Error(ErrorCode::kDimensionMismatch, "matern_kernel: dimension mismatch");
    }
    const double r = ((x1 - x2).array() / params.length_scales.array()).matrix().norm();
    return params.signal_variance * matern_correlation(r, nu);
}

Eigen::MatrixXd cross_kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                             const GpParams& params, Smoothness nu) {
    params.validate();
    check_input_dim(a, params);
    check_input_dim(b, params);
    const Eigen::VectorXd inv_ls = params.length_scales.cwiseInverse();
    Eigen::MatrixXd k(a.rows(), b.rows());
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            const double r = std::sqrt(scaled_sq_distance(a, i, b, j, inv_ls));
            k(i, j) = params.signal_variance * matern_correlation(r, nu);
        }
    }
    return k;
}

Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& inputs, const GpParams& params, Smoothness nu,
                            double jitter) {
    if (inputs.rows() == 0) {
        throw Error(ErrorCode::kInvalidArgument, "gram_matrix: no inputs");
    }
    params.validate();
    check_input_dim(inputs, params);
    const Eigen::Index n = inputs.rows();
    const Eigen::VectorXd inv_ls = params.length_scales.cwiseInverse();
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index t = 0; t < n; ++t) {
        k(t, t) = params.signal_variance + params.noise_variance + jitter;
        for (Eigen::Index s = t + 1; s < n; ++s) {
            const double r = std::sqrt(scaled_sq_distance(inputs, s, inputs, t, inv_ls));
            const double v = params.signal_variance * matern_correlation(r, nu);
            k(s, t) = v;
            k(t, s) = v;
        }
    }
    return k;
}

RobustCholesky robust_cholesky(const Eigen::MatrixXd& gram_without_jitter, double signal_variance) {
    RobustCholesky result;
    // Try the exact matrix first, then jitter 1e-10, 1e-9, ..., 1e-4 times signal_variance.
    for (double jitter = 0.0; jitter <= 1e-4 * signal_variance * 1.0000001;
         jitter = jitter == 0.0 ? 1e-10 * signal_variance : jitter * 10.0) {
        Eigen::MatrixXd k = gram_without_jitter;
        k.diagonal().array() += jitter;
        result.llt.compute(k);
        if (result.llt.info() == Eigen::Success &&
            (result.llt.matrixLLT().diagonal().array() > 0.0).all() &&
            result.llt.matrixLLT().diagonal().allFinite()) {
            result.jitter = jitter;
            return result;
        }
    }
    throw Error(ErrorCode::kNumericalFailure,
                "Cholesky factorization failed after jitter escalation to 1e-4 * signal_variance");
}

std::size_t common_dimension(std::span<const SubDataset> subdatasets) {
    if (subdatasets.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "no sub-datasets");
    }
    const std::size_t d = subdatasets.front().dim();
    for (const SubDataset& sd : subdatasets) {
        if (sd.size() == 0 || static_cast<std::size_t>(sd.inputs.rows()) != sd.size()) {
            throw Error(ErrorCode::kInvalidArgument, "sub-dataset inputs/outputs are empty or mismatched");
        }
        if (sd.dim() != d) {
            throw Error(ErrorCode::kDimensionMismatch, "sub-datasets do not share one input dimension");
        }
    }
    return d;
}

double gp_nll(std::span<const SubDataset> subdatasets, const GpParams& params, Smoothness nu) {
    common_dimension(subdatasets);
    double total = 0.0;
    for (const SubDataset& sd : subdatasets) {
        const Eigen::MatrixXd k = gram_matrix(sd.inputs, params, nu);
        const RobustCholesky chol = robust_cholesky(k, params.signal_variance);
        const Eigen::VectorXd resid = sd.outputs.array() - params.constant_mean;
        const Eigen::VectorXd z = chol.llt.matrixL().solve(resid);
        const double log_det = 2.0 * chol.llt.matrixLLT().diagonal().array().log().sum();
        total += 0.5 * z.squaredNorm() + 0.5 * log_det + 0.5 * static_cast<double>(sd.size()) * kLog2Pi;
    }
    return total;
}

NllWithGradient gp_nll_grad(std::span<const SubDataset> subdatasets, const GpParams& params,
                            Smoothness nu) {
    common_dimension(subdatasets);
    params.validate();
    const Eigen::Index d = params.length_scales.size();
    const Eigen::VectorXd inv_ls = params.length_scales.cwiseInverse();
    NllWithGradient out;
    out.gradient = Eigen::VectorXd::Zero(d + 3);

    for (const SubDataset& sd : subdatasets) {
        const Eigen::Index n = static_cast<Eigen::Index>(sd.size());
        const Eigen::MatrixXd k = gram_matrix(sd.inputs, params, nu);
        const RobustCholesky chol = robust_cholesky(k, params.signal_variance);
        const Eigen::VectorXd resid = sd.outputs.array() - params.constant_mean;
        const Eigen::VectorXd alpha = chol.llt.solve(resid);
        const double log_det = 2.0 * chol.llt.matrixLLT().diagonal().array().log().sum();
        out.value += 0.5 * resid.dot(alpha) + 0.5 * log_det + 0.5 * static_cast<double>(n) * kLog2Pi;

        Eigen::MatrixXd w = chol.llt.solve(Eigen::MatrixXd::Identity(n, n));
        w.noalias() -= alpha * alpha.transpose();

        out.gradient[0] -= alpha.sum();
        // d K / d log(noise) = noise * I
        out.gradient[d + 2] += 0.5 * params.noise_variance * w.trace();
        // diagonal of the signal part
        double signal_term = params.signal_variance * w.trace();
        for (Eigen::Index t = 0; t < n; ++t) {
            for (Eigen::Index s = t + 1; s < n; ++s) {
                double r2 = 0.0;
                for (Eigen::Index j = 0; j < d; ++j) {
                    const double z = (sd.inputs(s, j) - sd.inputs(t, j)) * inv_ls[j];
                    r2 += z * z;
                }
                const double r = std::sqrt(r2);
                const double wst = w(s, t);
                signal_term += 2.0 * wst * params.signal_variance * matern_correlation(r, nu);
                // off-diagonal pairs count twice and the trace carries a 1/2
                const double common = wst * params.signal_variance * matern_log_scale_factor(r, nu);
                for (Eigen::Index j = 0; j < d; ++j) {
                    const double z = (sd.inputs(s, j) - sd.inputs(t, j)) * inv_ls[j];
                    out.gradient[1 + j] += common * z * z;
                }
            }
        }
        out.gradient[d + 1] += 0.5 * signal_term;
    }
    return out;
}

PosteriorSummary gp_posterior(const GpParams& params, Smoothness nu, const SubDataset& observations,
                              const Eigen::MatrixXd& query, bool full_cov) {
    params.validate();
    check_input_dim(query, params);
    PosteriorSummary out;
    const Eigen::Index m = query.rows();
    if (observations.size() == 0) {
        out.mean = Eigen::VectorXd::Constant(m, params.constant_mean);
        out.variance = Eigen::VectorXd::Constant(m, params.signal_variance);
        if (full_cov) out.covariance = cross_kernel(query, query, params, nu);
        return out;
    }
    check_input_dim(observations.inputs, params);
    const Eigen::MatrixXd k = gram_matrix(observations.inputs, params, nu);
    const RobustCholesky chol = robust_cholesky(k, params.signal_variance);
    const Eigen::VectorXd resid = observations.outputs.array() - params.constant_mean;
    const Eigen::VectorXd alpha = chol.llt.solve(resid);
    const Eigen::MatrixXd ks = cross_kernel(observations.inputs, query, params, nu);  // L x m
    out.mean = (ks.transpose() * alpha).array() + params.constant_mean;
    const Eigen::MatrixXd v = chol.llt.matrixL().solve(ks);
    out.variance = (params.signal_variance - v.colwise().squaredNorm().array()).max(0.0).matrix();
    if (full_cov) {
        out.covariance = cross_kernel(query, query, params, nu);
        out.covariance.noalias() -= v.transpose() * v;
        for (Eigen::Index i = 0; i < m; ++i) out.covariance(i, i) = out.variance[i];
    }
    return out;
}

Eigen::VectorXd to_unconstrained(const GpParams& params) {
    const Eigen::Index d = params.length_scales.size();
    Eigen::VectorXd u(d + 3);
    u[0] = params.constant_mean;
    u.segment(1, d) = params.length_scales.array().log();
    u[d + 1] = std::log(params.signal_variance);
    u[d + 2] = std::log(params.noise_variance);
    return u;
}

GpParams from_unconstrained(const Eigen::VectorXd& u) {
    if (u.size() < 4) {
        throw Error(ErrorCode::kDimensionMismatch, "unconstrained GP vector needs at least 4 entries");
    }
    const Eigen::Index d = u.size() - 3;
    GpParams p;
    p.constant_mean = u[0];
    p.length_scales = u.segment(1, d).array().exp();
    p.signal_variance = std::exp(u[d + 1]);
    p.noise_variance = std::exp(u[d + 2]);
    return p;
}

}  // namespace mphd
