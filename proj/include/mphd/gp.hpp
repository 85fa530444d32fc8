#pragma once

// Exact GP machinery: anisotropic Matern kernels, the marginal likelihood of a set of
// independent function samples, its analytic gradient and the posterior predictive.
//
// Inputs are stored row-per-point (L x d). All functions are pure.

#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace mphd {

enum class Smoothness { kNu32, kNu52 };

/// Parameters of one GP with constant mean and anisotropic Matern kernel.
struct GpParams {
    double constant_mean = 0.0;
    Eigen::VectorXd length_scales;
    double signal_variance = 1.0;
    double noise_variance = 1e-3;

    std::size_t dim() const { return static_cast<std::size_t>(length_scales.size()); }
    /// Number of scalar parameters, d + 3.
    std::size_t size() const { return dim() + 3; }

    /// Throws kInvalidArgument unless every scale and variance is strictly positive and finite.
    void validate() const;

    bool operator==(const GpParams& other) const;
};

/// Observations of a single function.
struct SubDataset {
    Eigen::MatrixXd inputs;   // L x d
    Eigen::VectorXd outputs;  // L

    std::size_t size() const { return static_cast<std::size_t>(outputs.size()); }
    std::size_t dim() const { return static_cast<std::size_t>(inputs.cols()); }
};

struct PosteriorSummary {
    Eigen::VectorXd mean;
    Eigen::VectorXd variance;    // latent-f variance, clamped at zero
    Eigen::MatrixXd covariance;  // filled only when requested
};

/// Value plus gradient over the unconstrained coordinates
/// (constant_mean, log length_scales..., log signal_variance, log noise_variance).
struct NllWithGradient {
    double value = 0.0;
    Eigen::VectorXd gradient;
};

/// Matern correlation m_nu(r) for scaled distance r.
double matern_correlation(double r, Smoothness nu);

double matern_kernel(const Eigen::Ref<const Eigen::VectorXd>& x1,
                     const Eigen::Ref<const Eigen::VectorXd>& x2, const GpParams& params,
                     Smoothness nu);

/// K + (noise_variance + jitter) I.
Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& inputs, const GpParams& params, Smoothness nu,
                            double jitter = 0.0);

/// Kernel values between two point sets (no noise).
Eigen::MatrixXd cross_kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                             const GpParams& params, Smoothness nu);

/// Cholesky of a gram matrix with the jitter escalation policy: factor as given, then add
/// 1e-10 * signal_variance and escalate x10 up to 1e-4 * signal_variance before throwing
/// kNumericalFailure.
struct RobustCholesky {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double jitter = 0.0;
};
RobustCholesky robust_cholesky(const Eigen::MatrixXd& gram_without_jitter, double signal_variance);

/// Negative log marginal likelihood summed over independent sub-datasets:
///   sum_j 0.5 r_j' K_j^-1 r_j + 0.5 log|K_j| + (L_j / 2) log(2 pi),  r_j = y_j - mean.
double gp_nll(std::span<const SubDataset> subdatasets, const GpParams& params, Smoothness nu);

NllWithGradient gp_nll_grad(std::span<const SubDataset> subdatasets, const GpParams& params,
                            Smoothness nu);

PosteriorSummary gp_posterior(const GpParams& params, Smoothness nu, const SubDataset& observations,
                              const Eigen::MatrixXd& query, bool full_cov = false);

/// Maps between GpParams and the unconstrained vector used by optimizers.
Eigen::VectorXd to_unconstrained(const GpParams& params);
GpParams from_unconstrained(const Eigen::VectorXd& u);

/// Checks that all sub-datasets are nonempty and share one input dimension; returns it.
std::size_t common_dimension(std::span<const SubDataset> subdatasets);

}  // namespace mphd
