#pragma once

#include "ocsmm/group.hpp"
#include "ocsmm/numeric.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>

namespace ocsmm {

/// Gaussian RBF on the input space, exp(-|x - y|^2 / (2 sigma^2)).
double rbf_eval(std::span<const double> x, std::span<const double> y, double sigma);

class BaseKernel {
public:
    explicit BaseKernel(double sigma);

    double sigma() const { return sigma_; }
    double operator()(std::span<const double> x, std::span<const double> y) const {
        return rbf_eval(x, y, sigma_);
    }

private:
    double sigma_;
};

/// Empirical estimate of <mu_a, mu_b>: the double average of the base kernel
/// over both sample sets. Bitwise symmetric in its arguments.
double emp_mean_inner(const PointSet& a, const PointSet& b, const BaseKernel& kernel);

/// Closed-form <mu_a, mu_b> for two Gaussians under an RBF base kernel of
/// bandwidth sigma. Reduces to rbf_eval of the means when both covariances vanish.
double gaussian_analytic_inner(const GaussianSummary& a, const GaussianSummary& b, double sigma);

/// RBF on mean embeddings, exp(-|mu_i - mu_j|^2 / (2 gamma^2)), with the squared
/// RKHS distance recovered from inner products.
double embedding_rbf(double k_ii, double k_jj, double k_ij, double gamma);

/// How <mu_a, mu_b> is computed from a group.
enum class MeanEmbedding { Empirical, GaussianAnalytic };

/// Kernel applied on top of the mean embeddings.
enum class OuterKernel { Linear, EmbeddingRBF };

std::string to_string(MeanEmbedding e);
std::string to_string(OuterKernel k);
MeanEmbedding parse_mean_embedding(const std::string& name);
OuterKernel parse_outer_kernel(const std::string& name);

/// Fully resolved distribution-level kernel.
struct GroupKernelSpec {
    MeanEmbedding embedding = MeanEmbedding::Empirical;
    OuterKernel outer = OuterKernel::Linear;
    double sigma = 1.0;
    double gamma = 0.0; ///< only read when outer == EmbeddingRBF
    bool normalize = false;

    void validate() const;
};

/// How gamma is chosen for the embedding RBF when it is not given explicitly.
enum class GammaRule {
    MedianDistance, ///< sqrt of the median squared RKHS distance between groups
    MatchSigma,     ///< gamma = sigma
    Fixed,          ///< user value
};

std::string to_string(GammaRule rule);
GammaRule parse_gamma_rule(const std::string& name);

/// Kernel options before data-dependent bandwidths are resolved.
struct KernelConfig {
    MeanEmbedding embedding = MeanEmbedding::Empirical;
    OuterKernel outer = OuterKernel::Linear;
    bool normalize = false;
    std::optional<double> sigma; ///< default: sqrt(median_heuristic)
    GammaRule gamma_rule = GammaRule::MedianDistance;
    std::optional<double> gamma; ///< required for GammaRule::Fixed
};

struct GramMatrix {
    Eigen::MatrixXd entries;
    GroupKernelSpec spec;
    /// Smallest diagonal shift from {0, 1e-12, 1e-10, 1e-9} under which the
    /// matrix admits a Cholesky factorization. Not applied to `entries`.
    double jitter = 0.0;

    Eigen::Index size() const { return entries.rows(); }
};

/// Cosine normalization k_ij / sqrt(k_ii k_jj); the diagonal becomes exactly 1.
GramMatrix spherical_normalize(const GramMatrix& gram);

/// Level-1 inner product <mu_a, mu_b> under the spec's mean embedding.
double group_inner(const Group& a, const Group& b, const GroupKernelSpec& spec);

/// Applies optional normalization and the outer kernel to level-1 values.
double combine_kernel(double k_ab, double k_aa, double k_bb, const GroupKernelSpec& spec);

/// Symmetric matrix of level-1 inner products over a list of groups.
/// Independent (i, j) entries are computed concurrently; the result does not
/// depend on the schedule.
Eigen::MatrixXd inner_product_matrix(std::span<const Group> groups, const GroupKernelSpec& spec);

/// Distribution Gram from precomputed level-1 inner products.
GramMatrix gram_from_inner(const Eigen::MatrixXd& inner, const GroupKernelSpec& spec);

GramMatrix gram_matrix(std::span<const Group> groups, const GroupKernelSpec& spec);

/// Smallest admissible jitter (see GramMatrix::jitter); throws NumericalError
/// when even 1e-9 is not enough.
double psd_jitter(const Eigen::MatrixXd& matrix);

/// sigma^2 = median squared distance over all distinct point pairs pooled
/// across groups (self-pairs excluded). Summary-only groups contribute their mean.
double median_heuristic(std::span<const Group> groups);

/// Median of squared RKHS distances k_ii + k_jj - 2 k_ij over pairs i < j.
/// Returns 0 for fewer than two groups.
double median_embedding_distance(const Eigen::MatrixXd& inner);

/// Resolves sigma only; gamma is left at 0.
GroupKernelSpec resolve_sigma(const KernelConfig& config, std::span<const Group> groups);

/// Resolves sigma and gamma against a dataset.
GroupKernelSpec resolve_kernel_spec(const KernelConfig& config, std::span<const Group> groups);

/// Same as above when level-1 inner products (computed with `partial`, whose
/// sigma is already final) are at hand.
GroupKernelSpec resolve_gamma(const KernelConfig& config, GroupKernelSpec partial,
                              const Eigen::MatrixXd& inner);

} // namespace ocsmm
