#include "ocsmm/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace ocsmm {

namespace {

double squared_distance(const double* x, const double* y, Eigen::Index d) {
    double acc = 0.0;
    for (Eigen::Index c = 0; c < d; ++c) {
        const double diff = x[c] - y[c];
        acc += diff * diff;
    }
    return acc;
}

double rbf_from_squared(double sq, double sigma) { return std::exp(-sq / (2.0 * sigma * sigma)); }

// Isotropic closed form: both components have covariance (variance)·I.
double analytic_isotropic(double sq, double var_sum, double sigma, Eigen::Index d) {
    const double s2 = sigma * sigma;
    const double v = s2 + var_sum;
    const double value = std::exp(-sq / (2.0 * v));
    if (var_sum == 0.0) return value;
    return value * std::pow(1.0 + var_sum / s2, -0.5 * static_cast<double>(d));
}

double analytic_full(const Eigen::Ref<const Eigen::VectorXd>& diff, const Eigen::MatrixXd& cov_sum,
                     double sigma) {
    const auto d = diff.size();
    const double s2 = sigma * sigma;
    Eigen::MatrixXd b = cov_sum;
    b.diagonal().array() += s2;
    Eigen::LLT<Eigen::MatrixXd> llt(b);
    if (llt.info() != Eigen::Success) throw NumericalError("analytic kernel: B = S_i + S_j + sigma^2 I is singular");
    const Eigen::VectorXd z = llt.matrixL().solve(diff);
    double log_det = 0.0;
    for (Eigen::Index c = 0; c < d; ++c) log_det += 2.0 * std::log(llt.matrixL()(c, c));
    log_det -= static_cast<double>(d) * std::log(s2);
    return std::exp(-0.5 * z.squaredNorm() - 0.5 * log_det);
}

// Lexicographic order on (rows, data, omega) so that a pair is always
// evaluated in the same orientation.
bool canonical_before(const Group& a, const Group& b) {
    if (a.points.rows() != b.points.rows()) return a.points.rows() < b.points.rows();
    const auto n = a.points.size();
    const double* pa = a.points.data();
    const double* pb = b.points.data();
    for (Eigen::Index i = 0; i < n; ++i)
        if (pa[i] != pb[i]) return pa[i] < pb[i];
    const std::vector<double> empty;
    const auto& oa = a.omega ? *a.omega : empty;
    const auto& ob = b.omega ? *b.omega : empty;
    return std::lexicographical_compare(oa.begin(), oa.end(), ob.begin(), ob.end());
}

bool canonical_before(const PointSet& a, const PointSet& b) {
    if (a.rows() != b.rows()) return a.rows() < b.rows();
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

// Σ_k Σ_l term(k, l) / (n_a n_b): row sums and the sum over rows both use
// pairwise summation.
template <typename Term>
double double_average(Eigen::Index na, Eigen::Index nb, Term&& term) {
    std::vector<double> row(static_cast<std::size_t>(nb));
    std::vector<double> row_sums(static_cast<std::size_t>(na));
    for (Eigen::Index k = 0; k < na; ++k) {
        for (Eigen::Index l = 0; l < nb; ++l) row[static_cast<std::size_t>(l)] = term(k, l);
        row_sums[static_cast<std::size_t>(k)] = pairwise_sum(row);
    }
    return pairwise_sum(row_sums) / (static_cast<double>(na) * static_cast<double>(nb));
}

double empirical_inner(const PointSet& a, const PointSet& b, double sigma) {
    const auto d = a.cols();
    return double_average(a.rows(), b.rows(), [&](Eigen::Index k, Eigen::Index l) {
        return rbf_from_squared(squared_distance(a.row(k).data(), b.row(l).data(), d), sigma);
    });
}

// Gaussian mixture view of a group for the analytic embedding.
struct Mixture {
    const Group* group;

    Eigen::Index components() const { return group->summary ? 1 : group->size(); }
    bool isotropic() const { return !group->summary && !group->point_cov; }
    double variance(Eigen::Index k) const { return group->omega ? (*group->omega)[static_cast<std::size_t>(k)] : 0.0; }
    const double* mean_ptr(Eigen::Index k) const {
        return group->summary ? group->summary->mean().data() : group->points.row(k).data();
    }
    Eigen::MatrixXd cov(Eigen::Index k) const {
        const auto d = group->dim();
        if (group->summary) return group->summary->cov();
        if (group->point_cov) return (*group->point_cov)[static_cast<std::size_t>(k)];
        return Eigen::MatrixXd::Identity(d, d) * variance(k);
    }
};

double analytic_group_inner(const Group& a, const Group& b, double sigma) {
    const Mixture ma{&a}, mb{&b};
    const auto d = a.dim();
    if (ma.isotropic() && mb.isotropic()) {
        return double_average(ma.components(), mb.components(), [&](Eigen::Index k, Eigen::Index l) {
            const double sq = squared_distance(ma.mean_ptr(k), mb.mean_ptr(l), d);
            return analytic_isotropic(sq, ma.variance(k) + mb.variance(l), sigma, d);
        });
    }
    std::vector<Eigen::MatrixXd> covs_b;
    covs_b.reserve(static_cast<std::size_t>(mb.components()));
    for (Eigen::Index l = 0; l < mb.components(); ++l) covs_b.push_back(mb.cov(l));
    return double_average(ma.components(), mb.components(), [&](Eigen::Index k, Eigen::Index l) {
        Eigen::Map<const Eigen::VectorXd> mk(ma.mean_ptr(k), d), ml(mb.mean_ptr(l), d);
        const Eigen::VectorXd diff = mk - ml;
        return analytic_full(diff, ma.cov(k) + covs_b[static_cast<std::size_t>(l)], sigma);
    });
}

void require_positive(double value, const char* what) {
    if (!(value > 0.0) || !std::isfinite(value)) throw std::invalid_argument(std::string(what) + " must be finite and > 0");
}

// k-th smallest (0-based) squared distance among the distinct pairs of `pts`.
double kth_pair_distance(const PointSet& pts, std::size_t k) {
    const auto n = pts.rows();
    const auto d = pts.cols();
    const std::size_t pairs = static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2;
    constexpr std::size_t kDirectLimit = 4'000'000;
    auto for_each_pair = [&](auto&& fn) {
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = i + 1; j < n; ++j) fn(squared_distance(pts.row(i).data(), pts.row(j).data(), d));
    };
    if (pairs <= kDirectLimit) {
        std::vector<double> all;
        all.reserve(pairs);
        for_each_pair([&](double v) { all.push_back(v); });
        std::nth_element(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end());
        return all[k];
    }
    // Two passes: histogram to find the bucket holding rank k, then an exact
    // selection inside that bucket.
    const Eigen::RowVectorXd lo = pts.colwise().minCoeff();
    const Eigen::RowVectorXd hi = pts.colwise().maxCoeff();
    const double bound = (hi - lo).squaredNorm() * (1.0 + 1e-12) + 1e-300;
    constexpr std::size_t kBins = 1 << 16;
    std::vector<std::size_t> counts(kBins, 0);
    auto bin_of = [&](double v) { return std::min(kBins - 1, static_cast<std::size_t>(v / bound * kBins)); };
    for_each_pair([&](double v) { ++counts[bin_of(v)]; });
    std::size_t below = 0, bin = 0;
    for (; bin < kBins; ++bin) {
        if (below + counts[bin] > k) break;
        below += counts[bin];
    }
    std::vector<double> bucket;
    bucket.reserve(counts[bin]);
    for_each_pair([&](double v) {
        if (bin_of(v) == bin) bucket.push_back(v);
    });
    const std::size_t offset = k - below;
    std::nth_element(bucket.begin(), bucket.begin() + static_cast<std::ptrdiff_t>(offset), bucket.end());
    return bucket[offset];
}

} // namespace

double rbf_eval(std::span<const double> x, std::span<const double> y, double sigma) {
    if (x.size() != y.size()) throw std::invalid_argument("rbf_eval: dimension mismatch");
    require_positive(sigma, "rbf_eval: sigma");
    return rbf_from_squared(squared_distance(x.data(), y.data(), static_cast<Eigen::Index>(x.size())), sigma);
}

BaseKernel::BaseKernel(double sigma) : sigma_(sigma) { require_positive(sigma, "BaseKernel: sigma"); }

double emp_mean_inner(const PointSet& a, const PointSet& b, const BaseKernel& kernel) {
    if (a.rows() == 0 || b.rows() == 0) throw std::invalid_argument("emp_mean_inner: empty group");
    if (a.cols() != b.cols()) throw std::invalid_argument("emp_mean_inner: dimension mismatch");
    if (canonical_before(b, a)) return empirical_inner(b, a, kernel.sigma());
    return empirical_inner(a, b, kernel.sigma());
}

double gaussian_analytic_inner(const GaussianSummary& a, const GaussianSummary& b, double sigma) {
    require_positive(sigma, "gaussian_analytic_inner: sigma");
    if (a.dim() != b.dim()) throw std::invalid_argument("gaussian_analytic_inner: dimension mismatch");
    const Eigen::VectorXd diff = a.mean() - b.mean();
    return analytic_full(diff, a.cov() + b.cov(), sigma);
}

double embedding_rbf(double k_ii, double k_jj, double k_ij, double gamma) {
    require_positive(gamma, "embedding_rbf: gamma");
    if (k_ii < 0.0 || k_jj < 0.0) throw std::invalid_argument("embedding_rbf: negative self inner product");
    double sq = (k_ii + k_jj) - 2.0 * k_ij;
    if (sq < -1e-12) throw NumericalError("embedding_rbf: negative squared RKHS distance");
    sq = std::max(sq, 0.0);
    return std::exp(-sq / (2.0 * gamma * gamma));
}

std::string to_string(MeanEmbedding e) { return e == MeanEmbedding::Empirical ? "empirical" : "analytic"; }
std::string to_string(OuterKernel k) { return k == OuterKernel::Linear ? "linear" : "rbf"; }

MeanEmbedding parse_mean_embedding(const std::string& name) {
    if (name == "empirical") return MeanEmbedding::Empirical;
    if (name == "analytic") return MeanEmbedding::GaussianAnalytic;
    throw std::invalid_argument("unknown mean embedding '" + name + "' (expected empirical|analytic)");
}

OuterKernel parse_outer_kernel(const std::string& name) {
    if (name == "linear") return OuterKernel::Linear;
    if (name == "rbf") return OuterKernel::EmbeddingRBF;
    throw std::invalid_argument("unknown outer kernel '" + name + "' (expected linear|rbf)");
}

std::string to_string(GammaRule rule) {
    switch (rule) {
    case GammaRule::MedianDistance: return "median";
    case GammaRule::MatchSigma: return "sigma";
    case GammaRule::Fixed: return "fixed";
    }
    return "median";
}

GammaRule parse_gamma_rule(const std::string& name) {
    if (name == "median") return GammaRule::MedianDistance;
    if (name == "sigma") return GammaRule::MatchSigma;
    if (name == "fixed") return GammaRule::Fixed;
    throw std::invalid_argument("unknown gamma rule '" + name + "' (expected median|sigma|fixed)");
}

void GroupKernelSpec::validate() const {
    require_positive(sigma, "kernel spec: sigma");
    if (outer == OuterKernel::EmbeddingRBF) require_positive(gamma, "kernel spec: gamma");
}

GramMatrix spherical_normalize(const GramMatrix& gram) {
    const auto n = gram.size();
    const Eigen::VectorXd diag = gram.entries.diagonal();
    for (Eigen::Index i = 0; i < n; ++i)
        if (!(diag(i) > 0.0)) throw std::invalid_argument("spherical_normalize: non-positive diagonal entry");
    GramMatrix out = gram;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j)
            out.entries(i, j) = i == j ? 1.0 : gram.entries(i, j) / std::sqrt(diag(i) * diag(j));
    }
    out.spec.normalize = true;
    return out;
}

double group_inner(const Group& a, const Group& b, const GroupKernelSpec& spec) {
    if (a.dim() != b.dim()) throw std::invalid_argument("group_inner: groups '" + a.id + "' and '" + b.id + "' differ in dimension");
    if (spec.embedding == MeanEmbedding::Empirical) {
        if (!a.has_points() || !b.has_points())
            throw std::invalid_argument("group_inner: empirical embedding needs sample points (group '" +
                                        (a.has_points() ? b.id : a.id) + "' has only a summary)");
        return emp_mean_inner(a.points, b.points, BaseKernel(spec.sigma));
    }
    require_positive(spec.sigma, "group_inner: sigma");
    if (canonical_before(b, a)) return analytic_group_inner(b, a, spec.sigma);
    return analytic_group_inner(a, b, spec.sigma);
}

double combine_kernel(double k_ab, double k_aa, double k_bb, const GroupKernelSpec& spec) {
    if (spec.normalize) {
        if (!(k_aa > 0.0) || !(k_bb > 0.0)) throw std::invalid_argument("normalization: non-positive self inner product");
        k_ab = k_ab / std::sqrt(k_aa * k_bb);
        k_aa = 1.0;
        k_bb = 1.0;
    }
    if (spec.outer == OuterKernel::EmbeddingRBF) return embedding_rbf(k_aa, k_bb, k_ab, spec.gamma);
    return k_ab;
}

Eigen::MatrixXd inner_product_matrix(std::span<const Group> groups, const GroupKernelSpec& spec) {
    const auto n = static_cast<Eigen::Index>(groups.size());
    if (n == 0) throw std::invalid_argument("gram_matrix: no groups");
    const auto d = groups.front().dim();
    for (const auto& g : groups) {
        g.validate();
        if (g.dim() != d) throw std::invalid_argument("gram_matrix: inconsistent dimensions");
        if (spec.embedding == MeanEmbedding::Empirical && !g.has_points())
            throw std::invalid_argument("gram_matrix: group '" + g.id + "' has no points for the empirical embedding");
    }
    std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
    pairs.reserve(static_cast<std::size_t>(n * (n + 1) / 2));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i; j < n; ++j) pairs.emplace_back(i, j);
    Eigen::MatrixXd inner(n, n);
    parallel_for(pairs.size(), [&](std::size_t p) {
        const auto [i, j] = pairs[p];
        const double v = group_inner(groups[static_cast<std::size_t>(i)], groups[static_cast<std::size_t>(j)], spec);
        inner(i, j) = v;
        inner(j, i) = v;
    });
    return inner;
}

GramMatrix gram_from_inner(const Eigen::MatrixXd& inner, const GroupKernelSpec& spec) {
    spec.validate();
    const auto n = inner.rows();
    GramMatrix gram;
    gram.spec = spec;
    gram.entries.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            const double v = i == j && (spec.normalize || spec.outer == OuterKernel::EmbeddingRBF)
                                 ? 1.0
                                 : combine_kernel(inner(i, j), inner(i, i), inner(j, j), spec);
            gram.entries(i, j) = v;
            gram.entries(j, i) = v;
        }
    }
    if (spec.normalize) {
        for (Eigen::Index i = 0; i < n; ++i)
            if (!(inner(i, i) > 0.0)) throw std::invalid_argument("normalization: non-positive self inner product");
    }
    gram.jitter = psd_jitter(gram.entries);
    return gram;
}

GramMatrix gram_matrix(std::span<const Group> groups, const GroupKernelSpec& spec) {
    spec.validate();
    return gram_from_inner(inner_product_matrix(groups, spec), spec);
}

double psd_jitter(const Eigen::MatrixXd& matrix) {
    if (!matrix.allFinite()) throw std::invalid_argument("gram matrix has non-finite entries");
    const auto n = matrix.rows();
    for (double jitter : {0.0, 1e-12, 1e-10, 1e-9}) {
        Eigen::MatrixXd shifted = matrix;
        shifted.diagonal().array() += jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(shifted);
        if (llt.info() == Eigen::Success) return jitter;
    }
    throw NumericalError("gram matrix is not PSD within jitter 1e-9 (size " + std::to_string(n) + ")");
}

double median_heuristic(std::span<const Group> groups) {
    Eigen::Index total = 0, d = -1;
    for (const auto& g : groups) {
        total += g.has_points() ? g.size() : (g.summary ? 1 : 0);
        if (d < 0) d = g.dim();
        else if (g.dim() != d) throw std::invalid_argument("median_heuristic: inconsistent dimensions");
    }
    if (total < 2) throw std::invalid_argument("median_heuristic: need at least 2 points");
    PointSet pooled(total, d);
    Eigen::Index r = 0;
    for (const auto& g : groups) {
        if (g.has_points()) {
            pooled.middleRows(r, g.size()) = g.points;
            r += g.size();
        } else if (g.summary) {
            pooled.row(r++) = g.summary->mean().transpose();
        }
    }
    const std::size_t m = static_cast<std::size_t>(total) * static_cast<std::size_t>(total - 1) / 2;
    if (m % 2 == 1) return kth_pair_distance(pooled, m / 2);
    return 0.5 * (kth_pair_distance(pooled, m / 2 - 1) + kth_pair_distance(pooled, m / 2));
}

double median_embedding_distance(const Eigen::MatrixXd& inner) {
    const auto n = inner.rows();
    if (n < 2) return 0.0;
    std::vector<double> sq;
    sq.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            sq.push_back(std::max(0.0, (inner(i, i) + inner(j, j)) - 2.0 * inner(i, j)));
    const std::size_t m = sq.size();
    std::sort(sq.begin(), sq.end());
    return m % 2 == 1 ? sq[m / 2] : 0.5 * (sq[m / 2 - 1] + sq[m / 2]);
}

GroupKernelSpec resolve_gamma(const KernelConfig& config, GroupKernelSpec partial, const Eigen::MatrixXd& inner) {
    if (config.outer != OuterKernel::EmbeddingRBF) {
        partial.gamma = 0.0;
        return partial;
    }
    switch (config.gamma_rule) {
    case GammaRule::Fixed:
        if (!config.gamma) throw std::invalid_argument("gamma rule 'fixed' needs an explicit gamma");
        partial.gamma = *config.gamma;
        break;
    case GammaRule::MatchSigma:
        partial.gamma = partial.sigma;
        break;
    case GammaRule::MedianDistance: {
        if (config.gamma) {
            partial.gamma = *config.gamma;
            break;
        }
        Eigen::MatrixXd level1 = inner;
        if (partial.normalize) {
            GramMatrix tmp{inner, partial, 0.0};
            level1 = spherical_normalize(tmp).entries;
        }
        const double med = median_embedding_distance(level1);
        partial.gamma = med > 0.0 ? std::sqrt(med) : 1.0;
        break;
    }
    }
    partial.validate();
    return partial;
}

GroupKernelSpec resolve_sigma(const KernelConfig& config, std::span<const Group> groups) {
    GroupKernelSpec spec;
    spec.embedding = config.embedding;
    spec.outer = config.outer;
    spec.normalize = config.normalize;
    if (config.sigma) {
        spec.sigma = *config.sigma;
    } else {
        Eigen::Index total = 0;
        for (const auto& g : groups) total += g.has_points() ? g.size() : 1;
        const double s2 = total >= 2 ? median_heuristic(groups) : 0.0;
        spec.sigma = s2 > 0.0 ? std::sqrt(s2) : 1.0;
    }
    return spec;
}

GroupKernelSpec resolve_kernel_spec(const KernelConfig& config, std::span<const Group> groups) {
    const GroupKernelSpec spec = resolve_sigma(config, groups);
    if (config.outer == OuterKernel::EmbeddingRBF && config.gamma_rule == GammaRule::MedianDistance && !config.gamma) {
        GroupKernelSpec partial = spec;
        partial.outer = OuterKernel::Linear;
        partial.normalize = false;
        return resolve_gamma(config, spec, inner_product_matrix(groups, partial));
    }
    return resolve_gamma(config, spec, Eigen::MatrixXd());
}

} // namespace ocsmm
