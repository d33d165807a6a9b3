#pragma once

// Truncated Dirichlet-process Gaussian mixture fitted by mean-field
// variational inference. Stick-breaking weights v_k ~ Beta(1, alpha) with
// v_K = 1, Normal-Wishart priors on component means and precisions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <boost/math/special_functions/digamma.hpp>

#include "windfleet/error.hpp"

namespace windfleet {

struct GaussianComponent {
    double weight = 0.0;
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
};

struct MixtureModel {
    std::vector<GaussianComponent> components;
    int truncation = 6;
    double concentration = 1.0 / 6.0;
    /// Per-point ELBO change of the last iteration.
    double final_elbo_delta = 0.0;
    double elbo = 0.0;
    int iterations_run = 0;
    bool converged = false;
    std::uint64_t seed = 0;
    /// Number of points the model was fitted to; sets the effective-weight threshold.
    std::size_t n_points = 0;

    int dimension() const { return components.empty() ? 0 : static_cast<int>(components.front().mean.size()); }

    double effective_threshold() const { return n_points == 0 ? 0.0 : 2.0 / static_cast<double>(n_points); }

    bool is_effective(std::size_t k) const { return components[k].weight >= effective_threshold(); }

    std::size_t effective_count() const {
        std::size_t n = 0;
        for (std::size_t k = 0; k < components.size(); ++k) n += is_effective(k) ? 1 : 0;
        return n;
    }
};

struct DpgmmOptions {
    int truncation = 6;
    /// Convergence threshold on the per-point ELBO improvement.
    double tol = 1e-5;
    int max_iter = 1000;
    std::uint64_t seed = 0;
    /// DP concentration; defaults to 1 / truncation.
    std::optional<double> concentration;
    /// Rounds of initialization; the fit with the highest ELBO is kept.
    int restarts = 1;
    /// Each round seeds k-means with every cluster count 1..truncation
    /// instead of truncation clusters only.
    bool sweep_init = true;
    /// Lloyd iterations refining the k-means++ seeding.
    int kmeans_iter = 20;
    /// Precision multiplier beta0 of the Gaussian prior on component means.
    double prior_mean_precision = 0.1;
    /// Expected component covariance relative to the data covariance shared
    /// among truncation components, emp_cov * truncation^(-2/d).
    double prior_scale = 1.0;
    /// Wishart degrees of freedom in excess of the dimension.
    double prior_extra_dof = 2.0;
    /// Collects the ELBO after every iteration.
    std::vector<double>* elbo_trace = nullptr;
};

namespace detail {

/// Sufficient statistics and variational parameters of one component.
struct ComponentPosterior {
    double nk = 0.0;
    Eigen::VectorXd xbar;
    Eigen::MatrixXd scatter;  // sum_n r_nk (x_n - xbar)(x_n - xbar)^T
    double gamma1 = 1.0, gamma2 = 1.0;
    double beta = 1.0, nu = 1.0;
    Eigen::VectorXd m;
    Eigen::MatrixXd w_inv;
    Eigen::LLT<Eigen::MatrixXd> w_inv_chol;
    double log_det_w = 0.0;
    double e_log_det_lambda = 0.0;
    double e_log_v = 0.0;
    double e_log_1mv = 0.0;
    double e_log_pi = 0.0;

    // x^T W x with W = w_inv^{-1}
    double quad(const Eigen::VectorXd& x) const { return x.dot(w_inv_chol.solve(x)); }
    double trace_w(const Eigen::MatrixXd& a) const { return w_inv_chol.solve(a).trace(); }
};

struct Priors {
    double alpha = 1.0;
    double beta0 = 1.0;
    double nu0 = 1.0;
    Eigen::VectorXd m0;
    Eigen::MatrixXd w0_inv;
    double log_b0 = 0.0;  // ln B(W0, nu0)
};

inline double log_wishart_norm(double log_det_w, double nu, int d) {
    double s = -0.5 * nu * log_det_w - 0.5 * nu * d * std::numbers::ln2 -
               0.25 * d * (d - 1) * std::log(std::numbers::pi);
    for (int i = 1; i <= d; ++i) s -= std::lgamma(0.5 * (nu + 1 - i));
    return s;
}

inline double log_det_from_chol(const Eigen::LLT<Eigen::MatrixXd>& llt) {
    const auto& l = llt.matrixLLT();
    double s = 0.0;
    for (Eigen::Index i = 0; i < l.rows(); ++i) s += std::log(l(i, i));
    return 2.0 * s;
}

class VariationalFit {
public:
    VariationalFit(const Eigen::MatrixXd& x, const Priors& priors, int k)
        : x_(x), p_(priors), n_(x.rows()), d_(static_cast<int>(x.cols())), k_(k), comp_(static_cast<std::size_t>(k)) {}

    Eigen::MatrixXd& resp() { return r_; }
    const std::vector<ComponentPosterior>& components() const { return comp_; }

    void m_step() {
        for (int k = 0; k < k_; ++k) {
            auto& c = comp_[static_cast<std::size_t>(k)];
            const auto col = r_.col(k);
            c.nk = col.sum();
            if (c.nk > 0.0) {
                c.xbar = (x_.transpose() * col) / c.nk;
                const Eigen::MatrixXd centered = x_.rowwise() - c.xbar.transpose();
                c.scatter = centered.transpose() * col.asDiagonal() * centered;
            } else {
                c.xbar = p_.m0;
                c.scatter = Eigen::MatrixXd::Zero(d_, d_);
            }
            c.beta = p_.beta0 + c.nk;
            c.nu = p_.nu0 + c.nk;
            c.m = (p_.beta0 * p_.m0 + c.nk * c.xbar) / c.beta;
            const Eigen::VectorXd diff = c.xbar - p_.m0;
            c.w_inv = p_.w0_inv + c.scatter + (p_.beta0 * c.nk / c.beta) * diff * diff.transpose();
            c.w_inv = 0.5 * (c.w_inv + c.w_inv.transpose());
            c.w_inv_chol.compute(c.w_inv);
            c.log_det_w = -log_det_from_chol(c.w_inv_chol);
            c.e_log_det_lambda = d_ * std::numbers::ln2 + c.log_det_w;
            for (int i = 1; i <= d_; ++i) c.e_log_det_lambda += boost::math::digamma(0.5 * (c.nu + 1 - i));
        }
        // Stick-breaking: mass assigned to later components.
        double tail = 0.0;
        for (int k = k_ - 1; k >= 0; --k) {
            auto& c = comp_[static_cast<std::size_t>(k)];
            c.gamma1 = 1.0 + c.nk;
            c.gamma2 = p_.alpha + tail;
            tail += c.nk;
            if (k == k_ - 1) {
                c.e_log_v = 0.0;
                c.e_log_1mv = -std::numeric_limits<double>::infinity();
            } else {
                const double dg = boost::math::digamma(c.gamma1 + c.gamma2);
                c.e_log_v = boost::math::digamma(c.gamma1) - dg;
                c.e_log_1mv = boost::math::digamma(c.gamma2) - dg;
            }
        }
        double acc = 0.0;
        for (int k = 0; k < k_; ++k) {
            auto& c = comp_[static_cast<std::size_t>(k)];
            c.e_log_pi = c.e_log_v + acc;
            if (k < k_ - 1) acc += c.e_log_1mv;
        }
    }

    void e_step() {
        const double log2pi = std::log(2.0 * std::numbers::pi);
        Eigen::MatrixXd log_rho(n_, k_);
        for (int k = 0; k < k_; ++k) {
            const auto& c = comp_[static_cast<std::size_t>(k)];
            const double base = c.e_log_pi + 0.5 * c.e_log_det_lambda - 0.5 * d_ * log2pi - 0.5 * d_ / c.beta;
            const Eigen::MatrixXd centered = (x_.rowwise() - c.m.transpose()).transpose();
            const Eigen::MatrixXd solved = c.w_inv_chol.solve(centered);
            for (Eigen::Index n = 0; n < n_; ++n)
                log_rho(n, k) = base - 0.5 * c.nu * centered.col(n).dot(solved.col(n));
        }
        r_.resize(n_, k_);
        for (Eigen::Index n = 0; n < n_; ++n) {
            const double mx = log_rho.row(n).maxCoeff();
            double s = 0.0;
            for (int k = 0; k < k_; ++k) s += std::exp(log_rho(n, k) - mx);
            const double lse = mx + std::log(s);
            for (int k = 0; k < k_; ++k) r_(n, k) = std::exp(log_rho(n, k) - lse);
        }
    }

    double elbo() const {
        const double log2pi = std::log(2.0 * std::numbers::pi);
        double total = 0.0;
        for (int k = 0; k < k_; ++k) {
            const auto& c = comp_[static_cast<std::size_t>(k)];
            const double elam = c.e_log_det_lambda;
            // E[ln p(X | Z, mu, Lambda)]
            if (c.nk > 0.0) {
                const Eigen::VectorXd dx = c.xbar - c.m;
                total += 0.5 * (c.nk * (elam - d_ / c.beta - d_ * log2pi) - c.nu * c.trace_w(c.scatter) -
                                c.nk * c.nu * c.quad(dx));
            }
            // E[ln p(Z | v)]
            if (c.nk > 0.0) total += c.nk * c.e_log_pi;
            // E[ln p(mu, Lambda)]
            const Eigen::VectorXd dm = c.m - p_.m0;
            total += 0.5 * (d_ * std::log(p_.beta0 / (2.0 * std::numbers::pi)) + elam - d_ * p_.beta0 / c.beta -
                            p_.beta0 * c.nu * c.quad(dm));
            total += p_.log_b0 + 0.5 * (p_.nu0 - d_ - 1) * elam - 0.5 * c.nu * c.trace_w(p_.w0_inv);
            // -E[ln q(mu, Lambda)]
            const double entropy_lambda = -log_wishart_norm(c.log_det_w, c.nu, d_) - 0.5 * (c.nu - d_ - 1) * elam +
                                          0.5 * c.nu * d_;
            total -= 0.5 * elam + 0.5 * d_ * std::log(c.beta / (2.0 * std::numbers::pi)) - 0.5 * d_ - entropy_lambda;
            if (k < k_ - 1) {
                // E[ln p(v)] - E[ln q(v)]
                total += std::log(p_.alpha) + (p_.alpha - 1.0) * c.e_log_1mv;
                total -= std::lgamma(c.gamma1 + c.gamma2) - std::lgamma(c.gamma1) - std::lgamma(c.gamma2) +
                         (c.gamma1 - 1.0) * c.e_log_v + (c.gamma2 - 1.0) * c.e_log_1mv;
            }
        }
        // -E[ln q(Z)]
        for (Eigen::Index i = 0; i < r_.size(); ++i) {
            const double r = r_.data()[i];
            if (r > 0.0) total -= r * std::log(r);
        }
        return total;
    }

private:
    const Eigen::MatrixXd& x_;
    const Priors& p_;
    Eigen::Index n_;
    int d_;
    int k_;
    std::vector<ComponentPosterior> comp_;
    Eigen::MatrixXd r_;
};

/// k-means++ seeding plus a few Lloyd passes; returns hard labels with
/// clusters renumbered by decreasing size.
inline std::vector<int> kmeans_init(const Eigen::MatrixXd& x, int k, int lloyd_iter, std::mt19937_64& rng) {
    const Eigen::Index n = x.rows();
    std::vector<Eigen::Index> centers_idx;
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    centers_idx.push_back(pick(rng));
    std::vector<double> d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    while (static_cast<int>(centers_idx.size()) < k) {
        const auto& c = x.row(centers_idx.back());
        double total = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            d2[static_cast<std::size_t>(i)] = std::min(d2[static_cast<std::size_t>(i)], (x.row(i) - c).squaredNorm());
            total += d2[static_cast<std::size_t>(i)];
        }
        Eigen::Index chosen = 0;
        if (total <= 0.0) {
            chosen = pick(rng);
        } else {
            double u = unif(rng) * total;
            chosen = n - 1;
            for (Eigen::Index i = 0; i < n; ++i) {
                u -= d2[static_cast<std::size_t>(i)];
                if (u < 0.0) {
                    chosen = i;
                    break;
                }
            }
        }
        centers_idx.push_back(chosen);
    }
    Eigen::MatrixXd centers(k, x.cols());
    for (int j = 0; j < k; ++j) centers.row(j) = x.row(centers_idx[static_cast<std::size_t>(j)]);

    std::vector<int> labels(static_cast<std::size_t>(n), 0);
    for (int it = 0; it <= lloyd_iter; ++it) {
        bool changed = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            int best = 0;
            double bd = std::numeric_limits<double>::infinity();
            for (int j = 0; j < k; ++j) {
                const double dd = (x.row(i) - centers.row(j)).squaredNorm();
                if (dd < bd) {
                    bd = dd;
                    best = j;
                }
            }
            if (labels[static_cast<std::size_t>(i)] != best || it == 0) changed = changed || labels[static_cast<std::size_t>(i)] != best;
            labels[static_cast<std::size_t>(i)] = best;
        }
        if (it > 0 && !changed) break;
        for (int j = 0; j < k; ++j) {
            Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(x.cols());
            int count = 0;
            for (Eigen::Index i = 0; i < n; ++i)
                if (labels[static_cast<std::size_t>(i)] == j) {
                    sum += x.row(i);
                    ++count;
                }
            if (count > 0) centers.row(j) = sum / count;
        }
    }

    std::vector<int> sizes(static_cast<std::size_t>(k), 0);
    for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
    std::vector<int> order(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) order[static_cast<std::size_t>(j)] = j;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return sizes[static_cast<std::size_t>(a)] > sizes[static_cast<std::size_t>(b)]; });
    std::vector<int> rank(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) rank[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])] = j;
    for (int& l : labels) l = rank[static_cast<std::size_t>(l)];
    return labels;
}

inline MixtureModel to_model(const VariationalFit& fit, const DpgmmOptions& opt, double alpha, std::size_t n) {
    MixtureModel model;
    model.truncation = opt.truncation;
    model.concentration = alpha;
    model.seed = opt.seed;
    model.n_points = n;
    const auto& comps = fit.components();
    double remaining = 1.0;
    double total = 0.0;
    for (std::size_t k = 0; k < comps.size(); ++k) {
        const auto& c = comps[k];
        double w = 0.0;
        if (k + 1 == comps.size()) {
            w = remaining;
        } else {
            const double ev = c.gamma1 / (c.gamma1 + c.gamma2);
            w = remaining * ev;
            remaining *= 1.0 - ev;
        }
        Eigen::MatrixXd cov = c.w_inv / c.nu;
        cov = 0.5 * (cov + cov.transpose());
        model.components.push_back({w, c.m, cov});
        total += w;
    }
    for (auto& c : model.components) c.weight /= total;
    return model;
}

}  // namespace detail

/// Fits a truncated DP mixture to the rows of `points`.
inline MixtureModel fit_dpgmm(const Eigen::MatrixXd& points, const DpgmmOptions& opt = {}) {
    const Eigen::Index n = points.rows();
    const Eigen::Index d = points.cols();
    if (opt.truncation < 1) throw DomainError("truncation must be at least 1");
    if (!(opt.tol > 0.0)) throw DomainError("tolerance must be positive");
    if (opt.max_iter < 1) throw DomainError("max_iter must be at least 1");
    if (d < 1) throw DegenerateInputError("points need at least one dimension");
    if (n < 2 || n < d + 1) throw DegenerateInputError("need at least max(2, dimension + 1) points");
    if (!points.allFinite()) throw DomainError("non-finite input point");

    detail::Priors priors;
    priors.alpha = opt.concentration.value_or(1.0 / opt.truncation);
    if (!(priors.alpha > 0.0)) throw DomainError("concentration must be positive");
    if (!(opt.prior_mean_precision > 0.0)) throw DomainError("prior mean precision must be positive");
    priors.beta0 = opt.prior_mean_precision;
    if (!(opt.prior_extra_dof >= 0.0)) throw DomainError("prior degrees of freedom must be at least the dimension");
    priors.nu0 = static_cast<double>(d) + opt.prior_extra_dof;
    priors.m0 = points.colwise().mean().transpose();
    const Eigen::MatrixXd centered = points.rowwise() - priors.m0.transpose();
    const Eigen::MatrixXd emp_cov = centered.transpose() * centered / static_cast<double>(n);
    const double mean_var = emp_cov.diagonal().mean();
    const double reg = 1e-6 * (mean_var > 0.0 ? mean_var : 1.0);
    if (!(opt.prior_scale > 0.0)) throw DomainError("prior scale must be positive");
    const double share = std::pow(static_cast<double>(opt.truncation), -2.0 / static_cast<double>(d));
    priors.w0_inv = (opt.prior_scale * share * priors.nu0 / static_cast<double>(d)) * emp_cov + reg * Eigen::MatrixXd::Identity(d, d);
    Eigen::LLT<Eigen::MatrixXd> w0_chol(priors.w0_inv);
    priors.log_b0 = detail::log_wishart_norm(-detail::log_det_from_chol(w0_chol), priors.nu0, static_cast<int>(d));

    std::mt19937_64 rng(opt.seed);
    std::optional<MixtureModel> best;
    std::vector<double> best_trace;
    // Variational updates cannot merge components, so every restart tries
    // k-means seedings with 1..truncation clusters.
    const int per_round = opt.sweep_init ? opt.truncation : 1;
    for (int attempt = 0; attempt < std::max(1, opt.restarts) * per_round; ++attempt) {
        const int k_init = std::min<int>(opt.sweep_init ? attempt % opt.truncation + 1 : opt.truncation, static_cast<int>(n));
        detail::VariationalFit fit(points, priors, opt.truncation);
        const auto labels = detail::kmeans_init(points, k_init, opt.kmeans_iter, rng);
        fit.resp() = Eigen::MatrixXd::Zero(n, opt.truncation);
        for (Eigen::Index i = 0; i < n; ++i) fit.resp()(i, labels[static_cast<std::size_t>(i)]) = 1.0;

        std::vector<double> trace;
        double prev = -std::numeric_limits<double>::infinity();
        double delta = std::numeric_limits<double>::infinity();
        bool converged = false;
        int it = 0;
        for (it = 1; it <= opt.max_iter; ++it) {
            fit.m_step();
            const double elbo = fit.elbo();
            trace.push_back(elbo);
            if (it > 1) {
                delta = (elbo - prev) / static_cast<double>(n);
                if (std::fabs(delta) < opt.tol) {
                    converged = true;
                    prev = elbo;
                    break;
                }
            }
            prev = elbo;
            fit.e_step();
        }
        auto model = detail::to_model(fit, opt, priors.alpha, static_cast<std::size_t>(n));
        model.elbo = prev;
        model.final_elbo_delta = delta;
        model.converged = converged;
        model.iterations_run = std::min(it, opt.max_iter);
        if (!best || model.elbo > best->elbo) {
            best = std::move(model);
            best_trace = std::move(trace);
        }
    }
    if (opt.elbo_trace) *opt.elbo_trace = std::move(best_trace);
    return *best;
}

inline MixtureModel fit_dpgmm(std::span<const std::vector<double>> points, const DpgmmOptions& opt = {}) {
    if (points.empty()) throw DegenerateInputError("no points");
    const auto d = static_cast<Eigen::Index>(points.front().size());
    Eigen::MatrixXd x(static_cast<Eigen::Index>(points.size()), d);
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (static_cast<Eigen::Index>(points[i].size()) != d) throw DomainError("inconsistent point dimensions");
        for (Eigen::Index j = 0; j < d; ++j) x(static_cast<Eigen::Index>(i), j) = points[i][static_cast<std::size_t>(j)];
    }
    return fit_dpgmm(x, opt);
}

/// Posterior component probabilities of `point` under the plug-in mixture.
inline Eigen::VectorXd responsibilities(const MixtureModel& model, const Eigen::VectorXd& point) {
    const auto k = static_cast<Eigen::Index>(model.components.size());
    if (k == 0) throw DomainError("empty mixture");
    if (point.size() != model.dimension()) throw DomainError("point dimension does not match model");
    const double log2pi = std::log(2.0 * std::numbers::pi);
    Eigen::VectorXd logp(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        const auto& c = model.components[static_cast<std::size_t>(j)];
        if (c.weight <= 0.0) {
            logp(j) = -std::numeric_limits<double>::infinity();
            continue;
        }
        Eigen::LLT<Eigen::MatrixXd> llt(c.covariance);
        const Eigen::VectorXd diff = point - c.mean;
        logp(j) = std::log(c.weight) - 0.5 * (point.size() * log2pi + detail::log_det_from_chol(llt) +
                                              diff.dot(llt.solve(diff)));
    }
    const double mx = logp.maxCoeff();
    Eigen::VectorXd r = (logp.array() - mx).exp();
    return r / r.sum();
}

/// Index of the largest entry; ties go to the lower index.
inline int argmax(const Eigen::VectorXd& v) {
    int best = 0;
    for (Eigen::Index j = 1; j < v.size(); ++j)
        if (v(j) > v(best)) best = static_cast<int>(j);
    return best;
}

struct ZoneAssignment {
    std::vector<int> labels;
    std::vector<Eigen::VectorXd> responsibilities;
};

inline ZoneAssignment assign(const MixtureModel& model, const Eigen::MatrixXd& points) {
    ZoneAssignment out;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        auto r = responsibilities(model, points.row(i).transpose());
        out.labels.push_back(argmax(r));
        out.responsibilities.push_back(std::move(r));
    }
    return out;
}

struct Subclustering {
    MixtureModel model;
    /// Row indices of the parent point set that belong to the zone.
    std::vector<Eigen::Index> members;
    ZoneAssignment assignment;
};

/// Zone refits expect a single group: broader covariance prior, no extra
/// degrees of freedom.
inline DpgmmOptions subcluster_options(DpgmmOptions opt = {}) {
    opt.prior_scale = 2.0;
    opt.prior_extra_dof = 0.0;
    return opt;
}

/// Refits a mixture on the members of one zone.
inline Subclustering subcluster(const Eigen::MatrixXd& points, const ZoneAssignment& parent, int zone,
                                const DpgmmOptions& opt = subcluster_options()) {
    Subclustering out;
    for (std::size_t i = 0; i < parent.labels.size(); ++i)
        if (parent.labels[i] == zone) out.members.push_back(static_cast<Eigen::Index>(i));
    if (out.members.size() < 4) throw DegenerateInputError("zone has fewer than 4 members");
    Eigen::MatrixXd sub(static_cast<Eigen::Index>(out.members.size()), points.cols());
    for (std::size_t i = 0; i < out.members.size(); ++i) sub.row(static_cast<Eigen::Index>(i)) = points.row(out.members[i]);
    out.model = fit_dpgmm(sub, opt);
    out.assignment = assign(out.model, sub);
    return out;
}

/// A split is adopted when at least two effective subcomponents each hold
/// three or more of the zone's members.
inline bool adopt_split(const Subclustering& s, int min_members = 3) {
    std::vector<int> counts(s.model.components.size(), 0);
    for (int l : s.assignment.labels) ++counts[static_cast<std::size_t>(l)];
    int qualifying = 0;
    for (std::size_t k = 0; k < counts.size(); ++k)
        if (s.model.is_effective(k) && counts[k] >= min_members) ++qualifying;
    return qualifying >= 2;
}

/// True when the matrix is symmetric and all eigenvalues are positive.
inline bool is_spd(const Eigen::MatrixXd& m, double sym_tol = 1e-12) {
    if (m.rows() != m.cols()) return false;
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > sym_tol * std::max(1.0, m.cwiseAbs().maxCoeff())) return false;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() > 0.0;
}

}  // namespace windfleet
