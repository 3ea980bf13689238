#include "rsm/link_stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/chi_squared.hpp>

namespace rsm {

namespace {

double softplus(double x) {
    // ln(1+e^x) without overflow for large x
    return x > 30 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

LinkPolicy LinkPolicy::parse(const std::string& text) {
    LinkPolicy p;
    if (text == "logistic") {
        p.kind = PolicyKind::Logistic;
    } else if (text == "bounded") {
        p.kind = PolicyKind::Bounded;
    } else if (text.rfind("general:", 0) == 0) {
        p.kind = PolicyKind::General;
        double a = 0;
        if (!parse_number(text.substr(8), a) || !(a > 1))
            throw StatsError("policy '" + text + "': the exponent must be a number > 1");
        p.a = a;
    } else {
        throw StatsError("unknown link policy '" + text +
                         "' (expected logistic, bounded, or general:<a>)");
    }
    return p;
}

std::string LinkPolicy::to_string() const {
    switch (kind) {
        case PolicyKind::Logistic: return "logistic";
        case PolicyKind::Bounded: return "bounded";
        case PolicyKind::General: return "general:" + format_number(a);
    }
    return "bounded";
}

WeightVector weight_vector(const Dimension& dim, const Path& c, const Store& store) {
    const Coordinate& node = dim.at(c);
    int dim_idx = store.space().dim_index(dim.name);
    if (dim_idx < 0) throw StatsError("dimension '" + dim.name + "' is not in the store's space");
    WeightVector w;
    w.rel_level = dim.max_level > 0 ? static_cast<double>(node.level) / dim.max_level : 0.0;
    w.res_count = static_cast<double>(store.count_under(dim_idx, c));
    return w;
}

Covariance2 covariance_inverse(const std::vector<WeightVector>& samples) {
    size_t n = samples.size();
    if (n < 2) throw StatsError("covariance needs at least 2 samples, got " + std::to_string(n));
    double mx = 0, my = 0;
    for (const WeightVector& w : samples) {
        mx += w.rel_level;
        my += w.res_count;
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    Covariance2 c;
    for (const WeightVector& w : samples) {
        double dx = w.rel_level - mx, dy = w.res_count - my;
        c.xx += dx * dx;
        c.xy += dx * dy;
        c.yy += dy * dy;
    }
    double denom = static_cast<double>(n - 1);
    c.xx /= denom;
    c.xy /= denom;
    c.yy /= denom;
    double det = c.xx * c.yy - c.xy * c.xy;
    if (det < 1e-12) {
        double trace = c.xx + c.yy;
        c.ridge = trace > 0 ? 1e-6 * trace : 1e-6;
        c.xx += c.ridge;
        c.yy += c.ridge;
        det = c.xx * c.yy - c.xy * c.xy;
    }
    if (!(det > 0)) throw StatsError("covariance matrix is not invertible after regularization");
    c.ixx = c.yy / det;
    c.iyy = c.xx / det;
    c.ixy = -c.xy / det;
    return c;
}

double mahalanobis(const WeightVector& w1, const WeightVector& w2, const Covariance2& cov) {
    double dx = w1.rel_level - w2.rel_level;
    double dy = w1.res_count - w2.res_count;
    double q = dx * cov.ixx * dx + 2 * dx * cov.ixy * dy + dy * cov.iyy * dy;
    return std::sqrt(std::max(q, 0.0));
}

double link_probability(double x, const LinkPolicy& policy) {
    double p = 0;
    switch (policy.kind) {
        case PolicyKind::Logistic: p = sigmoid(x); break;
        case PolicyKind::Bounded: p = sigmoid(x) / (2 * std::sqrt(softplus(x))); break;
        case PolicyKind::General:
            p = sigmoid(x) / (policy.a * std::pow(softplus(x), 1.0 - 1.0 / policy.a));
            break;
    }
    return std::clamp(p, 1e-12, 1 - 1e-12);
}

double expected_links(double n, const LinkPolicy& policy) {
    double ln2 = std::log(2.0);
    switch (policy.kind) {
        case PolicyKind::Logistic: return softplus(n) - ln2;
        case PolicyKind::Bounded: return std::sqrt(softplus(n)) - std::sqrt(ln2);
        case PolicyKind::General:
            return std::pow(softplus(n), 1.0 / policy.a) - std::pow(ln2, 1.0 / policy.a);
    }
    return 0;
}

double chi2_threshold(int d, double alpha) {
    if (d < 1) throw StatsError("chi-square threshold needs d >= 1");
    if (!(alpha > 0) || alpha > 1) throw StatsError("alpha must lie in (0, 1]");
    if (alpha == 1) return 0;
    boost::math::chi_squared dist(d);
    return boost::math::quantile(dist, 1 - alpha);
}

bool chi2_outlier(const WeightVector& w1, const WeightVector& w2, const Covariance2& cov,
                  double alpha) {
    double d = mahalanobis(w1, w2, cov);
    return d * d > chi2_threshold(2, alpha);
}

bool sample_bernoulli(double p, Rng& rng) { return rng.u01() < p; }

bool sample_link(double x, const LinkPolicy& policy, Rng& rng) {
    return sample_bernoulli(link_probability(x, policy), rng);
}

std::vector<WeightVector> path_extreme_samples(const Dimension& dim, const Store& store) {
    Path deepest, shallowest;
    int max_level = -1, min_level = -1;
    for (const auto& [path, c] : dim.coords) {
        if (!c.children.empty()) continue;
        if (c.level > max_level) {
            max_level = c.level;
            deepest = path;
        }
        if (min_level < 0 || c.level < min_level) {
            min_level = c.level;
            shallowest = path;
        }
    }
    if (max_level < 0) {
        deepest = dim.name;  // bare root
        shallowest = dim.name;
    }
    std::vector<Path> picked;
    for (Path cur = deepest;; cur = parent_path(cur)) {
        picked.push_back(cur);
        if (cur == dim.name) break;
    }
    std::reverse(picked.begin(), picked.end());
    std::vector<Path> tail;
    for (Path cur = shallowest; cur != dim.name; cur = parent_path(cur)) tail.push_back(cur);
    std::reverse(tail.begin(), tail.end());
    for (const Path& p : tail)
        if (std::find(picked.begin(), picked.end(), p) == picked.end()) picked.push_back(p);
    std::vector<WeightVector> out;
    out.reserve(picked.size());
    for (const Path& p : picked) out.push_back(weight_vector(dim, p, store));
    return out;
}

std::vector<WeightVector> pair_samples(const ResourceSpace& space, const Store& store,
                                       int dim_i, int dim_j) {
    const Dimension& a = space.dims[dim_i];
    const Dimension& b = space.dims[dim_j];
    std::vector<WeightVector> out;
    if (a.coords.size() + b.coords.size() <= 1024) {
        for (const auto& [path, c] : a.coords) out.push_back(weight_vector(a, path, store));
        for (const auto& [path, c] : b.coords) out.push_back(weight_vector(b, path, store));
        return out;
    }
    out = path_extreme_samples(a, store);
    std::vector<WeightVector> more = path_extreme_samples(b, store);
    out.insert(out.end(), more.begin(), more.end());
    return out;
}

}  // namespace rsm
