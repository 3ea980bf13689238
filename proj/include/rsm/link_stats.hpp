#pragma once

// Statistics behind probabilistic intersection links: coordinate weight
// vectors, 2x2 covariance with ridge fallback, Mahalanobis distance, the
// link-probability family, closed-form expected link counts, and the
// chi-square outlier diagnostic.
//
// Everything is a pure function except sample_link/sample_bernoulli, which
// advance the caller's generator; callers serialize their draws.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsm/rng.hpp"
#include "rsm/space.hpp"
#include "rsm/store.hpp"

namespace rsm {

struct StatsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct WeightVector {
    double rel_level = 0;  // coordinate level over the tree's max level, in [0,1]
    double res_count = 0;  // resources at or under the coordinate
};

struct Covariance2 {
    double xx = 0, xy = 0, yy = 0;     // entries after any regularization
    double ixx = 0, ixy = 0, iyy = 0;  // inverse
    double ridge = 0;                  // epsilon added to the diagonal, 0 if none
};

enum class PolicyKind { Logistic, Bounded, General };

struct LinkPolicy {
    PolicyKind kind = PolicyKind::Bounded;
    double a = 2.0;           // GENERAL decay exponent, must be > 1
    uint64_t rng_seed = 0;

    // "logistic" | "bounded" | "general:<a>"
    static LinkPolicy parse(const std::string& text);
    std::string to_string() const;
};

WeightVector weight_vector(const Dimension& dim, const Path& c, const Store& store);

// Mean-centered sample covariance normalized by n-1. A near-singular matrix
// (determinant < 1e-12) gets a ridge of 1e-6 times its trace added to the
// diagonal (1e-6 outright when the trace is zero) before inversion.
Covariance2 covariance_inverse(const std::vector<WeightVector>& samples);

double mahalanobis(const WeightVector& w1, const WeightVector& w2, const Covariance2& cov);

// LOGISTIC: 1/(1+e^-x). BOUNDED: e^x/(2(e^x+1)sqrt(ln(e^x+1))), which decays
// like 1/(2 sqrt(x)) so its running sum stays near sqrt(n). GENERAL(a) spans
// the family between them. Outputs clamped into (0,1).
double link_probability(double x, const LinkPolicy& policy);

// Integral of link_probability over [0,n], in closed form.
double expected_links(double n, const LinkPolicy& policy);

// (1-alpha) quantile of the chi-square distribution with d degrees of freedom.
double chi2_threshold(int d, double alpha);

// Diagnostic only: is the pair's squared distance past the chi-square cut?
bool chi2_outlier(const WeightVector& w1, const WeightVector& w2, const Covariance2& cov,
                  double alpha);

bool sample_bernoulli(double p, Rng& rng);
bool sample_link(double x, const LinkPolicy& policy, Rng& rng);

// Coordinates along the dimension's longest and shortest root-to-leaf paths
// (deepest leaf and shallowest leaf, ties broken by path order), as weight
// vectors. The covariance sampling rule at scale.
std::vector<WeightVector> path_extreme_samples(const Dimension& dim, const Store& store);

// Covariance samples for a dimension pair: every coordinate of both
// dimensions while their total stays at desk scale (<= 1024), the
// longest+shortest path heuristic beyond that.
std::vector<WeightVector> pair_samples(const ResourceSpace& space, const Store& store,
                                       int dim_i, int dim_j);

}  // namespace rsm
