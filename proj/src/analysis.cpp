// Copyright 2026 The MLTQNN Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "mltqnn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "mltqnn/error.hpp"

namespace mltqnn {

namespace {

constexpr double kShiftTolerance = 1e-6;
constexpr std::size_t kMaxIterations = 300;

double sq_dist(const std::vector<double> &a, const std::vector<double> &b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double e = a[i] - b[i];
        d += e * e;
    }
    return d;
}

/// Terms are summed smallest-first so the total does not depend on the
/// order in which cells were visited.
double ordered_sum(std::vector<double> terms) {
    std::sort(terms.begin(), terms.end());
    double s = 0.0;
    for (double t : terms) s += t;
    return s;
}

struct Contingency {
    std::size_t n = 0;
    std::vector<std::size_t> rows; ///< cluster sizes of a
    std::vector<std::size_t> cols; ///< cluster sizes of b
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> cells;
};

Contingency contingency(std::span<const std::size_t> a, std::span<const std::size_t> b) {
    require(a.size() == b.size(), ErrorKind::InvalidArgument, "labelings differ in length");
    Contingency c;
    c.n = a.size();
    std::map<std::size_t, std::size_t> ra;
    std::map<std::size_t, std::size_t> rb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ra[a[i]] += 1;
        rb[b[i]] += 1;
        c.cells[{a[i], b[i]}] += 1;
    }
    for (const auto &[k, v] : ra) c.rows.push_back(v);
    for (const auto &[k, v] : rb) c.cols.push_back(v);
    return c;
}

double cell_mi(double nij, double ai, double bj, double n) {
    const double lo = std::min(ai, bj);
    const double hi = std::max(ai, bj);
    return nij / n * std::log(n * nij / (lo * hi));
}

bool same_partition(std::span<const std::size_t> a, std::span<const std::size_t> b) {
    std::map<std::size_t, std::size_t> ab;
    std::map<std::size_t, std::size_t> ba;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (ab.emplace(a[i], b[i]).first->second != b[i]) return false;
        if (ba.emplace(b[i], a[i]).first->second != a[i]) return false;
    }
    return true;
}

} // namespace

std::vector<RankedFeature> feature_magnitudes(std::span<const std::vector<double>> vectors) {
    require(!vectors.empty(), ErrorKind::InvalidArgument, "feature_magnitudes needs a batch");
    const std::size_t n = vectors.front().size();
    std::vector<RankedFeature> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i].index = i;
    for (const auto &v : vectors) {
        require(v.size() == n, ErrorKind::InvalidArgument, "feature vectors differ in length");
        for (std::size_t i = 0; i < n; ++i) out[i].magnitude += std::abs(v[i]);
    }
    for (auto &r : out) r.magnitude /= static_cast<double>(vectors.size());
    std::stable_sort(out.begin(), out.end(), [](const RankedFeature &x, const RankedFeature &y) {
        return x.magnitude > y.magnitude;
    });
    return out;
}

KMeansResult kmeans(std::span<const std::vector<double>> points, std::size_t k,
                    std::uint64_t seed) {
    require(k >= 1 && k <= points.size(), ErrorKind::InvalidArgument,
            "kmeans needs 1 <= k <= number of points");
    const std::size_t n = points.size();
    const std::size_t dim = points.front().size();
    for (const auto &p : points) {
        require(p.size() == dim, ErrorKind::InvalidArgument, "points differ in dimension");
    }

    std::mt19937_64 rng(seed);
    KMeansResult r;
    r.centroids.push_back(points[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)]);
    std::vector<double> d2(n);
    while (r.centroids.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::numeric_limits<double>::infinity();
            for (const auto &c : r.centroids) d2[i] = std::min(d2[i], sq_dist(points[i], c));
            total += d2[i];
        }
        std::size_t pick = 0;
        if (total > 0.0) {
            double u = std::uniform_real_distribution<double>(0.0, total)(rng);
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                if (d2[i] > 0.0 && u < d2[i]) {
                    pick = i;
                    break;
                }
                u -= d2[i];
            }
            while (d2[pick] == 0.0) --pick; // rounding fell off the end
        } else {
            pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
        }
        r.centroids.push_back(points[pick]);
    }

    r.labels.assign(n, 0);
    for (std::size_t it = 0; it < kMaxIterations; ++it) {
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                const double d = sq_dist(points[i], r.centroids[c]);
                if (d < best) {
                    best = d;
                    r.labels[i] = c;
                }
            }
            inertia += best;
        }
        r.inertia.push_back(inertia);

        std::vector<std::vector<double>> next(k, std::vector<double>(dim, 0.0));
        std::vector<std::size_t> count(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            count[r.labels[i]] += 1;
            for (std::size_t j = 0; j < dim; ++j) next[r.labels[i]][j] += points[i][j];
        }
        double shift = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            if (count[c] == 0) {
                next[c] = r.centroids[c];
                continue;
            }
            for (double &v : next[c]) v /= static_cast<double>(count[c]);
            shift = std::max(shift, std::sqrt(sq_dist(next[c], r.centroids[c])));
        }
        r.centroids = std::move(next);
        if (shift < kShiftTolerance) break;
    }
    return r;
}

double entropy(std::span<const std::size_t> labels) {
    if (labels.empty()) return 0.0;
    std::map<std::size_t, std::size_t> counts;
    for (std::size_t l : labels) counts[l] += 1;
    const double n = static_cast<double>(labels.size());
    std::vector<double> terms;
    for (const auto &[k, v] : counts) {
        const double p = static_cast<double>(v) / n;
        terms.push_back(-p * std::log(p));
    }
    return ordered_sum(terms);
}

double mutual_information(std::span<const std::size_t> a, std::span<const std::size_t> b) {
    const auto c = contingency(a, b);
    if (c.n == 0) return 0.0;
    std::map<std::size_t, std::size_t> ra;
    std::map<std::size_t, std::size_t> rb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ra[a[i]] += 1;
        rb[b[i]] += 1;
    }
    std::vector<double> terms;
    for (const auto &[key, nij] : c.cells) {
        terms.push_back(cell_mi(static_cast<double>(nij), static_cast<double>(ra[key.first]),
                                static_cast<double>(rb[key.second]),
                                static_cast<double>(c.n)));
    }
    return std::max(0.0, ordered_sum(terms));
}

double expected_mutual_information(std::span<const std::size_t> a,
                                   std::span<const std::size_t> b) {
    const auto c = contingency(a, b);
    const double n = static_cast<double>(c.n);
    const double lg_n1 = std::lgamma(n + 1.0);
    std::vector<double> terms;
    for (std::size_t ai : c.rows) {
        for (std::size_t bj : c.cols) {
            const double lo = static_cast<double>(std::min(ai, bj));
            const double hi = static_cast<double>(std::max(ai, bj));
            const std::size_t start = ai + bj > c.n + 1 ? ai + bj - c.n : 1;
            const std::size_t stop = std::min(ai, bj);
            // log of lo! hi! (n-lo)! (n-hi)! / n!
            const double fixed = (std::lgamma(lo + 1.0) + std::lgamma(hi + 1.0)) +
                                 (std::lgamma(n - lo + 1.0) + std::lgamma(n - hi + 1.0)) - lg_n1;
            for (std::size_t k = start; k <= stop; ++k) {
                const double nij = static_cast<double>(k);
                const double log_p = fixed - std::lgamma(nij + 1.0) -
                                     (std::lgamma(lo - nij + 1.0) + std::lgamma(hi - nij + 1.0)) -
                                     std::lgamma(n - lo - hi + nij + 1.0);
                terms.push_back(nij / n * std::log(n * nij / (lo * hi)) * std::exp(log_p));
            }
        }
    }
    return ordered_sum(terms);
}

double ami(std::span<const std::size_t> a, std::span<const std::size_t> b) {
    require(a.size() == b.size(), ErrorKind::InvalidArgument, "labelings differ in length");
    if (same_partition(a, b)) return 1.0;
    const double ha = entropy(a);
    const double hb = entropy(b);
    if (ha == 0.0 || hb == 0.0) return 0.0;
    const double mi = mutual_information(a, b);
    const double emi = expected_mutual_information(a, b);
    const double mean = (ha + hb) / 2.0;
    double denom = mean - emi;
    const double eps = std::numeric_limits<double>::epsilon();
    denom = denom < 0 ? std::min(denom, -eps) : std::max(denom, eps);
    return (mi - emi) / denom;
}

} // namespace mltqnn
