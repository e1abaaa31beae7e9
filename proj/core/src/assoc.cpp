#include "trackfuse/assoc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace trackfuse {

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill), mask_(rows * cols, 1) {}

void CostMatrix::set(std::size_t r, std::size_t c, double cost, bool admissible) {
    values_[r * cols_ + c] = cost;
    mask_[r * cols_ + c] = admissible ? 1 : 0;
}

double AssignmentResult::total_cost(const CostMatrix& cost) const {
    double total = 0.0;
    for (auto [r, c] : matches) total += cost.cost(r, c);
    return total;
}

double iou(const BoundingBox& a, const BoundingBox& b) noexcept {
    const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
    const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    const double inter = iw * ih;
    // Sum the areas in a fixed order so iou(a, b) == iou(b, a) bit-for-bit.
    const double lo = std::min(a.area(), b.area());
    const double hi = std::max(a.area(), b.area());
    const double uni = (lo + hi) - inter;
    return std::clamp(inter / uni, 0.0, 1.0);
}

double centroid_distance(const BoundingBox& a, const BoundingBox& b) noexcept {
    return std::hypot(a.center_x() - b.center_x(), a.center_y() - b.center_y());
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) {
        throw Error(ErrorCode::DimensionMismatch, "embedding dimensions " + std::to_string(u.size()) +
                                                      " and " + std::to_string(v.size()));
    }
    double dot = 0.0;
    double nu = 0.0;
    double nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) {
        throw Error(ErrorCode::ZeroVector, "cosine similarity of a zero-norm embedding");
    }
    return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

namespace {

// Lexicographic cost: a gated pair costs one unit of `penalty`, which dominates
// any finite real cost. This is sentinel padding with an exact sentinel, so
// large sentinel magnitudes never swamp the real costs in floating point.
struct LexCost {
    double penalty = 0.0;
    double cost = 0.0;

    friend LexCost operator+(LexCost a, LexCost b) { return {a.penalty + b.penalty, a.cost + b.cost}; }
    friend LexCost operator-(LexCost a, LexCost b) { return {a.penalty - b.penalty, a.cost - b.cost}; }
    friend bool operator<(LexCost a, LexCost b) {
        if (a.penalty != b.penalty) return a.penalty < b.penalty;
        return a.cost < b.cost;
    }
};

constexpr LexCost kInf{std::numeric_limits<double>::infinity(), 0.0};

}  // namespace

AssignmentResult solve_assignment(const CostMatrix& cost) {
    AssignmentResult result;
    const std::size_t rows = cost.rows();
    const std::size_t cols = cost.cols();
    if (cost.empty()) {
        result.unmatched_tracks.resize(rows);
        std::iota(result.unmatched_tracks.begin(), result.unmatched_tracks.end(), 0);
        result.unmatched_detections.resize(cols);
        std::iota(result.unmatched_detections.begin(), result.unmatched_detections.end(), 0);
        return result;
    }

    const std::size_t n = std::max(rows, cols);
    auto entry = [&](std::size_t i, std::size_t j) -> LexCost {
        if (i >= rows || j >= cols) return {};
        if (!cost.admissible(i, j)) return {1.0, 0.0};
        return {0.0, cost.cost(i, j)};
    };

    // Shortest augmenting path Hungarian method, 1-based with a virtual column 0.
    std::vector<LexCost> u(n + 1), v(n + 1);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<LexCost> minv(n + 1, kInf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            LexCost delta = kInf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const LexCost cur = entry(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] = u[p[j]] + delta;
                    v[j] = v[j] - delta;
                } else {
                    minv[j] = minv[j] - delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<std::ptrdiff_t> row_to_col(rows, -1);
    for (std::size_t j = 1; j <= n; ++j) {
        const std::size_t i = p[j] - 1;
        const std::size_t c = j - 1;
        if (i < rows && c < cols && cost.admissible(i, c)) {
            row_to_col[i] = static_cast<std::ptrdiff_t>(c);
        }
    }
    std::vector<char> col_used(cols, 0);
    for (std::size_t i = 0; i < rows; ++i) {
        if (row_to_col[i] >= 0) {
            const auto c = static_cast<std::size_t>(row_to_col[i]);
            result.matches.emplace_back(i, c);
            col_used[c] = 1;
        } else {
            result.unmatched_tracks.push_back(i);
        }
    }
    for (std::size_t c = 0; c < cols; ++c) {
        if (!col_used[c]) result.unmatched_detections.push_back(c);
    }
    return result;
}

AssignmentResult solve_greedy(const CostMatrix& cost) {
    struct Candidate {
        double cost;
        std::size_t row;
        std::size_t col;
    };
    std::vector<Candidate> candidates;
    for (std::size_t r = 0; r < cost.rows(); ++r) {
        for (std::size_t c = 0; c < cost.cols(); ++c) {
            if (cost.admissible(r, c)) candidates.push_back({cost.cost(r, c), r, c});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.cost != b.cost) return a.cost < b.cost;
        if (a.row != b.row) return a.row < b.row;
        return a.col < b.col;
    });

    std::vector<char> row_used(cost.rows(), 0), col_used(cost.cols(), 0);
    AssignmentResult result;
    for (const auto& cand : candidates) {
        if (row_used[cand.row] || col_used[cand.col]) continue;
        row_used[cand.row] = 1;
        col_used[cand.col] = 1;
        result.matches.emplace_back(cand.row, cand.col);
    }
    std::sort(result.matches.begin(), result.matches.end());
    for (std::size_t r = 0; r < cost.rows(); ++r) {
        if (!row_used[r]) result.unmatched_tracks.push_back(r);
    }
    for (std::size_t c = 0; c < cost.cols(); ++c) {
        if (!col_used[c]) result.unmatched_detections.push_back(c);
    }
    return result;
}

}  // namespace trackfuse
