#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "trackfuse/types.hpp"

namespace trackfuse {

/// Dense rows x cols cost matrix with an admissibility mask. Rows are tracks,
/// columns are detections.
class CostMatrix {
public:
    CostMatrix() = default;
    CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

    double cost(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
    bool admissible(std::size_t r, std::size_t c) const { return mask_[r * cols_ + c] != 0; }

    void set(std::size_t r, std::size_t c, double cost, bool admissible = true);
    void gate(std::size_t r, std::size_t c) { mask_[r * cols_ + c] = 0; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
    std::vector<unsigned char> mask_;
};

struct AssignmentResult {
    std::vector<std::pair<std::size_t, std::size_t>> matches;  ///< (row, col), ascending row
    std::vector<std::size_t> unmatched_tracks;
    std::vector<std::size_t> unmatched_detections;

    double total_cost(const CostMatrix& cost) const;
};

double iou(const BoundingBox& a, const BoundingBox& b) noexcept;
double centroid_distance(const BoundingBox& a, const BoundingBox& b) noexcept;
/// Throws DimensionMismatch or ZeroVector.
double cosine_similarity(std::span<const double> u, std::span<const double> v);

/// Optimal gated assignment. Maximizes the number of admissible matches, then
/// minimizes their total cost among those. Gated pairs are never matched.
AssignmentResult solve_assignment(const CostMatrix& cost);

/// Greedy matching: repeatedly takes the admissible pair with the lowest cost
/// (ties by row, then column). Used by the IoU baseline tracker.
AssignmentResult solve_greedy(const CostMatrix& cost);

}  // namespace trackfuse
