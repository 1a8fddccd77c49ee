#include "signdim/cell_classes.hpp"

#include <numeric>
#include <utility>

namespace signdim {

CellClasses::CellClasses(std::size_t n_rows, std::size_t n_cols)
    : n_rows_(n_rows), parent_(n_rows * n_cols), size_(n_rows * n_cols, 1), next_(n_rows * n_cols) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    std::iota(next_.begin(), next_.end(), std::size_t{0});
}

std::size_t CellClasses::find(std::size_t row, std::size_t col) {
    std::size_t x = index(row, col);
    while (parent_[x] != x) {
        parent_[x] = parent_[parent_[x]];
        x = parent_[x];
    }
    return x;
}

bool CellClasses::same(std::size_t col, std::size_t row_a, std::size_t row_b) {
    return find(row_a, col) == find(row_b, col);
}

bool CellClasses::merge(std::size_t col, std::size_t row_a, std::size_t row_b) {
    std::size_t a = find(row_a, col);
    std::size_t b = find(row_b, col);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    std::swap(next_[a], next_[b]);  // splices the two cycles
    return true;
}

std::vector<std::size_t> CellClasses::members(std::size_t row, std::size_t col) const {
    std::vector<std::size_t> out;
    const std::size_t start = index(row, col);
    std::size_t x = start;
    do {
        out.push_back(x % n_rows_);
        x = next_[x];
    } while (x != start);
    return out;
}

}  // namespace signdim
