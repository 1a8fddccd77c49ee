#pragma once

#include <cstddef>
#include <vector>

namespace signdim {

/// Equivalence classes of cells, one disjoint-set universe per column.
/// Cells from different columns are never joined. Each class also keeps a
/// circular member list so that all of its cells can be enumerated when the
/// class receives a sign.
class CellClasses {
public:
    CellClasses() = default;
    CellClasses(std::size_t n_rows, std::size_t n_cols);

    std::size_t find(std::size_t row, std::size_t col);
    bool same(std::size_t col, std::size_t row_a, std::size_t row_b);
    /// Returns false if the two cells were already equivalent.
    bool merge(std::size_t col, std::size_t row_a, std::size_t row_b);
    /// Rows equivalent to (row, col), including row itself.
    std::vector<std::size_t> members(std::size_t row, std::size_t col) const;

private:
    std::size_t index(std::size_t row, std::size_t col) const { return col * n_rows_ + row; }

    std::size_t n_rows_ = 0;
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> size_;
    std::vector<std::size_t> next_;  // circular list through each class
};

}  // namespace signdim
