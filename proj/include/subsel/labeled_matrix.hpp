#pragma once

#include "subsel/linalg.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace subsel {

/// Dense matrix whose rows (and optionally columns) carry unique identifiers.
/// Immutable after construction.
class LabeledMatrix {
  public:
    LabeledMatrix(std::vector<std::string> row_ids, linalg::Matrix values,
                  std::optional<std::vector<std::string>> col_ids = std::nullopt);

    const std::vector<std::string>& row_ids() const noexcept { return row_ids_; }
    const std::optional<std::vector<std::string>>& col_ids() const noexcept { return col_ids_; }
    const linalg::Matrix& values() const noexcept { return values_; }

    std::size_t rows() const noexcept { return row_ids_.size(); }
    std::size_t cols() const noexcept { return static_cast<std::size_t>(values_.cols()); }

    /// Row index of an identifier, or nullopt.
    std::optional<std::size_t> find_row(const std::string& id) const;
    /// Row index of an identifier; throws Error(UnknownId).
    std::size_t row_index(const std::string& id) const;

    std::optional<std::size_t> find_col(const std::string& id) const;

    /// Rows extracted in the given order, column labels preserved.
    LabeledMatrix subset_rows(std::span<const std::string> ids) const;

    /// Column ids become row ids and vice versa. Requires column ids.
    LabeledMatrix transposed() const;

    /// Drops one column; returns the remaining matrix.
    LabeledMatrix without_col(std::size_t col) const;

  private:
    std::vector<std::string> row_ids_;
    std::optional<std::vector<std::string>> col_ids_;
    linalg::Matrix values_;
    std::unordered_map<std::string, std::size_t> row_lookup_;
};

/// Reads a CSV whose first column holds row identifiers. When has_col_header
/// is set, the first row holds column identifiers (its first cell is ignored).
LabeledMatrix load_labeled_matrix(const std::filesystem::path& path, bool has_col_header);

/// Same as load_labeled_matrix but from an in-memory string.
LabeledMatrix parse_labeled_matrix(const std::string& text, bool has_col_header);

/// Writes values with 17 significant digits, so a re-read is bit-exact.
void write_labeled_matrix(const std::filesystem::path& path, const LabeledMatrix& m);
std::string format_labeled_matrix(const LabeledMatrix& m);

/// One identifier per line; blank lines are skipped.
std::vector<std::string> read_id_list(const std::filesystem::path& path);

} // namespace subsel
