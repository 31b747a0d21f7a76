#include "subsel/labeled_matrix.hpp"

#include "subsel/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace subsel {

namespace {

std::string_view trim(std::string_view s) {
    const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

std::string_view unquote(std::string_view s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
    return s;
}

std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        const auto cell = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
        cells.emplace_back(unquote(trim(cell)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

void check_ids(const std::vector<std::string>& ids, const char* what) {
    std::unordered_set<std::string> seen;
    for (const auto& id : ids) {
        if (id.empty()) throw Error(ErrorCode::ParseError, std::string("empty ") + what + " identifier");
        if (!seen.insert(id).second) {
            throw Error(ErrorCode::DuplicateId, std::string("duplicate ") + what + " identifier '" + id + "'");
        }
    }
}

double parse_cell(const std::string& cell, std::size_t line_no) {
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (!cell.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(value)) {
        throw Error(ErrorCode::ParseError,
                    "line " + std::to_string(line_no) + ": non-numeric cell '" + cell + "'");
    }
    return value;
}

} // namespace

LabeledMatrix::LabeledMatrix(std::vector<std::string> row_ids, linalg::Matrix values,
                             std::optional<std::vector<std::string>> col_ids)
    : row_ids_(std::move(row_ids)), col_ids_(std::move(col_ids)), values_(std::move(values)) {
    if (row_ids_.empty() || values_.cols() == 0) throw Error(ErrorCode::EmptyInput, "matrix has no rows or columns");
    if (static_cast<Eigen::Index>(row_ids_.size()) != values_.rows()) {
        throw Error(ErrorCode::SizeError, "row identifier count does not match matrix rows");
    }
    if (col_ids_ && static_cast<Eigen::Index>(col_ids_->size()) != values_.cols()) {
        throw Error(ErrorCode::SizeError, "column identifier count does not match matrix columns");
    }
    if (!values_.allFinite()) throw Error(ErrorCode::ParseError, "matrix contains non-finite values");
    check_ids(row_ids_, "row");
    if (col_ids_) check_ids(*col_ids_, "column");
    row_lookup_.reserve(row_ids_.size());
    for (std::size_t i = 0; i < row_ids_.size(); ++i) row_lookup_.emplace(row_ids_[i], i);
}

std::optional<std::size_t> LabeledMatrix::find_row(const std::string& id) const {
    const auto it = row_lookup_.find(id);
    if (it == row_lookup_.end()) return std::nullopt;
    return it->second;
}

std::size_t LabeledMatrix::row_index(const std::string& id) const {
    if (auto idx = find_row(id)) return *idx;
    throw Error(ErrorCode::UnknownId, "unknown identifier '" + id + "'");
}

std::optional<std::size_t> LabeledMatrix::find_col(const std::string& id) const {
    if (!col_ids_) return std::nullopt;
    for (std::size_t j = 0; j < col_ids_->size(); ++j) {
        if ((*col_ids_)[j] == id) return j;
    }
    return std::nullopt;
}

LabeledMatrix LabeledMatrix::subset_rows(std::span<const std::string> ids) const {
    linalg::Matrix out(static_cast<Eigen::Index>(ids.size()), values_.cols());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = values_.row(static_cast<Eigen::Index>(row_index(ids[i])));
    }
    return LabeledMatrix({ids.begin(), ids.end()}, std::move(out), col_ids_);
}

LabeledMatrix LabeledMatrix::transposed() const {
    if (!col_ids_) throw Error(ErrorCode::MissingParameter, "transposing requires column identifiers");
    return LabeledMatrix(*col_ids_, values_.transpose(), row_ids_);
}

LabeledMatrix LabeledMatrix::without_col(std::size_t col) const {
    const auto p = values_.cols();
    linalg::Matrix out(values_.rows(), p - 1);
    const auto c = static_cast<Eigen::Index>(col);
    out.leftCols(c) = values_.leftCols(c);
    out.rightCols(p - c - 1) = values_.rightCols(p - c - 1);
    std::optional<std::vector<std::string>> cols;
    if (col_ids_) {
        cols = *col_ids_;
        cols->erase(cols->begin() + static_cast<std::ptrdiff_t>(col));
    }
    return LabeledMatrix(row_ids_, std::move(out), std::move(cols));
}

LabeledMatrix parse_labeled_matrix(const std::string& text, bool has_col_header) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    std::optional<std::vector<std::string>> col_ids;
    std::vector<std::string> row_ids;
    std::vector<std::vector<double>> rows;
    std::size_t width = 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto cells = split_line(line);
        if (has_col_header && !col_ids) {
            if (cells.size() < 2) throw Error(ErrorCode::ParseError, "header has no data columns");
            col_ids.emplace(cells.begin() + 1, cells.end());
            width = col_ids->size();
            continue;
        }
        if (cells.size() < 2) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": no data cells");
        }
        if (width == 0) width = cells.size() - 1;
        if (cells.size() - 1 != width) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected " +
                                                   std::to_string(width) + " values, found " +
                                                   std::to_string(cells.size() - 1));
        }
        row_ids.push_back(cells[0]);
        std::vector<double> row;
        row.reserve(width);
        for (std::size_t j = 1; j < cells.size(); ++j) row.push_back(parse_cell(cells[j], line_no));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw Error(ErrorCode::EmptyInput, "no data rows");

    linalg::Matrix values(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < width; ++j) {
            values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return LabeledMatrix(std::move(row_ids), std::move(values), std::move(col_ids));
}

LabeledMatrix load_labeled_matrix(const std::filesystem::path& path, bool has_col_header) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path.string() + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_labeled_matrix(buffer.str(), has_col_header);
}

std::string format_labeled_matrix(const LabeledMatrix& m) {
    std::string out;
    char buf[32];
    if (m.col_ids()) {
        out += "id";
        for (const auto& c : *m.col_ids()) out += "," + c;
        out += '\n';
    }
    const auto& v = m.values();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        out += m.row_ids()[i];
        for (Eigen::Index j = 0; j < v.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", v(static_cast<Eigen::Index>(i), j));
            out += ',';
            out += buf;
        }
        out += '\n';
    }
    return out;
}

void write_labeled_matrix(const std::filesystem::path& path, const LabeledMatrix& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::ParseError, "cannot write '" + path.string() + "'");
    out << format_labeled_matrix(m);
}

std::vector<std::string> read_id_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path.string() + "'");
    std::vector<std::string> ids;
    std::string line;
    while (std::getline(in, line)) {
        const auto id = unquote(trim(line));
        if (!id.empty()) ids.emplace_back(id);
    }
    return ids;
}

} // namespace subsel
