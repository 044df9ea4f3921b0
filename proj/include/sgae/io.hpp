#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sgae/matrix.hpp"

namespace sgae::io {

std::string read_text(const std::filesystem::path& path);

// Whitespace-separated numeric table, one row per non-empty line.
Matrix parse_tsv_matrix(const std::string& text, const std::string& what);
std::string format_tsv_matrix(const Matrix& m);

// Shortest representation that round-trips exactly.
std::string format_double(double x);

// Row-major little-endian float64 blob.
std::string to_blob(const Matrix& m);
Matrix from_blob(const std::string& bytes, std::size_t rows, std::size_t cols, const std::string& what);

// Files staged in memory and written together on commit(). A command that
// fails before commit leaves no partial outputs behind.
class OutputSet {
public:
    explicit OutputSet(std::filesystem::path root) : root_(std::move(root)) {}

    void add(const std::filesystem::path& relative, std::string contents);
    const std::filesystem::path& root() const noexcept { return root_; }
    std::vector<std::filesystem::path> files() const;
    void commit() const;

private:
    std::filesystem::path root_;
    std::map<std::filesystem::path, std::string> files_;
};

}  // namespace sgae::io
