#include "sgae/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "sgae/error.hpp"

namespace sgae {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "invalid_argument";
        case ErrorKind::NotFound: return "not_found";
        case ErrorKind::Format: return "format";
        case ErrorKind::Infeasible: return "infeasible";
        case ErrorKind::Numerical: return "numerical";
    }
    return "unknown";
}

}  // namespace sgae

namespace sgae::io {

static_assert(std::endian::native == std::endian::little, "blob format assumes a little-endian host");

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::NotFound, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Matrix parse_tsv_matrix(const std::string& text, const std::string& what) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::vector<double> row;
        const char* p = line.data();
        const char* end = p + line.size();
        while (p < end) {
            while (p < end && (*p == '\t' || *p == ' ')) ++p;
            if (p == end) break;
            double v = 0.0;
            auto [next, ec] = std::from_chars(p, end, v);
            if (ec != std::errc() || (next < end && *next != '\t' && *next != ' '))
                throw Error(ErrorKind::Format, what + ": bad number on line " + std::to_string(line_no));
            row.push_back(v);
            p = next;
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw Error(ErrorKind::Format, what + ": ragged row on line " + std::to_string(line_no));
        rows.push_back(std::move(row));
    }
    Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
    return m;
}

std::string format_double(double x) {
    if (x == 0.0) return "0";  // also folds -0
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, p);
}

std::string format_tsv_matrix(const Matrix& m) {
    std::string out;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) out += '\t';
            out += format_double(m(i, j));
        }
        out += '\n';
    }
    return out;
}

std::string to_blob(const Matrix& m) {
    std::string bytes(m.size() * sizeof(double), '\0');
    if (!bytes.empty()) std::memcpy(bytes.data(), m.data(), bytes.size());
    return bytes;
}

Matrix from_blob(const std::string& bytes, std::size_t rows, std::size_t cols, const std::string& what) {
    Matrix m(rows, cols);
    if (bytes.size() != m.size() * sizeof(double))
        throw Error(ErrorKind::Format, what + ": blob size does not match declared shape");
    if (!bytes.empty()) std::memcpy(m.data(), bytes.data(), bytes.size());
    return m;
}

void OutputSet::add(const std::filesystem::path& relative, std::string contents) {
    if (relative.is_absolute() || relative.lexically_normal().string().starts_with(".."))
        throw Error(ErrorKind::InvalidArgument, "output path escapes output directory: " + relative.string());
    files_[relative.lexically_normal()] = std::move(contents);
}

std::vector<std::filesystem::path> OutputSet::files() const {
    std::vector<std::filesystem::path> out;
    for (const auto& [rel, _] : files_) out.push_back(root_ / rel);
    return out;
}

void OutputSet::commit() const {
    for (const auto& [rel, contents] : files_) {
        const auto target = root_ / rel;
        std::filesystem::create_directories(target.parent_path());
        auto tmp = target;
        tmp += ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw Error(ErrorKind::NotFound, "cannot write " + tmp.string());
            out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
            if (!out) throw Error(ErrorKind::NotFound, "write failed for " + tmp.string());
        }
        std::filesystem::rename(tmp, target);
    }
}

}  // namespace sgae::io
