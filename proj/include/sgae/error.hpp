#pragma once

#include <stdexcept>
#include <string>

namespace sgae {

enum class ErrorKind {
    InvalidArgument,  // violated precondition
    NotFound,         // missing file or unknown name
    Format,           // malformed input document
    Infeasible,       // constraint cannot be met (sparsity cap, negatives, ...)
    Numerical,        // divergence or non-convergence
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

const char* to_string(ErrorKind kind) noexcept;

}  // namespace sgae
