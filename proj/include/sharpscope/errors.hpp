#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sharpscope {

/// Bad user-supplied configuration (shapes, flags, manifests).
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// A documented precondition or invariant was violated by the caller.
class contract_error : public std::logic_error {
public:
    explicit contract_error(const std::string& what) : std::logic_error(what) {}
};

/// Non-finite values appeared inside an iterative numerical routine.
class numerical_divergence : public std::runtime_error {
public:
    numerical_divergence(const std::string& what, long step)
        : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
    long step() const noexcept { return step_; }

private:
    long step_;
};

/// Malformed on-disk data; carries the byte offset of the first bad field.
class format_error : public std::runtime_error {
public:
    format_error(const std::string& what, std::size_t byte_offset)
        : std::runtime_error(what + " (byte offset " + std::to_string(byte_offset) + ")"),
          offset_(byte_offset) {}
    std::size_t byte_offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Least-squares problem is rank deficient or otherwise unsolvable.
class fit_error : public std::runtime_error {
public:
    explicit fit_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sharpscope
