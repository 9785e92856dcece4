#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace holo {

// Malformed expression source. Carries the byte offset of the failure.
class parse_error : public std::runtime_error {
public:
    parse_error(const std::string& msg, std::size_t offset)
        : std::runtime_error(msg + " at offset " + std::to_string(offset)),
          offset_(offset) {}

    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

// Domain violation during numeric evaluation (log of non-positive,
// sqrt of negative, division by zero, tan at a pole, non-finite result).
class eval_error : public std::runtime_error {
public:
    explicit eval_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid input data: bad spec dimensions, unknown config fields,
// out-of-range options, curves that fail their structural checks.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure: singular metric, curve leaving the chart domain,
// eigenvalue clustering ambiguity, empty sample after exclusions.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace holo
