#pragma once

#include <stdexcept>
#include <string>

namespace randpol {

class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A diagnostic that cannot be computed for the given problem size.
class Unsupported : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw InvalidArgument(msg);
}

}  // namespace randpol
