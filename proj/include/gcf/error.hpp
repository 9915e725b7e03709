#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace gcf {

// Library-wide error type. `category` is a stable machine-readable tag
// (e.g. "shape_mismatch", "bad_magic", "truncation"); `what()` carries the
// human-readable detail.
class GcfError : public std::runtime_error {
public:
    GcfError(std::string category, const std::string& message)
        : std::runtime_error(message), category_(std::move(category)) {}

    const std::string& category() const noexcept { return category_; }

private:
    std::string category_;
};

inline void require(bool cond, const std::string& category, const std::string& message) {
    if (!cond) throw GcfError(category, message);
}

}  // namespace gcf
