/**
 * @file errors.hpp
 * @brief Exception types shared by the epiens modules.
 */
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace epiens {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed CSV content. Carries the 1-based line number of the offending row.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Series shape violations: no days, gaps in day indices.
class StructuralError : public Error {
public:
    using Error::Error;
};

/// Out-of-domain values such as negative counts.
class ValueError : public Error {
public:
    using Error::Error;
};

/// Unknown bundled dataset name.
class LookupError : public Error {
public:
    using Error::Error;
};

/// Not enough data points for the requested operation.
class SizeError : public Error {
public:
    using Error::Error;
};

/// Singular or non-finite least-squares design.
class DegenerateDesign : public Error {
public:
    using Error::Error;
};

/// Requested day range does not overlap the available data.
class RangeError : public Error {
public:
    using Error::Error;
};

enum class ModelErrorKind {
    NotLogistic,
    NoRealAsymptote,
    SaturatedStart,
    UndefinedDoublingTime,
};

inline const char* to_string(ModelErrorKind k) {
    switch (k) {
    case ModelErrorKind::NotLogistic: return "NotLogistic";
    case ModelErrorKind::NoRealAsymptote: return "NoRealAsymptote";
    case ModelErrorKind::SaturatedStart: return "SaturatedStart";
    case ModelErrorKind::UndefinedDoublingTime: return "UndefinedDoublingTime";
    }
    return "Unknown";
}

/// Parameters that do not describe a bounded logistic trajectory.
class ModelError : public Error {
public:
    ModelError(ModelErrorKind kind, const std::string& what)
        : Error(std::string(to_string(kind)) + ": " + what), kind_(kind), detail_(what) {}

    ModelErrorKind kind() const noexcept { return kind_; }
    /// Message without the kind prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    ModelErrorKind kind_;
    std::string detail_;
};

/// Fewer than two ensemble members produced a usable fit.
class EnsembleCollapse : public Error {
public:
    EnsembleCollapse(const std::string& what, std::vector<std::string> member_reasons)
        : Error(what), reasons_(std::move(member_reasons)) {}

    const std::vector<std::string>& member_reasons() const noexcept { return reasons_; }

private:
    std::vector<std::string> reasons_;
};

} // namespace epiens
