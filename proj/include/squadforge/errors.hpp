#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace squadforge {

// Every error raised by the library derives from Error and carries a short
// machine-readable kind ("validation", "conflict", ...). The CLI prints
// "error: <kind>: <message>" on a single line.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define SQUADFORGE_ERROR(Name, kind_literal)                                  \
    class Name : public Error {                                               \
    public:                                                                   \
        explicit Name(const std::string& message) : Error(kind_literal, message) {} \
    };

SQUADFORGE_ERROR(ValidationError, "validation")
SQUADFORGE_ERROR(ConflictError, "conflict")
SQUADFORGE_ERROR(ParseError, "parse")
SQUADFORGE_ERROR(DomainError, "domain")
SQUADFORGE_ERROR(ConfigError, "config")
SQUADFORGE_ERROR(FeedError, "feed")
SQUADFORGE_ERROR(FeatureUnavailableError, "feature-unavailable")
SQUADFORGE_ERROR(PreconditionError, "precondition")
SQUADFORGE_ERROR(EmptyDatasetError, "empty-dataset")
SQUADFORGE_ERROR(UndefinedMetricError, "undefined-metric")
SQUADFORGE_ERROR(InfeasibleError, "infeasible")
SQUADFORGE_ERROR(RefusalError, "refusal")
SQUADFORGE_ERROR(GapError, "gap")
SQUADFORGE_ERROR(IoError, "io")

#undef SQUADFORGE_ERROR

// Network failures are retryable; the fetch layer inspects this flag.
class NetworkError : public Error {
public:
    NetworkError(const std::string& message, bool retryable)
        : Error("network", message), retryable_(retryable) {}

    bool retryable() const noexcept { return retryable_; }

private:
    bool retryable_;
};

}  // namespace squadforge
