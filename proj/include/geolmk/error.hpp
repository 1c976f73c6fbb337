#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace geolmk {

// Base for every error the toolkit raises on purpose. Anything else escaping
// a public function is an internal failure.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Caller supplied something that violates a documented precondition or schema.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Coordinate or index outside the voxel domain.
class DomainError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Malformed file or header. `field()` names the offending key.
class FormatError : public ValidationError {
public:
    FormatError(std::string field, const std::string& what)
        : ValidationError(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// Non-fatal diagnostics (empty sets, snapped landmarks, degenerate inputs).
// The default sink writes to stderr; tests swap it to capture messages.
using DiagnosticSink = std::function<void(const std::string&)>;

void set_diagnostic_sink(DiagnosticSink sink);
void diagnostic(const std::string& message);

// Restores the previous sink on scope exit.
class ScopedDiagnosticSink {
public:
    explicit ScopedDiagnosticSink(DiagnosticSink sink);
    ~ScopedDiagnosticSink();
    ScopedDiagnosticSink(const ScopedDiagnosticSink&) = delete;
    ScopedDiagnosticSink& operator=(const ScopedDiagnosticSink&) = delete;

private:
    DiagnosticSink previous_;
};

}  // namespace geolmk
