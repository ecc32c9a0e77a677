#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace itinera {

/// Input failed a domain invariant. `field()` names the offending field.
class ValidationError : public std::invalid_argument {
public:
    ValidationError(std::string field, const std::string& message)
        : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// An external provider (places, embeddings, chat completion) failed.
class ProviderError : public std::runtime_error {
public:
    ProviderError(const std::string& message, bool retryable, std::vector<std::size_t> failed_indices = {})
        : std::runtime_error(message), retryable_(retryable), failed_indices_(std::move(failed_indices)) {}

    bool retryable() const noexcept { return retryable_; }
    /// Batch positions that were not served (embedding calls).
    const std::vector<std::size_t>& failed_indices() const noexcept { return failed_indices_; }

private:
    bool retryable_;
    std::vector<std::size_t> failed_indices_;
};

/// Operation not allowed in the session's current phase.
class TerminalStateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class NotFoundError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace itinera
