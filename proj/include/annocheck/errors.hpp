#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace annocheck {

// Error categories map 1:1 onto CLI exit codes (stable scripting contract):
// 0 success, 2 config error, 3 backend error, 4 data error.
enum class ErrorCategory : int { Config = 2, Backend = 3, Data = 4 };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, std::string message)
        : std::runtime_error(std::move(message)), category_(category) {}
    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(std::string message) : Error(ErrorCategory::Config, std::move(message)) {}
};

class BackendError : public Error {
public:
    explicit BackendError(std::string message) : Error(ErrorCategory::Backend, std::move(message)) {}
};

class DataError : public Error {
public:
    explicit DataError(std::string message) : Error(ErrorCategory::Data, std::move(message)) {}
};

// --- config ---------------------------------------------------------------

class InvalidLayoutError : public ConfigError {
public:
    explicit InvalidLayoutError(const std::string& layout)
        : ConfigError("invalid prompt layout: \"" + layout + "\"") {}
};

// --- backend ---------------------------------------------------------------

class AuthError : public BackendError {
public:
    explicit AuthError(std::string message) : BackendError(std::move(message)) {}
};

class RateLimitedError : public BackendError {
public:
    explicit RateLimitedError(std::string message) : BackendError(std::move(message)) {}
};

class NetworkTimeoutError : public BackendError {
public:
    explicit NetworkTimeoutError(std::string message) : BackendError(std::move(message)) {}
};

class MalformedResponseError : public BackendError {
public:
    explicit MalformedResponseError(std::string message) : BackendError(std::move(message)) {}
};

// No alias of any expected answer token appeared in the response.
class NoAnswerTokenError : public BackendError {
public:
    explicit NoAnswerTokenError(std::string message) : BackendError(std::move(message)) {}
};

// --- data ------------------------------------------------------------------

class ParseError : public DataError {
public:
    ParseError(std::size_t line, const std::string& detail)
        : DataError("parse error at line " + std::to_string(line) + ": " + detail), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class MissingFieldError : public DataError {
public:
    MissingFieldError(std::string id, std::string field)
        : DataError("record \"" + id + "\": missing field \"" + field + "\""),
          id_(std::move(id)), field_(std::move(field)) {}
    const std::string& id() const noexcept { return id_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::string id_, field_;
};

class UnknownLabelError : public DataError {
public:
    UnknownLabelError(std::string id, std::string label)
        : DataError("record \"" + id + "\": unknown expert label \"" + label + "\""),
          id_(std::move(id)), label_(std::move(label)) {}
    const std::string& id() const noexcept { return id_; }
    const std::string& label() const noexcept { return label_; }

private:
    std::string id_, label_;
};

class DuplicateIdError : public DataError {
public:
    explicit DuplicateIdError(std::string id)
        : DataError("duplicate document id \"" + id + "\""), id_(std::move(id)) {}
    const std::string& id() const noexcept { return id_; }

private:
    std::string id_;
};

class EmptyCorpusError : public DataError {
public:
    EmptyCorpusError() : DataError("corpus is empty") {}
};

class AllZeroMassError : public DataError {
public:
    AllZeroMassError() : DataError("all yes-probabilities are zero; nothing to normalize") {}
};

class NegativeRError : public DataError {
public:
    explicit NegativeRError(double r)
        : DataError("R-score must be nonnegative, got " + std::to_string(r)) {}
};

class EmptyRecordsError : public DataError {
public:
    EmptyRecordsError() : DataError("no flip records supplied") {}
};

class RankDeficientError : public DataError {
public:
    explicit RankDeficientError(std::string message) : DataError(std::move(message)) {}
};

class TooFewRowsError : public DataError {
public:
    TooFewRowsError(long rows, long cols)
        : DataError("regression needs more rows (" + std::to_string(rows) + ") than columns (" +
                    std::to_string(cols) + ")") {}
};

class NumericalInstabilityError : public DataError {
public:
    explicit NumericalInstabilityError(std::string message) : DataError(std::move(message)) {}
};

class MissingLabelsError : public DataError {
public:
    explicit MissingLabelsError(std::vector<std::string> ids)
        : DataError(format(ids)), ids_(std::move(ids)) {}
    const std::vector<std::string>& ids() const noexcept { return ids_; }

private:
    static std::string format(const std::vector<std::string>& ids) {
        std::string msg = "missing labels for " + std::to_string(ids.size()) + " document(s)";
        if (!ids.empty()) {
            msg += " (first: \"" + ids.front() + "\")";
        }
        return msg;
    }
    std::vector<std::string> ids_;
};

class NoRunOutputsError : public DataError {
public:
    explicit NoRunOutputsError(const std::string& dir)
        : DataError("no command outputs found under \"" + dir + "\"") {}
};

}  // namespace annocheck
