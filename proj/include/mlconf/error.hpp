#pragma once

#include <stdexcept>
#include <string>

namespace mlconf {

// Base for every error the toolkit raises. code() is a stable identifier
// used in the CLI's machine-readable error line.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

#define MLCONF_DEFINE_ERROR(Name)                                      \
    class Name : public Error {                                        \
    public:                                                            \
        explicit Name(const std::string& message) : Error(#Name, message) {} \
    }

MLCONF_DEFINE_ERROR(UnknownLanguage);
MLCONF_DEFINE_ERROR(UnknownMethod);
MLCONF_DEFINE_ERROR(InvalidArgument);
MLCONF_DEFINE_ERROR(PreconditionViolation);
MLCONF_DEFINE_ERROR(TransportError);
MLCONF_DEFINE_ERROR(ApiRefusal);
MLCONF_DEFINE_ERROR(ProbsUnavailable);
MLCONF_DEFINE_ERROR(ScriptMiss);
MLCONF_DEFINE_ERROR(EmptyGeneration);
MLCONF_DEFINE_ERROR(DecisionTokenMissing);
MLCONF_DEFINE_ERROR(MixedItems);
MLCONF_DEFINE_ERROR(MixedMethods);
MLCONF_DEFINE_ERROR(DegenerateLabels);
MLCONF_DEFINE_ERROR(ConfigError);
MLCONF_DEFINE_ERROR(IoError);
MLCONF_DEFINE_ERROR(StageIncomplete);

#undef MLCONF_DEFINE_ERROR

class GroupingModeMismatch : public Error {
public:
    GroupingModeMismatch(std::string language, const std::string& message)
        : Error("GroupingModeMismatch", message), language_(std::move(language)) {}
    const std::string& language() const noexcept { return language_; }

private:
    std::string language_;
};

class MissingLanguage : public Error {
public:
    explicit MissingLanguage(std::string language)
        : Error("MissingLanguage", "no confidence record for language '" + language + "'"),
          language_(std::move(language)) {}
    const std::string& language() const noexcept { return language_; }

private:
    std::string language_;
};

class MalformedLine : public Error {
public:
    MalformedLine(std::size_t line_no, const std::string& reason)
        : Error("MalformedLine", "line " + std::to_string(line_no) + ": " + reason),
          line_no_(line_no) {}
    std::size_t line_no() const noexcept { return line_no_; }

private:
    std::size_t line_no_;
};

}  // namespace mlconf
