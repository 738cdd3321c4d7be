#pragma once

// JSON mappings for the domain types. Field names here are the on-disk
// schema of every JSONL artifact.

#include <nlohmann/json.hpp>

#include "mlconf/types.hpp"

namespace mlconf {

using json = nlohmann::json;

void to_json(json& j, const QAItem& item);
void from_json(const json& j, QAItem& item);

void to_json(json& j, const Token& token);
void from_json(const json& j, Token& token);

void to_json(json& j, const Generation& gen);
void from_json(const json& j, Generation& gen);

void to_json(json& j, const ConfidenceRecord& rec);
void from_json(const json& j, ConfidenceRecord& rec);

void to_json(json& j, const LanguageGrouping& g);
void from_json(const json& j, LanguageGrouping& g);

void to_json(json& j, const EvalRecord& rec);
void from_json(const json& j, EvalRecord& rec);

// Compact single-line dump with stable key order (nlohmann sorts object
// keys) and invalid UTF-8 replaced.
std::string dump_line(const json& j);

}  // namespace mlconf
